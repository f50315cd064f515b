#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use narratables::algebra::{CMatrix, CVector, SplitSystem};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub const BIN: &str = env!("CARGO_BIN_EXE_narratables");

pub fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

/// Fresh scratch directory under the target dir.
pub fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

pub fn cli(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env("NARRATABLES_COLOR", "never")
        .output()
        .expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

pub fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> CMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
    (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn random_unit(rng: &mut impl Rng, n: usize) -> CVector {
    DVector::from_fn(n, |_, _| gaussian(rng)).normalize()
}

/// Q factor of a complex Gaussian matrix, phases fixed by R's diagonal.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> CMatrix {
    let qr = DMatrix::from_fn(n, n, |_, _| gaussian(rng)).qr();
    let (q, r) = (qr.q(), qr.r());
    CMatrix::from_fn(n, n, |i, j| {
        let d = r[(j, j)];
        q[(i, j)] * (d / d.norm())
    })
}

/// Entry-by-entry commutator.
pub fn loop_commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = a.nrows();
    CMatrix::from_fn(n, n, |i, j| {
        (0..n).map(|k| a[(i, k)] * b[(k, j)] - b[(i, k)] * a[(k, j)]).sum()
    })
}

pub fn frob(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Random Hermitian H0, V and K0 with H-gaps above 1e−3, K0 adjusted so that
/// [K0, V] has vanishing diagonal in the energy basis.
pub fn solvable_system(rng: &mut impl Rng, n: usize) -> SplitSystem {
    loop {
        let h0 = random_hermitian(rng, n);
        let v = random_hermitian(rng, n);
        let eig = SymmetricEigen::new(&h0 + &v);
        let mut e: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if e.windows(2).any(|w| w[1] - w[0] <= 1e-3) {
            continue;
        }
        let u = eig.eigenvectors;
        let vp = u.adjoint() * &v * &u;
        let k = random_hermitian(rng, n);
        let d = (u.adjoint() * loop_commutator(&k, &v) * &u).diagonal();

        // Off-diagonal Hermitian Y in the energy basis, two real params per a<b.
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let basis_y = |p: usize| {
            let (a, b) = pairs[p / 2];
            let z = if p.is_multiple_of(2) { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 1.0) };
            let mut y = CMatrix::zeros(n, n);
            y[(a, b)] = z;
            y[(b, a)] = z.conj();
            y
        };
        let m = pairs.len() * 2;
        let mut a_mat = DMatrix::<f64>::zeros(n, m);
        for p in 0..m {
            let f = loop_commutator(&basis_y(p), &vp).diagonal();
            for r in 0..n {
                a_mat[(r, p)] = f[r].im;
            }
        }
        let rhs = DVector::from_iterator(n, d.iter().map(|z| -z.im));
        let gram = SymmetricEigen::new(&a_mat * a_mat.transpose());
        let top = gram.eigenvalues.max();
        let coeffs = gram.eigenvectors.transpose() * &rhs;
        let z = &gram.eigenvectors
            * DVector::from_fn(n, |r, _| {
                let l = gram.eigenvalues[r];
                if l > 1e-10 * top { coeffs[r] / l } else { 0.0 }
            });
        let params = a_mat.transpose() * z;
        let mut y = CMatrix::zeros(n, n);
        for p in 0..m {
            y += basis_y(p) * Complex64::new(params[p], 0.0);
        }
        let k0 = k + &u * y * u.adjoint();
        return SplitSystem::new(h0, v, [Some(k0), None, None]).unwrap();
    }
}
