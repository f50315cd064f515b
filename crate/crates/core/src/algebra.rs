//! Finite-dimensional stand-ins for Poincaré generators.
//!
//! Nothing here builds a genuine unitary representation: finite matrices
//! cannot satisfy the full algebra. The functions measure how far supplied
//! matrices are from the required brackets, solve for the interaction part
//! `W` of the boost generator, and test whether two Hamiltonians generate
//! the same ray history.
//!
//! Bracket conventions: [Jᵢ,Jⱼ] = iεᵢⱼₖJₖ, [Jᵢ,Kⱼ] = iεᵢⱼₖKₖ,
//! [Kᵢ,Kⱼ] = −iεᵢⱼₖJₖ, [Jᵢ,Pⱼ] = iεᵢⱼₖPₖ, [Pᵢ,Kⱼ] = iδᵢⱼH, [Kᵢ,H] = −iPᵢ,
//! [Jᵢ,H] = [Pᵢ,H] = [Pᵢ,Pⱼ] = 0.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Hermiticity tolerance for inputs.
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("need at least two generators, got {0}")]
    TooFewGenerators(usize),
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("no sample times given")]
    NoTimes,
    #[error("axis {0} out of range (0, 1 or 2)")]
    BadAxis(usize),
    #[error("boost generator for axis {0} was not supplied")]
    MissingBoost(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum AlgebraWarning {
    /// The named matrix deviates from Hermitian by the given Frobenius norm.
    NonHermitian { name: String, defect: f64 },
    /// W on degenerate pairs (including the diagonal) was set to zero.
    DegenerateGauge,
}

impl std::fmt::Display for AlgebraWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AlgebraWarning::NonHermitian { name, defect } => {
                write!(f, "{name} is not Hermitian (‖A − A†‖_F = {defect:.3e})")
            }
            AlgebraWarning::DegenerateGauge => write!(
                f,
                "W is zero on degenerate energy pairs; that block is a gauge choice"
            ),
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

fn check_square(name: &str, m: &CMatrix, dim: usize) -> Result<(), AlgebraError> {
    if m.nrows() == dim && m.ncols() == dim {
        Ok(())
    } else {
        Err(AlgebraError::DimensionMismatch(format!(
            "{name} is {}×{}, expected {dim}×{dim}",
            m.nrows(),
            m.ncols()
        )))
    }
}

/// Optional set of generator matrices of a common dimension.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GeneratorSet {
    pub h: Option<CMatrix>,
    pub p: [Option<CMatrix>; 3],
    pub j: [Option<CMatrix>; 3],
    pub k: [Option<CMatrix>; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Family {
    H,
    P,
    J,
    K,
}

impl Family {
    fn letter(self) -> char {
        match self {
            Family::H => 'H',
            Family::P => 'P',
            Family::J => 'J',
            Family::K => 'K',
        }
    }
}

/// Right-hand side of a bracket: Σ coefficient × generator.
type Rhs = Vec<(Complex64, Family, usize)>;

fn levi_civita(i: usize, j: usize) -> Option<(usize, f64)> {
    match (i, j) {
        (0, 1) => Some((2, 1.0)),
        (1, 2) => Some((0, 1.0)),
        (2, 0) => Some((1, 1.0)),
        (1, 0) => Some((2, -1.0)),
        (2, 1) => Some((0, -1.0)),
        (0, 2) => Some((1, -1.0)),
        _ => None,
    }
}

/// Required value of [A_i, B_j] (index ignored for H).
fn required(a: Family, i: usize, b: Family, j: usize) -> Rhs {
    use Family::*;
    let eps = |fam: Family, sign: f64| -> Rhs {
        levi_civita(i, j)
            .map(|(k, s)| vec![(c(0.0, sign * s), fam, k)])
            .unwrap_or_default()
    };
    match (a, b) {
        (J, J) => eps(J, 1.0),
        (J, K) => eps(K, 1.0),
        (K, K) => eps(J, -1.0),
        (J, P) => eps(P, 1.0),
        (P, K) if i == j => vec![(c(0.0, 1.0), H, 0)],
        (K, H) => vec![(c(0.0, -1.0), P, i)],
        _ => Vec::new(),
    }
}

impl GeneratorSet {
    fn get(&self, fam: Family, idx: usize) -> Option<&CMatrix> {
        match fam {
            Family::H => self.h.as_ref(),
            Family::P => self.p[idx].as_ref(),
            Family::J => self.j[idx].as_ref(),
            Family::K => self.k[idx].as_ref(),
        }
    }

    fn present(&self) -> Vec<(String, &CMatrix)> {
        let mut out = Vec::new();
        if let Some(h) = &self.h {
            out.push(("H".to_string(), h));
        }
        for (fam, arr) in [("P", &self.p), ("J", &self.j), ("K", &self.k)] {
            for (i, m) in arr.iter().enumerate() {
                if let Some(m) = m {
                    out.push((format!("{fam}{}", i + 1), m));
                }
            }
        }
        out
    }

    /// Common dimension, checking all present matrices agree.
    pub fn dim(&self) -> Result<Option<usize>, AlgebraError> {
        let present = self.present();
        let Some((_, first)) = present.first() else {
            return Ok(None);
        };
        let dim = first.nrows();
        for (name, m) in &present {
            check_square(name, m, dim)?;
        }
        Ok(Some(dim))
    }

    /// Frobenius norm of A − A† for every present generator.
    pub fn hermiticity_report(&self) -> BTreeMap<String, f64> {
        self.present()
            .into_iter()
            .map(|(name, m)| (name, hermiticity_defect(m)))
            .collect()
    }
}

/// Brackets checkable among the supplied generators, keyed like `[P1,K1]`.
///
/// Each value is ‖[A,B] − required‖_F. A bracket is skipped when a generator
/// it involves (on either side) is absent.
pub fn bracket_residuals(gens: &GeneratorSet) -> Result<BTreeMap<String, f64>, AlgebraError> {
    let count = gens.present().len();
    if count < 2 {
        return Err(AlgebraError::TooFewGenerators(count));
    }
    gens.dim()?;
    use Family::*;
    let slots: Vec<(Family, usize)> = std::iter::once((H, 0))
        .chain([P, J, K].into_iter().flat_map(|f| (0..3).map(move |i| (f, i))))
        .collect();
    let label = |f: Family, i: usize| match f {
        H => "H".to_string(),
        _ => format!("{}{}", f.letter(), i + 1),
    };

    let mut table = BTreeMap::new();
    for (ai, &(fa, ia)) in slots.iter().enumerate() {
        for &(fb, ib) in &slots[ai + 1..] {
            // Orient as the conventions are written: H last, J before P.
            let (fa, ia, fb, ib) = match (fa, fb) {
                (H, _) | (P, J) => (fb, ib, fa, ia),
                _ => (fa, ia, fb, ib),
            };
            let (Some(a), Some(b)) = (gens.get(fa, ia), gens.get(fb, ib)) else {
                continue;
            };
            let rhs = required(fa, ia, fb, ib);
            let mut target = CMatrix::zeros(a.nrows(), a.ncols());
            let mut available = true;
            for (coef, f, k) in rhs {
                match gens.get(f, k) {
                    Some(m) => target += m * coef,
                    None => available = false,
                }
            }
            if !available {
                continue;
            }
            let residual = (commutator(a, b) - target).norm();
            table.insert(format!("[{},{}]", label(fa, ia), label(fb, ib)), residual);
        }
    }
    Ok(table)
}

/// Free Hamiltonian, interaction and free boost generators.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSystem {
    pub h0: CMatrix,
    pub v: CMatrix,
    pub k0: [Option<CMatrix>; 3],
}

impl SplitSystem {
    pub fn new(h0: CMatrix, v: CMatrix, k0: [Option<CMatrix>; 3]) -> Result<Self, AlgebraError> {
        let dim = h0.nrows();
        check_square("H0", &h0, dim)?;
        check_square("V", &v, dim)?;
        for (i, k) in k0.iter().enumerate() {
            if let Some(k) = k {
                check_square(&format!("K0[{}]", i + 1), k, dim)?;
            }
        }
        Ok(SplitSystem { h0, v, k0 })
    }

    pub fn hamiltonian(&self) -> CMatrix {
        &self.h0 + &self.v
    }

    pub fn warnings(&self) -> Vec<AlgebraWarning> {
        let mut out = Vec::new();
        let mut check = |name: &str, m: &CMatrix| {
            let defect = hermiticity_defect(m);
            if defect > HERMITIAN_TOL {
                out.push(AlgebraWarning::NonHermitian {
                    name: name.to_string(),
                    defect,
                });
            }
        };
        check("H0", &self.h0);
        check("V", &self.v);
        for (i, k) in self.k0.iter().enumerate() {
            if let Some(k) = k {
                check(&format!("K0[{}]", i + 1), k);
            }
        }
        out
    }
}

/// Solution of [K0, V] = −[W, H] for one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct WSolution {
    pub w: CMatrix,
    /// ‖[K0,V] + [W,H]‖_F.
    pub residual: f64,
    /// Scale the residual is judged against: max(1, ‖K0‖_F ‖V‖_F).
    pub scale: f64,
    /// Eigenpair indices (a, b) with |E_a − E_b| ≤ ε_deg where the source
    /// ⟨a|[K0,V]|b⟩ is not negligible. Includes a = b.
    pub degenerate_obstructions: Vec<(usize, usize)>,
    pub energies: Vec<f64>,
    pub warnings: Vec<AlgebraWarning>,
}

/// Spectral solve for the interaction part of the boost generator.
///
/// With H = H0 + V = U diag(E) U†, the defining equation reads
/// W'_ab (E_a − E_b) = C'_ab with C = [K0, V] and primes denoting the
/// energy basis. Entries with |E_a − E_b| ≤ 1e−9 ‖H‖_F are left at zero.
/// Non-Hermitian input falls back to a least-squares solve of the full
/// Sylvester system.
pub fn solve_w(sys: &SplitSystem, axis: usize) -> Result<WSolution, AlgebraError> {
    if axis > 2 {
        return Err(AlgebraError::BadAxis(axis));
    }
    let k0 = sys.k0[axis].as_ref().ok_or(AlgebraError::MissingBoost(axis + 1))?;
    let h = sys.hamiltonian();
    let source = commutator(k0, &sys.v);
    let scale = (k0.norm() * sys.v.norm()).max(1.0);
    let mut warnings = sys.warnings();

    let hermitian = hermiticity_defect(&h) <= HERMITIAN_TOL;
    let (w, energies, obstructions) = if hermitian {
        let eig = SymmetricEigen::new(h.clone());
        let u = &eig.eigenvectors;
        let energies: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let src = u.adjoint() * &source * u;
        let eps_deg = 1e-9 * h.norm();
        let eps_obs = 1e-9 * source.norm();
        let n = energies.len();
        let mut w_eig = CMatrix::zeros(n, n);
        let mut obstructions = Vec::new();
        for a in 0..n {
            for b in 0..n {
                let gap = energies[a] - energies[b];
                if gap.abs() > eps_deg {
                    w_eig[(a, b)] = src[(a, b)] / gap;
                } else if src[(a, b)].norm() > eps_obs {
                    obstructions.push((a, b));
                }
            }
        }
        if (0..n).any(|a| (0..n).any(|b| a != b && (energies[a] - energies[b]).abs() <= eps_deg)) {
            warnings.push(AlgebraWarning::DegenerateGauge);
        }
        (u * w_eig * u.adjoint(), energies, obstructions)
    } else {
        (solve_sylvester_lstsq(&h, &source), Vec::new(), Vec::new())
    };

    let residual = (&source + commutator(&w, &h)).norm();
    Ok(WSolution {
        w,
        residual,
        scale,
        degenerate_obstructions: obstructions,
        energies,
        warnings,
    })
}

/// Minimal-norm least-squares W with W H − H W = −C.
fn solve_sylvester_lstsq(h: &CMatrix, source: &CMatrix) -> CMatrix {
    let n = h.nrows();
    // Column-major vec: vec(W H) = (Hᵀ ⊗ 1) vec(W), vec(H W) = (1 ⊗ H) vec(W).
    let eye = CMatrix::identity(n, n);
    let op = h.transpose().kronecker(&eye) - eye.kronecker(h);
    let rhs = DVector::from_iterator(n * n, source.iter().map(|z| -z));
    let svd = op.svd(true, true);
    let sol = svd
        .solve(&rhs, 1e-12 * svd.singular_values.max().max(1.0))
        .unwrap_or_else(|_| DVector::zeros(n * n));
    CMatrix::from_column_slice(n, n, sol.as_slice())
}

/// exp(i H t), spectral for Hermitian H, Padé scaling-and-squaring otherwise.
pub fn unitary_evolution(h: &CMatrix, t: f64) -> CMatrix {
    if hermiticity_defect(h) <= HERMITIAN_TOL {
        let eig = SymmetricEigen::new(h.clone());
        let phases = CMatrix::from_diagonal(&DVector::from_iterator(
            h.nrows(),
            eig.eigenvalues.iter().map(|e| Complex64::from_polar(1.0, e * t)),
        ));
        &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
    } else {
        (h * c(0.0, t)).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SameHistory {
    pub same: bool,
    /// (t, c(t) = ⟨w(t)|u(t)⟩).
    pub samples: Vec<(f64, Complex64)>,
    pub warnings: Vec<AlgebraWarning>,
}

/// Tolerance on | |c(t)| − 1 | for calling two ray histories equal.
pub const SAME_HISTORY_TOL: f64 = 1e-9;

/// Whether exp(i(H0+Va)t)ψ0 and exp(i(H0+Vb)t)ψ0 stay on the same ray.
pub fn same_history_check(
    h0: &CMatrix,
    va: &CMatrix,
    vb: &CMatrix,
    psi0: &CVector,
    times: &[f64],
) -> Result<SameHistory, AlgebraError> {
    let dim = h0.nrows();
    check_square("H0", h0, dim)?;
    check_square("Va", va, dim)?;
    check_square("Vb", vb, dim)?;
    if psi0.len() != dim {
        return Err(AlgebraError::DimensionMismatch(format!(
            "psi0 has length {}, expected {dim}",
            psi0.len()
        )));
    }
    let norm = psi0.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(AlgebraError::NotNormalized(norm));
    }
    if times.is_empty() {
        return Err(AlgebraError::NoTimes);
    }
    let ha = h0 + va;
    let hb = h0 + vb;
    let mut warnings = Vec::new();
    for (name, m) in [("H0+Va", &ha), ("H0+Vb", &hb)] {
        let defect = hermiticity_defect(m);
        if defect > HERMITIAN_TOL {
            warnings.push(AlgebraWarning::NonHermitian {
                name: name.to_string(),
                defect,
            });
        }
    }
    let samples: Vec<(f64, Complex64)> = times
        .iter()
        .map(|&t| {
            let u = unitary_evolution(&ha, t) * psi0;
            let w = unitary_evolution(&hb, t) * psi0;
            (t, w.dotc(&u))
        })
        .collect();
    let same = samples
        .iter()
        .all(|(_, c)| (c.norm() - 1.0).abs() <= SAME_HISTORY_TOL);
    Ok(SameHistory {
        same,
        samples,
        warnings,
    })
}

/// Threshold on ‖Wψ − ⟨ψ|Wψ⟩ψ‖ above which W acts nontrivially on ψ.
pub const NONTRIVIAL_TOL: f64 = 1e-9;

/// True when Wψ is not proportional to ψ.
pub fn boost_nontriviality_check(w: &CMatrix, psi: &CVector) -> Result<bool, AlgebraError> {
    Ok(boost_nontriviality_residual(w, psi)? > NONTRIVIAL_TOL)
}

/// ‖Wψ − ⟨ψ|Wψ⟩ψ‖.
pub fn boost_nontriviality_residual(w: &CMatrix, psi: &CVector) -> Result<f64, AlgebraError> {
    check_square("W", w, psi.len())?;
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(AlgebraError::NotNormalized(norm));
    }
    let wpsi = w * psi;
    let proj = psi.dotc(&wpsi);
    Ok((wpsi - psi * proj).norm())
}
