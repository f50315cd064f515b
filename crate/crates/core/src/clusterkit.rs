//! Cluster-decomposition linter for momentum-space interaction kernels.
//!
//! A kernel's delta functions are rational rows over the momentum slots,
//! outgoing slots first (sign +) then incoming slots (sign −). A kernel
//! clusters properly exactly when its delta rows span the single overall
//! conservation row.

use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::geometry::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("kernel needs at least two momentum slots, got {0}")]
    TooFewSlots(usize),
    #[error("delta row {row} has {got} coefficients, expected {expected}")]
    RowLength { row: usize, expected: usize, got: usize },
    #[error("delta row {0} is identically zero")]
    ZeroRow(usize),
    #[error("duplicate slot name {0:?}")]
    DuplicateSlot(String),
    #[error("overall momentum conservation is not implied by the delta functions")]
    NotConserving,
}

/// Delta-function structure of an interaction vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentumKernel {
    in_slots: Vec<String>,
    out_slots: Vec<String>,
    deltas: Vec<Vec<Rational>>,
    /// Smooth momentum-dependent factors exist; recorded, not analyzed.
    pub smooth_prefactor_present: bool,
    /// Free-form spin/species structure carried along for reports.
    pub spin_structure: Option<String>,
}

impl MomentumKernel {
    pub fn new(
        in_slots: Vec<String>,
        out_slots: Vec<String>,
        deltas: Vec<Vec<Rational>>,
    ) -> Result<Self, KernelError> {
        let width = in_slots.len() + out_slots.len();
        if width < 2 {
            return Err(KernelError::TooFewSlots(width));
        }
        let mut names: Vec<&String> = out_slots.iter().chain(&in_slots).collect();
        names.sort();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(KernelError::DuplicateSlot(w[0].clone()));
        }
        for (i, row) in deltas.iter().enumerate() {
            if row.len() != width {
                return Err(KernelError::RowLength {
                    row: i,
                    expected: width,
                    got: row.len(),
                });
            }
            if row.iter().all(Zero::is_zero) {
                return Err(KernelError::ZeroRow(i));
            }
        }
        Ok(MomentumKernel {
            in_slots,
            out_slots,
            deltas,
            smooth_prefactor_present: false,
            spin_structure: None,
        })
    }

    pub fn in_slots(&self) -> &[String] {
        &self.in_slots
    }

    pub fn out_slots(&self) -> &[String] {
        &self.out_slots
    }

    pub fn deltas(&self) -> &[Vec<Rational>] {
        &self.deltas
    }

    pub fn width(&self) -> usize {
        self.in_slots.len() + self.out_slots.len()
    }

    /// Slot names in column order: outgoing, then incoming.
    pub fn slot_names(&self) -> Vec<&str> {
        self.out_slots
            .iter()
            .chain(&self.in_slots)
            .map(String::as_str)
            .collect()
    }

    /// Symbolic form of one row, e.g. `q1 + q2 − p1 − p2`.
    pub fn render_row(&self, row: &[Rational]) -> String {
        render_combination(&self.slot_names(), row)
    }

    fn with_deltas(&self, deltas: Vec<Vec<Rational>>) -> Self {
        MomentumKernel {
            deltas,
            ..self.clone()
        }
    }
}

/// Renders Σ c_k·name_k with unicode minus signs.
pub fn render_combination(names: &[&str], row: &[Rational]) -> String {
    let mut out = String::new();
    for (name, coef) in names.iter().zip(row) {
        if coef.is_zero() {
            continue;
        }
        let mag = coef.abs();
        let term = if mag.is_one() {
            (*name).to_string()
        } else {
            format!("{mag}·{name}")
        };
        match (out.is_empty(), coef.is_negative()) {
            (true, false) => out.push_str(&term),
            (true, true) => out.push_str(&format!("−{term}")),
            (false, false) => out.push_str(&format!(" + {term}")),
            (false, true) => out.push_str(&format!(" − {term}")),
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// +1 on outgoing slots, −1 on incoming slots.
pub fn conservation_vector(kernel: &MomentumKernel) -> Vec<Rational> {
    let one = Rational::one();
    std::iter::repeat_n(one.clone(), kernel.out_slots.len())
        .chain(std::iter::repeat_n(-one, kernel.in_slots.len()))
        .collect()
}

/// Reduced row echelon form; returns the nonzero rows and their pivot columns.
pub fn rref(rows: &[Vec<Rational>]) -> (Vec<Vec<Rational>>, Vec<usize>) {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let width = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..width {
        let Some(p) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][col].recip();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x = &*x - &f * p;
            }
        }
        pivots.push(col);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    (m, pivots)
}

/// Coefficients of `v` in an RREF basis, if `v` lies in its span.
fn express_in_basis(basis: &[Vec<Rational>], pivots: &[usize], v: &[Rational]) -> Option<Vec<Rational>> {
    let coeffs: Vec<Rational> = pivots.iter().map(|&p| v[p].clone()).collect();
    let mut rebuilt = vec![Rational::zero(); v.len()];
    for (c, row) in coeffs.iter().zip(basis) {
        for (acc, x) in rebuilt.iter_mut().zip(row) {
            *acc = &*acc + c * x;
        }
    }
    (rebuilt == v).then_some(coeffs)
}

fn is_parallel(a: &[Rational], b: &[Rational]) -> bool {
    (0..a.len()).all(|i| (0..a.len()).all(|j| &a[i] * &b[j] == &a[j] * &b[i]))
}

fn support(row: &[Rational]) -> Vec<usize> {
    row.iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, _)| i)
        .collect()
}

/// A constraint beyond overall conservation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterWitness {
    pub coefficients: Vec<Rational>,
    /// Column indices with nonzero coefficient.
    pub support: Vec<usize>,
}

impl ClusterWitness {
    pub fn is_proper_subset(&self, width: usize) -> bool {
        self.support.len() < width
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterVerdict {
    pub conserves_momentum: bool,
    pub compliant: bool,
    pub rank: usize,
    pub witness: Option<ClusterWitness>,
}

/// Decides whether the delta rows amount to exactly one overall
/// conservation constraint.
pub fn analyze(kernel: &MomentumKernel) -> ClusterVerdict {
    let c = conservation_vector(kernel);
    let (basis, pivots) = rref(&kernel.deltas);
    let rank = basis.len();
    let conserves_momentum = rank > 0 && express_in_basis(&basis, &pivots, &c).is_some();
    let compliant = conserves_momentum && rank == 1;
    // RREF rows have distinct pivots, and a row's smallest support index is
    // its pivot, so the first non-conservation row has the lexicographically
    // smallest support.
    let witness = if compliant {
        None
    } else {
        basis.iter().find(|row| !is_parallel(row, &c)).map(|row| ClusterWitness {
            support: support(row),
            coefficients: row.clone(),
        })
    };
    ClusterVerdict {
        conserves_momentum,
        compliant,
        rank,
        witness,
    }
}

/// Equivalent kernel whose first row is the conservation row, followed by
/// the residual constraints in reduced form.
pub fn canonicalize(kernel: &MomentumKernel) -> Result<MomentumKernel, KernelError> {
    let c = conservation_vector(kernel);
    let (basis, pivots) = rref(&kernel.deltas);
    let coeffs = express_in_basis(&basis, &pivots, &c).ok_or(KernelError::NotConserving)?;
    // c uses every basis row with a nonzero coefficient; dropping the last
    // such row keeps the span once c is added back.
    let drop = coeffs
        .iter()
        .rposition(|x| !x.is_zero())
        .expect("conservation row is nonzero");
    let mut rows = vec![c];
    rows.extend(
        basis
            .into_iter()
            .enumerate()
            .filter(|(i, _)| *i != drop)
            .map(|(_, r)| r),
    );
    let canonical = kernel.with_deltas(rows);
    debug_assert!(same_row_space(&kernel.deltas, &canonical.deltas));
    Ok(canonical)
}

/// Mutual containment of two row spaces.
pub fn same_row_space(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> bool {
    let (ba, pa) = rref(a);
    let (bb, pb) = rref(b);
    a.iter().all(|r| express_in_basis(&bb, &pb, r).is_some())
        && b.iter().all(|r| express_in_basis(&ba, &pa, r).is_some())
}

impl fmt::Display for ClusterVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.compliant {
            "compliant"
        } else if !self.conserves_momentum {
            "non-conserving"
        } else {
            "violates cluster decomposition"
        };
        write!(f, "{status} (rank {})", self.rank)
    }
}
