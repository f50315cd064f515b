//! Spin-1/2 many-body states over a fixed slot ordering.
//!
//! Basis index convention: slot 0 is the most significant bit, and a clear
//! bit is `+`, a set bit is `−`. So for two slots the basis order is
//! `|++⟩, |+−⟩, |−+⟩, |−−⟩`.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

/// Largest number of slots a [`SpinState`] may hold.
pub const MAX_SLOTS: usize = 12;

/// Norm tolerance for constructed states and unitaries.
pub const CONSTRUCTION_TOL: f64 = 1e-12;

/// Default tolerance for comparing states up to phase.
pub const COMPARISON_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("state needs at least one slot")]
    NoSlots,
    #[error("{0} slots exceeds the cap of {MAX_SLOTS}")]
    TooManySlots(usize),
    #[error("amplitude vector has length {got}, expected {expected}")]
    BadLength { expected: usize, got: usize },
    #[error("state norm is {0}, expected 1")]
    NotNormalized(f64),
    #[error("matrix is not unitary (‖U†U − 1‖ = {0:.3e})")]
    NotUnitary(f64),
    #[error("invalid pairing: {0}")]
    InvalidPairing(String),
    #[error("slot {slot} out of range for {n_slots} slots")]
    SlotOutOfRange { slot: usize, n_slots: usize },
    #[error("contact needs two distinct slots, got {0} twice")]
    EqualSlots(usize),
    #[error("slot {0} appears in more than one simultaneous action")]
    OverlappingPairs(usize),
    #[error("dimension mismatch: {0} vs {1} slots")]
    DimensionMismatch(usize, usize),
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Normalized state vector over `n_slots` spin-1/2 slots.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinState {
    n_slots: usize,
    amplitudes: Vec<Complex64>,
}

fn check_slot_count(n_slots: usize) -> Result<(), QuantumError> {
    match n_slots {
        0 => Err(QuantumError::NoSlots),
        n if n > MAX_SLOTS => Err(QuantumError::TooManySlots(n)),
        _ => Ok(()),
    }
}

impl SpinState {
    pub fn from_amplitudes(n_slots: usize, amplitudes: Vec<Complex64>) -> Result<Self, QuantumError> {
        check_slot_count(n_slots)?;
        let expected = 1usize << n_slots;
        if amplitudes.len() != expected {
            return Err(QuantumError::BadLength {
                expected,
                got: amplitudes.len(),
            });
        }
        let norm = norm(&amplitudes);
        if (norm - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(QuantumError::NotNormalized(norm));
        }
        Ok(SpinState { n_slots, amplitudes })
    }

    /// Computational basis state; `labels[k]` is true for `−` on slot k.
    pub fn basis(labels: &[bool]) -> Result<Self, QuantumError> {
        check_slot_count(labels.len())?;
        let n = labels.len();
        let index = labels
            .iter()
            .enumerate()
            .filter(|(_, &minus)| minus)
            .fold(0usize, |acc, (k, _)| acc | (1 << (n - 1 - k)));
        let mut amplitudes = vec![Complex64::default(); 1 << n];
        amplitudes[index] = c(1.0, 0.0);
        Ok(SpinState { n_slots: n, amplitudes })
    }

    pub fn n_slots(&self) -> usize {
        self.n_slots
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    /// Multiplies every amplitude by e^{iφ}.
    pub fn with_phase(&self, phi: f64) -> SpinState {
        let p = Complex64::from_polar(1.0, phi);
        SpinState {
            n_slots: self.n_slots,
            amplitudes: self.amplitudes.iter().map(|a| a * p).collect(),
        }
    }

    fn bit(&self, slot: usize) -> usize {
        1 << (self.n_slots - 1 - slot)
    }

    fn check_slot(&self, slot: usize) -> Result<(), QuantumError> {
        if slot < self.n_slots {
            Ok(())
        } else {
            Err(QuantumError::SlotOutOfRange {
                slot,
                n_slots: self.n_slots,
            })
        }
    }

    /// Ket label like `|+−+−⟩` for a basis index.
    pub fn ket_label(&self, index: usize) -> String {
        let mut s = String::from("|");
        for slot in 0..self.n_slots {
            s.push(if index & self.bit(slot) == 0 { '+' } else { '-' });
        }
        s.push('⟩');
        s
    }
}

impl fmt::Display for SpinState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, a) in self.amplitudes.iter().enumerate() {
            if a.norm() <= CONSTRUCTION_TOL {
                continue;
            }
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "({:+.6}{:+.6}i){}", a.re, a.im, self.ket_label(i))?;
        }
        Ok(())
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

/// A single-slot state (amplitude on `+`, amplitude on `−`).
pub type SingleSpin = [Complex64; 2];

/// Disjoint ordered slot pairs, each prepared as a singlet, plus explicit
/// states for any remaining slots.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PairingSpec {
    pub pairs: Vec<(usize, usize)>,
    pub singles: Vec<(usize, SingleSpin)>,
}

impl PairingSpec {
    pub fn pairs(pairs: &[(usize, usize)]) -> Self {
        PairingSpec {
            pairs: pairs.to_vec(),
            singles: Vec::new(),
        }
    }
}

/// Tensor product of singlets (|+−⟩ − |−+⟩)/√2 on each listed pair; the
/// first-listed slot carries the first label of the positive term.
pub fn singlet_product(n_slots: usize, pairing: &PairingSpec) -> Result<SpinState, QuantumError> {
    check_slot_count(n_slots)?;
    let mut owner = vec![false; n_slots];
    let mut claim = |slot: usize| -> Result<(), QuantumError> {
        if slot >= n_slots {
            return Err(QuantumError::InvalidPairing(format!(
                "slot {slot} out of range for {n_slots} slots"
            )));
        }
        if std::mem::replace(&mut owner[slot], true) {
            return Err(QuantumError::InvalidPairing(format!("slot {slot} used twice")));
        }
        Ok(())
    };
    for &(a, b) in &pairing.pairs {
        claim(a)?;
        claim(b)?;
    }
    for (slot, _) in &pairing.singles {
        claim(*slot)?;
    }
    if let Some(free) = owner.iter().position(|used| !used) {
        return Err(QuantumError::InvalidPairing(format!(
            "slot {free} is neither paired nor given a state"
        )));
    }
    for (slot, amp) in &pairing.singles {
        let n = norm(amp);
        if (n - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(QuantumError::InvalidPairing(format!(
                "single-slot state on {slot} has norm {n}"
            )));
        }
    }

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let bit = |slot: usize| 1usize << (n_slots - 1 - slot);
    let mut amplitudes = vec![c(1.0, 0.0)];
    let mut support = vec![0usize];
    // Expand factor by factor over the sparse support.
    for &(a, b) in &pairing.pairs {
        let (ba, bb) = (bit(a), bit(b));
        let mut next_amp = Vec::with_capacity(amplitudes.len() * 2);
        let mut next_sup = Vec::with_capacity(amplitudes.len() * 2);
        for (amp, idx) in amplitudes.iter().zip(&support) {
            next_amp.push(amp * s);
            next_sup.push(idx | bb);
            next_amp.push(amp * -s);
            next_sup.push(idx | ba);
        }
        amplitudes = next_amp;
        support = next_sup;
    }
    for (slot, single) in &pairing.singles {
        let bs = bit(*slot);
        let mut next_amp = Vec::with_capacity(amplitudes.len() * 2);
        let mut next_sup = Vec::with_capacity(amplitudes.len() * 2);
        for (amp, idx) in amplitudes.iter().zip(&support) {
            next_amp.push(amp * single[0]);
            next_sup.push(*idx);
            next_amp.push(amp * single[1]);
            next_sup.push(idx | bs);
        }
        amplitudes = next_amp;
        support = next_sup;
    }

    let mut dense = vec![Complex64::default(); 1 << n_slots];
    for (amp, idx) in amplitudes.into_iter().zip(support) {
        dense[idx] += amp;
    }
    SpinState::from_amplitudes(n_slots, dense)
}

/// 4×4 unitary acting on an ordered slot pair, in the basis
/// |++⟩, |+−⟩, |−+⟩, |−−⟩ of (first, second).
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSlotUnitary {
    matrix: [[Complex64; 4]; 4],
}

impl TwoSlotUnitary {
    pub fn new(matrix: [[Complex64; 4]; 4]) -> Result<Self, QuantumError> {
        let defect = unitarity_defect(&matrix);
        if defect > CONSTRUCTION_TOL {
            return Err(QuantumError::NotUnitary(defect));
        }
        Ok(TwoSlotUnitary { matrix })
    }

    pub fn identity() -> Self {
        let mut m = [[Complex64::default(); 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = c(1.0, 0.0);
        }
        TwoSlotUnitary { matrix: m }
    }

    pub fn matrix(&self) -> &[[Complex64; 4]; 4] {
        &self.matrix
    }

    pub fn is_identity(&self) -> bool {
        self == &TwoSlotUnitary::identity()
    }

    /// The same map with the roles of the two slots exchanged.
    pub fn reversed(&self) -> Self {
        // |ab⟩ ↔ |ba⟩ permutes indices 1 and 2.
        let p = [0usize, 2, 1, 3];
        let m = std::array::from_fn(|i| std::array::from_fn(|j| self.matrix[p[i]][p[j]]));
        TwoSlotUnitary { matrix: m }
    }

    pub fn compose(&self, other: &TwoSlotUnitary) -> TwoSlotUnitary {
        let m = std::array::from_fn(|i| {
            std::array::from_fn(|j| (0..4).map(|k| self.matrix[i][k] * other.matrix[k][j]).sum())
        });
        TwoSlotUnitary { matrix: m }
    }
}

fn unitarity_defect(m: &[[Complex64; 4]; 4]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let entry: Complex64 = (0..4).map(|k| m[k][i].conj() * m[k][j]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((entry - target).norm());
        }
    }
    worst
}

/// Spin-exchange map: |+−⟩ ↔ |−+⟩, |++⟩ and |−−⟩ fixed.
pub fn swap_unitary() -> TwoSlotUnitary {
    let one = c(1.0, 0.0);
    let zero = Complex64::default();
    TwoSlotUnitary {
        matrix: [
            [one, zero, zero, zero],
            [zero, zero, one, zero],
            [zero, one, zero, zero],
            [zero, zero, zero, one],
        ],
    }
}

/// Applies `u` to the ordered pair of slots, identity elsewhere.
pub fn apply_contact(
    state: &SpinState,
    u: &TwoSlotUnitary,
    pair: (usize, usize),
) -> Result<SpinState, QuantumError> {
    let (a, b) = pair;
    state.check_slot(a)?;
    state.check_slot(b)?;
    if a == b {
        return Err(QuantumError::EqualSlots(a));
    }
    let (ba, bb) = (state.bit(a), state.bit(b));
    let mut out = state.amplitudes.clone();
    let m = u.matrix();
    for base in 0..state.amplitudes.len() {
        if base & (ba | bb) != 0 {
            continue;
        }
        let idx = [base, base | bb, base | ba, base | ba | bb];
        let v = idx.map(|i| state.amplitudes[i]);
        for (r, &target) in idx.iter().enumerate() {
            out[target] = (0..4).map(|k| m[r][k] * v[k]).sum();
        }
    }
    Ok(SpinState {
        n_slots: state.n_slots,
        amplitudes: out,
    })
}

/// Applies several contacts on mutually disjoint pairs.
pub fn apply_group(
    state: &SpinState,
    actions: &[(TwoSlotUnitary, (usize, usize))],
) -> Result<SpinState, QuantumError> {
    let mut seen = vec![false; state.n_slots];
    for (_, (a, b)) in actions {
        for &s in &[*a, *b] {
            state.check_slot(s)?;
            if std::mem::replace(&mut seen[s], true) {
                return Err(QuantumError::OverlappingPairs(s));
            }
        }
    }
    actions
        .iter()
        .try_fold(state.clone(), |acc, (u, pair)| apply_contact(&acc, u, *pair))
}

/// ⟨a|b⟩.
pub fn overlap(a: &SpinState, b: &SpinState) -> Result<Complex64, QuantumError> {
    if a.n_slots != b.n_slots {
        return Err(QuantumError::DimensionMismatch(a.n_slots, b.n_slots));
    }
    Ok(a.amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// True when | |⟨a|b⟩| − 1 | ≤ tol.
pub fn equal_up_to_phase(a: &SpinState, b: &SpinState, tol: f64) -> Result<bool, QuantumError> {
    Ok((overlap(a, b)?.norm() - 1.0).abs() <= tol)
}

/// Norms of Ĵx|ψ⟩, Ĵy|ψ⟩, Ĵz|ψ⟩ with Ĵk = Σ_slots σk / 2.
pub fn angular_momentum_norms(state: &SpinState) -> [f64; 3] {
    let dim = state.amplitudes.len();
    let mut jx = vec![Complex64::default(); dim];
    let mut jy = vec![Complex64::default(); dim];
    let mut jz = vec![Complex64::default(); dim];
    for slot in 0..state.n_slots {
        let bit = state.bit(slot);
        for (i, amp) in state.amplitudes.iter().enumerate() {
            let minus = i & bit != 0;
            // σx flips, σy flips with ±i, σz is diagonal ±1.
            jx[i ^ bit] += amp * 0.5;
            let phase = if minus { c(0.0, -0.5) } else { c(0.0, 0.5) };
            jy[i ^ bit] += amp * phase;
            jz[i] += amp * if minus { -0.5 } else { 0.5 };
        }
    }
    [norm(&jx), norm(&jy), norm(&jz)]
}
