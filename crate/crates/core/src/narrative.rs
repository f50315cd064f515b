//! State histories along flat foliations and the two-rule narratability
//! verdict.
//!
//! A boosted history is obtained by re-foliating the same worldlines and the
//! same initial spin data: only the leaf ordering of collisions changes. Spin
//! transport between frames is taken as the identity, which is only sound
//! for states with vanishing total angular momentum; [`evolve`] checks this
//! and records a [`Warning::LittleGroup`] otherwise.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::geometry::{
    collide, collision_schedule, CollisionGroup, Foliation, GeometryError, LeafTime, Rational,
    Worldline,
};
use crate::quantum::{
    angular_momentum_norms, apply_group, overlap, QuantumError, SpinState, TwoSlotUnitary,
    COMPARISON_TOL,
};

/// Total-spin norm above which a boosted history is flagged.
pub const LITTLE_GROUP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NarrativeError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("scenario has {worldlines} worldlines but the state has {slots} slots")]
    SlotCountMismatch { worldlines: usize, slots: usize },
    #[error("worldline ids must be 0..{0} with no gaps")]
    BadWorldlineIds(usize),
    #[error("histories live on different foliations ({0} vs {1})")]
    FoliationMismatch(String, String),
    #[error("a narratability report needs at least two foliations, got {0}")]
    TooFewFoliations(usize),
}

/// Unordered species pair, stored with the smaller name first.
fn species_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_owned(), b.to_owned())
    } else {
        (b.to_owned(), a.to_owned())
    }
}

/// Map from species pairs to contact unitaries; missing pairs do not interact.
///
/// A unitary stored for `(A, B)` acts with the A-slot first. For a pair of
/// equal species the lower slot id goes first.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionRule {
    name: String,
    contacts: BTreeMap<(String, String), TwoSlotUnitary>,
}

impl InteractionRule {
    /// The rule with no interactions at all.
    pub fn free() -> Self {
        InteractionRule::new("free")
    }

    pub fn new(name: impl Into<String>) -> Self {
        InteractionRule {
            name: name.into(),
            contacts: BTreeMap::new(),
        }
    }

    /// The same unitary on every pair drawn from `species`, including
    /// equal-species pairs.
    pub fn uniform(name: impl Into<String>, species: &[&str], u: &TwoSlotUnitary) -> Self {
        let mut rule = InteractionRule::new(name);
        for (i, a) in species.iter().enumerate() {
            for b in &species[i..] {
                rule.set(a, b, u.clone());
            }
        }
        rule
    }

    /// Registers `u` for collisions between `first` and `second`, with the
    /// `first` slot as the unitary's first factor.
    pub fn set(&mut self, first: &str, second: &str, u: TwoSlotUnitary) {
        let u = if first <= second { u } else { u.reversed() };
        self.contacts.insert(species_key(first, second), u);
    }

    pub fn with(mut self, first: &str, second: &str, u: TwoSlotUnitary) -> Self {
        self.set(first, second, u);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn contacts(&self) -> impl Iterator<Item = (&(String, String), &TwoSlotUnitary)> {
        self.contacts.iter()
    }

    /// Unitary and slot order for a collision between two worldlines.
    pub fn action_for(&self, a: &Worldline, b: &Worldline) -> (TwoSlotUnitary, (usize, usize)) {
        let (first, second) = match a.species().cmp(b.species()) {
            std::cmp::Ordering::Less => (a, b),
            std::cmp::Ordering::Greater => (b, a),
            std::cmp::Ordering::Equal if a.id() <= b.id() => (a, b),
            std::cmp::Ordering::Equal => (b, a),
        };
        let u = self
            .contacts
            .get(&species_key(a.species(), b.species()))
            .cloned()
            .unwrap_or_else(TwoSlotUnitary::identity);
        (u, (first.id(), second.id()))
    }
}

/// Worldlines plus the spin state before every collision.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    name: String,
    worldlines: Vec<Worldline>,
    initial_state: SpinState,
}

impl Scenario {
    pub fn new(
        name: impl Into<String>,
        worldlines: Vec<Worldline>,
        initial_state: SpinState,
    ) -> Result<Self, NarrativeError> {
        let n = worldlines.len();
        if n != initial_state.n_slots() {
            return Err(NarrativeError::SlotCountMismatch {
                worldlines: n,
                slots: initial_state.n_slots(),
            });
        }
        let mut ids: Vec<usize> = worldlines.iter().map(Worldline::id).collect();
        ids.sort_unstable();
        if ids.iter().enumerate().any(|(i, &id)| i != id) {
            return Err(NarrativeError::BadWorldlineIds(n));
        }
        for (i, a) in worldlines.iter().enumerate() {
            for b in &worldlines[i + 1..] {
                collide(a, b)?;
            }
        }
        Ok(Scenario {
            name: name.into(),
            worldlines,
            initial_state,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn worldlines(&self) -> &[Worldline] {
        &self.worldlines
    }

    pub fn initial_state(&self) -> &SpinState {
        &self.initial_state
    }

    fn worldline(&self, id: usize) -> &Worldline {
        self.worldlines
            .iter()
            .find(|w| w.id() == id)
            .expect("ids validated at construction")
    }

    /// Same scenario with a different initial state of the same size.
    pub fn with_initial_state(&self, state: SpinState) -> Result<Self, NarrativeError> {
        Scenario::new(self.name.clone(), self.worldlines.clone(), state)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// Boosted foliation applied to a state with nonzero total spin.
    LittleGroup { max_norm: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::LittleGroup { max_norm } => write!(
                f,
                "total-spin norm {max_norm:.3e} exceeds {LITTLE_GROUP_TOL:e}; spin transport \
                 under this boost is treated as trivial without Wigner rotation"
            ),
        }
    }
}

/// Piecewise-constant spin history on one foliation.
///
/// `segments[k]` holds on the leaves between breakpoints k−1 and k; at a
/// breakpoint the post-collision state applies.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    foliation: Foliation,
    groups: Vec<CollisionGroup>,
    segments: Vec<SpinState>,
    warnings: Vec<Warning>,
}

impl History {
    pub fn foliation(&self) -> &Foliation {
        &self.foliation
    }

    pub fn groups(&self) -> &[CollisionGroup] {
        &self.groups
    }

    pub fn breakpoints(&self) -> Vec<LeafTime> {
        self.groups.iter().map(|g| g.tau.clone()).collect()
    }

    /// Breakpoints as ordering keys (τ/γ), exact.
    pub fn breakpoint_keys(&self) -> Vec<Rational> {
        self.groups.iter().map(|g| g.key.clone()).collect()
    }

    pub fn segments(&self) -> &[SpinState] {
        &self.segments
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    /// Index of the segment holding at ordering key `key` (right-continuous).
    pub fn segment_index_at(&self, key: &Rational) -> usize {
        self.groups.iter().take_while(|g| &g.key <= key).count()
    }

    pub fn state_at(&self, key: &Rational) -> &SpinState {
        &self.segments[self.segment_index_at(key)]
    }
}

/// Runs the scenario's collisions in leaf order under `rule`.
pub fn evolve(
    scenario: &Scenario,
    foliation: &Foliation,
    rule: &InteractionRule,
) -> Result<History, NarrativeError> {
    let groups = collision_schedule(&scenario.worldlines, foliation)?;
    let mut segments = vec![scenario.initial_state.clone()];
    for group in &groups {
        let actions: Vec<_> = group
            .collisions
            .iter()
            .map(|c| rule.action_for(scenario.worldline(c.pair.0), scenario.worldline(c.pair.1)))
            .collect();
        let next = apply_group(segments.last().expect("non-empty"), &actions)?;
        segments.push(next);
    }

    let mut warnings = Vec::new();
    if !foliation.is_rest() {
        let max_norm = segments
            .iter()
            .flat_map(angular_momentum_norms)
            .fold(0.0, f64::max);
        if max_norm > LITTLE_GROUP_TOL {
            warnings.push(Warning::LittleGroup { max_norm });
        }
    }
    Ok(History {
        foliation: foliation.clone(),
        groups,
        segments,
        warnings,
    })
}

/// One comparison point between two histories.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub key: Rational,
    pub tau: LeafTime,
    pub overlap_magnitude: f64,
}

/// First sample where two histories disagree.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub tau: LeafTime,
    /// Segment index (in the first history) containing the witness leaf.
    pub segment: usize,
    pub overlap_magnitude: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub equal: bool,
    pub witness: Option<Witness>,
    pub samples: Vec<Sample>,
}

/// Leaves at which two piecewise-constant histories are compared: every
/// breakpoint, every midpoint between consecutive breakpoints, and one leaf
/// beyond each end.
pub fn comparison_keys(h1: &History, h2: &History) -> Vec<Rational> {
    let mut bps: Vec<Rational> = h1
        .breakpoint_keys()
        .into_iter()
        .chain(h2.breakpoint_keys())
        .collect();
    bps.sort();
    bps.dedup();
    let one = Rational::one();
    let Some(first) = bps.first() else {
        return vec![Rational::zero()];
    };
    let mut keys = vec![first - &one];
    for (i, bp) in bps.iter().enumerate() {
        keys.push(bp.clone());
        match bps.get(i + 1) {
            Some(next) => keys.push((bp + next) / Rational::from_integer(2.into())),
            None => keys.push(bp + &one),
        }
    }
    keys
}

/// Compares two histories on a common foliation, up to global phase.
pub fn histories_equal(h1: &History, h2: &History, tol: f64) -> Result<Comparison, NarrativeError> {
    if h1.foliation.velocity() != h2.foliation.velocity() {
        return Err(NarrativeError::FoliationMismatch(
            h1.foliation.to_string(),
            h2.foliation.to_string(),
        ));
    }
    let mut samples = Vec::new();
    let mut witness = None;
    for key in comparison_keys(h1, h2) {
        let mag = overlap(h1.state_at(&key), h2.state_at(&key))?.norm();
        let deviation = (mag - 1.0).abs();
        let tau = h1.foliation.leaf_from_key(&key);
        if witness.is_none() && deviation > tol {
            witness = Some(Witness {
                tau: tau.clone(),
                segment: h1.segment_index_at(&key),
                overlap_magnitude: mag,
                deviation,
            });
        }
        samples.push(Sample {
            key,
            tau,
            overlap_magnitude: mag,
        });
    }
    Ok(Comparison {
        equal: witness.is_none(),
        witness,
        samples,
    })
}

/// Verdict for one foliation.
#[derive(Debug, Clone, PartialEq)]
pub struct FoliationVerdict {
    pub foliation: Foliation,
    /// Number of collision groups under this foliation.
    pub group_count: usize,
    pub comparison: Comparison,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub scenario: String,
    pub rules: (String, String),
    pub verdicts: Vec<FoliationVerdict>,
    /// Equal under some foliation and different under another.
    pub non_narratable: bool,
}

impl Report {
    /// One-paragraph note on how boosted histories were obtained.
    pub const INTERPRETATION: &'static str =
        "boosted histories re-foliate fixed worldlines and spin data; spin transport is the \
         identity, licensed by vanishing total-spin norms";
}

/// Compares the histories of two rules across several foliations.
pub fn narratability_report(
    scenario: &Scenario,
    rule1: &InteractionRule,
    rule2: &InteractionRule,
    foliations: &[Foliation],
    tol: f64,
) -> Result<Report, NarrativeError> {
    if foliations.len() < 2 {
        return Err(NarrativeError::TooFewFoliations(foliations.len()));
    }
    let verdicts = foliations
        .iter()
        .map(|f| {
            let h1 = evolve(scenario, f, rule1)?;
            let h2 = evolve(scenario, f, rule2)?;
            let comparison = histories_equal(&h1, &h2, tol)?;
            let mut warnings = h1.warnings.clone();
            for w in h2.warnings {
                if !warnings.contains(&w) {
                    warnings.push(w);
                }
            }
            Ok(FoliationVerdict {
                foliation: f.clone(),
                group_count: h1.groups.len(),
                comparison,
                warnings,
            })
        })
        .collect::<Result<Vec<_>, NarrativeError>>()?;
    let any_equal = verdicts.iter().any(|v| v.comparison.equal);
    let any_differ = verdicts.iter().any(|v| !v.comparison.equal);
    Ok(Report {
        scenario: scenario.name.clone(),
        rules: (rule1.name.clone(), rule2.name.clone()),
        verdicts,
        non_narratable: any_equal && any_differ,
    })
}

/// Default comparison tolerance re-exported for callers.
pub const DEFAULT_TOL: f64 = COMPARISON_TOL;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rat, zero_vec, Event};
    use crate::quantum::{singlet_product, swap_unitary, PairingSpec};

    fn demo() -> Scenario {
        let down = [rat(0, 1), rat(-1, 2), rat(0, 1)];
        let lines = vec![
            Worldline::new(0, "A", Event::from_ints(0, -1, 0, 0), zero_vec()).unwrap(),
            Worldline::new(1, "B", Event::from_ints(0, 1, 0, 0), zero_vec()).unwrap(),
            Worldline::new(2, "C", Event::from_ints(0, -1, 2, 0), down.clone()).unwrap(),
            Worldline::new(3, "D", Event::from_ints(0, 1, 2, 0), down).unwrap(),
        ];
        let psi = singlet_product(4, &PairingSpec::pairs(&[(0, 1), (2, 3)])).unwrap();
        Scenario::new("demo", lines, psi).unwrap()
    }

    fn flip() -> InteractionRule {
        InteractionRule::uniform("flip", &["A", "B", "C", "D"], &swap_unitary())
    }

    fn xboost(n: i64, d: i64) -> Foliation {
        Foliation::new([rat(n, d), rat(0, 1), rat(0, 1)]).unwrap()
    }

    #[test]
    fn rest_frame_flip_is_invisible() {
        let h = evolve(&demo(), &Foliation::rest(), &flip()).unwrap();
        assert_eq!(h.breakpoints().len(), 1);
        assert_eq!(h.segments().len(), 2);
        let mag = overlap(&h.segments()[0], &h.segments()[1]).unwrap().norm();
        assert!((mag - 1.0).abs() < 1e-12);
    }

    #[test]
    fn boosted_flip_passes_through_repaired_state() {
        let h = evolve(&demo(), &xboost(3, 5), &flip()).unwrap();
        assert_eq!(h.segments().len(), 3);
        let repaired = singlet_product(4, &PairingSpec::pairs(&[(0, 3), (2, 1)])).unwrap();
        let mag = overlap(&h.segments()[1], &repaired).unwrap().norm();
        assert!((mag - 1.0).abs() < 1e-12);
        assert!(h.warnings().is_empty());
    }

    #[test]
    fn free_rule_is_constant() {
        for f in [Foliation::rest(), xboost(3, 5), xboost(-4, 5)] {
            let h = evolve(&demo(), &f, &InteractionRule::free()).unwrap();
            assert!(h.segments().iter().all(|s| s == demo().initial_state()));
        }
    }

    #[test]
    fn comparison_examples() {
        let s = demo();
        let rest_free = evolve(&s, &Foliation::rest(), &InteractionRule::free()).unwrap();
        let rest_flip = evolve(&s, &Foliation::rest(), &flip()).unwrap();
        assert!(histories_equal(&rest_flip, &rest_flip, DEFAULT_TOL).unwrap().equal);
        assert!(histories_equal(&rest_free, &rest_flip, DEFAULT_TOL).unwrap().equal);

        let f = xboost(3, 5);
        let cmp = histories_equal(
            &evolve(&s, &f, &InteractionRule::free()).unwrap(),
            &evolve(&s, &f, &flip()).unwrap(),
            DEFAULT_TOL,
        )
        .unwrap();
        assert!(!cmp.equal);
        let w = cmp.witness.unwrap();
        assert_eq!(w.segment, 1);
        assert!((w.overlap_magnitude - 0.5).abs() < 1e-12);
        assert_eq!(w.tau, LeafTime::Exact(rat(17, 4)));
    }

    #[test]
    fn foliation_mismatch() {
        let s = demo();
        let a = evolve(&s, &Foliation::rest(), &flip()).unwrap();
        let b = evolve(&s, &xboost(3, 5), &flip()).unwrap();
        assert!(matches!(
            histories_equal(&a, &b, DEFAULT_TOL),
            Err(NarrativeError::FoliationMismatch(..))
        ));
    }

    #[test]
    fn report_examples() {
        let s = demo();
        let free = InteractionRule::free();
        let yboost = Foliation::new([rat(0, 1), rat(1, 2), rat(0, 1)]).unwrap();

        let r = narratability_report(&s, &free, &flip(), &[Foliation::rest(), xboost(3, 5)], 1e-10)
            .unwrap();
        assert!(r.non_narratable);
        assert!(r.verdicts[0].comparison.equal && !r.verdicts[1].comparison.equal);

        let r = narratability_report(&s, &free, &flip(), &[Foliation::rest(), yboost], 1e-10)
            .unwrap();
        assert!(!r.non_narratable);
        assert!(r.verdicts.iter().all(|v| v.comparison.equal));

        let r = narratability_report(&s, &free, &free, &[Foliation::rest(), xboost(3, 5)], 1e-10)
            .unwrap();
        assert!(!r.non_narratable);

        assert_eq!(
            narratability_report(&s, &free, &flip(), &[Foliation::rest()], 1e-10),
            Err(NarrativeError::TooFewFoliations(1))
        );
    }

    #[test]
    fn little_group_warning_for_spinful_state() {
        let s = demo();
        let up = crate::quantum::SpinState::basis(&[false; 4]).unwrap();
        let spinful = s.with_initial_state(up).unwrap();
        let h = evolve(&spinful, &xboost(3, 5), &flip()).unwrap();
        assert!(matches!(h.warnings(), [Warning::LittleGroup { .. }]));
        let rest = evolve(&spinful, &Foliation::rest(), &flip()).unwrap();
        assert!(rest.warnings().is_empty());
    }

    #[test]
    fn scenario_validation() {
        let s = demo();
        let psi2 = singlet_product(2, &PairingSpec::pairs(&[(0, 1)])).unwrap();
        assert!(matches!(
            Scenario::new("x", s.worldlines().to_vec(), psi2),
            Err(NarrativeError::SlotCountMismatch { worldlines: 4, slots: 2 })
        ));
        let mut lines = s.worldlines().to_vec();
        lines[3] = Worldline::new(7, "D", Event::from_ints(0, 5, 5, 0), zero_vec()).unwrap();
        assert!(matches!(
            Scenario::new("x", lines, s.initial_state().clone()),
            Err(NarrativeError::BadWorldlineIds(4))
        ));
        let mut lines = s.worldlines().to_vec();
        lines[1] = Worldline::new(1, "B", Event::from_ints(3, -1, 0, 0), zero_vec()).unwrap();
        assert!(matches!(
            Scenario::new("x", lines, s.initial_state().clone()),
            Err(NarrativeError::Geometry(GeometryError::CoincidentWorldlines(0, 1)))
        ));
    }

    #[test]
    fn rule_orientation_follows_species() {
        let rule = InteractionRule::new("r").with("D", "A", swap_unitary());
        let s = demo();
        let (_, pair) = rule.action_for(&s.worldlines()[3], &s.worldlines()[0]);
        assert_eq!(pair, (0, 3));
        let (u, _) = rule.action_for(&s.worldlines()[1], &s.worldlines()[2]);
        assert!(u.is_identity());
    }
}
