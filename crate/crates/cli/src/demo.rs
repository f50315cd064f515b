//! The built-in four-particle scenario.
//!
//! Particles 0 and 1 rest at x = −1 and x = 1. Particles 2 and 3 start at
//! y = 2 above them and move with velocity (0, −1/2, 0), so the collisions
//! (0,2) and (1,3) both happen at t = 4 in the rest frame. All four species
//! differ. Under an x-boost the two collisions separate; under a y-boost
//! they stay simultaneous.

use std::collections::BTreeMap;

use narratables::geometry::{rat, zero_vec, Event, Foliation, Worldline};
use narratables::narrative::{InteractionRule, Scenario};
use narratables::quantum::{singlet_product, swap_unitary, PairingSpec};

use crate::files::LoadedScenario;

pub const SPECIES: [&str; 4] = ["A", "B", "C", "D"];

pub fn flip_rule() -> InteractionRule {
    InteractionRule::uniform("flip", &SPECIES, &swap_unitary())
}

pub fn scenario() -> Scenario {
    let down = [rat(0, 1), rat(-1, 2), rat(0, 1)];
    let lines = vec![
        Worldline::new(0, SPECIES[0], Event::from_ints(0, -1, 0, 0), zero_vec()),
        Worldline::new(1, SPECIES[1], Event::from_ints(0, 1, 0, 0), zero_vec()),
        Worldline::new(2, SPECIES[2], Event::from_ints(0, -1, 2, 0), down.clone()),
        Worldline::new(3, SPECIES[3], Event::from_ints(0, 1, 2, 0), down),
    ]
    .into_iter()
    .collect::<Result<Vec<_>, _>>()
    .expect("built-in worldlines are valid");
    let psi = singlet_product(4, &PairingSpec::pairs(&[(0, 1), (2, 3)])).expect("built-in pairing is valid");
    Scenario::new("four-particle-demo", lines, psi).expect("built-in scenario is valid")
}

/// Rest, x-boost 3/5 and y-boost 1/2.
pub fn foliations() -> Vec<Foliation> {
    vec![
        Foliation::rest(),
        Foliation::new([rat(3, 5), rat(0, 1), rat(0, 1)]).expect("subluminal"),
        Foliation::new([rat(0, 1), rat(1, 2), rat(0, 1)]).expect("subluminal"),
    ]
}

pub fn loaded() -> LoadedScenario {
    let mut rules = BTreeMap::new();
    rules.insert("free".to_owned(), InteractionRule::free());
    rules.insert("flip".to_owned(), flip_rule());
    LoadedScenario {
        scenario: scenario(),
        rules,
        foliations: foliations(),
        warnings: Vec::new(),
    }
}
