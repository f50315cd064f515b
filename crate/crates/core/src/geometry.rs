//! Exact Minkowski kinematics: boosts, flat foliations, inertial worldlines
//! and contact-collision scheduling.
//!
//! Conventions: natural units (c = 1), metric signature (+, −, −, −), and a
//! boost with velocity `v` maps rest-frame coordinates to primed coordinates
//! with `t' = γ (t − v·x)`.

use std::cmp::Ordering;
use std::fmt;

use nalgebra::{Matrix4, Vector3};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational scalar used for all coordinates.
pub type Rational = BigRational;

/// Rational spatial 3-vector.
pub type RVec3 = [Rational; 3];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("velocity {0} is not subluminal (|v| must be < 1)")]
    SuperluminalVelocity(String),
    #[error("worldlines {0} and {1} coincide everywhere")]
    CoincidentWorldlines(usize, usize),
    #[error("collide() needs two distinct slots, got {0} twice")]
    SameSlot(usize),
    #[error("slot {slot} takes part in two simultaneous collisions at leaf {leaf}")]
    OverlappingSimultaneousPairs { slot: usize, leaf: String },
    #[error("duplicate worldline id {0}")]
    DuplicateId(usize),
}

/// Shorthand for building a rational from a numerator and denominator.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn rvec(x: Rational, y: Rational, z: Rational) -> RVec3 {
    [x, y, z]
}

pub fn zero_vec() -> RVec3 {
    [Rational::zero(), Rational::zero(), Rational::zero()]
}

fn dot(a: &RVec3, b: &RVec3) -> Rational {
    &a[0] * &b[0] + &a[1] * &b[1] + &a[2] * &b[2]
}

fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn vec_to_f64(v: &RVec3) -> [f64; 3] {
    [to_f64(&v[0]), to_f64(&v[1]), to_f64(&v[2])]
}

fn fmt_vec(v: &RVec3) -> String {
    format!("({}, {}, {})", v[0], v[1], v[2])
}

/// Exact square root of a non-negative rational, if it is a perfect square.
pub fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let (n, d) = (r.numer(), r.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    if &(&sn * &sn) == n && &(&sd * &sd) == d {
        Some(Rational::new(sn, sd))
    } else {
        None
    }
}

fn check_subluminal(v: &RVec3) -> Result<(), GeometryError> {
    if dot(v, v) < Rational::one() {
        Ok(())
    } else {
        Err(GeometryError::SuperluminalVelocity(fmt_vec(v)))
    }
}

/// A spacetime point with exact coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Event {
    pub t: Rational,
    pub x: Rational,
    pub y: Rational,
    pub z: Rational,
}

impl Event {
    pub fn new(t: Rational, x: Rational, y: Rational, z: Rational) -> Self {
        Event { t, x, y, z }
    }

    pub fn from_ints(t: i64, x: i64, y: i64, z: i64) -> Self {
        Event::new(rat(t, 1), rat(x, 1), rat(y, 1), rat(z, 1))
    }

    pub fn spatial(&self) -> RVec3 {
        [self.x.clone(), self.y.clone(), self.z.clone()]
    }

    pub fn to_f64(&self) -> [f64; 4] {
        [to_f64(&self.t), to_f64(&self.x), to_f64(&self.y), to_f64(&self.z)]
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(t={}, x={}, y={}, z={})", self.t, self.x, self.y, self.z)
    }
}

/// Inertial trajectory of a massive particle carrying one spin slot.
///
/// The trajectory is the full straight line through `start` with the given
/// velocity; `start` is only a reference point on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Worldline {
    id: usize,
    species: String,
    start: Event,
    velocity: RVec3,
}

impl Worldline {
    pub fn new(
        id: usize,
        species: impl Into<String>,
        start: Event,
        velocity: RVec3,
    ) -> Result<Self, GeometryError> {
        check_subluminal(&velocity)?;
        Ok(Worldline {
            id,
            species: species.into(),
            start,
            velocity,
        })
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn species(&self) -> &str {
        &self.species
    }

    pub fn start(&self) -> &Event {
        &self.start
    }

    pub fn velocity(&self) -> &RVec3 {
        &self.velocity
    }

    /// Position at coordinate time `t`.
    pub fn position_at(&self, t: &Rational) -> RVec3 {
        let dt = t - &self.start.t;
        let s = self.start.spatial();
        [
            &s[0] + &self.velocity[0] * &dt,
            &s[1] + &self.velocity[1] * &dt,
            &s[2] + &self.velocity[2] * &dt,
        ]
    }

    /// Spatial offset of the line at t = 0.
    fn intercept(&self) -> RVec3 {
        self.position_at(&Rational::zero())
    }
}

/// Pure Lorentz boost with velocity `v`, |v| < 1, float entries.
///
/// Λ(0) is the identity.
pub fn boost_matrix(velocity: [f64; 3]) -> Result<Matrix4<f64>, GeometryError> {
    let v = Vector3::from(velocity);
    let v2 = v.norm_squared();
    if v2.is_nan() || v2 >= 1.0 {
        return Err(GeometryError::SuperluminalVelocity(format!(
            "({}, {}, {})",
            velocity[0], velocity[1], velocity[2]
        )));
    }
    let gamma = 1.0 / (1.0 - v2).sqrt();
    let mut m = Matrix4::identity();
    m[(0, 0)] = gamma;
    for i in 0..3 {
        m[(0, i + 1)] = -gamma * v[i];
        m[(i + 1, 0)] = -gamma * v[i];
        for j in 0..3 {
            // (γ − 1) v_i v_j / v² written as γ² v_i v_j / (γ + 1) to stay finite at v = 0.
            m[(i + 1, j + 1)] += gamma * gamma * v[i] * v[j] / (gamma + 1.0);
        }
    }
    Ok(m)
}

/// Exact boost matrix, available when γ is rational.
///
/// Returns `Ok(None)` when 1 − |v|² is not a rational square.
pub fn boost_matrix_exact(velocity: &RVec3) -> Result<Option<[[Rational; 4]; 4]>, GeometryError> {
    check_subluminal(velocity)?;
    let Some(gamma) = rational_gamma(velocity) else {
        return Ok(None);
    };
    let one = Rational::one();
    let mut m: [[Rational; 4]; 4] = std::array::from_fn(|i| {
        std::array::from_fn(|j| if i == j { one.clone() } else { Rational::zero() })
    });
    m[0][0] = gamma.clone();
    let factor = &gamma * &gamma / (&gamma + &one);
    for i in 0..3 {
        m[0][i + 1] = -(&gamma * &velocity[i]);
        m[i + 1][0] = -(&gamma * &velocity[i]);
        for j in 0..3 {
            m[i + 1][j + 1] = &m[i + 1][j + 1] + &factor * &velocity[i] * &velocity[j];
        }
    }
    Ok(Some(m))
}

/// Minkowski metric diag(+1, −1, −1, −1).
pub fn minkowski_metric() -> Matrix4<f64> {
    Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, -1.0, -1.0, -1.0))
}

fn rational_gamma(v: &RVec3) -> Option<Rational> {
    let inv = rational_sqrt(&(Rational::one() - dot(v, v)))?;
    Some(inv.recip())
}

/// Value of the leaf parameter τ at an event.
#[derive(Debug, Clone, PartialEq)]
pub enum LeafTime {
    /// γ is rational, τ is exact.
    Exact(Rational),
    /// γ is irrational; τ carries float rounding.
    Approx(f64),
}

impl LeafTime {
    pub fn to_f64(&self) -> f64 {
        match self {
            LeafTime::Exact(r) => to_f64(r),
            LeafTime::Approx(x) => *x,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, LeafTime::Exact(_))
    }
}

impl fmt::Display for LeafTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LeafTime::Exact(r) => write!(f, "{r}"),
            LeafTime::Approx(x) => write!(f, "~{x:.12}"),
        }
    }
}

/// Family of parallel spacelike hyperplanes t' = const of a boosted frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Foliation {
    velocity: RVec3,
    gamma: Option<Rational>,
}

impl Foliation {
    pub fn new(velocity: RVec3) -> Result<Self, GeometryError> {
        check_subluminal(&velocity)?;
        let gamma = rational_gamma(&velocity);
        Ok(Foliation { velocity, gamma })
    }

    /// The rest-frame foliation, τ = t.
    pub fn rest() -> Self {
        Foliation {
            velocity: zero_vec(),
            gamma: Some(Rational::one()),
        }
    }

    pub fn velocity(&self) -> &RVec3 {
        &self.velocity
    }

    pub fn is_rest(&self) -> bool {
        self.velocity.iter().all(Zero::is_zero)
    }

    /// Exact γ when it is rational.
    pub fn gamma_exact(&self) -> Option<&Rational> {
        self.gamma.as_ref()
    }

    pub fn gamma(&self) -> f64 {
        match &self.gamma {
            Some(g) => to_f64(g),
            None => {
                let v = vec_to_f64(&self.velocity);
                1.0 / (1.0 - (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).sqrt()
            }
        }
    }

    /// τ with the positive factor γ removed: t − v·x.
    ///
    /// Always exact, and ordered exactly like τ, so simultaneity and ordering
    /// on this foliation are decided with it.
    pub fn ordering_key(&self, event: &Event) -> Rational {
        &event.t - dot(&self.velocity, &event.spatial())
    }

    /// Converts an ordering key back to τ.
    pub fn leaf_from_key(&self, key: &Rational) -> LeafTime {
        match &self.gamma {
            Some(g) => LeafTime::Exact(g * key),
            None => LeafTime::Approx(self.gamma() * to_f64(key)),
        }
    }

    /// τ(e) = γ (t − v·x).
    pub fn leaf_parameter(&self, event: &Event) -> LeafTime {
        self.leaf_from_key(&self.ordering_key(event))
    }
}

impl fmt::Display for Foliation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "boost v={}", fmt_vec(&self.velocity))
    }
}

/// Intersection of two worldlines, solved exactly.
pub fn collide(a: &Worldline, b: &Worldline) -> Result<Option<Event>, GeometryError> {
    if a.id == b.id {
        return Err(GeometryError::SameSlot(a.id));
    }
    // a(t) − b(t) = offset + rel·t, and we need it to vanish.
    let (ia, ib) = (a.intercept(), b.intercept());
    let offset: Vec<Rational> = (0..3).map(|k| &ia[k] - &ib[k]).collect();
    let rel: Vec<Rational> = (0..3).map(|k| &a.velocity[k] - &b.velocity[k]).collect();

    let Some(k) = rel.iter().position(|r| !r.is_zero()) else {
        return if offset.iter().all(Zero::is_zero) {
            let (lo, hi) = (a.id.min(b.id), a.id.max(b.id));
            Err(GeometryError::CoincidentWorldlines(lo, hi))
        } else {
            Ok(None)
        };
    };
    let t = -(&offset[k] / &rel[k]);
    if (0..3).any(|m| !(&offset[m] + &rel[m] * &t).is_zero()) {
        return Ok(None);
    }
    let [x, y, z] = a.position_at(&t);
    Ok(Some(Event::new(t, x, y, z)))
}

/// Float counterpart of [`collide`], used to cross-check the exact path.
///
/// Returns `None` for parallel or coincident lines.
pub fn collide_approx(a: &Worldline, b: &Worldline, tol: f64) -> Option<[f64; 4]> {
    let (ia, ib) = (vec_to_f64(&a.intercept()), vec_to_f64(&b.intercept()));
    let (va, vb) = (vec_to_f64(&a.velocity), vec_to_f64(&b.velocity));
    let offset: [f64; 3] = std::array::from_fn(|k| ia[k] - ib[k]);
    let rel: [f64; 3] = std::array::from_fn(|k| va[k] - vb[k]);
    let (k, _) = rel
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.abs().partial_cmp(&y.1.abs()).unwrap_or(Ordering::Equal))?;
    if rel[k].abs() <= tol {
        return None;
    }
    let t = -offset[k] / rel[k];
    if (0..3).any(|m| (offset[m] + rel[m] * t).abs() > tol) {
        return None;
    }
    Some([t, ia[0] + va[0] * t, ia[1] + va[1] * t, ia[2] + va[2] * t])
}

/// One contact event between two slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collision {
    /// Slot ids, smaller first.
    pub pair: (usize, usize),
    pub event: Event,
}

/// Collisions that share one leaf of a foliation.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionGroup {
    pub key: Rational,
    pub tau: LeafTime,
    pub collisions: Vec<Collision>,
}

impl CollisionGroup {
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.collisions.iter().map(|c| c.pair).collect()
    }
}

/// All pairwise collisions, grouped by leaf and sorted by increasing τ.
pub fn collision_schedule(
    worldlines: &[Worldline],
    foliation: &Foliation,
) -> Result<Vec<CollisionGroup>, GeometryError> {
    let mut sorted: Vec<&Worldline> = worldlines.iter().collect();
    sorted.sort_by_key(|w| w.id);
    if let Some(w) = sorted.windows(2).find(|w| w[0].id == w[1].id) {
        return Err(GeometryError::DuplicateId(w[0].id));
    }

    let mut hits: Vec<(Rational, Collision)> = Vec::new();
    for (i, a) in sorted.iter().enumerate() {
        for b in &sorted[i + 1..] {
            if let Some(event) = collide(a, b)? {
                hits.push((
                    foliation.ordering_key(&event),
                    Collision {
                        pair: (a.id, b.id),
                        event,
                    },
                ));
            }
        }
    }
    hits.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.pair.cmp(&y.1.pair)));

    let mut groups: Vec<CollisionGroup> = Vec::new();
    for (key, collision) in hits {
        match groups.last_mut() {
            Some(g) if g.key == key => g.collisions.push(collision),
            _ => groups.push(CollisionGroup {
                tau: foliation.leaf_from_key(&key),
                key,
                collisions: vec![collision],
            }),
        }
    }

    for g in &groups {
        let mut slots: Vec<usize> = g
            .collisions
            .iter()
            .flat_map(|c| [c.pair.0, c.pair.1])
            .collect();
        slots.sort_unstable();
        if let Some(w) = slots.windows(2).find(|w| w[0] == w[1]) {
            return Err(GeometryError::OverlappingSimultaneousPairs {
                slot: w[0],
                leaf: g.tau.to_string(),
            });
        }
    }
    Ok(groups)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        rat(n, d)
    }

    fn at_rest(id: usize, x: i64, y: i64) -> Worldline {
        Worldline::new(id, format!("s{id}"), Event::from_ints(0, x, y, 0), zero_vec()).unwrap()
    }

    fn demo() -> Vec<Worldline> {
        let down = [r(0, 1), r(-1, 2), r(0, 1)];
        vec![
            at_rest(0, -1, 0),
            at_rest(1, 1, 0),
            Worldline::new(2, "s2", Event::from_ints(0, -1, 2, 0), down.clone()).unwrap(),
            Worldline::new(3, "s3", Event::from_ints(0, 1, 2, 0), down).unwrap(),
        ]
    }

    #[test]
    fn boost_at_rest_is_identity() {
        assert_eq!(boost_matrix([0.0; 3]).unwrap(), Matrix4::identity());
        let exact = boost_matrix_exact(&zero_vec()).unwrap().unwrap();
        for (i, row) in exact.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                assert_eq!(*e, if i == j { r(1, 1) } else { r(0, 1) });
            }
        }
    }

    #[test]
    fn boost_three_fifths() {
        let m = boost_matrix_exact(&[r(3, 5), r(0, 1), r(0, 1)]).unwrap().unwrap();
        assert_eq!(m[0][0], r(5, 4));
        assert_eq!(m[0][1], r(-3, 4));
        assert_eq!(m[1][1], r(5, 4));
        assert_eq!(m[2][2], r(1, 1));
        let f = boost_matrix([0.6, 0.0, 0.0]).unwrap();
        assert!((f[(0, 0)] - 1.25).abs() < 1e-15);
        assert!((f[(0, 1)] + 0.75).abs() < 1e-15);
    }

    #[test]
    fn superluminal_rejected() {
        assert!(matches!(
            boost_matrix([0.6, 0.8, 0.0]),
            Err(GeometryError::SuperluminalVelocity(_))
        ));
        assert!(Foliation::new([r(1, 1), r(0, 1), r(0, 1)]).is_err());
        assert!(Worldline::new(0, "a", Event::from_ints(0, 0, 0, 0), [r(5, 3), r(0, 1), r(0, 1)])
            .is_err());
    }

    #[test]
    fn exact_boost_needs_rational_gamma() {
        assert!(boost_matrix_exact(&[r(1, 2), r(0, 1), r(0, 1)]).unwrap().is_none());
        assert!(boost_matrix_exact(&[r(4, 5), r(0, 1), r(0, 1)]).unwrap().is_some());
    }

    #[test]
    fn leaf_parameter_examples() {
        let rest = Foliation::rest();
        let e = Event::new(r(7, 1), r(13, 3), r(-2, 1), r(5, 1));
        assert_eq!(rest.leaf_parameter(&e), LeafTime::Exact(r(7, 1)));

        let f = Foliation::new([r(3, 5), r(0, 1), r(0, 1)]).unwrap();
        let e = Event::from_ints(0, 1, 0, 0);
        assert_eq!(f.leaf_parameter(&e), LeafTime::Exact(r(-3, 4)));

        let a = Event::from_ints(4, -1, 0, 0);
        let b = Event::from_ints(4, 1, 0, 0);
        assert_ne!(f.leaf_parameter(&a), f.leaf_parameter(&b));
    }

    #[test]
    fn irrational_gamma_gives_approx_leaf() {
        let f = Foliation::new([r(0, 1), r(1, 2), r(0, 1)]).unwrap();
        let e = Event::from_ints(3, 0, 0, 0);
        match f.leaf_parameter(&e) {
            LeafTime::Approx(x) => assert!((x - 3.0 * 2.0 / 3f64.sqrt()).abs() < 1e-12),
            other => panic!("expected approx, got {other:?}"),
        }
    }

    #[test]
    fn collide_examples() {
        let a = at_rest(0, 0, 0);
        let b = Worldline::new(1, "b", Event::from_ints(0, 0, 2, 0), [r(0, 1), r(-1, 2), r(0, 1)])
            .unwrap();
        assert_eq!(collide(&a, &b).unwrap(), Some(Event::from_ints(4, 0, 0, 0)));
        assert_eq!(collide(&b, &a).unwrap(), Some(Event::from_ints(4, 0, 0, 0)));

        let c = Worldline::new(2, "c", Event::from_ints(0, 1, 2, 0), [r(0, 1), r(-1, 2), r(0, 1)])
            .unwrap();
        assert_eq!(collide(&b, &c).unwrap(), None);
        assert_eq!(collide(&a, &at_rest(3, 1, 0)).unwrap(), None);
    }

    #[test]
    fn skew_lines_do_not_meet() {
        let a = Worldline::new(0, "a", Event::from_ints(0, 0, 0, 0), [r(1, 2), r(0, 1), r(0, 1)])
            .unwrap();
        let b = Worldline::new(1, "b", Event::from_ints(0, 0, 1, 1), [r(0, 1), r(1, 2), r(0, 1)])
            .unwrap();
        assert_eq!(collide(&a, &b).unwrap(), None);
    }

    #[test]
    fn coincident_and_same_slot_errors() {
        let a = at_rest(0, 0, 0);
        let b = Worldline::new(1, "b", Event::from_ints(5, 0, 0, 0), zero_vec()).unwrap();
        assert_eq!(collide(&a, &b), Err(GeometryError::CoincidentWorldlines(0, 1)));
        assert_eq!(collide(&a, &a), Err(GeometryError::SameSlot(0)));
    }

    #[test]
    fn schedule_rest_is_one_group() {
        let groups = collision_schedule(&demo(), &Foliation::rest()).unwrap();
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].pairs(), vec![(0, 2), (1, 3)]);
        assert_eq!(groups[0].tau, LeafTime::Exact(r(4, 1)));
    }

    #[test]
    fn schedule_x_boost_splits() {
        let f = Foliation::new([r(3, 5), r(0, 1), r(0, 1)]).unwrap();
        let groups = collision_schedule(&demo(), &f).unwrap();
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].pairs(), vec![(1, 3)]);
        assert_eq!(groups[1].pairs(), vec![(0, 2)]);
        // τ = 5/4 (4 ∓ 3/5)
        assert_eq!(groups[0].tau, LeafTime::Exact(r(17, 4)));
        assert_eq!(groups[1].tau, LeafTime::Exact(r(23, 4)));
    }

    #[test]
    fn schedule_y_boost_keeps_simultaneity() {
        let f = Foliation::new([r(0, 1), r(1, 2), r(0, 1)]).unwrap();
        let groups = collision_schedule(&demo(), &f).unwrap();
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].collisions.len(), 2);
    }

    #[test]
    fn schedule_rejects_shared_slot() {
        // Two movers reach the same resting particle at once.
        let lines = vec![
            at_rest(0, 0, 0),
            Worldline::new(1, "b", Event::from_ints(0, 0, 2, 0), [r(0, 1), r(-1, 2), r(0, 1)])
                .unwrap(),
            Worldline::new(2, "c", Event::from_ints(0, 0, -2, 0), [r(0, 1), r(1, 2), r(0, 1)])
                .unwrap(),
        ];
        assert!(matches!(
            collision_schedule(&lines, &Foliation::rest()),
            Err(GeometryError::OverlappingSimultaneousPairs { slot: 0, .. })
        ));
    }

    #[test]
    fn schedule_rejects_duplicate_ids() {
        let lines = vec![at_rest(0, 0, 0), at_rest(0, 1, 0)];
        assert_eq!(
            collision_schedule(&lines, &Foliation::rest()),
            Err(GeometryError::DuplicateId(0))
        );
    }

    #[test]
    fn rational_sqrt_cases() {
        assert_eq!(rational_sqrt(&r(16, 25)), Some(r(4, 5)));
        assert_eq!(rational_sqrt(&r(3, 4)), None);
        assert_eq!(rational_sqrt(&r(-1, 4)), None);
    }
}
