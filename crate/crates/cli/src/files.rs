//! JSON scenario, kernel and matrix files.
//!
//! Rationals are written as strings (`"3/5"`, `"-2"`, `"0.25"`). A bare JSON
//! number is accepted too: integers are exact, other numbers are read from
//! their shortest decimal form and produce a warning.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::Zero;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use narratables::algebra::{CMatrix, CVector, GeneratorSet};
use narratables::clusterkit::MomentumKernel;
use narratables::geometry::{Event, Foliation, Rational, Worldline};
use narratables::narrative::{InteractionRule, Scenario};
use narratables::quantum::{singlet_product, swap_unitary, PairingSpec, SpinState, TwoSlotUnitary};

use crate::error::CliError;

/// A rational as written in a file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RatValue {
    Text(String),
    Number(serde_json::Number),
}

impl RatValue {
    pub fn exact(r: &Rational) -> Self {
        RatValue::Text(r.to_string())
    }
}

/// Parses `n/d`, an integer, or a decimal with optional exponent, exactly.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
        let d: BigInt = d.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (
            &s[..i],
            s[i + 1..].parse::<i32>().map_err(|_| format!("bad exponent in {s:?}"))?,
        ),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || digits == "-" || digits == "+" {
        return Err(format!("not a number: {s:?}"));
    }
    let n: BigInt = digits.parse().map_err(|_| format!("not a number: {s:?}"))?;
    let shift = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let scale = num_traits::pow(ten, shift.unsigned_abs() as usize);
    Ok(if shift >= 0 {
        Rational::from_integer(n * scale)
    } else {
        Rational::new(n, scale)
    })
}

/// Collects non-fatal notes raised while reading a file.
#[derive(Debug, Default)]
struct Reader {
    warnings: Vec<String>,
}

impl Reader {
    fn rational(&mut self, v: &RatValue, path: &str) -> Result<Rational, CliError> {
        match v {
            RatValue::Text(s) => parse_rational(s).map_err(|m| CliError::parse(path, m)),
            RatValue::Number(n) => {
                let text = n.to_string();
                let r = parse_rational(&text).map_err(|m| CliError::parse(path, m))?;
                if !(n.is_i64() || n.is_u64()) {
                    self.warnings.push(format!(
                        "{path}: bare number {text} read as {r}; write it as a string to make exactness explicit"
                    ));
                }
                Ok(r)
            }
        }
    }

    fn vec3(&mut self, v: &[RatValue; 3], path: &str) -> Result<[Rational; 3], CliError> {
        Ok([
            self.rational(&v[0], &format!("{path}[0]"))?,
            self.rational(&v[1], &format!("{path}[1]"))?,
            self.rational(&v[2], &format!("{path}[2]"))?,
        ])
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))
}

/// Deserializes JSON, reporting the failing field path and line/column.
fn from_json<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T, CliError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        let location = if field == "." { origin.to_owned() } else { format!("{origin}: {field}") };
        CliError::parse(location, e.into_inner().to_string())
    })?;
    de.end().map_err(|e| CliError::parse(origin, e.to_string()))?;
    Ok(value)
}

// ---------------------------------------------------------------- scenarios

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleSpec {
    pub id: usize,
    pub species: String,
    pub start: [RatValue; 4],
    pub velocity: [RatValue; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialStateSpec {
    /// Singlet product; each pair lists the slot carrying `+` first.
    Pairing(Vec<[usize; 2]>),
    /// Explicit amplitudes as `[re, im]`, slot 0 most significant.
    Amplitudes(Vec<[f64; 2]>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UnitarySpec {
    Named(String),
    Matrix(Vec<Vec<[f64; 2]>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactSpec {
    pub pair: [String; 2],
    pub unitary: UnitarySpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub particles: Vec<ParticleSpec>,
    pub initial_state: InitialStateSpec,
    #[serde(default)]
    pub rules: BTreeMap<String, Vec<ContactSpec>>,
    #[serde(default)]
    pub foliations: Vec<[RatValue; 3]>,
}

/// A scenario file resolved into domain objects.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub rules: BTreeMap<String, InteractionRule>,
    pub foliations: Vec<Foliation>,
    pub warnings: Vec<String>,
}

fn unitary_from_spec(spec: &UnitarySpec, path: &str) -> Result<TwoSlotUnitary, CliError> {
    match spec {
        UnitarySpec::Named(n) if n == "swap" => Ok(swap_unitary()),
        UnitarySpec::Named(n) if n == "identity" => Ok(TwoSlotUnitary::identity()),
        UnitarySpec::Named(n) => Err(CliError::parse(
            path,
            format!("unknown unitary {n:?}; use \"swap\", \"identity\" or a 4x4 matrix"),
        )),
        UnitarySpec::Matrix(rows) => {
            if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
                return Err(CliError::parse(path, "explicit unitary must be 4x4"));
            }
            let m = std::array::from_fn(|i| std::array::from_fn(|j| Complex64::new(rows[i][j][0], rows[i][j][1])));
            TwoSlotUnitary::new(m).map_err(|e| CliError::parse(path, e.to_string()))
        }
    }
}

fn unitary_to_spec(u: &TwoSlotUnitary) -> UnitarySpec {
    if *u == swap_unitary() {
        UnitarySpec::Named("swap".into())
    } else if *u == TwoSlotUnitary::identity() {
        UnitarySpec::Named("identity".into())
    } else {
        UnitarySpec::Matrix(u.matrix().iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect())
    }
}

impl ScenarioFile {
    pub fn resolve(&self, default_name: &str) -> Result<LoadedScenario, CliError> {
        let mut reader = Reader::default();
        let mut lines = Vec::with_capacity(self.particles.len());
        for (i, p) in self.particles.iter().enumerate() {
            let at = format!("particles[{i}]");
            let s = &p.start;
            let start = Event::new(
                reader.rational(&s[0], &format!("{at}.start[0]"))?,
                reader.rational(&s[1], &format!("{at}.start[1]"))?,
                reader.rational(&s[2], &format!("{at}.start[2]"))?,
                reader.rational(&s[3], &format!("{at}.start[3]"))?,
            );
            let v = reader.vec3(&p.velocity, &format!("{at}.velocity"))?;
            let line = Worldline::new(p.id, p.species.clone(), start, v)
                .map_err(|e| CliError::parse(format!("{at}.velocity"), e.to_string()))?;
            lines.push(line);
        }
        let n = lines.len();
        let state = match &self.initial_state {
            InitialStateSpec::Pairing(pairs) => {
                let pairs: Vec<(usize, usize)> = pairs.iter().map(|p| (p[0], p[1])).collect();
                singlet_product(n, &PairingSpec::pairs(&pairs))
            }
            InitialStateSpec::Amplitudes(amps) => {
                SpinState::from_amplitudes(n, amps.iter().map(|a| Complex64::new(a[0], a[1])).collect())
            }
        }
        .map_err(|e| CliError::parse("initial_state", e.to_string()))?;
        let name = self.name.clone().unwrap_or_else(|| default_name.to_owned());
        let scenario = Scenario::new(name, lines, state).map_err(|e| CliError::parse("particles", e.to_string()))?;

        let mut rules = BTreeMap::new();
        rules.insert("free".to_owned(), InteractionRule::free());
        for (name, contacts) in &self.rules {
            let mut rule = InteractionRule::new(name.clone());
            for (k, c) in contacts.iter().enumerate() {
                let u = unitary_from_spec(&c.unitary, &format!("rules.{name}[{k}].unitary"))?;
                rule.set(&c.pair[0], &c.pair[1], u);
            }
            rules.insert(name.clone(), rule);
        }

        let foliations = self
            .foliations
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let at = format!("foliations[{i}]");
                let v = reader.vec3(v, &at)?;
                Foliation::new(v).map_err(|e| CliError::parse(at, e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;

        Ok(LoadedScenario {
            scenario,
            rules,
            foliations,
            warnings: reader.warnings,
        })
    }
}

impl LoadedScenario {
    pub fn rule(&self, name: &str) -> Result<&InteractionRule, CliError> {
        self.rules.get(name).ok_or_else(|| CliError::UnknownRule {
            name: name.to_owned(),
            available: self.rules.keys().cloned().collect::<Vec<_>>().join(", "),
        })
    }

    pub fn foliation(&self, index: usize) -> Result<&Foliation, CliError> {
        self.foliations.get(index).ok_or(CliError::IndexOutOfRange {
            what: "foliation",
            index,
            len: self.foliations.len(),
        })
    }

    /// File form of this scenario; rationals are written exactly and the
    /// initial state as explicit amplitudes.
    pub fn to_file(&self) -> ScenarioFile {
        let particles = self
            .scenario
            .worldlines()
            .iter()
            .map(|w| {
                let s = w.start();
                ParticleSpec {
                    id: w.id(),
                    species: w.species().to_owned(),
                    start: [&s.t, &s.x, &s.y, &s.z].map(RatValue::exact),
                    velocity: [0, 1, 2].map(|k| RatValue::exact(&w.velocity()[k])),
                }
            })
            .collect();
        let amplitudes = self.scenario.initial_state().amplitudes().iter().map(|z| [z.re, z.im]).collect();
        let rules = self
            .rules
            .iter()
            .filter(|(name, rule)| !(name.as_str() == "free" && rule.contacts().next().is_none()))
            .map(|(name, rule)| {
                let contacts = rule
                    .contacts()
                    .map(|((a, b), u)| ContactSpec {
                        pair: [a.clone(), b.clone()],
                        unitary: unitary_to_spec(u),
                    })
                    .collect();
                (name.clone(), contacts)
            })
            .collect();
        let foliations = self
            .foliations
            .iter()
            .map(|f| [0, 1, 2].map(|k| RatValue::exact(&f.velocity()[k])))
            .collect();
        ScenarioFile {
            name: Some(self.scenario.name().to_owned()),
            particles,
            initial_state: InitialStateSpec::Amplitudes(amplitudes),
            rules,
            foliations,
        }
    }
}

pub fn parse_scenario(text: &str, origin: &str) -> Result<LoadedScenario, CliError> {
    let file: ScenarioFile = from_json(text, origin)?;
    let stem = Path::new(origin).file_stem().and_then(|s| s.to_str()).unwrap_or(origin);
    file.resolve(stem)
}

pub fn load_scenario(path: &Path) -> Result<LoadedScenario, CliError> {
    parse_scenario(&read_text(path)?, &path.display().to_string())
}

// ------------------------------------------------------------------ kernels

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelFile {
    #[serde(rename = "in")]
    pub in_slots: Vec<String>,
    #[serde(rename = "out")]
    pub out_slots: Vec<String>,
    /// One map per delta function: slot name to coefficient in its argument.
    #[serde(default)]
    pub deltas: Vec<BTreeMap<String, RatValue>>,
    #[serde(default)]
    pub smooth_prefactor: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin_structure: Option<String>,
}

/// A parsed kernel and any warnings raised while reading it.
#[derive(Debug)]
pub struct LoadedKernel {
    pub kernel: MomentumKernel,
    pub warnings: Vec<String>,
}

impl KernelFile {
    pub fn resolve(&self) -> Result<LoadedKernel, CliError> {
        let mut reader = Reader::default();
        let columns: Vec<&String> = self.out_slots.iter().chain(&self.in_slots).collect();
        let mut rows = Vec::with_capacity(self.deltas.len());
        for (i, delta) in self.deltas.iter().enumerate() {
            let mut row = vec![Rational::zero(); columns.len()];
            for (slot, coef) in delta {
                let at = format!("deltas[{i}].{slot}");
                let col = columns
                    .iter()
                    .position(|c| *c == slot)
                    .ok_or_else(|| CliError::parse(&at, format!("unknown slot {slot:?}")))?;
                row[col] = reader.rational(coef, &at)?;
            }
            rows.push(row);
        }
        let mut kernel = MomentumKernel::new(self.in_slots.clone(), self.out_slots.clone(), rows)
            .map_err(|e| CliError::parse("deltas", e.to_string()))?;
        kernel.smooth_prefactor_present = self.smooth_prefactor;
        kernel.spin_structure = self.spin_structure.clone();
        Ok(LoadedKernel {
            kernel,
            warnings: reader.warnings,
        })
    }

    pub fn from_kernel(kernel: &MomentumKernel) -> Self {
        let names = kernel.slot_names();
        let deltas = kernel
            .deltas()
            .iter()
            .map(|row| {
                names
                    .iter()
                    .zip(row)
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(n, c)| (n.to_string(), RatValue::exact(c)))
                    .collect()
            })
            .collect();
        KernelFile {
            in_slots: kernel.in_slots().to_vec(),
            out_slots: kernel.out_slots().to_vec(),
            deltas,
            smooth_prefactor: kernel.smooth_prefactor_present,
            spin_structure: kernel.spin_structure.clone(),
        }
    }
}

pub fn parse_kernel(text: &str, origin: &str) -> Result<LoadedKernel, CliError> {
    let file: KernelFile = from_json(text, origin)?;
    file.resolve().map_err(|e| match e {
        CliError::Parse { path, message } => CliError::parse(format!("{origin}: {path}"), message),
        other => other,
    })
}

pub fn load_kernel(path: &Path) -> Result<LoadedKernel, CliError> {
    parse_kernel(&read_text(path)?, &path.display().to_string())
}

// ----------------------------------------------------------------- matrices

/// A complex entry: `[re, im]` or a bare real.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Pair([f64; 2]),
    Real(f64),
}

impl Entry {
    fn value(self) -> Complex64 {
        match self {
            Entry::Pair([re, im]) => Complex64::new(re, im),
            Entry::Real(re) => Complex64::new(re, 0.0),
        }
    }
}

fn matrix_from_rows(rows: &[Vec<Entry>], origin: &str) -> Result<CMatrix, CliError> {
    let n = rows.len();
    if n == 0 {
        return Err(CliError::parse(origin, "empty matrix"));
    }
    if let Some(i) = rows.iter().position(|r| r.len() != n) {
        return Err(CliError::parse(
            format!("{origin}: [{i}]"),
            format!("row has {} entries; matrices must be square ({n}x{n})", rows[i].len()),
        ));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j].value()))
}

pub fn matrix_to_json(m: &CMatrix) -> serde_json::Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
    serde_json::to_value(rows).expect("finite entries")
}

pub fn parse_matrix(text: &str, origin: &str) -> Result<CMatrix, CliError> {
    let rows: Vec<Vec<Entry>> = from_json(text, origin)?;
    matrix_from_rows(&rows, origin)
}

pub fn load_matrix(path: &Path) -> Result<CMatrix, CliError> {
    parse_matrix(&read_text(path)?, &path.display().to_string())
}

pub fn parse_vector(text: &str, origin: &str) -> Result<CVector, CliError> {
    let entries: Vec<Entry> = from_json(text, origin)?;
    if entries.is_empty() {
        return Err(CliError::parse(origin, "empty vector"));
    }
    Ok(CVector::from_iterator(entries.len(), entries.into_iter().map(Entry::value)))
}

pub fn load_vector(path: &Path) -> Result<CVector, CliError> {
    parse_vector(&read_text(path)?, &path.display().to_string())
}

/// Generator file: an object keyed by `H`, `P1`..`P3`, `J1`..`J3`, `K1`..`K3`.
pub fn parse_generators(text: &str, origin: &str) -> Result<GeneratorSet, CliError> {
    let named: BTreeMap<String, Vec<Vec<Entry>>> = from_json(text, origin)?;
    let mut gens = GeneratorSet::default();
    for (name, rows) in &named {
        let m = matrix_from_rows(rows, &format!("{origin}: {name}"))?;
        let slot = match (name.get(..1), name.get(1..).and_then(|s| s.parse::<usize>().ok())) {
            (Some("H"), None) if name.len() == 1 => &mut gens.h,
            (Some("P"), Some(i @ 1..=3)) => &mut gens.p[i - 1],
            (Some("J"), Some(i @ 1..=3)) => &mut gens.j[i - 1],
            (Some("K"), Some(i @ 1..=3)) => &mut gens.k[i - 1],
            _ => {
                return Err(CliError::parse(
                    format!("{origin}: {name}"),
                    "unknown generator; expected H, P1..P3, J1..J3 or K1..K3",
                ))
            }
        };
        *slot = Some(m);
    }
    Ok(gens)
}

pub fn load_generators(path: &Path) -> Result<GeneratorSet, CliError> {
    parse_generators(&read_text(path)?, &path.display().to_string())
}
