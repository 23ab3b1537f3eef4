//! Complete solution of `lambda + mu = 1` in units of a cyclic field.
//!
//! The pipeline is: unit system, linear-forms bound, iterated lattice
//! reduction of that bound, exhaustive enumeration below the reduced bound,
//! exact verification. Completeness is relative to the unit group used;
//! saturated cyclotomic units are flagged as such in every report.

mod bounds;
mod enumerate;
mod fixtures;

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::cyclofield::{CyclicField, FieldElement};
use crate::error::{Error, Result};
use crate::sieve::{evertse_bound, residue_test};
use crate::units::{saturated_units, AssertedMode, UnitSystem, DEFAULT_SATURATION_PRIMES};

pub use bounds::{
    decay_constant, initial_bound, reduce_bound, reduce_bound_detailed, BoundContext,
    EmbeddingReduction, KAPPAS,
};
pub use enumerate::{enumerate_solutions, word_value, Enumeration, EnumerationStats, UnitWord};
pub use fixtures::{nagell_cubic_check, sophie_germain_check, NagellRecord};

/// Heuristic-mode bound when none is given.
pub const DEFAULT_HEURISTIC_BOUND: u64 = 12;
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;
pub const DEFAULT_PRECISION_SCHEDULE: [u32; 4] = [512, 1024, 2048, 4096];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMode {
    /// Complete, given units asserted to be fundamental.
    Rigorous,
    /// Complete relative to the saturated cyclotomic unit subgroup.
    Saturated,
    /// Direct enumeration to a user bound; not exhaustive.
    Heuristic,
}

impl SolveMode {
    pub fn caveat(self) -> Option<&'static str> {
        match self {
            SolveMode::Rigorous => None,
            SolveMode::Saturated => Some(
                "complete relative to the computed unit subgroup (cyclotomic units saturated at small primes); fundamental units not proven",
            ),
            SolveMode::Heuristic => Some("non-exhaustive: enumeration stopped at a user bound without a proof of completeness"),
        }
    }

    /// Process exit code for a completed run in this mode.
    pub fn exit_code(self) -> i32 {
        match self {
            SolveMode::Rigorous => 0,
            _ => 2,
        }
    }
}

impl std::str::FromStr for SolveMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rigorous" => Ok(SolveMode::Rigorous),
            "saturated" => Ok(SolveMode::Saturated),
            "heuristic" => Ok(SolveMode::Heuristic),
            _ => Err(Error::InvalidInput(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveConfig {
    pub mode: SolveMode,
    /// Replaces the linear-forms bound; in heuristic mode, the search bound.
    pub initial_bound_override: Option<BigInt>,
    pub precision_schedule: Vec<u32>,
    /// Cap on exact verifications during enumeration.
    pub budget: u64,
    pub saturation_primes: Vec<u64>,
    /// Use these units instead of computing saturated cyclotomic units.
    pub units: Option<UnitSystem>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            mode: SolveMode::Saturated,
            initial_bound_override: None,
            precision_schedule: DEFAULT_PRECISION_SCHEDULE.to_vec(),
            budget: DEFAULT_BUDGET,
            saturation_primes: DEFAULT_SATURATION_PRIMES.to_vec(),
            units: None,
        }
    }
}

impl SolveConfig {
    pub fn with_mode(mode: SolveMode) -> Self {
        SolveConfig {
            mode,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionEntry {
    /// Coordinates of `lambda` in the period basis `eta_{c_0}, ..., eta_{c_{m-1}}`.
    #[serde(with = "crate::polyring::bigint_vec_str")]
    pub period_coords: Vec<BigInt>,
    pub sign: i8,
    pub exponents: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsRecord {
    /// `None` in heuristic mode, which skips the linear-forms bound.
    pub initial: Option<String>,
    pub reduced_sequence: Vec<String>,
    #[serde(rename = "final")]
    pub final_bound: String,
    pub decay_constant: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub units_ms: u64,
    pub bounds_ms: u64,
    pub enumeration_ms: u64,
    pub checks_ms: u64,
    pub total_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitSummary {
    pub mode: AssertedMode,
    pub regulator: f64,
    /// Each generator in period coordinates.
    pub generators: Vec<Vec<String>>,
    pub saturation_log: Vec<crate::units::SaturationRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PostChecks {
    pub closed_under_symmetry: bool,
    pub free_action: bool,
    /// `b^ell = +-1 mod p` for the residue `b` of every solution at every ramified `p`.
    pub residue_check: bool,
    pub evertse_cap: String,
    pub within_evertse_cap: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub field_label: String,
    pub field_hash: String,
    pub degree: usize,
    pub conductor: u64,
    pub minpoly: Vec<String>,
    pub mode: SolveMode,
    pub exhaustive: bool,
    pub caveat: Option<String>,
    pub count: usize,
    pub solutions: Vec<SolutionEntry>,
    /// Index lists into `solutions`, one per orbit of the order-6 symmetry.
    pub orbits: Vec<Vec<usize>>,
    pub bounds: BoundsRecord,
    pub units: UnitSummary,
    pub enumeration: EnumerationStats,
    pub checks: PostChecks,
    pub timings: Timings,
}

impl SolutionReport {
    pub fn exit_code(&self) -> i32 {
        self.mode.exit_code()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub const CSV_HEADER: &'static str =
        "field,conductor,mode,exhaustive,count,orbits,b_initial,b_final,regulator";

    /// One CSV row (without header) summarizing the report.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{:.6}",
            self.field_label,
            self.conductor,
            serde_json::to_value(self.mode)
                .expect("mode")
                .as_str()
                .unwrap_or(""),
            self.exhaustive,
            self.count,
            self.orbits.len(),
            self.bounds.initial.as_deref().unwrap_or(""),
            self.bounds.final_bound,
            self.units.regulator
        )
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}\n", Self::CSV_HEADER, self.csv_row())
    }
}

/// Exact check that `lambda` and `1 - lambda` are both units.
pub fn verify_solution(f: &CyclicField, lambda: &FieldElement) -> Result<bool> {
    if !f.is_unit(lambda)? {
        return Ok(false);
    }
    let mu = f.sub(&f.one(), lambda)?;
    f.is_unit(&mu)
}

/// The six images of `lambda` under the group generated by
/// `x -> 1 - x` and `x -> 1/x`.
pub fn symmetry_images(f: &CyclicField, lambda: &FieldElement) -> Result<[FieldElement; 6]> {
    let one = f.one();
    let mu = f.sub(&one, lambda)?;
    let inv = f.inv(lambda)?;
    let inv_mu = f.inv(&mu)?;
    let a = f.sub(&one, &inv)?;
    let b = f.mul(lambda, &f.inv(&f.neg(&mu)?)?)?;
    Ok([lambda.clone(), mu, inv, a, inv_mu, b])
}

/// Orbits of the order-6 symmetry, as sorted index lists ordered by their
/// smallest member.
pub fn symmetry_orbits(f: &CyclicField, solutions: &[FieldElement]) -> Result<Vec<Vec<usize>>> {
    let index: HashMap<&FieldElement, usize> =
        solutions.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut seen = vec![false; solutions.len()];
    let mut orbits = Vec::new();
    for (i, s) in solutions.iter().enumerate() {
        if seen[i] {
            continue;
        }
        let mut orbit = Vec::new();
        for img in symmetry_images(f, s)? {
            let &j = index.get(&img).ok_or(Error::NotClosed)?;
            if !seen[j] {
                seen[j] = true;
                orbit.push(j);
            }
        }
        orbit.sort_unstable();
        orbits.push(orbit);
    }
    Ok(orbits)
}

/// `b^ell = +-1 mod p` for every ramified `p`, where `b` is the residue of `lambda`.
pub fn residue_post_check(f: &CyclicField, lambda: &FieldElement) -> Result<bool> {
    let ell = f.degree() as u64;
    for p in f.ramified_primes() {
        let b = f.residue_mod_ramified(lambda, p)?;
        if !residue_test(b as i64, p, ell) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn ms(t: Instant) -> u64 {
    t.elapsed().as_millis() as u64
}

/// Iterate [`reduce_bound`] from `b0` until it stops making progress,
/// escalating precision when needed. Returns the sequence of bounds.
pub fn reduce_to_fixed_point(
    f: &CyclicField,
    u: &UnitSystem,
    b0: &BigInt,
    schedule: &[u32],
) -> Result<Vec<BigInt>> {
    let mut seq = Vec::new();
    let mut cur = b0.clone();
    let mut level = 0usize;
    let schedule: Vec<u32> = if schedule.is_empty() {
        DEFAULT_PRECISION_SCHEDULE.to_vec()
    } else {
        schedule.to_vec()
    };
    loop {
        // enough bits for the scale (kappa r X)^r with the largest kappa
        let r = u.rank() as u64;
        let need = r * (cur.bits() + 8 + r.ilog2() as u64 + 2) + 64;
        while level + 1 < schedule.len() && (schedule[level] as u64) < need {
            level += 1;
        }
        let prec = schedule[level];
        match reduce_bound(f, u, &cur, prec) {
            Ok(b) => {
                seq.push(b.clone());
                cur = b;
            }
            Err(Error::NoProgress(_)) => break,
            Err(Error::PrecisionExhausted { .. }) if level + 1 < schedule.len() => level += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(seq)
}

/// Run the whole pipeline on one field.
pub fn solve_unit_equation(f: &CyclicField, cfg: &SolveConfig) -> Result<SolutionReport> {
    let start = Instant::now();
    let t = Instant::now();
    let u = match &cfg.units {
        Some(u) => u.clone(),
        None => saturated_units(f, &cfg.saturation_primes)?,
    };
    if cfg.mode == SolveMode::Rigorous && u.mode() != AssertedMode::UserFundamental {
        return Err(Error::ModeRequiresFundamentalUnits);
    }
    let units_ms = ms(t);

    let t = Instant::now();
    let (initial, reduced, b_final, c2) = match cfg.mode {
        SolveMode::Heuristic => {
            let b = cfg
                .initial_bound_override
                .clone()
                .unwrap_or_else(|| BigInt::from(DEFAULT_HEURISTIC_BOUND));
            (None, Vec::new(), b, None)
        }
        _ => {
            let ctx = BoundContext::new(&u)?;
            let b0 = match &cfg.initial_bound_override {
                Some(b) => b.clone(),
                None => initial_bound(f, &u)?,
            };
            let seq = reduce_to_fixed_point(f, &u, &b0, &cfg.precision_schedule)?;
            let fin = seq.last().cloned().unwrap_or_else(|| b0.clone());
            (Some(b0), seq, fin, Some(ctx.c2))
        }
    };
    let bounds_ms = ms(t);
    if !b_final.is_positive() {
        return Err(Error::InvalidInput("search bound must be positive".into()));
    }
    let b = b_final.to_u64().ok_or(Error::BudgetExceeded(cfg.budget))?;

    let t = Instant::now();
    let en = enumerate_solutions(f, &u, b, cfg.budget)?;
    let enumeration_ms = ms(t);

    let t = Instant::now();
    // canonical order: by period coordinates
    let mut found: BTreeMap<Vec<BigInt>, (UnitWord, FieldElement)> = BTreeMap::new();
    for (w, lam) in en.solutions {
        let (y, d) = f.period_coords(&lam)?;
        debug_assert!(d.is_one());
        found.entry(y).or_insert((w, lam));
    }
    let elems: Vec<FieldElement> = found.values().map(|(_, l)| l.clone()).collect();
    let (orbits, closed) = match symmetry_orbits(f, &elems) {
        Ok(o) => (o, true),
        Err(Error::NotClosed) if cfg.mode == SolveMode::Heuristic => (Vec::new(), false),
        Err(e) => return Err(e),
    };
    if !closed && cfg.mode != SolveMode::Heuristic {
        return Err(Error::NotClosed);
    }
    let free_action = closed && orbits.iter().all(|o| o.len() == 6);
    let mut residue_ok = true;
    for l in &elems {
        if !residue_post_check(f, l)? {
            residue_ok = false;
        }
    }
    let cap = evertse_bound(f.degree() as u32, 0)?;
    let within = BigInt::from(elems.len()) <= cap;
    let checks_ms = ms(t);

    let solutions: Vec<SolutionEntry> = found
        .into_iter()
        .map(|(y, (w, _))| SolutionEntry {
            period_coords: y,
            sign: w.sign,
            exponents: w.exponents,
        })
        .collect();
    let unit_file = u.to_file(f)?;
    Ok(SolutionReport {
        field_label: f.label(),
        field_hash: f.hash().to_string(),
        degree: f.degree(),
        conductor: f.conductor(),
        minpoly: f.minpoly().coeffs().iter().map(|c| c.to_string()).collect(),
        mode: cfg.mode,
        exhaustive: cfg.mode != SolveMode::Heuristic,
        caveat: cfg.mode.caveat().map(str::to_string),
        count: solutions.len(),
        solutions,
        orbits,
        bounds: BoundsRecord {
            initial: initial.map(|b| b.to_string()),
            reduced_sequence: reduced.iter().map(|b| b.to_string()).collect(),
            final_bound: b_final.to_string(),
            decay_constant: c2,
        },
        units: UnitSummary {
            mode: u.mode(),
            regulator: u.regulator_f64(),
            generators: unit_file.generators,
            saturation_log: u.saturation_log().to_vec(),
        },
        enumeration: en.stats,
        checks: PostChecks {
            closed_under_symmetry: closed,
            free_action,
            residue_check: residue_ok,
            evertse_cap: cap.to_string(),
            within_evertse_cap: within,
        },
        timings: Timings {
            units_ms,
            bounds_ms,
            enumeration_ms,
            checks_ms,
            total_ms: ms(start),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclofield::subfields_of_conductor;

    fn f11() -> CyclicField {
        subfields_of_conductor(5, 11).unwrap().remove(0)
    }

    #[test]
    fn verify_known_units() {
        let f = f11();
        let eta = f.eta();
        let two_eta = f.add(&f.from_int(2), &eta).unwrap();
        assert!(verify_solution(&f, &two_eta).unwrap());
        assert!(verify_solution(&f, &eta).unwrap());
        assert!(!verify_solution(&f, &f.from_int(3)).unwrap());
    }

    #[test]
    fn orbit_of_eta_has_six_members() {
        let f = f11();
        let imgs = symmetry_images(&f, &f.eta()).unwrap();
        let sols: Vec<FieldElement> = imgs.to_vec();
        let orbits = symmetry_orbits(&f, &sols).unwrap();
        assert_eq!(orbits, vec![vec![0, 1, 2, 3, 4, 5]]);
        assert!(symmetry_orbits(&f, &[]).unwrap().is_empty());
        assert!(matches!(
            symmetry_orbits(&f, &sols[..3]),
            Err(Error::NotClosed)
        ));
    }

    #[test]
    fn residue_post_check_on_eta() {
        let f = f11();
        assert!(residue_post_check(&f, &f.eta()).unwrap());
    }

    #[test]
    fn heuristic_finds_two_plus_eta() {
        let f = f11();
        let mut cfg = SolveConfig::with_mode(SolveMode::Heuristic);
        cfg.initial_bound_override = Some(BigInt::from(3));
        let rep = solve_unit_equation(&f, &cfg).unwrap();
        assert!(!rep.exhaustive);
        assert_eq!(rep.exit_code(), 2);
        let two_eta = f.add(&f.from_int(2), &f.eta()).unwrap();
        let (y, _) = f.period_coords(&two_eta).unwrap();
        assert!(rep.solutions.iter().any(|s| s.period_coords == y));
    }

    #[test]
    fn rigorous_mode_needs_fundamental_units() {
        let f = f11();
        let cfg = SolveConfig::with_mode(SolveMode::Rigorous);
        assert!(matches!(
            solve_unit_equation(&f, &cfg),
            Err(Error::ModeRequiresFundamentalUnits)
        ));
    }

    #[test]
    fn bound_reduction_makes_progress() {
        let f = f11();
        let u = saturated_units(&f, &[2]).unwrap();
        let b0 = initial_bound(&f, &u).unwrap();
        assert!(b0 >= BigInt::from(10u64.pow(10)));
        let b1 = reduce_bound(&f, &u, &b0, 2048).unwrap();
        assert!(b1 < b0);
        assert!(b1 <= BigInt::from(1000));
    }
}
