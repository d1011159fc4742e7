use std::path::PathBuf;

use itertools::Itertools;
use rayon::prelude::*;

use super::generate::{generate_set, GenKind, GenSpec};
use super::report::{run_case, theorem_ratio, CaseReport, Caps};
use crate::error::{Error, Result};
use crate::field::{PrimeModulus, Residue};
use crate::plane::{pin_summary, pinned_distance_set, PointSet2};

/// A grid of cases: every prime, every size, every generator.
///
/// Text form is one `key = value` per line, `#` starts a comment:
///
/// ```text
/// primes = 7, 11, 13
/// sizes = 2, 3, 4
/// specs = interval, ap:1:3, random
/// seed = 42
/// out = sweep.csv
/// cap.quadratic = 17179869184
/// cap.instance = 10000000
/// cap.collinear = 100000000
/// ```
#[derive(Clone, Debug, PartialEq, Eq)]
#[derive(Default)]
pub struct SweepConfig {
    pub primes: Vec<PrimeModulus>,
    pub sizes: Vec<usize>,
    pub specs: Vec<GenKind>,
    pub caps: Caps,
    pub out: Option<PathBuf>,
    pub seed: u64,
}


fn parse_num<T: std::str::FromStr>(token: &str) -> Result<T> {
    token.trim().parse().map_err(|_| Error::Parse {
        token: token.trim().to_string(),
        reason: "not a valid number".into(),
    })
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|t| !t.is_empty())
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SweepConfig::default();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                token: line.to_string(),
                reason: "expected `key = value`".into(),
            })?;
            let value = value.trim();
            match key.trim() {
                "primes" => {
                    cfg.primes = list(value)
                        .map(|t| PrimeModulus::new(parse_num(t)?))
                        .collect::<Result<_>>()?
                }
                "sizes" => cfg.sizes = list(value).map(parse_num).collect::<Result<_>>()?,
                "specs" => cfg.specs = list(value).map(str::parse).collect::<Result<_>>()?,
                "seed" => cfg.seed = parse_num(value)?,
                "out" => cfg.out = Some(PathBuf::from(value)),
                "cap.quadratic" => cfg.caps.quadratic = parse_num(value)?,
                "cap.instance" => cfg.caps.instance = parse_num(value)?,
                "cap.collinear" => cfg.caps.collinear = parse_num(value)?,
                other => {
                    return Err(Error::Parse {
                        token: other.to_string(),
                        reason: "unknown config key".into(),
                    })
                }
            }
        }
        Ok(cfg)
    }
}

/// SplitMix64 finalizer; case `i` of a sweep with master seed `s` uses
/// `splitmix64(s + i)`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSummary {
    pub rows: usize,
    pub rows_with_errors: usize,
    /// Rows whose cross-field invariants failed; must be zero.
    pub invariant_failures: usize,
    /// Smallest theorem ratio over all rows, the empirical constant.
    pub min_theorem_ratio: Option<f64>,
    pub max_rudnev_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<CaseReport>,
    pub summary: Option<SweepSummary>,
}

fn fold_min(acc: Option<f64>, x: Option<f64>) -> Option<f64> {
    match (acc, x) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
}

fn fold_max(acc: Option<f64>, x: Option<f64>) -> Option<f64> {
    match (acc, x) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, b) => a.or(b),
    }
}

/// Runs every `(prime, size, spec)` case.
///
/// Cases run in parallel; rows are sorted by `(p, |A|, spec index)` so the
/// output does not depend on scheduling. Per-case failures are stored in the
/// row and never abort the sweep.
pub fn run_sweep(cfg: &SweepConfig) -> SweepReport {
    let cases: Vec<(usize, PrimeModulus, usize, usize)> = cfg
        .primes
        .iter()
        .cartesian_product(cfg.sizes.iter())
        .cartesian_product(0..cfg.specs.len())
        .enumerate()
        .map(|(i, ((&m, &size), spec))| (i, m, size, spec))
        .collect();
    let mut rows: Vec<(usize, usize, CaseReport)> = cases
        .par_iter()
        .map(|&(i, m, size, spec_idx)| {
            let kind = &cfg.specs[spec_idx];
            let seed = splitmix64(cfg.seed.wrapping_add(i as u64));
            let spec = GenSpec::new(kind.clone(), seed);
            let mut row = match generate_set(&spec, size, m).and_then(|a| run_case(&a, m, &cfg.caps)) {
                Ok(row) => row,
                Err(e) => failed_row(m, size, e),
            };
            row.gen_kind = kind.to_string();
            row.seed = kind.is_random().then_some(seed);
            (spec_idx, i, row)
        })
        .collect();
    rows.sort_by_key(|(spec_idx, i, row)| (row.p, row.size_a, *spec_idx, *i));
    let rows: Vec<CaseReport> = rows.into_iter().map(|(_, _, r)| r).collect();
    let summary = (!rows.is_empty()).then(|| SweepSummary {
        rows: rows.len(),
        rows_with_errors: rows.iter().filter(|r| !r.errors.is_empty()).count(),
        invariant_failures: rows
            .iter()
            .filter(|r| r.errors.iter().any(|e| e.starts_with("invariant")))
            .count(),
        min_theorem_ratio: rows.iter().map(|r| r.theorem_ratio).fold(None, fold_min),
        max_rudnev_ratio: rows
            .iter()
            .map(|r| r.rudnev.as_ref().map(|x| x.value()))
            .fold(None, fold_max),
    });
    SweepReport { rows, summary }
}

fn failed_row(m: PrimeModulus, size: usize, e: Error) -> CaseReport {
    CaseReport {
        p: m.p(),
        size_a: size,
        gen_kind: String::new(),
        seed: None,
        delta_size: None,
        best_pin: None,
        best_pin_size: None,
        guaranteed_bound: None,
        guaranteed_pin_size: None,
        n_total: None,
        n_restricted: None,
        n_degenerate: None,
        p_card: None,
        k_max: None,
        incidences: None,
        rudnev: None,
        theorem_ratio: None,
        flag_a_vs_p23: (size as u128).pow(3) <= (m.p() as u128).pow(2),
        flag_p_vs_p2: None,
        errors: vec![e.to_string()],
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Run outside the `p <= 13`, `max_size <= p` guard.
    pub force: bool,
    /// Only check one representative per orbit of `a -> s a + t`.
    pub symmetry_reduction: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifySummary {
    pub p: u64,
    pub max_size: usize,
    pub subsets_checked: usize,
    pub min_theorem_ratio: f64,
    /// A subset attaining the minimum ratio (first in enumeration order).
    pub argmin: Vec<Residue>,
}

/// Whether `a` is the lexicographically least image of itself under the
/// affine maps `x -> s x + t`, `s != 0`.
fn is_affine_canonical(a: &[Residue], m: PrimeModulus) -> bool {
    let mut image = Vec::with_capacity(a.len());
    for s in m.elements().skip(1) {
        for t in m.elements() {
            image.clear();
            image.extend(a.iter().map(|&x| m.add(m.mul(s, x), t)));
            image.sort_unstable();
            if image.as_slice() < a {
                return false;
            }
        }
    }
    true
}

/// Checks the averaging inequality `|Delta_u(E)| * N >= |E|^3` at the witness
/// pin for every `A` with `1 <= |A| <= max_size` and `E = A x A`, tracking the
/// smallest theorem ratio.
///
/// An affine map scales every distance by `s^2`, so pinned distance counts
/// are constant on orbits and the reduction leaves the minimum unchanged.
pub fn exhaustive_verify(p: u64, max_size: usize, opts: VerifyOptions) -> Result<VerifySummary> {
    let m = PrimeModulus::new(p)?;
    if max_size == 0 {
        return Err(Error::Guard("max_size = 0".into()));
    }
    if !opts.force && (p > 13 || max_size as u64 > p) {
        return Err(Error::Guard(format!(
            "exhaustive verification with p = {p}, max_size = {max_size} (limits: p <= 13, max_size <= p)"
        )));
    }
    let max_size = max_size.min(p as usize);
    let elems: Vec<Residue> = m.elements().collect();
    let mut checked = 0;
    let mut best: Option<(f64, Vec<Residue>)> = None;
    for size in 1..=max_size {
        for a in elems.iter().copied().combinations(size) {
            if opts.symmetry_reduction && !is_affine_canonical(&a, m) {
                continue;
            }
            let e = PointSet2::cartesian(&a, m);
            let s = pin_summary(&e)?;
            let witness = pinned_distance_set(&e, s.guaranteed.pin)?.len() as u128;
            let e3 = (e.len() as u128).pow(3);
            if witness * (s.n as u128) < e3 {
                return Err(Error::Invariant(format!(
                    "averaging bound fails for A = {:?} mod {p}: {witness} * {} < {e3}",
                    a.iter().map(|r| r.value()).collect::<Vec<_>>(),
                    s.n
                )));
            }
            let ratio = theorem_ratio(s.best.size, size, p);
            if best.as_ref().is_none_or(|(r, _)| ratio < *r) {
                best = Some((ratio, a));
            }
            checked += 1;
        }
    }
    let (min_theorem_ratio, argmin) = best.expect("at least one subset");
    Ok(VerifySummary {
        p,
        max_size,
        subsets_checked: checked,
        min_theorem_ratio,
        argmin,
    })
}
