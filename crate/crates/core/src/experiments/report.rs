use std::io::Write;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::field::{PrimeModulus, Residue};
use crate::incidence::{
    count_incidences_bucketed, degenerate_case_count, max_collinear, IncidenceInstance,
    RudnevRatio, DEFAULT_COLLINEAR_CAP, DEFAULT_INSTANCE_CAP, DEFAULT_QUADRATIC_CAP,
};
use crate::plane::{cartesian_distance_set, pin_summary, pinned_distance_set, Point2, PointSet2};

/// Per-field workload caps for one case.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    /// Cap on `|A x A|^2` for the pin statistics and triple counts.
    pub quadratic: u128,
    /// Cap on `|A|^3` for building points and planes.
    pub instance: u128,
    /// Cap on point pairs for the collinearity count.
    pub collinear: u128,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            quadratic: DEFAULT_QUADRATIC_CAP,
            instance: DEFAULT_INSTANCE_CAP,
            collinear: DEFAULT_COLLINEAR_CAP,
        }
    }
}

pub const CSV_HEADER: [&str; 21] = [
    "p",
    "size_a",
    "gen_kind",
    "seed",
    "delta_size",
    "best_pin_x",
    "best_pin_y",
    "best_pin_size",
    "guaranteed_bound_num",
    "guaranteed_bound_den",
    "n_total",
    "n_restricted",
    "n_degenerate",
    "p_card",
    "k_max",
    "incidences",
    "rudnev_ratio",
    "theorem_ratio",
    "flag_a_vs_p23",
    "flag_p_vs_p2",
    "error",
];

/// One experiment row. Fields that could not be computed are `None` and the
/// reason is collected in `errors`.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseReport {
    pub p: u64,
    pub size_a: usize,
    pub gen_kind: String,
    pub seed: Option<u64>,
    pub delta_size: Option<usize>,
    pub best_pin: Option<Point2>,
    pub best_pin_size: Option<usize>,
    /// `|E|^3 / N` for `E = A x A`.
    pub guaranteed_bound: Option<Ratio<u128>>,
    /// `|Delta_u(E)|` at the averaging witness.
    pub guaranteed_pin_size: Option<usize>,
    pub n_total: Option<u64>,
    pub n_restricted: Option<u64>,
    pub n_degenerate: Option<u64>,
    pub p_card: Option<usize>,
    pub k_max: Option<usize>,
    pub incidences: Option<u64>,
    pub rudnev: Option<RudnevRatio>,
    /// `best_pin_size / min(p, |A|^{3/2})`, rounded to 9 decimals.
    pub theorem_ratio: Option<f64>,
    /// `|A|^3 <= p^2`.
    pub flag_a_vs_p23: bool,
    /// `|P| <= p^2`.
    pub flag_p_vs_p2: Option<bool>,
    pub errors: Vec<String>,
}

/// Rounds to the nearest multiple of `1e-9`.
pub fn round9(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

pub fn theorem_ratio(best_pin_size: usize, size_a: usize, p: u64) -> f64 {
    let scale = (p as f64).min((size_a as f64).powf(1.5));
    round9(best_pin_size as f64 / scale)
}

fn record<T>(errors: &mut Vec<String>, what: &str, r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e @ Error::Invariant(_)) => Err(e),
        Err(e) => {
            errors.push(format!("{what}: {e}"));
            Ok(None)
        }
    }
}

/// Computes every statistic for `E = A x A`.
///
/// Cap refusals and unsupported sizes leave the affected fields empty; an
/// `Err` is returned only for a violated row invariant.
pub fn run_case(a: &[Residue], m: PrimeModulus, caps: &Caps) -> Result<CaseReport> {
    let mut a = a.to_vec();
    a.sort_unstable();
    a.dedup();
    let n_a = a.len();
    let p = m.p();
    let mut errors = Vec::new();

    let delta = record(&mut errors, "delta", cartesian_distance_set(&a, m))?;

    let e = PointSet2::cartesian(&a, m);
    let quadratic = Error::cap("pin statistics |E|^2", (e.len() as u128).pow(2), caps.quadratic)
        .and_then(|_| pin_summary(&e));
    let summary = record(&mut errors, "pins", quadratic)?;
    let witness_size = match &summary {
        Some(s) => Some(pinned_distance_set(&e, s.guaranteed.pin)?.len()),
        None => None,
    };

    let degenerate = if summary.is_some() {
        record(&mut errors, "degenerate", degenerate_case_count(&a, m, caps.quadratic))?
    } else {
        None
    };

    let instance = record(
        &mut errors,
        "instance",
        IncidenceInstance::from_source(&a, m, caps.instance),
    )?;
    let (p_card, incidences, k_max) = match &instance {
        Some(inst) => {
            let k = record(
                &mut errors,
                "collinear",
                max_collinear(inst.points(), m, caps.collinear),
            )?;
            (
                Some(inst.points().len()),
                Some(count_incidences_bucketed(inst)),
                k,
            )
        }
        None => (None, None, None),
    };
    let rudnev = match (incidences, p_card, k_max) {
        (Some(i), Some(np), Some(k)) => Some(RudnevRatio::from_counts(i, np, k, m)),
        _ => None,
    };

    let n_total = summary.as_ref().map(|s| s.n);
    let n_restricted = match (n_total, degenerate) {
        (Some(n), Some(d)) => Some(n - d),
        _ => None,
    };
    let p2 = (p as u128) * (p as u128);

    let report = CaseReport {
        p,
        size_a: n_a,
        gen_kind: String::new(),
        seed: None,
        delta_size: delta.map(|d| d.len()),
        best_pin: summary.as_ref().map(|s| s.best.pin),
        best_pin_size: summary.as_ref().map(|s| s.best.size),
        guaranteed_bound: summary.as_ref().map(|s| s.guaranteed.bound),
        guaranteed_pin_size: witness_size,
        n_total,
        n_restricted,
        n_degenerate: degenerate,
        p_card,
        k_max,
        incidences,
        rudnev,
        theorem_ratio: summary
            .as_ref()
            .map(|s| theorem_ratio(s.best.size, n_a, p)),
        flag_a_vs_p23: (n_a as u128).pow(3) <= p2,
        flag_p_vs_p2: p_card.map(|np| np as u128 <= p2),
        errors,
    };
    report.check_invariants()?;
    Ok(report)
}

impl CaseReport {
    /// Cross-field checks that must hold in every row.
    pub fn check_invariants(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Invariant(format!("p={} |A|={}: {msg}", self.p, self.size_a)));
        if let (Some(bound), Some(n)) = (self.guaranteed_bound, self.n_total) {
            let e3 = (self.size_a as u128).pow(6);
            if let Some(w) = self.guaranteed_pin_size {
                if (w as u128) * (n as u128) < e3 {
                    return fail(format!("witness pin size {w} * N {n} < |E|^3 {e3}"));
                }
            }
            if let Some(best) = self.best_pin_size {
                if (best as u128) < bound.ceil().to_integer() {
                    return fail(format!("best pin size {best} < ceil({bound})"));
                }
            }
        }
        if let (Some(d), Some(n)) = (self.n_degenerate, self.n_total) {
            if d > 4 * (self.size_a as u64).pow(4) {
                return fail(format!("degenerate count {d} > 4|A|^4"));
            }
            if d > n {
                return fail(format!("degenerate count {d} > N {n}"));
            }
        }
        if let (Some(r), Some(i)) = (self.n_restricted, self.incidences) {
            if r != i {
                return fail(format!("restricted count {r} != incidences {i}"));
            }
        }
        if let Some(np) = self.p_card {
            let n = self.size_a;
            if np != n * n * (n - 1) {
                return fail(format!("|P| = {np} != |A|^2(|A|-1)"));
            }
        }
        if let Some(k) = self.k_max {
            if k > 2 * self.size_a {
                return fail(format!("k = {k} > 2|A|"));
            }
        }
        Ok(())
    }

    /// Row in [`CSV_HEADER`] order; absent values are empty strings.
    pub fn csv_record(&self) -> Vec<String> {
        fn opt<T: ToString>(v: Option<T>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        let flag = |b: bool| if b { "1" } else { "0" }.to_string();
        vec![
            self.p.to_string(),
            self.size_a.to_string(),
            self.gen_kind.clone(),
            opt(self.seed),
            opt(self.delta_size),
            opt(self.best_pin.map(|u| u.x)),
            opt(self.best_pin.map(|u| u.y)),
            opt(self.best_pin_size),
            opt(self.guaranteed_bound.map(|b| *b.numer())),
            opt(self.guaranteed_bound.map(|b| *b.denom())),
            opt(self.n_total),
            opt(self.n_restricted),
            opt(self.n_degenerate),
            opt(self.p_card),
            opt(self.k_max),
            opt(self.incidences),
            opt(self.rudnev.as_ref().map(|r| format!("{:.9}", r.value()))),
            opt(self.theorem_ratio.map(|t| format!("{t:.9}"))),
            flag(self.flag_a_vs_p23),
            opt(self.flag_p_vs_p2.map(flag)),
            self.errors.join("; "),
        ]
    }
}

/// Writes the header and one line per row.
pub fn write_csv<W: Write>(w: W, rows: &[CaseReport]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for row in rows {
        out.write_record(row.csv_record())?;
    }
    out.flush()?;
    Ok(())
}
