//! Command-line front end.
//!
//! Results go to `out` as `key=value` lines, diagnostics to `err`. Exit status:
//! 0 success, 1 usage or input error, 2 cap or guard refusal, 3 invariant
//! violation (including oracle mismatches).

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::experiments::{
    exhaustive_verify, generate_set, run_sweep, write_csv, GenKind, GenSpec, SweepConfig,
    VerifyOptions,
};
use crate::field::{PrimeModulus, Residue};
use crate::incidence::{
    count_incidences_bucketed, count_incidences_naive, degenerate_case_count, max_collinear,
    restricted_isosceles_count, triple_split_bruteforce, write_planes, write_points,
    IncidenceInstance, RudnevRatio, DEFAULT_COLLINEAR_CAP, DEFAULT_ENUMERATION_CAP,
    DEFAULT_INSTANCE_CAP, DEFAULT_NAIVE_CAP, DEFAULT_QUADRATIC_CAP,
};
use crate::plane::{
    cartesian_distance_set, distance_set_with, isosceles_count, isosceles_count_bruteforce,
    pin_summary, DiagonalPolicy, PointSet2, DEFAULT_BRUTEFORCE_CAP,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_REFUSED: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "PINDIST_THREADS";

/// Longest distance set listing printed by `dist`.
const LISTING_LIMIT: usize = 1000;

#[derive(Debug, Parser)]
#[command(
    name = "pindist",
    version,
    about = "Pinned algebraic distances and point-plane incidences over F_p"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct SetArgs {
    /// Odd prime modulus
    #[arg(long)]
    p: u64,
    /// File of integers separated by newlines or commas, reduced mod p
    #[arg(long, conflicts_with_all = ["gen", "size", "seed"], required_unless_present = "gen")]
    set: Option<PathBuf>,
    /// Generator spec `kind[:param...]`, e.g. `interval`, `ap:1:3`, `gp:2:3`, `random`
    #[arg(long, requires = "size")]
    gen: Option<String>,
    /// Number of elements to generate
    #[arg(long, requires = "gen")]
    size: Option<usize>,
    /// Seed for random generators
    #[arg(long, requires = "gen")]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Distance set of A x A
    Dist {
        #[command(flatten)]
        set: SetArgs,
        /// Leave out the zero distance of each point to itself
        #[arg(long)]
        exclude_diagonal: bool,
    },
    /// Best pin and the averaging witness for A x A
    Pin {
        #[command(flatten)]
        set: SetArgs,
    },
    /// Isosceles triple count N of A x A and its split
    CountN {
        #[command(flatten)]
        set: SetArgs,
        /// Also run the brute-force enumerations and compare
        #[arg(long)]
        oracle: bool,
    },
    /// Point-plane incidence instance built from A
    Incidence {
        #[command(flatten)]
        set: SetArgs,
        /// Use the pairwise counter instead of the bucketed one
        #[arg(long)]
        naive: bool,
        /// Write the point set to this file
        #[arg(long)]
        export_points: Option<PathBuf>,
        /// Write the plane set to this file
        #[arg(long)]
        export_planes: Option<PathBuf>,
    },
    /// Check the averaging bound on every subset of F_p up to a size
    Verify {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        max_size: usize,
        /// Lift the p <= 13, max-size <= p guard
        #[arg(long)]
        force: bool,
        /// Check one subset per affine orbit
        #[arg(long)]
        symmetry: bool,
    },
    /// Run a sweep described by a config file and write CSV
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path; overrides `out` in the config
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::CapExceeded { .. } | Error::Guard(_) => EXIT_REFUSED,
        Error::Invariant(_) => EXIT_INVARIANT,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Some(n),
            _ => {
                let _ = writeln!(err, "error: {THREADS_ENV}=`{v}` is not a positive integer");
                return EXIT_USAGE;
            }
        },
        Err(_) => None,
    };
    let result = match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command, out, err)),
            Err(e) => {
                let _ = writeln!(err, "error: cannot start worker pool: {e}");
                return EXIT_USAGE;
            }
        },
        None => dispatch(cli.command, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Parses decimal integers separated by commas or whitespace.
fn parse_set_text(text: &str) -> Result<Vec<i64>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<i64>().map_err(|_| Error::Parse {
                token: t.to_string(),
                reason: "not a decimal integer".into(),
            })
        })
        .collect()
}

fn read_set_file(path: &Path, m: PrimeModulus, err: &mut dyn Write) -> Result<Vec<Residue>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse {
        token: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let raw = parse_set_text(&text)?;
    let distinct_raw: BTreeSet<i64> = raw.iter().copied().collect();
    let reduced: BTreeSet<Residue> = raw.iter().map(|&v| m.residue_i64(v)).collect();
    if reduced.len() < distinct_raw.len() {
        writeln!(
            err,
            "warning: reducing mod {} merged {} distinct values into {} residues",
            m.p(),
            distinct_raw.len(),
            reduced.len()
        )?;
    }
    if reduced.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(reduced.into_iter().collect())
}

fn load_set(args: &SetArgs, err: &mut dyn Write) -> Result<(PrimeModulus, Vec<Residue>)> {
    let m = PrimeModulus::new(args.p)?;
    let a = match (&args.set, &args.gen) {
        (Some(path), _) => read_set_file(path, m, err)?,
        (None, Some(spec)) => {
            let kind: GenKind = spec.parse()?;
            let size = args.size.expect("clap requires --size with --gen");
            generate_set(&GenSpec::new(kind, args.seed.unwrap_or(0)), size, m)?
        }
        (None, None) => unreachable!("clap requires --set or --gen"),
    };
    Ok((m, a))
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn write_header(out: &mut dyn Write, m: PrimeModulus, a: &[Residue]) -> Result<()> {
    writeln!(out, "p={}", m.p())?;
    writeln!(out, "size_a={}", a.len())?;
    writeln!(out, "set={}", join(a))?;
    Ok(())
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Dist {
            set,
            exclude_diagonal,
        } => {
            let (m, a) = load_set(&set, err)?;
            let delta = if exclude_diagonal {
                distance_set_with(&PointSet2::cartesian(&a, m), DiagonalPolicy::Exclude)?
            } else {
                cartesian_distance_set(&a, m)?
            };
            write_header(out, m, &a)?;
            writeln!(out, "delta_size={}", delta.len())?;
            writeln!(out, "delta_set={}", join(delta.iter().take(LISTING_LIMIT)))?;
            if delta.len() > LISTING_LIMIT {
                writeln!(out, "delta_set_truncated={LISTING_LIMIT}")?;
            }
        }
        Command::Pin { set } => {
            let (m, a) = load_set(&set, err)?;
            let e = PointSet2::cartesian(&a, m);
            let s = pin_summary(&e)?;
            write_header(out, m, &a)?;
            writeln!(out, "best_pin={}", s.best.pin)?;
            writeln!(out, "best_pin_size={}", s.best.size)?;
            writeln!(out, "guaranteed_pin={}", s.guaranteed.pin)?;
            writeln!(
                out,
                "guaranteed_pin_size={}",
                crate::plane::pinned_distance_set(&e, s.guaranteed.pin)?.len()
            )?;
            writeln!(
                out,
                "guaranteed_bound={}/{}",
                s.guaranteed.bound.numer(),
                s.guaranteed.bound.denom()
            )?;
            writeln!(out, "n_total={}", s.n)?;
        }
        Command::CountN { set, oracle } => {
            let (m, a) = load_set(&set, err)?;
            let e = PointSet2::cartesian(&a, m);
            let n = isosceles_count(&e)?;
            let restricted = restricted_isosceles_count(&a, m, DEFAULT_QUADRATIC_CAP)?;
            let degenerate = degenerate_case_count(&a, m, DEFAULT_QUADRATIC_CAP)?;
            let checked = if oracle {
                let brute = isosceles_count_bruteforce(&e, DEFAULT_BRUTEFORCE_CAP)?;
                Some((brute, triple_split_bruteforce(&a, m, DEFAULT_ENUMERATION_CAP)?))
            } else {
                None
            };
            write_header(out, m, &a)?;
            writeln!(out, "n_total={n}")?;
            writeln!(out, "n_restricted={restricted}")?;
            writeln!(out, "n_degenerate={degenerate}")?;
            if let Some((brute, split)) = checked {
                writeln!(out, "n_oracle={brute}")?;
                writeln!(out, "n_restricted_oracle={}", split.restricted)?;
                writeln!(out, "n_degenerate_oracle={}", split.degenerate)?;
                if brute != n || split.restricted != restricted || split.degenerate != degenerate
                {
                    return Err(Error::Invariant("oracle mismatch".into()));
                }
                writeln!(out, "oracle=agree")?;
            }
        }
        Command::Incidence {
            set,
            naive,
            export_points,
            export_planes,
        } => {
            let (m, a) = load_set(&set, err)?;
            let inst = IncidenceInstance::from_source(&a, m, DEFAULT_INSTANCE_CAP)?;
            let incidences = if naive {
                count_incidences_naive(&inst, DEFAULT_NAIVE_CAP)?
            } else {
                count_incidences_bucketed(&inst)
            };
            let k = max_collinear(inst.points(), m, DEFAULT_COLLINEAR_CAP)?;
            let ratio = RudnevRatio::from_counts(incidences, inst.points().len(), k, m);
            if ratio.exceeds_p_squared {
                writeln!(
                    err,
                    "warning: |P| = {} exceeds p^2 = {}; the incidence bound is stated for |P| = O(p^2)",
                    inst.points().len(),
                    m.p() * m.p()
                )?;
            }
            if let Some(path) = export_points {
                write_points(fs::File::create(path)?, inst.points(), m)?;
            }
            if let Some(path) = export_planes {
                write_planes(fs::File::create(path)?, inst.planes(), m)?;
            }
            write_header(out, m, &a)?;
            writeln!(out, "counter={}", if naive { "naive" } else { "bucketed" })?;
            writeln!(out, "p_card={}", inst.points().len())?;
            writeln!(out, "plane_card={}", inst.planes().len())?;
            writeln!(out, "k_max={k}")?;
            writeln!(out, "incidences={incidences}")?;
            writeln!(
                out,
                "rudnev_ratio_exact={}/{}",
                ratio.ratio.numer(),
                ratio.ratio.denom()
            )?;
            writeln!(out, "rudnev_ratio={:.9}", ratio.value())?;
            writeln!(out, "flag_p_vs_p2={}", u8::from(!ratio.exceeds_p_squared))?;
        }
        Command::Verify {
            p,
            max_size,
            force,
            symmetry,
        } => {
            let s = exhaustive_verify(
                p,
                max_size,
                VerifyOptions {
                    force,
                    symmetry_reduction: symmetry,
                },
            )?;
            writeln!(out, "p={}", s.p)?;
            writeln!(out, "max_size={}", s.max_size)?;
            writeln!(out, "subsets_checked={}", s.subsets_checked)?;
            writeln!(out, "bound_failures=0")?;
            writeln!(out, "min_theorem_ratio={:.9}", s.min_theorem_ratio)?;
            writeln!(out, "argmin_set={}", join(&s.argmin))?;
        }
        Command::Sweep { config, out: path } => {
            let text = fs::read_to_string(&config).map_err(|e| Error::Parse {
                token: config.display().to_string(),
                reason: e.to_string(),
            })?;
            let cfg = SweepConfig::parse(&text)?;
            let path = path.or_else(|| cfg.out.clone()).ok_or_else(|| Error::Parse {
                token: config.display().to_string(),
                reason: "no output path (`out` key or --out)".into(),
            })?;
            let report = run_sweep(&cfg);
            let mut buf = Vec::new();
            write_csv(&mut buf, &report.rows)?;
            fs::write(&path, buf)?;
            writeln!(out, "out={}", path.display())?;
            writeln!(out, "rows={}", report.rows.len())?;
            if let Some(s) = report.summary {
                let opt = |v: Option<f64>| v.map(|x| format!("{x:.9}")).unwrap_or_default();
                writeln!(out, "rows_with_errors={}", s.rows_with_errors)?;
                writeln!(out, "invariant_failures={}", s.invariant_failures)?;
                writeln!(out, "min_theorem_ratio={}", opt(s.min_theorem_ratio))?;
                writeln!(out, "max_rudnev_ratio={}", opt(s.max_rudnev_ratio))?;
                if s.invariant_failures > 0 {
                    return Ok(EXIT_INVARIANT);
                }
            }
        }
    }
    Ok(EXIT_OK)
}
