use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{imaginary_unit, PrimeModulus, Residue};

/// A family of subsets of F_p.
///
/// Textual form is `kind[:param[:param...]]`:
///
/// | form | set |
/// |------|-----|
/// | `interval[:start]` | `start, start+1, ...` |
/// | `ap:start:step` | arithmetic progression |
/// | `gp:start:ratio` | geometric progression |
/// | `random` | uniform random subset (seeded) |
/// | `list:v1:v2:...` | explicit values, reduced mod p |
/// | `iso[:start]` | `t` and `i t` for `t = start, start+1, ...`, where `i^2 = -1` |
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GenKind {
    Interval { start: i64 },
    ArithmeticProgression { start: i64, step: i64 },
    GeometricProgression { start: i64, ratio: i64 },
    RandomSubset,
    ExplicitList(Vec<i64>),
    IsotropicLineSection { start: i64 },
}

impl GenKind {
    pub fn is_random(&self) -> bool {
        matches!(self, GenKind::RandomSubset)
    }

    /// Short family name used in reports.
    pub fn name(&self) -> &'static str {
        match self {
            GenKind::Interval { .. } => "interval",
            GenKind::ArithmeticProgression { .. } => "arithmetic_progression",
            GenKind::GeometricProgression { .. } => "geometric_progression",
            GenKind::RandomSubset => "random_subset",
            GenKind::ExplicitList(_) => "explicit_list",
            GenKind::IsotropicLineSection { .. } => "isotropic_line_section",
        }
    }
}

impl fmt::Display for GenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenKind::Interval { start } => write!(f, "interval:{start}"),
            GenKind::ArithmeticProgression { start, step } => write!(f, "ap:{start}:{step}"),
            GenKind::GeometricProgression { start, ratio } => write!(f, "gp:{start}:{ratio}"),
            GenKind::RandomSubset => write!(f, "random"),
            GenKind::ExplicitList(values) => {
                write!(f, "list")?;
                for v in values {
                    write!(f, ":{v}")?;
                }
                Ok(())
            }
            GenKind::IsotropicLineSection { start } => write!(f, "iso:{start}"),
        }
    }
}

impl FromStr for GenKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let invalid = || Error::InvalidSpec(s.to_string());
        let mut parts = s.trim().split(':');
        let kind = parts.next().unwrap_or_default();
        let params = parts
            .map(|t| t.trim().parse::<i64>().map_err(|_| invalid()))
            .collect::<Result<Vec<_>>>()?;
        let kind = match (kind, params.as_slice()) {
            ("interval", []) => GenKind::Interval { start: 0 },
            ("interval", &[start]) => GenKind::Interval { start },
            ("ap" | "arithmetic_progression", &[start, step]) => {
                GenKind::ArithmeticProgression { start, step }
            }
            ("gp" | "geometric_progression", &[start, ratio]) => {
                GenKind::GeometricProgression { start, ratio }
            }
            ("random" | "random_subset", []) => GenKind::RandomSubset,
            ("list" | "explicit_list", values) if !values.is_empty() => {
                GenKind::ExplicitList(values.to_vec())
            }
            ("iso" | "isotropic_line_section", []) => GenKind::IsotropicLineSection { start: 0 },
            ("iso" | "isotropic_line_section", &[start]) => GenKind::IsotropicLineSection { start },
            _ => return Err(invalid()),
        };
        Ok(kind)
    }
}

/// A generator family plus the seed used by random families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenSpec {
    pub kind: GenKind,
    pub seed: u64,
}

impl GenSpec {
    pub fn new(kind: GenKind, seed: u64) -> Self {
        GenSpec { kind, seed }
    }
}

/// Produces exactly `size` distinct residues, sorted; deterministic in `(spec, seed)`.
pub fn generate_set(spec: &GenSpec, size: usize, m: PrimeModulus) -> Result<Vec<Residue>> {
    let unachievable = |reason: &str| Error::Unachievable {
        size,
        p: m.p(),
        reason: reason.to_string(),
    };
    if size == 0 {
        return Err(unachievable("size must be positive"));
    }
    if size as u64 > m.p() {
        return Err(unachievable("size exceeds field order"));
    }
    let r = |v: i64| m.residue_i64(v);
    let mut set: Vec<Residue> = match &spec.kind {
        GenKind::Interval { start } => (0..size as i64).map(|j| r(start + j)).collect(),
        GenKind::ArithmeticProgression { start, step } => {
            let step = r(*step);
            if step.is_zero() {
                return Err(Error::InvalidSpec(format!("{}: step is 0 mod p", spec.kind)));
            }
            let mut x = r(*start);
            (0..size)
                .map(|_| {
                    let cur = x;
                    x = m.add(x, step);
                    cur
                })
                .collect()
        }
        GenKind::GeometricProgression { start, ratio } => {
            let start = r(*start);
            let ratio = r(*ratio);
            if start.is_zero() || ratio.is_zero() || ratio.value() == 1 {
                return Err(Error::InvalidSpec(format!(
                    "{}: needs start != 0 and ratio not in {{0, 1}} mod p",
                    spec.kind
                )));
            }
            let mut out = vec![start];
            let mut x = m.mul(start, ratio);
            while out.len() < size {
                if x == start {
                    return Err(unachievable("ratio has too small a multiplicative order"));
                }
                out.push(x);
                x = m.mul(x, ratio);
            }
            out
        }
        GenKind::RandomSubset => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rand::seq::index::sample(&mut rng, m.order(), size)
                .into_iter()
                .map(|v| m.residue(v as u64))
                .collect()
        }
        GenKind::ExplicitList(values) => {
            let mut out: Vec<Residue> = Vec::new();
            for &v in values {
                let x = r(v);
                if !out.contains(&x) {
                    out.push(x);
                }
                if out.len() == size {
                    break;
                }
            }
            if out.len() < size {
                return Err(unachievable("list has too few distinct values mod p"));
            }
            out
        }
        GenKind::IsotropicLineSection { start } => {
            let i = imaginary_unit(m)
                .ok_or_else(|| unachievable("-1 is not a square when p = 3 mod 4"))?;
            let mut out: Vec<Residue> = Vec::new();
            let mut t = r(*start);
            let mut steps = 0u64;
            while out.len() < size {
                for x in [t, m.mul(i, t)] {
                    if out.len() < size && !out.contains(&x) {
                        out.push(x);
                    }
                }
                t = m.add(t, m.residue(1));
                steps += 1;
                if steps > m.p() {
                    return Err(unachievable("section exhausted"));
                }
            }
            out
        }
    };
    set.sort_unstable();
    set.dedup();
    debug_assert_eq!(set.len(), size);
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(p: u64) -> PrimeModulus {
        PrimeModulus::new(p).unwrap()
    }

    fn gen(spec: &str, size: usize, p: u64) -> Result<Vec<u64>> {
        let spec = GenSpec::new(spec.parse()?, 7);
        Ok(generate_set(&spec, size, m(p))?
            .into_iter()
            .map(|r| r.value())
            .collect())
    }

    #[test]
    fn examples() {
        assert_eq!(gen("interval", 4, 13).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(gen("ap:1:3", 4, 13).unwrap(), vec![1, 4, 7, 10]);
        assert_eq!(gen("gp:1:2", 4, 13).unwrap(), vec![1, 2, 4, 8]);
        assert_eq!(gen("iso", 3, 5).unwrap(), vec![0, 1, 2]);
        assert_eq!(gen("list:-1:14:3", 2, 13).unwrap(), vec![1, 12]);
        assert_eq!(gen("interval:11", 4, 13).unwrap(), vec![0, 1, 11, 12]);
    }

    #[test]
    fn random_is_deterministic_per_seed() {
        let a = gen("random", 6, 101).unwrap();
        assert_eq!(a, gen("random", 6, 101).unwrap());
        assert_eq!(a.len(), 6);
        let other = generate_set(&GenSpec::new(GenKind::RandomSubset, 8), 6, m(101)).unwrap();
        assert_ne!(
            a,
            other.into_iter().map(|r| r.value()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn failures() {
        assert!(matches!(gen("interval", 6, 5), Err(Error::Unachievable { .. })));
        assert!(matches!(gen("interval", 0, 5), Err(Error::Unachievable { .. })));
        assert!(matches!(gen("ap:1:13", 3, 13), Err(Error::InvalidSpec(_))));
        assert!(matches!(gen("gp:1:1", 3, 13), Err(Error::InvalidSpec(_))));
        assert!(matches!(gen("gp:0:2", 3, 13), Err(Error::InvalidSpec(_))));
        // 3 has order 3 mod 13
        assert!(matches!(gen("gp:1:3", 4, 13), Err(Error::Unachievable { .. })));
        assert!(matches!(gen("iso", 2, 7), Err(Error::Unachievable { .. })));
        assert!(matches!(gen("list:1:14", 2, 13), Err(Error::Unachievable { .. })));
    }

    #[test]
    fn grammar() {
        for bad in ["", "ap:1", "gp", "interval:x", "list", "nope:1", "random:3"] {
            assert!(bad.parse::<GenKind>().is_err(), "{bad}");
        }
        for good in ["interval:2", "ap:1:3", "gp:2:3", "random", "list:1:2:5", "iso:1"] {
            let kind: GenKind = good.parse().unwrap();
            assert_eq!(kind.to_string(), good);
        }
        assert_eq!(
            "arithmetic_progression:1:3".parse::<GenKind>().unwrap(),
            GenKind::ArithmeticProgression { start: 1, step: 3 }
        );
    }

    #[test]
    fn isotropic_sections_reach_every_size() {
        for p in [5u64, 13, 17] {
            for size in 1..=p as usize {
                let a = gen("iso", size, p).unwrap();
                assert_eq!(a.len(), size);
            }
        }
    }
}
