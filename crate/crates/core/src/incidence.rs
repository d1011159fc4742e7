//! Point-plane incidences in F_p^3 built from a set `A` of residues.
//!
//! For `u, v, w` in `A x A` with `v1 != w1` and `v2 != w2`, the condition
//! `|u - v| = |u - w|` reads
//!
//! ```text
//! 2 u1 (v1 - w1) + 2 u2 (v2 - w2) - (v2^2 - w2^2) = v1^2 - w1^2
//! ```
//!
//! which is the incidence of the point `(2 u1, v2 - w2, v2^2 - w2^2)` with the
//! plane `(v1 - w1) x - 2 u2 y + z = v1^2 - w1^2` after multiplying through by
//! `-1` and swapping the roles of `v1` and `w1`. Each point and each plane
//! arises from exactly one triple, so the incidence count equals the number
//! of such isosceles triples.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use num_integer::Roots;
use num_rational::Ratio;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{InverseTable, PrimeModulus, Residue};
use crate::plane::{pin_profiles, PointSet2, DENSE_HISTOGRAM_LIMIT};

/// Cap on `|A|^3` when constructing points or planes.
pub const DEFAULT_INSTANCE_CAP: u128 = 10_000_000;
/// Cap on `|P| * |Pi|` for the naive incidence counter.
pub const DEFAULT_NAIVE_CAP: u128 = 1_000_000_000;
/// Cap on the number of point pairs examined by [`max_collinear`].
pub const DEFAULT_COLLINEAR_CAP: u128 = 100_000_000;
/// Cap on `|A x A|^2` for the histogram-based triple counts.
pub const DEFAULT_QUADRATIC_CAP: u128 = 1 << 34;
/// Cap on `|A|^6` for the enumeration oracles.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point3 {
    pub x: Residue,
    pub y: Residue,
    pub z: Residue,
}

impl Point3 {
    pub fn new(x: Residue, y: Residue, z: Residue) -> Self {
        Point3 { x, y, z }
    }

    fn coords(self) -> [Residue; 3] {
        [self.x, self.y, self.z]
    }

    fn from_coords(c: [Residue; 3]) -> Self {
        Point3::new(c[0], c[1], c[2])
    }
}

/// The plane `{x : n1 x1 + n2 x2 + x3 = c}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Plane {
    pub n1: Residue,
    pub n2: Residue,
    pub c: Residue,
}

impl Plane {
    pub fn new(n1: Residue, n2: Residue, c: Residue) -> Self {
        Plane { n1, n2, c }
    }

    #[inline]
    pub fn contains(&self, q: Point3, m: PrimeModulus) -> bool {
        m.add(m.add(m.mul(self.n1, q.x), m.mul(self.n2, q.y)), q.z) == self.c
    }
}

fn normalize_source(a: &[Residue], m: PrimeModulus, cap: u128) -> Result<Vec<Residue>> {
    let mut a = a.to_vec();
    for r in &a {
        m.canonical(r.value())?;
    }
    a.sort_unstable();
    a.dedup();
    if a.len() < 2 {
        return Err(Error::SourceTooSmall {
            need: 2,
            got: a.len(),
        });
    }
    Error::cap("instance size |A|^3", (a.len() as u128).pow(3), cap)?;
    Ok(a)
}

/// Ordered pairs `(s, t)` of distinct elements mapped to `(s - t, s^2 - t^2)`.
fn difference_pairs(a: &[Residue], m: PrimeModulus) -> Vec<(Residue, Residue)> {
    let mut out = Vec::with_capacity(a.len() * (a.len() - 1));
    for &s in a {
        for &t in a {
            if s != t {
                out.push((m.sub(s, t), m.sub(m.square(s), m.square(t))));
            }
        }
    }
    out
}

/// `{(2 u1, v2 - w2, v2^2 - w2^2) : u1 in A, v2 != w2 in A}`, sorted.
pub fn build_point_set(a: &[Residue], m: PrimeModulus, cap: u128) -> Result<Vec<Point3>> {
    let a = normalize_source(a, m, cap)?;
    let pairs = difference_pairs(&a, m);
    let mut points: Vec<Point3> = a
        .iter()
        .flat_map(|&u1| {
            let x = m.double(u1);
            pairs.iter().map(move |&(d, s)| Point3::new(x, d, s))
        })
        .collect();
    points.sort_unstable();
    points.dedup();
    Ok(points)
}

/// `{(v1 - w1) x - 2 u2 y + z = v1^2 - w1^2 : u2 in A, v1 != w1 in A}`, sorted.
pub fn build_plane_set(a: &[Residue], m: PrimeModulus, cap: u128) -> Result<Vec<Plane>> {
    let a = normalize_source(a, m, cap)?;
    let pairs = difference_pairs(&a, m);
    let mut planes: Vec<Plane> = a
        .iter()
        .flat_map(|&u2| {
            let n2 = m.neg(m.double(u2));
            pairs.iter().map(move |&(d, s)| Plane::new(d, n2, s))
        })
        .collect();
    planes.sort_unstable();
    planes.dedup();
    Ok(planes)
}

/// Distinct points and distinct planes of equal cardinality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncidenceInstance {
    points: Vec<Point3>,
    planes: Vec<Plane>,
    modulus: PrimeModulus,
    source: Vec<Residue>,
}

impl IncidenceInstance {
    /// An arbitrary instance; rejects duplicates, unequal sizes and
    /// unreduced coordinates.
    pub fn new(points: Vec<Point3>, planes: Vec<Plane>, modulus: PrimeModulus) -> Result<Self> {
        for q in &points {
            for c in q.coords() {
                modulus.canonical(c.value())?;
            }
        }
        for pl in &planes {
            for c in [pl.n1, pl.n2, pl.c] {
                modulus.canonical(c.value())?;
            }
        }
        let mut points = points;
        let mut planes = planes;
        let (np, npl) = (points.len(), planes.len());
        points.sort_unstable();
        points.dedup();
        planes.sort_unstable();
        planes.dedup();
        if points.len() != np || planes.len() != npl {
            return Err(Error::InvalidInstance("duplicate points or planes".into()));
        }
        if np != npl {
            return Err(Error::InvalidInstance(format!(
                "|P| = {np} differs from |Pi| = {npl}"
            )));
        }
        Ok(IncidenceInstance {
            points,
            planes,
            modulus,
            source: Vec::new(),
        })
    }

    /// The construction from `A`; checks `|P| = |Pi| = |A|^2 (|A| - 1)`.
    pub fn from_source(a: &[Residue], modulus: PrimeModulus, cap: u128) -> Result<Self> {
        let source = normalize_source(a, modulus, cap)?;
        let points = build_point_set(&source, modulus, cap)?;
        let planes = build_plane_set(&source, modulus, cap)?;
        let n = source.len();
        let expected = n * n * (n - 1);
        if points.len() != expected || planes.len() != expected {
            return Err(Error::Invariant(format!(
                "|P| = {}, |Pi| = {}, expected |A|^2(|A|-1) = {expected}",
                points.len(),
                planes.len()
            )));
        }
        Ok(IncidenceInstance {
            points,
            planes,
            modulus,
            source,
        })
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn planes(&self) -> &[Plane] {
        &self.planes
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    /// The generating set, empty for instances built with [`IncidenceInstance::new`].
    pub fn source(&self) -> &[Residue] {
        &self.source
    }

    /// Whether `|P| <= p^2`, the size regime of the incidence bound.
    pub fn within_p_squared(&self) -> bool {
        let p = self.modulus.p() as u128;
        (self.points.len() as u128) <= p * p
    }
}

/// Checks every (point, plane) pair.
pub fn count_incidences_naive(inst: &IncidenceInstance, cap: u128) -> Result<u64> {
    let work = inst.points.len() as u128 * inst.planes.len() as u128;
    Error::cap("naive incidence pairs |P||Pi|", work, cap)?;
    let m = inst.modulus;
    Ok(inst
        .planes
        .iter()
        .map(|pl| inst.points.iter().filter(|&&q| pl.contains(q, m)).count() as u64)
        .sum())
}

/// Same count as [`count_incidences_naive`] in `O(G |P| + |Pi|)` where `G` is
/// the number of distinct normals `(n1, n2)`.
///
/// For each normal, the values `n1 x + n2 y + z` over all points are tallied
/// once and each plane in the group reads off the tally at its constant.
pub fn count_incidences_bucketed(inst: &IncidenceInstance) -> u64 {
    let m = inst.modulus;
    let mut groups: BTreeMap<(Residue, Residue), Vec<Residue>> = BTreeMap::new();
    for pl in &inst.planes {
        groups.entry((pl.n1, pl.n2)).or_default().push(pl.c);
    }
    let groups: Vec<_> = groups.into_iter().collect();
    let dense = m.p() <= DENSE_HISTOGRAM_LIMIT;
    groups
        .par_iter()
        .map_init(
            || {
                if dense {
                    vec![0u32; m.order()]
                } else {
                    Vec::new()
                }
            },
            |tally, ((n1, n2), constants)| {
                let value = |q: &Point3| m.add(m.add(m.mul(*n1, q.x), m.mul(*n2, q.y)), q.z);
                if dense {
                    for q in &inst.points {
                        tally[value(q).value() as usize] += 1;
                    }
                    let hits = constants
                        .iter()
                        .map(|c| tally[c.value() as usize] as u64)
                        .sum();
                    for q in &inst.points {
                        tally[value(q).value() as usize] = 0;
                    }
                    hits
                } else {
                    let mut sparse: HashMap<Residue, u64> = HashMap::new();
                    for q in &inst.points {
                        *sparse.entry(value(q)).or_insert(0) += 1;
                    }
                    constants
                        .iter()
                        .map(|c| sparse.get(c).copied().unwrap_or(0))
                        .sum::<u64>()
                }
            },
        )
        .sum()
}

/// Canonical key of a line in F_p^3.
///
/// The direction is scaled so its first nonzero coordinate (the pivot) is 1,
/// and the base point is the unique point of the line whose pivot coordinate
/// is 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Line3 {
    pub direction: Point3,
    pub base: Point3,
}

fn pivot(d: [Residue; 3]) -> Option<usize> {
    d.iter().position(|c| !c.is_zero())
}

impl Line3 {
    pub fn through(a: Point3, b: Point3, m: PrimeModulus) -> Result<Self> {
        let (a, b) = (a.coords(), b.coords());
        let d = [m.sub(b[0], a[0]), m.sub(b[1], a[1]), m.sub(b[2], a[2])];
        let k = pivot(d).ok_or(Error::CoincidentPoints)?;
        let s = m.inv(d[k]).expect("pivot is nonzero");
        let d = d.map(|c| m.mul(c, s));
        let t = a[k];
        let base = [0, 1, 2].map(|i| m.sub(a[i], m.mul(t, d[i])));
        Ok(Line3 {
            direction: Point3::from_coords(d),
            base: Point3::from_coords(base),
        })
    }

    pub fn contains(&self, q: Point3, m: PrimeModulus) -> bool {
        let d = self.direction.coords();
        let base = self.base.coords();
        let q = q.coords();
        let k = pivot(d).expect("direction is nonzero");
        let t = m.sub(q[k], base[k]);
        (0..3).all(|i| q[i] == m.add(base[i], m.mul(t, d[i])))
    }
}

/// Largest number of points of `points` on one line of F_p^3.
///
/// For each anchor, later points are bucketed by the normalized direction
/// from the anchor; a line's points are all counted at its first point in
/// sorted order. The anchor loop is a parallel max-reduction.
pub fn max_collinear(points: &[Point3], m: PrimeModulus, cap: u128) -> Result<usize> {
    let mut pts = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    let n = pts.len();
    if n < 2 {
        return Ok(n);
    }
    Error::cap(
        "collinearity pairs",
        n as u128 * (n as u128 - 1) / 2,
        cap,
    )?;
    let inverses = (m.p() <= DENSE_HISTOGRAM_LIMIT).then(|| InverseTable::new(m));
    let inv = |x: Residue| match &inverses {
        Some(t) => t.get(x),
        None => m.inv(x).expect("nonzero"),
    };
    let best = (0..n - 1)
        .into_par_iter()
        .map_init(HashMap::<u64, u32>::new, |dirs, i| {
            dirs.clear();
            let a = pts[i].coords();
            let mut most = 0u32;
            for q in &pts[i + 1..] {
                let q = q.coords();
                let d = [m.sub(q[0], a[0]), m.sub(q[1], a[1]), m.sub(q[2], a[2])];
                let k = pivot(d).expect("points are distinct");
                let s = inv(d[k]);
                let (u, v) = match k {
                    0 => (d[1], d[2]),
                    1 => (d[0], d[2]),
                    _ => (d[0], d[1]),
                };
                let key = ((k as u64) << 62)
                    | (m.mul(u, s).value() << 31)
                    | m.mul(v, s).value();
                let c = dirs.entry(key).or_insert(0);
                *c += 1;
                most = most.max(*c);
            }
            most as usize + 1
        })
        .max()
        .unwrap_or(1);
    Ok(best)
}

fn check_quadratic(a: &[Residue], cap: u128) -> Result<()> {
    let e = (a.len() as u128).pow(2);
    Error::cap("triple count workload |A x A|^2", e * e, cap)
}

fn dedup_source(a: &[Residue], m: PrimeModulus) -> Result<Vec<Residue>> {
    let mut a = a.to_vec();
    for r in &a {
        m.canonical(r.value())?;
    }
    a.sort_unstable();
    a.dedup();
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(a)
}

/// Triples in `(A x A)^3` with `|u - v| = |u - w|` and `v1 = w1` or `v2 = w2`.
///
/// With `H(a) = sum_y #{b in A : (a - b)^2 = y}^2`, fixing `v1 = w1` leaves
/// `H(u2)` choices of `(v2, w2)` for each of the `|A|` columns, and likewise
/// for rows, so the count is `2 |A|^2 sum_a H(a) - |A|^4` after removing the
/// doubly counted `v = w` triples.
pub fn degenerate_case_count(a: &[Residue], m: PrimeModulus, cap: u128) -> Result<u64> {
    let a = dedup_source(a, m)?;
    check_quadratic(&a, cap)?;
    let n = a.len() as u64;
    let mut sum_h = 0u64;
    let mut tally: HashMap<Residue, u64> = HashMap::new();
    for &x in &a {
        tally.clear();
        for &y in &a {
            *tally.entry(m.square(m.sub(x, y))).or_insert(0) += 1;
        }
        sum_h += tally.values().map(|c| c * c).sum::<u64>();
    }
    Ok(2 * n * n * sum_h - n.pow(4))
}

/// Triples in `(A x A)^3` with `|u - v| = |u - w|`, `v1 != w1` and `v2 != w2`,
/// as `N(A x A)` minus [`degenerate_case_count`].
pub fn restricted_isosceles_count(a: &[Residue], m: PrimeModulus, cap: u128) -> Result<u64> {
    let a = dedup_source(a, m)?;
    check_quadratic(&a, cap)?;
    let e = PointSet2::cartesian(&a, m);
    let total: u64 = pin_profiles(&e)?.iter().map(|pr| pr.energy).sum();
    Ok(total - degenerate_case_count(&a, m, cap)?)
}

/// Split of the isosceles count of `A x A` into its two parts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TripleSplit {
    pub total: u64,
    pub restricted: u64,
    pub degenerate: u64,
}

/// Enumerates all `|A|^6` coordinate tuples once and classifies each triple.
pub fn triple_split_bruteforce(a: &[Residue], m: PrimeModulus, cap: u128) -> Result<TripleSplit> {
    let a = dedup_source(a, m)?;
    Error::cap("triple enumeration |A|^6", (a.len() as u128).pow(6), cap)?;
    let sq = |x: Residue| m.square(x);
    let mut split = TripleSplit {
        total: 0,
        restricted: 0,
        degenerate: 0,
    };
    for &u1 in &a {
        for &u2 in &a {
            for &v1 in &a {
                for &v2 in &a {
                    let dv = m.add(sq(m.sub(u1, v1)), sq(m.sub(u2, v2)));
                    for &w1 in &a {
                        for &w2 in &a {
                            let dw = m.add(sq(m.sub(u1, w1)), sq(m.sub(u2, w2)));
                            if dv != dw {
                                continue;
                            }
                            split.total += 1;
                            if v1 != w1 && v2 != w2 {
                                split.restricted += 1;
                            } else {
                                split.degenerate += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(split)
}

/// `incidences / (floor(sqrt(|P|^3)) + k |P|)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RudnevRatio {
    pub incidences: u64,
    pub points: usize,
    pub k: usize,
    pub denominator: u128,
    pub ratio: Ratio<u128>,
    /// `|P| > p^2`: outside the regime where the bound is claimed.
    pub exceeds_p_squared: bool,
}

impl RudnevRatio {
    pub fn from_counts(incidences: u64, points: usize, k: usize, m: PrimeModulus) -> Self {
        let np = points as u128;
        let denominator = (np * np * np).sqrt() + k as u128 * np;
        let ratio = if denominator == 0 {
            Ratio::from_integer(0)
        } else {
            Ratio::new(incidences as u128, denominator)
        };
        let p = m.p() as u128;
        RudnevRatio {
            incidences,
            points,
            k,
            denominator,
            ratio,
            exceeds_p_squared: np > p * p,
        }
    }

    pub fn value(&self) -> f64 {
        *self.ratio.numer() as f64 / *self.ratio.denom() as f64
    }
}

/// Counts incidences (bucketed) and collinearity, then forms the ratio.
pub fn rudnev_ratio(inst: &IncidenceInstance, collinear_cap: u128) -> Result<RudnevRatio> {
    let incidences = count_incidences_bucketed(inst);
    let k = max_collinear(&inst.points, inst.modulus, collinear_cap)?;
    Ok(RudnevRatio::from_counts(
        incidences,
        inst.points.len(),
        k,
        inst.modulus,
    ))
}

/// Writes `p=<p>` followed by one `x y z` line per point.
pub fn write_points<W: Write>(mut w: W, points: &[Point3], m: PrimeModulus) -> Result<()> {
    writeln!(w, "p={}", m.p())?;
    for q in points {
        writeln!(w, "{} {} {}", q.x, q.y, q.z)?;
    }
    Ok(())
}

/// Writes `p=<p>` followed by one `n1 n2 c` line per plane.
pub fn write_planes<W: Write>(mut w: W, planes: &[Plane], m: PrimeModulus) -> Result<()> {
    writeln!(w, "p={}", m.p())?;
    for pl in planes {
        writeln!(w, "{} {} {}", pl.n1, pl.n2, pl.c)?;
    }
    Ok(())
}

fn read_triples<R: BufRead>(r: R) -> Result<(PrimeModulus, Vec<[Residue; 3]>)> {
    let mut lines = r.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    let p_token = header.trim().strip_prefix("p=").ok_or_else(|| Error::Parse {
        token: header.clone(),
        reason: "expected header `p=<p>`".into(),
    })?;
    let p: u64 = p_token.parse().map_err(|_| Error::Parse {
        token: p_token.to_string(),
        reason: "not an integer".into(),
    })?;
    let m = PrimeModulus::new(p)?;
    let mut out = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals = line
            .split_whitespace()
            .map(|t| {
                let v: u64 = t.parse().map_err(|_| Error::Parse {
                    token: t.to_string(),
                    reason: "not an integer".into(),
                })?;
                m.canonical(v)
            })
            .collect::<Result<Vec<_>>>()?;
        let triple: [Residue; 3] = vals.try_into().map_err(|_| Error::Parse {
            token: line.clone(),
            reason: "expected three values".into(),
        })?;
        out.push(triple);
    }
    Ok((m, out))
}

pub fn read_points<R: BufRead>(r: R) -> Result<(PrimeModulus, Vec<Point3>)> {
    let (m, rows) = read_triples(r)?;
    Ok((m, rows.into_iter().map(Point3::from_coords).collect()))
}

pub fn read_planes<R: BufRead>(r: R) -> Result<(PrimeModulus, Vec<Plane>)> {
    let (m, rows) = read_triples(r)?;
    Ok((
        m,
        rows.into_iter()
            .map(|[n1, n2, c]| Plane::new(n1, n2, c))
            .collect(),
    ))
}
