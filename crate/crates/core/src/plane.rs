//! Algebraic distances in F_p^2: distance sets, pinned distance sets, the
//! isosceles-triple count `N`, pin selection, bisectors and isotropic lines.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_rational::Ratio;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{imaginary_unit, PrimeModulus, Residue, SquareTable};

/// Moduli up to this bound use dense per-pin histograms and square tables.
pub const DENSE_HISTOGRAM_LIMIT: u64 = 1 << 20;

/// Default cap on `|E|` for the cubic brute-force isosceles count.
pub const DEFAULT_BRUTEFORCE_CAP: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point2 {
    pub x: Residue,
    pub y: Residue,
}

impl Point2 {
    pub fn new(x: Residue, y: Residue) -> Self {
        Point2 { x, y }
    }
}

impl std::fmt::Display for Point2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// A deduplicated finite subset of F_p^2, kept in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet2 {
    points: Vec<Point2>,
    modulus: PrimeModulus,
}

impl PointSet2 {
    pub fn new(points: impl IntoIterator<Item = Point2>, modulus: PrimeModulus) -> Result<Self> {
        let mut points: Vec<Point2> = points.into_iter().collect();
        for pt in &points {
            modulus.canonical(pt.x.value())?;
            modulus.canonical(pt.y.value())?;
        }
        points.sort_unstable();
        points.dedup();
        Ok(PointSet2 { points, modulus })
    }

    pub fn from_coords(
        coords: impl IntoIterator<Item = (u64, u64)>,
        modulus: PrimeModulus,
    ) -> Result<Self> {
        let points = coords
            .into_iter()
            .map(|(x, y)| Ok(Point2::new(modulus.canonical(x)?, modulus.canonical(y)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(points, modulus)
    }

    /// `A x A` for a set of residues `A` (duplicates in `a` are ignored).
    pub fn cartesian(a: &[Residue], modulus: PrimeModulus) -> Self {
        let mut a = a.to_vec();
        a.sort_unstable();
        a.dedup();
        let points = a
            .iter()
            .flat_map(|&x| a.iter().map(move |&y| Point2::new(x, y)))
            .collect();
        PointSet2 { points, modulus }
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn contains(&self, u: &Point2) -> bool {
        self.points.binary_search(u).is_ok()
    }

    /// A copy of this set with `u` added.
    pub fn with_point(&self, u: Point2) -> Result<Self> {
        Self::new(self.points.iter().copied().chain(Some(u)), self.modulus)
    }

    fn non_empty(&self) -> Result<()> {
        if self.points.is_empty() {
            Err(Error::EmptySet)
        } else {
            Ok(())
        }
    }
}

/// `(u1 - v1)^2 + (u2 - v2)^2` in F_p.
pub fn algebraic_distance(u: Point2, v: Point2, m: PrimeModulus) -> Residue {
    let dx = m.sub(u.x, v.x);
    let dy = m.sub(u.y, v.y);
    m.add(m.square(dx), m.square(dy))
}

/// Distance evaluation with a square lookup table for small moduli.
struct DistanceKernel {
    m: PrimeModulus,
    squares: Option<SquareTable>,
}

impl DistanceKernel {
    fn new(m: PrimeModulus) -> Self {
        let squares = (m.p() <= DENSE_HISTOGRAM_LIMIT).then(|| SquareTable::new(m));
        DistanceKernel { m, squares }
    }

    #[inline]
    fn dist(&self, u: Point2, v: Point2) -> u64 {
        let p = self.m.p();
        let dx = self.m.sub(u.x, v.x).value();
        let dy = self.m.sub(u.y, v.y).value();
        let s = match &self.squares {
            Some(t) => t.get(dx) + t.get(dy),
            None => dx * dx % p + dy * dy % p,
        };
        if s >= p {
            s - p
        } else {
            s
        }
    }
}

/// Per-worker scratch space counting how often each distance occurs.
enum DistanceCounter {
    Dense { counts: Vec<u32>, touched: Vec<u32> },
    Sparse(HashMap<u64, u32>),
}

impl DistanceCounter {
    fn new(m: PrimeModulus) -> Self {
        if m.p() <= DENSE_HISTOGRAM_LIMIT {
            DistanceCounter::Dense {
                counts: vec![0; m.order()],
                touched: Vec::new(),
            }
        } else {
            DistanceCounter::Sparse(HashMap::new())
        }
    }

    /// Increments the count of `x` and returns the count before the increment.
    #[inline]
    fn bump(&mut self, x: u64) -> u32 {
        match self {
            DistanceCounter::Dense { counts, touched } => {
                let slot = &mut counts[x as usize];
                let prev = *slot;
                if prev == 0 {
                    touched.push(x as u32);
                }
                *slot = prev + 1;
                prev
            }
            DistanceCounter::Sparse(map) => {
                let slot = map.entry(x).or_insert(0);
                let prev = *slot;
                *slot += 1;
                prev
            }
        }
    }

    fn clear(&mut self) {
        match self {
            DistanceCounter::Dense { counts, touched } => {
                for &x in touched.iter() {
                    counts[x as usize] = 0;
                }
                touched.clear();
            }
            DistanceCounter::Sparse(map) => map.clear(),
        }
    }
}

/// Statistics of the distance histogram at one pin `u`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PinProfile {
    /// `sum_x r_u(x)^2`, the number of pairs `(v, w)` with `|u-v| = |u-w|`.
    pub energy: u64,
    /// `|Delta_u(E)|`.
    pub support: usize,
}

fn profile_at(
    kernel: &DistanceKernel,
    counter: &mut DistanceCounter,
    points: &[Point2],
    u: Point2,
) -> PinProfile {
    let mut energy = 0u64;
    let mut support = 0usize;
    for &v in points {
        let prev = counter.bump(kernel.dist(u, v)) as u64;
        // (c + 1)^2 - c^2
        energy += 2 * prev + 1;
        support += (prev == 0) as usize;
    }
    counter.clear();
    PinProfile { energy, support }
}

/// Profiles of every pin `u` in `E`, in the set's lexicographic order.
///
/// Runs in `O(|E|^2)` time. The loop over pins is parallel; each entry depends
/// only on its own pin, so the output is identical for any thread count.
pub fn pin_profiles(e: &PointSet2) -> Result<Vec<PinProfile>> {
    e.non_empty()?;
    let kernel = DistanceKernel::new(e.modulus);
    let points = e.points();
    Ok(points
        .par_iter()
        .map_init(
            || DistanceCounter::new(e.modulus),
            |counter, &u| profile_at(&kernel, counter, points, u),
        )
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagonalPolicy {
    /// Include `u = v` pairs, so `0` is always a distance.
    Include,
    /// Only pairs of distinct points.
    Exclude,
}

/// `Delta(E)`, including the zero distance of each point to itself.
pub fn distance_set(e: &PointSet2) -> Result<BTreeSet<Residue>> {
    distance_set_with(e, DiagonalPolicy::Include)
}

pub fn distance_set_with(e: &PointSet2, diagonal: DiagonalPolicy) -> Result<BTreeSet<Residue>> {
    e.non_empty()?;
    let m = e.modulus;
    let kernel = DistanceKernel::new(m);
    let mut seen = BTreeSet::new();
    'outer: for (i, &u) in e.points.iter().enumerate() {
        for (j, &v) in e.points.iter().enumerate() {
            if diagonal == DiagonalPolicy::Exclude && i == j {
                continue;
            }
            seen.insert(kernel.dist(u, v));
            if seen.len() as u64 == m.p() {
                break 'outer;
            }
        }
    }
    Ok(seen.into_iter().map(|x| m.residue(x)).collect())
}

/// `Delta(A x A) = (A - A)^2 + (A - A)^2`, computed from the difference squares.
///
/// Costs `O(|A|^2 + |D|^2)` where `D` is the set of squared differences, which
/// is much cheaper than the pairwise route on `A x A`.
pub fn cartesian_distance_set(a: &[Residue], m: PrimeModulus) -> Result<BTreeSet<Residue>> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let diff_squares: BTreeSet<Residue> = a
        .iter()
        .flat_map(|&x| a.iter().map(move |&y| m.square(m.sub(x, y))))
        .collect();
    let mut sums = BTreeSet::new();
    for &s in &diff_squares {
        for &t in &diff_squares {
            sums.insert(m.add(s, t));
        }
        if sums.len() as u64 == m.p() {
            break;
        }
    }
    Ok(sums)
}

/// `Delta_u(E)`; `u` need not belong to `E`.
pub fn pinned_distance_set(e: &PointSet2, u: Point2) -> Result<BTreeSet<Residue>> {
    e.non_empty()?;
    Ok(e
        .points
        .iter()
        .map(|&v| algebraic_distance(u, v, e.modulus))
        .collect())
}

/// `x -> r_u(x) = #{v in E : |u - v| = x}` for a fixed pin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceHistogram {
    pin: Point2,
    counts: BTreeMap<Residue, u64>,
}

impl DistanceHistogram {
    pub fn pin(&self) -> Point2 {
        self.pin
    }

    pub fn count(&self, x: Residue) -> u64 {
        self.counts.get(&x).copied().unwrap_or(0)
    }

    /// Nonzero entries in increasing order of distance.
    pub fn iter(&self) -> impl Iterator<Item = (Residue, u64)> + '_ {
        self.counts.iter().map(|(&x, &c)| (x, c))
    }

    pub fn support(&self) -> BTreeSet<Residue> {
        self.counts.keys().copied().collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// `sum_x r_u(x)^2`.
    pub fn energy(&self) -> u64 {
        self.counts.values().map(|c| c * c).sum()
    }
}

pub fn distance_histogram(e: &PointSet2, u: Point2) -> Result<DistanceHistogram> {
    e.non_empty()?;
    let mut counts = BTreeMap::new();
    for &v in &e.points {
        *counts.entry(algebraic_distance(u, v, e.modulus)).or_insert(0) += 1;
    }
    Ok(DistanceHistogram { pin: u, counts })
}

/// Number of ordered triples `(u, v, w)` in `E^3` with `|u - v| = |u - w|`,
/// via `N = sum_u sum_x r_u(x)^2` in `O(|E|^2)`.
pub fn isosceles_count(e: &PointSet2) -> Result<u64> {
    Ok(pin_profiles(e)?.iter().map(|pr| pr.energy).sum())
}

/// Cubic enumeration of all ordered triples; refuses sets larger than `cap`.
pub fn isosceles_count_bruteforce(e: &PointSet2, cap: usize) -> Result<u64> {
    e.non_empty()?;
    Error::cap("brute-force isosceles count |E|", e.len() as u128, cap as u128)?;
    let m = e.modulus;
    let mut n = 0u64;
    for &u in &e.points {
        for &v in &e.points {
            let duv = algebraic_distance(u, v, m);
            for &w in &e.points {
                if duv == algebraic_distance(u, w, m) {
                    n += 1;
                }
            }
        }
    }
    Ok(n)
}

/// The averaging witness: a pin whose energy is at most `N / |E|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GuaranteedPin {
    pub pin: Point2,
    pub pin_energy: u64,
    /// Isosceles count `N` of the whole set.
    pub n: u64,
    /// `|E|^3 / N` in lowest terms.
    pub bound: Ratio<u128>,
}

impl GuaranteedPin {
    pub fn bound_ceil(&self) -> u128 {
        self.bound.ceil().to_integer()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BestPin {
    pub pin: Point2,
    pub size: usize,
}

/// Everything derivable from one pass of [`pin_profiles`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PinSummary {
    pub n: u64,
    pub best: BestPin,
    pub guaranteed: GuaranteedPin,
}

pub fn pin_summary(e: &PointSet2) -> Result<PinSummary> {
    let profiles = pin_profiles(e)?;
    Ok(summarize(e, &profiles))
}

fn summarize(e: &PointSet2, profiles: &[PinProfile]) -> PinSummary {
    let n: u64 = profiles.iter().map(|pr| pr.energy).sum();
    // points are sorted, so the first extremum is the lexicographic tie-break
    let mut best = 0;
    let mut witness = 0;
    for (i, pr) in profiles.iter().enumerate() {
        if pr.support > profiles[best].support {
            best = i;
        }
        if pr.energy < profiles[witness].energy {
            witness = i;
        }
    }
    let size = e.len() as u128;
    PinSummary {
        n,
        best: BestPin {
            pin: e.points[best],
            size: profiles[best].support,
        },
        guaranteed: GuaranteedPin {
            pin: e.points[witness],
            pin_energy: profiles[witness].energy,
            n,
            bound: Ratio::new(size * size * size, n as u128),
        },
    }
}

/// A pin `u in E` minimizing `sum_x r_u(x)^2`, with the bound `|E|^3 / N`.
///
/// Since the minimum is at most the average `N / |E|`, Cauchy–Schwarz gives
/// `|Delta_u(E)| >= |E|^2 / energy(u) >= |E|^3 / N` for the returned pin.
pub fn guaranteed_pin(e: &PointSet2) -> Result<GuaranteedPin> {
    Ok(pin_summary(e)?.guaranteed)
}

/// A pin `u in E` maximizing `|Delta_u(E)|`, ties broken lexicographically.
pub fn best_pin(e: &PointSet2) -> Result<BestPin> {
    Ok(pin_summary(e)?.best)
}

/// The line `{u : a*u1 + b*u2 = c}`, scaled so the first nonzero of `(a, b)` is 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Line2 {
    a: Residue,
    b: Residue,
    c: Residue,
}

impl Line2 {
    pub fn new(a: Residue, b: Residue, c: Residue, m: PrimeModulus) -> Result<Self> {
        let lead = if !a.is_zero() {
            a
        } else if !b.is_zero() {
            b
        } else {
            return Err(Error::DegenerateLine);
        };
        let s = m.inv(lead).expect("nonzero");
        Ok(Line2 {
            a: m.mul(a, s),
            b: m.mul(b, s),
            c: m.mul(c, s),
        })
    }

    pub fn coefficients(&self) -> (Residue, Residue, Residue) {
        (self.a, self.b, self.c)
    }

    pub fn contains(&self, u: Point2, m: PrimeModulus) -> bool {
        m.add(m.mul(self.a, u.x), m.mul(self.b, u.y)) == self.c
    }

    /// All `p` points of the line, in increasing order of the free coordinate.
    pub fn points(&self, m: PrimeModulus) -> Vec<Point2> {
        if self.b.is_zero() {
            // a = 1 after normalization
            m.elements().map(|y| Point2::new(self.c, y)).collect()
        } else {
            let b_inv = m.inv(self.b).expect("nonzero");
            m.elements()
                .map(|x| Point2::new(x, m.mul(m.sub(self.c, m.mul(self.a, x)), b_inv)))
                .collect()
        }
    }
}

/// The locus `{u : |u - v| = |u - w|}`, i.e. `2 u . (w - v) = |w|^2 - |v|^2`.
pub fn bisector_line(v: Point2, w: Point2, m: PrimeModulus) -> Result<Line2> {
    if v == w {
        return Err(Error::CoincidentPoints);
    }
    let a = m.double(m.sub(w.x, v.x));
    let b = m.double(m.sub(w.y, v.y));
    let norm = |q: Point2| m.add(m.square(q.x), m.square(q.y));
    Line2::new(a, b, m.sub(norm(w), norm(v)), m)
}

/// The lines through the origin with direction `(1, i)` and `(1, -i)` where
/// `i^2 = -1`; empty when `p = 3 mod 4`.
///
/// An isotropic direction is orthogonal to itself, so the line with direction
/// `(1, r)` has normalized equation `x + r*y = 0`.
pub fn isotropic_lines_through_origin(m: PrimeModulus) -> Vec<Line2> {
    match imaginary_unit(m) {
        None => Vec::new(),
        Some(i) => [i, m.neg(i)]
            .into_iter()
            .map(|r| Line2::new(m.residue(1), r, Residue::ZERO, m).expect("a = 1"))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::is_prime;
    use proptest::prelude::*;

    fn m(p: u64) -> PrimeModulus {
        PrimeModulus::new(p).unwrap()
    }

    fn pt(md: PrimeModulus, x: u64, y: u64) -> Point2 {
        Point2::new(md.residue(x), md.residue(y))
    }

    fn res(md: PrimeModulus, xs: &[u64]) -> Vec<Residue> {
        xs.iter().map(|&x| md.residue(x)).collect()
    }

    fn square01(md: PrimeModulus) -> PointSet2 {
        PointSet2::cartesian(&res(md, &[0, 1]), md)
    }

    fn set_of(md: PrimeModulus, xs: &[u64]) -> BTreeSet<Residue> {
        xs.iter().map(|&x| md.residue(x)).collect()
    }

    #[test]
    fn distance_examples() {
        let m5 = m(5);
        let m7 = m(7);
        assert_eq!(algebraic_distance(pt(m7, 3, 3), pt(m7, 3, 3), m7).value(), 0);
        assert_eq!(algebraic_distance(pt(m5, 0, 0), pt(m5, 1, 2), m5).value(), 0);
        assert_eq!(algebraic_distance(pt(m7, 1, 2), pt(m7, 4, 6), m7).value(), 4);
    }

    #[test]
    fn point_set_rejects_unreduced_coordinates() {
        assert!(PointSet2::from_coords([(0, 5)], m(5)).is_err());
        let e = PointSet2::from_coords([(1, 1), (0, 2), (1, 1)], m(5)).unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e.points()[0], pt(m(5), 0, 2));
    }

    #[test]
    fn empty_set_is_rejected() {
        let e = PointSet2::new([], m(5)).unwrap();
        assert!(matches!(distance_set(&e), Err(Error::EmptySet)));
        assert!(matches!(isosceles_count(&e), Err(Error::EmptySet)));
        assert!(matches!(
            pinned_distance_set(&e, pt(m(5), 0, 0)),
            Err(Error::EmptySet)
        ));
        assert!(matches!(guaranteed_pin(&e), Err(Error::EmptySet)));
        assert!(matches!(best_pin(&e), Err(Error::EmptySet)));
    }

    #[test]
    fn distance_set_examples() {
        let m3 = m(3);
        let single = PointSet2::from_coords([(2, 1)], m3).unwrap();
        assert_eq!(distance_set(&single).unwrap(), set_of(m3, &[0]));
        assert_eq!(distance_set(&square01(m3)).unwrap(), set_of(m3, &[0, 1, 2]));
        assert!(distance_set_with(&single, DiagonalPolicy::Exclude)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn cartesian_route_matches_pairwise() {
        for p in [3, 5, 7, 11, 13] {
            let md = m(p);
            for a in [vec![0], vec![0, 1], vec![1, 3, 4], vec![0, 2, 5, 6]] {
                let a: Vec<_> = res(md, &a);
                let e = PointSet2::cartesian(&a, md);
                assert_eq!(
                    cartesian_distance_set(&a, md).unwrap(),
                    distance_set(&e).unwrap()
                );
            }
        }
    }

    #[test]
    fn isotropic_subset_has_only_zero_distance() {
        let m13 = m(13);
        let line = isotropic_lines_through_origin(m13)[0];
        let e = PointSet2::new(line.points(m13).into_iter().take(5), m13).unwrap();
        assert_eq!(distance_set(&e).unwrap(), set_of(m13, &[0]));
        assert_eq!(isosceles_count(&e).unwrap(), 125);
    }

    #[test]
    fn pinned_and_histogram_examples() {
        let m3 = m(3);
        let e = square01(m3);
        let u = pt(m3, 0, 0);
        assert_eq!(pinned_distance_set(&e, u).unwrap(), set_of(m3, &[0, 1, 2]));
        let h = distance_histogram(&e, u).unwrap();
        let entries: Vec<_> = h.iter().map(|(x, c)| (x.value(), c)).collect();
        assert_eq!(entries, vec![(0, 1), (1, 2), (2, 1)]);
        assert_eq!(h.total(), 4);
        assert_eq!(h.support(), pinned_distance_set(&e, u).unwrap());

        let single = PointSet2::new([u], m3).unwrap();
        let h1 = distance_histogram(&single, u).unwrap();
        assert_eq!(h1.count(Residue::ZERO), 1);
        assert_eq!(h1.total(), 1);
    }

    #[test]
    fn isosceles_examples() {
        let m3 = m(3);
        let single = PointSet2::from_coords([(1, 1)], m3).unwrap();
        assert_eq!(isosceles_count(&single).unwrap(), 1);
        assert_eq!(isosceles_count_bruteforce(&single, 200).unwrap(), 1);
        let e = square01(m3);
        assert_eq!(isosceles_count(&e).unwrap(), 24);
        assert_eq!(isosceles_count_bruteforce(&e, 200).unwrap(), 24);
    }

    #[test]
    fn bruteforce_refuses_over_cap() {
        let md = m(5);
        let e = PointSet2::cartesian(&res(md, &[0, 1, 2]), md);
        assert!(matches!(
            isosceles_count_bruteforce(&e, 8),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn histogram_identity_exhaustive_small_sets() {
        // every E in F_p^2 with |E| <= 3, plus all 4- and 5-subsets for p = 3
        for p in [3u64, 5, 7] {
            let md = m(p);
            let all: Vec<Point2> = md
                .elements()
                .flat_map(|x| md.elements().map(move |y| Point2::new(x, y)))
                .collect();
            let max = if p == 3 { 5 } else { 3 };
            for k in 1..=max {
                for combo in itertools::Itertools::combinations(all.iter().copied(), k) {
                    let e = PointSet2::new(combo, md).unwrap();
                    assert_eq!(
                        isosceles_count(&e).unwrap(),
                        isosceles_count_bruteforce(&e, 200).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn guaranteed_pin_examples() {
        let m3 = m(3);
        let single = PointSet2::from_coords([(2, 0)], m3).unwrap();
        let g = guaranteed_pin(&single).unwrap();
        assert_eq!(g.pin, pt(m3, 2, 0));
        assert_eq!(g.bound, Ratio::from_integer(1));

        let e = square01(m3);
        let g = guaranteed_pin(&e).unwrap();
        assert_eq!(g.bound, Ratio::new(8, 3));
        assert_eq!(g.bound_ceil(), 3);
        // all pins tie, so the lexicographically first wins
        assert_eq!(g.pin, pt(m3, 0, 0));
        for &u in e.points() {
            assert_eq!(pinned_distance_set(&e, u).unwrap().len(), 3);
        }
    }

    #[test]
    fn best_pin_examples() {
        let m3 = m(3);
        let single = PointSet2::from_coords([(2, 0)], m3).unwrap();
        assert_eq!(best_pin(&single).unwrap().size, 1);
        let b = best_pin(&square01(m3)).unwrap();
        assert_eq!(b.size, 3);
        assert_eq!(b.pin, pt(m3, 0, 0));
    }

    #[test]
    fn large_modulus_uses_sparse_path() {
        let md = m(2_147_483_647);
        let e = PointSet2::cartesian(&res(md, &[0, 1, 5, 1 << 30]), md);
        assert_eq!(
            isosceles_count(&e).unwrap(),
            isosceles_count_bruteforce(&e, 200).unwrap()
        );
        let s = pin_summary(&e).unwrap();
        assert_eq!(
            s.best.size,
            pinned_distance_set(&e, s.best.pin).unwrap().len()
        );
    }

    #[test]
    fn bisector_example() {
        let m5 = m(5);
        let l = bisector_line(pt(m5, 0, 0), pt(m5, 2, 0), m5).unwrap();
        assert_eq!(l.coefficients(), (m5.residue(1), m5.residue(0), m5.residue(1)));
        assert!(matches!(
            bisector_line(pt(m5, 1, 1), pt(m5, 1, 1), m5),
            Err(Error::CoincidentPoints)
        ));
    }

    #[test]
    fn bisector_membership_iff_equal_distances() {
        for p in (3..=13).filter(|&q| is_prime(q)) {
            let md = m(p);
            let pairs = [((0, 0), (1, 0)), ((1, 2), (3, 1)), ((0, 1), (2, 2 % p)), ((2, 2), (0, 0))];
            for ((a, b), (c, d)) in pairs {
                let v = pt(md, a, b);
                let w = pt(md, c, d);
                if v == w {
                    continue;
                }
                let l = bisector_line(v, w, md).unwrap();
                assert_eq!(l, bisector_line(w, v, md).unwrap());
                for x in md.elements() {
                    for y in md.elements() {
                        let u = Point2::new(x, y);
                        assert_eq!(
                            l.contains(u, md),
                            algebraic_distance(u, v, md) == algebraic_distance(u, w, md)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn isotropic_line_examples() {
        assert!(isotropic_lines_through_origin(m(7)).is_empty());
        let m5 = m(5);
        let lines = isotropic_lines_through_origin(m5);
        assert_eq!(lines.len(), 2);
        assert!(lines[0].contains(pt(m5, 1, 2), m5));
        assert!(lines[1].contains(pt(m5, 1, 3), m5));
        for p in [5u64, 13, 17, 29] {
            let md = m(p);
            for line in isotropic_lines_through_origin(md) {
                let pts = line.points(md);
                assert_eq!(pts.len() as u64, p);
                assert!(pts.iter().all(|&q| line.contains(q, md)));
                for &u in &pts {
                    for &v in &pts {
                        assert!(algebraic_distance(u, v, md).is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn rotations_preserve_distance_exhaustively() {
        for p in [3u64, 5, 7, 11, 13] {
            let md = m(p);
            let rotations: Vec<(Residue, Residue)> = md
                .elements()
                .flat_map(|c| md.elements().map(move |s| (c, s)))
                .filter(|&(c, s)| md.add(md.square(c), md.square(s)).value() == 1)
                .collect();
            let plane: Vec<Point2> = md
                .elements()
                .flat_map(|x| md.elements().map(move |y| Point2::new(x, y)))
                .collect();
            let rotate = |(c, s): (Residue, Residue), q: Point2| {
                Point2::new(
                    md.sub(md.mul(c, q.x), md.mul(s, q.y)),
                    md.add(md.mul(s, q.x), md.mul(c, q.y)),
                )
            };
            for &r in &rotations {
                for &u in &plane {
                    // a fixed second point keeps this quadratic in p^2
                    for v in [plane[1], plane[plane.len() / 2], plane[plane.len() - 1]] {
                        assert_eq!(
                            algebraic_distance(rotate(r, u), rotate(r, v), md),
                            algebraic_distance(u, v, md)
                        );
                    }
                }
            }
        }
    }

    fn arb_set() -> impl Strategy<Value = PointSet2> {
        prop::sample::select(vec![3u64, 5, 7, 11, 13, 101, 1009]).prop_flat_map(|p| {
            prop::collection::vec((0..p, 0..p), 1..40)
                .prop_map(move |coords| PointSet2::from_coords(coords, m(p)).unwrap())
        })
    }

    proptest! {
        #[test]
        fn distance_symmetric_and_translation_invariant(
            p in prop::sample::select(vec![3u64, 5, 7, 101, 65_537, 2_147_483_647]),
            c in prop::array::uniform6(any::<u64>()),
        ) {
            let md = m(p);
            let u = pt(md, c[0], c[1]);
            let v = pt(md, c[2], c[3]);
            let t = pt(md, c[4], c[5]);
            let shift = |q: Point2| Point2::new(md.add(q.x, t.x), md.add(q.y, t.y));
            prop_assert_eq!(algebraic_distance(u, v, md), algebraic_distance(v, u, md));
            prop_assert_eq!(algebraic_distance(shift(u), shift(v), md), algebraic_distance(u, v, md));
        }

        #[test]
        fn histogram_partitions_and_supports(e in arb_set()) {
            let u = e.points()[0];
            let h = distance_histogram(&e, u).unwrap();
            prop_assert_eq!(h.total() as usize, e.len());
            prop_assert_eq!(h.support(), pinned_distance_set(&e, u).unwrap());
            prop_assert!(pinned_distance_set(&e, u).unwrap().is_subset(&distance_set(&e).unwrap()));
        }

        #[test]
        fn count_identity_and_averaging(e in arb_set()) {
            let n = isosceles_count(&e).unwrap();
            prop_assert_eq!(n, isosceles_count_bruteforce(&e, 200).unwrap());
            let size = e.len() as u64;
            prop_assert!(n >= size * size);
            let s = pin_summary(&e).unwrap();
            let witness = pinned_distance_set(&e, s.guaranteed.pin).unwrap().len() as u128;
            prop_assert!(witness * n as u128 >= (size as u128).pow(3));
            prop_assert!(s.best.size as u128 >= s.guaranteed.bound_ceil());
            prop_assert_eq!(s.best.size, pinned_distance_set(&e, s.best.pin).unwrap().len());
            let max = e.points().iter().map(|&u| pinned_distance_set(&e, u).unwrap().len()).max().unwrap();
            prop_assert_eq!(s.best.size, max);
        }
    }
}
