//! Dihedral symmetry and self-intersections of the two-term curves.

use std::collections::{BTreeSet, HashMap};

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::curve::{frac, turn_cos_sin, validate_frequencies, CurveSpec, PlanePoint, TwoTermSpec};
use crate::error::{Error, Result};

/// Deviations below this count as an exact symmetry.
pub const SYMMETRY_TOL: f64 = 1e-9;
/// Refined intersections must meet within this multiple of the curve scale.
pub const INTERSECTION_REL_TOL: f64 = 1e-9;
/// Default pre-refinement proximity, relative to the curve scale.
pub const DEFAULT_CANDIDATE_REL_TOL: f64 = 1e-6;
/// Default parameter grid for [`self_intersections`].
pub const DEFAULT_INTERSECTION_GRID: usize = 4096;
/// Tolerance for a parameter to sit on the rational grid `j/(b²−a²)`.
pub const GRID_TOL: f64 = 1e-9;

const NEWTON_MAX_ITER: usize = 40;
const PARAM_DEDUP: f64 = 1e-7;

/// Outcome of checking the rotation and reflection identities of `γ_{a,b}^s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryReport {
    /// `b − a`; the claimed group is the dihedral group of order `2(b − a)`.
    pub claimed_order: i64,
    pub rotation_deviation: f64,
    pub reflection_deviation: f64,
    pub coprime: bool,
    /// `s = ±1`: the graph is a circle and has more symmetry than claimed.
    pub degenerate: bool,
    pub verified: bool,
}

/// Samples `γ(t + 1/(b−a)) = R·γ(t)` with `R` the rotation by `2πa/(b−a)`, and
/// `γ(1 − t) = conj γ(t)`, on `n` uniform parameters.
pub fn verify_symmetry(spec: &TwoTermSpec, n: usize) -> Result<SymmetryReport> {
    if n < 100 {
        return Err(Error::InvalidParameter(format!(
            "symmetry check needs at least 100 samples, got {n}"
        )));
    }
    let (a, b) = (spec.a(), spec.b());
    let order = b - a;
    let curve = spec.curve();
    let (c, s) = turn_cos_sin(a as f64 / order as f64);
    let rotate = |p: PlanePoint| PlanePoint::new(c * p.x - s * p.y, s * p.x + c * p.y);
    let shift = 1.0 / order as f64;

    let mut rotation_deviation: f64 = 0.0;
    let mut reflection_deviation: f64 = 0.0;
    for j in 0..n {
        let t = j as f64 / n as f64;
        let p = curve.evaluate(t);
        rotation_deviation = rotation_deviation.max(curve.evaluate(t + shift).distance(rotate(p)));
        reflection_deviation =
            reflection_deviation.max(curve.evaluate(1.0 - t).distance(p.mirror_x()));
    }
    let coprime = a.gcd(&b) == 1;
    Ok(SymmetryReport {
        claimed_order: order,
        rotation_deviation,
        reflection_deviation,
        coprime,
        degenerate: spec.s().abs() == 1.0,
        verified: coprime
            && rotation_deviation < SYMMETRY_TOL
            && reflection_deviation < SYMMETRY_TOL,
    })
}

/// A double point `γ(t1) = γ(t2)` with `t1 < t2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntersectionRecord {
    pub t1: f64,
    pub t2: f64,
    pub point: PlanePoint,
    pub on_rational_grid: bool,
    pub grid_index_pair: Option<(i64, i64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntersectionSearch {
    /// Deduplicated records sorted by `t1`.
    pub records: Vec<IntersectionRecord>,
    /// Segment pairs examined after spatial hashing.
    pub candidates: usize,
    /// Candidates whose refinement failed or collapsed onto a single parameter.
    pub dropped: usize,
}

fn circular_gap(u: f64, v: f64) -> f64 {
    let d = frac(u - v);
    d.min(1.0 - d)
}

/// Parameters `(u, v)` on segments `p0→p1` and `q0→q1` of their closest approach.
fn closest_on_segments(
    p0: PlanePoint,
    p1: PlanePoint,
    q0: PlanePoint,
    q1: PlanePoint,
) -> (f64, f64, f64) {
    let r = p1 - p0;
    let d = q1 - q0;
    let w = q0 - p0;
    let den = r.cross(d);
    if den != 0.0 {
        let u = w.cross(d) / den;
        let v = w.cross(r) / den;
        if (0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v) {
            return (u, v, 0.0);
        }
    }
    // no proper crossing: the closest approach involves an endpoint
    let project = |x: PlanePoint, a: PlanePoint, dir: PlanePoint| {
        let len2 = dir.dot(dir);
        if len2 == 0.0 {
            0.0
        } else {
            ((x - a).dot(dir) / len2).clamp(0.0, 1.0)
        }
    };
    let options = [
        (0.0, project(p0, q0, d)),
        (1.0, project(p1, q0, d)),
        (project(q0, p0, r), 0.0),
        (project(q1, p0, r), 1.0),
    ];
    options
        .into_iter()
        .map(|(u, v)| (u, v, (p0 + r * u).distance(q0 + d * v)))
        .min_by(|x, y| x.2.total_cmp(&y.2))
        .expect("four options")
}

/// Newton on `γ(t1) − γ(t2) = 0`.
fn refine_pair(curve: &CurveSpec, mut t1: f64, mut t2: f64) -> Option<(f64, f64)> {
    let tol = INTERSECTION_REL_TOL * curve.scale();
    for _ in 0..NEWTON_MAX_ITER {
        let f = curve.evaluate(t1) - curve.evaluate(t2);
        if f.norm() <= 1e-3 * tol {
            break;
        }
        let j1 = curve.derivative(t1, 1);
        let j2 = -curve.derivative(t2, 1);
        let det = j1.cross(j2);
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        t1 -= (f.x * j2.y - j2.x * f.y) / det;
        t2 -= (j1.x * f.y - f.x * j1.y) / det;
        if !(t1.is_finite() && t2.is_finite()) {
            return None;
        }
    }
    let residual = curve.evaluate(t1).distance(curve.evaluate(t2));
    (residual < tol).then_some((frac(t1), frac(t2)))
}

/// All double points of `curve`.
///
/// The closed polyline through `γ(j/t_grid)` is hashed segment by segment into
/// square cells as wide as the longest segment; segment pairs sharing a cell
/// that cross, or pass within `tol`, seed a Newton refinement of
/// `γ(t1) = γ(t2)`. Accepted pairs meet within `1e−9` of the curve scale and
/// lie more than one grid step apart in parameter.
pub fn self_intersections(
    curve: &CurveSpec,
    t_grid: usize,
    tol: f64,
) -> Result<IntersectionSearch> {
    if t_grid < 256 {
        return Err(Error::InvalidParameter(format!(
            "intersection grid needs at least 256 samples, got {t_grid}"
        )));
    }
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "bad proximity tolerance {tol}"
        )));
    }
    let n = t_grid;
    let points: Vec<PlanePoint> = (0..n)
        .map(|j| curve.evaluate(j as f64 / n as f64))
        .collect();
    let seg = |i: usize| (points[i], points[(i + 1) % n]);
    let cell = (0..n)
        .map(|i| {
            let (p, q) = seg(i);
            p.distance(q)
        })
        .fold(2.0 * tol, f64::max)
        .max(f64::MIN_POSITIVE);

    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for i in 0..n {
        let (p, q) = seg(i);
        let x0 = ((p.x.min(q.x) - tol) / cell).floor() as i64;
        let x1 = ((p.x.max(q.x) + tol) / cell).floor() as i64;
        let y0 = ((p.y.min(q.y) - tol) / cell).floor() as i64;
        let y1 = ((p.y.max(q.y) + tol) / cell).floor() as i64;
        for cx in x0..=x1 {
            for cy in y0..=y1 {
                grid.entry((cx, cy)).or_default().push(i);
            }
        }
    }
    let mut pairs = BTreeSet::new();
    for members in grid.values() {
        for (k, &i) in members.iter().enumerate() {
            for &j in &members[k + 1..] {
                let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                let gap = (hi - lo).min(n + lo - hi);
                if gap >= 2 {
                    pairs.insert((lo, hi));
                }
            }
        }
    }
    let pairs: Vec<(usize, usize)> = pairs.into_iter().collect();

    let seeds: Vec<Option<(f64, f64)>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (p0, p1) = seg(i);
            let (q0, q1) = seg(j);
            let (u, v, dist) = closest_on_segments(p0, p1, q0, q1);
            (dist <= tol).then(|| ((i as f64 + u) / n as f64, (j as f64 + v) / n as f64))
        })
        .collect();
    let seeds: Vec<(f64, f64)> = seeds.into_iter().flatten().collect();
    let refined: Vec<Option<(f64, f64)>> = seeds
        .par_iter()
        .map(|&(t1, t2)| refine_pair(curve, t1, t2))
        .collect();

    let min_gap = 1.0 / n as f64;
    let mut search = IntersectionSearch {
        candidates: seeds.len(),
        ..IntersectionSearch::default()
    };
    let mut found: Vec<(f64, f64)> = Vec::new();
    for r in refined {
        match r {
            Some((u, v)) if circular_gap(u, v) > min_gap => {
                let (t1, t2) = if u < v { (u, v) } else { (v, u) };
                let duplicate = found.iter().any(|&(a, b)| {
                    circular_gap(a, t1) < PARAM_DEDUP && circular_gap(b, t2) < PARAM_DEDUP
                });
                if !duplicate {
                    found.push((t1, t2));
                }
            }
            _ => search.dropped += 1,
        }
    }
    found.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    search.records = found
        .into_iter()
        .map(|(t1, t2)| IntersectionRecord {
            t1,
            t2,
            point: curve.evaluate(t1),
            on_rational_grid: false,
            grid_index_pair: None,
        })
        .collect();
    Ok(search)
}

/// Flags records whose parameters both sit on `j/denominator`.
pub fn mark_rational_grid(records: &mut [IntersectionRecord], denominator: i64) {
    let den = denominator as f64;
    let index = |t: f64| {
        let j = (t * den).round();
        ((t - j / den).abs() < GRID_TOL).then_some(j as i64 % denominator)
    };
    for r in records {
        match (index(r.t1), index(r.t2)) {
            (Some(j1), Some(j2)) => {
                r.on_rational_grid = true;
                r.grid_index_pair = Some((j1.min(j2), j1.max(j2)));
            }
            _ => {
                r.on_rational_grid = false;
                r.grid_index_pair = None;
            }
        }
    }
}

/// [`self_intersections`] for a two-term curve; at `s = 0` records are checked
/// against the grid `j/(b²−a²)`.
pub fn two_term_intersections(
    spec: &TwoTermSpec,
    t_grid: usize,
    tol: f64,
) -> Result<IntersectionSearch> {
    let mut search = self_intersections(&spec.curve(), t_grid, tol)?;
    if spec.s() == 0.0 {
        let den = spec.b() * spec.b() - spec.a() * spec.a();
        mark_rational_grid(&mut search.records, den);
    }
    Ok(search)
}

/// Index pairs `j < j′` in `0..b²−a²` with `γ(j/(b²−a²)) = γ(j′/(b²−a²))` at `s = 0`,
/// by comparing every pair.
pub fn brute_force_grid_pairs(a: i64, b: i64) -> Result<Vec<(i64, i64)>> {
    validate_frequencies(a, b)?;
    let den = b * b - a * a;
    let curve = TwoTermSpec::new(a, b, 0.0)?.curve();
    let tol = INTERSECTION_REL_TOL * curve.scale();
    let pts: Vec<PlanePoint> = (0..den)
        .map(|j| curve.evaluate(j as f64 / den as f64))
        .collect();
    let mut pairs = Vec::new();
    for j in 0..den {
        for k in j + 1..den {
            if pts[j as usize].distance(pts[k as usize]) < tol {
                pairs.push((j, k));
            }
        }
    }
    Ok(pairs)
}

/// At `s = 0`, every numerically found double point lies on the grid `j/(b²−a²)`
/// and every grid pair that meets is found.
pub fn grid_intersection_check(a: i64, b: i64) -> Result<bool> {
    validate_frequencies(a, b)?;
    if a.gcd(&b) != 1 {
        return Err(Error::InvalidParameter(format!(
            "grid check needs coprime frequencies, got a = {a}, b = {b}"
        )));
    }
    let spec = TwoTermSpec::new(a, b, 0.0)?;
    let tol = DEFAULT_CANDIDATE_REL_TOL * spec.curve().scale();
    let search = two_term_intersections(&spec, DEFAULT_INTERSECTION_GRID, tol)?;
    if search.records.iter().any(|r| !r.on_rational_grid) {
        return Ok(false);
    }
    let numeric: BTreeSet<(i64, i64)> = search
        .records
        .iter()
        .filter_map(|r| r.grid_index_pair)
        .collect();
    let oracle: BTreeSet<(i64, i64)> = brute_force_grid_pairs(a, b)?.into_iter().collect();
    Ok(numeric == oracle && numeric.len() == search.records.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two(a: i64, b: i64, s: f64) -> TwoTermSpec {
        TwoTermSpec::new(a, b, s).unwrap()
    }

    #[test]
    fn symmetry_examples() {
        let r = verify_symmetry(&two(1, 3, 0.4), 1000).unwrap();
        assert!(r.verified);
        assert_eq!(r.claimed_order, 2);
        for s in [-0.9, 0.0, 0.9] {
            let r = verify_symmetry(&two(1, 3, s), 1000).unwrap();
            assert!(r.rotation_deviation < 1e-12, "{r:?}");
        }
        let r = verify_symmetry(&two(2, 4, 0.5), 1000).unwrap();
        assert!(!r.coprime);
        assert!(!r.verified);
        assert!(verify_symmetry(&two(1, 3, 0.0), 10).is_err());
    }

    #[test]
    fn symmetry_at_endpoints_is_flagged() {
        let r = verify_symmetry(&two(2, 5, 1.0), 500).unwrap();
        assert!(r.degenerate);
        assert!(r.verified);
    }

    #[test]
    fn wrong_rotation_is_detected() {
        // a genuine three-term curve has no D_2 symmetry of the two-term kind
        let curve = CurveSpec::exponential_sum(&[1, 3, 4]).unwrap();
        let shift = 0.5;
        let (c, s) = turn_cos_sin(0.5);
        let dev = (0..200)
            .map(|j| {
                let t = j as f64 / 200.0;
                let p = curve.evaluate(t);
                curve
                    .evaluate(t + shift)
                    .distance(PlanePoint::new(c * p.x - s * p.y, s * p.x + c * p.y))
            })
            .fold(0.0, f64::max);
        assert!(dev > 0.1);
    }

    #[test]
    fn one_three_intersections_at_zero_weight() {
        let spec = two(1, 3, 0.0);
        let search = two_term_intersections(&spec, 4096, 2e-6).unwrap();
        let origin = search
            .records
            .iter()
            .find(|r| (r.t1 - 0.25).abs() < 1e-9 && (r.t2 - 0.75).abs() < 1e-9)
            .expect("the origin is a double point");
        assert!(origin.point.norm() < 1e-12);
        for r in &search.records {
            assert!(r.on_rational_grid, "{r:?}");
            let (j1, j2) = r.grid_index_pair.unwrap();
            assert!((r.t1 * 8.0 - j1 as f64).abs() < 1e-8);
            assert!((r.t2 * 8.0 - j2 as f64).abs() < 1e-8);
        }
        assert_eq!(search.records.len(), 3);
    }

    #[test]
    fn loop_birth_double_point() {
        let window =
            |r: &IntersectionRecord| (0.22..=0.28).contains(&r.t1) && (0.22..=0.28).contains(&r.t2);
        let before = two_term_intersections(&two(1, 3, -0.505), 4096, 2e-6).unwrap();
        assert_eq!(before.records.iter().filter(|r| window(r)).count(), 0);
        let after = two_term_intersections(&two(1, 3, -0.495), 4096, 2e-6).unwrap();
        assert_eq!(after.records.iter().filter(|r| window(r)).count(), 1);
        assert!(after.records.iter().all(|r| !r.on_rational_grid));
    }

    #[test]
    fn grid_check_examples() {
        assert!(grid_intersection_check(1, 3).unwrap());
        assert!(grid_intersection_check(1, 2).unwrap());
        assert!(grid_intersection_check(2, 3).unwrap());
        assert!(grid_intersection_check(2, 4).is_err());
    }

    #[test]
    fn brute_force_oracle_small_cases() {
        assert_eq!(brute_force_grid_pairs(1, 2).unwrap(), vec![(1, 2)]);
        assert_eq!(brute_force_grid_pairs(1, 3).unwrap().len(), 3);
        assert!(brute_force_grid_pairs(1, 3).unwrap().contains(&(2, 6)));
    }

    #[test]
    fn closest_points_of_crossing_segments() {
        let (u, v, d) = closest_on_segments(
            PlanePoint::new(-1.0, 0.0),
            PlanePoint::new(1.0, 0.0),
            PlanePoint::new(0.0, -1.0),
            PlanePoint::new(0.0, 1.0),
        );
        assert_eq!((u, v, d), (0.5, 0.5, 0.0));
        let (_, _, d) = closest_on_segments(
            PlanePoint::new(0.0, 0.0),
            PlanePoint::new(1.0, 0.0),
            PlanePoint::new(0.0, 0.5),
            PlanePoint::new(1.0, 0.5),
        );
        assert_eq!(d, 0.5);
    }
}
