//! Singular points, cusp certification and the cusp locus of the two-term family.
//!
//! A parameter `t` is singular when `γ′(t) = 0`. A singular point is a cusp
//! when the one-sided unit tangents point in opposite directions. Both facts
//! are checked numerically with scale-aware tolerances: the velocity is
//! compared against `2π·Σ|wⱼ||aⱼ|`, the largest speed the curve can reach.
//!
//! The family `(1−s)·e^{2πiat} + (1+s)·e^{2πibt}` has its cusps at
//! `s̄ = (a−b)/(a+b)` and `t = h/(2(b−a))` for odd `h`. [`find_cusps`] finds
//! them without using that knowledge: it scans `|γ′|²` over the `(s, t)`
//! cylinder, refines local minima with Newton's method, and certifies the
//! survivors by the tangent flip.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::curve::{frac, validate_frequencies, CurveSpec, PlanePoint, TwoTermSpec};
use crate::error::{Error, Result};
use crate::{rational_to_f64, Rational};

/// `|γ′| ≤ SINGULAR_REL_TOL · 2πΣ|wⱼ||aⱼ|` declares a singular point.
pub const SINGULAR_REL_TOL: f64 = 1e-7;
/// Largest starting offset accepted by [`certify_cusp`].
pub const MAX_CERTIFY_DELTA: f64 = 1e-3;
/// Default starting offset for tangent-flip certification.
pub const DEFAULT_CERTIFY_DELTA: f64 = 1e-3;
/// A certificate needs every extrapolated tangent dot product at or below `−1 + FLIP_TOL`.
pub const FLIP_TOL: f64 = 1e-6;
/// Default `(s, t)` scan resolution of [`find_cusps`].
pub const DEFAULT_CUSP_GRID: usize = 256;
/// Smallest scan resolution accepted by [`find_cusps`].
pub const MIN_CUSP_GRID: usize = 64;
/// Points of the loop-birth window.
pub const LOOP_WINDOW_SAMPLES: usize = 1001;

const FLIP_LEVELS: usize = 4;
const NEWTON_MAX_ITER: usize = 50;
const NEWTON_MAX_HALVINGS: usize = 40;
const NEWTON_REL_TOL: f64 = 1e-13;
const DEDUP_RADIUS: f64 = 1e-4;
const S_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PointKind {
    Regular,
    VerticalTangent,
    HorizontalTangent,
    Singular,
}

fn singular_tol(spec: &CurveSpec) -> f64 {
    SINGULAR_REL_TOL * spec.derivative_scale()
}

pub fn classify_point(spec: &CurveSpec, t: f64) -> PointKind {
    let tol = singular_tol(spec);
    let d = spec.derivative(t, 1);
    match (d.x.abs() <= tol, d.y.abs() <= tol) {
        (true, true) => PointKind::Singular,
        (true, false) => PointKind::VerticalTangent,
        (false, true) => PointKind::HorizontalTangent,
        (false, false) => PointKind::Regular,
    }
}

/// One-sided unit tangents around a singular point and how well they oppose.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TangentFlip {
    pub t: f64,
    /// Limit of `γ′/|γ′|` from below.
    pub tangent_left: PlanePoint,
    /// Limit of `γ′/|γ′|` from above.
    pub tangent_right: PlanePoint,
    /// Extrapolated dot product of the two limits.
    pub flip_dot: f64,
    /// Raw dot products at `δ = delta·4⁻ᵏ`.
    pub level_dots: Vec<f64>,
    /// Successive Richardson estimates of the `δ → 0` dot product.
    pub extrapolated_dots: Vec<f64>,
}

impl TangentFlip {
    pub fn is_cusp(&self) -> bool {
        self.extrapolated_dots.iter().all(|&d| d <= -1.0 + FLIP_TOL)
    }
}

/// Richardson table on samples taken at `δ, δ/4, δ/16, …`; `powers[m]` is the
/// error order removed in sweep `m`. Returns the diagonal, best estimate last.
fn richardson_diagonal(values: &[f64], ratio: f64, powers: &[i32]) -> Vec<f64> {
    let mut table: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
    for k in 1..values.len() {
        for m in 1..=k {
            let factor = ratio.powi(powers[m - 1]);
            let refined = (factor * table[k][m - 1] - table[k - 1][m - 1]) / (factor - 1.0);
            table[k].push(refined);
        }
    }
    (1..values.len()).map(|k| table[k][k]).collect()
}

fn extrapolate_tangent(samples: &[PlanePoint]) -> PlanePoint {
    // one-sided tangents carry odd and even powers of δ
    let powers = [1, 2, 3];
    let xs: Vec<f64> = samples.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = samples.iter().map(|p| p.y).collect();
    let x = *richardson_diagonal(&xs, 4.0, &powers).last().unwrap();
    let y = *richardson_diagonal(&ys, 4.0, &powers).last().unwrap();
    PlanePoint::new(x, y)
        .normalized()
        .unwrap_or(PlanePoint::ORIGIN)
}

/// Measures the one-sided unit tangents of `curve` at `t` for
/// `δ ∈ {delta, delta/4, delta/16, delta/64}` and extrapolates them to `δ → 0`.
///
/// The dot product of the two tangents is an even function of `δ`, so its
/// Richardson table removes `δ², δ⁴, δ⁶` in turn. At a cusp it tends to `−1`;
/// at a regular point, or a singular point where the curve does not turn back,
/// it tends to `+1`.
pub fn tangent_flip(curve: &CurveSpec, t: f64, delta: f64) -> Result<TangentFlip> {
    if !(delta > 0.0 && delta <= MAX_CERTIFY_DELTA) {
        return Err(Error::InvalidParameter(format!(
            "certification offset must lie in (0, {MAX_CERTIFY_DELTA}], got {delta}"
        )));
    }
    if classify_point(curve, t) != PointKind::Singular {
        return Err(Error::NotSingular { t });
    }
    let unit = |p: PlanePoint| p.normalized().unwrap_or(PlanePoint::ORIGIN);
    let mut lefts = Vec::with_capacity(FLIP_LEVELS);
    let mut rights = Vec::with_capacity(FLIP_LEVELS);
    let mut level_dots = Vec::with_capacity(FLIP_LEVELS);
    let mut step = delta;
    for _ in 0..FLIP_LEVELS {
        let left = unit(curve.derivative(t - step, 1));
        let right = unit(curve.derivative(t + step, 1));
        level_dots.push(left.dot(right));
        lefts.push(left);
        rights.push(right);
        step /= 4.0;
    }
    let extrapolated_dots = richardson_diagonal(&level_dots, 4.0, &[2, 4, 6]);
    let flip_dot = extrapolated_dots.last().unwrap().clamp(-1.0, 1.0);
    Ok(TangentFlip {
        t,
        tangent_left: extrapolate_tangent(&lefts),
        tangent_right: extrapolate_tangent(&rights),
        flip_dot,
        level_dots,
        extrapolated_dots,
    })
}

/// A certified cusp of a two-term curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CuspCertificate {
    pub s: f64,
    pub t: f64,
    pub tangent_left: PlanePoint,
    pub tangent_right: PlanePoint,
    pub flip_dot: f64,
    /// Whether the cusp is covered by a proof (the `a = 1` family) rather than only observed.
    pub proven: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CuspVerdict {
    Accepted(CuspCertificate),
    Rejected(TangentFlip),
}

/// Certifies the singular point `t` of `spec` as a cusp by the tangent flip.
///
/// The certificate's `proven` flag is left `false`; [`find_cusps`] sets it
/// from [`predicted_cusp_locus`].
pub fn certify_cusp(spec: &TwoTermSpec, t: f64, delta: f64) -> Result<CuspVerdict> {
    let flip = tangent_flip(&spec.curve(), t, delta)?;
    if !flip.is_cusp() {
        return Ok(CuspVerdict::Rejected(flip));
    }
    Ok(CuspVerdict::Accepted(CuspCertificate {
        s: spec.s(),
        t,
        tangent_left: flip.tangent_left,
        tangent_right: flip.tangent_right,
        flip_dot: flip.flip_dot,
        proven: false,
    }))
}

/// Where the cusps of `γ_{a,b}^s` sit: `s̄ = (a−b)/(a+b)`, `t = h/(2(b−a))` for odd `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct CuspLocus {
    pub s_bar: Rational,
    pub t_values: Vec<Rational>,
    /// True only for `a = 1`, the case with a proof; for `a > 1` the locus is an observation.
    pub proven: bool,
}

impl CuspLocus {
    pub fn s_bar_f64(&self) -> f64 {
        rational_to_f64(&self.s_bar)
    }

    pub fn t_values_f64(&self) -> Vec<f64> {
        self.t_values.iter().map(rational_to_f64).collect()
    }
}

pub fn predicted_cusp_locus(a: i64, b: i64) -> Result<CuspLocus> {
    validate_frequencies(a, b)?;
    let den = 2 * (b - a);
    Ok(CuspLocus {
        s_bar: Rational::new(a - b, a + b),
        t_values: (1..den).step_by(2).map(|h| Rational::new(h, den)).collect(),
        proven: a == 1,
    })
}

/// Outcome of [`find_cusps`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CuspSearch {
    /// Certified cusps, sorted by `t`.
    pub certificates: Vec<CuspCertificate>,
    /// Grid minima scanned.
    pub seeds: usize,
    /// Seeds whose Newton refinement did not converge.
    pub unconverged: usize,
    /// Refined singular points that failed the tangent-flip test.
    pub rejected: usize,
}

struct Refined {
    s: f64,
    t: f64,
}

fn velocity_at(spec: &TwoTermSpec, t: f64) -> PlanePoint {
    spec.curve().derivative(t, 1)
}

/// Damped Newton on `γ′(s, t) = 0` in both unknowns. A step is halved until the
/// residual decreases.
fn refine_singular(a: i64, b: i64, s0: f64, t0: f64) -> Result<Refined> {
    let spec_at = |s: f64| TwoTermSpec::new(a, b, s);
    let mut s = s0;
    let mut t = t0;
    let mut spec = spec_at(s)?;
    let mut residual = velocity_at(&spec, t);
    let scale = spec.curve().derivative_scale();
    for _ in 0..NEWTON_MAX_ITER {
        if residual.norm() <= NEWTON_REL_TOL * scale {
            return Ok(Refined { s, t: frac(t) });
        }
        let ds = spec.velocity_s_derivative(t);
        let dt = spec.curve().derivative(t, 2);
        let det = ds.x * dt.y - dt.x * ds.y;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let step_s = -(dt.y * residual.x - dt.x * residual.y) / det;
        let step_t = -(-ds.y * residual.x + ds.x * residual.y) / det;

        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..NEWTON_MAX_HALVINGS {
            let s_new = s + lambda * step_s;
            let t_new = t + lambda * step_t;
            if (-1.0..=1.0).contains(&s_new) {
                let candidate = spec_at(s_new)?;
                let r = velocity_at(&candidate, t_new);
                if r.norm() < residual.norm() {
                    accepted = Some((s_new, t_new, candidate, r));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((s_new, t_new, candidate, r)) => {
                s = s_new;
                t = t_new;
                spec = candidate;
                residual = r;
            }
            None => break,
        }
    }
    if residual.norm() <= NEWTON_REL_TOL * scale {
        Ok(Refined { s, t: frac(t) })
    } else {
        Err(Error::NoConvergence {
            iterations: NEWTON_MAX_ITER,
        })
    }
}

fn circular_distance(u: f64, v: f64) -> f64 {
    let d = frac(u - v);
    d.min(1.0 - d)
}

/// Searches `(s, t) ∈ [−1, 1] × [0, 1)` for cusps of `γ_{a,b}^s`.
///
/// Local minima of `|γ′|²` on an `s_grid × t_grid` lattice seed a Newton
/// refinement of `γ′ = 0` in `(s, t)` jointly. Refined points are merged within
/// a radius of `1e−4` and certified with [`certify_cusp`]. The scan runs in
/// parallel; refinement and merging run over the sorted seed list, so the
/// output does not depend on the thread count.
pub fn find_cusps(a: i64, b: i64, s_grid: usize, t_grid: usize) -> Result<CuspSearch> {
    validate_frequencies(a, b)?;
    if s_grid < MIN_CUSP_GRID || t_grid < MIN_CUSP_GRID {
        return Err(Error::InvalidParameter(format!(
            "cusp scan grids must be at least {MIN_CUSP_GRID}, got {s_grid} x {t_grid}"
        )));
    }
    let locus = predicted_cusp_locus(a, b)?;
    let s_lo = -1.0 + S_MARGIN;
    let s_hi = 1.0 - S_MARGIN;
    let s_at = |i: usize| s_lo + (s_hi - s_lo) * i as f64 / (s_grid - 1) as f64;
    let t_at = |j: usize| j as f64 / t_grid as f64;

    let speed: Vec<Vec<f64>> = (0..s_grid)
        .into_par_iter()
        .map(|i| {
            let spec = TwoTermSpec::new(a, b, s_at(i)).expect("scan stays inside [-1, 1]");
            let curve = spec.curve();
            (0..t_grid)
                .map(|j| {
                    let d = curve.derivative(t_at(j), 1);
                    d.dot(d)
                })
                .collect()
        })
        .collect();

    let mut seeds = Vec::new();
    for i in 0..s_grid {
        for j in 0..t_grid {
            let v = speed[i][j];
            let is_min = (-1i64..=1).all(|di| {
                (-1i64..=1).all(|dj| {
                    let ni = i as i64 + di;
                    if (di == 0 && dj == 0) || ni < 0 || ni >= s_grid as i64 {
                        return true;
                    }
                    let nj = (j as i64 + dj).rem_euclid(t_grid as i64) as usize;
                    v <= speed[ni as usize][nj]
                })
            });
            if is_min {
                seeds.push((i, j));
            }
        }
    }

    let mut search = CuspSearch {
        seeds: seeds.len(),
        ..CuspSearch::default()
    };
    let mut points: Vec<Refined> = Vec::new();
    for &(i, j) in &seeds {
        match refine_singular(a, b, s_at(i), t_at(j)) {
            Ok(p) => {
                let duplicate = points.iter().any(|q| {
                    (q.s - p.s).abs() < DEDUP_RADIUS && circular_distance(q.t, p.t) < DEDUP_RADIUS
                });
                if !duplicate {
                    points.push(p);
                }
            }
            Err(_) => search.unconverged += 1,
        }
    }
    points.sort_by(|p, q| p.t.total_cmp(&q.t).then(p.s.total_cmp(&q.s)));

    for p in points {
        let spec = TwoTermSpec::new(a, b, p.s)?;
        match certify_cusp(&spec, p.t, DEFAULT_CERTIFY_DELTA) {
            Ok(CuspVerdict::Accepted(mut cert)) => {
                cert.proven = locus.proven;
                search.certificates.push(cert);
            }
            Ok(CuspVerdict::Rejected(_)) | Err(Error::NotSingular { .. }) => search.rejected += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(search)
}

/// Angle that turns the first predicted cusp direction onto the vertical axis:
/// `π(1/2 − 1/(b−a))`.
pub fn rotation_angle(a: i64, b: i64) -> Result<f64> {
    validate_frequencies(a, b)?;
    Ok(PI * (0.5 - 1.0 / (b - a) as f64))
}

/// Closed-form parametric derivative of the rotated curve at `s = s̄`:
/// `−tan(π(1/(b−a) − (a+b)t))`, or `None` at a pole of the tangent.
pub fn rotated_param_deriv(a: i64, b: i64, t: f64) -> Result<Option<f64>> {
    validate_frequencies(a, b)?;
    let u = 1.0 / (b - a) as f64 - (a + b) as f64 * t;
    let r = u - u.round();
    if (r.abs() - 0.5).abs() < 1e-12 {
        return Ok(None);
    }
    Ok(Some(-(PI * r).tan()))
}

/// The curve at `s̄` turned by [`rotation_angle`].
pub fn rotated_cusp_curve(a: i64, b: i64) -> Result<CurveSpec> {
    let locus = predicted_cusp_locus(a, b)?;
    let spec = TwoTermSpec::new(a, b, locus.s_bar_f64())?;
    Ok(spec.curve().rotate(rotation_angle(a, b)?))
}

/// Default half width of the loop-birth window: an eighth of the cusp spacing.
pub fn default_loop_window(a: i64, b: i64) -> Result<f64> {
    validate_frequencies(a, b)?;
    Ok(1.0 / (8 * (b - a)) as f64)
}

/// Counts the sign changes of the horizontal coordinate near a cusp parameter.
///
/// The curve is turned so that the mirror axis through `γ(t_center)` becomes the
/// vertical axis; for `a = 1` and the first cusp that is exactly
/// [`rotation_angle`]. A cusp or a curve without a loop crosses the axis once,
/// a freshly born loop three times.
pub fn loop_birth_count(a: i64, b: i64, s: f64, t_center: f64, half_width: f64) -> Result<usize> {
    let spec = TwoTermSpec::new(a, b, s)?;
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "window half width must be positive, got {half_width}"
        )));
    }
    let lo = t_center - half_width;
    let hi = t_center + half_width;
    let den = 2 * (b - a);
    for h in (1..den).step_by(2) {
        for shift in -1..=1 {
            let other = h as f64 / den as f64 + shift as f64;
            if (other - t_center).abs() > 1e-12 && (lo..=hi).contains(&other) {
                return Err(Error::WindowTooWide { lo, hi, other });
            }
        }
    }

    let phi = FRAC_PI_2 - TAU * a as f64 * t_center;
    let curve = spec.curve().rotate(phi);
    let zero_tol = 1e-12 * curve.scale();
    let last = (LOOP_WINDOW_SAMPLES - 1) as f64;
    let signs: Vec<bool> = (0..LOOP_WINDOW_SAMPLES)
        .map(|k| curve.evaluate(lo + (hi - lo) * k as f64 / last).x)
        .filter(|x| x.abs() > zero_tol)
        .map(|x| x > 0.0)
        .collect();
    Ok(signs.windows(2).filter(|w| w[0] != w[1]).count())
}

/// Parameters in `[0, 1)` where the parametric derivative of `γ_{a,b}^s` is undefined (`x′ = 0`).
///
/// `(1, 3)` uses the closed form `x′ = −4π·sin(2πt)·(2 + s + 3(1+s)·cos 4πt)`;
/// other pairs fall back to [`vertical_tangent_parameters`].
pub fn undefined_derivative_set(a: i64, b: i64, s: f64) -> Result<Vec<f64>> {
    let spec = TwoTermSpec::new(a, b, s)?;
    if (a, b) != (1, 3) {
        return vertical_tangent_parameters(&spec.curve(), 4096.max(64 * b as usize));
    }
    let mut ts = vec![0.0, 0.5];
    if s > -1.0 {
        let arg = (-2.0 - s) / (3.0 * (1.0 + s));
        if arg >= -1.0 - 1e-12 {
            let t_bar = arg.clamp(-1.0, 1.0).acos() / (4.0 * PI);
            ts.extend([t_bar, 0.5 - t_bar, 0.5 + t_bar, 1.0 - t_bar].map(frac));
        }
    }
    Ok(sorted_unique(ts, 1e-9))
}

fn sorted_unique(mut ts: Vec<f64>, radius: f64) -> Vec<f64> {
    ts.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(ts.len());
    for t in ts {
        if out.last().is_none_or(|&p| t - p > radius) {
            out.push(t);
        }
    }
    if out.len() > 1 && circular_distance(out[0], *out.last().unwrap()) <= radius {
        out.pop();
    }
    out
}

/// Roots of `x′(t)` in `[0, 1)` for an arbitrary curve.
///
/// Sign changes on an `n`-point grid are bisected; grid minima of `|x′|` that
/// do not change sign are polished by golden-section search and kept when
/// `|x′|` drops below the vertical-tangent tolerance, which catches double roots.
pub fn vertical_tangent_parameters(curve: &CurveSpec, n: usize) -> Result<Vec<f64>> {
    if n < 8 {
        return Err(Error::InvalidParameter(format!(
            "root scan needs at least 8 samples, got {n}"
        )));
    }
    let tol = crate::curve::VERTICAL_TANGENT_REL_TOL * curve.derivative_scale();
    let xp = |t: f64| curve.derivative(t, 1).x;
    let t_at = |j: usize| j as f64 / n as f64;
    let values: Vec<f64> = (0..n).map(|j| xp(t_at(j))).collect();
    let mut roots = Vec::new();
    for j in 0..n {
        let (v0, v1) = (values[j], values[(j + 1) % n]);
        if v0 == 0.0 {
            roots.push(t_at(j));
            continue;
        }
        if v1 != 0.0 && (v0 < 0.0) != (v1 < 0.0) {
            let (mut lo, mut hi) = (t_at(j), t_at(j + 1));
            let lo_negative = v0 < 0.0;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if (xp(mid) < 0.0) == lo_negative {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(frac(0.5 * (lo + hi)));
            continue;
        }
        let prev = values[(j + n - 1) % n];
        if v0.abs() <= prev.abs() && v0.abs() <= v1.abs() && (prev < 0.0) == (v1 < 0.0) {
            let t = golden_min(|t| xp(t).abs(), t_at(j) - 1.0 / n as f64, t_at(j + 1));
            if xp(t).abs() <= tol {
                roots.push(frac(t));
            }
        }
    }
    Ok(sorted_unique(roots, 1e-7))
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo < 1e-15 {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}
