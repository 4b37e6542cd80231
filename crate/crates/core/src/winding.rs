//! Winding numbers about a base point.
//!
//! [`winding_numeric`] accumulates the turning of `γ(t) − z₀` over a uniform
//! grid. Each step contributes the signed angle between consecutive difference
//! vectors, taken in `(−π, π]`, so the sum is an integer multiple of `2π` up to
//! rounding as long as no step turns by more than half a revolution.
//!
//! For the two-term family the winding number about the origin has the closed
//! form [`winding_closed_form`]. [`winding_decomposition_check`] evaluates the
//! two integrals the closed form splits into, and [`kernel_integral`] is the
//! periodic integral both of them reduce to.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::curve::{turn_cos_sin, validate_frequencies, CurveSpec, PlanePoint, TwoTermSpec};
use crate::error::{Error, Result};
use crate::Rational;

/// Default grid size for [`winding_numeric`].
pub const DEFAULT_WINDING_SAMPLES: usize = 4096;
/// Smallest grid accepted by [`winding_numeric`].
pub const MIN_WINDING_SAMPLES: usize = 64;
/// Base points closer than this multiple of the curve scale count as on the curve.
pub const ON_CURVE_REL_TOL: f64 = 1e-9;
/// Relative gap `|β − |α||` below which [`kernel_integral`] refuses to integrate.
pub const NEAR_POLE_REL_TOL: f64 = 1e-6;

/// Integer winding number with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindingResult {
    pub value: i64,
    /// Distance of the raw total turning (in turns) from `value`.
    pub residual: f64,
    /// Grid size that produced the result; 0 for the closed form.
    pub samples: usize,
}

/// Parameters of `∫₀¹ dt / (β + α·exp(2πit))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    alpha: f64,
    beta: f64,
}

impl KernelParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kernel needs finite alpha and beta > 0, got alpha = {alpha}, beta = {beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The exact value: `1/β` when `β > |α|`, else 0.
    pub fn limit(&self) -> f64 {
        if self.beta > self.alpha.abs() {
            1.0 / self.beta
        } else {
            0.0
        }
    }
}

/// Winding number of a two-term curve about the origin: `a` for `s < 0`, `b` for `s > 0`.
pub fn winding_closed_form(spec: &TwoTermSpec) -> Result<i64> {
    if spec.s() == 0.0 {
        // γ vanishes at t = 1/(2(b−a))
        return Err(Error::OnCurve { x: 0.0, y: 0.0 });
    }
    Ok(if spec.s() < 0.0 { spec.a() } else { spec.b() })
}

struct Turning {
    total: f64,
    max_step: f64,
}

fn accumulate_turning(spec: &CurveSpec, z0: PlanePoint, n: usize) -> Result<Turning> {
    let dist_tol = ON_CURVE_REL_TOL * spec.scale();
    let offset = |j: usize| spec.evaluate(j as f64 / n as f64) - z0;

    let first = offset(0);
    if first.norm() <= dist_tol {
        return Err(Error::OnCurve { x: z0.x, y: z0.y });
    }
    let mut prev = first;
    let mut total = 0.0;
    let mut max_step: f64 = 0.0;
    for j in 1..=n {
        let cur = if j == n { first } else { offset(j) };
        if cur.norm() <= dist_tol {
            return Err(Error::OnCurve { x: z0.x, y: z0.y });
        }
        let step = prev.cross(cur).atan2(prev.dot(cur));
        max_step = max_step.max(step.abs());
        total += step;
        prev = cur;
    }
    Ok(Turning { total, max_step })
}

/// Winding number of `spec` about `z0` by argument tracking on an `n`-point grid.
///
/// If some step turns by more than a quarter revolution the grid is doubled
/// once; a second failure is reported as [`Error::Unresolved`].
pub fn winding_numeric(spec: &CurveSpec, z0: PlanePoint, n: usize) -> Result<WindingResult> {
    if n < MIN_WINDING_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "winding grid needs at least {MIN_WINDING_SAMPLES} samples, got {n}"
        )));
    }
    let mut samples = n;
    let mut turning = accumulate_turning(spec, z0, samples)?;
    if turning.max_step > FRAC_PI_2 {
        samples *= 2;
        turning = accumulate_turning(spec, z0, samples)?;
        if turning.max_step > FRAC_PI_2 {
            return Err(Error::Unresolved {
                max_step: turning.max_step,
                samples,
            });
        }
    }
    let turns = turning.total / TAU;
    let value = turns.round();
    let residual = (turns - value).abs();
    if residual >= 0.25 {
        return Err(Error::Unresolved {
            max_step: turning.max_step,
            samples,
        });
    }
    Ok(WindingResult {
        value: value as i64,
        residual,
        samples,
    })
}

/// Periodic trapezoidal rule for `∫₀¹ f(t) dt` on `n` nodes.
fn periodic_trapezoid(n: usize, f: impl FnMut(usize) -> Complex64) -> Complex64 {
    let sum: Complex64 = (0..n).map(f).sum();
    sum / n as f64
}

/// Trapezoidal value of `∫₀¹ dt / (β + α·exp(2πit))` on `n` nodes.
///
/// The integrand is smooth and periodic, so the error decays like
/// `min(|α|/β, β/|α|)ⁿ`.
pub fn kernel_integral(p: KernelParams, n: usize) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "kernel grid must be non-empty".into(),
        ));
    }
    let alpha_abs = p.alpha.abs();
    if (p.beta - alpha_abs).abs() < NEAR_POLE_REL_TOL * p.beta.max(alpha_abs) {
        return Err(Error::NearPole {
            beta: p.beta,
            alpha_abs,
        });
    }
    Ok(periodic_trapezoid(n, |j| {
        let (c, s) = turn_cos_sin(j as f64 / n as f64);
        Complex64::new(p.beta + p.alpha * c, p.alpha * s).inv()
    }))
}

/// The two summands the winding integral about the origin splits into,
/// each computed by quadrature on `n` nodes:
///
/// `a(1−s)·∫ dt / ((1−s) + (1+s)·e^{2πi(b−a)t})` and
/// `b(1+s)·∫ dt / ((1−s)·e^{2πi(a−b)t} + (1+s))`.
///
/// Their sum is the winding number; for `s < 0` the first carries all of it,
/// for `s > 0` the second.
pub fn winding_decomposition_check(spec: &TwoTermSpec, n: usize) -> Result<(Complex64, Complex64)> {
    if spec.s() == 0.0 {
        return Err(Error::OnCurve { x: 0.0, y: 0.0 });
    }
    if n == 0 {
        return Err(Error::InvalidParameter(
            "quadrature grid must be non-empty".into(),
        ));
    }
    let (a, b, s) = (spec.a() as f64, spec.b() as f64, spec.s());
    let gap = spec.b() - spec.a();
    let phase = |j: usize| {
        let (c, sn) = turn_cos_sin(crate::curve::frac(gap as f64 * j as f64 / n as f64));
        Complex64::new(c, sn)
    };

    let mut degenerate = false;
    let first = periodic_trapezoid(n, |j| {
        let den = (1.0 - s) + (1.0 + s) * phase(j);
        if den.norm() == 0.0 {
            degenerate = true;
        }
        den.inv()
    }) * (a * (1.0 - s));
    let second = periodic_trapezoid(n, |j| {
        let den = (1.0 - s) * phase(j).conj() + (1.0 + s);
        if den.norm() == 0.0 {
            degenerate = true;
        }
        den.inv()
    }) * (b * (1.0 + s));
    if degenerate {
        return Err(Error::OnCurve { x: 0.0, y: 0.0 });
    }
    Ok((first, second))
}

/// Parameters where `γ` with `s = 0` passes through the origin: `h/(2(b−a))` for odd `h`.
pub fn zeros_of_curve(a: i64, b: i64) -> Result<Vec<Rational>> {
    validate_frequencies(a, b)?;
    let den = 2 * (b - a);
    Ok((1..den).step_by(2).map(|h| Rational::new(h, den)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational_to_f64;

    fn two(a: i64, b: i64, s: f64) -> TwoTermSpec {
        TwoTermSpec::new(a, b, s).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(winding_closed_form(&two(1, 3, -0.3)).unwrap(), 1);
        assert_eq!(winding_closed_form(&two(1, 3, 0.3)).unwrap(), 3);
        assert_eq!(winding_closed_form(&two(2, 5, -1.0)).unwrap(), 2);
        assert_eq!(winding_closed_form(&two(2, 5, 1.0)).unwrap(), 5);
        assert!(matches!(
            winding_closed_form(&two(1, 3, 0.0)),
            Err(Error::OnCurve { .. })
        ));
    }

    #[test]
    fn numeric_examples() {
        let r = winding_numeric(&two(1, 3, -0.3).curve(), PlanePoint::ORIGIN, 4096).unwrap();
        assert_eq!(r.value, 1);
        assert!(r.residual < 1e-9);
        assert_eq!(r.samples, 4096);

        let circle = CurveSpec::single(5, 2.0);
        assert_eq!(
            winding_numeric(&circle, PlanePoint::ORIGIN, 4096)
                .unwrap()
                .value,
            5
        );

        let far = PlanePoint::new(10.0, 0.0);
        assert_eq!(
            winding_numeric(&two(1, 3, 0.3).curve(), far, 4096)
                .unwrap()
                .value,
            0
        );
    }

    #[test]
    fn numeric_rejects_base_point_on_curve() {
        let c = two(1, 3, 0.0).curve();
        assert!(matches!(
            winding_numeric(&c, PlanePoint::ORIGIN, 4096),
            Err(Error::OnCurve { .. })
        ));
        assert!(matches!(
            winding_numeric(&c, PlanePoint::new(2.0, 0.0), 4096),
            Err(Error::OnCurve { .. })
        ));
        assert!(winding_numeric(&c, PlanePoint::new(0.0, 0.5), 32).is_err());
    }

    #[test]
    fn coarse_grid_is_doubled_then_rejected() {
        // the curve races past a base point 1e-4 away; one doubling is not enough
        let c = CurveSpec::single(1, 1.0);
        let z0 = PlanePoint::new(1.0 - 1e-4, 1e-3 * 0.5);
        let err = winding_numeric(&c, z0, 64).unwrap_err();
        assert!(
            matches!(err, Error::Unresolved { samples: 128, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn negative_orientation() {
        let c = CurveSpec::single(-2, 1.0);
        assert_eq!(
            winding_numeric(&c, PlanePoint::ORIGIN, 128).unwrap().value,
            -2
        );
    }

    #[test]
    fn kernel_examples() {
        let k =
            |alpha, beta| kernel_integral(KernelParams::new(alpha, beta).unwrap(), 2048).unwrap();
        assert!((k(1.0, 2.0) - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        assert!(k(2.0, 1.0).norm() < 1e-12);
        assert!((k(0.0, 1.0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(matches!(
            kernel_integral(KernelParams::new(1.0, 1.0 + 1e-9).unwrap(), 64),
            Err(Error::NearPole { .. })
        ));
        assert!(KernelParams::new(1.0, 0.0).is_err());
        assert!(KernelParams::new(1.0, -2.0).is_err());
    }

    #[test]
    fn decomposition_examples() {
        let (f, s) = winding_decomposition_check(&two(1, 3, -0.5), 1024).unwrap();
        assert!((f - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(s.norm() < 1e-12);

        let (f, s) = winding_decomposition_check(&two(1, 3, 0.5), 1024).unwrap();
        assert!(f.norm() < 1e-12);
        assert!((s - Complex64::new(3.0, 0.0)).norm() < 1e-12);

        let spec = two(2, 7, -0.9);
        let (f, s) = winding_decomposition_check(&spec, 4096).unwrap();
        let numeric = winding_numeric(&spec.curve(), PlanePoint::ORIGIN, 8192).unwrap();
        assert!((f + s - Complex64::new(numeric.value as f64, 0.0)).norm() < 1e-8);
        assert_eq!(numeric.value, 2);

        assert!(winding_decomposition_check(&two(1, 3, 0.0), 64).is_err());
    }

    #[test]
    fn decomposition_at_endpoints() {
        let (f, s) = winding_decomposition_check(&two(2, 5, -1.0), 256).unwrap();
        assert!((f + s - Complex64::new(2.0, 0.0)).norm() < 1e-12);
        let (f, s) = winding_decomposition_check(&two(2, 5, 1.0), 256).unwrap();
        assert!((f + s - Complex64::new(5.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn zeros_examples() {
        let as_f = |v: Vec<Rational>| v.iter().map(rational_to_f64).collect::<Vec<_>>();
        assert_eq!(as_f(zeros_of_curve(1, 3).unwrap()), vec![0.25, 0.75]);
        assert_eq!(as_f(zeros_of_curve(1, 2).unwrap()), vec![0.5]);
        let z = zeros_of_curve(2, 5).unwrap();
        assert_eq!(
            z,
            vec![
                Rational::new(1, 6),
                Rational::new(1, 2),
                Rational::new(5, 6)
            ]
        );
        let c = two(2, 5, 0.0).curve();
        for t in z {
            assert!(c.evaluate(rational_to_f64(&t)).norm() < 1e-12);
        }
        assert!(zeros_of_curve(3, 2).is_err());
    }
}
