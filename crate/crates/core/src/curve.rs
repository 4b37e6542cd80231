//! Evaluation of finite exponential sums `γ(t) = Σ wⱼ·exp(2πi aⱼ t)`.
//!
//! Phases are kept in turns (fractions of a full revolution) for as long as
//! possible. Every angle is reduced to the nearest quarter turn before calling
//! into `sin_cos`, so quarter-turn parameters such as `t = 1/4` land exactly on
//! the axes.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative threshold under which `x′(t)` counts as zero for the parametric derivative.
pub const VERTICAL_TANGENT_REL_TOL: f64 = 1e-9;

/// A point of the plane, also read as the complex number `x + iy`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanePoint {
    pub x: f64,
    pub y: f64,
}

impl PlanePoint {
    pub const ORIGIN: PlanePoint = PlanePoint { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self { x: z.re, y: z.im }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }

    /// Counter-clockwise rotation about the origin.
    pub fn rotated(self, phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Reflection in the horizontal axis (complex conjugation).
    pub fn mirror_x(self) -> Self {
        Self::new(self.x, -self.y)
    }
}

impl Add for PlanePoint {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for PlanePoint {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for PlanePoint {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl Mul<f64> for PlanePoint {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.x * rhs, self.y * rhs)
    }
}

impl fmt::Display for PlanePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Fractional part in `[0, 1)`.
pub(crate) fn frac(v: f64) -> f64 {
    let r = v.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// `(cos 2πf, sin 2πf)` for an angle given in turns.
pub fn turn_cos_sin(turns: f64) -> (f64, f64) {
    let r = turns - turns.round();
    let q = (4.0 * r).round();
    let rem = r - 0.25 * q;
    let (s, c) = (TAU * rem).sin_cos();
    quarter_turns(c, s, q as i64)
}

/// Rotates `(c, s)` by `k` quarter turns without rounding.
fn quarter_turns(c: f64, s: f64, k: i64) -> (f64, f64) {
    match k.rem_euclid(4) {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    }
}

/// One summand `w·exp(2πi·frequency·t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialTerm {
    pub frequency: i64,
    pub weight: Complex64,
}

impl ExponentialTerm {
    pub fn new(frequency: i64, weight: Complex64) -> Self {
        Self { frequency, weight }
    }

    pub fn real(frequency: i64, weight: f64) -> Self {
        Self::new(frequency, Complex64::new(weight, 0.0))
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    freq: i64,
    w_re: f64,
    w_im: f64,
}

#[derive(Serialize, Deserialize)]
struct CurveRepr {
    terms: Vec<TermRepr>,
}

/// A closed curve given as a finite sum of exponentials with integer frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveRepr", into = "CurveRepr")]
pub struct CurveSpec {
    terms: Vec<ExponentialTerm>,
}

impl TryFrom<CurveRepr> for CurveSpec {
    type Error = Error;

    fn try_from(repr: CurveRepr) -> Result<Self> {
        let terms = repr
            .terms
            .into_iter()
            .map(|t| ExponentialTerm::new(t.freq, Complex64::new(t.w_re, t.w_im)))
            .collect();
        CurveSpec::new(terms)
    }
}

impl From<CurveSpec> for CurveRepr {
    fn from(spec: CurveSpec) -> Self {
        CurveRepr {
            terms: spec
                .terms
                .into_iter()
                .map(|t| TermRepr {
                    freq: t.frequency,
                    w_re: t.weight.re,
                    w_im: t.weight.im,
                })
                .collect(),
        }
    }
}

impl CurveSpec {
    pub fn new(terms: Vec<ExponentialTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidParameter(
                "a curve needs at least one term".into(),
            ));
        }
        if let Some(t) = terms
            .iter()
            .find(|t| !(t.weight.re.is_finite() && t.weight.im.is_finite()))
        {
            return Err(Error::InvalidParameter(format!(
                "non-finite weight {} for frequency {}",
                t.weight, t.frequency
            )));
        }
        Ok(Self { terms })
    }

    /// Unit-weight sum `Σ exp(2πi aⱼ t)`; repeated frequencies act as integer weights.
    pub fn exponential_sum(frequencies: &[i64]) -> Result<Self> {
        if let Some(&f) = frequencies.iter().find(|&&f| f < 1) {
            return Err(Error::InvalidParameter(format!(
                "frequencies must be positive, got {f}"
            )));
        }
        Self::new(
            frequencies
                .iter()
                .map(|&f| ExponentialTerm::real(f, 1.0))
                .collect(),
        )
    }

    /// A circle `w·exp(2πi·frequency·t)`.
    pub fn single(frequency: i64, weight: f64) -> Self {
        Self {
            terms: vec![ExponentialTerm::real(frequency, weight)],
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("curve specs always serialize")
    }

    pub fn terms(&self) -> &[ExponentialTerm] {
        &self.terms
    }

    /// `Σ|wⱼ|`, an upper bound on `|γ(t)|`.
    pub fn scale(&self) -> f64 {
        self.terms.iter().map(|t| t.weight.norm()).sum()
    }

    /// `2π·Σ|wⱼ||aⱼ|`, an upper bound on `|γ′(t)|`.
    pub fn derivative_scale(&self) -> f64 {
        TAU * self
            .terms
            .iter()
            .map(|t| t.weight.norm() * t.frequency.unsigned_abs() as f64)
            .sum::<f64>()
    }

    pub fn has_real_weights(&self) -> bool {
        self.terms.iter().all(|t| t.weight.im == 0.0)
    }

    pub fn evaluate(&self, t: f64) -> PlanePoint {
        self.derivative(t, 0)
    }

    /// `order`-th derivative in `t`; order 0 is the curve itself.
    pub fn derivative(&self, t: f64, order: u32) -> PlanePoint {
        let t = frac(t);
        let mut acc = Complex64::new(0.0, 0.0);
        for term in &self.terms {
            let phase = frac(term.frequency as f64 * t);
            let (c, s) = turn_cos_sin(phase);
            let (c, s) = quarter_turns(c, s, i64::from(order));
            let magnitude = (TAU * term.frequency as f64).powi(order as i32);
            acc += term.weight * Complex64::new(c, s) * magnitude;
        }
        PlanePoint::from_complex(acc)
    }

    /// Slope `y′/x′`, or `None` where `x′` vanishes (vertical tangent or singular point).
    pub fn parametric_derivative(&self, t: f64) -> Option<f64> {
        let d = self.derivative(t, 1);
        if d.x.abs() <= VERTICAL_TANGENT_REL_TOL * self.derivative_scale() {
            None
        } else {
            Some(d.y / d.x)
        }
    }

    /// The same curve rotated by `phi` radians about the origin.
    pub fn rotate(&self, phi: f64) -> Self {
        let factor = Complex64::from_polar(1.0, phi);
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| ExponentialTerm::new(t.frequency, t.weight * factor))
                .collect(),
        }
    }

    /// Points at `t = j/n` for `j = 0..n`.
    pub fn sample(&self, n: usize) -> Result<Vec<PlanePoint>> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 samples, got {n}"
            )));
        }
        Ok((0..n).map(|j| self.evaluate(j as f64 / n as f64)).collect())
    }
}

/// The weighted pair `(1−s)·exp(2πiat) + (1+s)·exp(2πibt)` with `1 ≤ a < b`, `s ∈ [−1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoTermSpec {
    a: i64,
    b: i64,
    s: f64,
}

impl TwoTermSpec {
    pub fn new(a: i64, b: i64, s: f64) -> Result<Self> {
        validate_frequencies(a, b)?;
        if !(-1.0..=1.0).contains(&s) {
            return Err(Error::InvalidParameter(format!(
                "weight parameter s must lie in [-1, 1], got {s}"
            )));
        }
        Ok(Self { a, b, s })
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn with_s(&self, s: f64) -> Result<Self> {
        Self::new(self.a, self.b, s)
    }

    pub fn curve(&self) -> CurveSpec {
        CurveSpec {
            terms: vec![
                ExponentialTerm::real(self.a, 1.0 - self.s),
                ExponentialTerm::real(self.b, 1.0 + self.s),
            ],
        }
    }

    /// `∂γ′/∂s`, the sensitivity of the velocity to the weight parameter.
    pub(crate) fn velocity_s_derivative(&self, t: f64) -> PlanePoint {
        CurveSpec {
            terms: vec![
                ExponentialTerm::real(self.a, -1.0),
                ExponentialTerm::real(self.b, 1.0),
            ],
        }
        .derivative(t, 1)
    }
}

impl From<&TwoTermSpec> for CurveSpec {
    fn from(spec: &TwoTermSpec) -> Self {
        spec.curve()
    }
}

impl From<TwoTermSpec> for CurveSpec {
    fn from(spec: TwoTermSpec) -> Self {
        spec.curve()
    }
}

pub(crate) fn validate_frequencies(a: i64, b: i64) -> Result<()> {
    if a < 1 || a >= b {
        return Err(Error::InvalidParameter(format!(
            "frequencies must satisfy 1 <= a < b, got a = {a}, b = {b}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn two(a: i64, b: i64, s: f64) -> CurveSpec {
        TwoTermSpec::new(a, b, s).unwrap().curve()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(two(1, 3, 0.0).evaluate(0.0), PlanePoint::new(2.0, 0.0));
        let p = two(1, 3, 0.0).evaluate(0.25);
        assert!(p.norm() < 1e-15, "{p}");
        let p = two(1, 3, -1.0).evaluate(0.5);
        assert_abs_diff_eq!(p.x, -2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.y, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn quarter_turns_are_exact() {
        assert_eq!(turn_cos_sin(0.25), (0.0, 1.0));
        assert_eq!(turn_cos_sin(0.5), (-1.0, 0.0));
        assert_eq!(turn_cos_sin(-0.25), (0.0, -1.0));
        let (c, s) = turn_cos_sin(0.125);
        assert_abs_diff_eq!(c, (PI / 4.0).cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(s, (PI / 4.0).sin(), epsilon = 1e-15);
    }

    #[test]
    fn derivative_examples() {
        let d = two(1, 3, -0.5).derivative(0.25, 1);
        assert!(d.norm() < 1e-12, "{d}");
        let d = CurveSpec::single(1, 1.0).derivative(0.0, 1);
        assert_eq!(d, PlanePoint::new(0.0, TAU));
    }

    #[test]
    fn derivative_matches_central_difference_at_origin_parameter() {
        // oracle: central difference of evaluate with step 1e-6
        let c = two(1, 3, 0.0);
        let h = 1e-6;
        let fd = (c.evaluate(h) - c.evaluate(-h)) * (0.5 / h);
        let d = c.derivative(0.0, 1);
        assert_abs_diff_eq!(d.x, fd.x, epsilon = 1e-4);
        assert_abs_diff_eq!(d.y, fd.y, epsilon = 1e-4);
        assert_abs_diff_eq!(d.y, 8.0 * PI, epsilon = 1e-4);
        assert_abs_diff_eq!(d.x, 0.0, epsilon = 1e-4);
    }

    #[test]
    fn parametric_derivative_examples() {
        assert_abs_diff_eq!(
            two(1, 3, -0.5).parametric_derivative(0.125).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            two(1, 3, -1.0).parametric_derivative(0.25).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert_eq!(two(1, 3, -0.5).parametric_derivative(0.25), None);
        assert_eq!(two(1, 3, -1.0).parametric_derivative(0.0), None);
    }

    #[test]
    fn parametric_derivative_is_minus_cot_4pi_t() {
        let c = two(1, 3, -0.5);
        for j in 1..400 {
            let t = j as f64 / 400.0 + 1e-3;
            if [0.0, 0.25, 0.5, 0.75, 1.0]
                .iter()
                .any(|p| (t - p).abs() < 1e-3)
            {
                continue;
            }
            let expected = -1.0 / (4.0 * PI * t).tan();
            let got = c.parametric_derivative(t).unwrap();
            assert!(
                (got - expected).abs() <= 1e-9 * expected.abs().max(1.0),
                "t = {t}: {got} vs {expected}"
            );
        }
    }

    #[test]
    fn rotate_examples() {
        let c = two(1, 3, 0.0);
        assert_eq!(c.rotate(0.0), c);
        let p = c.rotate(PI / 2.0).evaluate(0.0);
        assert_abs_diff_eq!(p.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.y, 2.0, epsilon = 1e-15);
        let back = c.rotate(0.7).rotate(-0.7);
        for j in 0..100 {
            let t = j as f64 / 100.0;
            assert!(back.evaluate(t).distance(c.evaluate(t)) < 1e-12);
        }
    }

    #[test]
    fn sample_examples() {
        let pts = two(1, 3, 0.0).sample(2).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0], PlanePoint::new(2.0, 0.0));
        assert_abs_diff_eq!(pts[1].x, -2.0, epsilon = 1e-15);
        let circle = CurveSpec::single(1, 1.0).sample(4).unwrap();
        let expected = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        for (p, (x, y)) in circle.iter().zip(expected) {
            assert_eq!(*p, PlanePoint::new(x, y));
        }
        assert!(two(1, 3, 0.0).sample(1).is_err());
    }

    #[test]
    fn two_term_lowering() {
        let c = two(2, 5, 0.25);
        assert_eq!(
            c.terms(),
            &[
                ExponentialTerm::real(2, 0.75),
                ExponentialTerm::real(5, 1.25)
            ]
        );
    }

    #[test]
    fn two_term_validation() {
        assert!(TwoTermSpec::new(3, 3, 0.0).is_err());
        assert!(TwoTermSpec::new(0, 3, 0.0).is_err());
        assert!(TwoTermSpec::new(1, 3, 1.5).is_err());
        assert!(TwoTermSpec::new(1, 3, f64::NAN).is_err());
        assert!(TwoTermSpec::new(1, 3, -1.0).is_ok());
        assert!(CurveSpec::new(vec![]).is_err());
        assert!(CurveSpec::exponential_sum(&[3, 0, 7]).is_err());
    }

    #[test]
    fn json_shape() {
        let c = two(1, 3, 0.5);
        assert_eq!(
            c.to_json(),
            r#"{"terms":[{"freq":1,"w_re":0.5,"w_im":0.0},{"freq":3,"w_re":1.5,"w_im":0.0}]}"#
        );
        assert_eq!(CurveSpec::from_json(&c.to_json()).unwrap(), c);
        assert!(CurveSpec::from_json(r#"{"terms":[]}"#).is_err());
    }

    #[test]
    fn large_parameter_is_reduced() {
        let c = two(2, 7, 0.3);
        let far = c.evaluate(1.0e3 + 0.123);
        let near = c.evaluate(0.123);
        assert!(far.distance(near) < 1e-9);
    }
}
