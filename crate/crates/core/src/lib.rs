//! Analysis of the weighted two-exponential plane curves
//! `γ(t) = (1−s)·exp(2πiat) + (1+s)·exp(2πibt)`.
//!
//! The crate computes winding numbers about arbitrary base points (closed form
//! and numerically), locates and certifies cusp points, checks the dihedral
//! symmetry and the self-intersection structure of the graphs, and renders
//! deterministic SVG figures of all of it.
//!
//! Modules:
//! - [`curve`]: evaluation, derivatives and rotation of exponential sums.
//! - [`winding`]: winding numbers and the kernel integral behind the closed form.
//! - [`singularity`]: point classification, cusp search and certification.
//! - [`geometry`]: dihedral symmetry and self-intersections.
//! - [`render`]: SVG, CSV and JSON output.
//! - [`verify`]: the end-to-end acceptance checks, shared by the CLI and tests.

pub mod curve;
pub mod error;
pub mod geometry;
pub mod render;
pub mod singularity;
pub mod verify;
pub mod winding;

pub use curve::{CurveSpec, ExponentialTerm, PlanePoint, TwoTermSpec};
pub use error::{Error, Result};

/// Exact rational numbers, used for parameter values that the theory pins down exactly.
pub type Rational = num_rational::Ratio<i64>;

/// Converts an exact rational to the nearest `f64`.
pub fn rational_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Parses `"0.25"`, `"-1/2"` or `"3"` into a real number. Fractions are reduced
/// exactly before the single conversion to `f64`.
pub fn parse_real(text: &str) -> Result<f64> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: i64 = num
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {text:?}")))?;
        let den: i64 = den
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {text:?}")))?;
        if den == 0 {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(rational_to_f64(&Rational::new(num, den)));
    }
    let value: f64 = text
        .parse()
        .map_err(|_| Error::Parse(format!("not a number: {text:?}")))?;
    if !value.is_finite() {
        return Err(Error::Parse(format!("not a finite number: {text:?}")));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals_and_decimals() {
        assert_eq!(parse_real("-1/2").unwrap(), -0.5);
        assert_eq!(parse_real("-3/7").unwrap(), -3.0 / 7.0);
        assert_eq!(parse_real("2/-4").unwrap(), -0.5);
        assert_eq!(parse_real("0.3").unwrap(), 0.3);
        assert_eq!(parse_real(" 1 ").unwrap(), 1.0);
        assert!(parse_real("1/0").is_err());
        assert!(parse_real("abc").is_err());
        assert!(parse_real("inf").is_err());
    }
}
