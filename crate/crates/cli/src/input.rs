//! Parsers for command-line and config values: curve specifications, exact
//! rationals, grids, box generators and target values.

use std::str::FromStr;

use num_traits::Zero;
use torsion_meet_core::curve::EllipticCurve;
use torsion_meet_core::error::{Error, Result};
use torsion_meet_core::field::Rational;
use torsion_meet_core::meet::CurvePoint;
use torsion_meet_core::ramify::BranchValue;

/// Exact rational from `p` or `p/q`; floating literals are rejected.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    Rational::from_str(t)
        .map_err(|_| Error::invalid(format!("expected an exact rational `p` or `p/q`, got `{t}`")))
}

/// A curve model plus the x-shift that relates the user's coordinate to the
/// short Weierstrass coordinate, and a normalized echo of the input.
pub struct CurveSpec {
    pub curve: EllipticCurve,
    pub x_shift: Rational,
    pub label: String,
}

/// `legendre:L` for y^2 = x(x-1)(x-L) or `weierstrass:A,B` for y^2 = x^3+Ax+B.
pub fn parse_curve(text: &str) -> Result<CurveSpec> {
    let t = text.trim();
    if let Some(rest) = t.strip_prefix("legendre:") {
        let lambda = parse_rational(rest)?;
        let (curve, x_shift) = EllipticCurve::legendre(&lambda)?;
        let label = format!("legendre:{lambda}");
        return Ok(CurveSpec { curve, x_shift, label });
    }
    if let Some(rest) = t.strip_prefix("weierstrass:") {
        let (a_text, b_text) = rest
            .split_once(',')
            .ok_or_else(|| Error::invalid("weierstrass curve needs two coefficients `A,B`"))?;
        let a = parse_rational(a_text)?;
        let b = parse_rational(b_text)?;
        let label = format!("weierstrass:{a},{b}");
        let curve = EllipticCurve::new(a, b)?;
        return Ok(CurveSpec { curve, x_shift: Rational::zero(), label });
    }
    Err(Error::invalid(format!(
        "curve must be `legendre:L` or `weierstrass:A,B`, got `{t}`"
    )))
}

/// Comma-separated rationals, e.g. `2,3,1/2`. Integer items may use the
/// range form `a..b` (inclusive).
pub fn parse_rational_list(text: &str) -> Result<Vec<Rational>> {
    let mut out = Vec::new();
    for item in split_items(text)? {
        match parse_integer_range(&item) {
            Some((lo, hi)) => out.extend((lo..=hi).map(|n| Rational::from_integer(n.into()))),
            None => out.push(parse_rational(&item)?),
        }
    }
    Ok(out)
}

/// Comma-separated levels, e.g. `2,3` or `2..10`.
pub fn parse_level_list(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in split_items(text)? {
        match parse_integer_range(&item) {
            Some((lo, hi)) => {
                for n in lo..=hi {
                    out.push(to_level(n)?);
                }
            }
            None => out.push(to_level(item.parse::<i64>().map_err(|_| {
                Error::invalid(format!("expected an integer level, got `{item}`"))
            })?)?),
        }
    }
    Ok(out)
}

/// Semicolon-separated curve points: `(x,y)` with exact rational entries, or
/// `O` / `inf` for the origin.
pub fn parse_points(text: &str) -> Result<Vec<CurvePoint>> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse_point)
        .collect()
}

/// Semicolon-separated target values: exact rationals or `inf`.
pub fn parse_targets(text: &str) -> Result<Vec<BranchValue>> {
    let values: Vec<BranchValue> = text
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            if s == "inf" || s == "O" {
                Ok(BranchValue::Infinity)
            } else {
                parse_rational(s).map(BranchValue::FiniteRational)
            }
        })
        .collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(Error::invalid("expected at least one target value"));
    }
    Ok(values)
}

fn parse_point(text: &str) -> Result<CurvePoint> {
    if text == "O" || text == "inf" {
        return Ok(CurvePoint::Infinity);
    }
    let inner = text
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| Error::invalid(format!("expected a point `(x,y)` or `O`, got `{text}`")))?;
    let (x, y) = inner
        .split_once(',')
        .ok_or_else(|| Error::invalid(format!("expected two coordinates in `{text}`")))?;
    Ok(CurvePoint::Affine(parse_rational(x)?, parse_rational(y)?))
}

fn split_items(text: &str) -> Result<Vec<String>> {
    let items: Vec<String> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect();
    if items.is_empty() {
        return Err(Error::invalid("expected a nonempty comma-separated list"));
    }
    Ok(items)
}

fn parse_integer_range(item: &str) -> Option<(i64, i64)> {
    let (lo, hi) = item.split_once("..")?;
    let lo = lo.trim().parse::<i64>().ok()?;
    let hi = hi.trim().parse::<i64>().ok()?;
    (lo <= hi).then_some((lo, hi))
}

fn to_level(n: i64) -> Result<usize> {
    usize::try_from(n).map_err(|_| Error::invalid(format!("level must be nonnegative, got {n}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_parse_exactly_and_reject_floats() {
        assert_eq!(parse_rational("3/4").unwrap(), Rational::new(3.into(), 4.into()));
        assert_eq!(parse_rational(" -2 ").unwrap(), Rational::from_integer((-2).into()));
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("1e3").is_err());
    }

    #[test]
    fn curve_specs_cover_both_forms() {
        let legendre = parse_curve("legendre:2").unwrap();
        assert_eq!(legendre.label, "legendre:2");
        assert_ne!(legendre.x_shift, Rational::zero());
        let weier = parse_curve("weierstrass:0,1").unwrap();
        assert_eq!(weier.label, "weierstrass:0,1");
        assert_eq!(weier.x_shift, Rational::zero());
        assert!(parse_curve("legendre:1").is_err());
        assert!(parse_curve("weierstrass:0,0").is_err());
        assert!(parse_curve("montgomery:1").is_err());
    }

    #[test]
    fn lists_expand_ranges() {
        let levels = parse_level_list("2,4..6").unwrap();
        assert_eq!(levels, vec![2, 4, 5, 6]);
        let rats = parse_rational_list("2..4,1/2").unwrap();
        assert_eq!(rats.len(), 4);
        assert_eq!(rats[3], Rational::new(1.into(), 2.into()));
        assert!(parse_level_list("2,x").is_err());
    }

    #[test]
    fn points_and_targets_parse() {
        let pts = parse_points("(2,3); O").unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[1], CurvePoint::Infinity);
        assert!(parse_points("(2;3)").is_err());
        let targets = parse_targets("0; 1/2; inf").unwrap();
        assert_eq!(targets.len(), 3);
        assert!(matches!(targets[2], BranchValue::Infinity));
        assert!(parse_targets(" ; ").is_err());
    }
}
