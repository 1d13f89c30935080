//! Truncated Laurent series over Q and local expansions at the point at
//! infinity of a short Weierstrass curve.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::field::{rat, rat_i, Rational};
use crate::poly::QPoly;

/// Absolute precision used for series that are known exactly (polynomials,
/// constants). Large enough to dominate every finite truncation, small enough
/// that saturating arithmetic never wraps.
const EXACT: i64 = i64::MAX / 4;

/// Default truncation order for local expansions, in stored curve
/// coefficients; escalated by doubling when leading terms cancel.
pub const DEFAULT_ORDER: usize = 24;

/// Hard cap for truncation-order escalation.
pub const MAX_ORDER: usize = 1536;

/// A truncated Laurent series `sum c_e u^e`.
///
/// Coefficients with exponent in `[ord, ord + coeffs.len())` are stored,
/// exponents in `[ord + coeffs.len(), prec)` are known to be zero, and
/// exponents `>= prec` are unknown. The leading and trailing stored
/// coefficients are nonzero; a series with no known nonzero coefficient has
/// empty `coeffs` and `ord == prec`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    ord: i64,
    coeffs: Vec<Rational>,
    prec: i64,
}

impl Series {
    pub fn new(mut ord: i64, mut coeffs: Vec<Rational>, prec: i64) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        let lead = coeffs.iter().position(|c| !c.is_zero());
        match lead {
            Some(0) => {}
            Some(k) => {
                coeffs.drain(..k);
                ord += k as i64;
            }
            None => {
                coeffs.clear();
                ord = prec;
            }
        }
        assert!(coeffs.is_empty() || ord + coeffs.len() as i64 <= prec);
        Series { ord, coeffs, prec }
    }

    /// The zero series, known up to the given precision.
    pub fn zero(prec: i64) -> Self {
        Series { ord: prec, coeffs: vec![], prec }
    }

    /// An exactly known constant.
    pub fn constant(c: Rational) -> Self {
        Series::new(0, vec![c], EXACT)
    }

    /// A polynomial viewed as an exactly known series.
    pub fn from_poly(p: &QPoly) -> Self {
        Series::new(0, p.coeffs.clone(), EXACT)
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    /// Valuation, i.e. the exponent of the first nonzero term, if any nonzero
    /// term is visible at this precision.
    pub fn valuation(&self) -> Option<i64> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.ord)
        }
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.first()
    }

    /// True when every coefficient known at this precision is zero.
    pub fn is_zero_to_prec(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `u^e`; `e` must be below the precision.
    pub fn coeff(&self, e: i64) -> Rational {
        debug_assert!(e < self.prec);
        if e < self.ord || e - self.ord >= self.coeffs.len() as i64 {
            rat_i(0)
        } else {
            self.coeffs[(e - self.ord) as usize].clone()
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let prec = self.prec.min(other.prec);
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for s in [self, other] {
            if !s.coeffs.is_empty() {
                lo = lo.min(s.ord);
                hi = hi.max(s.ord + s.coeffs.len() as i64);
            }
        }
        hi = hi.min(prec);
        if hi <= lo {
            return Series::zero(prec);
        }
        let mut out = Vec::with_capacity((hi - lo) as usize);
        for e in lo..hi {
            out.push(self.coeff(e) + other.coeff(e));
        }
        Series::new(lo, out, prec)
    }

    pub fn neg(&self) -> Self {
        Series {
            ord: self.ord,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            prec: self.prec,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Series::zero(self.prec);
        }
        Series {
            ord: self.ord,
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
            prec: self.prec,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let prec = (self.prec.saturating_add(other.ord))
            .min(other.prec.saturating_add(self.ord));
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Series::zero(prec);
        }
        let ord = self.ord + other.ord;
        let full = self.coeffs.len() + other.coeffs.len() - 1;
        let keep = (prec.saturating_sub(ord)).min(full as i64).max(0) as usize;
        let mut out = vec![rat_i(0); keep];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i >= keep {
                break;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= keep {
                    break;
                }
                out[i + j] += a * b;
            }
        }
        Series::new(ord, out, prec)
    }

    /// Multiplicative inverse, computed to absolute precision at most
    /// `want_prec`. Panics when no nonzero term is visible.
    pub fn inv(&self, want_prec: i64) -> Self {
        assert!(!self.coeffs.is_empty(), "inverse of a series with no visible terms");
        let prec = want_prec.min(self.prec.saturating_sub(2 * self.ord));
        let n = (prec + self.ord).max(0) as usize;
        let lead = &self.coeffs[0];
        let mut out = vec![rat_i(0); n];
        if n > 0 {
            out[0] = rat_i(1) / lead;
            for k in 1..n {
                let mut acc = rat_i(0);
                for j in 1..=k.min(self.coeffs.len() - 1) {
                    acc += &self.coeffs[j] * &out[k - j];
                }
                out[k] = -acc / lead;
            }
        }
        Series::new(-self.ord, out, prec)
    }

    pub fn div(&self, other: &Self, want_prec: i64) -> Self {
        self.mul(&other.inv(want_prec))
    }

    /// Square root of `1 + self`, where `self` has positive valuation; the
    /// branch with constant term `1`.
    pub fn sqrt_one_plus(&self, want_prec: i64) -> Self {
        assert!(self.coeffs.is_empty() || self.ord >= 1);
        let prec = want_prec.min(self.prec);
        let n = prec.max(0) as usize;
        let mut out = vec![rat_i(0); n];
        if n > 0 {
            out[0] = rat_i(1);
            for k in 1..n {
                let mut acc = self.coeff(k as i64);
                for j in 1..k {
                    acc -= &out[j] * &out[k - j];
                }
                out[k] = acc * rat(1, 2);
            }
        }
        Series::new(0, out, prec)
    }
}

/// Evaluate a polynomial at a series by Horner's rule.
pub fn compose(p: &QPoly, s: &Series) -> Series {
    let mut acc = Series::zero(EXACT);
    for c in p.coeffs.iter().rev() {
        acc = acc.mul(s).add(&Series::constant(c.clone()));
    }
    acc
}

/// Laurent expansions of the coordinate functions at the point at infinity
/// of `y^2 = x^3 + Ax + B`, in the local parameter `u` with `x = u^-2 + O(1)`
/// and `y = u^-3 (1 + O(u^2))`.
pub struct LocalExpansion {
    pub x: Series,
    pub y: Series,
    pub order: usize,
}

impl LocalExpansion {
    /// Expand to the given truncation order (number of curve coefficients
    /// kept; the series for `x` is then correct below `u^(2*order)`).
    pub fn new(a: &Rational, b: &Rational, order: usize) -> Self {
        let k = order.max(3);
        // x = u^-2 + sum_{m>=2} c_m u^(2m-2), with the c_m determined by the
        // curve equation.
        let mut c = vec![rat_i(0); k + 1];
        c[2] = -a * rat(1, 5);
        c[3] = -b * rat(1, 7);
        for m in 4..=k {
            let mut acc = rat_i(0);
            for j in 2..=(m - 2) {
                acc += &c[j] * &c[m - j];
            }
            c[m] = acc * rat(3, (2 * m as i64 + 1) * (m as i64 - 3));
        }
        let xprec = 2 * k as i64;
        let yprec = 2 * k as i64 - 1;
        let mut xc = vec![rat_i(0); (xprec + 2) as usize];
        let mut yc = vec![rat_i(0); (yprec + 3) as usize];
        xc[0] = rat_i(1);
        yc[0] = rat_i(1);
        for m in 2..=k {
            xc[2 * m] = c[m].clone();
            yc[2 * m] = -rat_i(m as i64 - 1) * &c[m];
        }
        LocalExpansion {
            x: Series::new(-2, xc, xprec),
            y: Series::new(-3, yc, yprec),
            order: k,
        }
    }

    /// Series of `p(x(u))`.
    pub fn of_poly(&self, p: &QPoly) -> Series {
        compose(p, &self.x)
    }

    /// Numerator and denominator series of `(a(x) + b(x) y) / c(x)`.
    pub fn of_fraction(&self, a: &QPoly, b: &QPoly, c: &QPoly) -> (Series, Series) {
        let num = self.of_poly(a).add(&self.of_poly(b).mul(&self.y));
        (num, self.of_poly(c))
    }
}

/// Run a computation at increasing truncation orders until it reports a
/// determinate answer.
pub fn with_escalation<T>(mut f: impl FnMut(usize) -> Option<T>) -> Result<T> {
    let mut order = DEFAULT_ORDER;
    while order <= MAX_ORDER {
        if let Some(v) = f(order) {
            return Ok(v);
        }
        order *= 2;
    }
    Err(Error::internal(
        "local expansion did not stabilize below the truncation cap",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(coeffs: &[i64]) -> QPoly {
        QPoly::from_i64(coeffs)
    }

    #[test]
    fn expansion_satisfies_curve_equation() {
        for (a, b) in [(-1i64, 0i64), (0, 1), (2, 3), (-7, 10)] {
            let exp = LocalExpansion::new(&rat_i(a), &rat_i(b), 12);
            let rhs = compose(&p(&[b, a, 0, 1]), &exp.x);
            let lhs = exp.y.mul(&exp.y);
            let diff = lhs.sub(&rhs);
            assert!(diff.is_zero_to_prec(), "A={a} B={b}: {diff:?}");
            assert!(diff.prec() >= 16);
        }
    }

    #[test]
    fn coordinate_valuations() {
        let exp = LocalExpansion::new(&rat_i(-1), &rat_i(0), DEFAULT_ORDER);
        assert_eq!(exp.x.valuation(), Some(-2));
        assert_eq!(exp.x.leading(), Some(&rat_i(1)));
        assert_eq!(exp.y.valuation(), Some(-3));
        assert_eq!(exp.y.leading(), Some(&rat_i(1)));
        // x/y is a uniformizer.
        let t = exp.x.div(&exp.y, 8);
        assert_eq!(t.valuation(), Some(1));
        assert_eq!(t.leading(), Some(&rat_i(1)));
    }

    #[test]
    fn arithmetic_and_precision() {
        let s = Series::new(-2, vec![rat_i(1), rat_i(0), rat_i(3)], 4);
        let t = s.mul(&s);
        assert_eq!(t.valuation(), Some(-4));
        assert_eq!(t.coeff(-2), rat_i(6));
        assert_eq!(t.prec(), 2);
        let u = s.inv(10);
        assert_eq!(u.valuation(), Some(2));
        assert_eq!(s.mul(&u).coeff(0), rat_i(1));
        assert!(s.mul(&u).sub(&Series::constant(rat_i(1))).is_zero_to_prec());
        let z = s.sub(&s);
        assert!(z.is_zero_to_prec());
        assert_eq!(z.prec(), 4);
    }

    #[test]
    fn sqrt_squares_back() {
        // 1 + 2u + 5u^3
        let w = Series::new(1, vec![rat_i(2), rat_i(0), rat_i(5)], 12);
        let s = w.sqrt_one_plus(12);
        let back = s.mul(&s).sub(&Series::constant(rat_i(1))).sub(&w);
        assert!(back.is_zero_to_prec());
        assert_eq!(s.coeff(1), rat_i(1));
    }

    #[test]
    fn escalation_retries_and_caps() {
        let got = with_escalation(|order| if order >= 96 { Some(order) } else { None });
        assert_eq!(got.unwrap(), 96);
        let never: Result<()> = with_escalation(|_| None);
        assert!(never.is_err());
    }
}
