//! The rational function field Q(t), mainly exercised as a coefficient
//! field for bivariate resultants.  Fractions are kept reduced with a monic
//! denominator.

use crate::field::{Field, Rationals};
use crate::poly::{Poly, QPoly};

#[derive(Clone, Debug, PartialEq)]
pub struct RatFunc {
    pub num: QPoly,
    pub den: QPoly,
}

impl RatFunc {
    pub fn from_poly(p: QPoly) -> Self {
        RatFunc { num: p, den: QPoly::one(Rationals) }
    }

    pub fn new(num: QPoly, den: QPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator in Q(t)");
        if num.is_zero() {
            return RatFunc { num, den: QPoly::one(Rationals) };
        }
        let g = num.fast_gcd(&den);
        let mut num = num.exact_div(&g).unwrap();
        let mut den = den.exact_div(&g).unwrap();
        let lc = den.lc();
        if !Rationals.is_one(&lc) {
            let inv = Rationals.inv(&lc);
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        RatFunc { num, den }
    }

    pub fn as_poly(&self) -> Option<&QPoly> {
        if self.den.is_constant() {
            Some(&self.num)
        } else {
            None
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RationalFunctions;

impl Field for RationalFunctions {
    type Elem = RatFunc;

    fn zero(&self) -> RatFunc {
        RatFunc::from_poly(QPoly::zero(Rationals))
    }
    fn one(&self) -> RatFunc {
        RatFunc::from_poly(QPoly::one(Rationals))
    }
    fn is_zero(&self, a: &RatFunc) -> bool {
        a.num.is_zero()
    }
    fn add(&self, a: &RatFunc, b: &RatFunc) -> RatFunc {
        RatFunc::new(a.num.mul(&b.den).add(&b.num.mul(&a.den)), a.den.mul(&b.den))
    }
    fn sub(&self, a: &RatFunc, b: &RatFunc) -> RatFunc {
        RatFunc::new(a.num.mul(&b.den).sub(&b.num.mul(&a.den)), a.den.mul(&b.den))
    }
    fn mul(&self, a: &RatFunc, b: &RatFunc) -> RatFunc {
        RatFunc::new(a.num.mul(&b.num), a.den.mul(&b.den))
    }
    fn neg(&self, a: &RatFunc) -> RatFunc {
        RatFunc { num: a.num.neg(), den: a.den.clone() }
    }
    fn inv(&self, a: &RatFunc) -> RatFunc {
        assert!(!a.num.is_zero(), "inverse of zero in Q(t)");
        RatFunc::new(a.den.clone(), a.num.clone())
    }
    fn from_i64(&self, n: i64) -> RatFunc {
        RatFunc::from_poly(QPoly::from_i64(&[n]))
    }
}

/// Lift a rational polynomial in x to a polynomial whose coefficients are
/// constants of Q(t).
pub fn lift_to_ratfunc(p: &QPoly) -> Poly<RationalFunctions> {
    p.map_coeffs(RationalFunctions, |c| {
        RatFunc::from_poly(Poly::constant(Rationals, c.clone()))
    })
}

/// The constant t of Q(t).
pub fn t_elem() -> RatFunc {
    RatFunc::from_poly(QPoly::from_i64(&[0, 1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_keeps_monic_denominator() {
        let f = RationalFunctions;
        // (t^2-1)/(2t-2) = (t+1)/2
        let a = RatFunc::new(QPoly::from_i64(&[-1, 0, 1]), QPoly::from_i64(&[-2, 2]));
        assert_eq!(a.num, QPoly::new(Rationals, vec![crate::field::rat(1, 2), crate::field::rat(1, 2)]));
        assert_eq!(a.den, QPoly::one(Rationals));
        assert_eq!(f.mul(&a, &f.inv(&a)), f.one());
    }

    #[test]
    fn bivariate_resultant_through_ratfunc() {
        // Res_x(x^2 - t, x - 3) = 9 - t as an element of Q(t)
        let f = RationalFunctions;
        let t = t_elem();
        let x2 = Poly::new(f, vec![f.neg(&t), f.zero(), f.one()]);
        let lin = Poly::new(f, vec![f.from_i64(-3), f.one()]);
        let r = x2.resultant(&lin);
        assert_eq!(r, RatFunc::from_poly(QPoly::from_i64(&[9, -1])));
    }
}
