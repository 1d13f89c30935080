//! Minimal bivariate support: polynomials in x whose coefficients live in
//! Q[t], stored t-major (a vector of x-polynomials indexed by the power of
//! t).  Resultants and discriminants with respect to x are computed by
//! specializing t at enough good nodes and interpolating, which keeps the
//! hot paths away from remainder sequences over Q(t).

use crate::field::{rat_i, Rational, Rationals};
use crate::poly::{interpolate, Poly, QPoly};
use num_traits::Zero;

/// sum_k tcoeffs[k](x) * t^k, with trailing zero entries trimmed.
#[derive(Clone, Debug, PartialEq)]
pub struct BiPoly {
    pub tcoeffs: Vec<QPoly>,
}

impl BiPoly {
    pub fn new(mut tcoeffs: Vec<QPoly>) -> Self {
        while tcoeffs.last().map_or(false, |p| p.is_zero()) {
            tcoeffs.pop();
        }
        BiPoly { tcoeffs }
    }

    pub fn from_x_poly(p: QPoly) -> Self {
        BiPoly::new(vec![p])
    }

    pub fn is_zero(&self) -> bool {
        self.tcoeffs.is_empty()
    }

    pub fn deg_t(&self) -> usize {
        self.tcoeffs.len().saturating_sub(1)
    }

    pub fn deg_x(&self) -> usize {
        self.tcoeffs.iter().filter_map(|p| p.degree()).max().unwrap_or(0)
    }

    /// Coefficient of x^deg_x as a polynomial in t.
    pub fn lc_x(&self) -> QPoly {
        let dx = self.deg_x();
        let coeffs: Vec<Rational> = self.tcoeffs.iter().map(|p| p.coeff(dx)).collect();
        Poly::new(Rationals, coeffs)
    }

    /// Specialize t to a rational value.
    pub fn eval_t(&self, t0: &Rational) -> QPoly {
        let mut acc = QPoly::zero(Rationals);
        for p in self.tcoeffs.iter().rev() {
            acc = acc.scale(t0).add(p);
        }
        acc
    }

    /// The x-content: gcd over Q[x] of the t-coefficients.  Dividing it out
    /// removes the x-factors that vanish for every t.
    pub fn x_content(&self) -> QPoly {
        let mut g = QPoly::zero(Rationals);
        for p in &self.tcoeffs {
            g = g.fast_gcd(p);
            if g.degree() == Some(0) {
                break;
            }
        }
        g
    }

    pub fn div_x_poly(&self, d: &QPoly) -> BiPoly {
        BiPoly::new(
            self.tcoeffs
                .iter()
                .map(|p| p.exact_div(d).expect("x-content must divide"))
                .collect(),
        )
    }

    /// Resultant in x against a t-free polynomial, as a polynomial in t,
    /// computed by evaluation and interpolation at good nodes (nodes where
    /// the x-degree would drop are skipped).
    pub fn resultant_x(&self, s: &QPoly) -> QPoly {
        assert!(!self.is_zero() && !s.is_zero());
        let bound = s.deg() * self.deg_t() + 1;
        let lc = self.lc_x();
        let mut pts = Vec::with_capacity(bound);
        let mut k: i64 = 0;
        while pts.len() < bound {
            let node = rat_i(k);
            k = if k > 0 { -k } else { -k + 1 };
            if lc.eval(&node).is_zero() {
                continue;
            }
            let spec = self.eval_t(&node);
            let val = s.resultant(&spec);
            pts.push((node, val));
        }
        interpolate(&Rationals, &pts)
    }

    /// Discriminant with respect to x, as a polynomial in t, by evaluation
    /// and interpolation.
    pub fn disc_x(&self) -> QPoly {
        let dx = self.deg_x();
        assert!(dx >= 1);
        let bound = self.deg_t() * (2 * dx - 1) + 1;
        let lc = self.lc_x();
        let mut pts = Vec::with_capacity(bound);
        let mut k: i64 = 0;
        while pts.len() < bound {
            let node = rat_i(k);
            k = if k > 0 { -k } else { -k + 1 };
            if lc.eval(&node).is_zero() {
                continue;
            }
            let spec = self.eval_t(&node);
            let dspec = spec.derivative();
            let val = if dspec.is_zero() {
                rat_i(0)
            } else {
                spec.discriminant()
            };
            pts.push((node, val));
        }
        interpolate(&Rationals, &pts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> QPoly {
        QPoly::from_i64(c)
    }

    #[test]
    fn content_and_division() {
        // x*(x*t^2 - 2t - x^2) from the fiber polynomial of (y+1)/x on
        // y^2 = x^3 + 1: t-coefficients are (-x^3, -2x, x^2)
        let phi = BiPoly::new(vec![p(&[0, 0, 0, -1]), p(&[0, -2]), p(&[0, 0, 1])]);
        let d = phi.x_content();
        assert_eq!(d, p(&[0, 1]));
        let reduced = phi.div_x_poly(&d);
        assert_eq!(reduced.deg_x(), 2);
        // t-coefficients become (-x^2, -2, x); at t=1 this is -x^2 + x - 2
        assert_eq!(reduced.eval_t(&rat_i(1)), p(&[-2, 1, -1]));
    }

    #[test]
    fn resultant_matches_direct_product() {
        // Res_x(x^2 - 1, (x - t)^2) = ((1-t)(−1−t))^2 = (t^2-1)^2
        let s = p(&[-1, 0, 1]);
        let phi = BiPoly::new(vec![p(&[0, 0, 1]), p(&[0, -2]), p(&[1])]);
        let r = phi.resultant_x(&s);
        let expect = p(&[-1, 0, 1]).mul(&p(&[-1, 0, 1]));
        assert_eq!(r, expect);
    }

    #[test]
    fn disc_detects_double_roots() {
        // Phi = (x - t)(x - 2t) = x^2 - 3t x + 2t^2: disc = 9t^2 - 8t^2 = t^2
        let phi = BiPoly::new(vec![p(&[0, 0, 1]), p(&[0, -3]), p(&[2])]);
        assert_eq!(phi.disc_x(), p(&[0, 0, 1]));
    }
}
