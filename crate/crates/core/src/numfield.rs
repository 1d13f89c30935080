//! Number fields Q[y]/(m) with exact arithmetic.
//!
//! Elements are rational polynomials reduced mod the (monic, irreducible)
//! defining polynomial.  The field handle is a cheap `Arc` wrapper so
//! polynomials over a number field clone freely.

use crate::error::{Error, Result};
use crate::factor::is_irreducible;
use crate::field::{Field, Rational, Rationals};
use crate::poly::{Poly, QPoly};
use std::fmt;
use std::sync::Arc;

#[derive(Debug)]
pub struct NumberFieldData {
    pub modulus: QPoly,
    pub degree: usize,
}

#[derive(Clone, Debug)]
pub struct NumberField(pub Arc<NumberFieldData>);

impl PartialEq for NumberField {
    fn eq(&self, other: &Self) -> bool {
        self.0.modulus == other.0.modulus
    }
}

impl NumberField {
    /// Build Q[y]/(modulus).  The modulus must be irreducible over Q; it is
    /// normalized to monic form here.
    pub fn new(modulus: &QPoly) -> Result<Self> {
        let m = modulus.monic();
        if m.degree().map_or(true, |d| d == 0) {
            return Err(Error::invalid("number field modulus must be nonconstant"));
        }
        if !is_irreducible(&m) {
            return Err(Error::invalid(format!(
                "number field modulus is reducible: {}",
                m.to_string_var("y")
            )));
        }
        let degree = m.deg();
        Ok(NumberField(Arc::new(NumberFieldData { modulus: m, degree })))
    }

    pub fn degree(&self) -> usize {
        self.0.degree
    }

    pub fn modulus(&self) -> &QPoly {
        &self.0.modulus
    }

    /// The class of y, a root of the modulus.
    pub fn gen(&self) -> QPoly {
        if self.degree() == 1 {
            // y = -c0 for modulus y + c0
            return Poly::constant(Rationals, -self.0.modulus.coeff(0));
        }
        Poly::monomial(Rationals, Rational::from_integer(1.into()), 1)
    }

    pub fn embed_rational(&self, q: &Rational) -> QPoly {
        Poly::constant(Rationals, q.clone())
    }

    fn reduce(&self, p: QPoly) -> QPoly {
        if p.degree().map_or(true, |d| d < self.degree()) {
            p
        } else {
            p.div_rem(&self.0.modulus).1
        }
    }

    /// Lift a rational polynomial in x to a polynomial over this field.
    pub fn lift_poly(&self, p: &QPoly) -> Poly<NumberField> {
        p.map_coeffs(self.clone(), |c| self.embed_rational(c))
    }
}

impl Field for NumberField {
    type Elem = QPoly;

    fn zero(&self) -> QPoly {
        Poly::zero(Rationals)
    }
    fn one(&self) -> QPoly {
        Poly::one(Rationals)
    }
    fn is_zero(&self, a: &QPoly) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &QPoly, b: &QPoly) -> QPoly {
        a.add(b)
    }
    fn sub(&self, a: &QPoly, b: &QPoly) -> QPoly {
        a.sub(b)
    }
    fn mul(&self, a: &QPoly, b: &QPoly) -> QPoly {
        self.reduce(a.mul(b))
    }
    fn neg(&self, a: &QPoly) -> QPoly {
        a.neg()
    }
    fn inv(&self, a: &QPoly) -> QPoly {
        assert!(!a.is_zero(), "inverse of zero in number field");
        let (g, s, _) = a.ext_gcd(&self.0.modulus);
        assert!(g.deg() == 0, "modulus not irreducible");
        self.reduce(s)
    }
    fn from_i64(&self, n: i64) -> QPoly {
        Poly::constant(Rationals, Rational::from_integer(n.into()))
    }
}

impl fmt::Display for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q[y]/({})", self.0.modulus.to_string_var("y"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{rat, rat_i};

    #[test]
    fn quadratic_field_arithmetic() {
        // Q(sqrt 2)
        let k = NumberField::new(&QPoly::from_i64(&[-2, 0, 1])).unwrap();
        let r = k.gen();
        assert_eq!(k.mul(&r, &r), k.from_i64(2));
        let inv = k.inv(&r);
        // 1/sqrt2 = sqrt2 / 2
        assert_eq!(inv, r.scale(&rat(1, 2)));
        assert_eq!(k.mul(&r, &inv), k.one());
    }

    #[test]
    fn rejects_reducible_modulus() {
        assert!(NumberField::new(&QPoly::from_i64(&[-1, 0, 1])).is_err());
        assert!(NumberField::new(&QPoly::from_i64(&[3])).is_err());
    }

    #[test]
    fn cubic_field_inverse() {
        // Q[y]/(y^3 + 4): arises from 3-torsion x-coordinates of y^2=x^3+1
        let k = NumberField::new(&QPoly::from_i64(&[4, 0, 0, 1])).unwrap();
        let a = k.add(&k.gen(), &k.from_i64(1)); // y + 1
        let prod = k.mul(&a, &k.inv(&a));
        assert_eq!(prod, k.one());
    }

    #[test]
    fn degree_one_field_collapses_to_q() {
        let k = NumberField::new(&QPoly::from_i64(&[-7, 2])).unwrap();
        // modulus 2y - 7 -> monic y - 7/2, generator evaluates to 7/2
        assert_eq!(k.gen(), Poly::constant(Rationals, rat(7, 2)));
        assert_eq!(k.degree(), 1);
        let _ = rat_i(0);
    }

    #[test]
    fn gcd_over_number_field() {
        // over Q(sqrt 2): gcd(x^2 - 2, x - sqrt2) = x - sqrt2
        let k = NumberField::new(&QPoly::from_i64(&[-2, 0, 1])).unwrap();
        let x2 = k.lift_poly(&QPoly::from_i64(&[-2, 0, 1]));
        let lin = Poly::new(k.clone(), vec![k.neg(&k.gen()), k.one()]);
        let g = x2.gcd(&lin);
        assert_eq!(g, lin);
        // and x^2 - 2 splits: the cofactor is x + sqrt2
        let co = x2.exact_div(&g).unwrap();
        assert_eq!(co, Poly::new(k.clone(), vec![k.gen(), k.one()]));
    }
}
