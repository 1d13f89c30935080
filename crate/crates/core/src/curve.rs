//! Elliptic curves `y^2 = x^3 + Ax + B` over Q, rational maps to the
//! projective line in the canonical form `(a(x) + b(x)y) / c(x)`, map
//! degrees computed by two independent routes, local data at the point at
//! infinity O, and division polynomials.

use num_traits::Zero;

use crate::bipoly::BiPoly;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::factor::factor_over_q;
use crate::field::{rat, rat_i, Rational, Rationals};
use crate::poly::QPoly;
use crate::series::{with_escalation, LocalExpansion};

#[derive(Clone, Debug, PartialEq)]
pub struct EllipticCurve {
    pub a: Rational,
    pub b: Rational,
}

impl EllipticCurve {
    pub fn new(a: Rational, b: Rational) -> Result<Self> {
        let e = EllipticCurve { a, b };
        if e.discriminant().is_zero() {
            return Err(Error::invalid(format!(
                "singular curve: 4A^3 + 27B^2 = 0 for A={}, B={}",
                e.a, e.b
            )));
        }
        Ok(e)
    }

    pub fn discriminant(&self) -> Rational {
        -rat_i(16) * (rat_i(4) * &self.a * &self.a * &self.a + rat_i(27) * &self.b * &self.b)
    }

    /// The cubic `x^3 + Ax + B`.
    pub fn f_poly(&self) -> QPoly {
        QPoly::new(
            crate::field::Rationals,
            vec![self.b.clone(), self.a.clone(), rat_i(0), rat_i(1)],
        )
    }

    /// Short Weierstrass model of the Legendre curve `y^2 = x(x-1)(x-L)`,
    /// together with the shift `s` such that the Legendre x-coordinate is
    /// `x + s` on the returned model.
    pub fn legendre(lambda: &Rational) -> Result<(Self, Rational)> {
        if lambda.is_zero() || lambda == &rat_i(1) {
            return Err(Error::invalid(format!("singular Legendre parameter {lambda}")));
        }
        let s = (rat_i(1) + lambda) * rat(1, 3);
        // (x+s)(x+s-1)(x+s-L) expanded in x has no quadratic term.
        let r1 = -&s;
        let r2 = rat_i(1) - &s;
        let r3 = lambda - &s;
        let e1 = &r1 + &r2 + &r3;
        let e2 = &r1 * &r2 + &r1 * &r3 + &r2 * &r3;
        let e3 = &r1 * &r2 * &r3;
        debug_assert!(e1.is_zero());
        let _ = e1;
        let curve = EllipticCurve::new(e2, -e3)?;
        Ok((curve, s))
    }
}

/// Function-field element `(a(x) + b(x)y) / c(x)` used while evaluating map
/// expressions; kept reduced with monic denominator.
#[derive(Clone, Debug)]
struct FuncElem {
    a: QPoly,
    b: QPoly,
    c: QPoly,
}

impl FuncElem {
    fn reduce(mut self) -> Self {
        if self.a.is_zero() && self.b.is_zero() {
            return FuncElem { a: QPoly::from_i64(&[0]), b: QPoly::from_i64(&[0]), c: QPoly::from_i64(&[1]) };
        }
        let g = self.a.fast_gcd(&self.b).fast_gcd(&self.c);
        if !g.is_constant() {
            self.a = self.a.exact_div(&g).unwrap();
            self.b = self.b.exact_div(&g).unwrap();
            self.c = self.c.exact_div(&g).unwrap();
        }
        let lead = self.c.lc();
        let inv = rat_i(1) / &lead;
        FuncElem {
            a: self.a.scale(&inv),
            b: self.b.scale(&inv),
            c: self.c.monic(),
        }
    }

    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn constant(r: Rational) -> Self {
        FuncElem {
            a: QPoly::constant(crate::field::Rationals, r),
            b: QPoly::from_i64(&[0]),
            c: QPoly::from_i64(&[1]),
        }
    }

    fn add(&self, other: &Self) -> Self {
        FuncElem {
            a: self.a.mul(&other.c).add(&other.a.mul(&self.c)),
            b: self.b.mul(&other.c).add(&other.b.mul(&self.c)),
            c: self.c.mul(&other.c),
        }
        .reduce()
    }

    fn neg(&self) -> Self {
        FuncElem { a: self.a.neg(), b: self.b.neg(), c: self.c.clone() }
    }

    fn mul(&self, other: &Self, f: &QPoly) -> Self {
        // (a1 + b1 y)(a2 + b2 y) = a1 a2 + b1 b2 f + (a1 b2 + a2 b1) y
        FuncElem {
            a: self.a.mul(&other.a).add(&self.b.mul(&other.b).mul(f)),
            b: self.a.mul(&other.b).add(&other.a.mul(&self.b)),
            c: self.c.mul(&other.c),
        }
        .reduce()
    }

    fn inv(&self, f: &QPoly) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::invalid("division by the zero function"));
        }
        // 1/((a+by)/c) = c(a-by) / (a^2 - b^2 f)
        let denom = self.a.mul(&self.a).sub(&self.b.mul(&self.b).mul(f));
        debug_assert!(!denom.is_zero());
        FuncElem {
            a: self.c.mul(&self.a),
            b: self.c.mul(&self.b).neg(),
            c: denom,
        }
        .normalize_sign()
    }

    fn normalize_sign(self) -> Result<Self> {
        Ok(self.reduce())
    }

    fn pow(&self, e: i64, f: &QPoly) -> Result<Self> {
        if e < 0 {
            return self.inv(f)?.pow(-e, f);
        }
        let mut acc = FuncElem::constant(rat_i(1));
        let mut base = self.clone();
        let mut e = e as u64;
        loop {
            if e & 1 == 1 {
                acc = acc.mul(&base, f);
            }
            e >>= 1;
            if e == 0 {
                return Ok(acc);
            }
            base = base.mul(&base, f);
        }
    }
}

fn eval_expr(expr: &Expr, f: &QPoly, xshift: &Rational) -> Result<FuncElem> {
    Ok(match expr {
        Expr::X => FuncElem {
            a: QPoly::new(crate::field::Rationals, vec![xshift.clone(), rat_i(1)]),
            b: QPoly::from_i64(&[0]),
            c: QPoly::from_i64(&[1]),
        },
        Expr::Y => FuncElem {
            a: QPoly::from_i64(&[0]),
            b: QPoly::from_i64(&[1]),
            c: QPoly::from_i64(&[1]),
        },
        Expr::Const(r) => FuncElem::constant(r.clone()),
        Expr::Neg(e) => eval_expr(e, f, xshift)?.neg(),
        Expr::Add(l, r) => eval_expr(l, f, xshift)?.add(&eval_expr(r, f, xshift)?),
        Expr::Sub(l, r) => eval_expr(l, f, xshift)?.add(&eval_expr(r, f, xshift)?.neg()),
        Expr::Mul(l, r) => eval_expr(l, f, xshift)?.mul(&eval_expr(r, f, xshift)?, f),
        Expr::Div(l, r) => {
            let rhs = eval_expr(r, f, xshift)?.inv(f)?;
            eval_expr(l, f, xshift)?.mul(&rhs, f)
        }
        Expr::Pow(e, k) => eval_expr(e, f, xshift)?.pow(*k, f)?,
    })
}

/// A nonconstant map `g = (a(x) + b(x)y)/c(x) : E -> P^1` with `c` monic and
/// `gcd(a, b, c) = 1`. The degree is computed both from the polar divisor and
/// from the generic fiber; construction fails if the two disagree.
#[derive(Clone, Debug)]
pub struct RationalMap {
    pub curve: EllipticCurve,
    pub a: QPoly,
    pub b: QPoly,
    pub c: QPoly,
    degree: usize,
    v_o: i64,
    o_value: Option<Rational>,
    fiber: BiPoly,
    fiber_content: QPoly,
}

impl RationalMap {
    pub fn new(curve: EllipticCurve, a: QPoly, b: QPoly, c: QPoly) -> Result<Self> {
        if c.is_zero() {
            return Err(Error::invalid("division by the zero function"));
        }
        let elem = FuncElem { a, b, c }.reduce();
        let (a, b, c) = (elem.a, elem.b, elem.c);
        if b.is_zero() && a.is_constant() && c.is_constant() {
            return Err(Error::invalid("constant map"));
        }
        let (v_o, o_value) = o_data(&curve, &a, &b, &c)?;
        let (fiber, fiber_content) = fiber_polynomial(&curve, &a, &b, &c);
        let d_fiber = fiber.deg_x();
        let d_polar = polar_degree(&curve, &a, &b, &c, v_o);
        if d_fiber != d_polar {
            return Err(Error::internal(format!(
                "degree mismatch: polar divisor gives {d_polar}, generic fiber gives {d_fiber}"
            )));
        }
        if d_polar < 2 {
            return Err(Error::internal(format!(
                "computed degree {d_polar} < 2 for a nonconstant map"
            )));
        }
        Ok(RationalMap { curve, a, b, c, degree: d_polar, v_o, o_value, fiber, fiber_content })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Valuation of the map at the point at infinity O.
    pub fn valuation_at_o(&self) -> i64 {
        self.v_o
    }

    /// Value of the map at O; `None` means the value is infinity.
    pub fn value_at_o(&self) -> Option<&Rational> {
        self.o_value.as_ref()
    }

    /// Ramification index of the map at O over its value there.
    pub fn ramification_index_at_o(&self) -> Result<usize> {
        if self.v_o != 0 {
            return Ok(self.v_o.unsigned_abs() as usize);
        }
        let kappa = self.o_value.clone().expect("finite value at O when v_O = 0");
        let (curve, a, b, c) = (&self.curve, &self.a, &self.b, &self.c);
        with_escalation(|order| {
            let exp = LocalExpansion::new(&curve.a, &curve.b, order);
            let (num, den) = exp.of_fraction(a, b, c);
            let vd = den.valuation()?;
            let shifted = num.sub(&den.scale(&kappa));
            let vn = shifted.valuation()?;
            Some((vn - vd) as usize)
        })
    }

    /// The generic-fiber polynomial: `(a - tc)^2 - b^2 f` with its content in
    /// x removed; its x-degree equals the map degree.
    pub fn fiber_polynomial(&self) -> &BiPoly {
        &self.fiber
    }

    /// The x-content that was removed from `(a - tc)^2 - b^2 f`; its roots are
    /// the x-coordinates where numerator and denominator norms vanish together.
    pub fn fiber_content(&self) -> &QPoly {
        &self.fiber_content
    }

    pub fn is_even(&self) -> bool {
        self.b.is_zero()
    }

    /// The map composed with the hyperelliptic involution `y -> -y`.
    pub fn negated(&self) -> Result<RationalMap> {
        RationalMap::new(self.curve.clone(), self.a.clone(), self.b.neg(), self.c.clone())
    }

    /// The reciprocal map `1/g`, with poles and zeros exchanged.
    pub fn reciprocal(&self) -> Result<RationalMap> {
        let f = self.curve.f_poly();
        let den = self.a.mul(&self.a).sub(&self.b.mul(&self.b).mul(&f));
        RationalMap::new(self.curve.clone(), self.c.mul(&self.a), self.c.mul(&self.b).neg(), den)
    }

    /// Degree as the number of poles counted with multiplicity.
    pub fn degree_by_polar_divisor(&self) -> usize {
        polar_degree(&self.curve, &self.a, &self.b, &self.c, self.v_o)
    }

    /// Degree as the number of generic preimages counted with multiplicity.
    pub fn degree_by_generic_fiber(&self) -> usize {
        fiber_polynomial(&self.curve, &self.a, &self.b, &self.c).0.deg_x()
    }
}

/// Build an expression into a canonical map on the curve.
pub fn canonicalize(expr: &Expr, curve: &EllipticCurve) -> Result<RationalMap> {
    canonicalize_shifted(expr, curve, &rat_i(0))
}

/// Same, with the x token standing for `x + xshift` on the given model (used
/// for curves supplied in Legendre form).
pub fn canonicalize_shifted(
    expr: &Expr,
    curve: &EllipticCurve,
    xshift: &Rational,
) -> Result<RationalMap> {
    let f = curve.f_poly();
    let elem = eval_expr(expr, &f, xshift)?;
    RationalMap::new(curve.clone(), elem.a, elem.b, elem.c)
}

/// Valuation and value at O, from the local expansion with truncation-order
/// escalation.
fn o_data(curve: &EllipticCurve, a: &QPoly, b: &QPoly, c: &QPoly) -> Result<(i64, Option<Rational>)> {
    let got = with_escalation(|order| {
        let exp = LocalExpansion::new(&curve.a, &curve.b, order);
        let (num, den) = exp.of_fraction(a, b, c);
        let vn = num.valuation()?;
        let vd = den.valuation()?;
        let v = vn - vd;
        let value = if v > 0 {
            Some(rat_i(0))
        } else if v < 0 {
            None
        } else {
            Some(num.leading().unwrap() / den.leading().unwrap())
        };
        Some((v, value))
    })?;
    // Exponent-parity cross-check: x-terms contribute even exponents and
    // y-terms odd ones, so the valuation is a minimum of degrees.
    debug_assert_eq!(got.0, {
        let va = a.degree().map(|d| -2 * d as i64);
        let vb = b.degree().map(|d| -2 * d as i64 - 3);
        va.into_iter().chain(vb).min().unwrap() - c.degree().map(|d| -2 * d as i64).unwrap()
    });
    Ok(got)
}

/// `(a - tc)^2 - b^2 f` with the x-content removed, together with that content.
fn fiber_polynomial(curve: &EllipticCurve, a: &QPoly, b: &QPoly, c: &QPoly) -> (BiPoly, QPoly) {
    let f = curve.f_poly();
    let t0 = a.mul(a).sub(&b.mul(b).mul(&f));
    let t1 = a.mul(c).scale(&rat_i(-2));
    let t2 = c.mul(c);
    let phi = BiPoly::new(vec![t0, t1, t2]);
    let content = phi.x_content();
    if content.is_constant() {
        (phi, QPoly::one(Rationals))
    } else {
        (phi.div_x_poly(&content), content)
    }
}

/// Multiplicity of the irreducible factor `q` in `p`.
fn mult_of(p: &QPoly, q: &QPoly) -> usize {
    let mut m = 0;
    let mut cur = p.clone();
    while let Some(next) = cur.exact_div(q) {
        cur = next;
        m += 1;
    }
    m
}

/// Number of poles with multiplicity: places above the roots of `c`, plus O.
///
/// Above a root x0 of an irreducible factor q of c there are two places when
/// f(x0) != 0 and one (doubly ramified over x) when f(x0) = 0. The valuations
/// of `a + by` at those places follow from multiplicities of q alone: with
/// k = min(mult_q a, mult_q b), the two places see `{k, mult_q(a^2 - b^2 f) - k}`
/// (at most one of the residual factors can vanish at each place), and the
/// ramified place sees `min(2 mult_q a, 2 mult_q b + 1)` since the even and
/// odd parts cannot cancel.
fn polar_degree(curve: &EllipticCurve, a: &QPoly, b: &QPoly, c: &QPoly, v_o: i64) -> usize {
    let f = curve.f_poly();
    let mut total = v_o.min(0).unsigned_abs() as usize;
    if c.is_constant() {
        return total;
    }
    for (q, m_c) in factor_over_q(c).factors {
        let deg_q = q.deg();
        let ma = (!a.is_zero()).then(|| mult_of(a, &q));
        let mb = (!b.is_zero()).then(|| mult_of(b, &q));
        if f.exact_div(&q).is_some() {
            let vn = ma
                .map(|m| 2 * m as i64)
                .into_iter()
                .chain(mb.map(|m| 2 * m as i64 + 1))
                .min()
                .unwrap();
            total += deg_q * (2 * m_c as i64 - vn).max(0) as usize;
        } else {
            let k = ma.into_iter().chain(mb).min().unwrap();
            let norm = a.mul(a).sub(&b.mul(b).mul(&f));
            let s = mult_of(&norm, &q) - 2 * k;
            let (v1, v2) = (k as i64, (k + s) as i64);
            total += deg_q
                * ((m_c as i64 - v1).max(0) + (m_c as i64 - v2).max(0)) as usize;
        }
    }
    total
}

/// Division polynomials and torsion polynomials for one curve, up to a level
/// bound fixed at construction.
pub struct DivisionPolys {
    pub curve: EllipticCurve,
    f: QPoly,
    /// `w[n]` is the x-part of the n-th division polynomial: psi_n = w_n for
    /// odd n and psi_n = 2y w_n for even n.
    w: Vec<QPoly>,
    /// `piece[n]` (for n >= 2) has as roots exactly the x-coordinates of the
    /// points of exact order n; monic and squarefree.
    piece: Vec<QPoly>,
}

impl DivisionPolys {
    pub fn new(curve: &EllipticCurve, nmax: usize) -> Self {
        let nmax = nmax.max(4);
        let f = curve.f_poly();
        let a = &curve.a;
        let b = &curve.b;
        let mut w = Vec::with_capacity(nmax + 1);
        let q = |v: Vec<Rational>| QPoly::new(crate::field::Rationals, v);
        w.push(QPoly::from_i64(&[0]));
        w.push(QPoly::from_i64(&[1]));
        w.push(QPoly::from_i64(&[1]));
        // 3x^4 + 6Ax^2 + 12Bx - A^2
        w.push(q(vec![-(a * a), rat_i(12) * b, rat_i(6) * a, rat_i(0), rat_i(3)]));
        // 2(x^6 + 5Ax^4 + 20Bx^3 - 5A^2x^2 - 4ABx - 8B^2 - A^3)
        w.push(q(vec![
            rat_i(-16) * b * b - rat_i(2) * a * a * a,
            rat_i(-8) * a * b,
            rat_i(-10) * a * a,
            rat_i(40) * b,
            rat_i(10) * a,
            rat_i(0),
            rat_i(2),
        ]));
        let f16 = f.mul(&f).scale(&rat_i(16));
        for n in 5..=nmax {
            let m = n / 2;
            let next = if n % 2 == 1 {
                let lhs = w[m + 2].mul(&w[m].pow(3));
                let rhs = w[m - 1].mul(&w[m + 1].pow(3));
                if m % 2 == 1 {
                    lhs.sub(&rhs.mul(&f16))
                } else {
                    lhs.mul(&f16).sub(&rhs)
                }
            } else {
                let inner = w[m + 2].mul(&w[m - 1].pow(2)).sub(&w[m - 2].mul(&w[m + 1].pow(2)));
                w[m].mul(&inner)
            };
            w.push(next);
        }
        let mut piece = vec![QPoly::from_i64(&[1]); (nmax + 1).min(2)];
        if nmax >= 2 {
            piece.push(f.monic());
        }
        for n in 3..=nmax {
            let mut h = w[n].monic();
            if n % 2 == 0 {
                h = h.mul(&piece[2]);
            }
            for d in 2..n {
                if n % d == 0 {
                    h = h.exact_div(&piece[d]).expect("exact-order pieces divide w_n");
                }
            }
            piece.push(h);
        }
        DivisionPolys { curve: curve.clone(), f, w, piece }
    }

    /// psi_n^2 as a polynomial in x; degree n^2 - 1.
    pub fn psi_squared(&self, n: usize) -> QPoly {
        assert!(n >= 2 && n < self.w.len());
        let w2 = self.w[n].mul(&self.w[n]);
        if n % 2 == 0 {
            w2.mul(&self.f).scale(&rat_i(4))
        } else {
            w2
        }
    }

    /// Monic squarefree polynomial with roots the x-coordinates of the
    /// nonzero n-torsion points.
    pub fn torsion_x(&self, n: usize) -> QPoly {
        assert!(n >= 2 && n < self.w.len());
        let base = self.w[n].monic();
        if n % 2 == 0 {
            base.mul(&self.f.monic())
        } else {
            base
        }
    }

    /// Monic squarefree polynomial with roots the x-coordinates of all
    /// nonzero torsion points of order at most `n`.
    pub fn cumulative_torsion_x(&self, n: usize) -> QPoly {
        assert!(n >= 2 && n < self.piece.len());
        let mut acc = QPoly::from_i64(&[1]);
        for m in 2..=n {
            acc = acc.mul(&self.piece[m]);
        }
        acc
    }

    /// Monic squarefree polynomial with roots the x-coordinates of the points
    /// of exact order n.
    pub fn exact_order_x(&self, n: usize) -> &QPoly {
        &self.piece[n]
    }

    pub fn level_bound(&self) -> usize {
        self.w.len() - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_map_expression;
    use crate::field::rat;

    fn curve(a: i64, b: i64) -> EllipticCurve {
        EllipticCurve::new(rat_i(a), rat_i(b)).unwrap()
    }

    fn map_on(curve: &EllipticCurve, text: &str) -> RationalMap {
        canonicalize(&parse_map_expression(text).unwrap(), curve).unwrap()
    }

    #[test]
    fn rejects_singular_curves() {
        assert!(EllipticCurve::new(rat_i(0), rat_i(0)).is_err());
        assert!(EllipticCurve::new(rat_i(-3), rat_i(2)).is_err());
        assert!(EllipticCurve::new(rat_i(-1), rat_i(0)).is_ok());
    }

    #[test]
    fn legendre_models() {
        let (e, s) = EllipticCurve::legendre(&rat_i(2)).unwrap();
        assert_eq!(s, rat_i(1));
        assert_eq!(e.a, rat_i(-1));
        assert_eq!(e.b, rat_i(0));
        assert!(EllipticCurve::legendre(&rat_i(0)).is_err());
        assert!(EllipticCurve::legendre(&rat_i(1)).is_err());
        // Roots of the shifted cubic are the Legendre roots minus s.
        let (e, s) = EllipticCurve::legendre(&rat(7, 2)).unwrap();
        let f = e.f_poly();
        for r in [rat_i(0), rat_i(1), rat(7, 2)] {
            assert!(f.eval(&(r - &s)).is_zero());
        }
    }

    #[test]
    fn canonical_forms() {
        let e = curve(0, 1);
        let g = map_on(&e, "x");
        assert_eq!(g.a, QPoly::from_i64(&[0, 1]));
        assert!(g.b.is_zero());
        assert_eq!(g.c, QPoly::from_i64(&[1]));
        // y^2 reduces to the curve cubic
        let g = map_on(&e, "y^2");
        assert_eq!(g.a, QPoly::from_i64(&[1, 0, 0, 1]));
        assert!(g.b.is_zero());
        assert_eq!(g.c, QPoly::from_i64(&[1]));
        // already canonical
        let g = map_on(&e, "(y + 1)/x");
        assert_eq!(g.a, QPoly::from_i64(&[1]));
        assert_eq!(g.b, QPoly::from_i64(&[1]));
        assert_eq!(g.c, QPoly::from_i64(&[0, 1]));
    }

    #[test]
    fn rejects_constant_and_zero_division() {
        let e = curve(0, 1);
        let parse = |s: &str| parse_map_expression(s).unwrap();
        assert!(canonicalize(&parse("3/4"), &e).is_err());
        assert!(canonicalize(&parse("x/x"), &e).is_err());
        assert!(canonicalize(&parse("y^2 - x^3"), &e).is_err()); // constant 1
        assert!(canonicalize(&parse("1/(y^2 - x^3 - 1)"), &e).is_err()); // 1/0
    }

    #[test]
    fn valuations_at_o() {
        let e = curve(0, 1);
        assert_eq!(map_on(&e, "x").valuation_at_o(), -2);
        assert_eq!(map_on(&e, "y").valuation_at_o(), -3);
        assert_eq!(map_on(&e, "y/x").valuation_at_o(), -1);
        assert_eq!(map_on(&e, "x^3/y^2").valuation_at_o(), 0);
        assert_eq!(map_on(&e, "(y+1)/x").valuation_at_o(), -1);
    }

    #[test]
    fn values_at_o() {
        let e = curve(0, 1);
        assert_eq!(map_on(&e, "x").value_at_o(), None);
        assert_eq!(map_on(&e, "x^3/y^2").value_at_o(), Some(&rat_i(1)));
        assert_eq!(map_on(&e, "(2*x^3+5)/(y^2+7)").value_at_o(), Some(&rat_i(2)));
        assert_eq!(map_on(&e, "x/y").value_at_o(), Some(&rat_i(0)));
    }

    #[test]
    fn degrees_match_both_routes() {
        let e = curve(0, 1);
        for (text, want) in [
            ("x", 2),
            ("y", 3),
            ("(y+1)/x", 2),
            ("y/x", 3),
            ("x^2", 4),
            ("x*y", 5),
            ("(7*x - 20)/(x - 3)", 2),
            ("x^3/y^2", 6),
        ] {
            let g = map_on(&e, text);
            assert_eq!(g.degree(), want, "map {text}");
            assert_eq!(g.degree_by_polar_divisor(), want);
            assert_eq!(g.degree_by_generic_fiber(), want);
        }
    }

    #[test]
    fn degree_stable_under_involution_and_evenness() {
        let e = curve(-2, 5);
        for text in ["y/x", "(y+1)/(x-1)", "x*y + 3", "(x^2 + y)/(x^2 - 4)"] {
            let g = map_on(&e, text);
            assert_eq!(g.negated().unwrap().degree(), g.degree(), "map {text}");
        }
        for text in ["x", "x^2", "(x-1)/(x+2)", "x^3"] {
            let g = map_on(&e, text);
            assert!(g.is_even());
            let da = g.a.degree().unwrap_or(0);
            let dc = g.c.degree().unwrap_or(0);
            assert_eq!(g.degree(), 2 * da.max(dc), "map {text}");
        }
    }

    #[test]
    fn ramification_at_o() {
        let e = curve(0, 1);
        assert_eq!(map_on(&e, "x").ramification_index_at_o().unwrap(), 2);
        assert_eq!(map_on(&e, "y").ramification_index_at_o().unwrap(), 3);
        // v_O = 0: x^3/y^2 - 1 vanishes at O to some positive order.
        let g = map_on(&e, "x^3/y^2");
        let eo = g.ramification_index_at_o().unwrap();
        assert!(eo >= 1);
        // Orders sum to the degree over the value at O: check on x where the
        // fiber over infinity is O alone.
        assert_eq!(map_on(&e, "x").ramification_index_at_o().unwrap(), 2);
    }

    #[test]
    fn division_polynomials() {
        let e = curve(0, 1);
        let dp = DivisionPolys::new(&e, 12);
        assert_eq!(dp.psi_squared(2), dp.f.scale(&rat_i(4)));
        // psi_3 = 3x^4 + 12x here; squarefree part x(x^3+4)
        assert_eq!(dp.w[3], QPoly::from_i64(&[0, 12, 0, 0, 3]));
        assert_eq!(dp.torsion_x(3), QPoly::from_i64(&[0, 4, 0, 0, 1]).monic());
        for n in 2..=12 {
            assert_eq!(dp.psi_squared(n).deg(), n * n - 1, "n = {n}");
        }
    }

    #[test]
    fn torsion_x_root_counts() {
        // distinct roots: (n^2-1)/2 for odd n, (n^2-4)/2 + 3 for even n
        for (a, b) in [(0i64, 1i64), (-1, 0), (-2, 5), (3, 4)] {
            let e = curve(a, b);
            let dp = DivisionPolys::new(&e, 9);
            for n in 2..=9 {
                let t = dp.torsion_x(n);
                let expect = if n % 2 == 1 { (n * n - 1) / 2 } else { (n * n - 4) / 2 + 3 };
                assert_eq!(t.deg(), expect, "curve ({a},{b}), n = {n}");
                assert!(t.squarefree_part_q().deg() == t.deg(), "squarefree for n = {n}");
            }
        }
    }

    #[test]
    fn cumulative_torsion_is_coprime_product() {
        let e = curve(0, 1);
        let dp = DivisionPolys::new(&e, 6);
        let cum = dp.cumulative_torsion_x(3);
        // monic(x^3+1) * x * (x^3+4)
        let want = QPoly::from_i64(&[1, 0, 0, 1]).mul(&QPoly::from_i64(&[0, 4, 0, 0, 1]));
        assert_eq!(cum, want);
        for n in 2..=6 {
            for m in 2..n {
                let g = dp.exact_order_x(n).fast_gcd(dp.exact_order_x(m));
                assert!(g.is_constant(), "pieces {m} and {n} share a root");
            }
        }
    }

    #[test]
    fn valuation_is_multiplicative_and_ultrametric() {
        let e = curve(-2, 5);
        let texts = ["x", "y", "y/x", "(y+1)/(x-1)", "x^2 - 3", "x*y"];
        let vals: Vec<i64> = texts.iter().map(|s| map_on(&e, s).valuation_at_o()).collect();
        for (s, &vs) in texts.iter().zip(&vals) {
            for (t, &vt) in texts.iter().zip(&vals) {
                let prod = parse_map_expression(&format!("({s})*({t})")).unwrap();
                let sum = parse_map_expression(&format!("({s})+({t})")).unwrap();
                if let Ok(v) = canonicalize(&prod, &e).map(|g| g.valuation_at_o()) {
                    assert_eq!(v, vs + vt);
                }
                if let Ok(v) = canonicalize(&sum, &e).map(|g| g.valuation_at_o()) {
                    assert!(v >= vs.min(vt));
                    if vs != vt {
                        assert_eq!(v, vs.min(vt));
                    }
                }
            }
        }
    }
}
