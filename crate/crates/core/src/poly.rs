//! Dense univariate polynomials over an arbitrary field.
//!
//! Coefficients are stored lowest degree first with no trailing zeros, so the
//! zero polynomial is the empty vector and `degree()` returns `None` for it.
//! All algorithms here are classical characteristic-zero (or large-p) forms:
//! Euclidean division, monic gcd with a modular prescreen over Q, the
//! extended Euclidean algorithm, Yun squarefree decomposition, and the
//! resultant via a polynomial remainder sequence.

use crate::field::{Field, PrimeField, Rational, Rationals};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq)]
pub struct Poly<F: Field> {
    pub field: F,
    /// Coefficients, lowest degree first, trailing zeros trimmed.
    pub coeffs: Vec<F::Elem>,
}

impl<F: Field> Poly<F> {
    pub fn new(field: F, mut coeffs: Vec<F::Elem>) -> Self {
        while let Some(c) = coeffs.last() {
            if field.is_zero(c) {
                coeffs.pop();
            } else {
                break;
            }
        }
        Poly { field, coeffs }
    }

    pub fn zero(field: F) -> Self {
        Poly { field, coeffs: vec![] }
    }

    pub fn one(field: F) -> Self {
        let c = field.one();
        Poly { field, coeffs: vec![c] }
    }

    pub fn constant(field: F, c: F::Elem) -> Self {
        Poly::new(field, vec![c])
    }

    /// The monomial c * x^k.
    pub fn monomial(field: F, c: F::Elem, k: usize) -> Self {
        let mut v = vec![field.zero(); k + 1];
        v[k] = c;
        Poly::new(field, v)
    }

    /// x - r.
    pub fn linear_root(field: F, r: &F::Elem) -> Self {
        let neg = field.neg(r);
        let one = field.one();
        Poly::new(field, vec![neg, one])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    /// Degree of a nonzero polynomial; panics on zero.
    pub fn deg(&self) -> usize {
        self.degree().expect("degree of zero polynomial")
    }

    pub fn lc(&self) -> F::Elem {
        self.coeffs.last().cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn coeff(&self, k: usize) -> F::Elem {
        self.coeffs.get(k).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn add(&self, other: &Self) -> Self {
        let f = &self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut v = Vec::with_capacity(n);
        for k in 0..n {
            v.push(f.add(&self.coeff(k), &other.coeff(k)));
        }
        Poly::new(f.clone(), v)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let f = &self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut v = Vec::with_capacity(n);
        for k in 0..n {
            v.push(f.sub(&self.coeff(k), &other.coeff(k)));
        }
        Poly::new(f.clone(), v)
    }

    pub fn neg(&self) -> Self {
        let f = &self.field;
        Poly::new(f.clone(), self.coeffs.iter().map(|c| f.neg(c)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let f = &self.field;
        if self.is_zero() || other.is_zero() {
            return Poly::zero(f.clone());
        }
        let mut v = vec![f.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if f.is_zero(a) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                v[i + j] = f.add(&v[i + j], &f.mul(a, b));
            }
        }
        Poly::new(f.clone(), v)
    }

    pub fn scale(&self, c: &F::Elem) -> Self {
        let f = &self.field;
        Poly::new(f.clone(), self.coeffs.iter().map(|a| f.mul(a, c)).collect())
    }

    /// Multiply by x^k.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let f = &self.field;
        let mut v = vec![f.zero(); k];
        v.extend(self.coeffs.iter().cloned());
        Poly::new(f.clone(), v)
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Poly::one(self.field.clone());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Euclidean division by a nonzero divisor: returns (quotient, remainder).
    pub fn div_rem(&self, div: &Self) -> (Self, Self) {
        let f = self.field.clone();
        assert!(!div.is_zero(), "division by zero polynomial");
        let dd = div.deg();
        if self.is_zero() || self.deg() < dd {
            return (Poly::zero(f), self.clone());
        }
        let lc_inv = f.inv(&div.lc());
        let mut rem = self.coeffs.clone();
        let mut quo = vec![f.zero(); self.deg() - dd + 1];
        for k in (dd..rem.len()).rev() {
            let c = f.mul(&rem[k], &lc_inv);
            if f.is_zero(&c) {
                continue;
            }
            quo[k - dd] = c.clone();
            for (j, d) in div.coeffs.iter().enumerate() {
                let t = f.mul(&c, d);
                rem[k - dd + j] = f.sub(&rem[k - dd + j], &t);
            }
        }
        rem.truncate(dd);
        (Poly::new(f.clone(), quo), Poly::new(f, rem))
    }

    /// Exact division; `None` when the remainder is nonzero.
    pub fn exact_div(&self, div: &Self) -> Option<Self> {
        let (q, r) = self.div_rem(div);
        if r.is_zero() {
            Some(q)
        } else {
            None
        }
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = self.field.inv(&self.lc());
        self.scale(&inv)
    }

    pub fn derivative(&self) -> Self {
        let f = &self.field;
        if self.coeffs.len() <= 1 {
            return Poly::zero(f.clone());
        }
        let mut v = Vec::with_capacity(self.coeffs.len() - 1);
        for (k, c) in self.coeffs.iter().enumerate().skip(1) {
            v.push(f.mul(&f.from_i64(k as i64), c));
        }
        Poly::new(f.clone(), v)
    }

    pub fn eval(&self, x: &F::Elem) -> F::Elem {
        let f = &self.field;
        let mut acc = f.zero();
        for c in self.coeffs.iter().rev() {
            acc = f.add(&f.mul(&acc, x), c);
        }
        acc
    }

    /// Evaluate at a point of another field through a coefficient embedding.
    pub fn eval_in<G: Field>(&self, g: &G, embed: impl Fn(&F::Elem) -> G::Elem, x: &G::Elem) -> G::Elem {
        let mut acc = g.zero();
        for c in self.coeffs.iter().rev() {
            acc = g.add(&g.mul(&acc, x), &embed(c));
        }
        acc
    }

    /// Map coefficients into another field.
    pub fn map_coeffs<G: Field>(&self, g: G, embed: impl Fn(&F::Elem) -> G::Elem) -> Poly<G> {
        Poly::new(g, self.coeffs.iter().map(|c| embed(c)).collect())
    }

    /// Substitute x -> x + s.
    pub fn translate(&self, s: &F::Elem) -> Self {
        let f = self.field.clone();
        let shift = Poly::new(f.clone(), vec![s.clone(), f.one()]);
        let mut acc = Poly::zero(f);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&shift).add(&Poly::constant(self.field.clone(), c.clone()));
        }
        acc
    }

    /// Monic greatest common divisor by the Euclidean algorithm.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
            // Keep remainders monic; over Q and number fields this tames
            // coefficient growth considerably.
            if !b.is_zero() {
                b = b.monic();
            }
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }

    /// Extended gcd: returns (g, s, t) with s*self + t*other = g, g monic.
    pub fn ext_gcd(&self, other: &Self) -> (Self, Self, Self) {
        let f = self.field.clone();
        let mut r0 = self.clone();
        let mut r1 = other.clone();
        let mut s0 = Poly::one(f.clone());
        let mut s1 = Poly::zero(f.clone());
        let mut t0 = Poly::zero(f.clone());
        let mut t1 = Poly::one(f.clone());
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            let s = s0.sub(&q.mul(&s1));
            let t = t0.sub(&q.mul(&t1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
            t0 = t1;
            t1 = t;
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = f.inv(&r0.lc());
        (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
    }

    /// Yun's squarefree decomposition: returns pairs (factor, multiplicity)
    /// with the factors squarefree, pairwise coprime, and
    /// `self = lc * prod factor_i^mult_i`.
    pub fn squarefree_decomposition(&self) -> Vec<(Self, usize)> {
        self.yun_with(|a, b| a.gcd(b))
    }

    fn yun_with(&self, gcd: impl Fn(&Self, &Self) -> Self) -> Vec<(Self, usize)> {
        assert!(!self.is_zero(), "squarefree decomposition of zero");
        let p = self.monic();
        if p.deg() == 0 {
            return vec![];
        }
        let dp = p.derivative();
        let a0 = gcd(&p, &dp);
        let mut out = vec![];
        let mut b = p.exact_div(&a0).expect("gcd divides");
        let mut c = dp.exact_div(&a0).expect("gcd divides derivative");
        let mut i = 1usize;
        loop {
            let d = c.sub(&b.derivative());
            if d.is_zero() {
                if b.deg() > 0 {
                    out.push((b.monic(), i));
                }
                break;
            }
            let g = gcd(&b, &d);
            if g.deg() > 0 {
                out.push((g.clone(), i));
            }
            b = b.exact_div(&g).expect("factor divides");
            c = d.exact_div(&g).expect("factor divides");
            i += 1;
            if b.deg() == 0 {
                break;
            }
        }
        out
    }

    /// Product of the distinct irreducible factors, monic.
    pub fn squarefree_part(&self) -> Self {
        let mut acc = Poly::one(self.field.clone());
        for (f, _) in self.squarefree_decomposition() {
            acc = acc.mul(&f);
        }
        acc
    }

    /// Resultant of two nonzero polynomials via the remainder sequence,
    /// tracking leading coefficients and sign flips.  Over Q the callers
    /// needing bivariate resultants take the coefficient field to be a
    /// rational function field or use interpolation.
    pub fn resultant(&self, other: &Self) -> F::Elem {
        let f = self.field.clone();
        assert!(!self.is_zero() && !other.is_zero(), "resultant of zero polynomial");
        let mut a = self.clone();
        let mut b = other.clone();
        let mut acc = f.one();
        let mut swap_sign = false;
        loop {
            let da = a.deg();
            let db = b.deg();
            if db == 0 {
                // res(a, const) = const^deg(a)
                let mut c = f.one();
                for _ in 0..da {
                    c = f.mul(&c, &b.lc());
                }
                acc = f.mul(&acc, &c);
                break;
            }
            let r = a.div_rem(&b).1;
            if r.is_zero() {
                return f.zero();
            }
            let dr = r.deg();
            // res(a,b) = (-1)^{da*db} lc(b)^{da-dr} res(b,r)
            if (da * db) % 2 == 1 {
                swap_sign = !swap_sign;
            }
            let mut c = f.one();
            for _ in 0..(da - dr) {
                c = f.mul(&c, &b.lc());
            }
            acc = f.mul(&acc, &c);
            a = b;
            b = r;
        }
        if swap_sign {
            f.neg(&acc)
        } else {
            acc
        }
    }

    /// Discriminant: (-1)^{n(n-1)/2} res(p, p') / lc(p).
    pub fn discriminant(&self) -> F::Elem {
        let f = self.field.clone();
        let n = self.deg();
        assert!(n >= 1, "discriminant needs degree >= 1");
        let dp = self.derivative();
        if dp.is_zero() {
            return f.zero();
        }
        let res = self.resultant(&dp);
        let v = f.div(&res, &self.lc());
        if (n * (n - 1) / 2) % 2 == 1 {
            f.neg(&v)
        } else {
            v
        }
    }
}

/// Lagrange interpolation through distinct nodes.
fn zcontent(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c))
}

fn zprimitive(mut v: Vec<BigInt>) -> Vec<BigInt> {
    let mut c = zcontent(&v);
    if v.last().map_or(false, |l| l.is_negative()) {
        c = -c;
    }
    if !c.is_one() {
        for e in &mut v {
            *e /= &c;
        }
    }
    v
}

/// Pseudo-remainder of `a` by `b`: the remainder of `lc(b)^k a` divided by
/// `b` for the minimal sufficient `k`.
fn zpseudo_rem(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut r: Vec<BigInt> = a.to_vec();
    let db = b.len() - 1;
    let lb = b.last().unwrap();
    while r.len() > db {
        let lr = r.last().unwrap().clone();
        let shift = r.len() - 1 - db;
        for c in r.iter_mut() {
            *c *= lb;
        }
        for (i, bc) in b.iter().enumerate() {
            r[shift + i] -= &lr * bc;
        }
        while r.last().map_or(false, |c| c.is_zero()) {
            r.pop();
        }
    }
    r
}

/// Gcd of primitive integer polynomials by the primitive-coefficient
/// polynomial remainder sequence.
fn zgcd_primitive(mut a: Vec<BigInt>, mut b: Vec<BigInt>) -> Vec<BigInt> {
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    loop {
        if b.len() == 1 {
            return vec![BigInt::one()];
        }
        let r = zpseudo_rem(&a, &b);
        if r.is_empty() {
            return b;
        }
        a = b;
        b = zprimitive(r);
    }
}

/// Deterministic Miller-Rabin for word-sized integers.
fn is_prime_u64(n: u64) -> bool {
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    if n < 41 {
        return false;
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = {
            let (mut base, mut e, mut acc) = (a % n, d, 1u64);
            while e > 0 {
                if e & 1 == 1 {
                    acc = mul(acc, base);
                }
                base = mul(base, base);
                e >>= 1;
            }
            acc
        };
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn big_mod_u64(x: &BigInt, p: u64) -> u64 {
    use num_traits::ToPrimitive;
    x.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits")
}

fn symmetric_lift(x: &BigInt, m: &BigInt) -> BigInt {
    let r = x.mod_floor(m);
    if &r + &r > *m {
        r - m
    } else {
        r
    }
}

/// Exact division over Z; `None` when any quotient step or the remainder
/// fails to divide.
fn zexact_div(a: &[BigInt], d: &[BigInt]) -> Option<Vec<BigInt>> {
    if a.len() < d.len() {
        return None;
    }
    let mut r = a.to_vec();
    let dl = d.last().unwrap();
    let qlen = a.len() - d.len() + 1;
    let mut q = vec![BigInt::zero(); qlen];
    for k in (0..qlen).rev() {
        let lead = r[k + d.len() - 1].clone();
        if lead.is_zero() {
            continue;
        }
        let (qc, rem) = lead.div_rem(dl);
        if !rem.is_zero() {
            return None;
        }
        for (i, dc) in d.iter().enumerate() {
            r[k + i] -= &qc * dc;
        }
        q[k] = qc;
    }
    if r.iter().all(|c| c.is_zero()) {
        Some(q)
    } else {
        None
    }
}

/// Modular gcd of primitive integer polynomials: monic gcds modulo word-sized
/// primes, scaled by the gcd of the leading coefficients, are combined by
/// Chinese remaindering until the primitive lift stabilizes and divides both
/// inputs. Primes where the leading coefficients vanish are skipped, and
/// higher-degree images from unlucky primes are discarded. `None` when the
/// prime budget runs out (a gcd with oversized coefficients); the caller then
/// falls back to the remainder sequence.
fn zgcd_modular(a: &[BigInt], b: &[BigInt]) -> Option<Vec<BigInt>> {
    let la = a.last().unwrap();
    let lb = b.last().unwrap();
    let glc = la.gcd(lb);
    let mut scan = (1u64 << 62) - 1;
    let mut modulus = BigInt::one();
    let mut acc: Vec<BigInt> = Vec::new();
    let mut deg_cur = usize::MAX;
    let mut last: Option<Vec<BigInt>> = None;
    for _ in 0..64 {
        while !is_prime_u64(scan) {
            scan -= 2;
        }
        let p = scan;
        scan -= 2;
        if big_mod_u64(la, p) == 0 || big_mod_u64(lb, p) == 0 {
            continue;
        }
        let fp = PrimeField::new(p);
        let ap = Poly::new(fp, a.iter().map(|c| big_mod_u64(c, p)).collect());
        let bp = Poly::new(fp, b.iter().map(|c| big_mod_u64(c, p)).collect());
        let gp = ap.gcd(&bp);
        let d = gp.deg();
        if d == 0 {
            return Some(vec![BigInt::one()]);
        }
        let scale = big_mod_u64(&glc, p);
        let hp: Vec<u64> = gp.coeffs.iter().map(|c| fp.mul(c, &scale)).collect();
        if d < deg_cur {
            deg_cur = d;
            modulus = BigInt::from(p);
            acc = hp.iter().map(|&r| symmetric_lift(&BigInt::from(r), &modulus)).collect();
            last = None;
        } else if d > deg_cur {
            continue;
        } else {
            let minv = fp.pow(big_mod_u64(&modulus, p), p - 2);
            let next = &modulus * BigInt::from(p);
            for (cur, &r) in acc.iter_mut().zip(&hp) {
                let k = fp.mul(&fp.sub(&r, &big_mod_u64(cur, p)), &minv);
                let lifted = &*cur + &modulus * BigInt::from(k);
                *cur = symmetric_lift(&lifted, &next);
            }
            modulus = next;
        }
        let cand = zprimitive(acc.clone());
        if last.as_ref() == Some(&cand)
            && zexact_div(a, &cand).is_some()
            && zexact_div(b, &cand).is_some()
        {
            return Some(cand);
        }
        last = Some(cand);
    }
    None
}

pub fn interpolate<F: Field>(field: &F, points: &[(F::Elem, F::Elem)]) -> Poly<F> {
    let mut acc = Poly::zero(field.clone());
    for (i, (xi, yi)) in points.iter().enumerate() {
        let mut basis = Poly::constant(field.clone(), field.one());
        let mut denom = field.one();
        for (j, (xj, _)) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            basis = basis.mul(&Poly::linear_root(field.clone(), xj));
            denom = field.mul(&denom, &field.sub(xi, xj));
        }
        let c = field.div(yi, &denom);
        acc = acc.add(&basis.scale(&c));
    }
    acc
}

pub type QPoly = Poly<Rationals>;

impl QPoly {
    pub fn from_i64(coeffs: &[i64]) -> Self {
        Poly::new(
            Rationals,
            coeffs.iter().map(|&c| Rational::from_integer(BigInt::from(c))).collect(),
        )
    }

    /// Clear denominators and content: returns (c, P) with P primitive
    /// integer coefficients, positive leading coefficient, self = c * P.
    pub fn to_primitive_integer(&self) -> (Rational, Vec<BigInt>) {
        if self.is_zero() {
            return (Rational::zero(), vec![]);
        }
        let mut l = BigInt::one();
        for c in &self.coeffs {
            l = l.lcm(c.denom());
        }
        let ints: Vec<BigInt> = self.coeffs.iter().map(|c| (c * Rational::from_integer(l.clone())).to_integer()).collect();
        let mut g = BigInt::zero();
        for c in &ints {
            g = g.gcd(c);
        }
        if ints.last().unwrap().is_negative() {
            g = -g;
        }
        let prim: Vec<BigInt> = ints.iter().map(|c| c / &g).collect();
        (Rational::new(g, l), prim)
    }

    /// Reduce mod p; `None` if p divides a denominator or kills the degree.
    pub fn reduce_mod(&self, fp: PrimeField) -> Option<Poly<PrimeField>> {
        let mut v = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            v.push(fp.reduce_rational(c)?);
        }
        let out = Poly::new(fp, v);
        if out.degree() != self.degree() {
            return None;
        }
        Some(out)
    }

    /// Monic gcd over Q through primitive integer polynomials: modular gcds
    /// are Chinese-remaindered and verified by exact division, falling back
    /// to the primitive remainder sequence only when the lifted gcd has
    /// oversized coefficients.
    pub fn fast_gcd(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.monic();
        }
        if other.is_zero() {
            return self.monic();
        }
        if self.deg() == 0 || other.deg() == 0 {
            return Poly::one(Rationals);
        }
        if self == other {
            return self.monic();
        }
        let (_, za) = self.to_primitive_integer();
        let (_, zb) = other.to_primitive_integer();
        let g = zgcd_modular(&za, &zb)
            .unwrap_or_else(|| zgcd_primitive(za.clone(), zb.clone()));
        Poly::new(Rationals, g.into_iter().map(Rational::from).collect()).monic()
    }

    /// Q-specific Yun decomposition using the faster gcd.
    pub fn squarefree_decomposition_q(&self) -> Vec<(Self, usize)> {
        self.yun_with(|a, b| a.fast_gcd(b))
    }

    /// Product of the distinct irreducible factors, monic; shortcut when the
    /// polynomial is already squarefree.
    pub fn squarefree_part_q(&self) -> Self {
        assert!(!self.is_zero(), "squarefree part of zero");
        if self.deg() == 0 {
            return Poly::one(Rationals);
        }
        let g = self.fast_gcd(&self.derivative());
        if g.is_constant() {
            return self.monic();
        }
        self.exact_div(&g).expect("gcd divides").monic()
    }

    /// Display with a chosen variable name, e.g. `t^2 - 2*t + 1`.
    pub fn to_string_var(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts: Vec<String> = vec![];
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let mag_s = crate::field::rat_str(&mag);
            let term = if k == 0 {
                mag_s
            } else {
                let xp = if k == 1 { var.to_string() } else { format!("{}^{}", var, k) };
                if mag.is_one() {
                    xp
                } else {
                    format!("{}*{}", mag_s, xp)
                }
            };
            if parts.is_empty() {
                if c.is_negative() {
                    parts.push(format!("-{}", term));
                } else {
                    parts.push(term);
                }
            } else if c.is_negative() {
                parts.push(format!(" - {}", term));
            } else {
                parts.push(format!(" + {}", term));
            }
        }
        parts.concat()
    }
}
