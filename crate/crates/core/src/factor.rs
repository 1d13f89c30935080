//! Factorization over Q by the classical Zassenhaus route: squarefree
//! split, factorization modulo a small prime, quadratic Hensel lifting of a
//! factor tree, and bounded subset recombination.  Inputs at desk scale stay
//! well inside these bounds (degrees in the tens).

use crate::field::{Field, PrimeField, Rational, Rationals};
use crate::poly::{Poly, QPoly};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `unit * prod factors[i]^mult[i]` reproduces the input exactly; the
/// factors are monic irreducible over Q, sorted for determinism.
#[derive(Clone, Debug, PartialEq)]
pub struct Factored {
    pub unit: Rational,
    pub factors: Vec<(QPoly, usize)>,
}

/// Factor a nonzero rational polynomial into monic irreducibles.
pub fn factor_over_q(p: &QPoly) -> Factored {
    assert!(!p.is_zero(), "factor of zero polynomial");
    let unit = p.lc();
    let monic = p.monic();
    if monic.deg() == 0 {
        return Factored { unit, factors: vec![] };
    }
    let mut factors: Vec<(QPoly, usize)> = vec![];
    for (sf, mult) in monic.squarefree_decomposition_q() {
        for irr in factor_squarefree_monic(&sf) {
            factors.push((irr, mult));
        }
    }
    sort_factors(&mut factors);
    debug_assert_eq!(
        {
            let mut prod = QPoly::one(Rationals).scale(&unit);
            for (f, m) in &factors {
                prod = prod.mul(&f.pow(*m as u32));
            }
            prod
        },
        *p
    );
    Factored { unit, factors }
}

pub fn is_irreducible(p: &QPoly) -> bool {
    if p.degree().map_or(true, |d| d == 0) {
        return false;
    }
    let f = factor_over_q(p);
    f.factors.len() == 1 && f.factors[0].1 == 1
}

/// Product-of-irreducibles display in the given variable: factors sorted by
/// degree then text, spaces stripped, composite pieces parenthesized;
/// constants render as "1".
pub fn factored_var_string(p: &QPoly, var: &str) -> String {
    if p.deg() == 0 {
        return "1".to_string();
    }
    let mut pieces: Vec<(usize, String)> = factor_over_q(p)
        .factors
        .iter()
        .map(|(q, _)| (q.deg(), q.to_string_var(var).replace(' ', "")))
        .collect();
    pieces.sort();
    pieces
        .into_iter()
        .map(|(_, s)| {
            if s.chars().all(|ch| ch.is_ascii_alphanumeric()) {
                s
            } else {
                format!("({s})")
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

fn sort_factors(factors: &mut [(QPoly, usize)]) {
    factors.sort_by(|a, b| {
        a.0.deg()
            .cmp(&b.0.deg())
            .then_with(|| a.0.coeffs.iter().rev().cmp(b.0.coeffs.iter().rev()))
    });
}

/// Factor a monic squarefree rational polynomial of degree >= 1.
fn factor_squarefree_monic(g: &QPoly) -> Vec<QPoly> {
    let n = g.deg();
    if n == 1 {
        return vec![g.clone()];
    }
    let (_, prim) = g.to_primitive_integer();
    let l = prim.last().unwrap().clone();
    // Monicize: fhat(x) = L^(n-1) * f(x/L) keeps integer coefficients.
    let mut fhat: Vec<BigInt> = Vec::with_capacity(n + 1);
    for (k, c) in prim.iter().enumerate() {
        fhat.push(c * l.pow((n - 1 - k.min(n - 1)) as u32));
    }
    // The leading entry of the loop above used exponent 0 only for k = n-1;
    // fix the top coefficient explicitly.
    fhat[n] = BigInt::one();
    let hat_factors = factor_monic_squarefree_z(&fhat);
    let mut out = vec![];
    for fh in hat_factors {
        // Map back: ghat(Lx) / L^deg is a monic factor of g over Q.
        let d = fh.len() - 1;
        let coeffs: Vec<Rational> = fh
            .iter()
            .enumerate()
            .map(|(k, c)| Rational::new(c.clone(), l.pow((d - k) as u32)))
            .collect();
        out.push(Poly::new(Rationals, coeffs));
    }
    out
}

// ---- integer polynomial helpers (dense, lowest degree first) ----

fn ztrim(mut v: Vec<BigInt>) -> Vec<BigInt> {
    while v.last().map_or(false, |c| c.is_zero()) {
        v.pop();
    }
    v
}

fn zmul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut v = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            v[i + j] += x * y;
        }
    }
    v
}

fn zsub(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let n = a.len().max(b.len());
    let zero = BigInt::zero();
    (0..n)
        .map(|k| a.get(k).unwrap_or(&zero) - b.get(k).unwrap_or(&zero))
        .collect()
}

fn zadd(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let n = a.len().max(b.len());
    let zero = BigInt::zero();
    (0..n)
        .map(|k| a.get(k).unwrap_or(&zero) + b.get(k).unwrap_or(&zero))
        .collect()
}

/// Symmetric residue in (-m/2, m/2].
fn zcenter(x: &BigInt, m: &BigInt) -> BigInt {
    let mut r = x.mod_floor(m);
    let half = m / 2;
    if r > half {
        r -= m;
    }
    r
}

fn zred(v: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    ztrim(v.iter().map(|c| zcenter(c, m)).collect())
}

/// Division by a monic divisor with coefficients reduced mod m.
fn zdivrem_monic(a: &[BigInt], h: &[BigInt], m: &BigInt) -> (Vec<BigInt>, Vec<BigInt>) {
    assert!(h.last().map_or(false, |c| c.is_one()), "divisor must be monic");
    let dh = h.len() - 1;
    let mut rem: Vec<BigInt> = a.to_vec();
    if rem.len() <= dh {
        return (vec![], zred(&rem, m));
    }
    let mut quo = vec![BigInt::zero(); rem.len() - dh];
    for k in (dh..rem.len()).rev() {
        let c = zcenter(&rem[k], m);
        if c.is_zero() {
            rem[k] = BigInt::zero();
            continue;
        }
        quo[k - dh] = c.clone();
        for (j, hc) in h.iter().enumerate() {
            let t = &rem[k - dh + j] - &c * hc;
            rem[k - dh + j] = zcenter(&t, m);
        }
    }
    rem.truncate(dh);
    (ztrim(quo), ztrim(rem))
}

/// Exact division of integer polynomials with monic divisor.
fn zdivide_exact(f: &[BigInt], g: &[BigInt]) -> Option<Vec<BigInt>> {
    assert!(g.last().map_or(false, |c| c.is_one()));
    let dg = g.len() - 1;
    if f.len() < g.len() {
        return None;
    }
    let mut rem: Vec<BigInt> = f.to_vec();
    let mut quo = vec![BigInt::zero(); rem.len() - dg];
    for k in (dg..rem.len()).rev() {
        let c = rem[k].clone();
        if c.is_zero() {
            continue;
        }
        quo[k - dg] = c.clone();
        for (j, gc) in g.iter().enumerate() {
            let t = &rem[k - dg + j] - &c * gc;
            rem[k - dg + j] = t;
        }
    }
    if rem.iter().all(|c| c.is_zero()) {
        Some(ztrim(quo))
    } else {
        None
    }
}

fn z_to_fp(v: &[BigInt], fp: PrimeField) -> Poly<PrimeField> {
    let p = BigInt::from(fp.p);
    Poly::new(fp, v.iter().map(|c| c.mod_floor(&p).to_u64().unwrap()).collect())
}

fn fp_to_z(f: &Poly<PrimeField>, p: u64) -> Vec<BigInt> {
    let m = BigInt::from(p);
    ztrim(f.coeffs.iter().map(|&c| zcenter(&BigInt::from(c), &m)).collect())
}

// ---- factorization mod p ----

fn powmod_fp(base: &Poly<PrimeField>, e: &BigUint, modulus: &Poly<PrimeField>) -> Poly<PrimeField> {
    let fp = base.field;
    let mut acc = Poly::one(fp);
    let mut b = base.div_rem(modulus).1;
    for i in 0..e.bits() {
        if e.bit(i) {
            acc = acc.mul(&b).div_rem(modulus).1;
        }
        b = b.mul(&b).div_rem(modulus).1;
    }
    acc
}

struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        self.0 >> 3
    }
}

/// Distinct-degree decomposition of a monic squarefree polynomial mod p.
fn ddf(f: &Poly<PrimeField>) -> Vec<(Poly<PrimeField>, usize)> {
    let fp = f.field;
    let x = Poly::monomial(fp, fp.one(), 1);
    let mut f = f.monic();
    let mut h = x.clone();
    let mut out = vec![];
    let mut d = 0usize;
    while f.deg() >= 2 * (d + 1) {
        d += 1;
        h = powmod_fp(&h, &BigUint::from(fp.p), &f);
        let g = f.gcd(&h.sub(&x));
        if g.deg() > 0 {
            out.push((g.clone(), d));
            f = f.exact_div(&g).unwrap().monic();
            h = h.div_rem(&f).1;
        }
    }
    if f.deg() > 0 {
        let deg = f.deg();
        out.push((f, deg));
    }
    out
}

/// Equal-degree splitting (Cantor-Zassenhaus) for odd p.
fn edf(g: &Poly<PrimeField>, d: usize, rng: &mut Lcg) -> Vec<Poly<PrimeField>> {
    let fp = g.field;
    if g.deg() == d {
        return vec![g.monic()];
    }
    let e = (BigUint::from(fp.p).pow(d as u32) - BigUint::one()) / BigUint::from(2u32);
    loop {
        let coeffs: Vec<u64> = (0..g.deg()).map(|_| rng.next() % fp.p).collect();
        let r = Poly::new(fp, coeffs);
        if r.is_zero() {
            continue;
        }
        let w = powmod_fp(&r, &e, g).sub(&Poly::one(fp));
        let h = g.gcd(&w);
        if let Some(dh) = h.degree() {
            if dh > 0 && dh < g.deg() {
                let rest = g.exact_div(&h).unwrap().monic();
                let mut out = edf(&h, d, rng);
                out.extend(edf(&rest, d, rng));
                return out;
            }
        }
    }
}

fn factor_mod_p(f: &Poly<PrimeField>) -> Vec<Poly<PrimeField>> {
    let mut rng = Lcg(0x9e37_79b9_7f4a_7c15 ^ f.field.p);
    let mut out = vec![];
    for (g, d) in ddf(f) {
        out.extend(edf(&g, d, &mut rng));
    }
    out.sort_by(|a, b| a.deg().cmp(&b.deg()).then_with(|| a.coeffs.cmp(&b.coeffs)));
    out
}

// ---- Hensel lifting ----

/// One quadratic step: from a factorization and Bezout pair mod m to mod m^2.
#[allow(clippy::type_complexity)]
fn hensel_step(
    f: &[BigInt],
    g: &[BigInt],
    h: &[BigInt],
    s: &[BigInt],
    t: &[BigInt],
    m: &BigInt,
) -> (Vec<BigInt>, Vec<BigInt>, Vec<BigInt>, Vec<BigInt>) {
    let m2 = m * m;
    let e = zred(&zsub(f, &zmul(g, h)), &m2);
    let (q, r) = zdivrem_monic(&zred(&zmul(s, &e), &m2), h, &m2);
    let g1 = zred(&zadd(&zadd(g, &zmul(t, &e)), &zmul(&q, g)), &m2);
    let h1 = zred(&zadd(h, &r), &m2);
    let one = vec![BigInt::one()];
    let b = zred(&zsub(&zadd(&zmul(s, &g1), &zmul(t, &h1)), &one), &m2);
    let (c, d) = zdivrem_monic(&zred(&zmul(s, &b), &m2), &h1, &m2);
    let s1 = zred(&zsub(s, &d), &m2);
    let t1 = zred(&zsub(&zsub(t, &zmul(t, &b)), &zmul(&c, &g1)), &m2);
    debug_assert_eq!(g1.len(), g.len(), "hensel step must preserve degree");
    debug_assert_eq!(h1.len(), h.len(), "hensel step must preserve degree");
    (g1, h1, s1, t1)
}

/// Lift the factor list of a monic f from mod p to mod p^K via a factor tree.
fn hensel_multifactor(
    f: &[BigInt],
    facs: &[Poly<PrimeField>],
    p: u64,
    pk: &BigInt,
) -> Vec<Vec<BigInt>> {
    if facs.len() == 1 {
        return vec![zred(f, pk)];
    }
    let fp = PrimeField::new(p);
    let half = facs.len() / 2;
    let (left, right) = facs.split_at(half);
    let mut g0 = Poly::one(fp);
    for q in left {
        g0 = g0.mul(q);
    }
    let mut h0 = Poly::one(fp);
    for q in right {
        h0 = h0.mul(q);
    }
    let (d, s0, t0) = g0.ext_gcd(&h0);
    assert!(d.deg() == 0, "modular factors must be pairwise coprime");
    let mut g = fp_to_z(&g0, p);
    let mut h = fp_to_z(&h0, p);
    let mut s = fp_to_z(&s0, p);
    let mut t = fp_to_z(&t0, p);
    let mut m = BigInt::from(p);
    while &m < pk {
        let (g1, h1, s1, t1) = hensel_step(f, &g, &h, &s, &t, &m);
        g = g1;
        h = h1;
        s = s1;
        t = t1;
        m = &m * &m;
    }
    let g = zred(&g, pk);
    let h = zred(&h, pk);
    let mut out = hensel_multifactor(&g, left, p, pk);
    out.extend(hensel_multifactor(&h, right, p, pk));
    out
}

// ---- Zassenhaus over Z ----

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Factor a monic squarefree integer polynomial into monic integer
/// irreducibles.
fn factor_monic_squarefree_z(f: &[BigInt]) -> Vec<Vec<BigInt>> {
    let n = f.len() - 1;
    if n <= 1 {
        return vec![f.to_vec()];
    }

    // Collect a few primes of good reduction and keep the factorization
    // with the fewest modular factors.
    let mut best: Option<(u64, Vec<Poly<PrimeField>>)> = None;
    let mut p = 1u64;
    let mut good = 0;
    while good < 4 {
        p += 2;
        if !is_prime_u64(p) {
            continue;
        }
        let fp = PrimeField::new(p);
        let fbar = z_to_fp(f, fp);
        if fbar.degree() != Some(n) {
            continue;
        }
        if fbar.gcd(&fbar.derivative()).deg() != 0 {
            continue;
        }
        good += 1;
        let facs = factor_mod_p(&fbar);
        if facs.len() == 1 {
            return vec![f.to_vec()];
        }
        if best.as_ref().map_or(true, |(_, b)| facs.len() < b.len()) {
            best = Some((p, facs));
        }
    }
    let (p, facs) = best.unwrap();

    // Coefficient bound for any monic factor, doubled for the symmetric range.
    let norm1: BigInt = f.iter().map(|c| c.abs()).sum();
    let bound = (BigInt::one() << (n + 2)) * norm1 + BigInt::one();
    let mut pk = BigInt::from(p);
    while pk < bound {
        pk *= BigInt::from(p);
    }

    let lifted = hensel_multifactor(f, &facs, p, &pk);
    recombine(f.to_vec(), lifted, &pk)
}

fn recombine(mut f: Vec<BigInt>, mut pool: Vec<Vec<BigInt>>, pk: &BigInt) -> Vec<Vec<BigInt>> {
    let mut out = vec![];
    'outer: loop {
        let m = pool.len();
        if m <= 1 {
            if f.len() > 1 {
                out.push(f);
            }
            break;
        }
        for size in 1..=(m / 2) {
            let mut idx: Vec<usize> = (0..size).collect();
            loop {
                let mut cand = vec![BigInt::one()];
                for &i in &idx {
                    cand = zred(&zmul(&cand, &pool[i]), pk);
                }
                let ok_const = if f[0].is_zero() {
                    true
                } else {
                    !cand[0].is_zero() && (&f[0] % &cand[0]).is_zero()
                };
                if ok_const && cand.len() - 1 < f.len() - 1 {
                    if let Some(q) = zdivide_exact(&f, &cand) {
                        out.push(cand);
                        f = q;
                        for &i in idx.iter().rev() {
                            pool.remove(i);
                        }
                        continue 'outer;
                    }
                }
                // next combination of indices
                let mut j = size;
                loop {
                    if j == 0 {
                        break;
                    }
                    j -= 1;
                    if idx[j] != j + m - size {
                        idx[j] += 1;
                        for k in j + 1..size {
                            idx[k] = idx[k - 1] + 1;
                        }
                        break;
                    }
                    if j == 0 {
                        // exhausted this cardinality
                        idx.clear();
                        break;
                    }
                }
                if idx.is_empty() {
                    break;
                }
            }
        }
        if f.len() > 1 {
            out.push(f);
        }
        break;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rat_i;

    fn p(coeffs: &[i64]) -> QPoly {
        QPoly::from_i64(coeffs)
    }

    #[test]
    fn factors_products_of_linears() {
        // x(x-1)(x-2)
        let f = p(&[0, 1]).mul(&p(&[-1, 1])).mul(&p(&[-2, 1]));
        let fac = factor_over_q(&f);
        assert_eq!(fac.unit, rat_i(1));
        let names: Vec<String> = fac.factors.iter().map(|(g, _)| g.to_string_var("x")).collect();
        assert_eq!(names, vec!["x - 2", "x - 1", "x"]);
    }

    #[test]
    fn factors_cyclotomic_like() {
        // x^4 - 1 = (x-1)(x+1)(x^2+1)
        let f = p(&[-1, 0, 0, 0, 1]);
        let fac = factor_over_q(&f);
        assert_eq!(fac.factors.len(), 3);
        assert!(fac.factors.iter().any(|(g, _)| *g == p(&[1, 0, 1])));
    }

    #[test]
    fn keeps_multiplicities_and_unit() {
        // 6 (x-1)^2 (x^2+x+1)
        let f = p(&[-1, 1]).pow(2).mul(&p(&[1, 1, 1])).scale(&rat_i(6));
        let fac = factor_over_q(&f);
        assert_eq!(fac.unit, rat_i(6));
        let mut seen = fac.factors.clone();
        seen.sort_by_key(|(g, _)| g.deg());
        assert_eq!(seen[0], (p(&[-1, 1]), 2));
        assert_eq!(seen[1], (p(&[1, 1, 1]), 1));
    }

    #[test]
    fn irreducible_detection() {
        assert!(is_irreducible(&p(&[1, 0, 1])));
        assert!(is_irreducible(&p(&[4, 0, 0, 1]))); // x^3 + 4
        assert!(is_irreducible(&p(&[-2, 0, 0, 0, 0, 1]))); // x^5 - 2, Eisenstein
        assert!(!is_irreducible(&p(&[-1, 0, 1])));
        assert!(!is_irreducible(&p(&[2])));
    }

    #[test]
    fn non_monic_and_rational_input() {
        // (2x+1)(3x-5) scaled by 1/7
        let f = p(&[1, 2]).mul(&p(&[-5, 3])).scale(&crate::field::rat(1, 7));
        let fac = factor_over_q(&f);
        assert_eq!(fac.unit, crate::field::rat(6, 7));
        assert_eq!(fac.factors.len(), 2);
        let prod = fac.factors.iter().fold(QPoly::one(Rationals), |acc, (g, _)| acc.mul(g));
        assert_eq!(prod.scale(&fac.unit), f);
    }

    #[test]
    fn degree_eight_with_repeated_quartic() {
        // (x^4 + x + 1)^2: the quartic is irreducible over Q
        let q = p(&[1, 1, 0, 0, 1]);
        let f = q.mul(&q);
        let fac = factor_over_q(&f);
        assert_eq!(fac.factors, vec![(q, 2)]);
    }

    #[test]
    fn swinnerton_dyer_style_recombination() {
        // minimal polynomial of sqrt(2)+sqrt(3): x^4 - 10x^2 + 1 splits into
        // four linears mod every prime but is irreducible over Q, which
        // forces the recombination path.
        let f = p(&[1, 0, -10, 0, 1]);
        assert!(is_irreducible(&f));
    }
}
