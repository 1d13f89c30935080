//! Numerical uniformization and value-distribution experiments: period
//! lattices by the complex AGM, Weierstrass coordinates and elliptic
//! logarithms driven by the exact local expansion at O, truncated counting
//! functions with exact kernels, the characteristic in leading-term and
//! Ahlfors-Shimizu form, and the ratio / second-main-theorem checks.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::curve::EllipticCurve;
use crate::curve::RationalMap;
use crate::error::{Error, Result};
use crate::field::{rat_i, Rational};
use crate::numfield::NumberField;
use crate::poly::{Poly, QPoly};
use crate::ramify::{fiber_profile, BranchValue};
use crate::series::LocalExpansion;

type C = Complex64;

const TAU: f64 = 2.0 * PI;

/// Relative tolerance for the ratio and second-main-theorem checks.
pub const NEVANLINNA_TOLERANCE: f64 = 0.05;

/// Number of radii in a report grid.
pub const RADIUS_GRID: usize = 16;

fn c_re(x: f64) -> C {
    C::new(x, 0.0)
}

pub(crate) fn rat_f64(r: &Rational) -> f64 {
    r.to_f64().expect("rational out of f64 range")
}

/// Coefficients of `p` as f64, constant term first; empty for the zero
/// polynomial.
pub(crate) fn poly_f64(p: &QPoly) -> Vec<f64> {
    match p.degree() {
        Some(d) => (0..=d).map(|k| rat_f64(&p.coeff(k))).collect(),
        None => vec![],
    }
}

pub(crate) fn horner(coeffs: &[f64], z: C) -> C {
    let mut acc = C::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc * z + c_re(*c);
    }
    acc
}

fn horner_c(coeffs: &[C], z: C) -> C {
    let mut acc = C::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

fn derivative_f64(coeffs: &[f64]) -> Vec<f64> {
    (1..coeffs.len()).map(|k| coeffs[k] * k as f64).collect()
}

/// All roots of a complex polynomial by Durand-Kerner iteration with a
/// Newton polish, sorted by real then imaginary part.  Intended for
/// squarefree inputs; multiple roots converge but only linearly.
pub(crate) fn complex_roots(coeffs: &[C]) -> Vec<C> {
    let mut top = coeffs.len();
    while top > 0 && coeffs[top - 1].norm() == 0.0 {
        top -= 1;
    }
    if top <= 1 {
        return vec![];
    }
    let n = top - 1;
    let lc = coeffs[n];
    let monic: Vec<C> = coeffs[..=n].iter().map(|c| c / lc).collect();
    let bound = 1.0 + monic[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let seed = C::new(0.4, 0.9);
    let mut roots: Vec<C> = (0..n).map(|k| seed.powu(k as u32 + 1).scale(bound)).collect();
    for _ in 0..400 {
        let mut worst = 0.0f64;
        for k in 0..n {
            let xk = roots[k];
            let mut denom = C::new(1.0, 0.0);
            for (j, rj) in roots.iter().enumerate() {
                if j != k {
                    denom *= xk - rj;
                }
            }
            if denom.norm() == 0.0 {
                continue;
            }
            let step = horner_c(&monic, xk) / denom;
            roots[k] = xk - step;
            worst = worst.max(step.norm() / (1.0 + xk.norm()));
        }
        if worst < 1e-14 {
            break;
        }
    }
    let deriv: Vec<C> = (1..=n).map(|k| monic[k].scale(k as f64)).collect();
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let d = horner_c(&deriv, *r);
            if d.norm() > 1e-100 {
                *r -= horner_c(&monic, *r) / d;
            }
        }
    }
    roots.sort_by(|p, q| p.re.partial_cmp(&q.re).unwrap().then(p.im.partial_cmp(&q.im).unwrap()));
    roots
}

/// Optimal complex arithmetic-geometric mean: the square-root branch is
/// chosen at every step so that |a' - b'| <= |a' + b'|.
fn agm(mut a: C, mut b: C) -> C {
    for _ in 0..64 {
        if (a - b).norm() <= 1e-15 * (a.norm() + b.norm()) {
            break;
        }
        let a1 = (a + b).scale(0.5);
        let mut b1 = (a * b).sqrt();
        if (a1 - b1).norm() > (a1 + b1).norm() {
            b1 = -b1;
        }
        a = a1;
        b = b1;
    }
    (a + b).scale(0.5)
}

/// A period lattice `Z omega1 + Z omega2`, normalized so Im(omega2/omega1) > 0.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub omega1: C,
    pub omega2: C,
    pub covolume: f64,
}

impl Lattice {
    fn wedge(p: C, q: C) -> f64 {
        (p.conj() * q).im
    }

    /// Minimal-norm representative of `z` modulo the lattice.
    pub fn reduce(&self, z: C) -> C {
        let den = Self::wedge(self.omega1, self.omega2);
        let u = Self::wedge(z, self.omega2) / den;
        let v = Self::wedge(self.omega1, z) / den;
        let base = z - self.omega1.scale(u.round()) - self.omega2.scale(v.round());
        let mut best = base;
        for dm in -1..=1 {
            for dn in -1..=1 {
                let cand = base - self.omega1.scale(dm as f64) - self.omega2.scale(dn as f64);
                if cand.norm() < best.norm() {
                    best = cand;
                }
            }
        }
        best
    }

    /// Norm of a shortest nonzero lattice vector.
    pub fn min_norm(&self) -> f64 {
        let mut best = f64::INFINITY;
        for m in -3i32..=3 {
            for n in -3i32..=3 {
                if m == 0 && n == 0 {
                    continue;
                }
                let v = self.omega1.scale(m as f64) + self.omega2.scale(n as f64);
                best = best.min(v.norm());
            }
        }
        best
    }

    pub fn max_generator_norm(&self) -> f64 {
        self.omega1.norm().max(self.omega2.norm())
    }

    /// A real generator among the short lattice vectors, if one exists.
    pub fn real_generator(&self) -> Option<f64> {
        let cands = [
            self.omega1,
            self.omega2,
            self.omega1 + self.omega2,
            self.omega1 - self.omega2,
        ];
        cands
            .iter()
            .find(|w| w.im.abs() <= 1e-9 * w.norm())
            .map(|w| w.re.abs())
    }

    /// Norms |z0 + m omega1 + n omega2| <= r over all lattice translates,
    /// excluding any translate that lands on zero.
    fn translate_radii(&self, z0: C, r: f64) -> Vec<f64> {
        let den = Self::wedge(self.omega1, self.omega2).abs();
        let reach = r + z0.norm();
        let mbound = (reach * self.omega2.norm() / den).ceil() as i64 + 1;
        let nbound = (reach * self.omega1.norm() / den).ceil() as i64 + 1;
        let mut out = vec![];
        for m in -mbound..=mbound {
            for n in -nbound..=nbound {
                let rho = (z0 + self.omega1.scale(m as f64) + self.omega2.scale(n as f64)).norm();
                if rho <= r && rho > 1e-12 {
                    out.push(rho);
                }
            }
        }
        out
    }
}

fn series_tables(curve: &EllipticCurve) -> (Vec<f64>, Vec<f64>) {
    let order = 48usize;
    let exp = LocalExpansion::new(&curve.a, &curve.b, order);
    // x = P(u^2)/u^2 and y = Q(u^2)/u^3 with P, Q polynomial.
    let xs: Vec<f64> = (0..order).map(|m| rat_f64(&exp.x.coeff(2 * m as i64 - 2))).collect();
    let ys: Vec<f64> = (0..order).map(|m| rat_f64(&exp.y.coeff(2 * m as i64 - 3))).collect();
    (xs, ys)
}

/// Weierstrass coordinates on C modulo a period lattice: `eval` maps z to the
/// affine point (x, y) of the curve, `elliptic_log` inverts it.
#[derive(Clone, Debug)]
pub struct WpEvaluator {
    a: f64,
    b: f64,
    xs: Vec<f64>,
    ys: Vec<f64>,
    lattice: Lattice,
    min_norm: f64,
    series_radius: f64,
}

impl WpEvaluator {
    pub fn new(curve: &EllipticCurve) -> Result<Self> {
        let (xs, ys) = series_tables(curve);
        let a = rat_f64(&curve.a);
        let b = rat_f64(&curve.b);
        let f = curve.f_poly();
        let roots = complex_roots(&poly_f64(&f).iter().map(|c| c_re(*c)).collect::<Vec<_>>());
        let perms: [[usize; 3]; 6] =
            [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for perm in perms {
            let (e1, e2, e3) = (roots[perm[0]], roots[perm[1]], roots[perm[2]]);
            let m1 = agm((e1 - e3).sqrt(), (e1 - e2).sqrt());
            let m2 = agm((e1 - e3).sqrt(), (e2 - e3).sqrt());
            if m1.norm() < 1e-12 || m2.norm() < 1e-12 {
                continue;
            }
            let w1 = c_re(PI) / m1;
            let mut w2 = (C::i() * PI) / m2;
            let orient = Lattice::wedge(w1, w2);
            if orient.abs() < 1e-12 * w1.norm() * w2.norm() {
                continue;
            }
            if orient < 0.0 {
                w2 = -w2;
            }
            let lattice = Lattice {
                omega1: w1,
                omega2: w2,
                covolume: Lattice::wedge(w1, w2).abs(),
            };
            let cand = Self::assemble(a, b, xs.clone(), ys.clone(), lattice);
            if cand.half_periods_match(&roots) {
                return Ok(cand);
            }
        }
        Err(Error::internal(
            "period search did not produce a fundamental basis for the curve",
        ))
    }

    fn assemble(a: f64, b: f64, xs: Vec<f64>, ys: Vec<f64>, lattice: Lattice) -> Self {
        let min_norm = lattice.min_norm();
        WpEvaluator { a, b, xs, ys, lattice, min_norm, series_radius: 0.45 * min_norm }
    }

    /// Each half-period must land on its own root of f.
    fn half_periods_match(&self, roots: &[C]) -> bool {
        let halves = [
            self.lattice.omega1.scale(0.5),
            self.lattice.omega2.scale(0.5),
            (self.lattice.omega1 + self.lattice.omega2).scale(0.5),
        ];
        let mut used = [false; 3];
        for h in halves {
            let Ok((xh, _)) = self.eval(h) else { return false };
            let hit = roots.iter().enumerate().find(|(i, e)| {
                !used[*i] && (xh - *e).norm() <= 1e-6 * (1.0 + e.norm())
            });
            match hit {
                Some((i, _)) => used[i] = true,
                None => return false,
            }
        }
        true
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn min_norm(&self) -> f64 {
        self.min_norm
    }

    fn series_xy(&self, u: C) -> (C, C) {
        let s = u * u;
        (horner(&self.xs, s) / s, horner(&self.ys, s) / (s * u))
    }

    fn double(&self, x: C, y: C) -> (C, C) {
        let slope = (x * x * 3.0 + self.a) / (y * 2.0);
        let xn = slope * slope - x * 2.0;
        let yn = -(y + slope * (xn - x));
        (xn, yn)
    }

    /// The affine point (x, y) at z; refuses arguments too close to a
    /// lattice point, where the coordinates blow up.
    pub fn eval(&self, z: C) -> Result<(C, C)> {
        let z0 = self.lattice.reduce(z);
        if z0.norm() < 1e-6 * self.min_norm {
            return Err(Error::invalid(
                "argument is within 1e-6 of a lattice point; the coordinates have a pole there",
            ));
        }
        let mut w = z0;
        let mut k = 0u32;
        while w.norm() > self.series_radius {
            w = w.scale(0.5);
            k += 1;
        }
        let (mut x, mut y) = self.series_xy(w);
        for _ in 0..k {
            let (xn, yn) = self.double(x, y);
            x = xn;
            y = yn;
        }
        Ok((x, y))
    }

    /// The elliptic logarithm of an affine point, reduced modulo the lattice.
    /// The point is halved toward O until the local series applies, then the
    /// result is polished by Newton iteration against the original point.
    pub fn elliptic_log(&self, x0: C, y0: C) -> Result<C> {
        let scale = 1.0 + x0.norm();
        if y0.norm() < 1e-8 * scale.powf(1.5) {
            let halves = [
                self.lattice.omega1.scale(0.5),
                self.lattice.omega2.scale(0.5),
                (self.lattice.omega1 + self.lattice.omega2).scale(0.5),
            ];
            let mut best = halves[0];
            let mut err = f64::INFINITY;
            for h in halves {
                let (xh, _) = self.eval(h)?;
                let e = (xh - x0).norm();
                if e < err {
                    err = e;
                    best = h;
                }
            }
            if err <= 1e-6 * scale {
                return Ok(best);
            }
            return Err(Error::invalid("point with y = 0 does not lie on the curve"));
        }
        let thresh = (2.5 / self.series_radius).powi(2);
        let (mut x, mut y) = (x0, y0);
        let mut k = 0i32;
        while x.norm() < thresh {
            if k > 64 {
                return Err(Error::internal("point halving failed to approach the origin"));
            }
            // Roots xi of the halving quartic satisfy x(2Q) = x for x(Q) = xi.
            let quartic = [
                c_re(self.a * self.a) - x.scale(4.0 * self.b),
                -(x.scale(4.0 * self.a) + c_re(8.0 * self.b)),
                c_re(-2.0 * self.a),
                x.scale(-4.0),
                c_re(1.0),
            ];
            let roots = complex_roots(&quartic);
            let xi = roots
                .into_iter()
                .max_by(|p, q| p.norm().partial_cmp(&q.norm()).unwrap())
                .expect("quartic has roots");
            let eta0 = (xi * xi * xi + xi.scale(self.a) + c_re(self.b)).sqrt();
            let mut eta = eta0;
            let mut err = f64::INFINITY;
            for cand in [eta0, -eta0] {
                if cand.norm() == 0.0 {
                    continue;
                }
                let (_, yd) = self.double(xi, cand);
                let e = (yd - y).norm();
                if e < err {
                    err = e;
                    eta = cand;
                }
            }
            x = xi;
            y = eta;
            k += 1;
        }
        let mut u = c_re(1.0) / x.sqrt();
        for _ in 0..32 {
            let s = u * u;
            let fx = horner(&self.xs, s) / s - x;
            let dx = (horner(&self.ys, s) / (s * u)).scale(-2.0);
            if dx.norm() < 1e-100 {
                break;
            }
            let step = fx / dx;
            u -= step;
            if step.norm() <= 1e-16 * u.norm() {
                break;
            }
        }
        let (_, yu) = self.series_xy(u);
        if (yu - y).norm() > (yu + y).norm() {
            u = -u;
        }
        let mut z = self.lattice.reduce(u.scale(2f64.powi(k)));
        if y0.norm() > 1e-6 * scale.powf(1.5) {
            for _ in 0..3 {
                let (xz, yz) = self.eval(z)?;
                let d = yz.scale(-2.0);
                if d.norm() < 1e-12 {
                    break;
                }
                z -= (xz - x0) / d;
            }
        }
        Ok(self.lattice.reduce(z))
    }
}

/// Numeric embedding of a target value on the t-line.
fn embed_value(alpha: &BranchValue) -> Option<C> {
    match alpha {
        BranchValue::FiniteRational(t0) => Some(c_re(rat_f64(t0))),
        BranchValue::FiniteOrbit(mu) => {
            let coeffs: Vec<C> = poly_f64(mu).iter().map(|c| c_re(*c)).collect();
            Some(complex_roots(&coeffs)[0])
        }
        BranchValue::Infinity => None,
    }
}

/// Distinct x-coordinates of the finite part of the fiber, embedded in C.
fn fiber_x_roots(g: &RationalMap, alpha: &BranchValue, tau: Option<C>) -> Result<Vec<C>> {
    match alpha {
        BranchValue::FiniteRational(t0) => {
            let spec = g.fiber_polynomial().eval_t(t0).squarefree_part_q();
            Ok(complex_roots(&poly_f64(&spec).iter().map(|c| c_re(*c)).collect::<Vec<_>>()))
        }
        BranchValue::FiniteOrbit(mu) => {
            let field = NumberField::new(mu)?;
            let gen = field.gen();
            let phi = g.fiber_polynomial();
            let mut spec = Poly::zero(field.clone());
            let mut tpow = field.embed_rational(&rat_i(1));
            for tc in &phi.tcoeffs {
                spec = spec.add(&field.lift_poly(tc).scale(&tpow));
                tpow = crate::field::Field::mul(&field, &tpow, &gen);
            }
            let sq = spec.squarefree_part();
            let t = tau.expect("orbit value has an embedding");
            let coeffs: Vec<C> =
                (0..=sq.deg()).map(|k| horner(&poly_f64(&sq.coeff(k)), t)).collect();
            Ok(complex_roots(&coeffs))
        }
        BranchValue::Infinity => unreachable!("infinity is routed through the reciprocal map"),
    }
}

struct FiberLogs {
    zs: Vec<C>,
    origin: bool,
}

/// Elliptic logarithms of the distinct preimages of `alpha`, cross-checked
/// against the exact fiber size.
fn fiber_logs(g: &RationalMap, wp: &WpEvaluator, alpha: &BranchValue) -> Result<FiberLogs> {
    if matches!(alpha, BranchValue::Infinity) {
        let recip = g.reciprocal()?;
        return fiber_logs(&recip, wp, &BranchValue::FiniteRational(rat_i(0)));
    }
    let expected = fiber_profile(g, alpha)?.fiber_size();
    let origin = match alpha {
        BranchValue::FiniteRational(t0) => g.value_at_o() == Some(t0),
        _ => false,
    };
    let alpha_c = embed_value(alpha);
    let xs = fiber_x_roots(g, alpha, alpha_c)?;
    let fc = poly_f64(&g.curve.f_poly());
    let (na, nb, nc) = (poly_f64(&g.a), poly_f64(&g.b), poly_f64(&g.c));
    let av = alpha_c.expect("finite value");
    let mut zs = vec![];
    for x0 in xs {
        let fx = horner(&fc, x0);
        let scale = 1.0 + x0.norm();
        if fx.norm() < 1e-10 * scale.powi(3) {
            zs.push(wp.elliptic_log(x0, C::new(0.0, 0.0))?);
            continue;
        }
        let y0 = fx.sqrt();
        for yc in [y0, -y0] {
            let num = horner(&na, x0) + horner(&nb, x0) * yc;
            let den = horner(&nc, x0);
            let dist = (num - av * den).norm()
                / ((num.norm_sqr() + den.norm_sqr()) * (1.0 + av.norm_sqr())).sqrt();
            if dist < 1e-5 {
                zs.push(wp.elliptic_log(x0, yc)?);
            }
        }
    }
    if zs.len() + origin as usize != expected {
        return Err(Error::internal(format!(
            "numeric fiber embedding found {} preimages, the exact profile gives {}",
            zs.len() + origin as usize,
            expected
        )));
    }
    Ok(FiberLogs { zs, origin })
}

/// Jump radii of the counting function for one target value, up to `r_cap`.
struct Jumps {
    radii: Vec<f64>,
    origin: bool,
}

fn counting_jumps(
    g: &RationalMap,
    wp: &WpEvaluator,
    alpha: &BranchValue,
    r_cap: f64,
) -> Result<Jumps> {
    let logs = fiber_logs(g, wp, alpha)?;
    let mut radii = vec![];
    for z in &logs.zs {
        radii.extend(wp.lattice.translate_radii(*z, r_cap));
    }
    if logs.origin {
        radii.extend(wp.lattice.translate_radii(C::new(0.0, 0.0), r_cap));
    }
    radii.sort_by(|p, q| p.partial_cmp(q).unwrap());
    Ok(Jumps { radii, origin: logs.origin })
}

fn n1_from_jumps(jumps: &Jumps, r: f64) -> f64 {
    let mut acc = if jumps.origin { r.ln() } else { 0.0 };
    for rho in &jumps.radii {
        if *rho > r {
            break;
        }
        acc += (r / rho).ln();
    }
    acc
}

/// Truncated counting function N^(1)(alpha, r), computed exactly from the
/// jump radii: every preimage counts once regardless of multiplicity.
pub fn truncated_counting(
    g: &RationalMap,
    wp: &WpEvaluator,
    alpha: &BranchValue,
    r: f64,
) -> Result<f64> {
    let jumps = counting_jumps(g, wp, alpha, r)?;
    Ok(n1_from_jumps(&jumps, r))
}

/// Leading-term characteristic `d pi r^2 / (2 covol)`.
pub fn characteristic_leading(g: &RationalMap, lattice: &Lattice, r: f64) -> f64 {
    g.degree() as f64 * PI * r * r / (2.0 * lattice.covolume)
}

fn gauss_legendre_nodes(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = pk;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

struct MapTables {
    na: Vec<f64>,
    nb: Vec<f64>,
    nc: Vec<f64>,
    da: Vec<f64>,
    db: Vec<f64>,
    dc: Vec<f64>,
}

impl MapTables {
    fn new(g: &RationalMap) -> Self {
        let (na, nb, nc) = (poly_f64(&g.a), poly_f64(&g.b), poly_f64(&g.c));
        MapTables {
            da: derivative_f64(&na),
            db: derivative_f64(&nb),
            dc: derivative_f64(&nc),
            na,
            nb,
            nc,
        }
    }

    /// Squared spherical derivative of g(phi(z)), in projective form
    /// |N'D - ND'|^2 / (|N|^2 + |D|^2)^2 so poles need no special casing.
    fn spherical_sq(&self, wp: &WpEvaluator, a: f64, z: C) -> Result<f64> {
        let mut zz = z;
        let (x, y) = loop {
            match wp.eval(zz) {
                Ok(p) => break p,
                Err(_) => zz += c_re(1e-5 * wp.min_norm),
            }
        };
        let _ = a;
        // x' = -2y and y' = -(3x^2 + A) along z, from the local expansion.
        let xp = y.scale(-2.0);
        let yp = -(x * x * 3.0 + wp.a);
        let n = horner(&self.na, x) + horner(&self.nb, x) * y;
        let d = horner(&self.nc, x);
        let np = (horner(&self.da, x) + horner(&self.db, x) * y) * xp + horner(&self.nb, x) * yp;
        let dp = horner(&self.dc, x) * xp;
        let num = (np * d - n * dp).norm_sqr();
        let den = n.norm_sqr() + d.norm_sqr();
        Ok(num / (den * den))
    }
}

/// Ahlfors-Shimizu characteristic by quadrature:
/// `T(r) = (1/pi) int_{|z|<=r} s(z)^2 log(r/|z|) dA` with s the spherical
/// derivative of g(phi(z)).
pub fn characteristic_quadrature(g: &RationalMap, wp: &WpEvaluator, r: f64) -> Result<f64> {
    let tables = MapTables::new(g);
    let n_r = ((8.0 * r / wp.min_norm).ceil() as usize).clamp(64, 320);
    let mut acc = 0.0;
    for (t, w) in gauss_legendre_nodes(n_r) {
        let rho = r * 0.5 * (t + 1.0);
        if rho <= 0.0 || rho >= r {
            continue;
        }
        let m = ((10.0 * TAU * rho / wp.min_norm).ceil() as usize).clamp(32, 4096);
        let mut sum = 0.0;
        for j in 0..m {
            let theta = TAU * (j as f64 + 0.5) / m as f64;
            sum += tables.spherical_sq(wp, wp.a, C::from_polar(rho, theta))?;
        }
        acc += (w * r * 0.5) * (sum / m as f64) * TAU * (r / rho).ln() * rho;
    }
    Ok(acc / PI)
}

/// Geometric grid of RADIUS_GRID radii ending at r_max.
pub fn radius_grid(r_max: f64) -> Vec<f64> {
    (0..RADIUS_GRID)
        .map(|i| r_max * 2f64.powf((i as f64 - (RADIUS_GRID - 1) as f64) / 4.0))
        .collect()
}

/// Grid report for the counting-to-characteristic ratio of one value.
#[derive(Debug, Serialize, Deserialize)]
pub struct RatioReport {
    pub target: String,
    pub fiber_size: usize,
    pub degree: usize,
    pub expected: f64,
    pub radii: Vec<f64>,
    pub counting: Vec<f64>,
    pub characteristic: Vec<f64>,
    pub ratios: Vec<f64>,
    pub deviation: f64,
    pub ok: bool,
}

/// The defect-style ratio test: N^(1)(alpha, r)/T(r) should approach
/// #g^{-1}(alpha)/deg g; the deviation is measured at r_max.
pub fn check_ratio_lemma(
    g: &RationalMap,
    wp: &WpEvaluator,
    alpha: &BranchValue,
    r_max: f64,
) -> Result<RatioReport> {
    let profile = fiber_profile(g, alpha)?;
    let expected = profile.fiber_size() as f64 / g.degree() as f64;
    let jumps = counting_jumps(g, wp, alpha, r_max)?;
    let radii = radius_grid(r_max);
    let counting: Vec<f64> = radii.iter().map(|r| n1_from_jumps(&jumps, *r)).collect();
    let characteristic: Vec<f64> =
        radii.iter().map(|r| characteristic_leading(g, &wp.lattice, *r)).collect();
    let ratios: Vec<f64> =
        counting.iter().zip(&characteristic).map(|(n, t)| n / t).collect();
    let deviation = (ratios.last().unwrap() - expected).abs() / expected;
    Ok(RatioReport {
        target: alpha.describe(),
        fiber_size: profile.fiber_size(),
        degree: g.degree(),
        expected,
        radii,
        counting,
        characteristic,
        ratios,
        deviation,
        ok: deviation <= NEVANLINNA_TOLERANCE,
    })
}

/// Grid report for the second-main-theorem margin over a value set.
#[derive(Debug, Serialize, Deserialize)]
pub struct SmtReport {
    pub targets: Vec<String>,
    pub q: usize,
    pub radii: Vec<f64>,
    /// One counting-function row per target, on the radius grid.
    pub counting: Vec<Vec<f64>>,
    pub counting_sum: Vec<f64>,
    pub characteristic: Vec<f64>,
    pub margins: Vec<f64>,
    pub margin: f64,
    pub characteristic_at_r_max: f64,
    pub ok: bool,
}

/// Margin `sum_alpha N^(1)(alpha, r) - (q - 2) T(r)`, which the second main
/// theorem keeps essentially nonnegative; `ok` allows -5% of T(r_max).
pub fn check_smt(
    g: &RationalMap,
    wp: &WpEvaluator,
    alphas: &[BranchValue],
    r_max: f64,
) -> Result<SmtReport> {
    if alphas.len() < 3 {
        return Err(Error::invalid("the margin test needs at least three target values"));
    }
    let targets: Vec<String> = alphas.iter().map(|a| a.describe()).collect();
    for (i, t) in targets.iter().enumerate() {
        if targets[..i].contains(t) {
            return Err(Error::invalid(format!("duplicate target value {t}")));
        }
    }
    let q = alphas.len();
    let jumps: Vec<Jumps> = alphas
        .iter()
        .map(|a| counting_jumps(g, wp, a, r_max))
        .collect::<Result<_>>()?;
    let radii = radius_grid(r_max);
    let counting: Vec<Vec<f64>> = jumps
        .iter()
        .map(|j| radii.iter().map(|r| n1_from_jumps(j, *r)).collect())
        .collect();
    let counting_sum: Vec<f64> = (0..radii.len())
        .map(|i| counting.iter().map(|row| row[i]).sum())
        .collect();
    let characteristic: Vec<f64> =
        radii.iter().map(|r| characteristic_leading(g, &wp.lattice, *r)).collect();
    let margins: Vec<f64> = counting_sum
        .iter()
        .zip(&characteristic)
        .map(|(n, t)| n - (q as f64 - 2.0) * t)
        .collect();
    let margin = *margins.last().unwrap();
    let t_max = *characteristic.last().unwrap();
    Ok(SmtReport {
        targets,
        q,
        radii,
        counting,
        counting_sum,
        characteristic,
        margins,
        margin,
        characteristic_at_r_max: t_max,
        ok: margin >= -NEVANLINNA_TOLERANCE * t_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::canonicalize;
    use crate::expr::parse_map_expression;
    use crate::field::rat;

    struct Lcg(u64);

    impl Lcg {
        fn next(&mut self) -> u64 {
            self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            self.0 >> 3
        }

        fn unit(&mut self) -> f64 {
            (self.next() % (1 << 53)) as f64 / (1u64 << 53) as f64
        }
    }

    fn curve(a: i64, b: i64) -> EllipticCurve {
        EllipticCurve::new(rat_i(a), rat_i(b)).unwrap()
    }

    fn map_on(curve: &EllipticCurve, text: &str) -> RationalMap {
        canonicalize(&parse_map_expression(text).unwrap(), curve).unwrap()
    }

    fn random_z(wp: &WpEvaluator, rng: &mut Lcg) -> C {
        loop {
            let u = rng.unit() - 0.5;
            let v = rng.unit() - 0.5;
            let z = wp.lattice().omega1.scale(u) + wp.lattice().omega2.scale(v);
            if wp.lattice().reduce(z).norm() > 0.05 * wp.min_norm() {
                return z;
            }
        }
    }

    #[test]
    fn agm_periods_match_quadrature() {
        // Real period of y^2 = x^3 - x against the arc-length integral
        // int_1^inf dx/sqrt(x^3-x) = int_0^{pi/2} 2 dtheta/sqrt(1+cos^2).
        let wp = WpEvaluator::new(&curve(-1, 0)).unwrap();
        let real = wp.lattice().real_generator().expect("rectangular lattice");
        let mut quad = 0.0;
        for (t, w) in gauss_legendre_nodes(80) {
            let theta = PI / 4.0 * (t + 1.0);
            quad += w * (PI / 4.0) * 2.0 / (1.0 + theta.cos() * theta.cos()).sqrt();
        }
        assert!((real - quad).abs() <= 1e-10 * quad, "period {real} vs quadrature {quad}");
        // Square lattice: covolume is the square of the real period.
        assert!((wp.lattice().covolume - quad * quad).abs() <= 1e-9 * quad * quad);
    }

    #[test]
    fn half_periods_land_on_the_two_torsion() {
        for (a, b) in [(-1i64, 0i64), (1, 1), (-2, 2), (0, 1)] {
            let e = curve(a, b);
            let wp = WpEvaluator::new(&e).unwrap();
            let lat = wp.lattice().clone();
            for h in [lat.omega1.scale(0.5), lat.omega2.scale(0.5)] {
                let (x, y) = wp.eval(h).unwrap();
                let fx = horner(&poly_f64(&e.f_poly()), x);
                assert!(fx.norm() <= 1e-6 * (1.0 + x.norm()).powi(3));
                assert!(y.norm() <= 1e-5 * (1.0 + x.norm()).powf(1.5));
            }
        }
    }

    #[test]
    fn wp_satisfies_the_curve_equation() {
        let e = curve(-1, 0);
        let wp = WpEvaluator::new(&e).unwrap();
        let mut rng = Lcg(7);
        for _ in 0..100 {
            let z = random_z(&wp, &mut rng);
            let (x, y) = wp.eval(z).unwrap();
            let lhs = y * y;
            let rhs = x * x * x + x.scale(-1.0);
            let scale = 1.0 + lhs.norm() + rhs.norm();
            assert!((lhs - rhs).norm() <= 1e-9 * scale, "residual at z = {z}");
        }
        for (a, b) in [(1i64, 1i64), (-7, 6), (0, 1)] {
            let e = curve(a, b);
            let wp = WpEvaluator::new(&e).unwrap();
            for _ in 0..20 {
                let z = random_z(&wp, &mut rng);
                let (x, y) = wp.eval(z).unwrap();
                let rhs = x * x * x + x.scale(a as f64) + c_re(b as f64);
                let scale = 1.0 + (y * y).norm() + rhs.norm();
                assert!((y * y - rhs).norm() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn wp_is_doubly_periodic() {
        let wp = WpEvaluator::new(&curve(-2, 2)).unwrap();
        let mut rng = Lcg(11);
        for _ in 0..25 {
            let z = random_z(&wp, &mut rng);
            let (x0, y0) = wp.eval(z).unwrap();
            for w in [wp.lattice().omega1, wp.lattice().omega2] {
                let (x1, y1) = wp.eval(z + w).unwrap();
                assert!((x0 - x1).norm() <= 1e-9 * (1.0 + x0.norm()));
                assert!((y0 - y1).norm() <= 1e-9 * (1.0 + y0.norm()));
            }
        }
    }

    #[test]
    fn elliptic_log_inverts_the_coordinates() {
        let mut rng = Lcg(13);
        for (a, b) in [(-1i64, 0i64), (1, 1), (0, 1)] {
            let wp = WpEvaluator::new(&curve(a, b)).unwrap();
            for _ in 0..30 {
                let z = random_z(&wp, &mut rng);
                let (x, y) = wp.eval(z).unwrap();
                let zl = wp.elliptic_log(x, y).unwrap();
                let (xr, yr) = wp.eval(zl).unwrap();
                assert!((xr - x).norm() <= 1e-9 * (1.0 + x.norm()), "x mismatch");
                assert!((yr - y).norm() <= 1e-9 * (1.0 + y.norm()), "y mismatch");
            }
        }
    }

    #[test]
    fn rational_points_round_trip() {
        // (2,3) and (0,1) on y^2 = x^3 + 1, and the two-torsion of y^2 = x^3 - x.
        let wp = WpEvaluator::new(&curve(0, 1)).unwrap();
        for (px, py) in [(2.0, 3.0), (0.0, 1.0)] {
            let z = wp.elliptic_log(c_re(px), c_re(py)).unwrap();
            let (x, y) = wp.eval(z).unwrap();
            assert!((x - c_re(px)).norm() <= 1e-9 * (1.0 + px.abs()));
            assert!((y - c_re(py)).norm() <= 1e-9 * (1.0 + py.abs()));
        }
        let wp = WpEvaluator::new(&curve(-1, 0)).unwrap();
        for px in [-1.0, 0.0, 1.0] {
            let z = wp.elliptic_log(c_re(px), c_re(0.0)).unwrap();
            let two = wp.lattice().reduce(z.scale(2.0));
            assert!(two.norm() <= 1e-8 * wp.min_norm(), "log of two-torsion is a half-period");
        }
    }

    #[test]
    fn counting_matches_the_fiber_ratio() {
        let e = curve(-1, 0);
        let wp = WpEvaluator::new(&e).unwrap();
        let g = map_on(&e, "x");
        let r_max = 20.0 * wp.lattice().max_generator_norm();
        for (alpha, expected) in [
            (BranchValue::FiniteRational(rat_i(1)), 0.5),
            (BranchValue::FiniteRational(rat_i(5)), 1.0),
            (BranchValue::Infinity, 0.5),
        ] {
            let report = check_ratio_lemma(&g, &wp, &alpha, r_max).unwrap();
            assert!(
                report.ok,
                "ratio for {} deviates {:.4} (expected {expected})",
                report.target, report.deviation
            );
            assert!((report.expected - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn counting_handles_orbit_values() {
        let e = curve(-1, 0);
        let wp = WpEvaluator::new(&e).unwrap();
        let g = map_on(&e, "x");
        let mu = QPoly::from_i64(&[-3, 0, 1]);
        let alpha = BranchValue::FiniteOrbit(mu);
        let r = 10.0 * wp.lattice().max_generator_norm();
        let n1 = truncated_counting(&g, &wp, &alpha, r).unwrap();
        assert!(n1 > 0.0);
        let t = characteristic_leading(&g, wp.lattice(), r);
        assert!((n1 / t - 1.0).abs() < 0.1, "two unramified preimages of sqrt(3)");
    }

    #[test]
    fn margin_is_flat_on_branch_values_and_positive_off_them() {
        let e = curve(-1, 0);
        let wp = WpEvaluator::new(&e).unwrap();
        let g = map_on(&e, "x");
        let r_max = 20.0 * wp.lattice().max_generator_norm();
        let branch = [
            BranchValue::FiniteRational(rat_i(-1)),
            BranchValue::FiniteRational(rat_i(0)),
            BranchValue::FiniteRational(rat_i(1)),
            BranchValue::Infinity,
        ];
        let report = check_smt(&g, &wp, &branch, r_max).unwrap();
        assert!(report.ok);
        assert!(report.margin.abs() <= 0.05 * report.characteristic_at_r_max);

        let generic = [
            BranchValue::FiniteRational(rat_i(2)),
            BranchValue::FiniteRational(rat_i(3)),
            BranchValue::FiniteRational(rat_i(5)),
        ];
        let report = check_smt(&g, &wp, &generic, r_max).unwrap();
        assert!(report.margin >= 0.5 * report.characteristic_at_r_max);
    }

    #[test]
    fn characteristic_modes_agree() {
        let e = curve(-1, 0);
        let wp = WpEvaluator::new(&e).unwrap();
        let g = map_on(&e, "x");
        let r = 20.0 * wp.lattice().max_generator_norm();
        let lead = characteristic_leading(&g, wp.lattice(), r);
        let quad = characteristic_quadrature(&g, &wp, r).unwrap();
        assert!(
            (quad - lead).abs() <= 0.05 * lead,
            "leading {lead} vs Ahlfors-Shimizu {quad}"
        );
    }

    #[test]
    fn eval_refuses_lattice_points() {
        let wp = WpEvaluator::new(&curve(-1, 0)).unwrap();
        assert!(wp.eval(C::new(0.0, 0.0)).is_err());
        assert!(wp.eval(wp.lattice().omega1).is_err());
    }

    #[test]
    fn ratio_deviation_is_reported_against_the_last_radius() {
        let e = curve(0, 1);
        let wp = WpEvaluator::new(&e).unwrap();
        let g = map_on(&e, "y");
        let r_max = 20.0 * wp.lattice().max_generator_norm();
        let report =
            check_ratio_lemma(&g, &wp, &BranchValue::FiniteRational(rat(0, 1)), r_max).unwrap();
        // y has three simple zeros, so the ratio tends to 3/3 = 1.
        assert!((report.expected - 1.0).abs() < 1e-12);
        assert!(report.ok, "deviation {:.4}", report.deviation);
        assert_eq!(report.radii.len(), RADIUS_GRID);
    }
}
