//! Exact torsion-image polynomials and their intersection counts, a
//! floating-point brute-force cross-check on the Riemann sphere, parameter
//! sweeps over the Legendre family, and Mordell-Weil box experiments built on
//! the exact group law.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::bipoly::BiPoly;
use crate::curve::{canonicalize_shifted, DivisionPolys, EllipticCurve, RationalMap};
use crate::error::{Error, Result};
use crate::expr::parse_map_expression;
use crate::factor::{factor_over_q, factored_var_string};
use crate::field::{rat_i, Rational, Rationals};
use crate::nevanlinna::{horner, poly_f64, rat_f64, WpEvaluator};
use crate::poly::QPoly;
use crate::series::{compose, Series};

type C = Complex64;

/// Hard cap on the number of combinations `mw_enumerate` will expand.
pub const MW_BOX_CAP: usize = 200_000;

/// Default chordal tolerance for the floating-point cross-check.
pub const BRUTE_FORCE_TOLERANCE: f64 = 1e-8;

/// Largest torsion level accepted by `brute_force_check`.
pub const BRUTE_FORCE_MAX_LEVEL: usize = 10;

/// Version tag prepended to locked sweep tables.
pub const SWEEP_TABLE_VERSION: &str = "torsion-meet sweep-table v1";

/// The image of a torsion packet under a rational map: a monic squarefree
/// polynomial whose roots are exactly the finite values attained, plus a flag
/// recording whether infinity is attained. The value at `O` is always part of
/// the packet.
#[derive(Clone, Debug, PartialEq)]
pub struct TorsionImagePoly {
    pub level: usize,
    pub cumulative: bool,
    pub finite_part: QPoly,
    pub includes_infinity: bool,
}

impl TorsionImagePoly {
    /// Number of distinct values, finite and infinite.
    pub fn value_count(&self) -> usize {
        self.finite_part.deg() + self.includes_infinity as usize
    }

    /// The finite part rendered as a product of irreducible factors in `t`.
    pub fn finite_factored(&self) -> String {
        factored_var_string(&self.finite_part, "t")
    }
}

/// Computes the exact image of a torsion packet under `g`. With `cumulative`
/// set the packet is every point of order at most `level`; otherwise it is
/// the kernel of multiplication by `level`.
///
/// The finite values are read off as the roots of the resultant in x of the
/// content-free fiber polynomial with the torsion x-polynomial; because the
/// content is removed first, values attained only after cancelling a common
/// zero of numerator and denominator are still picked up. Poles over torsion
/// x-values are detected by place valuations and set the infinity flag.
pub fn torsion_image(g: &RationalMap, level: usize, cumulative: bool) -> Result<TorsionImagePoly> {
    if level < 2 {
        return Err(Error::invalid("torsion level must be at least 2"));
    }
    let div = DivisionPolys::new(&g.curve, level);
    let phi = image_form(g);
    let mut pieces = Vec::new();
    for d in packet_orders(level, cumulative) {
        pieces.push(piece_image(g, &phi, div.exact_order_x(d)));
    }
    Ok(assemble_image(g, level, cumulative, &pieces))
}

/// Exact orders making up a packet: every order up to the level when
/// cumulative, the divisors of the level otherwise.
fn packet_orders(level: usize, cumulative: bool) -> Vec<usize> {
    (2..=level).filter(|d| cumulative || level % d == 0).collect()
}

/// Fiber form used for image extraction. Maps without a y-part admit the
/// linear form `a - t c`, which keeps resultant degrees at half the norm
/// form's; either way the x-content is removed so that values attained only
/// after cancelling a common zero are still picked up.
fn image_form(g: &RationalMap) -> BiPoly {
    if g.is_even() {
        let phi = BiPoly::new(vec![g.a.clone(), g.c.neg()]);
        let content = phi.x_content();
        if content.is_constant() {
            phi
        } else {
            phi.div_x_poly(&content)
        }
    } else {
        g.fiber_polynomial().clone()
    }
}

/// Image of the points with x-coordinates among the roots of `piece`: the
/// monic squarefree polynomial of attained finite values and a flag for a
/// pole over one of the roots.
fn piece_image(g: &RationalMap, phi: &BiPoly, piece: &QPoly) -> (QPoly, bool) {
    let finite = phi.resultant_x(piece).squarefree_part_q().monic();
    let mut pole = false;
    let shared = piece.fast_gcd(&g.c);
    if shared.deg() >= 1 {
        for (q, _) in factor_over_q(&shared).factors {
            if pole_over_root(g, &q) {
                pole = true;
                break;
            }
        }
    }
    (finite, pole)
}

/// Squarefree union of the per-order images together with the value at O.
fn assemble_image(
    g: &RationalMap,
    level: usize,
    cumulative: bool,
    pieces: &[(QPoly, bool)],
) -> TorsionImagePoly {
    let mut finite = QPoly::one(Rationals);
    let mut includes_infinity = g.value_at_o().is_none();
    for (u, pole) in pieces {
        includes_infinity |= *pole;
        let h = finite.fast_gcd(u);
        let fresh = if h.is_constant() { u.clone() } else { u.exact_div(&h).expect("gcd divides") };
        finite = finite.mul(&fresh);
    }
    if let Some(v) = g.value_at_o() {
        if !finite.eval(v).is_zero() {
            finite = finite.mul(&QPoly::new(Rationals, vec![-v.clone(), rat_i(1)]));
        }
    }
    TorsionImagePoly { level, cumulative, finite_part: finite.monic(), includes_infinity }
}

/// Multiplicity of the irreducible factor `q` in `p`; None for the zero
/// polynomial.
fn mult_in(p: &QPoly, q: &QPoly) -> Option<usize> {
    p.degree()?;
    let mut m = 0usize;
    let mut r = p.clone();
    while let Some(next) = r.exact_div(q) {
        m += 1;
        r = next;
    }
    Some(m)
}

fn opt_min(a: Option<usize>, b: Option<usize>) -> usize {
    match (a, b) {
        (Some(x), Some(y)) => x.min(y),
        (Some(x), None) => x,
        (None, Some(y)) => y,
        (None, None) => unreachable!("map with identically zero numerator"),
    }
}

/// Whether some place of the curve over a root of the irreducible `q` is a
/// pole of `g`. Over a ramified root (q divides f) the local valuations are
/// v(q(x)) = 2 and v(y) = 1; over an unramified root the two places see the
/// numerator with valuations k and m - k, where k = min(mult a, mult b) and m
/// is the multiplicity of q in the norm a^2 - b^2 f.
fn pole_over_root(g: &RationalMap, q: &QPoly) -> bool {
    let mc = mult_in(&g.c, q).expect("denominator is nonzero");
    if mc == 0 {
        return false;
    }
    let f = g.curve.f_poly();
    let ma = mult_in(&g.a, q);
    let mb = mult_in(&g.b, q);
    if f.exact_div(q).is_some() {
        let vnum = opt_min(ma.map(|m| 2 * m), mb.map(|m| 2 * m + 1));
        vnum < 2 * mc
    } else {
        let norm = g.a.mul(&g.a).sub(&g.b.mul(&g.b).mul(&f));
        let mnorm = mult_in(&norm, q).expect("norm of a nonzero map is nonzero");
        let k = opt_min(ma, mb);
        k.min(mnorm - k) < mc
    }
}

/// The exact meet of two value sets. For torsion images `levels` holds the
/// two torsion levels; the Mordell-Weil variant stores the box radii there.
#[derive(Clone, Debug)]
pub struct IntersectionCount {
    pub levels: (usize, usize),
    pub count: usize,
    pub witness: QPoly,
    pub includes_infinity: bool,
}

/// Intersects two torsion images exactly: the witness polynomial is the monic
/// gcd of the finite parts, and infinity counts when both sides attain it.
pub fn intersect_count(left: &TorsionImagePoly, right: &TorsionImagePoly) -> IntersectionCount {
    let witness = left.finite_part.fast_gcd(&right.finite_part).monic();
    let includes_infinity = left.includes_infinity && right.includes_infinity;
    IntersectionCount {
        levels: (left.level, right.level),
        count: witness.deg() + includes_infinity as usize,
        witness,
        includes_infinity,
    }
}

/// A rational point in affine or projective-infinity form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CurvePoint {
    Infinity,
    Affine(Rational, Rational),
}

impl CurvePoint {
    pub fn describe(&self) -> String {
        match self {
            CurvePoint::Infinity => "O".to_string(),
            CurvePoint::Affine(x, y) => format!("({x}, {y})"),
        }
    }
}

/// Whether `p` satisfies the curve equation.
pub fn on_curve(curve: &EllipticCurve, p: &CurvePoint) -> bool {
    match p {
        CurvePoint::Infinity => true,
        CurvePoint::Affine(x, y) => y * y == curve.f_poly().eval(x),
    }
}

pub fn point_neg(p: &CurvePoint) -> CurvePoint {
    match p {
        CurvePoint::Infinity => CurvePoint::Infinity,
        CurvePoint::Affine(x, y) => CurvePoint::Affine(x.clone(), -y.clone()),
    }
}

/// Chord-tangent addition.
pub fn point_add(curve: &EllipticCurve, p: &CurvePoint, q: &CurvePoint) -> CurvePoint {
    let (x1, y1) = match p {
        CurvePoint::Infinity => return q.clone(),
        CurvePoint::Affine(x, y) => (x, y),
    };
    let (x2, y2) = match q {
        CurvePoint::Infinity => return p.clone(),
        CurvePoint::Affine(x, y) => (x, y),
    };
    let slope = if x1 == x2 {
        if (y1 + y2).is_zero() {
            return CurvePoint::Infinity;
        }
        (rat_i(3) * x1 * x1 + &curve.a) / (rat_i(2) * y1)
    } else {
        (y2 - y1) / (x2 - x1)
    };
    let x3 = &slope * &slope - x1 - x2;
    let y3 = &slope * &(x1 - &x3) - y1;
    CurvePoint::Affine(x3, y3)
}

/// n-fold multiple by double-and-add.
pub fn point_mul(curve: &EllipticCurve, n: i64, p: &CurvePoint) -> CurvePoint {
    let base = if n < 0 { point_neg(p) } else { p.clone() };
    let mut k = n.unsigned_abs();
    let mut acc = CurvePoint::Infinity;
    let mut pow = base;
    while k > 0 {
        if k & 1 == 1 {
            acc = point_add(curve, &acc, &pow);
        }
        k >>= 1;
        if k > 0 {
            pow = point_add(curve, &pow, &pow);
        }
    }
    acc
}

/// Exact order of `p`, searched up to `cap`; None when it exceeds the cap
/// (in particular for points of infinite order).
pub fn point_order(curve: &EllipticCurve, p: &CurvePoint, cap: usize) -> Option<usize> {
    let mut acc = p.clone();
    for k in 1..=cap {
        if acc == CurvePoint::Infinity {
            return Some(k);
        }
        acc = point_add(curve, &acc, p);
    }
    None
}

/// Evaluates `g` exactly at a rational point; None stands for the value
/// infinity. Indeterminate 0/0 specializations are resolved through the local
/// expansion of the curve at the point.
pub fn eval_map(g: &RationalMap, p: &CurvePoint) -> Result<Option<Rational>> {
    let (x0, y0) = match p {
        CurvePoint::Infinity => return Ok(g.value_at_o().cloned()),
        CurvePoint::Affine(x, y) => (x, y),
    };
    if !on_curve(&g.curve, p) {
        return Err(Error::invalid(format!("point {} is not on the curve", p.describe())));
    }
    let num = g.a.eval(x0) + g.b.eval(x0) * y0;
    let den = g.c.eval(x0);
    if !den.is_zero() {
        return Ok(Some(num / den));
    }
    if !num.is_zero() {
        return Ok(None);
    }
    if y0.is_zero() {
        Ok(resolve_two_torsion(g, x0))
    } else {
        Ok(resolve_generic(g, x0, y0))
    }
}

/// Value at an indeterminate specialization over a point with y = 0, where
/// x - x0 has valuation 2 and y has valuation 1. When numerator and
/// denominator valuations tie, both are even, so the leading numerator term
/// comes from the y-free part alone.
fn resolve_two_torsion(g: &RationalMap, x0: &Rational) -> Option<Rational> {
    let lin = QPoly::new(Rationals, vec![-x0.clone(), rat_i(1)]);
    let ma = mult_in(&g.a, &lin);
    let mb = mult_in(&g.b, &lin);
    let mc = mult_in(&g.c, &lin).expect("denominator is nonzero");
    let vnum = opt_min(ma.map(|m| 2 * m), mb.map(|m| 2 * m + 1));
    let vden = 2 * mc;
    if vnum > vden {
        Some(rat_i(0))
    } else if vnum < vden {
        None
    } else {
        let ared = strip_factor(&g.a, &lin, ma.unwrap());
        let cred = strip_factor(&g.c, &lin, mc);
        Some(ared.eval(x0) / cred.eval(x0))
    }
}

fn strip_factor(p: &QPoly, q: &QPoly, times: usize) -> QPoly {
    let mut r = p.clone();
    for _ in 0..times {
        r = r.exact_div(q).expect("known factor divides");
    }
    r
}

/// Value at an indeterminate specialization with y0 != 0, by expanding the
/// branch y = y0 sqrt(1 + (f(x0 + s) - y0^2)/y0^2) in the local parameter s.
fn resolve_generic(g: &RationalMap, x0: &Rational, y0: &Rational) -> Option<Rational> {
    let degs = g.a.degree().unwrap_or(0) + g.b.degree().unwrap_or(0) + g.c.degree().unwrap_or(0);
    let prec = 2 * (degs + 8) as i64;
    let shift = Series::from_poly(&QPoly::new(Rationals, vec![x0.clone(), rat_i(1)]));
    let fs = compose(&g.curve.f_poly(), &shift);
    let y0sq = y0 * y0;
    let h = fs.sub(&Series::constant(y0sq.clone())).scale(&y0sq.recip());
    let ys = h.sqrt_one_plus(prec).scale(y0);
    let num = compose(&g.a, &shift).add(&compose(&g.b, &shift).mul(&ys));
    let den = compose(&g.c, &shift);
    let vden = den.valuation().expect("denominator is nonzero");
    match num.valuation() {
        None => Some(rat_i(0)),
        Some(vnum) if vnum > vden => Some(rat_i(0)),
        Some(vnum) if vnum < vden => None,
        Some(vnum) => Some(num.coeff(vnum) / den.coeff(vden)),
    }
}

/// A box inside the Mordell-Weil group: all sums of the generators with
/// coefficients bounded by `radius` in absolute value.
#[derive(Clone, Debug)]
pub struct MwSpec {
    pub curve: EllipticCurve,
    pub generators: Vec<CurvePoint>,
    pub radius: i64,
}

/// Expands the box, deduplicated and sorted.
pub fn mw_enumerate(spec: &MwSpec) -> Result<Vec<CurvePoint>> {
    if spec.radius < 0 {
        return Err(Error::invalid("box radius must be nonnegative"));
    }
    for p in &spec.generators {
        if !on_curve(&spec.curve, p) {
            return Err(Error::invalid(format!("generator {} is not on the curve", p.describe())));
        }
    }
    let side = 2 * spec.radius as usize + 1;
    let mut combos = 1usize;
    for _ in &spec.generators {
        combos = combos
            .checked_mul(side)
            .filter(|&n| n <= MW_BOX_CAP)
            .ok_or_else(|| {
                Error::invalid(format!("box enumeration exceeds the cap of {MW_BOX_CAP} combinations"))
            })?;
    }
    let mut acc = vec![CurvePoint::Infinity];
    for gen in &spec.generators {
        let mut multiples = Vec::with_capacity(side);
        let mut cur = point_mul(&spec.curve, -spec.radius, gen);
        for _ in 0..side {
            multiples.push(cur.clone());
            cur = point_add(&spec.curve, &cur, gen);
        }
        let mut next = Vec::with_capacity(acc.len() * side);
        for base in &acc {
            for m in &multiples {
                next.push(point_add(&spec.curve, base, m));
            }
        }
        acc = next;
    }
    acc.sort();
    acc.dedup();
    Ok(acc)
}

/// Report of an intersection experiment between two Mordell-Weil boxes.
#[derive(Clone, Debug)]
pub struct MwIntersection {
    /// Points enumerated in each box after deduplication.
    pub points: (usize, usize),
    /// Distinct values attained by each map on its box.
    pub values: (usize, usize),
    pub intersection: IntersectionCount,
    /// Total number of generators supplied across both boxes.
    pub generators: usize,
    /// count^(1/(1 + generators)); an observed lower bound for the constant
    /// in the uniform intersection bound, not a certified quantity.
    pub implied_constant: f64,
}

/// Intersects the exact value sets of two maps over Mordell-Weil boxes.
pub fn mw_intersect(
    g1: &RationalMap,
    spec1: &MwSpec,
    g2: &RationalMap,
    spec2: &MwSpec,
) -> Result<MwIntersection> {
    if g1.curve != spec1.curve || g2.curve != spec2.curve {
        return Err(Error::invalid("box curve does not match the map's curve"));
    }
    let box1 = mw_enumerate(spec1)?;
    let box2 = mw_enumerate(spec2)?;
    let vals1 = value_set(g1, &box1)?;
    let vals2 = value_set(g2, &box2)?;
    let includes_infinity = vals1.infinity && vals2.infinity;
    let common: Vec<&Rational> =
        vals1.finite.iter().filter(|v| vals2.finite.contains(*v)).collect();
    let mut witness = QPoly::one(Rationals);
    for v in &common {
        witness = witness.mul(&QPoly::new(Rationals, vec![-(*v).clone(), rat_i(1)]));
    }
    let count = common.len() + includes_infinity as usize;
    let generators = spec1.generators.len() + spec2.generators.len();
    Ok(MwIntersection {
        points: (box1.len(), box2.len()),
        values: (
            vals1.finite.len() + vals1.infinity as usize,
            vals2.finite.len() + vals2.infinity as usize,
        ),
        intersection: IntersectionCount {
            levels: (spec1.radius as usize, spec2.radius as usize),
            count,
            witness,
            includes_infinity,
        },
        generators,
        implied_constant: (count as f64).powf(1.0 / (1.0 + generators as f64)),
    })
}

struct ValueSet {
    finite: BTreeSet<Rational>,
    infinity: bool,
}

fn value_set(g: &RationalMap, points: &[CurvePoint]) -> Result<ValueSet> {
    let mut finite = BTreeSet::new();
    let mut infinity = false;
    for p in points {
        match eval_map(g, p)? {
            Some(v) => {
                finite.insert(v);
            }
            None => infinity = true,
        }
    }
    Ok(ValueSet { finite, infinity })
}

/// A value on the Riemann sphere as a unit-norm projective pair.
#[derive(Clone, Copy, Debug)]
struct ProjValue {
    num: C,
    den: C,
}

fn proj(num: C, den: C) -> ProjValue {
    let scale = (num.norm_sqr() + den.norm_sqr()).sqrt();
    debug_assert!(scale > 0.0, "projective value from the zero pair");
    ProjValue { num: num / scale, den: den / scale }
}

fn chordal(a: &ProjValue, b: &ProjValue) -> f64 {
    (a.num * b.den - b.num * a.den).norm()
}

/// Recomputes the intersection count of the level-`level` torsion images of
/// two maps numerically: evaluates both maps at floating-point division
/// points, clusters the values by chordal distance, and matches the clusters
/// across the two sides. Aborts with a diagnostic when any distance falls
/// into the ambiguous band between the tolerance and ten times it.
pub fn brute_force_check(
    g1: &RationalMap,
    g2: &RationalMap,
    level: usize,
    cumulative: bool,
    tolerance: f64,
) -> Result<usize> {
    if level < 2 || level > BRUTE_FORCE_MAX_LEVEL {
        return Err(Error::invalid(format!(
            "brute-force level must be between 2 and {BRUTE_FORCE_MAX_LEVEL}"
        )));
    }
    if !(tolerance > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let reps1 = cluster_values(&division_point_values(g1, level, cumulative)?, tolerance)?;
    let reps2 = cluster_values(&division_point_values(g2, level, cumulative)?, tolerance)?;
    let mut count = 0usize;
    for a in &reps1 {
        let mut matched = false;
        for b in &reps2 {
            let d = chordal(a, b);
            if d <= tolerance {
                if matched {
                    return Err(Error::internal(
                        "chordal matching is ambiguous: two representatives within tolerance",
                    ));
                }
                matched = true;
            } else if d <= 10.0 * tolerance {
                return Err(Error::internal(
                    "chordal matching falls inside the separation margin; tighten the tolerance",
                ));
            }
        }
        if matched {
            count += 1;
        }
    }
    Ok(count)
}

/// Values of `g` at the division points of the packet, with the value at `O`
/// first.
fn division_point_values(g: &RationalMap, level: usize, cumulative: bool) -> Result<Vec<ProjValue>> {
    let wp = WpEvaluator::new(&g.curve)?;
    let tables = (poly_f64(&g.a), poly_f64(&g.b), poly_f64(&g.c));
    let mut out = vec![match g.value_at_o() {
        Some(v) => proj(C::new(rat_f64(v), 0.0), C::new(1.0, 0.0)),
        None => ProjValue { num: C::new(1.0, 0.0), den: C::new(0.0, 0.0) },
    }];
    let (omega1, omega2) = (wp.lattice().omega1, wp.lattice().omega2);
    let orders: Vec<usize> = if cumulative { (2..=level).collect() } else { vec![level] };
    for n in orders {
        for j in 0..n {
            for k in 0..n {
                if j == 0 && k == 0 {
                    continue;
                }
                let z = (omega1 * j as f64 + omega2 * k as f64) / n as f64;
                out.push(map_value_at(&wp, &tables, z)?);
            }
        }
    }
    Ok(out)
}

fn raw_pair(wp: &WpEvaluator, tables: &(Vec<f64>, Vec<f64>, Vec<f64>), z: C) -> Result<ProjValue> {
    let (x, y) = wp.eval(z)?;
    let num = horner(&tables.0, x) + horner(&tables.1, x) * y;
    let den = horner(&tables.2, x);
    Ok(proj(num, den))
}

/// Projective value of the map at `z`. When numerator and denominator both
/// nearly vanish (an indeterminate specialization) the value is recovered as
/// a limit along a fixed direction: along a fixed ray the normalized pair is
/// analytic in the step, so Richardson extrapolation is valid for finite and
/// infinite limits alike. Four nodes cancel the expansion through the cubic
/// term; the base step is kept large because the pair components near a
/// vanishing denominator carry absolute evaluation noise that grows as the
/// step shrinks.
fn map_value_at(
    wp: &WpEvaluator,
    tables: &(Vec<f64>, Vec<f64>, Vec<f64>),
    z: C,
) -> Result<ProjValue> {
    let (x, y) = wp.eval(z)?;
    let num = horner(&tables.0, x) + horner(&tables.1, x) * y;
    let den = horner(&tables.2, x);
    let degree = tables.0.len().max(tables.1.len()).max(tables.2.len()) as i32;
    let scale = (1.0 + x.norm()).powi(degree) * (1.0 + y.norm());
    if (num.norm_sqr() + den.norm_sqr()).sqrt() > 1e-6 * scale {
        return Ok(proj(num, den));
    }
    let step = C::new(0.96, 0.28) * (wp.min_norm() * 2e-3);
    let mut pairs = Vec::with_capacity(4);
    for i in 0..4 {
        pairs.push(raw_pair(wp, tables, z + step * 0.5f64.powi(i))?);
    }
    let use_num = pairs[3].num.norm() >= pairs[3].den.norm();
    let mut nums = Vec::with_capacity(4);
    let mut dens = Vec::with_capacity(4);
    for p in &pairs {
        let w = if use_num { p.num } else { p.den };
        let phase = w.conj() / w.norm();
        nums.push(p.num * phase);
        dens.push(p.den * phase);
    }
    for j in 1..4 {
        let f = 2f64.powi(j as i32);
        for i in (j..4).rev() {
            nums[i] = (nums[i] * f - nums[i - 1]) / (f - 1.0);
            dens[i] = (dens[i] * f - dens[i - 1]) / (f - 1.0);
        }
    }
    Ok(proj(nums[3], dens[3]))
}

/// Greedy chordal clustering with the same ambiguity band as the matching
/// step: every distance must either stay within the tolerance or clear ten
/// times it.
fn cluster_values(values: &[ProjValue], tolerance: f64) -> Result<Vec<ProjValue>> {
    let mut reps: Vec<ProjValue> = Vec::new();
    for v in values {
        let mut hit = false;
        for r in &reps {
            let d = chordal(v, r);
            if d <= tolerance {
                if hit {
                    return Err(Error::internal(
                        "value clustering is ambiguous: representatives overlap",
                    ));
                }
                hit = true;
            } else if d <= 10.0 * tolerance {
                return Err(Error::internal(
                    "value clustering falls inside the separation margin; tighten the tolerance",
                ));
            }
        }
        if !hit {
            reps.push(*v);
        }
    }
    Ok(reps)
}

/// Grid sweep over the Legendre family: map `map1` on the lambda-curve
/// against `map2` on the mu-curve, across torsion levels.
#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub lambdas: Vec<Rational>,
    pub mus: Vec<Rational>,
    pub map1: String,
    pub map2: String,
    pub levels: Vec<usize>,
    pub cumulative: bool,
}

/// One grid cell. `count` and `includes_infinity` are None when the cell
/// failed; the failure text is kept in `error` and the sweep continues.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepCell {
    pub lambda: String,
    pub mu: String,
    pub map1: String,
    pub map2: String,
    pub level: usize,
    pub count: Option<usize>,
    pub includes_infinity: Option<bool>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepCell>,
    /// Largest count per level over the off-diagonal cells.
    pub max_per_level: Vec<(usize, usize)>,
    /// Whether those maxima are nonincreasing in the level (reported, never
    /// asserted).
    pub max_nonincreasing: bool,
}

fn legendre_image(
    cache: &mut BTreeMap<(String, String, usize), std::result::Result<TorsionImagePoly, String>>,
    param: &Rational,
    map_text: &str,
    level: usize,
    cumulative: bool,
) -> std::result::Result<TorsionImagePoly, String> {
    let key = (param.to_string(), map_text.to_string(), level);
    if let Some(hit) = cache.get(&key) {
        return hit.clone();
    }
    let computed = (|| {
        let (curve, shift) = EllipticCurve::legendre(param)?;
        let expr = parse_map_expression(map_text)?;
        let g = canonicalize_shifted(&expr, &curve, &shift)?;
        torsion_image(&g, level, cumulative)
    })()
    .map_err(|e| e.to_string());
    cache.insert(key, computed.clone());
    computed
}

/// Runs the sweep in deterministic grid order (lambda-major, then mu, then
/// level). Per-cell failures are recorded in the row; an empty grid yields an
/// empty table.
pub fn sweep(config: &SweepConfig) -> SweepReport {
    let mut cache = BTreeMap::new();
    let mut rows = Vec::new();
    for lambda in &config.lambdas {
        for mu in &config.mus {
            for &level in &config.levels {
                let left = legendre_image(&mut cache, lambda, &config.map1, level, config.cumulative);
                let right = legendre_image(&mut cache, mu, &config.map2, level, config.cumulative);
                let mut cell = SweepCell {
                    lambda: lambda.to_string(),
                    mu: mu.to_string(),
                    map1: config.map1.clone(),
                    map2: config.map2.clone(),
                    level,
                    count: None,
                    includes_infinity: None,
                    error: None,
                };
                match (left, right) {
                    (Ok(a), Ok(b)) => {
                        let meet = intersect_count(&a, &b);
                        cell.count = Some(meet.count);
                        cell.includes_infinity = Some(meet.includes_infinity);
                    }
                    (Err(e), _) | (_, Err(e)) => cell.error = Some(e),
                }
                rows.push(cell);
            }
        }
    }
    let mut levels = config.levels.clone();
    levels.sort_unstable();
    levels.dedup();
    let max_per_level: Vec<(usize, usize)> = levels
        .into_iter()
        .map(|level| {
            let max = rows
                .iter()
                .filter(|r| r.level == level && r.lambda != r.mu)
                .filter_map(|r| r.count)
                .max()
                .unwrap_or(0);
            (level, max)
        })
        .collect();
    let max_nonincreasing = max_per_level.windows(2).all(|w| w[0].1 >= w[1].1);
    SweepReport { rows, max_per_level, max_nonincreasing }
}

/// Renders the sweep rows as CSV with the fixed column set.
pub fn sweep_csv(report: &SweepReport) -> String {
    let mut out = String::from("lambda,mu,map1,map2,N,count,inf_flag\n");
    for row in &report.rows {
        let count = row.count.map_or_else(|| "error".to_string(), |c| c.to_string());
        let inf = row.includes_infinity.map_or_else(|| "error".to_string(), |b| b.to_string());
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.lambda, row.mu, row.map1, row.map2, row.level, count, inf
        ));
    }
    out
}

/// The versioned byte-exact rendering used for regression locking.
pub fn sweep_locked_table(report: &SweepReport) -> String {
    format!("# {SWEEP_TABLE_VERSION}\n{}", sweep_csv(report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::canonicalize;

    fn curve(a: i64, b: i64) -> EllipticCurve {
        EllipticCurve::new(rat_i(a), rat_i(b)).unwrap()
    }

    fn map_on(curve: &EllipticCurve, text: &str) -> RationalMap {
        canonicalize(&parse_map_expression(text).unwrap(), curve).unwrap()
    }

    fn legendre_map(lambda: i64, text: &str) -> RationalMap {
        let (curve, shift) = EllipticCurve::legendre(&rat_i(lambda)).unwrap();
        canonicalize_shifted(&parse_map_expression(text).unwrap(), &curve, &shift).unwrap()
    }

    fn pt(x: i64, y: i64) -> CurvePoint {
        CurvePoint::Affine(rat_i(x), rat_i(y))
    }

    #[test]
    fn legendre_two_torsion_image_of_x() {
        let g = legendre_map(2, "x");
        let image = torsion_image(&g, 2, false).unwrap();
        assert_eq!(image.finite_part, QPoly::from_i64(&[0, 2, -3, 1]));
        assert!(image.includes_infinity);
        assert_eq!(image.value_count(), 4);
        assert_eq!(image.finite_factored(), "t*(t-1)*(t-2)");
        let g3 = legendre_map(3, "x");
        let image3 = torsion_image(&g3, 2, false).unwrap();
        assert_eq!(image3.finite_part, QPoly::from_i64(&[0, 3, -4, 1]));
    }

    #[test]
    fn cumulative_image_on_a_mordell_curve() {
        let g = map_on(&curve(0, 1), "x");
        let image = torsion_image(&g, 3, true).unwrap();
        assert_eq!(image.finite_part, QPoly::from_i64(&[0, 4, 0, 0, 5, 0, 0, 1]));
        assert!(image.includes_infinity);
        assert_eq!(image.value_count(), 8);
    }

    #[test]
    fn pole_packets_set_the_infinity_flag() {
        let g = map_on(&curve(0, 1), "(y+1)/x");
        let at2 = torsion_image(&g, 2, false).unwrap();
        assert_eq!(at2.finite_part, QPoly::from_i64(&[1, 0, 0, 1]));
        assert!(at2.includes_infinity);
        let at3 = torsion_image(&g, 3, false).unwrap();
        assert!(at3.includes_infinity);
        assert!(at3.finite_part.eval(&rat_i(0)).is_zero());
    }

    #[test]
    fn poles_at_two_torsion_without_a_pole_at_the_origin() {
        let g = map_on(&curve(0, 1), "x/y");
        let image = torsion_image(&g, 2, false).unwrap();
        assert!(image.includes_infinity);
        assert_eq!(image.finite_part, QPoly::from_i64(&[0, 1]));
        assert_eq!(image.value_count(), 2);
    }

    #[test]
    fn intersecting_legendre_levels() {
        let g2 = legendre_map(2, "x");
        let g3 = legendre_map(3, "x");
        let i2 = torsion_image(&g2, 2, false).unwrap();
        let i3 = torsion_image(&g3, 2, false).unwrap();
        let meet = intersect_count(&i2, &i3);
        assert_eq!(meet.count, 3);
        assert!(meet.includes_infinity);
        assert_eq!(meet.witness, QPoly::from_i64(&[0, -1, 1]));
        assert_eq!(meet.levels, (2, 2));
        let full = intersect_count(&i2, &i2);
        assert_eq!(full.count, 4);
    }

    #[test]
    fn finite_parts_of_shifted_maps_are_disjoint() {
        let e = curve(0, 1);
        let a = torsion_image(&map_on(&e, "x"), 2, false).unwrap();
        let b = torsion_image(&map_on(&e, "x+1"), 2, false).unwrap();
        let meet = intersect_count(&a, &b);
        assert_eq!(meet.count, 1);
        assert_eq!(meet.witness.deg(), 0);
        assert!(meet.includes_infinity);
    }

    #[test]
    fn group_law_reproduces_known_orders() {
        let e = curve(0, 1);
        let p = pt(2, 3);
        assert!(on_curve(&e, &p));
        assert_eq!(point_add(&e, &p, &p), pt(0, 1));
        assert_eq!(point_order(&e, &p, 12), Some(6));
        assert_eq!(point_order(&e, &pt(0, 1), 12), Some(3));
        assert_eq!(point_order(&e, &pt(-1, 0), 12), Some(2));
        assert_eq!(point_add(&e, &p, &point_neg(&p)), CurvePoint::Infinity);
        assert_eq!(point_mul(&e, 6, &p), CurvePoint::Infinity);
        assert_eq!(point_mul(&e, -1, &p), pt(2, -3));
        assert_eq!(point_mul(&e, 5, &p), point_neg(&p));
        let e2 = curve(-1, 0);
        assert_eq!(point_add(&e2, &pt(0, 0), &pt(0, 0)), CurvePoint::Infinity);
    }

    #[test]
    fn group_law_is_associative_on_the_six_torsion() {
        let e = curve(0, 1);
        let pts =
            [CurvePoint::Infinity, pt(2, 3), pt(0, 1), pt(-1, 0), pt(0, -1), pt(2, -3)];
        for a in &pts {
            for b in &pts {
                for c in &pts {
                    let left = point_add(&e, &point_add(&e, a, b), c);
                    let right = point_add(&e, a, &point_add(&e, b, c));
                    assert_eq!(left, right);
                }
            }
        }
    }

    #[test]
    fn map_evaluation_resolves_indeterminate_points() {
        let e = curve(0, 1);
        let g = map_on(&e, "(y+1)/x");
        assert_eq!(eval_map(&g, &pt(0, -1)).unwrap(), Some(rat_i(0)));
        assert_eq!(eval_map(&g, &pt(0, 1)).unwrap(), None);
        assert_eq!(eval_map(&g, &pt(2, 3)).unwrap(), Some(rat_i(2)));
        assert_eq!(eval_map(&g, &CurvePoint::Infinity).unwrap(), None);
        let e2 = curve(-1, 0);
        let h = map_on(&e2, "x/y");
        assert_eq!(eval_map(&h, &pt(0, 0)).unwrap(), Some(rat_i(0)));
        assert_eq!(eval_map(&h, &pt(1, 0)).unwrap(), None);
        assert_eq!(eval_map(&h, &CurvePoint::Infinity).unwrap(), Some(rat_i(0)));
        assert!(eval_map(&g, &pt(5, 5)).is_err());
    }

    #[test]
    fn mw_box_is_negation_closed() {
        let e = curve(0, 1);
        let spec = MwSpec { curve: e.clone(), generators: vec![pt(2, 3)], radius: 3 };
        let points = mw_enumerate(&spec).unwrap();
        assert_eq!(points.len(), 6);
        for p in &points {
            assert!(on_curve(&e, p));
            assert!(points.contains(&point_neg(p)));
        }
        let bigger = mw_enumerate(&MwSpec { radius: 7, ..spec.clone() }).unwrap();
        assert_eq!(bigger.len(), 6);
        let pair = mw_enumerate(&MwSpec {
            curve: e.clone(),
            generators: vec![pt(2, 3), pt(0, 1)],
            radius: 1,
        })
        .unwrap();
        assert_eq!(pair.len(), 6);
    }

    #[test]
    fn mw_box_growth_is_monotone_and_capped() {
        let e = curve(0, 1);
        let small = mw_enumerate(&MwSpec {
            curve: e.clone(),
            generators: vec![pt(2, 3)],
            radius: 1,
        })
        .unwrap();
        let big = mw_enumerate(&MwSpec {
            curve: e.clone(),
            generators: vec![pt(2, 3)],
            radius: 2,
        })
        .unwrap();
        assert!(small.iter().all(|p| big.contains(p)));
        assert!(small.len() <= big.len());
        let over = MwSpec { curve: e.clone(), generators: vec![pt(2, 3); 7], radius: 3 };
        assert!(mw_enumerate(&over).is_err());
        let off = MwSpec { curve: e.clone(), generators: vec![pt(1, 1)], radius: 1 };
        assert!(mw_enumerate(&off).is_err());
    }

    #[test]
    fn mw_intersection_reports_shared_values() {
        let e = curve(0, 1);
        let g = map_on(&e, "x");
        let spec1 = MwSpec { curve: e.clone(), generators: vec![pt(2, 3)], radius: 3 };
        let spec2 = MwSpec { curve: e.clone(), generators: vec![pt(0, 1)], radius: 1 };
        let got = mw_intersect(&g, &spec1, &g, &spec2).unwrap();
        assert_eq!(got.points, (6, 3));
        assert_eq!(got.intersection.count, 2);
        assert!(got.intersection.includes_infinity);
        assert_eq!(got.intersection.witness, QPoly::from_i64(&[0, 1]));
        assert_eq!(got.generators, 2);
        assert!((got.implied_constant - 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
        let other = map_on(&curve(-1, 0), "x");
        assert!(mw_intersect(&other, &spec1, &g, &spec2).is_err());
    }

    #[test]
    fn brute_force_matches_the_exact_count() {
        let g2 = legendre_map(2, "x");
        let g3 = legendre_map(3, "x");
        let exact = intersect_count(
            &torsion_image(&g2, 2, false).unwrap(),
            &torsion_image(&g3, 2, false).unwrap(),
        );
        let brute = brute_force_check(&g2, &g3, 2, false, BRUTE_FORCE_TOLERANCE).unwrap();
        assert_eq!(brute, exact.count);
        let e = curve(0, 1);
        let g = map_on(&e, "(y+1)/x");
        for level in [2usize, 3] {
            let image = torsion_image(&g, level, false).unwrap();
            let brute = brute_force_check(&g, &g, level, false, BRUTE_FORCE_TOLERANCE).unwrap();
            assert_eq!(brute, image.value_count(), "level {level}");
        }
    }

    #[test]
    fn sweep_rows_are_deterministic_and_the_diagonal_grows() {
        let config = SweepConfig {
            lambdas: vec![rat_i(2), rat_i(3)],
            mus: vec![rat_i(2), rat_i(3)],
            map1: "x".into(),
            map2: "x".into(),
            levels: vec![2, 3],
            cumulative: true,
        };
        let report = sweep(&config);
        assert_eq!(report.rows.len(), 8);
        assert!(report.rows.iter().all(|r| r.error.is_none()));
        let locked = sweep_locked_table(&report);
        assert!(locked
            .starts_with("# torsion-meet sweep-table v1\nlambda,mu,map1,map2,N,count,inf_flag\n"));
        assert!(locked.contains("\n2,3,x,x,2,3,true\n"));
        let diag = |level: usize| {
            report
                .rows
                .iter()
                .find(|r| r.lambda == "2" && r.mu == "2" && r.level == level)
                .and_then(|r| r.count)
                .unwrap()
        };
        assert!(diag(3) > diag(2));
        let rerun = sweep(&config);
        assert_eq!(sweep_locked_table(&rerun), locked);
        let empty = sweep(&SweepConfig { lambdas: vec![], ..config.clone() });
        assert!(empty.rows.is_empty());
    }

    #[test]
    fn lower_level_images_divide_cumulative_higher_ones() {
        for text in ["x", "(y+1)/x"] {
            let g = map_on(&curve(0, 1), text);
            let low = torsion_image(&g, 2, true).unwrap();
            let high = torsion_image(&g, 4, true).unwrap();
            assert_eq!(low.finite_part.fast_gcd(&high.finite_part).monic(), low.finite_part);
            assert!(high.includes_infinity || !low.includes_infinity);
        }
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let g = legendre_map(2, "x");
        assert!(torsion_image(&g, 1, false).is_err());
        assert!(torsion_image(&g, 0, true).is_err());
        assert!(brute_force_check(&g, &g, 11, false, 1e-8).is_err());
        assert!(brute_force_check(&g, &g, 1, false, 1e-8).is_err());
        assert!(brute_force_check(&g, &g, 2, false, 0.0).is_err());
    }
}

