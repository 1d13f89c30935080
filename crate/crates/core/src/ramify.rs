//! Branch loci of maps to the projective line: exact ramification profiles of
//! single fibers (over Q or over the number field of a Galois orbit of
//! values), branch-locus computation with certified candidates, and the
//! Riemann-Hurwitz degree identity as a global consistency check.

use serde::{Deserialize, Serialize};

use crate::bipoly::BiPoly;
use crate::curve::RationalMap;
use crate::error::{Error, Result};
use crate::factor::factor_over_q;
use crate::field::{Field, Rational, Rationals};
use crate::numfield::NumberField;
use crate::poly::{Poly, QPoly};

/// A point of the target line: a rational value, a Galois orbit of conjugate
/// algebraic values given by its minimal polynomial, or the point at infinity.
#[derive(Clone, Debug, PartialEq)]
pub enum BranchValue {
    FiniteRational(Rational),
    FiniteOrbit(QPoly),
    Infinity,
}

impl BranchValue {
    /// Classify a monic irreducible polynomial as a rational value or an orbit.
    pub fn from_min_poly(mu: &QPoly) -> BranchValue {
        if mu.deg() == 1 {
            BranchValue::FiniteRational(-mu.coeff(0))
        } else {
            BranchValue::FiniteOrbit(mu.clone())
        }
    }

    /// Minimal polynomial of the value; `None` for infinity.
    pub fn min_poly(&self) -> Option<QPoly> {
        match self {
            BranchValue::FiniteRational(r) => Some(QPoly::linear_root(Rationals, r)),
            BranchValue::FiniteOrbit(mu) => Some(mu.clone()),
            BranchValue::Infinity => None,
        }
    }

    /// Number of conjugate values in the orbit (1 for rationals and infinity).
    pub fn orbit_degree(&self) -> usize {
        match self {
            BranchValue::FiniteOrbit(mu) => mu.deg(),
            _ => 1,
        }
    }

    /// Stable textual form: the minimal polynomial in `t`, or `inf`.
    pub fn describe(&self) -> String {
        match self.min_poly() {
            Some(mu) => mu.to_string_var("t"),
            None => "inf".to_string(),
        }
    }
}

/// The exact multiplicities of one fiber `g^{-1}(t0)`, one entry per
/// geometric point; they always sum to the degree of the map.
#[derive(Clone, Debug, PartialEq)]
pub struct RamificationProfile {
    pub value: BranchValue,
    pub multiplicities: Vec<usize>,
}

impl RamificationProfile {
    /// A value is a branch value iff some point of its fiber is ramified.
    pub fn is_branch(&self) -> bool {
        self.multiplicities.iter().any(|&e| e >= 2)
    }

    pub fn fiber_size(&self) -> usize {
        self.multiplicities.len()
    }
}

/// All branch values of a map: the finite ones as a squarefree monic
/// polynomial in the target coordinate, plus a flag for infinity.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchLocus {
    pub finite_part: QPoly,
    pub includes_infinity: bool,
}

impl BranchLocus {
    /// Total number of branch values, counting each orbit by its degree.
    pub fn count_values(&self) -> usize {
        self.finite_part.degree().unwrap_or(0) + usize::from(self.includes_infinity)
    }

    pub fn same_as(&self, other: &BranchLocus) -> bool {
        self.finite_part == other.finite_part && self.includes_infinity == other.includes_infinity
    }
}

/// One row of a Riemann-Hurwitz report: a branch value, its orbit degree,
/// the fiber multiplicities over one representative, and the orbit's total
/// contribution `deg(orbit) * (d - #fiber)` to the identity.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RhRow {
    pub value: String,
    pub orbit_degree: usize,
    pub multiplicities: Vec<usize>,
    pub contribution: usize,
}

/// Per-value contribution table for the identity `sum (d - #fiber) = 2d`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RhReport {
    pub degree: usize,
    pub rows: Vec<RhRow>,
    pub total: usize,
}

/// Exact multiplicities of all geometric points of `g^{-1}(t0)`, including
/// the point O. For an orbit value the fiber over one representative root is
/// computed over the orbit's number field.
pub fn fiber_profile(g: &RationalMap, t0: &BranchValue) -> Result<RamificationProfile> {
    let f = g.curve.f_poly();
    let mut mults = match t0 {
        BranchValue::Infinity => {
            // Poles of g are zeros of 1/g; O is handled by its own valuation
            // inside the recursive call.
            let recip = g.reciprocal()?;
            let zero = BranchValue::FiniteRational(Rational::from_integer(0.into()));
            return fiber_profile(&recip, &zero).map(|p| RamificationProfile {
                value: BranchValue::Infinity,
                multiplicities: p.multiplicities,
            });
        }
        BranchValue::FiniteRational(tau) => {
            let mut m = Vec::new();
            if g.value_at_o() == Some(tau) {
                m.push(g.ramification_index_at_o()?);
            }
            let a_shift = g.a.sub(&g.c.scale(tau));
            m.extend(zero_multiplicities(&a_shift, &g.b, &g.c, &f));
            m
        }
        BranchValue::FiniteOrbit(mu) => {
            debug_assert!(mu.deg() >= 2);
            // g(O) is rational or infinite, so O never lies over an orbit value.
            let k = NumberField::new(mu)?;
            let tau = k.gen();
            let a_shift = k.lift_poly(&g.a).sub(&k.lift_poly(&g.c).scale(&tau));
            zero_multiplicities(&a_shift, &k.lift_poly(&g.b), &k.lift_poly(&g.c), &k.lift_poly(&f))
        }
    };
    mults.sort_unstable_by(|x, y| y.cmp(x));
    let sum: usize = mults.iter().sum();
    if sum != g.degree() {
        return Err(Error::internal(format!(
            "fiber over {} has multiplicities summing to {sum}, expected degree {}",
            t0.describe(),
            g.degree()
        )));
    }
    Ok(RamificationProfile { value: t0.clone(), multiplicities: mults })
}

/// All branch values of the map, each certified by its full fiber profile.
pub fn branch_locus(g: &RationalMap) -> Result<BranchLocus> {
    branch_analysis(g).map(|(locus, _)| locus)
}

/// Profiles of every branch value (finite ones first in a canonical order,
/// then infinity when it branches).
pub fn branch_profiles(g: &RationalMap) -> Result<Vec<RamificationProfile>> {
    branch_analysis(g).map(|(_, profiles)| profiles)
}

/// Verify `sum over branch values of (d - #fiber) = 2d`, counting a Galois
/// orbit of values with multiplier deg(orbit), and return the contribution
/// table. A mismatch means a missed or spurious branch value and aborts.
pub fn rh_verify(g: &RationalMap) -> Result<RhReport> {
    let (_, profiles) = branch_analysis(g)?;
    let d = g.degree();
    let rows: Vec<RhRow> = profiles
        .iter()
        .map(|p| {
            let orbit_degree = p.value.orbit_degree();
            RhRow {
                value: p.value.describe(),
                orbit_degree,
                multiplicities: p.multiplicities.clone(),
                contribution: orbit_degree * (d - p.fiber_size()),
            }
        })
        .collect();
    let total: usize = rows.iter().map(|r| r.contribution).sum();
    if total != 2 * d {
        return Err(Error::internal(format!(
            "ramification contributions sum to {total}, expected {}",
            2 * d
        )));
    }
    Ok(RhReport { degree: d, rows, total })
}

/// Whether two maps have different branch loci as subsets of the line.
pub fn branch_loci_differ(g1: &RationalMap, g2: &RationalMap) -> Result<bool> {
    let l1 = branch_locus(g1)?;
    let l2 = branch_locus(g2)?;
    Ok(!l1.same_as(&l2))
}

fn branch_analysis(g: &RationalMap) -> Result<(BranchLocus, Vec<RamificationProfile>)> {
    let mut finite = QPoly::one(Rationals);
    let mut profiles = Vec::new();
    for mu in candidate_min_polys(g) {
        let profile = fiber_profile(g, &BranchValue::from_min_poly(&mu))?;
        if profile.is_branch() {
            finite = finite.mul(&mu);
            profiles.push(profile);
        }
    }
    let at_infinity = fiber_profile(g, &BranchValue::Infinity)?;
    let includes_infinity = at_infinity.is_branch();
    if includes_infinity {
        profiles.push(at_infinity);
    }
    Ok((BranchLocus { finite_part: finite, includes_infinity }, profiles))
}

/// Minimal polynomials of every finite value that could possibly branch, in a
/// canonical order. The set over-approximates; callers confirm each candidate
/// with a full profile.
///
/// For b != 0 the candidates are the roots of the x-discriminant and the
/// x-leading coefficient of the fiber polynomial, the values taken at roots
/// of the removed x-content (where numerator and denominator vanish
/// together), and g(O). An even map factors through the x-line, so its
/// candidates come from a/c as a map of the line: critical values, leading
/// coefficient artifacts, and the images of the 2-torsion x-values and of O.
fn candidate_min_polys(g: &RationalMap) -> Vec<QPoly> {
    let f = g.curve.f_poly();
    let mut sources: Vec<QPoly> = Vec::new();
    if g.is_even() {
        let w = BiPoly::new(vec![g.a.clone(), g.c.neg()]);
        sources.push(w.disc_x());
        sources.push(w.lc_x());
        sources.push(w.resultant_x(&f));
    } else {
        let phi = g.fiber_polynomial();
        sources.push(phi.disc_x());
        sources.push(phi.lc_x());
        let content = g.fiber_content();
        if content.degree().map_or(false, |d| d >= 1) {
            sources.push(phi.resultant_x(&content.squarefree_part_q()));
        }
    }
    let mut min_polys: Vec<QPoly> = Vec::new();
    for src in sources {
        if src.degree().map_or(true, |d| d == 0) {
            continue;
        }
        for (q, _) in factor_over_q(&src).factors {
            if !min_polys.contains(&q) {
                min_polys.push(q);
            }
        }
    }
    if let Some(kappa) = g.value_at_o() {
        let lin = QPoly::linear_root(Rationals, kappa);
        if !min_polys.contains(&lin) {
            min_polys.push(lin);
        }
    }
    min_polys.sort_by(|a, b| {
        a.deg().cmp(&b.deg()).then_with(|| a.coeffs.iter().rev().cmp(b.coeffs.iter().rev()))
    });
    min_polys
}

/// Multiplicities of the zeros of `(a + by)/c` at points with finite x,
/// working over an arbitrary coefficient field of characteristic 0.
///
/// Every such zero lies over a root of the norm `r = a^2 - b^2 f`. Roots are
/// stratified by their multiplicities in a, b, c, r, f using only gcds, so no
/// factorization over the field is needed. At a root of f the curve has one
/// point, `x - x0` vanishes to order 2 and `y` to order 1, so `a + by` has
/// valuation `min(2 mult(a), 2 mult(b) + 1)`. Away from f there are two
/// points; `a + by` and `a - by` vanish there to orders `k` and `k + s` with
/// `k = min(mult(a), mult(b))` and `k + (k + s) = mult(r)`, and at most one
/// of the two exceeds `k` because otherwise both a and b would vanish deeper.
fn zero_multiplicities<F: Field>(
    a: &Poly<F>,
    b: &Poly<F>,
    c: &Poly<F>,
    f: &Poly<F>,
) -> Vec<usize> {
    assert!(!(a.is_zero() && b.is_zero()), "the zero function has no fibers");
    let r = a.mul(a).sub(&b.mul(b).mul(f));
    assert!(!r.is_zero(), "norm of a nonzero function is nonzero");
    let r0 = r.squarefree_part();
    if r0.degree().map_or(true, |d| d == 0) {
        return Vec::new();
    }
    // (piece of r0, multiplicities of its roots in a, b, c, r, f)
    let mut strata: Vec<(Poly<F>, Vec<Option<usize>>)> = vec![(r0, Vec::new())];
    for p in [a, b, c, &r, f] {
        strata = strata
            .into_iter()
            .flat_map(|(s, data)| {
                if p.is_zero() {
                    let mut d2 = data.clone();
                    d2.push(None);
                    vec![(s, d2)]
                } else {
                    split_by_multiplicity(&s, p)
                        .into_iter()
                        .map(|(piece, m)| {
                            let mut d2 = data.clone();
                            d2.push(Some(m));
                            (piece, d2)
                        })
                        .collect()
                }
            })
            .collect();
    }
    let mut out = Vec::new();
    for (s, data) in strata {
        let roots = s.deg();
        let (ma, mb, mc, mr, mf) =
            (data[0], data[1], data[2].unwrap(), data[3].unwrap(), data[4].unwrap());
        if mf >= 1 {
            let vn = match (ma, mb) {
                (Some(ma), Some(mb)) => (2 * ma).min(2 * mb + 1),
                (Some(ma), None) => 2 * ma,
                (None, Some(mb)) => 2 * mb + 1,
                (None, None) => unreachable!(),
            };
            let e = vn as i64 - 2 * mc as i64;
            if e > 0 {
                out.extend(std::iter::repeat(e as usize).take(roots));
            }
        } else {
            let k = match (ma, mb) {
                (Some(ma), Some(mb)) => ma.min(mb),
                (Some(ma), None) => ma,
                (None, Some(mb)) => mb,
                (None, None) => unreachable!(),
            };
            let spread = mr - 2 * k;
            for v in [k, k + spread] {
                let e = v as i64 - mc as i64;
                if e > 0 {
                    out.extend(std::iter::repeat(e as usize).take(roots));
                }
            }
        }
    }
    out
}

/// Split a squarefree polynomial into the pieces whose roots have a given
/// multiplicity in `p` (roots not dividing `p` land in the 0 piece).
fn split_by_multiplicity<F: Field>(s: &Poly<F>, p: &Poly<F>) -> Vec<(Poly<F>, usize)> {
    let mut rest = s.clone();
    if p.degree().map_or(true, |d| d == 0) {
        return vec![(rest, 0)];
    }
    let mut out = Vec::new();
    for (layer, m) in p.squarefree_decomposition() {
        if rest.degree().map_or(true, |d| d == 0) {
            break;
        }
        let piece = rest.gcd(&layer);
        if piece.degree().map_or(false, |d| d >= 1) {
            rest = rest.exact_div(&piece).expect("gcd divides");
            out.push((piece, m));
        }
    }
    if rest.degree().map_or(false, |d| d >= 1) {
        out.push((rest, 0));
    }
    out
}
