//! The fiber product of two maps to the line: the curve cut out of E1 x E2
//! by equality of values. Computes the Euler characteristic of its
//! normalization from local ramification pairing, checks the genus
//! consequence, and reports the degree-bound chain with set-theoretic slice
//! counts.

use serde::{Deserialize, Serialize};

use crate::curve::RationalMap;
use crate::error::{Error, Result};
use crate::factor::factor_over_q;
use crate::poly::QPoly;
use crate::ramify::{branch_locus, fiber_profile, BranchValue};

/// A pair of local indices with the number of point pairs realizing it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairCount {
    pub e1: usize,
    pub e2: usize,
    pub count: usize,
}

/// Pairing data of the two fibers over one value (one representative per
/// Galois orbit). A pair (e1, e2) contributes gcd(e1, e2) branches of index
/// lcm(e1, e2) on the normalization, hence e1*e2 - gcd(e1, e2) to the defect.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValueRow {
    pub value: String,
    pub orbit_degree: usize,
    pub pairs: Vec<PairCount>,
    /// orbit_degree * sum of count * (e1*e2 - gcd(e1, e2)) over the pairs.
    pub defect: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiberProductReport {
    pub d1: usize,
    pub d2: usize,
    pub rows: Vec<ValueRow>,
    /// Euler characteristic of the normalized fiber-product curve.
    pub chi_tilde: i64,
    /// d1 * d2 * (d1 + d2).
    pub degree_bound: usize,
    /// Number of points of the slice {O} x E2, i.e. of the g2-fiber over g1(O).
    pub slice_v1: usize,
    /// Number of points of the slice E1 x {O}, i.e. of the g1-fiber over g2(O).
    pub slice_v2: usize,
    /// Whether the two branch loci differ (the theorem's hypothesis).
    pub hypothesis_ok: bool,
}

/// Pairing row over one probed value: all pairs of fiber points of the two
/// maps, with the exact invariant sum gcd*lcm = d1*d2.
pub fn pair_row(g1: &RationalMap, g2: &RationalMap, value: &BranchValue) -> Result<ValueRow> {
    let p1 = fiber_profile(g1, value)?;
    let p2 = fiber_profile(g2, value)?;
    let mut pairs: Vec<PairCount> = Vec::new();
    for (e1, n1) in histogram(&p1.multiplicities) {
        for (e2, n2) in histogram(&p2.multiplicities) {
            pairs.push(PairCount { e1, e2, count: n1 * n2 });
        }
    }
    let mut gcd_lcm_sum = 0usize;
    let mut defect_per_rep = 0i64;
    for p in &pairs {
        let g = gcd(p.e1, p.e2);
        gcd_lcm_sum += p.count * g * (p.e1 * p.e2 / g);
        defect_per_rep += (p.count * (p.e1 * p.e2 - g)) as i64;
    }
    if gcd_lcm_sum != g1.degree() * g2.degree() {
        return Err(Error::internal(format!(
            "pairing over {} sums gcd*lcm to {gcd_lcm_sum}, expected {}",
            value.describe(),
            g1.degree() * g2.degree()
        )));
    }
    let orbit_degree = value.orbit_degree();
    Ok(ValueRow {
        value: value.describe(),
        orbit_degree,
        pairs,
        defect: orbit_degree as i64 * defect_per_rep,
    })
}

/// Full fiber-product analysis of two maps (possibly on different curves).
pub fn fiber_product_report(g1: &RationalMap, g2: &RationalMap) -> Result<FiberProductReport> {
    let (d1, d2) = (g1.degree(), g2.degree());
    let l1 = branch_locus(g1)?;
    let l2 = branch_locus(g2)?;
    let hypothesis_ok = !l1.same_as(&l2);

    // Union of the branch values of both maps, merged as Galois orbits:
    // monic irreducible minimal polynomials are either equal or coprime.
    let mut min_polys: Vec<QPoly> = Vec::new();
    for part in [&l1.finite_part, &l2.finite_part] {
        if part.degree().map_or(true, |d| d == 0) {
            continue;
        }
        for (q, _) in factor_over_q(part).factors {
            if !min_polys.contains(&q) {
                min_polys.push(q);
            }
        }
    }
    min_polys.sort_by(|a, b| {
        a.deg().cmp(&b.deg()).then_with(|| a.coeffs.iter().rev().cmp(b.coeffs.iter().rev()))
    });
    let mut values: Vec<BranchValue> =
        min_polys.iter().map(BranchValue::from_min_poly).collect();
    if l1.includes_infinity || l2.includes_infinity {
        values.push(BranchValue::Infinity);
    }

    let mut rows = Vec::new();
    let mut defect_total = 0i64;
    for value in &values {
        let row = pair_row(g1, g2, value)?;
        defect_total += row.defect;
        rows.push(row);
    }
    let chi_tilde = 2 * (d1 * d2) as i64 - defect_total;
    if chi_tilde.rem_euclid(2) != 0 {
        return Err(Error::internal(format!("chi = {chi_tilde} is odd")));
    }
    if hypothesis_ok && chi_tilde > -2 {
        return Err(Error::internal(format!(
            "chi = {chi_tilde} > -2 although the branch loci differ"
        )));
    }

    let slice_v1 = slice_count(g1, g2)?;
    let slice_v2 = slice_count(g2, g1)?;
    if slice_v1 > d2 || slice_v2 > d1 {
        return Err(Error::internal(format!(
            "slice counts ({slice_v1}, {slice_v2}) exceed the degrees ({d2}, {d1})"
        )));
    }

    Ok(FiberProductReport {
        d1,
        d2,
        rows,
        chi_tilde,
        degree_bound: d1 * d2 * (d1 + d2),
        slice_v1,
        slice_v2,
        hypothesis_ok,
    })
}

/// Euler characteristic of the normalization of the fiber-product curve.
pub fn chi_tilde(g1: &RationalMap, g2: &RationalMap) -> Result<i64> {
    fiber_product_report(g1, g2).map(|r| r.chi_tilde)
}

/// The degree-bound chain only: the closed-form bound and the slice counts.
pub fn degree_bound_report(g1: &RationalMap, g2: &RationalMap) -> Result<FiberProductReport> {
    fiber_product_report(g1, g2)
}

/// Number of points of the second map's fiber over the first map's value at O.
fn slice_count(g_first: &RationalMap, g_second: &RationalMap) -> Result<usize> {
    let value = match g_first.value_at_o() {
        Some(kappa) => BranchValue::FiniteRational(kappa.clone()),
        None => BranchValue::Infinity,
    };
    Ok(fiber_profile(g_second, &value)?.fiber_size())
}

fn histogram(mults: &[usize]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for &e in mults {
        match out.iter_mut().find(|(v, _)| *v == e) {
            Some((_, n)) => *n += 1,
            None => out.push((e, 1)),
        }
    }
    out
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{canonicalize, canonicalize_shifted, EllipticCurve};
    use crate::expr::parse_map_expression;
    use crate::field::rat_i;

    fn curve(a: i64, b: i64) -> EllipticCurve {
        EllipticCurve::new(rat_i(a), rat_i(b)).unwrap()
    }

    fn map_on(curve: &EllipticCurve, text: &str) -> RationalMap {
        canonicalize(&parse_map_expression(text).unwrap(), curve).unwrap()
    }

    fn legendre_x(lambda: i64) -> RationalMap {
        let (curve, shift) = EllipticCurve::legendre(&rat_i(lambda)).unwrap();
        canonicalize_shifted(&parse_map_expression("x").unwrap(), &curve, &shift).unwrap()
    }

    #[test]
    fn legendre_x_maps_give_chi_minus_two() {
        let g1 = legendre_x(2);
        let g2 = legendre_x(3);
        let report = fiber_product_report(&g1, &g2).unwrap();
        assert_eq!(report.chi_tilde, -2);
        assert!(report.hypothesis_ok);
        assert_eq!(report.rows.len(), 5);
        assert_eq!(report.degree_bound, 16);
        assert_eq!(report.slice_v1, 1);
        assert_eq!(report.slice_v2, 1);
    }

    #[test]
    fn disjoint_branch_loci_give_chi_minus_eight() {
        // Branch loci {1, 2, -3, inf} for x on E1 and {0, 1/2, 1/3, -1/5}
        // for 1/x on E2: eight distinct values.
        let g1 = map_on(&curve(-7, 6), "x");
        let g2 = map_on(&curve(-19, 30), "1/x");
        let report = fiber_product_report(&g1, &g2).unwrap();
        assert_eq!(report.chi_tilde, -8);
        assert!(report.hypothesis_ok);
        assert_eq!(report.rows.len(), 8);
    }

    #[test]
    fn equal_maps_fail_the_hypothesis() {
        let g = legendre_x(2);
        let report = fiber_product_report(&g, &g).unwrap();
        assert!(!report.hypothesis_ok);
        assert_eq!(report.chi_tilde, 0);
    }

    #[test]
    fn chi_is_symmetric() {
        let e = curve(0, 1);
        let pairs = [
            (legendre_x(2), legendre_x(3)),
            (map_on(&e, "x"), map_on(&e, "y")),
            (map_on(&e, "y"), map_on(&e, "(y + 1)/x")),
        ];
        for (g1, g2) in pairs {
            assert_eq!(chi_tilde(&g1, &g2).unwrap(), chi_tilde(&g2, &g1).unwrap());
        }
    }

    #[test]
    fn mixed_degree_example() {
        let e = curve(0, 1);
        let g1 = map_on(&e, "x");
        let g2 = map_on(&e, "y");
        let report = fiber_product_report(&g1, &g2).unwrap();
        assert_eq!(report.degree_bound, 30);
        assert!(report.slice_v1 <= 3 && report.slice_v2 <= 2);
        assert_eq!(report.chi_tilde, -8);
    }

    #[test]
    fn every_row_satisfies_the_gcd_lcm_invariant() {
        let e = curve(0, 1);
        let g1 = map_on(&e, "y");
        let g2 = map_on(&e, "(y + 1)/x");
        let report = fiber_product_report(&g1, &g2).unwrap();
        for row in &report.rows {
            let sum: usize = row
                .pairs
                .iter()
                .map(|p| p.count * gcd(p.e1, p.e2) * (p.e1 * p.e2 / gcd(p.e1, p.e2)))
                .sum();
            assert_eq!(sum, report.d1 * report.d2, "row {}", row.value);
        }
    }

    #[test]
    fn unramified_values_contribute_nothing() {
        let g1 = legendre_x(2);
        let g2 = legendre_x(3);
        let row = pair_row(&g1, &g2, &BranchValue::FiniteRational(rat_i(17))).unwrap();
        assert_eq!(row.defect, 0);
        assert!(row.pairs.iter().all(|p| p.e1 == 1 && p.e2 == 1));
    }

    #[test]
    fn report_serializes_to_json() {
        let report = fiber_product_report(&legendre_x(2), &legendre_x(3)).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["chi_tilde"], -2);
        assert_eq!(json["degree_bound"], 16);
        assert_eq!(json["hypothesis_ok"], true);
        assert!(json["rows"][0]["pairs"][0]["count"].is_number());
    }
}
