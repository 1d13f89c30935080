//! Subcommand execution: resolve parsed inputs, call the core pipelines, and
//! assemble reports, warnings, text renderings and CSV tables.

use torsion_meet_core::curve::{canonicalize_shifted, RationalMap};
use torsion_meet_core::error::{Error, Result};
use torsion_meet_core::expr::parse_map_expression;
use torsion_meet_core::factor::factored_var_string;
use torsion_meet_core::fiberprod::fiber_product_report;
use torsion_meet_core::field::Rational;
use torsion_meet_core::meet::{
    brute_force_check, intersect_count, mw_intersect, sweep, sweep_locked_table, torsion_image,
    CurvePoint, MwSpec, SweepConfig, SweepReport,
};
use torsion_meet_core::nevanlinna::{check_ratio_lemma, check_smt, WpEvaluator, NEVANLINNA_TOLERANCE};
use torsion_meet_core::poly::QPoly;
use torsion_meet_core::ramify::{branch_loci_differ, branch_locus, rh_verify, BranchValue};

use crate::input::{parse_curve, CurveSpec};
use crate::reports::{
    BranchReport, ChiReport, CurveEcho, DegreeReport, Envelope, IntersectReport, MwBoxEcho,
    MwReport, NevanRatioReport, NevanSmtReport, TorsionImagesReport,
};

/// In-band warning for configurations outside the theorems' hypotheses.
pub const HYPOTHESIS_WARNING: &str = "branch loci equal; theorem hypotheses not satisfied";

fn build_map_with_spec(curve_text: &str, map_text: &str) -> Result<(RationalMap, CurveSpec)> {
    let spec = parse_curve(curve_text)?;
    let expr = parse_map_expression(map_text)?;
    let g = canonicalize_shifted(&expr, &spec.curve, &spec.x_shift)?;
    Ok((g, spec))
}

fn echo_of(spec: &CurveSpec) -> CurveEcho {
    CurveEcho {
        input: spec.label.clone(),
        model_a: spec.curve.a.to_string(),
        model_b: spec.curve.b.to_string(),
        x_shift: spec.x_shift.to_string(),
    }
}

/// Map on the curve's short Weierstrass model, plus the echo of the inputs.
pub fn build_map(curve_text: &str, map_text: &str) -> Result<(RationalMap, CurveEcho)> {
    let (g, spec) = build_map_with_spec(curve_text, map_text)?;
    let echo = echo_of(&spec);
    Ok((g, echo))
}

fn coeff_strings(p: &QPoly) -> Vec<String> {
    p.coeffs.iter().map(Rational::to_string).collect()
}

pub fn run_branch(curve_text: &str, map_text: &str) -> Result<(BranchReport, Vec<String>)> {
    let (g, curve) = build_map(curve_text, map_text)?;
    let locus = branch_locus(&g)?;
    let rh = rh_verify(&g)?;
    let report = BranchReport {
        curve,
        map: map_text.trim().to_string(),
        degree: g.degree(),
        finite_part: factored_var_string(&locus.finite_part, "t"),
        inf: locus.includes_infinity,
        branch_values: locus.count_values(),
        rows: rh.rows,
        total_defect: rh.total,
        expected_defect: 2 * rh.degree,
    };
    Ok((report, Vec::new()))
}

pub fn run_degree(curve_text: &str, map_text: &str) -> Result<(DegreeReport, Vec<String>)> {
    let (g, curve) = build_map(curve_text, map_text)?;
    let report = DegreeReport {
        curve,
        map: map_text.trim().to_string(),
        degree: g.degree(),
        polar_degree: g.degree_by_polar_divisor(),
        fiber_degree: g.degree_by_generic_fiber(),
        even: g.is_even(),
    };
    Ok((report, Vec::new()))
}

pub fn run_chi(
    curve1: &str,
    map1: &str,
    curve2: &str,
    map2: &str,
) -> Result<(ChiReport, Vec<String>)> {
    let (g1, echo1) = build_map(curve1, map1)?;
    let (g2, echo2) = build_map(curve2, map2)?;
    let fp = fiber_product_report(&g1, &g2)?;
    let warnings =
        if fp.hypothesis_ok { Vec::new() } else { vec![HYPOTHESIS_WARNING.to_string()] };
    let report = ChiReport {
        curve1: echo1,
        map1: map1.trim().to_string(),
        curve2: echo2,
        map2: map2.trim().to_string(),
        d1: fp.d1,
        d2: fp.d2,
        chi_tilde: fp.chi_tilde,
        degree_bound: fp.degree_bound,
        slice_v1: fp.slice_v1,
        slice_v2: fp.slice_v2,
        hypothesis_ok: fp.hypothesis_ok,
        rows: fp.rows,
    };
    Ok((report, warnings))
}

pub fn run_torsion_images(
    curve_text: &str,
    map_text: &str,
    level: usize,
    cumulative: bool,
) -> Result<(TorsionImagesReport, Vec<String>)> {
    let (g, curve) = build_map(curve_text, map_text)?;
    let image = torsion_image(&g, level, cumulative)?;
    let report = TorsionImagesReport {
        curve,
        map: map_text.trim().to_string(),
        level,
        cumulative,
        finite_part: image.finite_factored(),
        coefficients: coeff_strings(&image.finite_part),
        inf: image.includes_infinity,
        distinct_values: image.value_count(),
    };
    Ok((report, Vec::new()))
}

#[allow(clippy::too_many_arguments)]
pub fn run_intersect(
    curve1: &str,
    map1: &str,
    level1: usize,
    curve2: &str,
    map2: &str,
    level2: usize,
    cumulative: bool,
    brute: Option<f64>,
) -> Result<(IntersectReport, Vec<String>)> {
    let (g1, echo1) = build_map(curve1, map1)?;
    let (g2, echo2) = build_map(curve2, map2)?;
    let image1 = torsion_image(&g1, level1, cumulative)?;
    let image2 = torsion_image(&g2, level2, cumulative)?;
    let meet = intersect_count(&image1, &image2);
    let mut warnings = Vec::new();
    if !branch_loci_differ(&g1, &g2)? {
        warnings.push(HYPOTHESIS_WARNING.to_string());
    }
    let brute_count = match brute {
        None => None,
        Some(tolerance) => {
            if level1 != level2 {
                return Err(Error::invalid("the brute-force cross-check needs equal levels"));
            }
            let n = brute_force_check(&g1, &g2, level1, cumulative, tolerance)?;
            if n != meet.count {
                return Err(Error::internal(format!(
                    "brute-force count {n} disagrees with the exact count {}",
                    meet.count
                )));
            }
            Some(n)
        }
    };
    let report = IntersectReport {
        curve1: echo1,
        map1: map1.trim().to_string(),
        level1,
        curve2: echo2,
        map2: map2.trim().to_string(),
        level2,
        cumulative,
        count: meet.count,
        witness: factored_var_string(&meet.witness, "t"),
        witness_coefficients: coeff_strings(&meet.witness),
        inf: meet.includes_infinity,
        brute_count,
    };
    Ok((report, warnings))
}

pub fn run_sweep(config: &SweepConfig) -> (SweepReport, Vec<String>) {
    let report = sweep(config);
    let failed = report.rows.iter().filter(|r| r.error.is_some()).count();
    let mut warnings = Vec::new();
    if failed > 0 {
        warnings.push(format!("{failed} sweep cells failed; see the row errors"));
    }
    (report, warnings)
}

/// Generators are supplied in the input coordinate; shift them onto the
/// short Weierstrass model before enumeration.
fn shift_points(points: &[CurvePoint], shift: &Rational) -> Vec<CurvePoint> {
    points
        .iter()
        .map(|p| match p {
            CurvePoint::Affine(x, y) => CurvePoint::Affine(x - shift, y.clone()),
            CurvePoint::Infinity => CurvePoint::Infinity,
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
pub fn run_mw(
    curve1: &str,
    map1: &str,
    generators1: &[CurvePoint],
    radius1: i64,
    curve2: &str,
    map2: &str,
    generators2: &[CurvePoint],
    radius2: i64,
) -> Result<(MwReport, Vec<String>)> {
    let (g1, spec1) = build_map_with_spec(curve1, map1)?;
    let (g2, spec2) = build_map_with_spec(curve2, map2)?;
    let box1 = MwSpec {
        curve: g1.curve.clone(),
        generators: shift_points(generators1, &spec1.x_shift),
        radius: radius1,
    };
    let box2 = MwSpec {
        curve: g2.curve.clone(),
        generators: shift_points(generators2, &spec2.x_shift),
        radius: radius2,
    };
    let mw = mw_intersect(&g1, &box1, &g2, &box2)?;
    let mut warnings = Vec::new();
    if !branch_loci_differ(&g1, &g2)? {
        warnings.push(HYPOTHESIS_WARNING.to_string());
    }
    let describe = |pts: &[CurvePoint]| pts.iter().map(CurvePoint::describe).collect();
    let report = MwReport {
        box1: MwBoxEcho {
            curve: echo_of(&spec1),
            map: map1.trim().to_string(),
            generators: describe(generators1),
            radius: radius1,
            points: mw.points.0,
            values: mw.values.0,
        },
        box2: MwBoxEcho {
            curve: echo_of(&spec2),
            map: map2.trim().to_string(),
            generators: describe(generators2),
            radius: radius2,
            points: mw.points.1,
            values: mw.values.1,
        },
        count: mw.intersection.count,
        witness: factored_var_string(&mw.intersection.witness, "t"),
        inf: mw.intersection.includes_infinity,
        generators: mw.generators,
        implied_constant: mw.implied_constant,
    };
    Ok((report, warnings))
}

fn r_max_for(wp: &WpEvaluator, radius_factor: f64) -> Result<f64> {
    if !(radius_factor.is_finite() && radius_factor > 0.0) {
        return Err(Error::invalid("radius factor must be a positive finite number"));
    }
    Ok(radius_factor * wp.lattice().max_generator_norm())
}

pub fn run_nevan_ratio(
    curve_text: &str,
    map_text: &str,
    targets: &[BranchValue],
    radius_factor: f64,
) -> Result<(NevanRatioReport, Vec<String>)> {
    let (g, curve) = build_map(curve_text, map_text)?;
    let wp = WpEvaluator::new(&g.curve)?;
    let r_max = r_max_for(&wp, radius_factor)?;
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for alpha in targets {
        let row = check_ratio_lemma(&g, &wp, alpha, r_max)?;
        if !row.ok {
            warnings.push(format!(
                "ratio for target {} deviates by {} (tolerance {NEVANLINNA_TOLERANCE})",
                row.target, row.deviation
            ));
        }
        rows.push(row);
    }
    let report =
        NevanRatioReport { curve, map: map_text.trim().to_string(), r_max, targets: rows };
    Ok((report, warnings))
}

pub fn run_nevan_smt(
    curve_text: &str,
    map_text: &str,
    targets: &[BranchValue],
    radius_factor: f64,
) -> Result<(NevanSmtReport, Vec<String>)> {
    let (g, curve) = build_map(curve_text, map_text)?;
    let wp = WpEvaluator::new(&g.curve)?;
    let r_max = r_max_for(&wp, radius_factor)?;
    let smt = check_smt(&g, &wp, targets, r_max)?;
    let mut warnings = Vec::new();
    if !smt.ok {
        warnings.push(format!(
            "margin {} falls below -{NEVANLINNA_TOLERANCE} of the characteristic {}",
            smt.margin, smt.characteristic_at_r_max
        ));
    }
    let report = NevanSmtReport { curve, map: map_text.trim().to_string(), r_max, smt };
    Ok((report, warnings))
}

// ---- text and CSV rendering ----

/// Envelope header common to all text output.
pub fn render_text<T>(env: &Envelope<T>, body: &str) -> String {
    let mut out = format!("command: {}\n", env.command);
    if let Some(seed) = env.seed {
        out.push_str(&format!("seed: {seed}\n"));
    }
    for w in &env.warnings {
        out.push_str(&format!("warning: {w}\n"));
    }
    out.push_str(body);
    out
}

fn curve_line(label: &str, e: &CurveEcho) -> String {
    format!(
        "{label}: {} -> y^2 = x^3 + ({})x + ({}), x shift {}\n",
        e.input, e.model_a, e.model_b, e.x_shift
    )
}

pub fn render_branch(r: &BranchReport) -> String {
    let mut out = curve_line("curve", &r.curve);
    out.push_str(&format!("map: {} (degree {})\n", r.map, r.degree));
    out.push_str(&format!(
        "branch locus: {} | infinity: {} | values: {}\n",
        r.finite_part, r.inf, r.branch_values
    ));
    for row in &r.rows {
        let mults =
            row.multiplicities.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        out.push_str(&format!(
            "  value {} | orbit degree {} | multiplicities {} | defect {}\n",
            row.value, row.orbit_degree, mults, row.contribution
        ));
    }
    out.push_str(&format!("total defect: {} (expected {})\n", r.total_defect, r.expected_defect));
    out
}

pub fn render_degree(r: &DegreeReport) -> String {
    let mut out = curve_line("curve", &r.curve);
    out.push_str(&format!("map: {}\n", r.map));
    out.push_str(&format!(
        "degree: {} (polar divisor {}, generic fiber {}) | even: {}\n",
        r.degree, r.polar_degree, r.fiber_degree, r.even
    ));
    out
}

pub fn render_chi(r: &ChiReport) -> String {
    let mut out = curve_line("curve1", &r.curve1);
    out.push_str(&format!("map1: {} (degree {})\n", r.map1, r.d1));
    out.push_str(&curve_line("curve2", &r.curve2));
    out.push_str(&format!("map2: {} (degree {})\n", r.map2, r.d2));
    out.push_str(&format!(
        "chi_tilde: {} | degree bound: {} | slice sizes: {}, {} | hypothesis_ok: {}\n",
        r.chi_tilde, r.degree_bound, r.slice_v1, r.slice_v2, r.hypothesis_ok
    ));
    for row in &r.rows {
        let pairs = row
            .pairs
            .iter()
            .map(|p| format!("{}x{}:{}", p.e1, p.e2, p.count))
            .collect::<Vec<_>>()
            .join(" ");
        out.push_str(&format!(
            "  value {} | orbit degree {} | pairs {} | defect {}\n",
            row.value, row.orbit_degree, pairs, row.defect
        ));
    }
    out
}

pub fn render_torsion_images(r: &TorsionImagesReport) -> String {
    let mut out = curve_line("curve", &r.curve);
    out.push_str(&format!(
        "map: {} | level: {} | cumulative: {}\n",
        r.map, r.level, r.cumulative
    ));
    out.push_str(&format!(
        "finite values: {} | infinity: {} | distinct values: {}\n",
        r.finite_part, r.inf, r.distinct_values
    ));
    out
}

pub fn render_intersect(r: &IntersectReport) -> String {
    let mut out = curve_line("curve1", &r.curve1);
    out.push_str(&format!("map1: {} at level {}\n", r.map1, r.level1));
    out.push_str(&curve_line("curve2", &r.curve2));
    out.push_str(&format!("map2: {} at level {}\n", r.map2, r.level2));
    out.push_str(&format!(
        "count: {} | witness: {} | infinity: {} | cumulative: {}\n",
        r.count, r.witness, r.inf, r.cumulative
    ));
    if let Some(n) = r.brute_count {
        out.push_str(&format!("brute-force count: {n} (agrees)\n"));
    }
    out
}

pub fn render_sweep(r: &SweepReport) -> String {
    let mut out = String::new();
    for (level, max) in &r.max_per_level {
        out.push_str(&format!("level {level}: max off-diagonal count {max}\n"));
    }
    out.push_str(&format!("maxima nonincreasing in level: {}\n", r.max_nonincreasing));
    out.push_str(&sweep_locked_table(r));
    out
}

pub fn render_mw(r: &MwReport) -> String {
    let mut out = String::new();
    for (tag, b) in [("box1", &r.box1), ("box2", &r.box2)] {
        out.push_str(&curve_line(&format!("{tag} curve"), &b.curve));
        out.push_str(&format!(
            "{tag}: map {} | generators {} | radius {} | points {} | values {}\n",
            b.map,
            b.generators.join(" "),
            b.radius,
            b.points,
            b.values
        ));
    }
    out.push_str(&format!(
        "count: {} | witness: {} | infinity: {} | generators: {} | implied constant: {}\n",
        r.count, r.witness, r.inf, r.generators, r.implied_constant
    ));
    out
}

pub fn render_nevan_ratio(r: &NevanRatioReport) -> String {
    let mut out = curve_line("curve", &r.curve);
    out.push_str(&format!("map: {} | r_max: {}\n", r.map, r.r_max));
    for row in &r.targets {
        out.push_str(&format!(
            "  target {} | fiber {} of degree {} | expected {} | final ratio {} | deviation {} | ok {}\n",
            row.target,
            row.fiber_size,
            row.degree,
            row.expected,
            row.ratios.last().unwrap(),
            row.deviation,
            row.ok
        ));
    }
    out
}

pub fn render_nevan_smt(r: &NevanSmtReport) -> String {
    let mut out = curve_line("curve", &r.curve);
    out.push_str(&format!("map: {} | r_max: {}\n", r.map, r.r_max));
    out.push_str(&format!(
        "targets: {} | margin at r_max: {} | characteristic at r_max: {} | ok: {}\n",
        r.smt.targets.join("; "),
        r.smt.margin,
        r.smt.characteristic_at_r_max,
        r.smt.ok
    ));
    out
}

/// Grid CSV for the ratio subcommand: radius, one counting column and one
/// ratio column per target, and the shared characteristic.
pub fn ratio_csv(r: &NevanRatioReport) -> String {
    let mut out = String::from("r");
    for t in &r.targets {
        out.push_str(&format!(",n1({})", t.target));
    }
    out.push_str(",T");
    for t in &r.targets {
        out.push_str(&format!(",ratio({})", t.target));
    }
    out.push('\n');
    let grid = &r.targets[0];
    for i in 0..grid.radii.len() {
        out.push_str(&grid.radii[i].to_string());
        for t in &r.targets {
            out.push_str(&format!(",{}", t.counting[i]));
        }
        out.push_str(&format!(",{}", grid.characteristic[i]));
        for t in &r.targets {
            out.push_str(&format!(",{}", t.ratios[i]));
        }
        out.push('\n');
    }
    out
}

/// Grid CSV for the margin subcommand: radius, one counting column per
/// target, the characteristic and the margin.
pub fn smt_csv(r: &NevanSmtReport) -> String {
    let smt = &r.smt;
    let mut out = String::from("r");
    for t in &smt.targets {
        out.push_str(&format!(",n1({t})"));
    }
    out.push_str(",T,margin\n");
    for i in 0..smt.radii.len() {
        out.push_str(&smt.radii[i].to_string());
        for row in &smt.counting {
            out.push_str(&format!(",{}", row[i]));
        }
        out.push_str(&format!(",{},{}\n", smt.characteristic[i], smt.margins[i]));
    }
    out
}
