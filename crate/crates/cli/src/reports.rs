//! Serializable reports. The JSON schema is the field layout of these types
//! together with the core report types they embed; every report round-trips
//! through serde. Exact quantities are rendered as rational strings, floats
//! in the shortest decimal form that round-trips, declared by `float_format`.

use serde::{Deserialize, Serialize};
use torsion_meet_core::error::{Error, Result};
use torsion_meet_core::fiberprod::ValueRow;
use torsion_meet_core::meet::SweepReport;
use torsion_meet_core::nevanlinna::{RatioReport, SmtReport};
use torsion_meet_core::ramify::RhRow;

/// Declared encoding of every floating-point field in a report.
pub const FLOAT_FORMAT: &str = "ieee754-binary64, shortest round-trip decimal";

/// Common wrapper around every subcommand's report.
#[derive(Debug, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub command: String,
    pub seed: Option<u64>,
    pub float_format: String,
    pub warnings: Vec<String>,
    pub report: T,
}

impl<T: Serialize> Envelope<T> {
    pub fn new(command: &str, seed: Option<u64>, warnings: Vec<String>, report: T) -> Self {
        Envelope {
            command: command.to_string(),
            seed,
            float_format: FLOAT_FORMAT.to_string(),
            warnings,
            report,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let body = serde_json::to_string(self)
            .map_err(|e| Error::internal(format!("report serialization failed: {e}")))?;
        Ok(format!("{body}\n"))
    }
}

/// Echo of a parsed curve: the input label, the short Weierstrass model, and
/// the shift taking the input x-coordinate to the model's.
#[derive(Debug, Serialize, Deserialize)]
pub struct CurveEcho {
    pub input: String,
    pub model_a: String,
    pub model_b: String,
    pub x_shift: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BranchReport {
    pub curve: CurveEcho,
    pub map: String,
    pub degree: usize,
    /// Monic squarefree polynomial in t whose roots are the finite branch
    /// values, as a product of irreducible factors.
    pub finite_part: String,
    pub inf: bool,
    pub branch_values: usize,
    pub rows: Vec<RhRow>,
    pub total_defect: usize,
    pub expected_defect: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DegreeReport {
    pub curve: CurveEcho,
    pub map: String,
    pub degree: usize,
    pub polar_degree: usize,
    pub fiber_degree: usize,
    pub even: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ChiReport {
    pub curve1: CurveEcho,
    pub map1: String,
    pub curve2: CurveEcho,
    pub map2: String,
    pub d1: usize,
    pub d2: usize,
    pub chi_tilde: i64,
    pub degree_bound: usize,
    pub slice_v1: usize,
    pub slice_v2: usize,
    pub hypothesis_ok: bool,
    pub rows: Vec<ValueRow>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TorsionImagesReport {
    pub curve: CurveEcho,
    pub map: String,
    pub level: usize,
    pub cumulative: bool,
    /// Factored form of the monic squarefree polynomial of finite values.
    pub finite_part: String,
    /// Its coefficients as exact rationals, constant term first.
    pub coefficients: Vec<String>,
    pub inf: bool,
    pub distinct_values: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct IntersectReport {
    pub curve1: CurveEcho,
    pub map1: String,
    pub level1: usize,
    pub curve2: CurveEcho,
    pub map2: String,
    pub level2: usize,
    pub cumulative: bool,
    pub count: usize,
    /// Monic gcd of the two finite image parts, factored.
    pub witness: String,
    pub witness_coefficients: Vec<String>,
    pub inf: bool,
    /// Independent floating-point recount, when requested.
    pub brute_count: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MwBoxEcho {
    pub curve: CurveEcho,
    pub map: String,
    pub generators: Vec<String>,
    pub radius: i64,
    pub points: usize,
    pub values: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MwReport {
    pub box1: MwBoxEcho,
    pub box2: MwBoxEcho,
    pub count: usize,
    pub witness: String,
    pub inf: bool,
    pub generators: usize,
    /// count^(1/(1+generators)), an observed scale for the intersection
    /// bound's constant.
    pub implied_constant: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct NevanRatioReport {
    pub curve: CurveEcho,
    pub map: String,
    pub r_max: f64,
    pub targets: Vec<RatioReport>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct NevanSmtReport {
    pub curve: CurveEcho,
    pub map: String,
    pub r_max: f64,
    pub smt: SmtReport,
}

pub type SweepEnvelope = Envelope<SweepReport>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_round_trips() {
        let env = Envelope::new("degree", Some(7), vec!["note".into()], 42usize);
        let json = env.to_json().unwrap();
        let back: Envelope<usize> = serde_json::from_str(json.trim()).unwrap();
        assert_eq!(back.command, "degree");
        assert_eq!(back.seed, Some(7));
        assert_eq!(back.float_format, FLOAT_FORMAT);
        assert_eq!(back.warnings, vec!["note".to_string()]);
        assert_eq!(back.report, 42);
    }
}
