//! Command-line surface over the exact core: curve and map input parsing,
//! plain-text job configs, subcommand dispatch, structured report emission
//! and regression-table management.

pub mod config;
pub mod input;
pub mod reports;
pub mod run;

pub use torsion_meet_core::error::{Error, Result};

/// Exit code reserved for a regression-table mismatch.
pub const EXIT_REGRESSION: i32 = 4;

/// Exit code for an error: 2 for invalid input, 3 for an internal
/// consistency failure.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidInput(_) => 2,
        Error::Internal(_) => 3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_contract() {
        assert_eq!(exit_code(&Error::invalid("x")), 2);
        assert_eq!(exit_code(&Error::internal("x")), 3);
        assert_eq!(EXIT_REGRESSION, 4);
    }
}
