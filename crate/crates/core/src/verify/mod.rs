//! Independent reference computations and claim-by-claim checks.

pub mod claims;
pub mod curvature;
pub mod oracle;

pub use claims::{run_claim_suite, ClaimGrid, ClaimId, ClaimReport, ClaimResult, ClaimStatus, SuiteConfig};
pub use curvature::{check_h_curve, check_h_trajectory, HResiduals};
pub use oracle::{oracle_integrate, oracle_shoot, OracleConfig, OracleError, OracleExit, OracleTrajectory};
