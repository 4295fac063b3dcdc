//! Scenario files, run directories, plot data and the invariant suite for
//! `volpres-core`.

pub mod checks;
pub mod families;
pub mod plotdata;
pub mod record;
pub mod run;
pub mod scenario;
pub mod sweep;

pub use checks::{run_checks, CheckOutcome};
pub use plotdata::emit_plotdata;
pub use record::{read_record, Failure, FailureKind, IoError, RunRecord, Summary};
pub use run::run;
pub use scenario::{parse_scenario, print_scenario, Scenario, ScenarioError};
pub use sweep::{sweep, SweepRecord};
