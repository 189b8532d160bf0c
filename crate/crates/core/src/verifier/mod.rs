//! Independent checks on delivery schedules.
//!
//! Nothing here calls into the codeword generators: demanded sets are
//! recomputed from the cache layout and decoding works on real bytes.

mod decodability;
mod oracle;
mod simulate;

pub use decodability::{
    verify_codewords, verify_instantaneous_decodability, VerificationReport, Violation,
    ViolationReason,
};
pub use oracle::{brute_force_min_pair_schedule, OracleError, ORACLE_MAX_USERS};
pub use simulate::{
    simulate_end_to_end, simulate_schedule, FileStore, MismatchReason, SimulationError,
    SimulationReport,
};
