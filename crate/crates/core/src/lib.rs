//! Coded caching with linear sub-packetization.
//!
//! Every file is split into `K` sub-packets and user `k` caches the `i`
//! consecutive sub-packets `k, k+1, ..., k+i-1` (cyclically) of every file.
//! The delivery phase broadcasts XOR codewords that each requesting user can
//! decode from its own cache alone. The crate covers:
//!
//! * [`model`]: instance parameters, cyclic index arithmetic, placement and
//!   the ordered list of demanded sub-packets.
//! * [`delivery`]: the shift-and-replace codeword generator, the pairwise
//!   closed form for the `1 < i <= K/2` regime, and rate formulas.
//! * [`verifier`]: decodability/coverage checks, a bit-exact XOR simulator
//!   and a brute-force oracle for pair schedules.
//! * [`multiaccess`]: the cyclic multi-access network mapping, its rate upper
//!   bound and the optimality comparison table.
//! * [`cli`]: the command-line front end used by the `cachecode` binary.

pub mod cli;
pub mod delivery;
pub mod model;
pub mod multiaccess;
pub mod rational;
pub mod verifier;

pub use delivery::{
    generate_schedule, plan_delivery, rate, scheme_constants, Codeword, Construction,
    DeliveryError, SchemeConstants, TransmissionSchedule,
};
pub use model::{
    build_cache_layout, build_demand_list, wrap, CacheLayout, DemandList, DemandVector,
    InstanceError, SubpacketId, SystemParams,
};
pub use rational::Rational;
