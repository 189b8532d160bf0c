use std::fmt;

use serde::{Deserialize, Serialize};

use crate::delivery::{Codeword, TransmissionSchedule};
use crate::model::{CacheLayout, SubpacketId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ViolationReason {
    /// The requester of the term does not hold `other`'s sub-packet.
    MissingSideInformation { other: SubpacketId },
    /// The requester already caches this sub-packet.
    NotDemanded,
    /// User or packet index outside `[1, K]`.
    OutOfRange,
    /// Delivered by more than one codeword.
    Duplicate,
    /// Demanded but never delivered.
    NeverDelivered,
}

impl ViolationReason {
    /// Whether this concerns decodability rather than coverage.
    pub fn is_knowledge(&self) -> bool {
        matches!(self, Self::MissingSideInformation { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// `None` for demands that no codeword carries.
    pub codeword: Option<usize>,
    pub term: SubpacketId,
    pub reason: ViolationReason,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.codeword {
            Some(c) => write!(f, "codeword {c}, {}: ", self.term)?,
            None => write!(f, "{}: ", self.term)?,
        }
        match self.reason {
            ViolationReason::MissingSideInformation { other } => {
                write!(
                    f,
                    "user {} lacks packet {} of {other}",
                    self.term.user, other.packet
                )
            }
            ViolationReason::NotDemanded => f.write_str("already cached by its requester"),
            ViolationReason::OutOfRange => f.write_str("index out of range"),
            ViolationReason::Duplicate => f.write_str("delivered more than once"),
            ViolationReason::NeverDelivered => f.write_str("never delivered"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    /// Every requester can cancel all other terms of its codewords from cache.
    pub decodable: bool,
    /// Every demanded sub-packet is delivered exactly once, nothing else is.
    pub coverage_ok: bool,
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn is_ok(&self) -> bool {
        self.decodable && self.coverage_ok
    }
}

/// Checks decodability and coverage of `schedule` against `layout`.
pub fn verify_instantaneous_decodability(
    schedule: &TransmissionSchedule,
    layout: &CacheLayout,
) -> VerificationReport {
    verify_codewords(schedule.codewords(), layout)
}

/// [`verify_instantaneous_decodability`] on a bare codeword list.
pub fn verify_codewords(codewords: &[Codeword], layout: &CacheLayout) -> VerificationReport {
    let k = layout.n_users();
    let in_range = |s: &SubpacketId| (1..=k).contains(&s.user) && (1..=k).contains(&s.packet);
    let mut violations = Vec::new();
    let mut times_sent = vec![0usize; k * k];

    for (idx, cw) in codewords.iter().enumerate() {
        for &term in cw.terms() {
            if !in_range(&term) {
                violations.push(Violation {
                    codeword: Some(idx),
                    term,
                    reason: ViolationReason::OutOfRange,
                });
                continue;
            }
            let slot = (term.user - 1) * k + (term.packet - 1);
            times_sent[slot] += 1;
            if layout.contains(term.user, term.packet) {
                violations.push(Violation {
                    codeword: Some(idx),
                    term,
                    reason: ViolationReason::NotDemanded,
                });
            } else if times_sent[slot] == 2 {
                violations.push(Violation {
                    codeword: Some(idx),
                    term,
                    reason: ViolationReason::Duplicate,
                });
            }
            for &other in cw.terms() {
                if other == term || !in_range(&other) {
                    continue;
                }
                if !layout.contains(term.user, other.packet) {
                    violations.push(Violation {
                        codeword: Some(idx),
                        term,
                        reason: ViolationReason::MissingSideInformation { other },
                    });
                }
            }
        }
    }

    for user in 1..=k {
        for packet in 1..=k {
            if !layout.contains(user, packet) && times_sent[(user - 1) * k + (packet - 1)] == 0 {
                violations.push(Violation {
                    codeword: None,
                    term: SubpacketId::new(user, packet),
                    reason: ViolationReason::NeverDelivered,
                });
            }
        }
    }

    let decodable = !violations.iter().any(|v| v.reason.is_knowledge());
    let coverage_ok = violations.iter().all(|v| v.reason.is_knowledge());
    VerificationReport {
        decodable,
        coverage_ok,
        violations,
    }
}
