//! The shift-and-replace codeword generator and its subroutines.
//!
//! The generator seeds one codeword of `t` mutually decodable terms, then
//! produces every following codeword by moving each term of the previous one
//! to the next user and the next sub-packet. Terms that were already
//! delivered are swapped for a neighbouring sub-packet through [`update`].

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{scheme_constants, DeliveryError};
use crate::model::{wrap, CacheLayout, DemandList, SubpacketId, SystemParams};

/// Which neighbour replaces a delivered term (0 = not chosen yet).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ReplacementFlag(u8);

impl ReplacementFlag {
    pub const UNSET: Self = Self(0);

    pub fn new(value: u8) -> Result<Self, DeliveryError> {
        if value > 4 {
            return Err(DeliveryError::InvalidFlag(value));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn is_unset(self) -> bool {
        self.0 == 0
    }
}

/// First codeword: terms `(1+βΓ, i+1+βΓ)` for `β = 0..=floor(i/Γ)` interleaved
/// with `(2+βΓ, 1+βΓ)` for `β = 0..=floor((i-1)/Γ)`.
///
/// When `t` is odd and `i < K-2`, the last term's packet index moves up by one.
pub fn initial_codeword_terms(params: &SystemParams) -> Result<Vec<SubpacketId>, DeliveryError> {
    let c = scheme_constants(params)?;
    let k = params.n_users();
    let i = params.cache_units() as i64;
    let gamma = c.gamma as i64;
    let first_run = i / gamma;
    let second_run = (i - 1) / gamma;

    let mut terms = Vec::with_capacity(c.t);
    for beta in 0..=first_run.max(second_run) {
        if beta <= first_run {
            terms.push(SubpacketId::new(
                wrap(1 + beta * gamma, k),
                wrap(i + 1 + beta * gamma, k),
            ));
        }
        if beta <= second_run {
            terms.push(SubpacketId::new(
                wrap(2 + beta * gamma, k),
                wrap(1 + beta * gamma, k),
            ));
        }
    }
    debug_assert_eq!(terms.len(), c.t);

    if c.t % 2 == 1 && (params.cache_units() + 2) < k {
        let last = &mut terms[c.t - 1];
        last.packet = wrap(last.packet as i64 + 1, k);
    }
    Ok(terms)
}

/// Seeds a fresh codeword once only `K` demands remain: `(1, k)` for the
/// smallest live `k`, then `(1 + floor(jK/t), k + floor(jK/t))` for
/// `j = 1..t-1`.
pub fn tail_subroutine(
    remaining: &DemandList,
    params: &SystemParams,
) -> Result<Vec<SubpacketId>, DeliveryError> {
    let c = scheme_constants(params)?;
    let k = params.n_users();
    let seed = (1..=k)
        .find(|&p| remaining.contains(SubpacketId::new(1, p)))
        .ok_or(DeliveryError::NoSeedTerm)?;

    let mut terms = vec![SubpacketId::new(1, seed)];
    for j in 1..c.t {
        let offset = ((j * k) / c.t) as i64;
        terms.push(SubpacketId::new(
            wrap(1 + offset, k),
            wrap(seed as i64 + offset, k),
        ));
    }
    Ok(terms)
}

/// Neighbour of `s` selected by `flag`: 1 next packet, 2 next user,
/// 3 previous user, 4 previous packet.
pub fn rule(s: SubpacketId, flag: ReplacementFlag, k: usize) -> Result<SubpacketId, DeliveryError> {
    let (u, p) = (s.user as i64, s.packet as i64);
    let (u, p) = match flag.value() {
        1 => (u, p + 1),
        2 => (u + 1, p),
        3 => (u - 1, p),
        4 => (u, p - 1),
        other => return Err(DeliveryError::InvalidFlag(other)),
    };
    Ok(SubpacketId::new(wrap(u, k), wrap(p, k)))
}

/// Whether `s` is still demanded and shares mutual knowledge with every term
/// already in `partial`.
pub fn check(
    s: SubpacketId,
    layout: &CacheLayout,
    remaining: &DemandList,
    partial: &[SubpacketId],
) -> bool {
    if !remaining.contains(s) {
        return false;
    }
    partial.iter().all(|&other| {
        layout.contains(other.user, s.packet) && layout.contains(s.user, other.packet)
    })
}

/// Replacement for the delivered term `s`.
///
/// With an unset flag the four rules are tried in order and the first
/// candidate passing [`check`] is taken. Otherwise the partner rule is
/// applied as-is: rules 1 and 2 alternate, as do rules 3 and 4, across
/// consecutive delivered terms of the same codeword.
pub fn update(
    s: SubpacketId,
    remaining: &DemandList,
    layout: &CacheLayout,
    partial: &[SubpacketId],
    flag: ReplacementFlag,
) -> Result<(Option<SubpacketId>, ReplacementFlag), DeliveryError> {
    let k = layout.n_users();
    match flag.value() {
        0 => {
            for candidate_flag in 1..=4 {
                let flag = ReplacementFlag(candidate_flag);
                let candidate = rule(s, flag, k)?;
                if check(candidate, layout, remaining, partial) {
                    return Ok((Some(candidate), flag));
                }
            }
            Err(DeliveryError::ReplacementExhausted { term: s })
        }
        1 | 3 => {
            let next = ReplacementFlag(flag.value() + 1);
            Ok((Some(rule(s, next, k)?), next))
        }
        2 | 4 => {
            let next = ReplacementFlag(flag.value() - 1);
            Ok((Some(rule(s, next, k)?), next))
        }
        other => Err(DeliveryError::InvalidFlag(other)),
    }
}

/// Something the generator ran into while building codeword `codeword`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorEvent {
    /// No rule produced a live, decodable replacement for `term`.
    ReplacementExhausted { codeword: usize, term: SubpacketId },
    /// The tail seed found no live demand of user 1.
    NoSeedTerm { codeword: usize },
    /// An iteration delivered nothing new; generation stopped.
    Stalled { codeword: usize, remaining: usize },
}

impl fmt::Display for GeneratorEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ReplacementExhausted { codeword, term } => {
                write!(
                    f,
                    "codeword {codeword}: no replacement for delivered term {term}"
                )
            }
            Self::NoSeedTerm { codeword } => {
                write!(
                    f,
                    "codeword {codeword}: tail seed has no live demand of user 1"
                )
            }
            Self::Stalled {
                codeword,
                remaining,
            } => write!(
                f,
                "codeword {codeword}: no progress with {remaining} demands left"
            ),
        }
    }
}

/// Raw output of [`run_generator`], before any post-condition check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorRun {
    pub codewords: Vec<Vec<SubpacketId>>,
    pub events: Vec<GeneratorEvent>,
    /// Demands that were never delivered because generation stalled.
    pub undelivered: usize,
}

impl GeneratorRun {
    pub fn first_exhausted(&self) -> Option<SubpacketId> {
        self.events.iter().find_map(|e| match e {
            GeneratorEvent::ReplacementExhausted { term, .. } => Some(*term),
            _ => None,
        })
    }
}

fn push_unique(terms: &mut Vec<SubpacketId>, s: SubpacketId) {
    if !terms.contains(&s) {
        terms.push(s);
    }
}

/// Runs the generator until every demand is delivered or no progress is made.
///
/// Replacements follow [`update`] exactly, so a run may produce codewords
/// that fail decodability or coverage; callers are expected to check.
pub fn run_generator(
    params: &SystemParams,
    layout: &CacheLayout,
    mut remaining: DemandList,
) -> Result<GeneratorRun, DeliveryError> {
    let k = params.n_users();
    let mut current = initial_codeword_terms(params)?;
    let mut codewords = Vec::new();
    let mut events = Vec::new();

    while !remaining.is_empty() {
        let index = codewords.len();
        let mut next: Vec<SubpacketId> = Vec::new();
        let mut flag = ReplacementFlag::UNSET;

        for &term in &current {
            if remaining.contains(term) {
                push_unique(&mut next, term);
            } else if next.is_empty() && remaining.len() == k {
                match tail_subroutine(&remaining, params) {
                    Ok(seeded) => {
                        next.clear();
                        for s in seeded {
                            push_unique(&mut next, s);
                        }
                    }
                    Err(DeliveryError::NoSeedTerm) => {
                        events.push(GeneratorEvent::NoSeedTerm { codeword: index });
                    }
                    Err(e) => return Err(e),
                }
            } else {
                match update(term, &remaining, layout, &next, flag) {
                    Ok((replacement, new_flag)) => {
                        flag = new_flag;
                        if let Some(r) = replacement {
                            push_unique(&mut next, r);
                        }
                    }
                    Err(DeliveryError::ReplacementExhausted { term }) => {
                        events.push(GeneratorEvent::ReplacementExhausted {
                            codeword: index,
                            term,
                        });
                    }
                    Err(e) => return Err(e),
                }
            }
        }

        let delivered = next.iter().filter(|&&s| remaining.remove(s)).count();
        if delivered == 0 {
            events.push(GeneratorEvent::Stalled {
                codeword: index,
                remaining: remaining.len(),
            });
            break;
        }
        current = next.iter().map(|s| s.shifted(1, k)).collect();
        codewords.push(next);
    }

    Ok(GeneratorRun {
        codewords,
        events,
        undelivered: remaining.len(),
    })
}
