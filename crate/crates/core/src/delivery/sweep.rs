//! Sweep packing: a second constructor used when the shift-and-replace
//! generator misses its transmission count.
//!
//! A demanded term `(u, p)` has class `c = u - p (mod K)` in `[1, K-i]`.
//! Classes `f` and `Γ - f` pair into dominoes: for a base packet `σ`, the
//! terms `(σ+f, σ)` and `(σ+Γ, σ+f)` are always mutually decodable and take
//! up `Γ` consecutive users. Dominoes of one class pair are visited along a
//! helix `σ = off + n·step + floor(n / (K/g))`, so that neighbours in the
//! visiting order sit about `Γ` apart, and the resulting term sequence is
//! packed first-fit into codewords of at most `t` terms.
//!
//! Attempt 0 uses the canonical order. Later attempts reshuffle class order,
//! domino orientation, helix offset and step from a ChaCha8 stream seeded by
//! the attempt number, so the search is reproducible.

use num_integer::gcd;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SchemeConstants;
use crate::model::{wrap, CacheLayout, SubpacketId, SystemParams};

/// Default bound on sweep attempts.
pub const DEFAULT_ATTEMPTS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepResult {
    pub codewords: Vec<Vec<SubpacketId>>,
    /// Index of the ordering that reached the target.
    pub attempt: usize,
}

struct Ordering {
    /// First class of each domino family, in visiting order.
    classes: Vec<usize>,
    offset: usize,
    step: usize,
}

fn canonical(gamma: usize) -> Ordering {
    Ordering {
        classes: (1..=gamma / 2).collect(),
        offset: 0,
        step: gamma,
    }
}

fn shuffled(gamma: usize, k: usize, attempt: usize) -> Ordering {
    let mut rng = ChaCha8Rng::seed_from_u64(attempt as u64);
    let mut classes: Vec<usize> = (1..=gamma / 2)
        .map(|f| {
            if 2 * f != gamma && rng.random_bool(0.5) {
                gamma - f
            } else {
                f
            }
        })
        .collect();
    classes.shuffle(&mut rng);
    let offset = rng.random_range(0..k);
    let step = if rng.random_range(0..3) == 0 {
        gamma + 1
    } else {
        gamma
    };
    Ordering {
        classes,
        offset,
        step,
    }
}

fn term_sequence(k: usize, gamma: usize, order: &Ordering) -> Vec<SubpacketId> {
    let g = gcd(k, order.step % k.max(1)).max(1);
    let period = k / g;
    let helix: Vec<i64> = (0..k)
        .map(|n| (order.offset + n * order.step + n / period) as i64)
        .collect();

    let mut seen = vec![false; k * k];
    let mut seq = Vec::with_capacity(k * (gamma - 1));
    let mut push = |s: SubpacketId, seq: &mut Vec<SubpacketId>| {
        let slot = (s.user - 1) * k + (s.packet - 1);
        if !seen[slot] {
            seen[slot] = true;
            seq.push(s);
        }
    };
    for &f in &order.classes {
        let f = f as i64;
        for &sigma in &helix {
            let first = SubpacketId::new(wrap(sigma + f + 1, k), wrap(sigma + 1, k));
            let second =
                SubpacketId::new(wrap(sigma + gamma as i64 + 1, k), wrap(sigma + f + 1, k));
            push(first, &mut seq);
            push(second, &mut seq);
        }
    }
    seq
}

fn first_fit(seq: &[SubpacketId], layout: &CacheLayout, arity: usize) -> Vec<Vec<SubpacketId>> {
    let mut pending: Vec<SubpacketId> = seq.to_vec();
    let mut codewords = Vec::new();
    while let Some(&head) = pending.first() {
        let mut codeword = vec![head];
        let mut taken = vec![0usize];
        for (idx, &s) in pending.iter().enumerate().skip(1) {
            if codeword.len() == arity {
                break;
            }
            if codeword.iter().all(|&c| layout.mutually_known(c, s)) {
                codeword.push(s);
                taken.push(idx);
            }
        }
        for &idx in taken.iter().rev() {
            pending.remove(idx);
        }
        codewords.push(codeword);
    }
    codewords
}

/// Packs every demand of the cyclic placement into `constants.lambda`
/// codewords, trying at most `max_attempts` orderings.
///
/// Returns `None` if no ordering reaches the target; every returned codeword
/// is mutually decodable and has at most `t` terms.
pub fn sweep_packing(
    params: &SystemParams,
    layout: &CacheLayout,
    constants: &SchemeConstants,
    max_attempts: usize,
) -> Option<SweepResult> {
    let k = params.n_users();
    let gamma = constants.gamma;
    for attempt in 0..max_attempts {
        let order = if attempt == 0 {
            canonical(gamma)
        } else {
            shuffled(gamma, k, attempt)
        };
        let seq = term_sequence(k, gamma, &order);
        debug_assert_eq!(seq.len(), k * (gamma - 1));
        let codewords = first_fit(&seq, layout, constants.t);
        if codewords.len() == constants.lambda {
            return Some(SweepResult { codewords, attempt });
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delivery::scheme_constants;
    use crate::model::build_cache_layout;
    use std::collections::BTreeSet;

    fn covers_demands(k: usize, i: usize, seq: &[SubpacketId]) -> bool {
        let set: BTreeSet<_> = seq.iter().copied().collect();
        let expected: BTreeSet<_> = (1..=k)
            .flat_map(|u| (i..k).map(move |j| SubpacketId::new(u, wrap((u + j) as i64, k))))
            .collect();
        set.len() == seq.len() && set == expected
    }

    #[test]
    fn dominoes_enumerate_each_demand_once() {
        for k in 2..=20 {
            for i in 1..k {
                let gamma = k - i + 1;
                let seq = term_sequence(k, gamma, &canonical(gamma));
                assert!(covers_demands(k, i, &seq), "K={k} i={i}");
                for attempt in 1..4 {
                    let seq = term_sequence(k, gamma, &shuffled(gamma, k, attempt));
                    assert!(covers_demands(k, i, &seq), "K={k} i={i} attempt={attempt}");
                }
            }
        }
    }

    #[test]
    fn domino_halves_are_compatible() {
        for k in 3..=16 {
            for i in 1..k {
                let p = SystemParams::new(k, k, i).unwrap();
                let layout = build_cache_layout(&p);
                let gamma = k - i + 1;
                for f in 1..gamma {
                    for sigma in 0..k as i64 {
                        let a = SubpacketId::new(wrap(sigma + f as i64 + 1, k), wrap(sigma + 1, k));
                        let b = SubpacketId::new(
                            wrap(sigma + gamma as i64 + 1, k),
                            wrap(sigma + f as i64 + 1, k),
                        );
                        if a != b {
                            assert!(layout.mutually_known(a, b), "K={k} i={i} f={f}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn reaches_target_where_shifting_falls_short() {
        // the shift-and-replace generator needs 22 codewords here
        let p = SystemParams::new(11, 11, 6).unwrap();
        let c = scheme_constants(&p).unwrap();
        let out = sweep_packing(&p, &build_cache_layout(&p), &c, DEFAULT_ATTEMPTS).unwrap();
        assert_eq!(out.codewords.len(), 19);
        assert!(out.codewords.iter().all(|cw| cw.len() <= 3));
    }

    #[test]
    fn deterministic() {
        let p = SystemParams::new(15, 15, 10).unwrap();
        let c = scheme_constants(&p).unwrap();
        let layout = build_cache_layout(&p);
        let a = sweep_packing(&p, &layout, &c, DEFAULT_ATTEMPTS);
        let b = sweep_packing(&p, &layout, &c, DEFAULT_ATTEMPTS);
        assert_eq!(a, b);
    }
}
