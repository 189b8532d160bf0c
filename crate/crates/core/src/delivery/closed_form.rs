//! Explicit pairwise delivery for `1 < i <= K/2`.
//!
//! In this regime codewords hold at most two sub-packets. The pairs are
//!
//! ```text
//! W[d_{1+a}, i+a+k] ⊕ W[d_{1+k+a}, 1+a]      a in 0..K, k in 1..=floor((K-i)/2)
//! ```
//!
//! and, when `K - i` is odd, the middle class is paired as
//!
//! ```text
//! W[d_{1+a}, i+ceil((K-i)/2)+a] ⊕ W[d_{floor(K/2)+1+a}, ceil(i/2)+a]
//! ```
//!
//! for `a = 0, 1, ...` until every middle-class demand is sent. For odd `K`
//! the last of these transmissions carries a single sub-packet.

use std::collections::BTreeSet;

use super::{Codeword, Construction, DeliveryError, TransmissionSchedule};
use crate::model::{wrap, DemandVector, SubpacketId, SystemParams};

/// Pairwise schedule for `1 < i <= K/2`, with `ceil(K(K-i)/2)` transmissions.
pub fn closed_form_pairs(
    params: &SystemParams,
    d: &DemandVector,
) -> Result<TransmissionSchedule, DeliveryError> {
    let k = params.n_users();
    let i = params.cache_units();
    if i <= 1 || 2 * i > k {
        return Err(DeliveryError::Regime {
            k,
            i,
            expected: "1 < i <= K/2",
        });
    }
    let constants = super::scheme_constants(params)?;
    let missing = k - i;
    let ki = k as i64;
    let ii = i as i64;

    let mut codewords = Vec::with_capacity(constants.lambda);
    for a in 0..ki {
        for step in 1..=(missing / 2) as i64 {
            codewords.push(Codeword::new(vec![
                SubpacketId::new(wrap(1 + a, k), wrap(ii + a + step, k)),
                SubpacketId::new(wrap(1 + step + a, k), wrap(1 + a, k)),
            ]));
        }
    }

    let mut diagnostics = Vec::new();
    if missing % 2 == 1 {
        let half_missing = missing.div_ceil(2) as i64;
        let half_users = (k / 2) as i64;
        let half_cache = i.div_ceil(2) as i64;
        let mut sent = BTreeSet::new();
        let mut emitted = 0usize;
        let mut last_a = 0;
        for a in 0..=k.div_ceil(2) as i64 {
            last_a = a;
            let terms: Vec<SubpacketId> = [
                SubpacketId::new(wrap(1 + a, k), wrap(ii + half_missing + a, k)),
                SubpacketId::new(wrap(half_users + 1 + a, k), wrap(half_cache + a, k)),
            ]
            .into_iter()
            .filter(|s| sent.insert(*s))
            .collect();
            if !terms.is_empty() {
                codewords.push(Codeword::new(terms));
                emitted += 1;
            }
            if sent.len() == k {
                break;
            }
        }
        let listed = k.div_ceil(2) + 1;
        if last_a as usize + 1 != listed {
            diagnostics.push(format!(
                "odd-class pairs: {emitted} transmissions from a = 0..={last_a}; \
                 the listed range 0..=ceil(K/2) has {listed} values"
            ));
        }
    }

    Ok(TransmissionSchedule::new(
        *params,
        d.clone(),
        Some(constants),
        codewords,
        Construction::ClosedFormPairs,
        diagnostics,
    ))
}
