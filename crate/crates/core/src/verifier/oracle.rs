//! Exhaustive minimum for schedules whose codewords carry one or two terms.

use thiserror::Error;

use crate::model::{DemandVector, InstanceError, SubpacketId, SystemParams};

/// Largest `K` the exhaustive search accepts.
pub const ORACLE_MAX_USERS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("exhaustive search limited to K <= {ORACLE_MAX_USERS}, got K = {0}")]
    TooLarge(usize),
    #[error("pair regime needs 1 < i <= K/2, got K = {k}, i = {i}")]
    Regime { k: usize, i: usize },
}

/// Fewest transmissions of at most two sub-packets each that serve every
/// demand with cache-only decoding.
///
/// Builds its own view of the cyclic placement; only the demand vector's
/// length is checked against `params`.
pub fn brute_force_min_pair_schedule(
    params: &SystemParams,
    d: &DemandVector,
) -> Result<usize, OracleError> {
    let k = params.n_users();
    let i = params.cache_units();
    if k > ORACLE_MAX_USERS {
        return Err(OracleError::TooLarge(k));
    }
    if i <= 1 || 2 * i > k {
        return Err(OracleError::Regime { k, i });
    }
    DemandVector::new(d.as_slice().to_vec(), params)?;

    // user u holds packets u, u+1, ..., u+i-1 (mod K)
    let holds = |user: usize, packet: usize| (packet + k - user) % k < i;
    let terms: Vec<SubpacketId> = (1..=k)
        .flat_map(|u| (1..=k).map(move |p| SubpacketId::new(u, p)))
        .filter(|s| !holds(s.user, s.packet))
        .collect();
    let n = terms.len();
    let adj: Vec<Vec<bool>> = terms
        .iter()
        .map(|a| {
            terms
                .iter()
                .map(|b| a != b && holds(a.user, b.packet) && holds(b.user, a.packet))
                .collect()
        })
        .collect();

    let mut search = Search {
        adj: &adj,
        used: vec![false; n],
        best: n,
    };
    search.run(0, n);
    Ok(search.best)
}

struct Search<'a> {
    adj: &'a [Vec<bool>],
    used: Vec<bool>,
    best: usize,
}

impl Search<'_> {
    fn lower_bound(&self, remaining: usize) -> usize {
        let n = self.used.len();
        let isolated = (0..n)
            .filter(|&a| !self.used[a] && !(0..n).any(|b| !self.used[b] && self.adj[a][b]))
            .count();
        isolated + (remaining - isolated).div_ceil(2)
    }

    fn run(&mut self, sent: usize, remaining: usize) {
        if sent + self.lower_bound(remaining) >= self.best {
            return;
        }
        let Some(a) = self.used.iter().position(|u| !u) else {
            self.best = sent;
            return;
        };
        self.used[a] = true;
        for b in a + 1..self.used.len() {
            if !self.used[b] && self.adj[a][b] {
                self.used[b] = true;
                self.run(sent + 1, remaining - 2);
                self.used[b] = false;
            }
        }
        self.run(sent + 1, remaining - 1);
        self.used[a] = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn min_pairs(k: usize, i: usize) -> Result<usize, OracleError> {
        let p = SystemParams::new(k, k, i)?;
        brute_force_min_pair_schedule(&p, &DemandVector::identity(&p))
    }

    #[test]
    fn small_minima() {
        assert_eq!(min_pairs(4, 2).unwrap(), 4);
        assert_eq!(min_pairs(5, 2).unwrap(), 8);
        assert_eq!(min_pairs(6, 3).unwrap(), 9);
        assert_eq!(min_pairs(7, 3).unwrap(), 14);
    }

    #[test]
    fn limits() {
        assert_eq!(min_pairs(9, 2), Err(OracleError::TooLarge(9)));
        assert!(matches!(min_pairs(6, 4), Err(OracleError::Regime { .. })));
        assert!(matches!(min_pairs(6, 1), Err(OracleError::Regime { .. })));
    }
}
