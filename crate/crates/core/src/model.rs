//! Problem instances, cyclic index arithmetic and the placement policy.
//!
//! All user, file and sub-packet indices are 1-based. Index arithmetic on
//! users and sub-packets goes through [`wrap`], which folds any integer back
//! into `[1, K]`.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("number of users K must be at least 1")]
    NoUsers,
    #[error("number of files N must be at least 1")]
    NoFiles,
    #[error("cache units i = {i} must lie in [0, K = {k}]")]
    CacheUnitsOutOfRange { i: usize, k: usize },
    #[error("schedule generation needs N >= K (got N = {n}, K = {k})")]
    TooFewFiles { n: usize, k: usize },
    #[error("demand vector has length {got}, expected K = {k}")]
    DemandLength { got: usize, k: usize },
    #[error("user {user} demands file {file}, outside [1, N = {n}]")]
    DemandOutOfRange { user: usize, file: usize, n: usize },
}

/// Maps any integer onto `[1, k]` with wrap-around: `((x - 1) mod k) + 1`.
pub fn wrap(x: i64, k: usize) -> usize {
    assert!(k >= 1, "wrap needs k >= 1");
    let k = k as i64;
    ((x - 1).rem_euclid(k) + 1) as usize
}

/// An `(N, K)` coded caching instance with cache memory `M = iN/K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemParams {
    n_files: usize,
    n_users: usize,
    cache_units: usize,
}

impl SystemParams {
    pub fn new(n_files: usize, n_users: usize, cache_units: usize) -> Result<Self, InstanceError> {
        if n_users == 0 {
            return Err(InstanceError::NoUsers);
        }
        if n_files == 0 {
            return Err(InstanceError::NoFiles);
        }
        if cache_units > n_users {
            return Err(InstanceError::CacheUnitsOutOfRange {
                i: cache_units,
                k: n_users,
            });
        }
        Ok(Self {
            n_files,
            n_users,
            cache_units,
        })
    }

    /// `N`
    pub fn n_files(&self) -> usize {
        self.n_files
    }

    /// `K`
    pub fn n_users(&self) -> usize {
        self.n_users
    }

    /// `i`
    pub fn cache_units(&self) -> usize {
        self.cache_units
    }

    /// Number of sub-packets each user still needs, `K - i`.
    pub fn missing_per_user(&self) -> usize {
        self.n_users - self.cache_units
    }

    /// Cache size in files, `M = iN/K`.
    pub fn memory(&self) -> Rational {
        Rational::new(
            (self.cache_units * self.n_files) as i64,
            self.n_users as i64,
        )
    }

    /// `M/N = i/K`.
    pub fn cache_fraction(&self) -> Rational {
        Rational::new(self.cache_units as i64, self.n_users as i64)
    }

    /// Worst-case delivery assumes every user can ask for a distinct file.
    pub fn require_worst_case(&self) -> Result<(), InstanceError> {
        if self.n_files < self.n_users {
            return Err(InstanceError::TooFewFiles {
                n: self.n_files,
                k: self.n_users,
            });
        }
        Ok(())
    }
}

impl fmt::Display for SystemParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(N={}, K={}, i={})",
            self.n_files, self.n_users, self.cache_units
        )
    }
}

/// The demanded sub-packet `W_{d_user, packet}`.
///
/// Keyed on the requesting user rather than the file, so two users asking
/// for the same file still name different sub-packets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SubpacketId {
    pub user: usize,
    pub packet: usize,
}

impl SubpacketId {
    pub const fn new(user: usize, packet: usize) -> Self {
        Self { user, packet }
    }

    /// Same term with user and packet index both moved by `delta`.
    pub fn shifted(self, delta: i64, k: usize) -> Self {
        Self {
            user: wrap(self.user as i64 + delta, k),
            packet: wrap(self.packet as i64 + delta, k),
        }
    }
}

impl fmt::Display for SubpacketId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W[d{},{}]", self.user, self.packet)
    }
}

/// Which sub-packet indices each user can read, identical across files.
///
/// Built either from the cyclic placement ([`build_cache_layout`]) or from
/// arbitrary per-user sets, as in the multi-access network where a user
/// sees the union of several caches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheLayout {
    n_users: usize,
    known: Vec<Vec<bool>>,
}

impl CacheLayout {
    /// Layout from explicit per-user index sets (`sets[k - 1]` for user `k`).
    ///
    /// # Panics
    /// If `sets.len() != n_users` or an index falls outside `[1, n_users]`.
    pub fn from_sets(n_users: usize, sets: &[BTreeSet<usize>]) -> Self {
        assert_eq!(sets.len(), n_users, "one set per user");
        let known = sets
            .iter()
            .map(|set| {
                let mut row = vec![false; n_users];
                for &p in set {
                    assert!((1..=n_users).contains(&p), "packet {p} out of range");
                    row[p - 1] = true;
                }
                row
            })
            .collect();
        Self { n_users, known }
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    /// Whether `user` holds sub-packet `packet` of every file.
    pub fn contains(&self, user: usize, packet: usize) -> bool {
        self.known[user - 1][packet - 1]
    }

    /// Cached indices of `user`, ascending.
    pub fn cached(&self, user: usize) -> impl Iterator<Item = usize> + '_ {
        self.known[user - 1]
            .iter()
            .enumerate()
            .filter(|(_, &k)| k)
            .map(|(p, _)| p + 1)
    }

    pub fn cached_set(&self, user: usize) -> BTreeSet<usize> {
        self.cached(user).collect()
    }

    pub fn cached_count(&self, user: usize) -> usize {
        self.known[user - 1].iter().filter(|&&k| k).count()
    }

    /// `a` and `b` can share a codeword: each requester already holds the
    /// other's sub-packet.
    pub fn mutually_known(&self, a: SubpacketId, b: SubpacketId) -> bool {
        self.contains(a.user, b.packet) && self.contains(b.user, a.packet)
    }
}

/// Cyclic placement: user `k` caches `{k, k+1, ..., k+i-1}` (wrapped).
pub fn build_cache_layout(params: &SystemParams) -> CacheLayout {
    let k = params.n_users();
    let i = params.cache_units();
    let sets: Vec<BTreeSet<usize>> = (1..=k)
        .map(|user| (0..i).map(|j| wrap((user + j) as i64, k)).collect())
        .collect();
    CacheLayout::from_sets(k, &sets)
}

/// File requested by each user; entry `u - 1` is `d_u`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DemandVector(Vec<usize>);

impl DemandVector {
    pub fn new(demands: Vec<usize>, params: &SystemParams) -> Result<Self, InstanceError> {
        if demands.len() != params.n_users() {
            return Err(InstanceError::DemandLength {
                got: demands.len(),
                k: params.n_users(),
            });
        }
        for (idx, &file) in demands.iter().enumerate() {
            if file == 0 || file > params.n_files() {
                return Err(InstanceError::DemandOutOfRange {
                    user: idx + 1,
                    file,
                    n: params.n_files(),
                });
            }
        }
        Ok(Self(demands))
    }

    /// User `u` asks for file `u` (folded into `[1, N]` when `N < K`).
    pub fn identity(params: &SystemParams) -> Self {
        Self(
            (1..=params.n_users())
                .map(|u| wrap(u as i64, params.n_files()))
                .collect(),
        )
    }

    /// Uniform demands drawn from a seeded ChaCha8 stream.
    pub fn random(params: &SystemParams, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self(
            (0..params.n_users())
                .map(|_| rng.random_range(1..=params.n_files()))
                .collect(),
        )
    }

    /// `d_user`
    pub fn file_of(&self, user: usize) -> usize {
        self.0[user - 1]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Ordered set of demanded sub-packets that also tracks which entries are
/// still undelivered.
///
/// Entries are grouped by user; user `u` contributes
/// `(u, u+i), (u, u+i+1), ..., (u, u+K-1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandList {
    n_users: usize,
    entries: Vec<SubpacketId>,
    live: Vec<bool>,
    remaining: usize,
}

impl DemandList {
    /// Demand list from explicit entries (any order, no duplicates).
    pub fn from_entries(n_users: usize, entries: Vec<SubpacketId>) -> Self {
        let mut live = vec![false; n_users * n_users];
        for s in &entries {
            let slot = (s.user - 1) * n_users + (s.packet - 1);
            assert!(!live[slot], "duplicate demand {s}");
            live[slot] = true;
        }
        let remaining = entries.len();
        Self {
            n_users,
            entries,
            live,
            remaining,
        }
    }

    /// Everything each user does not hold under `layout`, user-major,
    /// each user's run starting just past packet index `user`.
    pub fn complement_of(layout: &CacheLayout) -> Self {
        let k = layout.n_users();
        let entries = (1..=k)
            .flat_map(|u| {
                (0..k)
                    .map(move |j| SubpacketId::new(u, wrap((u + j) as i64, k)))
                    .filter(|s| !layout.contains(s.user, s.packet))
            })
            .collect();
        Self::from_entries(k, entries)
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    /// Whether `s` is demanded and not yet removed.
    pub fn contains(&self, s: SubpacketId) -> bool {
        (1..=self.n_users).contains(&s.user)
            && (1..=self.n_users).contains(&s.packet)
            && self.live[self.slot(s)]
    }

    /// Marks `s` delivered; returns whether it was still live.
    pub fn remove(&mut self, s: SubpacketId) -> bool {
        if !self.contains(s) {
            return false;
        }
        let slot = self.slot(s);
        self.live[slot] = false;
        self.remaining -= 1;
        true
    }

    /// Number of live entries.
    pub fn len(&self) -> usize {
        self.remaining
    }

    pub fn is_empty(&self) -> bool {
        self.remaining == 0
    }

    /// Live entries in list order.
    pub fn iter(&self) -> impl Iterator<Item = SubpacketId> + '_ {
        self.entries.iter().copied().filter(|&s| self.contains(s))
    }

    /// All entries the list was built with, including removed ones.
    pub fn all_entries(&self) -> &[SubpacketId] {
        &self.entries
    }

    fn slot(&self, s: SubpacketId) -> usize {
        (s.user - 1) * self.n_users + (s.packet - 1)
    }
}

/// Ordered demanded sub-packets for demand vector `d`.
///
/// Each user's run starts at `wrap(u + i)` and has exactly `K - i` entries.
pub fn build_demand_list(params: &SystemParams, d: &DemandVector) -> DemandList {
    let k = params.n_users();
    let i = params.cache_units();
    debug_assert_eq!(d.len(), k);
    let entries = (1..=k)
        .flat_map(|u| (i..k).map(move |j| SubpacketId::new(u, wrap((u + j) as i64, k))))
        .collect();
    DemandList::from_entries(k, entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, k: usize, i: usize) -> SystemParams {
        SystemParams::new(n, k, i).unwrap()
    }

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap(7, 6), 1);
        assert_eq!(wrap(6, 6), 6);
        assert_eq!(wrap(0, 6), 6);
        assert_eq!(wrap(-6, 6), 6);
        assert_eq!(wrap(-7, 6), 5);
        assert_eq!(wrap(13, 6), 1);
    }

    #[test]
    fn rejects_bad_params() {
        assert_eq!(SystemParams::new(6, 0, 0), Err(InstanceError::NoUsers));
        assert_eq!(SystemParams::new(0, 6, 0), Err(InstanceError::NoFiles));
        assert_eq!(
            SystemParams::new(6, 6, 7),
            Err(InstanceError::CacheUnitsOutOfRange { i: 7, k: 6 })
        );
        assert!(params(3, 6, 2).require_worst_case().is_err());
        assert!(params(6, 6, 2).require_worst_case().is_ok());
    }

    #[test]
    fn memory_is_i_n_over_k() {
        let p = params(6, 6, 4);
        assert_eq!(p.memory(), Rational::from_integer(4));
        assert_eq!(p.cache_fraction(), Rational::new(2, 3));
    }

    #[test]
    fn example_cache_contents() {
        let layout = build_cache_layout(&params(6, 6, 4));
        assert_eq!(layout.cached_set(1), BTreeSet::from([1, 2, 3, 4]));
        assert_eq!(layout.cached_set(2), BTreeSet::from([2, 3, 4, 5]));
        assert_eq!(layout.cached_set(4), BTreeSet::from([4, 5, 6, 1]));
        assert_eq!(layout.cached_set(6), BTreeSet::from([6, 1, 2, 3]));
    }

    #[test]
    fn full_and_empty_caches() {
        let full = build_cache_layout(&params(5, 5, 5));
        for u in 1..=5 {
            assert_eq!(full.cached_set(u), (1..=5).collect());
        }
        let empty = build_cache_layout(&params(5, 5, 0));
        assert!((1..=5).all(|u| empty.cached_count(u) == 0));
    }

    #[test]
    fn example_demanded_slices() {
        let p = params(6, 6, 4);
        let list = build_demand_list(&p, &DemandVector::identity(&p));
        let by_user = |u: usize| -> Vec<(usize, usize)> {
            list.iter()
                .filter(|s| s.user == u)
                .map(|s| (s.user, s.packet))
                .collect()
        };
        assert_eq!(by_user(1), vec![(1, 5), (1, 6)]);
        assert_eq!(by_user(2), vec![(2, 6), (2, 1)]);
        assert_eq!(by_user(3), vec![(3, 1), (3, 2)]);
        assert_eq!(by_user(6), vec![(6, 4), (6, 5)]);
        assert_eq!(list.len(), 12);
    }

    #[test]
    fn full_cache_demands_nothing() {
        let p = params(5, 5, 5);
        assert!(build_demand_list(&p, &DemandVector::identity(&p)).is_empty());
    }

    #[test]
    fn demand_list_matches_layout_complement() {
        let p = params(7, 7, 3);
        let from_params = build_demand_list(&p, &DemandVector::identity(&p));
        let from_layout = DemandList::complement_of(&build_cache_layout(&p));
        assert_eq!(from_params.all_entries(), from_layout.all_entries());
    }

    #[test]
    fn removal_tracks_remaining() {
        let p = params(6, 6, 4);
        let mut list = build_demand_list(&p, &DemandVector::identity(&p));
        assert!(list.remove(SubpacketId::new(1, 5)));
        assert!(!list.remove(SubpacketId::new(1, 5)));
        assert!(!list.remove(SubpacketId::new(1, 1)));
        assert_eq!(list.len(), 11);
        assert!(!list.contains(SubpacketId::new(1, 5)));
        assert!(!list.contains(SubpacketId::new(0, 5)));
    }

    #[test]
    fn demand_vector_validation() {
        let p = params(4, 3, 1);
        assert!(DemandVector::new(vec![1, 4, 4], &p).is_ok());
        assert_eq!(
            DemandVector::new(vec![1, 2], &p),
            Err(InstanceError::DemandLength { got: 2, k: 3 })
        );
        assert_eq!(
            DemandVector::new(vec![1, 5, 2], &p),
            Err(InstanceError::DemandOutOfRange {
                user: 2,
                file: 5,
                n: 4
            })
        );
    }

    #[test]
    fn random_demands_are_seeded() {
        let p = params(10, 8, 3);
        let a = DemandVector::random(&p, 42);
        assert_eq!(a, DemandVector::random(&p, 42));
        assert!(a.as_slice().iter().all(|&f| (1..=10).contains(&f)));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn instance() -> impl Strategy<Value = SystemParams> {
            (1usize..=64).prop_flat_map(|k| (0..=k).prop_map(move |i| params(k, k, i)))
        }

        proptest! {
            #[test]
            fn demands_complement_cache(p in instance()) {
                let k = p.n_users();
                let layout = build_cache_layout(&p);
                let list = build_demand_list(&p, &DemandVector::identity(&p));
                prop_assert_eq!(list.len(), k * (k - p.cache_units()));
                for u in 1..=k {
                    prop_assert_eq!(layout.cached_count(u), p.cache_units());
                    let demanded: BTreeSet<usize> =
                        list.iter().filter(|s| s.user == u).map(|s| s.packet).collect();
                    let all: BTreeSet<usize> = (1..=k).collect();
                    let expected: BTreeSet<usize> =
                        all.difference(&layout.cached_set(u)).copied().collect();
                    prop_assert_eq!(demanded, expected);
                }
            }

            #[test]
            fn layout_is_shift_invariant(p in instance()) {
                let k = p.n_users();
                let layout = build_cache_layout(&p);
                let first = layout.cached_set(1);
                for u in 2..=k {
                    let shifted: BTreeSet<usize> =
                        first.iter().map(|&x| wrap((x + u - 1) as i64, k)).collect();
                    prop_assert_eq!(layout.cached_set(u), shifted);
                }
            }

            #[test]
            fn caches_cover_every_index(p in instance()) {
                prop_assume!(p.cache_units() >= 1);
                let layout = build_cache_layout(&p);
                let union: BTreeSet<usize> =
                    (1..=p.n_users()).flat_map(|u| layout.cached(u)).collect();
                prop_assert_eq!(union.len(), p.n_users());
            }

            #[test]
            fn wrap_lands_in_range(x in -1000i64..1000, k in 1usize..100) {
                let w = wrap(x, k);
                prop_assert!((1..=k).contains(&w));
                prop_assert_eq!((w as i64 - x).rem_euclid(k as i64), 0);
            }
        }
    }
}
