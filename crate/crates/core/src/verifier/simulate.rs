//! Bit-exact delivery simulation over real byte contents.

use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::delivery::{plan_delivery, Codeword, DeliveryError};
use crate::model::{build_cache_layout, CacheLayout, DemandVector, InstanceError, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MismatchReason {
    /// No codeword let the user recover this sub-packet.
    Undecoded,
    /// Recovered bytes differ from the original slice.
    WrongBytes,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimulationError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Delivery(#[from] DeliveryError),
    #[error("malformed file store: {0}")]
    MalformedStore(String),
    #[error("user {user}, packet {packet} of file {file}: {reason:?}")]
    Mismatch {
        user: usize,
        file: usize,
        packet: usize,
        reason: MismatchReason,
    },
}

/// `N` files of equal length, each cut into `K` equal slices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileStore {
    files: Vec<Vec<u8>>,
    n_slices: usize,
}

impl FileStore {
    pub fn new(files: Vec<Vec<u8>>, n_slices: usize) -> Result<Self, SimulationError> {
        if files.is_empty() || n_slices == 0 {
            return Err(SimulationError::MalformedStore(
                "need at least one file and one slice".into(),
            ));
        }
        let len = files[0].len();
        if files.iter().any(|f| f.len() != len) {
            return Err(SimulationError::MalformedStore(
                "files differ in length".into(),
            ));
        }
        if !len.is_multiple_of(n_slices) {
            return Err(SimulationError::MalformedStore(format!(
                "file length {len} not divisible by {n_slices}"
            )));
        }
        Ok(Self { files, n_slices })
    }

    /// Seeded random contents, `slice_bytes` bytes per sub-packet.
    pub fn random(n_files: usize, n_slices: usize, slice_bytes: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let files = (0..n_files)
            .map(|_| {
                let mut f = vec![0u8; n_slices * slice_bytes];
                rng.fill_bytes(&mut f);
                f
            })
            .collect();
        Self { files, n_slices }
    }

    pub fn n_files(&self) -> usize {
        self.files.len()
    }

    pub fn slice_len(&self) -> usize {
        self.files[0].len() / self.n_slices
    }

    /// Sub-packet `packet` of file `file`, both 1-based.
    pub fn slice(&self, file: usize, packet: usize) -> &[u8] {
        let len = self.slice_len();
        &self.files[file - 1][(packet - 1) * len..packet * len]
    }

    pub fn file(&self, file: usize) -> &[u8] {
        &self.files[file - 1]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub seed: u64,
    pub transmissions: usize,
    pub bytes_sent: usize,
    /// Users whose reassembled file matched bit for bit.
    pub users_ok: usize,
    /// Extra decoding passes beyond the first. Non-zero means some codeword
    /// was only decodable with help from previously decoded sub-packets.
    pub peeling_passes: usize,
}

fn xor_into(acc: &mut [u8], bytes: &[u8]) {
    for (a, b) in acc.iter_mut().zip(bytes) {
        *a ^= b;
    }
}

/// Runs the full placement + delivery pipeline on `store` and checks that
/// every user rebuilds exactly the file it asked for.
pub fn simulate_end_to_end(
    params: &SystemParams,
    d: &DemandVector,
    store: &FileStore,
    seed: u64,
) -> Result<SimulationReport, SimulationError> {
    if store.n_files() < params.n_files() || store.n_slices != params.n_users() {
        return Err(SimulationError::MalformedStore(format!(
            "store has {} files in {} slices, instance needs {} in {}",
            store.n_files(),
            store.n_slices,
            params.n_files(),
            params.n_users()
        )));
    }
    let schedule = plan_delivery(params, d)?;
    let layout = build_cache_layout(params);
    let mut report = simulate_schedule(schedule.codewords(), &layout, d, store)?;
    report.seed = seed;
    Ok(report)
}

/// Broadcasts `codewords` built from `store` and decodes at each user of
/// `layout`, where a user holds every file's sub-packets listed in its row.
pub fn simulate_schedule(
    codewords: &[Codeword],
    layout: &CacheLayout,
    d: &DemandVector,
    store: &FileStore,
) -> Result<SimulationReport, SimulationError> {
    let k = layout.n_users();
    if store.n_slices != k || d.len() != k {
        return Err(SimulationError::MalformedStore(format!(
            "store slices {} / demand length {} do not match K = {k}",
            store.n_slices,
            d.len()
        )));
    }
    if let Some(&bad) = d
        .as_slice()
        .iter()
        .find(|&&f| f == 0 || f > store.n_files())
    {
        return Err(SimulationError::MalformedStore(format!(
            "demanded file {bad} not in store"
        )));
    }
    let slice_len = store.slice_len();

    // server side
    let payloads: Vec<Vec<u8>> = codewords
        .iter()
        .map(|cw| {
            let mut acc = vec![0u8; slice_len];
            for t in cw.terms() {
                xor_into(&mut acc, store.slice(d.file_of(t.user), t.packet));
            }
            acc
        })
        .collect();

    let mut users_ok = 0;
    let mut peeling_passes = 0;
    for user in 1..=k {
        let own_file = d.file_of(user);
        // placement: user copies its sub-packets of every file
        let cache: BTreeMap<(usize, usize), Vec<u8>> = (1..=store.n_files())
            .flat_map(|n| layout.cached(user).map(move |p| (n, p)))
            .map(|(n, p)| ((n, p), store.slice(n, p).to_vec()))
            .collect();
        let mut decoded: BTreeMap<usize, Vec<u8>> = BTreeMap::new();

        let mut pass = 0;
        loop {
            let mut progress = false;
            for (cw, payload) in codewords.iter().zip(&payloads) {
                let mut acc = payload.clone();
                let mut unknown = Vec::new();
                for t in cw.terms() {
                    let file = d.file_of(t.user);
                    if let Some(bytes) = cache.get(&(file, t.packet)) {
                        xor_into(&mut acc, bytes);
                    } else if pass > 0 && file == own_file && decoded.contains_key(&t.packet) {
                        xor_into(&mut acc, &decoded[&t.packet]);
                    } else {
                        unknown.push(*t);
                    }
                }
                if let [only] = unknown.as_slice() {
                    if only.user == user && !decoded.contains_key(&only.packet) {
                        decoded.insert(only.packet, acc);
                        progress = true;
                    }
                }
            }
            let complete = (1..=k).all(|p| layout.contains(user, p) || decoded.contains_key(&p));
            if complete || !progress {
                break;
            }
            pass += 1;
        }
        peeling_passes = peeling_passes.max(pass);

        for packet in 1..=k {
            let got = if layout.contains(user, packet) {
                cache.get(&(own_file, packet))
            } else {
                decoded.get(&packet)
            };
            match got {
                None => {
                    return Err(SimulationError::Mismatch {
                        user,
                        file: own_file,
                        packet,
                        reason: MismatchReason::Undecoded,
                    })
                }
                Some(bytes) if bytes.as_slice() != store.slice(own_file, packet) => {
                    return Err(SimulationError::Mismatch {
                        user,
                        file: own_file,
                        packet,
                        reason: MismatchReason::WrongBytes,
                    })
                }
                Some(_) => {}
            }
        }
        users_ok += 1;
    }

    Ok(SimulationReport {
        seed: 0,
        transmissions: codewords.len(),
        bytes_sent: codewords.len() * slice_len,
        users_ok,
        peeling_passes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SubpacketId;

    fn p(k: usize, i: usize) -> SystemParams {
        SystemParams::new(k, k, i).unwrap()
    }

    #[test]
    fn store_validation() {
        assert!(FileStore::new(vec![vec![0; 6], vec![0; 6]], 6).is_ok());
        assert!(FileStore::new(vec![vec![0; 6], vec![0; 5]], 6).is_err());
        assert!(FileStore::new(vec![vec![0; 7]], 6).is_err());
        assert!(FileStore::new(vec![], 6).is_err());
        let s = FileStore::new(vec![(0u8..12).collect()], 6).unwrap();
        assert_eq!(s.slice(1, 3), &[4, 5]);
    }

    #[test]
    fn example_round_trip() {
        let params = p(6, 4);
        let store = FileStore::random(6, 6, 1, 7);
        let report =
            simulate_end_to_end(&params, &DemandVector::identity(&params), &store, 7).unwrap();
        assert_eq!(report.users_ok, 6);
        assert_eq!(report.transmissions, 3);
        assert_eq!(report.peeling_passes, 0);
        assert_eq!(report.seed, 7);
    }

    #[test]
    fn full_cache_needs_no_transmissions() {
        let params = p(5, 5);
        let store = FileStore::random(5, 5, 3, 1);
        let report =
            simulate_end_to_end(&params, &DemandVector::identity(&params), &store, 1).unwrap();
        assert_eq!(report.transmissions, 0);
        assert_eq!(report.users_ok, 5);
    }

    #[test]
    fn everyone_wants_the_same_file() {
        let params = p(6, 4);
        let d = DemandVector::new(vec![1; 6], &params).unwrap();
        let store = FileStore::random(6, 6, 4, 99);
        assert!(simulate_end_to_end(&params, &d, &store, 99).is_ok());
    }

    #[test]
    fn larger_slices_and_no_cache() {
        let params = p(4, 0);
        let store = FileStore::random(4, 4, 16, 3);
        let d = DemandVector::new(vec![2, 2, 4, 1], &params).unwrap();
        assert!(simulate_end_to_end(&params, &d, &store, 3).is_ok());
    }

    #[test]
    fn undecodable_codeword_is_caught() {
        let params = p(6, 4);
        let layout = build_cache_layout(&params);
        let d = DemandVector::identity(&params);
        let store = FileStore::random(6, 6, 2, 5);
        let bad = vec![Codeword::new(vec![
            SubpacketId::new(1, 5),
            SubpacketId::new(3, 6),
        ])];
        let err = simulate_schedule(&bad, &layout, &d, &store).unwrap_err();
        assert!(matches!(
            err,
            SimulationError::Mismatch {
                user: 1,
                reason: MismatchReason::Undecoded,
                ..
            }
        ));
    }

    #[test]
    fn store_shape_checked() {
        let params = p(6, 4);
        let store = FileStore::random(6, 3, 2, 5);
        assert!(matches!(
            simulate_end_to_end(&params, &DemandVector::identity(&params), &store, 0),
            Err(SimulationError::MalformedStore(_))
        ));
    }
}
