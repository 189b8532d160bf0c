use serde::{Deserialize, Serialize};

use super::DeliveryError;
use crate::model::SystemParams;
use crate::rational::{binomial, div_ceil, Rational};

/// Constants that shape the delivery phase for a given `(K, i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SchemeConstants {
    /// `K - i + 1`
    pub gamma: usize,
    /// Maximum number of sub-packets XORed into one codeword.
    pub t: usize,
    /// Number of transmissions, `ceil(K(K-i)/t)`.
    pub lambda: usize,
}

impl SchemeConstants {
    fn from_ki(k: usize, i: usize) -> Self {
        let gamma = k - i + 1;
        let t = 2 + i / gamma + (i - 1) / gamma;
        let lambda = div_ceil((k * (k - i)) as u64, t as u64) as usize;
        Self { gamma, t, lambda }
    }
}

/// `Γ`, `t` and `Λ` for `1 <= i <= K-1`.
pub fn scheme_constants(params: &SystemParams) -> Result<SchemeConstants, DeliveryError> {
    let k = params.n_users();
    let i = params.cache_units();
    if i == 0 || i >= k {
        return Err(DeliveryError::Regime {
            k,
            i,
            expected: "1 <= i <= K-1",
        });
    }
    Ok(SchemeConstants::from_ki(k, i))
}

/// Achievable rate `ceil(K(K-i)/t) / K`, in files.
///
/// Extended with `rate = K` at `i = 0` (uncoded delivery of every file) and
/// `rate = 0` at `i = K`.
pub fn rate(params: &SystemParams) -> Rational {
    rate_for(params.n_users(), params.cache_units())
}

/// [`rate`] without building a [`SystemParams`].
pub fn rate_for(k: usize, i: usize) -> Rational {
    assert!(k >= 1 && i <= k, "rate needs 0 <= i <= K");
    if i == 0 {
        return Rational::from_integer(k as i64);
    }
    if i == k {
        return Rational::from_integer(0);
    }
    let c = SchemeConstants::from_ki(k, i);
    Rational::new(c.lambda as i64, k as i64)
}

/// Sub-packets per file under the cyclic placement.
pub fn subpacketization(params: &SystemParams) -> u64 {
    params.n_users() as u64
}

/// Rate of the uncoded-placement baseline with `binomial(K, i)` sub-packets,
/// `(K - i) / (1 + i)`.
pub fn mn_rate(params: &SystemParams) -> Rational {
    let k = params.n_users() as i64;
    let i = params.cache_units() as i64;
    Rational::new(k - i, 1 + i)
}

/// `binomial(K, i)`; `None` if it overflows `u64`.
pub fn mn_subpacketization(params: &SystemParams) -> Option<u64> {
    binomial(params.n_users() as u64, params.cache_units() as u64)
}
