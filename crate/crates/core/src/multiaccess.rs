//! Multi-access networks: `K` users, `K` caches, user `k` reads caches
//! `k, k+1, ..., k+L-1` (cyclically).
//!
//! At the supported memory points every user sees a consecutive run of
//! sub-packet indices, so the dedicated-cache delivery applies unchanged
//! with `i_eff = min(iL, K)` cached units.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::delivery::{plan_delivery, rate_for, DeliveryError, TransmissionSchedule};
use crate::model::{wrap, CacheLayout, DemandVector, InstanceError, SystemParams};
use crate::rational::{binomial, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MultiaccessError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Delivery(#[from] DeliveryError),
    #[error("access degree L = {l} outside [1, {k}]")]
    AccessDegree { k: usize, l: usize },
    #[error("cache units i = {i} outside [0, ceil(K/L)] = [0, {max}]")]
    CacheUnits { i: usize, max: usize },
    #[error("unsupported memory point i = {i} for K = {k}, L = {l}: F(i, L) = {subfiles}, not K")]
    UnsupportedMemoryPoint {
        k: usize,
        l: usize,
        i: usize,
        subfiles: String,
    },
    #[error("bound needs L >= K/2, got K = {k}, L = {l}")]
    Regime { k: usize, l: usize },
    #[error("F(i, L) = {numerator}/{i} is not an integer (K = {k}, L = {l})")]
    NonIntegerSubfiles {
        k: usize,
        l: usize,
        i: usize,
        numerator: u64,
    },
    #[error("memory must be non-negative")]
    NegativeMemory,
    #[error("optimality table needs K >= 4, got {0}")]
    TooFewUsers(usize),
    #[error("curve breakpoints must have increasing memory and non-increasing rate")]
    BadCurve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CcdnParams {
    n_files: usize,
    n_users: usize,
    access_degree: usize,
    cache_units: usize,
}

impl CcdnParams {
    pub fn new(
        n_files: usize,
        n_users: usize,
        access_degree: usize,
        cache_units: usize,
    ) -> Result<Self, MultiaccessError> {
        if n_files == 0 {
            return Err(InstanceError::NoFiles.into());
        }
        if n_users == 0 {
            return Err(InstanceError::NoUsers.into());
        }
        if access_degree == 0 || access_degree > n_users {
            return Err(MultiaccessError::AccessDegree {
                k: n_users,
                l: access_degree,
            });
        }
        let max = n_users.div_ceil(access_degree);
        if cache_units > max {
            return Err(MultiaccessError::CacheUnits {
                i: cache_units,
                max,
            });
        }
        Ok(Self {
            n_files,
            n_users,
            access_degree,
            cache_units,
        })
    }

    pub fn n_files(&self) -> usize {
        self.n_files
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn access_degree(&self) -> usize {
        self.access_degree
    }

    pub fn cache_units(&self) -> usize {
        self.cache_units
    }

    /// Per-cache memory `iN/K`.
    pub fn memory(&self) -> Rational {
        Rational::new(
            (self.cache_units * self.n_files) as i64,
            self.n_users as i64,
        )
    }

    /// Length of the run of indices each user can read, capped at `K`.
    pub fn effective_units(&self) -> usize {
        (self.cache_units * self.access_degree).min(self.n_users)
    }

    /// `0`, `1`, `floor(K/L)` and `ceil(K/L)` cache units.
    pub fn is_supported(&self) -> bool {
        let (k, l, i) = (self.n_users, self.access_degree, self.cache_units);
        i <= 1 || i == k / l || i == k.div_ceil(l)
    }

    fn require_supported(&self) -> Result<(), MultiaccessError> {
        if self.is_supported() {
            return Ok(());
        }
        let subfiles = match f_subfiles(self.n_users, self.cache_units, self.access_degree) {
            Ok(f) => f.to_string(),
            Err(_) => "non-integer".into(),
        };
        Err(MultiaccessError::UnsupportedMemoryPoint {
            k: self.n_users,
            l: self.access_degree,
            i: self.cache_units,
            subfiles,
        })
    }

    /// Dedicated-cache instance with the same index coding problem.
    pub fn equivalent_dedicated(&self) -> Result<SystemParams, MultiaccessError> {
        self.require_supported()?;
        Ok(SystemParams::new(
            self.n_files,
            self.n_users,
            self.effective_units(),
        )?)
    }
}

impl fmt::Display for CcdnParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "N={} K={} L={} i={}",
            self.n_files, self.n_users, self.access_degree, self.cache_units
        )
    }
}

/// Sub-packets stored in each cache; cache `j` holds `j, j+L, ..., j+(i-1)L`.
pub fn cache_contents(params: &CcdnParams) -> Vec<BTreeSet<usize>> {
    let k = params.n_users;
    let l = params.access_degree as i64;
    (1..=k as i64)
        .map(|j| {
            (0..params.cache_units as i64)
                .map(|b| wrap(j + b * l, k))
                .collect()
        })
        .collect()
}

/// What each user can read: the union of its `L` caches.
pub fn ccdn_user_view(params: &CcdnParams) -> Result<CacheLayout, MultiaccessError> {
    params.require_supported()?;
    let k = params.n_users;
    let caches = cache_contents(params);
    let views: Vec<BTreeSet<usize>> = (1..=k as i64)
        .map(|user| {
            (0..params.access_degree as i64)
                .flat_map(|c| caches[wrap(user + c, k) - 1].iter().copied())
                .collect()
        })
        .collect();
    Ok(CacheLayout::from_sets(k, &views))
}

/// Subfiles per file in the general multi-access placement,
/// `binomial(K - iL + i - 1, i - 1) * K / i`.
///
/// The binomial is zero when its top is negative or below its bottom.
pub fn f_subfiles(k: usize, i: usize, l: usize) -> Result<u64, MultiaccessError> {
    let max = if l == 0 { 0 } else { k.div_ceil(l) };
    if i == 0 || i > max {
        return Err(MultiaccessError::CacheUnits { i, max });
    }
    let top = k as i64 - (i * l) as i64 + i as i64 - 1;
    let bottom = (i - 1) as i64;
    let choose = if top < bottom || top < 0 {
        0
    } else {
        binomial(top as u64, bottom as u64).expect("binomial fits for K <= 64")
    };
    let numerator = choose * k as u64;
    if !numerator.is_multiple_of(i as u64) {
        return Err(MultiaccessError::NonIntegerSubfiles { k, l, i, numerator });
    }
    Ok(numerator / i as u64)
}

/// Rate of the dedicated-cache scheme run on the multi-access view.
pub fn ccdn_rate_at_supported_points(params: &CcdnParams) -> Result<Rational, MultiaccessError> {
    params.require_supported()?;
    Ok(rate_for(params.n_users, params.effective_units()))
}

/// Delivery schedule for the multi-access instance; decode against
/// [`ccdn_user_view`].
pub fn ccdn_schedule(
    params: &CcdnParams,
    d: &DemandVector,
) -> Result<TransmissionSchedule, MultiaccessError> {
    let dedicated = params.equivalent_dedicated()?;
    Ok(plan_delivery(&dedicated, d)?)
}

/// Piecewise-linear rate against memory through a list of breakpoints,
/// flat after the last one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateBoundCurve {
    breakpoints: Vec<(Rational, Rational)>,
}

impl RateBoundCurve {
    pub fn new(breakpoints: Vec<(Rational, Rational)>) -> Result<Self, MultiaccessError> {
        let ok = !breakpoints.is_empty()
            && breakpoints[0].0 == Rational::from_integer(0)
            && breakpoints
                .windows(2)
                .all(|w| w[0].0 < w[1].0 && w[0].1 >= w[1].1);
        if !ok {
            return Err(MultiaccessError::BadCurve);
        }
        Ok(Self { breakpoints })
    }

    pub fn breakpoints(&self) -> &[(Rational, Rational)] {
        &self.breakpoints
    }

    pub fn evaluate(&self, m: Rational) -> Result<Rational, MultiaccessError> {
        if m < Rational::from_integer(0) {
            return Err(MultiaccessError::NegativeMemory);
        }
        for w in self.breakpoints.windows(2) {
            let ((m0, r0), (m1, r1)) = (w[0], w[1]);
            if m <= m1 {
                return Ok(r0 + (r1 - r0) * (m - m0) / (m1 - m0));
            }
        }
        Ok(self.breakpoints.last().expect("non-empty").1)
    }

    /// `points` evenly spaced memories on `[0, span]`, merged with the
    /// breakpoints, in increasing order.
    pub fn sample(
        &self,
        span: Rational,
        points: usize,
    ) -> Result<Vec<(Rational, Rational)>, MultiaccessError> {
        let mut ms: BTreeSet<Rational> = self.breakpoints.iter().map(|&(m, _)| m).collect();
        if points >= 2 {
            for j in 0..points {
                ms.insert(span * Rational::new(j as i64, (points - 1) as i64));
            }
        } else if points == 1 {
            ms.insert(Rational::from_integer(0));
        }
        ms.into_iter()
            .map(|m| self.evaluate(m).map(|r| (m, r)))
            .collect()
    }
}

/// Upper bound for `L >= K/2` through `(0, K)`, `(N/K, R1)`, `(2N/K, 0)`
/// with `R1 = rate(K, L)`.
pub fn ccdn_bound_curve(params: &CcdnParams) -> Result<RateBoundCurve, MultiaccessError> {
    let (n, k, l) = (params.n_files, params.n_users, params.access_degree);
    if 2 * l < k {
        return Err(MultiaccessError::Regime { k, l });
    }
    let unit = Rational::new(n as i64, k as i64);
    let r1 = rate_for(k, l);
    let mut points = vec![(Rational::from_integer(0), Rational::from_integer(k as i64))];
    points.push((unit, r1));
    points.push((unit * 2, Rational::from_integer(0)));
    RateBoundCurve::new(points)
}

/// The bound evaluated directly, piece by piece.
pub fn ccdn_upper_bound(m: Rational, params: &CcdnParams) -> Result<Rational, MultiaccessError> {
    let (n, k, l) = (params.n_files, params.n_users, params.access_degree);
    if 2 * l < k {
        return Err(MultiaccessError::Regime { k, l });
    }
    if m < Rational::from_integer(0) {
        return Err(MultiaccessError::NegativeMemory);
    }
    let unit = Rational::new(n as i64, k as i64);
    let kk = Rational::from_integer(k as i64);
    let r1 = rate_for(k, l);
    Ok(if m <= unit {
        kk - (kk - r1) * m / unit
    } else if m <= unit * 2 {
        r1 * (unit * 2 - m) / unit
    } else {
        Rational::from_integer(0)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum RowFamily {
    KMinus1,
    KMinus2,
    KMinus3,
    /// `L = K - K/s + 1`.
    Divisor {
        s: usize,
    },
}

impl fmt::Display for RowFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::KMinus1 => f.write_str("K-1"),
            Self::KMinus2 => f.write_str("K-2"),
            Self::KMinus3 => f.write_str("K-3"),
            Self::Divisor { s } => write!(f, "K-K/{s}+1"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimalityRow {
    pub family: RowFamily,
    pub l: usize,
    /// Known optimal rate at `M = N/K`.
    pub r_optimal: Rational,
    /// `rate(K, L)` computed from the scheme constants.
    pub r_new: Rational,
    /// The closed-form value listed for the scheme.
    pub r_listed: Rational,
    /// `r_new == r_optimal`.
    pub optimal: bool,
    /// `r_new == r_listed`.
    pub reproduces: bool,
}

fn listed_rate(k: usize, family: RowFamily) -> Rational {
    let over_k = |num: usize| Rational::new(num as i64, k as i64);
    match family {
        RowFamily::KMinus1 => over_k(1),
        RowFamily::KMinus2 if k.is_multiple_of(3) && k >= 6 => over_k(3),
        RowFamily::KMinus2 => over_k(4),
        RowFamily::KMinus3 => match k {
            6 => over_k(9),
            5 | 10 => over_k(8),
            _ if k.is_multiple_of(4) => over_k(6),
            _ => over_k(7),
        },
        RowFamily::Divisor { s } => Rational::new((k - s) as i64, (2 * s * s) as i64),
    }
}

fn optimal_rate(k: usize, family: RowFamily) -> Rational {
    let over_k = |num: usize| Rational::new(num as i64, k as i64);
    match family {
        RowFamily::KMinus1 => over_k(1),
        RowFamily::KMinus2 => over_k(3),
        RowFamily::KMinus3 => over_k(6),
        RowFamily::Divisor { s } => Rational::new((k - s) as i64, (2 * s * s) as i64),
    }
}

/// Optimal against achieved rate at `M = N/K` for `L = K-1, K-2, K-3` and
/// `L = K - K/s + 1` for every divisor `s` of `K`.
pub fn optimality_table(k: usize) -> Result<Vec<OptimalityRow>, MultiaccessError> {
    if k < 4 {
        return Err(MultiaccessError::TooFewUsers(k));
    }
    let mut rows: Vec<(RowFamily, usize)> = vec![
        (RowFamily::KMinus1, k - 1),
        (RowFamily::KMinus2, k - 2),
        (RowFamily::KMinus3, k - 3),
    ];
    rows.extend(
        (1..=k)
            .filter(|s| k.is_multiple_of(*s))
            .map(|s| (RowFamily::Divisor { s }, k - k / s + 1)),
    );
    Ok(rows
        .into_iter()
        .map(|(family, l)| {
            let r_new = rate_for(k, l);
            let r_optimal = optimal_rate(k, family);
            let r_listed = listed_rate(k, family);
            OptimalityRow {
                family,
                l,
                r_optimal,
                r_new,
                r_listed,
                optimal: r_new == r_optimal,
                reproduces: r_new == r_listed,
            }
        })
        .collect())
}
