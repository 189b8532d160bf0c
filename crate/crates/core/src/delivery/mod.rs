//! Delivery phase: codeword generation and rate formulas.

mod algorithm;
mod closed_form;
mod formulas;
mod sweep;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use algorithm::{
    check, initial_codeword_terms, rule, run_generator, tail_subroutine, update, GeneratorEvent,
    GeneratorRun, ReplacementFlag,
};
pub use closed_form::closed_form_pairs;
pub use formulas::{
    mn_rate, mn_subpacketization, rate, rate_for, scheme_constants, subpacketization,
    SchemeConstants,
};
pub use sweep::{sweep_packing, SweepResult, DEFAULT_ATTEMPTS};

use crate::model::{
    build_cache_layout, build_demand_list, CacheLayout, DemandList, DemandVector, InstanceError,
    SubpacketId, SystemParams,
};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeliveryError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("K = {k}, i = {i} outside the supported regime {expected}")]
    Regime {
        k: usize,
        i: usize,
        expected: &'static str,
    },
    #[error("replacement flag {0} is not in 1..=4")]
    InvalidFlag(u8),
    #[error("no replacement rule yields a live, decodable term for {term}")]
    ReplacementExhausted { term: SubpacketId },
    #[error("user 1 has no remaining demand to seed the tail codeword")]
    NoSeedTerm,
    #[error("{construction} schedule failed its post-condition: {detail}")]
    PostCondition {
        construction: Construction,
        detail: String,
    },
}

/// One broadcast: the XOR of its terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Codeword {
    terms: Vec<SubpacketId>,
}

impl Codeword {
    /// # Panics
    /// If `terms` is empty or contains a repeated term.
    pub fn new(terms: Vec<SubpacketId>) -> Self {
        assert!(!terms.is_empty(), "a codeword needs at least one term");
        for (idx, s) in terms.iter().enumerate() {
            assert!(!terms[..idx].contains(s), "repeated term {s}");
        }
        Self { terms }
    }

    pub fn terms(&self) -> &[SubpacketId] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, s) in self.terms.iter().enumerate() {
            if idx > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// How a schedule was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Construction {
    /// Shift-and-replace generator output, accepted as-is.
    ShiftReplace,
    /// Sweep packing, after the generator missed its post-condition.
    SweepPacking {
        attempt: usize,
    },
    ClosedFormPairs,
    /// `i = 0`: every sub-packet sent on its own.
    Uncoded,
    /// `i = K`: nothing to send.
    NoDelivery,
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ShiftReplace => f.write_str("shift-replace"),
            Self::SweepPacking { attempt } => write!(f, "sweep-packing (attempt {attempt})"),
            Self::ClosedFormPairs => f.write_str("closed-form-pairs"),
            Self::Uncoded => f.write_str("uncoded"),
            Self::NoDelivery => f.write_str("no-delivery"),
        }
    }
}

/// Ordered codewords for one instance and demand vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransmissionSchedule {
    params: SystemParams,
    demand: DemandVector,
    constants: Option<SchemeConstants>,
    codewords: Vec<Codeword>,
    rate: Rational,
    construction: Construction,
    diagnostics: Vec<String>,
}

impl TransmissionSchedule {
    pub(crate) fn new(
        params: SystemParams,
        demand: DemandVector,
        constants: Option<SchemeConstants>,
        codewords: Vec<Codeword>,
        construction: Construction,
        diagnostics: Vec<String>,
    ) -> Self {
        let rate = Rational::new(codewords.len() as i64, params.n_users() as i64);
        Self {
            params,
            demand,
            constants,
            codewords,
            rate,
            construction,
            diagnostics,
        }
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn demand(&self) -> &DemandVector {
        &self.demand
    }

    /// `None` for the trivial points `i = 0` and `i = K`.
    pub fn constants(&self) -> Option<&SchemeConstants> {
        self.constants.as_ref()
    }

    pub fn codewords(&self) -> &[Codeword] {
        &self.codewords
    }

    /// Transmitted volume in files: each codeword is `1/K` of a file.
    pub fn rate(&self) -> Rational {
        self.rate
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    /// Notes collected while building the schedule.
    pub fn diagnostics(&self) -> &[String] {
        &self.diagnostics
    }

    pub fn total_terms(&self) -> usize {
        self.codewords.iter().map(Codeword::len).sum()
    }
}

/// Which constructor [`generate_schedule_with`] may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Shift-and-replace first; sweep packing if that misses its
    /// post-condition.
    #[default]
    Auto,
    /// Shift-and-replace only; post-condition failures are errors.
    ShiftReplace,
    /// Sweep packing only.
    Sweep,
}

/// Why a candidate schedule was rejected.
fn post_condition(
    codewords: &[Vec<SubpacketId>],
    layout: &CacheLayout,
    demands: &DemandList,
    constants: &SchemeConstants,
) -> Result<(), String> {
    if codewords.len() != constants.lambda {
        return Err(format!(
            "{} codewords, expected {}",
            codewords.len(),
            constants.lambda
        ));
    }
    let k = layout.n_users();
    let mut delivered = vec![false; k * k];
    for (idx, cw) in codewords.iter().enumerate() {
        if cw.is_empty() || cw.len() > constants.t {
            return Err(format!("codeword {idx} has {} terms", cw.len()));
        }
        for (a, &s) in cw.iter().enumerate() {
            if !demands.contains(s) {
                return Err(format!("codeword {idx} carries undemanded {s}"));
            }
            let slot = (s.user - 1) * k + (s.packet - 1);
            if delivered[slot] {
                return Err(format!("codeword {idx} repeats {s}"));
            }
            delivered[slot] = true;
            if let Some(&other) = cw[..a].iter().find(|&&o| !layout.mutually_known(o, s)) {
                return Err(format!(
                    "codeword {idx}: {s} and {other} not mutually known"
                ));
            }
        }
    }
    if let Some(missed) = demands
        .iter()
        .find(|s| !delivered[(s.user - 1) * k + (s.packet - 1)])
    {
        return Err(format!("{missed} never delivered"));
    }
    Ok(())
}

fn into_codewords(raw: Vec<Vec<SubpacketId>>) -> Vec<Codeword> {
    raw.into_iter().map(Codeword::new).collect()
}

/// Delivery schedule for `1 <= i <= K-1` and `N >= K`.
///
/// The result always has exactly `Λ` codewords of at most `t` terms each,
/// every demanded sub-packet appears once, and every codeword is decodable
/// by each of its requesters from cache alone.
pub fn generate_schedule(
    params: &SystemParams,
    d: &DemandVector,
) -> Result<TransmissionSchedule, DeliveryError> {
    generate_schedule_with(params, d, Strategy::Auto)
}

pub fn generate_schedule_with(
    params: &SystemParams,
    d: &DemandVector,
    strategy: Strategy,
) -> Result<TransmissionSchedule, DeliveryError> {
    params.require_worst_case()?;
    let d = DemandVector::new(d.as_slice().to_vec(), params)?;
    let constants = scheme_constants(params)?;
    let layout = build_cache_layout(params);
    let demands = build_demand_list(params, &d);

    let mut diagnostics = Vec::new();
    if strategy != Strategy::Sweep {
        let run = run_generator(params, &layout, demands.clone())?;
        diagnostics.extend(run.events.iter().map(ToString::to_string));
        match post_condition(&run.codewords, &layout, &demands, &constants) {
            Ok(()) => {
                return Ok(TransmissionSchedule::new(
                    *params,
                    d,
                    Some(constants),
                    into_codewords(run.codewords),
                    Construction::ShiftReplace,
                    diagnostics,
                ))
            }
            Err(detail) if strategy == Strategy::ShiftReplace => {
                if let Some(term) = run.first_exhausted() {
                    return Err(DeliveryError::ReplacementExhausted { term });
                }
                return Err(DeliveryError::PostCondition {
                    construction: Construction::ShiftReplace,
                    detail,
                });
            }
            Err(detail) => diagnostics.push(format!("shift-replace rejected: {detail}")),
        }
    }

    let packed = sweep_packing(params, &layout, &constants, DEFAULT_ATTEMPTS).ok_or_else(|| {
        DeliveryError::PostCondition {
            construction: Construction::SweepPacking {
                attempt: DEFAULT_ATTEMPTS,
            },
            detail: format!(
                "no ordering reached {} codewords in {DEFAULT_ATTEMPTS} attempts",
                constants.lambda
            ),
        }
    })?;
    let construction = Construction::SweepPacking {
        attempt: packed.attempt,
    };
    post_condition(&packed.codewords, &layout, &demands, &constants).map_err(|detail| {
        DeliveryError::PostCondition {
            construction,
            detail,
        }
    })?;
    Ok(TransmissionSchedule::new(
        *params,
        d,
        Some(constants),
        into_codewords(packed.codewords),
        construction,
        diagnostics,
    ))
}

/// Schedule for any `0 <= i <= K`: empty at `i = K`, one sub-packet per
/// transmission at `i = 0`, [`generate_schedule`] otherwise.
pub fn plan_delivery(
    params: &SystemParams,
    d: &DemandVector,
) -> Result<TransmissionSchedule, DeliveryError> {
    let k = params.n_users();
    match params.cache_units() {
        i if i == k => {
            let d = DemandVector::new(d.as_slice().to_vec(), params)?;
            Ok(TransmissionSchedule::new(
                *params,
                d,
                None,
                Vec::new(),
                Construction::NoDelivery,
                Vec::new(),
            ))
        }
        0 => {
            params.require_worst_case()?;
            let d = DemandVector::new(d.as_slice().to_vec(), params)?;
            let codewords = build_demand_list(params, &d)
                .iter()
                .map(|s| Codeword::new(vec![s]))
                .collect();
            Ok(TransmissionSchedule::new(
                *params,
                d,
                None,
                codewords,
                Construction::Uncoded,
                Vec::new(),
            ))
        }
        _ => generate_schedule(params, d),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(k: usize, i: usize) -> SystemParams {
        SystemParams::new(k, k, i).unwrap()
    }

    fn term_set(s: &TransmissionSchedule) -> Vec<Vec<(usize, usize)>> {
        s.codewords()
            .iter()
            .map(|c| {
                let mut v: Vec<_> = c.terms().iter().map(|t| (t.user, t.packet)).collect();
                v.sort();
                v
            })
            .collect()
    }

    #[test]
    fn example_schedule() {
        let params = p(6, 4);
        let s = generate_schedule(&params, &DemandVector::identity(&params)).unwrap();
        assert_eq!(s.construction(), Construction::ShiftReplace);
        assert_eq!(s.rate(), Rational::new(1, 2));
        assert_eq!(
            term_set(&s),
            vec![
                vec![(1, 5), (2, 1), (4, 2), (5, 4)],
                vec![(2, 6), (3, 2), (5, 3), (6, 5)],
                vec![(1, 6), (3, 1), (4, 3), (6, 4)],
            ]
        );
    }

    #[test]
    fn small_instances() {
        let params = p(4, 3);
        let s = generate_schedule(&params, &DemandVector::identity(&params)).unwrap();
        assert_eq!(s.codewords().len(), 1);
        assert_eq!(s.total_terms(), 4);

        let params = p(5, 2);
        let s = generate_schedule(&params, &DemandVector::identity(&params)).unwrap();
        assert_eq!(s.codewords().len(), 8);
        assert!(s.codewords().iter().all(|c| c.len() <= 2));

        let params = p(2, 1);
        let s = generate_schedule(&params, &DemandVector::identity(&params)).unwrap();
        assert_eq!(term_set(&s), vec![vec![(1, 2), (2, 1)]]);
    }

    #[test]
    fn falls_back_when_shifting_overshoots() {
        let params = p(11, 6);
        let d = DemandVector::identity(&params);
        let strict = generate_schedule_with(&params, &d, Strategy::ShiftReplace);
        assert!(matches!(
            strict,
            Err(DeliveryError::PostCondition { .. } | DeliveryError::ReplacementExhausted { .. })
        ));
        let s = generate_schedule(&params, &d).unwrap();
        assert!(matches!(
            s.construction(),
            Construction::SweepPacking { .. }
        ));
        assert_eq!(s.codewords().len(), 19);
        assert!(s
            .diagnostics()
            .iter()
            .any(|m| m.starts_with("shift-replace rejected")));
    }

    #[test]
    fn rejects_bad_instances() {
        let params = p(6, 0);
        assert!(matches!(
            generate_schedule(&params, &DemandVector::identity(&params)),
            Err(DeliveryError::Regime { .. })
        ));
        let few_files = SystemParams::new(3, 6, 2).unwrap();
        assert!(matches!(
            generate_schedule(&few_files, &DemandVector::identity(&few_files)),
            Err(DeliveryError::Instance(InstanceError::TooFewFiles { .. }))
        ));
    }

    #[test]
    fn trivial_points() {
        let params = p(5, 5);
        let s = plan_delivery(&params, &DemandVector::identity(&params)).unwrap();
        assert!(s.codewords().is_empty());
        assert_eq!(s.rate(), Rational::from_integer(0));

        let params = p(5, 0);
        let s = plan_delivery(&params, &DemandVector::identity(&params)).unwrap();
        assert_eq!(s.codewords().len(), 25);
        assert_eq!(s.rate(), Rational::from_integer(5));
    }

    #[test]
    fn repeated_demands_do_not_change_structure() {
        let params = p(6, 4);
        let same = DemandVector::new(vec![1; 6], &params).unwrap();
        let a = generate_schedule(&params, &same).unwrap();
        let b = generate_schedule(&params, &DemandVector::identity(&params)).unwrap();
        assert_eq!(a.codewords(), b.codewords());
    }

    #[test]
    fn schedule_count_law_small() {
        for k in 2..=14 {
            for i in 1..k {
                let params = p(k, i);
                let s = generate_schedule(&params, &DemandVector::identity(&params))
                    .unwrap_or_else(|e| panic!("K={k} i={i}: {e}"));
                let c = scheme_constants(&params).unwrap();
                assert_eq!(s.codewords().len(), c.lambda, "K={k} i={i}");
                assert_eq!(s.total_terms(), k * (k - i));
                assert!(s.codewords().iter().all(|cw| cw.len() <= c.t));
            }
        }
    }
}
