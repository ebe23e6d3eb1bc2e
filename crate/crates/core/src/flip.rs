//! CRC-gated multi-attempt decoders: SC-Flip, fixed index selection (FIS),
//! enhanced index selection (EIS), and the SC-Oracle genie.
//!
//! Every flip decoder runs one SC pass first. If the CRC fails, it re-runs
//! SC with a single decision inverted relative to that first pass, trying
//! candidate leaves in order until the CRC passes or `t_max` re-decodes
//! have been spent. The decoders differ only in how candidates are ordered:
//!
//! * SC-Flip sorts all unfrozen leaves by ascending `|LLR|`.
//! * FIS uses an order fixed offline from an E1 profile; no sorting.
//! * EIS sorts a profile-derived candidate subset by `|LLR|` scaled with
//!   each candidate's E1 probability.
//!
//! Ties always go to the lower leaf index.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::campaign::{iteration_cost, ErrorProfile};
use crate::code_spec::{crc_check, BitVector, CodeSpec};
use crate::error::{param, Error, Result};
use crate::sc_kernel::{ForcedDecisions, LeafDecider, ScDecoder, ScResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanMode {
    /// Flip order fixed offline (FIS).
    Fixed,
    /// Candidate set with E1 weights, ordered at decode time (EIS).
    CandidateSet,
}

impl fmt::Display for PlanMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlanMode::Fixed => "fixed",
            PlanMode::CandidateSet => "candidate_set",
        })
    }
}

/// Leaf indices to flip (FIS) or to choose flips from (EIS).
#[derive(Clone, Debug, PartialEq)]
pub struct FlipPlan {
    ordered_indices: Vec<usize>,
    mode: PlanMode,
    weights: Option<Vec<f64>>,
}

impl FlipPlan {
    pub fn fixed(ordered_indices: Vec<usize>) -> Result<Self> {
        check_unique(&ordered_indices)?;
        Ok(Self { ordered_indices, mode: PlanMode::Fixed, weights: None })
    }

    /// Weights must be strictly positive; indices with no recorded E1
    /// occurrence belong outside the set.
    pub fn candidate_set(ordered_indices: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        check_unique(&ordered_indices)?;
        if weights.len() != ordered_indices.len() {
            return param(format!("{} weights for {} candidates", weights.len(), ordered_indices.len()));
        }
        if let Some((i, w)) = ordered_indices.iter().zip(&weights).find(|(_, w)| !(**w > 0.0 && w.is_finite())) {
            return param(format!("candidate leaf {i} has weight {w}; drop zero-weight indices from the set"));
        }
        Ok(Self { ordered_indices, mode: PlanMode::CandidateSet, weights: Some(weights) })
    }

    pub fn ordered_indices(&self) -> &[usize] {
        &self.ordered_indices
    }

    pub fn mode(&self) -> PlanMode {
        self.mode
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn len(&self) -> usize {
        self.ordered_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordered_indices.is_empty()
    }

    /// Every index must be an unfrozen leaf of `spec`.
    pub fn validate(&self, spec: &CodeSpec) -> Result<()> {
        for &i in &self.ordered_indices {
            if i >= spec.len() || spec.is_frozen(i) {
                return param(format!("plan index {i} is frozen or out of range for {}", spec.fingerprint()));
            }
        }
        Ok(())
    }
}

fn check_unique(indices: &[usize]) -> Result<()> {
    let mut seen = indices.to_vec();
    seen.sort_unstable();
    if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
        return param(format!("plan index {} repeated", w[0]));
    }
    Ok(())
}

/// How EIS folds the E1 weight into the LLR magnitude before sorting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EisScaling {
    /// `|llr| / w`
    #[default]
    Divide,
    /// `|llr| * (1 - w)`
    OneMinusWeight,
}

impl EisScaling {
    fn metric(self, llr: f64, w: f64) -> f64 {
        match self {
            EisScaling::Divide => llr.abs() / w,
            EisScaling::OneMinusWeight => llr.abs() * (1.0 - w),
        }
    }
}

impl FromStr for EisScaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "divide" => Ok(Self::Divide),
            "one_minus_weight" | "one-minus-weight" => Ok(Self::OneMinusWeight),
            other => Err(Error::Parse(format!("unknown EIS scaling {other:?} (divide, one_minus_weight)"))),
        }
    }
}

/// Result of a (possibly multi-attempt) decode.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodeOutcome {
    /// Estimated K information bits, CRC stripped.
    pub info_hat: BitVector,
    /// Estimated input vector of the final attempt.
    pub u_hat: BitVector,
    pub crc_pass: bool,
    /// SC applications including the first.
    pub attempts: usize,
    /// Fractional iterations under the resume-from-flip model.
    pub iteration_cost: f64,
    /// Leaf whose flip made the CRC pass.
    pub flipped_index: Option<usize>,
    /// Every leaf flipped, in attempt order.
    pub flip_trail: Vec<usize>,
}

impl DecodeOutcome {
    fn single_pass(spec: &CodeSpec, r: ScResult) -> Self {
        let crc_pass = crc_check(&r.info_hat, spec.crc_poly());
        Self {
            info_hat: strip_crc(spec, &r.info_hat),
            u_hat: r.u_hat,
            crc_pass,
            attempts: 1,
            iteration_cost: 1.0,
            flipped_index: None,
            flip_trail: Vec::new(),
        }
    }
}

fn strip_crc(spec: &CodeSpec, info_with_crc: &[u8]) -> BitVector {
    BitVector::new(info_with_crc[..spec.k()].to_vec()).expect("decoded bits are binary")
}

/// Re-decodes with each candidate flipped in turn, at most `t_max` times.
fn flip_sequence(
    dec: &mut ScDecoder,
    llrs: &[f64],
    spec: &CodeSpec,
    first: ScResult,
    order: impl IntoIterator<Item = usize>,
    t_max: usize,
) -> Result<DecodeOutcome> {
    let mut outcome = DecodeOutcome::single_pass(spec, first);
    if outcome.crc_pass {
        return Ok(outcome);
    }
    let first_u = outcome.u_hat.clone();
    let mut last = None;
    for leaf in order.into_iter().take(t_max) {
        let forced = ForcedDecisions::single(leaf, 1 - first_u[leaf]);
        let r = dec.decode_with(llrs, spec, &mut &forced)?;
        outcome.flip_trail.push(leaf);
        let pass = crc_check(&r.info_hat, spec.crc_poly());
        last = Some(r);
        if pass {
            outcome.flipped_index = Some(leaf);
            break;
        }
    }
    if let Some(r) = last {
        outcome.crc_pass = outcome.flipped_index.is_some();
        outcome.info_hat = strip_crc(spec, &r.info_hat);
        outcome.u_hat = r.u_hat;
    }
    outcome.attempts = 1 + outcome.flip_trail.len();
    outcome.iteration_cost = iteration_cost(&outcome.flip_trail, spec.len());
    Ok(outcome)
}

/// Unfrozen leaves by ascending `|llr|`, lower index first on ties.
fn least_reliable(spec: &CodeSpec, leaf_llrs: &[f64]) -> Vec<usize> {
    let mut order = spec.info_indices().to_vec();
    order.sort_by(|&a, &b| leaf_llrs[a].abs().total_cmp(&leaf_llrs[b].abs()).then(a.cmp(&b)));
    order
}

/// Plain SC; the CRC is only checked, never acted on.
pub fn sc_decode_once(dec: &mut ScDecoder, llrs: &[f64], spec: &CodeSpec) -> Result<DecodeOutcome> {
    let r = dec.decode_with(llrs, spec, &mut crate::sc_kernel::Free)?;
    Ok(DecodeOutcome::single_pass(spec, r))
}

/// Baseline SC-Flip.
pub fn scflip_decode_with(dec: &mut ScDecoder, llrs: &[f64], spec: &CodeSpec, t_max: usize) -> Result<DecodeOutcome> {
    let first = dec.decode_with(llrs, spec, &mut crate::sc_kernel::Free)?;
    if crc_check(&first.info_hat, spec.crc_poly()) || t_max == 0 {
        return flip_sequence(dec, llrs, spec, first, [], 0);
    }
    let order = least_reliable(spec, &first.leaf_llrs);
    flip_sequence(dec, llrs, spec, first, order, t_max)
}

pub fn scflip_decode(llrs: &[f64], spec: &CodeSpec, t_max: usize) -> Result<DecodeOutcome> {
    scflip_decode_with(&mut ScDecoder::for_spec(spec), llrs, spec, t_max)
}

/// SC-Flip with the flip order taken verbatim from a fixed plan.
pub fn fis_decode_with(dec: &mut ScDecoder, llrs: &[f64], spec: &CodeSpec, plan: &FlipPlan, t_max: usize) -> Result<DecodeOutcome> {
    if plan.mode() != PlanMode::Fixed {
        return param("FIS needs a fixed-mode plan");
    }
    plan.validate(spec)?;
    let first = dec.decode_with(llrs, spec, &mut crate::sc_kernel::Free)?;
    flip_sequence(dec, llrs, spec, first, plan.ordered_indices().iter().copied(), t_max)
}

pub fn fis_decode(llrs: &[f64], spec: &CodeSpec, plan: &FlipPlan, t_max: usize) -> Result<DecodeOutcome> {
    fis_decode_with(&mut ScDecoder::for_spec(spec), llrs, spec, plan, t_max)
}

/// SC-Flip restricted to a weighted candidate set.
pub fn eis_decode_with(
    dec: &mut ScDecoder,
    llrs: &[f64],
    spec: &CodeSpec,
    plan: &FlipPlan,
    t_max: usize,
    scaling: EisScaling,
) -> Result<DecodeOutcome> {
    if plan.mode() != PlanMode::CandidateSet {
        return param("EIS needs a candidate-set plan");
    }
    let weights = plan.weights().ok_or_else(|| Error::Parameter("EIS plan carries no weights".into()))?;
    plan.validate(spec)?;
    let first = dec.decode_with(llrs, spec, &mut crate::sc_kernel::Free)?;
    if crc_check(&first.info_hat, spec.crc_poly()) || t_max == 0 {
        return flip_sequence(dec, llrs, spec, first, [], 0);
    }
    let mut scored: Vec<(f64, usize)> = plan
        .ordered_indices()
        .iter()
        .zip(weights)
        .map(|(&i, &w)| (scaling.metric(first.leaf_llrs[i], w), i))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    flip_sequence(dec, llrs, spec, first, scored.into_iter().map(|(_, i)| i), t_max)
}

pub fn eis_decode(llrs: &[f64], spec: &CodeSpec, plan: &FlipPlan, t_max: usize) -> Result<DecodeOutcome> {
    eis_decode_with(&mut ScDecoder::for_spec(spec), llrs, spec, plan, t_max, EisScaling::Divide)
}

/// Genie decoder result.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub outcome: DecodeOutcome,
    /// Channel-induced decision errors the genie corrected.
    pub error_count: usize,
    /// Earliest corrected leaf.
    pub first_error_index: Option<usize>,
    /// A decision error was met after the correction budget ran out.
    pub budget_exceeded: bool,
}

struct Genie<'a> {
    truth: &'a [u8],
    budget: Option<usize>,
    corrected: usize,
    first: Option<usize>,
    exceeded: bool,
}

impl LeafDecider for Genie<'_> {
    fn decide(&mut self, index: usize, _llr: f64, hard: u8) -> u8 {
        if self.exceeded || hard == self.truth[index] {
            return hard;
        }
        if self.budget.is_some_and(|b| self.corrected >= b) {
            self.exceeded = true;
            return hard;
        }
        self.corrected += 1;
        self.first.get_or_insert(index);
        self.truth[index]
    }
}

/// SC-Oracle: one SC pass in which every wrong unfrozen decision is
/// replaced by the transmitted bit. With `budget = Some(b)` only the first
/// `b` errors are corrected and the pass then runs freely, which models a
/// flip decoder that always finds its flip.
pub fn oracle_decode_with(
    dec: &mut ScDecoder,
    llrs: &[f64],
    spec: &CodeSpec,
    true_u: &[u8],
    budget: Option<usize>,
) -> Result<OracleReport> {
    if true_u.len() != spec.len() {
        return param(format!("true u has {} bits, expected {}", true_u.len(), spec.len()));
    }
    if let Some(i) = (0..spec.len()).find(|&i| spec.is_frozen(i) && true_u[i] != 0) {
        return param(format!("true u is nonzero at frozen leaf {i}"));
    }
    let mut genie = Genie { truth: true_u, budget, corrected: 0, first: None, exceeded: false };
    let r = dec.decode_with(llrs, spec, &mut genie)?;
    Ok(OracleReport {
        outcome: DecodeOutcome::single_pass(spec, r),
        error_count: genie.corrected,
        first_error_index: genie.first,
        budget_exceeded: genie.exceeded,
    })
}

pub fn oracle_decode(llrs: &[f64], spec: &CodeSpec, true_u: &[u8]) -> Result<OracleReport> {
    oracle_decode_with(&mut ScDecoder::for_spec(spec), llrs, spec, true_u, None)
}

/// Profile ranks with nonzero E1 count, highest count first, lower rank on
/// ties.
fn ranked_by_count(profile: &ErrorProfile) -> Vec<usize> {
    let counts = profile.e1_counts();
    let mut ranks: Vec<usize> = (0..counts.len()).filter(|&r| counts[r] > 0).collect();
    ranks.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    ranks
}

/// The `t_max` leaves with the most E1 occurrences, in descending order.
pub fn build_fis_plan(profile: &ErrorProfile, t_max: usize) -> Result<FlipPlan> {
    if profile.e1_counts().is_empty() {
        return param("empty error profile");
    }
    let leaves = profile.leaf_indices();
    FlipPlan::fixed(ranked_by_count(profile).into_iter().take(t_max).map(|r| leaves[r]).collect())
}

/// The `set_size` leaves with the most E1 occurrences, weighted by their
/// share of all E1 events.
pub fn build_eis_plan(profile: &ErrorProfile, set_size: usize) -> Result<FlipPlan> {
    if profile.e1_counts().is_empty() {
        return param("empty error profile");
    }
    let total: u64 = profile.e1_counts().iter().sum();
    let ranks: Vec<usize> = ranked_by_count(profile).into_iter().take(set_size).collect();
    let indices = ranks.iter().map(|&r| profile.leaf_indices()[r]).collect();
    let weights = ranks.iter().map(|&r| profile.e1_counts()[r] as f64 / total as f64).collect();
    FlipPlan::candidate_set(indices, weights)
}

/// A decoder selectable by name in campaigns and on the command line.
#[derive(Clone, Debug, PartialEq)]
pub enum Engine {
    Sc,
    ScFlip { t_max: usize },
    Fis { plan: FlipPlan, t_max: usize },
    Eis { plan: FlipPlan, t_max: usize, scaling: EisScaling },
    /// `budget: None` corrects every error; `Some(1)` is the flip bound.
    Oracle { budget: Option<usize> },
}

impl Engine {
    pub const NAMES: [&'static str; 5] = ["sc", "scflip", "fis", "eis", "oracle"];

    pub fn name(&self) -> &'static str {
        match self {
            Engine::Sc => "sc",
            Engine::ScFlip { .. } => "scflip",
            Engine::Fis { .. } => "fis",
            Engine::Eis { .. } => "eis",
            Engine::Oracle { .. } => "oracle",
        }
    }

    pub fn needs_truth(&self) -> bool {
        matches!(self, Engine::Oracle { .. })
    }

    pub fn validate(&self, spec: &CodeSpec) -> Result<()> {
        match self {
            Engine::Fis { plan, .. } if plan.mode() != PlanMode::Fixed => param("FIS needs a fixed-mode plan"),
            Engine::Eis { plan, .. } if plan.mode() != PlanMode::CandidateSet => param("EIS needs a candidate-set plan"),
            Engine::Fis { plan, .. } | Engine::Eis { plan, .. } => plan.validate(spec),
            _ => Ok(()),
        }
    }

    /// Decodes one frame. `true_u` is only read by the oracle.
    pub fn decode(&self, dec: &mut ScDecoder, llrs: &[f64], spec: &CodeSpec, true_u: &[u8]) -> Result<DecodeOutcome> {
        match self {
            Engine::Sc => sc_decode_once(dec, llrs, spec),
            Engine::ScFlip { t_max } => scflip_decode_with(dec, llrs, spec, *t_max),
            Engine::Fis { plan, t_max } => fis_decode_with(dec, llrs, spec, plan, *t_max),
            Engine::Eis { plan, t_max, scaling } => eis_decode_with(dec, llrs, spec, plan, *t_max, *scaling),
            Engine::Oracle { budget } => Ok(oracle_decode_with(dec, llrs, spec, true_u, *budget)?.outcome),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::campaign::generate_frame;
    use crate::channel::{modulate, saturated_llrs, ChannelConfig, LLR_SATURATION};
    use crate::code_spec::{crc_attach, encode, CrcPoly};
    use crate::sc_kernel::sc_decode;

    fn spec() -> CodeSpec {
        CodeSpec::construct(6, 24, CrcPoly::CRC8, 2.5).unwrap()
    }

    fn frame(spec: &CodeSpec, seed: u64) -> (BitVector, BitVector, Vec<f64>) {
        let info: Vec<u8> = (0..spec.k()).map(|i| ((seed.wrapping_mul(31) >> (i % 60)) & 1) as u8).collect();
        let info = BitVector::new(info).unwrap();
        let word = crc_attach(&info, spec.crc_poly());
        let u = spec.embed(&word).unwrap();
        let x = encode(&word, spec).unwrap();
        (info, u, saturated_llrs(&modulate(&x)).into_inner())
    }

    /// First noisy frame at or after `start` that the genie classifies as
    /// carrying exactly one channel-induced error; returns that leaf too.
    fn single_error_frame(spec: &CodeSpec, start: u64) -> (BitVector, BitVector, Vec<f64>, usize, u64) {
        let ch = ChannelConfig::new(1.0, spec.rate(), 2024).unwrap();
        let sigma = ch.sigma().unwrap();
        for i in start..start + 10_000 {
            let f = generate_frame(spec, &ch, sigma, i).unwrap();
            let rep = oracle_decode(&f.llrs, spec, &f.u).unwrap();
            if rep.error_count == 1 {
                return (f.info, f.u, f.llrs, rep.first_error_index.unwrap(), i);
            }
        }
        panic!("no single-error frame found");
    }

    #[test]
    fn noiseless_every_engine_first_pass() {
        let spec = spec();
        let (info, u, llrs) = frame(&spec, 3);
        let plan = FlipPlan::fixed(spec.info_indices()[..4].to_vec()).unwrap();
        let cand = FlipPlan::candidate_set(spec.info_indices()[..4].to_vec(), vec![0.25; 4]).unwrap();
        let engines = [
            Engine::Sc,
            Engine::ScFlip { t_max: 10 },
            Engine::Fis { plan, t_max: 10 },
            Engine::Eis { plan: cand, t_max: 10, scaling: EisScaling::Divide },
            Engine::Oracle { budget: None },
        ];
        let mut dec = ScDecoder::for_spec(&spec);
        for e in &engines {
            let out = e.decode(&mut dec, &llrs, &spec, &u).unwrap();
            assert_eq!(out.info_hat, info, "{}", e.name());
            assert!(out.crc_pass);
            assert_eq!(out.attempts, 1);
            assert_eq!(out.iteration_cost, 1.0);
        }
    }

    #[test]
    fn t_max_zero_is_sc_with_crc_gate() {
        let spec = spec();
        let (_, _, mut llrs) = frame(&spec, 9);
        for (i, v) in llrs.iter_mut().enumerate() {
            *v = if i % 3 == 0 { -*v * 1e-6 } else { *v * 1e-6 };
        }
        let sc = sc_decode(&llrs, &spec, &ForcedDecisions::new()).unwrap();
        let out = scflip_decode(&llrs, &spec, 0).unwrap();
        assert_eq!(out.attempts, 1);
        assert_eq!(out.u_hat, sc.u_hat);
        assert_eq!(out.crc_pass, crc_check(&sc.info_hat, spec.crc_poly()));
        assert_eq!(&*out.info_hat, &sc.info_hat[..spec.k()]);
    }

    #[test]
    fn single_error_is_found_by_every_flip_engine() {
        let spec = spec();
        let (info, u, llrs, j, _) = single_error_frame(&spec, 11);
        let sc = sc_decode(&llrs, &spec, &ForcedDecisions::new()).unwrap();
        assert_ne!(sc.u_hat[j], u[j]);

        let fis = fis_decode(&llrs, &spec, &FlipPlan::fixed(vec![j]).unwrap(), 10).unwrap();
        assert!(fis.crc_pass);
        assert_eq!(fis.attempts, 2);
        assert_eq!(fis.flipped_index, Some(j));
        assert_eq!(fis.info_hat, info);

        let eis = eis_decode(&llrs, &spec, &FlipPlan::candidate_set(vec![j], vec![0.3]).unwrap(), 10).unwrap();
        assert_eq!(eis, fis);

        // SC-Flip reaches j after every leaf with a smaller |LLR|.
        let order = least_reliable(&spec, &sc.leaf_llrs);
        let pos = order.iter().position(|&i| i == j).unwrap();
        let flip = scflip_decode(&llrs, &spec, pos + 1).unwrap();
        assert!(flip.crc_pass);
        assert_eq!(flip.info_hat, info);
        assert!(flip.attempts <= pos + 2);
        if pos == 0 {
            assert_eq!(flip.attempts, 2);
            assert_eq!(flip.flipped_index, Some(j));
        }
    }

    #[test]
    fn smallest_llr_single_error_takes_two_attempts() {
        let spec = spec();
        let mut start = 0;
        for _ in 0..200 {
            let (_, u, llrs, j, at) = single_error_frame(&spec, start);
            start = at + 1;
            let sc = sc_decode(&llrs, &spec, &ForcedDecisions::new()).unwrap();
            if least_reliable(&spec, &sc.leaf_llrs)[0] == j {
                let out = scflip_decode(&llrs, &spec, 10).unwrap();
                assert_eq!((out.attempts, out.crc_pass, out.flipped_index), (2, true, Some(j)));
                assert_eq!(out.u_hat, u);
                return;
            }
        }
        panic!("no frame with the error at the least reliable leaf");
    }

    #[test]
    fn oracle_reports() {
        let spec = spec();
        let (_, u, llrs) = frame(&spec, 5);
        let rep = oracle_decode(&llrs, &spec, &u).unwrap();
        assert_eq!((rep.error_count, rep.first_error_index), (0, None));
        let (info2, u2, llrs2, j, _) = single_error_frame(&spec, 5);
        let rep = oracle_decode(&llrs2, &spec, &u2).unwrap();
        assert_eq!((rep.error_count, rep.first_error_index), (1, Some(j)));
        assert_eq!(rep.outcome.info_hat, info2);
        let mut bad = u.to_vec();
        bad[0] = 1;
        assert!(oracle_decode(&llrs, &spec, &bad).is_err());
    }

    #[test]
    fn oracle_recovers_truth_under_heavy_noise() {
        let spec = spec();
        let (info, u, llrs) = frame(&spec, 8);
        let noisy: Vec<f64> = llrs.iter().enumerate().map(|(i, v)| v / LLR_SATURATION * if i % 4 == 1 { -0.5 } else { 0.7 }).collect();
        let rep = oracle_decode(&noisy, &spec, &u).unwrap();
        assert!(rep.error_count >= 1);
        assert_eq!(rep.outcome.info_hat, info);
        assert_eq!(rep.outcome.u_hat, u);
        let limited = oracle_decode_with(&mut ScDecoder::for_spec(&spec), &noisy, &spec, &u, Some(1)).unwrap();
        assert_eq!(limited.error_count, 1);
        assert_eq!(limited.budget_exceeded, rep.error_count > 1);
    }

    #[test]
    fn plan_validation() {
        let spec = spec();
        assert!(FlipPlan::fixed(vec![3, 3]).is_err());
        assert!(FlipPlan::candidate_set(vec![63], vec![0.0]).is_err());
        assert!(FlipPlan::candidate_set(vec![63, 62], vec![0.5]).is_err());
        let frozen = FlipPlan::fixed(vec![0]).unwrap();
        let llrs = vec![1.0; 64];
        assert!(fis_decode(&llrs, &spec, &frozen, 1).is_err());
        let cand = FlipPlan::candidate_set(vec![63], vec![1.0]).unwrap();
        assert!(fis_decode(&llrs, &spec, &cand, 1).is_err());
        assert!(eis_decode(&llrs, &spec, &FlipPlan::fixed(vec![63]).unwrap(), 1).is_err());
        assert!(Engine::Fis { plan: frozen, t_max: 1 }.validate(&spec).is_err());
    }

    #[test]
    fn eis_scaling_prefers_heavier_weight() {
        assert!(EisScaling::Divide.metric(1.0, 0.5) < EisScaling::Divide.metric(1.0, 0.1));
        assert!(EisScaling::OneMinusWeight.metric(1.0, 0.5) < EisScaling::OneMinusWeight.metric(1.0, 0.1));
        assert_eq!("divide".parse::<EisScaling>().unwrap(), EisScaling::Divide);
        assert!("log".parse::<EisScaling>().is_err());
    }

    fn profile(counts: Vec<u64>) -> ErrorProfile {
        let leaves = (100..100 + counts.len()).collect();
        ErrorProfile::from_counts("test".into(), 3.0, 1000, counts, leaves, 0, 0)
    }

    #[test]
    fn fis_plan_examples() {
        let p = profile(vec![0, 0, 7, 0]);
        assert_eq!(build_fis_plan(&p, 10).unwrap().ordered_indices(), &[102]);
        let p = profile(vec![4; 6]);
        assert_eq!(build_fis_plan(&p, 3).unwrap().ordered_indices(), &[100, 101, 102]);
        let p = profile(vec![50, 1, 2, 3, 0, 9, 9]);
        assert_eq!(build_fis_plan(&p, 4).unwrap().ordered_indices(), &[100, 105, 106, 103]);
        assert!(build_fis_plan(&profile(vec![]), 3).is_err());
    }

    #[test]
    fn eis_plan_weights_are_shares() {
        let p = profile(vec![6, 0, 2, 2]);
        let plan = build_eis_plan(&p, 2).unwrap();
        assert_eq!(plan.ordered_indices(), &[100, 102]);
        assert_eq!(plan.weights().unwrap(), &[0.6, 0.2]);
        assert_eq!(plan.mode(), PlanMode::CandidateSet);
    }
}
