//! Monte Carlo simulation of sequential projective measurements.
//!
//! # Random streams
//!
//! All randomness comes from ChaCha20 (`rand_chacha::ChaCha20Rng`) keyed with
//! `seed_from_u64(seed)`. A run selects a stream number and then positions the
//! generator per shot: shot `s` of a sequence of `k` measurements starts at
//! word position `2·k·s`, because every measurement consumes exactly one uniform
//! `f64` drawn from one `u64` (two 32-bit words). Shots therefore never share
//! randomness and can be evaluated in any order or in parallel with identical results.
//!
//! Streams used by [`run_protocol`]: term `t` uses stream `t`. [`marginal_consistency`]
//! uses streams 0 and 1 for its two contexts.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::catalog::{InequalityExpr, Sign, Term};
// sqrt and trig resolve to libm unless some dependency links std
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix, C64};
use crate::observables::{ObservableLabel, ObservableSet};
use crate::quantum::require_valid;

/// A branch with probability below this is treated as unreachable.
pub const MIN_BRANCH_PROB: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub outcomes: Vec<(ObservableLabel, Sign)>,
    final_state: DensityMatrix,
}

impl MeasurementRecord {
    pub fn final_state(&self) -> &DensityMatrix {
        &self.final_state
    }

    pub fn outcome_product(&self) -> Sign {
        self.outcomes.iter().fold(Sign::Plus, |acc, (_, s)| acc * *s)
    }
}

/// Projector pairs (Π₊, Π₋) for an ordered list of compatible observables.
#[derive(Debug, Clone)]
pub struct MeasurementPlan {
    labels: Vec<ObservableLabel>,
    projectors: Vec<(ComplexMatrix, ComplexMatrix)>,
}

impl MeasurementPlan {
    pub fn new(set: &ObservableSet, labels: &[ObservableLabel]) -> Result<Self> {
        set.check_commuting(labels)?;
        let id = ComplexMatrix::identity(set.dimension());
        let half = C64::new(0.5, 0.0);
        let projectors = labels
            .iter()
            .map(|l| {
                let a = set.operator(l)?;
                Ok(((&id + a).scale(half), (&id - a).scale(half)))
            })
            .collect::<Result<_>>()?;
        Ok(MeasurementPlan { labels: labels.to_vec(), projectors })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Measures each observable in order with the Lüders update, one uniform draw each.
    pub fn run<R: RngCore>(&self, rho: &DensityMatrix, rng: &mut R) -> Result<MeasurementRecord> {
        let mut state = rho.clone();
        let mut outcomes = Vec::with_capacity(self.labels.len());
        for (label, (plus, minus)) in self.labels.iter().zip(&self.projectors) {
            let p_plus = state.matrix().trace_product(plus)?.re;
            let u: f64 = rng.random();
            let (sign, proj) = if u < p_plus { (Sign::Plus, plus) } else { (Sign::Minus, minus) };
            let (next, _) = state.project(proj, MIN_BRANCH_PROB).ok_or_else(|| {
                Error::Internal(format!("sampled a zero-probability outcome of {label}"))
            })?;
            state = next;
            outcomes.push((label.clone(), sign));
        }
        Ok(MeasurementRecord { outcomes, final_state: state })
    }
}

/// Generator for shot `shot` of a `k`-measurement sequence on `stream`.
pub fn shot_rng(seed: u64, stream: u64, measurements: usize, shot: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(2 * measurements as u128 * shot as u128);
    rng
}

/// Measure `labels` in order on `rho`.
pub fn sequential_measure<R: RngCore>(
    rho: &DensityMatrix,
    set: &ObservableSet,
    labels: &[ObservableLabel],
    rng: &mut R,
) -> Result<MeasurementRecord> {
    if rho.dim() != set.dimension() {
        return Err(Error::invalid("state and observables differ in dimension"));
    }
    MeasurementPlan::new(set, labels)?.run(rho, rng)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermEstimate {
    pub estimate: f64,
    /// Sample standard deviation over √shots.
    pub standard_error: f64,
    pub shots: u64,
}

/// Mean and standard error of `sign · Π outcomes` over `shots` fresh preparations.
pub fn estimate_term(
    rho: &DensityMatrix,
    set: &ObservableSet,
    term: &Term,
    shots: u64,
    seed: u64,
    stream: u64,
) -> Result<TermEstimate> {
    if shots < 2 {
        return Err(Error::invalid("at least two shots are needed for a standard error"));
    }
    if rho.dim() != set.dimension() {
        return Err(Error::invalid("state and observables differ in dimension"));
    }
    let plan = MeasurementPlan::new(set, &term.factors)?;
    let mut plus = 0u64;
    for shot in 0..shots {
        let mut rng = shot_rng(seed, stream, plan.len(), shot);
        let record = plan.run(rho, &mut rng)?;
        if term.sign * record.outcome_product() == Sign::Plus {
            plus += 1;
        }
    }
    Ok(summarize(plus, shots))
}

/// Mean and standard error of ±1 samples with `plus` successes.
fn summarize(plus: u64, shots: u64) -> TermEstimate {
    let n = shots as f64;
    let minus = shots - plus;
    let mean = (plus as f64 - minus as f64) / n;
    // Σ(x − mean)² for x ∈ {±1}
    let ss = plus as f64 * (1.0 - mean) * (1.0 - mean) + minus as f64 * (1.0 + mean) * (1.0 + mean);
    let sd = (ss / (n - 1.0)).sqrt();
    TermEstimate { estimate: mean, standard_error: sd / n.sqrt(), shots }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub seed: u64,
    pub shots_per_term: u64,
    pub terms: Vec<TermEstimate>,
    pub lhs_estimate: f64,
    /// Root-sum-square of the term standard errors.
    pub lhs_standard_error: f64,
}

impl EstimateReport {
    pub fn from_terms(seed: u64, shots_per_term: u64, terms: Vec<TermEstimate>) -> Self {
        let lhs_estimate = terms.iter().map(|t| t.estimate).sum();
        let lhs_standard_error = terms.iter().map(|t| t.standard_error * t.standard_error).sum::<f64>().sqrt();
        EstimateReport { seed, shots_per_term, terms, lhs_estimate, lhs_standard_error }
    }
}

/// Estimates every term on its own subensemble; term `t` uses stream `t`.
pub fn run_protocol(
    rho: &DensityMatrix,
    set: &ObservableSet,
    expr: &InequalityExpr,
    shots_per_term: u64,
    seed: u64,
) -> Result<EstimateReport> {
    require_valid(expr, set)?;
    let terms = expr
        .terms
        .iter()
        .enumerate()
        .map(|(t, term)| estimate_term(rho, set, term, shots_per_term, seed, t as u64))
        .collect::<Result<Vec<_>>>()?;
    Ok(EstimateReport::from_terms(seed, shots_per_term, terms))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalReport {
    /// Fraction of +1 outcomes for the label within the first context.
    pub freq_plus_first: f64,
    pub freq_plus_second: f64,
    pub shots: u64,
    /// Two-proportion z statistic; 0 when both samples are constant and equal.
    pub z: f64,
}

/// Compares the outcome distribution of `label` measured within two different contexts.
pub fn marginal_consistency(
    rho: &DensityMatrix,
    set: &ObservableSet,
    label: &ObservableLabel,
    contexts: [&[ObservableLabel]; 2],
    shots: u64,
    seed: u64,
) -> Result<MarginalReport> {
    if shots == 0 {
        return Err(Error::invalid("shots must be positive"));
    }
    if rho.dim() != set.dimension() {
        return Err(Error::invalid("state and observables differ in dimension"));
    }
    let mut freqs = [0.0; 2];
    for (stream, ctx) in contexts.iter().enumerate() {
        let pos = ctx
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::invalid(format!("{label} is not in context {stream}")))?;
        let plan = MeasurementPlan::new(set, ctx)?;
        let mut plus = 0u64;
        for shot in 0..shots {
            let mut rng = shot_rng(seed, stream as u64, plan.len(), shot);
            let record = plan.run(rho, &mut rng)?;
            if record.outcomes[pos].1 == Sign::Plus {
                plus += 1;
            }
        }
        freqs[stream] = plus as f64 / shots as f64;
    }
    let n = shots as f64;
    let pooled = (freqs[0] + freqs[1]) / 2.0;
    let var = pooled * (1.0 - pooled) * (2.0 / n);
    let diff = freqs[0] - freqs[1];
    let z = if var > 0.0 {
        diff / var.sqrt()
    } else if diff == 0.0 {
        0.0
    } else {
        return Err(Error::NumericFailure("degenerate z statistic".to_string()));
    };
    Ok(MarginalReport { freq_plus_first: freqs[0], freq_plus_second: freqs[1], shots, z })
}
