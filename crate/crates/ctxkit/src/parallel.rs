//! Rayon drivers. Results never depend on the thread count: work is split into
//! fixed blocks or per-index streams and merged in index order.

use ctxkit_core::catalog::InequalityExpr;
use ctxkit_core::linalg::DensityMatrix;
use ctxkit_core::observables::ObservableSet;
use ctxkit_core::quantum::{haar_state, require_valid, CompiledInequality};
use ctxkit_core::sim::{estimate_term, EstimateReport};
use ctxkit_core::solver::{BlockBest, BoundResult, CompiledExpr};
use ctxkit_core::{Error, Result};
use rayon::prelude::*;

/// Environment variable capping worker threads; 0 or unset means one per core.
pub const THREADS_ENV: &str = "CTXKIT_THREADS";

/// Fixed block count for the bound search, independent of the machine.
const BOUND_BLOCKS: usize = 64;

pub fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("{THREADS_ENV}={v} is not a count"))),
    }
}

pub fn pool() -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| Error::Internal(e.to_string()))
}

/// Same result as `solver::classical_bound`, with blocks searched concurrently.
pub fn classical_bound(expr: &InequalityExpr) -> Result<BoundResult> {
    let compiled = CompiledExpr::new(expr)?;
    let high = compiled.high_bits_for(BOUND_BLOCKS);
    let best = pool()?.install(|| {
        (0..1u32 << high)
            .into_par_iter()
            .map(|b| compiled.search_block(high, b))
            .reduce_with(BlockBest::merge)
    });
    let best = best.ok_or_else(|| Error::Internal("empty search".into()))?;
    Ok(compiled.finish(best))
}

/// Values of the inequality at Haar states `0..count`; state `i` is `haar_state(d, seed, i)`.
pub fn haar_sweep(set: &ObservableSet, expr: &InequalityExpr, count: u64, seed: u64) -> Result<Vec<f64>> {
    let compiled = CompiledInequality::new(set, expr)?;
    let d = set.dimension();
    pool()?.install(|| {
        (0..count)
            .into_par_iter()
            .map(|i| compiled.evaluate_pure(&haar_state(d, seed, i)?))
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSummary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

pub fn summarize(values: &[f64]) -> Option<SweepSummary> {
    if values.is_empty() {
        return None;
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // sequential sum keeps the mean bit-stable
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Some(SweepSummary { min, max, mean })
}

/// Same result as `sim::run_protocol`, with terms estimated concurrently.
pub fn run_protocol(
    rho: &DensityMatrix,
    set: &ObservableSet,
    expr: &InequalityExpr,
    shots_per_term: u64,
    seed: u64,
) -> Result<EstimateReport> {
    require_valid(expr, set)?;
    let terms = pool()?.install(|| {
        expr.terms
            .par_iter()
            .enumerate()
            .map(|(t, term)| estimate_term(rho, set, term, shots_per_term, seed, t as u64))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(EstimateReport::from_terms(seed, shots_per_term, terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ctxkit_core::catalog_get;
    use ctxkit_core::observables::build_peres_mermin;
    use ctxkit_core::solver;

    #[test]
    fn parallel_bound_matches_sequential() {
        for (id, n) in [("ineq1", None), ("ineq4", None), ("kcbs3", None), ("ineq9", Some(5)), ("mermin11", Some(3))] {
            let e = catalog_get(id, n).unwrap();
            assert_eq!(classical_bound(&e).unwrap(), solver::classical_bound(&e).unwrap(), "{id}");
        }
    }

    #[test]
    fn parallel_protocol_matches_sequential() {
        let pm = build_peres_mermin().unwrap();
        let e = catalog_get("cfrh6", None).unwrap();
        let rho = haar_state(4, 3, 0).unwrap().density();
        let a = run_protocol(&rho, &pm, &e, 200, 17).unwrap();
        let b = ctxkit_core::sim::run_protocol(&rho, &pm, &e, 200, 17).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn summary_of_values() {
        let s = summarize(&[1.0, 3.0, 2.0]).unwrap();
        assert_eq!((s.min, s.max, s.mean), (1.0, 3.0, 2.0));
        assert!(summarize(&[]).is_none());
    }
}
