//! Kochen-Specker colorability and the parity counting argument.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::catalog::Sign;
use crate::error::{Error, Result};
use crate::observables::{ObservableLabel, ObservableSet, RaySet};
use crate::quantum::{context_product, ContextProduct};

/// Outcome of the 0/1 coloring search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Colorability {
    /// Rays assigned 1; every other ray is 0.
    Sat(Vec<ObservableLabel>),
    Unsat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringReport {
    pub verdict: Colorability,
    /// Search nodes visited.
    pub nodes: u64,
}

/// Looks for a 0/1 assignment with exactly one 1 in every context.
///
/// Backtracks over contexts in order: a context that already holds a 1 forces its
/// other rays to 0, otherwise each unassigned ray is tried as the 1.
pub fn ks_colorable(rays: &RaySet) -> Result<ColoringReport> {
    let labels: Vec<&ObservableLabel> = rays.rays().iter().map(|(l, _)| l).collect();
    let index: BTreeMap<&ObservableLabel, usize> =
        labels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let mut contexts = Vec::with_capacity(rays.contexts().len());
    for ctx in rays.contexts() {
        if ctx.len() != 4 {
            return Err(Error::invalid(format!("context of size {} (expected 4)", ctx.len())));
        }
        let idx = ctx
            .iter()
            .map(|l| index.get(l).copied().ok_or_else(|| Error::not_found(format!("ray {l}"))))
            .collect::<Result<Vec<usize>>>()?;
        contexts.push(idx);
    }

    let mut search = Search { contexts: &contexts, values: vec![None; labels.len()], nodes: 0 };
    let verdict = if search.solve(0) {
        // rays outside every context are free; leave them at 0
        let ones = search
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v == Some(true))
            .map(|(i, _)| labels[i].clone())
            .collect();
        Colorability::Sat(ones)
    } else {
        Colorability::Unsat
    };
    Ok(ColoringReport { verdict, nodes: search.nodes })
}

struct Search<'a> {
    contexts: &'a [Vec<usize>],
    values: Vec<Option<bool>>,
    nodes: u64,
}

impl Search<'_> {
    fn solve(&mut self, ctx_index: usize) -> bool {
        self.nodes += 1;
        let Some(ctx) = self.contexts.get(ctx_index) else {
            return true;
        };
        let ones = ctx.iter().filter(|&&r| self.values[r] == Some(true)).count();
        let free: Vec<usize> = ctx.iter().copied().filter(|&r| self.values[r].is_none()).collect();
        match ones {
            0 => {
                for &pick in &free {
                    for &r in &free {
                        self.values[r] = Some(r == pick);
                    }
                    if self.solve(ctx_index + 1) {
                        return true;
                    }
                }
                for &r in &free {
                    self.values[r] = None;
                }
                false
            }
            1 => {
                for &r in &free {
                    self.values[r] = Some(false);
                }
                if self.solve(ctx_index + 1) {
                    return true;
                }
                for &r in &free {
                    self.values[r] = None;
                }
                false
            }
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityStats {
    pub context_count: usize,
    pub occurrences: BTreeMap<ObservableLabel, usize>,
    /// Contexts whose operator product is −𝟙.
    pub minus_contexts: usize,
    /// Contexts whose product is not ±𝟙.
    pub non_scalar_contexts: usize,
    /// Odd number of −𝟙 contexts, every context ±𝟙, every observable in an even number of contexts.
    pub parity_contradiction: bool,
}

impl ParityStats {
    pub fn all_occurrences_even(&self) -> bool {
        self.occurrences.values().all(|n| n.is_multiple_of(2))
    }
}

/// Context count, per-label occurrence counts and the parity verdict.
///
/// Under any noncontextual ±1 assignment the product of all context products is
/// +1 when each observable appears an even number of times, while the operator
/// identities force it to (−1)^(number of −𝟙 contexts).
pub fn parity_stats(set: &ObservableSet) -> Result<ParityStats> {
    let mut occurrences: BTreeMap<ObservableLabel, usize> =
        set.labels().iter().map(|l| (l.clone(), 0)).collect();
    let mut minus_contexts = 0;
    let mut non_scalar_contexts = 0;
    for ctx in set.contexts() {
        for l in ctx {
            *occurrences.entry(l.clone()).or_default() += 1;
        }
        match context_product(set, ctx)? {
            ContextProduct::Identity(Sign::Minus) => minus_contexts += 1,
            ContextProduct::Identity(Sign::Plus) => {}
            ContextProduct::NotIdentity { .. } => non_scalar_contexts += 1,
        }
    }
    // labels that never occur do not enter the count
    occurrences.retain(|_, n| *n > 0);
    let mut stats = ParityStats {
        context_count: set.contexts().len(),
        occurrences,
        minus_contexts,
        non_scalar_contexts,
        parity_contradiction: false,
    };
    stats.parity_contradiction =
        non_scalar_contexts == 0 && !minus_contexts.is_multiple_of(2) && stats.all_occurrences_even();
    Ok(stats)
}

/// Parity statistics of the observables `2|v⟩⟨v| − 𝟙` built from a ray set.
pub fn ray_parity_stats(rays: &RaySet) -> Result<ParityStats> {
    parity_stats(&rays.observable_set()?)
}
