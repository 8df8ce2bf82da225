//! Exact classical (noncontextual) bounds by exhaustive enumeration.
//!
//! With `m` distinct labels sorted ascending, an assignment is encoded as an
//! `m`-bit code where label `i` sits at bit `m − 1 − i` and a set bit means `+1`.
//! Numeric order on codes is then lexicographic order on assignments with
//! `−1 < +1`, so the canonical witness is the smallest maximizing code.
//!
//! The code space is split into `2^high_bits` blocks that differ in their top bits.
//! Each block is walked in reflected Gray-code order over its low bits, so every step
//! flips one label and only the terms containing it are updated. Blocks are
//! independent and merge by (max value, min code), which is what the parallel
//! driver in the `ctxkit` crate relies on.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::catalog::{InequalityExpr, Sign};
use crate::error::{Error, Result};
use crate::observables::ObservableLabel;

/// Largest number of distinct labels accepted.
pub const MAX_LABELS: usize = 30;

/// A noncontextual ±1 valuation, keyed by label.
pub type Assignment = BTreeMap<ObservableLabel, Sign>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundResult {
    pub bound: i64,
    pub witness: Assignment,
    /// Number of assignments examined (`2^m`).
    pub evaluations: u64,
}

/// Best value found in part of the code space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockBest {
    pub value: i64,
    pub code: u32,
    pub evaluations: u64,
}

impl BlockBest {
    pub fn merge(self, other: BlockBest) -> BlockBest {
        let (value, code) = if other.value > self.value
            || (other.value == self.value && other.code < self.code)
        {
            (other.value, other.code)
        } else {
            (self.value, self.code)
        };
        BlockBest { value, code, evaluations: self.evaluations + other.evaluations }
    }
}

/// An expression compiled to label bitmasks.
#[derive(Debug, Clone)]
pub struct CompiledExpr {
    labels: Vec<ObservableLabel>,
    /// (sign, mask) per term with at least one factor.
    terms: Vec<(i64, u32)>,
    /// Sum of factor-free terms.
    constant: i64,
}

impl CompiledExpr {
    pub fn new(expr: &InequalityExpr) -> Result<Self> {
        let labels = expr.labels();
        let m = labels.len();
        if m > MAX_LABELS {
            return Err(Error::ResourceLimit(format!(
                "{} has {m} labels; exhaustive search is capped at {MAX_LABELS}",
                expr.id
            )));
        }
        let mut constant = 0;
        let mut terms = Vec::with_capacity(expr.terms.len());
        for t in &expr.terms {
            if t.factors.is_empty() {
                constant += t.sign.value();
                continue;
            }
            let mut mask = 0u32;
            for f in &t.factors {
                // labels() is sorted and deduplicated
                let i = labels.binary_search(f).map_err(|_| Error::Internal(format!("lost {f}")))?;
                mask ^= 1 << (m - 1 - i);
            }
            terms.push((t.sign.value(), mask));
        }
        Ok(CompiledExpr { labels, terms, constant })
    }

    pub fn label_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[ObservableLabel] {
        &self.labels
    }

    /// Direct evaluation of one assignment code.
    pub fn evaluate(&self, code: u32) -> i64 {
        self.constant
            + self
                .terms
                .iter()
                .map(|&(s, mask)| if (!code & mask).count_ones().is_multiple_of(2) { s } else { -s })
                .sum::<i64>()
    }

    /// Number of top bits to split on for about `blocks` blocks.
    pub fn high_bits_for(&self, blocks: usize) -> u32 {
        let want = blocks.max(1).next_power_of_two().trailing_zeros();
        want.min(self.label_count() as u32)
    }

    /// Exhaustive search of block `block` when the top `high_bits` bits are fixed.
    pub fn search_block(&self, high_bits: u32, block: u32) -> BlockBest {
        let m = self.label_count() as u32;
        let high_bits = high_bits.min(m);
        let low_bits = m - high_bits;
        debug_assert!(u64::from(block) < 1u64 << high_bits);
        let base = if low_bits == 32 { 0 } else { block << low_bits };

        // terms touched by each low bit
        let mut touching: Vec<Vec<usize>> = vec![Vec::new(); low_bits as usize];
        for (ti, &(_, mask)) in self.terms.iter().enumerate() {
            for (b, list) in touching.iter_mut().enumerate() {
                if mask & (1 << b) != 0 {
                    list.push(ti);
                }
            }
        }
        let mut values: Vec<i64> = self
            .terms
            .iter()
            .map(|&(s, mask)| if (!base & mask).count_ones().is_multiple_of(2) { s } else { -s })
            .collect();
        let mut sum = self.constant + values.iter().sum::<i64>();
        let mut code = base;
        let mut best = BlockBest { value: sum, code, evaluations: 1 };
        let steps: u64 = 1u64 << low_bits;
        for step in 1..steps {
            let bit = step.trailing_zeros() as usize;
            code ^= 1 << bit;
            for &ti in &touching[bit] {
                sum -= 2 * values[ti];
                values[ti] = -values[ti];
            }
            if sum > best.value || (sum == best.value && code < best.code) {
                best.value = sum;
                best.code = code;
            }
        }
        best.evaluations = steps;
        best
    }

    /// Assignment for a code.
    pub fn assignment(&self, code: u32) -> Assignment {
        let m = self.label_count();
        self.labels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let plus = code & (1 << (m - 1 - i)) != 0;
                (l.clone(), if plus { Sign::Plus } else { Sign::Minus })
            })
            .collect()
    }

    pub fn finish(&self, best: BlockBest) -> BoundResult {
        BoundResult { bound: best.value, witness: self.assignment(best.code), evaluations: best.evaluations }
    }
}

/// Exact maximum of the expression over all ±1 assignments, single-threaded.
pub fn classical_bound(expr: &InequalityExpr) -> Result<BoundResult> {
    let compiled = CompiledExpr::new(expr)?;
    let best = compiled.search_block(0, 0);
    Ok(compiled.finish(best))
}

/// True iff the bound is unchanged by relabeling `label → −label`.
pub fn bound_sign_flip_check(expr: &InequalityExpr, label: &ObservableLabel) -> Result<bool> {
    if !expr.contains_label(label) {
        return Err(Error::not_found(format!("{label} does not occur in {}", expr.id)));
    }
    let before = classical_bound(expr)?.bound;
    let after = classical_bound(&expr.flip_label(label))?.bound;
    Ok(before == after)
}

/// Value of the expression under an explicit assignment.
pub fn evaluate_assignment(expr: &InequalityExpr, assignment: &Assignment) -> Result<i64> {
    let mut total = 0;
    for t in &expr.terms {
        let mut s = t.sign;
        for f in &t.factors {
            let v = assignment
                .get(f)
                .ok_or_else(|| Error::not_found(format!("assignment has no value for {f}")))?;
            s = s * *v;
        }
        total += s.value();
    }
    Ok(total)
}
