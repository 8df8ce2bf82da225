//! Inequalities as sums of signed products of observable labels.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Mul, Neg};
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::observables::{
    check_mermin_n, compatible, mermin_label_a, mermin_mixed_contexts, ObservableLabel, ObservableSet,
    SetId, KS18_CONTEXTS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.value() as f64
    }

    pub fn from_value(v: i64) -> Result<Self> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(Error::invalid(format!("sign must be +1 or -1, got {v}"))),
        }
    }
}

impl Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// One summand `sign · ⟨F1 F2 …⟩`; an empty factor list is a constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub sign: Sign,
    pub factors: Vec<ObservableLabel>,
}

impl Term {
    pub fn new(sign: Sign, factors: Vec<ObservableLabel>) -> Result<Self> {
        for (i, f) in factors.iter().enumerate() {
            if factors[i + 1..].contains(f) {
                return Err(Error::invalid(format!("factor {f} repeated within a term")));
            }
        }
        Ok(Term { sign, factors })
    }

    fn of(sign: Sign, factors: &[ObservableLabel]) -> Self {
        Term { sign, factors: factors.to_vec() }
    }

    fn key(&self) -> (Sign, Vec<ObservableLabel>) {
        let mut f = self.factors.clone();
        f.sort();
        (self.sign, f)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.sign == Sign::Plus { "+" } else { "-" })?;
        f.write_str("<")?;
        for (i, l) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str(">")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InequalityExpr {
    pub id: String,
    pub set_id: SetId,
    pub terms: Vec<Term>,
    /// Classical bound as recorded for catalog entries; `None` once specialized.
    pub bound: Option<i64>,
}

impl InequalityExpr {
    /// Distinct labels in sorted order.
    pub fn labels(&self) -> Vec<ObservableLabel> {
        let mut out: Vec<ObservableLabel> =
            self.terms.iter().flat_map(|t| t.factors.iter().cloned()).collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn contains_label(&self, label: &ObservableLabel) -> bool {
        self.terms.iter().any(|t| t.factors.contains(label))
    }

    /// Terms as a sorted multiset of (sign, sorted factors); ignores term and factor order.
    pub fn term_multiset(&self) -> Vec<(Sign, Vec<ObservableLabel>)> {
        let mut keys: Vec<_> = self.terms.iter().map(Term::key).collect();
        keys.sort();
        keys
    }

    /// Replaces every occurrence of `label` by `−label`.
    pub fn flip_label(&self, label: &ObservableLabel) -> InequalityExpr {
        let mut out = self.clone();
        for t in &mut out.terms {
            if t.factors.contains(label) {
                t.sign = -t.sign;
            }
        }
        out
    }

    /// Errors if some factor is not an observable of `set`.
    pub fn check_labels(&self, set: &ObservableSet) -> Result<()> {
        for l in self.labels() {
            if !set.contains(&l) {
                return Err(Error::not_found(format!("observable {l} not in set {}", set.id())));
            }
        }
        Ok(())
    }
}

impl fmt::Display for InequalityExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{t}")?;
        }
        if let Some(b) = self.bound {
            write!(f, " <= {b}")?;
        }
        Ok(())
    }
}

/// Catalog identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CatalogId {
    Ineq1,
    Kcbs3,
    Ineq4,
    Cfrh6,
    Nambu7,
    Chsh8,
    Ineq9,
    Mermin11,
}

impl CatalogId {
    pub const ALL: [CatalogId; 8] = [
        CatalogId::Ineq1,
        CatalogId::Kcbs3,
        CatalogId::Ineq4,
        CatalogId::Cfrh6,
        CatalogId::Nambu7,
        CatalogId::Chsh8,
        CatalogId::Ineq9,
        CatalogId::Mermin11,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CatalogId::Ineq1 => "ineq1",
            CatalogId::Kcbs3 => "kcbs3",
            CatalogId::Ineq4 => "ineq4",
            CatalogId::Cfrh6 => "cfrh6",
            CatalogId::Nambu7 => "nambu7",
            CatalogId::Chsh8 => "chsh8",
            CatalogId::Ineq9 => "ineq9",
            CatalogId::Mermin11 => "mermin11",
        }
    }

    /// Whether the entry is parameterized by a qubit count.
    pub fn needs_n(self) -> bool {
        matches!(self, CatalogId::Ineq9 | CatalogId::Mermin11)
    }
}

impl FromStr for CatalogId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CatalogId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::not_found(format!("unknown inequality '{s}'")))
    }
}

fn ls(names: &[&str]) -> Vec<ObservableLabel> {
    names.iter().map(|&s| ObservableLabel::from(s)).collect()
}

fn expr(id: CatalogId, set_id: SetId, bound: i64, terms: Vec<Term>) -> InequalityExpr {
    InequalityExpr { id: id.as_str().to_string(), set_id, terms, bound: Some(bound) }
}

/// Look up a catalog inequality; `n` is the qubit count for `ineq9` and `mermin11`.
pub fn catalog_get(id: &str, n: Option<usize>) -> Result<InequalityExpr> {
    let cid: CatalogId = id.parse()?;
    let qubits = if cid.needs_n() {
        let n = n.ok_or_else(|| Error::invalid(format!("{id} needs a qubit count n")))?;
        check_mermin_n(n)?;
        n
    } else {
        0
    };
    use Sign::{Minus, Plus};
    let t = |s: Sign, f: &[&str]| Term::of(s, &ls(f));
    Ok(match cid {
        CatalogId::Ineq1 => {
            let terms = KS18_CONTEXTS
                .iter()
                .map(|c| {
                    let f: Vec<ObservableLabel> =
                        c.iter().map(|ij| ObservableLabel::new(format!("A{ij}"))).collect();
                    Term::of(Minus, &f)
                })
                .collect();
            expr(cid, SetId::Ks18, 7, terms)
        }
        CatalogId::Kcbs3 => expr(
            cid,
            SetId::Ks18,
            3,
            vec![
                t(Minus, &["A12", "A18"]),
                t(Minus, &["A12", "A23"]),
                t(Minus, &["A23", "A34"]),
                t(Minus, &["A34", "A48"]),
                t(Minus, &["A18", "A48"]),
            ],
        ),
        CatalogId::Ineq4 => expr(
            cid,
            SetId::PeresMermin,
            4,
            vec![
                t(Plus, &["P14", "P15", "P16"]),
                t(Plus, &["P24", "P25", "P26"]),
                t(Plus, &["P34", "P35", "P36"]),
                t(Plus, &["P14", "P24", "P34"]),
                t(Plus, &["P15", "P25", "P35"]),
                t(Minus, &["P16", "P26", "P36"]),
            ],
        ),
        CatalogId::Cfrh6 => expr(
            cid,
            SetId::PeresMermin,
            3,
            vec![
                t(Minus, &["P14", "P15"]),
                t(Minus, &["P24", "P25"]),
                t(Minus, &["P34", "P35"]),
                t(Plus, &["P14", "P24", "P34"]),
                t(Plus, &["P15", "P25", "P35"]),
            ],
        ),
        CatalogId::Nambu7 => expr(
            cid,
            SetId::PeresMermin,
            4,
            vec![
                t(Plus, &["P14", "P15", "P16"]),
                t(Plus, &["P24", "P25", "P26"]),
                t(Plus, &["P34", "P35"]),
                t(Plus, &["P14", "P24", "P34"]),
                t(Plus, &["P15", "P25", "P35"]),
                t(Minus, &["P16", "P26"]),
            ],
        ),
        CatalogId::Chsh8 => expr(
            cid,
            SetId::PeresMermin,
            2,
            vec![
                t(Plus, &["P14", "P16"]),
                t(Plus, &["P24", "P26"]),
                t(Plus, &["P14", "P24"]),
                t(Minus, &["P16", "P26"]),
            ],
        ),
        CatalogId::Ineq9 => {
            let mut terms: Vec<Term> =
                mermin_mixed_contexts(qubits).iter().map(|c| Term::of(Plus, c)).collect();
            let all_a: Vec<ObservableLabel> = (1..=4).map(mermin_label_a).collect();
            terms.push(Term::of(Minus, &all_a));
            expr(cid, SetId::MerminStar { n: qubits }, 3, terms)
        }
        CatalogId::Mermin11 => {
            let signs = [Plus, Plus, Plus, Minus];
            let terms = mermin_mixed_contexts(qubits)
                .iter()
                .zip(signs)
                .map(|(c, s)| Term::of(s, &c[1..]))
                .collect();
            expr(cid, SetId::MerminStar { n: qubits }, 2, terms)
        }
    })
}

/// Replace observables by ±𝟙.
///
/// Each substituted factor is removed from its term and its sign multiplies the
/// term's sign. Terms left without factors are summed into the returned constant and
/// dropped. The bound is cleared: substitution keeps the inequality valid but not
/// necessarily tight.
pub fn specialize(
    expr: &InequalityExpr,
    subs: &BTreeMap<ObservableLabel, Sign>,
) -> Result<(InequalityExpr, i64)> {
    for l in subs.keys() {
        if !expr.contains_label(l) {
            return Err(Error::not_found(format!("{l} does not occur in {}", expr.id)));
        }
    }
    let mut constant = 0;
    let mut terms = Vec::with_capacity(expr.terms.len());
    for term in &expr.terms {
        let mut sign = term.sign;
        let mut factors = Vec::with_capacity(term.factors.len());
        for f in &term.factors {
            match subs.get(f) {
                Some(&s) => sign = sign * s,
                None => factors.push(f.clone()),
            }
        }
        if factors.is_empty() {
            constant += sign.value();
        } else {
            terms.push(Term { sign, factors });
        }
    }
    let out = InequalityExpr {
        id: format!("{}*", expr.id),
        set_id: expr.set_id,
        terms,
        bound: None,
    };
    Ok((out, constant))
}

/// Pairwise compatibility verdict for one term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermCheck {
    pub term_index: usize,
    /// Factor pairs that do not commute.
    pub incompatible_pairs: Vec<(ObservableLabel, ObservableLabel)>,
    /// Factors missing from the set.
    pub unknown_labels: Vec<ObservableLabel>,
}

impl TermCheck {
    pub fn passed(&self) -> bool {
        self.incompatible_pairs.is_empty() && self.unknown_labels.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextReport {
    pub terms: Vec<TermCheck>,
}

impl ContextReport {
    pub fn passed(&self) -> bool {
        self.terms.iter().all(TermCheck::passed)
    }
}

/// Checks that the factors of each term pairwise commute in `set`.
pub fn validate_contexts(expr: &InequalityExpr, set: &ObservableSet) -> ContextReport {
    let terms = expr
        .terms
        .iter()
        .enumerate()
        .map(|(term_index, term)| {
            let unknown_labels: Vec<ObservableLabel> =
                term.factors.iter().filter(|f| !set.contains(f)).cloned().collect();
            let mut incompatible_pairs = Vec::new();
            for (i, a) in term.factors.iter().enumerate() {
                for b in &term.factors[i + 1..] {
                    if let Ok(false) = compatible(set, a, b) {
                        incompatible_pairs.push((a.clone(), b.clone()));
                    }
                }
            }
            TermCheck { term_index, incompatible_pairs, unknown_labels }
        })
        .collect();
    ContextReport { terms }
}
