//! Labeled families of dichotomic observables and the 18-ray set.
//!
//! Three families are provided:
//!
//! - `ks18`: eighteen observables `A_ij = 2|v_ij⟩⟨v_ij| − 𝟙` in dimension 4, one per ray,
//!   grouped into nine orthogonal bases. Ray `v_ij` lies in bases `i` and `j`.
//! - `peres_mermin`: the nine two-qubit Pauli observables `P_ij` of the magic square.
//! - `mermin_star`: `4 + 2n` Pauli observables on `n` qubits (n odd, n ≥ 3).

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;


// sqrt and trig resolve to libm unless some dependency links std
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{commutes, is_involution, kron_all, pauli, ComplexMatrix, C64, TOL};

/// Largest Mermin-star size the dense builders accept.
pub const MAX_MERMIN_QUBITS: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObservableLabel(String);

impl ObservableLabel {
    pub fn new(s: impl Into<String>) -> Self {
        ObservableLabel(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ObservableLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ObservableLabel {
    fn from(s: &str) -> Self {
        ObservableLabel(s.into())
    }
}

/// Which observable family an inequality targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SetId {
    Ks18,
    PeresMermin,
    MerminStar { n: usize },
}

impl SetId {
    pub fn build(self) -> Result<ObservableSet> {
        match self {
            SetId::Ks18 => Ok(build_ks18()?.1),
            SetId::PeresMermin => build_peres_mermin(),
            SetId::MerminStar { n } => build_mermin_star(n),
        }
    }

    pub fn dimension(self) -> usize {
        match self {
            SetId::Ks18 | SetId::PeresMermin => 4,
            SetId::MerminStar { n } => 1 << n,
        }
    }
}

impl fmt::Display for SetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetId::Ks18 => f.write_str("ks18"),
            SetId::PeresMermin => f.write_str("peres_mermin"),
            SetId::MerminStar { n } => write!(f, "mermin_star:{n}"),
        }
    }
}

impl FromStr for SetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ks18" => Ok(SetId::Ks18),
            "peres_mermin" | "pm" => Ok(SetId::PeresMermin),
            _ => {
                let n = s
                    .strip_prefix("mermin_star:")
                    .ok_or_else(|| Error::not_found(format!("unknown observable set '{s}'")))?;
                let n: usize =
                    n.parse().map_err(|_| Error::invalid(format!("bad qubit count in '{s}'")))?;
                check_mermin_n(n)?;
                Ok(SetId::MerminStar { n })
            }
        }
    }
}

/// A labeled family of ±1-valued observables on one Hilbert space, with its contexts.
#[derive(Debug, Clone)]
pub struct ObservableSet {
    id: SetId,
    dimension: usize,
    labels: Vec<ObservableLabel>,
    operators: Vec<ComplexMatrix>,
    index: BTreeMap<ObservableLabel, usize>,
    contexts: Vec<Vec<ObservableLabel>>,
}

impl ObservableSet {
    /// Validates that each operator is an involution and each context pairwise commutes.
    pub fn new(
        id: SetId,
        dimension: usize,
        observables: Vec<(ObservableLabel, ComplexMatrix)>,
        contexts: Vec<Vec<ObservableLabel>>,
    ) -> Result<Self> {
        let mut index = BTreeMap::new();
        let mut labels = Vec::with_capacity(observables.len());
        let mut operators = Vec::with_capacity(observables.len());
        for (label, op) in observables {
            if !op.is_square() || op.dim() != dimension {
                return Err(Error::invalid(format!("{label} has the wrong dimension")));
            }
            if !is_involution(&op, TOL) {
                return Err(Error::invalid(format!("{label} is not a Hermitian involution")));
            }
            if index.insert(label.clone(), labels.len()).is_some() {
                return Err(Error::invalid(format!("duplicate label {label}")));
            }
            labels.push(label);
            operators.push(op);
        }
        let set = ObservableSet { id, dimension, labels, operators, index, contexts };
        for ctx in &set.contexts {
            set.check_commuting(ctx)?;
        }
        Ok(set)
    }

    pub fn id(&self) -> SetId {
        self.id
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn labels(&self) -> &[ObservableLabel] {
        &self.labels
    }

    pub fn contexts(&self) -> &[Vec<ObservableLabel>] {
        &self.contexts
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn contains(&self, label: &ObservableLabel) -> bool {
        self.index.contains_key(label)
    }

    pub fn operator(&self, label: &ObservableLabel) -> Result<&ComplexMatrix> {
        self.index
            .get(label)
            .map(|&i| &self.operators[i])
            .ok_or_else(|| Error::not_found(format!("observable {label} not in set {}", self.id)))
    }

    /// Errors with `InvalidContext` if any pair of the listed observables fails to commute.
    pub fn check_commuting(&self, labels: &[ObservableLabel]) -> Result<()> {
        for (i, a) in labels.iter().enumerate() {
            for b in &labels[i + 1..] {
                if !compatible(self, a, b)? {
                    return Err(Error::InvalidContext(format!("{a} and {b} do not commute")));
                }
            }
        }
        Ok(())
    }
}

/// True iff the two observables commute at tolerance 1e-9.
pub fn compatible(set: &ObservableSet, a: &ObservableLabel, b: &ObservableLabel) -> Result<bool> {
    commutes(set.operator(a)?, set.operator(b)?, TOL)
}

/// Real rays in dimension 4 with integer coordinates, grouped into contexts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RaySet {
    rays: Vec<(ObservableLabel, [i32; 4])>,
    contexts: Vec<Vec<ObservableLabel>>,
}

impl RaySet {
    /// Checks that every context has 4 known, pairwise orthogonal, distinct rays.
    pub fn new(rays: Vec<(ObservableLabel, [i32; 4])>, contexts: Vec<Vec<ObservableLabel>>) -> Result<Self> {
        let set = RaySet { rays, contexts };
        let mut seen = BTreeMap::new();
        for (label, v) in &set.rays {
            if v.iter().all(|&x| x == 0) {
                return Err(Error::invalid(format!("ray {label} is zero")));
            }
            if seen.insert(label.clone(), ()).is_some() {
                return Err(Error::invalid(format!("duplicate ray {label}")));
            }
        }
        for ctx in &set.contexts {
            if ctx.len() != 4 {
                return Err(Error::invalid(format!("context of size {} (expected 4)", ctx.len())));
            }
            for (i, a) in ctx.iter().enumerate() {
                let va = set.ray(a)?;
                for b in &ctx[i + 1..] {
                    if a == b {
                        return Err(Error::invalid(format!("ray {a} repeated in a context")));
                    }
                    let vb = set.ray(b)?;
                    let dot: i32 = va.iter().zip(vb).map(|(x, y)| x * y).sum();
                    if dot != 0 {
                        return Err(Error::invalid(format!("rays {a} and {b} are not orthogonal")));
                    }
                }
            }
        }
        Ok(set)
    }

    pub fn rays(&self) -> &[(ObservableLabel, [i32; 4])] {
        &self.rays
    }

    pub fn contexts(&self) -> &[Vec<ObservableLabel>] {
        &self.contexts
    }

    pub fn ray(&self, label: &ObservableLabel) -> Result<&[i32; 4]> {
        self.rays
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, v)| v)
            .ok_or_else(|| Error::not_found(format!("ray {label}")))
    }

    /// Number of contexts each ray belongs to.
    pub fn occurrences(&self) -> BTreeMap<ObservableLabel, usize> {
        let mut occ: BTreeMap<ObservableLabel, usize> =
            self.rays.iter().map(|(l, _)| (l.clone(), 0)).collect();
        for ctx in &self.contexts {
            for l in ctx {
                *occ.entry(l.clone()).or_default() += 1;
            }
        }
        occ
    }

    /// The observables `2|v⟩⟨v| − 𝟙`, labeled `A` + ray suffix (ray `v12` gives `A12`).
    pub fn observable_set(&self) -> Result<ObservableSet> {
        let observables = self
            .rays
            .iter()
            .map(|(l, v)| (ray_to_observable_label(l), ray_observable(v)))
            .collect();
        let contexts = self
            .contexts
            .iter()
            .map(|c| c.iter().map(ray_to_observable_label).collect())
            .collect();
        ObservableSet::new(SetId::Ks18, 4, observables, contexts)
    }
}

fn ray_to_observable_label(l: &ObservableLabel) -> ObservableLabel {
    let s = l.as_str();
    ObservableLabel::new(format!("A{}", s.strip_prefix('v').unwrap_or(s)))
}

/// `2|v⟩⟨v| − 𝟙` for the normalized integer ray `v`.
pub fn ray_observable(v: &[i32; 4]) -> ComplexMatrix {
    let norm = (v.iter().map(|&x| (x * x) as f64).sum::<f64>()).sqrt();
    let unit: Vec<C64> = v.iter().map(|&x| C64::new(x as f64 / norm, 0.0)).collect();
    let proj = ComplexMatrix::outer(&unit).scale(C64::new(2.0, 0.0));
    &proj - &ComplexMatrix::identity(4)
}

/// Ray coordinates by two-digit index `ij`: ray `v_ij` lies in bases `i` and `j`.
const KS18_RAYS: [(u8, [i32; 4]); 18] = [
    (12, [0, 1, 0, 0]),
    (16, [1, 0, 1, 0]),
    (17, [1, 0, -1, 0]),
    (18, [0, 0, 0, 1]),
    (23, [1, 0, 0, -1]),
    (28, [0, 0, 1, 0]),
    (29, [1, 0, 0, 1]),
    (34, [1, -1, -1, 1]),
    (37, [1, 1, 1, 1]),
    (39, [0, 1, -1, 0]),
    (45, [0, 0, 1, 1]),
    (47, [1, -1, 1, -1]),
    (48, [1, 1, 0, 0]),
    (56, [1, 1, -1, 1]),
    (58, [1, -1, 0, 0]),
    (59, [1, 1, 1, -1]),
    (67, [0, 1, 0, -1]),
    (69, [-1, 1, 1, 1]),
];

/// The nine bases, in the order of the nine terms of the 18-observable inequality.
pub const KS18_CONTEXTS: [[u8; 4]; 9] = [
    [12, 16, 17, 18],
    [12, 23, 28, 29],
    [23, 34, 37, 39],
    [34, 45, 47, 48],
    [45, 56, 58, 59],
    [16, 56, 67, 69],
    [17, 37, 47, 67],
    [18, 28, 48, 58],
    [29, 39, 59, 69],
];

/// A relabeling of the nine bases; `perm[b − 1]` is the image of basis `b`.
pub type BasisPermutation = [u8; 9];

pub const IDENTITY_RELABELING: BasisPermutation = [1, 2, 3, 4, 5, 6, 7, 8, 9];

fn ks18_ray(ij: u8) -> Option<&'static [i32; 4]> {
    let (i, j) = (ij / 10, ij % 10);
    let key = if i < j { ij } else { j * 10 + i };
    KS18_RAYS.iter().find(|(k, _)| *k == key).map(|(_, v)| v)
}

/// The embedded 18-ray set and its observables.
pub fn build_ks18() -> Result<(RaySet, ObservableSet)> {
    build_ks18_relabeled(&IDENTITY_RELABELING)
}

/// The 18-ray set with observable `A_ij` attached to ray `v_{σ(i)σ(j)}`.
///
/// `σ` must be an automorphism of the basis incidence graph (see [`ks18_relabelings`]),
/// otherwise some context stops being orthogonal and construction fails.
pub fn build_ks18_relabeled(perm: &BasisPermutation) -> Result<(RaySet, ObservableSet)> {
    let image = |b: u8| -> Result<u8> {
        match b {
            1..=9 => Ok(perm[(b - 1) as usize]),
            _ => Err(Error::invalid("basis index out of range")),
        }
    };
    let mut rays = Vec::with_capacity(18);
    for (ij, _) in KS18_RAYS {
        let mapped = image(ij / 10)? * 10 + image(ij % 10)?;
        let v = ks18_ray(mapped)
            .ok_or_else(|| Error::invalid(format!("relabeling maps ray {ij} to a non-ray")))?;
        rays.push((ObservableLabel::new(format!("v{ij}")), *v));
    }
    let contexts = KS18_CONTEXTS
        .iter()
        .map(|c| c.iter().map(|ij| ObservableLabel::new(format!("v{ij}"))).collect())
        .collect();
    let rayset = RaySet::new(rays, contexts)?;
    if rayset.contexts().len() != 9 || rayset.occurrences().values().any(|&n| n != 2) {
        return Err(Error::Internal("18-ray incidence structure is broken".to_string()));
    }
    let obs = rayset.observable_set()?;
    Ok((rayset, obs))
}

/// Relabelings of the nine bases that preserve the incidence graph and map the
/// hexagon of bases 1–6 onto itself (the 12 symmetries of the hexagon).
pub fn ks18_relabelings() -> Vec<BasisPermutation> {
    let hexagon = [1u8, 2, 3, 4, 5, 6];
    let neighbours = |b: u8| -> Vec<u8> {
        let mut n: Vec<u8> = KS18_RAYS
            .iter()
            .filter_map(|(ij, _)| {
                let (i, j) = (ij / 10, ij % 10);
                if i == b {
                    Some(j)
                } else if j == b {
                    Some(i)
                } else {
                    None
                }
            })
            .collect();
        n.sort_unstable();
        n
    };
    let is_edge = |a: u8, b: u8| ks18_ray(a * 10 + b).is_some();
    let mut out = Vec::new();
    for shift in 0..6 {
        for reflect in [false, true] {
            let mut perm = [0u8; 9];
            for (k, &b) in hexagon.iter().enumerate() {
                let pos = if reflect { (6 + shift - k) % 6 } else { (shift + k) % 6 };
                perm[(b - 1) as usize] = hexagon[pos];
            }
            // each rectangle basis is fixed by its hexagon neighbourhood
            let mut ok = true;
            for r in 7..=9u8 {
                let mut image: Vec<u8> =
                    neighbours(r).iter().map(|&b| perm[(b - 1) as usize]).collect();
                image.sort_unstable();
                match (7..=9u8).find(|&r2| neighbours(r2) == image) {
                    Some(r2) => perm[(r - 1) as usize] = r2,
                    None => ok = false,
                }
            }
            ok = ok
                && KS18_RAYS.iter().all(|(ij, _)| {
                    is_edge(perm[(ij / 10 - 1) as usize], perm[(ij % 10 - 1) as usize])
                });
            if ok {
                out.push(perm);
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn label(s: &str) -> ObservableLabel {
    ObservableLabel::new(s)
}

fn labels(ls: &[&str]) -> Vec<ObservableLabel> {
    ls.iter().map(|s| label(s)).collect()
}

/// Peres-Mermin square: rows {P_i4, P_i5, P_i6} and columns {P_1j, P_2j, P_3j}.
pub fn build_peres_mermin() -> Result<ObservableSet> {
    use pauli::{i2, x, y, z};
    let two = |a: ComplexMatrix, b: ComplexMatrix| kron_all(&[a, b]);
    let observables = vec![
        (label("P14"), two(z(), i2())?),
        (label("P15"), two(i2(), z())?),
        (label("P16"), two(z(), z())?),
        (label("P24"), two(i2(), x())?),
        (label("P25"), two(x(), i2())?),
        (label("P26"), two(x(), x())?),
        (label("P34"), two(z(), x())?),
        (label("P35"), two(x(), z())?),
        (label("P36"), two(y(), y())?),
    ];
    let contexts = vec![
        labels(&["P14", "P15", "P16"]),
        labels(&["P24", "P25", "P26"]),
        labels(&["P34", "P35", "P36"]),
        labels(&["P14", "P24", "P34"]),
        labels(&["P15", "P25", "P35"]),
        labels(&["P16", "P26", "P36"]),
    ];
    ObservableSet::new(SetId::PeresMermin, 4, observables, contexts)
}

pub(crate) fn check_mermin_n(n: usize) -> Result<()> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::invalid(format!("Mermin star needs an odd qubit count ≥ 3, got {n}")));
    }
    if n > MAX_MERMIN_QUBITS {
        return Err(Error::ResourceLimit(format!(
            "Mermin star with {n} qubits exceeds the cap of {MAX_MERMIN_QUBITS}"
        )));
    }
    Ok(())
}

/// Labels `ACAL1..ACAL4`, `B1..Bn`, `C1..Cn` for the Mermin-star family.
pub fn mermin_label_a(k: usize) -> ObservableLabel {
    ObservableLabel::new(format!("ACAL{k}"))
}

pub fn mermin_label_b(i: usize) -> ObservableLabel {
    ObservableLabel::new(format!("B{i}"))
}

pub fn mermin_label_c(i: usize) -> ObservableLabel {
    ObservableLabel::new(format!("C{i}"))
}

/// Factor lists of the four mixed contexts, in term order.
pub(crate) fn mermin_mixed_contexts(n: usize) -> [Vec<ObservableLabel>; 4] {
    let tail = |f: fn(usize) -> ObservableLabel| (3..=n).map(f).collect::<Vec<_>>();
    let ctx = |a: usize, first: ObservableLabel, second: ObservableLabel, rest: Vec<ObservableLabel>| {
        let mut v = vec![mermin_label_a(a), first, second];
        v.extend(rest);
        v
    };
    [
        ctx(1, mermin_label_b(1), mermin_label_b(2), tail(mermin_label_b)),
        ctx(2, mermin_label_b(1), mermin_label_c(2), tail(mermin_label_c)),
        ctx(3, mermin_label_c(1), mermin_label_b(2), tail(mermin_label_c)),
        ctx(4, mermin_label_c(1), mermin_label_c(2), tail(mermin_label_b)),
    ]
}

/// Mermin star on `n` qubits: `𝒜1 = Z…Z`, `𝒜2 = Z X X…X`, `𝒜3 = X Z X…X`,
/// `𝒜4 = X X Z…Z`, `ℬi = Z_i`, `𝒞i = X_i`.
pub fn build_mermin_star(n: usize) -> Result<ObservableSet> {
    check_mermin_n(n)?;
    use pauli::{i2, x, z};
    let string = |first: fn() -> ComplexMatrix, second: fn() -> ComplexMatrix, rest: fn() -> ComplexMatrix| {
        let mut f = vec![first(), second()];
        f.extend((2..n).map(|_| rest()));
        kron_all(&f)
    };
    let single = |q: usize, p: fn() -> ComplexMatrix| {
        let f: Vec<ComplexMatrix> = (0..n).map(|k| if k == q { p() } else { i2() }).collect();
        kron_all(&f)
    };
    let mut observables = vec![
        (mermin_label_a(1), string(z, z, z)?),
        (mermin_label_a(2), string(z, x, x)?),
        (mermin_label_a(3), string(x, z, x)?),
        (mermin_label_a(4), string(x, x, z)?),
    ];
    for i in 1..=n {
        observables.push((mermin_label_b(i), single(i - 1, z)?));
    }
    for i in 1..=n {
        observables.push((mermin_label_c(i), single(i - 1, x)?));
    }
    let mut contexts: Vec<Vec<ObservableLabel>> = mermin_mixed_contexts(n).into_iter().collect();
    contexts.push((1..=4).map(mermin_label_a).collect());
    ObservableSet::new(SetId::MerminStar { n }, 1 << n, observables, contexts)
}
