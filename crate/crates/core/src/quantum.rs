//! Quantum values of inequalities: expectation values, Bell operators and
//! state-independence certificates.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::catalog::{validate_contexts, InequalityExpr, Sign, Term};
// sqrt and trig resolve to libm unless some dependency links std
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{ordered_product, ComplexMatrix, DensityMatrix, StateVector, C64, REAL_TOL, TOL};
use crate::observables::{ObservableLabel, ObservableSet};

/// Imaginary part tolerated in an expectation value of commuting factors.
pub const IMAG_TOL: f64 = 1e-9;
/// Iteration cap for [`max_quantum_value`].
pub const POWER_ITERATION_CAP: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedState {
    /// (|01⟩ − |10⟩)/√2.
    Singlet,
    /// (|0…0⟩ + |1…1⟩)/√2; qubit count taken from the target dimension when absent.
    Ghz(Option<usize>),
    /// |σ_y = +1⟩ ⊗ |σ_y = +1⟩.
    YPlusPair,
    /// |0…0⟩.
    ZeroProduct,
    MaximallyMixed(Option<usize>),
    /// (cos 0.3, sin 0.3) ⊗ (cos 0.7, −sin 0.7), angles in radians.
    PaperKcbsProduct,
}

impl fmt::Display for NamedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NamedState::Singlet => f.write_str("singlet"),
            NamedState::Ghz(None) => f.write_str("ghz"),
            NamedState::Ghz(Some(n)) => write!(f, "ghz:{n}"),
            NamedState::YPlusPair => f.write_str("y_plus_pair"),
            NamedState::ZeroProduct => f.write_str("zero_product"),
            NamedState::MaximallyMixed(None) => f.write_str("maximally_mixed"),
            NamedState::MaximallyMixed(Some(d)) => write!(f, "maximally_mixed:{d}"),
            NamedState::PaperKcbsProduct => f.write_str("paper_kcbs_product"),
        }
    }
}

impl FromStr for NamedState {
    type Err = Error;

    /// `name` or `name:param`; `ghz(3)` is accepted as well as `ghz:3`.
    fn from_str(s: &str) -> Result<Self> {
        let normalized: String = s.replace('(', ":").replace(')', "");
        let (name, param) = match normalized.split_once(':') {
            Some((n, p)) => {
                let p: usize =
                    p.trim().parse().map_err(|_| Error::invalid(format!("bad parameter in '{s}'")))?;
                (n.trim().to_string(), Some(p))
            }
            None => (normalized.trim().to_string(), None),
        };
        let no_param = |st: NamedState| match param {
            None => Ok(st),
            Some(_) => Err(Error::invalid(format!("state '{name}' takes no parameter"))),
        };
        match name.as_str() {
            "singlet" => no_param(NamedState::Singlet),
            "ghz" => Ok(NamedState::Ghz(param)),
            "y_plus_pair" => no_param(NamedState::YPlusPair),
            "zero_product" => no_param(NamedState::ZeroProduct),
            "maximally_mixed" => Ok(NamedState::MaximallyMixed(param)),
            "paper_kcbs_product" => no_param(NamedState::PaperKcbsProduct),
            _ => Err(Error::not_found(format!("unknown state '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Named(NamedState),
    Ket(StateVector),
    Density(DensityMatrix),
    Haar { dim: usize, seed: u64 },
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn qubits_for(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::invalid(format!("dimension {dim} is not a qubit register")));
    }
    Ok(dim.trailing_zeros() as usize)
}

fn expect_dim(what: &str, have: usize, want: usize) -> Result<()> {
    if have != want {
        return Err(Error::invalid(format!("{what} has dimension {have}, expected {want}")));
    }
    Ok(())
}

/// Haar-random pure state: normalized complex Gaussian amplitudes from
/// ChaCha20 keyed by `seed`, on stream `index`.
pub fn haar_state(dim: usize, seed: u64, index: u64) -> Result<StateVector> {
    if dim == 0 {
        return Err(Error::invalid("dimension must be nonzero"));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let amps: Vec<C64> = (0..dim)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            C64::new(re, im)
        })
        .collect();
    StateVector::normalized(amps)
}

/// Resolve a state specification to a density matrix of dimension `dim`.
pub fn make_state(spec: &StateSpec, dim: usize) -> Result<DensityMatrix> {
    match spec {
        StateSpec::Named(named) => named_state(*named, dim),
        StateSpec::Ket(psi) => {
            expect_dim("ket", psi.dim(), dim)?;
            Ok(psi.density())
        }
        StateSpec::Density(rho) => {
            expect_dim("density matrix", rho.dim(), dim)?;
            Ok(rho.clone())
        }
        StateSpec::Haar { dim: d, seed } => {
            expect_dim("Haar state", *d, dim)?;
            Ok(haar_state(dim, *seed, 0)?.density())
        }
    }
}

fn named_state(named: NamedState, dim: usize) -> Result<DensityMatrix> {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let two_qubit = |amps: Vec<C64>| -> Result<DensityMatrix> {
        expect_dim(&named.to_string(), 4, dim)?;
        Ok(StateVector::new(amps)?.density())
    };
    match named {
        NamedState::Singlet => two_qubit(vec![c(0.0), c(s), c(-s), c(0.0)]),
        NamedState::YPlusPair => {
            let y = StateVector::new(vec![c(s), C64::new(0.0, s)])?;
            expect_dim("y_plus_pair", 4, dim)?;
            Ok(y.tensor(&y).density())
        }
        NamedState::PaperKcbsProduct => {
            let a = StateVector::new(vec![c(0.3f64.cos()), c(0.3f64.sin())])?;
            let b = StateVector::new(vec![c(0.7f64.cos()), c(-(0.7f64.sin()))])?;
            expect_dim("paper_kcbs_product", 4, dim)?;
            Ok(a.tensor(&b).density())
        }
        NamedState::ZeroProduct => {
            qubits_for(dim)?;
            let mut amps = vec![c(0.0); dim];
            amps[0] = c(1.0);
            Ok(StateVector::new(amps)?.density())
        }
        NamedState::Ghz(n) => {
            qubits_for(dim)?;
            if let Some(n) = n {
                expect_dim("ghz", 1 << n, dim)?;
            }
            let mut amps = vec![c(0.0); dim];
            amps[0] = c(s);
            amps[dim - 1] = c(s);
            Ok(StateVector::new(amps)?.density())
        }
        NamedState::MaximallyMixed(d) => {
            if let Some(d) = d {
                expect_dim("maximally_mixed", d, dim)?;
            }
            DensityMatrix::maximally_mixed(dim)
        }
    }
}

/// `sign · Π factors` in listed order, after checking the factors pairwise commute.
pub fn term_operator(set: &ObservableSet, term: &Term) -> Result<ComplexMatrix> {
    set.check_commuting(&term.factors)?;
    let ops: Vec<&ComplexMatrix> =
        term.factors.iter().map(|f| set.operator(f)).collect::<Result<_>>()?;
    Ok(ordered_product(set.dimension(), &ops)?.scale(c(term.sign.as_f64())))
}

fn real_expectation(rho: &DensityMatrix, op: &ComplexMatrix) -> Result<f64> {
    let z = rho.matrix().trace_product(op)?;
    if z.im.abs() > IMAG_TOL {
        return Err(Error::NumericFailure(format!("expectation value {z} is not real")));
    }
    Ok(z.re)
}

/// `sign · ⟨Π factors⟩` in state `rho`.
pub fn expectation_term(rho: &DensityMatrix, set: &ObservableSet, term: &Term) -> Result<f64> {
    expect_dim("state", rho.dim(), set.dimension())?;
    real_expectation(rho, &term_operator(set, term)?)
}

/// Per-term operators of an inequality, built once and reused across states.
#[derive(Debug, Clone)]
pub struct CompiledInequality {
    dim: usize,
    term_ops: Vec<ComplexMatrix>,
}

impl CompiledInequality {
    pub fn new(set: &ObservableSet, expr: &InequalityExpr) -> Result<Self> {
        expr.check_labels(set)?;
        let term_ops = expr.terms.iter().map(|t| term_operator(set, t)).collect::<Result<_>>()?;
        Ok(CompiledInequality { dim: set.dimension(), term_ops })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn term_values(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        expect_dim("state", rho.dim(), self.dim)?;
        self.term_ops.iter().map(|op| real_expectation(rho, op)).collect()
    }

    pub fn evaluate(&self, rho: &DensityMatrix) -> Result<f64> {
        Ok(self.term_values(rho)?.iter().sum())
    }

    /// ⟨ψ|B|ψ⟩ for a pure state without forming |ψ⟩⟨ψ|.
    pub fn evaluate_pure(&self, psi: &StateVector) -> Result<f64> {
        expect_dim("state", psi.dim(), self.dim)?;
        let mut total = 0.0;
        for op in &self.term_ops {
            let v = op.apply(psi.amplitudes())?;
            let z: C64 = psi.amplitudes().iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            if z.im.abs() > IMAG_TOL {
                return Err(Error::NumericFailure(format!("expectation value {z} is not real")));
            }
            total += z.re;
        }
        Ok(total)
    }

    pub fn bell_operator(&self) -> ComplexMatrix {
        self.term_ops
            .iter()
            .fold(ComplexMatrix::zeros(self.dim, self.dim), |acc, op| &acc + op)
    }
}

/// Left-hand side of the inequality in state `rho`.
pub fn evaluate_inequality(rho: &DensityMatrix, set: &ObservableSet, expr: &InequalityExpr) -> Result<f64> {
    CompiledInequality::new(set, expr)?.evaluate(rho)
}

/// Σ sign · (ordered product of factor operators).
pub fn bell_operator(set: &ObservableSet, expr: &InequalityExpr) -> Result<ComplexMatrix> {
    let b = CompiledInequality::new(set, expr)?.bell_operator();
    if !b.is_hermitian(TOL) {
        return Err(Error::NumericFailure("Bell operator is not Hermitian".to_string()));
    }
    Ok(b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub is_state_independent: bool,
    /// Tr(B)/d.
    pub constant: f64,
    /// Max-magnitude entry of B − constant·𝟙.
    pub residual: f64,
}

pub fn certify_state_independence(set: &ObservableSet, expr: &InequalityExpr, tol: f64) -> Result<Certificate> {
    let b = bell_operator(set, expr)?;
    let d = b.dim();
    let constant = b.trace().re / d as f64;
    let residual = b.max_abs_diff(&ComplexMatrix::identity(d).scale(c(constant)));
    Ok(Certificate { is_state_independent: residual <= tol, constant, residual })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContextProduct {
    /// The ordered product equals `sign · 𝟙`.
    Identity(Sign),
    /// Not proportional to ±𝟙; `residual` is the distance to the nearer of the two.
    NotIdentity { residual: f64 },
}

pub fn context_product(set: &ObservableSet, context: &[ObservableLabel]) -> Result<ContextProduct> {
    let p = term_operator(set, &Term { sign: Sign::Plus, factors: context.to_vec() })?;
    let id = ComplexMatrix::identity(set.dimension());
    let plus = p.max_abs_diff(&id);
    let minus = p.max_abs_diff(&id.scale(c(-1.0)));
    Ok(if plus <= TOL {
        ContextProduct::Identity(Sign::Plus)
    } else if minus <= TOL {
        ContextProduct::Identity(Sign::Minus)
    } else {
        ContextProduct::NotIdentity { residual: plus.min(minus) }
    })
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest eigenvalue of the Bell operator by shifted power iteration.
///
/// B + ‖B‖₁·𝟙 is positive semidefinite, so its dominant eigenvalue is
/// λ_max(B) + ‖B‖₁. Iteration stops once ‖Bv − λv‖ ≤ 1e-9·max(1, ‖B‖₁).
pub fn max_quantum_value(set: &ObservableSet, expr: &InequalityExpr) -> Result<f64> {
    let b = bell_operator(set, expr)?;
    largest_eigenvalue(&b)
}

pub fn largest_eigenvalue(b: &ComplexMatrix) -> Result<f64> {
    if !b.is_hermitian(TOL) {
        return Err(Error::invalid("largest_eigenvalue needs a Hermitian matrix"));
    }
    let d = b.dim();
    let shift = b.norm_one();
    if shift == 0.0 {
        return Ok(0.0);
    }
    let tol = TOL * shift.max(1.0);
    // fixed, generic start vector so no eigenvector is missed by symmetry
    let mut v = haar_state(d, 0x5eed_cafe, 0)?.amplitudes().to_vec();
    for _ in 0..POWER_ITERATION_CAP {
        let bv = b.apply(&v)?;
        let lambda: f64 = v.iter().zip(&bv).map(|(a, x)| (a.conj() * x).re).sum();
        let residual: Vec<C64> = bv.iter().zip(&v).map(|(x, a)| x - a * lambda).collect();
        if norm(&residual) <= tol {
            return Ok(lambda);
        }
        let shifted: Vec<C64> = bv.iter().zip(&v).map(|(x, a)| x + a * shift).collect();
        let n = norm(&shifted);
        if !n.is_finite() || n <= REAL_TOL {
            return Err(Error::NumericFailure("power iteration collapsed to zero".to_string()));
        }
        v = shifted.into_iter().map(|x| x / n).collect();
    }
    Err(Error::NumericFailure(format!(
        "power iteration did not converge in {POWER_ITERATION_CAP} steps"
    )))
}

/// Rejects expressions whose terms are not contexts of `set`.
pub fn require_valid(expr: &InequalityExpr, set: &ObservableSet) -> Result<()> {
    let report = validate_contexts(expr, set);
    for t in &report.terms {
        if let Some(l) = t.unknown_labels.first() {
            return Err(Error::not_found(format!("observable {l} not in set {}", set.id())));
        }
        if let Some((a, b)) = t.incompatible_pairs.first() {
            return Err(Error::InvalidContext(format!(
                "term {} of {}: {a} and {b} do not commute",
                t.term_index, expr.id
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::catalog_get;
    use crate::observables::{build_ks18, build_mermin_star, build_peres_mermin};

    fn pm() -> ObservableSet {
        build_peres_mermin().unwrap()
    }

    fn ks() -> ObservableSet {
        build_ks18().unwrap().1
    }

    fn named(n: NamedState) -> DensityMatrix {
        make_state(&StateSpec::Named(n), 4).unwrap()
    }

    fn term(sign: Sign, f: &[&str]) -> Term {
        Term::new(sign, f.iter().map(|&s| s.into()).collect()).unwrap()
    }

    #[test]
    fn expectation_examples() {
        let v = expectation_term(&named(NamedState::Singlet), &pm(), &term(Sign::Plus, &["P16"])).unwrap();
        assert!((v + 1.0).abs() < 1e-12);
        let mixed = named(NamedState::MaximallyMixed(None));
        let v = expectation_term(&mixed, &ks(), &term(Sign::Minus, &["A12", "A16", "A17", "A18"])).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let v = expectation_term(&mixed, &ks(), &term(Sign::Plus, &[])).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn expectation_rejects_non_commuting_factors() {
        let rho = named(NamedState::ZeroProduct);
        let r = expectation_term(&rho, &pm(), &term(Sign::Plus, &["P14", "P36"]));
        assert!(matches!(r, Err(Error::InvalidContext(_))));
        let big = make_state(&StateSpec::Named(NamedState::ZeroProduct), 8).unwrap();
        assert!(matches!(expectation_term(&big, &pm(), &term(Sign::Plus, &["P14"])), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn named_state_values() {
        let cfrh = catalog_get("cfrh6", None).unwrap();
        let v = evaluate_inequality(&named(NamedState::Singlet), &pm(), &cfrh).unwrap();
        assert!((v - 5.0).abs() < 1e-9);
        let nambu = catalog_get("nambu7", None).unwrap();
        let v = evaluate_inequality(&named(NamedState::YPlusPair), &pm(), &nambu).unwrap();
        assert!((v - 6.0).abs() < 1e-9);
        let kcbs = catalog_get("kcbs3", None).unwrap();
        let v = evaluate_inequality(&named(NamedState::ZeroProduct), &ks(), &kcbs).unwrap();
        assert!(v <= 3.0 + 1e-12, "{v}");
        let v = evaluate_inequality(&named(NamedState::MaximallyMixed(Some(4))), &pm(), &catalog_get("ineq4", None).unwrap()).unwrap();
        assert!((v - 6.0).abs() < 1e-9);
    }

    #[test]
    fn kcbs_product_amplitudes() {
        let rho = named(NamedState::PaperKcbsProduct);
        let (c3, s3, c7, s7) = (0.3f64.cos(), 0.3f64.sin(), 0.7f64.cos(), 0.7f64.sin());
        let expected = [c3 * c7, -c3 * s7, s3 * c7, -s3 * s7];
        for i in 0..4 {
            for j in 0..4 {
                assert!((rho.matrix()[(i, j)] - c(expected[i] * expected[j])).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn haar_is_deterministic_per_seed() {
        let a = make_state(&StateSpec::Haar { dim: 4, seed: 7 }, 4).unwrap();
        let b = make_state(&StateSpec::Haar { dim: 4, seed: 7 }, 4).unwrap();
        let other = make_state(&StateSpec::Haar { dim: 4, seed: 8 }, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, other);
        assert_ne!(haar_state(4, 7, 0).unwrap(), haar_state(4, 7, 1).unwrap());
    }

    #[test]
    fn state_dimension_mismatch() {
        assert!(make_state(&StateSpec::Named(NamedState::Singlet), 8).is_err());
        assert!(make_state(&StateSpec::Haar { dim: 4, seed: 0 }, 8).is_err());
        assert!(make_state(&StateSpec::Named(NamedState::Ghz(Some(3))), 4).is_err());
        assert!(make_state(&StateSpec::Named(NamedState::Ghz(None)), 8).is_ok());
    }

    #[test]
    fn named_state_parsing() {
        assert_eq!("ghz(3)".parse::<NamedState>().unwrap(), NamedState::Ghz(Some(3)));
        assert_eq!("maximally_mixed:4".parse::<NamedState>().unwrap(), NamedState::MaximallyMixed(Some(4)));
        assert!("singlet:2".parse::<NamedState>().is_err());
        assert!("bogus".parse::<NamedState>().is_err());
        for s in ["singlet", "ghz:5", "y_plus_pair", "zero_product", "maximally_mixed", "paper_kcbs_product"] {
            assert_eq!(s.parse::<NamedState>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn bell_operators_and_certificates() {
        let b = bell_operator(&ks(), &catalog_get("ineq1", None).unwrap()).unwrap();
        assert!(b.max_abs_diff(&ComplexMatrix::identity(4).scale(c(9.0))) < 1e-9);
        let b = bell_operator(&pm(), &catalog_get("ineq4", None).unwrap()).unwrap();
        assert!(b.max_abs_diff(&ComplexMatrix::identity(4).scale(c(6.0))) < 1e-9);

        let cert = certify_state_independence(&ks(), &catalog_get("kcbs3", None).unwrap(), 1e-9).unwrap();
        assert!(!cert.is_state_independent);
        assert!(cert.residual > 0.1);

        let ms3 = build_mermin_star(3).unwrap();
        let cert = certify_state_independence(&ms3, &catalog_get("ineq9", Some(3)).unwrap(), 1e-9).unwrap();
        assert!(cert.is_state_independent);
        assert!((cert.constant - 5.0).abs() < 1e-9);

        let cert = certify_state_independence(&pm(), &catalog_get("cfrh6", None).unwrap(), 1e-9).unwrap();
        assert!(!cert.is_state_independent);
    }

    #[test]
    fn context_products() {
        let k = ks();
        for ctx in k.contexts() {
            assert_eq!(context_product(&k, ctx).unwrap(), ContextProduct::Identity(Sign::Minus));
        }
        let p = pm();
        assert_eq!(context_product(&p, &p.contexts()[0]).unwrap(), ContextProduct::Identity(Sign::Plus));
        let ms3 = build_mermin_star(3).unwrap();
        assert_eq!(context_product(&ms3, &ms3.contexts()[4]).unwrap(), ContextProduct::Identity(Sign::Minus));
        let partial: Vec<ObservableLabel> = vec!["P14".into(), "P15".into()];
        assert!(matches!(context_product(&p, &partial).unwrap(), ContextProduct::NotIdentity { .. }));
        let bad: Vec<ObservableLabel> = vec!["P14".into(), "P36".into()];
        assert!(matches!(context_product(&p, &bad), Err(Error::InvalidContext(_))));
    }

    #[test]
    fn max_values() {
        let v = max_quantum_value(&ks(), &catalog_get("ineq1", None).unwrap()).unwrap();
        assert!((v - 9.0).abs() < 1e-6);
        let nambu = catalog_get("nambu7", None).unwrap();
        let v = max_quantum_value(&pm(), &nambu).unwrap();
        let at_y = evaluate_inequality(&named(NamedState::YPlusPair), &pm(), &nambu).unwrap();
        assert!((v - 6.0).abs() < 1e-6);
        assert!((v - at_y).abs() < 1e-6);
        let ms3 = build_mermin_star(3).unwrap();
        let v = max_quantum_value(&ms3, &catalog_get("mermin11", Some(3)).unwrap()).unwrap();
        assert!((v - 4.0).abs() < 1e-6);
    }

    #[test]
    fn pure_and_mixed_evaluation_agree() {
        let e = catalog_get("kcbs3", None).unwrap();
        let k = ks();
        let comp = CompiledInequality::new(&k, &e).unwrap();
        for i in 0..20 {
            let psi = haar_state(4, 99, i).unwrap();
            let a = comp.evaluate_pure(&psi).unwrap();
            let b = comp.evaluate(&psi.density()).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }
}
