use ctxkit_core::catalog::{catalog_get, Sign, Term};
use ctxkit_core::linalg::DensityMatrix;
use ctxkit_core::observables::{build_ks18, build_peres_mermin, ObservableLabel};
use ctxkit_core::quantum::{expectation_term, haar_state};
use ctxkit_core::sim::{estimate_term, marginal_consistency, run_protocol};

fn labels(names: &[&str]) -> Vec<ObservableLabel> {
    names.iter().map(|&s| s.into()).collect()
}

#[test]
fn estimates_fall_within_five_sigma() {
    let pm = build_peres_mermin().unwrap();
    let rho = haar_state(4, 77, 0).unwrap().density();
    let terms = [
        Term::new(Sign::Plus, labels(&["P24"])).unwrap(),
        Term::new(Sign::Minus, labels(&["P34"])).unwrap(),
        Term::new(Sign::Plus, labels(&["P15", "P25"])).unwrap(),
    ];
    let mut total = 0;
    let mut inside = 0;
    for (shots, reps) in [(100u64, 100u64), (1000, 40), (10_000, 6)] {
        for term in &terms {
            let exact = expectation_term(&rho, &pm, term).unwrap();
            for seed in 0..reps {
                let e = estimate_term(&rho, &pm, term, shots, seed, 0).unwrap();
                total += 1;
                if (e.estimate - exact).abs() <= 5.0 * e.standard_error {
                    inside += 1;
                }
            }
        }
    }
    assert!(inside as f64 >= 0.99 * total as f64, "{inside}/{total}");
}

#[test]
fn reordering_a_context_keeps_marginals() {
    let (_, ks) = build_ks18().unwrap();
    let rho = haar_state(4, 5, 0).unwrap().density();
    let forward = labels(&["A12", "A16", "A17", "A18"]);
    let mut backward = forward.clone();
    backward.reverse();
    for label in &forward {
        let r = marginal_consistency(&rho, &ks, label, [&forward, &backward], 20_000, 11).unwrap();
        assert!(r.z.abs() <= 5.0, "{label}: z = {}", r.z);
    }
}

#[test]
fn protocol_examples() {
    let (_, ks) = build_ks18().unwrap();
    let pm = build_peres_mermin().unwrap();
    let cases = [
        (&ks, "ineq1", haar_state(4, 1, 0).unwrap().density(), 9.0),
        (&pm, "ineq4", DensityMatrix::maximally_mixed(4).unwrap(), 6.0),
    ];
    for (set, id, rho, exact) in cases {
        let e = catalog_get(id, None).unwrap();
        let r = run_protocol(&rho, set, &e, 10_000, 2024).unwrap();
        assert!((r.lhs_estimate - exact).abs() <= 5.0 * r.lhs_standard_error + 1e-12, "{id}");
        assert_eq!(r, run_protocol(&rho, set, &e, 10_000, 2024).unwrap());
    }
}
