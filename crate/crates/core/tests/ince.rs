use paramosc::ince::{
    classify_periodicity, convergence_table, fourier_trial, periodicity_polynomials, to_ince_form,
    InceForm, SeriesClass,
};
use paramosc::models::OscillatorParams;
use proptest::prelude::*;

fn form(omega: f64, ratio: f64) -> InceForm {
    to_ince_form(&OscillatorParams::natural(omega, ratio * omega).unwrap()).unwrap()
}

proptest! {
    #[test]
    fn completed_square_forms(ratio in 0.01f64..0.99, xi in -50.0f64..50.0) {
        let (p, q) = periodicity_polynomials(&form(1.0, ratio));
        let r2 = ratio * ratio / 4.0;
        let p_sq = 2.0 * ratio * ((xi - 0.5).powi(2) + r2);
        let q_sq = 4.0 * ratio * ((xi - 1.0).powi(2) + r2);
        prop_assert!((p.eval(xi) - p_sq).abs() <= 1e-12 * (1.0 + p_sq.abs()));
        prop_assert!((q.eval(xi) - q_sq).abs() <= 1e-12 * (1.0 + q_sq.abs()));
    }

    #[test]
    fn q_is_shifted_p(a0 in -0.9f64..0.9, b0 in -2.0f64..2.0, d0 in -2.0f64..2.0, xi in -10.0f64..10.0) {
        let (p, q) = periodicity_polynomials(&InceForm::new(a0, b0, 1.0, d0));
        prop_assert!((q.eval(xi) - 2.0 * p.eval(xi - 0.5)).abs() <= 1e-12 * (1.0 + q.eval(xi).abs()));
    }

    #[test]
    fn verdicts_depend_only_on_ratio(ratio in 0.01f64..0.99, omega in 0.1f64..10.0) {
        let a = classify_periodicity(&form(1.0, ratio));
        let b = classify_periodicity(&form(omega, ratio));
        prop_assert_eq!(a.pi_pair_possible, b.pi_pair_possible);
        prop_assert_eq!(a.two_pi_pair_possible, b.two_pi_pair_possible);
        prop_assert!(!a.pi_pair_possible && !a.two_pi_pair_possible);
    }
}

#[test]
fn reference_reports() {
    let r = classify_periodicity(&form(1.0, 0.3));
    assert!((r.min_p.unwrap() - 0.0135).abs() < 1e-15);
    let r = classify_periodicity(&form(1.0, 0.0));
    assert!(r.degenerate && r.pi_pair_possible && r.two_pi_pair_possible);
    let r = classify_periodicity(&InceForm::new(0.3, 0.6, 1.0, 0.0));
    assert_eq!(r.p.eval(0.0), 0.0);
    assert!(r.pi_pair_possible && r.p_integer_zeros.contains(&0) && r.p_integer_zeros.contains(&1));
}

#[test]
fn report_serializes() {
    let r = classify_periodicity(&form(1.0, 0.5));
    let json = serde_json::to_value(&r).unwrap();
    assert_eq!(json["pi_pair_possible"], false);
    assert_eq!(json["min_p"], 0.0625);
}

#[test]
fn exact_periodic_solution_is_found_by_every_order() {
    let f = InceForm::new(0.3, 0.6, 4.0, 0.0);
    for (n, r) in convergence_table(&f, SeriesClass::OddPi, &[8, 16, 32, 64]).unwrap() {
        assert!(r < 1e-10, "N={n}: {r}");
    }
    let t = fourier_trial(&f, SeriesClass::OddPi, 32).unwrap();
    assert!(t.system_residual <= 1e-10 * t.system_norm);
    assert_eq!(t.coefficients.len(), 33);
}
