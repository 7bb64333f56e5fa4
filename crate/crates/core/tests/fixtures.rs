use std::path::{Path, PathBuf};

use lcd_core::io::{load_libsvm, LabelMode};
use lcd_core::matrix::Vector;
use lcd_core::objectives::{estimate_f_star, logistic_lp};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

// Reference values from an independent damped-Newton solve in double
// precision (gradient norm below 1e-16 at the solution).
const TOY_F_STAR_LAMBDA_0_1: f64 = 0.632_985_030_811_201_8;
const TOY_X_STAR_LAMBDA_0_1: [f64; 3] = [-0.178_056_947_377_099_2, 0.014_944_518_730_329_115, -0.662_005_758_610_018_6];
const TOY_F_STAR_LAMBDA_0_01: f64 = 0.471_316_689_033_684_73;

#[test]
fn toy_logistic_optimum() {
    let ds = load_libsvm(&data("toy_logistic.libsvm"), LabelMode::Classification).unwrap();
    assert_eq!((ds.n(), ds.d()), (12, 3));
    for (lambda, want) in [(0.1, TOY_F_STAR_LAMBDA_0_1), (0.01, TOY_F_STAR_LAMBDA_0_01)] {
        let obj = logistic_lp(&ds.rows, &ds.labels, lambda, 2.0).unwrap();
        let est = estimate_f_star(&obj, &Vector::zeros(3), 100_000, 1e-12).unwrap();
        assert!(est.converged);
        assert!((est.value - want).abs() <= 1e-10, "λ = {lambda}: {} vs {want}", est.value);
        // the estimate sits just below the true optimum
        assert!(est.value <= want);
        if lambda == 0.1 {
            let x = Vector::from_column_slice(&TOY_X_STAR_LAMBDA_0_1);
            assert!((obj.value(&x) - want).abs() <= 1e-15);
            assert!(obj.gradient(&x).norm() <= 1e-14);
        }
    }
}

#[test]
fn bundled_fixtures_load() {
    for (name, mode, n, d) in [
        ("logistic.libsvm", LabelMode::Classification, 600, 40),
        ("regression.libsvm", LabelMode::Regression, 300, 13),
        ("ridge_ill_conditioned.libsvm", LabelMode::Regression, 40, 8),
    ] {
        let ds = load_libsvm(&data(name), mode).unwrap();
        assert_eq!((ds.n(), ds.d()), (n, d), "{name}");
    }
    let ds = load_libsvm(&data("logistic.libsvm"), LabelMode::Classification).unwrap();
    assert!(ds.labels.iter().all(|l| *l == 1.0 || *l == -1.0));
    assert!(ds.labels.iter().any(|l| *l == 1.0) && ds.labels.iter().any(|l| *l == -1.0));
}
