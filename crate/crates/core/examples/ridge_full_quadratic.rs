//! Ridge regression with the data Hessian `(2/n)AᵀA` as curvature: LCD1 is
//! Newton's method, LCD2 converges in a handful of steps, and LCD3 may
//! diverge on ill-conditioned data.

use std::path::Path;

use lcd_core::bench::{quadratic_minimizer, RIDGE_LAMBDA_FRACTIONS};
use lcd_core::io::{load_libsvm, LabelMode};
use lcd_core::matrix::Vector;
use lcd_core::objectives::{quadratic_smoothness, ridge, RidgeCurvature};
use lcd_core::solvers::{run, Method, SolverConfig};

fn main() -> lcd_core::Result<()> {
    for name in ["regression.libsvm", "ridge_ill_conditioned.libsvm"] {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name);
        let data = load_libsvm(&path, LabelMode::Regression)?;
        let (a, b) = (&data.rows, &data.labels);
        let l = quadratic_smoothness(a);
        println!("{name} (L = {l:.4e})");
        for frac in RIDGE_LAMBDA_FRACTIONS {
            let lambda = frac * l;
            let obj = ridge(a, b, lambda, RidgeCurvature::FullQuadratic)?;
            let f_star = obj.value(&quadratic_minimizer(a, b, lambda)?);
            let obj = obj.with_f_star(f_star);
            let x0 = Vector::zeros(data.d());
            print!("  λ/L = {frac:.2e}:");
            for m in [Method::Lcd1, Method::Lcd2, Method::Lcd3] {
                let t = run(&obj, &SolverConfig::new(m, 100), &x0)?;
                let k = t.gaps().iter().position(|&g| g <= 1e-10);
                print!("  {m} {:?} k(1e-10) = {}", t.status, k.map_or("-".into(), |k| k.to_string()));
            }
            println!();
        }
    }
    Ok(())
}
