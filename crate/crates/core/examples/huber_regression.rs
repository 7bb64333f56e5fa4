//! Squared-Huber regression with the precomposed coordinatewise curvature,
//! checking the `L_C‖x0 − x*‖²/(2k)` guarantee along LCD1 and LCD2 runs.

use std::path::Path;

use lcd_core::io::{load_libsvm, LabelMode};
use lcd_core::matrix::Vector;
use lcd_core::objectives::{estimate_f_star, huber_sq_regression};
use lcd_core::solvers::{run, verify_rate_bounds, Method, SolverConfig};

fn main() -> lcd_core::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/regression.libsvm");
    let data = load_libsvm(&path, LabelMode::Regression)?;
    for delta in [0.5, 1.0, 2.0] {
        let obj = huber_sq_regression(&data.rows, &data.labels, delta)?;
        let x0 = Vector::zeros(data.d());
        let est = estimate_f_star(&obj, &x0, 100_000, 1e-11)?;
        let x_star = Vector::from_column_slice(&est.x);
        let f_ref = obj.value(&x_star);
        let obj = obj.with_f_star(f_ref);
        let lc = obj.model.excess().expect("Huber² has an excess");
        for m in [Method::Lcd1, Method::Lcd2] {
            let t = run(&obj, &SolverConfig::new(m, 500).record(), &x0)?;
            let rep = verify_rate_bounds(&t, lc, &x_star, f_ref)?;
            println!(
                "δ = {delta}: {m} gap {:.3e} after {} iterations, {} checks, clean = {}",
                t.final_gap(),
                t.iterations(),
                rep.checked,
                rep.is_clean()
            );
        }
    }
    Ok(())
}
