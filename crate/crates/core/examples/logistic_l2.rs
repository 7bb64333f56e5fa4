//! L2-regularized logistic regression on the bundled fixture: GD(1/L),
//! Polyak, LCD1 and LCD2 side by side.
//!
//! ```text
//! cargo run --release --example logistic_l2 -- [lambda/L]
//! ```

use std::path::Path;

use lcd_core::io::{load_libsvm, LabelMode};
use lcd_core::matrix::Vector;
use lcd_core::objectives::{estimate_f_star, logistic_lp, logistic_smoothness};
use lcd_core::solvers::{run, Method, SolverConfig};

fn main() -> lcd_core::Result<()> {
    let frac: f64 = std::env::args().nth(1).map_or(1e-3, |s| s.parse().expect("λ/L must be a number"));
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/logistic.libsvm");
    let data = load_libsvm(&path, LabelMode::Classification)?;
    let l = logistic_smoothness(&data.rows);
    let lambda = frac * l;
    let obj = logistic_lp(&data.rows, &data.labels, lambda, 2.0)?;
    let x0 = Vector::zeros(data.d());
    let est = estimate_f_star(&obj, &x0, 100_000, 1e-10)?;
    let obj = obj.with_f_star(est.value);
    println!("n = {}, d = {}, L = {l:.4e}, λ = {lambda:.4e}, f* ≈ {:.12}", data.n(), data.d(), est.value);

    let methods = [Method::Gd { step: 1.0 / (l + 2.0 * lambda) }, Method::Polyak, Method::Lcd1, Method::Lcd2];
    let traces: Vec<_> = methods
        .iter()
        .map(|&m| run(&obj, &SolverConfig::new(m, 300), &x0))
        .collect::<Result<_, _>>()?;
    print!("{:>5}", "k");
    for m in &methods {
        print!("{:>14}", m.name().split('(').next().unwrap());
    }
    println!();
    for k in [0, 1, 2, 5, 10, 20, 50, 100, 200, 300] {
        print!("{k:>5}");
        for t in &traces {
            let gaps = t.gaps();
            print!("{:>14.3e}", gaps.get(k).copied().unwrap_or(t.final_gap()));
        }
        println!();
    }
    Ok(())
}
