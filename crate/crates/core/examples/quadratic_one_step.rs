//! On a least-squares problem with its exact Hessian as curvature, LCD1,
//! LCD2 and LCD3 all land on the minimizer after one step.

use lcd_core::matrix::{Matrix, Vector};
use lcd_core::objectives::least_squares;
use lcd_core::solvers::{run, Method, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> lcd_core::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let a = Matrix::from_fn(50, 10, |_, _| rng.random_range(-1.0..1.0));
    let x_true = Vector::from_fn(10, |_, _| rng.random_range(-2.0..2.0));
    let b = &a * &x_true;
    // consistent system, so f* = 0
    let obj = least_squares(&a, &b)?.with_f_star(0.0);
    let x0 = Vector::zeros(10);

    println!("f(x0) = {:.6e}", obj.value(&x0));
    for m in [Method::Lcd1, Method::Lcd2, Method::Lcd3] {
        let t = run(&obj, &SolverConfig::new(m, 1).record(), &x0)?;
        let x1 = t.iterate_vectors()?.pop().unwrap();
        println!("{m:>5}: gap after 1 step {:.3e}, ‖x1 − x_true‖ = {:.3e}", t.final_gap(), (x1 - &x_true).norm());
    }
    Ok(())
}
