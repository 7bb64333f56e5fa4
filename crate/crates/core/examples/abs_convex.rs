//! Absolutely convex building blocks and the sum-of-squares objectives they
//! generate.

use lcd_core::abs_convex::{
    abs_affine, check_absolute_convexity, lift_on_interval, pnorm_acv, pseudo_huber, sum_of_squares_problem,
    sum_of_squares_rank_one,
};
use lcd_core::matrix::Vector;
use lcd_core::objectives::bound_report;

fn main() -> lcd_core::Result<()> {
    let x = Vector::from_column_slice(&[1.0, -2.0]);
    let y = Vector::from_column_slice(&[-0.5, 0.3]);
    let phis = vec![
        pnorm_acv(3.0, 2)?,
        abs_affine(Vector::from_column_slice(&[1.0, 1.0]), -0.5),
        pseudo_huber(1.0)?.precompose(&lcd_core::matrix::Matrix::from_row_slice(1, 2, &[0.5, -1.0]), &Vector::zeros(1))?,
    ];
    for phi in &phis {
        println!("{:<24} φ(x) = {:.4}, violation at (x, y) = {:.1e}", phi.label(), phi.value(&x), check_absolute_convexity(phi, &x, &y)?);
    }

    // x² is convex but not absolutely convex on [−1, 1] until lifted
    let beta = lift_on_interval(|t| t * t, |t| 2.0 * t, -1.0, 1.0)?;
    println!("lift for x² on [−1, 1]: β = {beta}");

    for obj in [sum_of_squares_problem(phis.clone())?, sum_of_squares_rank_one(phis)?] {
        let rep = bound_report(&obj, 5_000, 1)?;
        println!("{} with C = {}: worst lower-bound violation {:.1e}", obj.name, obj.model.label(), rep.worst_lower_violation);
    }
    Ok(())
}
