//! Building curvature maps from pieces: sums, scalings and affine
//! precomposition, each checked against its objective by sampling.

use lcd_core::curvature::{affine_precompose, pnorm_sq_diag_model, pnorm_sq_rank1_model, scale_model, sum_models};
use lcd_core::matrix::{Matrix, Vector};
use lcd_core::objectives::{bound_report, pnorm_regression, Objective};

fn main() -> lcd_core::Result<()> {
    let x = Vector::from_column_slice(&[1.0, 1.0]);
    let diag = pnorm_sq_diag_model(3.0, 2)?;
    println!("‖x‖₃² diagonal map at (1, 1): {:?}", diag.eval(&x)?.to_dense().diagonal().as_slice());
    println!("excess L_C = {:?}", diag.excess());

    let both = sum_models(&scale_model(&diag, 0.5)?, &scale_model(&pnorm_sq_rank1_model(3.0, 2)?, 0.5)?)?;
    println!("½ diag + ½ rank-one: {} (structure {:?})", both.label(), both.structure());

    let a = Matrix::from_row_slice(3, 2, &[1.0, 0.5, -1.0, 2.0, 0.3, 0.3]);
    let b = Vector::from_column_slice(&[0.2, -0.1, 1.0]);
    let shifted = affine_precompose(&pnorm_sq_diag_model(3.0, 3)?, &a, &(-&b))?;
    println!("precomposed with x ↦ Ax − b: dimension {}, excess {:?}", shifted.dim(), shifted.excess());

    // the same map as shipped with ‖Ax − b‖₃², and a convex combination
    let reg = pnorm_regression(&a, &b, 3.0, false)?;
    let mixed: Objective = reg.clone().with_model(sum_models(
        &scale_model(&reg.model, 0.5)?,
        &scale_model(&pnorm_regression(&a, &b, 3.0, true)?.model, 0.5)?,
    )?)?;
    for obj in [&reg, &mixed] {
        let rep = bound_report(obj, 10_000, 7)?;
        println!(
            "{} [{}]: lower {:.1e}, upper {:?}",
            obj.name,
            obj.model.label(),
            rep.worst_lower_violation,
            rep.worst_upper_violation
        );
    }
    Ok(())
}
