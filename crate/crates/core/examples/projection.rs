//! One LCD2 projection by hand: eigenvalues, the scalar root β and the
//! resulting point on the boundary of the localization set.

use lcd_core::matrix::{CurvatureMatrix, Matrix, Vector};
use lcd_core::projection::{eval_h, find_beta, lcd2_project, lcd3_project, Beta, NewtonOptions, ProjectionInput};

fn main() -> lcd_core::Result<()> {
    // symbolic case: D = (1), g̃ = (2), Δ = 1 gives β = √2 − 1
    let sol = find_beta(&[2.0], &[1.0], 1.0, NewtonOptions::default())?;
    println!("β = {:?} after {} Newton steps (√2 − 1 = {})", sol.beta, sol.newton_iters, 2f64.sqrt() - 1.0);

    let c = CurvatureMatrix::dense(Matrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 1.0, 0.2, 0.0, 0.2, 0.1]))?;
    let x = Vector::from_column_slice(&[1.0, -1.0, 2.0]);
    let g = Vector::from_column_slice(&[0.8, -0.3, 0.5]);
    let q = c.inv_quad_form(&g)?;
    for frac in [0.1, 0.5, 0.9] {
        let inp = ProjectionInput { x: &x, g: &g, c: &c, gap: frac * 0.5 * q };
        let step = lcd2_project(&inp)?;
        let lcd3 = lcd3_project(&inp)?;
        let h = match step.beta {
            Beta::Finite(b) => {
                let e = c.eigendecompose()?;
                let gt = e.q.tr_mul(&g);
                eval_h(b, gt.as_slice(), e.d.as_slice(), inp.gap).0
            }
            Beta::Infinite => 0.0,
        };
        println!(
            "Δ = {:.4}: β = {:?} ({:?}, {} Newton), H(β) = {h:.1e}, boundary residual {:.1e}; LCD3 γ = {:.4}",
            inp.gap,
            step.beta,
            step.branch,
            step.newton_iters,
            inp.localization_excess(&step.x)?,
            lcd3.gamma
        );
    }
    Ok(())
}
