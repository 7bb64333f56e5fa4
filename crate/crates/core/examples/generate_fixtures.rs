//! Regenerates the bundled LibSVM fixtures under `data/`.
//!
//! ```text
//! cargo run --example generate_fixtures
//! ```
//!
//! Output is a pure function of the seeds below.

use std::fs::{self, File};
use std::path::Path;

use lcd_core::io::{write_libsvm, Dataset};
use lcd_core::matrix::{Matrix, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u: f64 = rng.random_range(f64::EPSILON..1.0);
    let v: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

fn round(x: f64, digits: i32) -> f64 {
    let s = 10f64.powi(digits);
    (x * s).round() / s
}

fn save(dir: &Path, name: &str, rows: Matrix, labels: Vector) -> std::io::Result<()> {
    let data = Dataset {
        rows,
        labels,
        source: name.into(),
        scaled: false,
    };
    write_libsvm(&data, File::create(dir.join(name))?).map_err(std::io::Error::other)?;
    println!("wrote {name}: n = {}, d = {}", data.n(), data.d());
    Ok(())
}

/// Binary features with heterogeneous frequencies, labels from a noisy
/// linear score; the shape of the a2a/mushrooms sets at desk scale.
fn classification(rng: &mut ChaCha8Rng, n: usize, d: usize) -> (Matrix, Vector) {
    let freq: Vec<f64> = (0..d).map(|_| rng.random_range(0.03..0.5)).collect();
    let w: Vec<f64> = (0..d).map(|_| 1.5 * normal(rng)).collect();
    let mut a = Matrix::zeros(n, d);
    let mut b = Vector::zeros(n);
    for i in 0..n {
        let mut score = -0.5;
        for j in 0..d {
            if rng.random_bool(freq[j]) {
                a[(i, j)] = 1.0;
                score += w[j];
            }
        }
        // logistic noise
        let u: f64 = rng.random_range(1e-12..1.0 - 1e-12);
        score += (u / (1.0 - u)).ln();
        b[i] = if score > 0.0 { 1.0 } else { -1.0 };
    }
    (a, b)
}

/// Mixed-scale continuous features with a planted linear model.
fn regression(rng: &mut ChaCha8Rng, n: usize, d: usize) -> (Matrix, Vector) {
    let scales: Vec<f64> = (0..d).map(|j| 0.5 + 0.25 * j as f64).collect();
    let x_true: Vec<f64> = (0..d).map(|_| normal(rng)).collect();
    let a = Matrix::from_fn(n, d, |_, j| round(scales[j] * normal(rng), 4));
    let b = Vector::from_fn(n, |i, _| {
        let clean: f64 = (0..d).map(|j| a[(i, j)] * x_true[j]).sum();
        // occasional large outliers for the robust losses
        let noise = if rng.random_bool(0.05) { 8.0 * normal(rng) } else { 0.3 * normal(rng) };
        round(clean + noise, 4)
    });
    (a, b)
}

/// Nearly collinear columns: the Gram matrix has eigenvalues spanning
/// about eleven orders of magnitude.
fn ill_conditioned(rng: &mut ChaCha8Rng, n: usize, d: usize) -> (Matrix, Vector) {
    let base: Vec<f64> = (0..n).map(|_| normal(rng)).collect();
    let a = Matrix::from_fn(n, d, |i, j| base[i] * (1.0 + 0.1 * j as f64) + 1e-5 * normal(rng));
    let b = Vector::from_fn(n, |_, _| normal(rng));
    (a, b)
}

fn main() -> std::io::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    fs::create_dir_all(&dir)?;

    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let (a, b) = classification(&mut rng, 600, 40);
    save(&dir, "logistic.libsvm", a, b)?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (a, b) = classification(&mut rng, 12, 3);
    save(&dir, "toy_logistic.libsvm", a.map(|v| v * 0.75) + Matrix::from_fn(12, 3, |i, j| round(0.1 * ((i * 3 + j) % 7) as f64 - 0.3, 2)), b)?;

    let mut rng = ChaCha8Rng::seed_from_u64(506);
    let (a, b) = regression(&mut rng, 300, 13);
    save(&dir, "regression.libsvm", a, b)?;

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (a, b) = ill_conditioned(&mut rng, 40, 8);
    save(&dir, "ridge_ill_conditioned.libsvm", a, b)?;
    Ok(())
}
