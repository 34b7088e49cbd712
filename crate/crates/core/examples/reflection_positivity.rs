//! Reflection-positivity Gram matrices of the two-point sector.
//!
//! Usage: `cargo run --example reflection_positivity -- [lambda] [trials]`

use thirring_lab::axioms::{os_gram_two_point, random_half_plane_config, run_axiom_suite};
use thirring_lab::rng::Xoshiro256StarStar;
use thirring_lab::thirring::{Normalization, ThirringParams};

fn main() -> thirring_lab::Result<()> {
    let lambda: f64 = std::env::args().nth(1).map_or(0.1, |s| s.parse().expect("lambda"));
    let trials: usize = std::env::args().nth(2).map_or(50, |s| s.parse().expect("trials"));
    let params = ThirringParams::new(lambda, 0.5)?;
    let norm = Normalization::default();

    let mut rng = Xoshiro256StarStar::from_stream(3, 0);
    let g = os_gram_two_point(&random_half_plane_config(&mut rng, 4), &params, &norm)?;
    println!("contraction: {}", g.contraction);
    println!("4-point example: min eigenvalue {:.3e}, quadratic form {:.6}", g.min_eigenvalue, g.quadratic_form);

    let worst = (0..trials as u64)
        .map(|t| {
            let mut rng = Xoshiro256StarStar::from_stream(3, t + 1);
            let cfg = random_half_plane_config(&mut rng, 1 + (t % 6) as usize);
            os_gram_two_point(&cfg, &params, &norm).map(|g| g.min_eigenvalue)
        })
        .collect::<thirring_lab::Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    println!("lowest eigenvalue over {trials} configurations: {worst:.3e}");

    let report = run_axiom_suite(&params, &norm, trials, 7)?;
    for c in &report.checks {
        println!("{:<28} {:.3e} (tol {:.0e}) {}", c.property, c.worst, c.tolerance, if c.passed { "ok" } else { "FAIL" });
    }
    Ok(())
}
