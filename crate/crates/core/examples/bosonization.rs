//! Bilinear exponent of the fermion model against the vertex exponent of the
//! free boson, and the matched `beta` as the coupling varies.
//!
//! Usage: `cargo run --example bosonization -- [lambda]`

use std::f64::consts::PI;

use thirring_lab::bosonization::{
    fermion_bilinear_exponent, geometric_grid, match_beta, run_bosonization_suite, vertex_exponent, BosonParams,
    VertexCharge,
};
use thirring_lab::thirring::ThirringParams;

fn main() -> thirring_lab::Result<()> {
    let lambda: f64 = std::env::args().nth(1).map_or(0.2, |s| s.parse().expect("lambda"));
    let grid = geometric_grid(1.0, 100.0, 24)?;
    for l in [0.0, lambda] {
        let params = ThirringParams::new(l, 0.5)?;
        let b = fermion_bilinear_exponent(&params, VertexCharge::Plus, &grid)?;
        let m = match_beta(&params)?;
        println!(
            "lambda = {l:+.3}: bilinear exponent {:.8} (analytic {:.8}), beta = {:.8} = 4 pi + {:.3e}, vertex exponent {:.8}",
            b.exponent,
            b.analytic,
            m.beta,
            m.beta - 4.0 * PI,
            vertex_exponent(m.beta)
        );
    }
    let report = run_bosonization_suite(&ThirringParams::free(), &BosonParams::new(4.0 * PI, 1.0)?, &grid, 20, 1)?;
    println!("free current ratio <JJ>_fermion / <JJ>_boson = {:.8}", report.current_ratio);
    for c in &report.checks {
        println!("{:<32} {:.3e} (tol {:.0e}) {}", c.name, c.max_deviation, c.tolerance, if c.passed { "ok" } else { "FAIL" });
    }
    Ok(())
}
