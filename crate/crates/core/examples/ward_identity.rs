//! Contact coefficients of the vector and axial Ward identities.
//!
//! Usage: `cargo run --example ward_identity -- [lambda]`

use thirring_lab::thirring::{compute_anomalies, Normalization, Point, ThirringParams};
use thirring_lab::wti::{run_wti_suite, QuadratureSpec};

fn main() -> thirring_lab::Result<()> {
    let lambda: f64 = std::env::args().nth(1).map_or(0.1, |s| s.parse().expect("lambda"));
    let params = ThirringParams::new(lambda, 0.5)?;
    let an = compute_anomalies(&params)?;
    let x = Point::new(0.0, 0.0);
    let y = Point::new(1.3, 0.4);
    let rep = run_wti_suite(x, y, &params, &Normalization::default(), &QuadratureSpec::default())?;
    println!("lambda = {lambda}, xi = 1/2");
    println!("vector: a_est = {:.6} (at x {:.6}, at y {:.6}), a = {:.6}", rep.vector.coefficient, rep.vector.at_x, rep.vector.at_y, an.a);
    println!("axial:  a_bar_est = {:.6} (at x {:.6}, at y {:.6}), a_bar = {:.6}", rep.axial.coefficient, rep.axial.at_x, rep.axial.at_y, an.a_bar);
    for c in &rep.checks {
        println!("{:<34} {:.3e} (tol {:.0e}) {}", c.name, c.value, c.tolerance, if c.passed { "ok" } else { "FAIL" });
    }
    Ok(())
}
