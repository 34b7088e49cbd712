//! Anomaly coefficients and the anomalous dimension across the coupling range.
//!
//! Usage: `cargo run --example thirring_anomalies -- [xi]`

use thirring_lab::thirring::{compute_anomalies, ThirringParams};

fn main() -> thirring_lab::Result<()> {
    let xi: f64 = std::env::args().nth(1).map_or(0.5, |s| s.parse().expect("xi"));
    println!("xi = {xi}");
    println!("{:>7} {:>12} {:>12} {:>10} {:>10} {:>12}", "lambda", "nu", "nu_bar", "a", "a_bar", "eta");
    for k in -5..=5 {
        let lambda = 0.1 * k as f64;
        let an = compute_anomalies(&ThirringParams::new(lambda, xi)?)?;
        println!(
            "{lambda:>7.2} {:>12.6e} {:>12.6e} {:>10.6} {:>10.6} {:>12.6e}",
            an.nu, an.nu_bar, an.a, an.a_bar, an.eta
        );
    }
    Ok(())
}
