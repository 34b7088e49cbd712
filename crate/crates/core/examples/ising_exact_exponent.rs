//! Energy-energy correlator of the critical nearest-neighbour Ising model on an
//! open L x L lattice, solved exactly, and its fitted decay exponent.
//!
//! Usage: `cargo run --release --example ising_exact_exponent [L] [r_max]`

use std::time::Instant;

use thirring_lab::analysis::{local_slopes, power_law_fit, WindowPolicy};
use thirring_lab::ising::{default_origin, locate_critical_coupling, Direction, ExactIsing, IsingExactSpec};

fn main() -> thirring_lab::Result<()> {
    let l: usize = std::env::args().nth(1).map(|s| s.parse().expect("L")).unwrap_or(128);
    let r_max: usize = std::env::args().nth(2).map(|s| s.parse().expect("r_max")).unwrap_or(l / 4);
    let kc = locate_critical_coupling()?;
    println!("K_c = {:.12} (self-dual {:.12})", kc.beta_j, kc.self_dual);
    let start = Instant::now();
    let ising = ExactIsing::new(&IsingExactSpec::new(l, kc.beta_j)?)?;
    println!("factorized L={l} in {:.1?}", start.elapsed());
    let rs: Vec<usize> = (1..=r_max).collect();
    let series = ising.energy_correlator_series(default_origin(l), Direction::Horizontal, &rs)?;
    println!("correlators in {:.1?}", start.elapsed());
    for s in local_slopes(&series) {
        println!("  r = {:>3}..{:<3} local slope {:+.5}", s.r_lo, s.r_hi, s.slope);
    }
    let fit = power_law_fit(&series, &WindowPolicy::Fixed { r_min: 4.0, r_max: r_max as f64 })?;
    println!(
        "exponent {:.5} over [{}, {}], kappa_+ = {:.5}",
        fit.exponent, fit.window.0, fit.window.1, fit.kappa()
    );

    // the insertion set used by the Monte Carlo estimator
    let bulk = ising.centred_pair_series(&rs[..(l / 4).min(r_max)])?;
    for policy in [WindowPolicy::default(), WindowPolicy::Fixed { r_min: 4.0, r_max: r_max as f64 }] {
        let fit = power_law_fit(&bulk, &policy)?;
        println!(
            "centred pairs: exponent {:.5} over [{}, {}], kappa_+ = {:.5}",
            fit.exponent, fit.window.0, fit.window.1, fit.kappa()
        );
    }
    println!("total {:.1?}", start.elapsed());
    Ok(())
}
