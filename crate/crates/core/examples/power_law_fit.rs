//! Window selection on a power law with a short-distance correction and noise.

use thirring_lab::analysis::{local_slopes, power_law_fit, CorrelatorSeries, WindowPolicy};
use thirring_lab::rng::Xoshiro256StarStar;

fn main() -> thirring_lab::Result<()> {
    let mut rng = Xoshiro256StarStar::from_stream(9, 0);
    let r: Vec<f64> = (1..=32).map(f64::from).collect();
    let noise = 2e-3;
    let values: Vec<f64> = r
        .iter()
        .map(|x| 3.0 * x.powi(-2) * (1.0 + 0.5 / x) * (1.0 + noise * (2.0 * rng.uniform() - 1.0)))
        .collect();
    let errors = values.iter().map(|v| v * noise / 3f64.sqrt()).collect();
    let series = CorrelatorSeries::exact("synthetic", r, values).with_errors(errors);

    for s in local_slopes(&series).iter().step_by(4) {
        println!("local slope {:>4}..{:<4} {:+.4} +- {:.4}", s.r_lo, s.r_hi, s.slope, s.error);
    }
    for policy in [
        WindowPolicy::default(),
        WindowPolicy::Fixed { r_min: 1.0, r_max: 32.0 },
        WindowPolicy::Fixed { r_min: 8.0, r_max: 32.0 },
    ] {
        let fit = power_law_fit(&series, &policy)?;
        println!(
            "{policy:?}: exponent {:.4} +- {:.4} over {:?}, amplitude {:.3}, chi2/dof {:.2} {:?}",
            fit.exponent, fit.stderr, fit.window, fit.amplitude, fit.chi2_per_dof, fit.warnings
        );
    }
    Ok(())
}
