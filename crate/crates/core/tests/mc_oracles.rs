//! Monte Carlo against exhaustive enumeration, self-duality and the exact
//! Pfaffian solver.

mod common;

use common::tv_distance;
use thirring_lab::ising::{self_dual_coupling, ExactIsing, IsingExactSpec};
use thirring_lab::mc::{
    dim_self_dual_beta_j, locate_tc, measure_correlators, metropolis_sweep, visit_states, Algorithm,
    LatticeModel, MCRun, Observable, TcScan, Variant,
};
use thirring_lab::rng::Xoshiro256StarStar;

#[test]
fn metropolis_samples_boltzmann_3x3() {
    let model = LatticeModel::nnn_ising(3, 1.0, 0.0, 0.4);
    let mut run = MCRun::new(10_000_000, 1000, 11, 2);
    run.algorithm = Algorithm::Metropolis;
    let tv = tv_distance(&model, &run);
    println!("TV = {tv:.2e}");
    assert!(tv <= 1e-2);
}

#[test]
fn hybrid_updates_sample_boltzmann() {
    let run = MCRun::new(2_000_000, 1000, 12, 2);
    let tv = tv_distance(&LatticeModel::nnn_ising(3, 1.0, 0.125, 0.45), &run);
    assert!(tv <= 1e-2, "nnn: {tv}");
    let tv = tv_distance(&LatticeModel::nnn_ising(3, 1.0, -0.2, 0.45), &run);
    assert!(tv <= 1e-2, "frustrated nnn: {tv}");
    for k in [0.2, -0.2] {
        let tv = tv_distance(&LatticeModel::dim(2, 1.0, k, 0.6), &run);
        assert!(tv <= 1e-2, "dim K={k}: {tv}");
    }
    let mut metro = run;
    metro.algorithm = Algorithm::Metropolis;
    let tv = tv_distance(&LatticeModel::dim(2, 1.0, 0.2, 0.6), &metro);
    assert!(tv <= 1e-2, "dim Metropolis: {tv}");
}

#[test]
fn high_temperature_magnetization_vanishes() {
    let model = LatticeModel::nnn_ising(16, 1.0, 0.05, 0.2);
    let run = MCRun::new(20_000, 200, 5, 4);
    let mut per_chain = Vec::new();
    for c in 0..run.chains {
        let mut m = Vec::new();
        visit_states(&model, &run, c, |s| m.push(s.sigma.iter().map(|v| *v as f64).sum::<f64>() / 256.0)).unwrap();
        per_chain.push(m.iter().sum::<f64>() / m.len() as f64);
    }
    let mean = per_chain.iter().sum::<f64>() / 4.0;
    let sd = (per_chain.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / 3.0).sqrt() / 2.0;
    assert!(mean.abs() <= 3.0 * sd.max(1e-3), "{mean} +- {sd}");
}

#[test]
fn acceptance_rate_is_a_fraction() {
    let model = LatticeModel::dim(8, 1.0, 0.05, 0.44);
    let system = model.build().unwrap();
    let mut rng = Xoshiro256StarStar::from_stream(1, 0);
    let mut st = system.random_state(&mut rng);
    let acc = metropolis_sweep(&mut st, &system, model.beta_t, &mut rng).unwrap();
    assert!(acc > 0.0 && acc < 1.0);
}

fn short_scan() -> (TcScan, MCRun) {
    let mut scan = TcScan::new(0.43, 0.45);
    scan.bootstrap = 60;
    let mut run = MCRun::new(3000, 300, 21, 4);
    run.measurement_stride = 1;
    (scan, run)
}

#[test]
fn critical_point_of_nearest_neighbour_model() {
    let (scan, run) = short_scan();
    let est = locate_tc(&LatticeModel::nnn_ising(16, 1.0, 0.0, 0.44), &scan, &run).unwrap();
    println!("{est:?}");
    assert!((est.beta_j - self_dual_coupling()).abs() <= 0.002, "{}", est.beta_j);
}

#[test]
fn critical_point_of_double_ising_matches_self_duality() {
    let (scan, run) = short_scan();
    let dec = locate_tc(&LatticeModel::dim(16, 1.0, 0.0, 0.44), &scan, &run).unwrap();
    assert!((dec.beta_j - self_dual_coupling()).abs() <= 0.002, "K=0: {}", dec.beta_j);
    let lambda = 0.05;
    let mut scan = scan;
    scan.beta_lo = 0.445;
    scan.beta_hi = 0.465;
    let est = locate_tc(&LatticeModel::dim(16, 1.0, lambda, 0.45), &scan, &run).unwrap();
    let exact = dim_self_dual_beta_j(lambda).unwrap();
    println!("located {} +- {}, self-dual {exact}", est.beta_j, est.stderr);
    assert!((est.beta_j - exact).abs() <= 0.002);
}

#[test]
fn no_crossing_is_a_range_error() {
    let mut scan = TcScan::new(0.30, 0.35);
    scan.sizes = vec![8, 16];
    let run = MCRun::new(400, 100, 3, 2);
    let err = locate_tc(&LatticeModel::nnn_ising(8, 1.0, 0.0, 0.3), &scan, &run).unwrap_err();
    assert!(err.to_string().contains("0.3"), "{err}");
}

#[test]
fn decoupled_double_ising_matches_pfaffian() {
    let l = 16;
    let kc = self_dual_coupling();
    let seps: Vec<usize> = (1..=l / 4).collect();
    let run = MCRun::new(60_000, 1000, 31, 4);
    let mc = measure_correlators(&LatticeModel::dim(l, 1.0, 0.0, kc), &run, &Observable::defaults(Variant::Dim), &seps)
        .unwrap();
    // exact average over the same insertion pairs; O+ carries two copies of the site energy
    let exact = ExactIsing::new(&IsingExactSpec::new(l, kc).unwrap()).unwrap();
    let reference: Vec<f64> = exact.centred_pair_series(&seps).unwrap().values.iter().map(|v| 2.0 * v).collect();
    let plus = mc.series(Observable::PlusOplus).unwrap();
    let minus = mc.series(Observable::MinusOminus).unwrap();
    let cross = mc.series(Observable::CrossPlusMinus).unwrap();
    let mut chi2 = 0.0;
    for i in 0..seps.len() {
        let z = (plus.mean[i] - reference[i]) / plus.jackknife_error[i];
        println!(
            "r={} mc {:.5e} +- {:.1e} exact {:.5e} minus {:.5e} cross {:.1e} +- {:.1e}",
            seps[i], plus.mean[i], plus.jackknife_error[i], reference[i], minus.mean[i], cross.mean[i],
            cross.jackknife_error[i]
        );
        chi2 += z * z;
        let dm = (plus.mean[i] - minus.mean[i]) / plus.jackknife_error[i].hypot(minus.jackknife_error[i]);
        assert!(dm.abs() < 4.0, "r={}: plus/minus differ by {dm} sigma", seps[i]);
        assert!((cross.mean[i] / cross.jackknife_error[i]).abs() < 4.0, "r={}: cross", seps[i]);
    }
    let dof = seps.len() as f64;
    println!("chi2/dof = {:.2}, blocks {}", chi2 / dof, mc.blocks);
    assert!(chi2 / dof <= 2.0);
}

#[test]
fn runs_are_reproducible_across_thread_counts() {
    let model = LatticeModel::dim(16, 1.0, 0.05, 0.45);
    let run = MCRun::new(400, 50, 77, 3);
    let seps = [1, 2, 3];
    let go = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| measure_correlators(&model, &run, &Observable::defaults(Variant::Dim), &seps).unwrap())
    };
    let a = go(1);
    let b = go(3);
    let c = go(1);
    for (x, y) in a.series.iter().zip(&b.series) {
        assert_eq!(x.per_chain, y.per_chain);
        assert_eq!(x.mean, y.mean);
    }
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&c).unwrap());
}
