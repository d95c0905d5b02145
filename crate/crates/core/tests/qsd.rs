use driven_kerr::analysis::{entropy_with_error, von_neumann_entropy, DensityMatrix};
use driven_kerr::qsd::{
    run_ensemble, run_trajectory, run_trajectory_with, trajectory_seed, EnsembleAccumulator, EnsembleConfig,
    SampleSpec, StateVector, TrajectoryConfig,
};
use driven_kerr::{Frame, SystemParams};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn small() -> (TrajectoryConfig, SampleSpec) {
    let p = SystemParams::new(0.7, -4.0, 5.0, 1.5, 1.0);
    let cfg = TrajectoryConfig { dt: 1e-3, ..TrajectoryConfig::new(p, 16, 2.0) };
    let samples = SampleSpec::uniform(2.0, p.modulation_period().unwrap(), 10).with_snapshots(vec![1.0, 2.0]);
    (cfg, samples)
}

#[test]
fn trajectories_are_bitwise_reproducible() {
    let (cfg, samples) = small();
    let a = run_trajectory(5, &cfg, &samples).unwrap();
    let b = run_trajectory(5, &cfg, &samples).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, run_trajectory(6, &cfg, &samples).unwrap());
    assert!(a.mean_n.iter().all(|&n| (0.0..=15.0).contains(&n)));
}

#[test]
fn ensemble_independent_of_worker_count() {
    let (cfg, samples) = small();
    let mut ens = EnsembleConfig::new(cfg, samples, 48, 3);
    ens.groups = 6;
    let results: Vec<_> = [1, 2, 5]
        .iter()
        .map(|&w| run_ensemble(&EnsembleConfig { workers: Some(w), ..ens.clone() }).unwrap())
        .collect();
    assert_eq!(results[0], results[1]);
    assert_eq!(results[0], results[2]);
}

#[test]
fn accumulation_is_partition_invariant() {
    let (cfg, samples) = small();
    let states: Vec<StateVector> = (0..24)
        .map(|i| run_trajectory(trajectory_seed(1, i), &cfg, &samples).unwrap().snapshots.remove(1))
        .collect();
    let mut serial = EnsembleAccumulator::new(16);
    for s in &states {
        serial.add(s).unwrap();
    }
    let mut parts = vec![EnsembleAccumulator::new(16), EnsembleAccumulator::new(16), EnsembleAccumulator::new(16)];
    for (i, s) in states.iter().enumerate().rev() {
        parts[(i * 7) % 3].add(s).unwrap();
    }
    let mut merged = parts.pop().unwrap();
    for p in parts.iter().rev() {
        merged.merge(p).unwrap();
    }
    assert_eq!(serial, merged);
}

#[test]
fn frames_agree_statistically() {
    let p = SystemParams::new(0.7, -6.0, 5.0, 2.0, 1.5);
    let samples = SampleSpec::uniform(2.0, 0.5, 1).with_snapshots(vec![2.0]);
    let run = |frame, seed| {
        let cfg = TrajectoryConfig { frame, dt: 5e-4, ..TrajectoryConfig::new(p, 20, 2.0) };
        run_ensemble(&EnsembleConfig { groups: 10, ..EnsembleConfig::new(cfg, samples.clone(), 100, seed) }).unwrap()
    };
    let a = run(Frame::Omega1, 1);
    let b = run(Frame::Omega2, 2);
    for (x, y) in a.mean_n.iter().zip(&b.mean_n) {
        let se = x.std_err().hypot(y.std_err()).max(1e-12);
        assert!((x.mean() - y.mean()).abs() < 4.0 * se, "{} vs {}", x.mean(), y.mean());
    }
    let (sa, sb) = (entropy_with_error(&a.snapshots[0]).unwrap(), entropy_with_error(&b.snapshots[0]).unwrap());
    assert!((sa.value - sb.value).abs() < 4.0 * sa.std_err.hypot(sb.std_err));
}

#[test]
fn single_trajectory_state_is_pure() {
    let (cfg, samples) = small();
    let rec = run_trajectory(2, &cfg, &samples).unwrap();
    let rho = DensityMatrix::from_state(&rec.snapshots[1]).unwrap();
    assert!(von_neumann_entropy(&rho).unwrap() < 1e-10);
}

/// Brownian increments for `levels` successively halved steps: the coarsest
/// path is drawn directly and every finer one by Brownian-bridge refinement,
/// so all levels share one underlying path.
fn refined_paths(rng: &mut ChaCha8Rng, dt0: f64, n0: usize, levels: usize) -> Vec<Vec<Complex64>> {
    let gauss = |rng: &mut ChaCha8Rng, var: f64| {
        let s = (0.5 * var).sqrt();
        Complex64::new(rng.sample::<f64, _>(StandardNormal) * s, rng.sample::<f64, _>(StandardNormal) * s)
    };
    let mut paths = vec![(0..n0).map(|_| gauss(rng, dt0)).collect::<Vec<_>>()];
    let mut dt = dt0;
    for _ in 1..levels {
        let coarse = paths.last().unwrap();
        let mut fine = Vec::with_capacity(2 * coarse.len());
        for &dw in coarse {
            // Conditional on the sum, each half is dw/2 plus noise of variance dt/4.
            let first = dw * 0.5 + gauss(rng, 0.5 * dt);
            fine.push(first);
            fine.push(dw - first);
        }
        dt *= 0.5;
        paths.push(fine);
    }
    paths
}

#[test]
fn strong_convergence_on_common_paths() {
    let p = SystemParams::new(0.2, -2.0, 5.0, 1.0, 0.5);
    let t_end = 0.5;
    let dt0 = 0.002;
    let levels = 6;
    let mut errs = vec![0.0; levels - 1];
    let samples = SampleSpec::default().with_snapshots(vec![t_end]);
    let paths_per = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..paths_per {
        let paths = refined_paths(&mut rng, dt0, (t_end / dt0).round() as usize, levels);
        let finals: Vec<StateVector> = paths
            .iter()
            .enumerate()
            .map(|(l, path)| {
                let dt = dt0 / 2f64.powi(l as i32);
                let cfg = TrajectoryConfig { dt, ..TrajectoryConfig::new(p, 12, t_end) };
                let mut it = path.iter();
                let mut noise = |_: f64, out: &mut [Complex64]| out[0] = *it.next().unwrap();
                run_trajectory_with(0, &cfg, &samples, &mut noise).unwrap().snapshots.remove(0)
            })
            .collect();
        let reference = finals.last().unwrap();
        for l in 0..levels - 1 {
            let d: f64 = finals[l]
                .coeffs()
                .iter()
                .zip(reference.coeffs())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            errs[l] += d / paths_per as f64;
        }
    }
    // Errors against the finest level must shrink at least like dt^(1/2).
    for l in 0..levels - 3 {
        assert!(errs[l + 1] < errs[l] / 2f64.sqrt() * 1.1, "errors {errs:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn merge_is_commutative_and_associative(seeds in prop::collection::vec(0u64..1000, 3..9)) {
        let dim = 6;
        let state = |s: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let c: Vec<Complex64> = (0..dim).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
            StateVector::from_coeffs(c).unwrap()
        };
        let mut a = EnsembleAccumulator::new(dim);
        let mut b = EnsembleAccumulator::new(dim);
        let mut c = EnsembleAccumulator::new(dim);
        for (i, &s) in seeds.iter().enumerate() {
            [&mut a, &mut b, &mut c][i % 3].add(&state(s)).unwrap();
        }
        let mut left = a.clone();
        left.merge(&b).unwrap();
        left.merge(&c).unwrap();
        let mut right = c.clone();
        let mut bc = b.clone();
        bc.merge(&a).unwrap();
        right.merge(&bc).unwrap();
        prop_assert_eq!(left, right);
    }
}
