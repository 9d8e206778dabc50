use kmpp_core::geometry::{WeightedPoint, WeightedPointSet};
use kmpp_core::harness::{
    reference_partition, run_experiment, run_on_instance, write_trials_csv, Algorithm,
    ExperimentConfig, RunSettings, TRIALS_CSV_HEADER,
};
use kmpp_core::instances::{gen_gaussian_mixture, GaussianParams, Instance};
use kmpp_core::oracle::DEFAULT_BUDGET;
use kmpp_core::process::PROCESS_CSV_HEADER;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Plain k-means++ written out directly: first center ∝ weight, then ∝ cost.
fn hand_kmeanspp(pts: &[(f64, [f64; 2])], k: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = |mass: &[f64], rng: &mut ChaCha8Rng| {
        let total: f64 = mass.iter().sum();
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        for (i, m) in mass.iter().enumerate() {
            acc += m;
            if acc > u {
                return i;
            }
        }
        mass.len() - 1
    };
    let d2 = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
    let mut cost: Vec<f64> = vec![f64::INFINITY; pts.len()];
    let weights: Vec<f64> = pts.iter().map(|p| p.0).collect();
    for step in 0..k {
        let c = if step == 0 { pick(&weights, &mut rng) } else { pick(&cost, &mut rng) };
        for (i, p) in pts.iter().enumerate() {
            cost[i] = cost[i].min(p.0 * d2(p.1, pts[c].1));
        }
    }
    cost.iter().sum()
}

#[test]
fn single_trial_matches_hand_replay() {
    let pts = [
        (1.0, [0.0, 0.0]),
        (2.0, [1.0, 0.0]),
        (1.0, [5.0, 5.0]),
        (0.5, [6.0, 4.0]),
        (3.0, [-3.0, 2.0]),
    ];
    let x = WeightedPointSet::new(
        2,
        pts.iter().map(|(w, c)| WeightedPoint::new(c.to_vec(), *w)).collect(),
    )
    .unwrap();
    let inst = Instance::plain(x, 2, vec![]).unwrap();
    let reference = reference_partition(&inst, DEFAULT_BUDGET).unwrap();
    for seed in [0u64, 1, 42, 1234] {
        let out = run_on_instance(&inst, &RunSettings::new(Algorithm::KMeansPP, 1, 1, seed), &reference)
            .unwrap();
        let hand = hand_kmeanspp(&pts, 2, mix(seed ^ mix(0)));
        assert!((out.trials[0].final_cost - hand).abs() <= 1e-12 * hand.max(1.0), "seed {seed}");
    }
}

#[test]
fn csv_headers_are_frozen() {
    assert_eq!(
        TRIALS_CSV_HEADER.join(","),
        "trial,seed,final_cost,ratio,lloyd_cost,lloyd_ratio,good_steps,bad_steps,hit_total,hit_max,bad_event"
    );
    assert_eq!(PROCESS_CSV_HEADER.join(","), "trial,round,avg,max_weight,removed_id");
}

#[test]
fn same_config_same_bytes() {
    let cfg: ExperimentConfig = serde_json::from_value(json!({
        "instance": {"generator": "appendix-a", "params": {"k": 30, "ell": 2}},
        "algorithm": "rule:appendix-a-rule",
        "ell": 2,
        "trials": 50,
        "seed": 77,
        "lloyd": {"enabled": true},
    }))
    .unwrap();
    let bytes = |workers| {
        let mut c = cfg.clone();
        c.settings.workers = workers;
        let out = run_experiment(&c).unwrap();
        let mut buf = Vec::new();
        write_trials_csv(&mut buf, &out.trials).unwrap();
        buf
    };
    let a = bytes(1);
    assert_eq!(a, bytes(1));
    assert_eq!(a, bytes(3));
}

#[test]
fn more_candidates_do_not_hurt_on_average() {
    let inst = gen_gaussian_mixture(&GaussianParams {
        k: 10,
        points_per_cluster: 30,
        dim: 2,
        separation: 8.0,
        collinear: false,
        seed: 2,
    })
    .unwrap();
    let reference = reference_partition(&inst, DEFAULT_BUDGET).unwrap();
    let mean_cost = |ell| {
        let mut s = RunSettings::new(Algorithm::Greedy, ell, 300, 5);
        s.instrument = false;
        let out = run_on_instance(&inst, &s, &reference).unwrap();
        out.report.final_cost.mean
    };
    let (one, eight) = (mean_cost(1), mean_cost(8));
    assert!(eight <= one, "ℓ=8: {eight}, ℓ=1: {one}");
}

#[test]
fn ratios_never_beat_exact_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..10 {
        let pts = (0..8)
            .map(|_| WeightedPoint::new(vec![rng.random_range(0.0..10.0)], rng.random_range(0.5..2.0)))
            .collect();
        let inst = Instance::plain(WeightedPointSet::new(1, pts).unwrap(), 3, vec![]).unwrap();
        let reference = reference_partition(&inst, DEFAULT_BUDGET).unwrap();
        let mut s = RunSettings::new(Algorithm::Greedy, 2, 50, 1);
        s.lloyd.enabled = true;
        let out = run_on_instance(&inst, &s, &reference).unwrap();
        assert_eq!(out.report.ratio_below_exact_opt, 0);
        for t in &out.trials {
            assert!(t.lloyd_ratio.unwrap() >= 1.0 - 1e-9);
            assert!(t.lloyd_cost.unwrap() <= t.final_cost);
        }
    }
}
