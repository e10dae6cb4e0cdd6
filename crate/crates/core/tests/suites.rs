//! Behaviour on the synthetic suites with generator ground truth.

use expression_response::align::{warp_sequence, WarpPath};
use expression_response::analysis::{au_intensity, AUEvent};
use expression_response::metrics::{apex_frame, pcc};
use expression_response::response::{estimate_intensity, ResponseConfig, TransitionMode};
use expression_response::seqdata::{center_sequence, Sequence};
use expression_response::synth::{generate, presets, MovingPoint, Profile, SynthSpec};

#[test]
fn movers_outrank_static_points() {
    let cfg = ResponseConfig::default();
    for seed in 0..100 {
        let (seq, gt) = generate(&presets::default_suite(seed)).unwrap();
        let r = estimate_intensity(&seq, &cfg).unwrap();
        let w = &r.weights.0;
        let weakest_mover = gt.moving_set.iter().map(|&m| w[m]).fold(f64::INFINITY, f64::min);
        assert!(gt.static_set.iter().all(|&s| w[s] < weakest_mover), "seed {seed}");
        let apex = apex_frame(&r.transitions.unwrap()).unwrap();
        assert!(apex.abs_diff(40) <= 2, "seed {seed}: apex {apex}");
    }
}

#[test]
fn jitter_point_ranks_below_every_mover() {
    let cfg = ResponseConfig::default();
    let mut pcc_sum = 0.0;
    for seed in 0..100 {
        let (seq, gt) = generate(&presets::jitter(seed)).unwrap();
        let r = estimate_intensity(&seq, &cfg).unwrap();
        let j = *gt.outlier_set.iter().next().unwrap();
        assert!(gt.moving_set.iter().all(|&m| r.weights.0[m] > r.weights.0[j]), "seed {seed}");
        pcc_sum += pcc(&r.final_normalized.values, &gt.intensity.values).unwrap().value;
    }
    assert!(pcc_sum / 100.0 >= 0.9);
}

#[test]
fn single_early_rise_is_rise_only() {
    let mut spec = presets::rise_only(0);
    for m in &mut spec.moving_points {
        m.profile = Profile::Ramp { center: 5, ramp: 4, rising: true };
    }
    let (seq, _) = generate(&spec).unwrap();
    let tr = estimate_intensity(&seq, &ResponseConfig::default()).unwrap().transitions.unwrap();
    assert_eq!(tr.mode, TransitionMode::RiseOnly);
    assert!(tr.t1.unwrap().abs_diff(5) <= 2);
}

#[test]
fn whole_sequence_event_on_clean_trapezoid() {
    let mut spec = presets::default_suite(3);
    spec.noise_sigma = 0.0;
    let (seq, _) = generate(&spec).unwrap();
    let ev = AUEvent { au_id: "AU12".into(), ne_start: 0, onset: 16, apex: 24, offset: 56, ne_end: 64 };
    let r = au_intensity(&seq, &ev, &ResponseConfig::default(), 1.0).unwrap();
    assert!(r.mse_full < 0.5, "mse {}", r.mse_full);
}

#[test]
fn drift_is_removed_by_centering() {
    let (seq, _) = generate(&presets::default_suite(9)).unwrap();
    let (d, n, t_len) = (seq.dim(), seq.num_points(), seq.num_frames());
    let drifted: Vec<f64> = seq
        .coords()
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let t = (k / (n * d)) as f64;
            v + [0.7 * t, -0.3 * t, 5.0 + 0.01 * t * t][k % d]
        })
        .collect();
    let drifted = Sequence::new("d", d, n, t_len, drifted).unwrap().with_nose_index(0).unwrap();
    let a = center_sequence(&seq, None).unwrap();
    let b = center_sequence(&drifted, None).unwrap();
    assert!(a.coords().iter().zip(b.coords()).all(|(x, y)| (x - y).abs() < 1e-9));
}

#[test]
fn warp_with_trivial_paths() {
    let (seq, _) = generate(&presets::default_suite(2)).unwrap();
    let t_len = seq.num_frames();
    let same = warp_sequence(&seq, &WarpPath::identity(t_len), t_len).unwrap();
    assert_eq!(same.coords(), seq.coords());
    // every frame shown twice, then matched back one-to-one in template time
    let doubled: Vec<f64> = (0..t_len).flat_map(|t| [seq.frame(t), seq.frame(t)].concat()).collect();
    let slow = Sequence::new("slow", seq.dim(), seq.num_points(), 2 * t_len, doubled).unwrap();
    let pairs = (0..2 * t_len).map(|s| (s, s / 2)).collect();
    let back = warp_sequence(&slow, &WarpPath { pairs }, t_len).unwrap();
    assert_eq!(back.coords(), seq.coords());
}

#[test]
fn noiseless_mover_profile_is_exact() {
    let profile = Profile::Box { t1: 30, t2: 70 };
    let spec = SynthSpec {
        num_points: 2,
        num_frames: 100,
        dim: 2,
        moving_points: vec![MovingPoint { point: 1, displacement: vec![0.0, -2.0], profile }],
        noise_sigma: 0.0,
        outliers: vec![],
        seed: 0,
        nose_index: Some(0),
        noise_free_points: vec![],
    };
    let (seq, gt) = generate(&spec).unwrap();
    let r = estimate_intensity(&seq, &ResponseConfig::default()).unwrap();
    let tr = r.transitions.unwrap();
    assert_eq!((tr.t1, tr.t2), (Some(30), Some(70)));
    assert!(r.final_normalized.values.iter().zip(&gt.intensity.values).all(|(a, b)| (a - b).abs() < 1e-12));
}
