//! Synthetic landmark sequences with known intensity and point roles.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)`. Generation
//! draws, in order: base positions (uniform in `[-50, 50)` per coordinate,
//! point-major), then per-frame noise (`sigma * N(0,1)`, frame-major, point,
//! coordinate). Corruption uses the same seed on stream 1.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::analysis::AUEvent;
use crate::error::{Error, Result};
use crate::seqdata::{ResponseKind, ScalarResponse, Sequence};

/// Temporal course of a moving point, valued in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Profile {
    /// Rise centred on `t1`, fall centred on `t2`, each `ramp` frames wide.
    Trapezoid { t1: usize, t2: usize, ramp: usize },
    /// Single rise (or fall) centred on `center`.
    Ramp { center: usize, ramp: usize, rising: bool },
    /// 1 strictly between `t1` and `t2`.
    Box { t1: usize, t2: usize },
    AuEvent {
        ne_start: usize,
        onset: usize,
        apex: usize,
        offset: usize,
        ne_end: usize,
    },
}

fn ramp_up(t: usize, center: usize, ramp: usize) -> f64 {
    if ramp == 0 {
        return if t > center { 1.0 } else { 0.0 };
    }
    ((t as f64 - center as f64) / ramp as f64 + 0.5).clamp(0.0, 1.0)
}

impl Profile {
    pub fn value_at(&self, t: usize) -> f64 {
        match *self {
            Profile::Trapezoid { t1, t2, ramp } => {
                let up = ramp_up(t, t1, ramp);
                let down = if ramp == 0 {
                    if t < t2 { 1.0 } else { 0.0 }
                } else {
                    1.0 - ramp_up(t, t2, ramp)
                };
                up.min(down)
            }
            Profile::Ramp { center, ramp, rising } => {
                let up = ramp_up(t, center, ramp);
                if rising {
                    up
                } else if ramp == 0 {
                    if t < center { 1.0 } else { 0.0 }
                } else {
                    1.0 - up
                }
            }
            Profile::Box { t1, t2 } => {
                if t > t1 && t < t2 {
                    1.0
                } else {
                    0.0
                }
            }
            Profile::AuEvent {
                ne_start,
                onset,
                apex,
                offset,
                ne_end,
            } => self::au_event(ne_start, onset, apex, offset, ne_end).value_at(t),
        }
    }

    /// `(t1, t2)` edges of the profile, `None` where there is no edge.
    pub fn transitions(&self) -> (Option<usize>, Option<usize>) {
        match *self {
            Profile::Trapezoid { t1, t2, .. } | Profile::Box { t1, t2 } => (Some(t1), Some(t2)),
            Profile::Ramp { center, rising, .. } => {
                if rising {
                    (Some(center), None)
                } else {
                    (None, Some(center))
                }
            }
            Profile::AuEvent { onset, offset, .. } => (Some(onset), Some(offset)),
        }
    }

    fn validate(&self, len: usize) -> Result<()> {
        let ok = match *self {
            Profile::Trapezoid { t1, t2, .. } | Profile::Box { t1, t2 } => t1 < t2 && t2 < len,
            Profile::Ramp { center, .. } => center < len,
            Profile::AuEvent {
                ne_start,
                onset,
                apex,
                offset,
                ne_end,
            } => au_event(ne_start, onset, apex, offset, ne_end).validate(len).is_ok(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::BadSpec(format!("profile {self:?} invalid for {len} frames")))
        }
    }
}

fn au_event(ne_start: usize, onset: usize, apex: usize, offset: usize, ne_end: usize) -> AUEvent {
    AUEvent {
        au_id: String::new(),
        ne_start,
        onset,
        apex,
        offset,
        ne_end,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovingPoint {
    pub point: usize,
    pub displacement: Vec<f64>,
    pub profile: Profile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum OutlierMode {
    /// Uniform random position inside the clean sequence's bounding box,
    /// redrawn every frame.
    JumpEveryFrame,
    /// Fixed offset of length `magnitude` in a random direction on frames
    /// `start..=end`.
    BurstFrames { start: usize, end: usize, magnitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outlier {
    pub point: usize,
    pub mode: OutlierMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub num_points: usize,
    pub num_frames: usize,
    pub dim: usize,
    pub moving_points: Vec<MovingPoint>,
    pub noise_sigma: f64,
    #[serde(default)]
    pub outliers: Vec<Outlier>,
    pub seed: u64,
    #[serde(default)]
    pub nose_index: Option<usize>,
    /// Points generated without noise.
    #[serde(default)]
    pub noise_free_points: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// Profile of the first moving point.
    pub intensity: ScalarResponse,
    pub t1: Option<usize>,
    pub t2: Option<usize>,
    pub moving_set: BTreeSet<usize>,
    pub static_set: BTreeSet<usize>,
    pub outlier_set: BTreeSet<usize>,
}

impl SynthSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::BadSpec(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::BadSpec(m));
        if !(self.dim == 2 || self.dim == 3) {
            return bad(format!("dim must be 2 or 3, got {}", self.dim));
        }
        if self.num_points == 0 || self.num_frames < 2 {
            return bad("need at least one point and two frames".into());
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!("noise_sigma must be finite and >= 0, got {}", self.noise_sigma));
        }
        let mut seen = BTreeSet::new();
        for m in &self.moving_points {
            if m.point >= self.num_points || !seen.insert(m.point) {
                return bad(format!("moving point {} out of range or repeated", m.point));
            }
            if m.displacement.len() != self.dim {
                return bad(format!("displacement of point {} must have {} components", m.point, self.dim));
            }
            let norm: f64 = m.displacement.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(norm > 0.0 && norm.is_finite()) {
                return bad(format!("displacement of point {} must be nonzero", m.point));
            }
            m.profile.validate(self.num_frames)?;
        }
        for o in &self.outliers {
            if o.point >= self.num_points || !seen.insert(o.point) {
                return bad(format!("outlier point {} out of range or also moving", o.point));
            }
            if let OutlierMode::BurstFrames { start, end, magnitude } = o.mode {
                if start > end || end >= self.num_frames || !magnitude.is_finite() {
                    return bad(format!("burst {start}..={end} invalid"));
                }
            }
        }
        for &p in self.noise_free_points.iter().chain(&self.nose_index) {
            if p >= self.num_points {
                return bad(format!("point {p} out of range"));
            }
        }
        Ok(())
    }

    fn ground_truth(&self) -> GroundTruth {
        let moving_set: BTreeSet<usize> = self.moving_points.iter().map(|m| m.point).collect();
        let outlier_set: BTreeSet<usize> = self.outliers.iter().map(|o| o.point).collect();
        let static_set = (0..self.num_points)
            .filter(|p| !moving_set.contains(p) && !outlier_set.contains(p))
            .collect();
        let (values, (t1, t2)) = match self.moving_points.first() {
            Some(m) => (
                (0..self.num_frames).map(|t| m.profile.value_at(t)).collect(),
                m.profile.transitions(),
            ),
            None => (vec![0.0; self.num_frames], (None, None)),
        };
        GroundTruth {
            intensity: ScalarResponse::new(values, ResponseKind::Approximated),
            t1,
            t2,
            moving_set,
            static_set,
            outlier_set,
        }
    }
}

pub fn generate(spec: &SynthSpec) -> Result<(Sequence, GroundTruth)> {
    spec.validate()?;
    let (n, t_len, d) = (spec.num_points, spec.num_frames, spec.dim);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let base: Vec<f64> = (0..n * d).map(|_| rng.random_range(-50.0..50.0)).collect();
    let mut motion: Vec<Option<&MovingPoint>> = vec![None; n];
    for m in &spec.moving_points {
        motion[m.point] = Some(m);
    }
    let noisy: Vec<bool> = (0..n)
        .map(|i| !spec.noise_free_points.contains(&i))
        .collect();

    let mut points = Vec::with_capacity(t_len * n * d);
    for t in 0..t_len {
        for i in 0..n {
            let p = motion[i].map_or(0.0, |m| m.profile.value_at(t));
            for c in 0..d {
                let mut v = base[i * d + c];
                if let Some(m) = motion[i] {
                    v += m.displacement[c] * p;
                }
                if noisy[i] && spec.noise_sigma > 0.0 {
                    let z: f64 = rng.sample(StandardNormal);
                    v += spec.noise_sigma * z;
                }
                points.push(v);
            }
        }
    }
    let mut seq = Sequence::new(format!("synth_{}", spec.seed), d, n, t_len, points)?;
    if let Some(nose) = spec.nose_index {
        seq = seq.with_nose_index(nose)?;
    }
    let seq = corrupt(&seq, &spec.outliers, spec.seed)?;
    Ok((seq, spec.ground_truth()))
}

/// Applies outlier corruptions; touches only the listed points (and, for
/// bursts, only the listed frames).
pub fn corrupt(seq: &Sequence, outliers: &[Outlier], seed: u64) -> Result<Sequence> {
    if outliers.is_empty() {
        return Ok(seq.clone());
    }
    let (n, t_len, d) = (seq.num_points(), seq.num_frames(), seq.dim());
    for o in outliers {
        if o.point >= n {
            return Err(Error::BadIndex {
                index: o.point,
                num_points: n,
            });
        }
    }
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in seq.coords().chunks_exact(d) {
        for c in 0..d {
            lo[c] = lo[c].min(p[c]);
            hi[c] = hi[c].max(p[c]);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut points = seq.coords().to_vec();
    for o in outliers {
        match o.mode {
            OutlierMode::JumpEveryFrame => {
                for t in 0..t_len {
                    for c in 0..d {
                        let v = if hi[c] > lo[c] {
                            rng.random_range(lo[c]..hi[c])
                        } else {
                            lo[c]
                        };
                        points[(t * n + o.point) * d + c] = v;
                    }
                }
            }
            OutlierMode::BurstFrames { start, end, magnitude } => {
                if start > end || end >= t_len {
                    return Err(Error::BadSpec(format!("burst {start}..={end} outside {t_len} frames")));
                }
                let dir = random_unit(&mut rng, d);
                for t in start..=end {
                    for c in 0..d {
                        points[(t * n + o.point) * d + c] += magnitude * dir[c];
                    }
                }
            }
        }
    }
    seq.with_points(t_len, points)
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x: &f64| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Ready-made specifications used by the test suites and the `synth`
/// command. Preset parameters are drawn from a `ChaCha8Rng` on stream 2 so
/// they do not disturb generation.
pub mod presets {
    use super::*;

    pub const SUITE_POINTS: usize = 20;
    pub const SUITE_FRAMES: usize = 100;
    pub const SUITE_MOVERS: usize = 5;
    pub const SUITE_AMPLITUDE: f64 = 10.0;
    pub const SUITE_SIGMA: f64 = 2.0;
    pub const SUITE_RAMP: usize = 8;

    fn preset_rng(seed: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(2);
        rng
    }

    fn movers(rng: &mut ChaCha8Rng, points: std::ops::Range<usize>, dim: usize, amplitude: f64, profile: &Profile) -> Vec<MovingPoint> {
        points
            .map(|point| MovingPoint {
                point,
                displacement: random_unit(rng, dim).into_iter().map(|v| v * amplitude).collect(),
                profile: profile.clone(),
            })
            .collect()
    }

    fn suite(seed: u64, profile: Profile) -> SynthSpec {
        let mut rng = preset_rng(seed);
        SynthSpec {
            num_points: SUITE_POINTS,
            num_frames: SUITE_FRAMES,
            dim: 3,
            moving_points: movers(&mut rng, 1..1 + SUITE_MOVERS, 3, SUITE_AMPLITUDE, &profile),
            noise_sigma: SUITE_SIGMA,
            outliers: Vec::new(),
            seed,
            nose_index: Some(0),
            noise_free_points: vec![0],
        }
    }

    /// 20 points, 5 movers of amplitude 10, noise 2, plateau on [20, 60].
    pub fn default_suite(seed: u64) -> SynthSpec {
        suite(
            seed,
            Profile::Trapezoid {
                t1: 20,
                t2: 60,
                ramp: SUITE_RAMP,
            },
        )
    }

    /// Default suite with a single rise in the first half.
    pub fn rise_only(seed: u64) -> SynthSpec {
        let center = preset_rng(seed ^ 0x5eed).random_range(15..40);
        suite(
            seed,
            Profile::Ramp {
                center,
                ramp: SUITE_RAMP,
                rising: true,
            },
        )
    }

    /// Default suite with a single fall in the second half.
    pub fn fall_only(seed: u64) -> SynthSpec {
        let center = preset_rng(seed ^ 0x5eed).random_range(60..85);
        suite(
            seed,
            Profile::Ramp {
                center,
                ramp: SUITE_RAMP,
                rising: false,
            },
        )
    }

    /// Default suite with the last point jumping every frame.
    pub fn jitter(seed: u64) -> SynthSpec {
        let mut s = default_suite(seed);
        s.outliers.push(Outlier {
            point: SUITE_POINTS - 1,
            mode: OutlierMode::JumpEveryFrame,
        });
        s
    }

    /// Point count of [`two_au`]: reference, 2 blink, 5 chin, 2 static.
    pub const TWO_AU_POINTS: usize = 10;
    pub const TWO_AU_SIGMA: f64 = 0.2;
    pub const BLINK_POINTS: std::ops::Range<usize> = 1..3;
    pub const CHIN_POINTS: std::ops::Range<usize> = 3..8;

    /// Two action units on disjoint points: a short, small blink and a long,
    /// large chin movement. Returns the spec and one event per unit.
    pub fn two_au(seed: u64, noise_sigma: f64) -> (SynthSpec, Vec<AUEvent>) {
        let mut rng = preset_rng(seed);
        let blink_start = rng.random_range(40..60);
        let blink = AUEvent {
            au_id: "AU45".into(),
            ne_start: blink_start,
            onset: blink_start + 1,
            apex: blink_start + 2,
            offset: blink_start + 3,
            ne_end: blink_start + 4,
        };
        let chin = AUEvent {
            au_id: "AU17".into(),
            ne_start: 5,
            onset: 15,
            apex: 35,
            offset: 70,
            ne_end: 90,
        };
        let profile = |e: &AUEvent| Profile::AuEvent {
            ne_start: e.ne_start,
            onset: e.onset,
            apex: e.apex,
            offset: e.offset,
            ne_end: e.ne_end,
        };
        let mut moving = movers(&mut rng, BLINK_POINTS, 2, 4.0, &profile(&blink));
        moving.extend(movers(&mut rng, CHIN_POINTS, 2, 12.0, &profile(&chin)));
        let spec = SynthSpec {
            num_points: TWO_AU_POINTS,
            num_frames: SUITE_FRAMES,
            dim: 2,
            moving_points: moving,
            noise_sigma,
            outliers: Vec::new(),
            seed,
            nose_index: Some(0),
            noise_free_points: vec![0],
        };
        (spec, vec![blink, chin])
    }

    /// `per_cluster` rows around each of three centres in `[0, 1]^width`
    /// that are at least 0.5 apart; returns rows and true labels.
    pub fn gaussian_clusters(seed: u64, per_cluster: usize, width: usize, sigma: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = preset_rng(seed);
        let mut centers: Vec<Vec<f64>> = Vec::new();
        while centers.len() < 3 {
            let c: Vec<f64> = (0..width).map(|_| rng.random_range(0.0..1.0)).collect();
            if centers
                .iter()
                .all(|o| o.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum::<f64>() >= 0.25)
            {
                centers.push(c);
            }
        }
        let mut rows = Vec::with_capacity(3 * per_cluster);
        let mut labels = Vec::with_capacity(3 * per_cluster);
        for (l, c) in centers.iter().enumerate() {
            for _ in 0..per_cluster {
                rows.push(
                    c.iter()
                        .map(|v| v + sigma * rng.sample::<f64, _>(StandardNormal))
                        .collect(),
                );
                labels.push(l);
            }
        }
        (rows, labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::response::local_pca_response;

    #[test]
    fn noiseless_single_mover_is_recovered() {
        let profile = Profile::Trapezoid { t1: 20, t2: 60, ramp: 10 };
        let spec = SynthSpec {
            num_points: 3,
            num_frames: 100,
            dim: 3,
            moving_points: vec![MovingPoint {
                point: 1,
                displacement: vec![3.0, 4.0, 0.0],
                profile: profile.clone(),
            }],
            noise_sigma: 0.0,
            outliers: vec![],
            seed: 1,
            nose_index: Some(0),
            noise_free_points: vec![],
        };
        let (seq, gt) = generate(&spec).unwrap();
        let r = local_pca_response(&seq, 1);
        let sign = if r.values[40] > r.values[0] { 1.0 } else { -1.0 };
        let offset = r.values[0];
        for t in 0..100 {
            let want = 5.0 * profile.value_at(t);
            assert!((sign * (r.values[t] - offset) - want).abs() < 1e-9, "frame {t}");
        }
        assert_eq!(gt.moving_set, BTreeSet::from([1]));
        assert_eq!(gt.static_set, BTreeSet::from([0, 2]));
        assert_eq!((gt.t1, gt.t2), (Some(20), Some(60)));
    }

    #[test]
    fn deterministic() {
        let a = generate(&presets::jitter(7)).unwrap().0;
        let b = generate(&presets::jitter(7)).unwrap().0;
        let c = generate(&presets::jitter(8)).unwrap().0;
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn burst_is_local() {
        let (seq, _) = generate(&presets::default_suite(3)).unwrap();
        let burst = [Outlier {
            point: 4,
            mode: OutlierMode::BurstFrames { start: 50, end: 51, magnitude: 100.0 },
        }];
        let out = corrupt(&seq, &burst, 3).unwrap();
        for t in 0..seq.num_frames() {
            for i in 0..seq.num_points() {
                let same = seq.point(t, i) == out.point(t, i);
                assert_eq!(same, !(i == 4 && (50..=51).contains(&t)));
            }
        }
        let shift: f64 = seq
            .point(50, 4)
            .iter()
            .zip(out.point(50, 4))
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!((shift - 100.0).abs() < 1e-9);
        assert_eq!(corrupt(&seq, &[], 3).unwrap(), seq);
        let bad = [Outlier { point: 99, mode: OutlierMode::JumpEveryFrame }];
        assert!(matches!(corrupt(&seq, &bad, 3), Err(Error::BadIndex { .. })));
    }

    #[test]
    fn spec_json_round_trip() {
        let s = presets::jitter(5);
        assert_eq!(SynthSpec::from_json(&s.to_json()).unwrap(), s);
        assert!(matches!(SynthSpec::from_json("{}"), Err(Error::BadSpec(_))));
    }

    #[test]
    fn invalid_specs() {
        let mut s = presets::default_suite(1);
        s.moving_points[0].displacement = vec![0.0; 3];
        assert!(generate(&s).is_err());
        let mut s = presets::default_suite(1);
        s.moving_points[0].profile = Profile::Box { t1: 50, t2: 40 };
        assert!(generate(&s).is_err());
        let mut s = presets::jitter(1);
        s.outliers[0].point = 1;
        assert!(generate(&s).is_err());
    }

    #[test]
    fn profile_shapes() {
        let p = Profile::Trapezoid { t1: 20, t2: 60, ramp: 8 };
        assert_eq!(p.value_at(16), 0.0);
        assert_eq!(p.value_at(20), 0.5);
        assert_eq!(p.value_at(24), 1.0);
        assert_eq!(p.value_at(60), 0.5);
        assert_eq!(p.value_at(64), 0.0);
        let f = Profile::Ramp { center: 70, ramp: 8, rising: false };
        assert_eq!(f.value_at(0), 1.0);
        assert_eq!(f.value_at(99), 0.0);
        assert_eq!(f.transitions(), (None, Some(70)));
    }
}
