//! The unsupervised intensity response.
//!
//! Pipeline: center → per-point PCA responses → median derivative response →
//! transition detection → box-shaped approximated response → per-row
//! orientation and [0, 1] scaling → distance-based weights → weighted sum.

mod derivative;
mod local;

pub use derivative::{
    derivative_response, derivative_response_rows, detect_transitions, differentiate,
    find_peaks, gaussian_smooth, is_moving, median, noise_sigma, DerivativeKernel, Peak,
    TransitionEstimate, TransitionMode,
};
pub use local::{local_pca_response, response_matrix};

use std::io::Write;
use std::path::Path;

use crate::config::{parse_bool, parse_kv, parse_value};
use crate::error::{Error, Result};
use crate::seqdata::{
    center_sequence, minmax_scale, ResponseKind, ResponseMatrix, ScalarResponse, Sequence,
    WeightVector,
};

/// Knobs of [`estimate_intensity`].
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseConfig {
    pub kernel: DerivativeKernel,
    /// Gaussian pre-smoothing of each row before differentiation, in frames.
    pub sigma: f64,
    /// Minimum peak prominence as a fraction of the derivative maximum.
    pub min_prominence: f64,
    /// Minimum peak distance in frames; `None` means `max(3, T / 10)`.
    pub min_separation: Option<usize>,
    /// Leave zero-variance rows out of the derivative median.
    pub median_excludes_degenerate: bool,
    /// Leave static rows out of the ranking: they get weight 0 and do not
    /// count toward the maximum distance the other weights are scaled by.
    pub weight_excludes_degenerate: bool,
    /// Rows whose variance is at most `noise_gate` times their estimated
    /// white-noise variance are left out of the derivative median. `0`
    /// disables the gate.
    pub noise_gate: f64,
    /// On `NoTransition`, fall back to uniform weights and a full-length
    /// rise box instead of failing.
    pub fallback_enabled: bool,
    /// Reference point for centering; overrides the sequence's nose index.
    pub reference_index: Option<usize>,
    /// Externally supplied approximated response; skips transition detection.
    pub external_approx: Option<ScalarResponse>,
}

impl Default for ResponseConfig {
    fn default() -> Self {
        Self {
            kernel: DerivativeKernel::Central,
            sigma: 2.0,
            min_prominence: 0.55,
            min_separation: None,
            median_excludes_degenerate: true,
            weight_excludes_degenerate: true,
            noise_gate: 2.0,
            fallback_enabled: false,
            reference_index: None,
            external_approx: None,
        }
    }
}

impl ResponseConfig {
    pub const KEYS: [&'static str; 9] = [
        "kernel",
        "sigma",
        "min_prominence",
        "min_separation",
        "median_excludes_degenerate",
        "weight_excludes_degenerate",
        "noise_gate",
        "fallback_enabled",
        "reference_index",
    ];

    pub fn min_separation_for(&self, num_frames: usize) -> usize {
        self.min_separation.unwrap_or((num_frames / 10).max(3))
    }

    /// Applies one `key=value` setting; returns `Ok(false)` for keys this
    /// config does not own.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        let auto = |v: &str| v.eq_ignore_ascii_case("auto") || v.eq_ignore_ascii_case("none");
        match key {
            "kernel" => self.kernel = value.parse()?,
            "sigma" => self.sigma = parse_value(key, value)?,
            "min_prominence" => self.min_prominence = parse_value(key, value)?,
            "min_separation" => {
                self.min_separation = if auto(value) {
                    None
                } else {
                    Some(parse_value(key, value)?)
                }
            }
            "median_excludes_degenerate" => {
                self.median_excludes_degenerate = parse_bool(key, value)?
            }
            "weight_excludes_degenerate" => {
                self.weight_excludes_degenerate = parse_bool(key, value)?
            }
            "noise_gate" => self.noise_gate = parse_value(key, value)?,
            "fallback_enabled" => self.fallback_enabled = parse_bool(key, value)?,
            "reference_index" => {
                self.reference_index = if auto(value) {
                    None
                } else {
                    Some(parse_value(key, value)?)
                }
            }
            _ => return Ok(false),
        }
        self.validate()?;
        Ok(true)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be >= 0, got {}", self.sigma)));
        }
        if !(0.0..=1.0).contains(&self.min_prominence) {
            return Err(Error::Config(format!(
                "min_prominence must be in [0, 1], got {}",
                self.min_prominence
            )));
        }
        if !(self.noise_gate >= 0.0 && self.noise_gate.is_finite()) {
            return Err(Error::Config(format!(
                "noise_gate must be >= 0, got {}",
                self.noise_gate
            )));
        }
        if self.min_separation == Some(0) {
            return Err(Error::Config("min_separation must be >= 1".into()));
        }
        Ok(())
    }

    /// Parses a config file body; unknown keys are errors.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (k, v) in parse_kv(text)? {
            if !cfg.set(&k, &v)? {
                return Err(Error::Config(format!("unknown key '{k}'")));
            }
        }
        Ok(cfg)
    }

    pub fn to_kv_string(&self) -> String {
        let opt = |v: Option<usize>| v.map_or_else(|| "auto".to_string(), |n| n.to_string());
        format!(
            "kernel={}\nsigma={:?}\nmin_prominence={:?}\nmin_separation={}\nmedian_excludes_degenerate={}\nweight_excludes_degenerate={}\nnoise_gate={:?}\nfallback_enabled={}\nreference_index={}\n",
            self.kernel,
            self.sigma,
            self.min_prominence,
            opt(self.min_separation),
            self.median_excludes_degenerate,
            self.weight_excludes_degenerate,
            self.noise_gate,
            self.fallback_enabled,
            opt(self.reference_index),
        )
    }
}

/// Box-shaped approximated response: 1 strictly between `t1` and `t2`.
pub fn box_response(t1: usize, t2: usize, len: usize) -> Result<ScalarResponse> {
    if !(t1 < t2 && t2 < len) {
        return Err(Error::BadBounds { t1, t2, len });
    }
    let values = (0..len)
        .map(|t| if t > t1 && t < t2 { 1.0 } else { 0.0 })
        .collect();
    Ok(ScalarResponse::new(values, ResponseKind::Approximated))
}

/// One-sided box: 0 up to and including `t1`, 1 afterwards.
pub fn rise_box(t1: usize, len: usize) -> Result<ScalarResponse> {
    if t1 + 1 >= len {
        return Err(Error::BadBounds { t1, t2: len, len });
    }
    let values = (0..len).map(|t| if t > t1 { 1.0 } else { 0.0 }).collect();
    Ok(ScalarResponse::new(values, ResponseKind::Approximated))
}

/// One-sided box: 1 before `t2`, 0 from `t2` on.
pub fn fall_box(t2: usize, len: usize) -> Result<ScalarResponse> {
    if t2 == 0 || t2 >= len {
        return Err(Error::BadBounds { t1: 0, t2, len });
    }
    let values = (0..len).map(|t| if t < t2 { 1.0 } else { 0.0 }).collect();
    Ok(ScalarResponse::new(values, ResponseKind::Approximated))
}

impl TransitionEstimate {
    /// The approximated response this estimate describes.
    pub fn approx_response(&self, len: usize) -> Result<ScalarResponse> {
        match (self.mode, self.t1, self.t2) {
            (TransitionMode::TwoSided, Some(t1), Some(t2)) => box_response(t1, t2, len),
            (TransitionMode::RiseOnly, Some(t1), _) => rise_box(t1, len),
            (TransitionMode::FallOnly, _, Some(t2)) => fall_box(t2, len),
            _ => Err(Error::BadBounds {
                t1: self.t1.unwrap_or(0),
                t2: self.t2.unwrap_or(0),
                len,
            }),
        }
    }
}

fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Scales a local response to [0, 1] in whichever direction lies closer to
/// `approx`. Returns the oriented row and whether it was negated.
pub fn orient_and_scale(row: &[f64], approx: &[f64]) -> Result<(Vec<f64>, bool)> {
    if row.len() != approx.len() {
        return Err(Error::LengthMismatch(row.len(), approx.len()));
    }
    let direct = minmax_scale(row);
    let negated: Vec<f64> = row.iter().map(|v| -v).collect();
    let flipped = minmax_scale(&negated);
    if l2_distance(approx, &flipped) < l2_distance(approx, &direct) {
        Ok((flipped, true))
    } else {
        Ok((direct, false))
    }
}

/// Distances of each oriented row to `approx` and the weights derived from
/// them: `w_i = 1 - d_i / max_j d_j` (all ones when every distance is zero).
pub fn rank_weights(oriented: &ResponseMatrix, approx: &[f64]) -> Result<(WeightVector, Vec<f64>)> {
    if oriented.num_cols() != approx.len() {
        return Err(Error::LengthMismatch(oriented.num_cols(), approx.len()));
    }
    let distances: Vec<f64> = oriented.rows().map(|r| l2_distance(approx, r)).collect();
    let max = distances.iter().copied().fold(0.0, f64::max);
    let weights = if max > 0.0 {
        distances.iter().map(|d| 1.0 - d / max).collect()
    } else {
        vec![1.0; distances.len()]
    };
    Ok((WeightVector(weights), distances))
}

/// Weighted sum of oriented rows.
pub fn final_response(oriented: &ResponseMatrix, weights: &WeightVector) -> Result<ScalarResponse> {
    if oriented.num_rows() != weights.len() {
        return Err(Error::LengthMismatch(oriented.num_rows(), weights.len()));
    }
    let mut values = vec![0.0; oriented.num_cols()];
    for (row, &w) in oriented.rows().zip(weights.as_slice()) {
        for (acc, v) in values.iter_mut().zip(row) {
            *acc += w * v;
        }
    }
    Ok(ScalarResponse::new(values, ResponseKind::Final))
}

/// Everything [`estimate_intensity`] computes for one sequence.
#[derive(Debug, Clone)]
pub struct IntensityResult {
    /// Raw weighted sum.
    pub final_response: ScalarResponse,
    /// `final_response` rescaled to [0, 1]; used for all comparisons.
    pub final_normalized: ScalarResponse,
    pub weights: WeightVector,
    pub distances: Vec<f64>,
    /// Rows negated during orientation.
    pub flipped: Vec<bool>,
    pub oriented: ResponseMatrix,
    pub approx: ScalarResponse,
    /// `None` when the approximated response was supplied externally.
    pub transitions: Option<TransitionEstimate>,
    /// Zero-variance landmarks.
    pub degenerate: Vec<bool>,
    /// Rows that entered the derivative median.
    pub median_rows: Vec<usize>,
    /// Set when no transition was found and the fallback was used.
    pub low_confidence: bool,
}

impl IntensityResult {
    /// Recomputes the final response with different weights.
    pub fn reweighted(&self, weights: WeightVector) -> Result<IntensityResult> {
        let final_response = final_response(&self.oriented, &weights)?;
        Ok(IntensityResult {
            final_normalized: final_response.minmax_normalized(),
            final_response,
            weights,
            ..self.clone()
        })
    }

    /// Writes `t,final,final_norm,approx`.
    pub fn write_response_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from("t,final,final_norm,approx\n");
        for t in 0..self.final_response.len() {
            out.push_str(&format!(
                "{t},{:?},{:?},{:?}\n",
                self.final_response.values[t], self.final_normalized.values[t], self.approx.values[t]
            ));
        }
        write_file(path, &out)
    }

    /// Writes `point,weight,distance,flipped`.
    pub fn write_weights_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from("point,weight,distance,flipped\n");
        for i in 0..self.weights.len() {
            out.push_str(&format!(
                "{i},{:?},{:?},{}\n",
                self.weights.0[i],
                self.distances[i],
                u8::from(self.flipped[i])
            ));
        }
        write_file(path, &out)
    }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(contents.as_bytes())
        .map_err(|e| Error::io(path, e))
}

/// Runs the whole response pipeline on one sequence.
pub fn estimate_intensity(seq: &Sequence, config: &ResponseConfig) -> Result<IntensityResult> {
    config.validate()?;
    let centered = center_sequence(seq, config.reference_index)?;
    let (r, degenerate) = local::response_matrix_flagged(&centered);
    let t_len = centered.num_frames();

    let candidates: Vec<usize> = (0..r.num_rows())
        .filter(|&i| !(config.median_excludes_degenerate && degenerate[i]))
        .collect();
    let mut median_rows: Vec<usize> = if config.noise_gate > 0.0 {
        candidates
            .iter()
            .copied()
            .filter(|&i| is_moving(r.row(i), config.noise_gate))
            .collect()
    } else {
        candidates.clone()
    };
    if median_rows.is_empty() {
        median_rows = candidates;
    }

    let mut low_confidence = false;
    let (approx, transitions) = match &config.external_approx {
        Some(a) => {
            if a.len() != t_len {
                return Err(Error::LengthMismatch(a.len(), t_len));
            }
            (ScalarResponse::new(a.values.clone(), ResponseKind::Approximated), None)
        }
        None => {
            let r_delta = derivative_response_rows(&r, &median_rows, config.kernel, config.sigma);
            match detect_transitions(
                &r_delta,
                config.min_separation_for(t_len),
                config.min_prominence,
            ) {
                Ok(tr) => (tr.approx_response(t_len)?, Some(tr)),
                Err(Error::NoTransition) if config.fallback_enabled => {
                    low_confidence = true;
                    let tr = TransitionEstimate::rise_only(0);
                    (tr.approx_response(t_len)?, Some(tr))
                }
                Err(e) => return Err(e),
            }
        }
    };

    let mut oriented = ResponseMatrix::zeros(r.num_rows(), t_len);
    let mut flipped = Vec::with_capacity(r.num_rows());
    for i in 0..r.num_rows() {
        let (row, f) = orient_and_scale(r.row(i), &approx.values)?;
        oriented.row_mut(i).copy_from_slice(&row);
        flipped.push(f);
    }
    let (mut weights, distances) = rank_weights(&oriented, &approx.values)?;
    if low_confidence {
        weights = WeightVector(vec![1.0; r.num_rows()]);
    } else if config.weight_excludes_degenerate && degenerate.iter().any(|&d| !d) {
        let max = distances
            .iter()
            .zip(&degenerate)
            .filter(|(_, &d)| !d)
            .map(|(&v, _)| v)
            .fold(0.0, f64::max);
        for ((w, &dist), &deg) in weights.0.iter_mut().zip(&distances).zip(&degenerate) {
            *w = if deg {
                0.0
            } else if max > 0.0 {
                1.0 - dist / max
            } else {
                1.0
            };
        }
    }
    let final_response = final_response(&oriented, &weights)?;
    Ok(IntensityResult {
        final_normalized: final_response.minmax_normalized(),
        final_response,
        weights,
        distances,
        flipped,
        oriented,
        approx,
        transitions,
        degenerate,
        median_rows,
        low_confidence,
    })
}
