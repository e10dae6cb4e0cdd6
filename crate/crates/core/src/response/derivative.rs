//! Derivative response (median of absolute row derivatives) and the
//! transition detector that runs on it.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::seqdata::{ResponseKind, ResponseMatrix, ScalarResponse};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeKernel {
    /// `(x(t+1) - x(t-1)) / 2`, one-sided differences at the two ends.
    Central,
    /// `x(t+1) - x(t)`, backward difference at the last frame.
    Forward,
}

impl FromStr for DerivativeKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "central" => Ok(DerivativeKernel::Central),
            "forward" => Ok(DerivativeKernel::Forward),
            other => Err(Error::Config(format!("unknown derivative kernel '{other}'"))),
        }
    }
}

impl std::fmt::Display for DerivativeKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DerivativeKernel::Central => "central",
            DerivativeKernel::Forward => "forward",
        })
    }
}

/// Gaussian smoothing with replicate padding; `sigma <= 0` returns the input.
pub fn gaussian_smooth(x: &[f64], sigma: f64) -> Vec<f64> {
    if !(sigma > 0.0) || x.len() < 2 {
        return x.to_vec();
    }
    let radius = (4.0 * sigma).ceil() as isize;
    let taps: Vec<f64> = (-radius..=radius)
        .map(|k| (-0.5 * (k as f64 / sigma).powi(2)).exp())
        .collect();
    let norm: f64 = taps.iter().sum();
    let last = x.len() as isize - 1;
    (0..x.len() as isize)
        .map(|t| {
            taps.iter()
                .enumerate()
                .map(|(j, w)| w * x[(t + j as isize - radius).clamp(0, last) as usize])
                .sum::<f64>()
                / norm
        })
        .collect()
}

/// Applies `kernel` to a single series.
pub fn differentiate(x: &[f64], kernel: DerivativeKernel) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return vec![0.0; n];
    }
    match kernel {
        DerivativeKernel::Central => (0..n)
            .map(|t| match t {
                0 => x[1] - x[0],
                t if t == n - 1 => x[n - 1] - x[n - 2],
                t => 0.5 * (x[t + 1] - x[t - 1]),
            })
            .collect(),
        DerivativeKernel::Forward => (0..n)
            .map(|t| {
                if t + 1 < n {
                    x[t + 1] - x[t]
                } else {
                    x[n - 1] - x[n - 2]
                }
            })
            .collect(),
    }
}

/// Median of a non-empty slice; even counts average the two middle values.
pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Per-frame median of `|d/dt R(i, t)|` over all rows.
pub fn derivative_response(
    r: &ResponseMatrix,
    kernel: DerivativeKernel,
    sigma: f64,
) -> ScalarResponse {
    let rows: Vec<usize> = (0..r.num_rows()).collect();
    derivative_response_rows(r, &rows, kernel, sigma)
}

/// Per-frame median of absolute derivatives over the selected rows only.
pub fn derivative_response_rows(
    r: &ResponseMatrix,
    rows: &[usize],
    kernel: DerivativeKernel,
    sigma: f64,
) -> ScalarResponse {
    let t_len = r.num_cols();
    if rows.is_empty() {
        return ScalarResponse::new(vec![0.0; t_len], ResponseKind::Derivative);
    }
    let derivs: Vec<Vec<f64>> = rows
        .iter()
        .map(|&i| differentiate(&gaussian_smooth(r.row(i), sigma), kernel))
        .collect();
    let mut column = vec![0.0; rows.len()];
    let values = (0..t_len)
        .map(|t| {
            for (c, d) in column.iter_mut().zip(&derivs) {
                *c = d[t].abs();
            }
            median(&mut column)
        })
        .collect();
    ScalarResponse::new(values, ResponseKind::Derivative)
}

/// Robust white-noise standard deviation of a series from the median
/// absolute first difference.
pub fn noise_sigma(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let mut diffs: Vec<f64> = x.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    // |N(0, 2σ²)| has median 0.6745·√2·σ
    median(&mut diffs) / (0.674_489_750_196_081_7 * std::f64::consts::SQRT_2)
}

/// True when the series' variance exceeds `gate` times its estimated
/// white-noise variance, i.e. the point carries motion beyond jitter.
pub fn is_moving(x: &[f64], gate: f64) -> bool {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if !(var > 0.0) {
        return false;
    }
    let s = noise_sigma(x);
    var > gate * s * s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionMode {
    TwoSided,
    RiseOnly,
    FallOnly,
}

impl std::fmt::Display for TransitionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TransitionMode::TwoSided => "two_sided",
            TransitionMode::RiseOnly => "rise_only",
            TransitionMode::FallOnly => "fall_only",
        })
    }
}

/// Frames where the expression changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransitionEstimate {
    pub t1: Option<usize>,
    pub t2: Option<usize>,
    pub mode: TransitionMode,
}

impl TransitionEstimate {
    pub fn two_sided(t1: usize, t2: usize) -> Self {
        Self {
            t1: Some(t1),
            t2: Some(t2),
            mode: TransitionMode::TwoSided,
        }
    }

    pub fn rise_only(t1: usize) -> Self {
        Self {
            t1: Some(t1),
            t2: None,
            mode: TransitionMode::RiseOnly,
        }
    }

    pub fn fall_only(t2: usize) -> Self {
        Self {
            t1: None,
            t2: Some(t2),
            mode: TransitionMode::FallOnly,
        }
    }
}

/// A local maximum of a series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    pub height: f64,
    pub prominence: f64,
}

/// Interior local maxima with their topographic prominence. Flat tops
/// report the left-middle sample of the plateau.
pub fn find_peaks(x: &[f64]) -> Vec<Peak> {
    let n = x.len();
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if x[i - 1] < x[i] {
            let mut end = i;
            while end + 1 < n && x[end + 1] == x[i] {
                end += 1;
            }
            if end + 1 < n && x[end + 1] < x[i] {
                let index = (i + end) / 2;
                peaks.push(Peak {
                    index,
                    height: x[index],
                    prominence: prominence(x, i, end),
                });
            }
            i = end + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

fn prominence(x: &[f64], left: usize, right: usize) -> f64 {
    let h = x[left];
    let mut left_min = h;
    for &v in x[..left].iter().rev() {
        if v > h {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = h;
    for &v in &x[right + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

/// Centroid of the region around `peak` that stays above half its
/// prominence, weighted by the height above that level.
fn refine_peak(x: &[f64], peak: &Peak) -> usize {
    let level = peak.height - 0.5 * peak.prominence;
    let mut lo = peak.index;
    while lo > 0 && x[lo - 1] > level {
        lo -= 1;
    }
    let mut hi = peak.index;
    while hi + 1 < x.len() && x[hi + 1] > level {
        hi += 1;
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (t, &v) in x.iter().enumerate().take(hi + 1).skip(lo) {
        let w = v - level;
        num += w * t as f64;
        den += w;
    }
    if den > 0.0 {
        (num / den).round() as usize
    } else {
        peak.index
    }
}

/// Locates the expression transitions in a derivative response.
///
/// Peaks need prominence of at least `min_prominence · max(r_delta)` and are
/// kept greedily by prominence subject to `min_separation`. With two or more
/// survivors the two most prominent define a two-sided estimate. A single
/// survivor is one-sided: the held expression is taken to be the longer of
/// the two segments the transition splits the sequence into.
pub fn detect_transitions(
    r_delta: &ScalarResponse,
    min_separation: usize,
    min_prominence: f64,
) -> Result<TransitionEstimate> {
    let x = &r_delta.values;
    if x.len() < 3 {
        return Err(Error::NoTransition);
    }
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return Err(Error::NoTransition);
    }
    let mut peaks: Vec<Peak> = find_peaks(x)
        .into_iter()
        .filter(|p| p.prominence > 0.0 && p.prominence >= min_prominence * max)
        .collect();
    peaks.sort_by(|a, b| {
        b.prominence
            .total_cmp(&a.prominence)
            .then(b.height.total_cmp(&a.height))
            .then(a.index.cmp(&b.index))
    });
    let mut kept: Vec<Peak> = Vec::new();
    for p in peaks {
        if kept.iter().all(|k| k.index.abs_diff(p.index) >= min_separation) {
            kept.push(p);
        }
    }
    let last = x.len() - 1;
    match kept.as_slice() {
        [] => Err(Error::NoTransition),
        [only] => {
            let t = refine_peak(x, only).clamp(0, last);
            if last - t >= t {
                Ok(TransitionEstimate::rise_only(t.min(last - 1)))
            } else {
                Ok(TransitionEstimate::fall_only(t.max(1)))
            }
        }
        [a, b, ..] => {
            let ra = refine_peak(x, a);
            let rb = refine_peak(x, b);
            let (mut t1, mut t2) = (ra.min(rb), ra.max(rb).min(last));
            if t1 >= t2 {
                t1 = a.index.min(b.index);
                t2 = a.index.max(b.index);
            }
            Ok(TransitionEstimate::two_sided(t1, t2))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deriv(values: Vec<f64>) -> ScalarResponse {
        ScalarResponse::new(values, ResponseKind::Derivative)
    }

    #[test]
    fn ramp_derivative_is_one() {
        let r = ResponseMatrix::from_rows(vec![vec![0.0, 1.0, 2.0, 3.0, 4.0]]).unwrap();
        let d = derivative_response(&r, DerivativeKernel::Central, 0.0);
        assert_eq!(d.values, vec![1.0; 5]);
    }

    #[test]
    fn median_of_three_rows() {
        let ramp: Vec<f64> = (0..6).map(f64::from).collect();
        let neg: Vec<f64> = ramp.iter().map(|v| -v).collect();
        let r = ResponseMatrix::from_rows(vec![ramp, neg, vec![0.0; 6]]).unwrap();
        let d = derivative_response(&r, DerivativeKernel::Central, 0.0);
        assert_eq!(d.values, vec![1.0; 6]);
    }

    #[test]
    fn forward_kernel() {
        assert_eq!(
            differentiate(&[0.0, 1.0, 3.0], DerivativeKernel::Forward),
            vec![1.0, 2.0, 2.0]
        );
    }

    #[test]
    fn smoothing_preserves_constants() {
        let s = gaussian_smooth(&[2.0; 10], 1.5);
        assert!(s.iter().all(|v| (v - 2.0).abs() < 1e-14));
    }

    #[test]
    fn impulses_give_two_sided() {
        let mut x = vec![0.0; 50];
        x[10] = 1.0;
        x[40] = 0.8;
        let tr = detect_transitions(&deriv(x), 5, 0.3).unwrap();
        assert_eq!(tr, TransitionEstimate::two_sided(10, 40));
    }

    #[test]
    fn strongest_two_of_many() {
        let mut x = vec![0.0; 60];
        x[10] = 1.0;
        x[25] = 0.4;
        x[45] = 0.9;
        let tr = detect_transitions(&deriv(x), 5, 0.3).unwrap();
        assert_eq!(tr, TransitionEstimate::two_sided(10, 45));
    }

    #[test]
    fn separation_suppresses_close_peaks() {
        let mut x = vec![0.0; 60];
        x[10] = 1.0;
        x[12] = 0.9;
        let tr = detect_transitions(&deriv(x), 6, 0.3).unwrap();
        assert_eq!(tr.mode, TransitionMode::RiseOnly);
        assert_eq!(tr.t1, Some(10));
    }

    #[test]
    fn single_peak_sides() {
        let mut x = vec![0.0; 40];
        x[5] = 1.0;
        assert_eq!(
            detect_transitions(&deriv(x.clone()), 4, 0.3).unwrap(),
            TransitionEstimate::rise_only(5)
        );
        x.reverse();
        assert_eq!(
            detect_transitions(&deriv(x), 4, 0.3).unwrap(),
            TransitionEstimate::fall_only(34)
        );
    }

    #[test]
    fn flat_signal_has_no_transition() {
        assert!(matches!(
            detect_transitions(&deriv(vec![0.0; 20]), 3, 0.3),
            Err(Error::NoTransition)
        ));
        assert!(matches!(
            detect_transitions(&deriv(vec![1.0; 20]), 3, 0.3),
            Err(Error::NoTransition)
        ));
    }

    #[test]
    fn plateau_peak_is_centered() {
        let x = [0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0];
        let peaks = find_peaks(&x);
        assert_eq!(peaks.len(), 1);
        assert_eq!(peaks[0].index, 4);
        assert_eq!(peaks[0].prominence, 1.0);
    }

    #[test]
    fn prominence_uses_higher_neighbour_bases() {
        let x = [0.0, 3.0, 1.0, 2.0, 0.5, 4.0, 0.0];
        let peaks = find_peaks(&x);
        let p: Vec<(usize, f64)> = peaks.iter().map(|p| (p.index, p.prominence)).collect();
        assert_eq!(p, vec![(1, 2.5), (3, 1.0), (5, 4.0)]);
    }

    #[test]
    fn noise_gate_separates_motion_from_jitter() {
        let step: Vec<f64> = (0..100).map(|t| if t < 50 { 0.0 } else { 1.0 }).collect();
        assert!(is_moving(&step, 2.0));
        // alternating jitter: every difference is large
        let jitter: Vec<f64> = (0..100).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(!is_moving(&jitter, 2.0));
        assert!(!is_moving(&[3.0; 10], 2.0));
    }
}
