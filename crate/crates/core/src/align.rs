//! Template responses, pairwise time warping, transition selection and
//! warping of full landmark sequences onto template time.

use std::fmt;

use crate::error::{Error, Result};
use crate::response::median;
use crate::seqdata::{ResponseKind, ScalarResponse, Sequence};

/// Defaults for the parametric template.
pub const DEFAULT_TEMPLATE_LEN: usize = 100;
pub const DEFAULT_TRANSITION_LEN: usize = 30;
pub const DEFAULT_SMOOTHING: usize = 5;

/// Centered moving average of width `width` with replicate padding. Even
/// widths use `width + 1` taps with half-weight end taps so the window stays
/// centered.
fn moving_average(x: &[f64], width: usize) -> Vec<f64> {
    if width <= 1 || x.is_empty() {
        return x.to_vec();
    }
    let half = width / 2;
    let last = x.len() as isize - 1;
    let at = |k: isize| x[k.clamp(0, last) as usize];
    (0..x.len() as isize)
        .map(|t| {
            let mut acc = 0.0;
            for k in -(half as isize)..=(half as isize) {
                let w = if width.is_multiple_of(2) && k.unsigned_abs() == half {
                    0.5
                } else {
                    1.0
                };
                acc += w * at(t + k);
            }
            acc / width as f64
        })
        .collect()
}

/// Smoothed symmetric trapezoid: linear 0→1 over the first
/// `transition_len` frames (frame `f` has value `f / (transition_len - 1)`),
/// plateau at 1, mirrored fall over the last `transition_len` frames.
pub fn make_template(
    total_len: usize,
    transition_len: usize,
    smoothing: usize,
) -> Result<ScalarResponse> {
    if transition_len < 2 {
        return Err(Error::BadShapeParams(format!(
            "transition length must be >= 2, got {transition_len}"
        )));
    }
    if total_len <= 2 * transition_len {
        return Err(Error::BadShapeParams(format!(
            "total length {total_len} must exceed twice the transition length {transition_len}"
        )));
    }
    let ramp = (transition_len - 1) as f64;
    let raw: Vec<f64> = (0..total_len)
        .map(|t| {
            let from_end = total_len - 1 - t;
            if t < transition_len {
                t as f64 / ramp
            } else if from_end < transition_len {
                from_end as f64 / ramp
            } else {
                1.0
            }
        })
        .collect();
    let values = moving_average(&raw, smoothing)
        .into_iter()
        .map(|v| v.clamp(0.0, 1.0))
        .collect();
    Ok(ScalarResponse::new(values, ResponseKind::Template))
}

/// Linear resampling of a series to `len` samples over the same time span.
pub fn resample(values: &[f64], len: usize) -> Vec<f64> {
    let n = values.len();
    if n == 0 || len == 0 {
        return vec![0.0; len];
    }
    if n == 1 || len == 1 {
        return vec![values[0]; len];
    }
    let scale = (n - 1) as f64 / (len - 1) as f64;
    (0..len)
        .map(|k| {
            let pos = k as f64 * scale;
            let lo = (pos.floor() as usize).min(n - 1);
            let hi = (lo + 1).min(n - 1);
            let frac = pos - lo as f64;
            values[lo] * (1.0 - frac) + values[hi] * frac
        })
        .collect()
}

/// Data-driven template: per-frame median of the responses resampled to
/// `total_len`, symmetrized in time and clamped to [0, 1].
pub fn template_from_responses(responses: &[ScalarResponse], total_len: usize) -> Result<ScalarResponse> {
    if responses.is_empty() {
        return Err(Error::EmptySet);
    }
    if total_len < 2 {
        return Err(Error::BadShapeParams("template length must be >= 2".into()));
    }
    let resampled: Vec<Vec<f64>> = responses
        .iter()
        .map(|r| resample(&r.values, total_len))
        .collect();
    let mut column = vec![0.0; resampled.len()];
    let med: Vec<f64> = (0..total_len)
        .map(|t| {
            for (c, r) in column.iter_mut().zip(&resampled) {
                *c = r[t];
            }
            median(&mut column)
        })
        .collect();
    let values = (0..total_len)
        .map(|t| (0.5 * (med[t] + med[total_len - 1 - t])).clamp(0.0, 1.0))
        .collect();
    Ok(ScalarResponse::new(values, ResponseKind::Template))
}

/// Monotone frame correspondence `(source_frame, template_frame)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarpPath {
    pub pairs: Vec<(usize, usize)>,
}

impl WarpPath {
    pub fn identity(len: usize) -> Self {
        Self {
            pairs: (0..len).map(|t| (t, t)).collect(),
        }
    }

    /// Template length implied by the path.
    pub fn template_len(&self) -> usize {
        self.pairs.last().map_or(0, |p| p.1 + 1)
    }

    pub fn source_len(&self) -> usize {
        self.pairs.last().map_or(0, |p| p.0 + 1)
    }

    /// Checks the boundary, monotonicity and unit-step conditions.
    pub fn validate(&self, source_len: usize, template_len: usize) -> Result<()> {
        let first = self
            .pairs
            .first()
            .ok_or_else(|| Error::BadPath("empty path".into()))?;
        if *first != (0, 0) {
            return Err(Error::BadPath(format!("path starts at {first:?}")));
        }
        let last = *self.pairs.last().unwrap_or(first);
        if source_len == 0 || template_len == 0 || last != (source_len - 1, template_len - 1) {
            return Err(Error::BadPath(format!(
                "path ends at {last:?}, expected ({}, {})",
                source_len.saturating_sub(1),
                template_len.saturating_sub(1)
            )));
        }
        for w in self.pairs.windows(2) {
            let (di, dj) = (w[1].0.wrapping_sub(w[0].0), w[1].1.wrapping_sub(w[0].1));
            if !matches!((di, dj), (1, 0) | (0, 1) | (1, 1)) {
                return Err(Error::BadPath(format!("invalid step {:?} -> {:?}", w[0], w[1])));
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("src_frame,tpl_frame\n");
        for (a, b) in &self.pairs {
            s.push_str(&format!("{a},{b}\n"));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChosenTransition {
    /// The rising transition at the start of template time.
    First,
    /// The falling transition at the end, to be read in reverse order.
    SecondFlipped,
}

impl fmt::Display for ChosenTransition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChosenTransition::First => "First",
            ChosenTransition::SecondFlipped => "SecondFlipped",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentResult {
    /// Source response on template time.
    pub warped: ScalarResponse,
    pub path: WarpPath,
    pub cost: f64,
    pub chosen_transition: ChosenTransition,
    /// Window length used by [`select_transition`]; 0 before selection.
    pub window: usize,
    pub window_error_first: Option<f64>,
    pub window_error_second: Option<f64>,
}

impl AlignmentResult {
    /// Template frames of the selected transition, in neutral → expression
    /// order.
    pub fn transition_frames(&self) -> Vec<usize> {
        let n = self.warped.len();
        let w = self.window.min(n);
        match self.chosen_transition {
            ChosenTransition::First => (0..w).collect(),
            ChosenTransition::SecondFlipped => (n - w..n).rev().collect(),
        }
    }

    /// Warped response restricted to the selected transition window.
    pub fn transition_window(&self) -> ScalarResponse {
        let values = self
            .transition_frames()
            .into_iter()
            .map(|u| self.warped.values[u])
            .collect();
        ScalarResponse::new(values, ResponseKind::Aligned)
    }
}

/// Dynamic time warping with squared-difference local cost and steps
/// (1,0), (0,1), (1,1). Ties in the backtrack prefer the diagonal.
pub fn dtw_align(src: &ScalarResponse, tpl: &ScalarResponse) -> Result<AlignmentResult> {
    let (n, m) = (src.len(), tpl.len());
    if n < 2 || m < 2 {
        return Err(Error::LengthMismatch(n, m));
    }
    let local = |i: usize, j: usize| (src.values[i] - tpl.values[j]).powi(2);
    let mut acc = vec![f64::INFINITY; n * m];
    let idx = |i: usize, j: usize| i * m + j;
    for i in 0..n {
        for j in 0..m {
            let best_prev = if i == 0 && j == 0 {
                0.0
            } else {
                let mut b = f64::INFINITY;
                if i > 0 && j > 0 {
                    b = b.min(acc[idx(i - 1, j - 1)]);
                }
                if i > 0 {
                    b = b.min(acc[idx(i - 1, j)]);
                }
                if j > 0 {
                    b = b.min(acc[idx(i, j - 1)]);
                }
                b
            };
            acc[idx(i, j)] = best_prev + local(i, j);
        }
    }

    let (mut i, mut j) = (n - 1, m - 1);
    let mut pairs = vec![(i, j)];
    while (i, j) != (0, 0) {
        let mut best = (f64::INFINITY, (i, j));
        let mut consider = |ci: usize, cj: usize| {
            let c = acc[idx(ci, cj)];
            if c < best.0 {
                best = (c, (ci, cj));
            }
        };
        if i > 0 && j > 0 {
            consider(i - 1, j - 1);
        }
        if i > 0 {
            consider(i - 1, j);
        }
        if j > 0 {
            consider(i, j - 1);
        }
        (i, j) = best.1;
        pairs.push((i, j));
    }
    pairs.reverse();

    let mut sums = vec![0.0; m];
    let mut counts = vec![0usize; m];
    for &(a, b) in &pairs {
        sums[b] += src.values[a];
        counts[b] += 1;
    }
    let warped = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s / c as f64)
        .collect();
    Ok(AlignmentResult {
        warped: ScalarResponse::new(warped, ResponseKind::Aligned),
        path: WarpPath { pairs },
        cost: acc[idx(n - 1, m - 1)],
        chosen_transition: ChosenTransition::First,
        window: 0,
        window_error_first: None,
        window_error_second: None,
    })
}

/// Picks the template-time window (first or last `window` frames) where the
/// warped response is closer to the template. Ties go to the first window.
pub fn select_transition(
    res: &AlignmentResult,
    tpl: &ScalarResponse,
    window: usize,
) -> Result<AlignmentResult> {
    let n = tpl.len();
    if res.warped.len() != n {
        return Err(Error::LengthMismatch(res.warped.len(), n));
    }
    if window == 0 || window > n {
        return Err(Error::BadShapeParams(format!(
            "window {window} must be in 1..={n}"
        )));
    }
    let err = |range: std::ops::Range<usize>| {
        range
            .map(|u| (res.warped.values[u] - tpl.values[u]).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let first = err(0..window);
    let second = err(n - window..n);
    let mut out = res.clone();
    out.window = window;
    out.window_error_first = Some(first);
    out.window_error_second = Some(second);
    out.chosen_transition = if second < first {
        ChosenTransition::SecondFlipped
    } else {
        ChosenTransition::First
    };
    Ok(out)
}

/// Warps `src` onto `tpl` and picks the better-matching transition window.
pub fn align_to_template(
    src: &ScalarResponse,
    tpl: &ScalarResponse,
    window: usize,
) -> Result<AlignmentResult> {
    select_transition(&dtw_align(src, tpl)?, tpl, window)
}

/// Frames of `seq` averaged per template frame along `path`, then linearly
/// resampled to `target_len` frames of template time.
pub fn warp_sequence(seq: &Sequence, path: &WarpPath, target_len: usize) -> Result<Sequence> {
    let tpl_len = path.template_len();
    path.validate(seq.num_frames(), tpl_len)?;
    if target_len < 2 {
        return Err(Error::BadPath(format!("target length {target_len} must be >= 2")));
    }
    let width = seq.dim() * seq.num_points();
    let mut sums = vec![0.0; tpl_len * width];
    let mut counts = vec![0usize; tpl_len];
    for &(s, u) in &path.pairs {
        for (acc, v) in sums[u * width..(u + 1) * width].iter_mut().zip(seq.frame(s)) {
            *acc += v;
        }
        counts[u] += 1;
    }
    for (u, &c) in counts.iter().enumerate() {
        sums[u * width..(u + 1) * width]
            .iter_mut()
            .for_each(|v| *v /= c as f64);
    }
    let frames = resample_frames(&sums, width, tpl_len, target_len);
    seq.with_points(target_len, frames)
}

/// Linearly resamples `count` frames of `width` values to `target` frames.
fn resample_frames(frames: &[f64], width: usize, count: usize, target: usize) -> Vec<f64> {
    if count == target {
        return frames.to_vec();
    }
    let mut out = vec![0.0; target * width];
    for c in 0..width {
        let series: Vec<f64> = (0..count).map(|u| frames[u * width + c]).collect();
        for (k, v) in resample(&series, target).into_iter().enumerate() {
            out[k * width + c] = v;
        }
    }
    out
}

/// The landmark frames of the selected transition in neutral → expression
/// order, resampled to `samples` frames.
pub fn aligned_transition(seq: &Sequence, res: &AlignmentResult, samples: usize) -> Result<Sequence> {
    let tpl_len = res.path.template_len();
    let warped = warp_sequence(seq, &res.path, tpl_len.max(2))?;
    let width = seq.dim() * seq.num_points();
    let frames: Vec<f64> = res
        .transition_frames()
        .into_iter()
        .flat_map(|u| warped.frame(u).to_vec())
        .collect();
    let count = frames.len() / width;
    if count < 2 || samples < 2 {
        return Err(Error::BadPath(format!(
            "transition window of {count} frames cannot be sampled to {samples}"
        )));
    }
    seq.with_points(samples, resample_frames(&frames, width, count, samples))
}

/// Mean over sequences of the squared L2 error between each aligned
/// transition window and the template's first `window` frames.
pub fn alignment_mse(aligned: &[ScalarResponse], tpl: &ScalarResponse, window: usize) -> Result<f64> {
    if aligned.is_empty() {
        return Err(Error::EmptySet);
    }
    if tpl.len() < window {
        return Err(Error::LengthMismatch(tpl.len(), window));
    }
    let mut total = 0.0;
    for r in aligned {
        if r.len() < window {
            return Err(Error::LengthMismatch(r.len(), window));
        }
        total += r.values[..window]
            .iter()
            .zip(&tpl.values[..window])
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>();
    }
    Ok(total / aligned.len() as f64)
}

/// Linear-interpolation quantile (`q` in [0, 1]) of unsorted values.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// Per-frame `[q05, q25, median, q75, q95]` of a set of equal-length series.
pub fn frame_distribution(set: &[ScalarResponse]) -> Result<Vec<[f64; 5]>> {
    let len = set.first().ok_or(Error::EmptySet)?.len();
    if let Some(bad) = set.iter().find(|r| r.len() != len) {
        return Err(Error::LengthMismatch(bad.len(), len));
    }
    Ok((0..len)
        .map(|t| {
            let column: Vec<f64> = set.iter().map(|r| r.values[t]).collect();
            [0.05, 0.25, 0.5, 0.75, 0.95].map(|q| quantile(&column, q))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resp(v: Vec<f64>) -> ScalarResponse {
        ScalarResponse::new(v, ResponseKind::Final)
    }

    #[test]
    fn linear_template_values() {
        let t = make_template(100, 30, 0).unwrap();
        assert_eq!(t.values[15], 15.0 / 29.0);
        assert_eq!(t.values[29], 1.0);
        assert_eq!(t.values[0], 0.0);
        assert_eq!(t.values[50], 1.0);
        for k in 0..100 {
            assert!((t.values[k] - t.values[99 - k]).abs() <= 1e-12);
        }
    }

    #[test]
    fn template_parameter_errors() {
        assert!(make_template(60, 30, 5).is_err());
        assert!(make_template(10, 1, 0).is_err());
    }

    #[test]
    fn even_smoothing_stays_symmetric() {
        let t = make_template(40, 10, 4).unwrap();
        for k in 0..40 {
            assert!((t.values[k] - t.values[39 - k]).abs() <= 1e-12);
        }
    }

    #[test]
    fn dtw_identity() {
        let a = resp(vec![0.0, 0.3, 1.0, 0.4]);
        let r = dtw_align(&a, &a).unwrap();
        assert_eq!(r.cost, 0.0);
        assert_eq!(r.path, WarpPath::identity(4));
        assert_eq!(r.warped.values, a.values);
    }

    #[test]
    fn dtw_time_stretch() {
        let tpl = resp(vec![0.0, 0.2, 0.9, 1.0, 0.5]);
        let src = resp(tpl.values.iter().flat_map(|&v| [v, v]).collect());
        let r = dtw_align(&src, &tpl).unwrap();
        assert_eq!(r.cost, 0.0);
        assert_eq!(r.warped.values, tpl.values);
        r.path.validate(10, 5).unwrap();
    }

    #[test]
    fn select_first_and_flipped() {
        let tpl = make_template(100, 30, 0).unwrap();
        let mut warped = tpl.values.clone();
        warped[70..].iter_mut().for_each(|v| *v = 1.0);
        let base = AlignmentResult {
            warped: ScalarResponse::new(warped.clone(), ResponseKind::Aligned),
            path: WarpPath::identity(100),
            cost: 0.0,
            chosen_transition: ChosenTransition::First,
            window: 0,
            window_error_first: None,
            window_error_second: None,
        };
        let r = select_transition(&base, &tpl, 30).unwrap();
        assert_eq!(r.chosen_transition, ChosenTransition::First);
        assert_eq!(r.transition_window().values, tpl.values[..30].to_vec());

        warped.reverse();
        let mirrored = AlignmentResult {
            warped: ScalarResponse::new(warped, ResponseKind::Aligned),
            ..base.clone()
        };
        let r = select_transition(&mirrored, &tpl, 30).unwrap();
        assert_eq!(r.chosen_transition, ChosenTransition::SecondFlipped);
        assert_eq!(r.transition_frames()[0], 99);
        for (a, b) in r.transition_window().values.iter().zip(&tpl.values[..30]) {
            assert!((a - b).abs() < 1e-12);
        }

        let exact = AlignmentResult {
            warped: ScalarResponse::new(tpl.values.clone(), ResponseKind::Aligned),
            ..base
        };
        let r = select_transition(&exact, &tpl, 30).unwrap();
        assert_eq!(r.chosen_transition, ChosenTransition::First);
    }

    #[test]
    fn warp_identity_and_duplicates() {
        let seq = Sequence::new("s", 2, 1, 3, vec![0.0, 0.0, 1.0, 2.0, 3.0, 5.0]).unwrap();
        let w = warp_sequence(&seq, &WarpPath::identity(3), 3).unwrap();
        assert_eq!(w, seq);
        // source frames duplicated: 0,0,1,1,2,2 → template 0,1,2
        let dup = seq.with_points(6, seq.coords().chunks(2).flat_map(|c| [c, c].concat()).collect()).unwrap();
        let path = WarpPath {
            pairs: vec![(0, 0), (1, 0), (2, 1), (3, 1), (4, 2), (5, 2)],
        };
        let w = warp_sequence(&dup, &path, 3).unwrap();
        assert_eq!(w.coords(), seq.coords());
    }

    #[test]
    fn warp_rejects_bad_paths() {
        let seq = Sequence::new("s", 2, 1, 3, vec![0.0; 6]).unwrap();
        let bad = WarpPath {
            pairs: vec![(0, 0), (2, 1)],
        };
        assert!(matches!(warp_sequence(&seq, &bad, 2), Err(Error::BadPath(_))));
        let short = WarpPath {
            pairs: vec![(0, 0), (1, 1)],
        };
        assert!(matches!(warp_sequence(&seq, &short, 2), Err(Error::BadPath(_))));
    }

    #[test]
    fn mse_formula() {
        let tpl = make_template(100, 30, 5).unwrap();
        let same = resp(tpl.values[..30].to_vec());
        assert_eq!(alignment_mse(&[same.clone(), same], &tpl, 30).unwrap(), 0.0);
        let off = resp(tpl.values[..30].iter().map(|v| v + 0.1).collect());
        assert!((alignment_mse(&[off], &tpl, 30).unwrap() - 0.3).abs() < 1e-12);
        assert!(matches!(alignment_mse(&[], &tpl, 30), Err(Error::EmptySet)));
    }

    #[test]
    fn quantiles_interpolate() {
        assert_eq!(quantile(&[3.0, 1.0, 2.0, 4.0], 0.5), 2.5);
        assert_eq!(quantile(&[1.0, 2.0], 0.0), 1.0);
        let d = frame_distribution(&[resp(vec![1.0, 2.0]), resp(vec![1.0, 2.0])]).unwrap();
        assert_eq!(d[1], [2.0; 5]);
    }

    #[test]
    fn data_driven_template_is_symmetric() {
        let a = resp(vec![0.0, 0.5, 1.0, 1.0, 0.2]);
        let t = template_from_responses(&[a.clone(), a], 9).unwrap();
        for k in 0..9 {
            assert_eq!(t.values[k], t.values[8 - k]);
        }
    }
}
