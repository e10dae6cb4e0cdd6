//! Intensity evaluation against ground truth: MAE, Pearson correlation and
//! ICC(3,1), plus apex estimation and the triangular pseudo ground truth.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::response::{TransitionEstimate, TransitionMode};
use crate::seqdata::{minmax_scale, ResponseKind, ScalarResponse};

/// Linear rise from 0 to `peak_value` over `[0, apex]`, then a linear fall
/// back to 0 at the last frame.
pub fn pseudo_ground_truth_triangle(apex: usize, len: usize, peak_value: f64) -> Result<ScalarResponse> {
    if apex >= len {
        return Err(Error::BadApex { apex, len });
    }
    if !(peak_value > 0.0) {
        return Err(Error::Config(format!("peak value must be > 0, got {peak_value}")));
    }
    let last = len - 1;
    let values = (0..len)
        .map(|t| {
            if t <= apex {
                if apex == 0 {
                    peak_value
                } else {
                    peak_value * t as f64 / apex as f64
                }
            } else {
                peak_value * (last - t) as f64 / (last - apex) as f64
            }
        })
        .collect();
    Ok(ScalarResponse::new(values, ResponseKind::Approximated))
}

/// Halfway frame between the two transitions, rounding halves up.
pub fn apex_frame(tr: &TransitionEstimate) -> Result<usize> {
    match (tr.mode, tr.t1, tr.t2) {
        (TransitionMode::TwoSided, Some(t1), Some(t2)) => Ok((t1 + t2).div_ceil(2)),
        _ => Err(Error::OneSided),
    }
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(())
}

pub fn mae(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(pred, truth)?;
    Ok(pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum::<f64>() / pred.len() as f64)
}

/// Pearson correlation; `zero_variance` marks inputs where it is undefined
/// (value reported as 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub value: f64,
    pub zero_variance: bool,
}

pub fn pcc(pred: &[f64], truth: &[f64]) -> Result<Correlation> {
    check_lengths(pred, truth)?;
    let n = pred.len() as f64;
    let mp = pred.iter().sum::<f64>() / n;
    let mt = truth.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (p, t) in pred.iter().zip(truth) {
        let (dp, dt) = (p - mp, t - mt);
        sxy += dp * dt;
        sxx += dp * dp;
        syy += dt * dt;
    }
    if !(sxx > 0.0 && syy > 0.0) {
        return Ok(Correlation {
            value: 0.0,
            zero_variance: true,
        });
    }
    Ok(Correlation {
        value: (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0),
        zero_variance: false,
    })
}

/// ICC(3,1): two-way mixed, single measure, consistency, with the two
/// series as raters over the frames as targets.
pub fn icc(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(pred, truth)?;
    let n = pred.len();
    if n < 2 {
        return Err(Error::DegenerateAnova("need at least two targets".into()));
    }
    let k = 2.0;
    let nf = n as f64;
    let grand = (pred.iter().sum::<f64>() + truth.iter().sum::<f64>()) / (k * nf);
    let col_pred = pred.iter().sum::<f64>() / nf;
    let col_truth = truth.iter().sum::<f64>() / nf;
    let (mut ss_rows, mut ss_err) = (0.0, 0.0);
    for (p, t) in pred.iter().zip(truth) {
        let row_mean = 0.5 * (p + t);
        ss_rows += k * (row_mean - grand).powi(2);
        ss_err += (p - row_mean - col_pred + grand).powi(2);
        ss_err += (t - row_mean - col_truth + grand).powi(2);
    }
    let bms = ss_rows / (nf - 1.0);
    let ems = ss_err / ((nf - 1.0) * (k - 1.0));
    let denom = bms + (k - 1.0) * ems;
    if !(denom > 0.0) {
        return Err(Error::DegenerateAnova("no between-target or residual variance".into()));
    }
    Ok((bms - ems) / denom)
}

/// How predictions are brought onto the ground truth's intensity scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScaleMatch {
    /// Min-max normalize, then multiply by the truth's maximum.
    TruthMax,
    /// Min-max normalize, then multiply by a fixed factor.
    Factor(f64),
    /// Use the prediction as given.
    None,
}

pub fn scale_prediction(pred: &[f64], truth: &[f64], mode: ScaleMatch) -> Vec<f64> {
    match mode {
        ScaleMatch::None => pred.to_vec(),
        ScaleMatch::TruthMax => {
            let m = truth.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            minmax_scale(pred).into_iter().map(|v| v * m).collect()
        }
        ScaleMatch::Factor(f) => minmax_scale(pred).into_iter().map(|v| v * f).collect(),
    }
}

/// Metrics for one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceEval {
    pub sequence_id: String,
    pub mae: f64,
    pub pcc: f64,
    pub icc: f64,
    pub pcc_zero_variance: bool,
}

pub fn evaluate_sequence(
    sequence_id: &str,
    pred: &[f64],
    truth: &[f64],
    scale: ScaleMatch,
) -> Result<SequenceEval> {
    let scaled = scale_prediction(pred, truth, scale);
    let c = pcc(&scaled, truth)?;
    Ok(SequenceEval {
        sequence_id: sequence_id.to_string(),
        mae: mae(&scaled, truth)?,
        pcc: c.value,
        icc: icc(&scaled, truth)?,
        pcc_zero_variance: c.zero_variance,
    })
}

/// Per-sequence metrics and their means.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mae: f64,
    pub pcc: f64,
    pub icc: f64,
    pub per_sequence: Vec<SequenceEval>,
}

impl EvalReport {
    pub fn from_sequences(per_sequence: Vec<SequenceEval>) -> Result<Self> {
        if per_sequence.is_empty() {
            return Err(Error::EmptySet);
        }
        let n = per_sequence.len() as f64;
        let mean = |f: fn(&SequenceEval) -> f64| per_sequence.iter().map(f).sum::<f64>() / n;
        Ok(Self {
            mae: mean(|s| s.mae),
            pcc: mean(|s| s.pcc),
            icc: mean(|s| s.icc),
            per_sequence,
        })
    }

    /// `sequence_id,mae,pcc,icc` rows plus a trailing `mean` row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("sequence_id,mae,pcc,icc\n");
        for r in &self.per_sequence {
            s.push_str(&format!("{},{:?},{:?},{:?}\n", r.sequence_id, r.mae, r.pcc, r.icc));
        }
        s.push_str(&format!("mean,{:?},{:?},{:?}\n", self.mae, self.pcc, self.icc));
        s
    }
}

/// Metrics over all sequences concatenated into one long series.
pub fn evaluate_concatenated(pairs: &[(Vec<f64>, Vec<f64>)], scale: ScaleMatch) -> Result<(f64, f64, f64)> {
    if pairs.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut pred = Vec::new();
    let mut truth = Vec::new();
    for (p, t) in pairs {
        check_lengths(p, t)?;
        pred.extend(scale_prediction(p, t, scale));
        truth.extend_from_slice(t);
    }
    Ok((mae(&pred, &truth)?, pcc(&pred, &truth)?.value, icc(&pred, &truth)?))
}

/// Adjusted Rand index between two labelings of the same items.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    check_lengths(
        &a.iter().map(|&x| x as f64).collect::<Vec<_>>(),
        &b.iter().map(|&x| x as f64).collect::<Vec<_>>(),
    )?;
    let choose2 = |n: usize| (n * n.saturating_sub(1)) as f64 / 2.0;
    let mut joint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut ca: HashMap<usize, usize> = HashMap::new();
    let mut cb: HashMap<usize, usize> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *ca.entry(x).or_default() += 1;
        *cb.entry(y).or_default() += 1;
    }
    let index: f64 = joint.values().map(|&n| choose2(n)).sum();
    let sa: f64 = ca.values().map(|&n| choose2(n)).sum();
    let sb: f64 = cb.values().map(|&n| choose2(n)).sum();
    let expected = sa * sb / choose2(a.len());
    let max = 0.5 * (sa + sb);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_values() {
        let t = pseudo_ground_truth_triangle(5, 11, 1.0).unwrap();
        assert!((t.values[3] - 0.6).abs() < 1e-15);
        assert!((t.values[8] - 0.4).abs() < 1e-15);
        let rise = pseudo_ground_truth_triangle(9, 10, 2.0).unwrap();
        assert_eq!(rise.values[0], 0.0);
        assert_eq!(rise.values[9], 2.0);
        assert!(rise.values.windows(2).all(|w| w[1] > w[0]));
        let fall = pseudo_ground_truth_triangle(0, 10, 2.0).unwrap();
        assert_eq!(fall.values[0], 2.0);
        assert_eq!(fall.values[9], 0.0);
        assert!(pseudo_ground_truth_triangle(10, 10, 1.0).is_err());
    }

    #[test]
    fn apex_rounding() {
        assert_eq!(apex_frame(&TransitionEstimate::two_sided(10, 40)).unwrap(), 25);
        assert_eq!(apex_frame(&TransitionEstimate::two_sided(10, 41)).unwrap(), 26);
        assert!(matches!(
            apex_frame(&TransitionEstimate::rise_only(3)),
            Err(Error::OneSided)
        ));
    }

    #[test]
    fn basic_metric_values() {
        let a = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(mae(&a, &a).unwrap(), 0.0);
        let b: Vec<f64> = a.iter().map(|v| v + 0.5).collect();
        assert_eq!(mae(&b, &a).unwrap(), 0.5);
        assert!((pcc(&a, &a).unwrap().value - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        assert!((pcc(&neg, &a).unwrap().value + 1.0).abs() < 1e-15);
        assert!((icc(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert!((icc(&b, &a).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(mae(&a, &a[..2]), Err(Error::LengthMismatch(4, 2))));
    }

    #[test]
    fn zero_variance_is_flagged() {
        let c = pcc(&[1.0, 1.0, 1.0], &[0.0, 1.0, 2.0]).unwrap();
        assert!(c.zero_variance);
        assert_eq!(c.value, 0.0);
        assert!(matches!(icc(&[1.0; 3], &[1.0; 3]), Err(Error::DegenerateAnova(_))));
    }

    #[test]
    fn report_means_and_csv() {
        let s = |id: &str, m: f64| SequenceEval {
            sequence_id: id.into(),
            mae: m,
            pcc: 1.0,
            icc: 0.5,
            pcc_zero_variance: false,
        };
        let r = EvalReport::from_sequences(vec![s("a", 1.0), s("b", 3.0)]).unwrap();
        assert_eq!(r.mae, 2.0);
        assert!(r.to_csv().ends_with("mean,2.0,1.0,0.5\n"));
    }

    #[test]
    fn ari_extremes() {
        assert_eq!(adjusted_rand_index(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap(), 1.0);
        let v = adjusted_rand_index(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap();
        assert!(v < 0.0);
    }
}
