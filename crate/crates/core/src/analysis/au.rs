use std::path::Path;

use crate::baseline::global_pca_response;
use crate::error::{Error, Result};
use crate::response::{estimate_intensity, IntensityResult, ResponseConfig};
use crate::seqdata::{center_sequence, ResponseKind, ScalarResponse, Sequence, WeightVector};

/// Temporal segment labels of one action unit.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct AUEvent {
    pub au_id: String,
    pub ne_start: usize,
    pub onset: usize,
    pub apex: usize,
    pub offset: usize,
    pub ne_end: usize,
}

impl AUEvent {
    pub fn validate(&self, len: usize) -> Result<()> {
        let ok = self.ne_start <= self.onset
            && self.onset < self.apex
            && self.apex <= self.offset
            && self.offset <= self.ne_end
            && self.ne_end < len;
        if ok {
            Ok(())
        } else {
            Err(Error::BadEvent(format!(
                "{}: need ne_start <= onset < apex <= offset <= ne_end < {len}, got {}/{}/{}/{}/{}",
                self.au_id, self.ne_start, self.onset, self.apex, self.offset, self.ne_end
            )))
        }
    }

    /// Value of the idealized course at frame `t`.
    pub fn value_at(&self, t: usize) -> f64 {
        if t <= self.onset {
            0.0
        } else if t < self.apex {
            (t - self.onset) as f64 / (self.apex - self.onset) as f64
        } else if t <= self.offset {
            1.0
        } else if t >= self.ne_end {
            0.0
        } else {
            (self.ne_end - t) as f64 / (self.ne_end - self.offset) as f64
        }
    }
}

/// Zero until onset, linear up to apex, one until offset, linear back down
/// to zero at the end of the neutral phase.
pub fn au_approx_response(ev: &AUEvent, len: usize) -> Result<ScalarResponse> {
    ev.validate(len)?;
    Ok(ScalarResponse::new(
        (0..len).map(|t| ev.value_at(t)).collect(),
        ResponseKind::Approximated,
    ))
}

/// Zeroes the `floor((1 - keep_fraction) * N)` smallest weights; among
/// equal weights the lower index goes first.
pub fn threshold_weights(w: &WeightVector, keep_fraction: f64) -> Result<WeightVector> {
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(Error::Config(format!(
            "keep_fraction must be in (0, 1], got {keep_fraction}"
        )));
    }
    let n = w.len();
    let drop = ((1.0 - keep_fraction) * n as f64 + 1e-9).floor() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| w.0[a].total_cmp(&w.0[b]).then(a.cmp(&b)));
    let mut out = w.0.clone();
    for &i in order.iter().take(drop) {
        out[i] = 0.0;
    }
    Ok(WeightVector(out))
}

/// Sum over frames of squared differences.
pub fn squared_error(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum())
}

/// Per-AU responses with full and thresholded weights and the global-PCA
/// comparison, each scored against the AU's approximated response.
#[derive(Debug, Clone)]
pub struct AuResult {
    pub au_id: String,
    pub full: IntensityResult,
    pub thresholded: IntensityResult,
    pub pca: ScalarResponse,
    pub mse_full: f64,
    pub mse_thresholded: f64,
    pub mse_pca: f64,
}

pub fn au_intensity(
    seq: &Sequence,
    ev: &AUEvent,
    config: &ResponseConfig,
    keep_fraction: f64,
) -> Result<AuResult> {
    let approx = au_approx_response(ev, seq.num_frames())?;
    let cfg = ResponseConfig {
        external_approx: Some(approx.clone()),
        ..config.clone()
    };
    let full = estimate_intensity(seq, &cfg)?;
    let thresholded = full.reweighted(threshold_weights(&full.weights, keep_fraction)?)?;
    let centered = center_sequence(seq, config.reference_index)?;
    let pca = global_pca_response(&centered, &approx)?;
    Ok(AuResult {
        au_id: ev.au_id.clone(),
        mse_full: squared_error(&full.final_normalized.values, &approx.values)?,
        mse_thresholded: squared_error(&thresholded.final_normalized.values, &approx.values)?,
        mse_pca: squared_error(&pca.values, &approx.values)?,
        full,
        thresholded,
        pca,
    })
}

/// Reads `sequence_id,au_id,ne_start,onset,apex,offset,ne_end`.
pub fn load_au_annotations(path: impl AsRef<Path>) -> Result<Vec<(String, AUEvent)>> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e.to_string()))?;
    let header = rdr.headers().map_err(|e| Error::parse(path, e.to_string()))?;
    let expected = ["sequence_id", "au_id", "ne_start", "onset", "apex", "offset", "ne_end"];
    if header.iter().map(str::trim).ne(expected) {
        return Err(Error::parse(path, format!("expected header {}", expected.join(","))));
    }
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path, e.to_string()))?;
        let frame = |k: usize| -> Result<usize> {
            rec[k]
                .trim()
                .parse()
                .map_err(|_| Error::parse(path, format!("row {}: bad frame '{}'", line + 2, &rec[k])))
        };
        out.push((
            rec[0].trim().to_string(),
            AUEvent {
                au_id: rec[1].trim().to_string(),
                ne_start: frame(2)?,
                onset: frame(3)?,
                apex: frame(4)?,
                offset: frame(5)?,
                ne_end: frame(6)?,
            },
        ));
    }
    Ok(out)
}
