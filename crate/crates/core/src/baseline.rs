//! Global-PCA comparison feature: the first principal component of
//! whole-frame landmark vectors.

use crate::error::{Error, Result};
use crate::linalg::power_iteration;
use crate::response::orient_and_scale;
use crate::seqdata::{ResponseKind, ScalarResponse, Sequence};

pub const POWER_TOL: f64 = 1e-10;
pub const POWER_MAX_ITER: usize = 10_000;

/// Projection of each mean-centered frame onto the first principal
/// direction, before scaling or orientation. Also returns that direction.
pub fn global_pca_projection(seq: &Sequence) -> Result<(Vec<f64>, Vec<f64>)> {
    let t_len = seq.num_frames();
    let width = seq.dim() * seq.num_points();
    let mut mean = vec![0.0; width];
    for t in 0..t_len {
        for (m, v) in mean.iter_mut().zip(seq.frame(t)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= t_len as f64);
    let centered: Vec<Vec<f64>> = (0..t_len)
        .map(|t| seq.frame(t).iter().zip(&mean).map(|(v, m)| v - m).collect())
        .collect();

    let mut cov = vec![0.0; width * width];
    for row in &centered {
        for a in 0..width {
            let ra = row[a];
            if ra == 0.0 {
                continue;
            }
            let line = &mut cov[a * width..(a + 1) * width];
            for (c, rb) in line.iter_mut().zip(row) {
                *c += ra * rb;
            }
        }
    }
    let denom = (t_len - 1) as f64;
    cov.iter_mut().for_each(|c| *c /= denom);
    let trace: f64 = (0..width).map(|a| cov[a * width + a]).sum();
    if !(trace > 0.0) {
        return Err(Error::ZeroVariance("all frames are identical".into()));
    }

    let pi = power_iteration(&cov, width, POWER_TOL, POWER_MAX_ITER);
    let projection = centered
        .iter()
        .map(|row| row.iter().zip(&pi.vector).map(|(a, b)| a * b).sum())
        .collect();
    Ok((projection, pi.vector))
}

/// Global-PCA response scaled to [0, 1], oriented toward `reference`
/// (normally the normalized final response of the same sequence).
pub fn global_pca_response(seq: &Sequence, reference: &ScalarResponse) -> Result<ScalarResponse> {
    let (projection, _) = global_pca_projection(seq)?;
    let (values, _) = orient_and_scale(&projection, &reference.values)?;
    Ok(ScalarResponse::new(values, ResponseKind::GlobalPca))
}
