use crate::linalg::{covariance_small, dominant_eigenvector_small};
use crate::seqdata::{ResponseKind, ResponseMatrix, ScalarResponse, Sequence};

/// Local response of one landmark: its trajectory projected onto the
/// trajectory's first principal axis, measured relative to frame 0.
///
/// A point that never moves yields the all-zero response.
pub fn local_pca_response(seq: &Sequence, i: usize) -> ScalarResponse {
    ScalarResponse::new(local_row(seq, i).0, ResponseKind::Local)
}

/// Relative spread below which a trajectory counts as static.
const STATIC_TOL: f64 = 1e-12;

/// Like [`local_pca_response`] but also reports whether the trajectory was
/// degenerate: every frame within `STATIC_TOL` (relative to the point's
/// coordinate magnitude) of frame 0.
pub(crate) fn local_row(seq: &Sequence, i: usize) -> (Vec<f64>, bool) {
    let d = seq.dim();
    let t_len = seq.num_frames();
    let origin = seq.point(0, i);
    let (mut spread, mut scale) = (0.0f64, 0.0f64);
    for p in seq.trajectory(i) {
        for c in 0..d {
            spread = spread.max((p[c] - origin[c]).abs());
            scale = scale.max(p[c].abs());
        }
    }
    let cov = covariance_small(seq.trajectory(i), d);
    let trace: f64 = (0..d).map(|c| cov[c][c]).sum();
    if spread <= STATIC_TOL * scale || !(trace > 0.0) {
        return (vec![0.0; t_len], true);
    }
    let axis = dominant_eigenvector_small(&cov, d);
    let values = seq
        .trajectory(i)
        .map(|p| (0..d).map(|c| (p[c] - origin[c]) * axis[c]).sum())
        .collect();
    (values, false)
}

/// Stacks the local response of every landmark.
pub fn response_matrix(seq: &Sequence) -> ResponseMatrix {
    response_matrix_flagged(seq).0
}

pub(crate) fn response_matrix_flagged(seq: &Sequence) -> (ResponseMatrix, Vec<bool>) {
    let mut m = ResponseMatrix::zeros(seq.num_points(), seq.num_frames());
    let mut degenerate = Vec::with_capacity(seq.num_points());
    for i in 0..seq.num_points() {
        let (row, deg) = local_row(seq, i);
        m.row_mut(i).copy_from_slice(&row);
        degenerate.push(deg);
    }
    (m, degenerate)
}
