//! Landmark sequences and the scalar series derived from them.
//!
//! A [`Sequence`] stores `num_frames` frames of `num_points` landmarks in
//! `dim` dimensions. Coordinates are kept frame-major: frame `t`, point `i`,
//! axis `c` lives at `(t * num_points + i) * dim + c`.

mod io;

pub use io::{load_manifest, load_sequence, save_sequence, write_manifest, Format, ManifestEntry};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    pub id: String,
    pub subject: Option<String>,
    pub label: Option<String>,
    pub nose_index: Option<usize>,
    dim: usize,
    num_points: usize,
    num_frames: usize,
    points: Vec<f64>,
}

impl Sequence {
    /// Builds a sequence from frame-major coordinates.
    pub fn new(
        id: impl Into<String>,
        dim: usize,
        num_points: usize,
        num_frames: usize,
        points: Vec<f64>,
    ) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::Shape(format!("dim must be 2 or 3, got {dim}")));
        }
        if num_points == 0 {
            return Err(Error::Shape("sequence needs at least one point".into()));
        }
        if num_frames < 2 {
            return Err(Error::Shape(format!(
                "sequence needs at least two frames, got {num_frames}"
            )));
        }
        if points.len() != dim * num_points * num_frames {
            return Err(Error::Shape(format!(
                "expected {} coordinates for d={dim}, N={num_points}, T={num_frames}, got {}",
                dim * num_points * num_frames,
                points.len()
            )));
        }
        if let Some(pos) = points.iter().position(|v| !v.is_finite()) {
            let t = pos / (dim * num_points);
            let i = (pos / dim) % num_points;
            return Err(Error::Value(format!("coordinate of point {i} in frame {t}")));
        }
        Ok(Self {
            id: id.into(),
            subject: None,
            label: None,
            nose_index: None,
            dim,
            num_points,
            num_frames,
            points,
        })
    }

    pub fn with_nose_index(mut self, nose_index: usize) -> Result<Self> {
        if nose_index >= self.num_points {
            return Err(Error::BadIndex {
                index: nose_index,
                num_points: self.num_points,
            });
        }
        self.nose_index = Some(nose_index);
        Ok(self)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_subject(mut self, subject: impl Into<String>) -> Self {
        self.subject = Some(subject.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    /// All coordinates in frame-major order.
    pub fn coords(&self) -> &[f64] {
        &self.points
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        let stride = self.dim * self.num_points;
        &self.points[t * stride..(t + 1) * stride]
    }

    pub fn point(&self, t: usize, i: usize) -> &[f64] {
        let start = (t * self.num_points + i) * self.dim;
        &self.points[start..start + self.dim]
    }

    /// Iterates over the positions of point `i` across all frames.
    pub fn trajectory(&self, i: usize) -> impl Iterator<Item = &[f64]> + Clone + '_ {
        (0..self.num_frames).map(move |t| self.point(t, i))
    }

    /// Multiplies every coordinate by `factor`.
    pub fn scaled(&self, factor: f64) -> Sequence {
        let mut out = self.clone();
        out.points.iter_mut().for_each(|v| *v *= factor);
        out
    }

    /// Copy of this sequence keeping only the listed points, in the given order.
    pub fn select_points(&self, keep: &[usize]) -> Result<Sequence> {
        if keep.is_empty() {
            return Err(Error::Shape("cannot select zero points".into()));
        }
        let mut points = Vec::with_capacity(keep.len() * self.dim * self.num_frames);
        for t in 0..self.num_frames {
            for &i in keep {
                if i >= self.num_points {
                    return Err(Error::BadIndex {
                        index: i,
                        num_points: self.num_points,
                    });
                }
                points.extend_from_slice(self.point(t, i));
            }
        }
        let mut out = Sequence::new(self.id.clone(), self.dim, keep.len(), self.num_frames, points)?;
        out.subject = self.subject.clone();
        out.label = self.label.clone();
        out.nose_index = self
            .nose_index
            .and_then(|n| keep.iter().position(|&i| i == n));
        Ok(out)
    }

    /// Copy with the frame order reversed.
    pub fn reversed(&self) -> Sequence {
        let mut out = self.clone();
        let stride = self.dim * self.num_points;
        out.points = self
            .points
            .chunks_exact(stride)
            .rev()
            .flatten()
            .copied()
            .collect();
        out
    }

    pub(crate) fn with_points(&self, num_frames: usize, points: Vec<f64>) -> Result<Sequence> {
        let mut out = Sequence::new(
            self.id.clone(),
            self.dim,
            self.num_points,
            num_frames,
            points,
        )?;
        out.subject = self.subject.clone();
        out.label = self.label.clone();
        out.nose_index = self.nose_index;
        Ok(out)
    }
}

/// Translates every frame so that the reference point sits at the origin.
///
/// The reference is `reference` when given, else the sequence's nose index.
pub fn center_sequence(seq: &Sequence, reference: Option<usize>) -> Result<Sequence> {
    let r = reference.or(seq.nose_index).ok_or(Error::MissingReference)?;
    if r >= seq.num_points {
        return Err(Error::BadIndex {
            index: r,
            num_points: seq.num_points,
        });
    }
    let d = seq.dim;
    let mut points = seq.points.clone();
    for frame in points.chunks_exact_mut(d * seq.num_points) {
        let mut origin = [0.0; 3];
        origin[..d].copy_from_slice(&frame[r * d..(r + 1) * d]);
        for p in frame.chunks_exact_mut(d) {
            for (v, o) in p.iter_mut().zip(&origin) {
                *v -= o;
            }
        }
    }
    let mut out = seq.clone();
    out.points = points;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResponseKind {
    Local,
    Derivative,
    Approximated,
    Final,
    Template,
    Aligned,
    GlobalPca,
}

/// A length-T real series tagged with what it represents.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarResponse {
    pub values: Vec<f64>,
    pub kind: ResponseKind,
}

impl ScalarResponse {
    pub fn new(values: Vec<f64>, kind: ResponseKind) -> Self {
        Self { values, kind }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Copy rescaled to span [0, 1]; a constant series maps to zeros.
    pub fn minmax_normalized(&self) -> ScalarResponse {
        ScalarResponse::new(minmax_scale(&self.values), self.kind)
    }
}

/// N × T matrix whose row `i` is the local response of landmark `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ResponseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("response rows differ in length".into()));
        }
        let n = rows.len();
        Ok(Self {
            rows: n,
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn num_rows(&self) -> usize {
        self.rows
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    pub fn get(&self, i: usize, t: usize) -> f64 {
        self.data[i * self.cols + t]
    }
}

/// Per-landmark relevance weights, each in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(pub Vec<f64>);

impl WeightVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Point indices ordered by decreasing weight, lower index first on ties.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.0.len()).collect();
        idx.sort_by(|&a, &b| self.0[b].total_cmp(&self.0[a]).then(a.cmp(&b)));
        idx
    }
}

/// Rescales `values` to span [0, 1]; a constant input yields all zeros.
pub fn minmax_scale(values: &[f64]) -> Vec<f64> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let range = hi - lo;
    if !(range > 0.0) {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - lo) / range).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point(coords: &[[f64; 2]]) -> Sequence {
        let frames = coords.len() / 2;
        Sequence::new("s", 2, 2, frames, coords.iter().flatten().copied().collect()).unwrap()
    }

    #[test]
    fn center_translates_to_reference() {
        let seq = two_point(&[[3.0, 4.0], [5.0, 5.0], [3.0, 4.0], [5.0, 5.0]]);
        let c = center_sequence(&seq, Some(0)).unwrap();
        assert_eq!(c.point(0, 0), &[0.0, 0.0]);
        assert_eq!(c.point(0, 1), &[2.0, 1.0]);
        // input untouched
        assert_eq!(seq.point(0, 0), &[3.0, 4.0]);
    }

    #[test]
    fn center_uses_nose_index() {
        let seq = two_point(&[[1.0, 1.0], [2.0, 2.0], [0.0, 0.0], [1.0, 0.0]])
            .with_nose_index(1)
            .unwrap();
        let c = center_sequence(&seq, None).unwrap();
        assert_eq!(c.point(0, 0), &[-1.0, -1.0]);
        assert_eq!(c.point(1, 1), &[0.0, 0.0]);
    }

    #[test]
    fn center_without_reference_fails() {
        let seq = two_point(&[[0.0, 0.0], [1.0, 1.0], [0.0, 0.0], [1.0, 1.0]]);
        assert!(matches!(
            center_sequence(&seq, None),
            Err(Error::MissingReference)
        ));
        assert!(matches!(
            center_sequence(&seq, Some(5)),
            Err(Error::BadIndex { .. })
        ));
    }

    #[test]
    fn centered_sequence_is_unchanged() {
        let seq = two_point(&[[0.0, 0.0], [0.25, -1.5], [0.0, 0.0], [7.0, 1.0]]);
        let c = center_sequence(&seq, Some(0)).unwrap();
        assert_eq!(c, seq);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(
            Sequence::new("s", 4, 1, 2, vec![0.0; 8]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            Sequence::new("s", 2, 1, 1, vec![0.0; 2]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            Sequence::new("s", 2, 1, 2, vec![0.0; 3]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            Sequence::new("s", 2, 1, 2, vec![0.0, f64::NAN, 0.0, 0.0]),
            Err(Error::Value(_))
        ));
    }

    #[test]
    fn minmax_of_constant_is_zero() {
        assert_eq!(minmax_scale(&[2.0, 2.0, 2.0]), vec![0.0; 3]);
        assert_eq!(minmax_scale(&[1.0, 3.0, 2.0]), vec![0.0, 1.0, 0.5]);
    }

    #[test]
    fn select_and_reverse() {
        let seq = two_point(&[[0.0, 0.0], [1.0, 1.0], [0.0, 0.0], [2.0, 3.0]])
            .with_nose_index(0)
            .unwrap();
        let s = seq.select_points(&[1]).unwrap();
        assert_eq!(s.num_points(), 1);
        assert_eq!(s.nose_index, None);
        assert_eq!(s.point(1, 0), &[2.0, 3.0]);
        let r = seq.reversed();
        assert_eq!(r.point(0, 1), &[2.0, 3.0]);
        assert_eq!(r.reversed(), seq);
    }
}
