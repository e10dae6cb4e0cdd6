use crate::error::{Error, Result};

/// One agglomeration step. Nodes `0..S` are the input rows; the cluster
/// created at step `s` is node `S + s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub node_a: usize,
    pub node_b: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    /// Cluster id per input row, numbered by first appearance.
    pub labels: Vec<usize>,
    pub merges: Vec<Merge>,
    /// `k` rows, each the mean of its members' weight vectors.
    pub mean_weights: Vec<Vec<f64>>,
    /// Per-cluster mean of the supplied apex shapes.
    pub mean_shapes: Option<Vec<Vec<f64>>>,
}

impl ClusterResult {
    pub fn k(&self) -> usize {
        self.mean_weights.len()
    }

    /// `step,node_a,node_b,height,size`
    pub fn merges_csv(&self) -> String {
        let mut s = String::from("step,node_a,node_b,height,size\n");
        for (step, m) in self.merges.iter().enumerate() {
            s.push_str(&format!(
                "{step},{},{},{:?},{}\n",
                m.node_a, m.node_b, m.height, m.size
            ));
        }
        s
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Ward linkage on Euclidean distances. Merge heights follow the usual
/// convention `sqrt(2 |A||B| / (|A|+|B|)) * |cA - cB|`.
pub fn ward_linkage(rows: &[Vec<f64>]) -> Result<Vec<Merge>> {
    let s = rows.len();
    if s == 0 {
        return Err(Error::EmptySet);
    }
    let width = rows[0].len();
    if let Some(r) = rows.iter().find(|r| r.len() != width) {
        return Err(Error::LengthMismatch(r.len(), width));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Value("non-finite value in cluster input".into()));
    }

    // squared distances between active clusters, indexed by slot
    let mut d2 = vec![0.0; s * s];
    for i in 0..s {
        for j in i + 1..s {
            let v = sq_dist(&rows[i], &rows[j]);
            d2[i * s + j] = v;
            d2[j * s + i] = v;
        }
    }
    let mut size = vec![1usize; s];
    let mut node: Vec<usize> = (0..s).collect();
    let mut active = vec![true; s];
    let mut merges = Vec::with_capacity(s.saturating_sub(1));

    for step in 0..s.saturating_sub(1) {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in (0..s).filter(|&i| active[i]) {
            for j in (i + 1..s).filter(|&j| active[j]) {
                let v = d2[i * s + j];
                if best.is_none_or(|(b, _, _)| v < b) {
                    best = Some((v, i, j));
                }
            }
        }
        let (dij, i, j) = best.expect("at least two active clusters");
        let (ni, nj) = (size[i] as f64, size[j] as f64);
        for k in (0..s).filter(|&k| active[k] && k != i && k != j) {
            let nk = size[k] as f64;
            let v = ((ni + nk) * d2[i * s + k] + (nj + nk) * d2[j * s + k] - nk * dij) / (ni + nj + nk);
            d2[i * s + k] = v;
            d2[k * s + i] = v;
        }
        let (a, b) = (node[i].min(node[j]), node[i].max(node[j]));
        size[i] += size[j];
        active[j] = false;
        node[i] = s + step;
        merges.push(Merge {
            node_a: a,
            node_b: b,
            height: dij.max(0.0).sqrt(),
            size: size[i],
        });
    }
    for w in merges.windows(2) {
        assert!(
            w[1].height >= w[0].height - 1e-9 * w[0].height.max(1.0),
            "ward heights must be non-decreasing"
        );
    }
    Ok(merges)
}

/// Labels from undoing the last `k - 1` merges, numbered by first
/// appearance in row order.
pub fn cut_tree(merges: &[Merge], num_rows: usize, k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > num_rows {
        return Err(Error::BadK { k, rows: num_rows });
    }
    let mut parent: Vec<usize> = (0..num_rows + merges.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (step, m) in merges.iter().take(num_rows - k).enumerate() {
        let new = num_rows + step;
        let ra = find(&mut parent, m.node_a);
        let rb = find(&mut parent, m.node_b);
        parent[ra] = new;
        parent[rb] = new;
    }
    let mut ids = std::collections::HashMap::new();
    Ok((0..num_rows)
        .map(|i| {
            let root = find(&mut parent, i);
            let next = ids.len();
            *ids.entry(root).or_insert(next)
        })
        .collect())
}

fn group_means(rows: &[Vec<f64>], labels: &[usize], k: usize) -> Vec<Vec<f64>> {
    let width = rows.first().map_or(0, Vec::len);
    let mut sums = vec![vec![0.0; width]; k];
    let mut counts = vec![0usize; k];
    for (r, &l) in rows.iter().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(r) {
            *s += v;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        s.iter_mut().for_each(|v| *v /= c as f64);
    }
    sums
}

/// Ward clustering of weight vectors into `k` groups. `apex_shapes`, one
/// flattened landmark set per row, yields per-cluster mean shapes.
pub fn ward_cluster(
    weight_rows: &[Vec<f64>],
    k: usize,
    apex_shapes: Option<&[Vec<f64>]>,
) -> Result<ClusterResult> {
    if k == 0 || k > weight_rows.len() {
        return Err(Error::BadK {
            k,
            rows: weight_rows.len(),
        });
    }
    let merges = ward_linkage(weight_rows)?;
    let labels = cut_tree(&merges, weight_rows.len(), k)?;
    let mean_shapes = match apex_shapes {
        Some(shapes) => {
            if shapes.len() != weight_rows.len() {
                return Err(Error::LengthMismatch(shapes.len(), weight_rows.len()));
            }
            let width = shapes.first().map_or(0, Vec::len);
            if let Some(s) = shapes.iter().find(|s| s.len() != width) {
                return Err(Error::LengthMismatch(s.len(), width));
            }
            Some(group_means(shapes, &labels, k))
        }
        None => None,
    };
    Ok(ClusterResult {
        mean_weights: group_means(weight_rows, &labels, k),
        labels,
        merges,
        mean_shapes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn each_row_alone() {
        let rows = vec![vec![0.0], vec![1.0], vec![5.0]];
        let r = ward_cluster(&rows, 3, None).unwrap();
        assert_eq!(r.labels, vec![0, 1, 2]);
        assert_eq!(r.mean_weights, rows);
    }

    #[test]
    fn separated_duplicates() {
        let rows = vec![vec![0.0, 0.0], vec![9.0, 9.0], vec![0.0, 0.0], vec![9.0, 9.0]];
        let r = ward_cluster(&rows, 2, Some(&rows)).unwrap();
        assert_eq!(r.labels, vec![0, 1, 0, 1]);
        assert_eq!(r.mean_shapes.unwrap()[1], vec![9.0, 9.0]);
    }

    #[test]
    fn known_heights() {
        // two pairs at distance 1, pair centroids 10 apart
        let rows = vec![vec![0.0], vec![1.0], vec![10.0], vec![11.0]];
        let m = ward_linkage(&rows).unwrap();
        assert_eq!((m[0].node_a, m[0].node_b, m[0].size), (0, 1, 2));
        assert_eq!((m[1].node_a, m[1].node_b), (2, 3));
        assert!((m[0].height - 1.0).abs() < 1e-12);
        assert_eq!((m[2].node_a, m[2].node_b, m[2].size), (4, 5, 4));
        assert!((m[2].height - (2.0f64 * 2.0 * 2.0 / 4.0).sqrt() * 10.0).abs() < 1e-12);
    }

    #[test]
    fn bad_k() {
        let rows = vec![vec![0.0]; 2];
        assert!(matches!(ward_cluster(&rows, 3, None), Err(Error::BadK { .. })));
        assert!(matches!(ward_cluster(&rows, 0, None), Err(Error::BadK { .. })));
    }
}
