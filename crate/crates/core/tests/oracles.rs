//! Library results checked against independent brute-force implementations.

#![allow(clippy::needless_range_loop)]

use expression_response::align::{alignment_mse, dtw_align};
use expression_response::analysis::ward_linkage;
use expression_response::baseline::global_pca_projection;
use expression_response::linalg::power_iteration;
use expression_response::metrics::{icc, mae, pcc};
use expression_response::response::{
    box_response, derivative_response, final_response, local_pca_response, orient_and_scale,
    rank_weights, DerivativeKernel,
};
use expression_response::seqdata::{ResponseKind, ResponseMatrix, ScalarResponse, Sequence, WeightVector};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_vec(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.random_range(-1.0..1.0)).collect()
}

fn dominant_eigvec(m: DMatrix<f64>) -> Vec<f64> {
    let e = SymmetricEigen::new(m);
    let k = e.eigenvalues.imax();
    e.eigenvectors.column(k).iter().copied().collect()
}

fn same_up_to_sign(a: &[f64], b: &[f64], tol: f64) -> bool {
    let plus = a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol);
    let minus = a.iter().zip(b).all(|(x, y)| (x + y).abs() <= tol);
    plus || minus
}

#[test]
fn local_pca_matches_dense_eigensolve() {
    let mut r = rng(1);
    for case in 0..100 {
        let d = if case % 2 == 0 { 2 } else { 3 };
        let t_len = r.random_range(3..30);
        let coords = random_vec(&mut r, t_len * d);
        let seq = Sequence::new("s", d, 1, t_len, coords.clone()).unwrap();
        let got = local_pca_response(&seq, 0);

        let mean: Vec<f64> = (0..d)
            .map(|c| (0..t_len).map(|t| coords[t * d + c]).sum::<f64>() / t_len as f64)
            .collect();
        let cov = DMatrix::from_fn(d, d, |a, b| {
            (0..t_len)
                .map(|t| (coords[t * d + a] - mean[a]) * (coords[t * d + b] - mean[b]))
                .sum::<f64>()
                / (t_len - 1) as f64
        });
        let v = dominant_eigvec(cov);
        let want: Vec<f64> = (0..t_len)
            .map(|t| (0..d).map(|c| v[c] * (coords[t * d + c] - coords[c])).sum())
            .collect();
        assert_eq!(got.values[0], 0.0);
        assert!(same_up_to_sign(&got.values, &want, 1e-9), "case {case}");
    }
}

#[test]
fn global_pca_matches_dense_eigensolve() {
    let mut r = rng(2);
    for case in 0..30 {
        let d = 2 + case % 2;
        let n = r.random_range(1..=12 / d);
        let t_len = r.random_range(4..30);
        let coords = random_vec(&mut r, t_len * n * d);
        let seq = Sequence::new("s", d, n, t_len, coords.clone()).unwrap();
        let (proj, _) = global_pca_projection(&seq).unwrap();

        let w = n * d;
        let x = DMatrix::from_fn(t_len, w, |t, j| coords[t * w + j]);
        let mean = x.row_mean();
        let centered = DMatrix::from_fn(t_len, w, |t, j| x[(t, j)] - mean[j]);
        let cov = centered.transpose() * &centered / (t_len - 1) as f64;
        let v = dominant_eigvec(cov);
        let want: Vec<f64> = (0..t_len)
            .map(|t| (0..w).map(|j| centered[(t, j)] * v[j]).sum())
            .collect();
        assert!(same_up_to_sign(&proj, &want, 1e-8), "case {case}");
    }
}

#[test]
fn power_iteration_matches_dense_eigensolve() {
    let mut r = rng(3);
    for _ in 0..20 {
        let n = r.random_range(2..10);
        let a = DMatrix::from_fn(n, n, |_, _| r.random_range(-1.0..1.0));
        let m = &a * a.transpose();
        let flat: Vec<f64> = (0..n * n).map(|k| m[(k / n, k % n)]).collect();
        let pi = power_iteration(&flat, n, 1e-12, 100_000);
        let e = SymmetricEigen::new(m.clone());
        let mut ev: Vec<f64> = e.eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        if ev[0] - ev[1] < 1e-3 * ev[0] {
            continue;
        }
        assert!((pi.eigenvalue - ev[0]).abs() < 1e-8 * ev[0]);
        let v = dominant_eigvec(m);
        assert!(same_up_to_sign(&pi.vector, &v, 1e-5));
    }
}

#[test]
fn derivative_median_matches_sort_oracle() {
    let mut r = rng(4);
    for _ in 0..20 {
        let rows: Vec<Vec<f64>> = (0..10).map(|_| random_vec(&mut r, 50)).collect();
        let m = ResponseMatrix::from_rows(rows.clone()).unwrap();
        let got = derivative_response(&m, DerivativeKernel::Central, 0.0);
        for t in 0..50 {
            let mut col: Vec<f64> = rows
                .iter()
                .map(|row| {
                    let d = match t {
                        0 => row[1] - row[0],
                        49 => row[49] - row[48],
                        _ => (row[t + 1] - row[t - 1]) / 2.0,
                    };
                    d.abs()
                })
                .collect();
            col.sort_by(f64::total_cmp);
            let want = 0.5 * (col[4] + col[5]);
            assert!((got.values[t] - want).abs() < 1e-12);
        }
    }
}

#[test]
fn eq_formulas_match_loops() {
    let mut r = rng(5);
    for _ in 0..100 {
        let t_len = r.random_range(3..40);
        let t1 = r.random_range(0..t_len - 1);
        let t2 = r.random_range(t1 + 1..t_len);
        let b = box_response(t1, t2, t_len).unwrap();
        for t in 0..t_len {
            let want = if t1 < t && t < t2 { 1.0 } else { 0.0 };
            assert_eq!(b.values[t], want);
        }

        let n = r.random_range(1..8);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| random_vec(&mut r, t_len)).collect();
        let approx = b.values.clone();
        let mut oriented = Vec::new();
        for row in &rows {
            let (o, flipped) = orient_and_scale(row, &approx).unwrap();
            let scale = |v: &[f64]| {
                let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                v.iter().map(|x| if hi > lo { (x - lo) / (hi - lo) } else { 0.0 }).collect::<Vec<_>>()
            };
            let direct = scale(row);
            let neg = scale(&row.iter().map(|x| -x).collect::<Vec<_>>());
            let dist = |v: &[f64]| v.iter().zip(&approx).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let expect_flip = dist(&neg) < dist(&direct);
            assert_eq!(flipped, expect_flip);
            let want = if expect_flip { neg } else { direct };
            assert!(o.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-12));
            oriented.push(o);
        }
        let om = ResponseMatrix::from_rows(oriented.clone()).unwrap();
        let (w, dists) = rank_weights(&om, &approx).unwrap();
        let mut d_oracle = Vec::new();
        for o in &oriented {
            let mut s = 0.0;
            for t in 0..t_len {
                s += (approx[t] - o[t]) * (approx[t] - o[t]);
            }
            d_oracle.push(s.sqrt());
        }
        let dmax = d_oracle.iter().copied().fold(0.0, f64::max);
        for i in 0..n {
            assert!((dists[i] - d_oracle[i]).abs() < 1e-12);
            let want = if dmax > 0.0 { 1.0 - d_oracle[i] / dmax } else { 1.0 };
            assert!((w.0[i] - want).abs() < 1e-12);
        }

        let weights = WeightVector(random_vec(&mut r, n).iter().map(|v| v.abs()).collect());
        let f = final_response(&om, &weights).unwrap();
        for t in 0..t_len {
            let mut s = 0.0;
            for i in 0..n {
                s += weights.0[i] * oriented[i][t];
            }
            assert!((f.values[t] - s).abs() < 1e-12);
        }
    }
}

#[test]
fn eq7_and_metrics_match_loops() {
    let mut r = rng(6);
    for _ in 0..100 {
        let window = r.random_range(2..30);
        let s = r.random_range(1..6);
        let tpl = ScalarResponse::new(random_vec(&mut r, window + 3), ResponseKind::Template);
        let set: Vec<ScalarResponse> = (0..s)
            .map(|_| ScalarResponse::new(random_vec(&mut r, window), ResponseKind::Aligned))
            .collect();
        let mut total = 0.0;
        for a in &set {
            for u in 0..window {
                total += (a.values[u] - tpl.values[u]).powi(2);
            }
        }
        assert!((alignment_mse(&set, &tpl, window).unwrap() - total / s as f64).abs() < 1e-12);

        let n = r.random_range(3..60);
        let p = random_vec(&mut r, n);
        let g = random_vec(&mut r, n);
        let mut abs_sum = 0.0;
        for i in 0..n {
            abs_sum += (p[i] - g[i]).abs();
        }
        assert!((mae(&p, &g).unwrap() - abs_sum / n as f64).abs() < 1e-12);

        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (mp, mg) = (mean(&p), mean(&g));
        let cov: f64 = p.iter().zip(&g).map(|(a, b)| (a - mp) * (b - mg)).sum::<f64>() / n as f64;
        let sd = |v: &[f64], m: f64| (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64).sqrt();
        let want = cov / (sd(&p, mp) * sd(&g, mg));
        assert!((pcc(&p, &g).unwrap().value - want).abs() < 1e-12);

        // two-way ANOVA through total, row and column sums of squares
        let k = 2.0;
        let nf = n as f64;
        let grand = (p.iter().sum::<f64>() + g.iter().sum::<f64>()) / (k * nf);
        let sst: f64 = p.iter().chain(&g).map(|x| (x - grand).powi(2)).sum();
        let ssr: f64 = p.iter().zip(&g).map(|(a, b)| k * ((a + b) / 2.0 - grand).powi(2)).sum();
        let ssc = nf * ((mp - grand).powi(2) + (mg - grand).powi(2));
        let sse = sst - ssr - ssc;
        let bms = ssr / (nf - 1.0);
        let ems = sse / ((nf - 1.0) * (k - 1.0));
        let want = (bms - ems) / (bms + (k - 1.0) * ems);
        assert!((icc(&p, &g).unwrap() - want).abs() < 1e-9);
    }
}

fn brute_force_dtw(a: &[f64], b: &[f64]) -> f64 {
    fn walk(a: &[f64], b: &[f64], i: usize, j: usize, acc: f64, best: &mut f64) {
        let acc = acc + (a[i] - b[j]).powi(2);
        if i + 1 == a.len() && j + 1 == b.len() {
            *best = best.min(acc);
            return;
        }
        if i + 1 < a.len() {
            walk(a, b, i + 1, j, acc, best);
        }
        if j + 1 < b.len() {
            walk(a, b, i, j + 1, acc, best);
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(a, b, i + 1, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, 0, 0, 0.0, &mut best);
    best
}

#[test]
fn dtw_matches_path_enumeration() {
    let mut r = rng(7);
    for _ in 0..200 {
        let n = r.random_range(2..=8);
        let m = r.random_range(2..=8);
        let a: Vec<f64> = (0..n).map(|_| r.random_range(0.0..1.0)).collect();
        let b: Vec<f64> = (0..m).map(|_| r.random_range(0.0..1.0)).collect();
        let res = dtw_align(
            &ScalarResponse::new(a.clone(), ResponseKind::Final),
            &ScalarResponse::new(b.clone(), ResponseKind::Template),
        )
        .unwrap();
        let want = brute_force_dtw(&a, &b);
        assert!((res.cost - want).abs() < 1e-12, "{} vs {want}", res.cost);
        let path_cost: f64 = res.path.pairs.iter().map(|&(i, j)| (a[i] - b[j]).powi(2)).sum();
        assert!((path_cost - res.cost).abs() < 1e-12);
    }
}

/// Agglomeration that recomputes Ward distances from member sets each step.
fn brute_force_ward(rows: &[Vec<f64>]) -> Vec<(Vec<usize>, f64)> {
    let mut clusters: Vec<Vec<usize>> = (0..rows.len()).map(|i| vec![i]).collect();
    let centroid = |members: &[usize]| {
        let w = rows[0].len();
        let mut c = vec![0.0; w];
        for &m in members {
            for (acc, v) in c.iter_mut().zip(&rows[m]) {
                *acc += v;
            }
        }
        c.iter().map(|v| v / members.len() as f64).collect::<Vec<_>>()
    };
    let mut out = Vec::new();
    while clusters.len() > 1 {
        let mut best = (f64::INFINITY, 0, 0);
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let (na, nb) = (clusters[i].len() as f64, clusters[j].len() as f64);
                let d2: f64 = centroid(&clusters[i])
                    .iter()
                    .zip(centroid(&clusters[j]))
                    .map(|(a, b)| (a - b).powi(2))
                    .sum();
                let h = (2.0 * na * nb / (na + nb) * d2).sqrt();
                if h < best.0 {
                    best = (h, i, j);
                }
            }
        }
        let (h, i, j) = best;
        let merged_b = clusters.remove(j);
        clusters[i].extend(merged_b);
        let mut members = clusters[i].clone();
        members.sort();
        out.push((members, h));
    }
    out
}

#[test]
fn ward_matches_exhaustive_agglomeration() {
    let mut r = rng(8);
    for _ in 0..100 {
        let s = r.random_range(2..=8);
        let w = r.random_range(1..5);
        let rows: Vec<Vec<f64>> = (0..s).map(|_| random_vec(&mut r, w)).collect();
        let merges = ward_linkage(&rows).unwrap();
        let oracle = brute_force_ward(&rows);
        let mut members: Vec<Vec<usize>> = (0..s).map(|i| vec![i]).collect();
        for (m, (want_members, want_h)) in merges.iter().zip(&oracle) {
            let mut joined = [members[m.node_a].clone(), members[m.node_b].clone()].concat();
            joined.sort();
            assert_eq!(&joined, want_members);
            assert_eq!(m.size, joined.len());
            assert!((m.height - want_h).abs() < 1e-9);
            members.push(joined);
        }
    }
}
