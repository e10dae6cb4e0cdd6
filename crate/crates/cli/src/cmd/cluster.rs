use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Result;
use expression_response::analysis::ward_cluster;
use expression_response::batch::map_jobs;
use expression_response::metrics::apex_frame;
use expression_response::response::{estimate_intensity, IntensityResult, TransitionMode};
use expression_response::seqdata::{center_sequence, Sequence};
use serde_json::json;

use super::{f, Ctx};
use crate::output::{ensure_dir, load_batch, stem, write_text};

pub const UNLABELED: &str = "unlabeled";

/// Sequence, weight vector, shape at the apex.
type Member<'a> = (&'a Sequence, Vec<f64>, Vec<f64>);

/// Apex frame for two-sided estimates, otherwise the frame of maximal
/// final response.
fn shape_frame(est: &IntensityResult) -> usize {
    if let Some(tr) = est.transitions.filter(|t| t.mode == TransitionMode::TwoSided) {
        if let Ok(a) = apex_frame(&tr) {
            return a;
        }
    }
    let v = &est.final_normalized.values;
    (0..v.len()).fold(0, |best, t| if v[t] > v[best] { t } else { best })
}

fn row(seq: &Sequence, ctx: &Ctx) -> expression_response::Result<(Vec<f64>, Vec<f64>)> {
    let est = estimate_intensity(seq, &ctx.cfg.response)?;
    let centered = center_sequence(seq, ctx.cfg.response.reference_index)?;
    let shape = centered.frame(shape_frame(&est)).to_vec();
    Ok((est.weights.0, shape))
}

/// Per label group under `clusters/<group>/`: `labels.csv`, `tree.csv`,
/// `mean_weights.csv` and `mean_shapes.json`.
pub fn run(ctx: &mut Ctx, manifest: &Path) -> Result<()> {
    let seqs = load_batch(manifest, ctx.jobs, &mut ctx.log)?;
    let rows = map_jobs(&seqs, ctx.jobs, |s| row(s, ctx));
    let mut groups: BTreeMap<String, Vec<Member>> = BTreeMap::new();
    for (seq, r) in seqs.iter().zip(rows) {
        match r {
            Ok((w, shape)) => groups
                .entry(seq.label.clone().unwrap_or_else(|| UNLABELED.to_string()))
                .or_default()
                .push((seq, w, shape)),
            Err(e) => ctx.log.push(&seq.id, "respond", e),
        }
    }
    let root = ensure_dir(&ctx.out.join("clusters"))?;
    let k = ctx.cfg.k;
    for (label, members) in &groups {
        let weights: Vec<Vec<f64>> = members.iter().map(|m| m.1.clone()).collect();
        let shapes: Vec<Vec<f64>> = members.iter().map(|m| m.2.clone()).collect();
        let res = match ward_cluster(&weights, k, Some(&shapes)) {
            Ok(r) => r,
            Err(e) => {
                ctx.log.push(&format!("group:{label}"), "cluster", e);
                continue;
            }
        };
        let dir = ensure_dir(&root.join(stem(label)))?;
        let mut labels = String::from("sequence_id,cluster\n");
        for (m, c) in members.iter().zip(&res.labels) {
            labels.push_str(&crate::output::csv_row([m.0.id.clone(), c.to_string()]));
        }
        write_text(&dir.join("labels.csv"), &labels)?;
        write_text(&dir.join("tree.csv"), &res.merges_csv())?;
        let mut mw = String::from("cluster,point,weight\n");
        for (c, w) in res.mean_weights.iter().enumerate() {
            for (i, v) in w.iter().enumerate() {
                mw.push_str(&format!("{c},{i},{}\n", f(*v)));
            }
        }
        write_text(&dir.join("mean_weights.csv"), &mw)?;
        let dim = members[0].0.dim();
        let sizes: Vec<usize> = (0..res.k())
            .map(|c| res.labels.iter().filter(|&&l| l == c).count())
            .collect();
        let clusters: Vec<_> = res
            .mean_shapes
            .unwrap_or_default()
            .iter()
            .enumerate()
            .map(|(c, s)| {
                json!({
                    "cluster": c,
                    "size": sizes[c],
                    "points": s.chunks(dim).collect::<Vec<_>>(),
                })
            })
            .collect();
        let doc = json!({ "group": label, "dim": dim, "clusters": clusters });
        write_text(&dir.join("mean_shapes.json"), &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    }
    Ok(())
}
