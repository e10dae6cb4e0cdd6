use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use expression_response::analysis::{au_intensity, load_au_annotations, AUEvent, AuResult};
use expression_response::batch::map_jobs;
use expression_response::seqdata::Sequence;

use super::{f, Ctx};
use crate::output::{csv_row, ensure_dir, load_batch, stem, write_text};

fn event_key(ev: &AUEvent) -> (String, usize, usize, usize, usize, usize) {
    (ev.au_id.clone(), ev.onset, ev.ne_start, ev.apex, ev.offset, ev.ne_end)
}

/// Per (sequence, event) curves and weights under `au/`, plus
/// `au_mse_per_sequence.csv` and the bar data `au_mse.csv`. An empty
/// annotation file produces no output.
pub fn run(ctx: &mut Ctx, manifest: &Path, annotations: &Path) -> Result<()> {
    let text = std::fs::read_to_string(annotations)
        .with_context(|| format!("reading annotations {}", annotations.display()))?;
    if text.trim().is_empty() {
        return Ok(());
    }
    let mut events = load_au_annotations(annotations)?;
    if events.is_empty() {
        return Ok(());
    }
    events.sort_by_key(|(id, ev)| (id.clone(), event_key(ev)));
    let seqs = load_batch(manifest, ctx.jobs, &mut ctx.log)?;
    let by_id: BTreeMap<&str, &Sequence> = seqs.iter().map(|s| (s.id.as_str(), s)).collect();
    let mut jobs: Vec<(&Sequence, &AUEvent)> = Vec::new();
    for (id, ev) in &events {
        match by_id.get(id.as_str()) {
            Some(s) => jobs.push((s, ev)),
            None => ctx.log.push(id, &format!("au:{}", ev.au_id), "sequence not in manifest or not loaded"),
        }
    }
    let keep = ctx.cfg.keep_fraction;
    let results = map_jobs(&jobs, ctx.jobs, |(s, ev)| au_intensity(s, ev, &ctx.cfg.response, keep));

    let dir = ensure_dir(&ctx.out.join("au"))?;
    let mut per_seq = String::from("sequence_id,au_id,onset,mse_pca,mse_full,mse_thresholded\n");
    let mut sums: BTreeMap<String, ([f64; 3], usize)> = BTreeMap::new();
    for ((seq, ev), r) in jobs.iter().zip(results) {
        let r: AuResult = match r {
            Ok(r) => r,
            Err(e) => {
                ctx.log.push(&seq.id, &format!("au:{}", ev.au_id), e);
                continue;
            }
        };
        let name = format!("{}_{}_{}", stem(&seq.id), stem(&ev.au_id), ev.onset);
        let mut curves = String::from("t,approx,full,thresholded,pca\n");
        for t in 0..r.pca.len() {
            curves.push_str(&format!(
                "{t},{},{},{},{}\n",
                f(r.full.approx.values[t]),
                f(r.full.final_normalized.values[t]),
                f(r.thresholded.final_normalized.values[t]),
                f(r.pca.values[t])
            ));
        }
        write_text(&dir.join(format!("{name}.csv")), &curves)?;
        let mut w = String::from("point,weight,thresholded_weight\n");
        for (i, (a, b)) in r.full.weights.0.iter().zip(&r.thresholded.weights.0).enumerate() {
            w.push_str(&format!("{i},{},{}\n", f(*a), f(*b)));
        }
        write_text(&dir.join(format!("{name}_weights.csv")), &w)?;
        per_seq.push_str(&csv_row([
            seq.id.clone(),
            r.au_id.clone(),
            ev.onset.to_string(),
            f(r.mse_pca),
            f(r.mse_full),
            f(r.mse_thresholded),
        ]));
        let e = sums.entry(r.au_id.clone()).or_insert(([0.0; 3], 0));
        e.0[0] += r.mse_pca;
        e.0[1] += r.mse_full;
        e.0[2] += r.mse_thresholded;
        e.1 += 1;
    }
    write_text(&ctx.out.join("au_mse_per_sequence.csv"), &per_seq)?;
    let mut bars = String::from("au_id,mse_pca,mse_full,mse_thresholded\n");
    for (au, (s, n)) in &sums {
        let n = *n as f64;
        bars.push_str(&csv_row([au.clone(), f(s[0] / n), f(s[1] / n), f(s[2] / n)]));
    }
    write_text(&ctx.out.join("au_mse.csv"), &bars)
}
