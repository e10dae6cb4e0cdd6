use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use expression_response::batch::map_jobs;
use expression_response::metrics::{
    evaluate_concatenated, evaluate_sequence, pseudo_ground_truth_triangle, EvalReport, SequenceEval,
};
use expression_response::response::estimate_intensity;
use expression_response::seqdata::Sequence;

use super::{f, Ctx};
use crate::output::write_text;
use crate::run_config::Aggregation;

#[derive(Debug, Clone, PartialEq)]
pub enum Truth {
    Apex { apex: usize, peak: Option<f64> },
    Series(Vec<f64>),
}

/// Reads either `sequence_id,apex_frame[,peak_value]` or
/// `sequence_id,t,intensity`.
pub fn load_truth(path: &Path) -> Result<BTreeMap<String, Truth>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening truth {}", path.display()))?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut out = BTreeMap::new();
    match header.as_slice() {
        ["sequence_id", "apex_frame"] | ["sequence_id", "apex_frame", "peak_value"] => {
            for rec in rdr.records() {
                let rec = rec?;
                let apex = rec[1].parse().with_context(|| format!("bad apex_frame '{}'", &rec[1]))?;
                let peak = match rec.get(2) {
                    Some(s) if !s.is_empty() => {
                        Some(s.parse().with_context(|| format!("bad peak_value '{s}'"))?)
                    }
                    _ => None,
                };
                if out.insert(rec[0].to_string(), Truth::Apex { apex, peak }).is_some() {
                    bail!("duplicate truth row for '{}'", &rec[0]);
                }
            }
        }
        ["sequence_id", "t", "intensity"] => {
            let mut frames: BTreeMap<String, BTreeMap<usize, f64>> = BTreeMap::new();
            for rec in rdr.records() {
                let rec = rec?;
                let t: usize = rec[1].parse().with_context(|| format!("bad frame '{}'", &rec[1]))?;
                let v: f64 = rec[2].parse().with_context(|| format!("bad intensity '{}'", &rec[2]))?;
                if !v.is_finite() {
                    bail!("non-finite intensity for '{}' at frame {t}", &rec[0]);
                }
                if frames.entry(rec[0].to_string()).or_default().insert(t, v).is_some() {
                    bail!("duplicate frame {t} for '{}'", &rec[0]);
                }
            }
            for (id, rows) in frames {
                if rows.keys().copied().ne(0..rows.len()) {
                    bail!("truth frames for '{id}' are not contiguous from 0");
                }
                out.insert(id, Truth::Series(rows.into_values().collect()));
            }
        }
        other => bail!(
            "unrecognized truth header '{}'; expected sequence_id,apex_frame[,peak_value] or sequence_id,t,intensity",
            other.join(",")
        ),
    }
    Ok(out)
}

fn truth_series(truth: &Truth, len: usize, default_peak: Option<f64>) -> Result<Vec<f64>> {
    match truth {
        Truth::Apex { apex, peak } => {
            let peak = peak
                .or(default_peak)
                .context("apex truth needs a peak_value column or config key")?;
            Ok(pseudo_ground_truth_triangle(*apex, len, peak)?.values)
        }
        Truth::Series(v) if v.len() == len => Ok(v.clone()),
        Truth::Series(v) => bail!("truth has {} frames, sequence has {len}", v.len()),
    }
}

/// Writes `eval_report.csv`: per-sequence rows, a `mean` row and, with
/// `aggregation=concatenated`, a `concatenated` row.
pub fn run(ctx: &mut Ctx, manifest: &Path, truth_path: &Path) -> Result<()> {
    let truth = load_truth(truth_path)?;
    let seqs = crate::output::load_batch(manifest, ctx.jobs, &mut ctx.log)?;
    let mut paired: Vec<(&Sequence, Vec<f64>)> = Vec::new();
    for seq in &seqs {
        let Some(t) = truth.get(&seq.id) else {
            ctx.log.push(&seq.id, "eval", "no truth rows for sequence");
            continue;
        };
        match truth_series(t, seq.num_frames(), ctx.cfg.peak_value) {
            Ok(v) => paired.push((seq, v)),
            Err(e) => ctx.log.push(&seq.id, "eval", format!("{e:#}")),
        }
    }
    let scale = ctx.cfg.scale;
    let results = map_jobs(&paired, ctx.jobs, |(seq, tr)| {
        let est = estimate_intensity(seq, &ctx.cfg.response)?;
        let pred = est.final_normalized.values;
        let ev = evaluate_sequence(&seq.id, &pred, tr, scale)?;
        Ok::<(SequenceEval, Vec<f64>), expression_response::Error>((ev, pred))
    });
    let mut evals = Vec::new();
    let mut pairs = Vec::new();
    for ((seq, tr), r) in paired.iter().zip(results) {
        match r {
            Ok((ev, pred)) => {
                evals.push(ev);
                pairs.push((pred, tr.clone()));
            }
            Err(e) => ctx.log.push(&seq.id, "eval", e),
        }
    }
    if evals.is_empty() {
        return Ok(());
    }
    let mut csv = EvalReport::from_sequences(evals)?.to_csv();
    if ctx.cfg.aggregation == Aggregation::Concatenated {
        let (m, p, i) = evaluate_concatenated(&pairs, scale)?;
        csv.push_str(&format!("concatenated,{},{},{}\n", f(m), f(p), f(i)));
    }
    write_text(&ctx.out.join("eval_report.csv"), &csv)
}
