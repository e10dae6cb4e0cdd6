use std::path::Path;

use anyhow::Result;
use expression_response::batch::map_jobs;
use expression_response::response::estimate_intensity;

use super::{opt_usize, Ctx};
use crate::output::{csv_row, ensure_dir, load_batch, stem, write_text};

/// `responses/<id>.csv`, `weights/<id>.csv` and `transitions.csv`.
pub fn run(ctx: &mut Ctx, manifest: &Path) -> Result<()> {
    let seqs = load_batch(manifest, ctx.jobs, &mut ctx.log)?;
    let results = map_jobs(&seqs, ctx.jobs, |s| estimate_intensity(s, &ctx.cfg.response));
    let resp_dir = ensure_dir(&ctx.out.join("responses"))?;
    let weight_dir = ensure_dir(&ctx.out.join("weights"))?;
    let mut summary = String::from("sequence_id,mode,t1,t2,low_confidence\n");
    for (seq, res) in seqs.iter().zip(results) {
        let res = match res {
            Ok(r) => r,
            Err(e) => {
                ctx.log.push(&seq.id, "respond", e);
                continue;
            }
        };
        let name = format!("{}.csv", stem(&seq.id));
        res.write_response_csv(resp_dir.join(&name))?;
        res.write_weights_csv(weight_dir.join(&name))?;
        let (mode, t1, t2) = match res.transitions {
            Some(tr) => (tr.mode.to_string(), opt_usize(tr.t1), opt_usize(tr.t2)),
            None => ("external".to_string(), String::new(), String::new()),
        };
        summary.push_str(&csv_row([
            seq.id.as_str(),
            &mode,
            &t1,
            &t2,
            if res.low_confidence { "1" } else { "0" },
        ]));
    }
    write_text(&ctx.out.join("transitions.csv"), &summary)
}
