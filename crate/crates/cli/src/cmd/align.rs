use std::path::Path;

use anyhow::{Context, Result};
use expression_response::align::{
    align_to_template, aligned_transition, alignment_mse, frame_distribution, make_template,
    template_from_responses, AlignmentResult,
};
use expression_response::baseline::global_pca_response;
use expression_response::batch::map_jobs;
use expression_response::response::estimate_intensity;
use expression_response::seqdata::save_sequence;
use expression_response::seqdata::{center_sequence, ScalarResponse, Sequence};

use super::{f, Ctx};
use crate::output::{csv_row, ensure_dir, load_batch, stem, write_text};
use crate::run_config::TemplateMode;

struct Features {
    proposed: ScalarResponse,
    pca: ScalarResponse,
}

fn features(seq: &Sequence, ctx: &Ctx) -> expression_response::Result<Features> {
    let est = estimate_intensity(seq, &ctx.cfg.response)?;
    let centered = center_sequence(seq, ctx.cfg.response.reference_index)?;
    let pca = global_pca_response(&centered, &est.approx)?;
    Ok(Features {
        proposed: est.final_normalized,
        pca,
    })
}

fn report_row(id: &str, r: &AlignmentResult) -> String {
    csv_row([
        id.to_string(),
        f(r.cost),
        r.chosen_transition.to_string(),
        r.window_error_first.map_or_else(String::new, f),
        r.window_error_second.map_or_else(String::new, f),
    ])
}

fn distribution_csv(rows: &[[f64; 5]]) -> String {
    let mut s = String::from("frame,q05,q25,median,q75,q95\n");
    for (u, q) in rows.iter().enumerate() {
        s.push_str(&format!("{u},{},{},{},{},{}\n", f(q[0]), f(q[1]), f(q[2]), f(q[3]), f(q[4])));
    }
    s
}

/// Aligns proposed and global-PCA responses to one template. Writes
/// `alignment_report.csv` (proposed), `alignment_report_global_pca.csv`,
/// `paths/`, `warped/`, `aligned/`, `distribution.csv`,
/// `distribution_global_pca.csv`, `alignment_mse.csv` and `template.csv`.
pub fn run(ctx: &mut Ctx, manifest: &Path) -> Result<()> {
    let seqs = load_batch(manifest, ctx.jobs, &mut ctx.log)?;
    let mut ok: Vec<(&Sequence, Features)> = Vec::new();
    for (seq, r) in seqs.iter().zip(map_jobs(&seqs, ctx.jobs, |s| features(s, ctx))) {
        match r {
            Ok(ft) => ok.push((seq, ft)),
            Err(e) => ctx.log.push(&seq.id, "respond", e),
        }
    }
    let cfg = &ctx.cfg;
    let template = match cfg.template {
        TemplateMode::Parametric => make_template(cfg.template_len, cfg.transition_len, cfg.smoothing)?,
        TemplateMode::Data => {
            if ok.is_empty() {
                return Ok(());
            }
            let finals: Vec<ScalarResponse> = ok.iter().map(|(_, ft)| ft.proposed.clone()).collect();
            template_from_responses(&finals, cfg.template_len)?
        }
    };
    let window = cfg.window;
    let aligned = map_jobs(&ok, ctx.jobs, |(seq, ft)| {
        let prop = align_to_template(&ft.proposed, &template, window)?;
        let pca = align_to_template(&ft.pca, &template, window)?;
        let shape = aligned_transition(seq, &prop, window.max(2))?;
        Ok::<_, expression_response::Error>((prop, pca, shape))
    });

    let paths = ensure_dir(&ctx.out.join("paths"))?;
    let warped_dir = ensure_dir(&ctx.out.join("warped"))?;
    let shapes = ensure_dir(&ctx.out.join("aligned"))?;
    let header = "sequence_id,cost,chosen_transition,window_error_first,window_error_second\n";
    let mut report = String::from(header);
    let mut report_pca = String::from(header);
    let mut win_prop = Vec::new();
    let mut win_pca = Vec::new();
    for ((seq, _), r) in ok.iter().zip(aligned) {
        let (prop, pca, shape) = match r {
            Ok(v) => v,
            Err(e) => {
                ctx.log.push(&seq.id, "align", e);
                continue;
            }
        };
        let name = stem(&seq.id);
        write_text(&paths.join(format!("{name}.csv")), &prop.path.to_csv())?;
        let mut w = String::from("u,proposed,global_pca\n");
        for u in 0..template.len() {
            w.push_str(&format!("{u},{},{}\n", f(prop.warped.values[u]), f(pca.warped.values[u])));
        }
        write_text(&warped_dir.join(format!("{name}.csv")), &w)?;
        let fmt = cfg.output_format;
        save_sequence(&shape, shapes.join(format!("{name}.{}", fmt.extension())), fmt)
            .with_context(|| format!("saving aligned {}", seq.id))?;
        report.push_str(&report_row(&seq.id, &prop));
        report_pca.push_str(&report_row(&seq.id, &pca));
        win_prop.push(prop.transition_window());
        win_pca.push(pca.transition_window());
    }
    write_text(&ctx.out.join("alignment_report.csv"), &report)?;
    write_text(&ctx.out.join("alignment_report_global_pca.csv"), &report_pca)?;

    let mut tpl = String::from("u,template\n");
    for (u, v) in template.values.iter().enumerate() {
        tpl.push_str(&format!("{u},{}\n", f(*v)));
    }
    write_text(&ctx.out.join("template.csv"), &tpl)?;
    if win_prop.is_empty() {
        return Ok(());
    }
    write_text(&ctx.out.join("distribution.csv"), &distribution_csv(&frame_distribution(&win_prop)?))?;
    write_text(
        &ctx.out.join("distribution_global_pca.csv"),
        &distribution_csv(&frame_distribution(&win_pca)?),
    )?;
    let mse_prop = alignment_mse(&win_prop, &template, window)?;
    let mse_pca = alignment_mse(&win_pca, &template, window)?;
    write_text(
        &ctx.out.join("alignment_mse.csv"),
        &format!(
            "feature,mse,sequences\nproposed,{},{n}\nglobal_pca,{},{n}\n",
            f(mse_prop),
            f(mse_pca),
            n = win_prop.len()
        ),
    )
}
