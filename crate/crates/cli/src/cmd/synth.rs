use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use expression_response::analysis::AUEvent;
use expression_response::seqdata::{save_sequence, write_manifest, ManifestEntry};
use expression_response::synth::{generate, presets, SynthSpec};

use super::{f, opt_usize, Ctx};
use crate::output::{csv_row, ensure_dir, stem, write_text};

pub const PRESETS: [&str; 5] = ["default", "rise_only", "fall_only", "jitter", "two_au"];

fn preset(name: &str, seed: u64) -> Result<(SynthSpec, Vec<AUEvent>)> {
    Ok(match name {
        "default" => (presets::default_suite(seed), vec![]),
        "rise_only" => (presets::rise_only(seed), vec![]),
        "fall_only" => (presets::fall_only(seed), vec![]),
        "jitter" => (presets::jitter(seed), vec![]),
        "two_au" => presets::two_au(seed, presets::TWO_AU_SIGMA),
        _ => bail!("unknown preset '{name}'; expected one of {}", PRESETS.join(", ")),
    })
}

fn join(set: &BTreeSet<usize>) -> String {
    set.iter().map(usize::to_string).collect::<Vec<_>>().join(";")
}

/// Writes `sequences/`, `specs/`, `manifest.csv`, `truth.csv`
/// (`sequence_id,t,intensity`), `truth_meta.csv` and, for presets with
/// events, `annotations.csv`. Seeds run from `--seed` to `--seed + count - 1`.
pub fn run(ctx: &mut Ctx, preset_name: &str, spec_path: Option<&Path>, count: u64) -> Result<()> {
    let base_spec = match spec_path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Some(SynthSpec::from_json(&text).with_context(|| format!("parsing {}", p.display()))?)
        }
        None => None,
    };
    let label = if base_spec.is_some() { "spec" } else { preset_name };
    let format = ctx.cfg.output_format;
    let seq_dir = ensure_dir(&ctx.out.join("sequences"))?;
    let spec_dir = ensure_dir(&ctx.out.join("specs"))?;
    let mut entries = Vec::new();
    let mut truth = String::from("sequence_id,t,intensity\n");
    let mut meta = String::from("sequence_id,t1,t2,moving,static,outliers\n");
    let mut annotations = String::from("sequence_id,au_id,ne_start,onset,apex,offset,ne_end\n");
    let mut any_events = false;
    for i in 0..count {
        let seed = ctx.seed.checked_add(i).context("seed overflow")?;
        let (spec, events) = match &base_spec {
            Some(s) => (SynthSpec { seed, ..s.clone() }, vec![]),
            None => preset(preset_name, seed)?,
        };
        let (seq, gt) = match generate(&spec) {
            Ok(v) => v,
            Err(e) => {
                ctx.log.push(&format!("synth_{seed}"), "synth", e);
                continue;
            }
        };
        let file = format!("{}.{}", stem(&seq.id), format.extension());
        save_sequence(&seq, seq_dir.join(&file), format)?;
        write_text(&spec_dir.join(format!("{}.json", stem(&seq.id))), &(spec.to_json() + "\n"))?;
        for (t, v) in gt.intensity.values.iter().enumerate() {
            truth.push_str(&format!("{},{t},{}\n", seq.id, f(*v)));
        }
        meta.push_str(&csv_row([
            seq.id.clone(),
            opt_usize(gt.t1),
            opt_usize(gt.t2),
            join(&gt.moving_set),
            join(&gt.static_set),
            join(&gt.outlier_set),
        ]));
        for ev in &events {
            any_events = true;
            annotations.push_str(&csv_row([
                seq.id.clone(),
                ev.au_id.clone(),
                ev.ne_start.to_string(),
                ev.onset.to_string(),
                ev.apex.to_string(),
                ev.offset.to_string(),
                ev.ne_end.to_string(),
            ]));
        }
        entries.push(ManifestEntry {
            sequence_id: seq.id.clone(),
            path: PathBuf::from("sequences").join(file),
            format,
            label: Some(label.to_string()),
            subject: None,
            nose_index: seq.nose_index,
        });
    }
    write_manifest(ctx.out.join("manifest.csv"), &entries)?;
    write_text(&ctx.out.join("truth.csv"), &truth)?;
    write_text(&ctx.out.join("truth_meta.csv"), &meta)?;
    if any_events {
        write_text(&ctx.out.join("annotations.csv"), &annotations)?;
    }
    Ok(())
}
