use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

use super::Ctx;
use crate::output::{stem, write_text};
use crate::svg::{bar_chart, box_chart, line_chart};

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn read(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
        let header = rdr.headers()?.iter().map(str::to_string).collect();
        let rows = rdr
            .records()
            .map(|r| Ok(r?.iter().map(str::to_string).collect()))
            .collect::<Result<Vec<Vec<String>>>>()?;
        Ok(Self { header, rows })
    }

    fn is(&self, cols: &[&str]) -> bool {
        self.header.iter().map(String::as_str).eq(cols.iter().copied())
    }

    fn num(&self, c: usize) -> Result<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| {
                r[c].parse::<f64>()
                    .map_err(|_| anyhow!("column '{}' has non-numeric value '{}'", self.header[c], r[c]))
            })
            .collect()
    }

    fn text(&self, c: usize) -> Vec<String> {
        self.rows.iter().map(|r| r[c].clone()).collect()
    }
}

/// Picks a chart from the CSV header.
fn render(path: &Path) -> Result<String> {
    let t = Table::read(path)?;
    let title = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    if t.rows.is_empty() {
        bail!("no data rows");
    }
    let lines = |x: usize, cols: &[(usize, &'static str)], xl: &str| -> Result<String> {
        let series = cols
            .iter()
            .map(|&(c, n)| Ok((n, t.num(c)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(line_chart(&title, xl, &t.num(x)?, &series))
    };
    if t.is(&["t", "final", "final_norm", "approx"]) {
        lines(0, &[(2, "final_norm"), (3, "approx")], "frame")
    } else if t.is(&["t", "approx", "full", "thresholded", "pca"]) {
        lines(0, &[(1, "approx"), (2, "full"), (3, "thresholded"), (4, "pca")], "frame")
    } else if t.is(&["u", "proposed", "global_pca"]) {
        lines(0, &[(1, "proposed"), (2, "global_pca")], "template frame")
    } else if t.is(&["u", "template"]) {
        lines(0, &[(1, "template")], "template frame")
    } else if t.is(&["frame", "q05", "q25", "median", "q75", "q95"]) {
        let x = t.num(0)?;
        let q: Vec<Vec<f64>> = (1..6).map(|c| t.num(c)).collect::<Result<_>>()?;
        let rows: Vec<(f64, [f64; 5])> = (0..x.len())
            .map(|i| (x[i], [q[0][i], q[1][i], q[2][i], q[3][i], q[4][i]]))
            .collect();
        Ok(box_chart(&title, "template frame", &rows))
    } else if t.is(&["au_id", "mse_pca", "mse_full", "mse_thresholded"]) {
        let series = vec![("global_pca", t.num(1)?), ("full", t.num(2)?), ("thresholded", t.num(3)?)];
        Ok(bar_chart(&title, "action unit", &t.text(0), &series))
    } else if t.is(&["point", "weight", "distance", "flipped"]) {
        Ok(bar_chart(&title, "point", &t.text(0), &[("weight", t.num(1)?)]))
    } else if t.is(&["point", "weight", "thresholded_weight"]) {
        let series = vec![("weight", t.num(1)?), ("thresholded", t.num(2)?)];
        Ok(bar_chart(&title, "point", &t.text(0), &series))
    } else {
        bail!("unrecognized CSV schema '{}'", t.header.join(","))
    }
}

/// One `<stem>.svg` per input. Unreadable or unrecognized inputs and
/// clashing stems are logged.
pub fn run(ctx: &mut Ctx, inputs: &[PathBuf]) -> Result<()> {
    let mut seen = BTreeSet::new();
    let mut sorted: Vec<&PathBuf> = inputs.iter().collect();
    sorted.sort();
    sorted.dedup();
    for p in sorted {
        let id = p.display().to_string();
        let name = stem(&p.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned()));
        if !seen.insert(name.clone()) {
            ctx.log.push(&id, "plot", format!("another input already maps to {name}.svg"));
            continue;
        }
        match render(p) {
            Ok(svg) => write_text(&ctx.out.join(format!("{name}.svg")), &svg)?,
            Err(e) => ctx.log.push(&id, "plot", format!("{e:#}")),
        }
    }
    Ok(())
}
