//! `key=value` run configuration shared by every subcommand.

use std::path::Path;

use anyhow::{bail, Context, Result};
use expression_response::align::{DEFAULT_SMOOTHING, DEFAULT_TEMPLATE_LEN, DEFAULT_TRANSITION_LEN};
use expression_response::analysis::{DEFAULT_K, DEFAULT_KEEP_FRACTION};
use expression_response::config::parse_kv;
use expression_response::metrics::ScaleMatch;
use expression_response::response::ResponseConfig;
use expression_response::seqdata::Format;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemplateMode {
    Parametric,
    /// Median of the batch's resampled final responses.
    Data,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    PerSequence,
    Concatenated,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub response: ResponseConfig,
    pub template: TemplateMode,
    pub template_len: usize,
    pub transition_len: usize,
    pub smoothing: usize,
    /// Transition window compared against the template, in template frames.
    pub window: usize,
    pub k: usize,
    pub keep_fraction: f64,
    pub scale: ScaleMatch,
    pub aggregation: Aggregation,
    /// Peak of the triangle truth built from `apex_frame` rows.
    pub peak_value: Option<f64>,
    /// Format of sequence files written by `align` and `synth`.
    pub output_format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            response: ResponseConfig::default(),
            template: TemplateMode::Parametric,
            template_len: DEFAULT_TEMPLATE_LEN,
            transition_len: DEFAULT_TRANSITION_LEN,
            smoothing: DEFAULT_SMOOTHING,
            window: DEFAULT_TRANSITION_LEN,
            k: DEFAULT_K,
            keep_fraction: DEFAULT_KEEP_FRACTION,
            scale: ScaleMatch::TruthMax,
            aggregation: Aggregation::PerSequence,
            peak_value: None,
            output_format: Format::LongCsv,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .ok()
        .with_context(|| format!("invalid value '{value}' for '{key}'"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_kv_str(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (k, v) in parse_kv(text)? {
            cfg.set(&k, &v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if self.response.set(key, value)? {
            return Ok(());
        }
        match key {
            "template" => {
                self.template = match value {
                    "parametric" => TemplateMode::Parametric,
                    "data" => TemplateMode::Data,
                    _ => bail!("template must be 'parametric' or 'data', got '{value}'"),
                }
            }
            "template_len" => self.template_len = num(key, value)?,
            "transition_len" => self.transition_len = num(key, value)?,
            "smoothing" => self.smoothing = num(key, value)?,
            "window" => self.window = num(key, value)?,
            "k" => self.k = num(key, value)?,
            "keep_fraction" => self.keep_fraction = num(key, value)?,
            "scale" => {
                self.scale = match value {
                    "truth_max" => ScaleMatch::TruthMax,
                    "none" => ScaleMatch::None,
                    v => ScaleMatch::Factor(num(key, v)?),
                }
            }
            "aggregation" => {
                self.aggregation = match value {
                    "per_sequence" => Aggregation::PerSequence,
                    "concatenated" => Aggregation::Concatenated,
                    _ => bail!("aggregation must be 'per_sequence' or 'concatenated', got '{value}'"),
                }
            }
            "peak_value" => self.peak_value = Some(num(key, value)?),
            "output_format" => self.output_format = value.parse()?,
            _ => bail!("unknown config key '{key}'"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.response.validate()?;
        if self.transition_len < 2 || self.template_len <= 2 * self.transition_len {
            bail!(
                "need transition_len >= 2 and template_len > 2 * transition_len, got {} and {}",
                self.transition_len,
                self.template_len
            );
        }
        if self.window == 0 || self.window > self.template_len {
            bail!("window must be in 1..={}, got {}", self.template_len, self.window);
        }
        if self.k == 0 {
            bail!("k must be >= 1");
        }
        if !(self.keep_fraction > 0.0 && self.keep_fraction <= 1.0) {
            bail!("keep_fraction must be in (0, 1], got {}", self.keep_fraction);
        }
        if let ScaleMatch::Factor(f) = self.scale {
            if !(f.is_finite() && f > 0.0) {
                bail!("scale factor must be positive, got {f}");
            }
        }
        if let Some(p) = self.peak_value {
            if !(p.is_finite() && p > 0.0) {
                bail!("peak_value must be positive, got {p}");
            }
        }
        Ok(())
    }
}
