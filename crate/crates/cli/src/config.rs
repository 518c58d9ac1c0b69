// SPDX-License-Identifier: Apache-2.0

//! Experiment configuration files.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lightcone::model::{catalog, LatticeModel, ModelDescription};
use lightcone::verify::CheckSpec;
use serde::Deserialize;

/// Where the model comes from: inline, a model file relative to the config,
/// or a catalog entry.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSource {
    Inline(ModelDescription),
    Path(PathBuf),
    Catalog(CatalogEntry),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatalogName {
    Free,
    PeriodicFree,
    Dephasing,
    Hop,
    Disordered,
}

fn default_rate() -> f64 {
    0.5
}

fn default_width() -> f64 {
    2.0
}

fn default_disorder_seed() -> u64 {
    7
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogEntry {
    pub name: CatalogName,
    pub n_sites: usize,
    /// Dephasing or hop rate γ.
    #[serde(default = "default_rate")]
    pub rate: f64,
    /// Disorder width.
    #[serde(default = "default_width")]
    pub width: f64,
    #[serde(default = "default_disorder_seed")]
    pub seed: u64,
}

impl CatalogEntry {
    fn build(&self) -> Result<LatticeModel> {
        if self.n_sites == 0 {
            bail!("model.catalog.n_sites must be positive");
        }
        if !(self.rate.is_finite() && self.rate >= 0.0) {
            bail!("model.catalog.rate must be finite and non-negative, got {}", self.rate);
        }
        if !(self.width.is_finite() && self.width >= 0.0) {
            bail!("model.catalog.width must be finite and non-negative, got {}", self.width);
        }
        let n = self.n_sites;
        Ok(match self.name {
            CatalogName::Free => catalog::free_chain(n),
            CatalogName::PeriodicFree => catalog::periodic_free_chain(n),
            CatalogName::Dephasing => catalog::dephasing_chain(n, self.rate),
            CatalogName::Hop => catalog::hopping_chain(n, self.rate),
            CatalogName::Disordered => catalog::disordered_chain(n, self.width, self.seed),
        })
    }
}

fn default_eps() -> f64 {
    0.2
}

/// The JSON experiment file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSource,
    #[serde(default)]
    pub seed: u64,
    /// `ν` values of the bounds table; the default grid when both grids are absent.
    #[serde(default)]
    pub nu_grid: Option<Vec<f64>>,
    /// `μ` values, converted with `ν = μ/(1 − 5ε/2)`.
    #[serde(default)]
    pub mu_grid: Option<Vec<f64>>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Times given to every suite item that takes times and omits them.
    #[serde(default)]
    pub times: Option<Vec<f64>>,
    #[serde(default)]
    pub suite: Vec<CheckSpec>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

/// A loaded, validated experiment.
#[derive(Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub model: LatticeModel,
    /// `ν` rows of the bounds table, in file order.
    pub nu_rows: Vec<f64>,
    /// Directory holding the config file.
    pub base_dir: PathBuf,
}

fn takes_times(check: &str) -> bool {
    matches!(
        check,
        "leakage_cone"
            | "check_leakage_cone"
            | "dual_cone"
            | "check_dual_cone"
            | "ball_bound"
            | "check_ball_bound"
            | "deformed_growth"
            | "check_deformed_growth"
            | "deformed_positivity"
            | "check_deformed_positivity"
            | "contraction_and_growth"
            | "check_contraction_and_growth"
    )
}

/// Parses the config text. Errors name the offending field together with
/// its line and column.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        anyhow::anyhow!(
            "malformed config at field `{path}` (line {}, column {}): {inner}",
            inner.line(),
            inner.column()
        )
    })?;
    if let Some(times) = &config.times {
        check_times(times, "times")?;
        let mut raw: serde_json::Value = serde_json::from_str(text)?;
        let mut touched = false;
        if let Some(items) = raw.get_mut("suite").and_then(|s| s.as_array_mut()) {
            for item in items {
                let check = item.get("check").and_then(|c| c.as_str()).unwrap_or_default();
                if !takes_times(check) {
                    continue;
                }
                if let Some(params) = item.get_mut("params").and_then(|p| p.as_object_mut()) {
                    if !params.contains_key("times") {
                        params.insert("times".into(), serde_json::to_value(times)?);
                        touched = true;
                    }
                }
            }
        }
        if touched {
            config.suite = serde_json::from_value(raw["suite"].take()).context("applying top-level times")?;
        }
    }
    Ok(config)
}

fn check_times(times: &[f64], name: &str) -> Result<()> {
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.windows(2).any(|w| w[1] <= w[0]) {
        bail!("{name} must be non-negative and strictly ascending, got {times:?}");
    }
    Ok(())
}

fn check_grid(values: &[f64], name: &str, to_nu: impl Fn(f64) -> f64, a: f64) -> Result<()> {
    for (i, &v) in values.iter().enumerate() {
        let nu = to_nu(v);
        if !(nu > 0.0 && nu < a) {
            let width = if a.is_finite() { format!("{a}") } else { "inf (finite range)".into() };
            bail!("{name}[{i}] = {v} gives ν = {nu}, outside the strip constraint 0 < ν < a = {width}");
        }
    }
    Ok(())
}

impl ExperimentConfig {
    fn load_model(&self, base_dir: &Path) -> Result<LatticeModel> {
        match &self.model {
            ModelSource::Inline(desc) => LatticeModel::new(desc.clone()).context("invalid inline model"),
            ModelSource::Path(p) => {
                let path = base_dir.join(p);
                LatticeModel::from_path(&path).with_context(|| format!("invalid model file {}", path.display()))
            }
            ModelSource::Catalog(entry) => entry.build(),
        }
    }
}

/// Reads, parses and validates a config file.
pub fn load(path: &Path) -> Result<Experiment> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    let config = parse_config(&text).with_context(|| format!("in {}", path.display()))?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let model = config.load_model(&base_dir)?;
    let a = model.decay_rate();
    if !(config.eps > 0.0 && config.eps < 0.4) {
        bail!("eps = {} must lie in (0, 0.4)", config.eps);
    }
    let scale = 1.0 - 2.5 * config.eps;
    let mut nu_rows = Vec::new();
    if let Some(grid) = &config.nu_grid {
        check_grid(grid, "nu_grid", |v| v, a)?;
        nu_rows.extend(grid);
    }
    if let Some(grid) = &config.mu_grid {
        check_grid(grid, "mu_grid", |v| v / scale, a)?;
        nu_rows.extend(grid.iter().map(|mu| mu / scale));
    }
    if config.nu_grid.is_none() && config.mu_grid.is_none() {
        nu_rows = lightcone::bounds::default_nu_grid(&model);
    }
    Ok(Experiment { config, model, nu_rows, base_dir })
}
