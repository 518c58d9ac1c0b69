// SPDX-License-Identifier: Apache-2.0

//! Executable certificates. Each checker compares measured quantities with
//! the corresponding bound and returns a [`CheckReport`].
//!
//! Inequality checks use the tolerance `1e−9·max(1, bound)`; equality checks
//! record a relative error against a fixed threshold with zero tolerance.

mod cone;
mod deformed;
mod maps;
mod report;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LatticeModel;

pub use cone::{
    check_ball_bound, check_dual_cone, check_dual_cone_with, check_leakage_cone, check_leakage_cone_with, BallParams,
    LeakageParams,
};
pub use deformed::{
    check_analyticity, check_contraction_and_growth, check_deformed_growth, check_deformed_positivity,
    check_trace_identity, AnalyticityParams, ContractionParams, GrowthParams, PositivityParams, TraceIdentityParams,
};
pub use maps::{check_cs_trace, check_subcp, CsTraceParams, SubcpParams};
pub use report::{digest_of, CheckReport, ReportBuilder, Sample, Verdict};

/// Tolerance factor for inequality checks.
pub const INEQUALITY_TOL: f64 = 1e-9;

/// One row of a leakage CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeakageRow {
    pub t: f64,
    pub d_xy: usize,
    pub measured: f64,
    pub bound: f64,
    pub margin: f64,
    pub vacuous: bool,
}

/// A report plus, for cone checks, the per-time leakage rows.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub report: CheckReport,
    pub leakage: Vec<LeakageRow>,
}

impl From<CheckReport> for CheckOutcome {
    fn from(report: CheckReport) -> Self {
        CheckOutcome { report, leakage: Vec::new() }
    }
}

/// A named check with its parameters, as listed in an experiment suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", content = "params", rename_all = "snake_case")]
pub enum CheckSpec {
    #[serde(alias = "check_leakage_cone")]
    LeakageCone(LeakageParams),
    #[serde(alias = "check_ball_bound")]
    BallBound(BallParams),
    #[serde(alias = "check_deformed_growth")]
    DeformedGrowth(GrowthParams),
    #[serde(alias = "check_deformed_positivity")]
    DeformedPositivity(PositivityParams),
    #[serde(alias = "check_subcp")]
    Subcp(SubcpParams),
    #[serde(alias = "check_cs_trace")]
    CsTrace(CsTraceParams),
    #[serde(alias = "check_contraction_and_growth")]
    ContractionAndGrowth(ContractionParams),
    #[serde(alias = "check_analyticity")]
    Analyticity(AnalyticityParams),
    #[serde(alias = "check_dual_cone")]
    DualCone(LeakageParams),
    #[serde(alias = "check_trace_identity")]
    TraceIdentity(TraceIdentityParams),
}

impl CheckSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CheckSpec::LeakageCone(_) => "leakage_cone",
            CheckSpec::BallBound(_) => "ball_bound",
            CheckSpec::DeformedGrowth(_) => "deformed_growth",
            CheckSpec::DeformedPositivity(_) => "deformed_positivity",
            CheckSpec::Subcp(_) => "subcp",
            CheckSpec::CsTrace(_) => "cs_trace",
            CheckSpec::ContractionAndGrowth(_) => "contraction_and_growth",
            CheckSpec::Analyticity(_) => "analyticity",
            CheckSpec::DualCone(_) => "dual_cone",
            CheckSpec::TraceIdentity(_) => "trace_identity",
        }
    }

    /// Whether the check reports leakage rows.
    pub fn is_cone(&self) -> bool {
        matches!(self, CheckSpec::LeakageCone(_) | CheckSpec::DualCone(_))
    }

    pub fn run(&self, model: &LatticeModel, seed: u64) -> Result<CheckOutcome> {
        match self {
            CheckSpec::LeakageCone(p) => check_leakage_cone(model, p, seed),
            CheckSpec::BallBound(p) => check_ball_bound(model, p, seed).map(Into::into),
            CheckSpec::DeformedGrowth(p) => check_deformed_growth(model, p, seed).map(Into::into),
            CheckSpec::DeformedPositivity(p) => check_deformed_positivity(model, p, seed).map(Into::into),
            CheckSpec::Subcp(p) => check_subcp(p, seed).map(Into::into),
            CheckSpec::CsTrace(p) => check_cs_trace(p, seed).map(Into::into),
            CheckSpec::ContractionAndGrowth(p) => check_contraction_and_growth(model, p, seed).map(Into::into),
            CheckSpec::Analyticity(p) => check_analyticity(model, p, seed).map(Into::into),
            CheckSpec::DualCone(p) => check_dual_cone(model, p, seed),
            CheckSpec::TraceIdentity(p) => check_trace_identity(model, p, seed).map(Into::into),
        }
    }
}

/// Short digest identifying a model description.
pub fn model_digest(model: &LatticeModel) -> String {
    digest_of(model.description())
}

pub(crate) fn validate_sites(sites: &[usize], n_sites: usize, name: &'static str) -> Result<()> {
    if sites.is_empty() {
        return Err(Error::EmptySet(name));
    }
    match sites.iter().find(|&&s| s >= n_sites) {
        Some(&site) => Err(Error::SiteOutOfRange { site, n_sites }),
        None => Ok(()),
    }
}

pub(crate) fn default_times() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}

pub(crate) fn default_restarts() -> usize {
    16
}

pub(crate) fn default_states() -> usize {
    16
}
