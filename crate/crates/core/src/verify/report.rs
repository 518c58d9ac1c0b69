// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// One measured-versus-bound comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// Hex prefix of the SHA-256 of the sample's inputs.
    pub digest: String,
    pub measured: f64,
    pub bound: f64,
    /// `bound − measured`.
    pub margin: f64,
    /// The bound exceeds the a priori limit of the measured quantity, so the
    /// comparison carries no information.
    pub vacuous: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Machine-readable outcome of a check.
///
/// A sample passes when `margin ≥ −tolerance · max(1, |bound|)`; the verdict
/// is pass iff every sample passes. Samples are sorted by digest so the
/// report does not depend on evaluation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub params: serde_json::Value,
    pub seed: u64,
    pub samples: Vec<Sample>,
    pub verdict: Verdict,
    pub tolerance: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn sample_passes(&self, s: &Sample) -> bool {
        s.margin >= -self.tolerance * s.bound.abs().max(1.0)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(move |s| !self.sample_passes(s))
    }

    /// Failing sample with the most negative margin, if any.
    pub fn worst_failure(&self) -> Option<&Sample> {
        self.failures().min_by(|a, b| a.margin.total_cmp(&b.margin))
    }

    /// Smallest margin over non-vacuous samples.
    pub fn min_margin(&self) -> Option<f64> {
        self.samples.iter().filter(|s| !s.vacuous).map(|s| s.margin).min_by(f64::total_cmp)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn digest_of<T: Serialize + ?Sized>(inputs: &T) -> String {
    let bytes = serde_json::to_vec(inputs).expect("sample inputs serialize");
    hex::encode(&Sha256::digest(&bytes)[..8])
}

/// Collects samples and settles the verdict.
#[derive(Debug)]
pub struct ReportBuilder {
    check: String,
    params: serde_json::Value,
    seed: u64,
    tolerance: f64,
    samples: Vec<Sample>,
}

impl ReportBuilder {
    pub fn new(check: &str, params: serde_json::Value, seed: u64, tolerance: f64) -> Self {
        ReportBuilder { check: check.to_string(), params, seed, tolerance, samples: Vec::new() }
    }

    pub fn params_mut(&mut self) -> &mut serde_json::Value {
        &mut self.params
    }

    pub fn record<T: Serialize + ?Sized>(&mut self, inputs: &T, measured: f64, bound: f64, vacuous: bool) -> Sample {
        let sample = Sample { digest: digest_of(inputs), measured, bound, margin: bound - measured, vacuous };
        self.samples.push(sample.clone());
        sample
    }

    pub fn finish(mut self) -> CheckReport {
        self.samples.sort_by(|a, b| a.digest.cmp(&b.digest).then(a.measured.total_cmp(&b.measured)));
        let mut report = CheckReport {
            check: self.check,
            params: self.params,
            seed: self.seed,
            samples: self.samples,
            verdict: Verdict::Pass,
            tolerance: self.tolerance,
        };
        let all_pass = report.samples.iter().all(|s| report.sample_passes(s));
        report.verdict = if all_pass { Verdict::Pass } else { Verdict::Fail };
        report
    }
}
