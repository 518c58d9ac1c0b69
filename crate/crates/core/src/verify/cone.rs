// SPDX-License-Identifier: Apache-2.0

//! Light-cone checks: leakage of states out of `X`, the single-ball map
//! bound, and the dual statement for observables.

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{
    default_restarts, default_states, default_times, model_digest, validate_sites, CheckOutcome, CheckReport,
    LeakageRow, ReportBuilder, INEQUALITY_TOL,
};
use crate::bounds::{
    assemble_partition_constant, ball_envelope, best_delta, check_disjoint, reference_width, velocity_c_mu,
    velocity_c_prime, ConeEnvelope, PartitionConstant,
};
use crate::error::Result;
use crate::evolve::{compress, s1_opnorm_lower, site_mask, trace_norm, CutEvolution, Stepper};
use crate::linalg::{c64, op_norm, trace, CMat};
use crate::liouvillian::{build_lindbladian, LinearMap};
use crate::model::LatticeModel;
use crate::sampling::{ginibre, haar_state_on, haar_unitary, projector, random_density, stream};

fn default_eps() -> f64 {
    0.2
}

/// Parameters shared by the leakage and dual-cone checks. `x` holds the
/// initial state (or the observable's read-out region for the dual check),
/// `y` is where leakage is measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeakageParams {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    /// Defaults to the grid point `ν = 0.6·a`, i.e. `μ = (1 − 5ε/2)·0.6·a`.
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default = "default_states")]
    pub states: usize,
}

impl LeakageParams {
    pub fn resolved_mu(&self, model: &LatticeModel) -> f64 {
        self.mu.unwrap_or((1.0 - 2.5 * self.eps) * 0.6 * reference_width(model))
    }
}

struct ConeSetup {
    env: ConeEnvelope,
    partition: PartitionConstant,
}

impl ConeSetup {
    fn new(model: &LatticeModel, p: &LeakageParams) -> Result<Self> {
        validate_sites(&p.x, model.n_sites(), "X")?;
        validate_sites(&p.y, model.n_sites(), "Y")?;
        check_disjoint(&p.x, &p.y)?;
        let env = velocity_c_mu(model, p.resolved_mu(model), p.eps)?;
        let partition = assemble_partition_constant(&p.x, &p.y, p.eps, env.nu)?;
        Ok(ConeSetup { env, partition })
    }

    fn bound(&self, t: f64) -> f64 {
        self.partition.leakage_bound(self.env.c_mu, t)
    }

    fn params(&self, model: &LatticeModel, p: &LeakageParams) -> serde_json::Value {
        json!({
            "model": model_digest(model),
            "n_sites": model.n_sites(),
            "x": p.x,
            "y": p.y,
            "mu": self.env.mu,
            "eps": self.env.eps,
            "nu": self.env.nu,
            "c_mu": self.env.c_mu,
            "c": self.env.c,
            "d_xy": self.partition.d_xy,
            "c_xy": self.partition.c_xy,
            "prefactor": self.partition.prefactor,
            "cone_prefactor": self.partition.cone_prefactor(self.env.mu),
            "times": p.times,
            "states": p.states,
        })
    }

    fn row(&self, t: f64, measured: f64) -> LeakageRow {
        let bound = self.bound(t);
        LeakageRow { t, d_xy: self.partition.d_xy, measured, bound, margin: bound - measured, vacuous: bound > 1.0 }
    }
}

/// Stepper for the undeformed semigroup on the given time grid.
pub fn lindblad_stepper(model: &LatticeModel, times: &[f64]) -> Result<Stepper> {
    Ok(Stepper::for_times(&build_lindbladian(model), times)?.0)
}

/// Leakage `Tr(χ_Y β_t(ρ))` of states `ρ` supported in `X`, compared with
/// `4 e^{2νεd} C_XY e^{2νc′(ν)t}`, the explicit form of `C e^{−2μ(d − ct)}`.
///
/// The states are Haar-random pure states on `span{X}` and mixtures of
/// consecutive pairs of them.
pub fn check_leakage_cone(model: &LatticeModel, p: &LeakageParams, seed: u64) -> Result<CheckOutcome> {
    ConeSetup::new(model, p)?;
    let stepper = lindblad_stepper(model, &p.times)?;
    check_leakage_cone_with(model, p, seed, &stepper)
}

/// [`check_leakage_cone`] reusing a stepper of the model's Lindbladian.
pub fn check_leakage_cone_with(
    model: &LatticeModel,
    p: &LeakageParams,
    seed: u64,
    stepper: &Stepper,
) -> Result<CheckOutcome> {
    let setup = ConeSetup::new(model, p)?;
    let counts = stepper.counts_for(&p.times)?;
    let d = model.n_sites();
    let n_pure = p.states.div_ceil(2).max(1);
    let pure: Vec<CMat> =
        (0..n_pure).map(|i| projector(&haar_state_on(&p.x, d, &mut stream(seed, i as u64)))).collect();
    let mut states: Vec<(String, CMat)> =
        pure.iter().enumerate().map(|(i, r)| (format!("pure{i}"), r.clone())).collect();
    for i in 0..p.states.saturating_sub(n_pure) {
        let (a, b) = (i % n_pure, (i + 1) % n_pure);
        states.push((format!("mix{a}-{b}"), (&pure[a] + &pure[b]) * c64(0.5, 0.0)));
    }
    let mut builder = ReportBuilder::new("leakage_cone", setup.params(model, p), seed, INEQUALITY_TOL);
    let mut rows = Vec::new();
    for (label, rho) in &states {
        let traj = stepper.trajectory(rho, &counts)?;
        for (&t, rho_t) in p.times.iter().zip(&traj) {
            let measured: f64 = p.y.iter().map(|&y| rho_t[(y, y)].re).sum();
            let row = setup.row(t, measured);
            builder.record(&json!({"state": label, "t": t}), measured, row.bound, row.vacuous);
            rows.push(row);
        }
    }
    rows.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(CheckOutcome { report: builder.finish(), leakage: rows })
}

/// Dual cone: `‖χ_X β′_t(χ_Y A χ_Y) χ_X‖` over unit-norm observables `A`
/// against the leakage envelope.
///
/// The map is completely positive, so its norm is attained at `A = 1`,
/// which is always sampled; the remaining samples are Haar unitaries. Each
/// time also carries duality samples `|Tr(β′_t(A)ρ) − Tr(Aβ_t(ρ))|`
/// against `1e−10·‖A‖·‖ρ‖₁`.
pub fn check_dual_cone(model: &LatticeModel, p: &LeakageParams, seed: u64) -> Result<CheckOutcome> {
    ConeSetup::new(model, p)?;
    let stepper = lindblad_stepper(model, &p.times)?;
    check_dual_cone_with(model, p, seed, &stepper)
}

pub fn check_dual_cone_with(
    model: &LatticeModel,
    p: &LeakageParams,
    seed: u64,
    stepper: &Stepper,
) -> Result<CheckOutcome> {
    let setup = ConeSetup::new(model, p)?;
    let counts = stepper.counts_for(&p.times)?;
    let d = model.n_sites();
    let (xm, ym) = (site_mask(&p.x, d), site_mask(&p.y, d));
    let mut observables = vec![("identity".to_string(), CMat::identity(d, d))];
    for i in 1..p.states.max(1) {
        observables.push((format!("unitary{i}"), haar_unitary(d, &mut stream(seed, i as u64))));
    }
    let mut builder = ReportBuilder::new("dual_cone", setup.params(model, p), seed, INEQUALITY_TOL);
    let mut rows = Vec::new();
    let e = stepper.exponential();
    for (label, a) in &observables {
        let mut obs = compress(a, &ym);
        let mut at = 0;
        for (&t, &k) in p.times.iter().zip(&counts) {
            for _ in at..k {
                obs = e.apply_dual(&obs);
            }
            at = k;
            let measured = op_norm(&compress(&obs, &xm));
            let row = setup.row(t, measured);
            builder.record(&json!({"observable": label, "t": t}), measured, row.bound, row.vacuous);
            rows.push(row);
        }
    }
    // duality cross-check on random pairs
    for (i, &k) in counts.iter().enumerate() {
        let mut rng = stream(seed ^ 0xd0a1, i as u64);
        let a = ginibre(d, d, &mut rng);
        let rho = random_density(d, 1 + i % d, &mut rng);
        let map = CutEvolution { step: e, power: k, before: None, after: None };
        let lhs = trace(&(map.apply_dual(&a) * &rho));
        let rhs = trace(&(&a * map.apply(&rho)));
        let scale = op_norm(&a) * trace_norm(&rho);
        builder.record(&json!({"duality": i, "t": p.times[i]}), (lhs - rhs).norm(), 1e-10 * scale, false);
    }
    rows.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(CheckOutcome { report: builder.finish(), leakage: rows })
}

/// Parameters of [`check_ball_bound`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallParams {
    pub u: Vec<usize>,
    pub v: Vec<usize>,
    pub nu: f64,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
}

/// `‖χ_U β_t(χ_V · χ_V) χ_U‖₁^op` (rank-one lower bound) against
/// `4 e^{−2νδ_UV + 2νc′t}`, with the better of the two directions for
/// `δ_UV`. Samples whose bound exceeds 4 are flagged vacuous.
pub fn check_ball_bound(model: &LatticeModel, p: &BallParams, seed: u64) -> Result<CheckReport> {
    let d = model.n_sites();
    validate_sites(&p.u, d, "U")?;
    validate_sites(&p.v, d, "V")?;
    check_disjoint(&p.u, &p.v)?;
    let vb = velocity_c_prime(model, p.nu)?;
    let geom = best_delta(&p.u, &p.v)?;
    let stepper = lindblad_stepper(model, &p.times)?;
    let counts = stepper.counts_for(&p.times)?;
    let params = json!({
        "model": model_digest(model),
        "n_sites": d,
        "u": p.u,
        "v": p.v,
        "nu": p.nu,
        "c_prime": vb.c_prime,
        "delta": geom.delta,
        "direction": geom.b,
        "times": p.times,
        "restarts": p.restarts,
    });
    let mut builder = ReportBuilder::new("ball_bound", params, seed, INEQUALITY_TOL);
    for (&t, &k) in p.times.iter().zip(&counts) {
        let map = CutEvolution {
            step: stepper.exponential(),
            power: k,
            before: Some(site_mask(&p.v, d)),
            after: Some(site_mask(&p.u, d)),
        };
        let measured = s1_opnorm_lower(&map, p.restarts, seed)?.value;
        let bound = ball_envelope(geom.delta as f64, p.nu, vb.c_prime, t);
        builder.record(&json!({"t": t}), measured, bound, bound > 4.0);
    }
    Ok(builder.finish())
}
