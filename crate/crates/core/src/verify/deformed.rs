// SPDX-License-Identifier: Apache-2.0

//! Checks on the deformed semigroups `β_{t,ζ,ζ̃} = e^{L_{ζ,ζ̃}t}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{
    default_restarts, default_times, model_digest, validate_sites, CheckReport, ReportBuilder, INEQUALITY_TOL,
};
use crate::bounds::velocity_c_prime;
use crate::error::{Error, Result};
use crate::evolve::{compress, exp_superoperator, s1_opnorm_lower, site_mask, trace_norm, Stepper};
use crate::linalg::{c64, eigvalsh, hermitian_part, max_abs, op_norm, trace, CMat};
use crate::liouvillian::{
    build_deformed_generator, build_gtilde, build_lindbladian, deformed_generator_imag, deformed_parts, weight_map,
    LinearMap, Superoperator,
};
use crate::model::{build_hamiltonian, deform_matrix, imag_part, Boundary, LatticeModel};
use crate::sampling::{ginibre, haar_state_on, projector, random_density, stream};

fn default_positive_states() -> usize {
    32
}

fn overflow_guard(value: f64, t: f64, l: &Superoperator) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow { t, generator: l.provenance().to_string() })
    }
}

/// Parameters of [`check_deformed_growth`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthParams {
    pub nu: f64,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_positive_states")]
    pub states: usize,
}

/// Growth of `β_{t,iη,−iη}` for `η = ±ν`.
///
/// Two kinds of sample per `(η, t)`: the rank-one lower bound on
/// `‖β_{t,iη,−iη}‖₁^op` against `4e^{2νc′(ν)t}`, and `‖β(ρ)‖₁/‖ρ‖₁` for
/// random positive `ρ` against the sharper `e^{2νc′(ν)t}`.
pub fn check_deformed_growth(model: &LatticeModel, p: &GrowthParams, seed: u64) -> Result<CheckReport> {
    let vb = velocity_c_prime(model, p.nu)?;
    let d = model.n_sites();
    let params = json!({
        "model": model_digest(model),
        "n_sites": d,
        "nu": p.nu,
        "c_prime": vb.c_prime,
        "times": p.times,
        "restarts": p.restarts,
        "states": p.states,
    });
    let mut builder = ReportBuilder::new("deformed_growth", params, seed, INEQUALITY_TOL);
    let states: Vec<CMat> = (0..p.states).map(|s| random_density(d, 1 + s % 3, &mut stream(seed, s as u64))).collect();
    for eta in [p.nu, -p.nu] {
        let l = deformed_generator_imag(model, eta)?;
        let (stepper, counts) = Stepper::for_times(&l, &p.times)?;
        for (&t, &k) in p.times.iter().zip(&counts) {
            let est = s1_opnorm_lower(&stepper.power(k)?, p.restarts, seed)?;
            let measured = overflow_guard(est.value, t, &l)?;
            let bound = 4.0 * (vb.growth_rate() * t).exp();
            builder.record(&json!({"eta": eta, "t": t, "kind": "rank_one"}), measured, bound, false);
        }
        for (s, rho) in states.iter().enumerate() {
            let traj = stepper.trajectory(rho, &counts)?;
            for (&t, r) in p.times.iter().zip(&traj) {
                let measured = overflow_guard(trace_norm(r) / trace_norm(rho), t, &l)?;
                let bound = (vb.growth_rate() * t).exp();
                builder.record(&json!({"eta": eta, "t": t, "state": s}), measured, bound, false);
            }
        }
    }
    Ok(builder.finish())
}

/// Parameters of [`check_deformed_positivity`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositivityParams {
    pub nu: f64,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default = "default_positive_states")]
    pub states: usize,
}

/// `β_{t,iη,−iη}` maps positive operators to positive operators.
///
/// Samples are `−λ_min(β(ρ))/‖β(ρ)‖₁` against `0` for `η = ±ν`, with `ρ`
/// cycling through `1/d`, a pure state localized mid-chain, and random
/// densities of rank one to three. `ν = 0` checks the undeformed semigroup.
pub fn check_deformed_positivity(model: &LatticeModel, p: &PositivityParams, seed: u64) -> Result<CheckReport> {
    let d = model.n_sites();
    let params = json!({
        "model": model_digest(model),
        "n_sites": d,
        "nu": p.nu,
        "times": p.times,
        "states": p.states,
    });
    let mid: Vec<usize> = (d.saturating_sub(1) / 2..(d / 2 + 2).min(d)).collect();
    let states: Vec<CMat> = (0..p.states)
        .map(|s| {
            let mut rng = stream(seed, s as u64);
            match s % 4 {
                0 => CMat::identity(d, d) / c64(d as f64, 0.0),
                1 => projector(&haar_state_on(&mid, d, &mut rng)),
                r => random_density(d, r - 1, &mut rng),
            }
        })
        .collect();
    let mut builder = ReportBuilder::new("deformed_positivity", params, seed, INEQUALITY_TOL);
    let etas: &[f64] = if p.nu == 0.0 { &[0.0] } else { &[p.nu, -p.nu] };
    for &eta in etas {
        let l = deformed_generator_imag(model, eta)?;
        let (stepper, counts) = Stepper::for_times(&l, &p.times)?;
        for (s, rho) in states.iter().enumerate() {
            let traj = stepper.trajectory(rho, &counts)?;
            for (&t, r) in p.times.iter().zip(&traj) {
                let norm = overflow_guard(trace_norm(r), t, &l)?;
                let lowest = eigvalsh(&hermitian_part(r))[0];
                builder.record(&json!({"eta": eta, "t": t, "state": s}), -lowest / norm, 0.0, false);
            }
        }
    }
    Ok(builder.finish())
}

/// Parameters of [`check_contraction_and_growth`]: `ζ = i·zeta_im`,
/// `ζ̃ = i·zeta_tilde_im`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractionParams {
    pub zeta_im: f64,
    pub zeta_tilde_im: f64,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
}

/// `‖e^{Lt}‖₁^op ≤ 4` and
/// `‖e^{L_{ζ,ζ̃}t}‖₁^op ≤ e^{4t(‖G_{ζ,ζ̃}‖ + ‖Im H_ζ‖ + ‖Im H_ζ̃‖)}`.
///
/// `‖G_{ζ,ζ̃}‖₁^op` enters through its rank-one lower estimate, which can
/// only make the bound smaller.
pub fn check_contraction_and_growth(model: &LatticeModel, p: &ContractionParams, seed: u64) -> Result<CheckReport> {
    let z = model.deformation(c64(0.0, p.zeta_im))?;
    let zt = model.deformation(c64(0.0, p.zeta_tilde_im))?;
    let h = build_hamiltonian(model);
    let im_h = |zeta: Complex64| op_norm(imag_part(&deform_matrix(&h, zeta, model.boundary())).matrix());
    let (im_z, im_zt) = (im_h(z.zeta()), im_h(zt.zeta()));
    let (_, g) = deformed_parts(model, &z, &zt);
    let g_norm = s1_opnorm_lower(&g, p.restarts, seed)?.value;
    let rate = 4.0 * (g_norm + im_z + im_zt);
    let params = json!({
        "model": model_digest(model),
        "n_sites": model.n_sites(),
        "zeta_im": p.zeta_im,
        "zeta_tilde_im": p.zeta_tilde_im,
        "g_norm_lower": g_norm,
        "im_h_zeta": im_z,
        "im_h_zeta_tilde": im_zt,
        "times": p.times,
        "restarts": p.restarts,
    });
    let mut builder = ReportBuilder::new("contraction_and_growth", params, seed, INEQUALITY_TOL);
    let plain = build_lindbladian(model);
    let deformed = build_deformed_generator(model, &z, &zt)?;
    for (kind, l) in [("lindblad", &plain), ("deformed", &deformed)] {
        let (stepper, counts) = Stepper::for_times(l, &p.times)?;
        for (&t, &k) in p.times.iter().zip(&counts) {
            let measured = overflow_guard(s1_opnorm_lower(&stepper.power(k)?, p.restarts, seed)?.value, t, l)?;
            let bound = if kind == "lindblad" { 4.0 } else { (rate * t).exp() };
            builder.record(&json!({"kind": kind, "t": t}), measured, bound, false);
        }
    }
    Ok(builder.finish())
}

fn default_t() -> f64 {
    0.5
}

fn default_radius() -> f64 {
    0.05
}

fn default_circle_samples() -> usize {
    8
}

fn default_key_im() -> f64 {
    0.3
}

fn default_key_states() -> usize {
    4
}

/// Parameters of [`check_analyticity`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticityParams {
    #[serde(default = "default_t")]
    pub t: f64,
    #[serde(default)]
    pub zeta0_re: f64,
    #[serde(default)]
    pub zeta0_im: f64,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_circle_samples")]
    pub samples: usize,
    /// Imaginary deformation for the key relation; the real one uses the
    /// same magnitude.
    #[serde(default = "default_key_im")]
    pub key_zeta_im: f64,
    /// Defaults to the first third of the chain.
    #[serde(default)]
    pub u: Option<Vec<usize>>,
    /// Defaults to the last third of the chain.
    #[serde(default)]
    pub v: Option<Vec<usize>>,
    #[serde(default = "default_key_states")]
    pub states: usize,
}

impl Default for AnalyticityParams {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

const MEAN_VALUE_TOL: f64 = 1e-6;
const KEY_TOL_IMAG: f64 = 1e-8;
const KEY_TOL_REAL: f64 = 1e-12;

fn relative_error(a: &CMat, b: &CMat, scale: f64) -> f64 {
    max_abs(&(a - b)) / scale.max(f64::MIN_POSITIVE)
}

/// Analyticity probes for `ζ ↦ e^{L_{ζ,−ζ}t}`.
///
/// Mean-value test: the average over `samples` equispaced points of the
/// circle `|ζ − ζ₀| = radius` reproduces the value at `ζ₀`, entrywise,
/// within `1e−6` relative to its largest entry.
///
/// Key relation: `χ_U β_t(χ_V λ χ_V) χ_U = χ_U T_{−ζ,ζ} β_{t,ζ,−ζ}
/// T_{ζ,−ζ}(χ_V λ χ_V) χ_U` for random `λ`, relative to the largest entry
/// of `χ_V λ χ_V`; within `1e−8` at `ζ = iη` and `1e−12` at real `ζ = η`.
/// On periodic chains the deformation is not a conjugation, so the relation
/// is skipped and the params say so.
///
/// Every sample is an equality check with zero tolerance.
pub fn check_analyticity(model: &LatticeModel, p: &AnalyticityParams, seed: u64) -> Result<CheckReport> {
    if !(0.0..=0.1).contains(&p.radius) {
        return Err(Error::InvalidParameter(format!("radius must lie in [0, 0.1], got {}", p.radius)));
    }
    if p.samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    let d = model.n_sites();
    let z0 = c64(p.zeta0_re, p.zeta0_im);
    for im in [p.zeta0_im - p.radius, p.zeta0_im + p.radius] {
        model.deformation(c64(p.zeta0_re, im))?;
    }
    let u = p.u.clone().unwrap_or_else(|| (0..d / 3).collect());
    let v = p.v.clone().unwrap_or_else(|| (d - d / 3..d).collect());
    let key = model.boundary() == Boundary::Open;
    let mut params = json!({
        "model": model_digest(model),
        "n_sites": d,
        "t": p.t,
        "zeta0": [p.zeta0_re, p.zeta0_im],
        "radius": p.radius,
        "samples": p.samples,
        "key_zeta_im": p.key_zeta_im,
        "u": u,
        "v": v,
        "states": p.states,
    });
    if !key {
        params["key_relation"] = json!("skipped: periodic boundary");
    }
    let mut builder = ReportBuilder::new("analyticity", params, seed, 0.0);

    let group = |zeta: Complex64| -> Result<CMat> {
        let z = model.deformation(zeta)?;
        let zt = model.deformation(-zeta)?;
        Ok(exp_superoperator(&build_deformed_generator(model, &z, &zt)?, p.t)?.into_matrix())
    };
    let center = group(z0)?;
    let mut avg = CMat::zeros(center.nrows(), center.ncols());
    for k in 0..p.samples {
        let phase = 2.0 * std::f64::consts::PI * k as f64 / p.samples as f64;
        avg += group(z0 + Complex64::from_polar(p.radius, phase))?;
    }
    avg /= c64(p.samples as f64, 0.0);
    let err = relative_error(&avg, &center, max_abs(&center));
    builder.record(&json!({"probe": "mean_value"}), err, MEAN_VALUE_TOL, false);

    if key {
        validate_sites(&u, d, "U")?;
        validate_sites(&v, d, "V")?;
        let (um, vm) = (site_mask(&u, d), site_mask(&v, d));
        let plain = exp_superoperator(&build_lindbladian(model), p.t)?;
        for (label, zeta, tol) in
            [("imaginary", c64(0.0, p.key_zeta_im), KEY_TOL_IMAG), ("real", c64(p.key_zeta_im, 0.0), KEY_TOL_REAL)]
        {
            let z = model.deformation(zeta)?;
            let zt = model.deformation(-zeta)?;
            let deformed = exp_superoperator(&build_deformed_generator(model, &z, &zt)?, p.t)?;
            let into = weight_map(d, zeta, -zeta);
            let back = weight_map(d, -zeta, zeta);
            for s in 0..p.states {
                let lambda = compress(&ginibre(d, d, &mut stream(seed, s as u64)), &vm);
                let lhs = compress(&plain.apply(&lambda), &um);
                let rhs = compress(&back.apply(&deformed.apply(&into.apply(&lambda))), &um);
                let err = relative_error(&lhs, &rhs, max_abs(&lambda));
                builder.record(&json!({"probe": "key_relation", "zeta": label, "state": s}), err, tol, false);
            }
        }
    }
    Ok(builder.finish())
}

fn default_identity_states() -> usize {
    20
}

/// Parameters of [`check_trace_identity`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceIdentityParams {
    pub eta: f64,
    #[serde(default = "default_identity_states")]
    pub states: usize,
}

const TRACE_IDENTITY_TOL: f64 = 1e-10;

/// `Tr(G_{iη,−iη}(ρ)) = 2 Tr(G̃_{iη} ρ)` on random densities.
///
/// Samples compare `|Tr(G(ρ)) − 2Tr(G̃ρ)|` with `1e−10·max(1, |Tr G(ρ)|)`.
/// The params carry the factor and the least-squares ratio
/// `Tr(G(ρ))/Tr(G̃ρ)` over the samples (null when `G̃` vanishes).
pub fn check_trace_identity(model: &LatticeModel, p: &TraceIdentityParams, seed: u64) -> Result<CheckReport> {
    let d = model.n_sites();
    let z = model.deformation(c64(0.0, p.eta))?;
    let zt = model.deformation(c64(0.0, -p.eta))?;
    let (_, g) = deformed_parts(model, &z, &zt);
    let gtilde = build_gtilde(model, &z)?;
    let mut pairs = Vec::with_capacity(p.states);
    for s in 0..p.states {
        let rho = random_density(d, 1 + s % 3, &mut stream(seed, s as u64));
        let lhs = trace(&g.apply(&rho));
        let rhs = trace(&(gtilde.matrix() * &rho));
        pairs.push((s, lhs, rhs));
    }
    let (num, den) = pairs.iter().fold((0.0, 0.0), |(n, dd), (_, l, r)| (n + (l * r.conj()).re, dd + r.norm_sqr()));
    let ratio = if den > 0.0 { json!(num / den) } else { serde_json::Value::Null };
    let params = json!({
        "model": model_digest(model),
        "n_sites": d,
        "eta": p.eta,
        "states": p.states,
        "factor": 2.0,
        "fitted_ratio": ratio,
    });
    let mut builder = ReportBuilder::new("trace_identity", params, seed, 0.0);
    for (s, lhs, rhs) in pairs {
        let scale = lhs.norm().max(1.0);
        builder.record(&json!({"state": s}), (lhs - rhs * 2.0).norm(), TRACE_IDENTITY_TOL * scale, false);
    }
    Ok(builder.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::catalog;

    #[test]
    fn growth_at_time_zero_is_one() {
        let m = catalog::hopping_chain(7, 0.5);
        let p = GrowthParams { nu: 0.4, times: vec![0.0, 1.0], restarts: 4, states: 4 };
        let r = check_deformed_growth(&m, &p, 1).unwrap();
        assert!(r.passed(), "{:?}", r.worst_failure());
        let ones = r.samples.iter().filter(|s| (s.measured - 1.0).abs() < 1e-9).count();
        assert!(ones >= 2 + 8);
    }

    #[test]
    fn free_chain_example_bound() {
        let m = catalog::periodic_free_chain(64);
        let vb = velocity_c_prime(&m, 0.5).unwrap();
        let bound = 4.0 * (vb.growth_rate() * 2.0).exp();
        assert!((bound / 4.0 - (2.0f64 * 0.5 * 2.084381 * 2.0).exp()).abs() < 1e-4);
    }

    #[test]
    fn positivity_includes_undeformed_case() {
        let m = catalog::dephasing_chain(7, 0.5);
        let p = PositivityParams { nu: 0.0, times: vec![0.5, 1.0], states: 8 };
        let r = check_deformed_positivity(&m, &p, 4).unwrap();
        assert!(r.passed());
        assert_eq!(r.samples.len(), 16);
    }

    #[test]
    fn deformed_positivity_on_periodic_chain() {
        let m = catalog::periodic_free_chain(8);
        let p = PositivityParams { nu: 0.4, times: vec![1.0, 2.0], states: 8 };
        assert!(check_deformed_positivity(&m, &p, 4).unwrap().passed());
    }

    #[test]
    fn contraction_at_zero_deformation() {
        let m = catalog::hopping_chain(6, 0.5);
        let p = ContractionParams { zeta_im: 0.0, zeta_tilde_im: 0.0, times: vec![0.0, 1.0], restarts: 4 };
        let r = check_contraction_and_growth(&m, &p, 3).unwrap();
        assert!(r.passed(), "{:?}", r.worst_failure());
        // trace preserving and completely positive, so the norm is one
        assert!(r.samples.iter().all(|s| (s.measured - 1.0).abs() < 1e-6));
    }

    #[test]
    fn contraction_with_opposite_deformations() {
        let m = catalog::hopping_chain(6, 0.5);
        let p = ContractionParams { zeta_im: 0.3, zeta_tilde_im: -0.3, times: vec![1.0], restarts: 4 };
        assert!(check_contraction_and_growth(&m, &p, 3).unwrap().passed());
    }

    #[test]
    fn analyticity_radius_zero_is_exact() {
        let m = catalog::free_chain(6);
        let p = AnalyticityParams { radius: 0.0, ..Default::default() };
        let r = check_analyticity(&m, &p, 0).unwrap();
        assert!(r.passed(), "{:?}", r.worst_failure());
        assert!(r.samples.iter().any(|s| s.measured < 1e-14));
    }

    #[test]
    fn analyticity_default_probe() {
        let m = catalog::dephasing_chain(8, 0.5);
        let r = check_analyticity(&m, &AnalyticityParams::default(), 2).unwrap();
        assert!(r.passed(), "{:?}", r.worst_failure());
        assert_eq!(r.samples.len(), 1 + 2 * 4);
    }

    #[test]
    fn analyticity_skips_key_relation_when_periodic() {
        let m = catalog::periodic_free_chain(6);
        let r = check_analyticity(&m, &AnalyticityParams::default(), 2).unwrap();
        assert_eq!(r.samples.len(), 1);
        assert_eq!(r.params["key_relation"], "skipped: periodic boundary");
    }

    #[test]
    fn trace_identity_factor_two() {
        let m = catalog::hopping_chain(6, 1.0);
        let r = check_trace_identity(&m, &TraceIdentityParams { eta: 0.4, states: 6 }, 5).unwrap();
        assert!(r.passed(), "{:?}", r.worst_failure());
        assert!((r.params["fitted_ratio"].as_f64().unwrap() - 2.0).abs() < 1e-10);
        let dephasing = catalog::dephasing_chain(6, 1.0);
        let r = check_trace_identity(&dephasing, &TraceIdentityParams { eta: 0.4, states: 3 }, 5).unwrap();
        assert!(r.passed());
        assert!(r.params["fitted_ratio"].is_null());
    }
}
