// SPDX-License-Identifier: Apache-2.0

//! Inequalities for sub-completely positive maps and completely positive
//! maps, sampled on random finite-dimensional instances.

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{CheckReport, ReportBuilder};
use crate::error::{Error, Result};
use crate::evolve::trace_norm;
use crate::linalg::{c64, matmul, op_norm, trace, CMat};
use crate::sampling::{apply_kraus, ginibre, random_density, random_kraus, stream};

/// Tolerance of the map inequalities.
pub const MAP_TOL: f64 = 1e-10;

fn default_subcp_instances() -> usize {
    150
}

fn default_cs_instances() -> usize {
    100
}

fn default_dim_min() -> usize {
    2
}

fn default_subcp_dim_max() -> usize {
    6
}

fn default_cs_dim_max() -> usize {
    5
}

fn default_family_min() -> usize {
    1
}

fn default_family_max() -> usize {
    5
}

/// Parameters of [`check_subcp`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubcpParams {
    #[serde(default = "default_subcp_instances")]
    pub instances: usize,
    #[serde(default = "default_dim_min")]
    pub dim_min: usize,
    #[serde(default = "default_subcp_dim_max")]
    pub dim_max: usize,
    #[serde(default = "default_family_min")]
    pub family_min: usize,
    #[serde(default = "default_family_max")]
    pub family_max: usize,
}

impl Default for SubcpParams {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

fn check_range(lo: usize, hi: usize, what: &str) -> Result<()> {
    if lo == 0 || lo > hi {
        return Err(Error::InvalidParameter(format!(
            "{what} range [{lo}, {hi}] must be non-empty and start at 1 or more"
        )));
    }
    Ok(())
}

/// `ψ′_UV(A) = Σ_j V_j* A U_j`.
pub fn psi_prime(u: &[CMat], v: &[CMat], a: &CMat) -> CMat {
    let d = a.nrows();
    u.iter().zip(v).fold(CMat::zeros(d, d), |acc, (uj, vj)| acc + matmul(&matmul(&vj.adjoint(), a), uj))
}

/// `G′_UV(A) = ψ′_UV(A) − ½{ψ′_UV(1), A}`.
pub fn g_prime_uv(u: &[CMat], v: &[CMat], a: &CMat) -> CMat {
    let d = a.nrows();
    let one = psi_prime(u, v, &CMat::identity(d, d));
    psi_prime(u, v, a) - (matmul(&one, a) + matmul(a, &one)) * c64(0.5, 0.0)
}

/// `G_UV(ρ) = Σ_j (U_j ρ V_j* − ½{V_j* U_j, ρ})`, the predual of `G′_UV`.
pub fn g_uv(u: &[CMat], v: &[CMat], rho: &CMat) -> CMat {
    let d = rho.nrows();
    u.iter().zip(v).fold(CMat::zeros(d, d), |acc, (uj, vj)| {
        let vu = matmul(&vj.adjoint(), uj);
        acc + matmul(&matmul(uj, rho), &vj.adjoint()) - (matmul(&vu, rho) + matmul(rho, &vu)) * c64(0.5, 0.0)
    })
}

/// Random families `{U_j}`, `{V_j}` and operators `A`, `ρ`, checked against
///
/// - `‖G′_UV(A)‖ ≤ 3‖A‖ ‖ψ′_UU(1)‖^½ ‖ψ′_VV(1)‖^½`,
/// - `‖G_UV(ρ)‖₁ ≤ 3 ‖ψ′_UU(1)‖^½ ‖ψ′_VV(1)‖^½ ‖ρ‖₁`,
/// - `‖G′_UU(A)‖ ≤ 2‖ψ′_UU(1)‖ ‖A‖`.
///
/// Dimension and family size are drawn uniformly from the given ranges.
pub fn check_subcp(p: &SubcpParams, seed: u64) -> Result<CheckReport> {
    check_range(p.dim_min, p.dim_max, "dimension")?;
    check_range(p.family_min, p.family_max, "family size")?;
    let params = serde_json::to_value(p).expect("params serialize");
    let mut builder = ReportBuilder::new("subcp", params, seed, MAP_TOL);
    for i in 0..p.instances {
        let mut rng = stream(seed, i as u64);
        let d = rng.random_range(p.dim_min..=p.dim_max);
        let j = rng.random_range(p.family_min..=p.family_max);
        let scale = c64(rng.random_range(0.1..2.0), 0.0);
        let u: Vec<CMat> = (0..j).map(|_| ginibre(d, d, &mut rng) * scale).collect();
        let v: Vec<CMat> = (0..j).map(|_| ginibre(d, d, &mut rng)).collect();
        let a = ginibre(d, d, &mut rng);
        let rho = ginibre(d, d, &mut rng);
        let id = CMat::identity(d, d);
        let nu = op_norm(&psi_prime(&u, &u, &id)).sqrt();
        let nv = op_norm(&psi_prime(&v, &v, &id)).sqrt();
        let na = op_norm(&a);
        let inputs = |kind: &str| json!({"instance": i, "d": d, "family": j, "kind": kind});
        builder.record(&inputs("g_uv_operator"), op_norm(&g_prime_uv(&u, &v, &a)), 3.0 * na * nu * nv, false);
        builder.record(&inputs("g_uv_trace"), trace_norm(&g_uv(&u, &v, &rho)), 3.0 * nu * nv * trace_norm(&rho), false);
        builder.record(&inputs("g_prime"), op_norm(&g_prime_uv(&u, &u, &a)), 2.0 * nu * nu * na, false);
    }
    Ok(builder.finish())
}

/// Parameters of [`check_cs_trace`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsTraceParams {
    #[serde(default = "default_cs_instances")]
    pub instances: usize,
    #[serde(default = "default_dim_min")]
    pub dim_min: usize,
    #[serde(default = "default_cs_dim_max")]
    pub dim_max: usize,
}

impl Default for CsTraceParams {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

/// `|Tr(Aβ(TρV)B)| ≤ Tr(Aβ(TρT*)A*)^½ · Tr(B*β(V*ρV)B)^½` for completely
/// positive `β` given by a random Kraus family, random `A, B, T, V` and a
/// random density `ρ`.
pub fn check_cs_trace(p: &CsTraceParams, seed: u64) -> Result<CheckReport> {
    check_range(p.dim_min, p.dim_max, "dimension")?;
    let params = serde_json::to_value(p).expect("params serialize");
    let mut builder = ReportBuilder::new("cs_trace", params, seed, MAP_TOL);
    for i in 0..p.instances {
        let mut rng = stream(seed, i as u64);
        let d = rng.random_range(p.dim_min..=p.dim_max);
        let kraus = random_kraus(d, rng.random_range(1..=4), &mut rng);
        let [a, b, t, v] = std::array::from_fn(|_| ginibre(d, d, &mut rng));
        let rho = random_density(d, rng.random_range(1..=d), &mut rng);
        let beta = |x: &CMat| apply_kraus(&kraus, x);
        let lhs = trace(&matmul(&matmul(&a, &beta(&matmul(&matmul(&t, &rho), &v))), &b)).norm();
        let left = trace(&matmul(&matmul(&a, &beta(&matmul(&matmul(&t, &rho), &t.adjoint()))), &a.adjoint())).re;
        let right = trace(&matmul(&matmul(&b.adjoint(), &beta(&matmul(&matmul(&v.adjoint(), &rho), &v))), &b)).re;
        let bound = left.max(0.0).sqrt() * right.max(0.0).sqrt();
        builder.record(&json!({"instance": i, "d": d, "kraus": kraus.len()}), lhs, bound, false);
    }
    Ok(builder.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::haar_unitary;

    #[test]
    fn identity_family_cancels() {
        let a = ginibre(4, 4, &mut stream(1, 0));
        let id = vec![CMat::identity(4, 4)];
        assert!(op_norm(&g_prime_uv(&id, &id, &a)) < 1e-14);
    }

    #[test]
    fn single_unitary_bound_two() {
        let mut rng = stream(2, 0);
        let u = vec![haar_unitary(5, &mut rng)];
        let h = ginibre(5, 5, &mut rng);
        let a = (&h + h.adjoint()) * c64(0.5, 0.0);
        assert!(op_norm(&g_prime_uv(&u, &u, &a)) <= 2.0 * op_norm(&a) + 1e-12);
    }

    #[test]
    fn g_uv_is_predual() {
        let mut rng = stream(3, 0);
        let u: Vec<CMat> = (0..3).map(|_| ginibre(4, 4, &mut rng)).collect();
        let v: Vec<CMat> = (0..3).map(|_| ginibre(4, 4, &mut rng)).collect();
        let a = ginibre(4, 4, &mut rng);
        let rho = ginibre(4, 4, &mut rng);
        let lhs = trace(&matmul(&a, &g_uv(&u, &v, &rho)));
        let rhs = trace(&matmul(&g_prime_uv(&u, &v, &a), &rho));
        assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0));
    }

    #[test]
    fn default_suites_pass() {
        let r = check_subcp(&SubcpParams { instances: 40, ..Default::default() }, 9).unwrap();
        assert!(r.passed(), "{:?}", r.worst_failure());
        assert_eq!(r.samples.len(), 120);
        let r = check_cs_trace(&CsTraceParams { instances: 40, ..Default::default() }, 9).unwrap();
        assert!(r.passed(), "{:?}", r.worst_failure());
    }

    #[test]
    fn cs_equality_case() {
        // A = B = T = V = 1, β = id: both sides are Tr ρ
        let rho = random_density(3, 2, &mut stream(4, 0));
        let id = CMat::identity(3, 3);
        let lhs = trace(&matmul(&matmul(&id, &rho), &id)).norm();
        assert!((lhs - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bad_range_rejected() {
        let p = SubcpParams { dim_min: 4, dim_max: 3, ..Default::default() };
        assert!(check_subcp(&p, 0).is_err());
    }
}
