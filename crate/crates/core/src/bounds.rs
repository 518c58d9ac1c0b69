// SPDX-License-Identifier: Apache-2.0

//! Bound ingredients: the velocity function `c′(ν)`, the cone speed `c(μ)`,
//! the small-`ν` slope, separation factors `δ_UV`, the single-ball envelope
//! and the partition constant for general site sets.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c64, eigvalsh, I};
use crate::liouvillian::{build_gprime, build_gtilde};
use crate::model::{build_hamiltonian, deform_matrix, imag_part, LatticeModel, OperatorMatrix};

/// `Im H_{iη} + G̃_{iη}`.
pub fn velocity_operator(model: &LatticeModel, eta: f64) -> Result<OperatorMatrix> {
    let zeta = model.deformation(c64(0.0, eta))?;
    let h = deform_matrix(&build_hamiltonian(model), zeta.zeta(), model.boundary());
    let g = build_gtilde(model, &zeta)?;
    Ok(OperatorMatrix::symmetrized(imag_part(&h).matrix() + g.matrix()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignedTop {
    pub eta: f64,
    pub top_eigenvalue: f64,
}

/// `c′(ν) = max_{η = ±ν} sup spec(Im H_{iη} + G̃_{iη}) / ν`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VelocityBound {
    pub nu: f64,
    pub signs: [SignedTop; 2],
    pub c_prime: f64,
}

impl VelocityBound {
    /// Exponent rate of `‖β_{t,iη}‖`: `2νc′(ν)`.
    pub fn growth_rate(&self) -> f64 {
        2.0 * self.nu * self.c_prime
    }
}

pub fn velocity_c_prime(model: &LatticeModel, nu: f64) -> Result<VelocityBound> {
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!("ν must be positive, got {nu}")));
    }
    let mut signs = [SignedTop { eta: nu, top_eigenvalue: 0.0 }, SignedTop { eta: -nu, top_eigenvalue: 0.0 }];
    for s in &mut signs {
        let op = velocity_operator(model, s.eta)?;
        s.top_eigenvalue = *eigvalsh(op.matrix()).last().expect("non-empty chain");
    }
    let top = signs[0].top_eigenvalue.max(signs[1].top_eigenvalue);
    let c_prime = top / nu;
    if !c_prime.is_finite() {
        return Err(Error::InvalidParameter(format!("c′({nu}) is not finite")));
    }
    Ok(VelocityBound { nu, signs, c_prime })
}

/// Parameters of the cone `e^{−2μ(d − ct)}`: `ν = μ/(1 − 5ε/2)`,
/// `c(μ) = c′(ν)` and `c = c(μ)/(1 − 5ε/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeEnvelope {
    pub mu: f64,
    pub nu: f64,
    pub eps: f64,
    pub c_mu: f64,
    pub c: f64,
}

impl ConeEnvelope {
    /// `μ·c`, which equals `ν·c′(ν)`.
    pub fn rate(&self) -> f64 {
        self.mu * self.c
    }
}

fn check_eps(eps: f64) -> Result<f64> {
    if eps > 0.0 && eps < 0.4 {
        Ok(1.0 - 2.5 * eps)
    } else {
        Err(Error::InvalidParameter(format!("ε must lie in (0, 2/5), got {eps}")))
    }
}

pub fn velocity_c_mu(model: &LatticeModel, mu: f64, eps: f64) -> Result<ConeEnvelope> {
    let scale = check_eps(eps)?;
    if !(mu > 0.0) {
        return Err(Error::InvalidParameter(format!("μ must be positive, got {mu}")));
    }
    let nu = mu / scale;
    let c_mu = velocity_c_prime(model, nu)?.c_prime;
    Ok(ConeEnvelope { mu, nu, eps, c_mu, c: c_mu / scale })
}

/// Strip width used to scale the default grid: the declared decay rate, or 1
/// for finite-range hopping.
pub fn reference_width(model: &LatticeModel) -> f64 {
    let a = model.decay_rate();
    if a.is_finite() {
        a
    } else {
        1.0
    }
}

pub const NU_GRID_FRACTIONS: [f64; 6] = [0.1, 0.2, 0.4, 0.6, 0.8, 0.9];

pub fn default_nu_grid(model: &LatticeModel) -> Vec<f64> {
    let a = reference_width(model);
    NU_GRID_FRACTIONS.iter().map(|f| f * a).collect()
}

/// One line of the bounds table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsRow {
    pub nu: f64,
    pub c_prime: f64,
    pub mu: f64,
    pub eps: f64,
    pub c_mu: f64,
    pub c: f64,
}

/// For each `ν`: `c′(ν)` and the cone parameters with `μ = (1 − 5ε/2)ν`.
pub fn bounds_table(model: &LatticeModel, nu_grid: &[f64], eps: f64) -> Result<Vec<BoundsRow>> {
    let scale = check_eps(eps)?;
    nu_grid
        .iter()
        .map(|&nu| {
            let vb = velocity_c_prime(model, nu)?;
            let mu = scale * nu;
            Ok(BoundsRow { nu, c_prime: vb.c_prime, mu, eps, c_mu: vb.c_prime, c: vb.c_prime / scale })
        })
        .collect()
}

/// `c′(ν)` at `d` and `2d` sites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationGap {
    pub nu: f64,
    pub n_sites: usize,
    pub c_prime: f64,
    pub c_prime_doubled: f64,
    pub gap: f64,
}

pub fn truncation_gap(model: &LatticeModel, nu: f64) -> Result<TruncationGap> {
    let doubled = model.uniform_resized(2 * model.n_sites())?;
    let a = velocity_c_prime(model, nu)?.c_prime;
    let b = velocity_c_prime(&doubled, nu)?.c_prime;
    Ok(TruncationGap { nu, n_sites: model.n_sites(), c_prime: a, c_prime_doubled: b, gap: (b - a).abs() })
}

fn dispersion_slope(hopping: &std::collections::BTreeMap<i64, Complex64>, k: f64) -> f64 {
    // ω(k) = V + Σ_r t_r e^{−ikr}, so ω′(k) = Σ_r (−ir) t_r e^{−ikr}
    hopping.iter().map(|(&r, &t)| -I * r as f64 * t * (-I * k * r as f64).exp()).sum::<Complex64>().norm()
}

/// `max_k |ω′(k)| − ‖G̃′‖`; a positive value certifies `c′(ν) > 0` for
/// small `ν`. Requires a constant potential.
pub fn small_nu_slope(model: &LatticeModel) -> Result<f64> {
    if model.constant_potential().is_none() {
        return Err(Error::SlopeUndefined);
    }
    let hop = model.hopping();
    let n = 4096;
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let mut grid: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let k = -std::f64::consts::PI + i as f64 * h;
            (dispersion_slope(hop, k), k)
        })
        .collect();
    grid.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = grid[0].0;
    for &(_, k0) in grid.iter().take(4) {
        // golden-section refinement on [k0 − h, k0 + h]
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (k0 - h, k0 + h);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (dispersion_slope(hop, c), dispersion_slope(hop, d));
        for _ in 0..80 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = dispersion_slope(hop, c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = dispersion_slope(hop, d);
            }
        }
        best = best.max(fc).max(fd);
    }
    let gprime = eigvalsh(build_gprime(model).matrix());
    let gnorm = gprime.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    Ok(best - gnorm)
}

/// `δ_UV = r_U − r̃_V` with `r_U = min_{x∈U} b·x` and `r̃_V = max_{y∈V} b·y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometryFactors {
    pub b: i8,
    pub r_u: i64,
    pub r_v_tilde: i64,
    pub delta: i64,
}

impl GeometryFactors {
    /// `e^{−νδ_UV}`, which bounds `‖χ_U T_{−ζ}‖·‖χ_V T_ζ‖` for `ζ = iνb`.
    pub fn separation_factor(&self, nu: f64) -> f64 {
        (-nu * self.delta as f64).exp()
    }
}

pub fn geometry_delta(u: &[usize], v: &[usize], b: i8) -> Result<GeometryFactors> {
    if u.is_empty() {
        return Err(Error::EmptySet("U"));
    }
    if v.is_empty() {
        return Err(Error::EmptySet("V"));
    }
    if b != 1 && b != -1 {
        return Err(Error::InvalidParameter(format!("direction must be ±1, got {b}")));
    }
    let bx = |x: usize| b as i64 * x as i64;
    let r_u = u.iter().map(|&x| bx(x)).min().expect("non-empty");
    let r_v_tilde = v.iter().map(|&y| bx(y)).max().expect("non-empty");
    Ok(GeometryFactors { b, r_u, r_v_tilde, delta: r_u - r_v_tilde })
}

/// Larger of the two directional separations.
pub fn best_delta(u: &[usize], v: &[usize]) -> Result<GeometryFactors> {
    let p = geometry_delta(u, v, 1)?;
    let m = geometry_delta(u, v, -1)?;
    Ok(if m.delta > p.delta { m } else { p })
}

/// `4 e^{−2νδ_UV + 2νc′t}`.
pub fn ball_envelope(delta: f64, nu: f64, c_prime: f64, t: f64) -> f64 {
    4.0 * (-2.0 * nu * delta + 2.0 * nu * c_prime * t).exp()
}

/// Set distance `min |x − y|`.
pub fn set_distance(x: &[usize], y: &[usize]) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::EmptySet("X"));
    }
    if y.is_empty() {
        return Err(Error::EmptySet("Y"));
    }
    Ok(x.iter().flat_map(|&a| y.iter().map(move |&b| a.abs_diff(b))).min().expect("non-empty"))
}

/// Rejects overlapping sets, naming the first shared site.
pub fn check_disjoint(x: &[usize], y: &[usize]) -> Result<()> {
    match x.iter().find(|s| y.contains(s)) {
        Some(&site) => Err(Error::OverlappingSets { site }),
        None => Ok(()),
    }
}

/// Greedy cover of `set` by pieces of radius `r`: each piece is the part of
/// `set` inside a ball of radius `r` around one of its own points.
pub fn cover(set: &[usize], radius: f64) -> Vec<Vec<usize>> {
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut pieces = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let start = sorted[i] as f64;
        let center =
            sorted[i..].iter().take_while(|&&x| x as f64 <= start + radius).last().copied().expect("start itself");
        let end = center as f64 + radius;
        let piece: Vec<usize> = sorted[i..].iter().take_while(|&&x| x as f64 <= end).copied().collect();
        i += piece.len();
        pieces.push(piece);
    }
    pieces
}

/// Explicit prefactor for leakage out of general site sets.
///
/// `X` (where the state lives) and `Y` (where leakage is measured) are
/// covered by pieces of radius `r = ε·d_XY/2`. With `ν′ = ν(1 − ε/2)`,
///
/// `C_XY = max_{j₁} Σ_k Σ_{j₂} e^{−ν′ D(k, j₁, j₂)}`,
///
/// where `D = max_b (δ^b(Y_k, X_{j₁}) + δ^b(Y_k, X_{j₂}))`, and the bound on
/// `Tr(χ_Y β_t(ρ))` is `4 e^{2νεd_XY} C_XY e^{2νc′(ν)t} Tr ρ`. Negative `D`
/// (interleaved sets) is weighted with `ν` instead of `ν′`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionConstant {
    pub nu: f64,
    pub nu_prime: f64,
    pub eps: f64,
    pub d_xy: usize,
    pub radius: f64,
    pub x_pieces: Vec<Vec<usize>>,
    pub y_pieces: Vec<Vec<usize>>,
    pub c_xy: f64,
    /// `4 e^{2νεd_XY} C_XY`.
    pub prefactor: f64,
}

impl PartitionConstant {
    /// Leakage bound at time `t`: `prefactor · e^{2νc′t}`.
    pub fn leakage_bound(&self, c_prime: f64, t: f64) -> f64 {
        self.prefactor * (2.0 * self.nu * c_prime * t).exp()
    }

    /// Prefactor `C` in the form `C e^{−2μ(d_XY − ct)}` of the same bound.
    pub fn cone_prefactor(&self, mu: f64) -> f64 {
        self.prefactor * (2.0 * mu * self.d_xy as f64).exp()
    }
}

fn pair_exponent(yk: &[usize], xa: &[usize], xb: &[usize]) -> i64 {
    [1i8, -1]
        .iter()
        .map(|&b| {
            let da = geometry_delta(yk, xa, b).expect("pieces are non-empty").delta;
            let db = geometry_delta(yk, xb, b).expect("pieces are non-empty").delta;
            da + db
        })
        .max()
        .expect("two directions")
}

pub fn assemble_partition_constant(x: &[usize], y: &[usize], eps: f64, nu: f64) -> Result<PartitionConstant> {
    check_eps(eps)?;
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!("ν must be positive, got {nu}")));
    }
    check_disjoint(x, y)?;
    let d_xy = set_distance(x, y)?;
    let radius = eps * d_xy as f64 / 2.0;
    let x_pieces = cover(x, radius);
    let y_pieces = cover(y, radius);
    let nu_prime = nu * (1.0 - eps / 2.0);
    let weight = |dd: i64| {
        let rate = if dd >= 0 { nu_prime } else { nu };
        (-rate * dd as f64).exp()
    };
    let mut c_xy = 0.0f64;
    for xa in &x_pieces {
        let row: f64 =
            y_pieces.iter().map(|yk| x_pieces.iter().map(|xb| weight(pair_exponent(yk, xa, xb))).sum::<f64>()).sum();
        c_xy = c_xy.max(row);
    }
    let prefactor = 4.0 * (2.0 * nu * eps * d_xy as f64).exp() * c_xy;
    Ok(PartitionConstant { nu, nu_prime, eps, d_xy, radius, x_pieces, y_pieces, c_xy, prefactor })
}

/// `%.12g`-style formatting used by every CSV the crate writes.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{catalog, Boundary, JumpSpec, ModelDescription};
    use approx::assert_abs_diff_eq;

    #[test]
    fn periodic_free_chain_velocity() {
        let m = catalog::periodic_free_chain(128);
        let vb = velocity_c_prime(&m, 0.5).unwrap();
        let exact = 2.0 * 0.5f64.sinh() / 0.5;
        assert!((vb.c_prime - exact).abs() <= 1e-5 * exact);
    }

    #[test]
    fn dephasing_leaves_velocity_unchanged() {
        let a = velocity_c_prime(&catalog::free_chain(16), 0.5).unwrap().c_prime;
        let b = velocity_c_prime(&catalog::dephasing_chain(16, 3.0), 0.5).unwrap().c_prime;
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }

    #[test]
    fn open_chain_velocity_closed_form() {
        let d = 20;
        let vb = velocity_c_prime(&catalog::free_chain(d), 0.3).unwrap();
        let exact = 2.0 * 0.3f64.sinh() * (std::f64::consts::PI / (d as f64 + 1.0)).cos() / 0.3;
        assert_abs_diff_eq!(vb.c_prime, exact, epsilon = 1e-12);
    }

    #[test]
    fn hop_jump_weyl_bracket() {
        let mut desc = catalog::periodic_free_chain(64).description().clone();
        desc.jumps = vec![JumpSpec::Hop { site: Some(10), direction: 1, rate: 1.0 }];
        let m = LatticeModel::new(desc).unwrap();
        let c = velocity_c_prime(&m, 0.5).unwrap().c_prime;
        let free = 2.0 * 0.5f64.sinh();
        assert!(c >= free / 0.5 - 1e-9);
        assert!(c <= (free + 0.5 * (std::f64::consts::E - 1.0)) / 0.5 + 1e-9);
    }

    #[test]
    fn cone_arithmetic() {
        let m = catalog::free_chain(30);
        let env = velocity_c_mu(&m, 0.3, 0.2).unwrap();
        assert_abs_diff_eq!(env.nu, 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(env.c, 2.0 * velocity_c_prime(&m, 0.6).unwrap().c_prime, epsilon = 1e-12);
        assert_abs_diff_eq!(env.rate(), env.nu * env.c_mu, epsilon = 1e-12);
        let small = velocity_c_mu(&m, 0.3, 1e-9).unwrap();
        assert_abs_diff_eq!(small.c_mu, velocity_c_prime(&m, 0.3).unwrap().c_prime, epsilon = 1e-7);
        assert!(velocity_c_mu(&m, 0.3, 0.4).is_err());
    }

    #[test]
    fn periodic_cone_closed_form() {
        let env = velocity_c_mu(&catalog::periodic_free_chain(128), 0.3, 0.2).unwrap();
        assert_abs_diff_eq!(env.c, 2.0 * 2.0 * 0.6f64.sinh() / 0.6, epsilon = 1e-9);
    }

    #[test]
    fn strip_violation_is_reported() {
        let mut desc = catalog::free_chain(5).description().clone();
        desc.decay_rate = Some(0.5);
        let m = LatticeModel::new(desc).unwrap();
        assert!(matches!(velocity_c_prime(&m, 0.6), Err(Error::OutsideStrip { .. })));
        assert_eq!(default_nu_grid(&m), vec![0.05, 0.1, 0.2, 0.3, 0.4, 0.45]);
    }

    #[test]
    fn slope_oracles() {
        assert_abs_diff_eq!(small_nu_slope(&catalog::free_chain(12)).unwrap(), 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(small_nu_slope(&catalog::dephasing_chain(12, 0.7)).unwrap(), 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(small_nu_slope(&catalog::hopping_chain(12, 1.0)).unwrap(), 1.0, epsilon = 1e-10);
        assert!(matches!(small_nu_slope(&catalog::disordered_chain(12, 1.0, 3)), Err(Error::SlopeUndefined)));
    }

    #[test]
    fn slope_of_longer_range_kernel() {
        // ω(k) = −2cos k − cos 2k: ω′ = 2 sin k + 2 sin 2k, max at cos k = (√33 − 1)/8
        let desc = ModelDescription {
            n_sites: 10,
            boundary: Boundary::Periodic,
            hopping: [(1, -1.0), (-1, -1.0), (2, -0.5), (-2, -0.5)]
                .iter()
                .map(|&(offset, re)| crate::model::HoppingEntry { offset, re, im: 0.0 })
                .collect(),
            potential: vec![],
            decay_rate: Some(0.5),
            decay_prefactor: None,
            jumps: vec![],
            disorder: None,
            seed: 0,
        };
        let m = LatticeModel::new(desc).unwrap();
        let ck = (33f64.sqrt() - 1.0) / 8.0;
        let k = ck.acos();
        let exact = 2.0 * k.sin() + 2.0 * (2.0 * k).sin();
        assert_abs_diff_eq!(small_nu_slope(&m).unwrap(), exact, epsilon = 1e-10);
    }

    #[test]
    fn geometry_examples() {
        let g = geometry_delta(&[5, 6, 7], &[0, 1, 2], 1).unwrap();
        assert_eq!((g.r_u, g.r_v_tilde, g.delta), (5, 2, 3));
        assert!(geometry_delta(&[3, 4], &[3, 4], 1).unwrap().delta <= 0);
        assert!(matches!(geometry_delta(&[], &[1], 1), Err(Error::EmptySet("U"))));
    }

    #[test]
    fn envelope_examples() {
        assert_eq!(ball_envelope(0.0, 0.5, 2.0, 0.0), 4.0);
        let v = ball_envelope(10.0, 0.5, 2.084381, 1.0);
        assert_abs_diff_eq!(v, 4.0 * (-10.0f64 + 2.084381).exp(), epsilon = 1e-15);
    }

    #[test]
    fn cover_pieces() {
        let pieces = cover(&[32, 33, 34, 35, 36, 37, 38, 39, 40], 1.2);
        assert_eq!(pieces, vec![vec![32, 33, 34], vec![35, 36, 37], vec![38, 39, 40]]);
        assert_eq!(cover(&[7], 0.0), vec![vec![7]]);
        let sparse = cover(&[0, 5, 6, 20], 2.0);
        assert_eq!(sparse, vec![vec![0], vec![5, 6], vec![20]]);
    }

    #[test]
    fn single_site_partition_constant() {
        let p = assemble_partition_constant(&[3], &[10], 0.2, 0.5).unwrap();
        assert_abs_diff_eq!(p.c_xy, (-2.0 * p.nu_prime * 7.0).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(p.prefactor, 4.0 * (2.0 * 0.5 * 0.2 * 7.0f64).exp() * p.c_xy, epsilon = 1e-15);
    }

    #[test]
    fn overlapping_sets_are_rejected() {
        assert!(matches!(
            assemble_partition_constant(&[1, 2], &[2, 3], 0.2, 0.5),
            Err(Error::OverlappingSets { site: 2 })
        ));
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(format_sig(2.0843811820635, 12), "2.08438118206");
        assert_eq!(format_sig(0.1, 12), "0.1");
        assert_eq!(format_sig(1.5e-7, 12), "1.5e-07");
        assert_eq!(format_sig(1.75e-5, 12), "1.75e-05");
        assert_eq!(format_sig(1.75e-4, 12), "0.000175");
        assert_eq!(format_sig(-3.0, 12), "-3");
        assert_eq!(format_sig(0.0, 12), "0");
        assert_eq!(format_sig(1234567.0, 12), "1234567");
        assert_eq!(format_sig(1.0e15, 12), "1e+15");
    }
}
