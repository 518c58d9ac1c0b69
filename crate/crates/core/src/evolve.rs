// SPDX-License-Identifier: Apache-2.0

//! Semigroups and norms: matrix exponentials, propagation of states, trace
//! norms, positivity, and lower bounds on `S₁ → S₁` operator norms.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{
    all_finite, c64, eigh, eigvalsh, matmul, max_abs, one_norm, singular_values, solve, svd, CMat, CVec,
};
use crate::liouvillian::{unvec, vec_of, LinearMap, Provenance, Superoperator};
use crate::sampling::{haar_state, stream};

/// Largest matrix `matrix_exp` accepts (a superoperator on 64 × 64 operators).
pub const MAX_DENSE_DIM: usize = 4096;

const THETA: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
    (13, 5.371920351148152),
];

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] =
    [17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0, 2162160.0, 110880.0, 3960.0, 90.0, 1.0];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn scaled(m: &CMat, s: f64) -> CMat {
    m * c64(s, 0.0)
}

/// `e^{Mt}` by scaling and squaring with a diagonal Padé approximant
/// (degree 3 to 13 chosen from `‖Mt‖₁`).
pub fn matrix_exp(m: &CMat, t: f64) -> Result<CMat> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch(format!("matrix_exp needs a square matrix, got {}x{}", n, m.ncols())));
    }
    if n > MAX_DENSE_DIM {
        return Err(Error::TooLarge { dim: n, limit: MAX_DENSE_DIM });
    }
    if !all_finite(m) || !t.is_finite() {
        return Err(Error::InvalidParameter("matrix_exp input must be finite".into()));
    }
    let a = scaled(m, t);
    let norm = one_norm(&a);
    let id = CMat::identity(n, n);
    if norm == 0.0 {
        return Ok(id);
    }
    for &(deg, theta) in &THETA[..4] {
        if norm <= theta {
            let coeffs: &[f64] = match deg {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            return pade_low(&a, coeffs);
        }
    }
    let theta13 = THETA[4].1;
    let s = (norm / theta13).log2().ceil().max(0.0) as i32;
    let a = scaled(&a, 0.5f64.powi(s));
    let mut r = pade13(&a)?;
    for _ in 0..s {
        r = matmul(&r, &r);
    }
    Ok(r)
}

fn pade_low(a: &CMat, b: &[f64]) -> Result<CMat> {
    let n = a.nrows();
    let id = CMat::identity(n, n);
    let a2 = matmul(a, a);
    let mut u_inner = scaled(&id, b[1]);
    let mut v = scaled(&id, b[0]);
    let mut power = id;
    for k in 1..b.len() / 2 {
        power = matmul(&power, &a2);
        u_inner += scaled(&power, b[2 * k + 1]);
        v += scaled(&power, b[2 * k]);
    }
    let u = matmul(a, &u_inner);
    solve(&(&v - &u), &(v + u))
}

fn pade13(a: &CMat) -> Result<CMat> {
    let b = &B13;
    let n = a.nrows();
    let id = CMat::identity(n, n);
    let a2 = matmul(a, a);
    let a4 = matmul(&a2, &a2);
    let a6 = matmul(&a4, &a2);
    let u_hi = scaled(&a6, b[13]) + scaled(&a4, b[11]) + scaled(&a2, b[9]);
    let u_inner = matmul(&a6, &u_hi) + scaled(&a6, b[7]) + scaled(&a4, b[5]) + scaled(&a2, b[3]) + scaled(&id, b[1]);
    let u = matmul(a, &u_inner);
    let v_hi = scaled(&a6, b[12]) + scaled(&a4, b[10]) + scaled(&a2, b[8]);
    let v = matmul(&a6, &v_hi) + scaled(&a6, b[6]) + scaled(&a4, b[4]) + scaled(&a2, b[2]) + scaled(&id, b[0]);
    solve(&(&v - &u), &(v + u))
}

/// `e^{Lt}` as a superoperator.
pub fn exp_superoperator(l: &Superoperator, t: f64) -> Result<Superoperator> {
    let e = matrix_exp(l.matrix(), t)?;
    if !all_finite(&e) {
        return Err(Error::Overflow { t, generator: l.provenance().to_string() });
    }
    Superoperator::new(e, l.dim(), Provenance::Exponential { t })
}

/// States `ρ_t` on an ascending time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CMat>,
    pub provenance: Provenance,
}

fn validate_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::NonAscendingTimes);
    }
    Ok(())
}

/// Common step `h` such that every time is an integer multiple of it, with
/// the multiples.
fn common_step(times: &[f64]) -> Option<(f64, Vec<usize>)> {
    let mut prev = 0.0;
    let mut h = f64::INFINITY;
    for &t in times {
        if t > prev {
            h = h.min(t - prev);
        }
        prev = t;
    }
    if !h.is_finite() {
        return Some((0.0, vec![0; times.len()]));
    }
    let mut counts = Vec::with_capacity(times.len());
    for &t in times {
        let k = (t / h).round();
        if (k * h - t).abs() > 1e-12 * t.max(1.0) || k > 1e6 {
            return None;
        }
        counts.push(k as usize);
    }
    Some((h, counts))
}

/// Repeated application of `e^{Lh}` for a fixed step `h`.
#[derive(Debug, Clone)]
pub struct Stepper {
    step: f64,
    exp: Superoperator,
    generator: String,
}

impl Stepper {
    pub fn new(l: &Superoperator, step: f64) -> Result<Self> {
        Ok(Stepper { step, exp: exp_superoperator(l, step)?, generator: l.provenance().to_string() })
    }

    /// Stepper whose step divides every entry of `times`.
    pub fn for_times(l: &Superoperator, times: &[f64]) -> Result<(Self, Vec<usize>)> {
        validate_times(times)?;
        let (h, counts) = common_step(times)
            .ok_or_else(|| Error::InvalidParameter("times must be integer multiples of a common step".into()))?;
        Ok((Self::new(l, if h > 0.0 { h } else { 1.0 })?, counts))
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Number of steps reaching each time; fails unless every time is an
    /// integer multiple of the step.
    pub fn counts_for(&self, times: &[f64]) -> Result<Vec<usize>> {
        validate_times(times)?;
        times
            .iter()
            .map(|&t| {
                let k = (t / self.step).round();
                if (k * self.step - t).abs() > 1e-12 * t.max(1.0) {
                    Err(Error::InvalidParameter(format!("time {t} is not a multiple of the step {}", self.step)))
                } else {
                    Ok(k as usize)
                }
            })
            .collect()
    }

    pub fn exponential(&self) -> &Superoperator {
        &self.exp
    }

    /// `(e^{Lh})^k` as a superoperator, by repeated squaring.
    pub fn power(&self, k: usize) -> Result<Superoperator> {
        let t = k as f64 * self.step;
        let n = self.exp.matrix().nrows();
        let mut acc = CMat::identity(n, n);
        let mut base = self.exp.matrix().clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = matmul(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = matmul(&base, &base);
            }
        }
        if !all_finite(&acc) {
            return Err(Error::Overflow { t, generator: self.generator.clone() });
        }
        Superoperator::new(acc, self.exp.dim(), Provenance::Exponential { t })
    }

    /// `(e^{Lh})^k v`, failing on the first non-finite iterate.
    pub fn advance(&self, v: &CVec, k: usize, t0: f64) -> Result<CVec> {
        let mut v = v.clone();
        for i in 0..k {
            v = self.exp.apply_vec(&v);
            if !v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::Overflow { t: t0 + (i + 1) as f64 * self.step, generator: self.generator.clone() });
            }
        }
        Ok(v)
    }

    /// States at every `counts[i]·h`, starting from `rho0`.
    pub fn trajectory(&self, rho0: &CMat, counts: &[usize]) -> Result<Vec<CMat>> {
        let d = rho0.nrows();
        let mut v = vec_of(rho0);
        let mut at = 0usize;
        let mut out = Vec::with_capacity(counts.len());
        for &k in counts {
            v = self.advance(&v, k - at, at as f64 * self.step)?;
            at = k;
            out.push(unvec(&v, d));
        }
        Ok(out)
    }
}

/// `ρ_t = unvec(e^{Lt} vec ρ₀)` at each time.
///
/// When the times share a common step one exponential is computed and
/// applied repeatedly; otherwise each distinct increment is exponentiated
/// once.
pub fn propagate(l: &Superoperator, rho0: &CMat, times: &[f64]) -> Result<Trajectory> {
    validate_times(times)?;
    let d = l.dim();
    if rho0.nrows() != d || rho0.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "state is {}x{}, generator acts on {d}x{d}",
            rho0.nrows(),
            rho0.ncols()
        )));
    }
    let states = match common_step(times) {
        Some((h, counts)) if h > 0.0 => Stepper::new(l, h)?.trajectory(rho0, &counts)?,
        Some(_) => vec![rho0.clone(); times.len()],
        None => {
            let mut cache: HashMap<u64, Superoperator> = HashMap::new();
            let mut v = vec_of(rho0);
            let mut prev = 0.0;
            let mut out = Vec::with_capacity(times.len());
            for &t in times {
                let dt = t - prev;
                if dt > 0.0 {
                    let e = match cache.get(&dt.to_bits()) {
                        Some(e) => e,
                        None => {
                            let e = exp_superoperator(l, dt)?;
                            cache.entry(dt.to_bits()).or_insert(e)
                        }
                    };
                    v = e.apply_vec(&v);
                    if !v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                        return Err(Error::Overflow { t, generator: l.provenance().to_string() });
                    }
                }
                prev = t;
                out.push(unvec(&v, d));
            }
            out
        }
    };
    Ok(Trajectory { times: times.to_vec(), states, provenance: l.provenance() })
}

/// Sum of singular values.
pub fn trace_norm(lambda: &CMat) -> f64 {
    singular_values(lambda).iter().sum()
}

/// Smallest eigenvalue of a Hermitian matrix; rejects inputs whose
/// Hermiticity defect exceeds `1e−10·max(1, max|ρ|)`.
pub fn min_eigenvalue(rho: &CMat) -> Result<f64> {
    let residual = crate::linalg::hermiticity_defect(rho);
    let tolerance = 1e-10 * max_abs(rho).max(1.0);
    if residual > tolerance {
        return Err(Error::NotHermitian { residual, tolerance });
    }
    Ok(eigvalsh(rho).first().copied().unwrap_or(0.0))
}

/// `λ = λ₊ − λ₋ + i(λ′₊ − λ′₋)` with all four parts positive.
#[derive(Debug, Clone)]
pub struct Quadrants {
    pub re_pos: CMat,
    pub re_neg: CMat,
    pub im_pos: CMat,
    pub im_neg: CMat,
}

impl Quadrants {
    pub fn recombine(&self) -> CMat {
        &self.re_pos - &self.re_neg + (&self.im_pos - &self.im_neg) * c64(0.0, 1.0)
    }

    pub fn parts(&self) -> [&CMat; 4] {
        [&self.re_pos, &self.re_neg, &self.im_pos, &self.im_neg]
    }
}

fn split_hermitian(h: &CMat) -> (CMat, CMat) {
    let (values, vectors) = eigh(h);
    let n = h.nrows();
    let mut pos = CMat::zeros(n, n);
    let mut neg = CMat::zeros(n, n);
    for (k, &e) in values.iter().enumerate() {
        let v = vectors.column(k);
        let p = v * v.adjoint();
        if e > 0.0 {
            pos += p * c64(e, 0.0);
        } else if e < 0.0 {
            neg += p * c64(-e, 0.0);
        }
    }
    (pos, neg)
}

pub fn quadrants(lambda: &CMat) -> Quadrants {
    let re = (lambda + lambda.adjoint()) * c64(0.5, 0.0);
    let im = (lambda - lambda.adjoint()) * c64(0.0, -0.5);
    let (re_pos, re_neg) = split_hermitian(&re);
    let (im_pos, im_neg) = split_hermitian(&im);
    Quadrants { re_pos, re_neg, im_pos, im_neg }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Exact,
    LowerBound,
}

#[derive(Debug, Clone)]
pub struct NormEstimate {
    pub value: f64,
    pub kind: NormKind,
    pub restarts_used: usize,
    /// Maximizing input `|ψ⟩⟨φ|`.
    pub witness: (CVec, CVec),
}

const ASCENT_MAX_ITERS: usize = 200;
const ASCENT_REL_GAIN: f64 = 1e-9;

fn rank_one(psi: &CVec, phi: &CVec) -> CMat {
    psi * phi.adjoint()
}

fn ascend<M: LinearMap + ?Sized>(map: &M, mut psi: CVec, mut phi: CVec) -> (f64, CVec, CVec) {
    let mut image = map.apply(&rank_one(&psi, &phi));
    let mut value = trace_norm(&image);
    for _ in 0..ASCENT_MAX_ITERS {
        if value == 0.0 {
            break;
        }
        // polar unitary U with Tr(U·image) = ‖image‖₁
        let (w, _, v) = svd(&image);
        let u = matmul(&v, &w.adjoint());
        let m = map.apply_dual(&u);
        let (mu, _, mv) = svd(&m);
        let (new_psi, new_phi) = (mv.column(0).into_owned(), mu.column(0).into_owned());
        let new_image = map.apply(&rank_one(&new_psi, &new_phi));
        let new_value = trace_norm(&new_image);
        let improved = new_value > value;
        if improved {
            psi = new_psi;
            phi = new_phi;
            image = new_image;
        }
        if !improved || new_value <= value * (1.0 + ASCENT_REL_GAIN) {
            value = value.max(new_value);
            break;
        }
        value = new_value;
    }
    (value, psi, phi)
}

/// Lower bound on `sup ‖Φ(|ψ⟩⟨φ|)‖₁` over unit `ψ, φ`, which is the
/// `S₁ → S₁` norm of `Φ`.
///
/// Each restart draws `(ψ, φ)` from its own seeded stream and runs an
/// alternating ascent: the polar unitary `U` of `Φ(ψφ*)` gives the
/// functional `Tr(U·Φ(·))`, whose best rank-one input is the top singular
/// pair of `Φ′(U)`. Every step is non-decreasing. The result is the maximum
/// over restarts, so it only grows when restarts are added.
pub fn s1_opnorm_lower<M: LinearMap + ?Sized>(map: &M, restarts: usize, seed: u64) -> Result<NormEstimate> {
    if restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be at least 1".into()));
    }
    let d = map.dim();
    let runs: Vec<(f64, CVec, CVec)> = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, k as u64);
            let psi = haar_state(d, &mut rng);
            let phi = haar_state(d, &mut rng);
            ascend(map, psi, phi)
        })
        .collect();
    let mut best = 0;
    for (k, run) in runs.iter().enumerate() {
        if run.0 > runs[best].0 {
            best = k;
        }
    }
    let (value, psi, phi) = runs.into_iter().nth(best).expect("at least one restart");
    Ok(NormEstimate { value, kind: NormKind::LowerBound, restarts_used: restarts, witness: (psi, phi) })
}

/// `χ_S λ χ_S` for the site set `S` given as a mask.
pub fn compress(m: &CMat, mask: &[bool]) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| if mask[i] && mask[j] { m[(i, j)] } else { crate::linalg::ZERO })
}

pub fn site_mask(sites: &[usize], n: usize) -> Vec<bool> {
    let mut mask = vec![false; n];
    for &x in sites {
        mask[x] = true;
    }
    mask
}

/// `λ ↦ χ_after · E^k(χ_before λ χ_before) · χ_after` for a fixed one-step
/// map `E`; either cut may be absent.
pub struct CutEvolution<'a> {
    pub step: &'a Superoperator,
    pub power: usize,
    pub before: Option<Vec<bool>>,
    pub after: Option<Vec<bool>>,
}

impl LinearMap for CutEvolution<'_> {
    fn dim(&self) -> usize {
        self.step.dim()
    }

    fn apply(&self, x: &CMat) -> CMat {
        let d = self.dim();
        let x = match &self.before {
            Some(mask) => compress(x, mask),
            None => x.clone(),
        };
        let mut v = vec_of(&x);
        for _ in 0..self.power {
            v = self.step.apply_vec(&v);
        }
        let y = unvec(&v, d);
        match &self.after {
            Some(mask) => compress(&y, mask),
            None => y,
        }
    }

    fn apply_dual(&self, a: &CMat) -> CMat {
        let mut y = match &self.after {
            Some(mask) => compress(a, mask),
            None => a.clone(),
        };
        for _ in 0..self.power {
            y = self.step.apply_dual(&y);
        }
        match &self.before {
            Some(mask) => compress(&y, mask),
            None => y,
        }
    }
}
