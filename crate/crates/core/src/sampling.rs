// SPDX-License-Identifier: Apache-2.0

//! Seeded random states, unitaries and Kraus families.
//!
//! Every stream is a `ChaCha8Rng`; callers that need independent streams
//! (one per restart or per instance) use [`stream`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{c64, matmul, CMat, CVec};

/// Independent stream `index` of the generator seeded by `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn gaussian(rng: &mut ChaCha8Rng) -> num_complex::Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix of i.i.d. standard complex Gaussians.
pub fn ginibre(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMat {
    let mut m = CMat::zeros(rows, cols);
    // fill row by row so the stream layout does not depend on storage order
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = gaussian(rng);
        }
    }
    m
}

/// Haar-random unit vector in `ℂ^d`.
pub fn haar_state(d: usize, rng: &mut ChaCha8Rng) -> CVec {
    let v = CVec::from_iterator(d, (0..d).map(|_| gaussian(rng)));
    let n = v.norm();
    v / c64(n, 0.0)
}

/// Haar-random unit vector supported on `sites` of a `d`-site chain.
pub fn haar_state_on(sites: &[usize], d: usize, rng: &mut ChaCha8Rng) -> CVec {
    let local = haar_state(sites.len(), rng);
    let mut v = CVec::zeros(d);
    for (k, &x) in sites.iter().enumerate() {
        v[x] = local[k];
    }
    v
}

pub fn projector(psi: &CVec) -> CMat {
    psi * psi.adjoint()
}

/// Random density matrix of the given rank (`W W*` normalized, `W` Ginibre).
pub fn random_density(d: usize, rank: usize, rng: &mut ChaCha8Rng) -> CMat {
    let w = ginibre(d, rank.max(1), rng);
    let rho = matmul(&w, &w.adjoint());
    let tr = crate::linalg::trace(&rho).re;
    rho / c64(tr, 0.0)
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of `R`'s
/// diagonal moved into `Q`.
pub fn haar_unitary(d: usize, rng: &mut ChaCha8Rng) -> CMat {
    let qr = ginibre(d, d, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let z = r[(j, j)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { c64(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// `count` Kraus operators scaled so that `Σ K*K` has norm about one.
pub fn random_kraus(d: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<CMat> {
    let scale = c64(1.0 / ((count * d) as f64).sqrt(), 0.0);
    (0..count).map(|_| ginibre(d, d, rng) * scale).collect()
}

/// `ρ ↦ Σ K ρ K*`.
pub fn apply_kraus(kraus: &[CMat], rho: &CMat) -> CMat {
    let d = rho.nrows();
    kraus.iter().fold(CMat::zeros(d, d), |acc, k| acc + matmul(&matmul(k, rho), &k.adjoint()))
}
