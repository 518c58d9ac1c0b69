// SPDX-License-Identifier: Apache-2.0

//! Lindblad generators in vectorized form, their analytic deformations, the
//! Heisenberg dual, and the operators `G̃_ζ`, `G̃′` entering the velocity
//! bound.
//!
//! Operators are vectorized row by row: `vec(ρ)[i·d + j] = ρ[i, j]`. With this
//! convention `ρ ↦ AρB` is the matrix `A ⊗ Bᵀ`.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c64, kron, matmul, CMat, CVec, I, ZERO};
use crate::model::{
    build_hamiltonian, deform_matrix, position_operator, DeformationParam, LatticeModel, OperatorMatrix,
};

/// Where a superoperator came from. Invariant checks depend on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    Lindblad,
    Deformed {
        zeta: Complex64,
        zeta_tilde: Complex64,
    },
    /// Dissipative part `G_{ζ,ζ̃}` of a deformed generator.
    Dissipator {
        zeta: Complex64,
        zeta_tilde: Complex64,
    },
    Adjoint,
    Exponential {
        t: f64,
    },
    Map,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Lindblad => f.write_str("lindblad"),
            Provenance::Deformed { zeta, zeta_tilde } => write!(f, "deformed(ζ={zeta}, ζ̃={zeta_tilde})"),
            Provenance::Dissipator { zeta, zeta_tilde } => write!(f, "dissipator(ζ={zeta}, ζ̃={zeta_tilde})"),
            Provenance::Adjoint => f.write_str("adjoint"),
            Provenance::Exponential { t } => write!(f, "exponential(t={t})"),
            Provenance::Map => f.write_str("map"),
        }
    }
}

/// A linear map on `d × d` matrices, given by how it acts and how its dual
/// acts under the bilinear pairing `⟨A, λ⟩ = Tr(Aλ)`.
pub trait LinearMap: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &CMat) -> CMat;
    /// `Φ′` with `Tr(Φ′(A)·λ) = Tr(A·Φ(λ))`.
    fn apply_dual(&self, a: &CMat) -> CMat;
}

/// Dense `d² × d²` matrix acting on row-major vectorized operators.
#[derive(Debug, Clone)]
pub struct Superoperator {
    matrix: CMat,
    dim: usize,
    provenance: Provenance,
}

impl Superoperator {
    pub fn new(matrix: CMat, dim: usize, provenance: Provenance) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "superoperator on {dim}x{dim} matrices must be {n}x{n}, got {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                n = dim * dim
            )));
        }
        Ok(Superoperator { matrix, dim, provenance })
    }

    pub fn identity(dim: usize) -> Self {
        Superoperator { matrix: CMat::identity(dim * dim, dim * dim), dim, provenance: Provenance::Map }
    }

    /// `λ ↦ AλB`.
    pub fn sandwich(a: &CMat, b: &CMat) -> Self {
        let dim = a.nrows();
        Superoperator { matrix: kron(a, &b.transpose()), dim, provenance: Provenance::Map }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn apply_vec(&self, v: &CVec) -> CVec {
        &self.matrix * v
    }

    /// Matrix of the dual map: `P·Mᵀ·P` with `P` the transpose permutation.
    pub fn dual_matrix(&self) -> CMat {
        let d = self.dim;
        let n = d * d;
        let m = &self.matrix;
        CMat::from_fn(n, n, |r, c| {
            let (i, j) = (r / d, r % d);
            let (k, l) = (c / d, c % d);
            m[(l * d + k, j * d + i)]
        })
    }

    /// Flat debugging dump: `{"dims": [rows, cols], "d": d, "provenance": …,
    /// "re": [...], "im": [...]}` with entries in row-major order.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Dump {
            dims: [usize; 2],
            d: usize,
            provenance: String,
            re: Vec<f64>,
            im: Vec<f64>,
        }
        let n = self.matrix.nrows();
        let mut re = Vec::with_capacity(n * n);
        let mut im = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                let z = self.matrix[(r, c)];
                re.push(z.re);
                im.push(z.im);
            }
        }
        serde_json::to_value(Dump { dims: [n, n], d: self.dim, provenance: self.provenance.to_string(), re, im })
            .expect("plain data serializes")
    }
}

impl LinearMap for Superoperator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &CMat) -> CMat {
        unvec(&(&self.matrix * vec_of(x)), self.dim)
    }

    fn apply_dual(&self, a: &CMat) -> CMat {
        // vec(Φ′(A)ᵀ) = Mᵀ vec(Aᵀ)
        let v = self.matrix.tr_mul(&vec_of(&a.transpose()));
        unvec(&v, self.dim).transpose()
    }
}

/// Row-major vectorization.
pub fn vec_of(rho: &CMat) -> CVec {
    let d = rho.nrows();
    CVec::from_fn(d * rho.ncols(), |k, _| rho[(k / rho.ncols(), k % rho.ncols())])
}

/// Inverse of [`vec_of`] for square matrices.
pub fn unvec(v: &CVec, d: usize) -> CMat {
    assert_eq!(v.len(), d * d, "unvec: length {} is not {d}²", v.len());
    CMat::from_fn(d, d, |i, j| v[i * d + j])
}

fn dissipator_terms(out: &mut CMat, left: &CMat, right: &CMat, left_sq: &CMat, right_sq: &CMat) {
    // left·λ·right − ½ left_sq·λ − ½ λ·right_sq
    let d = left.nrows();
    let id = CMat::identity(d, d);
    *out += kron(left, &right.transpose());
    *out -= kron(left_sq, &id) * c64(0.5, 0.0);
    *out -= kron(&id, &right_sq.transpose()) * c64(0.5, 0.0);
}

fn hamiltonian_part(h_left: &CMat, h_right: &CMat) -> CMat {
    let d = h_left.nrows();
    let id = CMat::identity(d, d);
    (kron(h_left, &id) - kron(&id, &h_right.transpose())) * (-I)
}

/// `L(ρ) = −i[H, ρ] + Σ_j (W_j ρ W_j* − ½{W_j*W_j, ρ})` from explicit data.
pub fn lindbladian_from(h: &CMat, jumps: &[CMat]) -> Superoperator {
    let d = h.nrows();
    let mut m = hamiltonian_part(h, h);
    for w in jumps {
        let wd = w.adjoint();
        let sq = matmul(&wd, w);
        dissipator_terms(&mut m, w, &wd, &sq, &sq);
    }
    Superoperator { matrix: m, dim: d, provenance: Provenance::Lindblad }
}

pub fn build_lindbladian(model: &LatticeModel) -> Superoperator {
    lindbladian_from(build_hamiltonian(model).matrix(), model.jump_operators())
}

/// Hamiltonian and dissipative parts of `L_{ζ,ζ̃}`.
///
/// `L₀(λ) = −i(H_ζ λ − λ H_ζ̃)` and
/// `G(λ) = Σ_j W_{j,ζ} λ (W_j*)_ζ̃ − ½ (W_j*)_ζ W_{j,ζ} λ − ½ λ (W_j*)_ζ̃ W_{j,ζ̃}`.
pub fn deformed_parts(
    model: &LatticeModel,
    zeta: &DeformationParam,
    zeta_tilde: &DeformationParam,
) -> (Superoperator, Superoperator) {
    let d = model.n_sites();
    let b = model.boundary();
    let (z, zt) = (zeta.zeta(), zeta_tilde.zeta());
    let h = build_hamiltonian(model);
    let l0 = hamiltonian_part(deform_matrix(&h, z, b).matrix(), deform_matrix(&h, zt, b).matrix());
    let mut g = CMat::zeros(d * d, d * d);
    for w in model.jump_operators() {
        let w = OperatorMatrix::general(w.clone());
        let wd = w.adjoint();
        let w_z = deform_matrix(&w, z, b).into_matrix();
        let w_zt = deform_matrix(&w, zt, b).into_matrix();
        let wd_z = deform_matrix(&wd, z, b).into_matrix();
        let wd_zt = deform_matrix(&wd, zt, b).into_matrix();
        dissipator_terms(&mut g, &w_z, &wd_zt, &matmul(&wd_z, &w_z), &matmul(&wd_zt, &w_zt));
    }
    (
        Superoperator { matrix: l0, dim: d, provenance: Provenance::Deformed { zeta: z, zeta_tilde: zt } },
        Superoperator { matrix: g, dim: d, provenance: Provenance::Dissipator { zeta: z, zeta_tilde: zt } },
    )
}

/// `L_{ζ,ζ̃}`; on open chains this equals `T_{ζ,ζ̃} L T_{ζ,ζ̃}⁻¹` with
/// `T_{ζ,ζ̃}λ = e^{−iζx} λ e^{iζ̃x}`.
pub fn build_deformed_generator(
    model: &LatticeModel,
    zeta: &DeformationParam,
    zeta_tilde: &DeformationParam,
) -> Result<Superoperator> {
    for p in [zeta, zeta_tilde] {
        model.deformation(p.zeta())?;
    }
    let (l0, g) = deformed_parts(model, zeta, zeta_tilde);
    let provenance = l0.provenance;
    Ok(Superoperator { matrix: l0.matrix + g.matrix, dim: model.n_sites(), provenance })
}

/// Convenience for `L_{iη, −iη}`.
pub fn deformed_generator_imag(model: &LatticeModel, eta: f64) -> Result<Superoperator> {
    let z = model.deformation(c64(0.0, eta))?;
    let zt = model.deformation(c64(0.0, -eta))?;
    build_deformed_generator(model, &z, &zt)
}

/// `T_{ζ,ζ̃}`: `λ ↦ e^{−iζx} λ e^{iζ̃x}`.
pub fn weight_map(n_sites: usize, zeta: Complex64, zeta_tilde: Complex64) -> Superoperator {
    let left = CMat::from_fn(n_sites, n_sites, |i, j| if i == j { (-I * zeta * i as f64).exp() } else { ZERO });
    let right = CMat::from_fn(n_sites, n_sites, |i, j| if i == j { (I * zeta_tilde * i as f64).exp() } else { ZERO });
    Superoperator::sandwich(&left, &right)
}

/// Heisenberg dual `L′` with `Tr(L′(A)·λ) = Tr(A·L(λ))`.
pub fn adjoint_generator(l: &Superoperator) -> Superoperator {
    Superoperator { matrix: l.dual_matrix(), dim: l.dim, provenance: Provenance::Adjoint }
}

/// `G̃_ζ` for purely imaginary `ζ`, together with the Hermiticity defect
/// `max|G − G*|` measured before symmetrization.
pub fn build_gtilde_with_defect(model: &LatticeModel, zeta: &DeformationParam) -> Result<(OperatorMatrix, f64)> {
    let z = zeta.zeta();
    if z.re != 0.0 {
        return Err(Error::NonImaginary { re: z.re });
    }
    model.deformation(z)?;
    let d = model.n_sites();
    let b = model.boundary();
    let mut g = CMat::zeros(d, d);
    for w in model.jump_operators() {
        let w = OperatorMatrix::general(w.clone());
        let wp = deform_matrix(&w, z, b).into_matrix();
        let wm = deform_matrix(&w, -z, b).into_matrix();
        let (wpd, wmd) = (wp.adjoint(), wm.adjoint());
        g += matmul(&wpd, &wp) - (matmul(&wmd, &wp) + matmul(&wpd, &wm)) * c64(0.5, 0.0);
    }
    g *= c64(0.5, 0.0);
    let defect = crate::linalg::hermiticity_defect(&g);
    Ok((OperatorMatrix::symmetrized(g), defect))
}

/// `G̃_ζ = ½ Σ_j (W_{j,ζ}*W_{j,ζ} − ½ W_{j,−ζ}*W_{j,ζ} − ½ W_{j,ζ}*W_{j,−ζ})`.
pub fn build_gtilde(model: &LatticeModel, zeta: &DeformationParam) -> Result<OperatorMatrix> {
    build_gtilde_with_defect(model, zeta).map(|(g, _)| g)
}

/// `G̃′ = ½ Σ_j i(W_j* W_j′ − W_j′* W_j)` with `W_j′ = −i[x, W_j]`, which is
/// the derivative of `G̃_{iη}` at `η = 0`.
pub fn build_gprime(model: &LatticeModel) -> OperatorMatrix {
    let d = model.n_sites();
    let x = position_operator(d);
    let mut g = CMat::zeros(d, d);
    for w in model.jump_operators() {
        let wprime = (matmul(&x, w) - matmul(w, &x)) * (-I);
        let wd = w.adjoint();
        g += (matmul(&wd, &wprime) - matmul(&wprime.adjoint(), w)) * I;
    }
    OperatorMatrix::symmetrized(g * c64(0.5, 0.0))
}
