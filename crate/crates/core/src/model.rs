// SPDX-License-Identifier: Apache-2.0

//! Finite lattice models: tight-binding Hamiltonians, jump-operator families
//! and the exponential deformation `A ↦ T_ζ A T_ζ⁻¹`.
//!
//! Sites are labelled `0..d` and the one-particle Hilbert space is `ℂ^d` in
//! the position basis. The hopping kernel is stored by offset, `H[x, y] =
//! t_{x−y} + δ_{xy} V(x)`, and the deformation multiplies each entry by
//! `e^{−iζ(x−y)}`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, hermiticity_defect, max_abs, CMat, I, ZERO};

/// Relative tolerance for the Hermitian tag of an [`OperatorMatrix`].
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Open => f.write_str("open"),
            Boundary::Periodic => f.write_str("periodic"),
        }
    }
}

impl Boundary {
    /// Signed displacement `x − y` entering the deformation phase.
    ///
    /// Periodic chains use the minimal image in `(−d/2, d/2)`. The antipodal
    /// displacement of an even ring has no preferred sign and is mapped to 0,
    /// which keeps the map odd (`disp(y, x) = −disp(x, y)`).
    pub fn displacement(self, x: usize, y: usize, n_sites: usize) -> i64 {
        let raw = x as i64 - y as i64;
        match self {
            Boundary::Open => raw,
            Boundary::Periodic => {
                let d = n_sites as i64;
                let k = raw.rem_euclid(d);
                match (2 * k).cmp(&d) {
                    std::cmp::Ordering::Less => k,
                    std::cmp::Ordering::Greater => k - d,
                    std::cmp::Ordering::Equal => 0,
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hermiticity {
    Hermitian,
    General,
}

/// Dense `d × d` complex matrix tagged with its Hermiticity.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    entries: CMat,
    tag: Hermiticity,
}

impl OperatorMatrix {
    pub fn general(entries: CMat) -> Self {
        assert!(entries.is_square(), "operator matrices are square");
        OperatorMatrix { entries, tag: Hermiticity::General }
    }

    /// Tags `entries` as Hermitian after checking `max|A − A*| ≤ 1e−12·max|A|`.
    pub fn hermitian(entries: CMat) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch(format!("{}x{} is not square", entries.nrows(), entries.ncols())));
        }
        let residual = hermiticity_defect(&entries);
        let tolerance = HERMITIAN_TOL * max_abs(&entries);
        if residual > tolerance {
            return Err(Error::NotHermitian { residual, tolerance });
        }
        Ok(OperatorMatrix { entries, tag: Hermiticity::Hermitian })
    }

    /// Symmetrizes to `(A + A*)/2` and tags the result Hermitian.
    pub fn symmetrized(entries: CMat) -> Self {
        OperatorMatrix { entries: crate::linalg::hermitian_part(&entries), tag: Hermiticity::Hermitian }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.entries
    }

    pub fn into_matrix(self) -> CMat {
        self.entries
    }

    pub fn tag(&self) -> Hermiticity {
        self.tag
    }

    pub fn is_hermitian(&self) -> bool {
        self.tag == Hermiticity::Hermitian
    }

    pub fn adjoint(&self) -> Self {
        OperatorMatrix { entries: self.entries.adjoint(), tag: self.tag }
    }
}

/// Complex deformation parameter `ζ = ξ + iη` together with the strip width
/// `a` it must respect (`|Im ζ| < a`). An infinite width stands for
/// finite-range hopping, where every `ζ` is admissible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformationParam {
    zeta: Complex64,
    width: f64,
}

impl DeformationParam {
    pub fn new(zeta: Complex64, width: f64) -> Result<Self> {
        if !(zeta.re.is_finite() && zeta.im.is_finite()) || zeta.im.abs() >= width {
            return Err(Error::OutsideStrip { zeta: format!("{zeta}"), width });
        }
        Ok(DeformationParam { zeta, width })
    }

    /// `ζ = iη`.
    pub fn imaginary(eta: f64, width: f64) -> Result<Self> {
        Self::new(c64(0.0, eta), width)
    }

    pub fn zeta(&self) -> Complex64 {
        self.zeta
    }

    pub fn width(&self) -> f64 {
        self.width
    }
}

/// `A_ζ[x, y] = A[x, y] · e^{−iζ·disp(x, y)}`.
///
/// For open chains this is exactly `T_ζ A T_ζ⁻¹` with `T_ζ` the
/// multiplication by `e^{−iζx}`; the map is entire in `ζ` and satisfies the
/// group law `(A_{ζ₁})_{ζ₂} = A_{ζ₁+ζ₂}` for either boundary.
pub fn deform_matrix(a: &OperatorMatrix, zeta: Complex64, boundary: Boundary) -> OperatorMatrix {
    let d = a.dim();
    let m = a.matrix();
    let out = CMat::from_fn(d, d, |x, y| {
        let v = m[(x, y)];
        if v == ZERO {
            return ZERO;
        }
        let r = boundary.displacement(x, y, d) as f64;
        v * (-I * zeta * r).exp()
    });
    // real ξ is a unitary conjugation and keeps Hermiticity
    let tag = if zeta.im == 0.0 { a.tag() } else { Hermiticity::General };
    OperatorMatrix { entries: out, tag }
}

/// `Im A = (A − A*)/(2i)`.
pub fn imag_part(a: &OperatorMatrix) -> OperatorMatrix {
    let m = a.matrix();
    let diff = m - m.adjoint();
    let out = diff * (c64(0.5, 0.0) / I);
    OperatorMatrix::symmetrized(out)
}

/// Position operator `x = diag(0, 1, …, d−1)`.
pub fn position_operator(n_sites: usize) -> CMat {
    CMat::from_fn(n_sites, n_sites, |i, j| if i == j { c64(i as f64, 0.0) } else { ZERO })
}

/// One entry of the JSON hopping list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoppingEntry {
    pub offset: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// A jump-operator family as written in a model file.
///
/// Dephasing realizes `√γ|x⟩⟨x|` and hop realizes `√γ|x⟩⟨x+s|` with
/// direction `s = ±1`. When `site` is omitted the family covers every site
/// (dephasing) or every bond in the given direction (hop).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum JumpSpec {
    Dephasing {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        site: Option<usize>,
        rate: f64,
    },
    Hop {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        site: Option<usize>,
        direction: i8,
        rate: f64,
    },
    Custom {
        re: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        im: Option<Vec<Vec<f64>>>,
    },
}

impl JumpSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            JumpSpec::Dephasing { .. } => "dephasing",
            JumpSpec::Hop { .. } => "hop",
            JumpSpec::Custom { .. } => "custom",
        }
    }

    /// Builds a custom jump from a dense matrix.
    pub fn custom(m: &CMat) -> Self {
        let re = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect()).collect();
        let im = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].im).collect()).collect();
        JumpSpec::Custom { re, im: Some(im) }
    }

    fn realize(&self, n_sites: usize, boundary: Boundary) -> Result<Vec<CMat>> {
        let check_rate = |rate: f64| {
            if rate.is_finite() && rate >= 0.0 {
                Ok(rate)
            } else {
                Err(Error::InvalidJump(format!("rate must be finite and non-negative, got {rate}")))
            }
        };
        let check_site = |site: usize| {
            if site < n_sites {
                Ok(site)
            } else {
                Err(Error::SiteOutOfRange { site, n_sites })
            }
        };
        match self {
            JumpSpec::Dephasing { site, rate } => {
                let amp = check_rate(*rate)?.sqrt();
                let sites: Vec<usize> = match site {
                    Some(s) => vec![check_site(*s)?],
                    None => (0..n_sites).collect(),
                };
                Ok(sites.into_iter().map(|x| single_entry(n_sites, x, x, amp)).collect())
            }
            JumpSpec::Hop { site, direction, rate } => {
                let amp = check_rate(*rate)?.sqrt();
                if *direction != 1 && *direction != -1 {
                    return Err(Error::InvalidJump(format!("hop direction must be ±1, got {direction}")));
                }
                let target = |x: usize| -> Option<usize> {
                    let y = x as i64 + *direction as i64;
                    match boundary {
                        Boundary::Open => (0..n_sites as i64).contains(&y).then_some(y as usize),
                        Boundary::Periodic => (n_sites > 1).then(|| y.rem_euclid(n_sites as i64) as usize),
                    }
                };
                match site {
                    Some(s) => {
                        let x = check_site(*s)?;
                        let y = target(x).ok_or_else(|| {
                            Error::InvalidJump(format!(
                                "hop from site {x} in direction {direction} leaves the open chain"
                            ))
                        })?;
                        Ok(vec![single_entry(n_sites, x, y, amp)])
                    }
                    None => {
                        Ok((0..n_sites).filter_map(|x| target(x).map(|y| single_entry(n_sites, x, y, amp))).collect())
                    }
                }
            }
            JumpSpec::Custom { re, im } => {
                if re.len() != n_sites || re.iter().any(|row| row.len() != n_sites) {
                    return Err(Error::InvalidJump(format!("custom matrix must be {n_sites}x{n_sites}")));
                }
                if let Some(im) = im {
                    if im.len() != n_sites || im.iter().any(|row| row.len() != n_sites) {
                        return Err(Error::InvalidJump(format!("custom imaginary part must be {n_sites}x{n_sites}")));
                    }
                }
                let m = CMat::from_fn(n_sites, n_sites, |i, j| {
                    let b = im.as_ref().map_or(0.0, |im| im[i][j]);
                    c64(re[i][j], b)
                });
                if !crate::linalg::all_finite(&m) {
                    return Err(Error::InvalidJump("custom matrix has non-finite entries".into()));
                }
                Ok(vec![m])
            }
        }
    }
}

fn single_entry(n: usize, row: usize, col: usize, value: f64) -> CMat {
    let mut m = CMat::zeros(n, n);
    m[(row, col)] = c64(value, 0.0);
    m
}

/// The documented JSON form of a lattice model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDescription {
    pub n_sites: usize,
    pub boundary: Boundary,
    #[serde(default)]
    pub hopping: Vec<HoppingEntry>,
    /// On-site potential, one value per site; empty means zero.
    #[serde(default)]
    pub potential: Vec<f64>,
    /// Declared decay rate `a` of the hopping kernel; `null` or absent means
    /// finite range (`a = ∞`).
    #[serde(default)]
    pub decay_rate: Option<f64>,
    /// Optional constant `C` of the envelope `|t_r| ≤ C e^{−a|r|}`; when
    /// given, every stored offset is checked against it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_prefactor: Option<f64>,
    #[serde(default)]
    pub jumps: Vec<JumpSpec>,
    /// Width `w` of a uniform `[−w/2, w/2]` disorder added to the potential.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disorder: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

/// Validated finite chain with Hamiltonian data and realized jump operators.
#[derive(Debug, Clone)]
pub struct LatticeModel {
    description: ModelDescription,
    hopping: BTreeMap<i64, Complex64>,
    potential: Vec<f64>,
    jumps: Vec<CMat>,
}

impl LatticeModel {
    pub fn new(description: ModelDescription) -> Result<Self> {
        let d = description.n_sites;
        if d == 0 {
            return Err(Error::InvalidParameter("n_sites must be positive".into()));
        }
        let mut hopping = BTreeMap::new();
        for h in &description.hopping {
            if h.offset == 0 {
                return Err(Error::InvalidParameter("hopping offset 0 belongs in the potential".into()));
            }
            if h.offset.unsigned_abs() as usize >= d {
                return Err(Error::InvalidParameter(format!("hopping offset {} does not fit in {d} sites", h.offset)));
            }
            if !(h.re.is_finite() && h.im.is_finite()) {
                return Err(Error::InvalidParameter(format!("hopping at offset {} is not finite", h.offset)));
            }
            if hopping.insert(h.offset, c64(h.re, h.im)).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate hopping offset {}", h.offset)));
            }
        }
        let scale = hopping.values().map(|t| t.norm()).fold(0.0, f64::max);
        for (&r, &t) in &hopping {
            let partner = hopping.get(&-r).copied().unwrap_or(ZERO);
            if (partner - t.conj()).norm() > HERMITIAN_TOL * scale.max(1.0) {
                return Err(Error::NonHermitianHopping { offset: r });
            }
        }
        if let Some(a) = description.decay_rate {
            if !(a > 0.0) {
                return Err(Error::InvalidParameter(format!("decay_rate must be positive, got {a}")));
            }
            if let Some(c) = description.decay_prefactor {
                for (&r, &t) in &hopping {
                    let envelope = c * (-a * r.unsigned_abs() as f64).exp();
                    if t.norm() > envelope * (1.0 + 1e-12) {
                        return Err(Error::DecayViolation { offset: r, modulus: t.norm(), envelope, decay_rate: a });
                    }
                }
            }
        }
        let mut potential = match description.potential.len() {
            0 => vec![0.0; d],
            n if n == d => description.potential.clone(),
            n => {
                return Err(Error::InvalidParameter(format!("potential has {n} entries, expected {d}")));
            }
        };
        if potential.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("potential has non-finite entries".into()));
        }
        if let Some(w) = description.disorder {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidParameter(format!("disorder width must be non-negative, got {w}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(description.seed);
            for v in &mut potential {
                *v += w * (rng.random::<f64>() - 0.5);
            }
        }
        let mut jumps = Vec::new();
        for spec in &description.jumps {
            jumps.extend(spec.realize(d, description.boundary)?);
        }
        if jumps.len() > 4 * d {
            return Err(Error::InvalidParameter(format!(
                "{} jump operators exceed the limit 4d = {}",
                jumps.len(),
                4 * d
            )));
        }
        Ok(LatticeModel { description, hopping, potential, jumps })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::new(serde_json::from_str(s)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn description(&self) -> &ModelDescription {
        &self.description
    }

    pub fn n_sites(&self) -> usize {
        self.description.n_sites
    }

    pub fn boundary(&self) -> Boundary {
        self.description.boundary
    }

    /// Strip width `a`; `f64::INFINITY` for finite-range hopping.
    pub fn decay_rate(&self) -> f64 {
        self.description.decay_rate.unwrap_or(f64::INFINITY)
    }

    pub fn hopping(&self) -> &BTreeMap<i64, Complex64> {
        &self.hopping
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// Realized jump operators `W_j`.
    pub fn jump_operators(&self) -> &[CMat] {
        &self.jumps
    }

    /// Number of realized jump operators per family kind.
    pub fn jump_inventory(&self) -> BTreeMap<&'static str, usize> {
        let mut counts = BTreeMap::new();
        for spec in &self.description.jumps {
            let n = spec.realize(self.n_sites(), self.boundary()).map_or(0, |w| w.len());
            *counts.entry(spec.kind_name()).or_insert(0) += n;
        }
        counts
    }

    pub fn deformation(&self, zeta: Complex64) -> Result<DeformationParam> {
        DeformationParam::new(zeta, self.decay_rate())
    }

    pub fn deform(&self, a: &OperatorMatrix, zeta: &DeformationParam) -> OperatorMatrix {
        deform_matrix(a, zeta.zeta(), self.boundary())
    }

    /// `Some(V)` when the potential is the same on every site.
    pub fn constant_potential(&self) -> Option<f64> {
        let v0 = self.potential[0];
        self.potential.iter().all(|&v| v == v0).then_some(v0)
    }

    /// Same model on `n` sites, available when the potential is constant,
    /// there is no disorder and every jump family is site-uniform.
    pub fn uniform_resized(&self, n: usize) -> Result<Self> {
        let v = self
            .constant_potential()
            .ok_or_else(|| Error::Unsupported("resizing requires a constant potential".into()))?;
        if self.description.disorder.is_some() {
            return Err(Error::Unsupported("resizing a disordered model is not defined".into()));
        }
        let uniform = self.description.jumps.iter().all(|j| match j {
            JumpSpec::Dephasing { site, .. } | JumpSpec::Hop { site, .. } => site.is_none(),
            JumpSpec::Custom { .. } => false,
        });
        if !uniform {
            return Err(Error::Unsupported("resizing requires site-uniform jump families".into()));
        }
        let mut description = self.description.clone();
        description.n_sites = n;
        description.potential = vec![v; n];
        Self::new(description)
    }
}

/// `H[x, y] = t_{x−y} + δ_{xy} V(x)`, with offsets wrapped around the ring
/// for periodic chains.
pub fn build_hamiltonian(model: &LatticeModel) -> OperatorMatrix {
    let d = model.n_sites();
    let mut h = CMat::zeros(d, d);
    for (x, &v) in model.potential().iter().enumerate() {
        h[(x, x)] = c64(v, 0.0);
    }
    for (&r, &t) in model.hopping() {
        for x in 0..d {
            let y = x as i64 - r;
            let y = match model.boundary() {
                Boundary::Open if (0..d as i64).contains(&y) => y as usize,
                Boundary::Open => continue,
                Boundary::Periodic => y.rem_euclid(d as i64) as usize,
            };
            h[(x, y)] += t;
        }
    }
    OperatorMatrix::hermitian(h).expect("validated hopping yields a Hermitian matrix")
}

/// Reference models with closed-form bound ingredients.
pub mod catalog {
    use super::*;

    fn nearest_neighbour() -> Vec<HoppingEntry> {
        vec![HoppingEntry { offset: -1, re: -1.0, im: 0.0 }, HoppingEntry { offset: 1, re: -1.0, im: 0.0 }]
    }

    fn chain(n: usize, boundary: Boundary, jumps: Vec<JumpSpec>) -> ModelDescription {
        ModelDescription {
            n_sites: n,
            boundary,
            hopping: nearest_neighbour(),
            potential: Vec::new(),
            decay_rate: None,
            decay_prefactor: None,
            jumps,
            disorder: None,
            seed: 0,
        }
    }

    /// (i) open chain, `t = −1`, `V = 0`, no jumps.
    pub fn free_chain(n: usize) -> LatticeModel {
        LatticeModel::new(chain(n, Boundary::Open, Vec::new())).expect("catalog model is valid")
    }

    /// Periodic variant of (i); its dispersion is `ω(k) = −2 cos k`.
    pub fn periodic_free_chain(n: usize) -> LatticeModel {
        LatticeModel::new(chain(n, Boundary::Periodic, Vec::new())).expect("catalog model is valid")
    }

    /// (ii) free chain plus dephasing `√γ|x⟩⟨x|` on every site.
    pub fn dephasing_chain(n: usize, gamma: f64) -> LatticeModel {
        LatticeModel::new(chain(n, Boundary::Open, vec![JumpSpec::Dephasing { site: None, rate: gamma }]))
            .expect("catalog model is valid")
    }

    /// (iii) free chain plus directed hops `√γ|x⟩⟨x+1|` on every bond.
    pub fn hopping_chain(n: usize, gamma: f64) -> LatticeModel {
        LatticeModel::new(chain(n, Boundary::Open, vec![JumpSpec::Hop { site: None, direction: 1, rate: gamma }]))
            .expect("catalog model is valid")
    }

    /// (iv) free chain with a seeded uniform potential of width `w`.
    pub fn disordered_chain(n: usize, width: f64, seed: u64) -> LatticeModel {
        let mut desc = chain(n, Boundary::Open, Vec::new());
        desc.disorder = Some(width);
        desc.seed = seed;
        LatticeModel::new(desc).expect("catalog model is valid")
    }

    /// The four reference models at size `n` (dephasing and hop rate 0.5,
    /// disorder width 2, seed 7).
    pub fn all(n: usize) -> Vec<(&'static str, LatticeModel)> {
        vec![
            ("free", free_chain(n)),
            ("dephasing", dephasing_chain(n, 0.5)),
            ("hop", hopping_chain(n, 0.5)),
            ("disordered", disordered_chain(n, 2.0, 7)),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigvalsh;
    use approx::assert_abs_diff_eq;

    fn desc(n: usize, hopping: Vec<HoppingEntry>, potential: Vec<f64>) -> ModelDescription {
        ModelDescription {
            n_sites: n,
            boundary: Boundary::Open,
            hopping,
            potential,
            decay_rate: Some(1.0),
            decay_prefactor: None,
            jumps: Vec::new(),
            disorder: None,
            seed: 0,
        }
    }

    fn nn() -> Vec<HoppingEntry> {
        vec![HoppingEntry { offset: 1, re: -1.0, im: 0.0 }, HoppingEntry { offset: -1, re: -1.0, im: 0.0 }]
    }

    #[test]
    fn discrete_laplacian_assembly() {
        let m = LatticeModel::new(desc(3, nn(), vec![2.0; 3])).unwrap();
        let h = build_hamiltonian(&m);
        let expect = [[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(h.matrix()[(i, j)], c64(expect[i][j], 0.0));
            }
        }
        assert!(h.is_hermitian());
    }

    #[test]
    fn empty_hopping_is_diagonal() {
        let m = LatticeModel::new(desc(2, vec![], vec![1.0, 2.0])).unwrap();
        let h = build_hamiltonian(&m);
        assert_eq!(h.matrix(), &CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c64(1.0, 0.0), c64(2.0, 0.0)])));
    }

    #[test]
    fn periodic_ring_spectrum_matches_dft() {
        let m = catalog::periodic_free_chain(4);
        let ev = eigvalsh(build_hamiltonian(&m).matrix());
        let mut expect: Vec<f64> = (0..4).map(|k| -2.0 * (2.0 * std::f64::consts::PI * k as f64 / 4.0).cos()).collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&expect) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(ev[0], -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[3], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_non_hermitian_hopping() {
        let bad = vec![HoppingEntry { offset: 1, re: -1.0, im: 0.5 }, HoppingEntry { offset: -1, re: -1.0, im: 0.5 }];
        match LatticeModel::new(desc(4, bad, vec![])) {
            Err(Error::NonHermitianHopping { offset }) => assert!(offset == 1 || offset == -1),
            other => panic!("expected rejection, got {other:?}"),
        }
        let one_sided = vec![HoppingEntry { offset: 2, re: 0.3, im: 0.0 }];
        assert!(matches!(LatticeModel::new(desc(4, one_sided, vec![])), Err(Error::NonHermitianHopping { offset: 2 })));
    }

    #[test]
    fn decay_envelope_is_enforced_when_declared() {
        let mut d = desc(5, nn(), vec![]);
        d.decay_prefactor = Some(1.0);
        // |t_1| = 1 > 1·e^{−1}
        assert!(matches!(LatticeModel::new(d.clone()), Err(Error::DecayViolation { .. })));
        d.decay_prefactor = Some(3.0);
        assert!(LatticeModel::new(d).is_ok());
    }

    #[test]
    fn deform_diagonal_is_identity() {
        let a = OperatorMatrix::general(CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c64(1.0, 2.0),
            c64(-3.0, 0.0),
        ])));
        let b = deform_matrix(&a, c64(0.4, -0.7), Boundary::Open);
        assert_eq!(a.matrix(), b.matrix());
    }

    #[test]
    fn deform_single_entry_phase() {
        let mut m = CMat::zeros(2, 2);
        m[(0, 1)] = c64(1.0, 0.0);
        let b = deform_matrix(&OperatorMatrix::general(m), c64(0.0, 0.5), Boundary::Open);
        assert_abs_diff_eq!(b.matrix()[(0, 1)].re, (-0.5f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(b.matrix()[(0, 1)].im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn deform_nearest_neighbour_round_trip() {
        let h = build_hamiltonian(&catalog::free_chain(5));
        let z = c64(0.0, 0.3);
        let hz = deform_matrix(&h, z, Boundary::Open);
        for x in 0..4 {
            assert_abs_diff_eq!(hz.matrix()[(x, x + 1)].re, -(-0.3f64).exp(), epsilon = 1e-15);
            assert_abs_diff_eq!(hz.matrix()[(x + 1, x)].re, -(0.3f64).exp(), epsilon = 1e-15);
        }
        let back = deform_matrix(&hz, -z, Boundary::Open);
        assert!((back.matrix() - h.matrix()).norm() < 1e-14);
    }

    #[test]
    fn imag_part_definitions() {
        let h = build_hamiltonian(&catalog::free_chain(4));
        assert_eq!(imag_part(&h).matrix().norm(), 0.0);
        let ii = OperatorMatrix::general(CMat::identity(3, 3) * I);
        assert!((imag_part(&ii).matrix() - CMat::identity(3, 3)).norm() < 1e-15);
    }

    #[test]
    fn imag_part_top_eigenvalue_on_ring() {
        let m = catalog::periodic_free_chain(64);
        let h = build_hamiltonian(&m);
        let hz = deform_matrix(&h, c64(0.0, 0.5), Boundary::Periodic);
        let top = *eigvalsh(imag_part(&hz).matrix()).last().unwrap();
        assert_abs_diff_eq!(top, 2.0 * 0.5f64.sinh(), epsilon = 1e-6);
    }

    #[test]
    fn periodic_displacement_is_odd() {
        for d in [4usize, 5] {
            for x in 0..d {
                for y in 0..d {
                    assert_eq!(Boundary::Periodic.displacement(x, y, d), -Boundary::Periodic.displacement(y, x, d));
                }
            }
        }
        assert_eq!(Boundary::Periodic.displacement(0, 3, 4), 1);
        assert_eq!(Boundary::Periodic.displacement(0, 2, 4), 0);
    }

    #[test]
    fn jump_families_realize_expected_matrices() {
        let m = catalog::hopping_chain(4, 4.0);
        assert_eq!(m.jump_operators().len(), 3);
        assert_eq!(m.jump_operators()[1][(1, 2)], c64(2.0, 0.0));
        let m = catalog::dephasing_chain(4, 0.25);
        assert_eq!(m.jump_operators().len(), 4);
        assert_eq!(m.jump_operators()[3][(3, 3)], c64(0.5, 0.0));
    }

    #[test]
    fn strip_is_enforced() {
        assert!(DeformationParam::imaginary(0.99, 1.0).is_ok());
        assert!(matches!(DeformationParam::imaginary(1.0, 1.0), Err(Error::OutsideStrip { .. })));
        assert!(DeformationParam::imaginary(50.0, f64::INFINITY).is_ok());
    }

    #[test]
    fn json_round_trip_and_schema() {
        let text = r#"{
            "n_sites": 4, "boundary": "open",
            "hopping": [{"offset": 1, "re": -1.0, "im": 0.0}, {"offset": -1, "re": -1.0}],
            "potential": [0, 0, 0, 0], "decay_rate": 2.0,
            "jumps": [{"kind": "dephasing", "rate": 0.5},
                      {"kind": "hop", "site": 1, "direction": -1, "rate": 1.0},
                      {"kind": "custom", "re": [[0,1,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]]}],
            "seed": 3
        }"#;
        let m = LatticeModel::from_json_str(text).unwrap();
        assert_eq!(m.jump_operators().len(), 6);
        assert_eq!(m.jump_operators()[4][(1, 0)], c64(1.0, 0.0));
        let again = serde_json::to_string(m.description()).unwrap();
        let m2 = LatticeModel::from_json_str(&again).unwrap();
        assert_eq!(m2.description(), m.description());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"n_sites": 2, "boundary": "open", "hoping": []}"#;
        assert!(matches!(LatticeModel::from_json_str(text), Err(Error::Json(_))));
    }

    #[test]
    fn disorder_is_seeded() {
        let a = catalog::disordered_chain(8, 2.0, 11);
        let b = catalog::disordered_chain(8, 2.0, 11);
        let c = catalog::disordered_chain(8, 2.0, 12);
        assert_eq!(a.potential(), b.potential());
        assert_ne!(a.potential(), c.potential());
        assert!(a.potential().iter().all(|v| v.abs() <= 1.0));
        assert!(a.constant_potential().is_none());
    }

    #[test]
    fn jump_inventory_counts_realized_operators() {
        assert!(catalog::free_chain(6).jump_inventory().is_empty());
        assert_eq!(catalog::hopping_chain(6, 0.5).jump_inventory()["hop"], 5);
        assert_eq!(catalog::dephasing_chain(6, 0.5).jump_inventory()["dephasing"], 6);
    }
}
