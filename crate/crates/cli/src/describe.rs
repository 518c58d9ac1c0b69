// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use lightcone::bounds::{default_nu_grid, format_sig, truncation_gap, velocity_c_prime};
use lightcone::linalg::{hermiticity_defect, op_norm};
use lightcone::liouvillian::build_gprime;
use lightcone::model::{build_hamiltonian, LatticeModel};

pub fn describe_path(path: &Path) -> Result<String> {
    let model = LatticeModel::from_path(path).with_context(|| format!("invalid model file {}", path.display()))?;
    describe(&model)
}

/// Plain-text summary of a model and its velocity constants.
pub fn describe(model: &LatticeModel) -> Result<String> {
    let mut s = String::new();
    let d = model.n_sites();
    writeln!(s, "sites: {d}")?;
    writeln!(s, "boundary: {}", model.boundary())?;
    let offsets: Vec<String> = model.hopping().keys().map(|r| r.to_string()).collect();
    writeln!(s, "hopping offsets: {}", if offsets.is_empty() { "none".into() } else { offsets.join(" ") })?;
    let a = model.decay_rate();
    if a.is_finite() {
        writeln!(s, "decay rate a: {}", format_sig(a, SIG))?;
    } else {
        writeln!(s, "decay rate a: finite range")?;
    }
    let inventory = model.jump_inventory();
    writeln!(s, "jumps: {}", model.jump_operators().len())?;
    for (kind, n) in &inventory {
        writeln!(s, "  {kind}: {n}")?;
    }
    let h = build_hamiltonian(model);
    writeln!(s, "hermiticity residual: {:.3e}", hermiticity_defect(h.matrix()))?;
    writeln!(s, "G'~ norm: {}", format_sig(op_norm(build_gprime(model).matrix()), SIG))?;
    writeln!(s, "c' on the default grid:")?;
    writeln!(s, "  nu c_prime truncation_gap")?;
    for nu in default_nu_grid(model) {
        let c = velocity_c_prime(model, nu)?.c_prime;
        let gap = match truncation_gap(model, nu) {
            Ok(g) => format_sig(g.gap, 6),
            Err(_) => "n/a".into(),
        };
        writeln!(s, "  {} {} {gap}", format_sig(nu, SIG), format_sig(c, SIG))?;
    }
    Ok(s)
}

const SIG: usize = 12;

#[cfg(test)]
mod tests {
    use super::*;
    use lightcone::model::catalog;

    #[test]
    fn free_chain_has_no_jumps() {
        let text = describe(&catalog::free_chain(8)).unwrap();
        assert!(text.contains("jumps: 0\n"), "{text}");
        assert!(text.contains("decay rate a: finite range"), "{text}");
        assert!(text.contains("G'~ norm: 0\n"), "{text}");
    }

    #[test]
    fn hop_chain_lists_bonds_and_gprime() {
        let text = describe(&catalog::hopping_chain(8, 0.7)).unwrap();
        assert!(text.contains("  hop: 7\n"), "{text}");
        let norm: f64 = text.lines().find_map(|l| l.strip_prefix("G'~ norm: ")).unwrap().parse().unwrap();
        assert!((norm - 0.7).abs() < 1e-12, "{norm}");
    }
}
