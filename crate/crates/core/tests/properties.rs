// SPDX-License-Identifier: Apache-2.0

use lightcone::bounds::{format_sig, geometry_delta, velocity_c_prime, velocity_operator};
use lightcone::evolve::{exp_superoperator, min_eigenvalue, quadrants, trace_norm};
use lightcone::linalg::{c64, matmul, max_abs, op_norm, singular_values, trace, CMat};
use lightcone::liouvillian::{
    adjoint_generator, build_deformed_generator, build_gtilde_with_defect, build_lindbladian, weight_map, LinearMap,
};
use lightcone::model::{
    catalog, deform_matrix, imag_part, Boundary, HoppingEntry, JumpSpec, LatticeModel, ModelDescription, OperatorMatrix,
};
use lightcone::sampling::{ginibre, random_density, stream};
use lightcone::verify::{check_leakage_cone, check_subcp, LeakageParams, SubcpParams};
use num_complex::Complex64;
use proptest::prelude::*;

fn boundary() -> impl Strategy<Value = Boundary> {
    prop_oneof![Just(Boundary::Open), Just(Boundary::Periodic)]
}

fn zeta(max_im: f64) -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -max_im..max_im).prop_map(|(re, im)| c64(re, im))
}

fn rel(a: &CMat, b: &CMat) -> f64 {
    max_abs(&(a - b)) / max_abs(b).max(1e-300)
}

fn local_model(d: usize, seed: u64, boundary: Boundary) -> LatticeModel {
    let mut rng = stream(seed, 0);
    let jumps = (0..2)
        .map(|_| {
            let g = ginibre(d, d, &mut rng);
            JumpSpec::custom(&CMat::from_fn(
                d,
                d,
                |x, y| if x.abs_diff(y) <= 1 { g[(x, y)] * 0.5 } else { c64(0.0, 0.0) },
            ))
        })
        .collect();
    LatticeModel::new(ModelDescription {
        n_sites: d,
        boundary,
        hopping: vec![HoppingEntry { offset: 1, re: -1.0, im: 0.3 }, HoppingEntry { offset: -1, re: -1.0, im: -0.3 }],
        potential: (0..d).map(|x| (x as f64 * 0.7).sin()).collect(),
        decay_rate: None,
        decay_prefactor: None,
        jumps,
        disorder: None,
        seed: 0,
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn deformation_group_law(d in 2usize..8, seed in any::<u64>(), b in boundary(), z1 in zeta(0.6), z2 in zeta(0.6)) {
        let a = OperatorMatrix::general(ginibre(d, d, &mut stream(seed, 0)));
        let twice = deform_matrix(&deform_matrix(&a, z1, b), z2, b);
        let once = deform_matrix(&a, z1 + z2, b);
        prop_assert!(rel(twice.matrix(), once.matrix()) <= 1e-12);
    }

    #[test]
    fn real_deformation_keeps_singular_values(d in 2usize..8, seed in any::<u64>(), xi in -3.0..3.0f64) {
        let a = OperatorMatrix::general(ginibre(d, d, &mut stream(seed, 0)));
        let before = singular_values(a.matrix());
        let after = singular_values(deform_matrix(&a, c64(xi, 0.0), Boundary::Open).matrix());
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x - y).abs() <= 1e-12 * before[0].max(1e-300));
        }
    }

    #[test]
    fn conjugation_identity(d in 2usize..8, seed in any::<u64>(), b in boundary(), z in zeta(0.6)) {
        let a = OperatorMatrix::general(ginibre(d, d, &mut stream(seed, 0)));
        let lhs = deform_matrix(&a, z, b).adjoint();
        let rhs = deform_matrix(&a.adjoint(), z.conj(), b);
        prop_assert!(rel(lhs.matrix(), rhs.matrix()) <= 1e-12);
    }

    #[test]
    fn imaginary_part_is_hermitian(d in 1usize..8, seed in any::<u64>()) {
        let a = OperatorMatrix::general(ginibre(d, d, &mut stream(seed, 0)));
        let im = imag_part(&a);
        prop_assert!(im.is_hermitian());
        let m = im.matrix();
        prop_assert!(max_abs(&(m + m.adjoint() - m * c64(2.0, 0.0))) <= 1e-14 * max_abs(m).max(1.0));
    }

    #[test]
    fn geometry_identities(
        u in prop::collection::btree_set(0usize..40, 1..6),
        v in prop::collection::btree_set(0usize..40, 1..6),
        b in prop_oneof![Just(1i8), Just(-1i8)],
    ) {
        let (u, v): (Vec<usize>, Vec<usize>) = (u.into_iter().collect(), v.into_iter().collect());
        let width = |s: &[usize]| (s[s.len() - 1] - s[0]) as i64;
        let forward = geometry_delta(&u, &v, b).unwrap().delta;
        prop_assert_eq!(forward, geometry_delta(&v, &u, -b).unwrap().delta);
        let opposite = geometry_delta(&u, &v, -b).unwrap().delta;
        prop_assert_eq!(forward + opposite, -(width(&u) + width(&v)));
    }

    #[test]
    fn cauchy_schwarz_operator_bound(d in 1usize..6, count in 1usize..5, seed in any::<u64>()) {
        let mut rng = stream(seed, 0);
        let a: Vec<CMat> = (0..count).map(|_| ginibre(d, d, &mut rng)).collect();
        let b: Vec<CMat> = (0..count).map(|_| ginibre(d, d, &mut rng)).collect();
        let sum = |x: &[CMat], y: &[CMat]| x.iter().zip(y).fold(CMat::zeros(d, d), |acc, (p, q)| acc + matmul(&p.adjoint(), q));
        let lhs = op_norm(&sum(&a, &b));
        let rhs = op_norm(&sum(&a, &a)).sqrt() * op_norm(&sum(&b, &b)).sqrt();
        prop_assert!(rhs - lhs >= -1e-12 * rhs.max(1.0));
    }

    #[test]
    fn quadrant_parts_are_positive_and_small(d in 1usize..7, seed in any::<u64>()) {
        let lambda = ginibre(d, d, &mut stream(seed, 0));
        let q = quadrants(&lambda);
        prop_assert!(rel(&q.recombine(), &lambda) <= 1e-12);
        let norm = trace_norm(&lambda);
        for part in q.parts() {
            prop_assert!(min_eigenvalue(part).unwrap() >= -1e-12 * norm);
            prop_assert!(trace_norm(part) <= norm + 1e-10);
        }
    }

    #[test]
    fn format_sig_round_trips(x in prop::num::f64::NORMAL) {
        let parsed: f64 = format_sig(x, 12).parse().unwrap();
        prop_assert!((parsed - x).abs() <= 5e-12 * x.abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn real_deformation_is_conjugation(d in 2usize..6, seed in any::<u64>(), xi in -2.0..2.0f64, xt in -2.0..2.0f64) {
        let m = local_model(d, seed, Boundary::Open);
        let l = build_lindbladian(&m);
        let (z, zt) = (c64(xi, 0.0), c64(xt, 0.0));
        let deformed = build_deformed_generator(&m, &m.deformation(z).unwrap(), &m.deformation(zt).unwrap()).unwrap();
        let conj = weight_map(d, z, zt).matrix() * l.matrix() * weight_map(d, -z, -zt).matrix();
        prop_assert!(max_abs(&(deformed.matrix() - conj)) <= 1e-12 * max_abs(l.matrix()));
    }

    #[test]
    fn gtilde_is_self_adjoint(d in 2usize..7, seed in any::<u64>(), b in boundary(), eta in -1.0..1.0f64) {
        let m = local_model(d, seed, b);
        let (g, defect) = build_gtilde_with_defect(&m, &m.deformation(c64(0.0, eta)).unwrap()).unwrap();
        prop_assert!(defect <= 1e-12 * max_abs(g.matrix()).max(1e-300));
    }

    #[test]
    fn adjoint_generator_is_unital(d in 2usize..7, seed in any::<u64>(), b in boundary()) {
        let m = local_model(d, seed, b);
        let dual = adjoint_generator(&build_lindbladian(&m));
        let image = dual.apply(&CMat::identity(d, d));
        prop_assert!(max_abs(&image) <= 1e-12);
    }

    #[test]
    fn semigroup_law_and_duality(d in 2usize..6, seed in any::<u64>(), s in 0.1..1.5f64, t in 0.1..1.5f64) {
        let m = local_model(d, seed, Boundary::Open);
        let l = build_lindbladian(&m);
        let (es, et, est) = (exp_superoperator(&l, s).unwrap(), exp_superoperator(&l, t).unwrap(), exp_superoperator(&l, s + t).unwrap());
        prop_assert!(rel(&(es.matrix() * et.matrix()), est.matrix()) <= 1e-9);
        let mut rng = stream(seed, 1);
        let a = ginibre(d, d, &mut rng);
        let rho = random_density(d, d, &mut rng);
        let gap = (trace(&(et.apply_dual(&a) * &rho)) - trace(&(&a * et.apply(&rho)))).norm();
        prop_assert!(gap <= 1e-10 * op_norm(&a));
    }

    #[test]
    fn velocity_operator_is_hermitian(d in 3usize..8, seed in any::<u64>(), b in boundary(), eta in -0.9..0.9f64) {
        let m = local_model(d, seed, b);
        prop_assert!(velocity_operator(&m, eta).unwrap().is_hermitian());
    }
}

#[test]
fn free_chain_rate_is_monotone_on_grid() {
    for m in [catalog::free_chain(24), catalog::periodic_free_chain(24)] {
        let rates: Vec<f64> = [0.05, 0.1, 0.2, 0.4, 0.6, 0.8, 0.9, 1.5]
            .iter()
            .map(|&nu| nu * velocity_c_prime(&m, nu).unwrap().c_prime)
            .collect();
        assert!(rates.windows(2).all(|w| w[1] >= w[0]), "{rates:?}");
    }
}

#[test]
fn checkers_are_deterministic_and_idempotent() {
    let p = SubcpParams { instances: 12, ..Default::default() };
    assert_eq!(check_subcp(&p, 5).unwrap(), check_subcp(&p, 5).unwrap());
    assert_ne!(check_subcp(&p, 5).unwrap().samples, check_subcp(&p, 6).unwrap().samples);
    let m = catalog::dephasing_chain(9, 0.5);
    let lp = LeakageParams { x: vec![4], y: vec![0, 8], mu: None, eps: 0.2, times: vec![0.5, 1.0], states: 4 };
    let a = check_leakage_cone(&m, &lp, 3).unwrap();
    let b = check_leakage_cone(&m, &lp, 3).unwrap();
    assert_eq!(a.report.to_json_pretty(), b.report.to_json_pretty());
    assert_eq!(a.leakage, b.leakage);
}

#[test]
fn leakage_margins_shrink_with_distance() {
    // regression property on the free chain, not a theorem: the bound decays
    // in d_XY faster than the measured leakage does
    let m = catalog::free_chain(31);
    let mut previous = f64::INFINITY;
    for gap in [6, 8, 10, 12] {
        let y: Vec<usize> = (0..31).filter(|x: &usize| x.abs_diff(15) >= gap).collect();
        let p = LeakageParams { x: vec![15], y, mu: None, eps: 0.2, times: vec![1.0], states: 2 };
        let report = check_leakage_cone(&m, &p, 1).unwrap().report;
        let margin = report.samples.iter().map(|s| s.margin).fold(f64::INFINITY, f64::min);
        println!("d_XY = {gap}: min margin {margin:.6e}");
        assert!(report.passed());
        assert!(margin <= previous);
        previous = margin;
    }
}
