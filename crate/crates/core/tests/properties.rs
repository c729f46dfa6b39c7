use discord_core::correlations::{
    deficit_objective, discord_objective, information_deficit, quantum_discord, ObjectiveKernel,
};
use discord_core::entanglement::{geometric_cq_distance, measurement_entanglement, partial_entanglement};
use discord_core::linalg::{kron, C64};
use discord_core::measurement::{apply_projective, couple_apparatus, sequential_measure};
use discord_core::optimizer::{
    decode_basis, haar_random_unitary, minimize_single, restart_point, BasisParameterization, OptimizerConfig,
};
use discord_core::random::{ginibre_mixed, random_basis, random_cq};
use discord_core::state::{fidelity, partial_trace, relative_entropy, von_neumann_entropy};
use discord_core::ProjectiveBasis;
use proptest::prelude::*;

fn dims() -> impl Strategy<Value = (usize, usize)> {
    prop_oneof![Just((2, 2)), Just((2, 3)), Just((3, 2))]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn entropy_is_unitarily_invariant(seed in any::<u64>(), (da, db) in dims()) {
        let s = ginibre_mixed(&[da, db], da * db, seed).unwrap();
        let u = haar_random_unitary(da * db, seed ^ 1);
        let rotated = s.conjugate(&u).unwrap();
        prop_assert!((von_neumann_entropy(&rotated) - von_neumann_entropy(&s)).abs() <= 1e-9);
    }

    #[test]
    fn entropy_is_subadditive(seed in any::<u64>(), (da, db) in dims(), rank in 1usize..7) {
        let s = ginibre_mixed(&[da, db], rank.min(da * db), seed).unwrap();
        let a = partial_trace(&s, &[0]).unwrap();
        let b = partial_trace(&s, &[1]).unwrap();
        prop_assert!(von_neumann_entropy(&s) <= von_neumann_entropy(&a) + von_neumann_entropy(&b) + 1e-9);
    }

    #[test]
    fn partial_trace_commutes_with_mixing(seed in any::<u64>(), lambda in 0.0f64..=1.0) {
        let r = ginibre_mixed(&[2, 3], 6, seed).unwrap();
        let t = ginibre_mixed(&[2, 3], 3, seed ^ 7).unwrap();
        let lhs = partial_trace(&r.mix(&t, lambda).unwrap(), &[0]).unwrap();
        let rhs = partial_trace(&r, &[0]).unwrap().mix(&partial_trace(&t, &[0]).unwrap(), lambda).unwrap();
        prop_assert!(lhs.max_entry_distance(&rhs) <= 1e-12);
    }

    #[test]
    fn relative_entropy_and_fidelity_detect_equality(seed in any::<u64>()) {
        let r = ginibre_mixed(&[2, 2], 4, seed).unwrap();
        let t = ginibre_mixed(&[2, 2], 4, seed ^ 3).unwrap();
        prop_assert!(relative_entropy(&r, &t).unwrap() >= 0.0);
        prop_assert!(relative_entropy(&r, &r).unwrap().abs() <= 1e-9);
        prop_assert!((fidelity(&r, &r).unwrap() - 1.0).abs() <= 1e-9);
        prop_assert!(r.max_entry_distance(&t) > 1e-7);
        prop_assert!(fidelity(&r, &t).unwrap() < 1.0 - 1e-9);
        prop_assert!(relative_entropy(&r, &t).unwrap() > 1e-9);
    }

    #[test]
    fn projective_measurement_never_lowers_entropy(seed in any::<u64>(), (da, db) in dims(), rank in 1usize..7) {
        let s = ginibre_mixed(&[da, db], rank.min(da * db), seed).unwrap();
        let b = random_basis(da, seed ^ 5);
        let out = apply_projective(&s, &b, 0).unwrap();
        prop_assert!(von_neumann_entropy(&out) >= von_neumann_entropy(&s) - 1e-9);
    }

    #[test]
    fn apparatus_coupling_keeps_global_entropy(seed in any::<u64>(), (da, db) in dims(), rank in 1usize..7) {
        let s = ginibre_mixed(&[da, db], rank.min(da * db), seed).unwrap();
        let app = couple_apparatus(&s, &random_basis(da, seed ^ 9)).unwrap();
        prop_assert!((von_neumann_entropy(app.state()) - von_neumann_entropy(&s)).abs() <= 1e-9);
    }

    #[test]
    fn sequential_equals_product_basis(seed in any::<u64>()) {
        let s = ginibre_mixed(&[4, 2], 8, seed).unwrap();
        let parts = [random_basis(2, seed ^ 1), random_basis(2, seed ^ 2)];
        let seq = sequential_measure(&s, &[2, 2], &parts).unwrap();
        let direct = apply_projective(&s, &ProjectiveBasis::product(&parts), 0).unwrap();
        prop_assert!(seq.max_entry_distance(&direct) <= 1e-12);
    }

    #[test]
    fn no_bound_entanglement_in_a_measurement(seed in any::<u64>(), (da, db) in dims(), rank in 1usize..7) {
        let s = ginibre_mixed(&[da, db], rank.min(da * db), seed).unwrap();
        let b = random_basis(da, seed ^ 11);
        let cert = measurement_entanglement(&s, &b).unwrap();
        prop_assert!((cert.upper - cert.lower).abs() <= 1e-8);
        prop_assert!(cert.value >= partial_entanglement(&s, &b).unwrap() - 1e-9);
        prop_assert!((deficit_objective(&s, &b).unwrap() - cert.value).abs() <= 1e-9);
        prop_assert!((discord_objective(&s, &b).unwrap() - partial_entanglement(&s, &b).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn certificates_are_local_unitary_invariant(seed in any::<u64>(), (da, db) in dims()) {
        let s = ginibre_mixed(&[da, db], da * db, seed).unwrap();
        let b = random_basis(da, seed ^ 13);
        let ua = haar_random_unitary(da, seed ^ 17);
        let ub = haar_random_unitary(db, seed ^ 19);
        let moved = s.conjugate(&kron(&ua, &ub)).unwrap();
        let moved_basis = b.rotated(&ua).unwrap();
        let c0 = measurement_entanglement(&s, &b).unwrap();
        let c1 = measurement_entanglement(&moved, &moved_basis).unwrap();
        prop_assert!((c0.value - c1.value).abs() <= 1e-9);
        prop_assert!((c0.lower - c1.lower).abs() <= 1e-9);
        let p0 = partial_entanglement(&s, &b).unwrap();
        let p1 = partial_entanglement(&moved, &moved_basis).unwrap();
        prop_assert!((p0 - p1).abs() <= 1e-9);
    }

    #[test]
    fn deficit_dominates_discord_per_basis(seed in any::<u64>(), (da, db) in dims()) {
        let s = ginibre_mixed(&[da, db], da * db, seed).unwrap();
        let b = random_basis(da, seed ^ 23);
        let gap = deficit_objective(&s, &b).unwrap() - discord_objective(&s, &b).unwrap();
        let rho_a = partial_trace(&s, &[0]).unwrap();
        let local = von_neumann_entropy(&apply_projective(&rho_a, &b, 0).unwrap()) - von_neumann_entropy(&rho_a);
        prop_assert!((gap - local).abs() <= 1e-9);
        prop_assert!(gap >= -1e-9);
    }

    #[test]
    fn objectives_ignore_column_phases(seed in any::<u64>(), phases in prop::collection::vec(0.0f64..6.3, 3)) {
        let s = ginibre_mixed(&[3, 2], 6, seed).unwrap();
        let b = random_basis(3, seed ^ 29);
        let mut v = b.vectors().clone();
        for (j, &t) in phases.iter().enumerate() {
            let w = v.column(j) * C64::from_polar(1.0, t);
            v.set_column(j, &w);
        }
        let phased = ProjectiveBasis::new(v).unwrap();
        let k = ObjectiveKernel::new(&s).unwrap();
        prop_assert!((k.discord(&b) - k.discord(&phased)).abs() <= 1e-10);
        prop_assert!((k.deficit(&b) - k.deficit(&phased)).abs() <= 1e-10);
        let params: Vec<f64> = (0..9).map(|i| (i as f64 * 0.37 + seed as f64 * 1e-19).sin()).collect();
        let decoded = decode_basis(&params, 3).unwrap();
        let mut dv = decoded.vectors().clone();
        let w = dv.column(1) * C64::from_polar(1.0, phases[0]);
        dv.set_column(1, &w);
        let redecoded = ProjectiveBasis::new(dv).unwrap();
        prop_assert!((k.deficit(&decoded) - k.deficit(&redecoded)).abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn minimum_lies_below_every_probe(seed in any::<u64>(), da in 2usize..4) {
        let s = ginibre_mixed(&[da, 2], 2 * da, seed).unwrap();
        let k = ObjectiveKernel::new(&s).unwrap();
        let config = OptimizerConfig::with_seed(seed);
        let result = minimize_single(|b| k.deficit(b), da, &config).unwrap();
        let space = BasisParameterization::single(da);
        for r in 0..config.restarts {
            let probe = space.decode(&restart_point(&space, seed, r)).unwrap();
            prop_assert!(result.value <= k.deficit(&probe[0]) + 1e-9);
        }
        for p in 0..100 {
            prop_assert!(result.value <= k.deficit(&random_basis(da, seed.wrapping_add(p))) + 1e-9);
        }
    }

    #[test]
    fn values_are_nonnegative_and_deterministic(seed in any::<u64>()) {
        let s = ginibre_mixed(&[2, 2], 4, seed).unwrap();
        let config = OptimizerConfig::with_seed(seed);
        let d1 = quantum_discord(&s, &config).unwrap();
        let d2 = quantum_discord(&s, &config).unwrap();
        prop_assert!(d1.value >= -1e-9);
        prop_assert_eq!(serde_json::to_string(&d1.optimization).unwrap(), serde_json::to_string(&d2.optimization).unwrap());
        let f = information_deficit(&s, &config).unwrap();
        prop_assert!(f.value >= d1.value - 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn geometric_distance_is_bounded(seed in any::<u64>()) {
        let config = OptimizerConfig { restarts: 6, ..OptimizerConfig::with_seed(seed) };
        let s = ginibre_mixed(&[2, 2], 3, seed).unwrap();
        let g = geometric_cq_distance(&s, &config).unwrap();
        prop_assert!((0.0..=1.0).contains(&g.value));
        let cq = random_cq(2, 3, seed).unwrap();
        prop_assert!(geometric_cq_distance(&cq, &config).unwrap().value <= 1e-6);
    }
}

#[test]
fn kernel_blocks_match_partial_trace() {
    let s = ginibre_mixed(&[3, 2], 6, 4).unwrap();
    let k = ObjectiveKernel::new(&s).unwrap();
    assert!((k.entropy_a() - von_neumann_entropy(&partial_trace(&s, &[0]).unwrap())).abs() < 1e-12);
    let comp = ProjectiveBasis::computational(3);
    let dephased = apply_projective(&s, &comp, 0).unwrap();
    assert!((k.dephased_entropy(&comp) - von_neumann_entropy(&dephased)).abs() < 1e-10);
}
