use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sepcert::bank::{closed_form_12_3_4, named_witness, reduced_pair_operator, MIRROR};
use sepcert::bloch::{grid_oracle, max_over_class, product_expectation, BlochVector, BlockFactor, OptimizerOptions, ProductAssignment, WitnessSpec};
use sepcert::decomp::{builtin_decomposition, verify_decomposition, BUILTIN_IDS};
use sepcert::graph::{from_stabilizers, named_stabilizers};
use sepcert::io;
use sepcert::pauli::{
    char_from_density, density_from_char, enumerate_partitions, hermitian_eigensystem, string_matrix, CMat, Partition, PauliString, SeparabilityClass, C64,
};
use sepcert::suite::random_state;
use sepcert::xstate::{
    construct_phi_state, decompose_xstate, gm_closed_form, gm_oracle, rvalue_of_anti, theorem1_evaluate, theorem2_verdict, Verdict, XState, XWitnessParams,
};

fn quick(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn bloch() -> impl Strategy<Value = BlochVector> {
    (0.0..PI, 0.0..2.0 * PI).prop_map(|(t, p)| BlochVector::from_angles(t, p))
}

fn pauli_string(n: usize) -> impl Strategy<Value = PauliString> {
    (1usize..(1 << (2 * n))).prop_map(move |i| PauliString::from_index(i, n))
}

fn witness4(len: usize) -> impl Strategy<Value = WitnessSpec> {
    prop::collection::vec((pauli_string(4), -1.0f64..1.0), 1..=len).prop_map(|t| WitnessSpec::new(4, t, None).unwrap())
}

fn x_state() -> impl Strategy<Value = XState> {
    (prop::array::uniform8(0.01f64..1.0), prop::array::uniform4(-1.0f64..1.0)).prop_map(|(d, a)| {
        let s: f64 = d.iter().sum();
        let diag = d.map(|v| v / s);
        let anti = [0, 1, 2, 3].map(|i| a[i] * (diag[i] * diag[7 - i]).sqrt());
        XState::new(diag, anti).unwrap()
    })
}

proptest! {
    #![proptest_config(quick(256))]

    #[test]
    fn char_round_trip(seed in any::<u64>(), n in 1usize..=4) {
        let rho = random_state(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let r = char_from_density(&rho).unwrap();
        prop_assert!(density_from_char(&r).max_abs_diff(&rho) <= 1e-12);
    }

    #[test]
    fn parseval(seed in any::<u64>(), n in 1usize..=4) {
        let rho = random_state(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let r = char_from_density(&rho).unwrap();
        let sum: f64 = r.values().iter().map(|v| v * v).sum();
        let purity = (rho.matrix() * rho.matrix()).trace().re;
        prop_assert!((sum - (1u32 << n) as f64 * purity).abs() <= 1e-10);
    }

    #[test]
    fn pauli_strings_square_to_identity(s in pauli_string(3)) {
        let m = string_matrix(&s);
        prop_assert!((&m * &m - CMat::identity(8, 8)).norm() <= 1e-14);
    }

    #[test]
    fn lemma_symmetries(m in prop::array::uniform4(-2.0f64..2.0)) {
        let g = gm_closed_form(&XWitnessParams::new(m)).value;
        for perm in [[0, 2, 1, 3], [0, 3, 2, 1], [0, 1, 3, 2]] {
            let v = gm_closed_form(&XWitnessParams::new(perm.map(|k| m[k]))).value;
            prop_assert!((v - g).abs() <= 1e-9);
        }
        // φ1 → -φ1 flips the two terms carrying sin φ1
        let flipped = gm_closed_form(&XWitnessParams::new([m[0], m[1], -m[2], -m[3]])).value;
        prop_assert!((flipped - g).abs() <= 1e-9);
        prop_assert!((gm_closed_form(&XWitnessParams::new(m.map(|v| 3.0 * v))).value - 3.0 * g).abs() <= 1e-9);
    }

    #[test]
    fn rvalue_sign_and_order_invariance(a in prop::array::uniform4(-1.0f64..1.0), k in 0usize..3) {
        let base = rvalue_of_anti(&a).rvalue;
        let mut swapped = a;
        swapped.swap(1 + k, 1 + (k + 1) % 3);
        prop_assert!((rvalue_of_anti(&swapped).rvalue - base).abs() <= 1e-9 * (1.0 + base));
        let negated = a.map(|v| -v);
        prop_assert!((rvalue_of_anti(&negated).rvalue - base).abs() <= 1e-9 * (1.0 + base));
    }

    #[test]
    fn phi_states_are_separable(theta in prop::array::uniform3(0.05f64..3.09), phi in prop::array::uniform3(0.0f64..2.0 * PI)) {
        let ps = construct_phi_state(theta, phi);
        let s: f64 = theta.iter().map(|t| t.sin()).product::<f64>().abs();
        let rv = theorem1_evaluate(&ps.state).rvalue;
        prop_assert!(rv <= s + 1e-9);
        prop_assert_eq!(theorem2_verdict(&ps.state).verdict, Verdict::Separable);
        let v = verify_decomposition(&ps.decomposition, &ps.state.to_density(), &SeparabilityClass::full(3), 1e-12).unwrap();
        prop_assert!(v.pass);
        let flat = construct_phi_state(theta, [0.0; 3]);
        prop_assert!((theorem1_evaluate(&flat.state).rvalue - s).abs() <= 1e-9);
    }

    #[test]
    fn x_state_char_round_trip(x in x_state()) {
        let back = XState::from_density(&x.to_density(), 1e-12).unwrap();
        prop_assert!(back.diag.iter().zip(&x.diag).chain(back.anti.iter().zip(&x.anti)).all(|(a, b)| (a - b).abs() <= 1e-15));
    }

    #[test]
    fn twelve_partition_closed_form(u in bloch(), v in bloch()) {
        let q = named_witness("cluster4-trisep").unwrap().spec;
        let p = Partition::parse("12|3|4", 4).unwrap();
        let op = reduced_pair_operator(&q, &p, &[(3, u), (4, v)]).unwrap();
        let mut ev = op.eigenvalues();
        ev.sort_by(f64::total_cmp);
        let mut cf = closed_form_12_3_4(&u, &v).to_vec();
        cf.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&cf) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn stabilizer_expectations(id in prop::sample::select(vec!["ghz3", "ghz4", "cluster4"])) {
        let (s, n) = named_stabilizers(id).unwrap();
        let st = from_stabilizers(&s, n).unwrap();
        let r = char_from_density(&st.state).unwrap();
        for g in s.generators() {
            prop_assert!((r.get(&g.string) - g.sign as f64).abs() <= 1e-12);
        }
        let purity = (st.state.matrix() * st.state.matrix()).trace().re;
        prop_assert!((purity - 1.0).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(quick(96))]

    #[test]
    fn theorem2_matches_construction(x in x_state()) {
        let v = theorem2_verdict(&x);
        match decompose_xstate(&x) {
            Ok(d) => {
                prop_assert_eq!(v.verdict, Verdict::Separable);
                prop_assert!(d.residual <= 1e-9);
            }
            Err(e) => {
                prop_assert_eq!(v.verdict, Verdict::Entangled, "separable state failed to decompose: {}", e);
            }
        }
    }

    #[test]
    fn lemma_oracle_agrees(m in prop::array::uniform4(-2.0f64..2.0)) {
        let p = XWitnessParams::new(m);
        prop_assert!((gm_closed_form(&p).value - gm_oracle(&p, 32).unwrap()).abs() <= 1e-6);
    }

    #[test]
    fn product_values_stay_below_bound(w in witness4(6), b in prop::array::uniform4(bloch())) {
        let full = SeparabilityClass::full(4);
        let bound = max_over_class(&w, &full, &OptimizerOptions::default()).unwrap().bound;
        let a = ProductAssignment::new(Partition::full_split(4), b.iter().map(|v| BlockFactor::Single(*v)).collect()).unwrap();
        prop_assert!(product_expectation(&w, &a).unwrap() <= bound + 1e-9);
    }
}

proptest! {
    #![proptest_config(quick(48))]

    #[test]
    fn bound_monotone_and_scale_covariant(w in witness4(8), c in 0.1f64..10.0) {
        let opts = OptimizerOptions { starts: 16, ..OptimizerOptions::default() };
        let p = Partition::parse("13|2|4", 4).unwrap();
        let small = SeparabilityClass::single(p.clone());
        let tri = SeparabilityClass::with_parts(4, 3).unwrap();
        let b_full = max_over_class(&w, &SeparabilityClass::full(4), &opts).unwrap().bound;
        let b_small = max_over_class(&w, &small, &opts).unwrap().bound;
        let b_tri = max_over_class(&w, &tri, &opts).unwrap().bound;
        prop_assert!(b_full <= b_small + 1e-9 && b_small <= b_tri + 1e-9);
        let scaled = max_over_class(&w.scaled(c), &small, &opts).unwrap().bound;
        prop_assert!((scaled - c * b_small).abs() <= 1e-9 * (1.0 + c * b_small.abs()));
        prop_assert!(b_small + 1e-9 >= grid_oracle(&w, &p, 12).unwrap());
    }

    #[test]
    fn separable_mixtures_respect_bounds(w in witness4(10), id in prop::sample::select(BUILTIN_IDS.to_vec())) {
        let b = builtin_decomposition(id).unwrap();
        let r = char_from_density(&b.target).unwrap();
        let bound = max_over_class(&w, &b.class, &OptimizerOptions { starts: 16, ..OptimizerOptions::default() }).unwrap().bound;
        prop_assert!(w.inner(&r) <= bound + 1e-9);
    }

    #[test]
    fn mirror_preserves_repaired_witness(_x in 0u8..1) {
        let w = named_witness("cluster4-trisep").unwrap().spec;
        prop_assert_eq!(w.permuted(&MIRROR), w);
    }
}

#[test]
fn partition_counts_are_stirling_numbers() {
    let s = |n: usize| (1..=n).map(|k| enumerate_partitions(n, k).unwrap().len()).collect::<Vec<_>>();
    assert_eq!(s(3), vec![1, 3, 1]);
    assert_eq!(s(4), vec![1, 7, 6, 1]);
    assert_eq!(s(5), vec![1, 15, 25, 10, 1]);
}

#[test]
fn decomposition_files_round_trip() {
    for id in BUILTIN_IDS {
        let b = builtin_decomposition(id).unwrap();
        let d = io::decomposition_from_json(&io::decomposition_to_json(&b.decomposition), 4).unwrap();
        let v = verify_decomposition(&d, &b.target, &b.class, 1e-12).unwrap();
        assert!(v.pass, "{id}");
    }
}

#[test]
fn eigensystem_reconstructs() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 1..=4 {
        let m = random_state(n, &mut rng).into_matrix();
        let e = hermitian_eigensystem(&m).unwrap();
        assert!((e.reconstruct() - &m).norm() <= 1e-12);
        assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }
    let _ = C64::new(0.0, 0.0);
}
