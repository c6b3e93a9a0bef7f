use lattest::codeformula::{bit_decompose, lattice_tester, CodeFormulaLattice};
use lattest::exactlinalg::{
    format_rational, hnf, int, parse_rational, ratio, rational_from_json, rational_to_json, solve,
    RatMatrix, Rational,
};
use lattest::harness::{cell_seed, trial_seed, wilson_interval, WILSON_Z_99};
use lattest::lattice::{distance_oracle, find_modulus, LatticeBasis, ModulusStructure};
use lattest::testers::LatticeTester;
use proptest::prelude::*;
use std::sync::OnceLock;

fn toy() -> &'static (CodeFormulaLattice, ModulusStructure) {
    static TOY: OnceLock<(CodeFormulaLattice, ModulusStructure)> = OnceLock::new();
    TOY.get_or_init(|| {
        let cf = CodeFormulaLattice::from_rm(&[1, 2], 3).unwrap();
        let m = find_modulus(cf.lattice()).unwrap();
        (cf, m)
    })
}

fn rational() -> impl Strategy<Value = Rational> {
    (-60i64..=60, 1i64..=12).prop_map(|(a, b)| ratio(a, b))
}

fn square(n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-5i64..=5, n), n)
}

fn coefficients_integral(b: &RatMatrix, t: &[Rational]) -> bool {
    solve(b, t)
        .unwrap()
        .is_some_and(|x| x.iter().all(|c| c.is_integer()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hnf_generates_the_same_lattice(rows in square(3)) {
        let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
        let m = RatMatrix::from_i64_rows(&refs);
        let h = hnf(&m).unwrap();
        prop_assert_eq!(hnf(&h).unwrap(), h.clone());
        // every original row lies in the HNF lattice and vice versa
        for r in m.row_iter() {
            prop_assert!(coefficients_integral(&h, r));
        }
        if h.rows() == m.rows() {
            for r in h.row_iter() {
                prop_assert!(coefficients_integral(&m, r));
            }
        }
    }

    #[test]
    fn oracle_is_periodic_and_shift_invariant(
        t in prop::collection::vec(rational(), 8),
        shift in prop::collection::vec(-3i64..=3, 8),
        v_index in 0usize..1 << 16,
        p in 1u32..=2,
    ) {
        let (cf, m) = toy();
        let v = &m.reps()[v_index % m.len()];
        let moved: Vec<Rational> = t
            .iter()
            .zip(shift.iter().zip(v))
            .map(|(x, (&s, &y))| x + int(4 * s + y))
            .collect();
        let a = distance_oracle(cf.lattice(), m, &t, p).unwrap();
        let b = distance_oracle(cf.lattice(), m, &moved, p).unwrap();
        prop_assert_eq!(a.dist_pow_p, b.dist_pow_p);
        prop_assert!(cf.lattice().contains(&a.witness).unwrap());
    }

    #[test]
    fn bit_planes_reconstruct(t in prop::collection::vec(rational(), 1..10), m in 0usize..5) {
        let d = bit_decompose(&t, m);
        prop_assert_eq!(d.reconstruct(), t);
        prop_assert!(d.planes.iter().flatten().all(|&b| b <= 1));
    }

    #[test]
    fn rationals_round_trip(x in rational()) {
        prop_assert_eq!(parse_rational(&format_rational(&x)).unwrap(), x.clone());
        prop_assert_eq!(rational_from_json(&rational_to_json(&x)).unwrap(), x);
    }

    #[test]
    fn tester_runs_are_seeded_and_within_budget(
        t in prop::collection::vec((0i64..8).prop_map(|x| ratio(x, 2)), 8),
        seed in any::<u64>(),
    ) {
        let (cf, m) = toy();
        let tester = lattice_tester(cf, &ratio(1, 4), &ratio(1, 3)).unwrap();
        let a = tester.test(&t, seed);
        let b = tester.test(&t, seed);
        prop_assert_eq!(&a, &b);
        prop_assert!(a.query_count <= tester.query_budget());
        prop_assert_eq!(a.query_count, a.transcript.len());
        // one-sided: members are never rejected
        let member: Vec<Rational> = m.reps()[(seed as usize) % m.len()].iter().map(|&x| int(x)).collect();
        prop_assert!(tester.test(&member, seed).accepted);
    }

    #[test]
    fn wilson_interval_brackets_the_estimate(trials in 1u64..5000, frac in 0.0f64..=1.0) {
        let k = ((trials as f64) * frac).round() as u64;
        let (lo, hi) = wilson_interval(k, trials, WILSON_Z_99);
        let p = k as f64 / trials as f64;
        prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        prop_assert!(lo <= p + 1e-12 && p <= hi + 1e-12);
    }

    #[test]
    fn seed_streams_do_not_collide(master in any::<u64>(), c in 0u64..64, i in 0u64..64, j in 0u64..64) {
        let s = cell_seed(master, c);
        prop_assume!(i != j);
        prop_assert_ne!(trial_seed(s, i), trial_seed(s, j));
    }

    #[test]
    fn integer_lattice_membership(t in prop::collection::vec(rational(), 1..6)) {
        let l = LatticeBasis::integer_lattice(t.len());
        prop_assert_eq!(l.contains(&t).unwrap(), t.iter().all(|x| x.is_integer()));
    }
}
