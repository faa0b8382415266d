//! Property tests for structural invariants.

use num_complex::Complex64;
use proptest::prelude::*;

use decoupled_renewal::distributions::{JumpSpec, LimitLaw, Regime};
use decoupled_renewal::dpp::{kernel_c_rho, sample_disc_counts};
use decoupled_renewal::limits::{covariance_x, default_quad, h_alpha, norm_c_alpha};
use decoupled_renewal::renewal::{
    renewal_equation_grid, simulate_decoupled, simulate_standard_walk, RenewalMethod, RenewalTable, DEFAULT_DELTA,
};
use decoupled_renewal::rng::{run_replicates, SeedSpec};
use decoupled_renewal::special::mittag_leffler;
use decoupled_renewal::verify::{ks_statistic, min_eigenvalue_symmetric, SCHEMA_VERSION, Target, VerifyReport};

fn jump_spec() -> impl Strategy<Value = JumpSpec> {
    prop_oneof![
        Just(JumpSpec::exponential()),
        (0.2f64..5.0).prop_map(|k| JumpSpec::gamma(k).unwrap()),
        (0.2f64..3.0).prop_map(|a| JumpSpec::pareto(a).unwrap()),
        (0.2f64..0.95).prop_map(|a| JumpSpec::positive_stable(a).unwrap()),
        Just(JumpSpec::log_pareto()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tail_is_a_survival_function(spec in jump_spec(), xs in prop::collection::vec(0.0f64..1e6, 2..40)) {
        prop_assert_eq!(spec.tail(0.0), 1.0);
        prop_assert!(spec.tail(1e300) < 1e-2);
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        for w in xs.windows(2) {
            prop_assert!(spec.tail(w[1]) <= spec.tail(w[0]));
        }
        for &x in &xs {
            prop_assert!((spec.tail(x) + spec.cdf(x) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn counts_are_counting_functions(spec in jump_spec(), seed in any::<u64>(), t_max in 1.0f64..60.0) {
        let mut rng = SeedSpec::new(seed).stream(0);
        let path = simulate_decoupled(&spec, t_max, DEFAULT_DELTA, &mut rng).unwrap();
        let mut prev = 0;
        for k in 0..=20 {
            let t = (t_max * k as f64 / 20.0).min(t_max);
            let at = path.count_at(t).unwrap();
            let below = path.count_below(t).unwrap();
            prop_assert!(below <= at);
            prop_assert!(at >= prev);
            prev = at;
        }
        prop_assert!(path.count_at(t_max * 1.5).is_err());
    }

    #[test]
    fn first_passage_is_count_plus_one(spec in jump_spec(), seed in any::<u64>(), t in 0.0f64..50.0) {
        let mut rng = SeedSpec::new(seed).stream(0);
        let walk = simulate_standard_walk(&spec, t, &mut rng).unwrap();
        let tau = walk.len();
        let n = walk.iter().filter(|&&s| s <= t).count();
        prop_assert_eq!(tau, n + 1);
        prop_assert!(*walk.last().unwrap() > t);
        prop_assert!(walk.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn normalizers_solve_their_equations(t in 3.0f64..1e6, a in 1.05f64..1.95, b in 0.1f64..0.95, s in 0.5f64..30.0) {
        // regime C Pareto: t ℓ(c)/c^α = 1 with ℓ = 1
        let spec = JumpSpec::pareto(a).unwrap();
        let c = norm_c_alpha(&spec, t).unwrap();
        prop_assert!((t / c.powf(a) - 1.0).abs() < 1e-8);
        // regime D: P{ξ > h(s)} = e^{-s}
        let spec = JumpSpec::positive_stable(b).unwrap();
        let h = h_alpha(&spec, s).unwrap();
        prop_assert!((spec.tail(h).ln() + s).abs() < 1e-6, "s={} h={} tail={}", s, h, spec.tail(h));
    }

    #[test]
    fn covariance_is_positive_semidefinite(
        us in prop::collection::vec(-3.0f64..3.0, 1..=8),
        half in any::<bool>(),
    ) {
        let alpha = if half { 0.5 } else { 0.0 };
        let law = LimitLaw::new(Regime::D, alpha, SeedSpec::new(0), 1).unwrap();
        let quad = default_quad();
        let k = us.len();
        let mut m = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in 0..k {
                m[i][j] = covariance_x(alpha, us[i], us[j], &law, &quad).unwrap();
            }
        }
        for (i, row) in m.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                prop_assert!((x - m[j][i]).abs() < 1e-12);
            }
        }
        prop_assert!(min_eigenvalue_symmetric(&m) >= -1e-8);
    }

    #[test]
    fn renewal_grid_is_monotone(spec in jump_spec(), t_max in 0.5f64..20.0) {
        let table = renewal_equation_grid(&spec, t_max, t_max / 400.0).unwrap();
        prop_assert_eq!(table.v_values()[0], 0.0);
        prop_assert!(table.v_values().windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn renewal_table_csv_roundtrip(increments in prop::collection::vec(0.0f64..10.0, 1..50), step in 1e-3f64..1.0) {
        let mut v = vec![0.0];
        for d in &increments {
            v.push(v.last().unwrap() + d);
        }
        let grid: Vec<f64> = (0..v.len()).map(|i| i as f64 * step).collect();
        let table = RenewalTable::new(grid, v, RenewalMethod::RenewalEquation, 1e-6).unwrap();
        let back = RenewalTable::from_csv(&table.to_csv(), RenewalMethod::RenewalEquation, 1e-6).unwrap();
        prop_assert_eq!(back, table);
    }

    #[test]
    fn results_do_not_depend_on_workers(seed in any::<u64>(), workers in 2usize..6) {
        let spec = JumpSpec::gamma(1.5).unwrap();
        let f = |_: u64, rng: &mut decoupled_renewal::rng::Stream| {
            simulate_decoupled(&spec, 20.0, DEFAULT_DELTA, rng)?.count_at(20.0)
        };
        let one = run_replicates(SeedSpec::new(seed), 16, 1, f).unwrap();
        let many = run_replicates(SeedSpec::new(seed), 16, workers, f).unwrap();
        prop_assert_eq!(one, many);
    }

    #[test]
    fn report_json_roundtrip(
        stat in -1e6f64..1e6, tol in 0.0f64..10.0, reps in 1u64..10_000_000, p in prop::option::of(0.0f64..1.0),
        seed in any::<u64>(), passed in any::<bool>(), name in "[a-z_]{1,12}",
    ) {
        let r = VerifyReport {
            schema_version: SCHEMA_VERSION,
            check_name: name,
            statistic: stat,
            target: Target::Value(stat / 3.0),
            tolerance: tol,
            replicates: reps,
            horizon: tol * 7.0,
            p_value: p,
            significance: p.map(|_| 0.01),
            passed,
            seed: SeedSpec::new(seed),
            band_provenance: "test".into(),
            details: serde_json::json!({"x": [stat, tol]}),
            wall_time: 0.0,
        };
        let back = VerifyReport::from_json(&r.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, r);
    }

    #[test]
    fn disc_counts_are_monotone_in_radius(rho in 0.5f64..4.0, seed in any::<u64>(), radii in prop::collection::vec(0.01f64..3.0, 1..10)) {
        let mut radii = radii;
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        let mut rng = SeedSpec::new(seed).stream(0);
        let s = sample_disc_counts(rho, &radii, DEFAULT_DELTA, &mut rng, SeedSpec::new(seed), 0).unwrap();
        prop_assert!(s.counts.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn kernel_is_hermitian_with_positive_diagonal(
        rho in 0.5f64..4.0, zr in -3.0f64..3.0, zi in -3.0f64..3.0, wr in -3.0f64..3.0, wi in -3.0f64..3.0,
    ) {
        let z = Complex64::new(zr, zi);
        let w = Complex64::new(wr, wi);
        let a = kernel_c_rho(rho, z, w).unwrap();
        let b = kernel_c_rho(rho, w, z).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-12 * (1.0 + a.norm()));
        let d = kernel_c_rho(rho, z, z).unwrap();
        prop_assert!(d.re > 0.0 && d.im.abs() <= 1e-12 * d.re);
    }

    #[test]
    fn mittag_leffler_reduces_to_exponential(x in -20.0f64..20.0) {
        // on the negative axis the series cancels; the error scales with e^{|x|}
        let e = mittag_leffler(1.0, 1.0, Complex64::new(x, 0.0)).unwrap();
        prop_assert!((e.re - x.exp()).abs() <= 1e-14 * x.abs().exp() + 1e-13 * x.exp());
    }

    #[test]
    fn ks_outputs_are_probabilities(xs in prop::collection::vec(0.0f64..1.0, 1..200)) {
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        let (d, p) = ks_statistic(&xs, |x| x).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!((0.0..=1.0).contains(&p));
    }
}
