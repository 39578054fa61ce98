use proptest::prelude::*;

use reppower::stats::{normal_cdf, normal_quantile};
use reppower::{
    fixed_power, futility_decision, interim_power, solve_c, weights, Decision, DesignConfig, Error,
    FixedDesign, FutilityRule, InterimInputs, InterimState, Method, SolveRequest, ZValue,
};

fn power(m: Method, t_o: f64, c: f64, cfg: &DesignConfig) -> f64 {
    let d = FixedDesign::new(t_o, c).unwrap();
    fixed_power(m, &d, cfg).unwrap().power.value()
}

fn config() -> impl Strategy<Value = DesignConfig> {
    (prop::sample::select(vec![0.01, 0.05, 0.1]), 0.0..0.6f64)
        .prop_map(|(a, s)| DesignConfig::new(a, s).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn cdf_is_symmetric(x in -37.0..37.0f64) {
        let lhs = normal_cdf(-x);
        let rhs = 1.0 - normal_cdf(x);
        prop_assert!((lhs - rhs).abs() <= 2e-16 + 1e-15 * lhs.max(rhs));
    }

    #[test]
    fn cdf_is_monotone(x in -38.0..38.0f64, dx in 1e-6..2.0f64) {
        prop_assert!(normal_cdf(x + dx) >= normal_cdf(x));
    }

    #[test]
    fn quantile_inverts_cdf(p in 1e-300..1.0f64) {
        prop_assume!(p < 1.0 - 1e-15);
        let q = normal_quantile(p).unwrap();
        let back = normal_cdf(q);
        prop_assert!(((back - p) / p).abs() < 1e-12, "p={} q={} back={}", p, q, back);
    }

    // Above ~3 the upper tail is lost to rounding in Phi(x) itself.
    #[test]
    fn cdf_inverts_quantile(x in -37.0..3.0f64) {
        let q = normal_quantile(normal_cdf(x)).unwrap();
        prop_assert!((q - x).abs() < 1e-9 * (1.0 + x.abs()));
    }

    // A prior centred on the effect spreads the sampling distribution; that
    // helps below one half and hurts above it.
    #[test]
    fn cp_beats_pp_exactly_when_cp_beats_half(t_o in -6.0..6.0f64, log_c in -3.0..3.0f64, cfg in config()) {
        let c = 10f64.powf(log_c);
        let cp = power(Method::Cp, t_o, c, &cfg);
        let pp = power(Method::Pp, t_o, c, &cfg);
        prop_assume!((cp - 0.5).abs() > 1e-9 && (cp - pp).abs() > 1e-12);
        prop_assert_eq!(cp > pp, cp > 0.5, "cp={} pp={}", cp, pp);
    }

    #[test]
    fn cbp_beats_fbp_exactly_when_cbp_beats_half(t_o in -6.0..6.0f64, log_c in -3.0..3.0f64, cfg in config()) {
        let c = 10f64.powf(log_c);
        let cbp = power(Method::Cbp, t_o, c, &cfg);
        let fbp = power(Method::Fbp, t_o, c, &cfg);
        prop_assume!((cbp - 0.5).abs() > 1e-9 && (cbp - fbp).abs() > 1e-12);
        prop_assert_eq!(cbp > fbp, cbp > 0.5, "cbp={} fbp={}", cbp, fbp);
    }

    #[test]
    fn nothing_observed_means_design_power(t_o in -5.0..5.0f64, t_i in -4.0..4.0f64, log_c in -2.0..2.0f64, cfg in config()) {
        let c = 10f64.powf(log_c);
        let t = ZValue::new(t_o).unwrap();
        let s = InterimState::new(t_i, 0.0, c).unwrap();
        let cpi = interim_power(Method::Cpi, t, &s, &cfg).unwrap().power.value();
        let ippi = interim_power(Method::Ippi, t, &s, &cfg).unwrap().power.value();
        prop_assert!((cpi - power(Method::Cp, t_o, c, &cfg)).abs() < 1e-14);
        prop_assert!((ippi - power(Method::Pp, t_o, c, &cfg)).abs() < 1e-14);
        // The weights themselves reduce, not only the dispatch.
        let w = weights(Method::Ippi, c, 0.0).unwrap();
        let pp_scale = (c / (c + 1.0)).sqrt();
        prop_assert!((w.original - pp_scale).abs() < 1e-12);
        prop_assert!(w.interim.abs() < 1e-15);
    }

    #[test]
    fn powers_are_probabilities(m in prop::sample::select(Method::ALL.to_vec()), t_o in -8.0..8.0f64,
                                t_i in -8.0..8.0f64, log_c in -6.0..6.0f64, f in 0.001..0.999f64, cfg in config()) {
        let c = 10f64.powf(log_c);
        let r = if m.is_interim() {
            interim_power(m, ZValue::new(t_o).unwrap(), &InterimState::new(t_i, f, c).unwrap(), &cfg).unwrap()
        } else {
            fixed_power(m, &FixedDesign::new(t_o, c).unwrap(), &cfg).unwrap()
        };
        let (p, sup) = (r.power.value(), r.supremum.value());
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!(sup >= p && sup <= 1.0);
    }

    #[test]
    fn shrinkage_never_raises_cp_above_half(t_o in 0.5..5.0f64, log_c in -2.0..2.0f64, s in 0.0..0.9f64) {
        let c = 10f64.powf(log_c);
        let plain = DesignConfig::new(0.05, 0.0).unwrap();
        let shrunk = DesignConfig::new(0.05, s).unwrap();
        prop_assert!(power(Method::Cp, t_o, c, &shrunk) <= power(Method::Cp, t_o, c, &plain) + 1e-15);
    }

    #[test]
    fn solved_c_reproduces_target(m in prop::sample::select(Method::ALL.to_vec()), t_o in 1.0..4.5f64,
                                  t_i in 0.0..3.0f64, ratio in 0.05..2.0f64, target in 0.3..0.95f64, cfg in config()) {
        let t = ZValue::new(t_o).unwrap();
        let req = if m.is_interim() {
            SolveRequest::interim(m, target, t, InterimInputs { t_i: ZValue::new(t_i).unwrap(), interim_ratio: ratio }, cfg)
        } else {
            SolveRequest::fixed(m, target, t, cfg)
        };
        match solve_c(&req) {
            Ok(sol) => {
                let again = if m.is_interim() {
                    let f = sol.f.unwrap();
                    prop_assert!((f * sol.c - ratio).abs() < 1e-9 * ratio.max(1.0));
                    interim_power(m, t, &InterimState::new(t_i, f, sol.c).unwrap(), &cfg).unwrap()
                } else {
                    prop_assert!(sol.f.is_none());
                    fixed_power(m, &FixedDesign::new(t_o, sol.c).unwrap(), &cfg).unwrap()
                };
                prop_assert!((again.power.value() - target).abs() < 1e-8, "{:?} gave {}", sol, again.power.value());
            }
            Err(Error::Infeasible { supremum, .. }) => prop_assert!(supremum <= target + 1e-9, "sup {} target {}", supremum, target),
            Err(Error::BelowMinimum { .. }) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn futility_stops_only_strictly_below(m in prop::sample::select(vec![Method::Ippi, Method::Ppi]), t_o in 0.5..4.0f64,
                                          t_i in -2.0..3.0f64, f in 0.05..0.95f64, c in 0.2..5.0f64) {
        let cfg = DesignConfig::default();
        let state = InterimState::new(t_i, f, c).unwrap();
        let t = ZValue::new(t_o).unwrap();
        let p = interim_power(m, t, &state, &cfg).unwrap().power.value();
        prop_assume!(p > 1e-6 && p < 1.0 - 1e-6);
        let at = FutilityRule::new(m, p).unwrap();
        prop_assert_eq!(futility_decision(&at, t, &state, &cfg).unwrap().decision, Decision::Continue);
        let above = FutilityRule::new(m, (p + 1e-9).min(1.0 - 1e-12)).unwrap();
        prop_assert_eq!(futility_decision(&above, t, &state, &cfg).unwrap().decision, Decision::Stop);
    }
}
