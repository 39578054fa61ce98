use reppower::config::Tail;
use reppower::stats::normal_cdf;
use reppower::{simulate_power, DesignConfig, Method, SimSpec, ZValue};

// The two-sided rejection rate exceeds the upper-tail closed form by at most
// the lower-tail mass Phi(-sqrt(c) t_o + z).
#[test]
fn two_sided_excess_is_the_lower_tail() {
    let upper = DesignConfig::default();
    let both = upper.with_tail(Tail::TwoSided);
    for (i, &(t_o, c)) in [(0.2, 0.5), (1.0, 1.0), (2.0, 2.0), (-0.5, 1.5)].iter().enumerate() {
        let t = ZValue::new(t_o).unwrap();
        let one = SimSpec::fixed(Method::Cp, t, c, upper).analytic().unwrap();
        let est = simulate_power(&SimSpec::fixed(Method::Cp, t, c, both).with_seed(100 + i as u64)).unwrap();
        let lower = normal_cdf(-c.sqrt() * t_o + upper.z_alpha());
        let excess = est.estimate - one;
        let slack = 4.0 * est.std_err.max(1e-4);
        assert!(excess >= -slack, "t_o={t_o} c={c}: excess {excess}");
        assert!(excess <= lower + slack, "t_o={t_o} c={c}: excess {excess} > {lower}");
        assert!((excess - lower).abs() <= slack, "t_o={t_o} c={c}: excess {excess} vs {lower}");
    }
}

#[test]
fn seed_changes_estimate_but_not_expectation() {
    let spec = SimSpec::fixed(Method::Pp, ZValue::new(2.5).unwrap(), 1.2, DesignConfig::default());
    let exact = spec.analytic().unwrap();
    let estimates: Vec<f64> = (0..5)
        .map(|s| simulate_power(&spec.with_seed(s)).unwrap().estimate)
        .collect();
    let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
    assert!(estimates.windows(2).any(|w| w[0] != w[1]));
    assert!((mean - exact).abs() < 4.0 * (exact * (1.0 - exact) / 5e5).sqrt());
}
