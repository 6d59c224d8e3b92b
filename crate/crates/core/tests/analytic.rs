mod common;

use noma_ra::analytic::*;
use proptest::prelude::*;

fn cfg(n: u32, l: u32) -> SystemConfig {
    SystemConfig::new(n, l).unwrap()
}

#[test]
fn conditional_probabilities_close_to_one() {
    for u in 1..=8u64 {
        for l in 1..=5u32 {
            let top = u.min(u64::from(l));
            let positive: Vec<f64> = (1..=top)
                .map(|s| cond_success_prob(u, s, l).unwrap())
                .collect();
            let p0 = 1.0 - positive.iter().sum::<f64>();
            for p in positive.iter().chain(std::iter::once(&p0)) {
                assert!((-1e-12..=1.0 + 1e-12).contains(p), "u={u} l={l} p={p}");
            }
            // the collision branch at s = 0 is the same quantity
            let direct_p0 = cond_success_prob(u, 0, l).unwrap();
            assert!((direct_p0 - p0).abs() < 1e-12, "u={u} l={l}");
        }
    }
}

#[test]
fn conditional_probability_matches_enumeration() {
    for u in 1..=6u32 {
        for l in 1..=4u32 {
            let dist = common::success_distribution(u, l);
            for (s, &expected) in dist.iter().enumerate() {
                let got = cond_success_prob(u64::from(u), s as u64, l).unwrap();
                assert!(
                    (got - expected).abs() < 1e-12,
                    "u={u} l={l} s={s}: {got} vs {expected}"
                );
            }
        }
    }
}

#[test]
fn conditional_throughput_bounded_by_levels_and_packets() {
    for u in 1..=6u64 {
        for l in 1..=4u32 {
            let e = cond_throughput(u, l).unwrap();
            assert!(e >= 0.0 && e <= u.min(u64::from(l)) as f64 + 1e-12);
        }
    }
}

#[test]
fn single_level_reduces_to_msaloha() {
    for n in [1u32, 2, 5, 10, 37] {
        let c = cfg(n, 1);
        for u in 0..=200u64 {
            let expected = throughput_msaloha(LoadPoint::Binomial { users: u }, &c);
            let got = throughput_binomial(u, &c);
            assert!(
                (got - expected).abs() < 1e-10,
                "n={n} u={u}: {got} vs {expected}"
            );
        }
    }
}

#[test]
fn binomial_converges_to_poisson() {
    let l = 4u32;
    for load in [1.0f64, 2.6, 6.0] {
        let lambda = load / f64::from(l);
        let mut gaps = Vec::new();
        for n in [10u32, 50, 200] {
            let c = cfg(n, l);
            let u = (load * f64::from(n)).round() as u64;
            let nf = f64::from(n);
            gaps.push(
                (throughput_binomial(u, &c) / nf - throughput_poisson(lambda, &c) / nf).abs(),
            );
        }
        assert!(
            gaps.windows(2).all(|w| w[1] < w[0]),
            "load={load}: {gaps:?}"
        );
        assert!(gaps[2] < 0.01, "load={load}: {gaps:?}");
    }
}

#[test]
fn idle_probability_strictly_decreasing() {
    for l in [2u32, 4, 8] {
        let values: Vec<f64> = (1..=120)
            .map(|i| idle_channel_prob(i as f64 * 0.05, l))
            .collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]), "l={l}");
    }
}

#[test]
fn poisson_throughput_unimodal() {
    for l in [1u32, 2, 4, 6, 12] {
        let c = cfg(1, l);
        let lf = f64::from(l);
        let values: Vec<f64> = (1..=1200)
            .map(|i| throughput_poisson(i as f64 * 0.01 / lf, &c))
            .collect();
        let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
        let changes = diffs
            .windows(2)
            .filter(|w| (w[0] > 0.0) != (w[1] > 0.0))
            .count();
        assert_eq!(changes, 1, "l={l}");
    }
}

#[test]
fn idle_probability_given_packets_matches_enumeration() {
    for m in 0..=7u32 {
        for l in 1..=4u32 {
            let expected = common::idle_probability(m, l);
            let got = idle_prob_given_packets(u64::from(m), l);
            assert!(
                (got - expected).abs() < 1e-12,
                "m={m} l={l}: {got} vs {expected}"
            );
        }
    }
}

#[test]
fn capture_success_matches_enumeration() {
    for k in 1..=6u32 {
        for l in 1..=4u32 {
            let physical = capture_success_prob(u64::from(k), l, CaptureSemantics::Physical);
            let expected = common::physical_capture_probability(k, l);
            assert!((physical - expected).abs() < 1e-12, "k={k} l={l}");
            let printed = capture_success_prob(u64::from(k), l, CaptureSemantics::PaperFormula);
            let gap = if k == 1 { 1.0 / f64::from(l) } else { 0.0 };
            assert!((physical - printed - gap).abs() < 1e-12, "k={k} l={l}");
        }
    }
}

#[test]
fn capture_poisson_sits_between_baselines() {
    // physical capture never loses a packet plain ALOHA would have decoded,
    // and never decodes more than one per channel
    let c = cfg(1, 4);
    for i in 1..=120 {
        let load = i as f64 * 0.05;
        let aloha = throughput_msaloha(LoadPoint::Poisson { lambda: load }, &c);
        let cap =
            capture_throughput_poisson_with(load, &c, DEFAULT_TAIL_TOL, CaptureSemantics::Physical);
        let noma = throughput_poisson(load / 4.0, &c);
        assert!(aloha <= cap + 1e-12 && cap <= noma + 1e-12, "load={load}");
    }
}

#[test]
fn capture_poisson_is_binomial_limit() {
    let l = 4;
    let load = 1.5;
    let c = cfg(400, l);
    let u = (load * 400.0) as u64;
    let b = capture_throughput_binomial(u, &c) / 400.0;
    let p = capture_throughput_poisson(load, &c, 1e-15) / 400.0;
    assert!((b - p).abs() < 5e-3, "{b} vs {p}");
}

proptest! {
    #[test]
    fn cond_success_prob_is_a_probability(u in 1u64..40, l in 1u32..9, s_frac in 0.0f64..=1.0) {
        let s = (s_frac * u as f64).floor() as u64;
        let p = cond_success_prob(u, s, l).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&p));
    }

    #[test]
    fn power_levels_follow_the_recursion(gamma in 0.01f64..50.0, l in 1u32..10) {
        let set = power_levels(gamma, l).unwrap();
        let levels = set.levels();
        prop_assert_eq!(levels.len(), l as usize);
        prop_assert!((levels[l as usize - 1] - gamma).abs() <= 1e-12 * gamma);
        for w in levels.windows(2) {
            prop_assert!(w[0] > w[1]);
            prop_assert!((w[0] / w[1] - (gamma + 1.0)).abs() < 1e-9 * (gamma + 1.0));
        }
    }

    #[test]
    fn channel_pmf_sums_to_one(u in 0u64..1500, n in 1u32..50) {
        let total: f64 = channel_occupancy_pmf(u, n).iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn binomial_throughput_bounded(u in 0u64..300, n in 1u32..20, l in 1u32..7) {
        let c = cfg(n, l);
        let t = throughput_binomial(u, &c);
        prop_assert!(t >= -1e-12);
        prop_assert!(t <= (u.min(u64::from(n) * u64::from(l))) as f64 + 1e-9);
    }
}
