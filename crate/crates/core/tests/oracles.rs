//! Independent oracles for values the library computes by other routes.

use esbt_core::measures::{es_of, normal_risk_pair, var_of, Distribution, RiskLevel, RiskPair};
use esbt_core::normal;
use esbt_core::scoring::{expected_score, score_var_es, ScoringSpec};
use esbt_core::traditional::{traffic_light_var, TrafficLightConfig};
use esbt_core::{es_coverage_test, Zone};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lvl(a: f64) -> RiskLevel {
    RiskLevel::new(a).unwrap()
}

fn density(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Normal CDF by direct quadrature of the density; shares no code with the library.
fn cdf_oracle(x: f64) -> f64 {
    if x > 0.0 {
        1.0 - cdf_oracle(-x)
    } else {
        simpson(&density, -40.0, x, 1e-15, 22)
    }
}

/// Quantile by bisection on the quadrature CDF.
fn quantile_oracle(p: f64) -> f64 {
    let (mut lo, mut hi) = (-20.0, 20.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if cdf_oracle(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    // Seed with equal panels so wide, mostly-flat ranges are not declared
    // converged from three near-zero samples.
    const PANELS: usize = 64;
    let h = (b - a) / PANELS as f64;
    (0..PANELS)
        .map(|i| {
            let (lo, hi) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (fa, fb, fm) = (f(lo), f(hi), f(0.5 * (lo + hi)));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            rec(f, lo, hi, fa, fm, fb, whole, tol / PANELS as f64, depth)
        })
        .sum()
}

/// `(1/α) ∫_0^α Φ⁻¹(β) dβ`, substituted as `(1/α) ∫_{-∞}^{Φ⁻¹(α)} t φ(t) dt`.
fn es_quadrature_oracle(alpha: f64) -> f64 {
    let q = quantile_oracle(alpha);
    simpson(&|t: f64| t * density(t), -40.0, q, 1e-13, 22) / alpha
}

#[test]
fn normal_var_against_bisection_oracle() {
    let oracle = quantile_oracle(0.01);
    assert!((oracle + 2.326_348).abs() < 1e-6);
    let dist = Distribution::normal(0.0, 1.0).unwrap();
    assert!((var_of(&dist, lvl(0.01)) - oracle).abs() < 1e-10);
}

#[test]
fn normal_es_against_quadrature_of_definition() {
    let dist = Distribution::normal(0.0, 1.0).unwrap();
    for alpha in [0.01, 0.025, 0.05, 0.5] {
        let oracle = es_quadrature_oracle(alpha);
        let closed = es_of(&dist, lvl(alpha));
        assert!((closed - oracle).abs() < 1e-8, "α={alpha}: {closed} vs {oracle}");
    }
    assert!((es_quadrature_oracle(0.025) + 2.337_80).abs() < 1e-5);
}

#[test]
fn normal_es_location_scale_against_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let mu = rng.random_range(-3.0..3.0);
        let sigma = rng.random_range(0.2..4.0);
        let alpha = rng.random_range(0.005..0.6);
        let oracle = mu + sigma * es_quadrature_oracle(alpha);
        let got = es_of(&Distribution::normal(mu, sigma).unwrap(), lvl(alpha));
        assert!((got - oracle).abs() < 1e-7 * (1.0 + sigma), "{mu} {sigma} {alpha}");
    }
}

#[test]
fn normal_risk_pair_for_unconditional_model() {
    let q = quantile_oracle(0.025);
    let pair = normal_risk_pair(0.0, std::f64::consts::SQRT_2, lvl(0.025)).unwrap();
    assert!((pair.var - std::f64::consts::SQRT_2 * q).abs() < 1e-10);
    assert!((pair.es + std::f64::consts::SQRT_2 / 0.025 * density(q)).abs() < 1e-9);
}

fn exact_binomial_cdf(n: u32, k: u32) -> BigRational {
    // p = 1/100 exactly
    let p = BigRational::new(BigInt::one(), BigInt::from(100));
    let q = BigRational::one() - &p;
    let mut total = BigRational::zero();
    let mut choose = BigInt::one();
    for j in 0..=k {
        if j > 0 {
            choose = choose * BigInt::from(n - j + 1) / BigInt::from(j);
        }
        let term = BigRational::from_integer(choose.clone())
            * num_traits::pow(p.clone(), j as usize)
            * num_traits::pow(q.clone(), (n - j) as usize);
        total += term;
    }
    total
}

#[test]
fn traffic_light_boundaries_against_exact_binomial() {
    let n = 250;
    let green = BigRational::new(BigInt::from(95), BigInt::from(100));
    let red = BigRational::new(BigInt::from(9999), BigInt::from(10000));
    let cdf: Vec<BigRational> = (0..=n).map(|k| exact_binomial_cdf(n, k)).collect();
    let k_g = cdf.iter().rposition(|c| *c < green).unwrap();
    let k_r = cdf.iter().position(|c| *c >= red).unwrap();
    assert_eq!((k_g, k_r), (4, 10));
    assert_eq!(TrafficLightConfig::default().boundaries(), (Some(k_g), k_r));

    let cfg = TrafficLightConfig::default();
    for k in [0usize, 3, 4, 5, 9, 10, 20] {
        let records: Vec<(f64, f64)> = (0..250).map(|t| (0.0, if t < k { -1.0 } else { 1.0 })).collect();
        let got = traffic_light_var(&cfg, &records).unwrap();
        let upper = if k == 0 { 1.0 } else { (BigRational::one() - &cdf[k - 1]).to_f64().unwrap() };
        assert!((got.p_value - upper).abs() <= 1e-10 * upper, "k={k}");
    }
}

#[test]
fn traffic_light_null_frequencies_match_binomial_probabilities() {
    let cfg = TrafficLightConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let reps = 10_000;
    let mut counts = [0usize; 3];
    for _ in 0..reps {
        // Uniform PIT below α is an exceedance of a correct VaR forecast.
        let records: Vec<(f64, f64)> = (0..250).map(|_| (0.01, rng.random::<f64>())).collect();
        match traffic_light_var(&cfg, &records).unwrap().zone {
            Zone::Green => counts[0] += 1,
            Zone::Yellow => counts[1] += 1,
            Zone::Red => counts[2] += 1,
        }
    }
    let p_green = exact_binomial_cdf(250, 4).to_f64().unwrap();
    let p_red = 1.0 - exact_binomial_cdf(250, 9).to_f64().unwrap();
    let pct = |c: usize| 100.0 * c as f64 / reps as f64;
    assert!((pct(counts[0]) - 100.0 * p_green).abs() < 1.0);
    assert!((pct(counts[2]) - 100.0 * p_red).abs() < 1.0);
}

/// Null probability that the ES coverage test is green, computed exactly:
/// the number of tail hits is Binomial(n, α) and, given `K`, severities are
/// iid uniform, so their sum follows the Irwin-Hall law.
fn es_null_green_probability(n: usize, alpha: f64) -> f64 {
    let z95 = quantile_oracle(0.95);
    let threshold = n as f64 * (alpha / 2.0 + z95 * ((alpha / 3.0 - alpha * alpha / 4.0) / n as f64).sqrt());
    let irwin_hall = |x: f64, k: usize| -> f64 {
        if k == 0 {
            return 1.0;
        }
        let mut s = 0.0;
        let mut choose = 1.0;
        let mut fact = 1.0;
        for i in 1..=k {
            fact *= i as f64;
        }
        for j in 0..=(x.floor() as usize).min(k) {
            if j > 0 {
                choose *= (k - j + 1) as f64 / j as f64;
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * choose * (x - j as f64).powi(k as i32);
        }
        (s / fact).clamp(0.0, 1.0)
    };
    let mut total = 0.0;
    let mut pmf = (1.0 - alpha).powi(n as i32);
    for k in 0..=60.min(n) {
        if k > 0 {
            pmf *= (n - k + 1) as f64 / k as f64 * alpha / (1.0 - alpha);
        }
        total += pmf * irwin_hall(threshold, k);
    }
    total
}

#[test]
fn es_coverage_null_green_rate_matches_exact_law() {
    let exact = es_null_green_probability(250, 0.025);
    assert!((exact - 0.9378).abs() < 5e-4, "{exact}");

    let mut rng = ChaCha8Rng::seed_from_u64(123);
    let reps = 10_000;
    let green = (0..reps)
        .filter(|_| {
            let pits: Vec<f64> = (0..250).map(|_| rng.random::<f64>()).collect();
            es_coverage_test(lvl(0.025), &pits, 250).unwrap().zone == Zone::Green
        })
        .count();
    let pct = 100.0 * green as f64 / reps as f64;
    assert!((pct - 100.0 * exact).abs() < 1.0, "{pct} vs {}", 100.0 * exact);
}

#[test]
fn expected_score_normal_against_simpson() {
    let spec = ScoringSpec::logistic(lvl(0.025));
    let dist = Distribution::normal(0.4, 1.3).unwrap();
    for &(v, e) in &[(-2.0, -2.5), (-1.0, -1.2), (0.5, -3.0)] {
        let density = |x: f64| {
            let z = (x - 0.4) / 1.3;
            score_var_es(&spec, v, e, x) * density(z) / 1.3
        };
        let oracle =
            simpson(&density, 0.4 - 13.0, v, 1e-12, 22) + simpson(&density, v, 0.4 + 13.0, 1e-12, 22);
        let got = expected_score(&spec, &dist, v, e).unwrap();
        assert!((got - oracle).abs() < 1e-8, "{got} vs {oracle}");
    }
}

/// All `(v, e)` minimisers: if `nα` is an integer `k < n`, every `v` in
/// `[x_k, x_{k+1}]` is an α-quantile and minimises the expected score.
fn minimiser_segment(values: &[f64], alpha: f64, truth: RiskPair) -> (f64, f64) {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let k = (alpha * n as f64).round() as usize;
    if k >= 1 && k < n && (k as f64 / n as f64 - alpha).abs() < 1e-12 {
        (sorted[k - 1], sorted[k])
    } else {
        (truth.var, truth.var)
    }
}

#[test]
fn consistency_on_small_empirical_distributions() {
    let mut rng = ChaCha8Rng::seed_from_u64(2015);
    let step = 0.05;
    let grid_v: Vec<f64> = (0..=100).map(|i| -2.5 + i as f64 * step).collect();
    for case in 0..30 {
        let (alpha, n) = match case % 3 {
            0 => (0.25, rng.random_range(1..=8usize)),
            1 => (0.5, rng.random_range(1..=8usize)),
            _ => (0.025, 40),
        };
        let atoms: Vec<f64> =
            (0..rng.random_range(1..=8usize)).map(|_| rng.random_range(-40i32..=40) as f64 * step).collect();
        let values: Vec<f64> = (0..n).map(|i| atoms[i % atoms.len()]).collect();
        let dist = Distribution::empirical(values.clone()).unwrap();
        let spec = ScoringSpec::logistic(lvl(alpha));
        let truth = RiskPair { var: var_of(&dist, lvl(alpha)), es: es_of(&dist, lvl(alpha)) };
        let at_truth = expected_score(&spec, &dist, truth.var, truth.es).unwrap();
        let (seg_lo, seg_hi) = minimiser_segment(&values, alpha, truth);

        for &v in &grid_v {
            for &e in &grid_v {
                let s = expected_score(&spec, &dist, v, e).unwrap();
                assert!(at_truth <= s + 1e-12, "case {case}: ({v}, {e}) beats truth {truth:?}");
                // Strictly worse away from the minimiser set.
                let off = (v < seg_lo - 1e-9 || v > seg_hi + 1e-9) || (e - truth.es).abs() > 1e-9;
                if off {
                    assert!(s > at_truth, "case {case}: tie at ({v}, {e})");
                }
            }
        }
    }
}

#[test]
fn strictness_at_desk_scale() {
    let spec = ScoringSpec::logistic(lvl(0.025));
    let dist = Distribution::normal(0.0, 1.0).unwrap();
    let truth = normal_risk_pair(0.0, 1.0, lvl(0.025)).unwrap();
    let at_truth = expected_score(&spec, &dist, truth.var, truth.es).unwrap();
    for i in 0..=40 {
        for j in 0..=40 {
            let (v, e) = (-4.0 + 0.1 * i as f64, -4.0 + 0.1 * j as f64);
            let far = (v - truth.var).abs().max((e - truth.es).abs()) > 0.1;
            if far {
                let s = expected_score(&spec, &dist, v, e).unwrap();
                assert!(s - at_truth > 1e-10, "({v}, {e}): gap {}", s - at_truth);
            }
        }
    }
    // Sanity on the oracle quantile feeding the truth.
    assert!((truth.var - normal::quantile(0.025)).abs() < 1e-15);
}
