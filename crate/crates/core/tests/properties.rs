mod common;

use approx::assert_relative_eq;
use modal_lab::config::DensitySpec;
use modal_lab::elicitation::{expected_identification, PolynomialIdentification};
use modal_lab::simulation::{count_curve, empirical_modal_estimate, SampleBatch};
use modal_lab::MixtureDensity;
use proptest::prelude::*;

use common::{brute_force_modal, OracleDensity};

fn gaussian_mixture() -> impl Strategy<Value = MixtureDensity> {
    prop::collection::vec((0.05f64..1.0, -5.0f64..5.0, 0.2f64..2.0), 1..5).prop_map(|parts| {
        let params: Vec<(f64, f64)> = parts.iter().map(|p| (p.1, p.2)).collect();
        let weights: Vec<f64> = parts.iter().map(|p| p.0).collect();
        MixtureDensity::gaussian(&params, &weights).unwrap().normalize()
    })
}

fn bump_mixture() -> impl Strategy<Value = MixtureDensity> {
    (0.2f64..2.0, prop::collection::vec((0.05f64..1.0, -5.0f64..5.0), 1..5)).prop_map(|(eps, parts)| {
        let centers: Vec<f64> = parts.iter().map(|p| p.1).collect();
        let weights: Vec<f64> = parts.iter().map(|p| p.0).collect();
        MixtureDensity::bump(&centers, eps, &weights).unwrap().normalize()
    })
}

fn any_mixture() -> impl Strategy<Value = MixtureDensity> {
    prop_oneof![gaussian_mixture(), bump_mixture()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pdf_matches_oracle(d in any_mixture(), u in 0.0f64..1.0) {
        let oracle = OracleDensity::new(&DensitySpec::from_density(&d));
        let (lo, hi) = d.support();
        let x = lo + u * (hi - lo);
        let p = d.pdf(x);
        prop_assert!(p >= 0.0);
        prop_assert!((p - oracle.pdf(x)).abs() <= 1e-12 * (1.0 + oracle.pdf(x)));
    }

    #[test]
    fn cdf_is_monotone(d in any_mixture(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (lo, hi) = d.support();
        let (x, y) = (lo + a.min(b) * (hi - lo), lo + a.max(b) * (hi - lo));
        let (fx, fy) = (d.cdf(x).unwrap(), d.cdf(y).unwrap());
        prop_assert!(fx <= fy + 1e-14);
        prop_assert!((-1e-14..=1.0 + 1e-12).contains(&fx));
    }

    #[test]
    fn mode_ignores_scaling(d in any_mixture(), c in 0.01f64..100.0) {
        let a = d.mode().unwrap().location;
        let b = d.scaled(c).unwrap().mode().unwrap().location;
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn expected_identification_is_linear(
        p in gaussian_mixture(),
        q in gaussian_mixture(),
        lambda in 0.0f64..1.0,
        r in prop::collection::vec(-3.0f64..3.0, 2),
    ) {
        let v = PolynomialIdentification::moments(2);
        let mut params: Vec<(f64, f64)> = Vec::new();
        let mut weights = Vec::new();
        for (d, s) in [(&p, lambda), (&q, 1.0 - lambda)] {
            for (c, w) in d.components().iter().zip(d.weights()) {
                params.push((c.center(), c.scale()));
                weights.push(s * w);
            }
        }
        let mix = MixtureDensity::gaussian(&params, &weights).unwrap();
        let ep = expected_identification(&v, &p, &r).unwrap();
        let eq = expected_identification(&v, &q, &r).unwrap();
        let em = expected_identification(&v, &mix, &r).unwrap();
        for j in 0..2 {
            assert_relative_eq!(em[j], lambda * ep[j] + (1.0 - lambda) * eq[j], epsilon = 1e-9);
        }
    }

    #[test]
    fn estimator_matches_brute_force(
        values in prop::collection::vec(-1000i32..1000, 1..300),
        scale in 1u32..6,
        eps_num in 1u32..200,
    ) {
        let values: Vec<f64> = values.into_iter().map(|v| v as f64 / (1u32 << scale) as f64).collect();
        let eps = eps_num as f64 / 128.0;
        let batch = SampleBatch::new(values, 0);
        let fast = empirical_modal_estimate(&batch, eps).unwrap();
        prop_assert_eq!((fast.location, fast.count), brute_force_modal(batch.values(), eps));
        prop_assert_eq!(batch.count_within(fast.location, eps), fast.count);
    }

    #[test]
    fn window_count_grows_with_width(values in prop::collection::vec(-5.0f64..5.0, 1..200), eps in 0.01f64..1.0) {
        let batch = SampleBatch::new(values, 0);
        let narrow = count_curve(&batch, eps, -6.0, 6.0, 50);
        let wide = count_curve(&batch, 2.0 * eps, -6.0, 6.0, 50);
        for ((x, a), (_, b)) in narrow.iter().zip(&wide) {
            prop_assert!(a <= b, "at {}", x);
        }
    }

    #[test]
    fn sampling_is_deterministic(d in any_mixture(), seed in any::<u64>()) {
        let a = d.sample(100, seed).unwrap();
        let b = d.sample(100, seed).unwrap();
        prop_assert_eq!(a.values(), b.values());
    }
}
