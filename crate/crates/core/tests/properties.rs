use mmrisk::bounds::{divergences, ipm, lecam_distance, total_variation, wasserstein1};
use mmrisk::estimators::{robust_filter_mean, sample_mean, FilterConfig};
use mmrisk::harness::{fit_rate, split_budget};
use mmrisk::linalg;
use mmrisk::optimizer::{batch_schedule, fixed_batch, warmup_length};
use mmrisk::oracles::{draw_sl, Observation, Seed};
use mmrisk::problems::{
    DataDistribution, DiscreteDistribution, FunctionClass, GradientField, Objective,
    QuadraticInstance,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn law(weights: Vec<u32>) -> DiscreteDistribution<f64> {
    let total: u32 = weights.iter().sum();
    DiscreteDistribution::new(
        (0..weights.len()).map(|i| vec![i as f64]).collect(),
        weights.iter().map(|&w| w as f64 / total as f64).collect(),
    )
    .unwrap()
}

fn weights(max: usize) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0u32..20, 1..=max).prop_filter("some mass", |w| w.iter().any(|&x| x > 0))
}

fn exact(w: &[u32], len: usize) -> Vec<BigRational> {
    let total: u32 = w.iter().sum();
    (0..len)
        .map(|i| {
            let x = w.get(i).copied().unwrap_or(0);
            BigRational::new(BigInt::from(x), BigInt::from(total))
        })
        .collect()
}

proptest! {
    #[test]
    fn lecam_below_tv_exactly(p in weights(12), q in weights(12)) {
        let len = p.len().max(q.len());
        let (pe, qe) = (exact(&p, len), exact(&q, len));
        prop_assert!(lecam_distance(&pe, &qe) <= total_variation(&pe, &qe));
        prop_assert_eq!(lecam_distance(&pe, &qe), lecam_distance(&qe, &pe));
    }

    #[test]
    fn divergence_ordering_in_floating_point(p in weights(16), q in weights(16)) {
        let d = divergences(&law(p.clone()), &law(q.clone()));
        prop_assert!(d.lecam <= d.tv + 1e-12);
        prop_assert!(d.lecam <= d.kl + 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&d.tv));
        prop_assert!(d.kl >= -1e-12);
        let same = divergences(&law(p.clone()), &law(p));
        prop_assert!(same.tv.abs() < 1e-12 && same.lecam.abs() < 1e-12 && same.kl.abs() < 1e-12);
    }

    #[test]
    fn bnd_ipm_matches_sign_pattern_search(p in weights(8), q in weights(8), b in 0.1f64..3.0) {
        let (p, q) = (law(p), law(q));
        let len = p.len().max(q.len());
        let mass = |d: &DiscreteDistribution<f64>, i: usize| d.mass_of(&[i as f64]);
        let mut best = 0.0f64;
        for mask in 0u32..(1 << len) {
            let gap: f64 = (0..len)
                .map(|i| if mask >> i & 1 == 1 { b } else { -b } * (mass(&p, i) - mass(&q, i)))
                .sum();
            best = best.max(gap.abs());
        }
        let v = ipm(&FunctionClass::bnd(b), &p, &q).unwrap();
        prop_assert!((v - best).abs() < 1e-9, "{} vs {}", v, best);
    }

    #[test]
    fn lip_ipm_on_the_line_is_cdf_area(p in weights(8), q in weights(8)) {
        let (p, q) = (law(p), law(q));
        let len = p.len().max(q.len());
        let (mut fp, mut fq, mut area) = (0.0, 0.0, 0.0);
        for i in 0..len.saturating_sub(1) {
            fp += p.mass_of(&[i as f64]);
            fq += q.mass_of(&[i as f64]);
            area += (fp - fq).abs();
        }
        let w = wasserstein1(p.atoms(), p.weights(), q.atoms(), q.weights()).unwrap();
        prop_assert!((w - area).abs() < 1e-9, "{} vs {}", w, area);
        let v = ipm(&FunctionClass::lip(2.0), &p, &q).unwrap();
        prop_assert!((v - 2.0 * area).abs() < 1e-9);
    }

    #[test]
    fn population_objective_is_strongly_convex(
        mu in 0.1f64..5.0,
        x in prop::collection::vec(-5.0f64..5.0, 2),
        y in prop::collection::vec(-5.0f64..5.0, 2),
        c in prop::collection::vec(-3.0f64..3.0, 2),
    ) {
        let inst = QuadraticInstance::new(GradientField::constant(c, 1), mu, 2.0 * mu).unwrap();
        let d: DataDistribution<f64> = DiscreteDistribution::point_mass(vec![0.0]).into();
        let f = inst.population(&d).unwrap();
        let lhs = f.value(&y);
        let rhs = f.value(&x) + linalg::dot(&f.gradient(&x), &linalg::sub(&y, &x)) + mu / 2.0 * linalg::dist_sq(&x, &y);
        prop_assert!(lhs >= rhs - 1e-9 * (1.0 + lhs.abs()));
        prop_assert!(f.excess(&x) >= -1e-12);
    }

    #[test]
    fn mean_estimators_are_translation_equivariant(
        rows in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 2), 3..40),
        c in prop::collection::vec(-50.0f64..50.0, 2),
    ) {
        let o = Observation::new(rows);
        let a = sample_mean(&o).unwrap();
        let b = sample_mean(&o.shifted(&c)).unwrap();
        prop_assert!(linalg::dist(&linalg::add(&a, &c), &b) < 1e-9);
        let cfg = FilterConfig::default();
        let a = robust_filter_mean(&o, 0.1, &cfg).unwrap().value;
        let b = robust_filter_mean(&o.shifted(&c), 0.1, &cfg).unwrap().value;
        prop_assert!(linalg::dist(&linalg::add(&a, &c), &b) < 1e-6);
    }

    #[test]
    fn schedule_respects_budget(n in 3usize..5000, kappa in 1.0f64..64.0) {
        let s = batch_schedule(n, kappa).unwrap();
        prop_assert!(s.iter().sum::<usize>() <= n - 1);
        prop_assert!(s.iter().all(|&b| b >= 1));
        prop_assert!(s.len() <= (n - 1) / 2);
    }

    #[test]
    fn fixed_batch_respects_budget(n in 3usize..5000, kappa in 1.0f64..16.0, a in 0.05f64..2.0) {
        if let Ok((b, t)) = fixed_batch(n, kappa, a) {
            prop_assert!(b >= 1);
            prop_assert!(b * t <= n - 1);
        }
    }

    #[test]
    fn warmup_grows_with_precision(v in -10.0f64..10.0, noise in 0.0f64..4.0, kappa in 1.0f64..10.0) {
        let coarse = warmup_length(&[v], noise, 1e-4, kappa, 1.0).unwrap();
        let fine = warmup_length(&[v], noise, 1e-8, kappa, 1.0).unwrap();
        prop_assert!(fine >= coarse);
    }

    #[test]
    fn power_law_slope_is_recovered(c in 0.01f64..100.0, s in -3.0f64..1.0) {
        let pts: Vec<(f64, f64)> = [8.0, 16.0, 64.0, 256.0, 1024.0].iter().map(|&n: &f64| (n, c * n.powf(s))).collect();
        let f = fit_rate(&pts).unwrap();
        prop_assert!((f.slope - s).abs() < 1e-9);
        prop_assert!((f.intercept - c.ln()).abs() < 1e-8);
    }

    #[test]
    fn budget_split_is_exact(n in 1usize..5000, shares in prop::collection::vec(0.0f64..10.0, 1..6)) {
        prop_assume!(shares.iter().any(|&s| s > 0.0));
        let b = split_budget(n, &shares);
        prop_assert_eq!(b.iter().sum::<usize>(), n);
        for (k, s) in b.iter().zip(&shares) {
            if *s == 0.0 {
                prop_assert_eq!(*k, 0);
            }
        }
    }

    #[test]
    fn oracle_draws_are_reproducible(master in any::<u64>(), n in 1usize..64) {
        let d: DataDistribution<f64> = law(vec![1, 2, 3]).into();
        prop_assert_eq!(draw_sl(&d, n, Seed::oracle(master)).unwrap(), draw_sl(&d, n, Seed::oracle(master)).unwrap());
    }
}
