use proptest::prelude::*;
use qa_hybrid_core::algo_one::extract_phase;
use qa_hybrid_core::algo_two::{compute_nd, d_term, RegressorForm};
use qa_hybrid_core::analysis::allan_deviation;
use qa_hybrid_core::estimator::{pseudo_inverse, ExpAverage};
use qa_hybrid_core::{CycleInputs, InterferometerConfig, KernelSet};

fn phases() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-1e3..1e3f64)
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn n_vanishes_on_model_triplets(c in 0.01..1.0f64, p0 in 0.0..1.0f64, phi in phases()) {
        let p = phi.map(|x| p0 - 0.5 * c * x.cos());
        prop_assert!(compute_nd(p, phi).0.abs() < 1e-12);
    }

    #[test]
    fn constant_regressor_scales_d(a in -10.0..10.0f64, phi in phases()) {
        let (c, s) = (phi.map(f64::cos), phi.map(f64::sin));
        let d = d_term([1.0; 3], c, s, RegressorForm::SineWeighted);
        for form in [RegressorForm::SineWeighted, RegressorForm::CosineWeighted] {
            prop_assert!((d_term([a; 3], c, s, form) - a * d).abs() < 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn kernel_identities(m in 2usize..80, rate in prop::sample::select(vec![100.0, 250.0, 1000.0, 2000.0])) {
        let t = m as f64 / rate;
        let k = KernelSet::build(t, rate).unwrap();
        prop_assert_eq!(k.g.len(), 2 * m + 1);
        prop_assert!((k.g.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!((k.g1.iter().sum::<f64>() * t).abs() < 1e-12);
        prop_assert!((k.g2.iter().sum::<f64>() * t * t).abs() < 1e-12);
        let n = k.g.len();
        for i in 0..n {
            prop_assert!((k.g[i] - k.g[n - 1 - i]).abs() < 1e-15);
            prop_assert!((k.g1[i] + k.g1[n - 1 - i]).abs() * t < 1e-12);
        }
    }

    #[test]
    fn extracted_acceleration_reproduces_the_measurement(
        a in -5.0..5.0f64,
        offset in -1e-4..1e-4f64,
        control in -3.0..3.0f64,
    ) {
        let cfg = InterferometerConfig::default();
        let p = cfg.transition_probability(cfg.contrast, cfg.interferometer_phase(a, control), 0.0);
        let x = CycleInputs { p, phi_control: control, ..CycleInputs::default() };
        let a_c = a + offset;
        let q = extract_phase(&cfg, &x, a_c, cfg.contrast).unwrap();
        let back = cfg.transition_probability(cfg.contrast, cfg.interferometer_phase(q, control), 0.0);
        prop_assert!((back - p).abs() < 1e-9);
        prop_assert!((q - a_c).abs() <= 0.5 * cfg.fringe_spacing() + 1e-12);
    }

    #[test]
    fn pseudo_inverse_is_bounded(x in -1e3..1e3f64, s2 in 1e-12..1e3f64) {
        prop_assert!(pseudo_inverse(x, s2).abs() <= 0.5 / s2.sqrt() * (1.0 + 1e-12));
    }

    #[test]
    fn allan_deviation_scales_with_the_series(x in prop::collection::vec(-1.0..1.0f64, 32..400), c in -50.0..50.0f64) {
        let base = allan_deviation(&x, 0.1).unwrap();
        let y: Vec<f64> = x.iter().map(|v| c * v).collect();
        let scaled = allan_deviation(&y, 0.1).unwrap();
        prop_assert_eq!(&base.taus, &scaled.taus);
        for (s, b) in scaled.sigma.iter().zip(&base.sigma) {
            prop_assert!((s - c.abs() * b).abs() <= 1e-12 * (1.0 + s.abs()));
        }
    }

    #[test]
    fn exp_average_of_a_constant_is_the_constant(v in -1e3..1e3f64, alpha in 1e-4..1.0f64, n in 1usize..200) {
        let mut avg = ExpAverage::new(alpha);
        for _ in 0..n {
            avg.update(v);
        }
        prop_assert!((avg.value() - v).abs() <= 1e-12 * (1.0 + v.abs()));
        prop_assert_eq!(avg.is_warm(), n >= ExpAverage::WARMUP as usize);
    }
}
