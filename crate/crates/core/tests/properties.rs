use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use uw_ofdm::channel::{cyclic_convolve, freq_response, transmit_with_rng};
use uw_ofdm::linalg::{dft_apply, idft_apply};
use uw_ofdm::sim::{monotonicity_violations, run_sweep};
use uw_ofdm::{
    build_generator, build_receiver, Approach, ChannelTaps, GeneratorMatrices, SequenceKind,
    SequenceSpec, SystemConfig, UniqueWord,
};

fn default_gen() -> (SystemConfig, GeneratorMatrices) {
    let cfg = SystemConfig::default_80211a_like();
    let gen = build_generator(&cfg).unwrap();
    (cfg, gen)
}

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(
        (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(re, im)| Complex64::new(re, im)),
        len,
    )
}

fn max_dev(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dft_round_trip(v in complex_vec(64)) {
        let back = idft_apply(&dft_apply(&v).unwrap()).unwrap();
        prop_assert!(max_dev(&v, &back) < 1e-12);
    }

    #[test]
    fn tail_equals_uw(data in complex_vec(36), uw in complex_vec(16)) {
        let (cfg, gen) = default_gen();
        let uw = UniqueWord::new(uw, "p").unwrap();
        for approach in [Approach::TwoStep, Approach::Direct] {
            let s = gen.generate(approach, &data, &uw).unwrap();
            prop_assert!(max_dev(&s.time[cfg.n_total - 16..], &uw.samples) < 1e-10);
        }
    }

    #[test]
    fn generation_is_affine(a in complex_vec(36), b in complex_vec(36), uw in complex_vec(16), k in -3.0f64..3.0) {
        // x(a + k b) - x(0) = (x(a) - x(0)) + k (x(b) - x(0))
        let (_, gen) = default_gen();
        let uw = UniqueWord::new(uw, "p").unwrap();
        for approach in [Approach::TwoStep, Approach::Direct] {
            let t = |d: &[Complex64]| gen.generate(approach, d, &uw).unwrap().time;
            let zero = t(&[Complex64::new(0.0, 0.0); 36]);
            let mixed: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x + k * y).collect();
            let (ta, tb, tm) = (t(&a), t(&b), t(&mixed));
            let predicted: Vec<Complex64> = (0..64).map(|i| ta[i] - zero[i] + k * (tb[i] - zero[i]) + zero[i]).collect();
            prop_assert!(max_dev(&tm, &predicted) < 1e-8);
        }
    }

    #[test]
    fn validate_is_pure(extra in 0usize..64) {
        let mut cfg = SystemConfig::default_80211a_like();
        cfg.redundant_carrier_indices[0] = extra;
        let before = cfg.clone();
        let first = cfg.validate();
        let second = cfg.validate();
        prop_assert_eq!(&cfg, &before);
        prop_assert_eq!(first, second);
    }

    #[test]
    fn freq_response_matches_convolution(taps in complex_vec(4), x in complex_vec(64)) {
        prop_assume!(taps.iter().any(|t| t.norm() > 0.1));
        let cfg = SystemConfig::default_80211a_like();
        let taps = ChannelTaps::new(taps, "p").unwrap();
        let Ok(h) = freq_response(&taps, &cfg) else { return Ok(()) };
        let y = dft_apply(&cyclic_convolve(&x, &taps).unwrap()).unwrap();
        let xf = dft_apply(&x).unwrap();
        for (i, &k) in cfg.used_carrier_indices().iter().enumerate() {
            prop_assert!((y[k] - h[i] * xf[k]).norm() < 1e-9);
        }
    }
}

fn mse(
    gen: &GeneratorMatrices,
    cfg: &SystemConfig,
    approach: Approach,
    uw: &UniqueWord,
    spectrum_for: Approach,
) -> f64 {
    let taps = ChannelTaps::identity();
    let spectrum = gen.uw_spectrum(spectrum_for, uw).unwrap();
    let rx = build_receiver(gen, &taps, 1e-6, cfg.sigma2_d, &spectrum, cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let data: Vec<Complex64> = (0..36)
        .map(|i| Complex64::new(if i % 3 == 0 { r } else { -r }, r))
        .collect();
    let s = gen.generate(approach, &data, uw).unwrap();
    let received = transmit_with_rng(&s.time, &taps, 1e-6, &mut rng).unwrap();
    let est = rx.decode(&received).unwrap();
    est.iter()
        .zip(&data)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        / 36.0
}

#[test]
fn mismatched_uw_spectrum_degrades_estimates() {
    let (cfg, gen) = default_gen();
    let uw = SequenceSpec {
        kind: SequenceKind::ZadoffChu { root: 1 },
        pad_to: 16,
    }
    .resolve()
    .unwrap();
    for (approach, other) in [
        (Approach::TwoStep, Approach::Direct),
        (Approach::Direct, Approach::TwoStep),
    ] {
        let matched = mse(&gen, &cfg, approach, &uw, approach);
        let crossed = mse(&gen, &cfg, approach, &uw, other);
        assert!(matched < 1e-3, "{approach}: matched mse {matched}");
        assert!(
            crossed > 10.0 * matched,
            "{approach}: {crossed} vs {matched}"
        );
    }
}

#[test]
fn ber_falls_with_ebn0() {
    std::env::set_var("UW_OFDM_QUIET", "1");
    let cfg = SystemConfig::default_80211a_like();
    let mut spec = uw_ofdm::SweepSpec::new(
        vec![0.0, 4.0, 8.0, 12.0],
        vec![Approach::TwoStep, Approach::CpReference],
        vec![SequenceSpec {
            kind: SequenceKind::ZadoffChu { root: 1 },
            pad_to: 16,
        }],
    );
    spec.min_bit_errors = 300;
    spec.max_bits = 2_000_000;
    let points = run_sweep(&spec, &cfg).unwrap();
    for approach in [Approach::TwoStep, Approach::CpReference] {
        let curve: Vec<_> = points
            .iter()
            .filter(|p| p.approach == approach)
            .cloned()
            .collect();
        assert_eq!(curve.len(), 4);
        assert_eq!(monotonicity_violations(&curve), 0);
        assert!(curve[0].ber > curve[3].ber);
    }
}
