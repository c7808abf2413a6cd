//! Closed-form mean symbol energies of both UW generation approaches.
//!
//! With data symbols of variance `σ_d²` averaged out:
//!
//! * data carriers: `E_d = N_d σ_d² / N`
//! * redundant carriers: `E_r = σ_d² tr(T T^H) / N`
//! * unique word, two-step: `E_u = x_u^H x_u`
//! * unique word, direct: `E_u = x_u^H M22^{-H} M22^{-1} x_u / N`
//!
//! The direct value is never below the two-step one; the difference is the
//! excess energy, which sits entirely on the redundant carriers.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::generator::{Approach, GeneratorMatrices};
use crate::sequences::UniqueWord;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub approach: Approach,
    pub e_d: f64,
    pub e_r: f64,
    pub e_u: f64,
    pub e_total: f64,
    /// `x_u^H x_u`.
    pub uw_energy: f64,
    /// `e_u - x_u^H x_u` for the direct approach, zero otherwise.
    pub excess: f64,
}

fn data_and_redundant(gen: &GeneratorMatrices, config: &SystemConfig) -> (f64, f64) {
    let n = config.n_total as f64;
    let e_d = config.n_data as f64 * config.sigma2_d / n;
    let e_r = config.sigma2_d / n * gen.trace_tth();
    (e_d, e_r)
}

pub fn energy_two_step(
    gen: &GeneratorMatrices,
    config: &SystemConfig,
    uw: &UniqueWord,
) -> EnergyBreakdown {
    let (e_d, e_r) = data_and_redundant(gen, config);
    let e_u = uw.energy();
    EnergyBreakdown {
        approach: Approach::TwoStep,
        e_d,
        e_r,
        e_u,
        e_total: e_d + e_r + e_u,
        uw_energy: e_u,
        excess: 0.0,
    }
}

/// `(1/N) ‖M22^{-1} x_u‖²`.
pub fn direct_uw_energy(gen: &GeneratorMatrices, uw: &UniqueWord) -> Result<f64> {
    let loading = gen.redundant_uw_loading(uw)?;
    Ok(loading.iter().map(|z| z.norm_sqr()).sum::<f64>() / gen.config().n_total as f64)
}

pub fn energy_direct(
    gen: &GeneratorMatrices,
    config: &SystemConfig,
    uw: &UniqueWord,
) -> Result<EnergyBreakdown> {
    let (e_d, e_r) = data_and_redundant(gen, config);
    let e_u = direct_uw_energy(gen, uw)?;
    let uw_energy = uw.energy();
    Ok(EnergyBreakdown {
        approach: Approach::Direct,
        e_d,
        e_r,
        e_u,
        e_total: e_d + e_r + e_u,
        uw_energy,
        excess: (e_u - uw_energy).max(0.0),
    })
}

/// `10 log10(e_a / e_b)`.
pub fn db_shift(e_a: f64, e_b: f64) -> Result<f64> {
    if !(e_a > 0.0 && e_b > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "energies must be positive (got {e_a} and {e_b})"
        )));
    }
    Ok(10.0 * (e_a / e_b).log10())
}

/// Summary of `x_u^H x_u <= (1/N) x_u^H M22^{-H} M22^{-1} x_u` over random
/// unique words; ratios are right side over left side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityReport {
    pub trials: usize,
    pub min_ratio: f64,
    pub mean_ratio: f64,
    pub max_ratio: f64,
}

/// Left and right side of the excess energy inequality for one UW.
pub fn inequality_sides(gen: &GeneratorMatrices, uw: &UniqueWord) -> Result<(f64, f64)> {
    Ok((uw.energy(), direct_uw_energy(gen, uw)?))
}

/// Checks the inequality for `trials` complex Gaussian unique words.
/// The right side may undershoot the left by `1e-12` relative.
pub fn verify_inequality(
    gen: &GeneratorMatrices,
    trials: usize,
    seed: u64,
) -> Result<InequalityReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument(
            "at least one trial is required".into(),
        ));
    }
    let n_uw = gen.config().n_uw;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut min, mut max, mut sum) = (f64::INFINITY, 0.0f64, 0.0);
    for _ in 0..trials {
        let samples = (0..n_uw)
            .map(|_| {
                Complex64::new(
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                )
            })
            .collect();
        let uw = UniqueWord::new(samples, "random")?;
        let (lhs, rhs) = inequality_sides(gen, &uw)?;
        if rhs < lhs - 1e-12 * lhs {
            return Err(Error::InequalityViolation {
                lhs,
                rhs,
                uw: uw.samples,
            });
        }
        let ratio = rhs / lhs;
        min = min.min(ratio);
        max = max.max(ratio);
        sum += ratio;
    }
    Ok(InequalityReport {
        trials,
        min_ratio: min,
        mean_ratio: sum / trials as f64,
        max_ratio: max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::build_generator;
    use crate::sequences::{scale_to_fraction, zadoff_chu};
    use rand::Rng;

    fn setup() -> (GeneratorMatrices, SystemConfig) {
        let cfg = SystemConfig::default_80211a_like();
        (build_generator(&cfg).unwrap(), cfg)
    }

    fn qpsk(rng: &mut impl Rng, n: usize) -> Vec<Complex64> {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        (0..n)
            .map(|_| {
                Complex64::new(
                    if rng.random() { r } else { -r },
                    if rng.random() { r } else { -r },
                )
            })
            .collect()
    }

    fn scaled_zc(gen: &GeneratorMatrices, cfg: &SystemConfig) -> UniqueWord {
        let base = energy_two_step(gen, cfg, &UniqueWord::zero(16));
        scale_to_fraction(&zadoff_chu(16, 1).unwrap(), cfg, base.e_d + base.e_r).unwrap()
    }

    #[test]
    fn two_step_examples() {
        let (gen, cfg) = setup();
        let e = energy_two_step(&gen, &cfg, &UniqueWord::zero(16));
        assert_eq!(e.e_u, 0.0);
        assert_eq!(e.e_d, 0.5625);
        assert_eq!(e.excess, 0.0);
        assert!((e.e_total - (e.e_d + e.e_r + e.e_u)).abs() <= 1e-12 * e.e_total);
    }

    #[test]
    fn redundant_energy_monte_carlo() {
        let (gen, cfg) = setup();
        let analytic = energy_two_step(&gen, &cfg, &UniqueWord::zero(16)).e_r;
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let trials = 10_000;
        let mc: f64 = (0..trials)
            .map(|_| {
                let r = gen.t_matrix.mul_vec(&qpsk(&mut rng, 36)).unwrap();
                r.iter().map(|z| z.norm_sqr()).sum::<f64>() / 64.0
            })
            .sum::<f64>()
            / trials as f64;
        assert!((mc / analytic - 1.0).abs() < 0.02, "{mc} vs {analytic}");
    }

    #[test]
    fn direct_examples() {
        let (gen, cfg) = setup();
        let zero = UniqueWord::zero(16);
        let d = energy_direct(&gen, &cfg, &zero).unwrap();
        let t = energy_two_step(&gen, &cfg, &zero);
        assert_eq!((d.e_u, d.excess), (0.0, 0.0));
        assert_eq!((d.e_d, d.e_r, d.e_total), (t.e_d, t.e_r, t.e_total));

        let uw = scaled_zc(&gen, &cfg);
        let d = energy_direct(&gen, &cfg, &uw).unwrap();
        assert!(d.e_u >= uw.energy());
        assert!((d.excess - (d.e_u - uw.energy())).abs() < 1e-12);
        // E_r does not depend on the unique word.
        assert_eq!(d.e_r, energy_two_step(&gen, &cfg, &uw).e_r);
    }

    #[test]
    fn direct_energy_monte_carlo() {
        let (gen, cfg) = setup();
        let uw = scaled_zc(&gen, &cfg);
        let e = energy_direct(&gen, &cfg, &uw).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let trials = 10_000;
        let mean_red: f64 = (0..trials)
            .map(|_| {
                let s = gen.generate_direct(&qpsk(&mut rng, 36), &uw).unwrap();
                s.redundant_symbols
                    .iter()
                    .map(|z| z.norm_sqr())
                    .sum::<f64>()
                    / 64.0
            })
            .sum::<f64>()
            / trials as f64;
        let mc = mean_red - e.e_r;
        assert!((mc / e.e_u - 1.0).abs() < 0.02, "{mc} vs {}", e.e_u);
    }

    #[test]
    fn two_step_total_matches_time_domain() {
        let (gen, cfg) = setup();
        let uw = scaled_zc(&gen, &cfg);
        let e = energy_two_step(&gen, &cfg, &uw);
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let trials = 10_000;
        let mc: f64 = (0..trials)
            .map(|_| {
                let s = gen.generate_two_step(&qpsk(&mut rng, 36), &uw).unwrap();
                s.time.iter().map(|z| z.norm_sqr()).sum::<f64>()
            })
            .sum::<f64>()
            / trials as f64;
        assert!((mc / e.e_total - 1.0).abs() < 0.02);
    }

    #[test]
    fn db_shift_examples() {
        assert!((db_shift(9.96, 1.25).unwrap() - 9.01).abs() < 0.01);
        assert_eq!(db_shift(3.3, 3.3).unwrap(), 0.0);
        assert!((db_shift(2.0, 1.0).unwrap() - 3.0103).abs() < 1e-4);
        assert!(db_shift(0.0, 1.0).is_err());
        assert!(db_shift(1.0, -1.0).is_err());
    }

    #[test]
    fn inequality_holds() {
        let (gen, _) = setup();
        let (l, r) = inequality_sides(&gen, &UniqueWord::zero(16)).unwrap();
        assert_eq!((l, r), (0.0, 0.0));
        let report = verify_inequality(&gen, 1000, 5).unwrap();
        assert_eq!(report.trials, 1000);
        assert!(report.min_ratio >= 1.0 - 1e-12);
        assert!(report.min_ratio <= report.mean_ratio && report.mean_ratio <= report.max_ratio);
        assert!(verify_inequality(&gen, 0, 5).is_err());
    }
}
