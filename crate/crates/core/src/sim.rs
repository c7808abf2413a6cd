//! Monte Carlo BER sweeps over Eb/N0.
//!
//! Eb counts every transmitted joule per information bit: data, redundant
//! carriers and the unique word for UW-OFDM; data, pilots and the cyclic
//! prefix for the CP-OFDM reference. Under this accounting the horizontal
//! gap between the direct and the two-step curves equals the ratio of their
//! mean symbol energies.
//!
//! Trials are grouped into chunks of `symbols_per_chunk` OFDM symbols. Each
//! chunk draws from its own ChaCha stream selected by `(seed, point, chunk)`
//! and chunks are merged in index order, so results do not depend on the
//! number of worker threads.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{transmit_with_rng, ChannelTaps};
use crate::config::SystemConfig;
use crate::energy::{energy_direct, energy_two_step, EnergyBreakdown};
use crate::error::{Error, Result};
use crate::generator::{build_generator, Approach, GeneratorMatrices};
use crate::receiver::{build_receiver, Constellation, CpOfdm, CpOfdmConfig, Modulation};
use crate::sequences::{scale_to_fraction, SequenceSpec, UniqueWord};

/// Error count from which a point is considered statistically usable.
pub const PUBLISHABLE_MIN_ERRORS: u64 = 100;

#[derive(Debug, Clone)]
pub struct SweepSpec {
    /// Ascending Eb/N0 values in dB.
    pub ebn0_db: Vec<f64>,
    pub approaches: Vec<Approach>,
    pub uw_specs: Vec<SequenceSpec>,
    pub taps: ChannelTaps,
    pub modulation: Modulation,
    pub min_bit_errors: u64,
    pub max_bits: u64,
    pub seed: u64,
    pub symbols_per_chunk: usize,
}

impl SweepSpec {
    pub fn new(ebn0_db: Vec<f64>, approaches: Vec<Approach>, uw_specs: Vec<SequenceSpec>) -> Self {
        Self {
            ebn0_db,
            approaches,
            uw_specs,
            taps: ChannelTaps::identity(),
            modulation: Modulation::Qpsk,
            min_bit_errors: 1000,
            max_bits: 10_000_000,
            seed: 0,
            symbols_per_chunk: 64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ebn0_db.is_empty() {
            return Err(Error::InvalidArgument("Eb/N0 list is empty".into()));
        }
        if self.ebn0_db.iter().any(|v| !v.is_finite())
            || self.ebn0_db.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidArgument(
                "Eb/N0 values must be finite and strictly ascending".into(),
            ));
        }
        if self.approaches.is_empty() {
            return Err(Error::InvalidArgument("no approach selected".into()));
        }
        let needs_uw = self.approaches.iter().any(|&a| a != Approach::CpReference);
        if needs_uw && self.uw_specs.is_empty() {
            return Err(Error::InvalidArgument(
                "UW-OFDM approaches need at least one unique word".into(),
            ));
        }
        if self.min_bit_errors == 0 || self.max_bits == 0 || self.symbols_per_chunk == 0 {
            return Err(Error::InvalidArgument(
                "min_bit_errors, max_bits and symbols_per_chunk must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub ebn0_db: f64,
    pub approach: Approach,
    pub uw_label: String,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
}

impl BerPoint {
    pub fn new(ebn0_db: f64, approach: Approach, uw_label: &str, bits: u64, errors: u64) -> Self {
        Self {
            ebn0_db,
            approach,
            uw_label: uw_label.to_string(),
            bits,
            errors,
            ber: if bits == 0 {
                0.0
            } else {
                errors as f64 / bits as f64
            },
        }
    }

    pub fn is_publishable(&self) -> bool {
        self.errors >= PUBLISHABLE_MIN_ERRORS
    }

    /// Binomial standard error `sqrt(p (1 - p) / n)`.
    pub fn std_error(&self) -> f64 {
        if self.bits == 0 {
            return 0.0;
        }
        (self.ber * (1.0 - self.ber) / self.bits as f64).sqrt()
    }

    /// 95 % Wilson score interval.
    pub fn wilson_interval(&self) -> (f64, f64) {
        wilson_interval(self.errors, self.bits, 1.959_963_984_540_054)
    }
}

/// Wilson score interval for `errors` successes out of `bits` trials.
pub fn wilson_interval(errors: u64, bits: u64, z: f64) -> (f64, f64) {
    if bits == 0 {
        return (0.0, 1.0);
    }
    let n = bits as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// `N0` for a target Eb/N0 given the mean symbol energy and the number of
/// information bits per OFDM symbol. With unit sample spacing `σ_n² = N0`.
pub fn noise_for_ebn0(e_total: f64, info_bits_per_symbol: usize, ebn0_db: f64) -> Result<f64> {
    if !(e_total > 0.0) || info_bits_per_symbol == 0 {
        return Err(Error::InvalidArgument(format!(
            "symbol energy ({e_total}) and bits per symbol ({info_bits_per_symbol}) must be positive"
        )));
    }
    let eb = e_total / info_bits_per_symbol as f64;
    Ok(eb / 10f64.powf(ebn0_db / 10.0))
}

/// `σ_n²` for a UW-OFDM symbol of energy `energy.e_total` carrying
/// `config.n_data` QAM symbols of `bits_per_symbol` bits each.
pub fn calibrate_noise(
    config: &SystemConfig,
    energy: &EnergyBreakdown,
    ebn0_db: f64,
    bits_per_symbol: usize,
) -> Result<f64> {
    noise_for_ebn0(energy.e_total, config.n_data * bits_per_symbol, ebn0_db)
}

#[allow(clippy::large_enum_variant)]
enum LinkKind {
    Uw {
        gen: GeneratorMatrices,
        uw: UniqueWord,
        approach: Approach,
    },
    Cp(CpOfdm),
}

/// A transmit/receive chain prepared for BER measurement.
pub struct Link {
    kind: LinkKind,
    config: SystemConfig,
    taps: ChannelTaps,
    constellation: Constellation,
    energy: f64,
    label: String,
}

type ChunkSimulator<'a> = Box<dyn Fn(usize, ChaCha8Rng) -> Result<Tally> + Sync + 'a>;

/// Outcome of one simulated chunk.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Tally {
    bits: u64,
    errors: u64,
}

impl Link {
    /// UW-OFDM chain. `uw` is used as given (no energy scaling).
    pub fn uw_ofdm(
        config: &SystemConfig,
        approach: Approach,
        uw: UniqueWord,
        taps: ChannelTaps,
        modulation: Modulation,
    ) -> Result<Self> {
        if approach == Approach::CpReference {
            return Err(Error::InvalidArgument(
                "use Link::cp_reference for the CP-OFDM baseline".into(),
            ));
        }
        let gen = build_generator(config)?.with_strict_zero_word(false);
        let energy = match approach {
            Approach::TwoStep => energy_two_step(&gen, config, &uw),
            _ => energy_direct(&gen, config, &uw)?,
        };
        Ok(Self {
            label: uw.label.clone(),
            kind: LinkKind::Uw { gen, uw, approach },
            config: config.clone(),
            taps,
            constellation: Constellation::new(modulation, config.sigma2_d)?,
            energy: energy.e_total,
        })
    }

    pub fn cp_reference(
        config: &SystemConfig,
        taps: ChannelTaps,
        modulation: Modulation,
    ) -> Result<Self> {
        let cp_config = CpOfdmConfig::default_80211a(config.sigma2_d);
        let energy = cp_config.mean_symbol_energy();
        Ok(Self {
            kind: LinkKind::Cp(CpOfdm::new(cp_config, taps.clone())?),
            config: config.clone(),
            taps,
            constellation: Constellation::new(modulation, config.sigma2_d)?,
            energy,
            label: "cp".into(),
        })
    }

    pub fn approach(&self) -> Approach {
        match &self.kind {
            LinkKind::Uw { approach, .. } => *approach,
            LinkKind::Cp(_) => Approach::CpReference,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Mean transmitted energy per OFDM symbol.
    pub fn symbol_energy(&self) -> f64 {
        self.energy
    }

    /// Information bits per OFDM symbol.
    pub fn info_bits_per_symbol(&self) -> usize {
        let carriers = match &self.kind {
            LinkKind::Uw { .. } => self.config.n_data,
            LinkKind::Cp(cp) => cp.config().n_data(),
        };
        carriers * self.constellation.bits_per_symbol()
    }

    pub fn noise_for_ebn0(&self, ebn0_db: f64) -> Result<f64> {
        noise_for_ebn0(self.energy, self.info_bits_per_symbol(), ebn0_db)
    }

    /// Runs chunks at noise variance `sigma2_n` until `min_errors` or
    /// `max_bits` is reached, returning `(bits, errors)`.
    pub fn measure(
        &self,
        sigma2_n: f64,
        min_errors: u64,
        max_bits: u64,
        symbols_per_chunk: usize,
        seed: u64,
        point: u32,
    ) -> Result<(u64, u64)> {
        let chunk_sim = self.chunk_simulator(sigma2_n)?;
        let batch = (rayon::current_num_threads() * 2).max(1) as u32;
        let mut total = Tally::default();
        let mut next = 0u32;
        loop {
            let tallies = (next..next + batch)
                .into_par_iter()
                .map(|chunk| chunk_sim(symbols_per_chunk, chunk_rng(seed, point, chunk)))
                .collect::<Result<Vec<Tally>>>()?;
            for t in tallies {
                total.bits += t.bits;
                total.errors += t.errors;
                if total.errors >= min_errors || total.bits >= max_bits {
                    return Ok((total.bits, total.errors));
                }
            }
            next += batch;
        }
    }

    fn chunk_simulator(&self, sigma2_n: f64) -> Result<ChunkSimulator<'_>> {
        let bits_per_ofdm = self.info_bits_per_symbol();
        let c = &self.constellation;
        match &self.kind {
            LinkKind::Uw { gen, uw, approach } => {
                // The receiver needs a positive noise variance to regularize.
                let rx_noise = sigma2_n.max(1e-12);
                let spectrum = gen.uw_spectrum(*approach, uw)?;
                let rx = build_receiver(
                    gen,
                    &self.taps,
                    rx_noise,
                    self.config.sigma2_d,
                    &spectrum,
                    &self.config,
                )?;
                Ok(Box::new(move |symbols, mut rng| {
                    let mut tally = Tally::default();
                    let mut bits = vec![0u8; bits_per_ofdm];
                    for _ in 0..symbols {
                        random_bits(&mut rng, &mut bits);
                        let frames = gen.generate(*approach, &c.map_bits(&bits)?, uw)?;
                        let r = transmit_with_rng(&frames.time, &self.taps, sigma2_n, &mut rng)?;
                        let decided = c.demap(&rx.decode(&r)?);
                        tally.errors += count_errors(&bits, &decided);
                        tally.bits += bits_per_ofdm as u64;
                    }
                    Ok(tally)
                }))
            }
            LinkKind::Cp(cp) => Ok(Box::new(move |symbols, mut rng| {
                let mut tally = Tally::default();
                let mut bits = vec![0u8; bits_per_ofdm];
                for _ in 0..symbols {
                    random_bits(&mut rng, &mut bits);
                    let tx = cp.modulate(&c.map_bits(&bits)?)?;
                    let r = cp.channel(&tx, sigma2_n, &mut rng)?;
                    let decided = c.demap(&cp.demodulate(&r)?);
                    tally.errors += count_errors(&bits, &decided);
                    tally.bits += bits_per_ofdm as u64;
                }
                Ok(tally)
            })),
        }
    }
}

fn random_bits(rng: &mut impl Rng, out: &mut [u8]) {
    for b in out.iter_mut() {
        *b = rng.random_range(0..2);
    }
}

fn count_errors(a: &[u8], b: &[u8]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

/// Independent stream per `(point, chunk)` under one seed.
fn chunk_rng(seed: u64, point: u32, chunk: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 32) | chunk as u64);
    rng
}

/// Resolves a unique word and scales it to the configured energy fraction
/// of the two-step symbol. The zero word stays zero.
pub fn prepare_uw(
    spec: &SequenceSpec,
    config: &SystemConfig,
    gen: &GeneratorMatrices,
) -> Result<UniqueWord> {
    let uw = spec.resolve()?;
    if uw.len() != config.n_uw {
        return Err(Error::Dimension {
            expected: config.n_uw,
            got: uw.len(),
        });
    }
    if uw.is_zero() {
        return Ok(uw);
    }
    let base = energy_two_step(gen, config, &UniqueWord::zero(config.n_uw));
    scale_to_fraction(&uw, config, base.e_d + base.e_r)
}

/// Runs every approach and unique word over the Eb/N0 grid.
pub fn run_sweep(spec: &SweepSpec, config: &SystemConfig) -> Result<Vec<BerPoint>> {
    spec.validate()?;
    config.validate()?;
    let gen = build_generator(config)?;
    let mut links = Vec::new();
    for &approach in &spec.approaches {
        if approach == Approach::CpReference {
            links.push(Link::cp_reference(
                config,
                spec.taps.clone(),
                spec.modulation,
            )?);
            continue;
        }
        for uw_spec in &spec.uw_specs {
            let uw = prepare_uw(uw_spec, config, &gen)?;
            links.push(Link::uw_ofdm(
                config,
                approach,
                uw,
                spec.taps.clone(),
                spec.modulation,
            )?);
        }
    }

    let mut points = Vec::new();
    for link in &links {
        for (i, &ebn0) in spec.ebn0_db.iter().enumerate() {
            let sigma2_n = link.noise_for_ebn0(ebn0)?;
            let (bits, errors) = link.measure(
                sigma2_n,
                spec.min_bit_errors,
                spec.max_bits,
                spec.symbols_per_chunk,
                spec.seed,
                i as u32,
            )?;
            let point = BerPoint::new(ebn0, link.approach(), link.label(), bits, errors);
            log_point(&point);
            points.push(point);
        }
    }
    Ok(points)
}

fn log_point(p: &BerPoint) {
    if std::env::var_os("UW_OFDM_QUIET").is_none() {
        eprintln!(
            "{:>7.2} dB  {:<12} {:<14} bits {:>10}  errors {:>7}  ber {:.3e}",
            p.ebn0_db, p.approach, p.uw_label, p.bits, p.errors, p.ber
        );
    }
}

/// Writes `ebn0_db,approach,uw_label,bits,errors,ber` rows.
pub fn write_csv(points: &[BerPoint], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "ebn0_db,approach,uw_label,bits,errors,ber")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            p.ebn0_db, p.approach, p.uw_label, p.bits, p.errors, p.ber
        )?;
    }
    Ok(())
}

pub fn emit_csv(points: &[BerPoint], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_csv(points, &mut buf).expect("writing to memory");
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Eb/N0 at which a curve crosses `target`, interpolating `log10(BER)`
/// linearly between the first pair of adjacent points that brackets it.
pub fn ebn0_at_ber(points: &[BerPoint], target: f64) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        if a.ber >= target && b.ber <= target && a.ber > 0.0 && b.ber > 0.0 && a.ber != b.ber {
            let (la, lb, lt) = (a.ber.log10(), b.ber.log10(), target.log10());
            Some(a.ebn0_db + (lt - la) / (lb - la) * (b.ebn0_db - a.ebn0_db))
        } else {
            None
        }
    })
}

/// Counts adjacent pairs where BER rises with Eb/N0 by more than two
/// combined standard errors.
pub fn monotonicity_violations(points: &[BerPoint]) -> usize {
    points
        .windows(2)
        .filter(|w| {
            let se = (w[0].std_error().powi(2) + w[1].std_error().powi(2)).sqrt();
            w[1].ber - w[0].ber > 2.0 * se
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::SequenceKind;

    fn point(ebn0: f64, bits: u64, errors: u64) -> BerPoint {
        BerPoint::new(ebn0, Approach::TwoStep, "x", bits, errors)
    }

    #[test]
    fn calibrate_examples() {
        let cfg = SystemConfig::default_80211a_like();
        let gen = build_generator(&cfg).unwrap();
        let e = energy_two_step(&gen, &cfg, &UniqueWord::zero(16));
        let s = calibrate_noise(&cfg, &e, 10.0, 2).unwrap();
        assert!((s - e.e_total / 72.0 / 10.0).abs() < 1e-15);
        assert!(calibrate_noise(&cfg, &e, 400.0, 2).unwrap() < 1e-40);

        let doubled = EnergyBreakdown {
            e_total: 2.0 * e.e_total,
            ..e
        };
        let s2 = calibrate_noise(&cfg, &doubled, 10.0, 2).unwrap();
        assert!((s2 / s - 2.0).abs() < 1e-12);

        // Equal noise, energy ratio 7.97: labels differ by 9.01 dB.
        let a = noise_for_ebn0(1.25, 72, 5.0).unwrap();
        let shifted = 5.0 + 10.0 * (9.96f64 / 1.25).log10();
        let b = noise_for_ebn0(9.96, 72, shifted).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
        assert!((shifted - 5.0 - 9.01).abs() < 0.01);
        assert!(noise_for_ebn0(0.0, 72, 0.0).is_err());
    }

    #[test]
    fn wilson_brackets_estimate() {
        let p = point(0.0, 100_000, 1000);
        let (lo, hi) = p.wilson_interval();
        assert!(lo < p.ber && p.ber < hi);
        assert!(hi - lo < 0.0015);
        assert_eq!(wilson_interval(0, 0, 1.96), (0.0, 1.0));
        assert_eq!(wilson_interval(0, 1000, 1.96).0, 0.0);
    }

    #[test]
    fn interpolation() {
        let pts = vec![
            point(0.0, 1000, 100),
            point(1.0, 1000, 10),
            point(2.0, 1000, 1),
        ];
        assert!((ebn0_at_ber(&pts, 0.01).unwrap() - 1.0).abs() < 1e-12);
        assert!((ebn0_at_ber(&pts, 10f64.powf(-1.5)).unwrap() - 0.5).abs() < 1e-12);
        assert!(ebn0_at_ber(&pts, 0.5).is_none());
    }

    #[test]
    fn spec_validation() {
        let uw = vec![SequenceKind::Zero.with_length(16)];
        assert!(SweepSpec::new(vec![], vec![Approach::TwoStep], uw.clone())
            .validate()
            .is_err());
        assert!(
            SweepSpec::new(vec![2.0, 1.0], vec![Approach::TwoStep], uw.clone())
                .validate()
                .is_err()
        );
        assert!(SweepSpec::new(vec![1.0], vec![Approach::TwoStep], vec![])
            .validate()
            .is_err());
        assert!(
            SweepSpec::new(vec![1.0], vec![Approach::CpReference], vec![])
                .validate()
                .is_ok()
        );
        assert!(SweepSpec::new(vec![1.0, 2.0], vec![Approach::Direct], uw)
            .validate()
            .is_ok());
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "ebn0_db,approach,uw_label,bits,errors,ber\n"
        );
        let mut buf = Vec::new();
        write_csv(&[point(4.5, 2000, 5)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "ebn0_db,approach,uw_label,bits,errors,ber\n4.5,two_step,x,2000,5,0.0025\n"
        );
    }

    #[test]
    fn noiseless_points_are_error_free() {
        let cfg = SystemConfig::default_80211a_like();
        let gen = build_generator(&cfg).unwrap();
        let uw = prepare_uw(
            &SequenceKind::ZadoffChu { root: 1 }.with_length(16),
            &cfg,
            &gen,
        )
        .unwrap();
        for approach in [Approach::TwoStep, Approach::Direct] {
            let link = Link::uw_ofdm(
                &cfg,
                approach,
                uw.clone(),
                ChannelTaps::identity(),
                Modulation::Qpsk,
            )
            .unwrap();
            let (bits, errors) = link.measure(1e-12, 1, 72 * 200, 50, 3, 0).unwrap();
            assert_eq!((bits, errors), (72 * 200, 0));
        }
        let link = Link::cp_reference(&cfg, ChannelTaps::identity(), Modulation::Qpsk).unwrap();
        assert_eq!(
            link.measure(1e-12, 1, 96 * 200, 50, 3, 0).unwrap(),
            (96 * 200, 0)
        );
    }

    #[test]
    fn independent_of_thread_count() {
        let cfg = SystemConfig::default_80211a_like();
        let mut spec = SweepSpec::new(
            vec![0.0, 3.0],
            vec![Approach::TwoStep, Approach::CpReference],
            vec![SequenceKind::ZadoffChu { root: 1 }.with_length(16)],
        );
        spec.min_bit_errors = 200;
        spec.symbols_per_chunk = 4;
        spec.seed = 42;
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_sweep(&spec, &cfg).unwrap())
        };
        assert_eq!(run(1), run(3));
    }
}
