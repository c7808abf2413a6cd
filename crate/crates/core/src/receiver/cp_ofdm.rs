//! Uncoded CP-OFDM reference with an IEEE 802.11a-like carrier layout.
//!
//! Pilots carry fixed symbols that are transmitted (and counted in the
//! energy budget) but not used by the receiver.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{add_awgn, cyclic_convolve, ChannelTaps, NoiseModel, MIN_RESPONSE};
use crate::error::{Error, Result};
use crate::linalg::{twiddle, ComplexVector, Dft};
use crate::receiver::qam::Constellation;

#[derive(Debug, Clone, PartialEq)]
pub struct CpOfdmConfig {
    pub n_total: usize,
    pub cp_len: usize,
    pub data_bins: Vec<usize>,
    pub pilot_bins: Vec<usize>,
    pub pilot_values: ComplexVector,
    pub sigma2_d: f64,
}

impl CpOfdmConfig {
    /// `N = 64`, 16-sample CP, 48 data carriers, 4 pilots at logical
    /// carriers ±7 and ±21, zeros at DC and bins 27..=37.
    pub fn default_80211a(sigma2_d: f64) -> Self {
        let pilot_bins = vec![7, 21, 43, 57];
        let data_bins = (1..64)
            .filter(|k| !(27..=37).contains(k) && !pilot_bins.contains(k))
            .collect();
        let a = sigma2_d.sqrt();
        // Logical -21, -7, +7, +21 carry 1, 1, 1, -1.
        let pilot_values = vec![
            Complex64::new(a, 0.0),
            Complex64::new(-a, 0.0),
            Complex64::new(a, 0.0),
            Complex64::new(a, 0.0),
        ];
        Self {
            n_total: 64,
            cp_len: 16,
            data_bins,
            pilot_bins,
            pilot_values,
            sigma2_d,
        }
    }

    pub fn n_data(&self) -> usize {
        self.data_bins.len()
    }

    /// Energy of the data carriers alone over the DFT interval,
    /// `N_data σ_d² / N`.
    pub fn data_energy(&self) -> f64 {
        self.n_data() as f64 * self.sigma2_d / self.n_total as f64
    }

    /// Mean transmitted energy per symbol including CP and pilots.
    pub fn mean_symbol_energy(&self) -> f64 {
        let n = self.n_total as f64;
        let data = self.data_energy() * (n + self.cp_len as f64) / n;
        // Pilot waveform is deterministic; its CP energy is evaluated exactly.
        let mut spectrum = vec![Complex64::new(0.0, 0.0); self.n_total];
        for (&k, &v) in self.pilot_bins.iter().zip(&self.pilot_values) {
            spectrum[k] = v;
        }
        let pilot_time: ComplexVector = (0..self.n_total)
            .map(|t| {
                spectrum
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| v * twiddle(t, k, self.n_total).conj())
                    .sum::<Complex64>()
                    / n
            })
            .collect();
        let body: f64 = pilot_time.iter().map(|z| z.norm_sqr()).sum();
        let cp: f64 = pilot_time[self.n_total - self.cp_len..]
            .iter()
            .map(|z| z.norm_sqr())
            .sum();
        data + body + cp
    }

    /// `10 log10(total energy / data energy)`: how much the CP and the
    /// pilots shift the BER curve to the right.
    pub fn overhead_db(&self) -> f64 {
        10.0 * (self.mean_symbol_energy() / self.data_energy()).log10()
    }
}

/// Transmitter and receiver for one channel.
#[derive(Debug, Clone)]
pub struct CpOfdm {
    config: CpOfdmConfig,
    dft: Dft,
    taps: ChannelTaps,
    h_data: ComplexVector,
}

impl CpOfdm {
    pub fn new(config: CpOfdmConfig, taps: ChannelTaps) -> Result<Self> {
        if taps.len() > config.cp_len + 1 {
            return Err(Error::InvalidArgument(format!(
                "{} taps exceed the cyclic prefix of {} samples",
                taps.len(),
                config.cp_len
            )));
        }
        let n = config.n_total;
        let h_data = config
            .data_bins
            .iter()
            .map(|&k| {
                let h: Complex64 = taps
                    .taps
                    .iter()
                    .enumerate()
                    .map(|(l, &t)| t * twiddle(k, l, n))
                    .sum();
                if h.norm() < MIN_RESPONSE {
                    Err(Error::DeepFade {
                        carrier: k,
                        magnitude: h.norm(),
                    })
                } else {
                    Ok(h)
                }
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            dft: Dft::new(n)?,
            config,
            taps,
            h_data,
        })
    }

    pub fn config(&self) -> &CpOfdmConfig {
        &self.config
    }

    /// Data symbols to the CP-prefixed time signal (`N + cp_len` samples).
    pub fn modulate(&self, symbols: &[Complex64]) -> Result<ComplexVector> {
        if symbols.len() != self.config.n_data() {
            return Err(Error::Dimension {
                expected: self.config.n_data(),
                got: symbols.len(),
            });
        }
        let mut spectrum = vec![Complex64::new(0.0, 0.0); self.config.n_total];
        for (&k, &s) in self.config.data_bins.iter().zip(symbols) {
            spectrum[k] = s;
        }
        for (&k, &p) in self.config.pilot_bins.iter().zip(&self.config.pilot_values) {
            spectrum[k] = p;
        }
        let body = self.dft.inverse(&spectrum)?;
        let mut out = body[self.config.n_total - self.config.cp_len..].to_vec();
        out.extend(body);
        Ok(out)
    }

    /// Channel plus noise over the prefixed symbol. The prefix absorbs the
    /// channel memory, so a cyclic convolution over the whole block equals
    /// the linear one on the samples kept by the receiver.
    pub fn channel(
        &self,
        tx: &[Complex64],
        sigma2_n: f64,
        rng: &mut impl Rng,
    ) -> Result<ComplexVector> {
        let mut out = cyclic_convolve(tx, &self.taps)?;
        add_awgn(&mut out, sigma2_n, rng);
        Ok(out)
    }

    /// Drops the CP, transforms and zero-forces the data carriers.
    pub fn demodulate(&self, received: &[Complex64]) -> Result<ComplexVector> {
        let len = self.config.n_total + self.config.cp_len;
        if received.len() != len {
            return Err(Error::Dimension {
                expected: len,
                got: received.len(),
            });
        }
        let body = &received[self.config.cp_len..];
        let f = self.dft.matrix();
        Ok(self
            .config
            .data_bins
            .iter()
            .zip(&self.h_data)
            .map(|(&k, &h)| {
                f.row(k)
                    .iter()
                    .zip(body)
                    .map(|(w, r)| w * r)
                    .sum::<Complex64>()
                    / h
            })
            .collect())
    }
}

/// Runs `bits` through map, modulate, channel, demodulate and demap.
pub fn cp_ofdm_reference(
    bits: &[u8],
    taps: &ChannelTaps,
    noise: &NoiseModel,
    config: &CpOfdmConfig,
    constellation: &Constellation,
) -> Result<Vec<u8>> {
    let per_symbol = config.n_data() * constellation.bits_per_symbol();
    if !bits.len().is_multiple_of(per_symbol) {
        return Err(Error::InvalidArgument(format!(
            "{} bits is not a multiple of {per_symbol} bits per OFDM symbol",
            bits.len()
        )));
    }
    let system = CpOfdm::new(config.clone(), taps.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let mut out = Vec::with_capacity(bits.len());
    for chunk in bits.chunks(per_symbol) {
        let tx = system.modulate(&constellation.map_bits(chunk)?)?;
        let rx = system.channel(&tx, noise.sigma2_n, &mut rng)?;
        out.extend(constellation.demap(&system.demodulate(&rx)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_bits(n: usize, seed: u64) -> Vec<u8> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(0..2)).collect()
    }

    #[test]
    fn layout() {
        let c = CpOfdmConfig::default_80211a(1.0);
        assert_eq!(c.n_data(), 48);
        assert!(c.data_bins.iter().all(|k| !c.pilot_bins.contains(k)));
    }

    #[test]
    fn energy_accounting() {
        let c = CpOfdmConfig::default_80211a(1.0);
        // Monte Carlo over random QPSK symbols.
        let sys = CpOfdm::new(c.clone(), ChannelTaps::identity()).unwrap();
        let q = Constellation::qpsk(1.0).unwrap();
        let trials = 20_000;
        let bits = random_bits(96 * trials, 3);
        let total: f64 = bits
            .chunks(96)
            .map(|b| {
                sys.modulate(&q.map_bits(b).unwrap())
                    .unwrap()
                    .iter()
                    .map(|z| z.norm_sqr())
                    .sum::<f64>()
            })
            .sum();
        let mc = total / trials as f64;
        assert!(
            (mc / c.mean_symbol_energy() - 1.0).abs() < 0.01,
            "{mc} vs {}",
            c.mean_symbol_energy()
        );
        // CP adds a quarter, pilots add 4/48 of the data energy.
        let approx = 10.0 * (52.0f64 / 48.0 * 80.0 / 64.0).log10();
        assert!((c.overhead_db() - approx).abs() < 0.05);
    }

    #[test]
    fn noiseless_recovery() {
        let c = CpOfdmConfig::default_80211a(1.0);
        let q = Constellation::qpsk(1.0).unwrap();
        let bits = random_bits(96 * 50, 5);
        let noise = NoiseModel {
            sigma2_n: 0.0,
            seed: 1,
        };
        assert_eq!(
            cp_ofdm_reference(&bits, &ChannelTaps::identity(), &noise, &c, &q).unwrap(),
            bits
        );
        let multipath = ChannelTaps::new(
            vec![
                Complex64::new(0.8, 0.0),
                Complex64::new(0.0, 0.5),
                Complex64::new(0.2, 0.1),
            ],
            "mp",
        )
        .unwrap();
        assert_eq!(
            cp_ofdm_reference(&bits, &multipath, &noise, &c, &q).unwrap(),
            bits
        );
    }

    #[test]
    fn deterministic_for_seed() {
        let c = CpOfdmConfig::default_80211a(1.0);
        let q = Constellation::qpsk(1.0).unwrap();
        let bits = random_bits(96 * 20, 6);
        let noise = NoiseModel {
            sigma2_n: 0.05,
            seed: 77,
        };
        let a = cp_ofdm_reference(&bits, &ChannelTaps::identity(), &noise, &c, &q).unwrap();
        let b = cp_ofdm_reference(&bits, &ChannelTaps::identity(), &noise, &c, &q).unwrap();
        assert_eq!(a, b);
        assert!(cp_ofdm_reference(&bits[..95], &ChannelTaps::identity(), &noise, &c, &q).is_err());
    }

    #[test]
    fn rejects_long_channels() {
        let c = CpOfdmConfig::default_80211a(1.0);
        let taps = ChannelTaps::new(vec![Complex64::new(1.0, 0.0); 18], "long").unwrap();
        assert!(CpOfdm::new(c, taps).is_err());
    }
}
