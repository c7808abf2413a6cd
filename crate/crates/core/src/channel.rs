//! Cyclic multipath channel with additive white Gaussian noise, `r = H x + n`.

use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::linalg::{twiddle, ComplexMatrix, ComplexVector};
use crate::sequences::parse_complex_lines;

/// Used-carrier responses below this magnitude cannot be zero-forced.
pub const MIN_RESPONSE: f64 = 1e-12;

/// Channel impulse response.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTaps {
    pub taps: ComplexVector,
    pub label: String,
}

impl ChannelTaps {
    pub fn new(taps: ComplexVector, label: impl Into<String>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidArgument(
                "channel needs at least one tap".into(),
            ));
        }
        if let Some(z) = taps.iter().find(|z| !z.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite channel tap {z}"
            )));
        }
        Ok(Self {
            taps,
            label: label.into(),
        })
    }

    /// Single unit tap (pure AWGN).
    pub fn identity() -> Self {
        Self {
            taps: vec![Complex64::new(1.0, 0.0)],
            label: "awgn".into(),
        }
    }

    /// One tap per line as `re im`, `#` comment lines allowed.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let taps = parse_complex_lines(&text, path)?;
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "taps".into());
        Self::new(taps, label)
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    fn check_fits(&self, n: usize) -> Result<()> {
        if self.taps.len() > n {
            return Err(Error::InvalidArgument(format!(
                "{} channel taps do not fit a length-{n} symbol",
                self.taps.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Complex noise variance per sample (half per real component).
    pub sigma2_n: f64,
    pub seed: u64,
}

/// Circulant matrix whose first column is the zero-padded taps.
pub fn cyclic_matrix(taps: &ChannelTaps, n_total: usize) -> Result<ComplexMatrix> {
    taps.check_fits(n_total)?;
    Ok(ComplexMatrix::from_fn(n_total, n_total, |r, c| {
        let lag = (r + n_total - c) % n_total;
        taps.taps.get(lag).copied().unwrap_or_default()
    }))
}

/// Cyclic convolution of `x` with the taps, equal to `H x`.
pub fn cyclic_convolve(x: &[Complex64], taps: &ChannelTaps) -> Result<ComplexVector> {
    let n = x.len();
    taps.check_fits(n)?;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (l, &h) in taps.taps.iter().enumerate() {
        for (t, o) in out.iter_mut().enumerate() {
            *o += h * x[(t + n - l) % n];
        }
    }
    Ok(out)
}

/// Channel transfer function at the used carriers, ascending bin order.
pub fn freq_response(taps: &ChannelTaps, config: &SystemConfig) -> Result<ComplexVector> {
    config.validate()?;
    let n = config.n_total;
    taps.check_fits(n)?;
    config
        .used_carrier_indices()
        .into_iter()
        .map(|k| {
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
        .collect()
}

/// Adds circular complex Gaussian noise of variance `sigma2_n` per sample.
pub fn add_awgn(signal: &mut [Complex64], sigma2_n: f64, rng: &mut impl Rng) {
    if sigma2_n == 0.0 {
        return;
    }
    let std = (sigma2_n / 2.0).sqrt();
    for z in signal {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *z += Complex64::new(re, im) * std;
    }
}

/// `H x + n` with noise drawn from `rng`.
pub fn transmit_with_rng(
    time_signal: &[Complex64],
    taps: &ChannelTaps,
    sigma2_n: f64,
    rng: &mut impl Rng,
) -> Result<ComplexVector> {
    if !(sigma2_n.is_finite() && sigma2_n >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise variance {sigma2_n} must be >= 0"
        )));
    }
    let mut out = cyclic_convolve(time_signal, taps)?;
    add_awgn(&mut out, sigma2_n, rng);
    Ok(out)
}

/// `H x + n`; the noise is a deterministic function of `noise.seed`.
pub fn transmit(
    time_signal: &[Complex64],
    taps: &ChannelTaps,
    noise: &NoiseModel,
) -> Result<ComplexVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    transmit_with_rng(time_signal, taps, noise.sigma2_n, &mut rng)
}
