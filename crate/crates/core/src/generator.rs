//! UW-OFDM symbol generation by the two-step and the direct approach.
//!
//! Both approaches load data on the data carriers and solve for the
//! redundant carriers so that the last `N_u` IDFT output samples take a
//! prescribed value. The two-step approach forces a zero tail and adds the
//! unique word afterwards in time domain; the direct approach solves for
//! the unique word itself, which confines the UW's spectral footprint to the
//! redundant carriers.

use num_complex::Complex64;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::linalg::{partition_generator, ComplexMatrix, ComplexVector, Dft};
use crate::sequences::UniqueWord;

/// How a symbol's guard interval is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Approach {
    /// Zero word from the redundant carriers, UW added in time domain.
    TwoStep,
    /// UW generated directly by the redundant carriers.
    Direct,
    /// CP-OFDM baseline without a unique word.
    CpReference,
}

impl Approach {
    pub fn as_str(self) -> &'static str {
        match self {
            Approach::TwoStep => "two_step",
            Approach::Direct => "direct",
            Approach::CpReference => "cp_reference",
        }
    }
}

impl std::fmt::Display for Approach {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Approach {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "two_step" => Ok(Approach::TwoStep),
            "direct" => Ok(Approach::Direct),
            "cp_reference" | "cp" => Ok(Approach::CpReference),
            _ => Err(Error::InvalidArgument(format!(
                "unknown approach `{s}` (use two-step, direct or cp-reference)"
            ))),
        }
    }
}

/// Tail magnitude allowed after zero-word generation.
pub const ZERO_WORD_TOLERANCE: f64 = 1e-10;

/// Matrices derived from one [`SystemConfig`].
#[derive(Debug, Clone)]
pub struct GeneratorMatrices {
    pub m21: ComplexMatrix,
    pub m22: ComplexMatrix,
    pub m22_inv: ComplexMatrix,
    /// `T = -M22^{-1} M21`, maps data to redundant symbols.
    pub t_matrix: ComplexMatrix,
    /// `G = P [I; T]`, maps data to the used-carrier vector.
    pub g_matrix: ComplexMatrix,
    /// Zero-carrier insertion, `N x (N_d + N_r)`.
    pub b_matrix: ComplexMatrix,
    /// Permutation from `[x_d; x_r]` to used-carrier order.
    pub p_matrix: ComplexMatrix,
    config: SystemConfig,
    dft: Dft,
    used_bins: Vec<usize>,
    permutation: Vec<usize>,
    strict_zero_word: bool,
}

/// One OFDM symbol in both domains.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFrames {
    /// Spectrum of the transmitted time signal (`x̃`).
    pub freq: ComplexVector,
    /// Transmitted time signal (`x`).
    pub time: ComplexVector,
    pub data_symbols: ComplexVector,
    pub redundant_symbols: ComplexVector,
}

fn zero_one(rows: usize, cols: usize, ones: impl Iterator<Item = (usize, usize)>) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, cols);
    for (r, c) in ones {
        m[(r, c)] = Complex64::new(1.0, 0.0);
    }
    m
}

/// Partitions `F_N^{-1} B P`, inverts `M22` and forms `T` and `G`.
pub fn build_generator(config: &SystemConfig) -> Result<GeneratorMatrices> {
    let blocks = partition_generator(config)?;
    let m22_inv = blocks.m22.invert()?;
    let t_matrix = m22_inv
        .matmul(&blocks.m21)?
        .scale(Complex64::new(-1.0, 0.0));

    let n_used = config.n_data + config.n_red;
    let used_bins = config.used_carrier_indices();
    let permutation = config.permutation();
    let p_matrix = zero_one(
        n_used,
        n_used,
        permutation.iter().enumerate().map(|(j, &r)| (r, j)),
    );
    let b_matrix = zero_one(
        config.n_total,
        n_used,
        used_bins.iter().enumerate().map(|(r, &b)| (b, r)),
    );
    let stacked = ComplexMatrix::from_fn(n_used, config.n_data, |r, c| {
        if r < config.n_data {
            Complex64::new(if r == c { 1.0 } else { 0.0 }, 0.0)
        } else {
            t_matrix[(r - config.n_data, c)]
        }
    });
    let g_matrix = p_matrix.matmul(&stacked)?;

    Ok(GeneratorMatrices {
        m21: blocks.m21,
        m22: blocks.m22,
        m22_inv,
        t_matrix,
        g_matrix,
        b_matrix,
        p_matrix,
        config: config.clone(),
        dft: Dft::new(config.n_total)?,
        used_bins,
        permutation,
        strict_zero_word: true,
    })
}

impl GeneratorMatrices {
    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn dft(&self) -> &Dft {
        &self.dft
    }

    /// Bins of the used carriers, ascending.
    pub fn used_bins(&self) -> &[usize] {
        &self.used_bins
    }

    /// When disabled, a failed zero-word check in
    /// [`generate_two_step`](Self::generate_two_step) is ignored instead of
    /// returned as an error.
    pub fn with_strict_zero_word(mut self, strict: bool) -> Self {
        self.strict_zero_word = strict;
        self
    }

    /// 1-norm condition number of `M22`.
    pub fn m22_condition(&self) -> f64 {
        self.m22.norm1() * self.m22_inv.norm1()
    }

    /// `tr(T T^H)`.
    pub fn trace_tth(&self) -> f64 {
        self.t_matrix.trace_of_gram()
    }

    /// `B P [d; r]`: places stacked data and redundant values on their bins.
    pub fn carrier_loading(&self, data: &[Complex64], redundant: &[Complex64]) -> ComplexVector {
        let mut spectrum = vec![Complex64::new(0.0, 0.0); self.config.n_total];
        for (j, &v) in data.iter().chain(redundant).enumerate() {
            spectrum[self.used_bins[self.permutation[j]]] = v;
        }
        spectrum
    }

    fn check_lengths(&self, data: &[Complex64], uw: &UniqueWord) -> Result<()> {
        if data.len() != self.config.n_data {
            return Err(Error::Dimension {
                expected: self.config.n_data,
                got: data.len(),
            });
        }
        if uw.len() != self.config.n_uw {
            return Err(Error::Dimension {
                expected: self.config.n_uw,
                got: uw.len(),
            });
        }
        Ok(())
    }

    /// `M22^{-1} x_u`, the direct approach's extra redundant loading.
    pub fn redundant_uw_loading(&self, uw: &UniqueWord) -> Result<ComplexVector> {
        self.m22_inv.mul_vec(&uw.samples)
    }

    /// Two-step approach: zero tail from the redundant carriers, then the
    /// unique word added in time domain.
    pub fn generate_two_step(&self, data: &[Complex64], uw: &UniqueWord) -> Result<SymbolFrames> {
        self.check_lengths(data, uw)?;
        let redundant = self.t_matrix.mul_vec(data)?;
        let zero_word_spectrum = self.carrier_loading(data, &redundant);
        let mut time = self.dft.inverse(&zero_word_spectrum)?;

        let tail_start = self.config.n_total - self.config.n_uw;
        let max_residual = time[tail_start..]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if self.strict_zero_word && max_residual > ZERO_WORD_TOLERANCE {
            return Err(Error::ZeroWord { max_residual });
        }

        for (t, &u) in time[tail_start..].iter_mut().zip(&uw.samples) {
            *t += u;
        }
        let uw_spectrum = self.tail_spectrum(&uw.samples);
        let freq = zero_word_spectrum
            .iter()
            .zip(&uw_spectrum)
            .map(|(a, b)| a + b)
            .collect();
        Ok(SymbolFrames {
            freq,
            time,
            data_symbols: data.to_vec(),
            redundant_symbols: redundant,
        })
    }

    /// Direct approach: the redundant carriers produce the unique word at
    /// the IDFT output.
    pub fn generate_direct(&self, data: &[Complex64], uw: &UniqueWord) -> Result<SymbolFrames> {
        self.check_lengths(data, uw)?;
        let redundant: ComplexVector = self
            .t_matrix
            .mul_vec(data)?
            .into_iter()
            .zip(self.redundant_uw_loading(uw)?)
            .map(|(a, b)| a + b)
            .collect();
        let freq = self.carrier_loading(data, &redundant);
        let time = self.dft.inverse(&freq)?;
        Ok(SymbolFrames {
            freq,
            time,
            data_symbols: data.to_vec(),
            redundant_symbols: redundant,
        })
    }

    /// Dispatches to the two-step or the direct generator.
    pub fn generate(
        &self,
        approach: Approach,
        data: &[Complex64],
        uw: &UniqueWord,
    ) -> Result<SymbolFrames> {
        match approach {
            Approach::TwoStep => self.generate_two_step(data, uw),
            Approach::Direct => self.generate_direct(data, uw),
            Approach::CpReference => Err(Error::InvalidArgument(
                "CP-OFDM symbols carry no unique word".into(),
            )),
        }
    }

    /// The UW spectrum the receiver has to subtract for `approach`.
    pub fn uw_spectrum(&self, approach: Approach, uw: &UniqueWord) -> Result<ComplexVector> {
        match approach {
            Approach::TwoStep => uw_spectrum_two_step(uw, self.config.n_total),
            Approach::Direct => uw_spectrum_direct(self, uw),
            Approach::CpReference => Err(Error::InvalidArgument(
                "CP-OFDM symbols carry no unique word".into(),
            )),
        }
    }

    /// `F_N [0; tail]` using only the nonzero tail samples.
    fn tail_spectrum(&self, tail: &[Complex64]) -> ComplexVector {
        let n = self.config.n_total;
        let start = n - tail.len();
        let f = self.dft.matrix();
        (0..n)
            .map(|k| {
                tail.iter()
                    .enumerate()
                    .map(|(i, &u)| f[(k, start + i)] * u)
                    .sum()
            })
            .collect()
    }
}

/// UW spectrum seen by the receiver for the two-step approach, `F_N [0; x_u]`.
pub fn uw_spectrum_two_step(uw: &UniqueWord, n_total: usize) -> Result<ComplexVector> {
    if uw.len() > n_total {
        return Err(Error::Dimension {
            expected: n_total,
            got: uw.len(),
        });
    }
    let mut padded = vec![Complex64::new(0.0, 0.0); n_total - uw.len()];
    padded.extend_from_slice(&uw.samples);
    crate::linalg::dft_apply(&padded)
}

/// UW spectrum seen by the receiver for the direct approach: the carrier
/// loading `B P [0; M22^{-1} x_u]`, supported on the redundant carriers only.
pub fn uw_spectrum_direct(gen: &GeneratorMatrices, uw: &UniqueWord) -> Result<ComplexVector> {
    if uw.len() != gen.config.n_uw {
        return Err(Error::Dimension {
            expected: gen.config.n_uw,
            got: uw.len(),
        });
    }
    let zeros = vec![Complex64::new(0.0, 0.0); gen.config.n_data];
    Ok(gen.carrier_loading(&zeros, &gen.redundant_uw_loading(uw)?))
}

/// Local search over redundant carrier placements that lowers `tr(T T^H)`.
///
/// Starting from `config`'s placement, each pass tries moving every
/// redundant carrier to every data carrier and keeps the best improving
/// move. Stops when no move helps or after `max_passes` passes.
pub fn greedy_redundant_placement(
    config: &SystemConfig,
    max_passes: usize,
) -> Result<SystemConfig> {
    let cost = |c: &SystemConfig| -> Option<f64> {
        let blocks = partition_generator(c).ok()?;
        let inv = blocks.m22.invert().ok()?;
        Some(inv.matmul(&blocks.m21).ok()?.trace_of_gram())
    };
    let mut best = config.clone();
    let mut best_cost = cost(&best).ok_or(Error::Singular {
        pivot: 0.0,
        threshold: 0.0,
    })?;
    for _ in 0..max_passes {
        let mut improved: Option<(SystemConfig, f64)> = None;
        let data = best.data_carrier_indices();
        for slot in 0..best.n_red {
            for &candidate in &data {
                let mut red = best.redundant_carrier_indices.clone();
                red[slot] = candidate;
                red.sort_unstable();
                let Ok(trial) = best.with_redundant_carriers(red) else {
                    continue;
                };
                if let Some(c) = cost(&trial) {
                    let to_beat = improved.as_ref().map_or(best_cost, |(_, v)| *v);
                    if c < to_beat {
                        improved = Some((trial, c));
                    }
                }
            }
        }
        match improved {
            Some((cfg, c)) => {
                best = cfg;
                best_cost = c;
            }
            None => break,
        }
    }
    Ok(best)
}
