//! UW-OFDM receiver: DFT and zero-carrier removal, UW spectrum subtraction,
//! zero-forcing and Wiener smoothing. Also holds QAM mapping and the
//! CP-OFDM reference chain.

pub mod cp_ofdm;
pub mod qam;

use num_complex::Complex64;

use crate::channel::{freq_response, ChannelTaps, MIN_RESPONSE};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::generator::GeneratorMatrices;
use crate::linalg::{ComplexMatrix, ComplexVector, Dft};

pub use cp_ofdm::{cp_ofdm_reference, CpOfdm, CpOfdmConfig};
pub use qam::{demap, map_bits, Constellation, Modulation};

/// Wiener smoother `G^H (G G^H + (N σ_n² / σ_d²) (H̃^H H̃)^{-1})^{-1}`.
///
/// Evaluated in the equivalent form `(G^H D G + c I)^{-1} G^H D` with
/// `D = H̃^H H̃` and `c = N σ_n² / σ_d²`, which only inverts an `N_d x N_d`
/// positive definite matrix instead of the nearly rank-deficient
/// `(N_d + N_r)`-square one.
pub fn wiener_smoother(
    g: &ComplexMatrix,
    h_used: &[Complex64],
    sigma2_n: f64,
    sigma2_d: f64,
    n_total: usize,
) -> Result<ComplexMatrix> {
    if !(sigma2_n > 0.0) || !sigma2_n.is_finite() {
        return Err(Error::NonPositiveNoise(sigma2_n));
    }
    if !(sigma2_d > 0.0) || !sigma2_d.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "data variance {sigma2_d} must be positive"
        )));
    }
    if h_used.len() != g.rows() {
        return Err(Error::Dimension {
            expected: g.rows(),
            got: h_used.len(),
        });
    }
    let reg = n_total as f64 * sigma2_n / sigma2_d;
    let d: Vec<f64> = h_used.iter().map(|h| h.norm_sqr()).collect();
    let gh_d = ComplexMatrix::from_fn(g.cols(), g.rows(), |r, c| g[(c, r)].conj() * d[c]);
    let mut inner = gh_d.matmul(g)?;
    for i in 0..inner.rows() {
        inner[(i, i)] += reg;
    }
    inner.invert()?.matmul(&gh_d)
}

/// Everything the receiver needs for one (system, channel, noise, UW).
#[derive(Debug, Clone)]
pub struct ReceiverOperator {
    /// `W̃`, `N_d x (N_d + N_r)`.
    pub wiener: ComplexMatrix,
    /// Diagonal of `H̃`.
    pub h_used: ComplexVector,
    /// `B^T x̃_u`.
    pub uw_freq_used: ComplexVector,
    dft: Dft,
    used_bins: Vec<usize>,
}

/// Builds the operator. `uw_spectrum` must match the generation approach:
/// [`uw_spectrum_two_step`](crate::generator::uw_spectrum_two_step) or
/// [`uw_spectrum_direct`](crate::generator::uw_spectrum_direct).
pub fn build_receiver(
    gen: &GeneratorMatrices,
    taps: &ChannelTaps,
    sigma2_n: f64,
    sigma2_d: f64,
    uw_spectrum: &[Complex64],
    config: &SystemConfig,
) -> Result<ReceiverOperator> {
    if uw_spectrum.len() != config.n_total {
        return Err(Error::Dimension {
            expected: config.n_total,
            got: uw_spectrum.len(),
        });
    }
    let h_used = freq_response(taps, config)?;
    let wiener = wiener_smoother(&gen.g_matrix, &h_used, sigma2_n, sigma2_d, config.n_total)?;
    let used_bins = config.used_carrier_indices();
    let uw_freq_used = used_bins.iter().map(|&k| uw_spectrum[k]).collect();
    Ok(ReceiverOperator {
        wiener,
        h_used,
        uw_freq_used,
        dft: gen.dft().clone(),
        used_bins,
    })
}

impl ReceiverOperator {
    /// Estimates the data symbols `x̂̃_d` from one received symbol `r`.
    pub fn decode(&self, received: &[Complex64]) -> Result<ComplexVector> {
        let n = self.dft.len();
        if received.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: received.len(),
            });
        }
        let f = self.dft.matrix();
        let mut equalized = Vec::with_capacity(self.used_bins.len());
        for (i, &k) in self.used_bins.iter().enumerate() {
            let y: Complex64 = f.row(k).iter().zip(received).map(|(w, r)| w * r).sum();
            let h = self.h_used[i];
            if h.norm() < MIN_RESPONSE {
                return Err(Error::DeepFade {
                    carrier: k,
                    magnitude: h.norm(),
                });
            }
            equalized.push((y - h * self.uw_freq_used[i]) / h);
        }
        self.wiener.mul_vec(&equalized)
    }
}

/// Free-function form of [`ReceiverOperator::decode`].
pub fn decode(received: &[Complex64], rx: &ReceiverOperator) -> Result<ComplexVector> {
    rx.decode(received)
}
