//! Gray-mapped QPSK and 16-QAM.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulation {
    Qpsk,
    Qam16,
}

impl std::str::FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qpsk" | "4qam" | "4" => Ok(Modulation::Qpsk),
            "16qam" | "qam16" | "16" => Ok(Modulation::Qam16),
            _ => Err(Error::InvalidArgument(format!("unknown modulation `{s}`"))),
        }
    }
}

/// Per-axis Gray levels for two bits: 00 -> +1, 01 -> +3, 10 -> -1, 11 -> -3.
const PAM4: [f64; 4] = [1.0, 3.0, -1.0, -3.0];

/// Constellation with `points[label]` for every bit label (first bit is the
/// most significant).
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    pub order: usize,
    pub points: ComplexVector,
    pub sigma2_d: f64,
}

impl Constellation {
    pub fn new(modulation: Modulation, sigma2_d: f64) -> Result<Self> {
        if !(sigma2_d.is_finite() && sigma2_d > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "symbol variance {sigma2_d} must be positive"
            )));
        }
        let points = match modulation {
            Modulation::Qpsk => {
                let a = (sigma2_d / 2.0).sqrt();
                (0..4)
                    .map(|label| {
                        let i = if label & 0b10 == 0 { a } else { -a };
                        let q = if label & 0b01 == 0 { a } else { -a };
                        Complex64::new(i, q)
                    })
                    .collect()
            }
            Modulation::Qam16 => {
                let a = (sigma2_d / 10.0).sqrt();
                (0..16)
                    .map(|label| Complex64::new(PAM4[label >> 2] * a, PAM4[label & 0b11] * a))
                    .collect()
            }
        };
        Ok(Self {
            order: match modulation {
                Modulation::Qpsk => 4,
                Modulation::Qam16 => 16,
            },
            points,
            sigma2_d,
        })
    }

    pub fn qpsk(sigma2_d: f64) -> Result<Self> {
        Self::new(Modulation::Qpsk, sigma2_d)
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.order.trailing_zeros() as usize
    }

    /// Maps bits (each 0 or 1), `bits_per_symbol` at a time, MSB first.
    pub fn map_bits(&self, bits: &[u8]) -> Result<ComplexVector> {
        let k = self.bits_per_symbol();
        if !bits.len().is_multiple_of(k) {
            return Err(Error::InvalidArgument(format!(
                "{} bits is not a multiple of {k} bits per symbol",
                bits.len()
            )));
        }
        bits.chunks(k)
            .map(|chunk| {
                let mut label = 0usize;
                for &b in chunk {
                    if b > 1 {
                        return Err(Error::InvalidArgument(format!(
                            "bit value {b} is not 0 or 1"
                        )));
                    }
                    label = (label << 1) | b as usize;
                }
                Ok(self.points[label])
            })
            .collect()
    }

    /// Minimum-distance hard decisions; ties go to the lowest label.
    pub fn demap(&self, symbols: &[Complex64]) -> Vec<u8> {
        let k = self.bits_per_symbol();
        let mut bits = Vec::with_capacity(symbols.len() * k);
        for s in symbols {
            let mut best = (0, f64::INFINITY);
            for (label, p) in self.points.iter().enumerate() {
                let d = (s - p).norm_sqr();
                if d < best.1 {
                    best = (label, d);
                }
            }
            bits.extend((0..k).rev().map(|i| ((best.0 >> i) & 1) as u8));
        }
        bits
    }
}

pub fn map_bits(bits: &[u8], constellation: &Constellation) -> Result<ComplexVector> {
    constellation.map_bits(bits)
}

pub fn demap(symbols: &[Complex64], constellation: &Constellation) -> Vec<u8> {
    constellation.demap(symbols)
}
