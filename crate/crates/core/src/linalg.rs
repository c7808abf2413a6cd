//! Dense complex linear algebra used throughout the crate.
//!
//! DFT convention: the forward transform is unnormalized,
//! `[F_N]_{m,k} = exp(-j 2π m k / N)`, and the inverse carries the `1/N`
//! factor, `F_N^{-1} = (1/N) F_N^H`. Under this convention
//! `‖F_N^{-1} v‖² = ‖v‖² / N`, which is what the symbol energy formulas use.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::config::SystemConfig;
use crate::error::{Error, Result};

pub type ComplexVector = Vec<Complex64>;

/// Relative pivot threshold below which [`ComplexMatrix::invert`] reports a
/// singular matrix.
pub const PIVOT_TOLERANCE: f64 = 1e-13;

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4e}{:+.4e}j ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                expected: rows * cols,
                got: data.len(),
            });
        }
        if let Some(z) = data.iter().find(|z| !z.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite matrix entry {z}"
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> ComplexVector {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension {
                expected: self.rows * self.cols,
                got: other.rows * other.cols,
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let out_row = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for (k, &a) in self.row(r).iter().enumerate() {
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Result<ComplexVector> {
        if self.cols != v.len() {
            return Err(Error::Dimension {
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect())
    }

    /// Copies the `rows x cols` block whose top-left corner is `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        assert!(
            r0 + rows <= self.rows && c0 + cols <= self.cols,
            "block out of bounds"
        );
        Self::from_fn(rows, cols, |r, c| self[(r0 + r, c0 + c)])
    }

    /// Reassembles a 2x2 block matrix `[[a, b], [c, d]]`.
    pub fn from_blocks(a: &Self, b: &Self, c: &Self, d: &Self) -> Result<Self> {
        if a.rows != b.rows || c.rows != d.rows || a.cols != c.cols || b.cols != d.cols {
            return Err(Error::InvalidArgument("inconsistent block sizes".into()));
        }
        let (top, left) = (a.rows, a.cols);
        Ok(Self::from_fn(
            a.rows + c.rows,
            a.cols + b.cols,
            |r, col| match (r < top, col < left) {
                (true, true) => a[(r, col)],
                (true, false) => b[(r, col - left)],
                (false, true) => c[(r - top, col)],
                (false, false) => d[(r - top, col - left)],
            },
        ))
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Maximum absolute column sum (induced 1-norm).
    pub fn norm1(&self) -> f64 {
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self[(r, c)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    ///
    /// Fails if a pivot falls below `PIVOT_TOLERANCE * max|m_ij|`.
    pub fn invert(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Dimension {
                expected: self.rows,
                got: self.cols,
            });
        }
        let n = self.rows;
        let threshold = PIVOT_TOLERANCE * self.max_abs();
        let mut a = self.clone();
        let mut inv = Self::identity(n);

        for col in 0..n {
            let (pivot_row, pivot_mag) =
                (col..n)
                    .map(|r| (r, a[(r, col)].norm()))
                    .fold(
                        (col, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if pivot_mag <= threshold || pivot_mag == 0.0 {
                return Err(Error::Singular {
                    pivot: pivot_mag,
                    threshold,
                });
            }
            if pivot_row != col {
                a.swap_rows(pivot_row, col);
                inv.swap_rows(pivot_row, col);
            }
            let p = a[(col, col)].inv();
            for c in 0..n {
                a[(col, c)] *= p;
                inv[(col, c)] *= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[(r, col)];
                if factor == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..n {
                    let (ac, ic) = (a[(col, c)], inv[(col, c)]);
                    a[(r, c)] -= factor * ac;
                    inv[(r, c)] -= factor * ic;
                }
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    /// `tr(M M^H)`, the squared Frobenius norm.
    pub fn trace_of_gram(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

/// `tr(M M^H)` for any matrix.
pub fn trace_of_gram(m: &ComplexMatrix) -> f64 {
    m.trace_of_gram()
}

/// `exp(-j 2π m k / n)`, with the exponent reduced modulo `n` first.
pub(crate) fn twiddle(m: usize, k: usize, n: usize) -> Complex64 {
    let e = ((m as u128 * k as u128) % n as u128) as f64;
    Complex64::from_polar(1.0, -2.0 * PI * e / n as f64)
}

/// The `n x n` DFT matrix `[m, k] = exp(-j 2π m k / n)`.
pub fn dft_matrix(n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "DFT length must be at least 1".into(),
        ));
    }
    Ok(ComplexMatrix::from_fn(n, n, |m, k| twiddle(m, k, n)))
}

/// Cached DFT matrix for repeated transforms of one length.
#[derive(Debug, Clone)]
pub struct Dft {
    matrix: ComplexMatrix,
}

impl Dft {
    pub fn new(n: usize) -> Result<Self> {
        Ok(Self {
            matrix: dft_matrix(n)?,
        })
    }

    pub fn len(&self) -> usize {
        self.matrix.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `F_N v`.
    pub fn forward(&self, v: &[Complex64]) -> Result<ComplexVector> {
        self.matrix.mul_vec(v)
    }

    /// `F_N^{-1} v = (1/N) F_N^H v`. `F_N` is symmetric, so row `n` of the
    /// conjugate gives the inverse kernel.
    pub fn inverse(&self, v: &[Complex64]) -> Result<ComplexVector> {
        let n = self.len();
        if v.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: v.len(),
            });
        }
        let scale = 1.0 / n as f64;
        Ok((0..n)
            .map(|t| {
                self.matrix
                    .row(t)
                    .iter()
                    .zip(v)
                    .map(|(w, &x)| w.conj() * x)
                    .sum::<Complex64>()
                    * scale
            })
            .collect())
    }
}

/// Forward DFT with the unnormalized convention.
pub fn dft_apply(signal: &[Complex64]) -> Result<ComplexVector> {
    if signal.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot transform an empty vector".into(),
        ));
    }
    Dft::new(signal.len())?.forward(signal)
}

/// Inverse DFT, `F_N^{-1} spectrum`.
pub fn idft_apply(spectrum: &[Complex64]) -> Result<ComplexVector> {
    if spectrum.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot transform an empty vector".into(),
        ));
    }
    Dft::new(spectrum.len())?.inverse(spectrum)
}

/// The four blocks of `F_N^{-1} B P`.
#[derive(Debug, Clone)]
pub struct GeneratorBlocks {
    pub m11: ComplexMatrix,
    pub m12: ComplexMatrix,
    pub m21: ComplexMatrix,
    pub m22: ComplexMatrix,
}

impl GeneratorBlocks {
    pub fn reassemble(&self) -> ComplexMatrix {
        ComplexMatrix::from_blocks(&self.m11, &self.m12, &self.m21, &self.m22)
            .expect("blocks come from one partition")
    }
}

/// `F_N^{-1} B P` for a validated configuration, with columns ordered as the
/// stacked vector `[x_d; x_r]`.
pub fn generator_product(config: &SystemConfig) -> Result<ComplexMatrix> {
    config.validate()?;
    let n = config.n_total;
    let bins = config.stacked_bins();
    let scale = 1.0 / n as f64;
    // Column j of F^{-1} B P is column bins[j] of F^{-1}.
    Ok(ComplexMatrix::from_fn(n, bins.len(), |t, j| {
        twiddle(t, bins[j], n).conj() * scale
    }))
}

/// Splits `F_N^{-1} B P` after `N - N_u` rows and `N_d` columns.
pub fn partition_generator(config: &SystemConfig) -> Result<GeneratorBlocks> {
    let full = generator_product(config)?;
    let (split_r, split_c) = (config.n_total - config.n_uw, config.n_data);
    let (tail, red) = (config.n_uw, config.n_red);
    Ok(GeneratorBlocks {
        m11: full.block(0, 0, split_r, split_c),
        m12: full.block(0, split_c, split_r, red),
        m21: full.block(split_r, 0, tail, split_c),
        m22: full.block(split_r, split_c, tail, red),
    })
}
