//! Unique word sequences: Zadoff-Chu generation, file loading and energy
//! scaling.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::linalg::ComplexVector;

/// The deterministic tail `x_u` of every UW-OFDM symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct UniqueWord {
    pub samples: ComplexVector,
    pub label: String,
}

impl UniqueWord {
    pub fn new(samples: ComplexVector, label: impl Into<String>) -> Result<Self> {
        if let Some(z) = samples.iter().find(|z| !z.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite unique word sample {z}"
            )));
        }
        Ok(Self {
            samples,
            label: label.into(),
        })
    }

    pub fn zero(len: usize) -> Self {
        Self {
            samples: vec![Complex64::new(0.0, 0.0); len],
            label: "zero".into(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `x_u^H x_u`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|z| z.norm_sqr() == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SequenceKind {
    Zero,
    ZadoffChu { root: usize },
    File(PathBuf),
}

/// How to obtain a unique word of length `pad_to`.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSpec {
    pub kind: SequenceKind,
    pub pad_to: usize,
}

impl SequenceSpec {
    pub fn resolve(&self) -> Result<UniqueWord> {
        match &self.kind {
            SequenceKind::Zero => Ok(UniqueWord::zero(self.pad_to)),
            SequenceKind::ZadoffChu { root } => zadoff_chu(self.pad_to, *root),
            SequenceKind::File(path) => load_sequence(path, self.pad_to),
        }
    }
}

impl SequenceKind {
    pub fn with_length(self, pad_to: usize) -> SequenceSpec {
        SequenceSpec { kind: self, pad_to }
    }
}

/// Accepts `zero`, `zc:ROOT` (or `zadoff-chu:ROOT`) and `file:PATH`.
impl FromStr for SequenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::InvalidArgument(format!(
                "unrecognized unique word spec `{s}` (use zero, zc:ROOT or file:PATH)"
            ))
        };
        if s == "zero" {
            return Ok(SequenceKind::Zero);
        }
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "zc" | "zadoff-chu" => Ok(SequenceKind::ZadoffChu {
                root: arg.parse().map_err(|_| bad())?,
            }),
            "file" if !arg.is_empty() => Ok(SequenceKind::File(arg.into())),
            _ => Err(bad()),
        }
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Zadoff-Chu sequence, `exp(-jπ u k² / L)` for even `L` and
/// `exp(-jπ u k(k+1) / L)` for odd `L`.
pub fn zadoff_chu(length: usize, root: usize) -> Result<UniqueWord> {
    if root == 0 || root >= length {
        return Err(Error::InvalidArgument(format!(
            "Zadoff-Chu root must satisfy 1 <= root < length (root {root}, length {length})"
        )));
    }
    if gcd(root, length) != 1 {
        return Err(Error::InvalidArgument(format!(
            "Zadoff-Chu root {root} is not coprime with length {length}"
        )));
    }
    let odd = length % 2;
    // Reduce the exponent modulo 2L so the phase stays accurate for large k.
    let period = 2 * length as u128;
    let samples = (0..length as u128)
        .map(|k| {
            let e = (root as u128 * k * (k + odd as u128)) % period;
            Complex64::from_polar(1.0, -PI * e as f64 / length as f64)
        })
        .collect();
    UniqueWord::new(samples, format!("zc-{length}-{root}"))
}

/// Reads one sample per line as `re im`; `#` starts a comment line. The
/// result is zero-padded at the tail to `pad_to` samples.
pub fn load_sequence(path: impl AsRef<Path>, pad_to: usize) -> Result<UniqueWord> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut samples = parse_complex_lines(&text, path)?;
    if samples.len() > pad_to {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!(
                "{} samples exceed the unique word length {pad_to}",
                samples.len()
            ),
        });
    }
    samples.resize(pad_to, Complex64::new(0.0, 0.0));
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "file".into());
    UniqueWord::new(samples, label)
}

/// Shared by sequence and tap files.
pub(crate) fn parse_complex_lines(text: &str, path: &Path) -> Result<ComplexVector> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(parse_err(format!("expected `re im`, found `{line}`")));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(format!("`{s}` is not a finite number")))
        };
        out.push(Complex64::new(parse(fields[0])?, parse(fields[1])?));
    }
    Ok(out)
}

/// Renders samples in the format read by [`load_sequence`].
pub fn format_sequence(uw: &UniqueWord) -> String {
    let mut s = format!("# {}\n", uw.label);
    for z in &uw.samples {
        let _ = writeln!(s, "{:.17e} {:.17e}", z.re, z.im);
    }
    s
}

/// Scales `uw` by a positive real factor so that `x_u^H x_u` is
/// `config.uw_energy_fraction` of `e_data_plus_red + x_u^H x_u`.
pub fn scale_to_fraction(
    uw: &UniqueWord,
    config: &SystemConfig,
    e_data_plus_red: f64,
) -> Result<UniqueWord> {
    let fraction = config.uw_energy_fraction;
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidArgument(format!(
            "energy fraction {fraction} outside [0, 1)"
        )));
    }
    if fraction == 0.0 {
        return Ok(UniqueWord {
            samples: vec![Complex64::new(0.0, 0.0); uw.len()],
            label: uw.label.clone(),
        });
    }
    let energy = uw.energy();
    if energy == 0.0 {
        return Err(Error::InvalidArgument(format!(
            "cannot scale the zero unique word `{}` to a nonzero energy fraction",
            uw.label
        )));
    }
    let target = fraction / (1.0 - fraction) * e_data_plus_red;
    let alpha = (target / energy).sqrt();
    Ok(UniqueWord {
        samples: uw.samples.iter().map(|z| z * alpha).collect(),
        label: uw.label.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn zadoff_chu_basics() {
        let zc = zadoff_chu(16, 1).unwrap();
        assert_eq!(zc.samples[0], Complex64::new(1.0, 0.0));
        assert!(zc.samples.iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
        assert!(zadoff_chu(16, 2).is_err());
        assert!(zadoff_chu(16, 0).is_err());
        assert!(zadoff_chu(16, 16).is_err());
    }

    fn max_sidelobe(samples: &[Complex64]) -> f64 {
        let n = samples.len();
        (1..n)
            .map(|lag| {
                (0..n)
                    .map(|k| samples[k] * samples[(k + lag) % n].conj())
                    .sum::<Complex64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn zadoff_chu_zero_autocorrelation() {
        assert!(max_sidelobe(&zadoff_chu(16, 1).unwrap().samples) < 1e-10);
        for (len, root) in [(16, 3), (16, 7), (13, 5), (63, 25), (64, 1)] {
            assert!(
                max_sidelobe(&zadoff_chu(len, root).unwrap().samples) < 1e-10,
                "{len} {root}"
            );
        }
    }

    fn write_file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_pads_with_zeros() {
        let body: String = (0..12).map(|i| format!("{i} -{i}\n")).collect();
        let f = write_file(&format!("# twelve samples\n{body}"));
        let uw = load_sequence(f.path(), 16).unwrap();
        assert_eq!(uw.len(), 16);
        assert_eq!(uw.samples[11], Complex64::new(11.0, -11.0));
        assert!(uw.samples[12..]
            .iter()
            .all(|z| *z == Complex64::new(0.0, 0.0)));

        let empty = write_file("");
        assert!(load_sequence(empty.path(), 16).unwrap().is_zero());

        let long: String = (0..17).map(|_| "1 0\n").collect();
        let f = write_file(&long);
        assert!(load_sequence(f.path(), 16).is_err());
    }

    #[test]
    fn load_reports_line_numbers() {
        let f = write_file("1 0\n# c\n1 x\n");
        match load_sequence(f.path(), 16) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn format_round_trips() {
        let uw = zadoff_chu(16, 5).unwrap();
        let f = write_file(&format_sequence(&uw));
        let back = load_sequence(f.path(), 16).unwrap();
        assert_eq!(back.samples, uw.samples);
    }

    #[test]
    fn scaling() {
        let cfg = SystemConfig::default_80211a_like();
        let uw = zadoff_chu(16, 1).unwrap();
        let scaled = scale_to_fraction(&uw, &cfg, 1.2).unwrap();
        assert!((scaled.energy() - 0.1).abs() < 1e-14);
        // Direction preserved: the ratio is one positive real.
        let ratio = scaled.samples[3] / uw.samples[3];
        assert!(ratio.im.abs() < 1e-15 && ratio.re > 0.0);
        for (s, u) in scaled.samples.iter().zip(&uw.samples) {
            assert!((s - u * ratio.re).norm() < 1e-15);
        }
        let total = 1.2 + scaled.energy();
        assert!((scaled.energy() / total - 4.0 / 52.0).abs() < 1e-14);

        let zero_frac = SystemConfig {
            uw_energy_fraction: 0.0,
            ..cfg.clone()
        };
        assert!(scale_to_fraction(&uw, &zero_frac, 1.2).unwrap().is_zero());
        assert!(scale_to_fraction(&UniqueWord::zero(16), &cfg, 1.2).is_err());
    }

    #[test]
    fn spec_strings() {
        assert_eq!("zero".parse::<SequenceKind>().unwrap(), SequenceKind::Zero);
        assert_eq!(
            "zc:3".parse::<SequenceKind>().unwrap(),
            SequenceKind::ZadoffChu { root: 3 }
        );
        assert_eq!(
            "file:/tmp/a.txt".parse::<SequenceKind>().unwrap(),
            SequenceKind::File("/tmp/a.txt".into())
        );
        assert!("zc:x".parse::<SequenceKind>().is_err());
        assert!("barker".parse::<SequenceKind>().is_err());
    }
}
