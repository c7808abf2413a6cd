#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use uw_ofdm::energy::{db_shift, energy_direct, energy_two_step};
use uw_ofdm::generator::{build_generator, greedy_redundant_placement};
use uw_ofdm::sequences::{format_sequence, zadoff_chu};
use uw_ofdm::sim::{emit_csv, prepare_uw, run_sweep, SweepSpec};
use uw_ofdm::{
    Approach, ChannelTaps, ComplexMatrix, Error, Modulation, SequenceKind, SystemConfig,
};

#[derive(Parser)]
#[command(name = "uw-ofdm", version, about = "Unique word OFDM simulation tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the built-in 802.11a-like system configuration.
    Config,
    /// Dump T, G, the condition number of M22 and tr(T T^H) as CSV.
    Matrices {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Improve the redundant carrier placement with this many greedy passes first.
        #[arg(long)]
        greedy: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean symbol energy breakdown per unique word and approach as CSV.
    Energy {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Unique words: zero, zc:ROOT or file:PATH. Defaults to zero and zc:1.
        #[arg(long = "uw", num_args = 1..)]
        uw: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo BER sweep.
    Ber {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "uw", num_args = 1.., default_value = "zc:1")]
        uw: Vec<String>,
        /// two-step, direct or cp-reference; may be repeated.
        #[arg(long = "approach", num_args = 1.., default_value = "two-step")]
        approach: Vec<String>,
        /// Eb/N0 grid in dB as LO:HI:STEP.
        #[arg(long)]
        ebn0: String,
        /// Channel tap file; AWGN when omitted.
        #[arg(long)]
        taps: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long = "min-errors", default_value_t = 1000)]
        min_errors: u64,
        #[arg(long = "max-bits", default_value_t = 10_000_000)]
        max_bits: u64,
        #[arg(long, default_value = "qpsk")]
        modulation: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit a sequence file.
    Sequence {
        #[arg(long, default_value = "zadoff-chu")]
        kind: String,
        #[arg(long, default_value_t = 16)]
        length: usize,
        #[arg(long, default_value_t = 1)]
        root: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: Option<&Path>) -> Result<SystemConfig, Error> {
    match path {
        Some(p) => SystemConfig::load(p),
        None => Ok(SystemConfig::default_80211a_like()),
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => match std::io::stdout().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Io {
                path: "<stdout>".into(),
                source: e,
            }),
            _ => Ok(()),
        },
    }
}

fn parse_range(s: &str) -> Result<Vec<f64>, Error> {
    let bad = || Error::InvalidArgument(format!("expected LO:HI:STEP, got `{s}`"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let [lo, hi, step] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0) || hi < lo {
        return Err(bad());
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| lo + i as f64 * step).collect())
}

fn push_matrix(csv: &mut String, name: &str, m: &ComplexMatrix) {
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            let z = m[(r, c)];
            csv.push_str(&format!("{name},{r},{c},{:e},{:e}\n", z.re, z.im));
        }
    }
}

fn matrices(config: Option<&Path>, greedy: Option<usize>, out: Option<&Path>) -> Result<(), Error> {
    let mut cfg = load_config(config)?;
    if let Some(passes) = greedy {
        cfg = greedy_redundant_placement(&cfg, passes)?;
    }
    let gen = build_generator(&cfg)?;
    let placement = cfg
        .redundant_carrier_indices
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(" ");
    let mut csv = String::from("name,row,col,re,im\n");
    csv.push_str(&format!("# redundant_carrier_indices: {placement}\n"));
    csv.push_str(&format!("cond1_m22,,,{:e},0\n", gen.m22_condition()));
    csv.push_str(&format!("trace_tth,,,{:e},0\n", gen.trace_tth()));
    push_matrix(&mut csv, "T", &gen.t_matrix);
    push_matrix(&mut csv, "G", &gen.g_matrix);
    write_output(out, &csv)
}

fn energy(config: Option<&Path>, uw: &[String], out: Option<&Path>) -> Result<(), Error> {
    let cfg = load_config(config)?;
    let gen = build_generator(&cfg)?;
    let specs: Vec<String> = if uw.is_empty() {
        vec!["zero".into(), "zc:1".into()]
    } else {
        uw.to_vec()
    };
    let mut csv = String::from("label,approach,e_d,e_r,e_u,e_total,excess,db_vs_two_step\n");
    for s in &specs {
        let word = prepare_uw(
            &s.parse::<SequenceKind>()?.with_length(cfg.n_uw),
            &cfg,
            &gen,
        )?;
        let two = energy_two_step(&gen, &cfg, &word);
        let direct = energy_direct(&gen, &cfg, &word)?;
        for e in [two, direct] {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                word.label,
                e.approach,
                e.e_d,
                e.e_r,
                e.e_u,
                e.e_total,
                e.excess,
                db_shift(e.e_total, two.e_total)?
            ));
        }
    }
    write_output(out, &csv)
}

#[allow(clippy::too_many_arguments)]
fn ber(
    config: Option<&Path>,
    uw: &[String],
    approach: &[String],
    ebn0: &str,
    taps: Option<&Path>,
    seed: u64,
    min_errors: u64,
    max_bits: u64,
    modulation: &str,
    out: &Path,
) -> Result<(), Error> {
    let cfg = load_config(config)?;
    let uw_specs = uw
        .iter()
        .map(|s| Ok(s.parse::<SequenceKind>()?.with_length(cfg.n_uw)))
        .collect::<Result<Vec<_>, Error>>()?;
    let approaches = approach
        .iter()
        .map(|a| a.parse())
        .collect::<Result<Vec<Approach>, _>>()?;
    let mut spec = SweepSpec::new(parse_range(ebn0)?, approaches, uw_specs);
    spec.taps = match taps {
        Some(p) => ChannelTaps::load(p)?,
        None => ChannelTaps::identity(),
    };
    spec.seed = seed;
    spec.min_bit_errors = min_errors;
    spec.max_bits = max_bits;
    spec.modulation = modulation.parse::<Modulation>()?;
    let points = run_sweep(&spec, &cfg)?;
    emit_csv(&points, out)
}

fn sequence(kind: &str, length: usize, root: usize, out: Option<&Path>) -> Result<(), Error> {
    let uw = match kind {
        "zadoff-chu" | "zc" => zadoff_chu(length, root)?,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unsupported sequence kind `{other}` (only zadoff-chu is built in)"
            )))
        }
    };
    write_output(out, &format_sequence(&uw))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Config => write_output(None, &SystemConfig::default_80211a_like().to_string()),
        Command::Matrices {
            config,
            greedy,
            out,
        } => matrices(config.as_deref(), greedy, out.as_deref()),
        Command::Energy { config, uw, out } => energy(config.as_deref(), &uw, out.as_deref()),
        Command::Ber {
            config,
            uw,
            approach,
            ebn0,
            taps,
            seed,
            min_errors,
            max_bits,
            modulation,
            out,
        } => ber(
            config.as_deref(),
            &uw,
            &approach,
            &ebn0,
            taps.as_deref(),
            seed,
            min_errors,
            max_bits,
            &modulation,
            &out,
        ),
        Command::Sequence {
            kind,
            length,
            root,
            out,
        } => sequence(&kind, length, root, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
