//! Command-line front end: single BER/EE runs, SE tables and sweep files.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use csslab::channel::ChannelSpec;
use csslab::harness::{
    ber_adaptive, ee_required_ebn0, group_of, parse_range, run_experiment, se_ratio, write_ber_csv, write_ee_csv,
    StopRule, Workers,
};
use csslab::{Mode, Scheme, SchemeConfig};

#[derive(Parser)]
#[command(name = "csslab", version, about = "Chirp spread spectrum modulation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// BER over an Eb/N0 grid, written as CSV.
    Ber(BerArgs),
    /// Required Eb/N0 for a target BER.
    Ee(EeArgs),
    /// Bits per symbol and spectral efficiency.
    Se(SeArgs),
    /// Execute a TOML sweep file.
    Run(RunArgs),
    /// List schemes and the receiver modes each supports.
    Schemes,
}

#[derive(Args)]
struct SchemeArgs {
    #[arg(long)]
    scheme: Scheme,
    /// Spreading factor; M = 2^lambda samples per symbol.
    #[arg(long, default_value_t = 8)]
    lambda: u32,
    #[arg(long, default_value_t = 4)]
    psk_cardinality: usize,
    #[arg(long, default_value_t = 8)]
    cr_count: usize,
    #[arg(long, default_value_t = 2)]
    subbands: usize,
    #[arg(long, default_value_t = 2)]
    psk_bits_per_band: u32,
    #[arg(long, default_value_t = 2)]
    groups: usize,
    #[arg(long, default_value_t = 2)]
    active_count: usize,
    #[arg(long, default_value_t = 2.4)]
    ratio_threshold: f64,
}

impl SchemeArgs {
    fn config(&self) -> Result<SchemeConfig> {
        let c = SchemeConfig {
            scheme: self.scheme,
            lambda: self.lambda,
            psk_cardinality: self.psk_cardinality,
            cr_count: self.cr_count,
            subbands: self.subbands,
            psk_bits_per_band: self.psk_bits_per_band,
            groups: self.groups,
            active_count: self.active_count,
            ratio_threshold: self.ratio_threshold,
        };
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct ChannelArgs {
    /// Receiver mode; defaults to the first one the scheme supports.
    #[arg(long)]
    mode: Option<Mode>,
    /// Carrier phase offset in radians.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    psi: f64,
    /// Frequency offset in bins (cycles per symbol).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    delta_f: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ChannelArgs {
    fn mode_for(&self, scheme: Scheme) -> Result<Mode> {
        let mode = self.mode.unwrap_or(scheme.supported_modes()[0]);
        if !scheme.supports(mode) {
            bail!("{scheme} has no {mode} receiver (supported: {})", modes_list(scheme));
        }
        Ok(mode)
    }

    fn sink(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
            None => Box::new(io::stdout().lock()),
        })
    }
}

#[derive(Args)]
struct BerArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[command(flatten)]
    channel: ChannelArgs,
    /// Single Eb/N0 point in dB.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "ebn0_range")]
    ebn0: Option<f64>,
    /// Eb/N0 grid as lo:hi:step in dB.
    #[arg(long, allow_hyphen_values = true)]
    ebn0_range: Option<String>,
    /// Symbols per point, or the starting count with --min-errors.
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Keep doubling the trials until this many bit errors are seen.
    #[arg(long, default_value_t = 0)]
    min_errors: u64,
    /// Cap for the adaptive trial count.
    #[arg(long)]
    max_trials: Option<u64>,
}

#[derive(Args)]
struct EeArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long, default_value_t = 1e-3)]
    target: f64,
    /// Scan as lo:hi:step in dB; step at most 0.25.
    #[arg(long, default_value = "-4:20:0.25", allow_hyphen_values = true)]
    ebn0_range: String,
    #[arg(long, default_value_t = 20_000)]
    trials: u64,
}

#[derive(Args)]
struct SeArgs {
    /// Spreading factors to tabulate.
    #[arg(long, value_delimiter = ',', default_values_t = vec![6u32, 7, 8, 9, 10, 11, 12])]
    lambda: Vec<u32>,
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the worker count in the file.
    #[arg(long)]
    workers: Option<usize>,
}

fn modes_list(scheme: Scheme) -> String {
    scheme
        .supported_modes()
        .iter()
        .map(|m| m.name())
        .collect::<Vec<_>>()
        .join(",")
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Ber(a) => {
            let config = a.scheme.config()?;
            let mode = a.channel.mode_for(config.scheme)?;
            let grid = match (&a.ebn0, &a.ebn0_range) {
                (Some(e), None) => vec![*e],
                (None, Some(r)) => parse_range(r)?.points()?,
                _ => bail!("give --ebn0 or --ebn0-range"),
            };
            let rule = StopRule {
                min_trials: a.trials,
                min_errors: a.min_errors,
                max_trials: a.max_trials.unwrap_or(a.trials),
            };
            if rule.max_trials < rule.min_trials {
                bail!("--max-trials must be at least --trials");
            }
            let mut points = Vec::with_capacity(grid.len());
            for e in grid {
                let spec = ChannelSpec {
                    ebn0_db: e,
                    psi: a.channel.psi,
                    delta_f: a.channel.delta_f,
                    seed: a.channel.seed,
                };
                points.push(ber_adaptive(&config, mode, &spec, rule, Workers(a.channel.workers))?);
            }
            write_ber_csv(a.channel.sink()?, &points)?;
        }
        Command::Ee(a) => {
            let config = a.scheme.config()?;
            let mode = a.channel.mode_for(config.scheme)?;
            let scan = parse_range(&a.ebn0_range)?;
            let base = ChannelSpec {
                ebn0_db: 0.0,
                psi: a.channel.psi,
                delta_f: a.channel.delta_f,
                seed: a.channel.seed,
            };
            let r = ee_required_ebn0(
                &config,
                mode,
                a.target,
                scan,
                a.trials,
                &base,
                Workers(a.channel.workers),
            )?;
            write_ee_csv(a.channel.sink()?, &[r])?;
        }
        Command::Se(a) => {
            let mut out = io::stdout().lock();
            writeln!(out, "scheme,group,lambda,bits,m,se")?;
            for scheme in Scheme::ALL {
                for &lambda in &a.lambda {
                    let config = SchemeConfig::new(scheme, lambda);
                    if config.validate().is_err() {
                        continue;
                    }
                    let (b, m) = se_ratio(&config);
                    writeln!(
                        out,
                        "{scheme},{},{lambda},{b},{m},{:.6}",
                        group_of(scheme),
                        b as f64 / m as f64
                    )?;
                }
            }
        }
        Command::Run(a) => {
            let manifest = run_experiment(&a.config, &a.out, a.workers)
                .with_context(|| format!("running {}", a.config.display()))?;
            for w in &manifest.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!(
                "wrote {} BER rows, {} EE rows to {}",
                manifest.ber_rows,
                manifest.ee_rows,
                a.out.display()
            );
        }
        Command::Schemes => {
            for scheme in Scheme::ALL {
                println!("{:<14} {}", scheme.name(), modes_list(scheme));
            }
        }
    }
    Ok(())
}
