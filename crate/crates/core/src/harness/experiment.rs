//! Sweep files: a TOML document declaring a scheme × mode × λ × impairment ×
//! `Eb/N0` matrix, executed into `ber.csv`, an optional `ee.csv` and
//! `manifest.json`.
//!
//! ```toml
//! seed = 1              # run seed (default 1)
//! trials = 2000         # symbols per point; the starting count when min_errors is set
//! min_errors = 100      # optional: double the trials until this many bit errors...
//! max_trials = 64000    # ...or this cap is hit (default: trials)
//! workers = 0           # optional; 0 uses every core
//!
//! [sweep]
//! schemes = ["lora", "ssk-lora"]
//! modes = ["coherent", "noncoherent"]   # optional; default: every supported mode
//! lambdas = [8]                         # default [8]
//! ebn0_db = [0.0, 2.0]                  # explicit points, and/or
//! ebn0_range = "0:10:0.5"               # lo:hi:step, inclusive
//! impairments = [{ psi = 0.0, delta_f = 0.0 }, { psi = 0.785398 }]
//!
//! [params]              # optional overrides of scheme parameters
//! psk_cardinality = 4
//! cr_count = 8
//! subbands = 2
//! psk_bits_per_band = 2
//! groups = 2
//! active_count = 2
//! ratio_threshold = 2.4
//!
//! [ee]                  # optional required-Eb/N0 search per matrix cell
//! target_ber = 1e-3
//! range = "-4:16:0.25"
//! trials = 20000
//! ```
//!
//! Scheme/mode pairs without a receiver and parameter sets that fail
//! validation are skipped and reported as warnings in the manifest.

use std::collections::BTreeSet;
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::Spanned;

use super::ber::{ber_adaptive, BerPoint, StopRule, Workers};
use super::ee::{ee_required_ebn0, EeResult, Scan};
use super::output::{write_ber_csv, write_ee_csv};
use crate::channel::ChannelSpec;
use crate::config::{Mode, Scheme, SchemeConfig};
use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    trials: Option<Spanned<u64>>,
    min_errors: Option<u64>,
    max_trials: Option<Spanned<u64>>,
    workers: Option<usize>,
    #[serde(default)]
    sweep: RawSweep,
    #[serde(default)]
    params: RawParams,
    ee: Option<RawEe>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    #[serde(default)]
    schemes: Vec<Spanned<String>>,
    modes: Option<Vec<Spanned<String>>>,
    lambdas: Option<Vec<Spanned<u32>>>,
    ebn0_db: Option<Vec<f64>>,
    ebn0_range: Option<Spanned<String>>,
    impairments: Option<Vec<RawImpairment>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawImpairment {
    #[serde(default)]
    psi: f64,
    #[serde(default)]
    delta_f: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    psk_cardinality: Option<usize>,
    cr_count: Option<usize>,
    subbands: Option<usize>,
    psk_bits_per_band: Option<u32>,
    groups: Option<usize>,
    active_count: Option<usize>,
    ratio_threshold: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEe {
    target_ber: Option<f64>,
    range: Spanned<String>,
    trials: Spanned<u64>,
}

/// Required-`Eb/N0` search settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EeSettings {
    pub target_ber: f64,
    pub scan: Scan,
    pub trials: u64,
}

/// A validated sweep file.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub source: String,
    pub text: String,
    pub seed: u64,
    pub rule: StopRule,
    pub workers: usize,
    pub schemes: Vec<Scheme>,
    /// `None` means every supported mode of each scheme.
    pub modes: Option<Vec<Mode>>,
    pub lambdas: Vec<u32>,
    pub ebn0_db: Vec<f64>,
    /// `(psi, delta_f)` cases.
    pub impairments: Vec<(f64, f64)>,
    /// Template holding parameter overrides; its scheme and lambda are replaced per cell.
    pub params: SchemeConfig,
    pub ee: Option<EeSettings>,
}

/// Parses `lo:hi:step`.
pub fn parse_range(s: &str) -> Result<Scan> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let nums: std::result::Result<Vec<f64>, _> = parts.iter().map(|p| p.parse::<f64>()).collect();
    match nums {
        Ok(v) if v.len() == 3 => {
            let scan = Scan::new(v[0], v[1], v[2]);
            scan.points()?;
            Ok(scan)
        }
        _ => Err(Error::InvalidScan(format!("expected lo:hi:step, got `{s}`"))),
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn key_on_line(text: &str, line: usize) -> String {
    text.lines()
        .nth(line.saturating_sub(1))
        .and_then(|l| l.split('=').next())
        .map(|k| k.trim().trim_matches(|c| c == '[' || c == ']').to_string())
        .unwrap_or_default()
}

struct Ctx<'a> {
    source: &'a str,
    text: &'a str,
}

impl Ctx<'_> {
    fn err(&self, span: Range<usize>, field: &str, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.source.to_string(),
            line: line_of(self.text, span.start),
            field: field.to_string(),
            msg: msg.into(),
        }
    }
}

/// Parses and validates a sweep document. `source` names it in diagnostics.
pub fn parse_experiment(text: &str, source: &str) -> Result<Experiment> {
    let ctx = Ctx { source, text };
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(0, |s| line_of(text, s.start));
        Error::Parse {
            path: source.to_string(),
            line,
            field: key_on_line(text, line),
            msg: e.message().to_string(),
        }
    })?;

    let trials = raw.trials.as_ref().map_or(1000, |t| *t.get_ref());
    if trials == 0 {
        let span = raw.trials.as_ref().map(|t| t.span()).unwrap_or(0..0);
        return Err(ctx.err(span, "trials", "must be >= 1"));
    }
    let max_trials = raw.max_trials.as_ref().map_or(trials, |t| *t.get_ref());
    if max_trials < trials {
        let span = raw.max_trials.as_ref().map(|t| t.span()).unwrap_or(0..0);
        return Err(ctx.err(span, "max_trials", "must be >= trials"));
    }
    let rule = StopRule {
        min_trials: trials,
        min_errors: raw.min_errors.unwrap_or(0),
        max_trials,
    };

    let mut schemes = Vec::new();
    for (i, s) in raw.sweep.schemes.iter().enumerate() {
        let scheme = s
            .get_ref()
            .parse::<Scheme>()
            .map_err(|e| ctx.err(s.span(), &format!("sweep.schemes[{i}]"), e.to_string()))?;
        schemes.push(scheme);
    }
    let modes = match &raw.sweep.modes {
        None => None,
        Some(list) => {
            let mut out = Vec::new();
            for (i, m) in list.iter().enumerate() {
                out.push(
                    m.get_ref()
                        .parse::<Mode>()
                        .map_err(|e| ctx.err(m.span(), &format!("sweep.modes[{i}]"), e.to_string()))?,
                );
            }
            Some(out)
        }
    };
    let lambdas = match &raw.sweep.lambdas {
        None => vec![8],
        Some(list) => {
            let mut out = Vec::new();
            for (i, l) in list.iter().enumerate() {
                let v = *l.get_ref();
                if !(2..=crate::config::MAX_LAMBDA).contains(&v) {
                    return Err(ctx.err(
                        l.span(),
                        &format!("sweep.lambdas[{i}]"),
                        format!("lambda {v} out of range"),
                    ));
                }
                out.push(v);
            }
            out
        }
    };
    let mut ebn0_db = raw.sweep.ebn0_db.clone().unwrap_or_default();
    if let Some(r) = &raw.sweep.ebn0_range {
        let scan = parse_range(r.get_ref()).map_err(|e| ctx.err(r.span(), "sweep.ebn0_range", e.to_string()))?;
        ebn0_db.extend(scan.points()?);
    }
    if ebn0_db.iter().any(|e| e.is_nan()) {
        return Err(ctx.err(0..0, "sweep.ebn0_db", "NaN Eb/N0"));
    }
    let impairments = match &raw.sweep.impairments {
        None => vec![(0.0, 0.0)],
        Some(list) => list.iter().map(|i| (i.psi, i.delta_f)).collect(),
    };
    if impairments.iter().any(|(p, f)| !p.is_finite() || !f.is_finite()) {
        return Err(ctx.err(0..0, "sweep.impairments", "offsets must be finite"));
    }

    let mut params = SchemeConfig::new(Scheme::Lora, 8);
    let p = &raw.params;
    if let Some(v) = p.psk_cardinality {
        params.psk_cardinality = v;
    }
    if let Some(v) = p.cr_count {
        params.cr_count = v;
    }
    if let Some(v) = p.subbands {
        params.subbands = v;
    }
    if let Some(v) = p.psk_bits_per_band {
        params.psk_bits_per_band = v;
    }
    if let Some(v) = p.groups {
        params.groups = v;
    }
    if let Some(v) = p.active_count {
        params.active_count = v;
    }
    if let Some(v) = p.ratio_threshold {
        params.ratio_threshold = v;
    }

    let ee = match &raw.ee {
        None => None,
        Some(e) => {
            let target_ber = e.target_ber.unwrap_or(1e-3);
            if !(target_ber > 0.0 && target_ber < 1.0) {
                return Err(ctx.err(e.range.span(), "ee.target_ber", "must lie in (0, 1)"));
            }
            let scan =
                parse_range(e.range.get_ref()).map_err(|err| ctx.err(e.range.span(), "ee.range", err.to_string()))?;
            if scan.step_db > super::ee::MAX_STEP_DB {
                return Err(ctx.err(e.range.span(), "ee.range", "step must be <= 0.25 dB"));
            }
            if *e.trials.get_ref() == 0 {
                return Err(ctx.err(e.trials.span(), "ee.trials", "must be >= 1"));
            }
            Some(EeSettings {
                target_ber,
                scan,
                trials: *e.trials.get_ref(),
            })
        }
    };

    Ok(Experiment {
        source: source.to_string(),
        text: text.to_string(),
        seed: raw.seed.unwrap_or(1),
        rule,
        workers: raw.workers.unwrap_or(0),
        schemes,
        modes,
        lambdas,
        ebn0_db,
        impairments,
        params,
        ee,
    })
}

pub fn load_experiment(path: &Path) -> Result<Experiment> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_experiment(&text, &path.display().to_string())
}

/// Everything a sweep produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOutput {
    pub ber: Vec<BerPoint>,
    pub ee: Vec<EeResult>,
    pub warnings: Vec<String>,
}

/// Runs the matrix in declaration order: scheme, lambda, mode, impairment, `Eb/N0`.
pub fn execute(exp: &Experiment, workers: Option<usize>) -> Result<RunOutput> {
    let workers = Workers(workers.unwrap_or(exp.workers));
    let mut out = RunOutput::default();
    let mut warned = BTreeSet::new();
    for &scheme in &exp.schemes {
        for &lambda in &exp.lambdas {
            let config = SchemeConfig {
                scheme,
                lambda,
                ..exp.params
            };
            if let Err(e) = config.validate() {
                out.warnings.push(format!("skipped {scheme} lambda={lambda}: {e}"));
                continue;
            }
            let modes: Vec<Mode> = match &exp.modes {
                None => scheme.supported_modes().to_vec(),
                Some(list) => list.clone(),
            };
            for mode in modes {
                if !scheme.supports(mode) {
                    if warned.insert((scheme, mode)) {
                        out.warnings
                            .push(format!("skipped {scheme}/{mode}: no {mode} receiver for this scheme"));
                    }
                    continue;
                }
                for &(psi, delta_f) in &exp.impairments {
                    let base = ChannelSpec {
                        ebn0_db: 0.0,
                        psi,
                        delta_f,
                        seed: exp.seed,
                    };
                    for &e in &exp.ebn0_db {
                        let spec = ChannelSpec { ebn0_db: e, ..base };
                        out.ber.push(ber_adaptive(&config, mode, &spec, exp.rule, workers)?);
                    }
                    if let Some(ee) = &exp.ee {
                        match ee_required_ebn0(&config, mode, ee.target_ber, ee.scan, ee.trials, &base, workers) {
                            Ok(r) => out.ee.push(r),
                            Err(Error::Unbracketed { .. }) => out.warnings.push(format!(
                                "{scheme}/{mode} lambda={lambda} psi={psi} delta_f={delta_f}: target already met at the lower scan edge"
                            )),
                            Err(e) => return Err(e),
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Manifest written next to the CSV files.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config_source: String,
    pub config: String,
    pub ber_rows: usize,
    pub ee_rows: usize,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
}

/// Runs a sweep file and writes its outputs into `out_dir`.
pub fn run_experiment(config_path: &Path, out_dir: &Path, workers: Option<usize>) -> Result<Manifest> {
    let exp = load_experiment(config_path)?;
    run_loaded(&exp, out_dir, workers)
}

pub fn run_loaded(exp: &Experiment, out_dir: &Path, workers: Option<usize>) -> Result<Manifest> {
    let result = execute(exp, workers)?;
    fs::create_dir_all(out_dir)?;
    let mut outputs: Vec<PathBuf> = vec![out_dir.join("ber.csv")];
    write_ber_csv(fs::File::create(&outputs[0])?, &result.ber)?;
    if exp.ee.is_some() {
        let p = out_dir.join("ee.csv");
        write_ee_csv(fs::File::create(&p)?, &result.ee)?;
        outputs.push(p);
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: exp.seed,
        config_source: exp.source.clone(),
        config: exp.text.clone(),
        ber_rows: result.ber.len(),
        ee_rows: result.ee.len(),
        outputs: outputs
            .iter()
            .map(|p| p.file_name().unwrap_or_default().to_string_lossy().into_owned())
            .collect(),
        warnings: result.warnings.clone(),
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(out_dir.join("manifest.json"), json + "\n")?;
    Ok(manifest)
}
