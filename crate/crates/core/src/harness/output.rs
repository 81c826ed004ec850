//! CSV rows with fixed column order and number formatting, so reruns compare
//! byte for byte.

use std::io::Write;

use super::ber::BerPoint;
use super::ee::EeResult;
use crate::error::Result;

pub const BER_HEADER: [&str; 11] = [
    "scheme",
    "lambda",
    "mode",
    "ebn0_db",
    "psi_rad",
    "delta_f",
    "trials",
    "bit_errors",
    "ber",
    "ci_half_width",
    "seed",
];

pub const EE_HEADER: [&str; 11] = [
    "scheme",
    "lambda",
    "mode",
    "psi_rad",
    "delta_f",
    "target_ber",
    "required_ebn0_db",
    "floor_ber",
    "se",
    "trials_per_point",
    "seed",
];

fn fixed(x: f64, digits: usize) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    // Avoid "-0.000" for values that round to zero.
    let s = format!("{x:.digits$}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

fn sci(x: f64) -> String {
    format!("{x:.6e}")
}

pub fn ber_record(p: &BerPoint) -> Vec<String> {
    vec![
        p.config.scheme.name().to_string(),
        p.config.lambda.to_string(),
        p.mode.name().to_string(),
        fixed(p.spec.ebn0_db, 4),
        fixed(p.spec.psi, 6),
        fixed(p.spec.delta_f, 6),
        p.trials.to_string(),
        p.bit_errors.to_string(),
        sci(p.ber),
        sci(p.half_width),
        p.spec.seed.to_string(),
    ]
}

pub fn ee_record(r: &EeResult) -> Vec<String> {
    let first = r.points.first();
    let spec = first.map(|p| p.spec);
    vec![
        r.config.scheme.name().to_string(),
        r.config.lambda.to_string(),
        r.mode.name().to_string(),
        fixed(spec.map_or(0.0, |s| s.psi), 6),
        fixed(spec.map_or(0.0, |s| s.delta_f), 6),
        sci(r.target_ber),
        fixed(r.required_ebn0_db, 4),
        r.floor_ber.map(sci).unwrap_or_default(),
        sci(r.se),
        first.map_or(0, |p| p.trials).to_string(),
        spec.map_or(0, |s| s.seed).to_string(),
    ]
}

fn write_rows<W: Write>(out: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_ber_csv<W: Write>(out: W, points: &[BerPoint]) -> Result<()> {
    write_rows(out, &BER_HEADER, points.iter().map(ber_record))
}

pub fn write_ee_csv<W: Write>(out: W, results: &[EeResult]) -> Result<()> {
    write_rows(out, &EE_HEADER, results.iter().map(ee_record))
}
