//! Required `Eb/N0` at a target BER.
//!
//! The scan walks upward from `lo_db` in fixed steps and stops at the first
//! point whose BER is at or below the target; the crossing is interpolated
//! linearly in `log10(BER)` between that point and the one before it.

use serde::Serialize;

use super::ber::{ber_point_with, BerPoint, Workers};
use super::se::se_of;
use crate::channel::ChannelSpec;
use crate::config::{Mode, SchemeConfig};
use crate::error::{Error, Result};

/// Grid `lo, lo + step, ...` up to and including `hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scan {
    pub lo_db: f64,
    pub hi_db: f64,
    pub step_db: f64,
}

impl Scan {
    pub fn new(lo_db: f64, hi_db: f64, step_db: f64) -> Self {
        Scan { lo_db, hi_db, step_db }
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.lo_db.is_finite() && self.hi_db.is_finite() && self.step_db > 0.0 && self.hi_db >= self.lo_db) {
            return Err(Error::InvalidScan(format!(
                "need finite lo <= hi and step > 0, got {}:{}:{}",
                self.lo_db, self.hi_db, self.step_db
            )));
        }
        let n = ((self.hi_db - self.lo_db) / self.step_db + 1e-9).floor() as usize;
        // Points are computed from the index so they do not drift.
        Ok((0..=n).map(|i| self.lo_db + i as f64 * self.step_db).collect())
    }
}

/// Outcome of a required-`Eb/N0` search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EeResult {
    pub config: SchemeConfig,
    pub mode: Mode,
    pub target_ber: f64,
    /// `+inf` when the BER never reaches the target inside the scan.
    pub required_ebn0_db: f64,
    pub se: f64,
    /// Lowest BER reached when the target was never met.
    pub floor_ber: Option<f64>,
    /// Every simulated point, in scan order.
    pub points: Vec<BerPoint>,
}

/// Largest step the crossing interpolation is meant for.
pub const MAX_STEP_DB: f64 = 0.25;

/// Scans `Eb/N0` upward with phase/frequency offsets and seed from `base`.
pub fn ee_required_ebn0(
    config: &SchemeConfig,
    mode: Mode,
    target_ber: f64,
    scan: Scan,
    trials_per_point: u64,
    base: &ChannelSpec,
    workers: Workers,
) -> Result<EeResult> {
    if !(target_ber > 0.0 && target_ber < 1.0) {
        return Err(Error::InvalidScan(format!("target BER {target_ber} outside (0, 1)")));
    }
    if scan.step_db > MAX_STEP_DB {
        return Err(Error::InvalidScan(format!(
            "step {} dB exceeds {MAX_STEP_DB} dB",
            scan.step_db
        )));
    }
    let grid = scan.points()?;
    let mut points: Vec<BerPoint> = Vec::with_capacity(grid.len());
    for &e in &grid {
        let spec = ChannelSpec { ebn0_db: e, ..*base };
        let p = ber_point_with(config, mode, &spec, trials_per_point, workers)?;
        points.push(p);
        if p.ber <= target_ber {
            break;
        }
    }
    let last = *points.last().expect("scan has at least one point");
    let result = |required: f64, floor: Option<f64>, points: Vec<BerPoint>| EeResult {
        config: *config,
        mode,
        target_ber,
        required_ebn0_db: required,
        se: se_of(config),
        floor_ber: floor,
        points,
    };
    if last.ber > target_ber {
        let floor = points.iter().map(|p| p.ber).fold(f64::INFINITY, f64::min);
        return Ok(result(f64::INFINITY, Some(floor), points));
    }
    if points.len() == 1 {
        // Already at or below the target at the lower edge. Accept the edge only
        // when the estimate cannot be told apart from the target.
        if last.ber + last.half_width >= target_ber {
            return Ok(result(scan.lo_db, None, points));
        }
        return Err(Error::Unbracketed {
            target: target_ber,
            lo_db: scan.lo_db,
            ber_lo: last.ber,
        });
    }
    let prev = points[points.len() - 2];
    let crossing = log_crossing(&prev, &last, target_ber);
    Ok(result(crossing, None, points))
}

/// Interpolates the target crossing between `a` (above target) and `b` (at or
/// below). A zero BER at `b` is floored to half an error.
fn log_crossing(a: &BerPoint, b: &BerPoint, target: f64) -> f64 {
    let ya = a.ber.log10();
    let yb = b.ber.max(0.5 / b.bits() as f64).log10();
    let t = target.log10();
    let (xa, xb) = (a.spec.ebn0_db, b.spec.ebn0_db);
    if ya == yb {
        return xb;
    }
    (xa + (ya - t) / (ya - yb) * (xb - xa)).clamp(xa, xb)
}
