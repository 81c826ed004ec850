//! Modulators and detectors for all sixteen schemes.
//!
//! Every frame is `M` samples; every detector starts from one or more de-chirp
//! spectra. Ties in any argmax break toward the lowest index, and toward the
//! lowest-numbered hypothesis when comparing spectra.

pub mod index;
pub mod multi;
pub mod single;

use num_complex::Complex64;

use crate::config::{Mode, SchemeConfig};
use crate::dsp::Frame;
use crate::error::{Error, Result};

pub use index::{detect_im, modulate_im};
pub use multi::{detect_mc, modulate_mc};
pub use single::{detect_sc, interleave, modulate_sc};

/// Builds the transmit frame for one bit block.
pub fn modulate(config: &SchemeConfig, bits: &[u8]) -> Result<Frame> {
    if config.scheme.is_single_chirp() {
        modulate_sc(config, bits)
    } else if config.scheme.is_index_modulation() {
        modulate_im(config, bits)
    } else {
        modulate_mc(config, bits)
    }
}

/// Recovers the bit block from a received frame.
pub fn detect(config: &SchemeConfig, frame: &[Complex64], mode: Mode) -> Result<Vec<u8>> {
    if config.scheme.is_single_chirp() {
        detect_sc(config, frame, mode)
    } else if config.scheme.is_index_modulation() {
        detect_im(config, frame, mode)
    } else {
        detect_mc(config, frame, mode)
    }
}

pub(crate) fn check_bits(config: &SchemeConfig, bits: &[u8]) -> Result<()> {
    config.validate()?;
    let expected = config.bits_per_symbol();
    if bits.len() != expected {
        return Err(Error::BitLength {
            expected,
            got: bits.len(),
        });
    }
    Ok(())
}

pub(crate) fn check_frame(config: &SchemeConfig, frame: &[Complex64], mode: Mode) -> Result<()> {
    config.validate()?;
    config.check_mode(mode)?;
    if frame.len() != config.m() {
        return Err(Error::FrameLength {
            expected: config.m(),
            got: frame.len(),
        });
    }
    Ok(())
}

/// Decision metric of one bin: the real part when coherent, the squared
/// magnitude otherwise.
#[inline]
pub(crate) fn score(v: Complex64, mode: Mode) -> f64 {
    match mode {
        Mode::Coherent => v.re,
        _ => v.norm_sqr(),
    }
}

/// Index and value of the first maximum.
pub(crate) fn argmax<I: IntoIterator<Item = (usize, f64)>>(it: I) -> (usize, f64) {
    let mut best = (usize::MAX, f64::NEG_INFINITY);
    for (i, v) in it {
        if v > best.1 || best.0 == usize::MAX {
            best = (i, v);
        }
    }
    best
}

/// Argmax of the mode metric over `bins`.
pub(crate) fn peak<I: IntoIterator<Item = usize>>(r: &[Complex64], mode: Mode, bins: I) -> (usize, f64) {
    argmax(bins.into_iter().map(|k| (k, score(r[k], mode))))
}

/// `kappa` of a spectrum: the peak metric over all bins.
pub(crate) fn kappa(r: &[Complex64], mode: Mode) -> f64 {
    peak(r, mode, 0..r.len()).1
}

/// The `count` largest entries by `metric`, returned in ascending index order.
/// Equal metrics prefer the lower index.
pub(crate) fn top_indices(metric: &[f64], count: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..metric.len()).collect();
    // Stable sort keeps lower indices first among equals.
    idx.sort_by(|&a, &b| metric[b].total_cmp(&metric[a]));
    let mut top = idx[..count].to_vec();
    top.sort_unstable();
    top
}
