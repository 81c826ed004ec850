//! Index-modulation schemes: FSCSS-IM and IQ-CIM.
//!
//! The payload is the combinadic rank of the activated tone set. Only the first
//! `2^floor(log2 C(M, active))` ranks are codewords; a detected set ranking past
//! them is clamped to the last legal rank.

use num_complex::Complex64;

use super::{check_bits, check_frame, top_indices};
use crate::bits::{BitReader, BitWriter};
use crate::combinadic::{subset_rank, subset_unrank};
use crate::config::{Mode, Scheme, SchemeConfig};
use crate::dsp::{add_tone, dechirp_spectrum, spread, Frame};
use crate::error::{Error, Result};

/// Activated tone sets; `quadrature` is empty for FSCSS-IM.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ImSymbol {
    pub in_phase: Vec<usize>,
    pub quadrature: Vec<usize>,
}

fn ensure_im(config: &SchemeConfig) -> Result<()> {
    if !config.scheme.is_index_modulation() {
        return Err(Error::InvalidConfig(format!(
            "{} is not an index-modulation scheme",
            config.scheme
        )));
    }
    Ok(())
}

fn branches(config: &SchemeConfig) -> usize {
    if config.scheme == Scheme::IqCim {
        2
    } else {
        1
    }
}

impl ImSymbol {
    pub fn from_bits(config: &SchemeConfig, bits: &[u8]) -> Self {
        let (m, s, w) = (config.m(), config.active_count, config.im_bits());
        let mut r = BitReader::new(bits);
        let mut unrank = || subset_unrank(r.take(w) as u64, m, s).expect("legal codeword");
        let in_phase = unrank();
        let quadrature = if branches(config) == 2 { unrank() } else { Vec::new() };
        ImSymbol { in_phase, quadrature }
    }

    pub fn to_bits(&self, config: &SchemeConfig) -> Vec<u8> {
        let w = config.im_bits();
        let top = (1u64 << w) - 1;
        let mut out = BitWriter::with_capacity(config.bits_per_symbol());
        let mut put = |set: &[usize]| {
            let z = subset_rank(set, config.m()).expect("sorted subset").min(top);
            out.put(z as usize, w);
        };
        put(&self.in_phase);
        if branches(config) == 2 {
            put(&self.quadrature);
        }
        out.finish()
    }
}

pub fn transmit(config: &SchemeConfig, sym: &ImSymbol) -> Frame {
    let mut s = vec![Complex64::new(0.0, 0.0); config.m()];
    for &k in &sym.in_phase {
        add_tone(&mut s, k, Complex64::new(1.0, 0.0));
    }
    for &k in &sym.quadrature {
        add_tone(&mut s, k, Complex64::i());
    }
    spread(&mut s, 1);
    s
}

pub fn modulate_im(config: &SchemeConfig, bits: &[u8]) -> Result<Frame> {
    check_bits(config, bits)?;
    ensure_im(config)?;
    Ok(transmit(config, &ImSymbol::from_bits(config, bits)))
}

pub fn detect_im(config: &SchemeConfig, frame: &[Complex64], mode: Mode) -> Result<Vec<u8>> {
    check_frame(config, frame, mode)?;
    ensure_im(config)?;
    Ok(receive(config, frame, mode).to_bits(config))
}

/// Detector core; assumes a validated config, a supported mode and a frame of length `M`.
pub fn receive(config: &SchemeConfig, y: &[Complex64], mode: Mode) -> ImSymbol {
    let r = dechirp_spectrum(y, 1).expect("validated frame");
    let s = config.active_count;
    let pick = |f: fn(&Complex64) -> f64| top_indices(&r.iter().map(f).collect::<Vec<_>>(), s);
    match (config.scheme, mode) {
        (Scheme::FscssIm, Mode::Coherent) => ImSymbol {
            in_phase: pick(|v| v.re),
            quadrature: vec![],
        },
        (Scheme::FscssIm, _) => ImSymbol {
            in_phase: pick(|v| v.norm_sqr()),
            quadrature: vec![],
        },
        _ => ImSymbol {
            in_phase: pick(|v| v.re),
            quadrature: pick(|v| v.im),
        },
    }
}
