//! Scheme identifiers, detection modes and per-scheme parameters.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::combinadic::binomial;
use crate::error::{Error, Result};

/// The sixteen waveform designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Scheme {
    Lora,
    IcsLora,
    ELora,
    PskLora,
    SskLora,
    DcrkLora,
    SskIcsLora,
    DoCss,
    IqCss,
    EpskCss,
    Gcss,
    TdmCss,
    IqTdmCss,
    DmCss,
    FscssIm,
    IqCim,
}

/// Receiver family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Mode {
    Coherent,
    NonCoherent,
    SemiCoherent,
}

impl Scheme {
    pub const ALL: [Scheme; 16] = [
        Scheme::Lora,
        Scheme::IcsLora,
        Scheme::ELora,
        Scheme::PskLora,
        Scheme::SskLora,
        Scheme::DcrkLora,
        Scheme::SskIcsLora,
        Scheme::DoCss,
        Scheme::IqCss,
        Scheme::EpskCss,
        Scheme::Gcss,
        Scheme::TdmCss,
        Scheme::IqTdmCss,
        Scheme::DmCss,
        Scheme::FscssIm,
        Scheme::IqCim,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Lora => "lora",
            Scheme::IcsLora => "ics-lora",
            Scheme::ELora => "e-lora",
            Scheme::PskLora => "psk-lora",
            Scheme::SskLora => "ssk-lora",
            Scheme::DcrkLora => "dcrk-lora",
            Scheme::SskIcsLora => "ssk-ics-lora",
            Scheme::DoCss => "do-css",
            Scheme::IqCss => "iq-css",
            Scheme::EpskCss => "epsk-css",
            Scheme::Gcss => "gcss",
            Scheme::TdmCss => "tdm-css",
            Scheme::IqTdmCss => "iq-tdm-css",
            Scheme::DmCss => "dm-css",
            Scheme::FscssIm => "fscss-im",
            Scheme::IqCim => "iq-cim",
        }
    }

    /// Detection modes the scheme has a receiver for.
    pub fn supported_modes(self) -> &'static [Mode] {
        use Mode::*;
        match self {
            Scheme::ELora | Scheme::IqTdmCss | Scheme::IqCim => &[Coherent],
            Scheme::PskLora | Scheme::EpskCss => &[Coherent, SemiCoherent],
            Scheme::Gcss => &[NonCoherent],
            _ => &[Coherent, NonCoherent],
        }
    }

    pub fn supports(self, mode: Mode) -> bool {
        self.supported_modes().contains(&mode)
    }

    pub fn is_single_chirp(self) -> bool {
        matches!(
            self,
            Scheme::Lora
                | Scheme::IcsLora
                | Scheme::ELora
                | Scheme::PskLora
                | Scheme::SskLora
                | Scheme::DcrkLora
                | Scheme::SskIcsLora
        )
    }

    pub fn is_index_modulation(self) -> bool {
        matches!(self, Scheme::FscssIm | Scheme::IqCim)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Scheme::ALL
            .iter()
            .copied()
            .find(|sc| sc.name() == key)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown scheme `{s}`")))
    }
}

impl From<Scheme> for String {
    fn from(s: Scheme) -> String {
        s.name().to_string()
    }
}

impl TryFrom<String> for Scheme {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Coherent, Mode::NonCoherent, Mode::SemiCoherent];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Coherent => "coherent",
            Mode::NonCoherent => "noncoherent",
            Mode::SemiCoherent => "semicoherent",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "coherent" | "c" => Ok(Mode::Coherent),
            "noncoherent" | "nc" => Ok(Mode::NonCoherent),
            "semicoherent" | "sc" => Ok(Mode::SemiCoherent),
            _ => Err(Error::InvalidConfig(format!("unknown detection mode `{s}`"))),
        }
    }
}

impl From<Mode> for String {
    fn from(m: Mode) -> String {
        m.name().to_string()
    }
}

impl TryFrom<String> for Mode {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// A scheme plus its spreading factor and scheme-specific parameters.
///
/// Parameters that a scheme does not use are carried but ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    /// Spreading factor; the symbol spans `2^lambda` samples.
    pub lambda: u32,
    /// PSK alphabet size for PSK-LoRa.
    pub psk_cardinality: usize,
    /// Number of chirp rates for DCRK-LoRa.
    pub cr_count: usize,
    /// Sub-band count for ePSK-CSS.
    pub subbands: usize,
    /// Phase bits per sub-band for ePSK-CSS.
    pub psk_bits_per_band: u32,
    /// Group count for GCSS.
    pub groups: usize,
    /// Active tones per branch for the index-modulation schemes.
    pub active_count: usize,
    /// Peak ratio threshold of the non-coherent IQ-CSS receiver.
    pub ratio_threshold: f64,
}

pub const MAX_LAMBDA: u32 = 20;

impl SchemeConfig {
    /// Defaults: QPSK for PSK-LoRa, 8 chirp rates, ePSK-CSS(2,4), two GCSS
    /// groups, two active tones and a ratio threshold of 2.4.
    pub fn new(scheme: Scheme, lambda: u32) -> Self {
        SchemeConfig {
            scheme,
            lambda,
            psk_cardinality: 4,
            cr_count: 8,
            subbands: 2,
            psk_bits_per_band: 2,
            groups: 2,
            active_count: 2,
            ratio_threshold: 2.4,
        }
    }

    /// Validated constructor.
    pub fn checked(scheme: Scheme, lambda: u32) -> Result<Self> {
        let c = Self::new(scheme, lambda);
        c.validate()?;
        Ok(c)
    }

    pub fn with_psk_cardinality(mut self, v: usize) -> Self {
        self.psk_cardinality = v;
        self
    }
    pub fn with_cr_count(mut self, v: usize) -> Self {
        self.cr_count = v;
        self
    }
    pub fn with_subbands(mut self, v: usize) -> Self {
        self.subbands = v;
        self
    }
    pub fn with_psk_bits_per_band(mut self, v: u32) -> Self {
        self.psk_bits_per_band = v;
        self
    }
    pub fn with_groups(mut self, v: usize) -> Self {
        self.groups = v;
        self
    }
    pub fn with_active_count(mut self, v: usize) -> Self {
        self.active_count = v;
        self
    }
    pub fn with_ratio_threshold(mut self, v: f64) -> Self {
        self.ratio_threshold = v;
        self
    }

    /// Samples per symbol, `2^lambda`.
    pub fn m(&self) -> usize {
        1usize << self.lambda
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(format!("{}: {msg}", self.scheme)));
        if self.lambda < 2 || self.lambda > MAX_LAMBDA {
            return bad(format!("lambda {} outside [2, {MAX_LAMBDA}]", self.lambda));
        }
        let m = self.m();
        match self.scheme {
            Scheme::PskLora => {
                let q = self.psk_cardinality;
                if q < 2 || !q.is_power_of_two() {
                    return bad(format!("PSK cardinality {q} must be a power of two >= 2"));
                }
            }
            Scheme::DcrkLora => {
                let c = self.cr_count;
                if c < 2 || !c.is_power_of_two() {
                    return bad(format!("chirp-rate count {c} must be a power of two >= 2"));
                }
                // Rates that differ by M alias onto each other, so every rate
                // must stay strictly inside (-M/2, M/2] apart from +M/2.
                if c > m / 2 {
                    return bad(format!("chirp-rate count {c} exceeds M/2 = {}", m / 2));
                }
            }
            Scheme::EpskCss => {
                let nb = self.subbands;
                if nb < 2 || !nb.is_power_of_two() || nb > m || !m.is_multiple_of(nb) {
                    return bad(format!("sub-band count {nb} must be a power of two dividing M"));
                }
                if self.psk_bits_per_band < 1 || self.psk_bits_per_band > 8 {
                    return bad(format!("phase bits per band {} outside [1, 8]", self.psk_bits_per_band));
                }
            }
            Scheme::Gcss => {
                let g = self.groups;
                if g < 2 || !g.is_power_of_two() || !m.is_multiple_of(g) || g >= m {
                    return bad(format!("group count {g} must be a power of two dividing M, below M"));
                }
            }
            Scheme::FscssIm | Scheme::IqCim => {
                let s = self.active_count;
                let cap = if self.scheme == Scheme::IqCim { m / 2 } else { m };
                if s < 1 || s > cap {
                    return bad(format!("active count {s} outside [1, {cap}]"));
                }
                match binomial(m, s) {
                    Some(c) if c >= 2 && c <= u64::MAX as u128 => {}
                    Some(_) => return bad(format!("C({m}, {s}) carries no information or overflows 64 bits")),
                    None => return bad(format!("C({m}, {s}) overflows")),
                }
            }
            Scheme::IqCss if !(self.ratio_threshold.is_finite() && self.ratio_threshold > 1.0) => {
                return bad(format!(
                    "ratio threshold {} must be a finite real > 1",
                    self.ratio_threshold
                ));
            }
            _ => {}
        }
        Ok(())
    }

    /// Index-modulation bits per branch, `floor(log2 C(M, active))`.
    pub fn im_bits(&self) -> usize {
        let c = binomial(self.m(), self.active_count).unwrap_or(0);
        if c == 0 {
            0
        } else {
            (127 - c.leading_zeros()) as usize
        }
    }

    /// Bits carried by one symbol.
    pub fn bits_per_symbol(&self) -> usize {
        let l = self.lambda as usize;
        let log2 = |v: usize| v.trailing_zeros() as usize;
        match self.scheme {
            Scheme::Lora => l,
            Scheme::IcsLora | Scheme::ELora | Scheme::SskLora => l + 1,
            Scheme::PskLora => l + log2(self.psk_cardinality),
            Scheme::DcrkLora => l + log2(self.cr_count),
            Scheme::SskIcsLora => l + 2,
            Scheme::DoCss => 2 * l - 2,
            Scheme::IqCss | Scheme::TdmCss => 2 * l,
            Scheme::EpskCss => log2(self.m() / self.subbands) + self.subbands * self.psk_bits_per_band as usize,
            Scheme::Gcss => self.groups * log2(self.m() / self.groups),
            Scheme::IqTdmCss => 4 * l,
            Scheme::DmCss => 2 * l + 1,
            Scheme::FscssIm => self.im_bits(),
            Scheme::IqCim => 2 * self.im_bits(),
        }
    }

    /// Nominal per-sample symbol energy used to scale the noise. Exact per
    /// frame for every scheme except the two time-multiplexed ones.
    pub fn symbol_energy(&self) -> f64 {
        match self.scheme {
            s if s.is_single_chirp() => 1.0,
            Scheme::DoCss | Scheme::IqCss | Scheme::TdmCss | Scheme::DmCss => 2.0,
            Scheme::EpskCss => self.subbands as f64,
            Scheme::Gcss => self.groups as f64,
            Scheme::IqTdmCss => 4.0,
            Scheme::FscssIm => self.active_count as f64,
            Scheme::IqCim => 2.0 * self.active_count as f64,
            _ => unreachable!(),
        }
    }

    pub fn check_mode(&self, mode: Mode) -> Result<()> {
        if self.scheme.supports(mode) {
            Ok(())
        } else {
            Err(Error::UnsupportedMode {
                scheme: self.scheme,
                mode,
            })
        }
    }
}
