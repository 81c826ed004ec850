//! Spectral efficiency and the six comparison groups.

use crate::config::{Scheme, SchemeConfig};

/// Bits per second per hertz, `bits_per_symbol / M`.
pub fn se_of(config: &SchemeConfig) -> f64 {
    config.bits_per_symbol() as f64 / config.m() as f64
}

/// Spectral efficiency as an exact fraction `(bits, M)`.
pub fn se_ratio(config: &SchemeConfig) -> (usize, usize) {
    (config.bits_per_symbol(), config.m())
}

/// Comparison group, 1 to 6. Schemes in a group share a similar spectral efficiency.
pub fn group_of(scheme: Scheme) -> u8 {
    match scheme {
        Scheme::Lora | Scheme::IcsLora | Scheme::ELora | Scheme::SskLora => 1,
        Scheme::PskLora | Scheme::SskIcsLora => 2,
        Scheme::EpskCss | Scheme::DcrkLora => 3,
        Scheme::DoCss | Scheme::Gcss => 4,
        Scheme::IqCss | Scheme::TdmCss | Scheme::IqTdmCss | Scheme::DmCss => 5,
        Scheme::FscssIm | Scheme::IqCim => 6,
    }
}
