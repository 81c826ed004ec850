//! Single-chirp schemes: LoRa, ICS-LoRa, E-LoRa, PSK-LoRa, SSK-LoRa,
//! DCRK-LoRa and SSK-ICS-LoRa. All transmit unit-energy frames.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{check_bits, check_frame, kappa, peak};
use crate::bits::{BitReader, BitWriter};
use crate::config::{Mode, Scheme, SchemeConfig};
use crate::dsp::{add_tone, dechirp_spectrum, spread, Frame, Spectrum};
use crate::error::{Error, Result};

/// Decoded fields of one single-chirp symbol. Fields a scheme does not use stay zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScSymbol {
    /// Frequency shift.
    pub k: usize,
    /// PSK index (PSK-LoRa).
    pub phase: usize,
    /// Quadrature flag (E-LoRa).
    pub quadrature: bool,
    /// Down-chirp flag (SSK-LoRa, SSK-ICS-LoRa).
    pub down: bool,
    /// Chirp-rate index (DCRK-LoRa).
    pub rate_index: usize,
    /// Interleaver flag (ICS-LoRa, SSK-ICS-LoRa).
    pub interleaved: bool,
}

fn log2(v: usize) -> usize {
    v.trailing_zeros() as usize
}

impl ScSymbol {
    /// Splits a bit block: frequency shift first, then the scheme's extra field(s).
    pub fn from_bits(config: &SchemeConfig, bits: &[u8]) -> Self {
        let mut r = BitReader::new(bits);
        let mut s = ScSymbol {
            k: r.take(config.lambda as usize),
            ..Default::default()
        };
        match config.scheme {
            Scheme::Lora => {}
            Scheme::IcsLora => s.interleaved = r.take(1) == 1,
            Scheme::ELora => s.quadrature = r.take(1) == 1,
            Scheme::PskLora => s.phase = r.take(log2(config.psk_cardinality)),
            Scheme::SskLora => s.down = r.take(1) == 1,
            Scheme::DcrkLora => s.rate_index = r.take(log2(config.cr_count)),
            Scheme::SskIcsLora => {
                s.down = r.take(1) == 1;
                s.interleaved = r.take(1) == 1;
            }
            _ => unreachable!("not a single-chirp scheme"),
        }
        s
    }

    pub fn to_bits(&self, config: &SchemeConfig) -> Vec<u8> {
        let mut w = BitWriter::with_capacity(config.bits_per_symbol());
        w.put(self.k, config.lambda as usize);
        match config.scheme {
            Scheme::Lora => {}
            Scheme::IcsLora => {
                w.put(self.interleaved as usize, 1);
            }
            Scheme::ELora => {
                w.put(self.quadrature as usize, 1);
            }
            Scheme::PskLora => {
                w.put(self.phase, log2(config.psk_cardinality));
            }
            Scheme::SskLora => {
                w.put(self.down as usize, 1);
            }
            Scheme::DcrkLora => {
                w.put(self.rate_index, log2(config.cr_count));
            }
            Scheme::SskIcsLora => {
                w.put(self.down as usize, 1).put(self.interleaved as usize, 1);
            }
            _ => unreachable!("not a single-chirp scheme"),
        }
        w.finish()
    }
}

/// Chirp rate for DCRK index `beta` out of `count` rates. Negative rates fill
/// the lower half of the indices and zero is skipped, so `0 -> -count/2` and
/// `count-1 -> +count/2`.
pub fn dcrk_rate(beta: usize, count: usize) -> i64 {
    let half = (count / 2) as i64;
    let b = beta as i64;
    if b < half {
        b - half
    } else {
        b - half + 1
    }
}

/// Quarter swap `[Q1, Q2, Q3, Q4] -> [Q1, Q3, Q2, Q4]`. An involution.
pub fn interleave(frame: &[Complex64]) -> Result<Frame> {
    let m = frame.len();
    if m < 4 || !m.is_multiple_of(4) {
        return Err(Error::InvalidConfig(format!(
            "interleaver needs M divisible by 4, got {m}"
        )));
    }
    let q = m / 4;
    let mut out = Vec::with_capacity(m);
    out.extend_from_slice(&frame[..q]);
    out.extend_from_slice(&frame[2 * q..3 * q]);
    out.extend_from_slice(&frame[q..2 * q]);
    out.extend_from_slice(&frame[3 * q..]);
    Ok(out)
}

/// Transmit frame for decoded fields.
pub fn transmit(config: &SchemeConfig, sym: &ScSymbol) -> Frame {
    let m = config.m();
    let amp = match config.scheme {
        Scheme::ELora if sym.quadrature => Complex64::i(),
        Scheme::PskLora => Complex64::from_polar(1.0, 2.0 * PI * sym.phase as f64 / config.psk_cardinality as f64),
        _ => Complex64::new(1.0, 0.0),
    };
    let rate = match config.scheme {
        Scheme::SskLora | Scheme::SskIcsLora if sym.down => -1,
        Scheme::DcrkLora => dcrk_rate(sym.rate_index, config.cr_count),
        _ => 1,
    };
    let mut s = vec![Complex64::new(0.0, 0.0); m];
    add_tone(&mut s, sym.k, amp);
    spread(&mut s, rate);
    if sym.interleaved && matches!(config.scheme, Scheme::IcsLora | Scheme::SskIcsLora) {
        s = interleave(&s).expect("M divisible by 4");
    }
    s
}

pub fn modulate_sc(config: &SchemeConfig, bits: &[u8]) -> Result<Frame> {
    check_bits(config, bits)?;
    if !config.scheme.is_single_chirp() {
        return Err(Error::InvalidConfig(format!(
            "{} is not a single-chirp scheme",
            config.scheme
        )));
    }
    Ok(transmit(config, &ScSymbol::from_bits(config, bits)))
}

pub fn detect_sc(config: &SchemeConfig, frame: &[Complex64], mode: Mode) -> Result<Vec<u8>> {
    check_frame(config, frame, mode)?;
    if !config.scheme.is_single_chirp() {
        return Err(Error::InvalidConfig(format!(
            "{} is not a single-chirp scheme",
            config.scheme
        )));
    }
    Ok(receive(config, frame, mode).to_bits(config))
}

/// Picks the hypothesis whose spectrum has the largest peak metric, first on ties.
fn best_spectrum(spectra: &[Spectrum], mode: Mode) -> usize {
    super::argmax(spectra.iter().enumerate().map(|(i, r)| (i, kappa(r, mode)))).0
}

/// Detector core; assumes a validated config, a supported mode and a frame of length `M`.
pub fn receive(config: &SchemeConfig, y: &[Complex64], mode: Mode) -> ScSymbol {
    let m = config.m();
    let de = |frame: &[Complex64], rate: i64| dechirp_spectrum(frame, rate).expect("validated frame");
    let mut sym = ScSymbol::default();
    match config.scheme {
        Scheme::Lora => {
            sym.k = peak(&de(y, 1), mode, 0..m).0;
        }
        Scheme::IcsLora => {
            let spectra = [de(y, 1), de(&interleave(y).expect("M % 4 == 0"), 1)];
            let h = best_spectrum(&spectra, mode);
            sym.interleaved = h == 1;
            sym.k = peak(&spectra[h], mode, 0..m).0;
        }
        Scheme::ELora => {
            let r = de(y, 1);
            let (ki, kappa_i) = super::argmax(r.iter().enumerate().map(|(k, v)| (k, v.re)));
            let (kq, kappa_q) = super::argmax(r.iter().enumerate().map(|(k, v)| (k, v.im)));
            sym.quadrature = kappa_q > kappa_i;
            sym.k = if sym.quadrature { kq } else { ki };
        }
        Scheme::PskLora => {
            let r = de(y, 1);
            let q = config.psk_cardinality;
            match mode {
                Mode::Coherent => {
                    let phasors: Vec<Complex64> = (0..q)
                        .map(|p| Complex64::from_polar(1.0, -2.0 * PI * p as f64 / q as f64))
                        .collect();
                    let best = super::argmax(
                        (0..m)
                            .flat_map(|k| (0..q).map(move |p| (k, p)))
                            .enumerate()
                            .map(|(h, (k, p))| (h, (phasors[p] * r[k]).re)),
                    )
                    .0;
                    sym.k = best / q;
                    sym.phase = best % q;
                }
                _ => {
                    sym.k = peak(&r, Mode::NonCoherent, 0..m).0;
                    sym.phase = nearest_phase(r[sym.k].arg(), q);
                }
            }
        }
        Scheme::SskLora => {
            let spectra = [de(y, 1), de(y, -1)];
            let h = best_spectrum(&spectra, mode);
            sym.down = h == 1;
            sym.k = peak(&spectra[h], mode, 0..m).0;
        }
        Scheme::DcrkLora => {
            let spectra: Vec<Spectrum> = (0..config.cr_count)
                .map(|b| de(y, dcrk_rate(b, config.cr_count)))
                .collect();
            let h = best_spectrum(&spectra, mode);
            sym.rate_index = h;
            sym.k = peak(&spectra[h], mode, 0..m).0;
        }
        Scheme::SskIcsLora => {
            let yi = interleave(y).expect("M % 4 == 0");
            // R1: plain/up, R2: plain/down, R3: interleaved/up, R4: interleaved/down.
            let spectra = [de(y, 1), de(y, -1), de(&yi, 1), de(&yi, -1)];
            let k: Vec<f64> = spectra.iter().map(|r| kappa(r, mode)).collect();
            sym.down = k[1].max(k[3]) > k[0].max(k[2]);
            sym.interleaved = k[2].max(k[3]) > k[0].max(k[1]);
            let h = 2 * sym.interleaved as usize + sym.down as usize;
            sym.k = peak(&spectra[h], mode, 0..m).0;
        }
        _ => unreachable!("not a single-chirp scheme"),
    }
    sym
}

/// Index of the `q`-PSK point closest to angle `theta`.
pub fn nearest_phase(theta: f64, q: usize) -> usize {
    let step = 2.0 * PI / q as f64;
    let idx = (theta / step).round() as i64;
    idx.rem_euclid(q as i64) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::int_to_bits;
    use crate::dsp::{chirp, energy, tone};

    const SC: [Scheme; 7] = [
        Scheme::Lora,
        Scheme::IcsLora,
        Scheme::ELora,
        Scheme::PskLora,
        Scheme::SskLora,
        Scheme::DcrkLora,
        Scheme::SskIcsLora,
    ];

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn interleave_quarter_swap() {
        let x: Vec<Complex64> = (0..8).map(|i| c(i as f64)).collect();
        let y = interleave(&x).unwrap();
        let want: Vec<Complex64> = [0, 1, 4, 5, 2, 3, 6, 7].iter().map(|&i| c(i as f64)).collect();
        assert_eq!(y, want);
        assert_eq!(interleave(&y).unwrap(), x);
        assert_eq!(interleave(&vec![c(2.0); 16]).unwrap(), vec![c(2.0); 16]);
        assert!(interleave(&x[..6]).is_err());
    }

    #[test]
    fn dcrk_rate_endpoints() {
        let rates: Vec<i64> = (0..8).map(|b| dcrk_rate(b, 8)).collect();
        assert_eq!(rates, vec![-4, -3, -2, -1, 1, 2, 3, 4]);
        assert_eq!((dcrk_rate(0, 2), dcrk_rate(1, 2)), (-1, 1));
    }

    #[test]
    fn lora_zero_is_up_chirp() {
        let cfg = SchemeConfig::new(Scheme::Lora, 3);
        assert_eq!(modulate_sc(&cfg, &[0, 0, 0]).unwrap(), chirp(8, 1).unwrap());
    }

    #[test]
    fn unit_energy_and_magnitude() {
        for scheme in SC {
            let cfg = SchemeConfig::new(scheme, 5);
            let b = cfg.bits_per_symbol();
            for v in (0..1u64 << b).step_by(7) {
                let s = modulate_sc(&cfg, &int_to_bits(v, b).unwrap()).unwrap();
                assert!((energy(&s) - 1.0).abs() < 1e-12);
                assert!(s.iter().all(|x| (x.norm() - 1.0).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn exhaustive_round_trip_m16() {
        for scheme in SC {
            let cfg = SchemeConfig::new(scheme, 4);
            let b = cfg.bits_per_symbol();
            for &mode in scheme.supported_modes() {
                for v in 0..1u64 << b {
                    let bits = int_to_bits(v, b).unwrap();
                    let s = modulate_sc(&cfg, &bits).unwrap();
                    assert_eq!(detect_sc(&cfg, &s, mode).unwrap(), bits, "{scheme} {mode} {v}");
                }
            }
        }
    }

    #[test]
    fn field_split_order() {
        let cfg = SchemeConfig::new(Scheme::SskIcsLora, 4);
        let sym = ScSymbol::from_bits(&cfg, &[1, 0, 1, 1, 0, 1]);
        assert_eq!((sym.k, sym.down, sym.interleaved), (11, false, true));
        let cfg = SchemeConfig::new(Scheme::PskLora, 4);
        let sym = ScSymbol::from_bits(&cfg, &[0, 0, 1, 0, 1, 1]);
        assert_eq!((sym.k, sym.phase), (2, 3));
    }

    #[test]
    fn ics_hypothesis_margin_m16() {
        let cfg = SchemeConfig::new(Scheme::IcsLora, 4);
        for k in 0..16 {
            for inter in [false, true] {
                let s = transmit(
                    &cfg,
                    &ScSymbol {
                        k,
                        interleaved: inter,
                        ..Default::default()
                    },
                );
                let r1 = dechirp_spectrum(&s, 1).unwrap();
                let r2 = dechirp_spectrum(&interleave(&s).unwrap(), 1).unwrap();
                let (own, other) = if inter { (r2, r1) } else { (r1, r2) };
                let k_own = own.iter().map(|v| v.norm()).fold(0.0, f64::max);
                let k_other = other.iter().map(|v| v.norm()).fold(0.0, f64::max);
                assert!((k_own - 16.0).abs() < 1e-9);
                assert!(k_other < 16.0 - 1e-6, "k={k} other={k_other}");
            }
        }
    }

    #[test]
    fn dcrk_no_ghost_peak_m256() {
        let m = 256;
        for b in 0..8 {
            for b2 in (0..8).filter(|&x| x != b) {
                for k in 0..m {
                    let mut s = tone(m, k);
                    spread(&mut s, dcrk_rate(b, 8));
                    let r = dechirp_spectrum(&s, dcrk_rate(b2, 8)).unwrap();
                    let top = r.iter().map(|v| v.norm()).fold(0.0, f64::max);
                    assert!(top < m as f64 - 1e-6);
                }
            }
        }
    }

    #[test]
    fn coherent_lora_under_quarter_turn() {
        let cfg = SchemeConfig::new(Scheme::Lora, 4);
        let mut s = transmit(
            &cfg,
            &ScSymbol {
                k: 5,
                ..Default::default()
            },
        );
        crate::channel::impair(&mut s, PI / 2.0, 0.0);
        let r = dechirp_spectrum(&s, 1).unwrap();
        assert!(r[5].re.abs() < 1e-9);
        assert!((r[5].im - 16.0).abs() < 1e-9);
    }

    #[test]
    fn noncoherent_lora_ignores_phase() {
        let cfg = SchemeConfig::new(Scheme::Lora, 4);
        for k in 0..16 {
            for psi in [0.4, PI / 2.0, PI, -2.0] {
                let mut s = transmit(
                    &cfg,
                    &ScSymbol {
                        k,
                        ..Default::default()
                    },
                );
                crate::channel::impair(&mut s, psi, 0.0);
                assert_eq!(receive(&cfg, &s, Mode::NonCoherent).k, k);
            }
        }
    }

    #[test]
    fn nearest_phase_wraps() {
        assert_eq!(nearest_phase(0.1, 4), 0);
        assert_eq!(nearest_phase(PI, 4), 2);
        assert_eq!(nearest_phase(-PI / 2.0, 4), 3);
        assert_eq!(nearest_phase(-0.2, 4), 0);
    }

    #[test]
    fn unsupported_modes_rejected() {
        let cfg = SchemeConfig::new(Scheme::ELora, 4);
        let s = modulate_sc(&cfg, &[0; 5]).unwrap();
        assert!(matches!(
            detect_sc(&cfg, &s, Mode::NonCoherent),
            Err(Error::UnsupportedMode { .. })
        ));
        let cfg = SchemeConfig::new(Scheme::Lora, 4);
        assert!(matches!(
            modulate_sc(&cfg, &[0; 3]),
            Err(Error::BitLength { expected: 4, got: 3 })
        ));
    }
}
