//! Multi-chirp schemes: DO-CSS, IQ-CSS, ePSK-CSS, GCSS, TDM-CSS, IQ-TDM-CSS
//! and DM-CSS.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::single::nearest_phase;
use super::{argmax, check_bits, check_frame, peak};
use crate::bits::{BitReader, BitWriter};
use crate::config::{Mode, Scheme, SchemeConfig};
use crate::dsp::{add_tone, dechirp_spectrum, spread, Frame};
use crate::error::{Error, Result};

/// Decoded fields of one multi-chirp symbol.
///
/// `tones` holds, per scheme: DO/DM `[k_e, k_o]`; IQ `[k_i, k_q]`; ePSK `[k]`;
/// GCSS one shift per group; TDM `[k_up, k_down]`; IQ-TDM
/// `[k_i, k_q, k_i_down, k_q_down]`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct McSymbol {
    pub tones: Vec<usize>,
    /// Per-band PSK indices (ePSK-CSS).
    pub phases: Vec<usize>,
    /// Sign flips of the even and odd tone (DM-CSS); `true` means a phase of pi.
    pub flips: [bool; 2],
    /// Down-chirp spreading (DM-CSS).
    pub down: bool,
}

fn log2(v: usize) -> usize {
    v.trailing_zeros() as usize
}

impl McSymbol {
    pub fn from_bits(config: &SchemeConfig, bits: &[u8]) -> Self {
        let l = config.lambda as usize;
        let m = config.m();
        let mut r = BitReader::new(bits);
        let mut s = McSymbol::default();
        match config.scheme {
            Scheme::DoCss | Scheme::DmCss => {
                let ke = 2 * r.take(l - 1);
                let ko = 2 * r.take(l - 1) + 1;
                s.tones = vec![ke, ko];
                if config.scheme == Scheme::DmCss {
                    s.flips = [r.take(1) == 1, r.take(1) == 1];
                    s.down = r.take(1) == 1;
                }
            }
            Scheme::IqCss | Scheme::TdmCss => s.tones = vec![r.take(l), r.take(l)],
            Scheme::IqTdmCss => s.tones = (0..4).map(|_| r.take(l)).collect(),
            Scheme::EpskCss => {
                s.tones = vec![r.take(log2(m / config.subbands))];
                let w = config.psk_bits_per_band as usize;
                s.phases = (0..config.subbands).map(|_| r.take(w)).collect();
            }
            Scheme::Gcss => {
                let width = m / config.groups;
                s.tones = (0..config.groups).map(|g| g * width + r.take(log2(width))).collect();
            }
            _ => unreachable!("not a multi-chirp scheme"),
        }
        s
    }

    pub fn to_bits(&self, config: &SchemeConfig) -> Vec<u8> {
        let l = config.lambda as usize;
        let m = config.m();
        let mut w = BitWriter::with_capacity(config.bits_per_symbol());
        match config.scheme {
            Scheme::DoCss | Scheme::DmCss => {
                w.put(self.tones[0] / 2, l - 1).put(self.tones[1] / 2, l - 1);
                if config.scheme == Scheme::DmCss {
                    w.put(self.flips[0] as usize, 1)
                        .put(self.flips[1] as usize, 1)
                        .put(self.down as usize, 1);
                }
            }
            Scheme::IqCss | Scheme::TdmCss | Scheme::IqTdmCss => {
                for &k in &self.tones {
                    w.put(k, l);
                }
            }
            Scheme::EpskCss => {
                w.put(self.tones[0], log2(m / config.subbands));
                for &p in &self.phases {
                    w.put(p, config.psk_bits_per_band as usize);
                }
            }
            Scheme::Gcss => {
                let width = m / config.groups;
                for &k in &self.tones {
                    w.put(k % width, log2(width));
                }
            }
            _ => unreachable!("not a multi-chirp scheme"),
        }
        w.finish()
    }
}

/// Bin index and complex amplitude of one active tone.
type Tone = (usize, Complex64);

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn psk(p: usize, q: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * p as f64 / q as f64)
}

/// Transmit frame for decoded fields.
pub fn transmit(config: &SchemeConfig, sym: &McSymbol) -> Frame {
    let m = config.m();
    let zero = || vec![Complex64::new(0.0, 0.0); m];
    let j = Complex64::i();
    let t = &sym.tones;
    match config.scheme {
        Scheme::DoCss | Scheme::Gcss => {
            let mut s = zero();
            for &k in t {
                add_tone(&mut s, k, one());
            }
            spread(&mut s, 1);
            s
        }
        Scheme::IqCss => {
            let mut s = zero();
            add_tone(&mut s, t[0], one());
            add_tone(&mut s, t[1], j);
            spread(&mut s, 1);
            s
        }
        Scheme::EpskCss => {
            let mut s = zero();
            let step = m / config.subbands;
            let q = 1usize << config.psk_bits_per_band;
            for (l, &p) in sym.phases.iter().enumerate() {
                add_tone(&mut s, t[0] + l * step, psk(p, q));
            }
            spread(&mut s, 1);
            s
        }
        Scheme::TdmCss | Scheme::IqTdmCss => {
            let (up_amp, down_amp): (&[Tone], &[Tone]) = if config.scheme == Scheme::TdmCss {
                (&[(t[0], one())], &[(t[1], one())])
            } else {
                (&[(t[0], one()), (t[1], j)], &[(t[2], one()), (t[3], j)])
            };
            let mut up = zero();
            for &(k, a) in up_amp {
                add_tone(&mut up, k, a);
            }
            spread(&mut up, 1);
            let mut down = zero();
            for &(k, a) in down_amp {
                add_tone(&mut down, k, a);
            }
            spread(&mut down, -1);
            up.iter().zip(&down).map(|(a, b)| a + b).collect()
        }
        Scheme::DmCss => {
            let mut s = zero();
            for (i, &k) in t.iter().enumerate() {
                add_tone(&mut s, k, if sym.flips[i] { -one() } else { one() });
            }
            spread(&mut s, if sym.down { -1 } else { 1 });
            s
        }
        _ => unreachable!("not a multi-chirp scheme"),
    }
}

fn ensure_mc(config: &SchemeConfig) -> Result<()> {
    if config.scheme.is_single_chirp() || config.scheme.is_index_modulation() {
        return Err(Error::InvalidConfig(format!(
            "{} is not a multi-chirp scheme",
            config.scheme
        )));
    }
    Ok(())
}

pub fn modulate_mc(config: &SchemeConfig, bits: &[u8]) -> Result<Frame> {
    check_bits(config, bits)?;
    ensure_mc(config)?;
    Ok(transmit(config, &McSymbol::from_bits(config, bits)))
}

pub fn detect_mc(config: &SchemeConfig, frame: &[Complex64], mode: Mode) -> Result<Vec<u8>> {
    check_frame(config, frame, mode)?;
    ensure_mc(config)?;
    Ok(receive(config, frame, mode).to_bits(config))
}

/// The two largest-magnitude bins `(k1, k2)`, `|R(k1)| >= |R(k2)|`, lower index first on ties.
fn two_peaks(r: &[Complex64]) -> (usize, usize) {
    let k1 = peak(r, Mode::NonCoherent, 0..r.len()).0;
    let k2 = peak(r, Mode::NonCoherent, (0..r.len()).filter(|&k| k != k1)).0;
    (k1, k2)
}

/// Non-coherent IQ-CSS decision `(k_i, k_q)` from one spectrum.
pub fn iq_noncoherent(r: &[Complex64], threshold: f64) -> (usize, usize) {
    let (k1, k2) = two_peaks(r);
    let (a1, a2) = (r[k1].norm(), r[k2].norm());
    if a2 == 0.0 || a1 / a2 >= threshold {
        return (k1, k1);
    }
    let theta = (r[k1].conj() * r[k2]).arg();
    if (0.0..PI).contains(&theta) {
        (k1, k2)
    } else {
        (k2, k1)
    }
}

/// Detector core; assumes a validated config, a supported mode and a frame of length `M`.
pub fn receive(config: &SchemeConfig, y: &[Complex64], mode: Mode) -> McSymbol {
    let m = config.m();
    let de = |rate: i64| dechirp_spectrum(y, rate).expect("validated frame");
    let even = (0..m).step_by(2);
    let odd = (1..m).step_by(2);
    let argmax_re = |r: &[Complex64]| argmax(r.iter().enumerate().map(|(k, v)| (k, v.re))).0;
    let argmax_im = |r: &[Complex64]| argmax(r.iter().enumerate().map(|(k, v)| (k, v.im))).0;
    let mut sym = McSymbol::default();
    match config.scheme {
        Scheme::DoCss => {
            let r = de(1);
            sym.tones = vec![peak(&r, mode, even).0, peak(&r, mode, odd).0];
        }
        Scheme::IqCss => {
            let r = de(1);
            let (ki, kq) = match mode {
                Mode::Coherent => (argmax_re(&r), argmax_im(&r)),
                _ => iq_noncoherent(&r, config.ratio_threshold),
            };
            sym.tones = vec![ki, kq];
        }
        Scheme::EpskCss => {
            let r = de(1);
            let nb = config.subbands;
            let step = m / nb;
            let q = 1usize << config.psk_bits_per_band;
            match mode {
                Mode::Coherent => {
                    let (k, phases) = epsk_joint(&r, nb, q);
                    sym.tones = vec![k];
                    sym.phases = phases;
                }
                _ => {
                    // Energy over the harmonic set; phases are unknown at this point.
                    let k = argmax((0..step).map(|k| (k, (0..nb).map(|l| r[k + l * step].norm_sqr()).sum::<f64>()))).0;
                    sym.tones = vec![k];
                    sym.phases = (0..nb).map(|l| nearest_phase(r[k + l * step].arg(), q)).collect();
                }
            }
        }
        Scheme::Gcss => {
            let r = de(1);
            let width = m / config.groups;
            sym.tones = (0..config.groups)
                .map(|g| peak(&r, Mode::NonCoherent, g * width..(g + 1) * width).0)
                .collect();
        }
        Scheme::TdmCss => {
            let (up, down) = (de(1), de(-1));
            sym.tones = vec![peak(&up, mode, 0..m).0, peak(&down, mode, 0..m).0];
        }
        Scheme::IqTdmCss => {
            let (up, down) = (de(1), de(-1));
            sym.tones = vec![argmax_re(&up), argmax_im(&up), argmax_re(&down), argmax_im(&down)];
        }
        Scheme::DmCss => {
            let (up, down) = (de(1), de(-1));
            match mode {
                Mode::Coherent => {
                    // Sign-agnostic peak: a pi-flipped tone must still count.
                    let kap = |r: &[Complex64]| r.iter().map(|v| v.re.abs()).fold(f64::NEG_INFINITY, f64::max);
                    sym.down = kap(&down) > kap(&up);
                    let r = if sym.down { down } else { up };
                    let (ke, fe) = signed_peak(&r, (0..m).step_by(2));
                    let (ko, fo) = signed_peak(&r, (1..m).step_by(2));
                    sym.tones = vec![ke, ko];
                    sym.flips = [fe, fo];
                }
                _ => {
                    let kap = |r: &[Complex64]| super::kappa(r, Mode::NonCoherent);
                    sym.down = kap(&down) > kap(&up);
                    let r = if sym.down { down } else { up };
                    let ke = peak(&r, Mode::NonCoherent, even).0;
                    let ko = peak(&r, Mode::NonCoherent, odd).0;
                    sym.tones = vec![ke, ko];
                    sym.flips = [r[ke].re < 0.0, r[ko].re < 0.0];
                }
            }
        }
        _ => unreachable!("not a multi-chirp scheme"),
    }
    sym
}

/// Joint search over bins and binary phases: maximizes `alpha * Re{R(k)}` with
/// `alpha` in `{+1, -1}`; returns the bin and whether `alpha = -1`.
fn signed_peak<I: Iterator<Item = usize>>(r: &[Complex64], bins: I) -> (usize, bool) {
    let h = argmax(bins.flat_map(|k| [(2 * k, r[k].re), (2 * k + 1, -r[k].re)])).0;
    (h / 2, h % 2 == 1)
}

/// Coherent ePSK-CSS: exhaustive search over the fundamental and every phase
/// tuple, maximizing `sum_l Re{conj(phi_l) R(k + l*M/Nb)}`.
fn epsk_joint(r: &[Complex64], nb: usize, q: usize) -> (usize, Vec<usize>) {
    let step = r.len() / nb;
    let rot: Vec<Complex64> = (0..q).map(|p| psk(p, q).conj()).collect();
    let tuples = q.pow(nb as u32);
    let mut table = vec![0.0; nb * q];
    let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
    for k in 0..step {
        for l in 0..nb {
            for p in 0..q {
                table[l * q + p] = (rot[p] * r[k + l * step]).re;
            }
        }
        for t in 0..tuples {
            let mut rest = t;
            let mut metric = 0.0;
            // p_0 is the most significant digit of t.
            for l in (0..nb).rev() {
                metric += table[l * q + rest % q];
                rest /= q;
            }
            if metric > best.0 {
                best = (metric, k, t);
            }
        }
    }
    let mut phases = vec![0; nb];
    let mut rest = best.2;
    for l in (0..nb).rev() {
        phases[l] = rest % q;
        rest /= q;
    }
    (best.1, phases)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::int_to_bits;
    use crate::dsp::energy;
    use rand::{Rng, SeedableRng};

    const MC: [Scheme; 7] = [
        Scheme::DoCss,
        Scheme::IqCss,
        Scheme::EpskCss,
        Scheme::Gcss,
        Scheme::TdmCss,
        Scheme::IqTdmCss,
        Scheme::DmCss,
    ];

    #[test]
    fn do_css_zero_block() {
        let cfg = SchemeConfig::new(Scheme::DoCss, 3);
        let s = modulate_mc(&cfg, &[0, 0, 0, 0]).unwrap();
        let mut want = crate::dsp::tone(8, 0);
        for (w, t) in want.iter_mut().zip(crate::dsp::tone(8, 1)) {
            *w += t;
        }
        spread(&mut want, 1);
        for (a, b) in s.iter().zip(&want) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!((energy(&s) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dm_css_zero_block() {
        let cfg = SchemeConfig::new(Scheme::DmCss, 4);
        let sym = McSymbol::from_bits(&cfg, &[0; 9]);
        assert_eq!(
            sym,
            McSymbol {
                tones: vec![0, 1],
                phases: vec![],
                flips: [false, false],
                down: false
            }
        );
    }

    #[test]
    fn epsk_harmonics() {
        let cfg = SchemeConfig::new(Scheme::EpskCss, 3).with_psk_bits_per_band(1);
        // k = 1 (2 bits), phases 0 and 0.
        let s = modulate_mc(&cfg, &[0, 1, 0, 0]).unwrap();
        let r = dechirp_spectrum(&s, 1).unwrap();
        let active: Vec<usize> = (0..8).filter(|&k| r[k].norm() > 1e-9).collect();
        assert_eq!(active, vec![1, 5]);
    }

    #[test]
    fn exhaustive_round_trip_m16() {
        for scheme in MC {
            let cfg = SchemeConfig::new(scheme, if scheme == Scheme::IqTdmCss { 6 } else { 4 });
            let b = cfg.bits_per_symbol();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
            let patterns: Vec<u64> = if b <= 12 {
                (0..1u64 << b).collect()
            } else {
                (0..1000).map(|_| rng.gen::<u64>() >> (64 - b)).collect()
            };
            for &mode in scheme.supported_modes() {
                for &v in &patterns {
                    let bits = int_to_bits(v, b).unwrap();
                    let s = modulate_mc(&cfg, &bits).unwrap();
                    assert_eq!(detect_mc(&cfg, &s, mode).unwrap(), bits, "{scheme} {mode} {v}");
                }
            }
        }
    }

    #[test]
    fn parity_of_detected_shifts() {
        let cfg = SchemeConfig::new(Scheme::DoCss, 5);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let y: Vec<Complex64> = (0..32)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            for mode in [Mode::Coherent, Mode::NonCoherent] {
                let sym = receive(&cfg, &y, mode);
                assert_eq!((sym.tones[0] % 2, sym.tones[1] % 2), (0, 1));
            }
        }
    }

    #[test]
    fn iq_noncoherent_examples() {
        let cfg = SchemeConfig::new(Scheme::IqCss, 4);
        let s = transmit(
            &cfg,
            &McSymbol {
                tones: vec![3, 3],
                ..Default::default()
            },
        );
        let r = dechirp_spectrum(&s, 1).unwrap();
        assert!((r[3].norm() - 16.0 * 2f64.sqrt()).abs() < 1e-9);
        assert_eq!(iq_noncoherent(&r, 2.4), (3, 3));
        let s = transmit(
            &cfg,
            &McSymbol {
                tones: vec![1, 2],
                ..Default::default()
            },
        );
        let r = dechirp_spectrum(&s, 1).unwrap();
        assert!((r[1] - Complex64::new(16.0, 0.0)).norm() < 1e-9);
        assert!((r[2] - Complex64::new(0.0, 16.0)).norm() < 1e-9);
        assert_eq!(iq_noncoherent(&r, 2.4), (1, 2));
    }

    #[test]
    fn dm_css_flip_at_half_turn() {
        let cfg = SchemeConfig::new(Scheme::DmCss, 4);
        let sym = McSymbol {
            tones: vec![4, 7],
            flips: [false, true],
            ..Default::default()
        };
        let mut s = transmit(&cfg, &sym);
        crate::channel::impair(&mut s, PI, 0.0);
        let got = receive(&cfg, &s, Mode::NonCoherent);
        assert_eq!(got.tones, vec![4, 7]);
        assert_eq!(got.flips, [true, false]);
    }

    #[test]
    fn gcss_equals_do_css_for_matched_pairs() {
        let m = 16;
        let gc = SchemeConfig::new(Scheme::Gcss, 4);
        let dc = SchemeConfig::new(Scheme::DoCss, 4);
        for a in (0..m / 2).step_by(2) {
            for b in (m / 2 + 1..m).step_by(2) {
                let g = transmit(
                    &gc,
                    &McSymbol {
                        tones: vec![a, b],
                        ..Default::default()
                    },
                );
                let d = transmit(
                    &dc,
                    &McSymbol {
                        tones: vec![a, b],
                        ..Default::default()
                    },
                );
                assert_eq!(g, d);
            }
        }
    }

    #[test]
    fn tdm_wrong_rate_has_no_full_peak_m64() {
        let m = 64;
        for k in 0..m {
            let mut s = crate::dsp::tone(m, k);
            spread(&mut s, 1);
            let r = dechirp_spectrum(&s, -1).unwrap();
            assert!(r.iter().map(|v| v.norm()).fold(0.0, f64::max) < m as f64 - 1e-6);
        }
    }

    /// Up and down chirps overlap in time, so per-frame energy varies around 2.
    /// Both chirps equal 1 at n = 0, which lifts the alphabet average to 2 + 2/M.
    #[test]
    fn tdm_energy_spread_and_average() {
        let cfg = SchemeConfig::new(Scheme::TdmCss, 4);
        let energies: Vec<f64> = (0..256u64)
            .map(|v| energy(&modulate_mc(&cfg, &int_to_bits(v, 8).unwrap()).unwrap()))
            .collect();
        let mean = energies.iter().sum::<f64>() / 256.0;
        assert!((mean - (2.0 + 2.0 / 16.0)).abs() < 1e-12);
        let (lo, hi) = energies
            .iter()
            .fold((f64::MAX, f64::MIN), |(a, b), &e| (a.min(e), b.max(e)));
        assert!(lo < 1.5 && hi > 2.5);
    }

    #[test]
    fn gcss_rejects_coherent() {
        let cfg = SchemeConfig::new(Scheme::Gcss, 4);
        let s = modulate_mc(&cfg, &[0; 6]).unwrap();
        assert!(matches!(
            detect_mc(&cfg, &s, Mode::Coherent),
            Err(Error::UnsupportedMode { .. })
        ));
    }
}
