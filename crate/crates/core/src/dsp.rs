//! Chirps, tones and the de-chirp spectrum.
//!
//! Time is normalized: one sample per chip, `M = 2^lambda` samples per symbol.
//! Phases are reduced modulo `2M` in integer arithmetic before lookup, so the
//! generated samples carry no accumulated rounding.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::rc::Rc;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub type Frame = Vec<Complex64>;
pub type Spectrum = Vec<Complex64>;

type Table = Rc<Vec<Complex64>>;

thread_local! {
    static UNIT: RefCell<HashMap<usize, Table>> = RefCell::new(HashMap::new());
    static CHIRPS: RefCell<HashMap<(usize, i64), Table>> = RefCell::new(HashMap::new());
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// `exp(j*pi*r/M)` for `r` in `[0, 2M)`.
fn unit_table(m: usize) -> Rc<Vec<Complex64>> {
    UNIT.with(|u| {
        u.borrow_mut()
            .entry(m)
            .or_insert_with(|| {
                Rc::new(
                    (0..2 * m)
                        .map(|r| Complex64::from_polar(1.0, PI * r as f64 / m as f64))
                        .collect(),
                )
            })
            .clone()
    })
}

fn check_len(m: usize) -> Result<()> {
    if m == 0 || !m.is_power_of_two() {
        Err(Error::NotPowerOfTwo(m))
    } else {
        Ok(())
    }
}

fn cached_chirp(m: usize, rate: i64) -> Rc<Vec<Complex64>> {
    CHIRPS.with(|c| {
        c.borrow_mut()
            .entry((m, rate))
            .or_insert_with(|| {
                let unit = unit_table(m);
                let two_m = 2 * m as i128;
                Rc::new(
                    (0..m)
                        .map(|n| {
                            let n = n as i128;
                            unit[(rate as i128 * n * n).rem_euclid(two_m) as usize]
                        })
                        .collect(),
                )
            })
            .clone()
    })
}

/// `c(n) = exp(j*pi*rate*n^2/M)` for `n = 0..M`.
pub fn chirp(m: usize, rate: i64) -> Result<Frame> {
    check_len(m)?;
    if rate == 0 {
        return Err(Error::ZeroRate);
    }
    Ok(cached_chirp(m, rate).to_vec())
}

/// Un-chirped single frequency shift `f_k(n) = exp(j*2*pi*k*n/M)`.
pub fn tone(m: usize, k: usize) -> Frame {
    let unit = unit_table(m);
    (0..m).map(|n| unit[2 * ((k * n) % m)]).collect()
}

/// Adds `amp * f_k` into `acc`.
pub(crate) fn add_tone(acc: &mut [Complex64], k: usize, amp: Complex64) {
    let m = acc.len();
    let unit = unit_table(m);
    let mask = m - 1;
    let step = k & mask;
    let mut idx = 0usize;
    for a in acc.iter_mut() {
        *a += amp * unit[2 * idx];
        idx = (idx + step) & mask;
    }
}

/// Multiplies `frame` in place by `chirp(M, rate)`.
pub(crate) fn spread(frame: &mut [Complex64], rate: i64) {
    let c = cached_chirp(frame.len(), rate);
    for (s, c) in frame.iter_mut().zip(c.iter()) {
        *s *= c;
    }
}

fn fft_plan(m: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(m))
}

/// Unnormalized forward DFT, `R(k) = sum_n x(n) exp(-j*2*pi*k*n/M)`.
pub fn dft(x: &[Complex64]) -> Spectrum {
    let mut buf = x.to_vec();
    fft_plan(buf.len()).process(&mut buf);
    buf
}

/// DFT of `frame(n) * conj(chirp(M, rate))(n)`.
pub fn dechirp_spectrum(frame: &[Complex64], rate: i64) -> Result<Spectrum> {
    let m = frame.len();
    check_len(m)?;
    if rate == 0 {
        return Err(Error::ZeroRate);
    }
    let c = cached_chirp(m, rate);
    let mut buf: Vec<Complex64> = frame.iter().zip(c.iter()).map(|(y, c)| y * c.conj()).collect();
    fft_plan(m).process(&mut buf);
    Ok(buf)
}

/// Same as [`dechirp_spectrum`] but checks the frame against an expected length.
pub fn dechirp_checked(frame: &[Complex64], m: usize, rate: i64) -> Result<Spectrum> {
    if frame.len() != m {
        return Err(Error::FrameLength {
            expected: m,
            got: frame.len(),
        });
    }
    dechirp_spectrum(frame, rate)
}

/// Average per-sample energy `(1/M) * sum |s(n)|^2`.
pub fn energy(frame: &[Complex64]) -> f64 {
    frame.iter().map(|s| s.norm_sqr()).sum::<f64>() / frame.len() as f64
}
