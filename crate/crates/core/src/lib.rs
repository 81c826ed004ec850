//! Chirp spread spectrum waveform laboratory.
//!
//! Sixteen CSS modulation schemes with their coherent, non-coherent and
//! semi-coherent receivers, an AWGN channel with phase and frequency offset,
//! and a Monte-Carlo harness for BER curves, required-`Eb/N0` searches and
//! spectral-efficiency tables.
//!
//! ```
//! use csslab::{schemes, Mode, Scheme, SchemeConfig};
//!
//! let cfg = SchemeConfig::checked(Scheme::SskLora, 7).unwrap();
//! let bits = vec![1, 0, 1, 1, 0, 0, 1, 1];
//! let frame = schemes::modulate(&cfg, &bits).unwrap();
//! assert_eq!(schemes::detect(&cfg, &frame, Mode::NonCoherent).unwrap(), bits);
//! ```

pub mod bits;
pub mod channel;
pub mod combinadic;
pub mod config;
pub mod dsp;
pub mod error;
pub mod harness;
pub mod schemes;

pub use channel::ChannelSpec;
pub use config::{Mode, Scheme, SchemeConfig};
pub use error::{Error, Result};
