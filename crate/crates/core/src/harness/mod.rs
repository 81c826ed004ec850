//! Monte-Carlo BER, required-`Eb/N0` search, spectral efficiency and sweeps.

pub mod ber;
pub mod ee;
pub mod experiment;
pub mod output;
pub mod se;

pub use ber::{ber_adaptive, ber_point, ber_point_with, BerPoint, StopRule, Workers};
pub use ee::{ee_required_ebn0, EeResult, Scan};
pub use experiment::{load_experiment, parse_experiment, parse_range, run_experiment, Experiment, Manifest};
pub use output::{write_ber_csv, write_ee_csv, BER_HEADER, EE_HEADER};
pub use se::{group_of, se_of, se_ratio};
