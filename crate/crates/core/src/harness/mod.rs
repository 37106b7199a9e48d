//! Seeded Monte-Carlo sweeps over the maximum error probability.
//!
//! Every (grid point, trial) pair owns a seed derived from the base seed,
//! so results are identical however the trials are scheduled.

mod config;
mod csv;
mod sweep;

pub use config::{default_grid, draw_error_spec, parse_grid, random_mask, Channel, Metrics, SweepConfig};
pub use csv::{read_csv, write_csv, write_csv_to, CSV_HEADER};
pub use sweep::{
    apply_channel, run_fidelity_sweep, run_spectral_sweep, run_sweep, trial_seed, TrialRecord,
};
