use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dense::norm2;
use crate::dense::LinearOperator;
use crate::error::Result;
use crate::exec::{map_ordered, Parallelism};
use crate::fidelity::{f_overlap, f_re, StateVector};
use crate::operator::{ErrorSpec, PermSum};
use crate::spectral::{self, nmse, relative_error};

use super::config::{draw_error_spec, Channel, Metrics, SweepConfig};

/// Attempts at drawing an input state that `A` does not annihilate.
const STATE_RETRIES: usize = 16;

/// One trial at one grid point. Missing metrics mark a flagged trial
/// (solver failure or degenerate state) or a metric the sweep did not
/// measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub pmax: f64,
    pub trial: usize,
    pub re: Option<f64>,
    pub nmse: Option<f64>,
    pub f_overlap_mean: Option<f64>,
    pub f_re_mean: Option<f64>,
    pub seed_used: u64,
}

impl TrialRecord {
    fn empty(pmax: f64, trial: usize, seed_used: u64) -> Self {
        TrialRecord {
            pmax,
            trial,
            re: None,
            nmse: None,
            f_overlap_mean: None,
            f_re_mean: None,
            seed_used,
        }
    }

    pub fn is_flagged(&self, metrics: Metrics) -> bool {
        match metrics {
            Metrics::Spectral => self.re.is_none() || self.nmse.is_none(),
            Metrics::Fidelity => self.f_overlap_mean.is_none() || self.f_re_mean.is_none(),
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// `seed XOR hash(grid index, trial index)`.
pub fn trial_seed(seed: u64, grid_index: usize, trial: usize) -> u64 {
    seed ^ splitmix64(((grid_index as u64) << 32) | trial as u64)
}

/// Seed of the shared operator for `trial` under `fixed_matrix`.
fn fixed_matrix_seed(seed: u64, trial: usize) -> u64 {
    seed ^ splitmix64(0xa5a5_0000_0000_0000 ^ trial as u64)
}

pub fn apply_channel(a: &PermSum, channel: Channel, e: &ErrorSpec) -> Result<PermSum> {
    match channel {
        Channel::Bit => a.perturb_bitflip(e),
        Channel::Phase => a.perturb_phaseflip(e),
        Channel::Both => a.perturb_combined(e),
    }
}

/// Draws the operator and its perturbed version for one trial.
fn trial_operators(cfg: &SweepConfig, pmax: f64, trial: usize, rng: &mut ChaCha8Rng) -> Result<(PermSum, PermSum)> {
    let a = if cfg.fixed_matrix {
        let mut mrng = ChaCha8Rng::seed_from_u64(fixed_matrix_seed(cfg.seed, trial));
        PermSum::random(cfg.n, cfg.terms, cfg.alpha, &mut mrng)?
    } else {
        PermSum::random(cfg.n, cfg.terms, cfg.alpha, rng)?
    };
    let e = draw_error_spec(cfg, pmax, rng);
    let b = apply_channel(&a, cfg.channel, &e)?;
    Ok((a, b))
}

fn jobs(cfg: &SweepConfig) -> Vec<(usize, f64, usize)> {
    cfg.pmax_grid
        .iter()
        .enumerate()
        .flat_map(|(g, &p)| (0..cfg.trials).map(move |t| (g, p, t)))
        .collect()
}

/// Runs whichever sweep `cfg.metrics` selects.
pub fn run_sweep(cfg: &SweepConfig, par: Parallelism) -> Result<Vec<TrialRecord>> {
    match cfg.metrics {
        Metrics::Spectral => run_spectral_sweep(cfg, par),
        Metrics::Fidelity => run_fidelity_sweep(cfg, par),
    }
}

/// Dominant-eigenvalue relative error and eigenvalue NMSE per trial.
pub fn run_spectral_sweep(cfg: &SweepConfig, par: Parallelism) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    Ok(map_ordered(jobs(cfg), par, |(g, pmax, trial)| {
        let seed = trial_seed(cfg.seed, g, trial);
        let mut rec = TrialRecord::empty(pmax, trial, seed);
        if let Ok((re, nm)) = spectral_trial(cfg, pmax, trial, seed) {
            rec.re = Some(re);
            rec.nmse = Some(nm);
        }
        rec
    }))
}

fn spectral_trial(cfg: &SweepConfig, pmax: f64, trial: usize, seed: u64) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = trial_operators(cfg, pmax, trial, &mut rng)?;
    let da = a.materialize()?;
    let db = b.materialize()?;
    let sa = spectral::eigenvalues(&da)?;
    let sb = if db.bit_equal(&da) {
        sa.clone()
    } else {
        spectral::eigenvalues(&db)?
    };
    let lam_a = sa.dominant().unwrap_or_default();
    let lam_b = sb.dominant().unwrap_or_default();
    Ok((relative_error(lam_a, lam_b)?, nmse(&sa, &sb)?))
}

/// Mean `f_overlap` and `f_re` over fresh random input states per trial.
pub fn run_fidelity_sweep(cfg: &SweepConfig, par: Parallelism) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    Ok(map_ordered(jobs(cfg), par, |(g, pmax, trial)| {
        let seed = trial_seed(cfg.seed, g, trial);
        let mut rec = TrialRecord::empty(pmax, trial, seed);
        if let Ok((fo, fr)) = fidelity_trial(cfg, pmax, trial, seed) {
            rec.f_overlap_mean = Some(fo);
            rec.f_re_mean = Some(fr);
        }
        rec
    }))
}

fn fidelity_trial(cfg: &SweepConfig, pmax: f64, trial: usize, seed: u64) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = trial_operators(cfg, pmax, trial, &mut rng)?;
    let (mut so, mut sr) = (0.0, 0.0);
    for _ in 0..cfg.states_per_trial {
        let psi = draw_live_state(cfg, &a, &mut rng)?;
        so += f_overlap(&a, &b, &psi)?;
        sr += f_re(&a, &b, &psi)?;
    }
    let k = cfg.states_per_trial as f64;
    Ok((so / k, sr / k))
}

fn draw_live_state(cfg: &SweepConfig, a: &PermSum, rng: &mut ChaCha8Rng) -> Result<StateVector> {
    let mut last = None;
    for _ in 0..STATE_RETRIES {
        let psi = StateVector::random(cfg.n, cfg.state_mode, rng)?;
        let out = a.apply(psi.amplitudes())?;
        if norm2(&out) > 1e-12 {
            return Ok(psi);
        }
        last = Some(psi);
    }
    // Let the fidelity call report the degenerate state.
    last.ok_or_else(|| crate::Error::invalid("no states drawn"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fidelity::StateMode;
    use crate::operator::CoefficientRange;

    fn small(metrics: Metrics) -> SweepConfig {
        SweepConfig {
            n: 4,
            terms: 6,
            pmax_grid: vec![0.0, 0.3],
            trials: 3,
            states_per_trial: 4,
            seed: 17,
            metrics,
            ..Default::default()
        }
    }

    #[test]
    fn zero_pmax_rows_are_exact() {
        for channel in [Channel::Bit, Channel::Phase, Channel::Both] {
            let cfg = SweepConfig { channel, alpha: CoefficientRange::Mixed, ..small(Metrics::Spectral) };
            for r in run_spectral_sweep(&cfg, Parallelism::Sequential).unwrap() {
                if r.pmax == 0.0 {
                    assert_eq!((r.re, r.nmse), (Some(0.0), Some(0.0)));
                }
            }
            let cfg = SweepConfig { channel, state_mode: StateMode::Mixed, ..small(Metrics::Fidelity) };
            for r in run_fidelity_sweep(&cfg, Parallelism::Sequential).unwrap() {
                if r.pmax == 0.0 {
                    assert_eq!((r.f_overlap_mean, r.f_re_mean), (Some(1.0), Some(1.0)));
                }
            }
        }
    }

    #[test]
    fn records_come_in_grid_then_trial_order() {
        let recs = run_spectral_sweep(&small(Metrics::Spectral), Parallelism::Auto).unwrap();
        let keys: Vec<(f64, usize)> = recs.iter().map(|r| (r.pmax, r.trial)).collect();
        assert_eq!(keys, vec![(0.0, 0), (0.0, 1), (0.0, 2), (0.3, 0), (0.3, 1), (0.3, 2)]);
        assert_eq!(recs[4].seed_used, trial_seed(17, 1, 1));
        assert!(recs.iter().all(|r| r.f_overlap_mean.is_none()));
    }

    #[test]
    fn fixed_matrix_shares_operator_across_grid() {
        let cfg = SweepConfig { fixed_matrix: true, pmax_grid: vec![0.1, 0.2], ..small(Metrics::Spectral) };
        let mut r1 = ChaCha8Rng::seed_from_u64(1);
        let mut r2 = ChaCha8Rng::seed_from_u64(2);
        let (a1, _) = trial_operators(&cfg, 0.1, 2, &mut r1).unwrap();
        let (a2, _) = trial_operators(&cfg, 0.2, 2, &mut r2).unwrap();
        assert_eq!(a1, a2);
        let (a3, _) = trial_operators(&cfg, 0.1, 1, &mut r1).unwrap();
        assert_ne!(a1, a3);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = SweepConfig { trials: 0, ..small(Metrics::Spectral) };
        assert!(run_spectral_sweep(&cfg, Parallelism::Sequential).is_err());
    }
}
