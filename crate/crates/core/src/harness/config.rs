use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fidelity::StateMode;
use crate::operator::{CoefficientRange, ErrorSpec};
use crate::perm::{self, QubitMask};

/// Which error channel a sweep applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Bit,
    Phase,
    Both,
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bit" => Ok(Channel::Bit),
            "phase" => Ok(Channel::Phase),
            "both" => Ok(Channel::Both),
            other => Err(Error::invalid(format!(
                "unknown channel '{other}' (expected bit|phase|both)"
            ))),
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::Bit => "bit",
            Channel::Phase => "phase",
            Channel::Both => "both",
        })
    }
}

/// What a sweep measures per trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metrics {
    /// Dominant-eigenvalue relative error and eigenvalue NMSE.
    #[default]
    Spectral,
    /// Mean output-state fidelities over random inputs.
    Fidelity,
}

impl FromStr for Metrics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(Metrics::Spectral),
            "fidelity" => Ok(Metrics::Fidelity),
            other => Err(Error::invalid(format!(
                "unknown metrics '{other}' (expected spectral|fidelity)"
            ))),
        }
    }
}

/// Parses `a:b:step` (inclusive range) or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::invalid(format!("cannot parse probability grid '{s}'"));
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step): (f64, f64, f64) = (
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
                step.trim().parse().map_err(|_| bad())?,
            );
            if !(step > 0.0) || b < a {
                return Err(bad());
            }
            let ratio = (b - a) / step;
            let steps = ratio.round();
            if (ratio - steps).abs() < 1e-9 {
                // Dividing the span keeps grid points like 0.15 exact.
                let m = steps as usize;
                (0..=m)
                    .map(|i| if m == 0 { a } else { a + (b - a) * i as f64 / m as f64 })
                    .collect()
            } else {
                (0..=ratio.floor() as usize).map(|i| a + step * i as f64).collect()
            }
        }
        [list] => list
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?,
        _ => return Err(bad()),
    };
    Ok(grid)
}

/// The figure-default grid `0, 0.05, …, 1`.
pub fn default_grid() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

/// Parameters of a Monte-Carlo sweep over maximum error probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Qubit count.
    pub n: u32,
    /// Number of permutation terms `K`.
    pub terms: usize,
    pub alpha: CoefficientRange,
    pub channel: Channel,
    /// Values of `P_max`; per-term probabilities are uniform on `[0, P_max]`.
    pub pmax_grid: Vec<f64>,
    /// Largest number of qubits flipped in one term; defaults to `n`.
    pub gmax: Option<u32>,
    pub trials: usize,
    /// Random input states per trial (fidelity sweeps).
    pub states_per_trial: usize,
    pub state_mode: StateMode,
    pub seed: u64,
    /// Reuse one operator per trial index across the whole grid instead of
    /// drawing a fresh one per grid point.
    pub fixed_matrix: bool,
    pub metrics: Metrics,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n: 8,
            terms: 16,
            alpha: CoefficientRange::Positive,
            channel: Channel::Bit,
            pmax_grid: default_grid(),
            gmax: None,
            trials: 30,
            states_per_trial: 30,
            state_mode: StateMode::Positive,
            seed: 0,
            fixed_matrix: false,
            metrics: Metrics::Spectral,
        }
    }
}

impl SweepConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: SweepConfig = serde_json::from_str(&text)
            .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    pub fn gmax(&self) -> u32 {
        self.gmax.unwrap_or(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        perm::dimension(self.n)?;
        if self.n > 63 {
            return Err(Error::invalid("qubit masks hold at most 63 qubits"));
        }
        if self.terms == 0 {
            return Err(Error::invalid("need at least one term"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("need at least one trial"));
        }
        if self.metrics == Metrics::Fidelity && self.states_per_trial == 0 {
            return Err(Error::invalid("fidelity sweeps need at least one state per trial"));
        }
        let g = self.gmax();
        if g == 0 || g > self.n {
            return Err(Error::invalid(format!(
                "gmax {g} must lie in 1..={}",
                self.n
            )));
        }
        if self.pmax_grid.is_empty() {
            return Err(Error::invalid("empty probability grid"));
        }
        if let Some(p) = self.pmax_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::invalid(format!("grid value {p} outside [0, 1]")));
        }
        if let StateMode::Sparse(s) = self.state_mode {
            let dim = 1usize << self.n;
            if (s * dim as f64).floor() as usize >= dim {
                return Err(Error::invalid(format!("sparsity {s} leaves no support")));
            }
        }
        Ok(())
    }
}

/// Random mask over `n` qubits with a uniformly drawn size in `1..=gmax`
/// and uniformly chosen distinct positions.
pub fn random_mask<R: Rng + ?Sized>(n: u32, gmax: u32, rng: &mut R) -> QubitMask {
    let size = rng.gen_range(1..=gmax) as usize;
    QubitMask::from_qubits(index::sample(rng, n as usize, size).into_iter().map(|q| q as u32))
}

/// Per-term error probabilities uniform on `[0, pmax]` with random masks.
///
/// All four fields are always drawn so the random stream does not depend
/// on the channel; the fields the channel ignores are then cleared.
pub fn draw_error_spec<R: Rng + ?Sized>(cfg: &SweepConfig, pmax: f64, rng: &mut R) -> ErrorSpec {
    let k = cfg.terms;
    let (n, g) = (cfg.n, cfg.gmax());
    let mut e = ErrorSpec::zero(k);
    for i in 0..k {
        e.p[i] = pmax * rng.gen::<f64>();
        e.b[i] = random_mask(n, g, rng);
        e.q[i] = pmax * rng.gen::<f64>();
        e.phi[i] = random_mask(n, g, rng);
    }
    match cfg.channel {
        Channel::Bit => {
            e.q.fill(0.0);
            e.phi.fill(QubitMask::NONE);
        }
        Channel::Phase => {
            e.p.fill(0.0);
            e.b.fill(QubitMask::NONE);
        }
        Channel::Both => {}
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grids() {
        assert_eq!(default_grid().len(), 21);
        assert_eq!(parse_grid("0:1:0.05").unwrap(), default_grid());
        assert_eq!(parse_grid("0:1:0.05").unwrap()[3], 0.15);
        assert_eq!(parse_grid("0, 0.05,0.5").unwrap(), vec![0.0, 0.05, 0.5]);
        assert_eq!(parse_grid("0.2:0.2:0.1").unwrap(), vec![0.2]);
        assert_eq!(parse_grid("0:0.25:0.1").unwrap().len(), 3);
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("a").is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SweepConfig::default().validate().is_ok());
        let bad = [
            SweepConfig { trials: 0, ..Default::default() },
            SweepConfig { gmax: Some(9), ..Default::default() },
            SweepConfig { gmax: Some(0), ..Default::default() },
            SweepConfig { pmax_grid: vec![1.5], ..Default::default() },
            SweepConfig { pmax_grid: vec![], ..Default::default() },
            SweepConfig { n: 0, ..Default::default() },
            SweepConfig { terms: 0, ..Default::default() },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(Error::InvalidArgument(_) | Error::ResourceLimit { .. })), "{cfg:?}");
        }
    }

    #[test]
    fn config_json_defaults_and_unknown_fields() {
        let cfg: SweepConfig = serde_json::from_str(r#"{"n": 4, "channel": "phase", "state_mode": "sparse:0.5"}"#).unwrap();
        assert_eq!(cfg.n, 4);
        assert_eq!(cfg.channel, Channel::Phase);
        assert_eq!(cfg.state_mode, StateMode::Sparse(0.5));
        assert_eq!(cfg.trials, 30);
        assert_eq!(cfg.gmax(), 4);
        assert!(serde_json::from_str::<SweepConfig>(r#"{"qubits": 4}"#).is_err());
    }

    #[test]
    fn zero_pmax_draws_zero_probabilities() {
        let cfg = SweepConfig { channel: Channel::Both, ..Default::default() };
        let e = draw_error_spec(&cfg, 0.0, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(e.p.iter().chain(&e.q).all(|&p| p == 0.0));
    }

    #[test]
    fn channel_clears_unused_fields() {
        let mut cfg = SweepConfig { channel: Channel::Bit, ..Default::default() };
        let e = draw_error_spec(&cfg, 0.5, &mut ChaCha8Rng::seed_from_u64(2));
        assert!(e.q.iter().all(|&q| q == 0.0) && e.phi.iter().all(|m| m.is_empty()));
        assert!(e.b.iter().all(|m| !m.is_empty()));
        cfg.channel = Channel::Phase;
        let e = draw_error_spec(&cfg, 0.5, &mut ChaCha8Rng::seed_from_u64(2));
        assert!(e.p.iter().all(|&p| p == 0.0) && e.b.iter().all(|m| m.is_empty()));
        assert!(e.q.iter().all(|&q| (0.0..=0.5).contains(&q)));
    }

    #[test]
    fn gmax_one_gives_single_qubit_masks() {
        let cfg = SweepConfig { gmax: Some(1), ..Default::default() };
        let e = draw_error_spec(&cfg, 1.0, &mut ChaCha8Rng::seed_from_u64(3));
        assert!(e.b.iter().all(|m| m.count() == 1));
    }

    #[test]
    fn mask_sizes_are_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let draws = 10_000;
        let mut counts = [0usize; 9];
        for _ in 0..draws {
            let m = random_mask(8, 8, &mut rng);
            assert!(m.bits() < 256);
            counts[m.count() as usize] += 1;
        }
        assert_eq!(counts[0], 0);
        for c in &counts[1..] {
            assert!((*c as f64 / draws as f64 - 0.125).abs() < 0.03, "{counts:?}");
        }
    }
}
