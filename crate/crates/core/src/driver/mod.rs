//! Dynamic-depth QAOA and the fixed-depth baseline.
//!
//! Both runners share one loop: an Adam step on the live angles, then one
//! energy evaluation at the updated angles. The reverse-sweep gradient at the
//! same point comes out of that evaluation, so each step costs one sweep.

pub mod interp;

pub use interp::{grow_schedule, interpolate, transfer_parameters, InterpKind};

use rand::{RngExt, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::adam::{AdamHyper, AdamState};
use crate::error::{Error, Result};
use crate::qubo::DiagonalSpectrum;
use crate::statevector::{self, Evaluation, ParameterSchedule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DdqaoaConfig {
    /// Starting depth.
    pub p0: usize,
    pub p_max: usize,
    /// Minimum energy drop that counts as an improvement.
    pub epsilon: f64,
    /// Energy-variance threshold of the plateau test.
    pub sigma: f64,
    /// Consecutive non-improving steps tolerated before growing.
    pub patience_k: usize,
    /// Total optimizer steps across all depths.
    pub n_opt_max: usize,
    pub init_gamma: f64,
    pub init_beta: f64,
    /// Half-width of a seeded uniform perturbation added to the initial
    /// angles. Zero disables it.
    #[serde(default)]
    pub init_jitter: f64,
    #[serde(default)]
    pub adam: AdamHyper,
}

impl Default for DdqaoaConfig {
    fn default() -> Self {
        DdqaoaConfig {
            p0: 1,
            p_max: 10,
            epsilon: 1e-4,
            sigma: 1e-6,
            patience_k: 20,
            n_opt_max: 1200,
            init_gamma: 0.1,
            init_beta: 0.1,
            init_jitter: 0.0,
            adam: AdamHyper::default(),
        }
    }
}

impl DdqaoaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.p0 < 1 || self.p0 > self.p_max {
            return bad(format!("need 1 <= p0 ({}) <= p_max ({})", self.p0, self.p_max));
        }
        if !(self.epsilon > 0.0 && self.sigma > 0.0) {
            return bad(format!(
                "epsilon ({}) and sigma ({}) must be positive",
                self.epsilon, self.sigma
            ));
        }
        if self.patience_k < 2 {
            return bad(format!("patience {} must be at least 2", self.patience_k));
        }
        if self.n_opt_max < 1 {
            return bad("step budget must be at least 1".into());
        }
        if !(self.init_jitter >= 0.0 && self.init_jitter.is_finite()) {
            return bad(format!("init_jitter {} must be non-negative", self.init_jitter));
        }
        Ok(())
    }

    /// Entries considered by the variance test.
    pub fn variance_window(&self) -> usize {
        (self.patience_k / 2).max(2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based optimizer step.
    pub step: usize,
    /// Depth the step was taken at.
    pub depth: usize,
    pub energy: f64,
    /// Ground-state probability of the post-update state.
    pub success_prob: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    BudgetExhausted,
    PmaxPlateau,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub trace: Vec<StepRecord>,
    pub best_energy: f64,
    pub best_params: ParameterSchedule,
    /// Live angles when the loop ended.
    pub final_params: ParameterSchedule,
    pub final_depth: usize,
    /// Steps after which the depth grew.
    pub depth_change_steps: Vec<usize>,
    pub converged_reason: StopReason,
}

/// Plateau test: patience exhausted, or the recent energies have population
/// variance below `sigma`.
pub fn check_convergence(history: &[f64], c: usize, config: &DdqaoaConfig) -> bool {
    if c >= config.patience_k {
        return true;
    }
    if history.len() < 2 {
        return false;
    }
    let window = &history[history.len().saturating_sub(config.variance_window())..];
    population_variance(window) < config.sigma
}

pub(crate) fn population_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
}

/// Depth-`p` linear ramp: `gamma_l = g * l / p`, `beta_l = b * (1 - l / p)`.
pub fn ramp_schedule(p: usize, init_gamma: f64, init_beta: f64) -> ParameterSchedule {
    let pf = p as f64;
    let gammas = (1..=p).map(|l| init_gamma * l as f64 / pf).collect();
    let betas = (1..=p).map(|l| init_beta * (1.0 - l as f64 / pf)).collect();
    ParameterSchedule::new(gammas, betas).expect("p >= 1")
}

fn jitter(params: ParameterSchedule, width: f64, seed: u64) -> ParameterSchedule {
    if width == 0.0 {
        return params;
    }
    let mut rng = SplitMix64::seed_from_u64(seed);
    let flat: Vec<f64> = params
        .to_flat()
        .into_iter()
        .map(|x| x + rng.random_range(-width..=width))
        .collect();
    ParameterSchedule::from_flat(&flat).expect("length unchanged")
}

/// Best-energy bookkeeping with the epsilon-improvement filter.
struct Tracker {
    best_energy: f64,
    best_params: ParameterSchedule,
    stale: usize,
}

impl Tracker {
    fn observe(&mut self, energy: f64, params: &[f64], epsilon: f64) {
        if energy < self.best_energy - epsilon {
            self.best_energy = energy;
            self.best_params = ParameterSchedule::from_flat(params).expect("even length");
            self.stale = 0;
        } else {
            self.stale += 1;
        }
    }
}

fn step_record(step: usize, depth: usize, eval: &Evaluation, diag: &DiagonalSpectrum) -> StepRecord {
    StepRecord {
        step,
        depth,
        energy: eval.energy,
        success_prob: statevector::ground_state_probability(&eval.state, diag.ground_set()),
    }
}

/// Dynamic-depth QAOA: optimize at depth `p`, and when the energy plateaus
/// grow to `p + 1` from the best angles found so far, until the budget runs
/// out or a plateau is reached at `p_max`.
///
/// Returns the tracked best angles, not the final iterate.
pub fn run_ddqaoa(diag: &DiagonalSpectrum, config: &DdqaoaConfig, seed: u64) -> Result<RunRecord> {
    config.validate()?;
    let mut depth = config.p0;
    let initial = if depth == 1 {
        ParameterSchedule::new(vec![config.init_gamma], vec![config.init_beta])?
    } else {
        ramp_schedule(depth, config.init_gamma, config.init_beta)
    };
    let mut params = jitter(initial, config.init_jitter, seed).to_flat();
    let mut adam = AdamState::new(params.len(), config.adam)?;
    let mut eval = statevector::evaluate_with_gradient(diag, &ParameterSchedule::from_flat(&params)?)?;

    let mut tracker = Tracker {
        best_energy: f64::INFINITY,
        best_params: ParameterSchedule::from_flat(&params)?,
        stale: 0,
    };
    let mut history = Vec::with_capacity(config.n_opt_max);
    let mut trace = Vec::with_capacity(config.n_opt_max);
    let mut depth_change_steps = Vec::new();
    let mut reason = StopReason::BudgetExhausted;

    for t in 1..=config.n_opt_max {
        adam.step(&mut params, &eval.gradient)?;
        eval = statevector::evaluate_with_gradient(diag, &ParameterSchedule::from_flat(&params)?)?;
        history.push(eval.energy);
        trace.push(step_record(t, depth, &eval, diag));
        tracker.observe(eval.energy, &params, config.epsilon);

        if check_convergence(&history, tracker.stale, config) {
            if depth == config.p_max {
                reason = StopReason::PmaxPlateau;
                break;
            }
            let grown = grow_schedule(&tracker.best_params, depth);
            depth += 1;
            params = grown.to_flat();
            adam.reset(params.len())?;
            tracker.stale = 0;
            depth_change_steps.push(t);
            eval = statevector::evaluate_with_gradient(diag, &grown)?;
        }
    }

    Ok(RunRecord {
        trace,
        best_energy: tracker.best_energy,
        best_params: tracker.best_params,
        final_params: ParameterSchedule::from_flat(&params)?,
        final_depth: depth,
        depth_change_steps,
        converged_reason: reason,
    })
}

/// Standard QAOA at a fixed depth for the full step budget, starting from a
/// linear ramp.
pub fn run_fixed_depth(diag: &DiagonalSpectrum, p: usize, config: &DdqaoaConfig, seed: u64) -> Result<RunRecord> {
    if p == 0 {
        return Err(Error::InvalidArgument("fixed depth must be at least 1".into()));
    }
    if config.n_opt_max < 1 {
        return Err(Error::InvalidArgument("step budget must be at least 1".into()));
    }
    let initial = ramp_schedule(p, config.init_gamma, config.init_beta);
    let mut params = jitter(initial, config.init_jitter, seed).to_flat();
    let mut adam = AdamState::new(params.len(), config.adam)?;
    let mut eval = statevector::evaluate_with_gradient(diag, &ParameterSchedule::from_flat(&params)?)?;

    let mut tracker = Tracker {
        best_energy: f64::INFINITY,
        best_params: ParameterSchedule::from_flat(&params)?,
        stale: 0,
    };
    let mut trace = Vec::with_capacity(config.n_opt_max);
    for t in 1..=config.n_opt_max {
        adam.step(&mut params, &eval.gradient)?;
        eval = statevector::evaluate_with_gradient(diag, &ParameterSchedule::from_flat(&params)?)?;
        trace.push(step_record(t, p, &eval, diag));
        tracker.observe(eval.energy, &params, config.epsilon);
    }

    Ok(RunRecord {
        trace,
        best_energy: tracker.best_energy,
        best_params: tracker.best_params,
        final_params: ParameterSchedule::from_flat(&params)?,
        final_depth: p,
        depth_change_steps: Vec::new(),
        converged_reason: StopReason::BudgetExhausted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::{diagonal_spectrum, IsingHamiltonian};

    fn afm_pair() -> DiagonalSpectrum {
        diagonal_spectrum(&IsingHamiltonian::new(vec![0.0, 0.0], [((0, 1), 1.0)], 0.0).unwrap()).unwrap()
    }

    /// Minimum p = 1 energy over a (gamma, beta) grid of spacing 0.01.
    fn grid_minimum(diag: &DiagonalSpectrum) -> f64 {
        let mut best = f64::INFINITY;
        for gi in 0..=314 {
            for bi in 0..=314 {
                let p = ParameterSchedule::new(vec![gi as f64 * 0.01], vec![bi as f64 * 0.01]).unwrap();
                let s = statevector::prepare_qaoa_state(diag, &p).unwrap();
                best = best.min(statevector::expectation(&s, diag).unwrap());
            }
        }
        best
    }

    #[test]
    fn convergence_check_cases() {
        let cfg = DdqaoaConfig::default();
        assert!(check_convergence(&[1.0, 1.0], 0, &cfg));
        assert!(!check_convergence(&[1.0], 0, &cfg));
        assert!(!check_convergence(&[10.0, 8.0, 6.0, 4.0, 2.0], 0, &cfg));
        assert!(check_convergence(&[10.0, 8.0, 6.0], 20, &cfg));
        assert!(!check_convergence(&[10.0, 8.0, 6.0], 19, &cfg));
    }

    #[test]
    fn variance_window_uses_recent_entries() {
        let cfg = DdqaoaConfig::default();
        assert_eq!(cfg.variance_window(), 10);
        let mut hist = vec![100.0, -100.0];
        hist.extend([3.0; 10]);
        assert!(check_convergence(&hist, 0, &cfg));
        let small = DdqaoaConfig {
            patience_k: 3,
            ..DdqaoaConfig::default()
        };
        assert_eq!(small.variance_window(), 2);
    }

    #[test]
    fn config_validation() {
        let ok = DdqaoaConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            DdqaoaConfig { p0: 0, ..ok.clone() },
            DdqaoaConfig { p0: 11, ..ok.clone() },
            DdqaoaConfig {
                epsilon: 0.0,
                ..ok.clone()
            },
            DdqaoaConfig {
                sigma: -1.0,
                ..ok.clone()
            },
            DdqaoaConfig {
                patience_k: 1,
                ..ok.clone()
            },
            DdqaoaConfig {
                n_opt_max: 0,
                ..ok.clone()
            },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn ramp() {
        let r = ramp_schedule(4, 0.1, 0.2);
        for (g, e) in r.gammas().iter().zip([0.025, 0.05, 0.075, 0.1]) {
            assert!((g - e).abs() < 1e-15);
        }
        assert_eq!(r.betas()[3], 0.0);
        assert!((r.betas()[0] - 0.15).abs() < 1e-15);
    }

    #[test]
    fn zero_hamiltonian_grows_every_plateau() {
        let diag = diagonal_spectrum(&IsingHamiltonian::zero(3)).unwrap();
        let rec = run_ddqaoa(&diag, &DdqaoaConfig::default(), 0).unwrap();
        assert!(rec.trace.iter().all(|s| s.energy.abs() < 1e-12));
        assert_eq!(rec.converged_reason, StopReason::PmaxPlateau);
        assert_eq!(rec.final_depth, 10);
        // Step 1 has a single history entry; every later step hits zero
        // variance, and the step that fires at p_max ends the run.
        assert_eq!(rec.depth_change_steps, (2..=10).collect::<Vec<_>>());
        assert_eq!(rec.trace.len(), 11);
        assert_eq!(rec.trace.last().unwrap().depth, 10);
    }

    #[test]
    fn afm_pair_reaches_ground_region() {
        let rec = run_ddqaoa(&afm_pair(), &DdqaoaConfig::default(), 0).unwrap();
        assert!(rec.best_energy <= -0.9, "best {}", rec.best_energy);
    }

    #[test]
    fn fixed_depth_one_matches_grid_optimum() {
        let diag = afm_pair();
        let grid = grid_minimum(&diag);
        let rec = run_fixed_depth(&diag, 1, &DdqaoaConfig::default(), 0).unwrap();
        assert!((rec.best_energy - grid).abs() < 1e-3, "{} vs {grid}", rec.best_energy);
        assert!(rec.trace.iter().all(|s| s.depth == 1));
        assert_eq!(rec.trace.len(), 1200);
    }

    #[test]
    fn fixed_depth_on_zero_hamiltonian_is_flat() {
        let diag = diagonal_spectrum(&IsingHamiltonian::zero(2)).unwrap();
        let cfg = DdqaoaConfig {
            n_opt_max: 50,
            ..DdqaoaConfig::default()
        };
        let rec = run_fixed_depth(&diag, 3, &cfg, 0).unwrap();
        assert!(rec.trace.iter().all(|s| s.energy.abs() < 1e-12 && s.depth == 3));
        assert_eq!(rec.final_depth, 3);
        assert!(run_fixed_depth(&diag, 0, &cfg, 0).is_err());
    }

    #[test]
    fn jitter_is_seeded() {
        let cfg = DdqaoaConfig {
            init_jitter: 0.05,
            n_opt_max: 30,
            ..DdqaoaConfig::default()
        };
        let a = run_ddqaoa(&afm_pair(), &cfg, 1).unwrap();
        assert_eq!(a, run_ddqaoa(&afm_pair(), &cfg, 1).unwrap());
        assert_ne!(a, run_ddqaoa(&afm_pair(), &cfg, 2).unwrap());
    }
}
