use proptest::prelude::*;

use ddqaoa::cspp::GenConfig;
use ddqaoa::driver::{self, DdqaoaConfig, RunRecord, StopReason};
use ddqaoa::qubo::{self, DiagonalSpectrum, IsingHamiltonian};
use ddqaoa::statevector as sv;

fn compiled_diag(seed: u64, edges: usize) -> DiagonalSpectrum {
    let inst = qubo::generate_sound_instance(seed, edges, &GenConfig::default())
        .unwrap()
        .instance;
    qubo::compile(&inst, qubo::default_penalties(&inst)).unwrap().spectrum
}

fn short_config(steps: usize) -> DdqaoaConfig {
    DdqaoaConfig {
        n_opt_max: steps,
        ..DdqaoaConfig::default()
    }
}

fn check_record_invariants(rec: &RunRecord, cfg: &DdqaoaConfig, diag: &DiagonalSpectrum) {
    assert!(!rec.trace.is_empty() && rec.trace.len() <= cfg.n_opt_max);
    for (i, s) in rec.trace.iter().enumerate() {
        assert_eq!(s.step, i + 1);
        assert!(s.depth >= cfg.p0 && s.depth <= cfg.p_max);
    }
    let changes: Vec<usize> = rec
        .trace
        .windows(2)
        .filter(|w| w[1].depth != w[0].depth)
        .map(|w| {
            assert_eq!(w[1].depth, w[0].depth + 1);
            w[0].step
        })
        .collect();
    assert_eq!(changes, rec.depth_change_steps);
    assert_eq!(rec.final_depth, rec.trace.last().unwrap().depth);
    assert_eq!(rec.final_params.depth(), rec.final_depth);

    let trace_min = rec.trace.iter().map(|s| s.energy).fold(f64::INFINITY, f64::min);
    assert!(rec.best_energy <= trace_min + cfg.epsilon);
    let state = sv::prepare_qaoa_state(diag, &rec.best_params).unwrap();
    let e = sv::expectation(&state, diag).unwrap();
    assert!((e - rec.best_energy).abs() <= 1e-9 * e.abs().max(1.0));
}

#[test]
fn ddqaoa_record_invariants_on_compiled_instance() {
    let diag = compiled_diag(21, 8);
    let cfg = short_config(400);
    let rec = driver::run_ddqaoa(&diag, &cfg, 21).unwrap();
    check_record_invariants(&rec, &cfg, &diag);
    match rec.converged_reason {
        StopReason::BudgetExhausted => assert_eq!(rec.trace.len(), cfg.n_opt_max),
        StopReason::PmaxPlateau => assert_eq!(rec.final_depth, cfg.p_max),
    }
}

#[test]
fn ten_edge_runs_are_reproducible() {
    let diag = compiled_diag(3, 10);
    let cfg = short_config(200);
    assert_eq!(
        driver::run_ddqaoa(&diag, &cfg, 3).unwrap(),
        driver::run_ddqaoa(&diag, &cfg, 3).unwrap()
    );
    let jittered = DdqaoaConfig {
        init_jitter: 0.05,
        ..cfg.clone()
    };
    let a = driver::run_ddqaoa(&diag, &jittered, 8).unwrap();
    assert_eq!(a, driver::run_ddqaoa(&diag, &jittered, 8).unwrap());
    assert_ne!(
        a.trace[0].energy,
        driver::run_ddqaoa(&diag, &jittered, 9).unwrap().trace[0].energy
    );
}

#[test]
fn fixed_depth_never_changes_depth() {
    let diag = compiled_diag(5, 8);
    let cfg = short_config(150);
    for p in [1usize, 3, 5] {
        let rec = driver::run_fixed_depth(&diag, p, &cfg, 5).unwrap();
        assert_eq!(rec.trace.len(), 150);
        assert!(rec.trace.iter().all(|s| s.depth == p));
        assert!(rec.depth_change_steps.is_empty());
        assert_eq!(rec.converged_reason, StopReason::BudgetExhausted);
        check_record_invariants(
            &rec,
            &DdqaoaConfig {
                p0: 1,
                p_max: p,
                ..cfg.clone()
            },
            &diag,
        );
    }
}

#[test]
fn fixed_depth_on_zero_hamiltonian_is_flat() {
    let diag = qubo::diagonal_spectrum(&IsingHamiltonian::zero(4)).unwrap();
    let rec = driver::run_fixed_depth(&diag, 3, &short_config(50), 0).unwrap();
    assert!(rec.trace.iter().all(|s| s.energy.abs() < 1e-12));
    assert_eq!(rec.trace.len(), 50);
}

#[test]
fn fixed_p1_lands_on_grid_optimum_for_antiferromagnetic_pair() {
    let diag = qubo::diagonal_spectrum(&IsingHamiltonian::new(vec![0.0, 0.0], [((0, 1), 1.0)], 0.0).unwrap()).unwrap();
    let mut grid_min = f64::INFINITY;
    for i in 0..=314 {
        for j in 0..=314 {
            let params = sv::ParameterSchedule::new(vec![i as f64 * 0.01], vec![j as f64 * 0.01]).unwrap();
            let s = sv::prepare_qaoa_state(&diag, &params).unwrap();
            grid_min = grid_min.min(sv::expectation(&s, &diag).unwrap());
        }
    }
    let rec = driver::run_fixed_depth(&diag, 1, &DdqaoaConfig::default(), 0).unwrap();
    assert!(
        (rec.best_energy - grid_min).abs() <= 1e-3,
        "{} vs {grid_min}",
        rec.best_energy
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ddqaoa_invariants_hold_for_random_configs(
        seed in 0u64..500,
        k in 2usize..30,
        p_max in 1usize..6,
        steps in 1usize..120,
    ) {
        let diag = compiled_diag(seed, 6);
        let cfg = DdqaoaConfig { patience_k: k, p_max, n_opt_max: steps, ..DdqaoaConfig::default() };
        let rec = driver::run_ddqaoa(&diag, &cfg, seed).unwrap();
        check_record_invariants(&rec, &cfg, &diag);
    }
}
