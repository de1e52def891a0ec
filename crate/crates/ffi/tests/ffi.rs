use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use ddqaoa_ffi::*;

fn last_error() -> String {
    let p = ddq_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn short_config(steps: usize) -> DdqConfig {
    let mut cfg = std::mem::MaybeUninit::<DdqConfig>::uninit();
    assert_eq!(unsafe { ddq_config_default(cfg.as_mut_ptr()) }, DdqStatus::Ok);
    let mut cfg = unsafe { cfg.assume_init() };
    cfg.n_opt_max = steps;
    cfg
}

#[test]
fn full_pipeline_through_handles() {
    unsafe {
        let mut inst = ptr::null_mut();
        assert_eq!(ddq_instance_generate(7, 6, true, &mut inst), DdqStatus::Ok);
        let mut edges = 0usize;
        assert_eq!(ddq_instance_num_edges(inst, &mut edges), DdqStatus::Ok);
        assert_eq!(edges, 6);

        let mut exact = DdqPathSummary::default();
        assert_eq!(ddq_solve_exact(inst, &mut exact), DdqStatus::Ok);
        assert!(exact.found);

        let mut problem = ptr::null_mut();
        assert_eq!(ddq_problem_compile(inst, &mut problem), DdqStatus::Ok);
        let mut n = 0usize;
        ddq_problem_num_qubits(problem, &mut n);
        assert_eq!(n, 6);
        let (mut lo, mut hi) = (0.0, 0.0);
        assert_eq!(ddq_problem_energy_range(problem, &mut lo, &mut hi), DdqStatus::Ok);
        assert!(lo <= hi);
        let mut e0 = 0.0;
        assert_eq!(ddq_problem_energy(problem, 0, &mut e0), DdqStatus::Ok);
        assert!(e0 >= lo && e0 <= hi);
        assert_eq!(ddq_problem_energy(problem, 64, &mut e0), DdqStatus::InvalidArgument);

        let cfg = short_config(60);
        let mut run = ptr::null_mut();
        assert_eq!(ddq_run_ddqaoa(problem, &cfg, 7, &mut run), DdqStatus::Ok);
        let mut steps = 0usize;
        ddq_run_num_steps(run, &mut steps);
        assert!((1..=60).contains(&steps));
        let mut first = DdqStep::default();
        assert_eq!(ddq_run_step(run, 0, &mut first), DdqStatus::Ok);
        assert_eq!((first.step, first.depth), (1, 1));
        assert_eq!(ddq_run_step(run, steps, &mut first), DdqStatus::InvalidArgument);

        let mut depth = 0usize;
        let mut tiny = [0.0f64; 0];
        assert_eq!(
            ddq_run_best_params(run, tiny.as_mut_ptr(), tiny.as_mut_ptr(), 0, &mut depth),
            DdqStatus::InvalidArgument
        );
        assert!(depth >= 1);
        let mut gammas = vec![0.0; depth];
        let mut betas = vec![0.0; depth];
        assert_eq!(
            ddq_run_best_params(run, gammas.as_mut_ptr(), betas.as_mut_ptr(), depth, &mut depth),
            DdqStatus::Ok
        );

        let mut best = 0.0;
        ddq_run_best_energy(run, &mut best);
        let mut metrics = DdqMetrics::default();
        assert_eq!(ddq_run_metrics(problem, run, &mut metrics), DdqStatus::Ok);
        assert!((metrics.expectation - best).abs() <= 1e-9 * best.abs().max(1.0));
        assert!(metrics.norm_ratio >= 0.0 && metrics.norm_ratio <= 1.0);

        let mut fixed = ptr::null_mut();
        assert_eq!(ddq_run_fixed(problem, 3, &cfg, 7, &mut fixed), DdqStatus::Ok);
        let mut final_depth = 0usize;
        ddq_run_final_depth(fixed, &mut final_depth);
        assert_eq!(final_depth, 3);
        let mut cnots = 0u64;
        ddq_problem_cnots_per_layer(problem, &mut cnots);
        ddq_run_metrics(problem, fixed, &mut metrics);
        assert_eq!(metrics.cumulative_cnots, cnots * 3 * 60);

        ddq_run_free(fixed);
        ddq_run_free(run);
        ddq_problem_free(problem);
        ddq_instance_free(inst);
    }
}

#[test]
fn json_round_trip_and_parse_errors() {
    unsafe {
        let mut inst = ptr::null_mut();
        assert_eq!(ddq_instance_generate(3, 5, false, &mut inst), DdqStatus::Ok);
        let mut json = ptr::null_mut();
        assert_eq!(ddq_instance_to_json(inst, &mut json), DdqStatus::Ok);
        let text = CStr::from_ptr(json).to_owned();

        let mut back = ptr::null_mut();
        assert_eq!(ddq_instance_from_json(text.as_ptr(), &mut back), DdqStatus::Ok);
        let mut again = ptr::null_mut();
        ddq_instance_to_json(back, &mut again);
        assert_eq!(CStr::from_ptr(again), text.as_c_str());

        let bad = CString::new("{\"num_nodes\": 2}").unwrap();
        let mut none = ptr::null_mut();
        assert_eq!(ddq_instance_from_json(bad.as_ptr(), &mut none), DdqStatus::Parse);
        assert!(none.is_null());
        assert!(!last_error().is_empty());

        ddq_string_free(again);
        ddq_string_free(json);
        ddq_instance_free(back);
        ddq_instance_free(inst);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut inst = ptr::null_mut();
        assert_eq!(
            ddq_instance_generate(1, 2, false, &mut inst),
            DdqStatus::InvalidArgument
        );
        assert!(!last_error().is_empty());

        assert_eq!(ddq_instance_num_edges(ptr::null(), &mut 0), DdqStatus::NullPointer);
        assert!(last_error().contains("instance"));
        assert_eq!(
            ddq_instance_generate(1, 5, false, ptr::null_mut()),
            DdqStatus::NullPointer
        );

        assert_eq!(ddq_instance_generate(1, 5, false, &mut inst), DdqStatus::Ok);
        let mut problem = ptr::null_mut();
        ddq_problem_compile(inst, &mut problem);
        let mut cfg = short_config(10);
        cfg.beta1 = 1.5;
        let mut run = ptr::null_mut();
        assert_eq!(ddq_run_ddqaoa(problem, &cfg, 0, &mut run), DdqStatus::InvalidArgument);
        assert!(run.is_null());
        assert_eq!(
            ddq_run_fixed(problem, 0, &short_config(10), 0, &mut run),
            DdqStatus::InvalidArgument
        );

        ddq_instance_free(ptr::null_mut());
        ddq_problem_free(problem);
        ddq_instance_free(inst);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(ddq_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn header_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("ddqaoa.h")
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(header_path()).unwrap();
    for name in [
        "ddq_version",
        "ddq_last_error_message",
        "ddq_config_default",
        "ddq_instance_generate",
        "ddq_instance_from_json",
        "ddq_instance_to_json",
        "ddq_instance_free",
        "ddq_string_free",
        "ddq_solve_exact",
        "ddq_problem_compile",
        "ddq_problem_energy_range",
        "ddq_run_ddqaoa",
        "ddq_run_fixed",
        "ddq_run_best_params",
        "ddq_run_metrics",
        "ddq_run_free",
        "typedef struct DdqInstance DdqInstance;",
        "DDQ_STATUS_PANIC = 7",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

const C_SMOKE: &str = r#"
#include <stdio.h>
#include "ddqaoa.h"

int main(void) {
    DdqInstance *inst = NULL;
    if (ddq_instance_generate(7, 5, true, &inst) != DDQ_STATUS_OK) return 10;
    DdqProblem *problem = NULL;
    if (ddq_problem_compile(inst, &problem) != DDQ_STATUS_OK) return 11;
    DdqConfig cfg;
    ddq_config_default(&cfg);
    cfg.n_opt_max = 30;
    DdqRun *run = NULL;
    if (ddq_run_ddqaoa(problem, &cfg, 7, &run) != DDQ_STATUS_OK) return 12;
    DdqMetrics m;
    if (ddq_run_metrics(problem, run, &m) != DDQ_STATUS_OK) return 13;
    if (ddq_instance_num_edges(NULL, NULL) != DDQ_STATUS_NULL_POINTER) return 14;
    printf("norm_ratio=%.6f depth=%zu\n", m.norm_ratio, m.final_depth);
    ddq_run_free(run);
    ddq_problem_free(problem);
    ddq_instance_free(inst);
    return 0;
}
"#;

/// Compiles a C program against the generated header and the static
/// library built alongside this test.
#[test]
fn c_program_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libddqaoa_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let bin = dir.path().join("smoke");
    std::fs::write(&src, C_SMOKE).unwrap();
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(header_path().parent().unwrap())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("a C compiler named cc");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("norm_ratio="));
}
