//! C ABI over the `ddqaoa` library.
//!
//! Objects cross the boundary as opaque heap handles (`DdqInstance`,
//! `DdqProblem`, `DdqRun`) that the caller releases with the matching
//! `*_free` function. Every fallible call returns a [`DdqStatus`]; on failure
//! [`ddq_last_error_message`] describes the cause. Panics are caught at the
//! boundary and reported as [`DdqStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ddqaoa::adam::AdamHyper;
use ddqaoa::bench;
use ddqaoa::cspp::{self, CsppInstance, GenConfig};
use ddqaoa::driver::{self, DdqaoaConfig, RunRecord};
use ddqaoa::qubo::{self, DiagonalSpectrum, IsingHamiltonian};
use ddqaoa::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DdqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NoFeasibleInstance = 3,
    Io = 4,
    Parse = 5,
    Runtime = 6,
    Panic = 7,
}

/// A CSPP instance.
pub struct DdqInstance {
    inner: CsppInstance,
}

/// An instance compiled to an Ising Hamiltonian with its full spectrum.
pub struct DdqProblem {
    instance: CsppInstance,
    ising: IsingHamiltonian,
    spectrum: DiagonalSpectrum,
}

/// The result of one optimization run.
pub struct DdqRun {
    inner: RunRecord,
}

/// Optimizer settings. Obtain defaults from [`ddq_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DdqConfig {
    pub p0: usize,
    pub p_max: usize,
    pub epsilon: f64,
    pub sigma: f64,
    pub patience_k: usize,
    pub n_opt_max: usize,
    pub init_gamma: f64,
    pub init_beta: f64,
    pub init_jitter: f64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
}

impl From<&DdqaoaConfig> for DdqConfig {
    fn from(c: &DdqaoaConfig) -> Self {
        DdqConfig {
            p0: c.p0,
            p_max: c.p_max,
            epsilon: c.epsilon,
            sigma: c.sigma,
            patience_k: c.patience_k,
            n_opt_max: c.n_opt_max,
            init_gamma: c.init_gamma,
            init_beta: c.init_beta,
            init_jitter: c.init_jitter,
            learning_rate: c.adam.learning_rate,
            beta1: c.adam.beta1,
            beta2: c.adam.beta2,
            adam_epsilon: c.adam.epsilon,
        }
    }
}

impl From<&DdqConfig> for DdqaoaConfig {
    fn from(c: &DdqConfig) -> Self {
        DdqaoaConfig {
            p0: c.p0,
            p_max: c.p_max,
            epsilon: c.epsilon,
            sigma: c.sigma,
            patience_k: c.patience_k,
            n_opt_max: c.n_opt_max,
            init_gamma: c.init_gamma,
            init_beta: c.init_beta,
            init_jitter: c.init_jitter,
            adam: AdamHyper {
                learning_rate: c.learning_rate,
                beta1: c.beta1,
                beta2: c.beta2,
                epsilon: c.adam_epsilon,
            },
        }
    }
}

/// One optimizer step of a run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DdqStep {
    pub step: usize,
    pub depth: usize,
    pub energy: f64,
    pub success_prob: f64,
}

/// Scores of a run's best angles.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DdqMetrics {
    pub expectation: f64,
    /// `expectation / e_min`; NaN when `e_min` is zero.
    pub raw_ratio: f64,
    pub norm_ratio: f64,
    pub success_prob: f64,
    pub cnots_per_layer: u64,
    pub cumulative_cnots: u64,
    pub final_depth: usize,
}

/// Cheapest feasible path found by exhaustive search.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DdqPathSummary {
    pub found: bool,
    pub cost: f64,
    pub resource: f64,
    pub num_edges: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

struct Failure(DdqStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidInstance(_)
            | Error::InvalidArgument(_)
            | Error::LengthMismatch { .. }
            | Error::TooManyQubits { .. } => DdqStatus::InvalidArgument,
            Error::NoFeasibleInstance { .. } => DdqStatus::NoFeasibleInstance,
            Error::Io { .. } => DdqStatus::Io,
            Error::Json { .. } | Error::MalformedReport(_) => DdqStatus::Parse,
            _ => DdqStatus::Runtime,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(DdqStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, translating errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> DdqStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => DdqStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            DdqStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    unsafe { out.write(value) };
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ddq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ddq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Default optimizer settings.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ddq_config_default(out: *mut DdqConfig) -> DdqStatus {
    guard(|| unsafe { write_out(out, DdqConfig::from(&DdqaoaConfig::default()), "out") })
}

/// Generates a random instance with the default generator settings. With
/// `require_sound`, candidates whose compiled ground states miss the optimum
/// are redrawn.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ddq_instance_generate(
    seed: u64,
    num_edges: usize,
    require_sound: bool,
    out: *mut *mut DdqInstance,
) -> DdqStatus {
    guard(|| {
        let gen = GenConfig::default();
        let inner = if require_sound {
            qubo::generate_sound_instance(seed, num_edges, &gen)?.instance
        } else {
            cspp::generate_instance(seed, num_edges, &gen)?
        };
        unsafe { write_out(out, Box::into_raw(Box::new(DdqInstance { inner })), "out") }
    })
}

/// Parses an instance from its JSON form.
///
/// # Safety
/// `json` must be null or a NUL-terminated string; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ddq_instance_from_json(json: *const c_char, out: *mut *mut DdqInstance) -> DdqStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = unsafe { CStr::from_ptr(json) }
            .to_str()
            .map_err(|e| Failure(DdqStatus::Parse, format!("json is not UTF-8: {e}")))?;
        let inner: CsppInstance = serde_json::from_str(text).map_err(|e| Failure(DdqStatus::Parse, e.to_string()))?;
        unsafe { write_out(out, Box::into_raw(Box::new(DdqInstance { inner })), "out") }
    })
}

/// Serializes an instance. Release the string with [`ddq_string_free`].
///
/// # Safety
/// `instance` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ddq_instance_to_json(instance: *const DdqInstance, out: *mut *mut c_char) -> DdqStatus {
    guard(|| {
        let inst = unsafe { borrow(instance, "instance") }?;
        let s = CString::new(inst.inner.to_json()).map_err(|e| Failure(DdqStatus::Runtime, e.to_string()))?;
        unsafe { write_out(out, s.into_raw(), "out") }
    })
}

/// # Safety
/// `instance` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ddq_instance_num_edges(instance: *const DdqInstance, out: *mut usize) -> DdqStatus {
    guard(|| {
        let inst = unsafe { borrow(instance, "instance") }?;
        unsafe { write_out(out, inst.inner.num_edges(), "out") }
    })
}

/// # Safety
/// `instance` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ddq_instance_free(instance: *mut DdqInstance) {
    if !instance.is_null() {
        drop(unsafe { Box::from_raw(instance) });
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ddq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Exact optimum by path enumeration. `found` is false when no feasible
/// path exists.
///
/// # Safety
/// `instance` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ddq_solve_exact(instance: *const DdqInstance, out: *mut DdqPathSummary) -> DdqStatus {
    guard(|| {
        let inst = unsafe { borrow(instance, "instance") }?;
        let summary = cspp::solve_exact(&inst.inner).map_or(DdqPathSummary::default(), |p| DdqPathSummary {
            found: true,
            cost: p.path_cost,
            resource: p.path_resource,
            num_edges: p.edge_indices.len(),
        });
        unsafe { write_out(out, summary, "out") }
    })
}

/// Compiles an instance with the default penalties.
///
/// # Safety
/// `instance` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ddq_problem_compile(instance: *const DdqInstance, out: *mut *mut DdqProblem) -> DdqStatus {
    guard(|| {
        let inst = unsafe { borrow(instance, "instance") }?;
        let compiled = qubo::compile(&inst.inner, qubo::default_penalties(&inst.inner))?;
        let problem = DdqProblem {
            instance: inst.inner.clone(),
            ising: compiled.ising,
            spectrum: compiled.spectrum,
        };
        unsafe { write_out(out, Box::into_raw(Box::new(problem)), "out") }
    })
}

/// # Safety
/// `problem` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ddq_problem_free(problem: *mut DdqProblem) {
    if !problem.is_null() {
        drop(unsafe { Box::from_raw(problem) });
    }
}

/// # Safety
/// `problem` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ddq_problem_num_qubits(problem: *const DdqProblem, out: *mut usize) -> DdqStatus {
    guard(|| {
        let p = unsafe { borrow(problem, "problem") }?;
        unsafe { write_out(out, p.ising.n(), "out") }
    })
}

/// Smallest and largest energies of the compiled Hamiltonian.
///
/// # Safety
/// `problem` must be null or a live handle; outputs null or writable.
#[no_mangle]
pub unsafe extern "C" fn ddq_problem_energy_range(
    problem: *const DdqProblem,
    e_min: *mut f64,
    e_max: *mut f64,
) -> DdqStatus {
    guard(|| {
        let p = unsafe { borrow(problem, "problem") }?;
        unsafe {
            write_out(e_min, p.spectrum.e_min(), "e_min")?;
            write_out(e_max, p.spectrum.e_max(), "e_max")
        }
    })
}

/// Energy of computational basis state `index` (bit `i` is qubit `i`).
///
/// # Safety
/// `problem` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ddq_problem_energy(problem: *const DdqProblem, index: u64, out: *mut f64) -> DdqStatus {
    guard(|| {
        let p = unsafe { borrow(problem, "problem") }?;
        let e = usize::try_from(index)
            .ok()
            .and_then(|k| p.spectrum.energies().get(k))
            .copied()
            .ok_or_else(|| Failure(DdqStatus::InvalidArgument, format!("basis index {index} out of range")))?;
        unsafe { write_out(out, e, "out") }
    })
}

/// # Safety
/// `problem` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ddq_problem_cnots_per_layer(problem: *const DdqProblem, out: *mut u64) -> DdqStatus {
    guard(|| {
        let p = unsafe { borrow(problem, "problem") }?;
        unsafe { write_out(out, bench::cnot_count_per_layer(&p.ising), "out") }
    })
}

unsafe fn run_with(
    problem: *const DdqProblem,
    config: *const DdqConfig,
    out: *mut *mut DdqRun,
    run: impl FnOnce(&DiagonalSpectrum, &DdqaoaConfig) -> ddqaoa::Result<RunRecord>,
) -> DdqStatus {
    guard(|| {
        let p = unsafe { borrow(problem, "problem") }?;
        let cfg = DdqaoaConfig::from(unsafe { borrow(config, "config") }?);
        let inner = run(&p.spectrum, &cfg)?;
        unsafe { write_out(out, Box::into_raw(Box::new(DdqRun { inner })), "out") }
    })
}

/// Dynamic-depth optimization.
///
/// # Safety
/// `problem` and `config` must be null or valid; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ddq_run_ddqaoa(
    problem: *const DdqProblem,
    config: *const DdqConfig,
    seed: u64,
    out: *mut *mut DdqRun,
) -> DdqStatus {
    unsafe { run_with(problem, config, out, |diag, cfg| driver::run_ddqaoa(diag, cfg, seed)) }
}

/// Fixed-depth optimization at depth `p` for the configured step budget.
///
/// # Safety
/// `problem` and `config` must be null or valid; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ddq_run_fixed(
    problem: *const DdqProblem,
    p: usize,
    config: *const DdqConfig,
    seed: u64,
    out: *mut *mut DdqRun,
) -> DdqStatus {
    unsafe {
        run_with(problem, config, out, |diag, cfg| {
            driver::run_fixed_depth(diag, p, cfg, seed)
        })
    }
}

/// # Safety
/// `run` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ddq_run_free(run: *mut DdqRun) {
    if !run.is_null() {
        drop(unsafe { Box::from_raw(run) });
    }
}

/// # Safety
/// `run` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ddq_run_best_energy(run: *const DdqRun, out: *mut f64) -> DdqStatus {
    guard(|| {
        let r = unsafe { borrow(run, "run") }?;
        unsafe { write_out(out, r.inner.best_energy, "out") }
    })
}

/// # Safety
/// `run` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ddq_run_final_depth(run: *const DdqRun, out: *mut usize) -> DdqStatus {
    guard(|| {
        let r = unsafe { borrow(run, "run") }?;
        unsafe { write_out(out, r.inner.final_depth, "out") }
    })
}

/// Number of recorded optimizer steps.
///
/// # Safety
/// `run` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ddq_run_num_steps(run: *const DdqRun, out: *mut usize) -> DdqStatus {
    guard(|| {
        let r = unsafe { borrow(run, "run") }?;
        unsafe { write_out(out, r.inner.trace.len(), "out") }
    })
}

/// Step `index` (0-based) of the trace.
///
/// # Safety
/// `run` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ddq_run_step(run: *const DdqRun, index: usize, out: *mut DdqStep) -> DdqStatus {
    guard(|| {
        let r = unsafe { borrow(run, "run") }?;
        let s = r
            .inner
            .trace
            .get(index)
            .ok_or_else(|| Failure(DdqStatus::InvalidArgument, format!("step {index} out of range")))?;
        let step = DdqStep {
            step: s.step,
            depth: s.depth,
            energy: s.energy,
            success_prob: s.success_prob,
        };
        unsafe { write_out(out, step, "out") }
    })
}

/// Copies the best angles into `gammas` and `betas`, each of `capacity`
/// entries, and stores the depth in `depth`. Fails with
/// `DDQ_STATUS_INVALID_ARGUMENT` when `capacity` is too small; `depth` is
/// still written so the caller can retry.
///
/// # Safety
/// `gammas` and `betas` must be valid for `capacity` writes; `depth` writable.
#[no_mangle]
pub unsafe extern "C" fn ddq_run_best_params(
    run: *const DdqRun,
    gammas: *mut f64,
    betas: *mut f64,
    capacity: usize,
    depth: *mut usize,
) -> DdqStatus {
    guard(|| {
        let r = unsafe { borrow(run, "run") }?;
        let params = &r.inner.best_params;
        let p = params.depth();
        unsafe { write_out(depth, p, "depth") }?;
        if capacity < p {
            return Err(Failure(
                DdqStatus::InvalidArgument,
                format!("capacity {capacity} is below depth {p}"),
            ));
        }
        if gammas.is_null() || betas.is_null() {
            return Err(null("gammas or betas"));
        }
        unsafe {
            ptr::copy_nonoverlapping(params.gammas().as_ptr(), gammas, p);
            ptr::copy_nonoverlapping(params.betas().as_ptr(), betas, p);
        }
        Ok(())
    })
}

/// Scores a run of `problem`.
///
/// # Safety
/// `problem` and `run` must be null or live handles; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ddq_run_metrics(
    problem: *const DdqProblem,
    run: *const DdqRun,
    out: *mut DdqMetrics,
) -> DdqStatus {
    guard(|| {
        let p = unsafe { borrow(problem, "problem") }?;
        let r = unsafe { borrow(run, "run") }?;
        let m = bench::evaluate_run(&p.instance, &p.ising, &p.spectrum, &r.inner)?;
        let metrics = DdqMetrics {
            expectation: m.expectation,
            raw_ratio: m.raw_ratio.unwrap_or(f64::NAN),
            norm_ratio: m.norm_ratio,
            success_prob: m.success_prob,
            cnots_per_layer: m.cnots_per_layer,
            cumulative_cnots: m.cumulative_cnots,
            final_depth: m.final_depth,
        };
        unsafe { write_out(out, metrics, "out") }
    })
}
