//! Dense statevector simulation of the QAOA ansatz for diagonal cost
//! Hamiltonians.
//!
//! Amplitudes use the same little-endian indexing as
//! [`DiagonalSpectrum`](crate::qubo::DiagonalSpectrum): qubit `i` is bit `i` of
//! the basis index. Global phases are never normalized away.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::{DiagonalSpectrum, DEFAULT_QUBIT_CAP};

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// Wraps raw amplitudes. The length must be `2^n` with `n >= 1`; the
    /// caller is responsible for normalization.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        Ok(Statevector {
            n: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    /// Computational basis state `|k>`.
    pub fn basis_state(n: usize, k: usize) -> Result<Self> {
        check_qubits(n)?;
        if k >= 1 << n {
            return Err(Error::InvalidArgument(format!("basis index {k} out of range")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        amplitudes[k] = Complex64::new(1.0, 0.0);
        Ok(Statevector { n, amplitudes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(Complex64::norm_sqr).collect()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Statevector) -> Result<Complex64> {
        check_dims(self.n, other.n)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// Angles of a depth-`p` circuit, `gammas[l]` and `betas[l]` for layer `l + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSchedule {
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

impl ParameterSchedule {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() || gammas.len() != betas.len() {
            return Err(Error::InvalidArgument(format!(
                "need equal, non-zero gamma/beta counts (got {} and {})",
                gammas.len(),
                betas.len()
            )));
        }
        Ok(ParameterSchedule { gammas, betas })
    }

    /// Splits `[gamma_1..gamma_p, beta_1..beta_p]`.
    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if !flat.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "flat parameter vector has odd length {}",
                flat.len()
            )));
        }
        let (g, b) = flat.split_at(flat.len() / 2);
        Self::new(g.to_vec(), b.to_vec())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }

    pub fn depth(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one qubit".into()));
    }
    if n > DEFAULT_QUBIT_CAP {
        return Err(Error::TooManyQubits {
            n,
            cap: DEFAULT_QUBIT_CAP,
        });
    }
    Ok(())
}

fn check_dims(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

/// `|+>^n`.
pub fn init_plus_state(n: usize) -> Result<Statevector> {
    check_qubits(n)?;
    let a = (0.5f64).powf(n as f64 / 2.0);
    Ok(Statevector {
        n,
        amplitudes: vec![Complex64::new(a, 0.0); 1 << n],
    })
}

/// `exp(-i gamma H_C)` for diagonal `H_C`.
pub fn apply_cost_layer(state: &mut Statevector, diag: &DiagonalSpectrum, gamma: f64) -> Result<()> {
    check_dims(diag.n(), state.n)?;
    for (a, &e) in state.amplitudes.iter_mut().zip(diag.energies()) {
        *a *= Complex64::cis(-gamma * e);
    }
    Ok(())
}

/// `exp(-i beta sum_j X_j)`, one `exp(-i beta X_j)` rotation per qubit.
pub fn apply_mixer_layer(state: &mut Statevector, beta: f64) {
    let (s, c) = beta.sin_cos();
    let minus_i_sin = Complex64::new(0.0, -s);
    for j in 0..state.n {
        let stride = 1 << j;
        for block in state.amplitudes.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (a0, b0) = (*a, *b);
                *a = a0 * c + b0 * minus_i_sin;
                *b = b0 * c + a0 * minus_i_sin;
            }
        }
    }
}

/// `|psi_p(gamma, beta)>`: cost then mixer for each layer, starting from `|+>^n`.
pub fn prepare_qaoa_state(diag: &DiagonalSpectrum, params: &ParameterSchedule) -> Result<Statevector> {
    let mut state = init_plus_state(diag.n())?;
    for (&g, &b) in params.gammas.iter().zip(&params.betas) {
        apply_cost_layer(&mut state, diag, g)?;
        apply_mixer_layer(&mut state, b);
    }
    Ok(state)
}

/// `<psi|H_C|psi>`, summed in basis order.
pub fn expectation(state: &Statevector, diag: &DiagonalSpectrum) -> Result<f64> {
    check_dims(diag.n(), state.n)?;
    Ok(state
        .amplitudes
        .iter()
        .zip(diag.energies())
        .map(|(a, e)| a.norm_sqr() * e)
        .sum())
}

/// Energy, gradient and final state from one forward and one reverse sweep.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub energy: f64,
    /// `[dF/dgamma_1..dF/dgamma_p, dF/dbeta_1..dF/dbeta_p]`.
    pub gradient: Vec<f64>,
    pub state: Statevector,
}

/// `Im <bra| B |ket>` with `B = sum_j X_j`.
fn im_mixer_matrix_element(bra: &[Complex64], ket: &[Complex64], n: usize) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let bit = 1 << j;
        for (k, b) in bra.iter().enumerate() {
            acc += b.conj() * ket[k ^ bit];
        }
    }
    acc.im
}

/// `Im <bra| H_C |ket>`.
fn im_cost_matrix_element(bra: &[Complex64], ket: &[Complex64], energies: &[f64]) -> f64 {
    bra.iter()
        .zip(ket)
        .zip(energies)
        .map(|((b, k), e)| (b.conj() * k).im * e)
        .sum()
}

/// Exact gradient by reverse sweep: the state and the co-state `U^dagger H psi`
/// are walked back through the layers, and each layer `exp(-i theta G)`
/// contributes `2 Im <costate| G |state>`.
pub fn evaluate_with_gradient(diag: &DiagonalSpectrum, params: &ParameterSchedule) -> Result<Evaluation> {
    let p = params.depth();
    let energies = diag.energies();
    let state = prepare_qaoa_state(diag, params)?;
    let energy = expectation(&state, diag)?;

    let mut phi = state.clone();
    let mut lambda = Statevector {
        n: state.n,
        amplitudes: state.amplitudes.iter().zip(energies).map(|(a, &e)| a * e).collect(),
    };

    let mut gradient = vec![0.0; 2 * p];
    for l in (0..p).rev() {
        gradient[p + l] = 2.0 * im_mixer_matrix_element(&lambda.amplitudes, &phi.amplitudes, phi.n);
        apply_mixer_layer(&mut phi, -params.betas[l]);
        apply_mixer_layer(&mut lambda, -params.betas[l]);

        gradient[l] = 2.0 * im_cost_matrix_element(&lambda.amplitudes, &phi.amplitudes, energies);
        apply_cost_layer(&mut phi, diag, -params.gammas[l])?;
        apply_cost_layer(&mut lambda, diag, -params.gammas[l])?;
    }

    Ok(Evaluation {
        energy,
        gradient,
        state,
    })
}

/// `[dF/dgamma, dF/dbeta]` for `F = <psi_p|H_C|psi_p>`.
pub fn gradient(diag: &DiagonalSpectrum, params: &ParameterSchedule) -> Result<Vec<f64>> {
    evaluate_with_gradient(diag, params).map(|e| e.gradient)
}

/// Probability mass on the given (possibly degenerate) ground states.
pub fn ground_state_probability(state: &Statevector, ground_set: &[usize]) -> f64 {
    ground_set.iter().map(|&k| state.amplitudes[k].norm_sqr()).sum()
}

/// Multinomial measurement counts, keyed by basis index.
pub fn sample(state: &Statevector, shots: u64, seed: u64) -> Result<BTreeMap<usize, u64>> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let mut cumulative = Vec::with_capacity(state.amplitudes.len());
    let mut acc = 0.0;
    for a in &state.amplitudes {
        acc += a.norm_sqr();
        cumulative.push(acc);
    }
    let total = acc;
    let last_nonzero = state.amplitudes.iter().rposition(|a| a.norm_sqr() > 0.0).unwrap_or(0);

    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        let u = rng.random::<f64>() * total;
        // First index whose cumulative mass exceeds u; zero-probability
        // entries are never selected.
        let k = cumulative.partition_point(|&c| c <= u).min(last_nonzero);
        *counts.entry(k).or_insert(0) += 1;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::{diagonal_spectrum, IsingHamiltonian};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn afm_pair() -> DiagonalSpectrum {
        diagonal_spectrum(&IsingHamiltonian::new(vec![0.0, 0.0], [((0, 1), 1.0)], 0.0).unwrap()).unwrap()
    }

    fn assert_state_eq(a: &Statevector, b: &[Complex64]) {
        for (x, y) in a.amplitudes().iter().zip(b) {
            assert_abs_diff_eq!(x.re, y.re, epsilon = 1e-12);
            assert_abs_diff_eq!(x.im, y.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn plus_states() {
        assert_state_eq(&init_plus_state(1).unwrap(), &[c(FRAC_1_SQRT_2, 0.0); 2]);
        assert_state_eq(&init_plus_state(2).unwrap(), &[c(0.5, 0.0); 4]);
        assert_abs_diff_eq!(init_plus_state(10).unwrap().norm_sqr(), 1.0, epsilon = 1e-12);
        assert!(init_plus_state(0).is_err());
        assert!(init_plus_state(DEFAULT_QUBIT_CAP + 1).is_err());
    }

    #[test]
    fn cost_layer_examples() {
        let diag = DiagonalSpectrum::from_energies(vec![0.0, PI]).unwrap();
        let mut s = init_plus_state(1).unwrap();
        apply_cost_layer(&mut s, &diag, 0.0).unwrap();
        assert_state_eq(&s, &[c(FRAC_1_SQRT_2, 0.0); 2]);
        apply_cost_layer(&mut s, &diag, 1.0).unwrap();
        assert_state_eq(&s, &[c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)]);

        assert!(apply_cost_layer(&mut s, &afm_pair(), 1.0).is_err());
    }

    #[test]
    fn mixer_layer_examples() {
        let mut s = Statevector::basis_state(1, 0).unwrap();
        apply_mixer_layer(&mut s, 0.0);
        assert_state_eq(&s, &[c(1.0, 0.0), c(0.0, 0.0)]);
        apply_mixer_layer(&mut s, FRAC_PI_2);
        assert_state_eq(&s, &[c(0.0, 0.0), c(0.0, -1.0)]);

        let beta = 0.37;
        let mut plus = init_plus_state(1).unwrap();
        apply_mixer_layer(&mut plus, beta);
        let phase = Complex64::cis(-beta) * FRAC_1_SQRT_2;
        assert_state_eq(&plus, &[phase, phase]);
    }

    #[test]
    fn qaoa_state_at_zero_angles_is_uniform() {
        let diag = afm_pair();
        let params = ParameterSchedule::new(vec![0.0], vec![0.0]).unwrap();
        assert_state_eq(&prepare_qaoa_state(&diag, &params).unwrap(), &[c(0.5, 0.0); 4]);
    }

    #[test]
    fn expectation_examples() {
        let ising = IsingHamiltonian::new(vec![0.3, -1.2, 0.5], [((0, 2), 0.7), ((1, 2), -0.4)], 2.5).unwrap();
        let diag = diagonal_spectrum(&ising).unwrap();
        assert_abs_diff_eq!(
            expectation(&init_plus_state(3).unwrap(), &diag).unwrap(),
            2.5,
            epsilon = 1e-12
        );
        for k in 0..8 {
            let s = Statevector::basis_state(3, k).unwrap();
            assert_eq!(expectation(&s, &diag).unwrap(), diag.energies()[k]);
        }
    }

    #[test]
    fn gradient_at_origin_has_zero_gamma_component() {
        let params = ParameterSchedule::new(vec![0.0], vec![0.0]).unwrap();
        let g = gradient(&afm_pair(), &params).unwrap();
        assert_abs_diff_eq!(g[0], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn zero_hamiltonian_has_zero_gradient() {
        let diag = diagonal_spectrum(&IsingHamiltonian::zero(3)).unwrap();
        let params = ParameterSchedule::new(vec![0.3, 0.9], vec![0.2, -0.4]).unwrap();
        for g in gradient(&diag, &params).unwrap() {
            assert_eq!(g, 0.0);
        }
    }

    #[test]
    fn gradient_matches_finite_differences_small() {
        let diag = afm_pair();
        let flat = [0.4, -0.3, 0.25, 0.6];
        let params = ParameterSchedule::from_flat(&flat).unwrap();
        let g = gradient(&diag, &params).unwrap();
        let f = |x: &[f64]| {
            let p = ParameterSchedule::from_flat(x).unwrap();
            expectation(&prepare_qaoa_state(&diag, &p).unwrap(), &diag).unwrap()
        };
        for i in 0..4 {
            let (mut up, mut dn) = (flat.to_vec(), flat.to_vec());
            up[i] += 1e-5;
            dn[i] -= 1e-5;
            assert_abs_diff_eq!(g[i], (f(&up) - f(&dn)) / 2e-5, epsilon = 1e-8);
        }
    }

    #[test]
    fn ground_probability_examples() {
        let diag = afm_pair();
        let plus = init_plus_state(2).unwrap();
        assert_abs_diff_eq!(ground_state_probability(&plus, diag.ground_set()), 0.5, epsilon = 1e-15);
        let inside = Statevector::basis_state(2, 1).unwrap();
        assert_eq!(ground_state_probability(&inside, diag.ground_set()), 1.0);
        let outside = Statevector::basis_state(2, 3).unwrap();
        assert_eq!(ground_state_probability(&outside, diag.ground_set()), 0.0);
    }

    #[test]
    fn sampling_basis_state_and_determinism() {
        let s = Statevector::basis_state(3, 5).unwrap();
        let counts = sample(&s, 1000, 1).unwrap();
        assert_eq!(counts.len(), 1);
        assert_eq!(counts[&5], 1000);

        let plus = init_plus_state(4).unwrap();
        let a = sample(&plus, 5000, 42).unwrap();
        assert_eq!(a, sample(&plus, 5000, 42).unwrap());
        assert_eq!(a.values().sum::<u64>(), 5000);
        assert!(sample(&plus, 0, 1).is_err());
    }

    #[test]
    fn schedule_validation() {
        assert!(ParameterSchedule::new(vec![], vec![]).is_err());
        assert!(ParameterSchedule::new(vec![1.0], vec![]).is_err());
        assert!(ParameterSchedule::from_flat(&[1.0, 2.0, 3.0]).is_err());
        let p = ParameterSchedule::from_flat(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(p.gammas(), &[1.0, 2.0]);
        assert_eq!(p.betas(), &[3.0, 4.0]);
        assert_eq!(p.to_flat(), vec![1.0, 2.0, 3.0, 4.0]);
    }
}
