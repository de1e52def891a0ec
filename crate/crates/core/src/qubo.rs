//! Penalty-form QUBO construction for CSPP instances, the QUBO to Ising
//! substitution, and exhaustive diagonal spectra.
//!
//! Conventions shared with the statevector engine:
//! * spin `s_i = +1` is bit `0`, `s_i = -1` is bit `1` (so `x = (1 - s) / 2`);
//! * basis index `k` is little-endian, qubit `i` is bit `i` of `k`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cspp::{self, CsppInstance};
use crate::error::{Error, Result};

/// Largest qubit count for which dense `2^n` vectors are allocated.
pub const DEFAULT_QUBIT_CAP: usize = 24;

/// Couplings smaller than this in magnitude are dropped.
pub const COUPLING_DROP_TOL: f64 = 1e-12;

/// Absolute tolerance when collecting degenerate ground states.
pub const GROUND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Penalties {
    pub rho: f64,
    pub lambda: f64,
}

/// `x^T Q x + g^T x + c0` over binary `x`. `Q` is symmetric with a zero
/// diagonal; squared binaries are folded into `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboModel {
    n: usize,
    q_matrix: Vec<f64>,
    linear: Vec<f64>,
    constant: f64,
    penalties: Penalties,
}

impl QuboModel {
    /// Empty model over `n` variables.
    pub fn zeros(n: usize, penalties: Penalties) -> Self {
        QuboModel {
            n,
            q_matrix: vec![0.0; n * n],
            linear: vec![0.0; n],
            constant: 0.0,
            penalties,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self, i: usize, j: usize) -> f64 {
        self.q_matrix[i * self.n + j]
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn penalties(&self) -> Penalties {
        self.penalties
    }

    pub fn add_constant(&mut self, c: f64) {
        self.constant += c;
    }

    pub fn add_linear(&mut self, i: usize, c: f64) {
        self.linear[i] += c;
    }

    /// Adds `c * x_i * x_j`. For `i == j` the term folds into `g`.
    pub fn add_product(&mut self, i: usize, j: usize, c: f64) {
        if i == j {
            self.linear[i] += c;
        } else {
            self.q_matrix[i * self.n + j] += c / 2.0;
            self.q_matrix[j * self.n + i] += c / 2.0;
        }
    }

    /// Adds `scale * (sum_k a_k x_k + b)^2`. Variables must be distinct.
    pub fn add_squared(&mut self, terms: &[(usize, f64)], b: f64, scale: f64) {
        for (idx, &(i, a)) in terms.iter().enumerate() {
            self.linear[i] += scale * (a * a + 2.0 * a * b);
            for &(j, a2) in &terms[idx + 1..] {
                self.add_product(i, j, scale * 2.0 * a * a2);
            }
        }
        self.constant += scale * b * b;
    }

    pub fn value(&self, x: &[bool]) -> Result<f64> {
        check_len(self.n, x.len())?;
        let mut v = self.constant;
        for i in (0..self.n).filter(|&i| x[i]) {
            v += self.linear[i];
            for j in (0..self.n).filter(|&j| x[j]) {
                v += self.q(i, j);
            }
        }
        Ok(v)
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

fn check_penalties(rho: f64, lambda: f64) -> Result<()> {
    if !(rho > 0.0 && lambda > 0.0 && rho.is_finite() && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "penalties must be positive, got rho={rho}, lambda={lambda}"
        )));
    }
    Ok(())
}

/// Penalty weights large enough to dominate any path cost: `2 * sum(c) + 1`
/// for both.
pub fn default_penalties(instance: &CsppInstance) -> Penalties {
    let p = 2.0 * instance.total_cost() + 1.0;
    Penalties { rho: p, lambda: p }
}

/// Expands cost, squared resource deviation and the five squared flow terms
/// into QUBO form.
pub fn build_penalty_hamiltonian(instance: &CsppInstance, rho: f64, lambda: f64) -> Result<QuboModel> {
    check_penalties(rho, lambda)?;
    let n = instance.num_edges();
    let mut qubo = QuboModel::zeros(n, Penalties { rho, lambda });
    let edges = instance.edges();

    for (i, e) in edges.iter().enumerate() {
        qubo.add_linear(i, e.cost);
    }

    // No slack variable: under-consumption of the budget is penalized too.
    let resource: Vec<_> = edges.iter().enumerate().map(|(i, e)| (i, e.resource)).collect();
    qubo.add_squared(&resource, -instance.resource_limit(), rho);

    let ones = |it: &mut dyn Iterator<Item = usize>| it.map(|i| (i, 1.0)).collect::<Vec<_>>();
    let (s, t) = (instance.source(), instance.target());
    qubo.add_squared(&ones(&mut instance.out_edges(s)), -1.0, lambda);
    qubo.add_squared(&ones(&mut instance.in_edges(t)), -1.0, lambda);
    qubo.add_squared(&ones(&mut instance.in_edges(s)), 0.0, lambda);
    qubo.add_squared(&ones(&mut instance.out_edges(t)), 0.0, lambda);
    for v in (0..instance.num_nodes()).filter(|&v| v != s && v != t) {
        let mut terms: Vec<_> = instance.in_edges(v).map(|i| (i, 1.0)).collect();
        terms.extend(instance.out_edges(v).map(|i| (i, -1.0)));
        qubo.add_squared(&terms, 0.0, lambda);
    }
    Ok(qubo)
}

/// The three penalty-Hamiltonian parts, evaluated term by term on a bitstring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyBreakdown {
    pub cost: f64,
    pub resource: f64,
    pub flow: f64,
}

impl PenaltyBreakdown {
    pub fn total(&self) -> f64 {
        self.cost + self.resource + self.flow
    }
}

/// Direct evaluation of the penalty Hamiltonian without going through `Q`.
pub fn penalty_breakdown(instance: &CsppInstance, penalties: Penalties, x: &[bool]) -> Result<PenaltyBreakdown> {
    check_len(instance.num_edges(), x.len())?;
    let edges = instance.edges();
    let sel = |i: usize| if x[i] { 1.0 } else { 0.0 };
    let sum = |it: &mut dyn Iterator<Item = usize>| it.map(sel).sum::<f64>();

    let cost = edges.iter().enumerate().map(|(i, e)| e.cost * sel(i)).sum();
    let used: f64 = edges.iter().enumerate().map(|(i, e)| e.resource * sel(i)).sum();
    let resource = penalties.rho * (used - instance.resource_limit()).powi(2);

    let (s, t) = (instance.source(), instance.target());
    let mut flow = (sum(&mut instance.out_edges(s)) - 1.0).powi(2)
        + (sum(&mut instance.in_edges(t)) - 1.0).powi(2)
        + sum(&mut instance.in_edges(s)).powi(2)
        + sum(&mut instance.out_edges(t)).powi(2);
    for v in (0..instance.num_nodes()).filter(|&v| v != s && v != t) {
        flow += (sum(&mut instance.in_edges(v)) - sum(&mut instance.out_edges(v))).powi(2);
    }
    Ok(PenaltyBreakdown {
        cost,
        resource,
        flow: penalties.lambda * flow,
    })
}

/// `E0 + sum h_i Z_i + sum_{i<j} J_ij Z_i Z_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingHamiltonian {
    n: usize,
    fields_h: Vec<f64>,
    couplings: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

impl IsingHamiltonian {
    /// Builds a Hamiltonian, normalizing pairs to `i < j`, summing repeats and
    /// dropping negligible couplings.
    pub fn new(
        fields_h: Vec<f64>,
        couplings: impl IntoIterator<Item = ((usize, usize), f64)>,
        offset: f64,
    ) -> Result<Self> {
        let n = fields_h.len();
        let mut map = BTreeMap::new();
        for ((i, j), c) in couplings {
            if i == j || i >= n || j >= n {
                return Err(Error::InvalidArgument(format!(
                    "coupling ({i}, {j}) invalid for {n} qubits"
                )));
            }
            *map.entry((i.min(j), i.max(j))).or_insert(0.0) += c;
        }
        map.retain(|_, c: &mut f64| c.abs() >= COUPLING_DROP_TOL);
        Ok(IsingHamiltonian {
            n,
            fields_h,
            couplings: map,
            offset,
        })
    }

    pub fn zero(n: usize) -> Self {
        IsingHamiltonian {
            n,
            fields_h: vec![0.0; n],
            couplings: BTreeMap::new(),
            offset: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields_h
    }

    pub fn couplings(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.couplings
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Energy of a bitstring under the `bit 0 <-> s = +1` convention.
    pub fn energy_of_bitstring(&self, z: &[bool]) -> Result<f64> {
        check_len(self.n, z.len())?;
        let spin = |b: bool| if b { -1.0 } else { 1.0 };
        let mut e = self.offset;
        for (h, &b) in self.fields_h.iter().zip(z) {
            e += h * spin(b);
        }
        for (&(i, j), c) in &self.couplings {
            e += c * spin(z[i]) * spin(z[j]);
        }
        Ok(e)
    }

    /// Sorted text dump: `offset`, then `h i v` for every qubit, then `J i j v`.
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        writeln!(out, "offset {}", self.offset).unwrap();
        for (i, h) in self.fields_h.iter().enumerate() {
            writeln!(out, "h {i} {h}").unwrap();
        }
        for (&(i, j), c) in &self.couplings {
            writeln!(out, "J {i} {j} {c}").unwrap();
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<Self> {
        let bad = |line: &str| Error::InvalidArgument(format!("bad Hamiltonian dump line: {line:?}"));
        let mut offset = 0.0;
        let mut fields = Vec::new();
        let mut couplings = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let tok: Vec<&str> = line.split_whitespace().collect();
            match tok.as_slice() {
                ["offset", v] => offset = v.parse().map_err(|_| bad(line))?,
                ["h", i, v] => {
                    let i: usize = i.parse().map_err(|_| bad(line))?;
                    if i != fields.len() {
                        return Err(bad(line));
                    }
                    fields.push(v.parse().map_err(|_| bad(line))?);
                }
                ["J", i, j, v] => couplings.push((
                    (i.parse().map_err(|_| bad(line))?, j.parse().map_err(|_| bad(line))?),
                    v.parse().map_err(|_| bad(line))?,
                )),
                _ => return Err(bad(line)),
            }
        }
        IsingHamiltonian::new(fields, couplings, offset)
    }
}

/// Substitutes `x_i = (1 - s_i) / 2`.
pub fn qubo_to_ising(qubo: &QuboModel) -> IsingHamiltonian {
    let n = qubo.n();
    let mut offset = qubo.constant();
    let mut h = vec![0.0; n];
    let mut couplings = Vec::new();

    for (i, &g) in qubo.linear().iter().enumerate() {
        offset += g / 2.0;
        h[i] -= g / 2.0;
    }
    for i in 0..n {
        for j in i + 1..n {
            // x^T Q x carries Q_ij twice.
            let w = 2.0 * qubo.q(i, j);
            if w == 0.0 {
                continue;
            }
            offset += w / 4.0;
            h[i] -= w / 4.0;
            h[j] -= w / 4.0;
            couplings.push(((i, j), w / 4.0));
        }
    }
    IsingHamiltonian::new(h, couplings, offset).expect("pairs are in range by construction")
}

/// Every basis-state energy of a diagonal Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalSpectrum {
    n: usize,
    energies: Vec<f64>,
    e_min: f64,
    e_max: f64,
    ground_set: Vec<usize>,
}

impl DiagonalSpectrum {
    /// Wraps raw energies; `energies.len()` must be a power of two.
    pub fn from_energies(energies: Vec<f64>) -> Result<Self> {
        let len = energies.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "spectrum length {len} is not a power of two >= 2"
            )));
        }
        if let Some(k) = energies.iter().position(|e| !e.is_finite()) {
            return Err(Error::InvalidArgument(format!("energy {k} is not finite")));
        }
        let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let e_max = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ground_set = energies
            .iter()
            .enumerate()
            .filter(|(_, &e)| (e - e_min).abs() <= GROUND_TOL)
            .map(|(k, _)| k)
            .collect();
        Ok(DiagonalSpectrum {
            n: len.trailing_zeros() as usize,
            energies,
            e_min,
            e_max,
            ground_set,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn e_min(&self) -> f64 {
        self.e_min
    }

    pub fn e_max(&self) -> f64 {
        self.e_max
    }

    pub fn ground_set(&self) -> &[usize] {
        &self.ground_set
    }
}

pub fn diagonal_spectrum(ising: &IsingHamiltonian) -> Result<DiagonalSpectrum> {
    diagonal_spectrum_with_cap(ising, DEFAULT_QUBIT_CAP)
}

pub fn diagonal_spectrum_with_cap(ising: &IsingHamiltonian, cap: usize) -> Result<DiagonalSpectrum> {
    let n = ising.n();
    if n > cap {
        return Err(Error::TooManyQubits { n, cap });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("Hamiltonian has no qubits".into()));
    }
    let spin = |k: usize, i: usize| if (k >> i) & 1 == 1 { -1.0 } else { 1.0 };
    let couplings: Vec<_> = ising.couplings().iter().map(|(&(i, j), &c)| (i, j, c)).collect();
    let energies = (0..1usize << n)
        .map(|k| {
            let mut e = ising.offset();
            for (i, h) in ising.fields().iter().enumerate() {
                e += h * spin(k, i);
            }
            for &(i, j, c) in &couplings {
                e += c * spin(k, i) * spin(k, j);
            }
            e
        })
        .collect();
    DiagonalSpectrum::from_energies(energies)
}

/// Every artifact derived from one instance.
#[derive(Debug, Clone)]
pub struct CompiledProblem {
    pub qubo: QuboModel,
    pub ising: IsingHamiltonian,
    pub spectrum: DiagonalSpectrum,
}

pub fn compile(instance: &CsppInstance, penalties: Penalties) -> Result<CompiledProblem> {
    let qubo = build_penalty_hamiltonian(instance, penalties.rho, penalties.lambda)?;
    let ising = qubo_to_ising(&qubo);
    let spectrum = diagonal_spectrum(&ising)?;
    Ok(CompiledProblem { qubo, ising, spectrum })
}

/// True when a feasible path exists and every ground state of the compiled
/// Hamiltonian decodes to a violation-free selection with the optimal cost.
pub fn ground_states_recover_optimum(instance: &CsppInstance, spectrum: &DiagonalSpectrum) -> bool {
    let Some(best) = cspp::solve_exact(instance) else {
        return false;
    };
    spectrum.ground_set().iter().all(|&k| {
        let bits = cspp::bits_from_index(k, instance.num_edges());
        match cspp::decode_bitstring(instance, &bits) {
            Ok(d) => d.violations.is_empty() && d.cost_if_valid == Some(best.path_cost),
            Err(_) => false,
        }
    })
}

/// Compiles with the given penalties and checks [`ground_states_recover_optimum`].
pub fn penalties_are_sound(instance: &CsppInstance, penalties: Penalties) -> Result<bool> {
    let compiled = compile(instance, penalties)?;
    Ok(ground_states_recover_optimum(instance, &compiled.spectrum))
}

/// Like [`cspp::generate_instance`], but also redraws candidates whose
/// default-penalty ground states miss the exact optimum. The count of such
/// redraws is reported in [`cspp::Generated::rejected_by_predicate`].
pub fn generate_sound_instance(seed: u64, num_edges: usize, config: &cspp::GenConfig) -> Result<cspp::Generated> {
    cspp::generate_instance_where(seed, num_edges, config, |inst| {
        penalties_are_sound(inst, default_penalties(inst)).unwrap_or(false)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cspp::{bits_from_index, Edge, GenConfig};
    use approx::assert_abs_diff_eq;

    fn single_edge() -> CsppInstance {
        CsppInstance::new(
            2,
            vec![Edge {
                u: 0,
                v: 1,
                cost: 3.0,
                resource: 1.0,
            }],
            0,
            1,
            1.0,
            0,
        )
        .unwrap()
    }

    /// f(x) = 3 x0 + 2 x0 x1.
    fn small_qubo() -> QuboModel {
        let mut q = QuboModel::zeros(2, Penalties { rho: 1.0, lambda: 1.0 });
        q.add_linear(0, 3.0);
        q.add_product(0, 1, 2.0);
        q
    }

    #[test]
    fn single_edge_values() {
        let q = build_penalty_hamiltonian(&single_edge(), 10.0, 10.0).unwrap();
        assert_eq!(q.value(&[true]).unwrap(), 3.0);
        assert_eq!(q.value(&[false]).unwrap(), 30.0);
        let p = Penalties {
            rho: 10.0,
            lambda: 10.0,
        };
        assert_eq!(penalty_breakdown(&single_edge(), p, &[false]).unwrap().total(), 30.0);
    }

    #[test]
    fn rejects_non_positive_penalties() {
        assert!(build_penalty_hamiltonian(&single_edge(), 0.0, 1.0).is_err());
        assert!(build_penalty_hamiltonian(&single_edge(), 1.0, -2.0).is_err());
    }

    #[test]
    fn q_matrix_symmetric_zero_diagonal() {
        let inst = cspp::generate_instance(7, 6, &GenConfig::default()).unwrap();
        let q = build_penalty_hamiltonian(&inst, 3.0, 5.0).unwrap();
        for i in 0..q.n() {
            assert_eq!(q.q(i, i), 0.0);
            for j in 0..q.n() {
                assert_eq!(q.q(i, j), q.q(j, i));
            }
        }
    }

    #[test]
    fn all_zero_assignment_value() {
        for seed in 0..10 {
            let inst = cspp::generate_instance(seed, 8, &GenConfig::default()).unwrap();
            let p = default_penalties(&inst);
            let q = build_penalty_hamiltonian(&inst, p.rho, p.lambda).unwrap();
            let expected = p.rho * inst.resource_limit().powi(2) + 2.0 * p.lambda;
            assert_abs_diff_eq!(q.value(&[false; 8]).unwrap(), expected, epsilon = 1e-9);
        }
    }

    #[test]
    fn seed7_qubo_matches_direct_terms_on_every_bitstring() {
        let inst = cspp::generate_instance(7, 4, &GenConfig::default()).unwrap();
        let p = default_penalties(&inst);
        let q = build_penalty_hamiltonian(&inst, p.rho, p.lambda).unwrap();
        for k in 0..16 {
            let bits = bits_from_index(k, 4);
            let direct = penalty_breakdown(&inst, p, &bits).unwrap();
            assert!(direct.resource >= 0.0 && direct.flow >= 0.0);
            assert_abs_diff_eq!(q.value(&bits).unwrap(), direct.total(), epsilon = 1e-9);
        }
    }

    #[test]
    fn default_penalty_values() {
        let mk = |costs: [f64; 2]| {
            CsppInstance::new(
                3,
                vec![
                    Edge {
                        u: 0,
                        v: 1,
                        cost: costs[0],
                        resource: 1.0,
                    },
                    Edge {
                        u: 1,
                        v: 2,
                        cost: costs[1],
                        resource: 1.0,
                    },
                ],
                0,
                2,
                2.0,
                0,
            )
            .unwrap()
        };
        assert_eq!(
            default_penalties(&mk([3.0, 5.0])),
            Penalties {
                rho: 17.0,
                lambda: 17.0
            }
        );
        assert_eq!(default_penalties(&mk([0.0, 0.0])), Penalties { rho: 1.0, lambda: 1.0 });
    }

    #[test]
    fn ising_of_small_qubo() {
        let ising = qubo_to_ising(&small_qubo());
        assert_abs_diff_eq!(ising.offset(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ising.fields()[0], -2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ising.fields()[1], -0.5, epsilon = 1e-15);
        assert_eq!(ising.couplings().len(), 1);
        assert_abs_diff_eq!(ising.couplings()[&(0, 1)], 0.5, epsilon = 1e-15);

        for k in 0..4 {
            let bits = bits_from_index(k, 2);
            assert_abs_diff_eq!(
                ising.energy_of_bitstring(&bits).unwrap(),
                small_qubo().value(&bits).unwrap(),
                epsilon = 1e-12
            );
        }
        assert_eq!(ising.energy_of_bitstring(&[false, false]).unwrap(), 0.0);
        assert_eq!(ising.energy_of_bitstring(&[true, true]).unwrap(), 5.0);
    }

    #[test]
    fn zero_and_single_variable_qubos() {
        let p = Penalties { rho: 1.0, lambda: 1.0 };
        let zero = qubo_to_ising(&QuboModel::zeros(3, p));
        assert_eq!(zero, IsingHamiltonian::zero(3));
        assert_eq!(zero.energy_of_bitstring(&[true, false, true]).unwrap(), 0.0);

        let mut q = QuboModel::zeros(1, p);
        q.add_linear(0, 1.0);
        let ising = qubo_to_ising(&q);
        assert_eq!(ising.offset(), 0.5);
        assert_eq!(ising.fields(), &[-0.5]);
        assert!(ising.couplings().is_empty());
    }

    #[test]
    fn cancelling_couplings_are_dropped() {
        let h = IsingHamiltonian::new(vec![0.0; 3], [((0, 1), 1.0), ((1, 0), -1.0), ((1, 2), 2.0)], 0.0).unwrap();
        assert_eq!(h.couplings().len(), 1);
        assert!(IsingHamiltonian::new(vec![0.0; 2], [((0, 0), 1.0)], 0.0).is_err());
    }

    #[test]
    fn energy_length_mismatch() {
        assert!(qubo_to_ising(&small_qubo()).energy_of_bitstring(&[true]).is_err());
    }

    #[test]
    fn spectrum_examples() {
        let afm = IsingHamiltonian::new(vec![0.0, 0.0], [((0, 1), 1.0)], 0.0).unwrap();
        let s = diagonal_spectrum(&afm).unwrap();
        assert_eq!(s.energies(), &[1.0, -1.0, -1.0, 1.0]);
        assert_eq!(s.ground_set(), &[1, 2]);
        assert_eq!((s.e_min(), s.e_max()), (-1.0, 1.0));

        let one = IsingHamiltonian::new(vec![-1.0], [], 0.0).unwrap();
        let s = diagonal_spectrum(&one).unwrap();
        assert_eq!(s.energies(), &[-1.0, 1.0]);
        assert_eq!(s.ground_set(), &[0]);
    }

    #[test]
    fn spectrum_cap() {
        let h = IsingHamiltonian::zero(5);
        assert!(matches!(
            diagonal_spectrum_with_cap(&h, 4),
            Err(Error::TooManyQubits { n: 5, cap: 4 })
        ));
    }

    #[test]
    fn seed7_sound_instance_ground_state_is_the_optimum() {
        let inst = generate_sound_instance(7, 4, &GenConfig::default()).unwrap().instance;
        let compiled = compile(&inst, default_penalties(&inst)).unwrap();
        let best = cspp::solve_exact(&inst).unwrap();
        assert!(ground_states_recover_optimum(&inst, &compiled.spectrum));
        // The equality-style resource penalty adds rho * (limit - used)^2 on
        // top of the path cost.
        let slack = inst.resource_limit() - best.path_resource;
        let rho = compiled.qubo.penalties().rho;
        assert_abs_diff_eq!(
            compiled.spectrum.e_min(),
            best.path_cost + rho * slack * slack,
            epsilon = 1e-9
        );
    }

    #[test]
    fn unfiltered_seed7_instance_breaks_the_penalty() {
        let inst = cspp::generate_instance(7, 4, &GenConfig::default()).unwrap();
        assert!(!penalties_are_sound(&inst, default_penalties(&inst)).unwrap());
        let sound = generate_sound_instance(7, 4, &GenConfig::default()).unwrap();
        assert!(sound.rejected_by_predicate >= 1);
    }

    #[test]
    fn dump_round_trip() {
        let inst = cspp::generate_instance(3, 6, &GenConfig::default()).unwrap();
        let ising = compile(&inst, default_penalties(&inst)).unwrap().ising;
        let text = ising.to_dump();
        assert!(text.starts_with("offset "));
        assert_eq!(IsingHamiltonian::from_dump(&text).unwrap(), ising);
        assert!(IsingHamiltonian::from_dump("h 1 2.0").is_err());
    }
}
