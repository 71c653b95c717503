//! Statevector emulation of the dilated circuits.
//!
//! Registers hold one system qubit plus up to two ancillas in the order
//! (system, ancilla a, ancilla b), system most significant. Measurement is
//! projective in a per-qubit Pauli basis; shot noise comes from a seeded,
//! counter-based generator so identical inputs always reproduce identical
//! counts regardless of scheduling.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{hadamard, unitarity_defect, ComplexMatrix};
use crate::metric::Amp2;

/// Measurement axis for one qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    fn code(self) -> u64 {
        match self {
            PauliAxis::X => 1,
            PauliAxis::Y => 2,
            PauliAxis::Z => 3,
        }
    }

    /// Rotation into the measurement basis: eigenvectors of the axis map to
    /// computational basis states (+1 to |0>, -1 to |1>).
    fn rotation(self) -> ComplexMatrix {
        match self {
            PauliAxis::X => hadamard(),
            // rows (1, -i), (1, i) over sqrt(2): Hadamard after S^dagger.
            PauliAxis::Y => {
                let s = 1.0 / 2f64.sqrt();
                ComplexMatrix::two_by_two(
                    C64::new(s, 0.0),
                    C64::new(0.0, -s),
                    C64::new(s, 0.0),
                    C64::new(0.0, s),
                )
            }
            PauliAxis::Z => ComplexMatrix::identity(2),
        }
    }
}

impl std::fmt::Display for PauliAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PauliAxis::X => "X",
            PauliAxis::Y => "Y",
            PauliAxis::Z => "Z",
        })
    }
}

/// One axis per qubit, register order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasurementBasis(pub Vec<PauliAxis>);

impl MeasurementBasis {
    pub fn uniform(axis: PauliAxis, n_qubits: usize) -> Self {
        MeasurementBasis(vec![axis; n_qubits])
    }

    /// System measured along `axis`, every ancilla along Z.
    pub fn system_axis(axis: PauliAxis, n_qubits: usize) -> Self {
        let mut axes = vec![PauliAxis::Z; n_qubits];
        axes[0] = axis;
        MeasurementBasis(axes)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Distinct stream number per basis, so different bases never share a
    /// random stream under the same seed.
    fn stream_code(&self) -> u64 {
        self.0.iter().fold(0u64, |acc, axis| acc * 4 + axis.code())
    }

    fn rotation(&self) -> ComplexMatrix {
        let mut rot = self.0[0].rotation();
        for axis in &self.0[1..] {
            rot = rot.kron(&axis.rotation());
        }
        rot
    }
}

impl std::fmt::Display for MeasurementBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for axis in &self.0 {
            write!(f, "{axis}")?;
        }
        Ok(())
    }
}

/// Normalised register state.
#[derive(Clone, Debug)]
pub struct StateVector {
    amps: Vec<C64>,
    n_qubits: usize,
}

const NORM_ATOL: f64 = 1e-9;

impl StateVector {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let n_qubits = match amps.len() {
            2 => 1,
            4 => 2,
            8 => 3,
            n => return Err(Error::InvalidInput(format!("unsupported register size {n}"))),
        };
        let norm_sqr: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_ATOL {
            return Err(Error::InvalidInput(format!(
                "state norm {} is not 1",
                norm_sqr.sqrt()
            )));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("state amplitudes must be finite".into()));
        }
        Ok(StateVector { amps, n_qubits })
    }

    /// psi0 on the system with every ancilla in |+>.
    pub fn with_plus_ancillas(psi0: &Amp2, ancillas: usize) -> Result<Self> {
        let blocks = 1usize << ancillas;
        let weight = 1.0 / (blocks as f64).sqrt();
        let amps = (0..2 * blocks).map(|idx| psi0[idx / blocks].scale(weight)).collect();
        StateVector::new(amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }
}

/// Act with a unitary on the whole register.
pub fn apply_unitary(state: &StateVector, u: &ComplexMatrix) -> Result<StateVector> {
    if u.dim() != state.amps.len() {
        return Err(Error::StateDimMismatch { state_dim: state.amps.len(), op_dim: u.dim() });
    }
    let defect = unitarity_defect(u);
    if defect > 1e-9 {
        return Err(Error::NotUnitary { defect });
    }
    let amps = u.matvec(&state.amps)?;
    StateVector::new(amps)
}

/// Project the ancillas onto a definite outcome.
///
/// `outcome` is a bitstring over the ancilla qubits in register order
/// ("0"/"1" with one ancilla, "ab" with two). Returns the branch probability
/// and the normalised system state.
pub fn postselect(state: &StateVector, outcome: &str) -> Result<(f64, Amp2)> {
    let ancillas = state.n_qubits - 1;
    if outcome.len() != ancillas || !outcome.chars().all(|c| c == '0' || c == '1') {
        return Err(Error::InvalidInput(format!(
            "outcome {outcome:?} does not address {ancillas} ancilla(s)"
        )));
    }
    let offset = usize::from_str_radix(outcome, 2).unwrap_or(0);
    let blocks = 1usize << ancillas;
    let raw = [state.amps[offset], state.amps[blocks + offset]];
    let prob = raw[0].norm_sqr() + raw[1].norm_sqr();
    if prob < 1e-14 {
        return Err(Error::EmptyBranch);
    }
    let inv = 1.0 / prob.sqrt();
    Ok((prob, [raw[0].scale(inv), raw[1].scale(inv)]))
}

/// Counts from one measurement setting.
#[derive(Clone, Debug)]
pub struct ShotRecord {
    pub basis: MeasurementBasis,
    /// Outcome bitstring (register order, +1 eigenstates as '0') to count.
    pub counts: BTreeMap<String, u64>,
    pub shots: u64,
    pub seed: u64,
}

/// Measure every qubit in its requested axis, `shots` times.
///
/// The generator is ChaCha8 keyed by `seed` on a stream derived from the
/// basis, so records for different settings are independent but individually
/// reproducible.
pub fn sample_shots(
    state: &StateVector,
    basis: &MeasurementBasis,
    shots: u64,
    seed: u64,
) -> Result<ShotRecord> {
    if basis.len() != state.n_qubits {
        return Err(Error::StateDimMismatch {
            state_dim: state.n_qubits,
            op_dim: basis.len(),
        });
    }
    if shots == 0 {
        return Err(Error::InvalidInput("need at least one shot".into()));
    }
    let rotated = basis.rotation().matvec(&state.amps)?;
    let probs: Vec<f64> = rotated.iter().map(|z| z.norm_sqr()).collect();
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in &probs {
        acc += p;
        cumulative.push(acc);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(basis.stream_code());
    let mut tallies = vec![0u64; probs.len()];
    for _ in 0..shots {
        let draw: f64 = rng.gen::<f64>() * acc;
        let idx = cumulative.iter().position(|&c| draw < c).unwrap_or(probs.len() - 1);
        tallies[idx] += 1;
    }

    let mut counts = BTreeMap::new();
    for (idx, &n) in tallies.iter().enumerate() {
        if n > 0 {
            counts.insert(format!("{idx:0width$b}", width = state.n_qubits), n);
        }
    }
    Ok(ShotRecord { basis: basis.clone(), counts, shots, seed })
}

/// A post-selected single-qubit Pauli estimate with its shot bookkeeping.
#[derive(Clone, Copy, Debug)]
pub struct PauliEstimate {
    pub value: f64,
    pub stderr: f64,
    /// Shots that survived the ancilla condition.
    pub n_post: u64,
    /// Effective shots n_post / p_hat with the empirical branch frequency
    /// p_hat = n_post / shots; identically equal to the requested shot count,
    /// kept for symmetry with the exact-probability variant reported upstream.
    pub n_eff: f64,
}

/// Estimate the Pauli expectation of one qubit from a [`ShotRecord`],
/// conditioned on the other qubits matching `condition`.
///
/// `condition` has one character per non-target qubit in register order:
/// '0' or '1' to require that bit, '*' to accept either. The target qubit
/// must have been measured along the axis whose expectation you want.
pub fn estimate_pauli(
    record: &ShotRecord,
    target_qubit: usize,
    condition: &str,
) -> Result<PauliEstimate> {
    let n_qubits = record.basis.len();
    if target_qubit >= n_qubits {
        return Err(Error::InvalidInput(format!("no qubit {target_qubit} in the record")));
    }
    if condition.len() != n_qubits - 1
        || !condition.chars().all(|c| c == '0' || c == '1' || c == '*')
    {
        return Err(Error::InvalidInput(format!(
            "condition {condition:?} does not address {} qubit(s)",
            n_qubits - 1
        )));
    }
    let mut plus = 0u64;
    let mut minus = 0u64;
    for (outcome, &n) in &record.counts {
        let bits: Vec<char> = outcome.chars().collect();
        let mut cond_iter = condition.chars();
        let mut ok = true;
        for (q, &bit) in bits.iter().enumerate() {
            if q == target_qubit {
                continue;
            }
            match cond_iter.next() {
                Some('*') => {}
                Some(c) if c == bit => {}
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        if bits[target_qubit] == '0' {
            plus += n;
        } else {
            minus += n;
        }
    }
    let n_post = plus + minus;
    if n_post == 0 {
        return Err(Error::EmptyBranch);
    }
    let value = (plus as f64 - minus as f64) / n_post as f64;
    // Plug-in binomial error, floored at 1/n_post: when every retained shot
    // lands on one outcome the plug-in variance vanishes, yet a rate of order
    // 1/n_post is still entirely compatible with the data (rule of three).
    let plug_in = ((1.0 - value * value).max(0.0) / n_post as f64).sqrt();
    let stderr = plug_in.max(1.0 / n_post as f64);
    let p_hat = n_post as f64 / record.shots as f64;
    Ok(PauliEstimate { value, stderr, n_post, n_eff: n_post as f64 / p_hat })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilation::{one_ancilla_target, two_ancilla_target};
    use crate::metric::Hamiltonian;

    fn rc(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn basis0() -> Amp2 {
        [rc(1.0, 0.0), rc(0.0, 0.0)]
    }

    fn plus_state() -> StateVector {
        let s = 1.0 / 2f64.sqrt();
        StateVector::new(vec![rc(s, 0.0), rc(s, 0.0)]).unwrap()
    }

    #[test]
    fn rejects_unnormalised_or_odd_sized_registers() {
        assert!(StateVector::new(vec![rc(1.0, 0.0); 3]).is_err());
        assert!(StateVector::new(vec![rc(1.0, 0.0), rc(1.0, 0.0)]).is_err());
        assert!(StateVector::new(vec![rc(1.0, 0.0), rc(0.0, 0.0)]).is_ok());
    }

    #[test]
    fn unitary_application_guards_inputs() {
        let state = plus_state();
        let out = apply_unitary(&state, &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(out.amps(), state.amps());

        let had = apply_unitary(&StateVector::new(vec![rc(1.0, 0.0), rc(0.0, 0.0)]).unwrap(), &hadamard())
            .unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!((had.amps()[0] - rc(s, 0.0)).norm() < 1e-12);
        assert!((had.amps()[1] - rc(s, 0.0)).norm() < 1e-12);

        let stretch = ComplexMatrix::two_by_two(rc(2.0, 0.0), rc(0.0, 0.0), rc(0.0, 0.0), rc(1.0, 0.0));
        assert!(matches!(apply_unitary(&state, &stretch), Err(Error::NotUnitary { .. })));
        assert!(matches!(
            apply_unitary(&state, &ComplexMatrix::identity(4)),
            Err(Error::StateDimMismatch { .. })
        ));
    }

    #[test]
    fn postselection_frozen_values() {
        let h = Hamiltonian::gain_loss_qubit(1.0);
        let target = one_ancilla_target(&h, 0.0, 0.0, &basis0()).unwrap();
        let state = StateVector::new(target.state.clone()).unwrap();
        let (prob, sys) = postselect(&state, "0").unwrap();
        assert!((prob - 0.5).abs() < 1e-12);
        assert!((sys[0].norm() - 1.0).abs() < 1e-12);

        let target = one_ancilla_target(&h, 1.0, 0.0, &basis0()).unwrap();
        let state = StateVector::new(target.state.clone()).unwrap();
        let (prob, sys) = postselect(&state, "0").unwrap();
        assert!((prob - 5.0 / 6.0).abs() < 1e-10);
        let expected = [rc(2.0, 0.0).scale(1.0 / 5f64.sqrt()), rc(0.0, -1.0).scale(1.0 / 5f64.sqrt())];
        let overlap = sys[0].conj() * expected[0] + sys[1].conj() * expected[1];
        assert!((overlap.norm() - 1.0).abs() < 1e-10);

        let target = two_ancilla_target(&h, 1.0, 0.0, &basis0()).unwrap();
        let state = StateVector::new(target.state.clone()).unwrap();
        let (prob, sys) = postselect(&state, "10").unwrap();
        assert!((prob - 1.0 / 12.0).abs() < 1e-10);
        assert!(sys[0].norm() < 1e-9 && (sys[1].norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn postselection_rejects_empty_branches() {
        let state = StateVector::with_plus_ancillas(&basis0(), 1).unwrap();
        // Amplitudes live only on system |0>, ancilla split; system |1> is
        // empty but that is not an ancilla branch, both ancilla outcomes hold
        // weight. Build an explicit empty branch instead.
        let s = 1.0 / 2f64.sqrt();
        let lopsided = StateVector::new(vec![rc(s, 0.0), rc(0.0, 0.0), rc(s, 0.0), rc(0.0, 0.0)]).unwrap();
        assert!(matches!(postselect(&lopsided, "1"), Err(Error::EmptyBranch)));
        assert!(postselect(&state, "0").is_ok());
        assert!(postselect(&state, "01").is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_basis_separated() {
        let state = plus_state();
        let basis_z = MeasurementBasis::uniform(PauliAxis::Z, 1);
        let a = sample_shots(&state, &basis_z, 5000, 7).unwrap();
        let b = sample_shots(&state, &basis_z, 5000, 7).unwrap();
        assert_eq!(a.counts, b.counts);

        let c = sample_shots(&state, &basis_z, 5000, 8).unwrap();
        assert_ne!(a.counts, c.counts);

        let basis_x = MeasurementBasis::uniform(PauliAxis::X, 1);
        let d = sample_shots(&state, &basis_x, 5000, 7).unwrap();
        assert_eq!(d.counts.get("0").copied().unwrap_or(0), 5000);
    }

    #[test]
    fn sampling_matches_exact_probabilities() {
        let zero = StateVector::new(vec![rc(1.0, 0.0), rc(0.0, 0.0)]).unwrap();
        let basis_z = MeasurementBasis::uniform(PauliAxis::Z, 1);
        let rec = sample_shots(&zero, &basis_z, 1000, 3).unwrap();
        assert_eq!(rec.counts.get("0").copied(), Some(1000));

        let n = 10_000u64;
        let rec = sample_shots(&plus_state(), &basis_z, n, 11).unwrap();
        let zeros = rec.counts.get("0").copied().unwrap_or(0) as f64;
        let sigma = (0.25 / n as f64).sqrt();
        assert!((zeros / n as f64 - 0.5).abs() < 3.0 * sigma);
        let total: u64 = rec.counts.values().sum();
        assert_eq!(total, n);
    }

    #[test]
    fn estimates_recover_postselected_expectations() {
        let h = Hamiltonian::gain_loss_qubit(0.6);
        let target = one_ancilla_target(&h, 1.0, 0.0, &basis0()).unwrap();
        let state = StateVector::new(target.state.clone()).unwrap();
        let (_, exact_sys) = postselect(&state, "0").unwrap();
        let exact_z = exact_sys[0].norm_sqr() - exact_sys[1].norm_sqr();

        let basis = MeasurementBasis::system_axis(PauliAxis::Z, 2);
        let rec = sample_shots(&state, &basis, 4096, 17).unwrap();
        let est = estimate_pauli(&rec, 0, "0").unwrap();
        assert!((est.value - exact_z).abs() < 3.0 * est.stderr.max(1e-3));
        assert!((est.n_eff - 4096.0).abs() < 1e-9);
    }

    #[test]
    fn estimate_handles_pure_and_empty_branches() {
        let zero = StateVector::new(vec![rc(1.0, 0.0), rc(0.0, 0.0)]).unwrap();
        let basis = MeasurementBasis::uniform(PauliAxis::Z, 1);
        let rec = sample_shots(&zero, &basis, 500, 1).unwrap();
        let est = estimate_pauli(&rec, 0, "").unwrap();
        assert_eq!(est.value, 1.0);
        assert_eq!(est.stderr, 1.0 / 500.0);
        assert_eq!(est.n_post, 500);

        let s = 1.0 / 2f64.sqrt();
        let lopsided = StateVector::new(vec![rc(s, 0.0), rc(0.0, 0.0), rc(s, 0.0), rc(0.0, 0.0)]).unwrap();
        let basis = MeasurementBasis::uniform(PauliAxis::Z, 2);
        let rec = sample_shots(&lopsided, &basis, 200, 2).unwrap();
        assert!(matches!(estimate_pauli(&rec, 0, "1"), Err(Error::EmptyBranch)));
    }

    #[test]
    fn branch_frequency_matches_postselection_probability() {
        let h = Hamiltonian::gain_loss_qubit(1.0);
        let target = one_ancilla_target(&h, 1.0, 0.0, &basis0()).unwrap();
        let state = StateVector::new(target.state.clone()).unwrap();
        let basis = MeasurementBasis::uniform(PauliAxis::Z, 2);
        let n = 20_000u64;
        let rec = sample_shots(&state, &basis, n, 23).unwrap();
        let kept: u64 = rec
            .counts
            .iter()
            .filter(|(bits, _)| bits.ends_with('0'))
            .map(|(_, &c)| c)
            .sum();
        let p_hat = kept as f64 / n as f64;
        let p_exact = 5.0 / 6.0;
        let sigma = (p_exact * (1.0 - p_exact) / n as f64).sqrt();
        assert!((p_hat - p_exact).abs() < 3.0 * sigma, "p_hat {p_hat}");
    }

    #[test]
    fn wildcard_condition_pools_branches() {
        let h = Hamiltonian::gain_loss_qubit(1.0);
        let target = two_ancilla_target(&h, 1.0, 0.0, &basis0()).unwrap();
        let state = StateVector::new(target.state.clone()).unwrap();
        let basis = MeasurementBasis::system_axis(PauliAxis::Y, 3);
        let rec = sample_shots(&state, &basis, 40_000, 5).unwrap();
        // Both b=1 branches hold the same metric state; pooling them doubles
        // the statistics. Exact <sigma_y> there is -1 at this point.
        let est = estimate_pauli(&rec, 0, "*1").unwrap();
        assert!((est.value + 1.0).abs() < 0.02, "pooled estimate {}", est.value);
        let pooled_fraction = est.n_post as f64 / 40_000.0;
        assert!((pooled_fraction - 0.5).abs() < 0.02);
    }

    #[test]
    fn sampling_error_shrinks_with_shot_count() {
        let h = Hamiltonian::gain_loss_qubit(0.6);
        let target = one_ancilla_target(&h, 1.0, 0.0, &basis0()).unwrap();
        let state = StateVector::new(target.state.clone()).unwrap();
        let (_, exact_sys) = postselect(&state, "0").unwrap();
        let exact_z = exact_sys[0].norm_sqr() - exact_sys[1].norm_sqr();
        let basis = MeasurementBasis::system_axis(PauliAxis::Z, 2);

        let mut rmse = Vec::new();
        for shots in [1_000u64, 10_000, 100_000] {
            let mut sq = 0.0;
            for seed in 0..20u64 {
                let rec = sample_shots(&state, &basis, shots, 100 + seed).unwrap();
                let est = estimate_pauli(&rec, 0, "0").unwrap();
                sq += (est.value - exact_z) * (est.value - exact_z);
            }
            rmse.push((sq / 20.0).sqrt());
        }
        assert!(rmse[0] > rmse[1] && rmse[1] > rmse[2], "rmse {rmse:?}");
    }
}
