//! State reconstruction from Pauli expectations.
//!
//! Covers three needs of the experiment layer: Bloch vectors of the three
//! post-selected states, pure-state tomography of the full two-qubit
//! register, and recovery of the normalised metric rho / tr rho from the
//! biorthogonal branch pair held by a one-ancilla register state.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::circuit::{PauliAxis, ShotRecord};
use crate::error::{Error, Result};
use crate::linalg::{eigh, pauli_x, pauli_y, pauli_z, ComplexMatrix};
use crate::metric::{dot2, norm_sqr2, Amp2, PsiPair};

/// Spin expectations of a qubit state.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// Which of the three exposed states a row refers to.
///
/// `Psi` is the directly propagated state, `RhoPsi` its image under the
/// metric, `EtaPsi` the normalised metric-frame state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum StateTag {
    Psi,
    RhoPsi,
    EtaPsi,
}

impl StateTag {
    pub const ALL: [StateTag; 3] = [StateTag::Psi, StateTag::RhoPsi, StateTag::EtaPsi];
}

impl std::fmt::Display for StateTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StateTag::Psi => "psi",
            StateTag::RhoPsi => "rho_psi",
            StateTag::EtaPsi => "eta_psi",
        })
    }
}

/// Normalised spin expectations of a (not necessarily normalised) state.
pub fn bloch_of_state(psi: &Amp2) -> BlochVector {
    let norm_sqr = norm_sqr2(psi);
    if norm_sqr <= 0.0 {
        return BlochVector::default();
    }
    let cross = psi[0].conj() * psi[1];
    BlochVector {
        x: 2.0 * cross.re / norm_sqr,
        y: 2.0 * cross.im / norm_sqr,
        z: (psi[0].norm_sqr() - psi[1].norm_sqr()) / norm_sqr,
    }
}

/// Bloch vectors of the three states exposed at one time.
pub fn three_state_expectations(pair: &PsiPair) -> BTreeMap<StateTag, BlochVector> {
    let mut out = BTreeMap::new();
    out.insert(StateTag::Psi, bloch_of_state(&pair.psi));
    out.insert(StateTag::RhoPsi, bloch_of_state(&pair.rho_psi));
    out.insert(StateTag::EtaPsi, bloch_of_state(&pair.eta_psi));
    out
}

/// Density matrix from a Bloch vector, radially projected into the physical
/// ball when shot noise pushes it outside. Returns the matrix and the
/// radial factor that was applied (1.0 when untouched).
pub fn single_qubit_from_bloch(b: &BlochVector) -> (ComplexMatrix, f64) {
    let norm = b.norm();
    let factor = if norm > 1.0 { 1.0 / norm } else { 1.0 };
    let half = 0.5 * factor;
    let m = ComplexMatrix::identity(2)
        .scaled_re(0.5)
        .add(&pauli_x().scaled_re(half * b.x))
        .add(&pauli_y().scaled_re(half * b.y))
        .add(&pauli_z().scaled_re(half * b.z));
    (m, factor)
}

fn pauli_by_index(i: usize) -> ComplexMatrix {
    match i {
        0 => ComplexMatrix::identity(2),
        1 => pauli_x(),
        2 => pauli_y(),
        _ => pauli_z(),
    }
}

fn axis_index(axis: PauliAxis) -> usize {
    match axis {
        PauliAxis::X => 1,
        PauliAxis::Y => 2,
        PauliAxis::Z => 3,
    }
}

/// The 15 nontrivial two-qubit Pauli expectations (plus the trivial unit),
/// indexed [system][ancilla] with 0 = identity, 1..3 = X, Y, Z.
#[derive(Clone, Debug)]
pub struct TwoQubitExpectations {
    pub c: [[f64; 4]; 4],
}

impl TwoQubitExpectations {
    /// Exact expectations of a register state (4 amplitudes, any norm).
    pub fn from_pure_state(amps: &[C64]) -> Result<Self> {
        if amps.len() != 4 {
            return Err(Error::DimMismatch(amps.len(), 4));
        }
        let norm_sqr: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if norm_sqr <= 1e-14 {
            return Err(Error::InvalidInput("cannot tomograph a zero state".into()));
        }
        let mut c = [[0.0; 4]; 4];
        for (i, row) in c.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                let op = pauli_by_index(i).kron(&pauli_by_index(j));
                let image = op.matvec(amps)?;
                let mut acc = C64::new(0.0, 0.0);
                for (a, b) in amps.iter().zip(&image) {
                    acc += a.conj() * b;
                }
                *entry = acc.re / norm_sqr;
            }
        }
        Ok(TwoQubitExpectations { c })
    }

    /// Expectations from the nine two-qubit measurement settings.
    ///
    /// Each correlator comes from its own setting; each single-qubit
    /// marginal is averaged over the three settings that share its axis,
    /// which uses all available counts.
    pub fn from_records(records: &[ShotRecord]) -> Result<Self> {
        if records.len() != 9 {
            return Err(Error::InvalidInput(format!(
                "need 9 settings for two-qubit tomography, got {}",
                records.len()
            )));
        }
        let mut c = [[0.0; 4]; 4];
        c[0][0] = 1.0;
        let mut sys_acc = [0.0; 4];
        let mut sys_n = [0u32; 4];
        let mut anc_acc = [0.0; 4];
        let mut anc_n = [0u32; 4];
        let mut seen = [[false; 4]; 4];
        for record in records {
            if record.basis.len() != 2 {
                return Err(Error::InvalidInput("tomography settings must cover 2 qubits".into()));
            }
            let i = axis_index(record.basis.0[0]);
            let j = axis_index(record.basis.0[1]);
            if seen[i][j] {
                return Err(Error::InvalidInput(format!(
                    "duplicate tomography setting {}",
                    record.basis
                )));
            }
            seen[i][j] = true;
            let total = record.shots as f64;
            let mut corr = 0.0;
            let mut sys = 0.0;
            let mut anc = 0.0;
            for (outcome, &n) in &record.counts {
                let bits: Vec<char> = outcome.chars().collect();
                let s_sign = if bits[0] == '0' { 1.0 } else { -1.0 };
                let a_sign = if bits[1] == '0' { 1.0 } else { -1.0 };
                let weight = n as f64 / total;
                corr += s_sign * a_sign * weight;
                sys += s_sign * weight;
                anc += a_sign * weight;
            }
            c[i][j] = corr;
            sys_acc[i] += sys;
            sys_n[i] += 1;
            anc_acc[j] += anc;
            anc_n[j] += 1;
        }
        for i in 1..4 {
            if sys_n[i] != 3 || anc_n[i] != 3 {
                return Err(Error::InvalidInput("settings must cover all 9 axis pairs".into()));
            }
            c[i][0] = sys_acc[i] / 3.0;
            c[0][i] = anc_acc[i] / 3.0;
        }
        Ok(TwoQubitExpectations { c })
    }

    fn density(&self) -> ComplexMatrix {
        let mut rho = ComplexMatrix::zeros(4);
        for i in 0..4 {
            for j in 0..4 {
                if self.c[i][j] == 0.0 {
                    continue;
                }
                let op = pauli_by_index(i).kron(&pauli_by_index(j));
                rho = rho.add(&op.scaled_re(self.c[i][j] / 4.0));
            }
        }
        rho
    }
}

/// Result of projecting tomography data onto the closest pure state.
#[derive(Clone, Debug)]
pub struct PureStateFit {
    pub amplitudes: Vec<C64>,
    /// 1 - lambda_max of the reconstructed density matrix.
    pub impurity: f64,
}

const PURITY_THRESHOLD: f64 = 0.8;

/// Dominant eigenvector of the density matrix assembled from the Pauli
/// expectations. Fails as [`Error::TooMixed`] when the dominant weight drops
/// below 0.8, the usual sign of far too few shots.
pub fn two_qubit_pure_tomography(exp: &TwoQubitExpectations) -> Result<PureStateFit> {
    let rho = exp.density().symmetrized();
    let spec = eigh(&rho)?;
    let lambda_max = spec.eigenvalues.last().map(|z| z.re).unwrap_or(0.0);
    if lambda_max < PURITY_THRESHOLD {
        return Err(Error::TooMixed { lambda_max, threshold: PURITY_THRESHOLD });
    }
    let dim = rho.dim();
    let col = dim - 1;
    let amplitudes: Vec<C64> = (0..dim).map(|i| spec.eigenvectors[(i, col)]).collect();
    Ok(PureStateFit { amplitudes, impurity: 1.0 - lambda_max })
}

/// Where a [`MetricEstimate`] came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimateSource {
    Exact,
    Shots,
}

impl std::fmt::Display for EstimateSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EstimateSource::Exact => "exact",
            EstimateSource::Shots => "shots",
        })
    }
}

/// The reconstructed normalised metric.
#[derive(Clone, Debug)]
pub struct MetricEstimate {
    /// Hermitian, positive semi-definite, unit trace.
    pub rho_normalized: ComplexMatrix,
    /// Relative residual of the defining relation rho u = v.
    pub residual: f64,
    pub source: EstimateSource,
}

fn outer(a: &Amp2, b: &Amp2) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2);
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] = a[i] * b[j].conj();
        }
    }
    m
}

/// Recover rho / tr rho from a one-ancilla register state carrying
/// (psi, rho psi) in its two branches.
///
/// The relation rho u = v fixes only the action of rho on u; the component
/// along the orthogonal direction is invisible, so a naive least-squares
/// solve is rank-deficient by construction. The missing coefficient is
/// pinned by det rho = 1 (exact for a traceless generator): writing rho in
/// the orthonormal frame (u_hat, u_perp),
///
///   rho = a u_hat u_hat' + b u_perp u_hat' + conj(b) u_hat u_perp' + g u_perp u_perp',
///
/// the data give a = Re<u_hat|v> / |u| and b = <u_perp|v> / |u|, and the
/// determinant closes the system with g = (1 + |b|^2) / a. The result is
/// positive definite whenever a > 0.
pub fn metric_from_bond_state(amps: &[C64], source: EstimateSource) -> Result<MetricEstimate> {
    if amps.len() != 4 {
        return Err(Error::DimMismatch(amps.len(), 4));
    }
    let u = [amps[0], amps[2]];
    let v = [amps[1], amps[3]];
    let u_norm = norm_sqr2(&u).sqrt();
    let v_norm = norm_sqr2(&v).sqrt();
    if u_norm <= 1e-10 * v_norm.max(1.0) {
        return Err(Error::IllConditioned(
            "primary branch amplitude is too small to anchor the metric".into(),
        ));
    }
    let u_hat = [u[0].scale(1.0 / u_norm), u[1].scale(1.0 / u_norm)];
    let u_perp = [-u_hat[1].conj(), u_hat[0].conj()];
    // The diagonal coefficient a = <u_hat|rho|u_hat> is positive for any
    // genuine metric, but deep in the broken regime its true value shrinks
    // like 1/|u|^2 and shot noise can push the estimate through zero. The
    // estimator is continuous there: as a -> 0+ the closure drives the
    // normalised result to the projector on u_perp, so clamp instead of
    // failing and let the residual report the distortion.
    let a_floor = (1e-12 * v_norm / u_norm).max(1e-150);
    let a = (dot2(&u_hat, &v).re / u_norm).max(a_floor);
    let b = dot2(&u_perp, &v).scale(1.0 / u_norm);
    let g = (1.0 + b.norm_sqr()) / a;
    let rho = outer(&u_hat, &u_hat)
        .scaled_re(a)
        .add(&outer(&u_perp, &u_hat).scaled(b))
        .add(&outer(&u_hat, &u_perp).scaled(b.conj()))
        .add(&outer(&u_perp, &u_perp).scaled_re(g))
        .symmetrized();

    let image = crate::metric::matvec2(&rho, &u);
    let diff = [image[0] - v[0], image[1] - v[1]];
    let residual = norm_sqr2(&diff).sqrt() / v_norm.max(1e-12);

    // Clip and renormalise; a no-op for clean data since det = 1 > 0 by
    // construction, but it keeps the estimate physical under heavy noise.
    let spec = eigh(&rho)?;
    let clipped = spec.map_eigenvalues(|x| x.max(0.0));
    let trace = clipped.trace().re;
    if trace <= 1e-14 {
        return Err(Error::IllConditioned("reconstructed metric has no weight".into()));
    }
    Ok(MetricEstimate {
        rho_normalized: clipped.scaled_re(1.0 / trace),
        residual,
        source,
    })
}
