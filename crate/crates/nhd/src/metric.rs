//! Metric dynamics for two-level non-Hermitian Hamiltonians.
//!
//! For a constant Hamiltonian H, an initially trivial metric evolves as
//! rho(t) = e^{-i H^dagger (t-t0)} e^{+i H (t-t0)}, which solves
//! i d(rho)/dt = H^dagger rho - rho H with rho(t0) = I. The Hermitian square
//! root eta = sqrt(rho) maps the non-unitary evolution onto a Hermitian
//! counterpart h = eta H eta^{-1} + i (d eta/dt) eta^{-1}, whose propagator
//! U_h(t, t0) = eta(t) U_H(t, t0) is exactly unitary. Expectation values in
//! the metric inner product are ordinary expectations of the normalised
//! state eta(t) psi(t).

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{
    eigh, expm, pauli_x, pauli_y, pauli_z, two_level_propagator, ComplexMatrix, IM,
};

/// Two-amplitude state of the undilated system.
pub type Amp2 = [C64; 2];

pub fn dot2(a: &Amp2, b: &Amp2) -> C64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

pub fn norm_sqr2(a: &Amp2) -> f64 {
    dot2(a, a).re
}

pub fn matvec2(m: &ComplexMatrix, v: &Amp2) -> Amp2 {
    [m[(0, 0)] * v[0] + m[(0, 1)] * v[1], m[(1, 0)] * v[0] + m[(1, 1)] * v[1]]
}

/// A two-level Hamiltonian, possibly non-Hermitian.
///
/// The family sigma_x + i r sigma_z built by [`Hamiltonian::gain_loss_qubit`]
/// keeps its parameter so downstream code can use closed forms that need it;
/// arbitrary matrices are accepted through [`Hamiltonian::from_matrix`].
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    matrix: ComplexMatrix,
    r: Option<f64>,
    traceless: bool,
}

const TRACELESS_ATOL: f64 = 1e-12;

impl Hamiltonian {
    /// sigma_x + i r sigma_z: a qubit with balanced gain and loss of rate r.
    pub fn gain_loss_qubit(r: f64) -> Self {
        let matrix = pauli_x().add(&pauli_z().scaled(IM.scale(r)));
        Self { matrix, r: Some(r), traceless: true }
    }

    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() != 2 {
            return Err(Error::DimMismatch(matrix.dim(), 2));
        }
        if !matrix.is_finite() {
            return Err(Error::InvalidInput("Hamiltonian entries must be finite".into()));
        }
        let traceless = matrix.trace().norm() <= TRACELESS_ATOL;
        Ok(Self { matrix, r: None, traceless })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn r(&self) -> Option<f64> {
        self.r
    }

    pub fn is_traceless(&self) -> bool {
        self.traceless
    }

    pub fn adjoint_matrix(&self) -> ComplexMatrix {
        self.matrix.adjoint()
    }

    /// Closed-form eigenvalue pair. For the gain-loss qubit this is
    /// +-sqrt(1 - r^2), collapsing to a degenerate zero at |r| = 1.
    pub fn eigenvalues(&self) -> Result<(C64, C64)> {
        let half_trace = self.matrix.trace() * C64::new(0.5, 0.0);
        let root = (half_trace * half_trace - self.matrix.det2()?).sqrt();
        Ok((half_trace - root, half_trace + root))
    }

    /// Period of the metric for an oscillatory gain-loss qubit (|r| < 1).
    pub fn metric_period(&self) -> Option<f64> {
        match self.r {
            Some(r) if r.abs() < 1.0 => Some(std::f64::consts::PI / (1.0 - r * r).sqrt()),
            _ => None,
        }
    }

    /// e^{-i H dt}: closed form when traceless, series exponential otherwise.
    pub fn propagator(&self, dt: f64) -> Result<ComplexMatrix> {
        if self.traceless {
            two_level_propagator(&self.matrix, dt)
        } else {
            expm(&self.matrix.scaled(-IM), dt)
        }
    }
}

/// rho(t) = e^{-i H^dagger (t-t0)} e^{+i H (t-t0)}.
pub fn metric_closed_form(h: &Hamiltonian, t: f64, t0: f64) -> Result<ComplexMatrix> {
    let dt = t - t0;
    let left = if h.is_traceless() {
        two_level_propagator(&h.adjoint_matrix(), dt)?
    } else {
        expm(&h.adjoint_matrix().scaled(-IM), dt)?
    };
    let right = if h.is_traceless() {
        two_level_propagator(&h.matrix, -dt)?
    } else {
        expm(&h.matrix.scaled(IM), dt)?
    };
    Ok(left.mul(&right))
}

/// Integrate i d(rho)/dt = H^dagger rho - rho H from rho(grid[0]) = I,
/// reporting rho at every grid point.
///
/// Classic fixed-step RK4 with substeps no larger than `step`; the iterate is
/// re-symmetrised after every substep so roundoff cannot accumulate a
/// non-Hermitian component. Serves as the independent cross-check of
/// [`metric_closed_form`].
pub fn metric_ode_evolve(h: &Hamiltonian, grid: &[f64], step: f64) -> Result<Vec<ComplexMatrix>> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidStep(step));
    }
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty time grid".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("time grid must be strictly increasing".into()));
    }

    let hd = h.adjoint_matrix();
    let rhs = |rho: &ComplexMatrix| -> ComplexMatrix {
        hd.mul(rho).sub(&rho.mul(&h.matrix)).scaled(-IM)
    };

    let mut rho = ComplexMatrix::identity(2);
    let mut out = Vec::with_capacity(grid.len());
    out.push(rho.clone());
    for w in grid.windows(2) {
        let span = w[1] - w[0];
        let substeps = (span / step).ceil().max(1.0) as usize;
        let dt = span / substeps as f64;
        for _ in 0..substeps {
            let k1 = rhs(&rho);
            let k2 = rhs(&rho.add(&k1.scaled_re(dt / 2.0)));
            let k3 = rhs(&rho.add(&k2.scaled_re(dt / 2.0)));
            let k4 = rhs(&rho.add(&k3.scaled_re(dt)));
            let incr = k1.add(&k2.scaled_re(2.0)).add(&k3.scaled_re(2.0)).add(&k4);
            rho = rho.add(&incr.scaled_re(dt / 6.0)).symmetrized();
        }
        out.push(rho.clone());
    }
    Ok(out)
}

/// eta = sqrt(rho), eta^{-1}, and d(eta)/dt on a metric grid.
#[derive(Clone, Debug)]
pub struct EtaGrid {
    pub eta: Vec<ComplexMatrix>,
    pub eta_inv: Vec<ComplexMatrix>,
    pub eta_dot: Vec<ComplexMatrix>,
}

fn sqrt_pair(rho: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let spec = eigh(rho)?;
    let min_eig = spec.eigenvalues.first().map(|z| z.re).unwrap_or(0.0);
    if min_eig <= 1e-12 {
        return Err(Error::NotPositiveDefinite { min_eig });
    }
    Ok((spec.map_eigenvalues(f64::sqrt), spec.map_eigenvalues(|x| 1.0 / x.sqrt())))
}

/// Three-point derivative of `f` at `ts[0]` (any spacing, any order of
/// points); standard Lagrange differentiation.
fn three_point_derivative(
    f: [&ComplexMatrix; 3],
    ts: [f64; 3],
) -> ComplexMatrix {
    let [t0, t1, t2] = ts;
    let c0 = (2.0 * t0 - t1 - t2) / ((t0 - t1) * (t0 - t2));
    let c1 = (t0 - t2) / ((t1 - t0) * (t1 - t2));
    let c2 = (t0 - t1) / ((t2 - t0) * (t2 - t1));
    f[0].scaled_re(c0).add(&f[1].scaled_re(c1)).add(&f[2].scaled_re(c2))
}

/// Square roots and their time derivative along a sampled metric.
///
/// The derivative uses centred differences in the interior and second-order
/// one-sided stencils at the endpoints, so its accuracy is O(spacing^2)
/// everywhere.
pub fn eta_and_derivative(rho_grid: &[ComplexMatrix], grid: &[f64]) -> Result<EtaGrid> {
    if rho_grid.len() != grid.len() {
        return Err(Error::DimMismatch(rho_grid.len(), grid.len()));
    }
    if grid.len() < 3 {
        return Err(Error::InvalidInput("need at least three grid points for derivatives".into()));
    }
    let mut eta = Vec::with_capacity(grid.len());
    let mut eta_inv = Vec::with_capacity(grid.len());
    for rho in rho_grid {
        let (root, root_inv) = sqrt_pair(rho)?;
        eta.push(root);
        eta_inv.push(root_inv);
    }
    let n = grid.len();
    let mut eta_dot = Vec::with_capacity(n);
    for k in 0..n {
        let d = if k == 0 {
            three_point_derivative([&eta[0], &eta[1], &eta[2]], [grid[0], grid[1], grid[2]])
        } else if k == n - 1 {
            three_point_derivative(
                [&eta[n - 1], &eta[n - 2], &eta[n - 3]],
                [grid[n - 1], grid[n - 2], grid[n - 3]],
            )
        } else {
            eta[k + 1].sub(&eta[k - 1]).scaled_re(1.0 / (grid[k + 1] - grid[k - 1]))
        };
        eta_dot.push(d);
    }
    Ok(EtaGrid { eta, eta_inv, eta_dot })
}

/// h = eta H eta^{-1} + i (d eta/dt) eta^{-1}; Hermitian up to the accuracy
/// of the supplied derivative.
pub fn hermitian_counterpart(
    h: &Hamiltonian,
    eta: &ComplexMatrix,
    eta_inv: &ComplexMatrix,
    eta_dot: &ComplexMatrix,
) -> ComplexMatrix {
    eta.mul(&h.matrix).mul(eta_inv).add(&eta_dot.mul(eta_inv).scaled(IM))
}

/// U_h(t, t0) = eta(t) U_H(t, t0) for an evolution that starts from the
/// trivial metric (eta(t0) = I). Exactly unitary in exact arithmetic.
pub fn u_h_from_mapping(
    h: &Hamiltonian,
    eta_t: &ComplexMatrix,
    t: f64,
    t0: f64,
) -> Result<ComplexMatrix> {
    Ok(eta_t.mul(&h.propagator(t - t0)?))
}

/// The stationary metric of the gain-loss qubit: e^{beta sigma_y} with
/// tanh(beta) = r. Only exists while the spectrum is real (|r| < 1).
pub fn stationary_metric_analytic(r: f64) -> Result<ComplexMatrix> {
    if r.abs() >= 1.0 {
        return Err(Error::OutsidePtSymmetric(r));
    }
    let root = (1.0 - r * r).sqrt();
    Ok(ComplexMatrix::identity(2)
        .scaled_re(1.0 / root)
        .add(&pauli_y().scaled_re(r / root)))
}

/// Trapezoidal average of the sampled metric over [t_start, t_stop].
///
/// The window endpoints must land on grid points (within a small fraction of
/// the local spacing). The plain average satisfies
/// H^dagger avg - avg H = i (rho(t_stop) - rho(t_start)) / (t_stop - t_start),
/// so over one full period it commutes into the stationary metric up to an
/// overall scale; use [`det_normalized`] to pin that scale.
pub fn time_averaged_metric(
    rho_grid: &[ComplexMatrix],
    grid: &[f64],
    t_start: f64,
    t_stop: f64,
) -> Result<ComplexMatrix> {
    if rho_grid.len() != grid.len() {
        return Err(Error::DimMismatch(rho_grid.len(), grid.len()));
    }
    if !(t_stop > t_start) {
        return Err(Error::InvalidWindow(t_start, t_stop));
    }
    let spacing = if grid.len() > 1 {
        grid.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    } else {
        f64::INFINITY
    };
    let snap = 1e-6 * spacing.max(1e-12);
    let first = grid.iter().position(|&t| (t - t_start).abs() <= snap);
    let last = grid.iter().rposition(|&t| (t - t_stop).abs() <= snap);
    let (first, last) = match (first, last) {
        (Some(a), Some(b)) if b > a => (a, b),
        _ => return Err(Error::InvalidWindow(t_start, t_stop)),
    };
    let mut acc = ComplexMatrix::zeros(rho_grid[first].dim());
    for k in first..last {
        let dt = grid[k + 1] - grid[k];
        acc = acc.add(&rho_grid[k].add(&rho_grid[k + 1]).scaled_re(0.5 * dt));
    }
    Ok(acc.scaled_re(1.0 / (grid[last] - grid[first])))
}

/// Rescale a 2x2 matrix to unit determinant.
pub fn det_normalized(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let det = m.det2()?;
    if det.re <= 0.0 || det.im.abs() > 1e-9 * det.norm().max(1.0) {
        return Err(Error::InvalidInput(format!(
            "determinant {det} has no positive real square root"
        )));
    }
    Ok(m.scaled_re(1.0 / det.re.sqrt()))
}

/// Expectation of `obs` in the metric inner product:
/// <psi| eta obs eta |psi>. Real (up to roundoff) for Hermitian `obs`.
pub fn metric_expectation(obs: &ComplexMatrix, psi: &Amp2, eta: &ComplexMatrix) -> C64 {
    let chi = matvec2(eta, psi);
    let obs_chi = matvec2(obs, &chi);
    dot2(&chi, &obs_chi)
}

/// The three states a dilated register exposes at time t:
/// psi(t) itself, rho(t) psi(t), and the normalised metric state eta psi.
#[derive(Clone, Debug)]
pub struct PsiPair {
    pub psi: Amp2,
    pub rho_psi: Amp2,
    pub eta_psi: Amp2,
    pub t: f64,
}

/// Propagate psi0 and attach the metric companions at time t.
pub fn psi_triple(h: &Hamiltonian, t: f64, t0: f64, psi0: &Amp2) -> Result<PsiPair> {
    let u = h.propagator(t - t0)?;
    let psi = matvec2(&u, psi0);
    let rho = metric_closed_form(h, t, t0)?;
    let rho_psi = matvec2(&rho, &psi);
    let (eta, _) = sqrt_pair(&rho)?;
    let eta_psi = matvec2(&eta, &psi);
    Ok(PsiPair { psi, rho_psi, eta_psi, t })
}

/// Uniform grid with exact endpoints.
pub fn linspace(t0: f64, t1: f64, samples: usize) -> Vec<f64> {
    if samples <= 1 {
        return vec![t0];
    }
    let n = samples - 1;
    (0..=n)
        .map(|k| {
            if k == n {
                t1
            } else {
                t0 + (t1 - t0) * k as f64 / n as f64
            }
        })
        .collect()
}

/// Everything the experiment layer needs about one Hamiltonian on one grid.
///
/// The derivative of eta is taken on a private stencil of width
/// `fd_spacing` around each grid point (the closed form is available at any
/// t), so the reported grid can be as coarse as the caller likes without
/// hurting the accuracy of h.
#[derive(Clone, Debug)]
pub struct MetricTrajectory {
    pub grid: Vec<f64>,
    pub rho: Vec<ComplexMatrix>,
    pub eta: Vec<ComplexMatrix>,
    pub eta_inv: Vec<ComplexMatrix>,
    pub eta_dot: Vec<ComplexMatrix>,
    pub h: Vec<ComplexMatrix>,
    /// Propagator of the non-Hermitian generator, U_H(t, t0).
    pub u_nh: Vec<ComplexMatrix>,
    /// Propagator of the Hermitian counterpart, U_h(t, t0) = eta(t) U_H.
    pub u_h: Vec<ComplexMatrix>,
    pub det_rho: Vec<f64>,
}

struct TrajectoryPoint {
    rho: ComplexMatrix,
    eta: ComplexMatrix,
    eta_inv: ComplexMatrix,
    eta_dot: ComplexMatrix,
    h: ComplexMatrix,
    u_nh: ComplexMatrix,
    u_h: ComplexMatrix,
    det_rho: f64,
}

impl MetricTrajectory {
    pub fn build(
        h: &Hamiltonian,
        t0: f64,
        t1: f64,
        samples: usize,
        fd_spacing: f64,
    ) -> Result<Self> {
        if samples < 2 {
            return Err(Error::InvalidInput("trajectory needs at least two samples".into()));
        }
        if !(t1 > t0) {
            return Err(Error::InvalidWindow(t0, t1));
        }
        if !(fd_spacing > 0.0) || !fd_spacing.is_finite() {
            return Err(Error::InvalidStep(fd_spacing));
        }
        let grid = linspace(t0, t1, samples);
        let points: Vec<Result<TrajectoryPoint>> = crate::exec::map(grid.clone(), |t| {
            let rho = metric_closed_form(h, t, t0)?;
            let (eta, eta_inv) = sqrt_pair(&rho)?;
            let (eta_plus, _) = sqrt_pair(&metric_closed_form(h, t + fd_spacing, t0)?)?;
            let (eta_minus, _) = sqrt_pair(&metric_closed_form(h, t - fd_spacing, t0)?)?;
            let eta_dot = eta_plus.sub(&eta_minus).scaled_re(1.0 / (2.0 * fd_spacing));
            let counterpart = hermitian_counterpart(h, &eta, &eta_inv, &eta_dot);
            let u_nh = h.propagator(t - t0)?;
            let u_h = eta.mul(&u_nh);
            let det_rho = rho.det2()?.re;
            Ok(TrajectoryPoint { rho, eta, eta_inv, eta_dot, h: counterpart, u_nh, u_h, det_rho })
        });

        let mut traj = MetricTrajectory {
            grid,
            rho: Vec::with_capacity(samples),
            eta: Vec::with_capacity(samples),
            eta_inv: Vec::with_capacity(samples),
            eta_dot: Vec::with_capacity(samples),
            h: Vec::with_capacity(samples),
            u_nh: Vec::with_capacity(samples),
            u_h: Vec::with_capacity(samples),
            det_rho: Vec::with_capacity(samples),
        };
        for point in points {
            let p = point?;
            traj.rho.push(p.rho);
            traj.eta.push(p.eta);
            traj.eta_inv.push(p.eta_inv);
            traj.eta_dot.push(p.eta_dot);
            traj.h.push(p.h);
            traj.u_nh.push(p.u_nh);
            traj.u_h.push(p.u_h);
            traj.det_rho.push(p.det_rho);
        }
        Ok(traj)
    }
}
