//! Self-checks runnable from the CLI.
//!
//! Each check pins one verifiable property of the library against analytic
//! references, frozen constants, or its own repeatability. A failed check
//! reports the measured numbers; nothing here writes outside the system
//! temp directory.

use std::time::Instant;

use num_complex::Complex64 as C64;

use crate::circuit::{sample_shots, MeasurementBasis, PauliAxis, ShotRecord, StateVector};
use crate::dilation::{
    c_default, extended_metric, one_ancilla_exact_target, one_ancilla_target, one_ancilla_u_tot,
    two_ancilla_literal_zeta, two_ancilla_target, two_ancilla_u_tot, NaimarkProtocol,
};
use crate::error::Result;
use crate::exec;
use crate::experiment::runner::mix_seed;
use crate::experiment::{figure2, figure3, ExperimentConfig, Scheme};
use crate::linalg::ComplexMatrix;
use crate::metric::{
    det_normalized, dot2, linspace, matvec2, metric_closed_form, metric_ode_evolve, norm_sqr2,
    psi_triple, stationary_metric_analytic, time_averaged_metric, Amp2, Hamiltonian,
};
use crate::tomography::{
    bloch_of_state, metric_from_bond_state, two_qubit_pure_tomography, EstimateSource,
    TwoQubitExpectations,
};

/// Result of one named check.
#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, result: Result<(bool, String)>) -> CheckOutcome {
    match result {
        Ok((passed, detail)) => CheckOutcome { name, passed, detail },
        Err(e) => CheckOutcome { name, passed: false, detail: format!("errored: {e}") },
    }
}

const FOUR_R: [f64; 4] = [0.6, 0.9, 1.0, 1.2];

fn basis0() -> Amp2 {
    [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
}

/// Eigenvalues of the generator across regimes: a real pair in the
/// oscillatory phase, a degenerate zero at the exceptional point.
pub fn check_spectrum() -> CheckOutcome {
    outcome("spectrum", (|| {
        let start = Instant::now();
        let mut worst = 0.0f64;
        for r in [0.0, 0.6, 0.9] {
            let (lo, hi) = Hamiltonian::gain_loss_qubit(r).eigenvalues()?;
            let omega = (1.0 - r * r).sqrt();
            worst = worst
                .max((lo.re + omega).abs())
                .max((hi.re - omega).abs())
                .max(lo.im.abs())
                .max(hi.im.abs());
        }
        let (lo, hi) = Hamiltonian::gain_loss_qubit(1.0).eigenvalues()?;
        worst = worst.max(lo.norm()).max(hi.norm());
        let elapsed = start.elapsed().as_secs_f64();
        let passed = worst <= 1e-12 && elapsed < 1.0;
        Ok((passed, format!("worst deviation {worst:.3e} (tol 1e-12), {elapsed:.3}s")))
    })())
}

/// RK4 integration of the metric equation against the closed form, compared
/// relative to the matrix magnitude: the broken regime grows to ~1e6, where
/// an absolute 1e-8 would demand more than double precision carries.
pub fn check_integrator() -> CheckOutcome {
    outcome("integrator-vs-closed-form", (|| {
        let start = Instant::now();
        let grid = linspace(0.0, 10.0, 101);
        let mut per_r = Vec::new();
        let mut worst = 0.0f64;
        for r in [0.6, 1.0, 1.2] {
            let h = Hamiltonian::gain_loss_qubit(r);
            let integrated = metric_ode_evolve(&h, &grid, 1e-3)?;
            let mut worst_here = 0.0f64;
            for (rho, &t) in integrated.iter().zip(&grid) {
                let reference = metric_closed_form(&h, t, 0.0)?;
                let err = rho.sub(&reference).max_abs() / reference.max_abs().max(1.0);
                worst_here = worst_here.max(err);
            }
            per_r.push(format!("r={r}: {worst_here:.3e}"));
            worst = worst.max(worst_here);
        }
        let elapsed = start.elapsed().as_secs_f64();
        let passed = worst <= 1e-8 && elapsed < 10.0;
        Ok((passed, format!("relative error {} (tol 1e-8), {elapsed:.2}s", per_r.join(", "))))
    })())
}

/// The dynamical inner product <psi|rho|psi> stays at 1 along the
/// integrated sweep. Scaled by the magnitudes entering the product, since
/// the broken regime cancels ~1e11 down to 1.
pub fn check_norm_conservation() -> CheckOutcome {
    outcome("metric-norm-conservation", (|| {
        let grid = linspace(0.0, 10.0, 101);
        let psi0 = basis0();
        let mut worst = 0.0f64;
        for r in [0.6, 1.0, 1.2] {
            let h = Hamiltonian::gain_loss_qubit(r);
            let integrated = metric_ode_evolve(&h, &grid, 1e-3)?;
            for (rho, &t) in integrated.iter().zip(&grid) {
                let u = h.propagator(t)?;
                let psi = matvec2(&u, &psi0);
                let value = dot2(&psi, &matvec2(rho, &psi));
                let scale = (rho.max_abs() * norm_sqr2(&psi)).max(1.0);
                let defect = ((value.re - 1.0).abs() + value.im.abs()) / scale;
                worst = worst.max(defect);
            }
        }
        Ok((worst <= 1e-8, format!("scaled norm drift {worst:.3e} (tol 1e-8)")))
    })())
}

/// Period-averaging the oscillatory metric lands on the stationary one, and
/// the average intertwines the generator with its adjoint.
pub fn check_stationary_metric() -> CheckOutcome {
    outcome("stationary-metric", (|| {
        let r = 0.6;
        let h = Hamiltonian::gain_loss_qubit(r);
        let period = h.metric_period().expect("oscillatory regime");
        let grid = linspace(0.0, period, 2001);
        let rhos: Vec<ComplexMatrix> = grid
            .iter()
            .map(|&t| metric_closed_form(&h, t, 0.0))
            .collect::<Result<_>>()?;
        let avg = time_averaged_metric(&rhos, &grid, 0.0, period)?;
        let reference = stationary_metric_analytic(r)?;
        let avg_err = det_normalized(&avg)?.sub(&reference).max_abs();
        let intertwine =
            h.adjoint_matrix().mul(&avg).sub(&avg.mul(h.matrix())).max_abs();
        let passed = avg_err <= 1e-4 && intertwine <= 1e-6;
        Ok((passed, format!(
            "period average off by {avg_err:.3e} (tol 1e-4), intertwining residual {intertwine:.3e} (tol 1e-6)"
        )))
    })())
}

/// At the exceptional point the trace grows exactly quadratically; past it
/// the leading eigenvalue grows exponentially at the analytic rate.
pub fn check_exceptional_growth() -> CheckOutcome {
    outcome("exceptional-point-growth", (|| {
        let h1 = Hamiltonian::gain_loss_qubit(1.0);
        let mut trace_err = 0.0f64;
        for t in linspace(0.0, 10.0, 101) {
            let trace = metric_closed_form(&h1, t, 0.0)?.trace().re;
            trace_err = trace_err.max((trace - (2.0 + 4.0 * t * t)).abs());
        }

        let r = 1.2;
        let h = Hamiltonian::gain_loss_qubit(r);
        let ts = linspace(5.0, 10.0, 51);
        let mut ys = Vec::with_capacity(ts.len());
        for &t in &ts {
            let rho = metric_closed_form(&h, t, 0.0)?;
            let top = crate::linalg::eigh(&rho)?.real_eigenvalues()[1];
            ys.push(top.ln());
        }
        let t_mean = ts.iter().sum::<f64>() / ts.len() as f64;
        let y_mean = ys.iter().sum::<f64>() / ys.len() as f64;
        let mut num = 0.0;
        let mut den = 0.0;
        for (&t, &y) in ts.iter().zip(&ys) {
            num += (t - t_mean) * (y - y_mean);
            den += (t - t_mean) * (t - t_mean);
        }
        let slope = num / den;
        let target = 2.0 * (r * r - 1.0f64).sqrt();
        let slope_err = (slope - target).abs() / target;

        let passed = trace_err <= 1e-8 && slope_err <= 0.05;
        Ok((passed, format!(
            "trace law off by {trace_err:.3e} (tol 1e-8); growth slope {slope:.6} vs {target:.6}, rel {slope_err:.2e} (tol 5e-2)"
        )))
    })())
}

/// The one- and two-ancilla circuit operators stay unitary across the full
/// sweep; the literal block formula does not, which is reported as a number.
pub fn check_dilation_unitarity() -> CheckOutcome {
    outcome("dilation-unitarity", (|| {
        let mut items = Vec::new();
        for &r in &FOUR_R {
            for t in linspace(0.0, 5.0, 101) {
                items.push((r, t));
            }
        }
        let defects: Vec<Result<f64>> = exec::map(items, |(r, t)| {
            let h = Hamiltonian::gain_loss_qubit(r);
            let one = one_ancilla_u_tot(&h, t, 0.0)?;
            let two = two_ancilla_u_tot(&h, t, 0.0)?;
            Ok(one.unitarity_defect.max(two.unitarity_defect))
        });
        let mut worst = 0.0f64;
        for d in defects {
            worst = worst.max(d?);
        }

        let rho = metric_closed_form(&Hamiltonian::gain_loss_qubit(0.6), 1.0, 0.0)?;
        let rho_g = extended_metric(&rho);
        let c = c_default(&rho_g, 4)?;
        let literal = two_ancilla_literal_zeta(&rho_g, c)?;

        let passed = worst <= 1e-9 && literal.unitarity_defect > 1e-6;
        Ok((passed, format!(
            "worst circuit defect {worst:.3e} (tol 1e-9); literal block formula defect {:.4} at r=0.6 t=1 (expected > 1e-6, not unitary by construction)",
            literal.unitarity_defect
        )))
    })())
}

/// The static embedding holds over a full period in the oscillatory regime
/// and dies at finite time in the broken regime.
pub fn check_embedding_boundary() -> CheckOutcome {
    outcome("embedding-validity-boundary", (|| {
        let h_osc = Hamiltonian::gain_loss_qubit(0.6);
        let period = h_osc.metric_period().expect("oscillatory regime");
        let protocol = NaimarkProtocol::calibrate(&h_osc, 0.0, period)?;
        let oscillatory_ok = protocol.first_invalid(&h_osc, 0.0, period, period / 400.0)?;

        let h_broken = Hamiltonian::gain_loss_qubit(1.2);
        let broken = NaimarkProtocol::calibrate(&h_broken, 0.0, 1.0)?;
        let onset = broken.first_invalid(&h_broken, 0.0, 5.0, 0.025)?;

        let passed = oscillatory_ok.is_none() && matches!(onset, Some(t) if t <= 5.0);
        Ok((passed, format!(
            "r=0.6 valid over one period (scale {:.3}); r=1.2 scale {:.3} loses validity at t={} (must be finite and <= 5)",
            protocol.scale(),
            broken.scale(),
            onset.map_or("never".to_string(), |t| format!("{t:.3}"))
        )))
    })())
}

fn alignment(a: &Amp2, b: &Amp2) -> f64 {
    dot2(a, b).norm_sqr() / (norm_sqr2(a) * norm_sqr2(b))
}

/// Frozen post-selection arithmetic at the exceptional point.
pub fn check_branch_arithmetic() -> CheckOutcome {
    outcome("branch-arithmetic", (|| {
        let h = Hamiltonian::gain_loss_qubit(1.0);
        let psi0 = basis0();
        let one = one_ancilla_target(&h, 1.0, 0.0, &psi0)?;
        let two = two_ancilla_target(&h, 1.0, 0.0, &psi0)?;

        let psi_ref = [C64::new(2.0, 0.0), C64::new(0.0, -1.0)];
        let rho_psi_ref = [C64::new(0.0, 0.0), C64::new(0.0, -1.0)];

        let mut worst = 0.0f64;
        worst = worst.max((one.branch("0")?.probability - 5.0 / 6.0).abs());
        worst = worst.max((one.branch("1")?.probability - 1.0 / 6.0).abs());
        worst = worst.max((alignment(&one.branch("0")?.amplitudes, &psi_ref) - 1.0).abs());
        worst = worst.max((alignment(&one.branch("1")?.amplitudes, &rho_psi_ref) - 1.0).abs());
        for (label, expected) in
            [("00", 5.0 / 12.0), ("10", 1.0 / 12.0), ("01", 0.25), ("11", 0.25)]
        {
            worst = worst.max((two.branch(label)?.probability - expected).abs());
        }
        Ok((worst <= 1e-9, format!("worst deviation from frozen values {worst:.3e} (tol 1e-9)")))
    })())
}

/// Sampled Bloch estimates sit inside their own 3-sigma bands at the
/// advertised rate across the full sweep and twenty seeds, and the x
/// component is statistically zero throughout.
pub fn check_shot_coverage() -> CheckOutcome {
    outcome("shot-coverage", (|| {
        let start = Instant::now();
        let base = ExperimentConfig {
            scheme: Scheme::Gbond,
            shots: 4096,
            ..ExperimentConfig::default()
        };
        let mut total = 0u64;
        let mut covered = 0u64;
        let mut sx_total = 0u64;
        let mut sx_covered = 0u64;
        for k in 0..20u64 {
            let config = ExperimentConfig { seeds: vec![17 + k], ..base.clone() };
            let report = crate::experiment::run(&config)?;
            for row in &report.rows {
                let comps = [
                    (row.est_sx, row.sx, row.err_sx),
                    (row.est_sy, row.sy, row.err_sy),
                    (row.est_sz, row.sz, row.err_sz),
                ];
                for (est, exact, stderr) in comps {
                    total += 1;
                    if (est - exact).abs() <= 3.0 * stderr + 1e-12 {
                        covered += 1;
                    }
                }
                sx_total += 1;
                if row.est_sx.abs() <= 3.0 * row.err_sx + 1e-12 {
                    sx_covered += 1;
                }
            }
        }
        let elapsed = start.elapsed().as_secs_f64();
        let coverage = covered as f64 / total.max(1) as f64;
        let sx_coverage = sx_covered as f64 / sx_total.max(1) as f64;
        let passed = coverage >= 0.99 && sx_coverage >= 0.99 && elapsed < 60.0;
        Ok((passed, format!(
            "3-sigma coverage {:.4} over {} estimates (need >= 0.99); sx-consistent-with-zero coverage {:.4}; {elapsed:.1}s",
            coverage, total, sx_coverage
        )))
    })())
}

/// Exact-amplitude reconstruction is limited only by roundoff; the sampled
/// pipeline at 1e4 shots per setting stays entrywise below 1e-2.
pub fn check_metric_reconstruction() -> CheckOutcome {
    outcome("metric-reconstruction", (|| {
        let psi0 = basis0();
        let mut worst_exact = 0.0f64;
        for &r in &FOUR_R {
            let h = Hamiltonian::gain_loss_qubit(r);
            for t in linspace(0.0, 5.0, 101) {
                let target = one_ancilla_exact_target(&h, t, 0.0, &psi0)?;
                let est = metric_from_bond_state(&target.state, EstimateSource::Exact)?;
                let rho = metric_closed_form(&h, t, 0.0)?;
                let reference = rho.scaled_re(1.0 / rho.trace().re);
                worst_exact = worst_exact.max(est.rho_normalized.sub(&reference).max_abs());
            }
        }

        let axes = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];
        let mut worst_shots = 0.0f64;
        for (ri, &r) in FOUR_R.iter().enumerate() {
            let h = Hamiltonian::gain_loss_qubit(r);
            for (ti, &t) in [1.0, 3.0, 5.0].iter().enumerate() {
                let target = one_ancilla_exact_target(&h, t, 0.0, &psi0)?;
                let state = StateVector::new(target.state.clone())?;
                let seed = mix_seed(17, ri as u64, ti as u64);
                let mut records: Vec<ShotRecord> = Vec::with_capacity(9);
                for &s_axis in &axes {
                    for &a_axis in &axes {
                        records.push(sample_shots(
                            &state,
                            &MeasurementBasis(vec![s_axis, a_axis]),
                            10_000,
                            seed,
                        )?);
                    }
                }
                let exp = TwoQubitExpectations::from_records(&records)?;
                let fit = two_qubit_pure_tomography(&exp)?;
                let est = metric_from_bond_state(&fit.amplitudes, EstimateSource::Shots)?;
                let rho = metric_closed_form(&h, t, 0.0)?;
                let reference = rho.scaled_re(1.0 / rho.trace().re);
                let err = est.rho_normalized.sub(&reference).max_abs();
                worst_shots = worst_shots.max(err);
            }
        }

        let passed = worst_exact <= 1e-8 && worst_shots <= 1e-2;
        Ok((passed, format!(
            "exact route worst {worst_exact:.3e} (tol 1e-8); sampled route worst {worst_shots:.4} at 1e4 shots/setting (tol 1e-2)"
        )))
    })())
}

/// Late-time direction of the metric-frame state at the exceptional point.
///
/// The exact state is proportional to (1, -it), so <sigma_y> = -2t/(1+t^2)
/// and <sigma_z> = (1-t^2)/(1+t^2): the y component decays like 2/t and at
/// t = 10 still sits at 0.198, reaching the 0.05 band only for t >= 40.
/// The check pins the t = 10 thresholds as stated and therefore fails on
/// the y component; the numbers are reported so the gap is visible.
pub fn check_metric_frame_asymptote() -> CheckOutcome {
    outcome("metric-frame-asymptote", (|| {
        let h = Hamiltonian::gain_loss_qubit(1.0);
        let triple = psi_triple(&h, 10.0, 0.0, &basis0())?;
        let metric_frame = bloch_of_state(&triple.eta_psi);
        let norm_frame = bloch_of_state(&triple.psi);
        let passed = metric_frame.y.abs() <= 0.05 && metric_frame.z <= -0.95;
        Ok((passed, format!(
            "metric frame at t=10: <sy>={:.4} (|.| <= 0.05 required), <sz>={:.4} (<= -0.95 required); \
             the y component follows -2t/(1+t^2) so the band needs t >= 40; \
             norm-method state for contrast: <sy>={:.4}, <sz>={:.4} (reported, not asserted)",
            metric_frame.y, metric_frame.z, norm_frame.y, norm_frame.z
        )))
    })())
}

/// Same seeds, same bytes: the figure pipelines rerun into a second
/// directory and every CSV must match exactly.
pub fn check_determinism() -> CheckOutcome {
    outcome("deterministic-outputs", (|| {
        let base = ExperimentConfig {
            r_values: vec![0.6, 1.2],
            t_stop: 2.0,
            samples: 9,
            shots: 512,
            ..ExperimentConfig::default()
        };
        let stamp = std::process::id();
        let mut dirs = Vec::new();
        let mut manifests: Vec<Vec<std::path::PathBuf>> = Vec::new();
        for k in 0..2 {
            let dir = std::env::temp_dir().join(format!("nhd-validate-{stamp}-{k}"));
            let config = ExperimentConfig { out_dir: dir.clone(), ..base.clone() };
            let mut files = figure2(&config)?;
            files.extend(figure3(&config)?);
            manifests.push(files);
            dirs.push(dir);
        }
        let mut compared = 0usize;
        let mut identical = true;
        let mut first_diff = String::new();
        for (a, b) in manifests[0].iter().zip(&manifests[1]) {
            if a.extension().map_or(true, |ext| ext != "csv") {
                continue;
            }
            compared += 1;
            let bytes_a = std::fs::read(a)?;
            let bytes_b = std::fs::read(b)?;
            if bytes_a != bytes_b && identical {
                identical = false;
                first_diff = a.file_name().unwrap_or_default().to_string_lossy().into_owned();
            }
        }
        for dir in dirs {
            let _ = std::fs::remove_dir_all(dir);
        }
        // figure2 writes a sampled and an exact CSV, figure3 one per r value;
        // with two r values the pipelines must yield four in total.
        let passed = identical && compared >= 4;
        Ok((passed, if identical {
            format!("{compared} CSV files byte-identical across repeat runs")
        } else {
            format!("divergence in {first_diff}")
        }))
    })())
}

/// Run every check in order.
pub fn run_all() -> Vec<CheckOutcome> {
    vec![
        check_spectrum(),
        check_integrator(),
        check_norm_conservation(),
        check_stationary_metric(),
        check_exceptional_growth(),
        check_dilation_unitarity(),
        check_embedding_boundary(),
        check_branch_arithmetic(),
        check_shot_coverage(),
        check_metric_reconstruction(),
        check_metric_frame_asymptote(),
        check_determinism(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_checks_pass() {
        for check in [
            check_spectrum(),
            check_stationary_metric(),
            check_branch_arithmetic(),
            check_embedding_boundary(),
        ] {
            assert!(check.passed, "{}: {}", check.name, check.detail);
        }
    }

    #[test]
    fn asymptote_check_reports_the_gap_honestly() {
        let check = check_metric_frame_asymptote();
        assert!(!check.passed);
        assert!(check.detail.contains("t >= 40"));
    }
}
