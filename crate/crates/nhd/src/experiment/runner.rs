//! Sweep orchestration: exact references, dilated sampling, reconstruction.
//!
//! One run covers every (r, t) pair of the configured grid. Each grid point
//! is independent, so the sweep fans out through [`crate::exec::map`]; all
//! randomness is derived from the primary seed plus the point's indices,
//! which keeps results identical however the work is scheduled.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::circuit::{
    estimate_pauli, sample_shots, MeasurementBasis, PauliAxis, ShotRecord, StateVector,
};
use crate::dilation::{
    one_ancilla_exact_target, one_ancilla_u_tot, two_ancilla_exact_target, two_ancilla_u_tot,
    NaimarkProtocol,
};
use crate::error::{Error, Result};
use crate::exec;
use crate::metric::{metric_closed_form, psi_triple, Amp2, Hamiltonian};
use crate::tomography::{
    metric_from_bond_state, three_state_expectations, two_qubit_pure_tomography, BlochVector,
    EstimateSource, StateTag, TwoQubitExpectations,
};

use super::config::{ExperimentConfig, Scheme};

/// One sampled (or exactly evaluated) state at one grid point.
#[derive(Clone, Debug, Serialize)]
pub struct ExpectationRow {
    pub r: f64,
    pub t: f64,
    pub state: String,
    /// Exact Bloch components of the post-selected state.
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
    /// Estimates from the sampled circuit (equal to exact when no sampling).
    pub est_sx: f64,
    pub est_sy: f64,
    pub est_sz: f64,
    pub err_sx: f64,
    pub err_sy: f64,
    pub err_sz: f64,
    /// Exact post-selection probability of this state's branch.
    pub p_branch: f64,
    /// Post-selected count in the computational-basis setting.
    pub n_post: u64,
    /// n_post divided by the measured branch fraction, i.e. the raw shot
    /// budget this estimate cost.
    pub n_eff: f64,
    /// n_post divided by the exact branch probability.
    pub n_eff_exact: f64,
}

/// Exact Bloch curve sample, emitted densely for every state tag.
#[derive(Clone, Debug, Serialize)]
pub struct ExactRow {
    pub r: f64,
    pub t: f64,
    pub state: String,
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
}

/// Normalised metric at one grid point: exact entries next to the
/// reconstruction the configured pipeline produced.
#[derive(Clone, Debug, Serialize)]
pub struct MetricRow {
    pub r: f64,
    pub t: f64,
    /// Exact Bloch direction of the metric-image state.
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
    /// Entries of rho / tr rho (Hermitian, so four reals suffice).
    pub rho00: f64,
    pub rho01_re: f64,
    pub rho01_im: f64,
    pub rho11: f64,
    /// Reconstructed entries (sampled route unless the scheme is exact).
    pub recon00: f64,
    pub recon01_re: f64,
    pub recon01_im: f64,
    pub recon11: f64,
    /// Entrywise error of the reconstruction against the exact entries.
    pub recon_err: f64,
    /// Entrywise error of the exact-amplitude route, a floor for recon_err.
    pub exact_route_err: f64,
    /// Fit residual of the reconstruction.
    pub residual: f64,
    /// 1 - dominant eigenvalue in the pure-state fit (0 for exact route).
    pub impurity: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Diagnostics {
    /// Worst unitarity defect of the dilation operator, per r.
    pub max_unitarity_defect: BTreeMap<String, f64>,
    /// Calibrated embedding scale, per r (static-embedding scheme only).
    pub naimark_scale: BTreeMap<String, f64>,
    /// First grid time where the static embedding loses validity, per r.
    pub naimark_first_invalid: BTreeMap<String, Option<f64>>,
    /// Rows whose estimate strayed beyond 5 standard errors.
    pub soft_check_violations: Vec<String>,
    /// Skipped rows and other non-fatal events.
    pub warnings: Vec<String>,
}

/// Everything one sweep produced.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub scheme: String,
    pub seed: u64,
    pub shots: u64,
    pub r_values: Vec<f64>,
    pub grid: Vec<f64>,
    pub rows: Vec<ExpectationRow>,
    pub exact_rows: Vec<ExactRow>,
    pub metric_rows: Vec<MetricRow>,
    pub diagnostics: Diagnostics,
}

const AXES: [PauliAxis; 3] = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];

/// Stable per-task seed: a splitmix-style hash of the primary seed and the
/// point's grid indices. Stream separation between measurement settings
/// happens inside the sampler.
pub(crate) fn mix_seed(master: u64, a: u64, b: u64) -> u64 {
    let mut z = master
        .wrapping_add(a.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(b.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn r_key(r: f64) -> String {
    format!("{r}")
}

struct PointOutput {
    rows: Vec<ExpectationRow>,
    exact_rows: Vec<ExactRow>,
    metric_row: Option<MetricRow>,
    defect: Option<f64>,
    warnings: Vec<String>,
}

struct TagPlan {
    tag: StateTag,
    condition: &'static str,
    p_exact: f64,
}

fn metric_entries(m: &crate::linalg::ComplexMatrix) -> [f64; 4] {
    [m[(0, 0)].re, m[(0, 1)].re, m[(0, 1)].im, m[(1, 1)].re]
}

fn entrywise_err(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    // The off-diagonal appears twice in the matrix; once is enough here.
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Estimate one tagged state's Bloch vector from three single-setting
/// records. `None` when the branch came up empty in any setting.
fn estimate_tag(
    records: &[ShotRecord],
    plan: &TagPlan,
) -> Result<Option<([f64; 3], [f64; 3], u64, f64)>> {
    let mut est = [0.0; 3];
    let mut stderr = [0.0; 3];
    let mut n_post = 0u64;
    let mut n_eff = 0.0;
    for (k, record) in records.iter().enumerate() {
        match estimate_pauli(record, 0, plan.condition) {
            Ok(e) => {
                est[k] = e.value;
                stderr[k] = e.stderr;
                if k == 2 {
                    n_post = e.n_post;
                    n_eff = e.n_eff;
                }
            }
            Err(Error::EmptyBranch) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    Ok(Some((est, stderr, n_post, n_eff)))
}

fn sampled_row(
    r: f64,
    t: f64,
    plan: &TagPlan,
    exact: &BlochVector,
    est: [f64; 3],
    stderr: [f64; 3],
    n_post: u64,
    n_eff: f64,
) -> ExpectationRow {
    ExpectationRow {
        r,
        t,
        state: plan.tag.to_string(),
        sx: exact.x,
        sy: exact.y,
        sz: exact.z,
        est_sx: est[0],
        est_sy: est[1],
        est_sz: est[2],
        err_sx: stderr[0],
        err_sy: stderr[1],
        err_sz: stderr[2],
        p_branch: plan.p_exact,
        n_post,
        n_eff,
        n_eff_exact: if plan.p_exact > 0.0 { n_post as f64 / plan.p_exact } else { 0.0 },
    }
}

fn exact_only_row(r: f64, t: f64, tag: StateTag, exact: &BlochVector, p_branch: f64) -> ExpectationRow {
    ExpectationRow {
        r,
        t,
        state: tag.to_string(),
        sx: exact.x,
        sy: exact.y,
        sz: exact.z,
        est_sx: exact.x,
        est_sy: exact.y,
        est_sz: exact.z,
        err_sx: 0.0,
        err_sy: 0.0,
        err_sz: 0.0,
        p_branch,
        n_post: 0,
        n_eff: 0.0,
        n_eff_exact: 0.0,
    }
}

fn pooled_eta_probability(target: &crate::dilation::DilatedTarget) -> Result<f64> {
    Ok(target.branch("01")?.probability + target.branch("11")?.probability)
}

fn build_metric_row(
    r: f64,
    t: f64,
    rho_psi_bloch: &BlochVector,
    exact_normalized: &crate::linalg::ComplexMatrix,
    exact_route: &crate::tomography::MetricEstimate,
    sampled: Option<(&crate::tomography::MetricEstimate, f64)>,
) -> MetricRow {
    let exact = metric_entries(exact_normalized);
    let exact_route_entries = metric_entries(&exact_route.rho_normalized);
    let exact_route_err = entrywise_err(&exact_route_entries, &exact);
    let (recon, residual, impurity) = match sampled {
        Some((est, impurity)) => (metric_entries(&est.rho_normalized), est.residual, impurity),
        None => (exact_route_entries, exact_route.residual, 0.0),
    };
    MetricRow {
        r,
        t,
        sx: rho_psi_bloch.x,
        sy: rho_psi_bloch.y,
        sz: rho_psi_bloch.z,
        rho00: exact[0],
        rho01_re: exact[1],
        rho01_im: exact[2],
        rho11: exact[3],
        recon00: recon[0],
        recon01_re: recon[1],
        recon01_im: recon[2],
        recon11: recon[3],
        recon_err: entrywise_err(&recon, &exact),
        exact_route_err,
        residual,
        impurity,
    }
}

fn evaluate_point(
    config: &ExperimentConfig,
    r: f64,
    h: &Hamiltonian,
    naimark: Option<&NaimarkProtocol>,
    t: f64,
    task_seed: u64,
    psi0: &Amp2,
) -> Result<PointOutput> {
    let t0 = config.t_start;
    let triple = psi_triple(h, t, t0, psi0)?;
    let exact_bloch = three_state_expectations(&triple);
    let exact_rows: Vec<ExactRow> = StateTag::ALL
        .iter()
        .map(|tag| {
            let b = exact_bloch[tag];
            ExactRow { r, t, state: tag.to_string(), sx: b.x, sy: b.y, sz: b.z }
        })
        .collect();

    let mut rows = Vec::new();
    let mut metric_row = None;
    let mut defect = None;
    let mut warnings = Vec::new();

    match config.scheme {
        Scheme::Gbond => {
            let op = two_ancilla_u_tot(h, t, t0)?;
            defect = Some(op.unitarity_defect);
            let target = two_ancilla_exact_target(h, t, t0, psi0)?;
            let state = StateVector::new(target.state.clone())?;
            let records: Vec<ShotRecord> = AXES
                .iter()
                .map(|&axis| {
                    sample_shots(
                        &state,
                        &MeasurementBasis::system_axis(axis, 3),
                        config.shots,
                        task_seed,
                    )
                })
                .collect::<Result<_>>()?;
            let plans = [
                TagPlan { tag: StateTag::Psi, condition: "00", p_exact: target.branch("00")?.probability },
                TagPlan { tag: StateTag::RhoPsi, condition: "10", p_exact: target.branch("10")?.probability },
                TagPlan { tag: StateTag::EtaPsi, condition: "*1", p_exact: pooled_eta_probability(&target)? },
            ];
            for plan in &plans {
                match estimate_tag(&records, plan)? {
                    Some((est, stderr, n_post, n_eff)) => rows.push(sampled_row(
                        r,
                        t,
                        plan,
                        &exact_bloch[&plan.tag],
                        est,
                        stderr,
                        n_post,
                        n_eff,
                    )),
                    None => warnings.push(format!(
                        "r={r} t={t:.4} {}: post-selection branch came up empty",
                        plan.tag
                    )),
                }
            }
        }
        Scheme::Bond => {
            let op = one_ancilla_u_tot(h, t, t0)?;
            defect = Some(op.unitarity_defect);
            let target = one_ancilla_exact_target(h, t, t0, psi0)?;
            let state = StateVector::new(target.state.clone())?;
            let mut records9 = Vec::with_capacity(9);
            for &s_axis in &AXES {
                for &a_axis in &AXES {
                    records9.push(sample_shots(
                        &state,
                        &MeasurementBasis(vec![s_axis, a_axis]),
                        config.shots,
                        task_seed,
                    )?);
                }
            }
            // The ancilla-Z settings double as the Bloch measurements.
            let bloch_records: Vec<ShotRecord> =
                [2usize, 5, 8].iter().map(|&i| records9[i].clone()).collect();
            let plans = [
                TagPlan { tag: StateTag::Psi, condition: "0", p_exact: target.branch("0")?.probability },
                TagPlan { tag: StateTag::RhoPsi, condition: "1", p_exact: target.branch("1")?.probability },
            ];
            for plan in &plans {
                match estimate_tag(&bloch_records, plan)? {
                    Some((est, stderr, n_post, n_eff)) => rows.push(sampled_row(
                        r,
                        t,
                        plan,
                        &exact_bloch[&plan.tag],
                        est,
                        stderr,
                        n_post,
                        n_eff,
                    )),
                    None => warnings.push(format!(
                        "r={r} t={t:.4} {}: post-selection branch came up empty",
                        plan.tag
                    )),
                }
            }

            let rho = metric_closed_form(h, t, t0)?;
            let exact_normalized = rho.scaled_re(1.0 / rho.trace().re);
            match metric_from_bond_state(&target.state, EstimateSource::Exact) {
                Ok(exact_route) => {
                    let sampled = TwoQubitExpectations::from_records(&records9)
                        .and_then(|exp| two_qubit_pure_tomography(&exp))
                        .and_then(|fit| {
                            metric_from_bond_state(&fit.amplitudes, EstimateSource::Shots)
                                .map(|est| (est, fit.impurity))
                        });
                    match sampled {
                        Ok((est, impurity)) => {
                            metric_row = Some(build_metric_row(
                                r,
                                t,
                                &exact_bloch[&StateTag::RhoPsi],
                                &exact_normalized,
                                &exact_route,
                                Some((&est, impurity)),
                            ))
                        }
                        Err(e) => warnings.push(format!(
                            "r={r} t={t:.4}: sampled metric reconstruction failed ({e})"
                        )),
                    }
                }
                Err(e) => warnings.push(format!(
                    "r={r} t={t:.4}: metric reconstruction ill-posed ({e})"
                )),
            }
        }
        Scheme::Naimark => {
            let protocol = naimark.expect("protocol prepared for this scheme");
            let rho = metric_closed_form(h, t, t0)?;
            match protocol.state(&triple.psi, &rho, t) {
                Ok(target) => {
                    let state = StateVector::new(target.state.clone())?;
                    let records: Vec<ShotRecord> = AXES
                        .iter()
                        .map(|&axis| {
                            sample_shots(
                                &state,
                                &MeasurementBasis::system_axis(axis, 2),
                                config.shots,
                                task_seed,
                            )
                        })
                        .collect::<Result<_>>()?;
                    let plan = TagPlan {
                        tag: StateTag::Psi,
                        condition: "0",
                        p_exact: target.branch("0")?.probability,
                    };
                    match estimate_tag(&records, &plan)? {
                        Some((est, stderr, n_post, n_eff)) => rows.push(sampled_row(
                            r,
                            t,
                            &plan,
                            &exact_bloch[&StateTag::Psi],
                            est,
                            stderr,
                            n_post,
                            n_eff,
                        )),
                        None => warnings.push(format!(
                            "r={r} t={t:.4} psi: post-selection branch came up empty"
                        )),
                    }
                }
                Err(Error::NaimarkInvalid { t, min_eig }) => warnings.push(format!(
                    "r={r} t={t:.4}: static embedding out of validity (min eigenvalue {min_eig:.3e}), point skipped"
                )),
                Err(e) => return Err(e),
            }
        }
        Scheme::Exact => {
            let target = two_ancilla_exact_target(h, t, t0, psi0)?;
            let plans = [
                (StateTag::Psi, target.branch("00")?.probability),
                (StateTag::RhoPsi, target.branch("10")?.probability),
                (StateTag::EtaPsi, pooled_eta_probability(&target)?),
            ];
            for (tag, p_branch) in plans {
                rows.push(exact_only_row(r, t, tag, &exact_bloch[&tag], p_branch));
            }

            let bond_target = one_ancilla_exact_target(h, t, t0, psi0)?;
            let rho = metric_closed_form(h, t, t0)?;
            let exact_normalized = rho.scaled_re(1.0 / rho.trace().re);
            match metric_from_bond_state(&bond_target.state, EstimateSource::Exact) {
                Ok(exact_route) => {
                    metric_row = Some(build_metric_row(
                        r,
                        t,
                        &exact_bloch[&StateTag::RhoPsi],
                        &exact_normalized,
                        &exact_route,
                        None,
                    ))
                }
                Err(e) => warnings.push(format!(
                    "r={r} t={t:.4}: metric reconstruction ill-posed ({e})"
                )),
            }
        }
    }

    Ok(PointOutput { rows, exact_rows, metric_row, defect, warnings })
}

/// Execute the configured sweep.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let psi0 = config.psi0_amps()?;
    let grid = config.grid();
    let seed = config.primary_seed();

    let mut diagnostics = Diagnostics::default();

    // Per-r preparation stays outside the parallel sweep: the embedding
    // calibration scans a window once and is then shared by every point.
    let mut preps: Vec<(f64, Hamiltonian, Option<NaimarkProtocol>)> = Vec::new();
    for &r in &config.r_values {
        let h = Hamiltonian::gain_loss_qubit(r);
        let protocol = if config.scheme == Scheme::Naimark {
            let window_end = if r.abs() < 1.0 {
                config.t_stop
            } else {
                (config.t_start + 1.0).min(config.t_stop)
            };
            let protocol = NaimarkProtocol::calibrate(&h, config.t_start, window_end)?;
            let dt = (config.t_stop - config.t_start) / (config.samples - 1) as f64;
            let first_invalid = protocol.first_invalid(&h, config.t_start, config.t_stop, dt)?;
            diagnostics.naimark_scale.insert(r_key(r), protocol.scale());
            diagnostics.naimark_first_invalid.insert(r_key(r), first_invalid);
            if let Some(t_bad) = first_invalid {
                diagnostics.warnings.push(format!(
                    "r={r}: static embedding valid only up to t={t_bad:.4}; later points are skipped"
                ));
            }
            Some(protocol)
        } else {
            None
        };
        preps.push((r, h, protocol));
    }

    let mut items = Vec::with_capacity(preps.len() * grid.len());
    for ri in 0..preps.len() {
        for ti in 0..grid.len() {
            items.push((ri, ti));
        }
    }
    let preps_ref = &preps;
    let grid_ref = &grid;
    let points: Vec<Result<PointOutput>> = exec::map(items, move |(ri, ti)| {
        let (r, h, protocol) = &preps_ref[ri];
        evaluate_point(
            config,
            *r,
            h,
            protocol.as_ref(),
            grid_ref[ti],
            mix_seed(seed, ri as u64, ti as u64),
            &psi0,
        )
    });

    let mut rows = Vec::new();
    let mut exact_rows = Vec::new();
    let mut metric_rows = Vec::new();
    for (idx, point) in points.into_iter().enumerate() {
        let point = point?;
        let r = preps[idx / grid.len()].0;
        if let Some(d) = point.defect {
            let entry = diagnostics.max_unitarity_defect.entry(r_key(r)).or_insert(0.0);
            *entry = entry.max(d);
        }
        rows.extend(point.rows);
        exact_rows.extend(point.exact_rows);
        metric_rows.extend(point.metric_row);
        diagnostics.warnings.extend(point.warnings);
    }

    for row in &rows {
        let checks = [
            ("sx", row.est_sx, row.sx, row.err_sx),
            ("sy", row.est_sy, row.sy, row.err_sy),
            ("sz", row.est_sz, row.sz, row.err_sz),
        ];
        for (label, est, exact, stderr) in checks {
            if (est - exact).abs() > 5.0 * stderr + 1e-12 {
                diagnostics.soft_check_violations.push(format!(
                    "r={} t={:.4} {} {label}: estimate {est:.4} vs exact {exact:.4} exceeds 5 stderr ({stderr:.4})",
                    row.r, row.t, row.state
                ));
            }
        }
    }

    Ok(RunReport {
        scheme: config.scheme.to_string(),
        seed,
        shots: config.shots,
        r_values: config.r_values.clone(),
        grid,
        rows,
        exact_rows,
        metric_rows,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(scheme: Scheme) -> ExperimentConfig {
        ExperimentConfig {
            r_values: vec![0.6, 1.0],
            t_stop: 2.0,
            samples: 5,
            scheme,
            shots: 2048,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn exact_scheme_rows_match_their_references() {
        let report = run(&small_config(Scheme::Exact)).unwrap();
        assert_eq!(report.rows.len(), 2 * 5 * 3);
        for row in &report.rows {
            assert_eq!(row.est_sx, row.sx);
            assert_eq!(row.est_sy, row.sy);
            assert_eq!(row.err_sz, 0.0);
            assert!(row.p_branch > 0.0);
        }
        assert_eq!(report.metric_rows.len(), 2 * 5);
        for m in &report.metric_rows {
            assert!(m.recon_err < 1e-9, "exact route err {}", m.recon_err);
            assert!((m.rho00 + m.rho11 - 1.0).abs() < 1e-12);
        }
        assert!(report.diagnostics.soft_check_violations.is_empty());
    }

    #[test]
    fn gbond_run_produces_three_tags_and_sane_estimates() {
        let report = run(&small_config(Scheme::Gbond)).unwrap();
        assert_eq!(report.rows.len(), 2 * 5 * 3);
        for row in &report.rows {
            assert!(row.n_post > 0);
            assert!((row.n_eff - 2048.0).abs() < 1e-9);
            let sigma = row.err_sy.max(1e-3);
            assert!(
                (row.est_sy - row.sy).abs() < 6.0 * sigma,
                "r={} t={} {}: {} vs {}",
                row.r,
                row.t,
                row.state,
                row.est_sy,
                row.sy
            );
        }
        let defect = report.diagnostics.max_unitarity_defect.values().cloned().fold(0.0, f64::max);
        assert!(defect < 1e-9);
    }

    #[test]
    fn bond_run_reconstructs_the_metric() {
        let mut config = small_config(Scheme::Bond);
        config.shots = 10_000;
        let report = run(&config).unwrap();
        assert_eq!(report.metric_rows.len(), 2 * 5);
        for m in &report.metric_rows {
            assert!(m.exact_route_err < 1e-9);
            assert!(m.recon_err < 3e-2, "r={} t={} err {}", m.r, m.t, m.recon_err);
            assert!(m.impurity < 0.2);
        }
    }

    #[test]
    fn naimark_run_skips_points_outside_validity() {
        let mut config = small_config(Scheme::Naimark);
        config.r_values = vec![0.6, 1.2];
        config.t_stop = 3.0;
        config.samples = 7;
        let report = run(&config).unwrap();
        // Unbroken regime: a psi row at every point.
        let unbroken: Vec<_> = report.rows.iter().filter(|row| row.r == 0.6).collect();
        assert_eq!(unbroken.len(), 7);
        // Broken regime: validity ends early, later points are skipped.
        let broken = report.rows.iter().filter(|row| row.r == 1.2).count();
        assert!(broken < 7);
        assert!(report
            .diagnostics
            .warnings
            .iter()
            .any(|w| w.contains("validity")));
        assert_eq!(report.diagnostics.naimark_scale.len(), 2);
    }

    #[test]
    fn repeat_runs_are_identical() {
        let config = small_config(Scheme::Gbond);
        let a = run(&config).unwrap();
        let b = run(&config).unwrap();
        let ja = serde_json::to_string(&a.rows).unwrap();
        let jb = serde_json::to_string(&b.rows).unwrap();
        assert_eq!(ja, jb);
        let seeded = ExperimentConfig { seeds: vec![18], ..config };
        let c = run(&seeded).unwrap();
        let jc = serde_json::to_string(&c.rows).unwrap();
        assert_ne!(ja, jc);
    }
}
