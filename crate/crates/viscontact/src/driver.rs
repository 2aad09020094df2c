//! Experiment orchestration for the command line: build the mesh once, run
//! the requested mode(s), certify each trajectory and emit all files.

use crate::assemble::{assemble_strain_gram, LoadSpec};
use crate::config::{RunConfig, RunMode};
use crate::contact::{contact_trace, ContactData, ContactError};
use crate::geometry::build_reference_domain;
use crate::mesh::{free_dof_map, triangulate, DofMap, Mesh, MeshError};
use crate::output::{
    emit_duality_csv, emit_snapshot, emit_summary, emit_timeseries, t_c, RunSummary,
};
use crate::solver::{run_simulation, SolverError, Trajectory};
use crate::tolerances as tol;
use crate::verify::{
    certify_trajectory, duality_roundtrip_errors, lipschitz_experiment, GramSolver,
    PerturbationResult, VerifyError,
};
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum DriverError {
    Mesh(MeshError),
    Contact(ContactError),
    Solver(SolverError<f64>),
    Verify(VerifyError),
    Io(std::io::Error),
}

impl std::fmt::Display for DriverError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DriverError::Mesh(e) => write!(f, "mesh: {e}"),
            DriverError::Contact(e) => write!(f, "contact: {e}"),
            DriverError::Solver(e) => write!(f, "solver: {e}"),
            DriverError::Verify(e) => write!(f, "verify: {e}"),
            DriverError::Io(e) => write!(f, "io: {e}"),
        }
    }
}

impl std::error::Error for DriverError {}

impl From<MeshError> for DriverError {
    fn from(e: MeshError) -> Self {
        DriverError::Mesh(e)
    }
}
impl From<ContactError> for DriverError {
    fn from(e: ContactError) -> Self {
        DriverError::Contact(e)
    }
}
impl From<SolverError<f64>> for DriverError {
    fn from(e: SolverError<f64>) -> Self {
        DriverError::Solver(e)
    }
}
impl From<VerifyError> for DriverError {
    fn from(e: VerifyError) -> Self {
        DriverError::Verify(e)
    }
}
impl From<std::io::Error> for DriverError {
    fn from(e: std::io::Error) -> Self {
        DriverError::Io(e)
    }
}

pub struct Execution {
    pub all_ok: bool,
    pub summary_path: PathBuf,
}

struct Workbench {
    mesh: Mesh<f64>,
    dofs: DofMap,
    contact: ContactData<f64>,
    gram: GramSolver<f64>,
    g_mat: crate::linalg::Csr<f64>,
}

fn certified_run(
    bench: &Workbench,
    cfg: &RunConfig<f64>,
    label: &str,
    relaxation: f64,
    out_dir: &Path,
    snapshot_times: &[f64],
) -> Result<(Trajectory<f64>, RunSummary<f64>), DriverError> {
    let start = std::time::Instant::now();
    let material = crate::material::MaterialModel::constant_relaxation(
        cfg.young,
        cfg.poisson,
        relaxation,
    );
    let loads = LoadSpec::vertical_sine(cfg.amplitude);
    let traj = run_simulation(
        &bench.mesh,
        &bench.dofs,
        &material,
        &loads,
        &bench.contact,
        &cfg.solver(),
    )?;
    let reports = certify_trajectory(
        &bench.mesh,
        &bench.dofs,
        &bench.contact,
        &bench.gram,
        &loads,
        &traj,
        cfg.sigma_probes,
        cfg.tau_samples,
        0x5eed,
    )?;
    let roundtrip = duality_roundtrip_errors(
        &bench.mesh,
        &bench.dofs,
        &bench.gram,
        &bench.g_mat,
        &material,
        &traj,
    );

    let run_dir = out_dir.join(label);
    std::fs::create_dir_all(&run_dir)?;
    emit_timeseries(&traj, &run_dir.join("timeseries.csv"))?;
    emit_duality_csv(&reports, &roundtrip, &run_dir.join("duality.csv"))?;
    for &st in snapshot_times {
        if st <= cfg.t_end && st > 0.0 {
            let idx = traj
                .steps
                .iter()
                .enumerate()
                .min_by(|a, b| {
                    (a.1.t - st)
                        .abs()
                        .partial_cmp(&(b.1.t - st).abs())
                        .unwrap()
                })
                .map(|(i, _)| i)
                .unwrap_or(0);
            emit_snapshot(
                &traj,
                idx,
                &bench.mesh,
                &bench.dofs,
                &bench.contact,
                &run_dir.join(format!("snapshot_t{st}.txt")),
            )?;
        }
    }

    // certification gates, all pinned in `tolerances`
    let vi_scale = traj.steps.iter().map(|s| s.diag.vi_scale).fold(0.0, f64::max);
    let vi_ok = traj
        .steps
        .iter()
        .all(|s| s.diag.vi_residual >= -tol::VI_REL * vi_scale);
    let e_scale = traj
        .steps
        .iter()
        .map(|s| s.diag.energy_scale)
        .fold(0.0, f64::max);
    let energy_ok = traj
        .steps
        .iter()
        .all(|s| s.diag.energy_residual <= tol::ENERGY_REL * e_scale);
    let tau_ok = traj
        .steps
        .iter()
        .all(|s| s.diag.max_sigma_tau <= tol::SIGMA_TAU_OVER_F * cfg.yield_limit);
    let compl_ok = traj
        .steps
        .iter()
        .all(|s| s.diag.complementarity_max <= tol::COMPLEMENTARITY_OVER_F * cfg.yield_limit);
    let sigma_ok = reports
        .iter()
        .all(|r| r.sigma_violation >= -tol::SIGMA_MEMBERSHIP_REL * r.sigma_scale);
    let incl_ok = reports
        .iter()
        .all(|r| r.inclusion_violation >= -tol::INCLUSION_REL * r.inclusion_scale);
    let rt_ok = roundtrip.iter().all(|e| *e <= tol::ROUNDTRIP_REL);
    let checks = vec![
        ("vi", vi_ok),
        ("energy", energy_ok),
        ("sigma_tau", tau_ok),
        ("complementarity", compl_ok),
        ("sigma_membership", sigma_ok),
        ("inclusion", incl_ok),
        ("roundtrip", rt_ok),
    ];
    let summary = RunSummary {
        label: label.to_string(),
        t_c: t_c(&traj),
        max_penetration: traj
            .steps
            .iter()
            .map(|s| s.diag.max_penetration)
            .fold(0.0, f64::max),
        wall_seconds: start.elapsed().as_secs_f64(),
        checks,
    };
    Ok((traj, summary))
}

/// Run the configured mode(s), write all outputs under `out_dir`, and
/// return whether every certification gate passed.
pub fn execute(
    cfg: &RunConfig<f64>,
    out_dir: &Path,
    snapshot_times: &[f64],
) -> Result<Execution, DriverError> {
    std::fs::create_dir_all(out_dir)?;
    let domain = build_reference_domain::<f64>();
    let mesh = triangulate(&domain, cfg.h_interior, cfg.h_contact)?;
    let dofs = free_dof_map(&mesh);
    let contact = contact_trace(&mesh, &dofs, cfg.yield_limit)?;
    let g_mat = assemble_strain_gram(&mesh, &dofs);
    let gram = GramSolver::new(&g_mat)?;
    let bench = Workbench {
        mesh,
        dofs,
        contact,
        gram,
        g_mat,
    };

    let mut runs: Vec<RunSummary<f64>> = Vec::new();
    let mut extra_checks: Vec<(&'static str, bool)> = Vec::new();
    let mut lipschitz: Option<Vec<PerturbationResult<f64>>> = None;

    match cfg.mode {
        RunMode::Elastic => {
            let (_, s) = certified_run(&bench, cfg, "elastic", 0.0, out_dir, snapshot_times)?;
            runs.push(s);
        }
        RunMode::Viscoelastic => {
            let (_, s) = certified_run(
                &bench,
                cfg,
                "viscoelastic",
                cfg.relaxation,
                out_dir,
                snapshot_times,
            )?;
            runs.push(s);
        }
        RunMode::Both => {
            let (_, se) = certified_run(&bench, cfg, "elastic", 0.0, out_dir, snapshot_times)?;
            let (_, sv) = certified_run(
                &bench,
                cfg,
                "viscoelastic",
                cfg.relaxation,
                out_dir,
                snapshot_times,
            )?;
            let ordering = match (&sv.t_c, &se.t_c) {
                (Some(tv), Some(te)) => tv < te,
                _ => false,
            };
            extra_checks.push(("tc_ordering", ordering));
            runs.push(se);
            runs.push(sv);
        }
        RunMode::Lipschitz => {
            let (base, s) = certified_run(
                &bench,
                cfg,
                "viscoelastic",
                cfg.relaxation,
                out_dir,
                snapshot_times,
            )?;
            runs.push(s);
            let material = cfg.material();
            let loads = LoadSpec::vertical_sine(cfg.amplitude);
            let perts: Vec<(f64, f64)> = [1e-1, 1e-2, 1e-3]
                .iter()
                .map(|sc| (cfg.yield_limit * sc, cfg.amplitude * sc))
                .collect();
            let results = lipschitz_experiment(
                &bench.mesh,
                &bench.dofs,
                &material,
                &loads,
                &bench.contact,
                &cfg.solver(),
                &bench.gram,
                &bench.g_mat,
                &base,
                &perts,
            )?;
            let ratios: Vec<f64> = results.iter().map(|r| r.ratio).collect();
            let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = ratios.iter().cloned().fold(0.0f64, f64::max);
            extra_checks.push(("lipschitz_spread", lo > 0.0 && hi / lo <= tol::LIPSCHITZ_SPREAD));
            lipschitz = Some(results);
        }
    }

    let echo = format!(
        "mode = {}\nE = {}\nkappa = {}\nF = {}\nb = {}\namplitude = {}\nT_end = {}\nn_steps = {}\nh_interior = {}\nh_contact = {}\nopt_tol = {:e}",
        cfg.mode.name(),
        cfg.young,
        cfg.poisson,
        cfg.yield_limit,
        cfg.relaxation,
        cfg.amplitude,
        cfg.t_end,
        cfg.n_steps,
        cfg.h_interior,
        cfg.h_contact,
        cfg.opt_tol,
    );
    let summary_path = out_dir.join("summary.txt");
    emit_summary(
        &runs,
        lipschitz.as_deref(),
        &extra_checks,
        &echo,
        &summary_path,
    )?;
    let all_ok =
        runs.iter().all(|r| r.all_ok()) && extra_checks.iter().all(|(_, ok)| *ok);
    Ok(Execution {
        all_ok,
        summary_path,
    })
}
