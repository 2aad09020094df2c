//! File outputs: per-step time series, duality diagnostics, deformed-state
//! snapshots and the machine-readable run summary. All floating-point
//! values are written with 17 significant digits so re-parsing is lossless.

use crate::contact::ContactData;
use crate::mesh::{DofMap, Mesh};
use crate::scalar::{lit, Real};
use crate::solver::Trajectory;
use crate::tolerances::TC_GAP;
use crate::verify::{AdmissibilityReport, PerturbationResult};
use std::io::Write;
use std::path::Path;

pub fn fmt17<T: Real>(x: T) -> String {
    format!("{x:.16e}")
}

fn rel<T: Real>(res: T, scale: T) -> T {
    if scale > T::zero() {
        res / scale
    } else {
        T::zero()
    }
}

/// First time, after the initial separation phase, at which every contact
/// node satisfies u_nu >= -gap (contact along the entire boundary).
pub fn t_c<T: Real>(traj: &Trajectory<T>) -> Option<T> {
    let gap = lit::<T>(TC_GAP);
    let mut separated = false;
    for s in &traj.steps {
        if s.diag.min_u_nu < -gap {
            separated = true;
        } else if separated {
            return Some(s.t);
        }
    }
    None
}

pub const TIMESERIES_HEADER: &str = "t,f2y,min_u_nu,min_u_y,max_penetration,contact_force_total,max_sigma_tau,energy_residual,vi_residual,complementarity_max";

/// One row per step of the plot-ready quantities.
pub fn emit_timeseries<T: Real>(traj: &Trajectory<T>, path: &Path) -> std::io::Result<()> {
    let mut out = String::new();
    out.push_str(TIMESERIES_HEADER);
    out.push('\n');
    for s in &traj.steps {
        let d = &s.diag;
        let row = [
            s.t,
            d.f2y,
            d.min_u_nu,
            d.min_u_y,
            d.max_penetration,
            d.contact_force_total,
            d.max_sigma_tau,
            rel(d.energy_residual, d.energy_scale),
            rel((-d.vi_residual).max(T::zero()), d.vi_scale),
            d.complementarity_max,
        ];
        let cols: Vec<String> = row.iter().map(|x| fmt17(*x)).collect();
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)
}

/// Admissibility report rows: the duality certification per step.
pub fn emit_duality_csv<T: Real>(
    reports: &[AdmissibilityReport<T>],
    roundtrip: &[T],
    path: &Path,
) -> std::io::Result<()> {
    let mut out = String::new();
    out.push_str("step,t,sigma_violation,sigma_scale,inclusion_violation,inclusion_scale,energy_residual,energy_scale,complementarity_max,roundtrip_error\n");
    for (r, rt) in reports.iter().zip(roundtrip.iter()) {
        let cols = [
            r.step.to_string(),
            fmt17(r.t),
            fmt17(r.sigma_violation),
            fmt17(r.sigma_scale),
            fmt17(r.inclusion_violation),
            fmt17(r.inclusion_scale),
            fmt17(r.energy_residual),
            fmt17(r.energy_scale),
            fmt17(r.complementarity_max),
            fmt17(*rt),
        ];
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)
}

/// Deformed configuration and fields at one step: the mesh snapshot format
/// followed by `field <name> <count>` blocks.
pub fn emit_snapshot<T: Real>(
    traj: &Trajectory<T>,
    step_index: usize,
    mesh: &Mesh<T>,
    dofs: &DofMap,
    contact: &ContactData<T>,
    path: &Path,
) -> std::io::Result<()> {
    let rec = &traj.steps[step_index];
    let mut out = mesh.export_text();
    out.push_str(&format!("field deformed {}\n", mesh.nodes.len()));
    for (n, p) in mesh.nodes.iter().enumerate() {
        let ux = dofs.dof(n, 0).map(|d| rec.u[d]).unwrap_or_else(T::zero);
        let uy = dofs.dof(n, 1).map(|d| rec.u[d]).unwrap_or_else(T::zero);
        out.push_str(&format!(
            "{n} {} {}\n",
            fmt17(p[0] + ux),
            fmt17(p[1] + uy)
        ));
    }
    out.push_str(&format!("field stress {}\n", rec.sigma.len()));
    for (t, s) in rec.sigma.iter().enumerate() {
        out.push_str(&format!(
            "{t} {} {} {}\n",
            fmt17(s.xx),
            fmt17(s.yy),
            fmt17(s.xy)
        ));
    }
    out.push_str(&format!("field contact {}\n", contact.nodes.len()));
    for (i, cn) in contact.nodes.iter().enumerate() {
        let u_nu = cn.sign * rec.u[cn.dof];
        out.push_str(&format!(
            "{} {} {}\n",
            cn.node,
            fmt17(u_nu),
            fmt17(rec.sigma_nu[i])
        ));
    }
    std::fs::write(path, out)
}

/// One completed run, as the summary reports it.
#[derive(Debug, Clone)]
pub struct RunSummary<T> {
    pub label: String,
    pub t_c: Option<T>,
    pub max_penetration: T,
    pub wall_seconds: f64,
    pub checks: Vec<(&'static str, bool)>,
}

impl<T: Real> RunSummary<T> {
    pub fn all_ok(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }
}

/// Machine-readable `key = value` summary over all runs.
pub fn emit_summary<T: Real>(
    runs: &[RunSummary<T>],
    lipschitz: Option<&[PerturbationResult<T>]>,
    extra_checks: &[(&'static str, bool)],
    config_echo: &str,
    path: &Path,
) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "runs = {}", runs.iter().map(|r| r.label.as_str()).collect::<Vec<_>>().join(","))?;
    for r in runs {
        let p = &r.label;
        match &r.t_c {
            Some(t) => writeln!(f, "{p}.t_c = {}", fmt17(*t))?,
            None => writeln!(f, "{p}.t_c = none")?,
        }
        writeln!(f, "{p}.max_penetration = {}", fmt17(r.max_penetration))?;
        writeln!(f, "{p}.wall_seconds = {:.3}", r.wall_seconds)?;
        for (name, ok) in &r.checks {
            writeln!(f, "{p}.check.{name} = {}", if *ok { "pass" } else { "fail" })?;
        }
    }
    if let Some(results) = lipschitz {
        for r in results {
            writeln!(
                f,
                "lipschitz.ratio[{}] = {}",
                fmt17(r.delta_yield),
                fmt17(r.ratio)
            )?;
        }
    }
    for (name, ok) in extra_checks {
        writeln!(f, "check.{name} = {}", if *ok { "pass" } else { "fail" })?;
    }
    let all = runs.iter().all(|r| r.all_ok()) && extra_checks.iter().all(|(_, ok)| *ok);
    writeln!(f, "all_checks = {}", if all { "pass" } else { "fail" })?;
    for line in config_echo.lines() {
        writeln!(f, "config.{line}")?;
    }
    Ok(())
}
