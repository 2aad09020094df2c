//! Per-step minimization of the convex cost over free DOFs, the discrete
//! variational inequality certificate, and the quasistatic time loop.

use crate::assemble::{
    assemble_load, assemble_matrix, assemble_stiffness, assemble_strain_gram, assembly_threads,
    reconstruct_stress_field, LoadSpec,
};
use crate::contact::{
    complementarity_residual, eval_j, nodal_normal_stress, prox_j, prox_j_in_place, ContactData,
};
use crate::history::{convolve_at, history_update, HistoryState};
use crate::linalg::{axpy, dot, norm2, power_iteration, sub, Csr, Rng};
use crate::material::{MaterialError, MaterialModel, RelaxationKernel};
use crate::mesh::{DofMap, Mesh};
use crate::scalar::{lit, Real};
use crate::tensor::Sym2;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    pub t_end: T,
    pub n_steps: usize,
    /// Relative fixed-point residual target.
    pub opt_tol: T,
    pub max_inner_iters: usize,
    /// Forced momentum-reset period; 0 disables (restarts on objective
    /// increase still apply).
    pub restart_period: usize,
    /// Probe count for the per-step variational inequality certificate.
    pub vi_probes: usize,
}

impl<T: Real> SolverConfig<T> {
    pub fn new(t_end: T, n_steps: usize) -> Self {
        SolverConfig {
            t_end,
            n_steps,
            opt_tol: lit(1e-9),
            max_inner_iters: 20_000,
            restart_period: 0,
            vi_probes: 64,
        }
    }

    /// Reference run: T = 5 s in N = 100 steps.
    pub fn reference() -> Self {
        Self::new(lit(5.0), 100)
    }

    pub fn dt(&self) -> T {
        self.t_end / T::from_usize(self.n_steps).unwrap()
    }
}

#[derive(Debug, Clone)]
pub enum SolverError<T> {
    NoConvergence {
        step_index: usize,
        iters: usize,
        residual: T,
        last: Vec<T>,
    },
    Material(MaterialError),
    KernelTooShort {
        have: usize,
        need: usize,
    },
}

impl<T: Real> std::fmt::Display for SolverError<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolverError::NoConvergence {
                step_index,
                iters,
                residual,
                ..
            } => write!(
                f,
                "no convergence at step {step_index} after {iters} iterations (residual {residual:e})"
            ),
            SolverError::Material(e) => write!(f, "{e}"),
            SolverError::KernelTooShort { have, need } => {
                write!(f, "kernel sampled at {have} lags but {need} steps requested")
            }
        }
    }
}

impl<T: Real> std::error::Error for SolverError<T> {}

impl<T: Real> From<MaterialError> for SolverError<T> {
    fn from(e: MaterialError) -> Self {
        SolverError::Material(e)
    }
}

/// Cost of one time step: (1/2) w^T (K + k b G) w + j(w) + (H_prev - f_i)^T w.
#[allow(clippy::too_many_arguments)]
pub fn cost_value<T: Real>(
    w: &[T],
    k_mat: &Csr<T>,
    g_mat: &Csr<T>,
    b: T,
    k: T,
    h_prev: &[T],
    f_i: &[T],
    contact: &ContactData<T>,
) -> T {
    let kw = k_mat.matvec(w);
    let gw = g_mat.matvec(w);
    let half = lit::<T>(0.5);
    let quad = half * (dot(w, &kw) + k * b * dot(w, &gw));
    let lin = dot(h_prev, w) - dot(f_i, w);
    quad + lin + eval_j(w, contact)
}

#[derive(Debug, Clone)]
pub struct NoConvergence<T> {
    pub iters: usize,
    pub residual: T,
    pub last: Vec<T>,
}

/// 1/lambda_max with a margin covering the power-iteration tolerance.
fn spectral_step<T: Real>(s: &Csr<T>) -> T {
    let lmax = power_iteration(s, lit(1e-6), 100_000);
    T::one() / (lmax * lit(1.0 + 1e-5))
}

#[derive(Debug, Clone)]
pub struct StepSolution<T> {
    pub u: Vec<T>,
    pub iters: usize,
    /// Certified fixed-point residual at the returned point.
    pub residual: T,
    /// Objective value per iteration; filled only when requested.
    pub objective_trace: Vec<T>,
}

/// Accelerated proximal gradient with exact prox of the lumped contact
/// term and fixed step 1/lambda_max. Momentum resets when it turns against
/// the descent direction ((y - x_new) . (x_new - x_old) > 0); objective
/// comparisons are noise-dominated near the optimum and would stall the
/// iteration orders of magnitude above the achievable residual.
fn minimize_with_operator<T: Real>(
    s: &Csr<T>,
    lin: &[T],
    contact: &ContactData<T>,
    step: T,
    cfg: &SolverConfig<T>,
    warm: &[T],
    trace: bool,
) -> Result<StepSolution<T>, NoConvergence<T>> {
    let n = s.n;
    let obj = |x: &[T], sx: &[T]| {
        lit::<T>(0.5) * dot(x, sx) + dot(lin, x) + eval_j(x, contact)
    };
    let prox_step = |x: &[T], sx: &[T]| {
        let mut z = x.to_vec();
        for i in 0..n {
            z[i] -= step * (sx[i] + lin[i]);
        }
        prox_j_in_place(&mut z, step, contact);
        z
    };
    let mut x = warm.to_vec();
    let mut sx = s.matvec(&x);
    let mut y = x.clone();
    let mut sy = sx.clone();
    let mut t = T::one();
    let mut objective_trace = Vec::new();
    if trace {
        objective_trace.push(obj(&x, &sx));
    }
    // data-derived reference scale; at most 1, so the returned certificate
    // satisfies res <= opt_tol (1 + |u|). A scale that grows with the data
    // keeps the whole iteration exactly equivariant under load scaling.
    let scale_ref = (step * norm2(lin)).min(T::one());
    for iter in 0..cfg.max_inner_iters {
        // fixed-point residual at x
        let z = prox_step(&x, &sx);
        let res = norm2(&sub(&z, &x));
        if res <= cfg.opt_tol * (scale_ref + norm2(&x)) {
            return Ok(StepSolution {
                u: x,
                iters: iter,
                residual: res,
                objective_trace,
            });
        }
        // accelerated candidate from y
        let w = prox_step(&y, &sy);
        let sw = s.matvec(&w);
        let mut momentum_reset: T = T::zero();
        for i in 0..n {
            momentum_reset += (y[i] - w[i]) * (w[i] - x[i]);
        }
        if momentum_reset > T::zero() {
            t = T::one();
        }
        let four = lit::<T>(4.0);
        let mut t_new = (T::one() + (T::one() + four * t * t).sqrt()) / lit(2.0);
        let mut beta = (t - T::one()) / t_new;
        if cfg.restart_period > 0 && (iter + 1) % cfg.restart_period == 0 {
            t_new = T::one();
            beta = T::zero();
        }
        let mut y_new = w.clone();
        let mut sy_new = sw.clone();
        for i in 0..n {
            y_new[i] += beta * (w[i] - x[i]);
            sy_new[i] += beta * (sw[i] - sx[i]);
        }
        if trace {
            objective_trace.push(obj(&w, &sw));
        }
        x = w;
        sx = sw;
        y = y_new;
        sy = sy_new;
        t = t_new;
    }
    let z = prox_step(&x, &sx);
    let res = norm2(&sub(&z, &x));
    Err(NoConvergence {
        iters: cfg.max_inner_iters,
        residual: res,
        last: x,
    })
}

/// Assemble the step operator K + k b G, pick the spectral step size and
/// minimize the step cost. The standalone entry point used by tests; the
/// time loop reuses the operator across steps.
#[allow(clippy::too_many_arguments)]
pub fn minimize_step<T: Real>(
    k_mat: &Csr<T>,
    g_mat: &Csr<T>,
    b: T,
    k: T,
    h_prev: &[T],
    f_i: &[T],
    warm: &[T],
    contact: &ContactData<T>,
    cfg: &SolverConfig<T>,
) -> Result<Vec<T>, SolverError<T>> {
    minimize_step_traced(k_mat, g_mat, b, k, h_prev, f_i, warm, contact, cfg, false)
        .map(|sol| sol.u)
}

/// As [`minimize_step`], optionally recording the objective per iteration.
#[allow(clippy::too_many_arguments)]
pub fn minimize_step_traced<T: Real>(
    k_mat: &Csr<T>,
    g_mat: &Csr<T>,
    b: T,
    k: T,
    h_prev: &[T],
    f_i: &[T],
    warm: &[T],
    contact: &ContactData<T>,
    cfg: &SolverConfig<T>,
    trace: bool,
) -> Result<StepSolution<T>, SolverError<T>> {
    let s = k_mat.add_scaled(g_mat, k * b);
    let step = spectral_step(&s);
    let lin = sub(h_prev, f_i);
    minimize_with_operator(&s, &lin, contact, step, cfg, warm, trace).map_err(|nc| {
        SolverError::NoConvergence {
            step_index: 0,
            iters: nc.iters,
            residual: nc.residual,
            last: nc.last,
        }
    })
}

/// Most negative violation of the discrete variational inequality over the
/// probe set (0 if none negative), in absolute terms. The memory term at
/// the tested step includes the lag-zero self term.
#[allow(clippy::too_many_arguments)]
pub fn verify_vi<T: Real>(
    u: &[T],
    k_mat: &Csr<T>,
    g_mat: &Csr<T>,
    b: T,
    k: T,
    h_prev: &[T],
    f_i: &[T],
    contact: &ContactData<T>,
    n_probes: usize,
    seed: u64,
) -> T {
    let mut su = k_mat.matvec(u);
    axpy(&mut su, k * b, &g_mat.matvec(u));
    vi_violation(u, &su, h_prev, f_i, contact, n_probes, seed).0
}

/// Returns (most negative violation, magnitude scale of the tested terms).
fn vi_violation<T: Real>(
    u: &[T],
    su: &[T],
    h_prev: &[T],
    f_i: &[T],
    contact: &ContactData<T>,
    n_probes: usize,
    seed: u64,
) -> (T, T) {
    let n = u.len();
    let ju = eval_j(u, contact);
    let mut worst = T::zero();
    let mut scale = T::zero();
    let mut rng = Rng::seed(seed);
    let mut check = |v: &[T]| {
        let d = sub(v, u);
        let a1 = dot(&d, su);
        let a2 = dot(&d, h_prev);
        let a3 = eval_j(v, contact);
        let a5 = dot(&d, f_i);
        let val = a1 + a2 + a3 - ju - a5;
        scale = scale
            .max(a1.abs())
            .max(a2.abs())
            .max(a3)
            .max(ju)
            .max(a5.abs());
        if val < worst {
            worst = val;
        }
    };
    check(&vec![T::zero(); n]);
    let two_u: Vec<T> = u.iter().map(|x| *x + *x).collect();
    check(&two_u);
    for node in &contact.nodes {
        for sign in [T::one(), -T::one()] {
            let mut v = u.to_vec();
            v[node.dof] += sign;
            check(&v);
        }
    }
    for _ in 0..n_probes {
        let v = rng.gaussian_vec::<T>(n);
        check(&v);
    }
    (worst, scale)
}

// ---------------------------------------------------------------------------
// trajectory
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics<T> {
    /// Applied vertical traction amplitude at this step.
    pub f2y: T,
    /// min over contact nodes of u_nu (negative = gap).
    pub min_u_nu: T,
    /// min over contact nodes of the vertical displacement.
    pub min_u_y: T,
    pub max_penetration: T,
    /// sum_p weight_p sigma_nu(p); the total discrete contact force.
    pub contact_force_total: T,
    /// Tangential part of the prox-implied contact reaction (zero by
    /// construction of the frictionless law; regression guard).
    pub max_sigma_tau: T,
    /// |u'Su + u'H + j(u) - f'u| and the magnitude of its largest term.
    pub energy_residual: T,
    pub energy_scale: T,
    /// Most negative VI violation over probes (absolute) and term scale.
    pub vi_residual: T,
    pub vi_scale: T,
    pub complementarity_max: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord<T> {
    pub t: T,
    pub u: Vec<T>,
    /// Per-element reconstructed stress.
    pub sigma: Vec<Sym2<T>>,
    /// Memory load used by this step (previous-step history Riesz vector).
    pub h_prev: Vec<T>,
    /// Nodal contact pressure from the contact-law multiplier (in [-F, 0]).
    pub sigma_nu: Vec<T>,
    /// Nodal normal stress by averaging adjacent element stresses; the
    /// independent reconstruction-route value.
    pub sigma_nu_element: Vec<T>,
    pub diag: StepDiagnostics<T>,
    pub inner_iters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub dt: T,
    pub steps: Vec<StepRecord<T>>,
}

/// Run the quasistatic time loop: assemble the load, minimize the step cost,
/// certify the variational inequality, advance the history and reconstruct
/// stresses. Deterministic for fixed inputs.
pub fn run_simulation<T: Real>(
    mesh: &Mesh<T>,
    dofs: &DofMap,
    material: &MaterialModel<T>,
    loads: &LoadSpec<T>,
    contact: &ContactData<T>,
    cfg: &SolverConfig<T>,
) -> Result<Trajectory<T>, SolverError<T>> {
    material.validate()?;
    if let RelaxationKernel::General(samples) = &material.relaxation {
        if samples.len() < cfg.n_steps {
            return Err(SolverError::KernelTooShort {
                have: samples.len(),
                need: cfg.n_steps,
            });
        }
    }
    let k = cfg.dt();
    let k_mat = assemble_stiffness(mesh, dofs, material)?;
    let g_mat = assemble_strain_gram(mesh, dofs);
    let s = match &material.relaxation {
        RelaxationKernel::ConstantScalar(b) => k_mat.add_scaled(&g_mat, k * *b),
        RelaxationKernel::General(_) => {
            let b0 = assemble_matrix(
                mesh,
                dofs,
                &material.relaxation.at_lag(0),
                assembly_threads(),
            );
            k_mat.add_scaled(&b0, k)
        }
    };
    let step_size = spectral_step(&s);

    let mut history = HistoryState::new(dofs.n_dofs, material.relaxation.clone(), k);
    let mut u_prev = vec![T::zero(); dofs.n_dofs];
    let mut steps = Vec::with_capacity(cfg.n_steps);
    for i in 1..=cfg.n_steps {
        let t_i = k * T::from_usize(i).unwrap();
        let f_i = assemble_load(mesh, dofs, loads, t_i);
        let h_prev = match &material.relaxation {
            RelaxationKernel::ConstantScalar(_) => history.accumulated.clone(),
            RelaxationKernel::General(_) => convolve_at(
                mesh,
                dofs,
                &g_mat,
                history.prefix().expect("general kernel state"),
                &material.relaxation,
                k,
                i,
            ),
        };
        let lin = sub(&h_prev, &f_i);
        let sol = minimize_with_operator(&s, &lin, contact, step_size, cfg, &u_prev, false)
            .map_err(|nc| SolverError::NoConvergence {
                step_index: i,
                iters: nc.iters,
                residual: nc.residual,
                last: nc.last,
            })?;
        let (u, inner_iters) = (sol.u, sol.iters);

        let su = s.matvec(&u);
        let (vi_residual, vi_scale) =
            vi_violation(&u, &su, &h_prev, &f_i, contact, cfg.vi_probes, 0xC0FFEE ^ i as u64);

        history = match &material.relaxation {
            RelaxationKernel::ConstantScalar(_) => {
                history_update(&history, &u, &g_mat).expect("constant kernel")
            }
            RelaxationKernel::General(_) => history.advanced_general(&u, mesh, dofs, &g_mat),
        };
        let sigma = reconstruct_stress_field(&u, &history, mesh, dofs, material)
            .expect("history advanced with this displacement");
        let sigma_nu_element = nodal_normal_stress(mesh, contact, &sigma);

        // contact-law pressure and tangential reaction from the prox
        // structure of the final forward step z = u - step * grad:
        // the multiplier is (z - prox(z)) / step, supported on normal DOFs
        let mut z = u.clone();
        for idx in 0..z.len() {
            z[idx] -= step_size * (su[idx] + lin[idx]);
        }
        let pz = prox_j(&z, step_size, contact);
        let mut max_sigma_tau = T::zero();
        let mut sigma_nu = Vec::with_capacity(contact.nodes.len());
        for cn in &contact.nodes {
            let xdof = dofs
                .dof(cn.node, 0)
                .expect("contact node carries both DOFs");
            let tangential = ((z[xdof] - pz[xdof]) / step_size).abs() / cn.weight;
            max_sigma_tau = max_sigma_tau.max(tangential);
            let multiplier = cn.sign * (z[cn.dof] - pz[cn.dof]) / step_size;
            sigma_nu.push(-multiplier / cn.weight);
        }

        let u_nu = contact.normal_displacements(&u);
        let min_u_nu = u_nu.iter().fold(T::infinity(), |m, &x| m.min(x));
        let min_u_y = contact
            .nodes
            .iter()
            .map(|cn| u[cn.dof])
            .fold(T::infinity(), |m, x| m.min(x));
        let max_penetration = u_nu.iter().fold(T::zero(), |m, &x| m.max(x));
        let contact_force_total = contact
            .nodes
            .iter()
            .zip(sigma_nu.iter())
            .map(|(cn, &s)| cn.weight * s)
            .sum();
        let complementarity_max = complementarity_residual(&u, &sigma_nu, contact)
            .into_iter()
            .fold(T::zero(), |m, x| m.max(x));

        // energy identity u^T S u + u^T H_prev + j(u) - f^T u = 0
        let e1 = dot(&u, &su);
        let e2 = dot(&u, &h_prev);
        let e3 = eval_j(&u, contact);
        let e4 = dot(&u, &f_i);
        let energy_scale = e1.abs().max(e2.abs()).max(e3).max(e4.abs());
        let energy_residual = (e1 + e2 + e3 - e4).abs();

        let f2y = loads.f2y_at(t_i);
        steps.push(StepRecord {
            t: t_i,
            u: u.clone(),
            sigma,
            h_prev,
            sigma_nu,
            sigma_nu_element,
            diag: StepDiagnostics {
                f2y,
                min_u_nu,
                min_u_y,
                max_penetration,
                contact_force_total,
                max_sigma_tau,
                energy_residual,
                energy_scale,
                vi_residual,
                vi_scale,
                complementarity_max,
            },
            inner_iters,
        });
        u_prev = u;
    }
    Ok(Trajectory { dt: k, steps })
}

impl<T: Real> LoadSpec<T> {
    /// Scalar vertical traction amplitude applied at time t (diagnostics).
    pub fn f2y_at(&self, t: T) -> T {
        match &self.traction {
            crate::assemble::Traction::Zero => T::zero(),
            crate::assemble::Traction::VerticalSineOnArc { amplitude } => *amplitude * t.sin(),
            crate::assemble::Traction::ConstantOnGamma2(q) => q[1],
        }
    }
}
