//! Executable duality layer: certifies that the computed displacement
//! trajectory induces a stress trajectory lying in the admissible set, that
//! the strain trajectory solves the normal-cone inclusion, that strains lift
//! back to displacements, and that the solution responds Lipschitz-stably
//! to data perturbations.

use crate::assemble::{
    assemble_load, element_strains, strain_field_vector, LoadSpec, Traction,
};
use crate::contact::{contact_trace, eval_j, ContactData};
use crate::history::{volterra_resolve, VolterraKernel};
use crate::linalg::{dot, Cholesky, Csr, DenseMat, NotPositiveDefinite, Rng};
use crate::linalg::sub;
use crate::material::{MaterialModel, RelaxationKernel};
use crate::mesh::{DofMap, Mesh};
use crate::scalar::{lit, Real};
use crate::solver::{run_simulation, SolverConfig, SolverError, Trajectory};
use crate::tensor::Sym2;

#[derive(Debug, Clone, PartialEq)]
pub enum VerifyError {
    NoAdmissibleSamples,
    SingularGram,
}

impl std::fmt::Display for VerifyError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VerifyError::NoAdmissibleSamples => {
                write!(f, "no admissible stress samples survived the filter")
            }
            VerifyError::SingularGram => write!(f, "strain-Gram matrix is not positive definite"),
        }
    }
}

impl std::error::Error for VerifyError {}

/// Factored strain-Gram matrix; solves G x = b for Riesz lifts and
/// least-squares strain recovery.
pub struct GramSolver<T> {
    chol: Cholesky<T>,
}

impl<T: Real> GramSolver<T> {
    pub fn new(g_mat: &Csr<T>) -> Result<Self, VerifyError> {
        let dense = g_mat.to_dense();
        let chol =
            Cholesky::factor(&dense).map_err(|NotPositiveDefinite| VerifyError::SingularGram)?;
        Ok(GramSolver { chol })
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        self.chol.solve(rhs)
    }
}

/// V-norm of a DOF vector, |v|_V = sqrt(v' G v).
pub fn v_norm<T: Real>(g_mat: &Csr<T>, v: &[T]) -> T {
    dot(v, &g_mat.matvec(v)).max(T::zero()).sqrt()
}

/// Most negative value (and term scale) of
/// (sigma, eps(v))_Q + j(v) - (f, v)_V over the probe set. Nonnegative for
/// every v exactly when sigma lies in the admissible set of the load.
#[allow(clippy::too_many_arguments)]
pub fn check_sigma_admissible<T: Real>(
    mesh: &Mesh<T>,
    dofs: &DofMap,
    contact: &ContactData<T>,
    sigma: &[Sym2<T>],
    f_vec: &[T],
    extra_probes: &[&[T]],
    n_probes: usize,
    seed: u64,
) -> (T, T) {
    let sigma_vec = strain_field_vector(mesh, dofs, sigma);
    let mut worst = T::zero();
    let mut scale = T::zero();
    let mut check = |v: &[T]| {
        let a1 = dot(&sigma_vec, v);
        let a2 = eval_j(v, contact);
        let a3 = dot(f_vec, v);
        let val = a1 + a2 - a3;
        scale = scale.max(a1.abs()).max(a2).max(a3.abs());
        if val < worst {
            worst = val;
        }
    };
    for v in extra_probes {
        check(v);
    }
    let n = dofs.n_dofs;
    let mut rng = Rng::seed(seed);
    // half coordinate directions, half random probes
    let mut v = vec![T::zero(); n];
    let n_coord = (2 * n).min(n_probes / 2);
    for i in 0..n_coord {
        let d = i / 2;
        let s = if i % 2 == 0 { T::one() } else { -T::one() };
        v[d] = s;
        check(&v);
        v[d] = T::zero();
    }
    for _ in n_coord..n_probes {
        let v = rng.gaussian_vec::<T>(n);
        check(&v);
    }
    (worst, scale)
}

/// Admissible stress samples for the inclusion check at step `i`: stresses
/// from other steps translated by the lifted-load shift
/// tau = sigma_j + eps(lift f_i) - eps(lift f_j), each verified through
/// [`check_sigma_admissible`] before use.
#[allow(clippy::too_many_arguments)]
pub fn sample_admissible_taus<T: Real>(
    mesh: &Mesh<T>,
    dofs: &DofMap,
    contact: &ContactData<T>,
    gram: &GramSolver<T>,
    traj: &Trajectory<T>,
    loads: &LoadSpec<T>,
    step: usize,
    n_samples: usize,
    verify_probes: usize,
    seed: u64,
) -> Result<Vec<Vec<Sym2<T>>>, VerifyError> {
    let n_steps = traj.steps.len();
    let rec = &traj.steps[step];
    let f_i = assemble_load(mesh, dofs, loads, rec.t);
    let lift_i = element_strains(mesh, dofs, &gram.solve(&f_i));
    let mut taus = vec![rec.sigma.clone()];
    let stride = (n_steps / n_samples.max(1)).max(1);
    for j in (0..n_steps).step_by(stride) {
        if j == step {
            continue;
        }
        let other = &traj.steps[j];
        let f_j = assemble_load(mesh, dofs, loads, other.t);
        let lift_j = element_strains(mesh, dofs, &gram.solve(&f_j));
        let tau: Vec<Sym2<T>> = other
            .sigma
            .iter()
            .zip(lift_i.iter().zip(lift_j.iter()))
            .map(|(s, (li, lj))| *s + *li - *lj)
            .collect();
        let (viol, scale) = check_sigma_admissible(
            mesh,
            dofs,
            contact,
            &tau,
            &f_i,
            &[&rec.u],
            verify_probes,
            seed ^ j as u64,
        );
        if viol >= -lit::<T>(1e-6) * scale {
            taus.push(tau);
        }
    }
    if taus.is_empty() {
        return Err(VerifyError::NoAdmissibleSamples);
    }
    Ok(taus)
}

/// Most negative value (and scale) of (tau - sigma, omega)_Q over the
/// sampled admissible stresses; certifies the normal-cone inclusion
/// -omega in N_Sigma(sigma) at the discrete level.
pub fn check_inclusion<T: Real>(
    mesh: &Mesh<T>,
    omega: &[Sym2<T>],
    sigma: &[Sym2<T>],
    taus: &[Vec<Sym2<T>>],
) -> Result<(T, T), VerifyError> {
    if taus.is_empty() {
        return Err(VerifyError::NoAdmissibleSamples);
    }
    let mut worst = T::zero();
    let mut scale = T::zero();
    let omega_norm = crate::assemble::q_inner(mesh, omega, omega).sqrt();
    for tau in taus {
        let diff: Vec<Sym2<T>> = tau
            .iter()
            .zip(sigma.iter())
            .map(|(t, s)| *t - *s)
            .collect();
        let val = crate::assemble::q_inner(mesh, &diff, omega);
        let diff_norm = crate::assemble::q_inner(mesh, &diff, &diff).sqrt();
        scale = scale.max(diff_norm * omega_norm);
        if val < worst {
            worst = val;
        }
    }
    Ok((worst, scale))
}

/// Least-squares displacement with the given element strains: the minimizer
/// of sum_T area_T |eps(u)|_T - omega_T|^2, via the strain-Gram normal
/// equations. Exact when omega is the strain of some displacement.
pub fn strain_to_displacement<T: Real>(
    mesh: &Mesh<T>,
    dofs: &DofMap,
    gram: &GramSolver<T>,
    omega: &[Sym2<T>],
) -> Vec<T> {
    gram.solve(&strain_field_vector(mesh, dofs, omega))
}

/// Per-step relative error of the duality roundtrip u -> sigma -> omega -> u:
/// the stored stresses are inverted elementwise by the forward Volterra
/// resolvent (in the Mandel strain space) and lifted back to displacements.
pub fn duality_roundtrip_errors<T: Real>(
    mesh: &Mesh<T>,
    dofs: &DofMap,
    gram: &GramSolver<T>,
    g_mat: &Csr<T>,
    material: &MaterialModel<T>,
    traj: &Trajectory<T>,
) -> Vec<T> {
    let n_steps = traj.steps.len();
    let n_tri = mesh.triangles.len();
    let k = traj.dt;
    // elasticity action as a dense Mandel matrix
    let et = material.elasticity_tensor();
    let rows: Vec<&[T]> = et.m.iter().map(|r| r.as_slice()).collect();
    let a_mandel = DenseMat::from_rows(&rows);
    let kernel = match &material.relaxation {
        RelaxationKernel::ConstantScalar(b) => VolterraKernel::ScalarSamples(vec![*b; n_steps]),
        RelaxationKernel::General(samples) => VolterraKernel::MatrixSamples(
            samples
                .iter()
                .take(n_steps)
                .map(|s| {
                    let rows: Vec<&[T]> = s.m.iter().map(|r| r.as_slice()).collect();
                    DenseMat::from_rows(&rows)
                })
                .collect(),
        ),
    };
    // invert the constitutive map element by element, forward in time
    let mut omega: Vec<Vec<Sym2<T>>> = vec![vec![Sym2::zero(); n_tri]; n_steps];
    for t in 0..n_tri {
        let g: Vec<Vec<T>> = traj
            .steps
            .iter()
            .map(|s| s.sigma[t].to_mandel().to_vec())
            .collect();
        let w = volterra_resolve(&a_mandel, &kernel, &g, k)
            .expect("elasticity tensor is positive definite");
        for (i, wi) in w.into_iter().enumerate() {
            omega[i][t] = Sym2::from_mandel([wi[0], wi[1], wi[2]]);
        }
    }
    // lift each strain field back and compare
    traj.steps
        .iter()
        .zip(omega.iter())
        .map(|(rec, om)| {
            let u_rec = strain_to_displacement(mesh, dofs, gram, om);
            let err = v_norm(g_mat, &sub(&u_rec, &rec.u));
            let denom = v_norm(g_mat, &rec.u).max(lit(1e-12));
            err / denom
        })
        .collect()
}

/// Per-step certification record emitted into the run diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport<T> {
    pub step: usize,
    pub t: T,
    pub sigma_violation: T,
    pub sigma_scale: T,
    pub inclusion_violation: T,
    pub inclusion_scale: T,
    pub energy_residual: T,
    pub energy_scale: T,
    pub complementarity_max: T,
}

/// Run the full per-step duality certification over a completed trajectory.
#[allow(clippy::too_many_arguments)]
pub fn certify_trajectory<T: Real>(
    mesh: &Mesh<T>,
    dofs: &DofMap,
    contact: &ContactData<T>,
    gram: &GramSolver<T>,
    loads: &LoadSpec<T>,
    traj: &Trajectory<T>,
    sigma_probes: usize,
    tau_samples: usize,
    seed: u64,
) -> Result<Vec<AdmissibilityReport<T>>, VerifyError> {
    let mut reports = Vec::with_capacity(traj.steps.len());
    for (i, rec) in traj.steps.iter().enumerate() {
        let f_i = assemble_load(mesh, dofs, loads, rec.t);
        let (sigma_violation, sigma_scale) = check_sigma_admissible(
            mesh,
            dofs,
            contact,
            &rec.sigma,
            &f_i,
            &[&rec.u],
            sigma_probes,
            seed ^ (i as u64).wrapping_mul(0x9e37),
        );
        let taus = sample_admissible_taus(
            mesh,
            dofs,
            contact,
            gram,
            traj,
            loads,
            i,
            tau_samples,
            sigma_probes.min(64),
            seed ^ 0xA5A5 ^ i as u64,
        )?;
        let omega = element_strains(mesh, dofs, &rec.u);
        let (inclusion_violation, inclusion_scale) =
            check_inclusion(mesh, &omega, &rec.sigma, &taus)?;
        reports.push(AdmissibilityReport {
            step: i,
            t: rec.t,
            sigma_violation,
            sigma_scale,
            inclusion_violation,
            inclusion_scale,
            energy_residual: rec.diag.energy_residual,
            energy_scale: rec.diag.energy_scale,
            complementarity_max: rec.diag.complementarity_max,
        });
    }
    Ok(reports)
}

// ---------------------------------------------------------------------------
// Lipschitz stability experiment
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationResult<T> {
    /// Perturbation of the yield limit (Pa).
    pub delta_yield: T,
    /// Perturbation of the traction amplitude (N/m^2).
    pub delta_amplitude: T,
    /// |dF|_{L2(Gamma3)} + max_i |df_i|_V.
    pub data_norm: T,
    /// max_i |u_i - u_i'|_V.
    pub response_norm: T,
    pub ratio: T,
}

/// Rerun the simulation under perturbed data (F + dF, amplitude + da) and
/// measure the response-to-data ratio; Lipschitz dependence bounds the
/// ratios across perturbation scales by a common constant.
#[allow(clippy::too_many_arguments)]
pub fn lipschitz_experiment<T: Real>(
    mesh: &Mesh<T>,
    dofs: &DofMap,
    material: &MaterialModel<T>,
    loads: &LoadSpec<T>,
    contact: &ContactData<T>,
    cfg: &SolverConfig<T>,
    gram: &GramSolver<T>,
    g_mat: &Csr<T>,
    base: &Trajectory<T>,
    perturbations: &[(T, T)],
) -> Result<Vec<PerturbationResult<T>>, SolverError<T>> {
    let base_yield = contact
        .nodes
        .first()
        .map(|n| n.yield_limit)
        .unwrap_or_else(T::zero);
    let base_amp = match &loads.traction {
        Traction::VerticalSineOnArc { amplitude } => *amplitude,
        _ => T::zero(),
    };
    let mut out = Vec::with_capacity(perturbations.len());
    for &(d_yield, d_amp) in perturbations {
        let contact_p = contact_trace(mesh, dofs, base_yield + d_yield)
            .expect("contact trace on the same mesh");
        let loads_p = LoadSpec::vertical_sine(base_amp + d_amp);
        let traj_p = run_simulation(mesh, dofs, material, &loads_p, &contact_p, cfg)?;
        let mut response_norm = T::zero();
        for (a, b) in base.steps.iter().zip(traj_p.steps.iter()) {
            response_norm = response_norm.max(v_norm(g_mat, &sub(&a.u, &b.u)));
        }
        // |dF|_{L2} over the contact boundary (constant perturbation)
        let df_norm = d_yield.abs() * contact.total_weight().sqrt();
        // max_i |df_i|_V via the Riesz lift of the load difference
        let mut dload_norm = T::zero();
        for rec in &base.steps {
            let f_a = assemble_load(mesh, dofs, loads, rec.t);
            let f_b = assemble_load(mesh, dofs, &loads_p, rec.t);
            let d = sub(&f_b, &f_a);
            let lift = gram.solve(&d);
            dload_norm = dload_norm.max(dot(&d, &lift).max(T::zero()).sqrt());
        }
        let data_norm = df_norm + dload_norm;
        let ratio = if data_norm > T::zero() {
            response_norm / data_norm
        } else {
            T::zero()
        };
        out.push(PerturbationResult {
            delta_yield: d_yield,
            delta_amplitude: d_amp,
            data_norm,
            response_norm,
            ratio,
        });
    }
    Ok(out)
}
