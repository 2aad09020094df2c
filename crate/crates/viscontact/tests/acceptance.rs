//! Acceptance suite: runs the reference configuration end to end and checks
//! every certification gate at its pinned tolerance, printing one pass/fail
//! line per criterion (visible with `cargo test --test acceptance -- --nocapture`).

use std::sync::LazyLock;
use std::time::Instant;
use viscontact::assemble::{assemble_strain_gram, LoadSpec};
use viscontact::contact::{contact_trace, ContactData};
use viscontact::geometry::build_reference_domain;
use viscontact::history::{
    convolve_full, history_update, volterra_apply, volterra_resolve, HistoryState, VolterraKernel,
};
use viscontact::linalg::{dot, norm2, sub, Csr, DenseMat, Rng};
use viscontact::material::{MaterialModel, RelaxationKernel};
use viscontact::mesh::{free_dof_map, triangulate, DofMap, Mesh};
use viscontact::oracle;
use viscontact::solver::{run_simulation, SolverConfig, Trajectory};
use viscontact::tolerances as tol;
use viscontact::verify::{
    certify_trajectory, duality_roundtrip_errors, lipschitz_experiment, v_norm, GramSolver,
};

fn criterion(id: &str, ok: bool, detail: &str) {
    println!("[{id}] {} - {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{id} failed: {detail}");
}

struct Bench {
    mesh: Mesh<f64>,
    dofs: DofMap,
    contact: ContactData<f64>,
    g_mat: Csr<f64>,
    gram: GramSolver<f64>,
}

fn build_bench(h_interior: f64, h_contact: f64) -> Bench {
    let domain = build_reference_domain::<f64>();
    let mesh = triangulate(&domain, h_interior, h_contact).expect("reference mesh");
    let dofs = free_dof_map(&mesh);
    let contact = contact_trace(&mesh, &dofs, 10.0).expect("contact trace");
    let g_mat = assemble_strain_gram(&mesh, &dofs);
    let gram = GramSolver::new(&g_mat).expect("gram factorization");
    Bench {
        mesh,
        dofs,
        contact,
        g_mat,
        gram,
    }
}

fn reference_cfg(n_steps: usize, opt_tol: f64) -> SolverConfig<f64> {
    let mut cfg = SolverConfig::new(5.0, n_steps);
    cfg.opt_tol = opt_tol;
    cfg.max_inner_iters = 200_000;
    cfg.vi_probes = 64;
    cfg
}

fn run(bench: &Bench, b: f64, cfg: &SolverConfig<f64>) -> Trajectory<f64> {
    let material = MaterialModel::constant_relaxation(1e4, 0.4, b);
    run_simulation(
        &bench.mesh,
        &bench.dofs,
        &material,
        &LoadSpec::vertical_sine(10.0),
        &bench.contact,
        cfg,
    )
    .expect("simulation completes")
}

static REFERENCE: LazyLock<Bench> = LazyLock::new(|| build_bench(0.275, 0.06));

/// The reference viscoelastic run plus its wall-clock time.
static VISCO: LazyLock<(Trajectory<f64>, f64)> = LazyLock::new(|| {
    let start = Instant::now();
    let traj = run(&REFERENCE, 1e4, &reference_cfg(100, tol::CERTIFIED_OPT_TOL));
    (traj, start.elapsed().as_secs_f64())
});

static ELASTIC: LazyLock<Trajectory<f64>> =
    LazyLock::new(|| run(&REFERENCE, 0.0, &reference_cfg(100, tol::CERTIFIED_OPT_TOL)));

static VISCO_200: LazyLock<Trajectory<f64>> =
    LazyLock::new(|| run(&REFERENCE, 1e4, &reference_cfg(200, 1e-11)));

static VISCO_400: LazyLock<Trajectory<f64>> =
    LazyLock::new(|| run(&REFERENCE, 1e4, &reference_cfg(400, 1e-11)));

fn step_at(traj: &Trajectory<f64>, t: f64) -> &viscontact::solver::StepRecord<f64> {
    traj.steps
        .iter()
        .min_by(|a, b| (a.t - t).abs().partial_cmp(&(b.t - t).abs()).unwrap())
        .unwrap()
}

#[test]
fn a1_reference_run_completes_within_budget() {
    let (traj, wall) = &*VISCO;
    let vi_scale = traj
        .steps
        .iter()
        .map(|s| s.diag.vi_scale)
        .fold(0.0, f64::max);
    let worst = traj
        .steps
        .iter()
        .map(|s| s.diag.vi_residual)
        .fold(0.0, f64::min);
    let vi_ok = worst >= -tol::VI_REL * vi_scale;
    let time_ok = *wall <= tol::WALL_CLOCK_BUDGET;
    criterion(
        "A1",
        traj.steps.len() == 100 && vi_ok && time_ok,
        &format!(
            "100 steps, worst VI violation {worst:.3e} vs scale {vi_scale:.3e} (rel {:.3e}), wall {wall:.1} s",
            -worst / vi_scale
        ),
    );
}

#[test]
fn a2_relaxation_orders_full_contact_times() {
    let tc_v = viscontact::output::t_c(&VISCO.0).expect("viscoelastic run reaches full contact");
    let tc_e = viscontact::output::t_c(&ELASTIC).expect("elastic run reaches full contact");
    let ok = tc_v < 2.75 + tol::TC_MARGIN && tc_e > 2.75 - tol::TC_MARGIN && tc_v < tc_e;
    criterion(
        "A2",
        ok,
        &format!("t_c(viscoelastic) = {tc_v:.2} s < 2.75 s < t_c(elastic) = {tc_e:.2} s"),
    );
}

#[test]
fn a3_yield_saturation_at_late_times() {
    let (traj, _) = &*VISCO;
    let mut ok = true;
    let mut detail = String::new();
    for t in [4.0, 5.0] {
        let rec = step_at(traj, t);
        let pen_ok = REFERENCE
            .contact
            .normal_displacements(&rec.u)
            .iter()
            .all(|&v| v > tol::TC_GAP);
        let worst = rec
            .sigma_nu
            .iter()
            .map(|s| (s + 10.0).abs())
            .fold(0.0, f64::max);
        let sat_ok = worst <= tol::YIELD_SATURATION_REL * 10.0;
        ok &= pen_ok && sat_ok;
        detail.push_str(&format!(
            "t={t}: all penetrating {pen_ok}, max |sigma_nu + F| = {worst:.2e}; "
        ));
    }
    criterion("A3", ok, &detail);
}

#[test]
fn a4_separation_at_t_1_5() {
    let (traj, _) = &*VISCO;
    let rec = step_at(traj, 1.5);
    let sep_ok = REFERENCE
        .contact
        .normal_displacements(&rec.u)
        .iter()
        .all(|&v| v < 0.0);
    let worst = rec.sigma_nu.iter().map(|s| s.abs()).fold(0.0, f64::max);
    let stress_ok = worst <= tol::SEPARATION_SIGMA_OVER_F * 10.0;
    criterion(
        "A4",
        sep_ok && stress_ok,
        &format!("all u_nu < 0: {sep_ok}, max |sigma_nu| = {worst:.2e} <= 0.05"),
    );
}

#[test]
fn a5_frictionless_tangential_traction() {
    let (traj, _) = &*VISCO;
    let worst = traj
        .steps
        .iter()
        .map(|s| s.diag.max_sigma_tau)
        .fold(0.0, f64::max);
    criterion(
        "A5",
        worst <= tol::SIGMA_TAU_OVER_F * 10.0,
        &format!("max |sigma_tau| = {worst:.3e} <= 1e-7"),
    );
}

#[test]
fn a6_duality_suite() {
    let (traj, _) = &*VISCO;
    let bench = &*REFERENCE;
    // energy identity at every step
    let e_scale = traj
        .steps
        .iter()
        .map(|s| s.diag.energy_scale)
        .fold(0.0, f64::max);
    let worst_e = traj
        .steps
        .iter()
        .map(|s| s.diag.energy_residual)
        .fold(0.0, f64::max);
    let energy_ok = worst_e <= tol::ENERGY_REL * e_scale;
    // admissibility + inclusion with >= 500 probes per step
    let reports = certify_trajectory(
        &bench.mesh,
        &bench.dofs,
        &bench.contact,
        &bench.gram,
        &LoadSpec::vertical_sine(10.0),
        traj,
        600,
        6,
        2024,
    )
    .expect("certification completes");
    let worst_sigma = reports
        .iter()
        .map(|r| {
            if r.sigma_scale > 0.0 {
                r.sigma_violation / r.sigma_scale
            } else {
                0.0
            }
        })
        .fold(0.0, f64::min);
    let sigma_ok = worst_sigma >= -tol::SIGMA_MEMBERSHIP_REL;
    let worst_incl = reports
        .iter()
        .map(|r| {
            if r.inclusion_scale > 0.0 {
                r.inclusion_violation / r.inclusion_scale
            } else {
                0.0
            }
        })
        .fold(0.0, f64::min);
    let incl_ok = worst_incl >= -tol::INCLUSION_REL;
    // roundtrip u -> sigma -> omega -> u
    let material = MaterialModel::constant_relaxation(1e4, 0.4, 1e4);
    let errs = duality_roundtrip_errors(
        &bench.mesh,
        &bench.dofs,
        &bench.gram,
        &bench.g_mat,
        &material,
        traj,
    );
    let worst_rt = errs.iter().cloned().fold(0.0, f64::max);
    let rt_ok = worst_rt <= tol::ROUNDTRIP_REL;
    criterion(
        "A6",
        energy_ok && sigma_ok && incl_ok && rt_ok,
        &format!(
            "energy rel {:.2e}, membership rel {worst_sigma:.2e}, inclusion rel {worst_incl:.2e}, roundtrip {worst_rt:.2e}",
            worst_e / e_scale
        ),
    );
}

#[test]
fn a7_complementarity_reference_and_refined() {
    let (traj, _) = &*VISCO;
    let worst = traj
        .steps
        .iter()
        .map(|s| s.diag.complementarity_max)
        .fold(0.0, f64::max);
    let base_ok = worst <= tol::COMPLEMENTARITY_OVER_F * 10.0;
    // one refinement of both mesh sizes
    let refined = build_bench(0.1375, 0.03);
    let traj_r = run(&refined, 1e4, &reference_cfg(100, 1e-11));
    let worst_r = traj_r
        .steps
        .iter()
        .map(|s| s.diag.complementarity_max)
        .fold(0.0, f64::max);
    let refined_ok = worst_r <= tol::COMPLEMENTARITY_OVER_F_REFINED * 10.0;
    criterion(
        "A7",
        base_ok && refined_ok,
        &format!("reference mesh {worst:.2e} <= 0.1, refined {worst_r:.2e} <= 0.01"),
    );
}

#[test]
fn a8_history_oracles() {
    // recursion vs full convolution on 50-step random trajectories
    let mesh = triangulate(&build_reference_domain::<f64>(), 0.55, 0.2).unwrap();
    let dofs = free_dof_map(&mesh);
    let g_mat = assemble_strain_gram(&mesh, &dofs);
    let kernel = RelaxationKernel::ConstantScalar(1e4);
    let k = 0.05;
    let mut rng = Rng::seed(88);
    let mut worst_rel = 0.0f64;
    for _ in 0..3 {
        let mut state = HistoryState::new(dofs.n_dofs, kernel.clone(), k);
        let mut prefix: Vec<Vec<f64>> = Vec::new();
        for _ in 0..50 {
            let u = rng.gaussian_vec::<f64>(dofs.n_dofs);
            state = history_update(&state, &u, &g_mat).unwrap();
            prefix.push(u);
        }
        let full = convolve_full(&mesh, &dofs, &g_mat, &prefix, &kernel, k);
        let rel = norm2(&sub(&state.accumulated, &full)) / norm2(&full);
        worst_rel = worst_rel.max(rel);
    }
    let recursion_ok = worst_rel <= tol::HISTORY_REL;

    // resolvent composition identity on 20 random SPD Volterra systems
    let mut worst_comp = 0.0f64;
    for trial in 0..20 {
        let n = 3 + (trial % 18);
        let steps = 10 + 2 * (trial % 20);
        let mut b = DenseMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                *b.at_mut(i, j) = rng.gaussian::<f64>();
            }
        }
        let mut a = DenseMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += b.at(l, i) * b.at(l, j);
                }
                *a.at_mut(i, j) = acc + if i == j { n as f64 } else { 0.0 };
            }
        }
        let k = 0.1 + 0.05 * (trial % 5) as f64;
        let kernel = VolterraKernel::ScalarSamples(
            (0..steps).map(|l| 2.0 * (-(l as f64) * k).exp()).collect(),
        );
        let g: Vec<Vec<f64>> = (0..steps).map(|_| rng.gaussian_vec(n)).collect();
        let u = volterra_resolve(&a, &kernel, &g, k).unwrap();
        let back = volterra_apply(&a, &kernel, &u, k);
        for (gi, bi) in g.iter().zip(back.iter()) {
            worst_comp = worst_comp.max(norm2(&sub(gi, bi)) / norm2(gi).max(1e-300));
        }
        let us: Vec<Vec<f64>> = (0..steps).map(|_| rng.gaussian_vec(n)).collect();
        let gu = volterra_apply(&a, &kernel, &us, k);
        let ub = volterra_resolve(&a, &kernel, &gu, k).unwrap();
        for (ui, bi) in us.iter().zip(ub.iter()) {
            worst_comp = worst_comp.max(norm2(&sub(ui, bi)) / norm2(ui).max(1e-300));
        }
    }
    let comp_ok = worst_comp <= tol::VOLTERRA_REL;
    criterion(
        "A8",
        recursion_ok && comp_ok,
        &format!("recursion vs convolution rel {worst_rel:.2e} <= 1e-12, composition rel {worst_comp:.2e} <= 1e-10"),
    );
}

#[test]
fn a9_prox_grid_oracle() {
    let mut rng = Rng::seed(909);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let z = 10.0 * (rng.uniform::<f64>() - 0.5);
        let alpha = 4.0 * rng.uniform::<f64>();
        let exact = oracle::prox_scalar(z, alpha);
        let brute = oracle::prox_scalar_grid(z, alpha, 1e-6);
        worst = worst.max((exact - brute).abs());
    }
    criterion(
        "A9",
        worst <= tol::PROX_ABS,
        &format!("max |prox - grid argmin| = {worst:.2e} over 1000 pairs"),
    );
}

#[test]
fn a10_lipschitz_stability() {
    let bench = &*REFERENCE;
    let (base, _) = &*VISCO;
    let material = MaterialModel::constant_relaxation(1e4, 0.4, 1e4);
    let loads = LoadSpec::vertical_sine(10.0);
    let cfg = reference_cfg(100, tol::CERTIFIED_OPT_TOL);
    let perts: Vec<(f64, f64)> = [1e-1, 1e-2, 1e-3]
        .iter()
        .map(|s| (10.0 * s, 10.0 * s))
        .collect();
    let results = lipschitz_experiment(
        &bench.mesh,
        &bench.dofs,
        &material,
        &loads,
        &bench.contact,
        &cfg,
        &bench.gram,
        &bench.g_mat,
        base,
        &perts,
    )
    .expect("perturbed runs complete");
    let ratios: Vec<f64> = results.iter().map(|r| r.ratio).collect();
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0f64, f64::max);
    let spread_ok = lo > 0.0 && hi / lo <= tol::LIPSCHITZ_SPREAD;

    // exact lambda-scaling equivariance in the elastic case
    let lam = 2.0;
    let contact2 = contact_trace(&bench.mesh, &bench.dofs, 10.0 * lam).unwrap();
    let elastic = MaterialModel::constant_relaxation(1e4, 0.4, 0.0);
    let scaled = run_simulation(
        &bench.mesh,
        &bench.dofs,
        &elastic,
        &LoadSpec::vertical_sine(10.0 * lam),
        &contact2,
        &cfg,
    )
    .expect("scaled elastic run");
    let mut worst_scaling = 0.0f64;
    for (a, b) in ELASTIC.steps.iter().zip(scaled.steps.iter()) {
        let expect: Vec<f64> = a.u.iter().map(|x| lam * x).collect();
        let err = viscontact::linalg::norm_inf(&sub(&b.u, &expect));
        let scale = viscontact::linalg::norm_inf(&expect).max(1e-300);
        worst_scaling = worst_scaling.max(err / scale);
    }
    let scaling_ok = worst_scaling <= tol::SCALING_REL;
    criterion(
        "A10",
        spread_ok && scaling_ok,
        &format!(
            "ratios {:?} spread {:.2}, lambda-scaling err {worst_scaling:.2e}",
            ratios
                .iter()
                .map(|r| format!("{r:.3e}"))
                .collect::<Vec<_>>(),
            hi / lo
        ),
    );
}

#[test]
fn a11_time_refinement_consistency() {
    let bench = &*REFERENCE;
    let (u100, _) = &*VISCO;
    let u200 = &*VISCO_200;
    let u400 = &*VISCO_400;
    let diff = |coarse: &Trajectory<f64>, fine: &Trajectory<f64>| {
        let ratio = fine.steps.len() / coarse.steps.len();
        coarse
            .steps
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let f = &fine.steps[(i + 1) * ratio - 1];
                assert!((f.t - s.t).abs() < 1e-9);
                v_norm(&bench.g_mat, &sub(&s.u, &f.u))
            })
            .fold(0.0f64, f64::max)
    };
    let d1 = diff(u100, u200);
    let d2 = diff(u200, u400);
    let ok = d1 >= tol::REFINEMENT_GAIN * d2;
    criterion(
        "A11",
        ok,
        &format!("sup |u100 - u200|_V = {d1:.3e}, sup |u200 - u400|_V = {d2:.3e}, gain {:.2}", d1 / d2),
    );
}

#[test]
fn cross_route_nodal_stress_agreement_at_interior_nodes() {
    // the element-stress route tracks the contact-law pressure at interior
    // contact nodes (the boundary-transition node is excluded: the continuum
    // traction is discontinuous there)
    let (traj, _) = &*VISCO;
    let bench = &*REFERENCE;
    let rec = step_at(traj, 4.0);
    let mut worst = 0.0f64;
    for (i, cn) in bench.contact.nodes.iter().enumerate() {
        let x = bench.mesh.nodes[cn.node][0];
        if x > 4.15 && x < 4.95 {
            worst = worst.max((rec.sigma_nu[i] - rec.sigma_nu_element[i]).abs());
        }
    }
    criterion(
        "cross-route",
        worst <= 0.05 * 10.0,
        &format!("interior nodal agreement {worst:.3} Pa <= 0.5"),
    );
}

#[test]
fn stress_memory_term_needed_for_admissibility() {
    // removing the memory part of the stress breaks the balance: sanity
    // oracle that the membership check has teeth on the reference run
    let (traj, _) = &*VISCO;
    let bench = &*REFERENCE;
    let rec = step_at(traj, 2.75);
    let material = MaterialModel::constant_relaxation(1e4, 0.4, 1e4);
    let elastic_only: Vec<viscontact::tensor::Sym2<f64>> = (0..bench.mesh.triangles.len())
        .map(|t| {
            viscontact::material::elasticity_apply(
                &viscontact::assemble::element_strain(&bench.mesh, &bench.dofs, t, &rec.u),
                &material,
            )
        })
        .collect();
    let f = viscontact::assemble::assemble_load(
        &bench.mesh,
        &bench.dofs,
        &LoadSpec::vertical_sine(10.0),
        rec.t,
    );
    let (viol, scale) = viscontact::verify::check_sigma_admissible(
        &bench.mesh,
        &bench.dofs,
        &bench.contact,
        &elastic_only,
        &f,
        &[&rec.u],
        500,
        7,
    );
    criterion(
        "memory-sanity",
        viol < -1e-3 * scale,
        &format!("elastic-only stress violation {viol:.3e} vs scale {scale:.3e}"),
    );
}

#[test]
fn determinism_of_the_reference_run() {
    let (traj, _) = &*VISCO;
    let again = run(&REFERENCE, 1e4, &reference_cfg(100, tol::CERTIFIED_OPT_TOL));
    criterion(
        "determinism",
        *traj == again,
        "bit-identical trajectory on rerun",
    );
}

#[test]
fn energy_balance_terms_match_q_inner_product() {
    // (sigma_i, eps(u_i))_Q equals u'Su + u'H at the discrete level
    let (traj, _) = &*VISCO;
    let bench = &*REFERENCE;
    let material = MaterialModel::constant_relaxation(1e4, 0.4, 1e4);
    let k_mat =
        viscontact::assemble::assemble_stiffness(&bench.mesh, &bench.dofs, &material).unwrap();
    for t_probe in [1.0, 2.5, 4.5] {
        let rec = step_at(traj, t_probe);
        let omega = viscontact::assemble::element_strains(&bench.mesh, &bench.dofs, &rec.u);
        let lhs = viscontact::assemble::q_inner(&bench.mesh, &rec.sigma, &omega);
        let su = {
            let mut v = k_mat.matvec(&rec.u);
            let gw = bench.g_mat.matvec(&rec.u);
            for (a, b) in v.iter_mut().zip(gw.iter()) {
                *a += 0.05 * 1e4 * b;
            }
            v
        };
        let rhs = dot(&rec.u, &su) + dot(&rec.u, &rec.h_prev);
        assert!(
            (lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0),
            "t={t_probe}: {lhs} vs {rhs}"
        );
    }
    criterion("energy-terms", true, "(sigma, eps(u))_Q = u'Su + u'H at probed steps");
}
