//! The core is generic over the scalar type; drive a small problem end to
//! end in f32 (at tolerances matching its precision) and check it tracks
//! the f64 solution on the same mesh.

use viscontact::assemble::{assemble_load, assemble_stiffness, assemble_strain_gram, LoadSpec};
use viscontact::contact::contact_trace;
use viscontact::geometry::build_reference_domain;
use viscontact::linalg::{norm2, sub};
use viscontact::material::MaterialModel;
use viscontact::mesh::{free_dof_map, triangulate, Mesh};
use viscontact::scalar::Real;
use viscontact::solver::{run_simulation, SolverConfig, Trajectory};

fn shared_meshes() -> (Mesh<f64>, Mesh<f32>) {
    let m64 = triangulate(&build_reference_domain::<f64>(), 0.55, 0.2).unwrap();
    let m32: Mesh<f32> = m64.cast();
    m32.validate().unwrap();
    (m64, m32)
}

fn drive<T: Real>(mesh: &Mesh<T>, opt_tol: T, n_steps: usize) -> Trajectory<T> {
    let dofs = free_dof_map(mesh);
    let material = MaterialModel::constant_relaxation(
        viscontact::lit(1e4),
        viscontact::lit(0.4),
        viscontact::lit(1e4),
    );
    let contact = contact_trace(mesh, &dofs, viscontact::lit(10.0)).unwrap();
    let mut cfg = SolverConfig::new(viscontact::lit(5.0), n_steps);
    cfg.opt_tol = opt_tol;
    cfg.max_inner_iters = 50_000;
    cfg.vi_probes = 4;
    run_simulation(
        mesh,
        &dofs,
        &material,
        &LoadSpec::vertical_sine(viscontact::lit(10.0)),
        &contact,
        &cfg,
    )
    .unwrap()
}

#[test]
fn f32_simulation_tracks_f64_on_the_same_mesh() {
    let (m64, m32) = shared_meshes();
    let t64 = drive::<f64>(&m64, 1e-10, 5);
    let t32 = drive::<f32>(&m32, 3e-7, 5);
    for (a, b) in t64.steps.iter().zip(t32.steps.iter()) {
        let b64: Vec<f64> = b.u.iter().map(|x| *x as f64).collect();
        let rel = norm2(&sub(&a.u, &b64)) / norm2(&a.u).max(1e-30);
        assert!(rel < 5e-2, "t={}: f32/f64 gap {rel}", a.t);
        // the phases agree: same contact state signs
        assert_eq!(
            a.diag.min_u_nu > 0.0,
            b.diag.min_u_nu > 0.0,
            "t={}: contact phase diverged",
            a.t
        );
    }
}

#[test]
fn f32_assembly_matches_f64_to_single_precision() {
    let (m64, m32) = shared_meshes();
    let dofs = free_dof_map(&m64);
    let mat64 = MaterialModel::constant_relaxation(1e4f64, 0.4, 0.0);
    let k64 = assemble_stiffness(&m64, &dofs, &mat64).unwrap();
    let g64 = assemble_strain_gram(&m64, &dofs);
    let f64v = assemble_load(&m64, &dofs, &LoadSpec::vertical_sine(10.0f64), 1.0);

    let dofs32 = free_dof_map(&m32);
    assert_eq!(dofs32.n_dofs, dofs.n_dofs);
    let mat32 = MaterialModel::constant_relaxation(1e4f32, 0.4, 0.0);
    let k32 = assemble_stiffness(&m32, &dofs32, &mat32).unwrap();
    let g32 = assemble_strain_gram(&m32, &dofs32);
    let f32v = assemble_load(&m32, &dofs32, &LoadSpec::vertical_sine(10.0f32), 1.0);

    let k_scale = k64.vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (a, b) in k64.vals.iter().zip(k32.vals.iter()) {
        assert!((a - *b as f64).abs() <= 1e-4 * k_scale);
    }
    let g_scale = g64.vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (a, b) in g64.vals.iter().zip(g32.vals.iter()) {
        assert!((a - *b as f64).abs() <= 1e-4 * g_scale);
    }
    let f_scale = f64v.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (a, b) in f64v.iter().zip(f32v.iter()) {
        assert!((a - *b as f64).abs() <= 1e-4 * f_scale);
    }
}
