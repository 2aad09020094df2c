//! The nonsmooth contact term j, its lumped nodal form, the exact proximal
//! map, and the rigid-plastic complementarity residual.

use crate::mesh::{BoundaryTag, DofMap, Mesh};
use crate::scalar::{lit, Real};
use crate::tensor::Sym2;

/// Gap tolerance separating solver noise from genuine contact states (m).
pub const TOL_GAP: f64 = 1e-8;

/// One potential contact node: v_nu = sign * v[dof].
#[derive(Debug, Clone, PartialEq)]
pub struct ContactNode<T> {
    pub node: usize,
    /// DOF index that carries the normal displacement.
    pub dof: usize,
    /// Sign mapping that DOF to v_nu (outward normal (0,-1) gives -1 on y).
    pub sign: T,
    /// Lumped boundary quadrature weight (m).
    pub weight: T,
    /// Foundation yield limit F at this node (Pa).
    pub yield_limit: T,
}

impl<T: Real> ContactNode<T> {
    /// alpha_p = weight_p * F_p.
    pub fn alpha(&self) -> T {
        self.weight * self.yield_limit
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactData<T> {
    pub nodes: Vec<ContactNode<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ContactError {
    EmptyGamma3,
    ClampedContactNode(usize),
    SkewNormal(usize),
}

impl std::fmt::Display for ContactError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ContactError::EmptyGamma3 => write!(f, "the mesh has no gamma3 edges"),
            ContactError::ClampedContactNode(n) => {
                write!(f, "contact node {n} carries no DOFs")
            }
            ContactError::SkewNormal(n) => {
                write!(f, "contact node {n} has a normal other than (0,-1)")
            }
        }
    }
}

impl std::error::Error for ContactError {}

impl<T: Real> ContactData<T> {
    pub fn total_weight(&self) -> T {
        self.nodes.iter().map(|n| n.weight).sum()
    }

    pub fn normal_displacements(&self, u: &[T]) -> Vec<T> {
        self.nodes.iter().map(|n| n.sign * u[n.dof]).collect()
    }
}

/// Lumped contact trace: per gamma3 node, weight = half the sum of adjacent
/// gamma3 edge lengths, and the (DOF, sign) map realizing v_nu = -v_y.
pub fn contact_trace<T: Real>(
    mesh: &Mesh<T>,
    dofs: &DofMap,
    yield_limit: T,
) -> Result<ContactData<T>, ContactError> {
    let mut weights: std::collections::BTreeMap<usize, T> = std::collections::BTreeMap::new();
    let mut any = false;
    for e in mesh.gamma_edges(BoundaryTag::Gamma3) {
        any = true;
        if e.normal[0] != T::zero() || e.normal[1] != -T::one() {
            return Err(ContactError::SkewNormal(e.nodes[0]));
        }
        let half = mesh.edge_length(e.nodes) / lit(2.0);
        for &n in &e.nodes {
            *weights.entry(n).or_insert_with(T::zero) += half;
        }
    }
    if !any {
        return Err(ContactError::EmptyGamma3);
    }
    let mut nodes = Vec::with_capacity(weights.len());
    for (node, weight) in weights {
        let Some(dof) = dofs.dof(node, 1) else {
            return Err(ContactError::ClampedContactNode(node));
        };
        nodes.push(ContactNode {
            node,
            dof,
            sign: -T::one(),
            weight,
            yield_limit,
        });
    }
    Ok(ContactData { nodes })
}

/// j(v) = sum_p alpha_p (v_nu(p))^+, the lumped form of the boundary
/// integral of F v_nu^+.
pub fn eval_j<T: Real>(v: &[T], contact: &ContactData<T>) -> T {
    let mut acc = T::zero();
    for n in &contact.nodes {
        let v_nu = n.sign * v[n.dof];
        if v_nu > T::zero() {
            acc += n.alpha() * v_nu;
        }
    }
    acc
}

/// Exact proximal map of step * j; separable over contact normal components,
/// identity on everything else.
pub fn prox_j<T: Real>(z: &[T], step: T, contact: &ContactData<T>) -> Vec<T> {
    let mut out = z.to_vec();
    prox_j_in_place(&mut out, step, contact);
    out
}

pub fn prox_j_in_place<T: Real>(z: &mut [T], step: T, contact: &ContactData<T>) {
    for n in &contact.nodes {
        let alpha = step * n.alpha();
        let z_nu = n.sign * z[n.dof];
        let new_nu = if z_nu > alpha {
            z_nu - alpha
        } else if z_nu >= T::zero() {
            T::zero()
        } else {
            z_nu
        };
        z[n.dof] = n.sign * new_nu;
    }
}

/// One element of the subdifferential of j at v (zero branch at the kink).
pub fn subgradient_j<T: Real>(v: &[T], contact: &ContactData<T>) -> Vec<T> {
    let mut g = vec![T::zero(); v.len()];
    for n in &contact.nodes {
        let v_nu = n.sign * v[n.dof];
        if v_nu > T::zero() {
            g[n.dof] += n.sign * n.alpha();
        }
    }
    g
}

/// Nodal residual of the rigid-plastic contact conditions: separation with
/// nonzero stress, stress outside [-F, 0], or penetration off the yield
/// surface. Zero within tolerances iff the contact law holds at the node.
pub fn complementarity_residual<T: Real>(
    u: &[T],
    sigma_nu: &[T],
    contact: &ContactData<T>,
) -> Vec<T> {
    assert_eq!(sigma_nu.len(), contact.nodes.len());
    let tol_gap = lit::<T>(TOL_GAP);
    contact
        .nodes
        .iter()
        .zip(sigma_nu.iter())
        .map(|(n, &s)| {
            let u_nu = n.sign * u[n.dof];
            let f = n.yield_limit;
            let separation = if u_nu < -tol_gap { s.abs() } else { T::zero() };
            let box_violation = s.max(T::zero()) + (-f - s).max(T::zero());
            let yield_violation = if u_nu > tol_gap {
                (s + f).abs()
            } else {
                T::zero()
            };
            separation.max(box_violation).max(yield_violation)
        })
        .collect()
}

/// Nodal normal stress on gamma3 by area-weighted averaging of the adjacent
/// elements' boundary tractions (nu . sigma nu with nu = (0,-1), i.e. the
/// element sigma_yy).
pub fn nodal_normal_stress<T: Real>(
    mesh: &Mesh<T>,
    contact: &ContactData<T>,
    sigma: &[Sym2<T>],
) -> Vec<T> {
    let mut owners: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for e in mesh.gamma_edges(BoundaryTag::Gamma3) {
        for &n in &e.nodes {
            let v = owners.entry(n).or_default();
            if !v.contains(&e.tri) {
                v.push(e.tri);
            }
        }
    }
    contact
        .nodes
        .iter()
        .map(|cn| {
            let tris = owners.get(&cn.node).expect("contact node has gamma3 edges");
            let mut num = T::zero();
            let mut den = T::zero();
            for &t in tris {
                let a = mesh.triangle_area(t);
                num += a * sigma[t].yy;
                den += a;
            }
            num / den
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_reference_domain;
    use crate::linalg::{norm2, sub, Rng};
    use crate::mesh::{free_dof_map, triangulate};
    use crate::oracle;

    fn reference_contact() -> (crate::mesh::Mesh<f64>, DofMap, ContactData<f64>) {
        let m = triangulate(&build_reference_domain::<f64>(), 0.275, 0.06).unwrap();
        let d = free_dof_map(&m);
        let c = contact_trace(&m, &d, 10.0).unwrap();
        (m, d, c)
    }

    #[test]
    fn weights_are_half_sums_and_telescope() {
        let (m, _, c) = reference_contact();
        // total weight telescopes to the gamma3 length
        assert!((c.total_weight() - 1.0).abs() < 1e-12);
        // endpoints carry half of their single edge, interior nodes the half
        // sum of their two edges
        let mut edge_lens: std::collections::BTreeMap<usize, Vec<f64>> = Default::default();
        for e in m.gamma_edges(BoundaryTag::Gamma3) {
            for &n in &e.nodes {
                edge_lens.entry(n).or_default().push(m.edge_length(e.nodes));
            }
        }
        for cn in &c.nodes {
            let lens = &edge_lens[&cn.node];
            let expect: f64 = lens.iter().sum::<f64>() / 2.0;
            assert!((cn.weight - expect).abs() < 1e-14);
            let x = m.nodes[cn.node][0];
            if (x - 4.0).abs() < 1e-9 || (x - 5.0).abs() < 1e-9 {
                assert_eq!(lens.len(), 1);
            } else {
                assert_eq!(lens.len(), 2);
            }
        }
    }

    #[test]
    fn sign_convention_downward_motion_penetrates() {
        let (_, d, c) = reference_contact();
        let mut u = vec![0.0; d.n_dofs];
        let delta = 0.3;
        let cn = &c.nodes[1];
        u[cn.dof] = -delta; // v = (0, -delta)
        let v_nu = c.normal_displacements(&u)[1];
        assert!((v_nu - delta).abs() < 1e-15);
        assert!(v_nu > 0.0);
    }

    #[test]
    fn eval_j_zero_without_penetration_and_exact_for_uniform() {
        let (_, d, c) = reference_contact();
        let mut u = vec![0.0; d.n_dofs];
        for cn in &c.nodes {
            u[cn.dof] = 0.4; // v_nu = -0.4 < 0 everywhere
        }
        assert_eq!(eval_j(&u, &c), 0.0);
        let delta = 0.01;
        for cn in &c.nodes {
            u[cn.dof] = -delta;
        }
        // F = 10, |Gamma3| = 1, constant v_nu = delta: j = 10 * delta
        assert!((eval_j(&u, &c) - 10.0 * delta).abs() < 1e-12);
    }

    #[test]
    fn eval_j_positively_homogeneous_and_convex() {
        let (_, d, c) = reference_contact();
        let mut rng = Rng::seed(8);
        for _ in 0..20 {
            let v = rng.gaussian_vec::<f64>(d.n_dofs);
            let w = rng.gaussian_vec::<f64>(d.n_dofs);
            let jv = eval_j(&v, &c);
            let v2: Vec<f64> = v.iter().map(|x| 2.0 * x).collect();
            assert!((eval_j(&v2, &c) - 2.0 * jv).abs() < 1e-12 * jv.max(1.0));
            let mid: Vec<f64> = v.iter().zip(&w).map(|(a, b)| 0.5 * (a + b)).collect();
            let rhs = 0.5 * jv + 0.5 * eval_j(&w, &c);
            assert!(eval_j(&mid, &c) <= rhs + 1e-12 * rhs.abs().max(1.0));
        }
    }

    #[test]
    fn prox_branches() {
        let (_, d, c) = reference_contact();
        let cn = c.nodes[2].clone();
        // choose step so that step * alpha = 2
        let step = 2.0 / cn.alpha();
        let mut z = vec![0.0; d.n_dofs];
        // z_nu = -1: unchanged
        z[cn.dof] = 1.0;
        let p = prox_j(&z, step, &c);
        assert_eq!(p[cn.dof], 1.0);
        // z_nu = 5 -> 3
        z[cn.dof] = -5.0;
        let p = prox_j(&z, step, &c);
        assert!((-p[cn.dof] - 3.0).abs() < 1e-14);
        // z_nu = 1 (inside [0, alpha]) -> 0
        z[cn.dof] = -1.0;
        let p = prox_j(&z, step, &c);
        assert_eq!(p[cn.dof], 0.0);
        // non-contact dofs untouched
        let mut z = vec![0.0; d.n_dofs];
        z[0] = 7.0;
        let p = prox_j(&z, step, &c);
        assert_eq!(p[0], 7.0);
    }

    #[test]
    fn prox_matches_grid_oracle() {
        let mut rng = Rng::seed(55);
        for _ in 0..50 {
            let z = 6.0 * (rng.uniform::<f64>() - 0.5);
            let alpha = 3.0 * rng.uniform::<f64>();
            let got = oracle::prox_scalar(z, alpha);
            let brute = oracle::prox_scalar_grid(z, alpha, 1e-6);
            assert!(
                (got - brute).abs() <= 1e-6,
                "z={z} alpha={alpha}: {got} vs {brute}"
            );
        }
    }

    #[test]
    fn prox_nonexpansive() {
        let (_, d, c) = reference_contact();
        let mut rng = Rng::seed(14);
        for _ in 0..20 {
            let z1 = rng.gaussian_vec::<f64>(d.n_dofs);
            let z2 = rng.gaussian_vec::<f64>(d.n_dofs);
            let p1 = prox_j(&z1, 0.3, &c);
            let p2 = prox_j(&z2, 0.3, &c);
            assert!(norm2(&sub(&p1, &p2)) <= norm2(&sub(&z1, &z2)) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn moreau_identity_on_normal_scalars() {
        let mut rng = Rng::seed(6);
        for _ in 0..10 {
            let z = 8.0 * (rng.uniform::<f64>() - 0.5);
            let alpha = 2.0 * rng.uniform::<f64>() + 0.1;
            let step = 0.7;
            let prox = oracle::prox_scalar(z, step * alpha);
            let conj = oracle::conjugate_prox_scalar_grid(z / step, alpha, step);
            // z = prox_{step j}(z) + step prox_{j*/step}(z/step)
            assert!(
                (z - (prox + step * conj)).abs() < 2e-3,
                "z={z} alpha={alpha}"
            );
        }
    }

    #[test]
    fn subgradient_inequality() {
        let (_, d, c) = reference_contact();
        let mut rng = Rng::seed(40);
        for _ in 0..20 {
            let v = rng.gaussian_vec::<f64>(d.n_dofs);
            let w = rng.gaussian_vec::<f64>(d.n_dofs);
            let g = subgradient_j(&v, &c);
            let lhs = eval_j(&w, &c) - eval_j(&v, &c);
            let rhs = crate::linalg::dot(&g, &sub(&w, &v));
            assert!(lhs >= rhs - 1e-10);
        }
    }

    #[test]
    fn complementarity_branch_examples() {
        let (_, d, c) = reference_contact();
        let n = c.nodes.len();
        let mut u = vec![0.0; d.n_dofs];
        // separation with zero stress: residual 0
        for cn in &c.nodes {
            u[cn.dof] = 0.01; // u_nu = -0.01
        }
        let r = complementarity_residual(&u, &vec![0.0; n], &c);
        assert!(r.iter().all(|&x| x == 0.0));
        // penetration at the yield limit: residual 0
        for cn in &c.nodes {
            u[cn.dof] = -0.02; // u_nu = 0.02
        }
        let r = complementarity_residual(&u, &vec![-10.0; n], &c);
        assert!(r.iter().all(|&x| x.abs() < 1e-12));
        // penetration below yield: residual |sigma + F| = 3
        let r = complementarity_residual(&u, &vec![-7.0; n], &c);
        assert!(r.iter().all(|&x| (x - 3.0).abs() < 1e-12));
        // tensile stress violates the box
        let r = complementarity_residual(&u, &vec![2.0; n], &c);
        assert!(r.iter().all(|&x| x >= 2.0));
    }

    #[test]
    fn contact_trace_requires_gamma3() {
        let m = triangulate(&crate::geometry::unit_square_domain::<f64>(), 1.0, 1.0).unwrap();
        let d = free_dof_map(&m);
        assert_eq!(
            contact_trace(&m, &d, 10.0),
            Err(ContactError::EmptyGamma3)
        );
    }

    #[test]
    fn nodal_stress_averages_adjacent_elements() {
        let (m, _, c) = reference_contact();
        // constant stress field: averaging returns it exactly
        let sigma = vec![Sym2::new(1.0, -4.0, 0.3); m.triangles.len()];
        let s = nodal_normal_stress(&m, &c, &sigma);
        assert!(s.iter().all(|&x| (x + 4.0).abs() < 1e-12));
    }
}
