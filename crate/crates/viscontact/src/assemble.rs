//! P1 assembly: stiffness and strain-Gram matrices, load vectors, element
//! strains and stress reconstruction.

use crate::history::HistoryState;
use crate::linalg::Csr;
use crate::material::{MaterialError, MaterialModel, RelaxationKernel};
use crate::mesh::{BoundaryTag, DofMap, Mesh};
use crate::scalar::{lit, Real};
use crate::tensor::{Sym2, Tensor4};

/// Number of assembly threads: VISCONTACT_THREADS, default 1.
pub fn assembly_threads() -> usize {
    std::env::var("VISCONTACT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .map(|n| n.clamp(1, 64))
        .unwrap_or(1)
}

#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry<T> {
    pub area: T,
    /// Gradient of each P1 shape function, constant on the element.
    pub grads: [[T; 2]; 3],
}

pub fn element_geometry<T: Real>(mesh: &Mesh<T>, t: usize) -> ElementGeometry<T> {
    let [a, b, c] = mesh.triangles[t];
    let (pa, pb, pc) = (mesh.nodes[a], mesh.nodes[b], mesh.nodes[c]);
    let two_a = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
    let grads = [
        [(pb[1] - pc[1]) / two_a, (pc[0] - pb[0]) / two_a],
        [(pc[1] - pa[1]) / two_a, (pa[0] - pc[0]) / two_a],
        [(pa[1] - pb[1]) / two_a, (pb[0] - pa[0]) / two_a],
    ];
    ElementGeometry {
        area: two_a / lit(2.0),
        grads,
    }
}

/// Strain of the vector shape function (phi e_comp) with gradient `g`.
#[inline]
fn basis_strain<T: Real>(g: [T; 2], comp: usize) -> Sym2<T> {
    let half = lit::<T>(0.5);
    if comp == 0 {
        Sym2::new(g[0], T::zero(), half * g[1])
    } else {
        Sym2::new(T::zero(), g[1], half * g[0])
    }
}

/// 6x6 element matrix for the bilinear form with the given fourth-order
/// tensor; local DOF order (n0x, n0y, n1x, n1y, n2x, n2y).
pub fn element_matrix<T: Real>(mesh: &Mesh<T>, t: usize, tensor: &Tensor4<T>) -> [[T; 6]; 6] {
    let geo = element_geometry(mesh, t);
    let mut strains = [Sym2::zero(); 6];
    for i in 0..3 {
        for comp in 0..2 {
            strains[2 * i + comp] = basis_strain(geo.grads[i], comp);
        }
    }
    let mut mapped = [Sym2::zero(); 6];
    for (m, s) in mapped.iter_mut().zip(strains.iter()) {
        *m = tensor.apply(s);
    }
    let mut out = [[T::zero(); 6]; 6];
    for p in 0..6 {
        for q in p..6 {
            let v = geo.area * mapped[p].ddot(&strains[q]);
            out[p][q] = v;
            out[q][p] = v;
        }
    }
    out
}

fn element_triplets<T: Real>(
    mesh: &Mesh<T>,
    dofs: &DofMap,
    tensor: &Tensor4<T>,
    range: std::ops::Range<usize>,
    out: &mut Vec<(usize, usize, T)>,
) {
    for t in range {
        let e = element_matrix(mesh, t, tensor);
        let tri = mesh.triangles[t];
        for (i, &ni) in tri.iter().enumerate() {
            for ci in 0..2 {
                let Some(gp) = dofs.dof(ni, ci) else { continue };
                for (j, &nj) in tri.iter().enumerate() {
                    for cj in 0..2 {
                        let Some(gq) = dofs.dof(nj, cj) else { continue };
                        out.push((gp, gq, e[2 * i + ci][2 * j + cj]));
                    }
                }
            }
        }
    }
}

/// Assemble the sparse matrix of the bilinear form over free DOFs. Chunks
/// are merged in element order, so the result is bit-identical for any
/// thread count.
pub fn assemble_matrix<T: Real>(
    mesh: &Mesh<T>,
    dofs: &DofMap,
    tensor: &Tensor4<T>,
    n_threads: usize,
) -> Csr<T> {
    let n_tri = mesh.triangles.len();
    let n_threads = n_threads.clamp(1, 64).min(n_tri.max(1));
    let mut triplets: Vec<(usize, usize, T)> = Vec::new();
    if n_threads <= 1 {
        element_triplets(mesh, dofs, tensor, 0..n_tri, &mut triplets);
    } else {
        let chunk = n_tri.div_ceil(n_threads);
        let mut buffers: Vec<Vec<(usize, usize, T)>> = Vec::new();
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for c in 0..n_threads {
                let lo = c * chunk;
                let hi = ((c + 1) * chunk).min(n_tri);
                if lo >= hi {
                    break;
                }
                handles.push(scope.spawn(move || {
                    let mut buf = Vec::new();
                    element_triplets(mesh, dofs, tensor, lo..hi, &mut buf);
                    buf
                }));
            }
            for h in handles {
                buffers.push(h.join().expect("assembly thread panicked"));
            }
        });
        for buf in buffers {
            triplets.extend_from_slice(&buf);
        }
    }
    Csr::from_triplets(dofs.n_dofs, &triplets)
}

/// Stiffness matrix of the elasticity operator on free DOFs.
pub fn assemble_stiffness<T: Real>(
    mesh: &Mesh<T>,
    dofs: &DofMap,
    material: &MaterialModel<T>,
) -> Result<Csr<T>, MaterialError> {
    material.validate()?;
    Ok(assemble_matrix(
        mesh,
        dofs,
        &material.elasticity_tensor(),
        assembly_threads(),
    ))
}

/// Gram matrix of the strain inner product (u,v)_V; realizes |v|_V^2 = v^T G v.
pub fn assemble_strain_gram<T: Real>(mesh: &Mesh<T>, dofs: &DofMap) -> Csr<T> {
    assemble_matrix(mesh, dofs, &Tensor4::identity(), assembly_threads())
}

// ---------------------------------------------------------------------------
// loads
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum BodyForce<T> {
    Zero,
    Constant([T; 2]),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Traction<T> {
    Zero,
    /// (0, amplitude sin t) on boundary edges flagged as the load arc.
    VerticalSineOnArc { amplitude: T },
    /// Constant traction on every gamma2 edge.
    ConstantOnGamma2([T; 2]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadSpec<T> {
    pub body: BodyForce<T>,
    pub traction: Traction<T>,
}

impl<T: Real> LoadSpec<T> {
    pub fn zero() -> Self {
        LoadSpec {
            body: BodyForce::Zero,
            traction: Traction::Zero,
        }
    }

    /// No body force, vertical amplitude*sin(t) traction on the arc.
    pub fn vertical_sine(amplitude: T) -> Self {
        LoadSpec {
            body: BodyForce::Zero,
            traction: Traction::VerticalSineOnArc { amplitude },
        }
    }
}

/// Consistent P1 load vector at time t: vertex quadrature for the body
/// force, trapezoid rule on gamma2 edges for the traction.
pub fn assemble_load<T: Real>(
    mesh: &Mesh<T>,
    dofs: &DofMap,
    loads: &LoadSpec<T>,
    t: T,
) -> Vec<T> {
    let mut f = vec![T::zero(); dofs.n_dofs];
    let third = lit::<T>(3.0);
    if let BodyForce::Constant(b) = &loads.body {
        for tri_idx in 0..mesh.triangles.len() {
            let area = mesh.triangle_area(tri_idx);
            for &node in &mesh.triangles[tri_idx] {
                for comp in 0..2 {
                    if let Some(d) = dofs.dof(node, comp) {
                        f[d] += area / third * b[comp];
                    }
                }
            }
        }
    }
    match &loads.traction {
        Traction::Zero => {}
        Traction::VerticalSineOnArc { amplitude } => {
            let val = *amplitude * t.sin();
            for e in mesh.gamma_edges(BoundaryTag::Gamma2) {
                if !e.on_load_arc {
                    continue;
                }
                let half_len = mesh.edge_length(e.nodes) / lit(2.0);
                for &node in &e.nodes {
                    if let Some(d) = dofs.dof(node, 1) {
                        f[d] += half_len * val;
                    }
                }
            }
        }
        Traction::ConstantOnGamma2(q) => {
            for e in mesh.gamma_edges(BoundaryTag::Gamma2) {
                let half_len = mesh.edge_length(e.nodes) / lit(2.0);
                for &node in &e.nodes {
                    for comp in 0..2 {
                        if let Some(d) = dofs.dof(node, comp) {
                            f[d] += half_len * q[comp];
                        }
                    }
                }
            }
        }
    }
    f
}

// ---------------------------------------------------------------------------
// strains and stress reconstruction
// ---------------------------------------------------------------------------

/// Constant strain of the P1 displacement field on one element; clamped
/// nodes contribute zero displacement.
pub fn element_strain<T: Real>(mesh: &Mesh<T>, dofs: &DofMap, t: usize, u: &[T]) -> Sym2<T> {
    let geo = element_geometry(mesh, t);
    let mut s = Sym2::zero();
    for (i, &node) in mesh.triangles[t].iter().enumerate() {
        for comp in 0..2 {
            if let Some(d) = dofs.dof(node, comp) {
                s = s + basis_strain(geo.grads[i], comp).scale(u[d]);
            }
        }
    }
    s
}

pub fn element_strains<T: Real>(mesh: &Mesh<T>, dofs: &DofMap, u: &[T]) -> Vec<Sym2<T>> {
    (0..mesh.triangles.len())
        .map(|t| element_strain(mesh, dofs, t, u))
        .collect()
}

/// Riesz vector of w -> sum_T area (omega_T : eps(w)|_T); the load-like
/// vector of an element stress/strain field.
pub fn strain_field_vector<T: Real>(
    mesh: &Mesh<T>,
    dofs: &DofMap,
    field: &[Sym2<T>],
) -> Vec<T> {
    assert_eq!(field.len(), mesh.triangles.len());
    let mut out = vec![T::zero(); dofs.n_dofs];
    for (t, s) in field.iter().enumerate() {
        let geo = element_geometry(mesh, t);
        for (i, &node) in mesh.triangles[t].iter().enumerate() {
            for comp in 0..2 {
                if let Some(d) = dofs.dof(node, comp) {
                    out[d] += geo.area * s.ddot(&basis_strain(geo.grads[i], comp));
                }
            }
        }
    }
    out
}

/// (a, b)_Q = sum_T area a_T : b_T for element fields.
pub fn q_inner<T: Real>(mesh: &Mesh<T>, a: &[Sym2<T>], b: &[Sym2<T>]) -> T {
    let mut acc = T::zero();
    for t in 0..mesh.triangles.len() {
        acc += mesh.triangle_area(t) * a[t].ddot(&b[t]);
    }
    acc
}

#[derive(Debug, Clone, PartialEq)]
pub enum StressError {
    HistoryMismatch,
}

impl std::fmt::Display for StressError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StressError::HistoryMismatch => {
                write!(f, "history state does not correspond to the displacement")
            }
        }
    }
}

impl std::error::Error for StressError {}

/// Element stresses sigma = A eps(u) + memory, where the memory term is the
/// right-rectangle convolution over the trajectory prefix ending at `u`.
pub fn reconstruct_stress_field<T: Real>(
    u: &[T],
    history: &HistoryState<T>,
    mesh: &Mesh<T>,
    dofs: &DofMap,
    material: &MaterialModel<T>,
) -> Result<Vec<Sym2<T>>, StressError> {
    if history.step_index == 0 {
        if u.iter().any(|x| *x != T::zero()) {
            return Err(StressError::HistoryMismatch);
        }
    } else if history.last_u() != Some(u) {
        return Err(StressError::HistoryMismatch);
    }
    let k = history.dt;
    let mut out = Vec::with_capacity(mesh.triangles.len());
    match (&history.kernel, history.displacement_sum()) {
        (RelaxationKernel::ConstantScalar(b), sum_u) => {
            let sum_u = sum_u.expect("constant kernel keeps a displacement sum");
            for t in 0..mesh.triangles.len() {
                let elastic = material
                    .elasticity_tensor()
                    .apply(&element_strain(mesh, dofs, t, u));
                let memory = element_strain(mesh, dofs, t, sum_u).scale(k * *b);
                out.push(elastic + memory);
            }
        }
        (RelaxationKernel::General(_), _) => {
            let prefix = history
                .prefix()
                .expect("general kernel keeps the trajectory prefix");
            let n = prefix.len();
            for t in 0..mesh.triangles.len() {
                let elastic = material
                    .elasticity_tensor()
                    .apply(&element_strain(mesh, dofs, t, u));
                let mut memory = Sym2::zero();
                for (j, uj) in prefix.iter().enumerate() {
                    let lag = n - 1 - j;
                    let s = element_strain(mesh, dofs, t, uj);
                    memory = memory + history.kernel.at_lag(lag).apply(&s).scale(k);
                }
                out.push(elastic + memory);
            }
        }
    }
    Ok(out)
}
