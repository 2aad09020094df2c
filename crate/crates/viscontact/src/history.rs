//! Discrete history-dependent operators: right-rectangle convolution
//! quadrature, the constant-kernel recursion, and the forward Volterra
//! resolvent that realizes the inverse (A + S)^{-1} = A^{-1} + R.

use crate::assemble::{element_strain, strain_field_vector};
use crate::linalg::{axpy, Cholesky, Csr, DenseMat};
use crate::material::RelaxationKernel;
use crate::mesh::{DofMap, Mesh};
use crate::scalar::Real;
use crate::tensor::Sym2;

#[derive(Debug, Clone, PartialEq)]
pub enum HistoryError {
    /// The recursion is only valid for constant kernels.
    NonConstantKernel,
    /// A step matrix could not be factored.
    SingularStep,
}

impl std::fmt::Display for HistoryError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HistoryError::NonConstantKernel => {
                write!(f, "recursion requires a constant kernel; use the full convolution")
            }
            HistoryError::SingularStep => write!(f, "volterra step matrix is singular"),
        }
    }
}

impl std::error::Error for HistoryError {}

#[derive(Debug, Clone, PartialEq)]
enum Memory<T> {
    ConstSum { sum_u: Vec<T>, last_u: Option<Vec<T>> },
    Prefix { us: Vec<Vec<T>> },
}

/// Accumulated discrete memory term. After step i, `accumulated` is the
/// Riesz vector of ((S u)_i, .)_V including the lag-zero self term.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryState<T> {
    pub step_index: usize,
    pub accumulated: Vec<T>,
    pub dt: T,
    pub kernel: RelaxationKernel<T>,
    memory: Memory<T>,
}

impl<T: Real> HistoryState<T> {
    pub fn new(n_dofs: usize, kernel: RelaxationKernel<T>, dt: T) -> Self {
        let memory = if kernel.is_constant() {
            Memory::ConstSum {
                sum_u: vec![T::zero(); n_dofs],
                last_u: None,
            }
        } else {
            Memory::Prefix { us: Vec::new() }
        };
        HistoryState {
            step_index: 0,
            accumulated: vec![T::zero(); n_dofs],
            dt,
            kernel,
            memory,
        }
    }

    pub fn last_u(&self) -> Option<&[T]> {
        match &self.memory {
            Memory::ConstSum { last_u, .. } => last_u.as_deref(),
            Memory::Prefix { us } => us.last().map(|v| v.as_slice()),
        }
    }

    /// Sum of all recorded displacements (constant-kernel path only).
    pub fn displacement_sum(&self) -> Option<&Vec<T>> {
        match &self.memory {
            Memory::ConstSum { sum_u, .. } => Some(sum_u),
            Memory::Prefix { .. } => None,
        }
    }

    /// Recorded trajectory prefix (general-kernel path only).
    pub fn prefix(&self) -> Option<&Vec<Vec<T>>> {
        match &self.memory {
            Memory::ConstSum { .. } => None,
            Memory::Prefix { us } => Some(us),
        }
    }

    /// Constant-kernel advance; alias of [`history_update`].
    pub fn advanced(&self, u: &[T], gram: &Csr<T>) -> Result<Self, HistoryError> {
        history_update(self, u, gram)
    }

    /// General-kernel advance: record u and recompute the full convolution.
    pub fn advanced_general(&self, u: &[T], mesh: &Mesh<T>, dofs: &DofMap, gram: &Csr<T>) -> Self {
        let Memory::Prefix { us } = &self.memory else {
            panic!("advanced_general requires a general kernel state");
        };
        let mut us = us.clone();
        us.push(u.to_vec());
        let accumulated = convolve_full(mesh, dofs, gram, &us, &self.kernel, self.dt);
        HistoryState {
            step_index: self.step_index + 1,
            accumulated,
            dt: self.dt,
            kernel: self.kernel.clone(),
            memory: Memory::Prefix { us },
        }
    }
}

/// Constant-kernel recursion: accumulated' = accumulated + k b G u_i.
pub fn history_update<T: Real>(
    state: &HistoryState<T>,
    u_i: &[T],
    gram: &Csr<T>,
) -> Result<HistoryState<T>, HistoryError> {
    let RelaxationKernel::ConstantScalar(b) = state.kernel else {
        return Err(HistoryError::NonConstantKernel);
    };
    let Memory::ConstSum { sum_u, .. } = &state.memory else {
        return Err(HistoryError::NonConstantKernel);
    };
    let mut accumulated = state.accumulated.clone();
    axpy(&mut accumulated, state.dt * b, &gram.matvec(u_i));
    let mut sum_u = sum_u.clone();
    axpy(&mut sum_u, T::one(), u_i);
    Ok(HistoryState {
        step_index: state.step_index + 1,
        accumulated,
        dt: state.dt,
        kernel: state.kernel.clone(),
        memory: Memory::ConstSum {
            sum_u,
            last_u: Some(u_i.to_vec()),
        },
    })
}

/// Riesz vector of v -> (k sum_{j=1..n} B((eval_step - j) k) eps(u_j), eps(v))_Q
/// for a prefix u_1..u_n with eval_step >= n. The lag-zero self term is
/// included when eval_step == n (right-rectangle convention).
pub fn convolve_at<T: Real>(
    mesh: &Mesh<T>,
    dofs: &DofMap,
    gram: &Csr<T>,
    prefix: &[Vec<T>],
    kernel: &RelaxationKernel<T>,
    k: T,
    eval_step: usize,
) -> Vec<T> {
    let n = prefix.len();
    assert!(eval_step >= n, "evaluation step precedes the prefix end");
    match kernel {
        RelaxationKernel::ConstantScalar(b) => {
            let n_dofs = gram.n;
            let mut sum = vec![T::zero(); n_dofs];
            for u in prefix {
                axpy(&mut sum, T::one(), u);
            }
            let mut out = gram.matvec(&sum);
            for x in out.iter_mut() {
                *x *= k * *b;
            }
            out
        }
        RelaxationKernel::General(_) => {
            let n_tri = mesh.triangles.len();
            let mut field = vec![Sym2::zero(); n_tri];
            for (j, u) in prefix.iter().enumerate() {
                let lag = eval_step - (j + 1);
                for (t, slot) in field.iter_mut().enumerate() {
                    let s = element_strain(mesh, dofs, t, u);
                    *slot = *slot + kernel.at_lag(lag).apply(&s).scale(k);
                }
            }
            strain_field_vector(mesh, dofs, &field)
        }
    }
}

/// Full right-rectangle convolution over the prefix, evaluated at its end.
pub fn convolve_full<T: Real>(
    mesh: &Mesh<T>,
    dofs: &DofMap,
    gram: &Csr<T>,
    prefix: &[Vec<T>],
    kernel: &RelaxationKernel<T>,
    k: T,
) -> Vec<T> {
    convolve_at(mesh, dofs, gram, prefix, kernel, k, prefix.len())
}

// ---------------------------------------------------------------------------
// dense Volterra systems
// ---------------------------------------------------------------------------

/// Kernel of a dense Volterra system, sampled at lags 0, k, 2k, ...
#[derive(Debug, Clone)]
pub enum VolterraKernel<T> {
    Zero,
    /// B(l k) = samples[l] * I; a constant scalar b is `vec![b; n]`.
    ScalarSamples(Vec<T>),
    MatrixSamples(Vec<DenseMat<T>>),
}

impl<T: Real> VolterraKernel<T> {
    fn apply_lag(&self, lag: usize, x: &[T]) -> Vec<T> {
        match self {
            VolterraKernel::Zero => vec![T::zero(); x.len()],
            VolterraKernel::ScalarSamples(s) => {
                let b = s[lag];
                x.iter().map(|v| *v * b).collect()
            }
            VolterraKernel::MatrixSamples(m) => m[lag].matvec(x),
        }
    }

    fn lag0_matrix(&self, n: usize) -> DenseMat<T> {
        match self {
            VolterraKernel::Zero => DenseMat::zeros(n, n),
            VolterraKernel::ScalarSamples(s) => {
                let mut m = DenseMat::zeros(n, n);
                for i in 0..n {
                    *m.at_mut(i, i) = s[0];
                }
                m
            }
            VolterraKernel::MatrixSamples(m) => m[0].clone(),
        }
    }
}

/// Forward application of (A + S): at step n the result is
/// A u_n + k sum_{j<=n} B((n-j) k) u_j.
pub fn volterra_apply<T: Real>(
    a: &DenseMat<T>,
    kernel: &VolterraKernel<T>,
    u: &[Vec<T>],
    k: T,
) -> Vec<Vec<T>> {
    let mut out = Vec::with_capacity(u.len());
    for n in 1..=u.len() {
        let mut g = a.matvec(&u[n - 1]);
        for j in 1..=n {
            let mem = kernel.apply_lag(n - j, &u[j - 1]);
            axpy(&mut g, k, &mem);
        }
        out.push(g);
    }
    out
}

/// Solve (A + S) u = g forward in time: at step n,
/// (A + k B(0)) u_n = g_n - k sum_{j<n} B((n-j) k) u_j.
/// This is the discrete action of the inverse A^{-1} + R.
pub fn volterra_resolve<T: Real>(
    a: &DenseMat<T>,
    kernel: &VolterraKernel<T>,
    g: &[Vec<T>],
    k: T,
) -> Result<Vec<Vec<T>>, HistoryError> {
    let n_dim = a.n_rows;
    let mut step_mat = a.clone();
    let b0 = kernel.lag0_matrix(n_dim);
    for i in 0..n_dim {
        for j in 0..n_dim {
            let v = step_mat.at(i, j) + k * b0.at(i, j);
            *step_mat.at_mut(i, j) = v;
        }
    }
    let chol = Cholesky::factor(&step_mat).map_err(|_| HistoryError::SingularStep)?;
    let mut u: Vec<Vec<T>> = Vec::with_capacity(g.len());
    for n in 1..=g.len() {
        let mut rhs = g[n - 1].clone();
        for j in 1..n {
            let mem = kernel.apply_lag(n - j, &u[j - 1]);
            axpy(&mut rhs, -k, &mem);
        }
        u.push(chol.solve(&rhs));
    }
    Ok(u)
}
