//! Plane-strain isotropic elasticity and the relaxation kernel of the
//! long-memory constitutive law.

use crate::scalar::{lit, Real};
use crate::tensor::{Sym2, Tensor4};

/// Relaxation kernel: either a constant scalar multiple of the identity
/// (fast recursion path) or a general tensor kernel sampled at time lags
/// 0, k, 2k, ... (slow convolution path).
#[derive(Debug, Clone, PartialEq)]
pub enum RelaxationKernel<T> {
    ConstantScalar(T),
    General(Vec<Tensor4<T>>),
}

impl<T: Real> RelaxationKernel<T> {
    pub fn is_constant(&self) -> bool {
        matches!(self, RelaxationKernel::ConstantScalar(_))
    }

    /// Kernel value at lag index `l` (time lag l*k).
    pub fn at_lag(&self, l: usize) -> Tensor4<T> {
        match self {
            RelaxationKernel::ConstantScalar(b) => Tensor4::scaled_identity(*b),
            RelaxationKernel::General(samples) => {
                *samples.get(l).unwrap_or_else(|| {
                    panic!("kernel sampled at {} lags, lag {l} requested", samples.len())
                })
            }
        }
    }

    /// Is the kernel identically zero (purely elastic material)?
    pub fn is_zero(&self) -> bool {
        match self {
            RelaxationKernel::ConstantScalar(b) => *b == T::zero(),
            RelaxationKernel::General(samples) => {
                samples.iter().all(|s| *s == Tensor4::zero())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialModel<T> {
    /// Young's modulus E (N/m^2).
    pub young: T,
    /// Poisson's ratio kappa, in (0, 0.5).
    pub poisson: T,
    pub relaxation: RelaxationKernel<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MaterialError {
    SingularMaterial,
}

impl std::fmt::Display for MaterialError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MaterialError::SingularMaterial => {
                write!(f, "elasticity tensor is singular (requires E > 0, 0 < kappa < 0.5)")
            }
        }
    }
}

impl std::error::Error for MaterialError {}

impl<T: Real> MaterialModel<T> {
    pub fn new(young: T, poisson: T, relaxation: RelaxationKernel<T>) -> Self {
        MaterialModel {
            young,
            poisson,
            relaxation,
        }
    }

    /// Material with a constant relaxation coefficient b.
    pub fn constant_relaxation(young: T, poisson: T, b: T) -> Self {
        Self::new(young, poisson, RelaxationKernel::ConstantScalar(b))
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        let half = lit::<T>(0.5);
        if self.young > T::zero() && self.poisson > T::zero() && self.poisson < half {
            Ok(())
        } else {
            Err(MaterialError::SingularMaterial)
        }
    }

    /// Coefficients of the plane-strain map: trace part E k/((1+k)(1-2k)),
    /// componentwise part E/(1+k).
    pub fn lame_coefficients(&self) -> (T, T) {
        let one = T::one();
        let two = lit::<T>(2.0);
        let trace = self.young * self.poisson
            / ((one + self.poisson) * (one - two * self.poisson));
        let comp = self.young / (one + self.poisson);
        (trace, comp)
    }

    /// Coercivity constant m_A = E/(1+kappa).
    pub fn coercivity_const(&self) -> T {
        self.lame_coefficients().1
    }

    pub fn elasticity_tensor(&self) -> Tensor4<T> {
        let (trace, comp) = self.lame_coefficients();
        Tensor4::isotropic(trace, comp)
    }
}

/// Apply the elasticity tensor: (A w)_ij = trace_coeff (w_11 + w_22) d_ij + comp_coeff w_ij.
pub fn elasticity_apply<T: Real>(omega: &Sym2<T>, material: &MaterialModel<T>) -> Sym2<T> {
    let (trace, comp) = material.lame_coefficients();
    let tr = omega.trace();
    Sym2::new(
        trace * tr + comp * omega.xx,
        trace * tr + comp * omega.yy,
        comp * omega.xy,
    )
}
