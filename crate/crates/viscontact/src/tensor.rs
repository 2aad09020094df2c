//! Symmetric second-order tensors on R^2 and fourth-order tensor actions.
//!
//! Fourth-order tensors with minor and major symmetry are stored as 3x3
//! matrices acting on the Mandel vector [t_xx, t_yy, sqrt(2) t_xy], so that
//! the tensor double contraction equals the Euclidean inner product of the
//! Mandel vectors and major symmetry equals matrix symmetry.

use crate::scalar::{lit, Real};
use std::ops::{Add, Mul, Neg, Sub};

/// Symmetric 2x2 tensor (strain or stress).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sym2<T> {
    pub xx: T,
    pub yy: T,
    pub xy: T,
}

impl<T: Real> Sym2<T> {
    pub fn new(xx: T, yy: T, xy: T) -> Self {
        Sym2 { xx, yy, xy }
    }

    pub fn zero() -> Self {
        Sym2::new(T::zero(), T::zero(), T::zero())
    }

    pub fn identity() -> Self {
        Sym2::new(T::one(), T::one(), T::zero())
    }

    pub fn trace(&self) -> T {
        self.xx + self.yy
    }

    /// Double contraction s : t (the xy component counts twice).
    pub fn ddot(&self, other: &Self) -> T {
        self.xx * other.xx + self.yy * other.yy + (self.xy * other.xy + self.xy * other.xy)
    }

    pub fn norm(&self) -> T {
        self.ddot(self).sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        Sym2::new(self.xx * s, self.yy * s, self.xy * s)
    }

    pub fn to_mandel(&self) -> [T; 3] {
        let s2 = lit::<T>(2.0).sqrt();
        [self.xx, self.yy, s2 * self.xy]
    }

    pub fn from_mandel(v: [T; 3]) -> Self {
        let s2 = lit::<T>(2.0).sqrt();
        Sym2::new(v[0], v[1], v[2] / s2)
    }
}

impl<T: Real> Add for Sym2<T> {
    type Output = Sym2<T>;
    fn add(self, rhs: Self) -> Self {
        Sym2::new(self.xx + rhs.xx, self.yy + rhs.yy, self.xy + rhs.xy)
    }
}

impl<T: Real> Sub for Sym2<T> {
    type Output = Sym2<T>;
    fn sub(self, rhs: Self) -> Self {
        Sym2::new(self.xx - rhs.xx, self.yy - rhs.yy, self.xy - rhs.xy)
    }
}

impl<T: Real> Neg for Sym2<T> {
    type Output = Sym2<T>;
    fn neg(self) -> Self {
        Sym2::new(-self.xx, -self.yy, -self.xy)
    }
}

impl<T: Real> Mul<T> for Sym2<T> {
    type Output = Sym2<T>;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

/// Fourth-order tensor action on `Sym2`, stored in the Mandel basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tensor4<T> {
    pub m: [[T; 3]; 3],
}

impl<T: Real> Tensor4<T> {
    pub fn zero() -> Self {
        Tensor4 {
            m: [[T::zero(); 3]; 3],
        }
    }

    /// The identity map on symmetric tensors.
    pub fn identity() -> Self {
        let mut t = Self::zero();
        for i in 0..3 {
            t.m[i][i] = T::one();
        }
        t
    }

    /// Scalar multiple of the identity, `t -> b t`.
    pub fn scaled_identity(b: T) -> Self {
        let mut t = Self::zero();
        for i in 0..3 {
            t.m[i][i] = b;
        }
        t
    }

    /// Isotropic map `t -> trace_coeff (tr t) I + dev_coeff t`.
    pub fn isotropic(trace_coeff: T, dev_coeff: T) -> Self {
        let mut t = Self::scaled_identity(dev_coeff);
        t.m[0][0] += trace_coeff;
        t.m[0][1] += trace_coeff;
        t.m[1][0] += trace_coeff;
        t.m[1][1] += trace_coeff;
        t
    }

    pub fn apply(&self, s: &Sym2<T>) -> Sym2<T> {
        let v = s.to_mandel();
        let mut out = [T::zero(); 3];
        for (i, row) in self.m.iter().enumerate() {
            out[i] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
        }
        Sym2::from_mandel(out)
    }

    /// Major symmetry a_ijkl = a_klij in the Mandel representation.
    pub fn is_symmetric(&self, tol: T) -> bool {
        for i in 0..3 {
            for j in (i + 1)..3 {
                if (self.m[i][j] - self.m[j][i]).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn add_scaled(&self, other: &Self, s: T) -> Self {
        let mut out = *self;
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] += other.m[i][j] * s;
            }
        }
        out
    }
}
