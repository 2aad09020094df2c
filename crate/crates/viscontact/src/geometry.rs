//! Domain description: an axis-aligned rectangle with an optional half-disk
//! cap sitting on its top edge, and the boundary decomposition into the
//! clamped part, the traction part and the potential contact part.

use crate::scalar::{lit, Real};

/// Closed x-interval on the bottom edge of the rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BottomInterval<T> {
    pub x0: T,
    pub x1: T,
}

impl<T: Real> BottomInterval<T> {
    pub fn length(&self) -> T {
        self.x1 - self.x0
    }
}

/// Upper half-disk whose flat side coincides with the rectangle top edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cap<T> {
    pub center: [T; 2],
    pub radius: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec<T> {
    /// Rectangle [x_min, x_max] x [y_min, y_max].
    pub x_min: T,
    pub x_max: T,
    pub y_min: T,
    pub y_max: T,
    /// Optional half-disk on top of the rectangle; its arc carries the load.
    pub cap: Option<Cap<T>>,
    /// Clamped segment of the bottom edge.
    pub gamma1: BottomInterval<T>,
    /// Potential contact segment of the bottom edge (absent in some tests).
    pub gamma3: Option<BottomInterval<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainError {
    EmptyGamma1,
    Overlap,
    CapMismatch,
}

impl std::fmt::Display for DomainError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DomainError::EmptyGamma1 => write!(f, "clamped boundary must have positive length"),
            DomainError::Overlap => write!(f, "gamma1 and gamma3 overlap or leave the bottom edge"),
            DomainError::CapMismatch => {
                write!(f, "cap flat side does not coincide with the rectangle top edge")
            }
        }
    }
}

impl std::error::Error for DomainError {}

impl<T: Real> DomainSpec<T> {
    pub fn validate(&self) -> Result<(), DomainError> {
        if !(self.gamma1.x1 > self.gamma1.x0) {
            return Err(DomainError::EmptyGamma1);
        }
        let inside = |iv: &BottomInterval<T>| iv.x0 >= self.x_min && iv.x1 <= self.x_max;
        if !inside(&self.gamma1) {
            return Err(DomainError::Overlap);
        }
        if let Some(g3) = &self.gamma3 {
            if !(g3.x1 > g3.x0) || !inside(g3) {
                return Err(DomainError::Overlap);
            }
            // disjoint up to endpoints
            let lo = self.gamma1.x0.max(g3.x0);
            let hi = self.gamma1.x1.min(g3.x1);
            if hi > lo {
                return Err(DomainError::Overlap);
            }
        }
        if let Some(cap) = &self.cap {
            let half = (self.x_max - self.x_min) / lit(2.0);
            let cx = (self.x_min + self.x_max) / lit(2.0);
            let tol = lit::<T>(1e-12) * (T::one() + half.abs());
            if (cap.center[0] - cx).abs() > tol
                || (cap.center[1] - self.y_max).abs() > tol
                || (cap.radius - half).abs() > tol
            {
                return Err(DomainError::CapMismatch);
            }
        }
        Ok(())
    }

    /// Is a point on the load-bearing arc (the cap's upper semicircle)?
    pub fn on_load_arc(&self, p: [T; 2], tol: T) -> bool {
        match &self.cap {
            None => false,
            Some(cap) => {
                let dx = p[0] - cap.center[0];
                let dy = p[1] - cap.center[1];
                let r = (dx * dx + dy * dy).sqrt();
                (r - cap.radius).abs() <= tol && p[1] >= cap.center[1] - tol
            }
        }
    }

    /// Apex of the load arc, directly above the cap center.
    pub fn load_arc_apex(&self) -> Option<[T; 2]> {
        self.cap
            .as_ref()
            .map(|c| [c.center[0], c.center[1] + c.radius])
    }
}

/// The reference configuration: rectangle [0,5]x[0,2] metres with an upper
/// half-disk of radius 2.5 centred at (2.5, 2.0); clamped on [0,1]x{0},
/// potential contact on [4,5]x{0}, loaded on the upper semicircle.
pub fn build_reference_domain<T: Real>() -> DomainSpec<T> {
    let domain = DomainSpec {
        x_min: T::zero(),
        x_max: lit(5.0),
        y_min: T::zero(),
        y_max: lit(2.0),
        cap: Some(Cap {
            center: [lit(2.5), lit(2.0)],
            radius: lit(2.5),
        }),
        gamma1: BottomInterval {
            x0: T::zero(),
            x1: T::one(),
        },
        gamma3: Some(BottomInterval {
            x0: lit(4.0),
            x1: lit(5.0),
        }),
    };
    debug_assert!(domain.validate().is_ok());
    domain
}

/// Unit square with the whole bottom edge clamped; used in small tests.
pub fn unit_square_domain<T: Real>() -> DomainSpec<T> {
    DomainSpec {
        x_min: T::zero(),
        x_max: T::one(),
        y_min: T::zero(),
        y_max: T::one(),
        cap: None,
        gamma1: BottomInterval {
            x0: T::zero(),
            x1: T::one(),
        },
        gamma3: None,
    }
}
