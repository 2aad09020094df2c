//! Brute-force reference computations used by the test suites. Everything
//! here is deliberately independent of the solver code paths it checks:
//! plain grid scans over explicitly written objectives.

/// Closed-form scalar prox of alpha * x^+ (the map under test).
pub fn prox_scalar(z: f64, alpha: f64) -> f64 {
    if z > alpha {
        z - alpha
    } else if z >= 0.0 {
        0.0
    } else {
        z
    }
}

/// Minimize alpha x^+ + (x - z)^2 / 2 by a coarse-to-fine grid scan; the
/// final resolution is `fine`.
pub fn prox_scalar_grid(z: f64, alpha: f64, fine: f64) -> f64 {
    let obj = |x: f64| alpha * x.max(0.0) + 0.5 * (x - z) * (x - z);
    let lo = z.min(0.0) - alpha.abs() - 1.0;
    let hi = z.max(0.0) + 1.0;
    let (mut best_x, mut best_v) = (lo, obj(lo));
    let coarse = 1e-3;
    let n = ((hi - lo) / coarse).ceil() as usize;
    for i in 0..=n {
        let x = lo + i as f64 * coarse;
        let v = obj(x);
        if v < best_v {
            best_v = v;
            best_x = x;
        }
    }
    let (lo, hi) = (best_x - 2.0 * coarse, best_x + 2.0 * coarse);
    let n = ((hi - lo) / fine).ceil() as usize;
    for i in 0..=n {
        let x = lo + i as f64 * fine;
        let v = obj(x);
        if v < best_v {
            best_v = v;
            best_x = x;
        }
    }
    best_x
}

/// Minimize (1/2) a x^2 + c x^+ - f x by grid scan (the one-dimensional
/// instance of the per-step cost).
pub fn quadratic_plus_hinge_argmin_grid(a: f64, c: f64, f: f64, fine: f64) -> f64 {
    let obj = |x: f64| 0.5 * a * x * x + c * x.max(0.0) - f * x;
    let bound = 2.0 * (f.abs() + c.abs()) / a + 1.0;
    let (mut best_x, mut best_v) = (-bound, obj(-bound));
    let coarse = 1e-3;
    let n = ((2.0 * bound) / coarse).ceil() as usize;
    for i in 0..=n {
        let x = -bound + i as f64 * coarse;
        let v = obj(x);
        if v < best_v {
            best_v = v;
            best_x = x;
        }
    }
    let (lo, hi) = (best_x - 2.0 * coarse, best_x + 2.0 * coarse);
    let n = ((hi - lo) / fine).ceil() as usize;
    for i in 0..=n {
        let x = lo + i as f64 * fine;
        let v = obj(x);
        if v < best_v {
            best_v = v;
            best_x = x;
        }
    }
    best_x
}

/// Brute-force prox of the conjugate: argmin_y j*(y)/step + (y - w)^2 / 2,
/// where j*(y) = sup_x (x y - alpha x^+) is itself evaluated on a grid.
pub fn conjugate_prox_scalar_grid(w: f64, alpha: f64, step: f64) -> f64 {
    let x_max = 40.0;
    let conj = |y: f64| {
        let mut sup = f64::NEG_INFINITY;
        let n = 8000usize;
        for i in 0..=n {
            let x = -x_max + 2.0 * x_max * i as f64 / n as f64;
            sup = sup.max(x * y - alpha * x.max(0.0));
        }
        sup
    };
    let span = alpha.abs() + w.abs() + 2.0;
    let (mut best_y, mut best_v) = (0.0, f64::INFINITY);
    let n = 4000usize;
    for i in 0..=n {
        let y = -span + 2.0 * span * i as f64 / n as f64;
        let v = conj(y) / step + 0.5 * (y - w) * (y - w);
        if v < best_v {
            best_v = v;
            best_y = y;
        }
    }
    best_y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_prox_finds_known_kink_cases() {
        // from the closed form: z=5, alpha=2 -> 3; z=1, alpha=2 -> 0; z=-1 -> -1
        assert!((prox_scalar_grid(5.0, 2.0, 1e-4) - 3.0).abs() < 1e-4);
        assert!(prox_scalar_grid(1.0, 2.0, 1e-4).abs() < 1e-4);
        assert!((prox_scalar_grid(-1.0, 2.0, 1e-4) + 1.0).abs() < 1e-4);
    }

    #[test]
    fn hinge_argmin_branches() {
        // a=2, c=1: f=3 -> x=(3-1)/2=1; f in [0, c] -> x=0
        assert!((quadratic_plus_hinge_argmin_grid(2.0, 1.0, 3.0, 1e-6) - 1.0).abs() < 1e-5);
        assert!(quadratic_plus_hinge_argmin_grid(2.0, 1.0, 0.5, 1e-6).abs() < 1e-5);
        // negative f drives x negative: a x = f
        assert!((quadratic_plus_hinge_argmin_grid(2.0, 1.0, -3.0, 1e-6) + 1.5).abs() < 1e-5);
    }
}
