//! Bounded derivative-free minimization for picking measurement settings.
//!
//! Both routines start from a uniform grid scan, which locates the right
//! basin when the objective has more than one, and then refine with
//! golden-section search. The returned value is never worse than the best
//! grid point.

use crate::error::{domain, Error, Result};

/// `(√5 − 1) / 2`
const INV_PHI: f64 = 0.618_033_988_749_894_9;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_GRID_DENSITY: usize = 64;
const MAX_SWEEPS: usize = 200;

/// Search box and resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationSpec {
    /// Closed interval per parameter.
    pub bounds: Vec<(f64, f64)>,
    /// Absolute tolerance on each parameter.
    pub tolerance: f64,
    /// Grid points per dimension for the initial scan.
    pub grid_density: usize,
}

impl OptimizationSpec {
    pub fn scalar(lo: f64, hi: f64) -> Self {
        OptimizationSpec {
            bounds: vec![(lo, hi)],
            tolerance: DEFAULT_TOLERANCE,
            grid_density: DEFAULT_GRID_DENSITY,
        }
    }

    pub fn plane(x: (f64, f64), y: (f64, f64)) -> Self {
        OptimizationSpec {
            bounds: vec![x, y],
            tolerance: DEFAULT_TOLERANCE,
            grid_density: DEFAULT_GRID_DENSITY,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_grid_density(mut self, grid_density: usize) -> Self {
        self.grid_density = grid_density;
        self
    }

    fn validate(&self, dims: usize) -> Result<()> {
        if self.bounds.len() != dims {
            return Err(domain(
                "bounds",
                format!("expected {dims} interval(s), got {}", self.bounds.len()),
            ));
        }
        for &(lo, hi) in &self.bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(domain("bounds", format!("[{lo}, {hi}] is degenerate")));
            }
        }
        if !(self.tolerance > 0.0) {
            return Err(domain("tolerance", "must be positive"));
        }
        if self.grid_density < 8 {
            return Err(domain("grid_density", "must be at least 8"));
        }
        Ok(())
    }
}

/// Result of a scalar search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMinimum {
    pub argmin: f64,
    pub value: f64,
    /// False when the best grid point sat on a bound, i.e. no interior
    /// minimum was bracketed.
    pub interior: bool,
}

/// Result of a two-parameter search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneMinimum {
    pub argmin: (f64, f64),
    pub value: f64,
    pub interior: bool,
}

fn checked(at: &[f64], value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFiniteObjective {
            at: at.to_vec(),
            value,
        })
    }
}

fn grid_point(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
    if i + 1 == n {
        hi
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

/// Golden-section search on `[a, b]`. Returns the best point it evaluated.
fn golden<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

/// Grid scan followed by golden-section refinement in the best bracket.
pub fn minimize_scalar<F>(spec: &OptimizationSpec, mut objective: F) -> Result<ScalarMinimum>
where
    F: FnMut(f64) -> f64,
{
    spec.validate(1)?;
    let (lo, hi) = spec.bounds[0];
    let n = spec.grid_density;
    let mut best = (0, f64::INFINITY);
    for i in 0..n {
        let x = grid_point(lo, hi, i, n);
        let v = checked(&[x], objective(x))?;
        if v < best.1 {
            best = (i, v);
        }
    }
    let (i, grid_value) = best;
    let a = grid_point(lo, hi, i.saturating_sub(1), n);
    let b = grid_point(lo, hi, (i + 1).min(n - 1), n);
    let (x, v) = golden(|x| checked(&[x], objective(x)), a, b, spec.tolerance)?;
    let interior = i != 0 && i != n - 1;
    Ok(if v <= grid_value {
        ScalarMinimum {
            argmin: x,
            value: v,
            interior,
        }
    } else {
        ScalarMinimum {
            argmin: grid_point(lo, hi, i, n),
            value: grid_value,
            interior,
        }
    })
}

/// Grid scan over the box, then coordinate descent with a golden-section
/// line search per coordinate until both coordinates move less than the
/// tolerance in a sweep.
pub fn minimize_2d<F>(spec: &OptimizationSpec, mut objective: F) -> Result<PlaneMinimum>
where
    F: FnMut(f64, f64) -> f64,
{
    spec.validate(2)?;
    let (xlo, xhi) = spec.bounds[0];
    let (ylo, yhi) = spec.bounds[1];
    let n = spec.grid_density;
    let mut best = ((0, 0), f64::INFINITY);
    for i in 0..n {
        let x = grid_point(xlo, xhi, i, n);
        for j in 0..n {
            let y = grid_point(ylo, yhi, j, n);
            let v = checked(&[x, y], objective(x, y))?;
            if v < best.1 {
                best = ((i, j), v);
            }
        }
    }
    let ((bi, bj), mut value) = best;
    let interior = bi != 0 && bi != n - 1 && bj != 0 && bj != n - 1;
    let mut x = grid_point(xlo, xhi, bi, n);
    let mut y = grid_point(ylo, yhi, bj, n);
    let hx = (xhi - xlo) / (n - 1) as f64;
    let hy = (yhi - ylo) / (n - 1) as f64;

    for _ in 0..MAX_SWEEPS {
        let (x0, y0) = (x, y);
        let (cx, vx) = golden(
            |t| checked(&[t, y], objective(t, y)),
            (x - hx).max(xlo),
            (x + hx).min(xhi),
            spec.tolerance,
        )?;
        if vx <= value {
            x = cx;
            value = vx;
        }
        let (cy, vy) = golden(
            |t| checked(&[x, t], objective(x, t)),
            (y - hy).max(ylo),
            (y + hy).min(yhi),
            spec.tolerance,
        )?;
        if vy <= value {
            y = cy;
            value = vy;
        }
        if (x - x0).abs() < spec.tolerance && (y - y0).abs() < spec.tolerance {
            break;
        }
    }
    Ok(PlaneMinimum {
        argmin: (x, y),
        value,
        interior,
    })
}
