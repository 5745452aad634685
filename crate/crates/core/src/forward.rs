//! Benchmark boundary functions, the uniform mesh, sampled grid functions,
//! and the forward map `y = A(phi)` in closed form, with an independent
//! adaptive-quadrature oracle that certifies the closed forms.

use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

use crate::kernel::KernelSpec;
use crate::sum::KahanSum;

/// Absolute tolerance of the quadrature oracle.
pub const ORACLE_TOL: f64 = 1e-12;
/// Maximum subdivision depth of the adaptive quadrature.
pub const ORACLE_MAX_DEPTH: u32 = 60;

#[derive(Debug, Error, PartialEq)]
pub enum QuadratureError {
    #[error(
        "adaptive quadrature did not reach tolerance {tolerance:e} within subdivision depth {max_depth}"
    )]
    Nonconvergence { tolerance: f64, max_depth: u32 },
}

/// Uniform mesh `t_i = i h`, `i = 1..=n`, with `n h = T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mesh {
    horizon: f64,
    cells: usize,
    step: f64,
}

impl Mesh {
    /// Panics unless `horizon > 0` and `cells >= 1`.
    pub fn new(horizon: f64, cells: usize) -> Self {
        assert!(
            horizon.is_finite() && horizon > 0.0,
            "mesh horizon must be positive"
        );
        assert!(cells >= 1, "mesh needs at least one cell");
        Self {
            horizon,
            cells,
            step: horizon / cells as f64,
        }
    }

    pub fn horizon(self) -> f64 {
        self.horizon
    }

    pub fn cells(self) -> usize {
        self.cells
    }

    pub fn step(self) -> f64 {
        self.step
    }

    /// Node `t_i = i h`, 1-based.
    pub fn node(self, i: usize) -> f64 {
        assert!(i >= 1 && i <= self.cells, "node index out of range");
        i as f64 * self.step
    }

    /// Midpoint `t_{i-1/2} = (i - 1/2) h`, 1-based.
    pub fn midpoint(self, i: usize) -> f64 {
        assert!(i >= 1 && i <= self.cells, "midpoint index out of range");
        (i as f64 - 0.5) * self.step
    }

    pub fn nodes(self) -> impl Iterator<Item = f64> {
        (1..=self.cells).map(move |i| self.node(i))
    }

    pub fn midpoints(self) -> impl Iterator<Item = f64> {
        (1..=self.cells).map(move |i| self.midpoint(i))
    }
}

/// Where a grid function is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    Nodes,
    Midpoints,
}

/// Values of a function sampled at the nodes or midpoints of a mesh.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    mesh: Mesh,
    location: Location,
    values: Vec<f64>,
}

impl GridFunction {
    /// Panics unless `values.len() == mesh.cells()`.
    pub fn new(mesh: Mesh, location: Location, values: Vec<f64>) -> Self {
        assert_eq!(
            values.len(),
            mesh.cells(),
            "grid function length must equal the mesh cell count"
        );
        Self {
            mesh,
            location,
            values,
        }
    }

    pub fn zeros(mesh: Mesh, location: Location) -> Self {
        Self::new(mesh, location, vec![0.0; mesh.cells()])
    }

    pub fn mesh(&self) -> Mesh {
        self.mesh
    }

    pub fn location(&self) -> Location {
        self.location
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// The two benchmark boundary functions on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchmarkFunction {
    /// `t exp(-t)`
    Phi1,
    /// `exp(-t) sin(10 pi t)`
    Phi2,
}

impl BenchmarkFunction {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            Self::Phi1 => t * (-t).exp(),
            Self::Phi2 => (-t).exp() * (10.0 * PI * t).sin(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Phi1 => "phi1",
            Self::Phi2 => "phi2",
        }
    }
}

/// `y(t) = (A phi)(t)` for a benchmark function, in closed form.
///
/// Each kernel term needs `I_p(t) = integral_0^t exp(-a (t - s)) phi(s) ds`
/// with `a = pi^2 p^2`. With `b = a - 1` (always at least `pi^2 - 1`, so the
/// removable `a = 1` case never arises) and `w = 10 pi`:
///
/// ```text
/// phi1: I_p = (exp(-t) (b t - 1) + exp(-a t)) / b^2
/// phi2: I_p = (exp(-t) (b sin(wt) - w cos(wt)) + w exp(-a t)) / (b^2 + w^2)
/// ```
pub fn forward_exact(spec: KernelSpec, f: BenchmarkFunction, t: f64) -> f64 {
    assert!(t >= 0.0, "time must be nonnegative");
    let omega = 10.0 * PI;
    let mut acc = KahanSum::new();
    for p in 1..=spec.order() {
        let pp = f64::from(p * p);
        let a = PI * PI * pp;
        let b = a - 1.0;
        let integral = match f {
            BenchmarkFunction::Phi1 => ((-t).exp() * (b * t - 1.0) + (-a * t).exp()) / (b * b),
            BenchmarkFunction::Phi2 => {
                ((-t).exp() * (b * (omega * t).sin() - omega * (omega * t).cos())
                    + omega * (-a * t).exp())
                    / (b * b + omega * omega)
            }
        };
        let term = PI * PI * pp * integral;
        acc.add(if p % 2 == 1 { term } else { -term });
    }
    acc.value()
}

/// `integral_0^t K_N(t - s) f(s) ds` by adaptive quadrature, term by term
/// over `p` so the alternating kernel sum never cancels inside an integrand.
pub fn forward_oracle(
    spec: KernelSpec,
    f: impl Fn(f64) -> f64,
    t: f64,
) -> Result<f64, QuadratureError> {
    assert!(t >= 0.0, "time must be nonnegative");
    if t == 0.0 {
        return Ok(0.0);
    }
    let per_term = ORACLE_TOL / f64::from(spec.order());
    let mut acc = KahanSum::new();
    for p in 1..=spec.order() {
        let pp = f64::from(p * p);
        let a = PI * PI * pp;
        let integrand = |s: f64| PI * PI * pp * (-a * (t - s)).exp() * f(s);
        let term = integrate_adaptive(&integrand, 0.0, t, per_term)?;
        acc.add(if p % 2 == 1 { term } else { -term });
    }
    Ok(acc.value())
}

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute tolerance
/// `tol`, subdividing until successive refinements agree.
///
/// The interval is first cut into eight equal panels; oscillatory integrands
/// can alias the plain estimate on the whole interval into a false early
/// agreement.
pub fn integrate_adaptive(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, QuadratureError> {
    if a == b {
        return Ok(0.0);
    }
    const PANELS: usize = 8;
    let width = (b - a) / PANELS as f64;
    let panel_tol = tol / PANELS as f64;
    let mut acc = KahanSum::new();
    for k in 0..PANELS {
        let pa = a + k as f64 * width;
        let pb = if k + 1 == PANELS { b } else { pa + width };
        let m = 0.5 * (pa + pb);
        let (fa, fm, fb) = (f(pa), f(m), f(pb));
        let whole = (pb - pa) / 6.0 * (fa + 4.0 * fm + fb);
        acc.add(simpson_refine(
            f,
            pa,
            pb,
            panel_tol,
            whole,
            fa,
            fm,
            fb,
            ORACLE_MAX_DEPTH,
        )?);
    }
    Ok(acc.value())
}

#[allow(clippy::too_many_arguments)]
fn simpson_refine(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    whole: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    depth: u32,
) -> Result<f64, QuadratureError> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(QuadratureError::Nonconvergence {
            tolerance: ORACLE_TOL,
            max_depth: ORACLE_MAX_DEPTH,
        });
    }
    Ok(simpson_refine(f, a, m, 0.5 * tol, left, fa, flm, fm, depth - 1)?
        + simpson_refine(f, m, b, 0.5 * tol, right, fm, frm, fb, depth - 1)?)
}

/// Samples `y(t_i) = forward_exact(spec, f, t_i)` at every mesh node.
pub fn sample_rhs(spec: KernelSpec, f: BenchmarkFunction, mesh: Mesh) -> GridFunction {
    let values = mesh.nodes().map(|t| forward_exact(spec, f, t)).collect();
    GridFunction::new(mesh, Location::Nodes, values)
}
