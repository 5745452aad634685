//! The midpoint-rule and product-integration discretizations of the
//! convolution operator, and the forward substitution they share.
//!
//! Collocating at node `t_i` against unknowns at the midpoints yields a lower
//! triangular system whose weights depend only on the lag `i - j`:
//!
//! ```text
//! phi_{i-1/2} = (y_i - sum_{j<i} w_{i-j} phi_{j-1/2}) / w_0
//! ```
//!
//! Midpoint rule:       `w_lag = h K_N((lag + 1/2) h)`.
//! Product integration: `w_lag = sum_p (-1)^{p+1} (e^{-a lag h} - e^{-a (lag+1) h})`,
//! `a = pi^2 p^2` — the kernel integrated exactly over one cell, which keeps
//! the scheme exact for piecewise-constant unknowns and robust for the
//! strongly oscillating kernels at larger N.

use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

use crate::forward::{GridFunction, Location, Mesh};
use crate::kernel::KernelSpec;
use crate::sum::KahanSum;

/// Conditioning guard: the diagonal weight must exceed this fraction of the
/// largest single term contributing to it.
pub const DIAGONAL_GUARD_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Midpoint,
    ProductIntegration,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Self::Midpoint => "midpoint",
            Self::ProductIntegration => "product",
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    /// The step size sits so close to a kernel sign-change scale that the
    /// diagonal weight vanishes; solving would only amplify noise.
    #[error(
        "degenerate diagonal weight: |w_0| = {magnitude:e} is below the conditioning guard {guard:e} (step too close to a kernel sign-change scale)"
    )]
    DegenerateDiagonal { magnitude: f64, guard: f64 },
}

/// Reconstructed midpoint values plus scheme metadata.
#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    pub mesh: Mesh,
    pub scheme: Scheme,
    pub kernel: KernelSpec,
    /// `phi` at the midpoints `t_{i-1/2}`.
    pub phi: GridFunction,
    /// Smallest diagonal magnitude encountered (the diagonal is constant, so
    /// this is `|w_0|`); positive whenever the solve succeeded.
    pub min_abs_denominator: f64,
}

/// Midpoint-rule weight for source lag `i - j`:
/// `pi^2 h sum_p (-1)^{p+1} p^2 exp(-pi^2 p^2 h (lag + 1/2)) = h K_N((lag + 1/2) h)`.
/// `lag = 0` is the diagonal.
pub fn midpoint_weights(spec: KernelSpec, h: f64, lag: usize) -> f64 {
    assert!(h > 0.0, "step must be positive");
    let offset = lag as f64 + 0.5;
    let mut acc = KahanSum::new();
    for p in 1..=spec.order() {
        let pp = f64::from(p * p);
        let term = pp * (-PI * PI * pp * h * offset).exp();
        acc.add(if p % 2 == 1 { term } else { -term });
    }
    PI * PI * h * acc.value()
}

/// Product-integration weight: the kernel integrated exactly over source cell
/// `j` as seen from node `i` (`1 <= j <= i`). Depends only on `i - j`.
pub fn product_weight(spec: KernelSpec, h: f64, i: usize, j: usize) -> f64 {
    assert!(j >= 1 && j <= i, "product weight needs 1 <= j <= i");
    product_weight_lag(spec, h, i - j)
}

pub(crate) fn product_weight_lag(spec: KernelSpec, h: f64, lag: usize) -> f64 {
    assert!(h > 0.0, "step must be positive");
    let lag = lag as f64;
    let mut acc = KahanSum::new();
    for p in 1..=spec.order() {
        let a = PI * PI * f64::from(p * p);
        let term = (-a * lag * h).exp() - (-a * (lag + 1.0) * h).exp();
        acc.add(if p % 2 == 1 { term } else { -term });
    }
    acc.value()
}

fn diagonal_term_scale(spec: KernelSpec, scheme: Scheme, h: f64) -> f64 {
    let mut scale = 0.0f64;
    for p in 1..=spec.order() {
        let pp = f64::from(p * p);
        let a = PI * PI * pp;
        let term = match scheme {
            Scheme::Midpoint => PI * PI * h * pp * (-0.5 * a * h).exp(),
            Scheme::ProductIntegration => 1.0 - (-a * h).exp(),
        };
        scale = scale.max(term.abs());
    }
    scale
}

/// Forward substitution for the lower triangular collocation system.
///
/// `y` must hold node samples. Weights are precomputed once as a lag-indexed
/// vector (O(n) memory, O(n^2) solve). Fails with
/// [`SolveError::DegenerateDiagonal`] when the diagonal weight falls below
/// [`DIAGONAL_GUARD_REL`] times its largest contributing term.
pub fn solve(spec: KernelSpec, scheme: Scheme, y: &GridFunction) -> Result<SolveResult, SolveError> {
    assert_eq!(
        y.location(),
        Location::Nodes,
        "solve expects the right-hand side sampled at mesh nodes"
    );
    let mesh = y.mesh();
    let n = mesh.cells();
    let h = mesh.step();
    let weights: Vec<f64> = (0..n)
        .map(|lag| match scheme {
            Scheme::Midpoint => midpoint_weights(spec, h, lag),
            Scheme::ProductIntegration => product_weight_lag(spec, h, lag),
        })
        .collect();
    let diagonal = weights[0];
    let guard = DIAGONAL_GUARD_REL * diagonal_term_scale(spec, scheme, h);
    if diagonal.abs() <= guard {
        return Err(SolveError::DegenerateDiagonal {
            magnitude: diagonal.abs(),
            guard,
        });
    }
    let rhs = y.values();
    let mut phi = vec![0.0f64; n];
    for i in 1..=n {
        let mut acc = rhs[i - 1];
        for j in 1..i {
            acc -= weights[i - j] * phi[j - 1];
        }
        phi[i - 1] = acc / diagonal;
    }
    Ok(SolveResult {
        mesh,
        scheme,
        kernel: spec,
        phi: GridFunction::new(mesh, Location::Midpoints, phi),
        min_abs_denominator: diagonal.abs(),
    })
}
