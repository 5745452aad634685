//! The numerical studies: discrete Chebyshev error norms, sawtooth data
//! perturbation, convergence tables on dyadic meshes, Fibonacci optimization
//! of the step size under noise, and power-law fits of the optimum against
//! the noise amplitude.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::forward::{sample_rhs, BenchmarkFunction, GridFunction, Mesh};
use crate::kernel::KernelSpec;
use crate::solver::{solve, Scheme, SolveError, SolveResult};

/// Interval reductions performed by the Fibonacci search.
pub const FIBONACCI_REDUCTIONS: u32 = 10;
/// Rounds of bracket widening attempted when the objective keeps decreasing
/// at an interval end.
const BRACKET_WIDEN_ATTEMPTS: u32 = 3;

#[derive(Debug, Error, PartialEq)]
pub enum ExperimentError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("power-law fit needs at least 3 optimization results, got {got}")]
    InsufficientData { got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbationPattern {
    Sawtooth,
}

/// Additive alternating-sign data error of amplitude `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbationSpec {
    pub delta: f64,
    pub pattern: PerturbationPattern,
}

impl PerturbationSpec {
    /// Panics if `delta` is negative.
    pub fn sawtooth(delta: f64) -> Self {
        assert!(delta >= 0.0, "noise amplitude must be nonnegative");
        Self {
            delta,
            pattern: PerturbationPattern::Sawtooth,
        }
    }
}

/// Discrete Chebyshev norm of `truth - phi` over the mesh midpoints.
pub fn error_norm(truth: impl Fn(f64) -> f64, result: &SolveResult) -> f64 {
    let mesh = result.mesh;
    result
        .phi
        .values()
        .iter()
        .enumerate()
        .map(|(idx, &v)| (truth(mesh.midpoint(idx + 1)) - v).abs())
        .fold(0.0, f64::max)
}

/// `y~_i = y_i + (-1)^i delta` with the 1-based node index `i`; the first
/// node gets `-delta`.
pub fn perturb(y: &GridFunction, p: &PerturbationSpec) -> GridFunction {
    let values = y
        .values()
        .iter()
        .enumerate()
        .map(|(idx, &v)| {
            if (idx + 1) % 2 == 0 {
                v + p.delta
            } else {
                v - p.delta
            }
        })
        .collect();
    GridFunction::new(y.mesh(), y.location(), values)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub n: usize,
    pub error_midpoint: f64,
    pub error_product: f64,
}

/// Least-squares slopes of `log error` against `log h`, one per scheme.
/// NaN when fewer than two distinct steps were given.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EstimatedOrders {
    pub midpoint: f64,
    pub product: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    /// Sorted by decreasing step.
    pub rows: Vec<ConvergenceRow>,
    pub estimated_orders: EstimatedOrders,
}

/// Runs both schemes on exact data over the unit horizon for every step in
/// `steps` (each must be `1/n` for an integer `n`) and fits the convergence
/// orders. Cells are independent and run in parallel.
pub fn convergence_table(
    spec: KernelSpec,
    f: BenchmarkFunction,
    steps: &[f64],
) -> Result<ConvergenceReport, ExperimentError> {
    assert!(!steps.is_empty(), "need at least one step");
    let mut hs = steps.to_vec();
    hs.sort_by(|a, b| b.partial_cmp(a).expect("steps must be comparable"));
    hs.dedup();
    let rows = hs
        .par_iter()
        .map(|&h| {
            assert!(h > 0.0, "steps must be positive");
            let cells_real = 1.0 / h;
            let cells = cells_real.round();
            assert!(
                (cells_real - cells).abs() <= 1e-9 * cells,
                "step {h} does not divide the unit horizon"
            );
            let mesh = Mesh::new(1.0, cells as usize);
            let y = sample_rhs(spec, f, mesh);
            let truth = |t: f64| f.eval(t);
            let error_midpoint = error_norm(truth, &solve(spec, Scheme::Midpoint, &y)?);
            let error_product = error_norm(truth, &solve(spec, Scheme::ProductIntegration, &y)?);
            Ok(ConvergenceRow {
                h,
                n: cells as usize,
                error_midpoint,
                error_product,
            })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let ln_h: Vec<f64> = rows.iter().map(|r| r.h.ln()).collect();
    let ln_mid: Vec<f64> = rows.iter().map(|r| r.error_midpoint.ln()).collect();
    let ln_prod: Vec<f64> = rows.iter().map(|r| r.error_product.ln()).collect();
    Ok(ConvergenceReport {
        estimated_orders: EstimatedOrders {
            midpoint: least_squares_slope(&ln_h, &ln_mid),
            product: least_squares_slope(&ln_h, &ln_prod),
        },
        rows,
    })
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Error-minimizing step for one noise amplitude.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OptimizationResult {
    pub delta: f64,
    /// Midpoint of the final search bracket.
    pub h_opt: f64,
    /// Cell count of the mesh actually solved at `h_opt`, `round(T / h_opt)`.
    pub n_opt: usize,
    pub error_at_opt: f64,
    pub iterations: u32,
}

/// Classical Fibonacci two-point interval reduction on `[lo, hi]`.
///
/// Performs exactly `reductions` reductions — the final bracket is
/// `(hi - lo) / F_{reductions+2}` long — reusing the surviving interior
/// evaluation at every step. Probes never leave `[lo, hi]`. Comparison ties
/// keep the left subinterval. Returns the final bracket.
pub fn fibonacci_search(
    mut objective: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    reductions: u32,
) -> (f64, f64) {
    assert!(lo < hi, "empty search interval");
    let n = reductions as usize;
    let mut fib = vec![0.0f64; n + 3];
    fib[1] = 1.0;
    for k in 2..n + 3 {
        fib[k] = fib[k - 1] + fib[k - 2];
    }
    let (mut a, mut b) = (lo, hi);
    let mut x1 = a + (b - a) * fib[n] / fib[n + 2];
    let mut x2 = a + (b - a) * fib[n + 1] / fib[n + 2];
    let mut f1 = objective(x1);
    let mut f2 = objective(x2);
    for step in 0..n {
        if x2 - x1 < 1e-12 * (hi - lo) {
            // the schedule degenerates to coincident probes on the last step
            x2 = x1 + 1e-7 * (b - a);
            f2 = objective(x2);
        }
        let keep_left = f1 <= f2;
        if keep_left {
            b = x2;
            x2 = x1;
            f2 = f1;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
        }
        if step + 1 < n {
            let m = n - step - 1;
            if keep_left {
                x1 = a + (b - a) * fib[m] / fib[m + 2];
                f1 = objective(x1);
            } else {
                x2 = a + (b - a) * fib[m + 1] / fib[m + 2];
                f2 = objective(x2);
            }
        }
    }
    (a, b)
}

/// Minimizes the reconstruction error over the step size by Fibonacci search
/// with [`FIBONACCI_REDUCTIONS`] reductions.
///
/// Every probe rounds `n = round(T/h)` (at least 1) and re-derives `h = T/n`
/// so the mesh stays uniform; a probe whose solve degenerates scores
/// infinity and the search continues. Before searching, the bracket premise
/// (objective large at both ends) is checked against the geometric midpoint;
/// a failing end is widened geometrically — `lo` halved down to `T/4096`,
/// `hi` doubled up to `T/2` — a few times, with a warning. The returned
/// `h_opt` is the midpoint of the final bracket; `error_at_opt` re-solves at
/// `round(T/h_opt)` cells and propagates any failure there.
pub fn fibonacci_optimize_h(
    spec: KernelSpec,
    f: BenchmarkFunction,
    scheme: Scheme,
    delta: f64,
    horizon: f64,
    interval: (f64, f64),
) -> Result<OptimizationResult, ExperimentError> {
    assert!(horizon > 0.0, "horizon must be positive");
    assert!(delta >= 0.0, "noise amplitude must be nonnegative");
    let (mut lo, mut hi) = interval;
    assert!(0.0 < lo && lo < hi, "empty step interval");
    assert!(
        hi <= horizon / 4.0 * (1.0 + 1e-12),
        "upper step bound must not exceed T/4"
    );

    let pert = PerturbationSpec::sawtooth(delta);
    let probe = |h: f64| -> f64 {
        let mesh = Mesh::new(horizon, probe_cells(horizon, h));
        let noisy = perturb(&sample_rhs(spec, f, mesh), &pert);
        match solve(spec, scheme, &noisy) {
            Ok(result) => error_norm(|t| f.eval(t), &result),
            Err(_) => f64::INFINITY,
        }
    };

    let lo_floor = horizon / 4096.0;
    let hi_cap = horizon / 2.0;
    for _ in 0..BRACKET_WIDEN_ATTEMPTS {
        let mid = (lo * hi).sqrt();
        let (f_lo, f_mid, f_hi) = (probe(lo), probe(mid), probe(hi));
        let mut widened = false;
        if f_hi <= f_mid && hi < hi_cap {
            hi = (hi * 2.0).min(hi_cap);
            widened = true;
            log::warn!(
                "objective not increasing at the upper step bound; widening to hi = {hi:e}"
            );
        }
        if f_lo <= f_mid && lo > lo_floor {
            lo = (lo * 0.5).max(lo_floor);
            widened = true;
            log::warn!(
                "objective not increasing at the lower step bound; widening to lo = {lo:e}"
            );
        }
        if !widened {
            break;
        }
    }

    let (a, b) = fibonacci_search(probe, lo, hi, FIBONACCI_REDUCTIONS);
    let h_opt = 0.5 * (a + b);
    let n_opt = probe_cells(horizon, h_opt);
    let mesh = Mesh::new(horizon, n_opt);
    let noisy = perturb(&sample_rhs(spec, f, mesh), &pert);
    let result = solve(spec, scheme, &noisy)?;
    Ok(OptimizationResult {
        delta,
        h_opt,
        n_opt,
        error_at_opt: error_norm(|t| f.eval(t), &result),
        iterations: FIBONACCI_REDUCTIONS,
    })
}

fn probe_cells(horizon: f64, h: f64) -> usize {
    ((horizon / h).round() as usize).max(1)
}

/// Least-squares slopes of `log h_opt` and `log error` against `log delta`.
pub fn scaling_exponents(results: &[OptimizationResult]) -> Result<(f64, f64), ExperimentError> {
    if results.len() < 3 {
        return Err(ExperimentError::InsufficientData {
            got: results.len(),
        });
    }
    let ln_delta: Vec<f64> = results.iter().map(|r| r.delta.ln()).collect();
    let ln_h: Vec<f64> = results.iter().map(|r| r.h_opt.ln()).collect();
    let ln_err: Vec<f64> = results.iter().map(|r| r.error_at_opt.ln()).collect();
    Ok((
        least_squares_slope(&ln_delta, &ln_h),
        least_squares_slope(&ln_delta, &ln_err),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::Location;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::cell::RefCell;

    #[test]
    fn perturb_zero_amplitude_is_identity() {
        let mesh = Mesh::new(1.0, 5);
        let y = GridFunction::new(mesh, Location::Nodes, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(perturb(&y, &PerturbationSpec::sawtooth(0.0)), y);
    }

    #[test]
    fn perturb_sign_convention_starts_negative() {
        let mesh = Mesh::new(1.0, 4);
        let y = GridFunction::zeros(mesh, Location::Nodes);
        let noisy = perturb(&y, &PerturbationSpec::sawtooth(1e-2));
        assert_eq!(noisy.values(), &[-1e-2, 1e-2, -1e-2, 1e-2]);
    }

    #[test]
    fn perturb_sup_distance_equals_amplitude() {
        let mesh = Mesh::new(2.0, 7);
        let y = GridFunction::new(mesh, Location::Nodes, (0..7).map(|i| i as f64).collect());
        let noisy = perturb(&y, &PerturbationSpec::sawtooth(0.125));
        let sup = y
            .values()
            .iter()
            .zip(noisy.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert_eq!(sup, 0.125);
    }

    #[test]
    fn error_norm_zero_when_truth_matches() {
        let spec = KernelSpec::new(2);
        let mesh = Mesh::new(1.0, 8);
        let y = sample_rhs(spec, BenchmarkFunction::Phi1, mesh);
        let result = solve(spec, Scheme::ProductIntegration, &y).unwrap();
        let phi = result.phi.clone();
        let norm = error_norm(
            |t| {
                let idx = ((t / mesh.step()) + 0.5).round() as usize;
                phi.values()[idx - 1]
            },
            &result,
        );
        assert_eq!(norm, 0.0);
    }

    #[test]
    fn fibonacci_probes_stay_inside_and_bracket_shrinks_by_f12() {
        let lo = 0.5;
        let hi = 2.0;
        let probes = RefCell::new(Vec::new());
        let (a, b) = fibonacci_search(
            |x| {
                probes.borrow_mut().push(x);
                (x - 1.3) * (x - 1.3)
            },
            lo,
            hi,
            FIBONACCI_REDUCTIONS,
        );
        assert!(probes.borrow().iter().all(|&x| (lo..=hi).contains(&x)));
        assert_relative_eq!(b - a, (hi - lo) / 144.0, max_relative = 1e-5);
        let mid = 0.5 * (a + b);
        assert!((mid - 1.3).abs() <= (hi - lo) / 144.0);
    }

    #[test]
    fn fibonacci_handles_minimum_at_left_end() {
        let (a, b) = fibonacci_search(|x| x, 0.0, 1.0, FIBONACCI_REDUCTIONS);
        assert!(a == 0.0 && b <= 1.0 / 100.0);
    }

    #[test]
    fn synthetic_power_law_recovers_exact_slopes() {
        let results: Vec<OptimizationResult> = [1e-1, 1e-2, 1e-4, 1e-5]
            .iter()
            .map(|&delta: &f64| OptimizationResult {
                delta,
                h_opt: delta.powf(1.0 / 3.0),
                n_opt: 1,
                error_at_opt: delta.powf(2.0 / 3.0),
                iterations: FIBONACCI_REDUCTIONS,
            })
            .collect();
        let (sh, se) = scaling_exponents(&results).unwrap();
        assert_abs_diff_eq!(sh, 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(se, 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn reference_table_slopes() {
        // slopes recomputed from the published optimal steps and errors
        let hs = [0.011483, 0.009843, 0.002297, 0.000656];
        let errs = [0.295398, 0.030797, 0.001929, 0.000629];
        let results: Vec<OptimizationResult> = [1e-1, 1e-2, 1e-4, 1e-5]
            .iter()
            .zip(hs.iter().zip(errs.iter()))
            .map(|(&delta, (&h_opt, &error_at_opt))| OptimizationResult {
                delta,
                h_opt,
                n_opt: 1,
                error_at_opt,
                iterations: FIBONACCI_REDUCTIONS,
            })
            .collect();
        let (sh, se) = scaling_exponents(&results).unwrap();
        assert_abs_diff_eq!(sh, 0.311827, epsilon = 1e-3);
        assert_abs_diff_eq!(se, 0.654669, epsilon = 1e-3);
    }

    #[test]
    fn scaling_needs_three_points() {
        let one = OptimizationResult {
            delta: 0.1,
            h_opt: 0.1,
            n_opt: 1,
            error_at_opt: 0.1,
            iterations: FIBONACCI_REDUCTIONS,
        };
        assert_eq!(
            scaling_exponents(&[one, one]),
            Err(ExperimentError::InsufficientData { got: 2 })
        );
    }

    #[test]
    fn noise_free_optimum_is_pushed_to_the_smallest_steps() {
        let horizon = 0.0292;
        let lo = (1e-4f64).max(horizon / 1000.0);
        let hi = horizon / 4.0;
        let result = fibonacci_optimize_h(
            KernelSpec::new(4),
            BenchmarkFunction::Phi1,
            Scheme::Midpoint,
            0.0,
            horizon,
            (lo, hi),
        )
        .unwrap();
        assert!(
            result.h_opt <= lo,
            "expected the search to chase the fine end, got h_opt = {}",
            result.h_opt
        );
        assert_eq!(result.iterations, FIBONACCI_REDUCTIONS);
    }

    #[test]
    fn optimize_matches_reference_scale_at_delta_1e2() {
        let horizon = 0.0292;
        let lo = (1e-4f64).max(horizon / 1000.0);
        let hi = horizon / 4.0;
        let result = fibonacci_optimize_h(
            KernelSpec::new(4),
            BenchmarkFunction::Phi1,
            Scheme::Midpoint,
            1e-2,
            horizon,
            (lo, hi),
        )
        .unwrap();
        // same order of magnitude as the reference optimum 0.009843
        assert!((result.h_opt / 0.009843).log10().abs() <= 1.0, "h_opt = {}", result.h_opt);
        // reference error 0.030797 within a factor of 3
        assert!(
            result.error_at_opt >= 0.030797 / 3.0 && result.error_at_opt <= 0.030797 * 3.0,
            "error_at_opt = {}",
            result.error_at_opt
        );
    }
}
