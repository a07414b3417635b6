//! Dense BFGS with Armijo backtracking and central finite-difference gradients.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BfgsOptions {
    pub max_iterations: usize,
    /// Stop once the gradient ∞-norm drops below this.
    pub gradient_tolerance: f64,
    /// Stop once an accepted step's ∞-norm drops below this.
    pub step_tolerance: f64,
    /// Relative finite-difference step: `h_i = fd_step · max(|x_i|, 1)`.
    pub fd_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            gradient_tolerance: 1e-8,
            step_tolerance: 1e-12,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GradientTolerance,
    StepTolerance,
    /// No step along the descent direction lowers the objective any further.
    NoProgress,
    MaxIterations,
    /// The objective was not finite at the starting point.
    NonFinite,
}

impl Termination {
    pub fn is_converged(self) -> bool {
        matches!(
            self,
            Termination::GradientTolerance | Termination::StepTolerance | Termination::NoProgress
        )
    }
}

#[derive(Debug, Clone)]
pub struct BfgsOutcome {
    pub x: DVector<f64>,
    pub value: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub termination: Termination,
}

pub fn central_gradient<F>(f: &F, x: &DVector<f64>, rel_step: f64) -> DVector<f64>
where
    F: Fn(&DVector<f64>) -> f64,
{
    let mut probe = x.clone();
    DVector::from_fn(x.len(), |i, _| {
        let h = rel_step * x[i].abs().max(1.0);
        probe[i] = x[i] + h;
        let fp = f(&probe);
        probe[i] = x[i] - h;
        let fm = f(&probe);
        probe[i] = x[i];
        (fp - fm) / (2.0 * h)
    })
}

const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 80;

/// Minimizes `f` from `x0`. `f` may return a non-finite value to reject a
/// point; the line search then backtracks. The returned value never exceeds
/// `f(x0)`.
pub fn minimize<F>(f: F, x0: DVector<f64>, opts: &BfgsOptions) -> BfgsOutcome
where
    F: Fn(&DVector<f64>) -> f64,
{
    let n = x0.len();
    let mut x = x0;
    let mut fx = f(&x);
    if !fx.is_finite() {
        return BfgsOutcome {
            x,
            value: fx,
            gradient_norm: f64::NAN,
            iterations: 0,
            termination: Termination::NonFinite,
        };
    }
    let mut g = central_gradient(&f, &x, opts.fd_step);
    let mut h_inv = DMatrix::<f64>::identity(n, n);
    let mut fresh_hessian = true;

    for iter in 0..opts.max_iterations {
        let gnorm = g.amax();
        if gnorm < opts.gradient_tolerance {
            return BfgsOutcome {
                x,
                value: fx,
                gradient_norm: gnorm,
                iterations: iter,
                termination: Termination::GradientTolerance,
            };
        }

        let mut dir = -(&h_inv * &g);
        let mut slope = g.dot(&dir);
        if slope.is_nan() || slope >= 0.0 {
            h_inv = DMatrix::identity(n, n);
            fresh_hessian = true;
            dir = -g.clone();
            slope = g.dot(&dir);
        }

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial = &x + &dir * alpha;
            let ft = f(&trial);
            if ft.is_finite() && ft <= fx + ARMIJO_C1 * alpha * slope && ft <= fx {
                accepted = Some((trial, ft));
                break;
            }
            alpha *= 0.5;
        }

        let Some((x_new, f_new)) = accepted else {
            if !fresh_hessian {
                // retry once along steepest descent
                h_inv = DMatrix::identity(n, n);
                fresh_hessian = true;
                continue;
            }
            return BfgsOutcome {
                x,
                value: fx,
                gradient_norm: gnorm,
                iterations: iter,
                termination: Termination::NoProgress,
            };
        };

        let s = &x_new - &x;
        let g_new = central_gradient(&f, &x_new, opts.fd_step);
        let y = &g_new - &g;
        x = x_new;
        fx = f_new;
        g = g_new;

        if s.amax() < opts.step_tolerance {
            return BfgsOutcome {
                gradient_norm: g.amax(),
                x,
                value: fx,
                iterations: iter + 1,
                termination: Termination::StepTolerance,
            };
        }

        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            if fresh_hessian {
                // Shanno-Phua scaling of the initial inverse Hessian
                h_inv = DMatrix::identity(n, n) * (sy / y.dot(&y));
                fresh_hessian = false;
            }
            let rho = 1.0 / sy;
            let hy = &h_inv * &y;
            let yhy = y.dot(&hy);
            // H ← H − ρ(s·(Hy)ᵀ + (Hy)·sᵀ) + (ρ² yᵀHy + ρ) s·sᵀ
            h_inv -= (&s * hy.transpose() + &hy * s.transpose()) * rho;
            h_inv += (&s * s.transpose()) * (rho * rho * yhy + rho);
        }
    }

    BfgsOutcome {
        gradient_norm: g.amax(),
        x,
        value: fx,
        iterations: opts.max_iterations,
        termination: Termination::MaxIterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let f = |x: &DVector<f64>| (x[0] - 3.0).powi(2) + 10.0 * (x[1] + 1.0).powi(2);
        let out = minimize(
            f,
            DVector::from_vec(vec![0.0, 0.0]),
            &BfgsOptions::default(),
        );
        assert!(out.termination.is_converged(), "{:?}", out.termination);
        assert!((out.x[0] - 3.0).abs() < 1e-6);
        assert!((out.x[1] + 1.0).abs() < 1e-6);
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &DVector<f64>| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let out = minimize(
            f,
            DVector::from_vec(vec![-1.2, 1.0]),
            &BfgsOptions::default(),
        );
        assert!((out.x[0] - 1.0).abs() < 1e-4, "{:?}", out);
        assert!((out.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn never_worse_than_start() {
        // start at the minimum: nothing to gain
        let f = |x: &DVector<f64>| x.norm_squared();
        let out = minimize(f, DVector::zeros(3), &BfgsOptions::default());
        assert_eq!(out.value, 0.0);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn non_finite_start() {
        let f = |_: &DVector<f64>| f64::NAN;
        let out = minimize(f, DVector::zeros(2), &BfgsOptions::default());
        assert_eq!(out.termination, Termination::NonFinite);
    }

    #[test]
    fn rejects_infeasible_trial_points() {
        // infinite outside x > 0; minimum at x = 1
        let f = |x: &DVector<f64>| {
            if x[0] <= 0.0 {
                f64::INFINITY
            } else {
                x[0] - x[0].ln()
            }
        };
        let out = minimize(f, DVector::from_vec(vec![5.0]), &BfgsOptions::default());
        assert!((out.x[0] - 1.0).abs() < 1e-5, "{:?}", out);
    }
}
