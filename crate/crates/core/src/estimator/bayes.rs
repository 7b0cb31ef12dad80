use serde::{Deserialize, Serialize};

use super::matrix::{factors, DecoyModel, StateVector};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BayesOptions {
    /// Largest relative change per component that counts as converged.
    pub tol: f64,
    pub max_iter: usize,
    pub model: DecoyModel,
}

impl Default for BayesOptions {
    fn default() -> Self {
        BayesOptions {
            tol: 0.01,
            max_iter: 10_000,
            model: DecoyModel::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BayesOutcome {
    pub x: StateVector,
    pub iterations: usize,
    pub converged: bool,
    /// Update terms dropped because their column had zero mass while the
    /// observation did not.
    pub skipped: usize,
}

/// Components below this use an absolute convergence test.
const SMALL: f64 = 0.5;
const SMALL_ABS_TOL: f64 = 0.005;

/// Reconstructs the state counts of D from the observed counts `y` of D'.
pub fn iterative_bayes(
    y: &StateVector,
    l_prime: usize,
    n: usize,
    w: usize,
    tol: f64,
    max_iter: usize,
) -> Result<BayesOutcome> {
    let opts = BayesOptions {
        tol,
        max_iter,
        ..BayesOptions::default()
    };
    iterative_bayes_observed(y, l_prime, n, w, &opts, |_, _| {})
}

pub fn iterative_bayes_with(
    y: &StateVector,
    l_prime: usize,
    n: usize,
    w: usize,
    opts: &BayesOptions,
) -> Result<BayesOutcome> {
    iterative_bayes_observed(y, l_prime, n, w, opts, |_, _| {})
}

/// As [`iterative_bayes_with`], calling `observe(t, x^t)` after every update.
pub fn iterative_bayes_observed(
    y: &StateVector,
    l_prime: usize,
    n: usize,
    w: usize,
    opts: &BayesOptions,
    mut observe: impl FnMut(usize, &[f64]),
) -> Result<BayesOutcome> {
    let k = 1usize << (w + 1);
    if y.len() != k {
        return Err(Error::InvalidParameter(format!(
            "observation has {} states but w={w} needs {k}",
            y.len()
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("N must be positive".into()));
    }
    if l_prime == 0 {
        return Err(Error::InvalidParameter("l' must be at least 1".into()));
    }
    if opts.tol.is_nan() || opts.tol <= 0.0 || opts.max_iter == 0 {
        return Err(Error::InvalidParameter(
            "tolerance must be positive and max_iter at least 1".into(),
        ));
    }
    let nf = n as f64;
    if (y.total() - nf).abs() > 1e-9 * nf {
        return Err(Error::InvalidParameter(format!(
            "observed counts sum to {} but N={n}",
            y.total()
        )));
    }

    let y = y.counts();
    let mut x = y.to_vec();
    let mut col = vec![0.0; k];
    let mut skipped = 0;
    for iteration in 1..=opts.max_iter {
        let fs = factors(&x, l_prime, nf, w, opts.model);

        // col_j = Σ_r a_rj x_r
        col.copy_from_slice(&x);
        for (i, f) in fs.iter().enumerate() {
            apply(&mut col, w - 1 - i, |v0, v1| (v0 * f[0] + v1 * f[2], v0 * f[1] + v1 * f[3]));
        }
        // z_j = y_j / col_j, then (M z)_i
        for (c, &yj) in col.iter_mut().zip(y) {
            *c = if *c > 0.0 {
                yj / *c
            } else {
                if yj > 0.0 {
                    skipped += 1;
                }
                0.0
            };
        }
        for (i, f) in fs.iter().enumerate() {
            apply(&mut col, w - 1 - i, |v0, v1| (f[0] * v0 + f[1] * v1, f[2] * v0 + f[3] * v1));
        }

        let mut converged = true;
        for (xi, r) in x.iter_mut().zip(&col) {
            let next = *xi * r;
            if !next.is_finite() || next < 0.0 {
                return Err(Error::Numerical(format!(
                    "state count became {next} at iteration {iteration}"
                )));
            }
            let change = (next - *xi).abs();
            converged &= if *xi < SMALL {
                change <= SMALL_ABS_TOL
            } else {
                change <= opts.tol * *xi
            };
            *xi = next;
        }
        observe(iteration, &x);
        if converged || iteration == opts.max_iter {
            return Ok(BayesOutcome {
                x: StateVector::new(x)?,
                iterations: iteration,
                converged,
                skipped,
            });
        }
    }
    unreachable!("max_iter >= 1")
}

/// Applies a 2x2 map to every pair of entries that differ only in `bit`.
fn apply(v: &mut [f64], bit: usize, f: impl Fn(f64, f64) -> (f64, f64)) {
    let stride = 1 << bit;
    for i in 0..v.len() {
        if i & stride == 0 {
            let (a, b) = f(v[i], v[i | stride]);
            v[i] = a;
            v[i | stride] = b;
        }
    }
}
