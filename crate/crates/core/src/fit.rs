//! Least-squares fit of `y = c + a cos(w x) + b sin(w x)`.
//!
//! For fixed `w` the model is linear in `(c, a, b)`, so the search runs over
//! `w` alone (variable projection): a dense grid, a golden-section
//! refinement of the best bracket, then a few Gauss-Newton steps on all
//! parameters.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SinusoidFit {
    pub omega: f64,
    pub c: f64,
    pub a: f64,
    pub b: f64,
    /// Residual sum of squares.
    pub rss: f64,
}

impl SinusoidFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.c + self.a * (self.omega * x).cos() + self.b * (self.omega * x).sin()
    }

    pub fn amplitude(&self) -> f64 {
        self.a.hypot(self.b)
    }

    /// Phase `phi` with `a cos + b sin = A cos(w x + phi)`.
    pub fn phase(&self) -> f64 {
        (-self.b).atan2(self.a)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FitOptions {
    pub omega_min: f64,
    pub omega_max: f64,
    pub grid: usize,
    /// Known constant term; `None` fits it.
    pub offset: Option<f64>,
}

const GOLDEN_ITERS: usize = 100;
const GN_ITERS: usize = 30;

// Linear least squares for the amplitudes at fixed omega.
fn linear(x: &[f64], y: &[f64], omega: f64, offset: Option<f64>) -> Option<SinusoidFit> {
    let n = x.len();
    let cols = if offset.is_some() { 2 } else { 3 };
    let mut design = DMatrix::<f64>::zeros(n, cols);
    let mut rhs = DVector::<f64>::zeros(n);
    for k in 0..n {
        let (s, c) = (omega * x[k]).sin_cos();
        let mut j = 0;
        if offset.is_none() {
            design[(k, 0)] = 1.0;
            j = 1;
        }
        design[(k, j)] = c;
        design[(k, j + 1)] = s;
        rhs[k] = y[k] - offset.unwrap_or(0.0);
    }
    let sol = design.clone().svd(true, true).solve(&rhs, 1e-13).ok()?;
    let (c, a, b) = match offset {
        Some(c0) => (c0, sol[0], sol[1]),
        None => (sol[0], sol[1], sol[2]),
    };
    let mut fit = SinusoidFit {
        omega,
        c,
        a,
        b,
        rss: 0.0,
    };
    fit.rss = rss(&fit, x, y);
    fit.rss.is_finite().then_some(fit)
}

fn rss(f: &SinusoidFit, x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(&xi, &yi)| (f.eval(xi) - yi).powi(2)).sum()
}

pub fn fit_sinusoid(x: &[f64], y: &[f64], opts: &FitOptions) -> Option<SinusoidFit> {
    if x.len() != y.len() || x.len() < 4 || opts.grid < 3 || !(opts.omega_max > opts.omega_min) {
        return None;
    }
    let step = (opts.omega_max - opts.omega_min) / (opts.grid - 1) as f64;
    let grid: Vec<(f64, f64)> = (0..opts.grid)
        .filter_map(|k| {
            let w = opts.omega_min + step * k as f64;
            linear(x, y, w, opts.offset).map(|f| (w, f.rss))
        })
        .collect();
    let best = grid.iter().enumerate().min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))?.0;
    let lo = grid[best.saturating_sub(1)].0;
    let hi = grid[(best + 1).min(grid.len() - 1)].0;

    let obj = |w: f64| linear(x, y, w, opts.offset).map_or(f64::INFINITY, |f| f.rss);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (obj(c), obj(d));
    for _ in 0..GOLDEN_ITERS {
        if (b - a).abs() < 1e-15 * (1.0 + b.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = obj(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = obj(d);
        }
    }
    let mut fit = linear(x, y, 0.5 * (a + b), opts.offset)?;
    polish(&mut fit, x, y, opts.offset.is_none());
    Some(fit)
}

// Gauss-Newton on (c?, a, b, omega), accepting only improving steps.
fn polish(fit: &mut SinusoidFit, x: &[f64], y: &[f64], free_offset: bool) {
    let np = if free_offset { 4 } else { 3 };
    for _ in 0..GN_ITERS {
        let n = x.len();
        let mut jac = DMatrix::<f64>::zeros(n, np);
        let mut r = DVector::<f64>::zeros(n);
        for k in 0..n {
            let (s, c) = (fit.omega * x[k]).sin_cos();
            r[k] = y[k] - fit.eval(x[k]);
            let mut j = 0;
            if free_offset {
                jac[(k, 0)] = 1.0;
                j = 1;
            }
            jac[(k, j)] = c;
            jac[(k, j + 1)] = s;
            jac[(k, j + 2)] = x[k] * (-fit.a * s + fit.b * c);
        }
        let Ok(step) = jac.svd(true, true).solve(&r, 1e-14) else {
            return;
        };
        let mut trial = *fit;
        let mut j = 0;
        if free_offset {
            trial.c += step[0];
            j = 1;
        }
        trial.a += step[j];
        trial.b += step[j + 1];
        trial.omega += step[j + 2];
        trial.rss = rss(&trial, x, y);
        if !(trial.rss < fit.rss) {
            return;
        }
        let gain = fit.rss - trial.rss;
        *fit = trial;
        if gain <= 1e-30 + 1e-15 * fit.rss {
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(f: impl Fn(f64) -> f64, n: usize, xmax: f64) -> (Vec<f64>, Vec<f64>) {
        let x: Vec<f64> = (0..n).map(|k| xmax * k as f64 / (n - 1) as f64).collect();
        let y = x.iter().map(|&v| f(v)).collect();
        (x, y)
    }

    #[test]
    fn recovers_exact_sinusoid() {
        let (x, y) = samples(|v| 0.3 + 0.2 * (2.4 * v + 1.1).cos(), 50, 2.0 * std::f64::consts::PI);
        let opts = FitOptions {
            omega_min: 0.4,
            omega_max: 6.0,
            grid: 200,
            offset: None,
        };
        let f = fit_sinusoid(&x, &y, &opts).unwrap();
        assert!((f.omega - 2.4).abs() < 1e-10, "{f:?}");
        assert!((f.amplitude() - 0.2).abs() < 1e-10);
        assert!((f.phase() - 1.1).abs() < 1e-10);
        assert!((f.c - 0.3).abs() < 1e-10);
    }

    #[test]
    fn fixed_offset_fit() {
        let (x, y) = samples(|v| 0.5 + 0.5 * (1.3 * v - 0.4).cos(), 50, 2.0 * std::f64::consts::PI);
        let opts = FitOptions {
            omega_min: 0.4,
            omega_max: 6.0,
            grid: 200,
            offset: Some(0.5),
        };
        let f = fit_sinusoid(&x, &y, &opts).unwrap();
        assert!((f.omega - 1.3).abs() < 1e-10);
        assert!((f.phase() + 0.4).abs() < 1e-10);
    }
}
