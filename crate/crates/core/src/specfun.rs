//! Dawson function and a principal-value quadrature on uniform grids.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A sampled real function value at a dimensionless argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealFunctionSample {
    pub argument: f64,
    pub value: f64,
}

// Power series below, asymptotic expansion above.
const SERIES_LIMIT: f64 = 6.5;

/// Dawson's integral F(y) = exp(-y^2) * int_0^y exp(t^2) dt.
pub fn dawson(y: f64) -> Result<f64> {
    if !y.is_finite() {
        return Err(Error::Domain(format!("dawson: non-finite argument {y}")));
    }
    let ay = y.abs();
    let v = if ay <= SERIES_LIMIT {
        dawson_series(ay)
    } else {
        dawson_asymptotic(ay)
    };
    Ok(v.copysign(y))
}

/// exp(-y^2) * sum_n y^(2n+1) / (n! (2n+1)); every term positive so no
/// cancellation.
fn dawson_series(y: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    let y2 = y * y;
    let mut power = y; // y^(2n+1)/n!
    let mut sum = y;
    let mut n = 0.0;
    loop {
        n += 1.0;
        power *= y2 / n;
        let term = power / (2.0 * n + 1.0);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    (-y2).exp() * sum
}

/// F(y) ~ (1/2y) sum_k (2k-1)!! / (2y^2)^k, cut at the smallest term.
fn dawson_asymptotic(y: f64) -> f64 {
    let x = 1.0 / (2.0 * y * y);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        let next = term * (2.0 * k - 1.0) * x;
        if next >= term || next < sum * 1e-18 {
            break;
        }
        term = next;
        sum += term;
    }
    sum / (2.0 * y)
}

/// PV int f(x)/(x - x0) dx over the cells of a uniform grid.
///
/// The grid points are cell centers, so the integration range is
/// [x_first - h/2, x_last + h/2]. The singular part is subtracted off and
/// integrated in closed form; what remains is smooth and summed by the
/// midpoint rule.
pub fn pv_integral_uniform(x_first: f64, h: f64, values: &[f64], x0: f64) -> Result<f64> {
    let n = values.len();
    if n < 4 {
        return Err(Error::Range(format!(
            "principal value needs at least 4 grid points, got {n}"
        )));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Range(format!("grid step must be positive, got {h}")));
    }
    let x_last = x_first + h * (n - 1) as f64;
    if !(x0 >= x_first + h && x0 <= x_last - h) {
        return Err(Error::Range(format!(
            "evaluation point {x0} lies within one cell of the grid boundary [{x_first}, {x_last}]"
        )));
    }
    let a = x_first - 0.5 * h;
    let b = x_last + 0.5 * h;

    let s = (x0 - x_first) / h;
    let f0 = lagrange4(values, s);
    let df0 = lagrange4_derivative(values, s) / h;

    let mut sum = 0.0;
    let mut comp = 0.0;
    for (j, &fj) in values.iter().enumerate() {
        let dx = x_first + h * j as f64 - x0;
        let g = if dx.abs() < 1e-6 * h { df0 } else { (fj - f0) / dx };
        let t = sum + g;
        if sum.abs() >= g.abs() {
            comp += (sum - t) + g;
        } else {
            comp += (g - t) + sum;
        }
        sum = t;
    }
    Ok((sum + comp) * h + f0 * ((b - x0) / (x0 - a)).ln())
}

// Four-point Lagrange interpolation at fractional index s.
pub(crate) fn lagrange4(v: &[f64], s: f64) -> f64 {
    let (i0, t) = stencil(v.len(), s);
    let (p0, p1, p2, p3) = (v[i0], v[i0 + 1], v[i0 + 2], v[i0 + 3]);
    let w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
    let w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    let w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    let w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
    w0 * p0 + w1 * p1 + w2 * p2 + w3 * p3
}

fn lagrange4_derivative(v: &[f64], s: f64) -> f64 {
    let (i0, t) = stencil(v.len(), s);
    let (p0, p1, p2, p3) = (v[i0], v[i0 + 1], v[i0 + 2], v[i0 + 3]);
    let d0 = -(3.0 * t * t - 6.0 * t + 2.0) / 6.0;
    let d1 = (3.0 * t * t - 4.0 * t - 1.0) / 2.0;
    let d2 = -(3.0 * t * t - 2.0 * t - 2.0) / 2.0;
    let d3 = (3.0 * t * t - 1.0) / 6.0;
    d0 * p0 + d1 * p1 + d2 * p2 + d3 * p3
}

// Nodes i0..i0+3 with the point between the middle two; t is measured from i0+1.
fn stencil(n: usize, s: f64) -> (usize, f64) {
    let base = s.floor() as isize;
    let i0 = (base - 1).clamp(0, n as isize - 4) as usize;
    (i0, s - (i0 + 1) as f64)
}

/// (1/pi) PV int Im(w') / (w' - w_eval) dw' from samples on a uniform grid.
///
/// For a function analytic in the upper half plane this returns its real
/// part at `omega_eval`. The caller is responsible for covering the support;
/// a grid that is non-uniform or too short around the evaluation point is
/// rejected.
pub fn hilbert_transform_check(im_values: &[(f64, f64)], omega_eval: f64) -> Result<f64> {
    if im_values.len() < 4 {
        return Err(Error::Range("hilbert transform needs at least 4 samples".into()));
    }
    let x_first = im_values[0].0;
    let h = im_values[1].0 - x_first;
    let span = im_values[im_values.len() - 1].0 - x_first;
    for (j, &(x, _)) in im_values.iter().enumerate() {
        if (x - (x_first + h * j as f64)).abs() > 1e-9 * span.abs().max(1.0) {
            return Err(Error::Range(format!("grid is not uniform at sample {j}")));
        }
    }
    let values: Vec<f64> = im_values.iter().map(|&(_, v)| v).collect();
    Ok(pv_integral_uniform(x_first, h, &values, omega_eval)? / std::f64::consts::PI)
}
