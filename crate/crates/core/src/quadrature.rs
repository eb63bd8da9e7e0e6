//! Adaptive Simpson integration with interval bisection.

use thiserror::Error;

const MAX_DEPTH: u32 = 48;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("adaptive Simpson did not converge on [{a}, {b}] (error estimate {error:e})")]
pub struct QuadratureError {
    pub a: f64,
    pub b: f64,
    pub error: f64,
}

/// Settings shared by [`integrate`]; `max_panel` caps the width of the
/// coarse panels handed to the adaptive refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub rel_tol: f64,
    pub abs_floor: f64,
    pub max_panel: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_floor: 1e-14,
            max_panel: f64::INFINITY,
        }
    }
}

impl Quadrature {
    /// Integrates `f` over `[a, b]`, `a <= b`.
    pub fn integrate<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        b: f64,
    ) -> Result<f64, QuadratureError> {
        if a == b {
            return Ok(0.0);
        }
        let width = b - a;
        let panels = if self.max_panel.is_finite() {
            (width / self.max_panel).ceil().max(1.0) as u64
        } else {
            1
        };
        let h = width / panels as f64;
        let mut total = 0.0;
        // Kahan summation, panel counts can reach millions
        let mut carry = 0.0;
        for k in 0..panels {
            let lo = a + h * k as f64;
            let hi = if k + 1 == panels {
                b
            } else {
                a + h * (k + 1) as f64
            };
            let part = self.panel(&f, lo, hi)?;
            let y = part - carry;
            let t = total + y;
            carry = (t - total) - y;
            total = t;
        }
        Ok(total)
    }

    fn panel<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> Result<f64, QuadratureError> {
        let fa = f(a);
        let fb = f(b);
        let m = 0.5 * (a + b);
        let fm = f(m);
        let whole = simpson(a, b, fa, fm, fb);
        let tol = (self.rel_tol * whole.abs()).max(self.abs_floor);
        refine(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
    }
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, QuadratureError> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 || !(m > a && m < b) {
        return Err(QuadratureError {
            a,
            b,
            error: delta.abs() / 15.0,
        });
    }
    let l = refine(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?;
    let r = refine(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?;
    Ok(l + r)
}
