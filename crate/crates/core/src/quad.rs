//! Adaptive Simpson quadrature and compensated summation.

const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson on `[a, b]` (either orientation) to relative tolerance
/// `rel_tol`, with an absolute floor `abs_tol`.
pub fn adaptive_simpson<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64, E> {
    if a == b {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a)?, f(m)?, f(b)?);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let tol = (rel_tol * whole.abs()).max(abs_tol);
    recurse(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn recurse<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, E> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol || !delta.is_finite() {
        return Ok(left + right + delta / 15.0);
    }
    Ok(recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
