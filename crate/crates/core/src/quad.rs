//! Quadrature helpers: fixed 64-node Gauss-Legendre on breakpoint-split
//! intervals, plus adaptive Simpson for integrands without declared breaks.

use gauss_quad::legendre::GaussLegendre;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

/// Node count of the Gauss-Legendre rule used throughout.
pub const GL_NODES: usize = 64;

fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(GL_NODES).unwrap()))
}

/// Integrates `f` over `[a, b]`, splitting at every breakpoint strictly inside.
/// Returns the signed integral (negative when `b < a`).
pub fn gauss_legendre<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, breakpoints: &[f64]) -> f64 {
    if a == b {
        return 0.0;
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x.is_finite() && x > lo && x < hi)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut total = 0.0;
    let mut left = lo;
    for &c in cuts.iter().chain(std::iter::once(&hi)) {
        if c > left {
            total += rule().integrate(left, c, &mut f);
        }
        left = c;
    }
    sign * total
}

/// Adaptive Simpson quadrature with a relative tolerance and depth cap.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_depth: u32,
) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let tol = rel_tol * whole.abs().max(f64::MIN_POSITIVE);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_handles_kinks_at_breakpoints() {
        let f = |x: f64| if x < 1.0 { 0.0 } else { x - 1.0 };
        let v = gauss_legendre(f, 0.0, 3.0, &[1.0]);
        assert!((v - 2.0).abs() < 1e-13);
        assert!((gauss_legendre(f, 3.0, 0.0, &[1.0]) + 2.0).abs() < 1e-13);
    }

    #[test]
    fn simpson_matches_exponential_integral() {
        let v = adaptive_simpson(|x: f64| (-x).exp(), 0.0, 5.0, 1e-10, 40);
        assert!((v - (1.0 - (-5.0f64).exp())).abs() < 1e-9);
    }
}
