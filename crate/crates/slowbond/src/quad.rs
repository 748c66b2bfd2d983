//! Composite Gauss-Legendre quadrature on [0, 1].
//!
//! Every spatial integral in the crate runs through [`integrate`]: the unit
//! interval is split into equal panels and a fixed 16-point Gauss-Legendre
//! rule is applied on each. The rule is exact for polynomials of degree 31
//! per panel and deterministic (same integrand and panel count give the
//! same bits), which keeps quadrature-based cross-checks reproducible.

use std::sync::OnceLock;

/// Points per panel of the fixed rule.
pub const ORDER: usize = 16;

/// Default panel count; resolves products of basis modes up to |n| ~ 50.
pub const DEFAULT_PANELS: usize = 64;

static RULE: OnceLock<([f64; ORDER], [f64; ORDER])> = OnceLock::new();

/// Nodes and weights of the 16-point Gauss-Legendre rule on [-1, 1],
/// computed once by Newton iteration on the Legendre recurrence.
fn rule() -> &'static ([f64; ORDER], [f64; ORDER]) {
    RULE.get_or_init(|| {
        let n = ORDER;
        let mut nodes = [0.0; ORDER];
        let mut weights = [0.0; ORDER];
        for i in 0..n {
            // Chebyshev-like initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let step = p / d;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

/// Value and derivative of the Legendre polynomial P_n at x.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrate `f` over [0, 1] with `panels` equal panels.
pub fn integrate(f: impl Fn(f64) -> f64, panels: usize) -> f64 {
    assert!(panels > 0, "panel count must be positive");
    let (nodes, weights) = rule();
    let h = 1.0 / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        let mut panel = 0.0;
        for (x, w) in nodes.iter().zip(weights) {
            panel += w * f(mid + half * x);
        }
        total += panel * half;
    }
    total
}
