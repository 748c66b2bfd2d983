//! Rate functionals of the moderate-deviation scaling.
//!
//! The energy form on space functions is
//! `<f|g> = 2 rho(1-rho) [ (f(0)-f(1))(g(0)-g(1)) + int f' g' ]`;
//! on the trigonometric basis it diagonalizes as
//! `<theta_n|theta_m> = 2 rho(1-rho) |e_n| h_n delta_{nm}` (integration by
//! parts plus the boundary identity). Both routes are implemented: the
//! closed-form diagonal is the fast path, the quadrature evaluation of the
//! defining formula is kept as an independent cross-check.
//!
//! The dynamical rate of a trajectory is a supremum of
//! `ell(b) - (1/2) int <b|b>` over time-dependent test functions. With
//! piecewise-linear coefficients on the trajectory grid each mode decouples
//! into a small concave quadratic program with a tridiagonal (finite-element
//! mass) Hessian, solved directly.

use crate::basis::{Basis, CoefficientVector, Role};
use crate::fields::FieldTrajectory;
use crate::{Error, Result};

/// Time-dependent test function `G(t, u) = sum_m b_m(t) theta_m(u)` with
/// piecewise-linear coefficient paths on a fixed knot grid.
#[derive(Debug, Clone)]
pub struct TestFunction {
    cutoff: usize,
    knots: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

impl TestFunction {
    pub fn new(knots: Vec<f64>, cutoff: usize, rows: Vec<Vec<f64>>) -> Self {
        assert!(knots.len() >= 2, "need at least two knots");
        assert_eq!(knots[0], 0.0, "test functions live on [0, T]");
        assert!(knots.windows(2).all(|w| w[0] < w[1]), "knots must increase");
        assert_eq!(knots.len(), rows.len());
        assert!(rows.iter().all(|r| r.len() == 2 * cutoff + 1));
        Self { cutoff, knots, rows }
    }

    /// Constant-in-time test function `G_t = c`.
    pub fn constant(c: &CoefficientVector, horizon: f64) -> Self {
        let row: Vec<f64> = c.iter().map(|(_, v)| v).collect();
        Self::new(vec![0.0, horizon], c.cutoff(), vec![row.clone(), row])
    }

    /// Linear ramp `b(t) = t * c`.
    pub fn ramp(c: &CoefficientVector, horizon: f64) -> Self {
        let end: Vec<f64> = c.iter().map(|(_, v)| horizon * v).collect();
        let start = vec![0.0; end.len()];
        Self::new(vec![0.0, horizon], c.cutoff(), vec![start, end])
    }

    /// Sample arbitrary coefficient paths at the given knots.
    pub fn from_fn(
        knots: Vec<f64>,
        cutoff: usize,
        f: impl Fn(f64) -> CoefficientVector,
    ) -> Self {
        let rows = knots
            .iter()
            .map(|&t| {
                let c = f(t);
                assert_eq!(c.cutoff(), cutoff);
                c.iter().map(|(_, v)| v).collect()
            })
            .collect();
        Self::new(knots, cutoff, rows)
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn horizon(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    fn slot(&self, n: i32) -> usize {
        let k = self.cutoff as i32;
        assert!(n.abs() <= k, "mode {n} beyond cutoff {k}");
        (n + k) as usize
    }

    /// Index of the knot panel containing `t` (panels are closed on the
    /// left; `t = T` belongs to the last panel).
    fn panel(&self, t: f64) -> usize {
        assert!(
            (-1e-12..=self.horizon() * (1.0 + 1e-12) + 1e-300).contains(&t),
            "time {t} outside [0, {}]",
            self.horizon()
        );
        let idx = self.knots.partition_point(|&k| k <= t);
        idx.clamp(1, self.knots.len() - 1) - 1
    }

    /// Coefficient `b_n(t)` by linear interpolation.
    pub fn coefficient(&self, n: i32, t: f64) -> f64 {
        let s = self.slot(n);
        let j = self.panel(t);
        let (t0, t1) = (self.knots[j], self.knots[j + 1]);
        let w = (t - t0) / (t1 - t0);
        self.rows[j][s] * (1.0 - w) + self.rows[j + 1][s] * w
    }

    /// Time derivative `b_n'(t)` on the panel containing `t` (query panel
    /// interiors to avoid knot ambiguity).
    pub fn slope_at(&self, n: i32, t: f64) -> f64 {
        let s = self.slot(n);
        let j = self.panel(t);
        (self.rows[j + 1][s] - self.rows[j][s]) / (self.knots[j + 1] - self.knots[j])
    }

    /// All coefficients at time `t` as a function-role vector.
    pub fn coefficients_at(&self, t: f64) -> CoefficientVector {
        let k = self.cutoff as i32;
        let values = (-k..=k).map(|n| self.coefficient(n, t)).collect();
        CoefficientVector::from_values(values, Role::Function)
    }

    /// Space value `G(t, u)`.
    pub fn eval(&self, basis: &Basis, t: f64, u: f64) -> f64 {
        basis.synthesize(&self.coefficients_at(t), u)
    }

    /// Boundary-identity residual of the induced space function at time `t`
    /// (inherited from the basis, so it vanishes for every member).
    pub fn bc_residual_at(&self, basis: &Basis, t: f64) -> (f64, f64) {
        basis.bc_residual(&self.coefficients_at(t))
    }

    pub fn scaled(&self, c: f64) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|v| c * v).collect())
            .collect();
        Self { cutoff: self.cutoff, knots: self.knots.clone(), rows }
    }

    /// Largest possible absolute space value, `max_t sum_m |b_m(t)|`
    /// (each basis function is bounded by 1; the knot maximum is exact
    /// because the summed absolute coefficients are convex per panel).
    pub fn sup_bound(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Same bound for the space derivative: `max_t sum_m |b_m(t)| k_m`.
    pub fn sup_deriv_bound(&self, basis: &Basis) -> f64 {
        let k = self.cutoff as i32;
        self.knots
            .iter()
            .enumerate()
            .map(|(j, _)| {
                (-k..=k)
                    .map(|n| self.rows[j][self.slot(n)].abs() * basis.wavenumber(n).abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// Mode weight of the energy form: `w_n = 2 rho(1-rho) |e_n| h_n`
/// (zero exactly for the constant mode).
pub fn mode_weight(basis: &Basis, n: i32, density: f64) -> f64 {
    2.0 * density * (1.0 - density) * basis.eigenvalue(n).abs() * basis.norm_sq(n)
}

/// Energy form in closed form (diagonal in the basis).
pub fn slot_inner(
    f: &CoefficientVector,
    g: &CoefficientVector,
    basis: &Basis,
    density: f64,
) -> f64 {
    assert_eq!(f.cutoff(), g.cutoff(), "cutoffs must match");
    let k = f.cutoff() as i32;
    (-k..=k)
        .map(|n| mode_weight(basis, n, density) * f.get(n) * g.get(n))
        .sum()
}

/// Energy form straight from its defining formula,
/// `2 rho(1-rho) [ (F(0)-F(1))(G(0)-G(1)) + int F' G' ]`,
/// by composite quadrature. Kept independent of the closed form so the two
/// routes cross-validate each other.
pub fn slot_inner_quadrature(
    f: &CoefficientVector,
    g: &CoefficientVector,
    basis: &Basis,
    density: f64,
    panels: usize,
) -> f64 {
    assert_eq!(f.cutoff(), g.cutoff(), "cutoffs must match");
    let fs = |u: f64| basis.synthesize(f, u);
    let gs = |u: f64| basis.synthesize(g, u);
    let fd = |u: f64| synthesize_deriv(basis, f, u);
    let gd = |u: f64| synthesize_deriv(basis, g, u);
    let jump = (fs(0.0) - fs(1.0)) * (gs(0.0) - gs(1.0));
    let grad = crate::quad::integrate(|u| fd(u) * gd(u), panels);
    2.0 * density * (1.0 - density) * (jump + grad)
}

fn synthesize_deriv(basis: &Basis, c: &CoefficientVector, u: f64) -> f64 {
    c.iter().map(|(n, v)| v * basis.eval_deriv(n, u)).sum()
}

/// Time integral of the energy form along two test functions,
/// `int_0^T <F_t|G_t> dt`, exact for the piecewise-linear coefficient paths
/// (per panel the integrand is quadratic in time).
pub fn path_inner(f: &TestFunction, g: &TestFunction, basis: &Basis, density: f64) -> f64 {
    assert_eq!(f.cutoff(), g.cutoff(), "cutoffs must match");
    assert_eq!(f.knots(), g.knots(), "knot grids must match");
    let k = f.cutoff() as i32;
    let knots = f.knots();
    let mut total = 0.0;
    for n in -k..=k {
        let w = mode_weight(basis, n, density);
        if w == 0.0 {
            continue;
        }
        let mut acc = 0.0;
        for j in 0..knots.len() - 1 {
            let dt = knots[j + 1] - knots[j];
            let f0 = f.rows[j][f.slot(n)];
            let f1 = f.rows[j + 1][f.slot(n)];
            let g0 = g.rows[j][g.slot(n)];
            let g1 = g.rows[j + 1][g.slot(n)];
            acc += dt * (2.0 * f0 * g0 + f0 * g1 + f1 * g0 + 2.0 * f1 * g1) / 6.0;
        }
        total += w * acc;
    }
    total
}

/// Linear path functional
/// `mu_T(G_T) - mu_0(G_0) - int_0^T mu_t(dG_t/dt + e G_t) dt`,
/// with the time integral by the trapezoid rule on the trajectory grid.
/// The trajectory values pair directly with the coefficients (no norm
/// factors: the trajectory stores functional values at each basis element).
pub fn ell_t(mu: &FieldTrajectory, g: &TestFunction, basis: &Basis) -> Result<f64> {
    if mu.cutoff() != g.cutoff() {
        return Err(Error::CutoffMismatch(mu.cutoff(), g.cutoff()));
    }
    let times = mu.times();
    let horizon = *times.last().unwrap();
    let last = times.len() - 1;
    let k = mu.cutoff() as i32;
    let mut total = 0.0;
    for n in -k..=k {
        let e = basis.eigenvalue(n);
        let mut val = mu.value(last, n) * g.coefficient(n, horizon)
            - mu.value(0, n) * g.coefficient(n, 0.0);
        for j in 0..last {
            let (t0, t1) = (times[j], times[j + 1]);
            let slope = g.slope_at(n, 0.5 * (t0 + t1));
            let b0 = g.coefficient(n, t0);
            let b1 = g.coefficient(n, t1);
            val -= 0.5
                * (t1 - t0)
                * (mu.value(j, n) * (slope + e * b0) + mu.value(j + 1, n) * (slope + e * b1));
        }
        total += val;
    }
    Ok(total)
}

/// Initial rate of a starting functional: `sum_n v(n)^2 / (2 rho(1-rho) h_n)`,
/// the per-mode supremum of `2 v(gamma) - rho(1-rho) int gamma^2` over the
/// truncated basis span, halved.
pub fn rate_ini(v: &CoefficientVector, basis: &Basis, density: f64) -> f64 {
    let k = v.cutoff() as i32;
    let rr = density * (1.0 - density);
    (-k..=k)
        .map(|n| {
            let vn = v.get(n);
            vn * vn / (2.0 * rr * basis.norm_sq(n))
        })
        .sum()
}

/// Dynamical rate of a trajectory, with the optimizing test function.
#[derive(Debug, Clone)]
pub struct DynRate {
    /// Value of the supremum (`+inf` when the conserved mode moved).
    pub value: f64,
    /// True when the trajectory violates conservation of the constant mode
    /// beyond tolerance, which costs an infinite rate.
    pub kernel_violation: bool,
    /// Maximizer (zeros when the rate is infinite); the rate equals half its
    /// squared path-energy norm.
    pub certificate: TestFunction,
    /// Mode cutoff used.
    pub cutoff: usize,
    /// Grid size used.
    pub grid_points: usize,
}

/// Relative tolerance for conservation of the constant mode.
pub const KERNEL_TOL: f64 = 1e-8;

/// Maximize `ell(G) - (1/2) int <G|G>` over piecewise-linear test functions
/// on the trajectory grid. Modes decouple: each gives a concave quadratic
/// program with tridiagonal Hessian `w_m M` (M the piecewise-linear mass
/// matrix), solved by elimination; the mode value is `(1/2) c' g*`. The
/// constant mode carries zero energy, so any drift in it makes the supremum
/// infinite (probe `b = 1`: `ell = v_T(0) - v_0(0)`).
pub fn rate_dyn(mu: &FieldTrajectory, basis: &Basis, density: f64) -> Result<DynRate> {
    let times = mu.times();
    let l = times.len();
    assert!(l >= 2, "trajectory needs at least two grid times");
    let k = mu.cutoff() as i32;
    let mut rows = vec![vec![0.0; 2 * mu.cutoff() + 1]; l];

    let drift = (mu.value(l - 1, 0) - mu.value(0, 0)).abs();
    if drift > KERNEL_TOL * mu.value(0, 0).abs().max(1.0) {
        return Ok(DynRate {
            value: f64::INFINITY,
            kernel_violation: true,
            certificate: TestFunction::new(times.to_vec(), mu.cutoff(), rows),
            cutoff: mu.cutoff(),
            grid_points: l,
        });
    }

    let mut value = 0.0;
    for n in (-k..=k).filter(|&n| n != 0) {
        let w = mode_weight(basis, n, density);
        let e = basis.eigenvalue(n);

        // Linear form: boundary terms minus the trapezoid integral, as
        // coefficients on the nodal values of b_n.
        let mut c = vec![0.0; l];
        c[0] -= mu.value(0, n);
        c[l - 1] += mu.value(l - 1, n);
        for j in 0..l - 1 {
            let dt = times[j + 1] - times[j];
            let v0 = mu.value(j, n);
            let v1 = mu.value(j + 1, n);
            let s = 0.5 * (v0 + v1);
            c[j] += s - 0.5 * dt * e * v0;
            c[j + 1] += -s - 0.5 * dt * e * v1;
        }

        // Hessian w * M, with M the tridiagonal mass matrix of the
        // piecewise-linear nodal functions.
        let mut diag = vec![0.0; l];
        let mut off = vec![0.0; l - 1];
        for j in 0..l - 1 {
            let dt = times[j + 1] - times[j];
            diag[j] += w * dt / 3.0;
            diag[j + 1] += w * dt / 3.0;
            off[j] = w * dt / 6.0;
        }

        let g = solve_tridiagonal(&mut diag, &off, &mut c.clone())?;
        value += 0.5 * c.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>();
        let slot = (n + k) as usize;
        for (j, row) in rows.iter_mut().enumerate() {
            row[slot] = g[j];
        }
    }

    Ok(DynRate {
        value,
        kernel_violation: false,
        certificate: TestFunction::new(times.to_vec(), mu.cutoff(), rows),
        cutoff: mu.cutoff(),
        grid_points: l,
    })
}

/// Combined rate of a trajectory: initial part from the time-0 functional
/// plus the dynamical supremum.
#[derive(Debug, Clone)]
pub struct RateResult {
    pub i_ini: f64,
    pub i_dyn: f64,
    pub kernel_violation: bool,
    pub cutoff: usize,
    pub grid_points: usize,
}

impl RateResult {
    pub fn total(&self) -> f64 {
        self.i_ini + self.i_dyn
    }
}

pub fn rate_total(mu: &FieldTrajectory, basis: &Basis, density: f64) -> Result<RateResult> {
    let ini = rate_ini(&mu.functional_at(0), basis, density);
    let dyn_part = rate_dyn(mu, basis, density)?;
    Ok(RateResult {
        i_ini: ini,
        i_dyn: dyn_part.value,
        kernel_violation: dyn_part.kernel_violation,
        cutoff: dyn_part.cutoff,
        grid_points: dyn_part.grid_points,
    })
}

/// Solve a symmetric tridiagonal system in place (forward elimination plus
/// back substitution). The mass matrices here are strictly diagonally
/// dominant, so no pivoting is needed, but a vanishing pivot is still
/// reported rather than divided by.
fn solve_tridiagonal(diag: &mut [f64], off: &[f64], rhs: &mut [f64]) -> Result<Vec<f64>> {
    let l = diag.len();
    assert_eq!(off.len(), l - 1);
    assert_eq!(rhs.len(), l);
    for i in 1..l {
        let pivot = diag[i - 1];
        if pivot.abs() < 1e-300 {
            return Err(Error::SingularSystem(pivot));
        }
        let m = off[i - 1] / pivot;
        diag[i] -= m * off[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    if diag[l - 1].abs() < 1e-300 {
        return Err(Error::SingularSystem(diag[l - 1]));
    }
    let mut x = vec![0.0; l];
    x[l - 1] = rhs[l - 1] / diag[l - 1];
    for i in (0..l - 1).rev() {
        x[i] = (rhs[i] - off[i] * x[i + 1]) / diag[i];
    }
    Ok(x)
}
