//! The orthogonal trigonometric basis diagonalizing the ring Laplacian
//! coupled across the slow bond.
//!
//! The family has two branches indexed by `n`:
//!
//! - `n <= 0`: plain cosines `theta_n(u) = cos(2*pi*|n|*u)` with eigenvalue
//!   `-(2*pi*n)^2` (so `theta_0 = 1` with eigenvalue 0);
//! - `n >= 1`: shifted sines `theta_n(u) = sin(k_n*(u - 1/2))` where `k_n`
//!   is the unique root of `sin(x/2) + (x/2)cos(x/2) = 0` inside
//!   `((2n-1)pi, (2n+1)pi)`. This is the pole-free form of the tangent
//!   equation `-x/2 = tan(x/2)`.
//!
//! Every member satisfies the boundary identity
//! `G'(0) = G'(1) = G(0) - G(1)`, which is what couples the two endpoint
//! values across the slow bond. The family is orthogonal in L^2[0,1]; the
//! squared norms have closed forms kept in [`BasisFunction::norm_sq`].
//!
//! Numerical note on wavenumbers: `k_n` grows like `2n*pi`, so evaluating
//! the defining equation directly at a stored `f64` wavenumber loses
//! precision to cancellation (two O(1) terms cancel near the root while the
//! root itself is only representable to about `k_n * eps`). We therefore
//! solve and store the reduced offset `y_n = k_n - 2n*pi` in `(-pi, 0)` and
//! evaluate residuals through it, which keeps `|g(k_n)|` near 1e-14 even at
//! `n = 50`.

use std::f64::consts::PI;

/// One cached basis member: index, wavenumber, eigenvalue, squared norm.
#[derive(Debug, Clone, Copy)]
pub struct BasisFunction {
    /// Signed index; negative and zero indices are the cosine branch.
    pub index: i32,
    /// `k_n` for `index >= 1`, `2*pi*|n|` for `index <= 0`.
    pub wavenumber: f64,
    /// `-(wavenumber)^2`; zero only for the constant mode.
    pub eigenvalue: f64,
    /// `h_n = integral of theta_n^2 over [0,1]`.
    pub norm_sq: f64,
    /// Reduced offset `k_n - 2n*pi` for the sine branch, 0 otherwise.
    reduced: f64,
}

/// Whether a coefficient vector stores an expansion of a function or the
/// values of a linear functional paired against each basis member.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Coefficients `c_n` of `sum c_n theta_n`.
    Function,
    /// Values `v_n = mu(theta_n)` of a functional.
    Functional,
}

/// Dense coefficients over modes `-cutoff ..= cutoff`, tagged with how they
/// are meant to be read.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    cutoff: usize,
    values: Vec<f64>,
    role: Role,
}

impl CoefficientVector {
    pub fn zeros(cutoff: usize, role: Role) -> Self {
        Self { cutoff, values: vec![0.0; 2 * cutoff + 1], role }
    }

    /// All-zero except `1` at mode `n`.
    pub fn unit(cutoff: usize, n: i32, role: Role) -> Self {
        let mut v = Self::zeros(cutoff, role);
        v.set(n, 1.0);
        v
    }

    pub fn from_values(values: Vec<f64>, role: Role) -> Self {
        assert!(values.len() % 2 == 1, "need an odd number of modes");
        Self { cutoff: values.len() / 2, values, role }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn role(&self) -> Role {
        self.role
    }

    fn slot(&self, n: i32) -> usize {
        let k = self.cutoff as i32;
        assert!(n.abs() <= k, "mode {n} outside cutoff {k}");
        (n + k) as usize
    }

    pub fn get(&self, n: i32) -> f64 {
        self.values[self.slot(n)]
    }

    pub fn set(&mut self, n: i32, value: f64) {
        let s = self.slot(n);
        self.values[s] = value;
    }

    /// Iterate `(mode, value)` from `-cutoff` to `cutoff`.
    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        let k = self.cutoff as i32;
        (-k..=k).map(move |n| (n, self.get(n)))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            cutoff: self.cutoff,
            values: self.values.iter().map(|v| c * v).collect(),
            role: self.role,
        }
    }
}

/// Value of the defining equation through the reduced offset `y = k - 2n*pi`:
/// `g(2n*pi + y) = (-1)^n * [sin(y/2) + ((2n*pi + y)/2) cos(y/2)]`.
fn reduced_equation(n: u32, y: f64) -> f64 {
    let half = 0.5 * y;
    half.sin() + (f64::from(n) * PI + half) * half.cos()
}

/// Reduced offset `y_n` of the n-th sine wavenumber, by sign bisection on
/// `(-pi, 0)`. The bracket is guaranteed: the reduced equation is -1 at
/// `-pi` and `n*pi` at `0`.
fn solve_reduced(n: u32) -> f64 {
    assert!(n >= 1, "sine wavenumbers start at n = 1");
    let mut lo = -PI;
    let mut hi = 0.0;
    let f_lo = reduced_equation(n, lo);
    let f_hi = reduced_equation(n, hi);
    assert!(
        f_lo < 0.0 && f_hi > 0.0,
        "no sign change on the reduced bracket for n = {n}"
    );
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        if reduced_equation(n, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// The n-th sine-branch wavenumber `k_n`, the unique root of
/// `sin(x/2) + (x/2)cos(x/2)` in `((2n-1)pi, (2n+1)pi)`.
pub fn solve_wavenumber(n: u32) -> f64 {
    2.0 * PI * f64::from(n) + solve_reduced(n)
}

/// Immutable table of basis members for `|n| <= cutoff`, plus projection,
/// metric, and boundary-residual helpers built on it.
#[derive(Debug, Clone)]
pub struct Basis {
    cutoff: usize,
    entries: Vec<BasisFunction>,
}

/// Default table size; enough for every default experiment.
pub const DEFAULT_CUTOFF: usize = 8;

impl Basis {
    pub fn new(cutoff: usize) -> Self {
        assert!(cutoff >= 1, "cutoff must be at least 1");
        let k = cutoff as i32;
        let entries = (-k..=k)
            .map(|n| {
                if n >= 1 {
                    let y = solve_reduced(n as u32);
                    let k_n = 2.0 * PI * f64::from(n) + y;
                    BasisFunction {
                        index: n,
                        wavenumber: k_n,
                        eigenvalue: -k_n * k_n,
                        // sin(k_n) = sin(y_n) exactly, so go through the
                        // reduced offset for full accuracy.
                        norm_sq: 0.5 - y.sin() / (2.0 * k_n),
                        reduced: y,
                    }
                } else {
                    let k_n = 2.0 * PI * f64::from(n.unsigned_abs());
                    BasisFunction {
                        index: n,
                        wavenumber: k_n,
                        eigenvalue: -k_n * k_n,
                        norm_sq: if n == 0 { 1.0 } else { 0.5 },
                        reduced: 0.0,
                    }
                }
            })
            .collect();
        Self { cutoff, entries }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn entry(&self, n: i32) -> &BasisFunction {
        let k = self.cutoff as i32;
        assert!(n.abs() <= k, "mode {n} outside basis cutoff {k}");
        &self.entries[(n + k) as usize]
    }

    pub fn eigenvalue(&self, n: i32) -> f64 {
        self.entry(n).eigenvalue
    }

    pub fn norm_sq(&self, n: i32) -> f64 {
        self.entry(n).norm_sq
    }

    pub fn wavenumber(&self, n: i32) -> f64 {
        self.entry(n).wavenumber
    }

    /// `theta_n(u)`.
    pub fn eval(&self, n: i32, u: f64) -> f64 {
        let k = self.entry(n).wavenumber;
        if n >= 1 {
            (k * (u - 0.5)).sin()
        } else {
            (k * u).cos()
        }
    }

    /// `theta_n'(u)`.
    pub fn eval_deriv(&self, n: i32, u: f64) -> f64 {
        let k = self.entry(n).wavenumber;
        if n >= 1 {
            k * (k * (u - 0.5)).cos()
        } else {
            -k * (k * u).sin()
        }
    }

    /// `theta_n''(u)`, analytically (`= eigenvalue * theta_n(u)`).
    pub fn eval_second(&self, n: i32, u: f64) -> f64 {
        let k = self.entry(n).wavenumber;
        if n >= 1 {
            -k * k * (k * (u - 0.5)).sin()
        } else {
            -k * k * (k * u).cos()
        }
    }

    /// Residual of the wavenumber equation `|sin(k/2) + (k/2)cos(k/2)|`,
    /// evaluated through the reduced offset (see module notes). Zero for the
    /// cosine branch whose wavenumbers are exact multiples of `2*pi`.
    pub fn wavenumber_residual(&self, n: i32) -> f64 {
        if n < 1 {
            return 0.0;
        }
        reduced_equation(n as u32, self.entry(n).reduced).abs()
    }

    /// `sum c_n theta_n (u)` for a function-role vector.
    pub fn synthesize(&self, c: &CoefficientVector, u: f64) -> f64 {
        assert_eq!(c.role(), Role::Function, "synthesize wants an expansion");
        c.iter().map(|(n, v)| v * self.eval(n, u)).sum()
    }

    /// Projection coefficients `c_n = (integral f theta_n) / h_n` for
    /// `|n| <= cutoff`, by composite Gauss-Legendre quadrature.
    pub fn project(&self, f: impl Fn(f64) -> f64, panels: usize) -> CoefficientVector {
        let k = self.cutoff as i32;
        let mut out = CoefficientVector::zeros(self.cutoff, Role::Function);
        for n in -k..=k {
            let raw = crate::quad::integrate(|u| f(u) * self.eval(n, u), panels);
            out.set(n, raw / self.norm_sq(n));
        }
        out
    }

    /// Functional values `v_n = integral f theta_n` (no norm division);
    /// this is how a density profile enters the field space.
    pub fn pair_density(&self, f: impl Fn(f64) -> f64, panels: usize) -> CoefficientVector {
        let k = self.cutoff as i32;
        let mut out = CoefficientVector::zeros(self.cutoff, Role::Functional);
        for n in -k..=k {
            out.set(n, crate::quad::integrate(|u| f(u) * self.eval(n, u), panels));
        }
        out
    }

    /// Apply the extended Laplacian on coefficients: `c_n -> e_n c_n`.
    pub fn laplacian_apply(&self, c: &CoefficientVector) -> CoefficientVector {
        assert_eq!(c.role(), Role::Function, "laplacian acts on expansions");
        let mut out = CoefficientVector::zeros(c.cutoff(), Role::Function);
        for (n, v) in c.iter() {
            out.set(n, self.eigenvalue(n) * v);
        }
        out
    }

    /// Metric between two functionals: truncated weighted sum
    /// `sum 2^{-|n|} |dn| / (1 + |dn|)`, bounded by 3.
    pub fn metric(&self, a: &CoefficientVector, b: &CoefficientVector) -> f64 {
        assert_eq!(a.role(), Role::Functional, "metric compares functionals");
        assert_eq!(b.role(), Role::Functional, "metric compares functionals");
        assert_eq!(a.cutoff(), b.cutoff(), "metric needs matching cutoffs");
        a.iter()
            .zip(b.iter())
            .map(|((n, va), (_, vb))| {
                let d = (va - vb).abs();
                0.5f64.powi(n.abs()) * d / (1.0 + d)
            })
            .sum()
    }

    /// Boundary-identity residuals of a function-role vector:
    /// `(G'(0) - G'(1), G'(0) - (G(0) - G(1)))`, both zero on the span.
    pub fn bc_residual(&self, c: &CoefficientVector) -> (f64, f64) {
        assert_eq!(c.role(), Role::Function, "residual of an expansion");
        let d0: f64 = c.iter().map(|(n, v)| v * self.eval_deriv(n, 0.0)).sum();
        let d1: f64 = c.iter().map(|(n, v)| v * self.eval_deriv(n, 1.0)).sum();
        let jump: f64 = c
            .iter()
            .map(|(n, v)| v * (self.eval(n, 0.0) - self.eval(n, 1.0)))
            .sum();
        (d0 - d1, d0 - jump)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    // Frozen from an independent 30-digit bisection of the reduced equation.
    const K1: f64 = 4.057515676220868;
    const K2: f64 = 9.826360878869767;
    const H1: f64 = 0.597735309357440;

    #[test]
    fn first_two_wavenumbers_match_reference() {
        assert_abs_diff_eq!(solve_wavenumber(1), K1, epsilon = 1e-12);
        assert_abs_diff_eq!(solve_wavenumber(2), K2, epsilon = 1e-12);
    }

    #[test]
    fn wavenumber_cross_check_against_tangent_form() {
        // k/2 solves tan(y) = -y; Newton from the known location for n=1.
        let mut y = 2.0289f64;
        for _ in 0..50 {
            let f = y.tan() + y;
            let d = 1.0 / y.cos().powi(2) + 1.0;
            y -= f / d;
        }
        assert_abs_diff_eq!(solve_wavenumber(1), 2.0 * y, epsilon = 1e-12);
    }

    #[test]
    fn wavenumbers_sit_in_their_brackets() {
        for n in 1..=50u32 {
            let k = solve_wavenumber(n);
            let lo = (2.0 * f64::from(n) - 1.0) * PI;
            let hi = (2.0 * f64::from(n) + 1.0) * PI;
            assert!(lo < k && k < hi, "k_{n} = {k} outside ({lo}, {hi})");
        }
    }

    #[test]
    fn bracket_endpoints_change_sign_up_to_50() {
        let g = |x: f64| (x / 2.0).sin() + (x / 2.0) * (x / 2.0).cos();
        for n in 1..=50u32 {
            let lo = (2.0 * f64::from(n) - 1.0) * PI;
            let hi = (2.0 * f64::from(n) + 1.0) * PI;
            assert!(g(lo) * g(hi) < 0.0, "no sign change at n = {n}");
        }
    }

    #[test]
    fn wavenumber_residual_below_1e12_up_to_50() {
        let basis = Basis::new(50);
        for n in 1..=50 {
            let r = basis.wavenumber_residual(n);
            assert!(r < 1e-12, "residual {r} at n = {n}");
        }
    }

    #[test]
    fn eigenvalues_and_norms_closed_forms() {
        let basis = Basis::new(3);
        assert_abs_diff_eq!(basis.eigenvalue(1), -K1 * K1, epsilon = 1e-10);
        assert_abs_diff_eq!(basis.eigenvalue(-1), -4.0 * PI * PI, epsilon = 0.0);
        assert_eq!(basis.eigenvalue(0), 0.0);
        assert_eq!(basis.norm_sq(0), 1.0);
        assert_eq!(basis.norm_sq(-1), 0.5);
        assert_eq!(basis.norm_sq(-3), 0.5);
        assert_abs_diff_eq!(basis.norm_sq(1), H1, epsilon = 1e-13);
        assert!(basis.norm_sq(1) > 0.0 && basis.norm_sq(2) > 0.0);
    }

    #[test]
    fn norms_match_quadrature_of_theta_squared() {
        let basis = Basis::new(4);
        for n in -4..=4 {
            let q = quad::integrate(|u| basis.eval(n, u).powi(2), quad::DEFAULT_PANELS);
            assert_abs_diff_eq!(q, basis.norm_sq(n), epsilon = 1e-12);
        }
    }

    #[test]
    fn theta_spot_values() {
        let basis = Basis::new(2);
        for u in [0.0, 0.31, 0.77, 1.0] {
            assert_eq!(basis.eval(0, u), 1.0);
        }
        assert_abs_diff_eq!(basis.eval(-1, 0.0), 1.0, epsilon = 0.0);
        assert_abs_diff_eq!(basis.eval(-1, 1.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(basis.eval(1, 0.5), 0.0, epsilon = 1e-16);
    }

    #[test]
    fn orthogonality_small_block() {
        let basis = Basis::new(6);
        for n in -6..=6 {
            for m in -6..=6 {
                if n == m {
                    continue;
                }
                let q = quad::integrate(
                    |u| basis.eval(n, u) * basis.eval(m, u),
                    quad::DEFAULT_PANELS,
                );
                assert!(q.abs() < 1e-10, "overlap {q} at ({n}, {m})");
            }
        }
    }

    #[test]
    fn second_derivative_matches_eigenvalue_action() {
        let basis = Basis::new(20);
        for n in -20..=20 {
            let e = basis.eigenvalue(n);
            let tol = 1e-8 * e.abs();
            for j in 0..=100 {
                let u = j as f64 / 100.0;
                let resid = (basis.eval_second(n, u) - e * basis.eval(n, u)).abs();
                assert!(resid <= tol, "eigen residual {resid} at n={n}, u={u}");
            }
        }
    }

    #[test]
    fn boundary_residual_vanishes_per_mode() {
        let basis = Basis::new(8);
        for n in -8..=8i32 {
            let c = CoefficientVector::unit(8, n, Role::Function);
            let (grad, robin) = basis.bc_residual(&c);
            assert!(grad.abs() < 1e-12, "grad residual {grad} at n = {n}");
            assert!(robin.abs() < 1e-12, "robin residual {robin} at n = {n}");
        }
    }

    #[test]
    fn projection_of_identity_function() {
        let basis = Basis::new(5);
        let c = basis.project(|u| u, quad::DEFAULT_PANELS);
        assert_abs_diff_eq!(c.get(0), 0.5, epsilon = 1e-12);
        // Independent oracle: dense trapezoid on 2^21 panels.
        for n in -5..=5 {
            let m = 1 << 21;
            let mut acc = 0.0;
            for j in 0..=m {
                let u = j as f64 / m as f64;
                let w = if j == 0 || j == m { 0.5 } else { 1.0 };
                acc += w * u * basis.eval(n, u);
            }
            let oracle = acc / m as f64 / basis.norm_sq(n);
            assert_abs_diff_eq!(c.get(n), oracle, epsilon = 1e-8);
        }
    }

    #[test]
    fn projection_of_constant_and_single_mode() {
        let basis = Basis::new(4);
        let c5 = basis.project(|_| 5.0, quad::DEFAULT_PANELS);
        for (n, v) in c5.iter() {
            if n == 0 {
                assert_abs_diff_eq!(v, 5.0, epsilon = 1e-12);
            } else {
                assert!(v.abs() < 1e-12, "leak {v} at {n}");
            }
        }
        let c = basis.project(|u| basis.eval(2, u), quad::DEFAULT_PANELS);
        for (n, v) in c.iter() {
            let want = if n == 2 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(v, want, epsilon = 1e-9);
        }
    }

    #[test]
    fn laplacian_on_units() {
        let basis = Basis::new(2);
        let z = basis.laplacian_apply(&CoefficientVector::unit(2, 0, Role::Function));
        assert!(z.iter().all(|(_, v)| v == 0.0));
        let a = basis.laplacian_apply(&CoefficientVector::unit(2, -1, Role::Function));
        assert_abs_diff_eq!(a.get(-1), -4.0 * PI * PI, epsilon = 0.0);
        let b = basis.laplacian_apply(&CoefficientVector::unit(2, 1, Role::Function));
        assert_abs_diff_eq!(b.get(1), -16.4634334627781, epsilon = 1e-10);
    }

    #[test]
    fn metric_single_coordinate_and_bound() {
        let basis = Basis::new(4);
        let a = CoefficientVector::unit(4, 0, Role::Functional);
        let b = CoefficientVector::zeros(4, Role::Functional);
        assert_abs_diff_eq!(basis.metric(&a, &b), 0.5, epsilon = 0.0);
        assert_eq!(basis.metric(&a, &a), 0.0);
    }

    fn coeff_strategy(cutoff: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-5.0f64..5.0, 2 * cutoff + 1)
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

        #[test]
        fn metric_symmetric_bounded_triangle(
            a in coeff_strategy(4), b in coeff_strategy(4), c in coeff_strategy(4)
        ) {
            let basis = Basis::new(4);
            let a = CoefficientVector::from_values(a, Role::Functional);
            let b = CoefficientVector::from_values(b, Role::Functional);
            let c = CoefficientVector::from_values(c, Role::Functional);
            let dab = basis.metric(&a, &b);
            let dba = basis.metric(&b, &a);
            prop_assert_eq!(dab.to_bits(), dba.to_bits());
            prop_assert!(dab <= 3.0);
            let dac = basis.metric(&a, &c);
            let dcb = basis.metric(&c, &b);
            prop_assert!(dab <= dac + dcb + 1e-12);
            if dab == 0.0 {
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn projection_recovers_synthesized_combination(values in coeff_strategy(3)) {
            let basis = Basis::new(3);
            let c = CoefficientVector::from_values(values, Role::Function);
            let back = basis.project(|u| basis.synthesize(&c, u), quad::DEFAULT_PANELS);
            for ((n, orig), (_, rec)) in c.iter().zip(back.iter()) {
                prop_assert!((orig - rec).abs() < 1e-9, "mode {} drifted: {} vs {}", n, orig, rec);
            }
        }

        #[test]
        fn boundary_residual_vanishes_on_combinations(values in coeff_strategy(4)) {
            let basis = Basis::new(4);
            let c = CoefficientVector::from_values(values, Role::Function);
            let scale: f64 = c.iter().map(|(_, v)| v.abs()).sum::<f64>().max(1.0);
            let (grad, robin) = basis.bc_residual(&c);
            prop_assert!(grad.abs() < 1e-10 * scale);
            prop_assert!(robin.abs() < 1e-10 * scale);
        }
    }
}
