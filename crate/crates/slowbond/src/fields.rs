//! Empirical observables along trajectories.
//!
//! The central object is the rescaled fluctuation field: a configuration is
//! mapped to the functional `theta_n -> (1/a_N) sum_x (eta(x) - rho) theta_n(x/N)`.
//! A [`FieldRecorder`] samples that functional on a fixed time grid (the
//! configuration is piecewise constant, so grid values are exact), while
//! [`SlowBondRecorder`] accumulates the slow-bond occupation integral and the
//! per-bond gradient-square integrals with no discretization at all: each
//! integrand is piecewise constant in time, so the integral is a sum of
//! value-times-holding-time products, closed out lazily whenever the value
//! actually changes.

use crate::basis::{Basis, CoefficientVector, Role};
use crate::process::{Configuration, Event, LatticeParams, Observer};

/// Fluctuation-field value at a single basis index:
/// `(1/a_N) sum_x (eta(x) - rho) theta_n(x/N)`.
pub fn empirical_mode(
    cfg: &Configuration,
    params: &LatticeParams,
    basis: &Basis,
    n: i32,
) -> f64 {
    let mut sum = 0.0;
    for x in 0..params.sites {
        sum += (f64::from(cfg.get(x)) - params.density) * basis.eval(n, params.site_fraction(x));
    }
    sum / params.scaling()
}

/// All fluctuation-field values `|n| <= basis.cutoff()`, tagged as a
/// functional (values of the field at each basis element, not expansion
/// coefficients).
pub fn empirical_projection(
    cfg: &Configuration,
    params: &LatticeParams,
    basis: &Basis,
) -> CoefficientVector {
    let k = basis.cutoff() as i32;
    let mut out = CoefficientVector::zeros(basis.cutoff(), Role::Functional);
    for n in -k..=k {
        out.set(n, empirical_mode(cfg, params, basis, n));
    }
    out
}

/// Field paired with a synthesized test function `G = sum c_n theta_n`,
/// computed as a direct sum over sites (used to cross-check linearity of the
/// per-mode values).
pub fn empirical_pair(
    cfg: &Configuration,
    params: &LatticeParams,
    basis: &Basis,
    c: &CoefficientVector,
) -> f64 {
    let mut sum = 0.0;
    for x in 0..params.sites {
        let u = params.site_fraction(x);
        sum += (f64::from(cfg.get(x)) - params.density) * basis.synthesize(c, u);
    }
    sum / params.scaling()
}

/// `points` uniformly spaced times covering `[0, t_end]`, endpoints included.
pub fn uniform_grid(t_end: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2, "a grid needs at least the two endpoints");
    let h = t_end / (points - 1) as f64;
    (0..points)
        .map(|j| if j + 1 == points { t_end } else { j as f64 * h })
        .collect()
}

/// Default number of grid points for trajectory recording.
pub const DEFAULT_GRID_POINTS: usize = 200;

/// Per-mode field values on a time grid. Rows are indexed by grid time,
/// columns by basis index `-K..=K`.
#[derive(Debug, Clone)]
pub struct FieldTrajectory {
    times: Vec<f64>,
    cutoff: usize,
    rows: Vec<Vec<f64>>,
    params: Option<LatticeParams>,
}

impl FieldTrajectory {
    pub fn new(
        times: Vec<f64>,
        cutoff: usize,
        rows: Vec<Vec<f64>>,
        params: Option<LatticeParams>,
    ) -> Self {
        assert_eq!(times.len(), rows.len(), "one row per grid time");
        assert!(times.windows(2).all(|w| w[0] < w[1]), "grid must increase");
        assert!(rows.iter().all(|r| r.len() == 2 * cutoff + 1));
        Self { times, cutoff, rows, params }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn params(&self) -> Option<&LatticeParams> {
        self.params.as_ref()
    }

    /// Field value at grid index `j`, basis index `n`.
    pub fn value(&self, j: usize, n: i32) -> f64 {
        let k = self.cutoff as i32;
        assert!(n.abs() <= k, "mode {n} beyond cutoff {k}");
        self.rows[j][(n + k) as usize]
    }

    pub fn set_value(&mut self, j: usize, n: i32, v: f64) {
        let k = self.cutoff as i32;
        assert!(n.abs() <= k, "mode {n} beyond cutoff {k}");
        self.rows[j][(n + k) as usize] = v;
    }

    /// Raw row of mode values at grid index `j`, ordered `-K..=K`.
    pub fn row(&self, j: usize) -> &[f64] {
        &self.rows[j]
    }

    /// The functional at grid index `j` as a coefficient vector.
    pub fn functional_at(&self, j: usize) -> CoefficientVector {
        CoefficientVector::from_values(self.rows[j].clone(), Role::Functional)
    }

    /// Pairing `<mu_{t_j}, G>` for a function `G` given by coefficients `c`.
    pub fn pair(&self, j: usize, c: &CoefficientVector) -> f64 {
        assert_eq!(c.cutoff(), self.cutoff, "cutoffs must match");
        let k = self.cutoff as i32;
        (-k..=k).map(|n| c.get(n) * self.value(j, n)).sum()
    }

    /// Time series of one mode.
    pub fn mode_series(&self, n: i32) -> Vec<f64> {
        (0..self.times.len()).map(|j| self.value(j, n)).collect()
    }

    /// Trajectory with every value multiplied by a scalar.
    pub fn scaled(&self, c: f64) -> FieldTrajectory {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|v| c * v).collect())
            .collect();
        FieldTrajectory { times: self.times.clone(), cutoff: self.cutoff, rows, params: self.params }
    }
}

/// Cumulative integral `t -> int_0^t <mu_s, G> ds` on the trajectory grid,
/// by the trapezoid rule (the grid must already resolve the path; the error
/// is quadratic in the grid spacing for smooth means and bounded by
/// spacing times total variation pathwise).
pub fn time_integrated_field(traj: &FieldTrajectory, c: &CoefficientVector) -> Vec<f64> {
    let times = traj.times();
    let mut out = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    let mut prev = traj.pair(0, c);
    out.push(0.0);
    for j in 1..times.len() {
        let cur = traj.pair(j, c);
        acc += 0.5 * (prev + cur) * (times[j] - times[j - 1]);
        out.push(acc);
        prev = cur;
    }
    out
}

/// Block averages of the occupancy: consecutive blocks of `block_size`
/// sites; a final shorter block is averaged over its actual length when
/// `block_size` does not divide `N`.
pub fn block_density_profile(cfg: &Configuration, block_size: usize) -> Vec<f64> {
    assert!(block_size >= 1);
    cfg.occupancy()
        .chunks(block_size)
        .map(|b| b.iter().map(|&v| f64::from(v)).sum::<f64>() / b.len() as f64)
        .collect()
}

/// Observer sampling the fluctuation field on a fixed time grid.
///
/// Basis values at the lattice points are tabulated once at `begin`, so a
/// grid crossing costs `O((2K+1) N)` and the per-event overhead is a single
/// comparison.
pub struct FieldRecorder<'a> {
    basis: &'a Basis,
    cutoff: usize,
    grid: Vec<f64>,
    rows: Vec<Vec<f64>>,
    next: usize,
    table: Vec<Vec<f64>>,
    inv_scale: f64,
    density: f64,
    params: Option<LatticeParams>,
}

impl<'a> FieldRecorder<'a> {
    /// Record all modes `|n| <= cutoff` (which must not exceed the basis
    /// cutoff) at `points` uniform times on `[0, horizon]`.
    pub fn new(basis: &'a Basis, cutoff: usize, horizon: f64, points: usize) -> Self {
        assert!(cutoff <= basis.cutoff(), "recorder cutoff beyond basis table");
        Self {
            basis,
            cutoff,
            grid: uniform_grid(horizon, points),
            rows: Vec::with_capacity(points),
            next: 0,
            table: Vec::new(),
            inv_scale: 0.0,
            density: 0.0,
            params: None,
        }
    }

    fn record(&mut self, cfg: &Configuration) {
        let mut row = Vec::with_capacity(2 * self.cutoff + 1);
        for slot in 0..=2 * self.cutoff {
            let theta = &self.table[slot];
            let mut sum = 0.0;
            for (x, &t) in theta.iter().enumerate() {
                sum += (f64::from(cfg.get(x)) - self.density) * t;
            }
            row.push(sum * self.inv_scale);
        }
        self.rows.push(row);
    }

    /// Consume the recorder after the run and return the sampled trajectory.
    pub fn into_trajectory(self) -> FieldTrajectory {
        assert_eq!(
            self.rows.len(),
            self.grid.len(),
            "recorder consumed before the run finished"
        );
        FieldTrajectory::new(self.grid, self.cutoff, self.rows, self.params)
    }
}

impl Observer for FieldRecorder<'_> {
    fn begin(&mut self, params: &LatticeParams, _cfg: &Configuration) {
        let k = self.cutoff as i32;
        self.table = (-k..=k)
            .map(|n| {
                (0..params.sites)
                    .map(|x| self.basis.eval(n, params.site_fraction(x)))
                    .collect()
            })
            .collect();
        self.inv_scale = 1.0 / params.scaling();
        self.density = params.density;
        self.params = Some(*params);
        self.rows.clear();
        self.next = 0;
    }

    fn interval(&mut self, _t0: f64, t1: f64, cfg: &Configuration) {
        while self.next < self.grid.len() && self.grid[self.next] < t1 {
            self.record(cfg);
            self.next += 1;
        }
    }

    fn finish(&mut self, t_end: f64, cfg: &Configuration) {
        while self.next < self.grid.len() {
            debug_assert!(self.grid[self.next] <= t_end * (1.0 + 1e-12));
            self.record(cfg);
            self.next += 1;
        }
    }
}

/// Event-exact time integrals around the slow bond.
#[derive(Debug, Clone, PartialEq)]
pub struct SlowBondIntegrals {
    /// `int_0^T (eta_s(0)(1 - eta_s(N-1)) - rho(1-rho)) ds`.
    pub a: f64,
    /// Same with the two sites swapped.
    pub a_swapped: f64,
    /// `int_0^T (eta_s(x) - eta_s(x+1))^2 ds` per bond.
    pub gradsq: Vec<f64>,
    /// Number of value changes of the slow-bond integrand (for discretization
    /// error bounds in cross-checks).
    pub switch_count: u64,
}

impl SlowBondIntegrals {
    /// Mean of the gradient-square integrals over the fast bonds, normalized
    /// by `N` as in the concentration statements: `(1/N) sum_{x != slow} gradsq(x)`.
    pub fn gradsq_fast_mean(&self) -> f64 {
        let n = self.gradsq.len();
        self.gradsq[..n - 1].iter().sum::<f64>() / n as f64
    }
}

/// Observer producing [`SlowBondIntegrals`]. All integrands are piecewise
/// constant; integrals are closed out only when a value changes, so runs on
/// frozen stretches accumulate a single exact product.
#[derive(Debug, Default)]
pub struct SlowBondRecorder {
    density: f64,
    rr: f64,
    a: f64,
    a_swapped: f64,
    cur_a: f64,
    cur_swapped: f64,
    last_a: f64,
    gradsq: Vec<f64>,
    sq: Vec<f64>,
    last_bond: Vec<f64>,
    switches: u64,
}

impl SlowBondRecorder {
    pub fn new() -> Self {
        Self::default()
    }

    fn slow_values(&self, cfg: &Configuration) -> (f64, f64) {
        let n = cfg.sites();
        let right = f64::from(cfg.get(0));
        let left = f64::from(cfg.get(n - 1));
        (right * (1.0 - left) - self.rr, left * (1.0 - right) - self.rr)
    }

    fn bond_sq(cfg: &Configuration, b: usize) -> f64 {
        let n = cfg.sites();
        let j = if b + 1 == n { 0 } else { b + 1 };
        let d = f64::from(cfg.get(b)) - f64::from(cfg.get(j));
        d * d
    }

    pub fn into_integrals(self) -> SlowBondIntegrals {
        SlowBondIntegrals {
            a: self.a,
            a_swapped: self.a_swapped,
            gradsq: self.gradsq,
            switch_count: self.switches,
        }
    }
}

impl Observer for SlowBondRecorder {
    fn begin(&mut self, params: &LatticeParams, cfg: &Configuration) {
        self.density = params.density;
        self.rr = params.density * (1.0 - params.density);
        let n = params.sites;
        (self.cur_a, self.cur_swapped) = self.slow_values(cfg);
        self.a = 0.0;
        self.a_swapped = 0.0;
        self.last_a = 0.0;
        self.gradsq = vec![0.0; n];
        self.sq = (0..n).map(|b| Self::bond_sq(cfg, b)).collect();
        self.last_bond = vec![0.0; n];
        self.switches = 0;
    }

    fn event(&mut self, ev: &Event, cfg: &Configuration) {
        if !ev.effective() {
            return;
        }
        let n = cfg.sites();
        let te = ev.time;
        // The swap changed sites b and b+1, so only the slow-bond product
        // and the squared gradients of bonds b-1, b, b+1 can move.
        if ev.bond == 0 || ev.bond + 2 >= n {
            let (na, ns) = self.slow_values(cfg);
            if na != self.cur_a || ns != self.cur_swapped {
                let dt = te - self.last_a;
                self.a += self.cur_a * dt;
                self.a_swapped += self.cur_swapped * dt;
                self.last_a = te;
                self.cur_a = na;
                self.cur_swapped = ns;
                self.switches += 1;
            }
        }
        let prev = if ev.bond == 0 { n - 1 } else { ev.bond - 1 };
        let next = if ev.bond + 1 == n { 0 } else { ev.bond + 1 };
        for c in [prev, ev.bond, next] {
            let nsq = Self::bond_sq(cfg, c);
            if nsq != self.sq[c] {
                self.gradsq[c] += self.sq[c] * (te - self.last_bond[c]);
                self.last_bond[c] = te;
                self.sq[c] = nsq;
            }
        }
    }

    fn finish(&mut self, t_end: f64, _cfg: &Configuration) {
        self.a += self.cur_a * (t_end - self.last_a);
        self.a_swapped += self.cur_swapped * (t_end - self.last_a);
        self.last_a = t_end;
        for c in 0..self.gradsq.len() {
            self.gradsq[c] += self.sq[c] * (t_end - self.last_bond[c]);
            self.last_bond[c] = t_end;
        }
    }
}
