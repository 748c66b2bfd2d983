//! Exact continuous-time simulation of the exclusion process on the ring.
//!
//! Bond `b` connects sites `b` and `b+1 mod N`. Bonds `0..N-2` ring at rate
//! `N^2`; bond `N-1` (between sites `N-1` and `0`) is the slow bond at rate
//! `N`. The simulation is the plain Gillespie construction: exponential
//! waiting times at the total rate, then an integer draw picks the bond
//! (slow bond with weight `N`, each fast bond with weight `N^2`), and the
//! two endpoint occupancies swap. Clock rings on equal occupancies are
//! no-ops but still count as events, which keeps the event statistics equal
//! to the underlying Poisson clocks.
//!
//! Observers receive the trajectory as an alternation of constant stretches
//! and exchange events, so time integrals of configuration functionals can
//! be accumulated without discretization error.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Static parameters of one lattice run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeParams {
    /// Number of ring sites `N`.
    pub sites: usize,
    /// Reference density `rho` in (0,1).
    pub density: f64,
    /// Scaling exponent: the field is divided by `N^alpha`.
    pub alpha: f64,
    /// Time horizon `T`.
    pub horizon: f64,
}

impl LatticeParams {
    pub fn new(sites: usize, density: f64, alpha: f64, horizon: f64) -> Self {
        assert!(sites >= 2, "need at least two sites");
        assert!(density > 0.0 && density < 1.0, "density must be in (0,1)");
        assert!(alpha > 0.5 && alpha < 1.0, "scaling exponent must be in (0.5,1)");
        assert!(horizon > 0.0, "horizon must be positive");
        Self { sites, density, alpha, horizon }
    }

    /// The field normalization `a_N = N^alpha`.
    pub fn scaling(&self) -> f64 {
        (self.sites as f64).powf(self.alpha)
    }

    /// Index of the slow bond (always the last one, between `N-1` and `0`).
    pub fn slow_bond(&self) -> usize {
        self.sites - 1
    }

    /// Sum of all bond rates: `N^2 (N-1) + N`.
    pub fn total_jump_rate(&self) -> f64 {
        let n = self.sites as f64;
        n * n * (n - 1.0) + n
    }

    /// Macroscopic position `x/N` of a site.
    pub fn site_fraction(&self, x: usize) -> f64 {
        x as f64 / self.sites as f64
    }

    /// Rate of one bond: `N` on the slow bond, `N^2` elsewhere.
    pub fn bond_rate(&self, bond: usize) -> f64 {
        let n = self.sites as f64;
        if bond == self.slow_bond() {
            n
        } else {
            n * n
        }
    }
}

/// Occupancy state of the ring with a cached particle count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    occupancy: Vec<u8>,
    particles: usize,
}

impl Configuration {
    pub fn from_occupancy(occupancy: Vec<u8>) -> Self {
        assert!(occupancy.iter().all(|&v| v <= 1), "occupancies are 0/1");
        let particles = occupancy.iter().map(|&v| v as usize).sum();
        Self { occupancy, particles }
    }

    pub fn all_zero(sites: usize) -> Self {
        Self { occupancy: vec![0; sites], particles: 0 }
    }

    pub fn all_one(sites: usize) -> Self {
        Self { occupancy: vec![1; sites], particles: sites }
    }

    pub fn sites(&self) -> usize {
        self.occupancy.len()
    }

    pub fn get(&self, x: usize) -> u8 {
        self.occupancy[x]
    }

    pub fn particle_count(&self) -> usize {
        self.particles
    }

    pub fn occupancy(&self) -> &[u8] {
        &self.occupancy
    }

    /// Swap the endpoint occupancies of a bond (sites `b` and `b+1 mod N`).
    fn swap_bond(&mut self, bond: usize) {
        let n = self.occupancy.len();
        let j = if bond + 1 == n { 0 } else { bond + 1 };
        self.occupancy.swap(bond, j);
    }
}

/// One clock ring: when, which bond, and the pre-swap endpoint values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    /// Bond index in `[0, N-1]`; `N-1` is the slow bond.
    pub bond: usize,
    /// Occupancy of site `bond` just before the swap.
    pub left: u8,
    /// Occupancy of site `bond+1 mod N` just before the swap.
    pub right: u8,
}

impl Event {
    /// Whether the swap changed the configuration.
    pub fn effective(&self) -> bool {
        self.left != self.right
    }
}

/// Hooks called along a single trajectory, in event order.
///
/// The driver guarantees the call pattern
/// `begin, (interval, event)*, interval, finish` where every `interval`
/// carries a maximal stretch `[t0, t1)` on which the configuration shown is
/// constant, and each `event` fires after the swap of the event at `t1` has
/// been applied.
pub trait Observer {
    fn begin(&mut self, _params: &LatticeParams, _cfg: &Configuration) {}
    /// Constant stretch `[t0, t1)` with configuration `cfg`.
    fn interval(&mut self, _t0: f64, _t1: f64, _cfg: &Configuration) {}
    /// Exchange event; `cfg` is the post-swap configuration, the pre-swap
    /// endpoint values ride on `ev`.
    fn event(&mut self, _ev: &Event, _cfg: &Configuration) {}
    fn finish(&mut self, _t_end: f64, _cfg: &Configuration) {}
}

/// Observer that retains the full event log (memory scales with `N^3 T`;
/// meant for small lattices and determinism checks).
#[derive(Debug, Default)]
pub struct EventLogger {
    pub events: Vec<Event>,
}

impl Observer for EventLogger {
    fn event(&mut self, ev: &Event, _cfg: &Configuration) {
        if let Some(last) = self.events.last() {
            debug_assert!(ev.time > last.time, "event times must increase");
        }
        self.events.push(*ev);
    }
}

/// Observer counting clock rings per bond (the realized Poisson counts).
#[derive(Debug, Default)]
pub struct BondCounter {
    pub counts: Vec<u64>,
}

impl Observer for BondCounter {
    fn begin(&mut self, params: &LatticeParams, _cfg: &Configuration) {
        self.counts = vec![0; params.sites];
    }

    fn event(&mut self, ev: &Event, _cfg: &Configuration) {
        self.counts[ev.bond] += 1;
    }
}

/// Independent replica stream: same master seed, one counter-mode stream
/// per replica index, so replicas can run in any order or in parallel
/// without affecting each other's draws.
pub fn replica_rng(master_seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replica);
    rng
}

/// Bernoulli product state at the reference density.
pub fn sample_bernoulli_product(params: &LatticeParams, rng: &mut impl Rng) -> Configuration {
    let occupancy = (0..params.sites)
        .map(|_| u8::from(rng.gen::<f64>() < params.density))
        .collect();
    Configuration::from_occupancy(occupancy)
}

/// Product state with an arbitrary site-dependent occupation probability
/// `p(x/N)`; errors out if any probability leaves [0,1].
pub fn sample_site_product(
    params: &LatticeParams,
    prob: impl Fn(f64) -> f64,
    rng: &mut impl Rng,
) -> Result<Configuration> {
    let mut occupancy = Vec::with_capacity(params.sites);
    for x in 0..params.sites {
        let p = prob(params.site_fraction(x));
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfRangeDensity(p));
        }
        occupancy.push(u8::from(rng.gen::<f64>() < p));
    }
    Ok(Configuration::from_occupancy(occupancy))
}

/// Product state tilted by a basis combination: site `x` occupied with
/// probability `rho + (a_N/N) * phi(x/N)`.
pub fn sample_profile_product(
    params: &LatticeParams,
    basis: &crate::basis::Basis,
    phi: &crate::basis::CoefficientVector,
    rng: &mut impl Rng,
) -> Result<Configuration> {
    let tilt = params.scaling() / params.sites as f64;
    sample_site_product(
        params,
        |u| params.density + tilt * basis.synthesize(phi, u),
        rng,
    )
}

/// Run one exact trajectory on `[0, T]`, driving the observers, and return
/// the final configuration. Bitwise-reproducible for a given rng state.
pub fn simulate(
    cfg0: Configuration,
    params: &LatticeParams,
    observers: &mut [&mut dyn Observer],
    rng: &mut impl Rng,
) -> Configuration {
    let n = params.sites;
    assert_eq!(cfg0.sites(), n, "configuration size must match params");
    let mut cfg = cfg0;
    let total_rate = params.total_jump_rate();
    // Integer bond weights: slow bond N, fast bonds N^2 each. Exact single
    // draw from 0..N^2(N-1)+N.
    let n64 = n as u64;
    let fast_weight = n64 * n64;
    let total_weight = fast_weight * (n64 - 1) + n64;

    for obs in observers.iter_mut() {
        obs.begin(params, &cfg);
    }

    let mut t = 0.0;
    loop {
        // (0,1] draw so the log never sees zero.
        let u: f64 = 1.0 - rng.gen::<f64>();
        let dt = -u.ln() / total_rate;
        let t_next = t + dt;
        if t_next > params.horizon {
            break;
        }
        let draw = rng.gen_range(0..total_weight);
        let bond = if draw < n64 {
            n - 1
        } else {
            ((draw - n64) / fast_weight) as usize
        };
        for obs in observers.iter_mut() {
            obs.interval(t, t_next, &cfg);
        }
        let j = if bond + 1 == n { 0 } else { bond + 1 };
        let ev = Event { time: t_next, bond, left: cfg.get(bond), right: cfg.get(j) };
        cfg.swap_bond(bond);
        debug_assert_eq!(
            cfg.particle_count(),
            cfg.occupancy().iter().map(|&v| v as usize).sum::<usize>(),
        );
        for obs in observers.iter_mut() {
            obs.event(&ev, &cfg);
        }
        t = t_next;
    }

    for obs in observers.iter_mut() {
        obs.interval(t, params.horizon, &cfg);
        obs.finish(params.horizon, &cfg);
    }
    cfg
}

/// Drive observers over `[0, T]` with the dynamics switched off (no clock
/// rings at all). Used by tests that need the trajectory bookkeeping with a
/// frozen configuration.
pub fn drive_frozen(
    cfg: Configuration,
    params: &LatticeParams,
    observers: &mut [&mut dyn Observer],
) -> Configuration {
    for obs in observers.iter_mut() {
        obs.begin(params, &cfg);
    }
    for obs in observers.iter_mut() {
        obs.interval(0.0, params.horizon, &cfg);
        obs.finish(params.horizon, &cfg);
    }
    cfg
}
