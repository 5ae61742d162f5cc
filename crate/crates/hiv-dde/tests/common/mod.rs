//! Shared helpers for the integration tests: seeded random parameter /
//! history generators and small numeric utilities.
#![allow(dead_code)]

use hiv_dde::model::{Parameters, State};
use hiv_dde::scenario;
use rand::Rng;

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

/// A log-uniform draw in `[lo, hi]`.
fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Zero with probability 1/4, else uniform in `[0.1, 2]`; tiny positive
/// delays are avoided because the fixed step must stay below every positive
/// delay, which would make property-test runs needlessly slow.
fn random_delay<R: Rng>(rng: &mut R) -> f64 {
    if rng.gen_bool(0.25) {
        0.0
    } else {
        rng.gen_range(0.1..2.0)
    }
}

/// Random valid parameter set (all invariants hold; delays in `{0} ∪ [0.1, 2]`).
pub fn random_params<R: Rng>(rng: &mut R) -> Parameters {
    loop {
        let p = Parameters {
            lambda: log_uniform(rng, 0.3, 100.0),
            beta1: log_uniform(rng, 1e-4, 1e-2),
            beta2: log_uniform(rng, 1e-4, 1e-2),
            rho: rng.gen_range(0.1..0.9),
            m1: rng.gen_range(0.1..4.0),
            m2: rng.gen_range(0.1..4.0),
            alpha: log_uniform(rng, 0.01, 0.3),
            a: log_uniform(rng, 0.01, 1.0),
            k: log_uniform(rng, 0.01, 1.0),
            c: log_uniform(rng, 3e-3, 0.3),
            h: log_uniform(rng, 1e-3, 0.1),
            eta: log_uniform(rng, 1e-4, 1e-2),
            mu1: log_uniform(rng, 3e-3, 0.1),
            mu2: log_uniform(rng, 3e-3, 0.1),
            mu3: log_uniform(rng, 3e-3, 0.1),
            mu4: log_uniform(rng, 3e-3, 0.1),
            mu5: log_uniform(rng, 3e-3, 0.1),
            tau1: random_delay(rng),
            tau2: random_delay(rng),
            tau3: random_delay(rng),
        };
        if p.validate().ok() && stiffness_rate(&p) <= 2.0 {
            return p;
        }
    }
}

/// Upper bound on the fastest linear decay rate anywhere inside the
/// invariant region. The fixed-step explicit integrator is documented for
/// non-stiff regimes, so the random-draw harness stays inside one: draws
/// whose worst-case rate exceeds 2/day are rejected (they would need steps
/// far below the 0.05 used by the simulation tests).
fn stiffness_rate(p: &Parameters) -> f64 {
    let b = hiv_dde::model::omega_bounds(p);
    [
        p.mu1 + p.beta1 * b.v_max + p.beta2 * b.y_max,
        p.alpha + p.mu2,
        p.mu3 + p.a * b.z_max,
        p.mu4,
        p.mu5 + p.eta * b.y_max,
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Random valid parameter set with `tau1 = tau2 = 0` and an existing
/// immunity-activated equilibrium (`r1 > 1`), for the closed-form
/// characteristic machinery.
pub fn random_params_with_e2<R: Rng>(rng: &mut R) -> Parameters {
    loop {
        let mut p = random_params(rng);
        p.tau1 = 0.0;
        p.tau2 = 0.0;
        let r = hiv_dde::equilibria::r0_closed_form(&p);
        if r.r1.map_or(false, |r1| r1 > 1.0) {
            if let Ok(set) = hiv_dde::equilibria::equilibria(&p) {
                if set.e2.is_some() {
                    return p;
                }
            }
        }
    }
}

/// Random componentwise-nonnegative constant history.
pub fn random_history<R: Rng>(rng: &mut R, params: &Parameters) -> State {
    let b = hiv_dde::model::omega_bounds(params);
    State::new(
        rng.gen_range(0.0..b.x_max),
        rng.gen_range(0.0..b.p_max.min(100.0)),
        rng.gen_range(0.0..b.y_max.min(100.0)),
        rng.gen_range(0.0..b.v_max.min(100.0)),
        rng.gen_range(0.0..b.z_max.min(100.0)),
    )
}

pub fn preset(name: &str) -> scenario::Scenario {
    scenario::by_name(name).unwrap_or_else(|| panic!("missing scenario {name}"))
}

/// Times of the local maxima of `y` in the tail window, by quadratic fit
/// around each discrete peak. Used to measure limit-cycle periods without
/// relying on the mean-crossing classifier.
pub fn tail_y_peak_times(traj: &hiv_dde::dde_sim::Trajectory, tail_fraction: f64) -> Vec<f64> {
    let n = traj.len();
    let start = ((n as f64) * (1.0 - tail_fraction)) as usize;
    let y: Vec<f64> = traj.states.iter().map(|s| s.y).collect();
    let tail_min = y[start..].iter().cloned().fold(f64::INFINITY, f64::min);
    let tail_max = y[start..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // Only count prominent peaks (upper half of the tail range) so grid
    // noise on flat stretches does not register.
    let cutoff = 0.5 * (tail_min + tail_max);
    let mut times = Vec::new();
    for i in start.max(1)..n - 1 {
        if y[i] > cutoff && y[i] >= y[i - 1] && y[i] > y[i + 1] {
            let denom = y[i - 1] - 2.0 * y[i] + y[i + 1];
            let shift = if denom.abs() > 0.0 {
                0.5 * (y[i - 1] - y[i + 1]) / denom
            } else {
                0.0
            };
            times.push((i as f64 + shift) * traj.dt);
        }
    }
    times
}

/// Mean spacing of tail peaks (cycle period estimate); `None` with < 3 peaks.
pub fn tail_period(traj: &hiv_dde::dde_sim::Trajectory, tail_fraction: f64) -> Option<f64> {
    let t = tail_y_peak_times(traj, tail_fraction);
    if t.len() < 3 {
        return None;
    }
    Some((t[t.len() - 1] - t[0]) / (t.len() - 1) as f64)
}

/// Peak-to-peak of each component over the tail window.
pub fn tail_ptp(traj: &hiv_dde::dde_sim::Trajectory, tail_fraction: f64) -> [f64; 5] {
    let n = traj.len();
    let start = ((n as f64) * (1.0 - tail_fraction)) as usize;
    let mut lo = [f64::INFINITY; 5];
    let mut hi = [f64::NEG_INFINITY; 5];
    for s in &traj.states[start..] {
        for (i, v) in s.to_array().into_iter().enumerate() {
            lo[i] = lo[i].min(v);
            hi[i] = hi[i].max(v);
        }
    }
    std::array::from_fn(|i| hi[i] - lo[i])
}
