//! Fixed-step method-of-steps integrator with cubic Hermite dense output,
//! long-term behavior classification, and a bisection scan for the
//! oscillation onset delay.
//!
//! The integrator is classic fourth-order Runge-Kutta on a uniform grid.
//! Lagged states are read from the already-computed dense solution via cubic
//! Hermite interpolation (state and derivative are stored at every grid
//! point), or from the constant initial history for pre-start times.
//! Requiring `dt <= min positive delay` guarantees that every stage lookup
//! (`t + dt/2 - tau`, `t + dt - tau`) lands in history that is already
//! available, so no implicit iteration is needed and runs are deterministic.

use thiserror::Error;

use crate::model::{rhs, Parameters, State, StateDerivative};

/// Negative values in `[-NEGATIVITY_FLOOR, 0)` are clamped to zero; anything
/// below the floor aborts the run (the model guarantees exact positivity, so
/// larger violations indicate a step-size problem, not dynamics).
pub const NEGATIVITY_FLOOR: f64 = 1e-9;

/// Simulation configuration.
#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    /// Step size; must be positive and no larger than the smallest positive
    /// delay.
    pub dt: f64,
    /// Horizon; must be at least `10 * dt`.
    pub t_end: f64,
    /// Constant initial history (the model is posed with constant,
    /// componentwise-nonnegative history functions).
    pub history: State,
    /// Fraction of the trajectory used for classification (default 0.25).
    pub tail_fraction: f64,
    /// Relative convergence tolerance (default 1e-3).
    pub conv_tol: f64,
    /// Relative amplitude threshold for an oscillation verdict (default 1e-4).
    pub osc_tol: f64,
}

impl SimConfig {
    /// Config with the default step `min(0.01, min positive delay / 4)`,
    /// default tail fraction and tolerances.
    pub fn with_defaults(params: &Parameters, history: State, t_end: f64) -> Self {
        let dt = match params.min_positive_delay() {
            Some(tau) => (tau / 4.0).min(0.01),
            None => 0.01,
        };
        Self {
            dt,
            t_end,
            history,
            tail_fraction: 0.25,
            conv_tol: 1e-3,
            osc_tol: 1e-4,
        }
    }

    pub fn validate(&self, params: &Parameters) -> Result<(), SimError> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(SimError::BadConfig(format!("dt must be > 0 (got {})", self.dt)));
        }
        if !(self.t_end >= 10.0 * self.dt) {
            return Err(SimError::BadConfig(format!(
                "t_end must be >= 10*dt (got t_end = {}, dt = {})",
                self.t_end, self.dt
            )));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction < 1.0) {
            return Err(SimError::BadConfig(format!(
                "tail_fraction must lie in (0,1) (got {})",
                self.tail_fraction
            )));
        }
        if let Some(tau) = params.min_positive_delay() {
            if self.dt > tau {
                return Err(SimError::BadConfig(format!(
                    "dt = {} exceeds the smallest positive delay {tau}",
                    self.dt
                )));
            }
        }
        if self.history.to_array().iter().any(|c| *c < 0.0 || !c.is_finite()) {
            return Err(SimError::BadConfig(format!(
                "history must be componentwise finite and >= 0 (got {:?})",
                self.history
            )));
        }
        Ok(())
    }
}

/// Dense solution on a uniform grid: states and derivatives per grid point.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Grid spacing.
    pub dt: f64,
    /// Constant pre-start history.
    pub history: State,
    /// State at grid point `i` (time `i * dt`).
    pub states: Vec<State>,
    /// Right-hand side at grid point `i` (used for Hermite dense output).
    pub derivs: Vec<StateDerivative>,
}

impl Trajectory {
    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Time of grid point `i`.
    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    /// Final time of the grid.
    pub fn t_end(&self) -> f64 {
        self.time(self.len() - 1)
    }

    /// Dense evaluation at an arbitrary time.
    ///
    /// Times at or before zero return the constant history; interior times
    /// use cubic Hermite interpolation on the enclosing grid cell; grid
    /// points reproduce the stored states exactly.
    pub fn eval(&self, t: f64) -> State {
        self.eval_within(t, self.len() - 1)
    }

    /// Dense evaluation restricted to grid cells `< limit` (used during
    /// integration so lookups never touch not-yet-final grid points).
    fn eval_within(&self, t: f64, limit: usize) -> State {
        if t <= 0.0 {
            return self.history;
        }
        let cell = ((t / self.dt) as usize).min(limit.saturating_sub(1));
        let t0 = cell as f64 * self.dt;
        let u = (t - t0) / self.dt;
        if u == 0.0 {
            return self.states[cell];
        }
        let y0 = self.states[cell].to_array();
        let y1 = self.states[cell + 1].to_array();
        let d0 = self.derivs[cell].0;
        let d1 = self.derivs[cell + 1].0;
        let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
        let h10 = u * (1.0 - u) * (1.0 - u);
        let h01 = u * u * (3.0 - 2.0 * u);
        let h11 = u * u * (u - 1.0);
        let mut out = [0.0; 5];
        for i in 0..5 {
            out[i] = h00 * y0[i] + h10 * self.dt * d0[i] + h01 * y1[i] + h11 * self.dt * d1[i];
        }
        State::from_array(out)
    }
}

/// Long-term behavior over the tail window of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub enum LongTermVerdict {
    /// Every component's tail peak-to-peak is below the convergence
    /// tolerance; `limit` is the tail mean.
    Converged { limit: State },
    /// The infected-cell component crosses its tail mean at least four times
    /// with consistent spacing.
    Oscillating {
        /// Peak-to-peak amplitude per component over the tail window.
        amplitude: [f64; 5],
        /// Twice the mean half-period of the infected-cell component.
        period: f64,
    },
    /// Neither converged nor regularly oscillating (e.g. unsettled transient).
    Undetermined,
}

/// Errors from simulation and scanning.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    BadConfig(String),
    #[error("invalid parameters: {0:?}")]
    BadParameters(Vec<String>),
    #[error("negativity beyond the {NEGATIVITY_FLOOR} floor at t = {t}, component {component} (value {value})")]
    NegativityViolation { t: f64, component: usize, value: f64 },
    #[error("non-finite state at t = {t}, component {component}")]
    NonFinite { t: f64, component: usize },
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error("scan endpoint tau3 = {tau3} misbehaved: expected {expected}, classified {actual}")]
    ScanEndpoint {
        tau3: f64,
        expected: &'static str,
        actual: String,
    },
    #[error("scan is undetermined at tau3 = {tau3}; try a longer t_end")]
    ScanUndetermined { tau3: f64 },
    #[error("scan bounds must satisfy lo < hi (got lo = {lo}, hi = {hi})")]
    ScanBounds { lo: f64, hi: f64 },
}

/// Integrates the system with the method of steps.
///
/// Classic RK4 on the uniform grid; each lagged state is evaluated by cubic
/// Hermite interpolation over the stored dense solution (or the constant
/// history for pre-start times). Zero delays are folded into the non-delayed
/// argument. Every stored state is clamped at the numerical floor: values in
/// `[-1e-9, 0)` become `0`, values below abort with an error.
pub fn simulate(params: &Parameters, config: &SimConfig) -> Result<Trajectory, SimError> {
    let report = params.validate();
    if !report.ok() {
        return Err(SimError::BadParameters(report.violations));
    }
    config.validate(params)?;

    let n = (config.t_end / config.dt).ceil() as usize;
    let dt = config.t_end / n as f64;
    let mut traj = Trajectory {
        dt,
        history: config.history,
        states: Vec::with_capacity(n + 1),
        derivs: Vec::with_capacity(n + 1),
    };
    traj.states.push(config.history);

    let lagged = |traj: &Trajectory, limit: usize, t: f64, tau: f64, now: State| -> State {
        if tau == 0.0 {
            now
        } else {
            traj.eval_within(t - tau, limit)
        }
    };
    let eval_rhs = |traj: &Trajectory, limit: usize, t: f64, s: State| -> Result<StateDerivative, SimError> {
        let l1 = lagged(traj, limit, t, params.tau1, s);
        let l2 = lagged(traj, limit, t, params.tau2, s);
        let l3 = lagged(traj, limit, t, params.tau3, s);
        Ok(rhs(params, &s, &l1, &l2, &l3)?)
    };

    let d0 = eval_rhs(&traj, 1, 0.0, config.history)?;
    traj.derivs.push(d0);

    for i in 0..n {
        let t = i as f64 * dt;
        let s = traj.states[i].to_array();
        let k1 = traj.derivs[i].0;
        let mut s2 = [0.0; 5];
        for j in 0..5 {
            s2[j] = s[j] + 0.5 * dt * k1[j];
        }
        let k2 = eval_rhs(&traj, i + 1, t + 0.5 * dt, State::from_array(s2))?.0;
        let mut s3 = [0.0; 5];
        for j in 0..5 {
            s3[j] = s[j] + 0.5 * dt * k2[j];
        }
        let k3 = eval_rhs(&traj, i + 1, t + 0.5 * dt, State::from_array(s3))?.0;
        let mut s4 = [0.0; 5];
        for j in 0..5 {
            s4[j] = s[j] + dt * k3[j];
        }
        let k4 = eval_rhs(&traj, i + 1, t + dt, State::from_array(s4))?.0;
        let mut next = [0.0; 5];
        for j in 0..5 {
            next[j] = s[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        let t_next = (i + 1) as f64 * dt;
        for (j, value) in next.iter_mut().enumerate() {
            if !value.is_finite() {
                return Err(SimError::NonFinite { t: t_next, component: j });
            }
            if *value < 0.0 {
                if *value >= -NEGATIVITY_FLOOR {
                    *value = 0.0;
                } else {
                    return Err(SimError::NegativityViolation {
                        t: t_next,
                        component: j,
                        value: *value,
                    });
                }
            }
        }
        traj.states.push(State::from_array(next));
        let d = eval_rhs(&traj, i + 1, t_next, State::from_array(next))?;
        traj.derivs.push(d);
    }
    Ok(traj)
}

/// Classifies the tail window of a trajectory.
///
/// If every component's peak-to-peak over the tail is below
/// `conv_tol * (1 + |mean|)`, the verdict is `Converged` with the tail mean
/// as limit. Otherwise, if the infected-cell component has at least four
/// crossings of its tail mean with consistent spacing (coefficient of
/// variation of the half-periods below 0.2), the verdict is `Oscillating`
/// with period twice the mean half-period. Anything else is `Undetermined`.
pub fn classify(traj: &Trajectory, config: &SimConfig) -> LongTermVerdict {
    assert!(!traj.is_empty(), "classify requires a nonempty trajectory");
    let n = traj.len();
    let start = ((n as f64) * (1.0 - config.tail_fraction)) as usize;
    let tail = &traj.states[start.min(n - 1)..];

    let mut mean = [0.0_f64; 5];
    let mut lo = [f64::INFINITY; 5];
    let mut hi = [f64::NEG_INFINITY; 5];
    for s in tail {
        let a = s.to_array();
        for i in 0..5 {
            mean[i] += a[i];
            lo[i] = lo[i].min(a[i]);
            hi[i] = hi[i].max(a[i]);
        }
    }
    for m in &mut mean {
        *m /= tail.len() as f64;
    }
    let ptp: [f64; 5] = std::array::from_fn(|i| hi[i] - lo[i]);

    let converged = (0..5).all(|i| ptp[i] < config.conv_tol * (1.0 + mean[i].abs()));
    if converged {
        return LongTermVerdict::Converged {
            limit: State::from_array(mean),
        };
    }

    // Mean crossings of the infected-cell component, with linear
    // interpolation of the crossing times.
    let y_mean = mean[2];
    let mut crossings: Vec<f64> = Vec::new();
    for w in 0..tail.len() - 1 {
        let a = tail[w].y - y_mean;
        let b = tail[w + 1].y - y_mean;
        if a == 0.0 || (a < 0.0) != (b < 0.0) {
            let frac = if b == a { 0.0 } else { a / (a - b) };
            crossings.push(traj.time(start + w) + frac * traj.dt);
        }
    }
    if crossings.len() >= 4 && ptp[2] > config.osc_tol * (1.0 + y_mean.abs()) {
        let half_periods: Vec<f64> = crossings.windows(2).map(|w| w[1] - w[0]).collect();
        let hp_mean = half_periods.iter().sum::<f64>() / half_periods.len() as f64;
        let hp_var = half_periods
            .iter()
            .map(|h| (h - hp_mean) * (h - hp_mean))
            .sum::<f64>()
            / half_periods.len() as f64;
        let cv = hp_var.sqrt() / hp_mean;
        if cv < 0.2 {
            return LongTermVerdict::Oscillating {
                amplitude: ptp,
                period: 2.0 * hp_mean,
            };
        }
    }
    LongTermVerdict::Undetermined
}

/// Simulates at a given immune-response delay and classifies the tail.
pub fn classify_at(
    params: &Parameters,
    tau3: f64,
    config: &SimConfig,
) -> Result<LongTermVerdict, SimError> {
    let mut p = *params;
    p.tau3 = tau3;
    let traj = simulate(&p, config)?;
    Ok(classify(&traj, config))
}

/// Bisects on the immune-response delay for the onset of oscillation.
///
/// Requires `classify` to be `Converged` at `tau3_lo` and `Oscillating` at
/// `tau3_hi`; bisects until `hi - lo <= tol` and returns the final bracket.
pub fn bifurcation_scan(
    params: &Parameters,
    tau3_lo: f64,
    tau3_hi: f64,
    config: &SimConfig,
    tol: f64,
) -> Result<(f64, f64), SimError> {
    if !(tau3_lo < tau3_hi) {
        return Err(SimError::ScanBounds {
            lo: tau3_lo,
            hi: tau3_hi,
        });
    }
    match classify_at(params, tau3_lo, config)? {
        LongTermVerdict::Converged { .. } => {}
        other => {
            return Err(SimError::ScanEndpoint {
                tau3: tau3_lo,
                expected: "Converged",
                actual: format!("{other:?}"),
            })
        }
    }
    match classify_at(params, tau3_hi, config)? {
        LongTermVerdict::Oscillating { .. } => {}
        other => {
            return Err(SimError::ScanEndpoint {
                tau3: tau3_hi,
                expected: "Oscillating",
                actual: format!("{other:?}"),
            })
        }
    }
    let (mut lo, mut hi) = (tau3_lo, tau3_hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        match classify_at(params, mid, config)? {
            LongTermVerdict::Converged { .. } => lo = mid,
            LongTermVerdict::Oscillating { .. } => hi = mid,
            LongTermVerdict::Undetermined => {
                return Err(SimError::ScanUndetermined { tau3: mid })
            }
        }
    }
    Ok((lo, hi))
}

/// Writes the trajectory as CSV with header `t,x,p,y,v,z`, one row per grid
/// point (optionally decimated by `stride`), 10 significant digits, LF line
/// endings.
pub fn to_csv(traj: &Trajectory, stride: usize) -> String {
    let stride = stride.max(1);
    let mut out = String::from("t,x,p,y,v,z\n");
    for i in (0..traj.len()).step_by(stride) {
        let s = traj.states[i].to_array();
        out.push_str(&format!(
            "{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}\n",
            traj.time(i),
            s[0],
            s[1],
            s[2],
            s[3],
            s[4]
        ));
    }
    out
}
