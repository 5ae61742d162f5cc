//! Model parameters, state, validation, the delayed right-hand side, and the
//! explicit ultimate-bound region for the five-component infection model.
//!
//! The governing system (deviations written with lagged arguments) is
//!
//! ```text
//! x' = lambda - mu1 x - x (beta1 v + beta2 y)
//! p' = rho e^{-m1 tau1} x(t-tau1) [beta1 v(t-tau1) + beta2 y(t-tau1)] - (alpha + mu2) p
//! y' = (1-rho) e^{-m2 tau2} x(t-tau2) [beta1 v(t-tau2) + beta2 y(t-tau2)] + alpha p
//!      - mu3 y - a y z
//! v' = k y - mu4 v
//! z' = c y(t-tau3) z(t-tau3) / (h + z(t-tau3)) - mu5 z - eta y z
//! ```

use thiserror::Error;

/// All model constants plus the three delays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameters {
    /// Recruitment rate of uninfected cells (cells / time).
    pub lambda: f64,
    /// Virus-to-cell infection rate.
    pub beta1: f64,
    /// Cell-to-cell infection rate.
    pub beta2: f64,
    /// Fraction of new infections that enter the latent pool, in (0,1).
    pub rho: f64,
    /// Survival decay exponent over the intracellular delay.
    pub m1: f64,
    /// Survival decay exponent over the replication delay.
    pub m2: f64,
    /// Latent activation rate.
    pub alpha: f64,
    /// CTL killing rate.
    pub a: f64,
    /// Virion production rate per infected cell.
    pub k: f64,
    /// CTL proliferation rate.
    pub c: f64,
    /// CTL proliferation saturation constant.
    pub h: f64,
    /// Immune impairment rate.
    pub eta: f64,
    /// Death rate of uninfected cells.
    pub mu1: f64,
    /// Death rate of latently infected cells.
    pub mu2: f64,
    /// Death rate of productively infected cells.
    pub mu3: f64,
    /// Virion clearance rate.
    pub mu4: f64,
    /// CTL death rate.
    pub mu5: f64,
    /// Intracellular delay (>= 0).
    pub tau1: f64,
    /// Viral replication delay (>= 0).
    pub tau2: f64,
    /// Immune response delay (>= 0).
    pub tau3: f64,
}

/// One point of the five populations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    /// Uninfected cells.
    pub x: f64,
    /// Latently infected cells.
    pub p: f64,
    /// Productively infected cells.
    pub y: f64,
    /// Free virions.
    pub v: f64,
    /// CTL cells.
    pub z: f64,
}

/// Instantaneous rates of change; kept distinct from [`State`] because rates
/// and levels have different units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative(pub [f64; 5]);

/// Per-component ultimate bounds of the positively invariant region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaBounds {
    pub x_max: f64,
    pub p_max: f64,
    pub y_max: f64,
    pub v_max: f64,
    pub z_max: f64,
}

/// Outcome of parameter validation; collects every violated invariant so a
/// caller can print all of them at once.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    /// Human-readable description of each violated invariant.
    pub violations: Vec<String>,
}

/// Errors from model-level operations.
#[derive(Debug, Error)]
pub enum ModelError {
    /// A state argument contained NaN or infinity.
    #[error("non-finite state component {component} in argument `{argument}`")]
    NonFiniteState {
        argument: &'static str,
        component: usize,
    },
}

impl State {
    pub const fn new(x: f64, p: f64, y: f64, v: f64, z: f64) -> Self {
        Self { x, p, y, v, z }
    }

    pub const fn to_array(self) -> [f64; 5] {
        [self.x, self.p, self.y, self.v, self.z]
    }

    pub const fn from_array(a: [f64; 5]) -> Self {
        Self {
            x: a[0],
            p: a[1],
            y: a[2],
            v: a[3],
            z: a[4],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|c| c.is_finite())
    }

    /// Max-norm of the component vector.
    pub fn max_norm(&self) -> f64 {
        self.to_array().iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl Parameters {
    /// Checks every parameter invariant and reports all violations.
    ///
    /// Invariants: every rate constant strictly positive, delays nonnegative,
    /// `rho` strictly inside (0,1), and the standing assumption `c > eta*h`
    /// (guarantees the saturated CTL response can sustain positive immunity).
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let rates: [(&str, f64); 14] = [
            ("lambda", self.lambda),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("alpha", self.alpha),
            ("a", self.a),
            ("k", self.k),
            ("c", self.c),
            ("h", self.h),
            ("eta", self.eta),
            ("mu1", self.mu1),
            ("mu2", self.mu2),
            ("mu3", self.mu3),
            ("mu4", self.mu4),
            ("mu5", self.mu5),
        ];
        for (name, value) in rates {
            if !(value > 0.0) || !value.is_finite() {
                report
                    .violations
                    .push(format!("{name} must be > 0 (got {value})"));
            }
        }
        // m1, m2 are decay exponents; they only appear as e^{-m tau} factors
        // and must be positive rates as well.
        for (name, value) in [("m1", self.m1), ("m2", self.m2)] {
            if !(value > 0.0) || !value.is_finite() {
                report
                    .violations
                    .push(format!("{name} must be > 0 (got {value})"));
            }
        }
        for (name, value) in [("tau1", self.tau1), ("tau2", self.tau2), ("tau3", self.tau3)] {
            if !(value >= 0.0) || !value.is_finite() {
                report
                    .violations
                    .push(format!("{name} must be >= 0 (got {value})"));
            }
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            report
                .violations
                .push(format!("rho must lie strictly in (0,1) (got {})", self.rho));
        }
        if !(self.c > self.eta * self.h) {
            report.violations.push(format!(
                "c > eta*h required (got c = {}, eta*h = {})",
                self.c,
                self.eta * self.h
            ));
        }
        report
    }

    /// Survival factor over the intracellular delay, `e^{-m1 tau1}`.
    pub fn survival1(&self) -> f64 {
        (-self.m1 * self.tau1).exp()
    }

    /// Survival factor over the replication delay, `e^{-m2 tau2}`.
    pub fn survival2(&self) -> f64 {
        (-self.m2 * self.tau2).exp()
    }

    /// Smallest strictly positive delay, if any.
    pub fn min_positive_delay(&self) -> Option<f64> {
        [self.tau1, self.tau2, self.tau3]
            .into_iter()
            .filter(|t| *t > 0.0)
            .fold(None, |m, t| Some(m.map_or(t, |m: f64| m.min(t))))
    }
}

/// Evaluates the five right-hand sides with the given lagged states.
///
/// `s_tau1` feeds the latent-pool gain, `s_tau2` the productive-pool gain,
/// and `s_tau3` the saturated CTL proliferation term. When a delay is zero
/// the caller passes the current state for that argument.
pub fn rhs(
    params: &Parameters,
    s_now: &State,
    s_tau1: &State,
    s_tau2: &State,
    s_tau3: &State,
) -> Result<StateDerivative, ModelError> {
    for (name, s) in [
        ("s_now", s_now),
        ("s_tau1", s_tau1),
        ("s_tau2", s_tau2),
        ("s_tau3", s_tau3),
    ] {
        if let Some(component) = s.to_array().iter().position(|c| !c.is_finite()) {
            return Err(ModelError::NonFiniteState {
                argument: name,
                component,
            });
        }
    }
    let p = params;
    let incidence_now = s_now.x * (p.beta1 * s_now.v + p.beta2 * s_now.y);
    let incidence_tau1 = s_tau1.x * (p.beta1 * s_tau1.v + p.beta2 * s_tau1.y);
    let incidence_tau2 = s_tau2.x * (p.beta1 * s_tau2.v + p.beta2 * s_tau2.y);
    let dx = p.lambda - p.mu1 * s_now.x - incidence_now;
    let dp = p.rho * p.survival1() * incidence_tau1 - (p.alpha + p.mu2) * s_now.p;
    let dy = (1.0 - p.rho) * p.survival2() * incidence_tau2 + p.alpha * s_now.p
        - p.mu3 * s_now.y
        - p.a * s_now.y * s_now.z;
    let dv = p.k * s_now.y - p.mu4 * s_now.v;
    let dz = p.c * s_tau3.y * s_tau3.z / (p.h + s_tau3.z) - p.mu5 * s_now.z
        - p.eta * s_now.y * s_now.z;
    Ok(StateDerivative([dx, dp, dy, dv, dz]))
}

/// Componentwise ultimate bounds of the positively invariant region.
///
/// With `sigma1 = min(mu1, alpha + mu2)` and `sigma2 = min(mu1, mu3)`:
///
/// ```text
/// x_max = min{ lambda/sigma1,
///              lambda/sigma2
///                + alpha rho lambda e^{m2 tau2 - m1 tau1} / ((1-rho) sigma1 sigma2) }
/// p_max = rho lambda e^{-m1 tau1} / sigma1
/// y_max = (1-rho) lambda e^{-m2 tau2} / sigma2
///           + alpha rho lambda e^{-m1 tau1} / (sigma2 sigma1)
/// v_max = (k / mu4) * y_max
/// z_max = (c / mu5) * y_max
/// ```
pub fn omega_bounds(params: &Parameters) -> OmegaBounds {
    let p = params;
    let sigma1 = p.mu1.min(p.alpha + p.mu2);
    let sigma2 = p.mu1.min(p.mu3);
    let e1 = p.survival1();
    let e2 = p.survival2();
    let x_max = (p.lambda / sigma1).min(
        p.lambda / sigma2
            + p.alpha * p.rho * p.lambda * (p.m2 * p.tau2 - p.m1 * p.tau1).exp()
                / ((1.0 - p.rho) * sigma1 * sigma2),
    );
    let p_max = p.rho * p.lambda * e1 / sigma1;
    let y_max =
        (1.0 - p.rho) * p.lambda * e2 / sigma2 + p.alpha * p.rho * p.lambda * e1 / (sigma2 * sigma1);
    let v_max = p.k / p.mu4 * y_max;
    let z_max = p.c / p.mu5 * y_max;
    OmegaBounds {
        x_max,
        p_max,
        y_max,
        v_max,
        z_max,
    }
}
