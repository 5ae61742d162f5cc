//! Reproduction numbers and equilibria.
//!
//! The basic reproduction number `R0` is computed both from its closed form
//! and as the spectral radius of the next-generation matrix product `F V^-1`
//! (an independent numerical oracle). The immune reproduction number `R1`
//! thresholds the existence of the immune-activated equilibrium.
//!
//! Equilibria:
//! - `E0 = (lambda/mu1, 0, 0, 0, 0)` (infection-free), always present;
//! - `E1` (immunity-inactivated), present when `R0 > 1`;
//! - `E2` (immunity-activated), present when `R1 > 1`, built from the
//!   quadratic `b1 y^2 + b2 y + b3 = 0` and then refined by a damped Newton
//!   iteration on the steady-state system.

use nalgebra::{Matrix3, Matrix5, Vector5};
use thiserror::Error;

use crate::model::{rhs, Parameters, State};

/// Reproduction numbers and their ingredients.
#[derive(Debug, Clone, Copy)]
pub struct ReproductionNumbers {
    /// Delay-weighted progression factor, in (0, 1].
    pub gamma: f64,
    /// Infection-free uninfected-cell level `lambda/mu1`.
    pub x0: f64,
    /// Basic reproduction number, `r01 + r02`.
    pub r0: f64,
    /// Virus-to-cell part of `r0`.
    pub r01: f64,
    /// Cell-to-cell part of `r0`.
    pub r02: f64,
    /// Immune reproduction number; defined only when `r0 > 1` (it is built
    /// from the `E1` infected-cell level).
    pub r1: Option<f64>,
}

/// The three equilibria plus the quadratic used for the `E2` infected-cell
/// level.
#[derive(Debug, Clone, Copy)]
pub struct EquilibriumSet {
    /// Infection-free equilibrium; always present.
    pub e0: State,
    /// Immunity-inactivated equilibrium; present iff `r0 > 1`.
    pub e1: Option<State>,
    /// Immunity-activated equilibrium; present iff `r1 > 1`.
    pub e2: Option<State>,
    /// Coefficients `(b1, b2, b3)` of the quadratic solved for the `E2`
    /// infected-cell level (populated when the quadratic was formed).
    pub quadratic: Option<(f64, f64, f64)>,
}

/// Errors from equilibrium computation.
#[derive(Debug, Error)]
pub enum EquilibriaError {
    /// The quadratic for the `E2` infected-cell level has no admissible
    /// positive root although `r1 > 1` claims `E2` exists; signals a
    /// parameter/formula conflict, never silently ignored.
    #[error(
        "E2 inconsistency: r1 = {r1} > 1 but quadratic root is inadmissible \
         (b1 = {b1}, b2 = {b2}, b3 = {b3}, discriminant = {discriminant}, y2 = {y2})"
    )]
    InconsistentE2 {
        r1: f64,
        b1: f64,
        b2: f64,
        b3: f64,
        discriminant: f64,
        y2: f64,
    },
    /// Newton refinement of an equilibrium failed to reach tolerance.
    #[error("Newton refinement failed to converge (last residual norm {residual})")]
    RefinementFailed { residual: f64 },
}

/// Delay-weighted progression factor
/// `gamma = (alpha rho / (alpha + mu2)) e^{-m1 tau1} + (1 - rho) e^{-m2 tau2}`.
pub fn gamma(params: &Parameters) -> f64 {
    let p = params;
    p.alpha * p.rho / (p.alpha + p.mu2) * p.survival1() + (1.0 - p.rho) * p.survival2()
}

/// Closed-form reproduction numbers.
///
/// `r0 = (k beta1 x0 / (mu3 mu4) + beta2 x0 / mu3) * gamma` with
/// `x0 = lambda / mu1`; `r1 = c y1 / (h (mu5 + eta y1))` with `y1` the
/// infected-cell level of `E1` (only defined when `r0 > 1`).
pub fn r0_closed_form(params: &Parameters) -> ReproductionNumbers {
    let p = params;
    let g = gamma(params);
    let x0 = p.lambda / p.mu1;
    let r01 = p.k * p.beta1 * x0 * g / (p.mu3 * p.mu4);
    let r02 = p.beta2 * x0 * g / p.mu3;
    let r0 = r01 + r02;
    let r1 = (r0 > 1.0).then(|| {
        let y1 = e1_infected_level(params, r0);
        p.c * y1 / (p.h * (p.mu5 + p.eta * y1))
    });
    ReproductionNumbers {
        gamma: g,
        x0,
        r0,
        r01,
        r02,
        r1,
    }
}

/// Next-generation spectral oracle for `r0`.
///
/// Builds the 3x3 new-infection matrix `F` and transition matrix `V` at the
/// infection-free level and returns the spectral radius of `F V^-1`.
pub fn r0_spectral_oracle(params: &Parameters) -> f64 {
    let p = params;
    let x0 = p.lambda / p.mu1;
    let e1 = p.survival1();
    let e2 = p.survival2();
    #[rustfmt::skip]
    let f = Matrix3::new(
        0.0, p.rho * p.beta2 * e1 * x0,         p.rho * p.beta1 * e1 * x0,
        0.0, (1.0 - p.rho) * p.beta2 * e2 * x0, (1.0 - p.rho) * p.beta1 * e2 * x0,
        0.0, 0.0,                               0.0,
    );
    #[rustfmt::skip]
    let v = Matrix3::new(
        p.alpha + p.mu2, 0.0,    0.0,
        -p.alpha,        p.mu3,  0.0,
        0.0,             -p.k,   p.mu4,
    );
    let fv = f * v.try_inverse().expect("V is lower-triangular with positive diagonal");
    fv.complex_eigenvalues()
        .iter()
        .fold(0.0_f64, |m, ev| m.max(ev.norm()))
}

fn e1_infected_level(params: &Parameters, r0: f64) -> f64 {
    let p = params;
    p.mu1 * p.mu4 / (p.k * p.beta1 + p.mu4 * p.beta2) * (r0 - 1.0)
}

/// Evaluates the five steady-state left-hand sides at `state` (the rates of
/// the governing system with every argument equal to `state`).
pub fn residual(params: &Parameters, state: &State) -> [f64; 5] {
    rhs(params, state, state, state, state)
        .expect("finite state")
        .0
}

/// Max-norm of [`residual`].
pub fn residual_norm(params: &Parameters, state: &State) -> f64 {
    residual(params, state)
        .iter()
        .fold(0.0, |m, r| m.max(r.abs()))
}

/// Computes `E0` (always), `E1` (when `r0 > 1`), and `E2` (when `r1 > 1`).
///
/// `E2` is formed from the quadratic `b1 y^2 + b2 y + b3 = 0` via
/// `y2 = (-b2 + sqrt(b2^2 - 4 b1 b3)) / (2 b1)` and then polished by Newton
/// iteration on the steady-state system (tolerance `1e-12`, at most 50
/// iterations) because the equilibrium feeds the characteristic coefficients
/// where small errors amplify.
pub fn equilibria(params: &Parameters) -> Result<EquilibriumSet, EquilibriaError> {
    let p = params;
    let numbers = r0_closed_form(params);
    let e0 = State::new(numbers.x0, 0.0, 0.0, 0.0, 0.0);
    let mut set = EquilibriumSet {
        e0,
        e1: None,
        e2: None,
        quadratic: None,
    };
    let r0 = numbers.r0;
    if r0 <= 1.0 {
        return Ok(set);
    }
    let x1 = numbers.x0 / r0;
    let p1 = p.rho * p.lambda * p.survival1() / ((p.alpha + p.mu2) * r0) * (r0 - 1.0);
    let y1 = e1_infected_level(params, r0);
    let v1 = p.k / p.mu4 * y1;
    set.e1 = Some(refine(params, State::new(x1, p1, y1, v1, 0.0), true)?);

    let r1 = numbers.r1.expect("r0 > 1");
    if r1 <= 1.0 {
        return Ok(set);
    }
    let g = numbers.gamma;
    let b_mix = p.beta1 * p.k + p.beta2 * p.mu4;
    let b1 = p.a * p.c * b_mix + p.mu3 * p.eta * b_mix - p.a * p.h * p.eta * b_mix;
    let b2 = p.a * p.c * p.mu1 * p.mu4 + p.mu3 * p.mu5 * b_mix + p.mu1 * p.mu3 * p.mu4 * p.eta
        - g * p.eta * p.lambda * b_mix
        - p.a * p.h * p.mu5 * b_mix
        - p.a * p.h * p.mu1 * p.mu4 * p.eta;
    let b3 = -g * p.mu5 * p.lambda * b_mix + p.mu1 * p.mu3 * p.mu4 * p.mu5
        - p.a * p.h * p.mu1 * p.mu4 * p.mu5;
    set.quadratic = Some((b1, b2, b3));
    let discriminant = b2 * b2 - 4.0 * b1 * b3;
    let y2 = if discriminant >= 0.0 {
        (-b2 + discriminant.sqrt()) / (2.0 * b1)
    } else {
        f64::NAN
    };
    if !(y2 > 0.0) {
        return Err(EquilibriaError::InconsistentE2 {
            r1,
            b1,
            b2,
            b3,
            discriminant,
            y2,
        });
    }
    let z2 = p.c * y2 / (p.mu5 + p.eta * y2) - p.h;
    let v2 = p.k * y2 / p.mu4;
    let x2 = p.lambda / (p.mu1 + p.beta1 * v2 + p.beta2 * y2);
    let p2 = p.rho * p.survival1() / (p.alpha + p.mu2)
        * (p.lambda * p.beta1 * p.k * y2 + p.lambda * p.beta2 * p.mu4 * y2)
        / (p.mu1 * p.mu4 + p.beta1 * p.k * y2 + p.beta2 * p.mu4 * y2);
    set.e2 = Some(refine(params, State::new(x2, p2, y2, v2, z2), false)?);
    Ok(set)
}

/// Damped Newton refinement of an approximate equilibrium on the
/// steady-state system, with an analytic equilibrium Jacobian.
///
/// `pin_z` keeps the CTL component exactly zero (used for `E1`, where the
/// fifth equation is degenerate at `z = 0`).
fn refine(params: &Parameters, start: State, pin_z: bool) -> Result<State, EquilibriaError> {
    let tol = 1e-12;
    let mut s = start.to_array();
    let scale = 1.0 + start.max_norm();
    for _ in 0..50 {
        let state = State::from_array(s);
        let r = residual(params, &state);
        let norm = r.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        if norm < tol * scale {
            return Ok(state);
        }
        let jac = steady_jacobian(params, &state);
        let mut j = jac;
        let mut rv = Vector5::from_column_slice(&r);
        if pin_z {
            // Replace the fifth equation by z = 0.
            for col in 0..5 {
                j[(4, col)] = 0.0;
            }
            j[(4, 4)] = 1.0;
            rv[4] = s[4];
        }
        let Some(delta) = j.lu().solve(&rv) else {
            break;
        };
        for i in 0..5 {
            s[i] -= delta[i];
        }
        if pin_z {
            s[4] = 0.0;
        }
    }
    let state = State::from_array(s);
    let norm = residual_norm(params, &state);
    if norm < 1e-9 * scale {
        Ok(state)
    } else {
        Err(EquilibriaError::RefinementFailed { residual: norm })
    }
}

/// Jacobian of the steady-state system (all lagged arguments collapsed onto
/// the current state).
fn steady_jacobian(params: &Parameters, s: &State) -> Matrix5<f64> {
    let p = params;
    let e1 = p.survival1();
    let e2 = p.survival2();
    let inc_x = p.beta1 * s.v + p.beta2 * s.y;
    let mut j = Matrix5::zeros();
    // x' = lambda - mu1 x - x(beta1 v + beta2 y)
    j[(0, 0)] = -p.mu1 - inc_x;
    j[(0, 2)] = -p.beta2 * s.x;
    j[(0, 3)] = -p.beta1 * s.x;
    // p' = rho e1 x(beta1 v + beta2 y) - (alpha + mu2) p
    j[(1, 0)] = p.rho * e1 * inc_x;
    j[(1, 1)] = -(p.alpha + p.mu2);
    j[(1, 2)] = p.rho * e1 * p.beta2 * s.x;
    j[(1, 3)] = p.rho * e1 * p.beta1 * s.x;
    // y' = (1-rho) e2 x(beta1 v + beta2 y) + alpha p - mu3 y - a y z
    j[(2, 0)] = (1.0 - p.rho) * e2 * inc_x;
    j[(2, 1)] = p.alpha;
    j[(2, 2)] = (1.0 - p.rho) * e2 * p.beta2 * s.x - p.mu3 - p.a * s.z;
    j[(2, 3)] = (1.0 - p.rho) * e2 * p.beta1 * s.x;
    j[(2, 4)] = -p.a * s.y;
    // v' = k y - mu4 v
    j[(3, 2)] = p.k;
    j[(3, 3)] = -p.mu4;
    // z' = c y z / (h + z) - mu5 z - eta y z
    j[(4, 2)] = p.c * s.z / (p.h + s.z) - p.eta * s.z;
    j[(4, 4)] = p.c * s.y * p.h / ((p.h + s.z) * (p.h + s.z)) - p.mu5 - p.eta * s.y;
    j
}
