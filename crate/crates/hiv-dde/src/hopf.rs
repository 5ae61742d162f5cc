//! Hopf normal form at the critical immune-response delay.
//!
//! With `tau1 = tau2 = 0` the linearization at the immunity-activated
//! equilibrium reads `phi'(t) = A phi(t) + B phi(t - tau3)` with `B` the
//! immune-delay block. At a verified crossing `(i w0, tau0)` this module
//! computes the critical eigenvectors, the center-manifold g-coefficients,
//! the correction vectors `W20`/`W11`, the first Lyapunov quantity `C1(0)`,
//! and the verdict quantities:
//!
//! - `gamma1 = -Re C1(0) / Re xi'(tau0)` — bifurcation direction
//!   (supercritical when positive: periodic orbits exist for delays just
//!   above the critical one);
//! - `gamma2 = 2 Re C1(0)` — orbit stability (stable when negative);
//! - `t_period = -(Im C1(0) + gamma1 Im xi'(tau0)) / w0` — period trend.

use nalgebra::{Complex, Matrix5, SMatrix};
use thiserror::Error;

use crate::charstab::{self, DelayJacobian};
use crate::model::{Parameters, State};

type C64 = Complex<f64>;
type CMatrix5 = SMatrix<C64, 5, 5>;
type CVector5 = SMatrix<C64, 5, 1>;

/// Critical right and adjoint eigenvector data.
#[derive(Debug, Clone)]
pub struct EigenPair {
    /// Right eigenvector `(1, rho2..rho5)` of `A + B e^{-i w0 tau0}` at
    /// eigenvalue `i w0`.
    pub rho: [C64; 5],
    /// Adjoint eigenvector direction `(1, rho2*..rho5*)` at the opposite
    /// frequency: its componentwise conjugate is a left eigenvector of
    /// `A + B e^{-i w0 tau0}` at `i w0` (unnormalized, first component one).
    pub rho_star: [C64; 5],
    /// Normalization scalar: the adjoint eigenfunction is `tbar * rho_star`,
    /// making the DDE bilinear pairing with `rho` equal to one.
    pub tbar: C64,
    /// Crossing frequency.
    pub w0: f64,
    /// Critical delay.
    pub tau0: f64,
}

/// Normal-form quantities at the crossing.
#[derive(Debug, Clone)]
pub struct NormalForm {
    pub g20: C64,
    pub g11: C64,
    pub g02: C64,
    pub g21: C64,
    /// Center-manifold constant vector of the `z^2` correction.
    pub h1: [C64; 5],
    /// Center-manifold constant vector of the `z zbar` correction.
    pub h2: [C64; 5],
    /// `W20` evaluated at lag coordinate 0 and at `-tau0`.
    pub w20_0: [C64; 5],
    pub w20_tau: [C64; 5],
    /// `W11` evaluated at lag coordinate 0 and at `-tau0`.
    pub w11_0: [C64; 5],
    pub w11_tau: [C64; 5],
    /// First Lyapunov coefficient `C1(0)`.
    pub c1: C64,
    /// Root velocity `xi'(tau0)` from the analytic reciprocal formula.
    pub xi_prime: C64,
    /// Condition estimates of the two center-manifold solves.
    pub cond_d1: f64,
    pub cond_d2: f64,
    /// Direction quantity; positive means supercritical.
    pub gamma1: f64,
    /// Stability quantity `2 Re C1(0)`; negative means a stable orbit.
    pub gamma2: f64,
    /// Period trend quantity.
    pub t_period: f64,
}

/// Errors from normal-form computation.
#[derive(Debug, Error)]
pub enum HopfError {
    #[error("operation requires tau1 = tau2 = 0 (got tau1 = {tau1}, tau2 = {tau2})")]
    UnsupportedDelays { tau1: f64, tau2: f64 },
    #[error("degenerate eigenvector: back-substitution denominator {denominator:.3e} below 1e-12 * scale in step `{step}`")]
    DegenerateEigenvector { step: &'static str, denominator: f64 },
    #[error("eigenvector residual {residual:.3e} exceeds tolerance; (i w0, tau0) is not a crossing")]
    NotACrossing { residual: f64 },
    #[error("center-manifold solve {name} is numerically singular (condition estimate {cond:.3e})")]
    SingularSolve { name: &'static str, cond: f64 },
    #[error("degenerate transversality: Re xi'(tau0) = {value:.3e} is below 1e-12")]
    DegenerateTransversality { value: f64 },
    #[error("closed-form and derivative-based Jacobian blocks disagree by {gap:.3e} (> 1e-10 * scale); transcription error")]
    BlockMismatch { gap: f64 },
}

/// The undelayed (`A`) and delayed (`B`) Jacobian blocks for the
/// `tau1 = tau2 = 0` configuration.
fn split_blocks(jac: &DelayJacobian) -> (Matrix5<f64>, Matrix5<f64>) {
    (jac.a0 + jac.a1 + jac.a2, jac.a3)
}

/// The same two blocks written out entry by entry in closed form at the
/// equilibrium, kept as an independent transcription guard against
/// [`charstab::jacobian_blocks`].
fn closed_form_blocks(params: &Parameters, e2: &State) -> (Matrix5<f64>, Matrix5<f64>) {
    let p = params;
    let (x2, y2, v2, z2) = (e2.x, e2.y, e2.v, e2.z);
    let incidence = p.beta1 * v2 + p.beta2 * y2;
    let hz = p.h + z2;
    let a = Matrix5::from_row_slice(&[
        -(incidence + p.mu1), 0.0, -p.beta2 * x2, -p.beta1 * x2, 0.0,
        p.rho * incidence, -(p.alpha + p.mu2), p.rho * p.beta2 * x2, p.rho * p.beta1 * x2, 0.0,
        (1.0 - p.rho) * incidence, p.alpha,
        (1.0 - p.rho) * p.beta2 * x2 - p.mu3 - p.a * z2, (1.0 - p.rho) * p.beta1 * x2,
        -p.a * y2,
        0.0, 0.0, p.k, -p.mu4, 0.0,
        0.0, 0.0, -p.eta * z2, 0.0, -(p.mu5 + p.eta * y2),
    ]);
    let mut b = Matrix5::zeros();
    b[(4, 2)] = p.c * z2 / hz;
    b[(4, 4)] = p.c * y2 * p.h / (hz * hz);
    (a, b)
}

fn to_complex(m: &Matrix5<f64>) -> CMatrix5 {
    CMatrix5::from_fn(|r, c| C64::new(m[(r, c)], 0.0))
}

/// Critical eigenvectors by back-substitution on the rows of
/// `M = A + B e^{-i w0 tau0} - i w0 I` (right vector) and of its transpose
/// (adjoint direction), each residual-checked against the full matrix.
pub fn eigen_pair(
    params: &Parameters,
    e2: &State,
    w0: f64,
    tau0: f64,
) -> Result<EigenPair, HopfError> {
    if params.tau1 != 0.0 || params.tau2 != 0.0 {
        return Err(HopfError::UnsupportedDelays {
            tau1: params.tau1,
            tau2: params.tau2,
        });
    }
    let jac = charstab::jacobian_blocks(params, e2);
    let (a, b) = split_blocks(&jac);
    let iw = C64::new(0.0, w0);
    let phase = (-iw * tau0).exp();
    let m = to_complex(&a) + to_complex(&b) * phase;
    let scale = 1.0 + m.iter().map(|c| c.norm()).sum::<f64>();
    let denom_ok = |step: &'static str, d: C64| -> Result<C64, HopfError> {
        if d.norm() < 1e-12 * scale {
            Err(HopfError::DegenerateEigenvector {
                step,
                denominator: d.norm(),
            })
        } else {
            Ok(d)
        }
    };

    // Right eigenvector (1, rho2..rho5): row 4 ties rho4 to rho3, row 1 then
    // fixes rho3, row 5 gives rho5, row 2 gives rho2; row 3 is the residual
    // check.
    let rho = {
        let d43 = m[(3, 2)]; // k
        let d44 = denom_ok("rho4 (virion row)", m[(3, 3)] - iw)?;
        // row 1: (m11 - iw) + m13 rho3 + m14 rho4 = 0 with rho4 = -d43 rho3 / d44
        let coeff = denom_ok("rho3 (uninfected row)", m[(0, 2)] - m[(0, 3)] * d43 / d44)?;
        let rho3 = -(m[(0, 0)] - iw) / coeff;
        let rho4 = -d43 * rho3 / d44;
        let d55 = denom_ok("rho5 (immune row)", m[(4, 4)] - iw)?;
        let rho5 = -m[(4, 2)] * rho3 / d55;
        let d22 = denom_ok("rho2 (latent row)", m[(1, 1)] - iw)?;
        let rho2 = -(m[(1, 0)] + m[(1, 2)] * rho3 + m[(1, 3)] * rho4) / d22;
        [C64::new(1.0, 0.0), rho2, rho3, rho4, rho5]
    };

    // Left null vector of (M^T - iw I) by back-substitution on the
    // transposed rows; the third transposed row is the residual check. The
    // adjoint eigenvector rho* is its componentwise conjugate (the adjoint
    // problem carries the opposite frequency).
    let left = {
        let mt = m.transpose();
        let d22 = denom_ok("rho2* (latent column)", mt[(1, 1)] - iw)?;
        // row 1': (mt11 - iw) + mt12 u2 + mt13 u3 = 0 with u2 = -mt23 u3 / d22
        let coeff = denom_ok(
            "rho3* (uninfected column)",
            mt[(0, 2)] - mt[(0, 1)] * mt[(1, 2)] / d22,
        )?;
        let u3 = -(mt[(0, 0)] - iw) / coeff;
        let u2 = -mt[(1, 2)] * u3 / d22;
        let d55 = denom_ok("rho5* (immune column)", mt[(4, 4)] - iw)?;
        let u5 = -mt[(4, 2)] * u3 / d55;
        let d44 = denom_ok("rho4* (virion column)", mt[(3, 3)] - iw)?;
        let u4 = -(mt[(3, 0)] + mt[(3, 1)] * u2 + mt[(3, 2)] * u3) / d44;
        [C64::new(1.0, 0.0), u2, u3, u4, u5]
    };

    // Residual checks against the full matrix equations.
    let rv = CVector5::from_row_slice(&rho);
    let res_r = (m * rv - rv * iw).norm();
    let sv = CVector5::from_row_slice(&left);
    let res_l = (m.transpose() * sv - sv * iw).norm();
    let vec_scale = scale * (1.0 + rv.norm().max(sv.norm()));
    if res_r > 1e-8 * vec_scale || res_l > 1e-8 * vec_scale {
        return Err(HopfError::NotACrossing {
            residual: res_r.max(res_l),
        });
    }

    // Normalization: pairing the adjoint eigenfunction with rho under the
    // DDE bilinear form must give one. The form conjugates the adjoint, so
    // the row entering it is the unconjugated left null vector; the delayed
    // kernel contributes tau0 e^{-i w0 tau0} left^T B rho.
    let bc = to_complex(&b);
    let lrow = sv.transpose();
    let plain = (lrow * rv)[(0, 0)];
    let delayed = (lrow * (bc * rv))[(0, 0)] * phase * tau0;
    let pairing = plain + delayed;
    let tbar = (C64::new(1.0, 0.0) / pairing).conj();
    Ok(EigenPair {
        rho,
        rho_star: std::array::from_fn(|i| left[i].conj()),
        tbar,
        w0,
        tau0,
    })
}

impl EigenPair {
    /// The normalized adjoint row vector used to project the nonlinearity:
    /// the complex conjugate of `tbar * rho_star`.
    pub fn adjoint_row(&self) -> [C64; 5] {
        std::array::from_fn(|i| (self.tbar * self.rho_star[i]).conj())
    }

    /// DDE bilinear pairing of the normalized adjoint with `rho` (should be
    /// one) and with `conj(rho)` (should vanish; the delayed kernel
    /// integral has the closed form `(e^{2 i w0 tau0} - 1) / (2 i w0)`).
    pub fn pairing_checks(&self, b: &Matrix5<f64>) -> (C64, C64) {
        let iw = C64::new(0.0, self.w0);
        let phase = (-iw * self.tau0).exp();
        let bc = to_complex(b);
        let l = CVector5::from_row_slice(&self.adjoint_row()).transpose();
        let r = CVector5::from_row_slice(&self.rho);
        let rbar = r.map(|c| c.conj());
        let with_rho = (l * r)[(0, 0)] + (l * (bc * r))[(0, 0)] * phase * self.tau0;
        let kernel = ((2.0 * iw * self.tau0).exp() - 1.0) / (2.0 * iw);
        let with_rho_bar = (l * rbar)[(0, 0)] + (l * (bc * rbar))[(0, 0)] * phase * kernel;
        (with_rho, with_rho_bar)
    }
}

/// Quadratic and cubic multilinear forms of the right-hand side at the
/// equilibrium. Arguments are (value at lag 0, value at lag -tau0) pairs.
struct Nonlinearity {
    beta1: f64,
    beta2: f64,
    rho_frac: f64,
    a: f64,
    eta: f64,
    /// d^2/dy dz of the saturated CTL term at the equilibrium.
    f_yz: f64,
    /// d^2/dz^2 of the saturated CTL term.
    f_zz: f64,
    /// d^3/dy dz^2 of the saturated CTL term.
    f_yzz: f64,
    /// d^3/dz^3 of the saturated CTL term.
    f_zzz: f64,
}

impl Nonlinearity {
    fn at(params: &Parameters, e2: &State) -> Self {
        let p = params;
        let hz = p.h + e2.z;
        Self {
            beta1: p.beta1,
            beta2: p.beta2,
            rho_frac: p.rho,
            a: p.a,
            eta: p.eta,
            f_yz: p.c * p.h / (hz * hz),
            f_zz: -2.0 * p.c * e2.y * p.h / (hz * hz * hz),
            f_yzz: -2.0 * p.c * p.h / (hz * hz * hz),
            f_zzz: 6.0 * p.c * e2.y * p.h / (hz * hz * hz * hz),
        }
    }

    /// Symmetric bilinear form `B(phi, psi)` of the quadratic terms.
    fn bilinear(&self, phi: &([C64; 5], [C64; 5]), psi: &([C64; 5], [C64; 5])) -> [C64; 5] {
        let (p0, pt) = phi;
        let (q0, qt) = psi;
        let incidence = self.beta1 * (p0[0] * q0[3] + q0[0] * p0[3])
            + self.beta2 * (p0[0] * q0[2] + q0[0] * p0[2]);
        let kill = p0[2] * q0[4] + q0[2] * p0[4];
        let sat = self.f_yz * (pt[2] * qt[4] + qt[2] * pt[4]) + self.f_zz * pt[4] * qt[4];
        [
            -incidence,
            self.rho_frac * incidence,
            (1.0 - self.rho_frac) * incidence - self.a * kill,
            C64::new(0.0, 0.0),
            sat - self.eta * kill,
        ]
    }

    /// Symmetric trilinear form `C(phi, psi, chi)` of the cubic terms (only
    /// the saturated CTL term has any).
    fn trilinear(
        &self,
        phi: &([C64; 5], [C64; 5]),
        psi: &([C64; 5], [C64; 5]),
        chi: &([C64; 5], [C64; 5]),
    ) -> [C64; 5] {
        let (_, pt) = phi;
        let (_, qt) = psi;
        let (_, rt) = chi;
        let yzz = pt[2] * qt[4] * rt[4] + qt[2] * pt[4] * rt[4] + rt[2] * pt[4] * qt[4];
        let zzz = pt[4] * qt[4] * rt[4];
        let mut out = [C64::new(0.0, 0.0); 5];
        out[4] = self.f_yzz * yzz + self.f_zzz * zzz;
        out
    }
}

fn lu_solve(m: &CMatrix5, rhs: &[C64; 5]) -> Option<(CVector5, f64)> {
    let v = CVector5::from_row_slice(rhs);
    let lu = m.lu();
    let sol = lu.solve(&v)?;
    // Crude condition estimate: ||M||_F * ||x|| / ||b|| maximized with the
    // inverse norm proxy from the solved system.
    let m_norm = m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let cond = if v.norm() > 0.0 {
        m_norm * sol.norm() / v.norm()
    } else {
        1.0
    };
    Some((sol, cond))
}

/// Full normal-form computation at a verified crossing.
pub fn normal_form(
    params: &Parameters,
    e2: &State,
    eigen: &EigenPair,
    w0: f64,
    tau0: f64,
) -> Result<NormalForm, HopfError> {
    let jac = charstab::jacobian_blocks(params, e2);
    let (a, b) = split_blocks(&jac);
    // Transcription guard: the blocks assembled from rhs partial derivatives
    // must match the closed-form entry list.
    let (a_cf, b_cf) = closed_form_blocks(params, e2);
    let block_scale = 1.0 + a.amax().max(b.amax());
    let gap = (a - a_cf).amax().max((b - b_cf).amax());
    if gap > 1e-10 * block_scale {
        return Err(HopfError::BlockMismatch { gap });
    }
    let ac = to_complex(&a);
    let bc = to_complex(&b);
    let iw = C64::new(0.0, w0);
    let phase = (-iw * tau0).exp();

    let nl = Nonlinearity::at(params, e2);
    let rho = eigen.rho;
    let rho_bar: [C64; 5] = std::array::from_fn(|i| rho[i].conj());
    // Critical mode evaluated at lag 0 and at lag -tau0.
    let phi: ([C64; 5], [C64; 5]) = (rho, std::array::from_fn(|i| rho[i] * phase));
    let phi_bar: ([C64; 5], [C64; 5]) =
        (rho_bar, std::array::from_fn(|i| rho_bar[i] * phase.conj()));
    let l = eigen.adjoint_row();
    let project = |v: &[C64; 5]| -> C64 { (0..5).map(|i| l[i] * v[i]).sum() };

    let b_phi_phi = nl.bilinear(&phi, &phi);
    let b_phi_phibar = nl.bilinear(&phi, &phi_bar);
    let b_phibar_phibar = nl.bilinear(&phi_bar, &phi_bar);
    let g20 = project(&b_phi_phi);
    let g11 = project(&b_phi_phibar);
    let g02 = project(&b_phibar_phibar);

    // Center-manifold constant vectors:
    //   D1 h1 = B(phi, phi) with D1 = 2 i w0 I - A - B e^{-2 i w0 tau0},
    //   D2 h2 = B(phi, phibar) with D2 = -(A + B).
    let d1 = CMatrix5::identity() * (2.0 * iw) - ac - bc * (-2.0 * iw * tau0).exp();
    let d2 = -(ac + bc);
    let (h1, cond_d1) = lu_solve(&d1, &b_phi_phi).ok_or(HopfError::SingularSolve {
        name: "D1",
        cond: f64::INFINITY,
    })?;
    let (h2, cond_d2) = lu_solve(&d2, &b_phi_phibar).ok_or(HopfError::SingularSolve {
        name: "D2",
        cond: f64::INFINITY,
    })?;
    for (name, cond) in [("D1", cond_d1), ("D2", cond_d2)] {
        if !cond.is_finite() || cond > 1e12 {
            return Err(HopfError::SingularSolve { name, cond });
        }
    }

    // W20(l) = (i g20 / w0) rho e^{i w0 l} + (i conj(g02) / (3 w0)) rhobar e^{-i w0 l}
    //          + h1 e^{2 i w0 l}
    // W11(l) = (-i g11 / w0) rho e^{i w0 l} + (i conj(g11) / w0) rhobar e^{-i w0 l} + h2
    let w20_at = |lag: f64| -> [C64; 5] {
        let e_p = (iw * lag).exp();
        let e_m = (-iw * lag).exp();
        let e_2 = (2.0 * iw * lag).exp();
        std::array::from_fn(|i| {
            (C64::i() * g20 / w0) * rho[i] * e_p
                + (C64::i() * g02.conj() / (3.0 * w0)) * rho_bar[i] * e_m
                + h1[i] * e_2
        })
    };
    let w11_at = |lag: f64| -> [C64; 5] {
        let e_p = (iw * lag).exp();
        let e_m = (-iw * lag).exp();
        std::array::from_fn(|i| {
            (-C64::i() * g11 / w0) * rho[i] * e_p
                + (C64::i() * g11.conj() / w0) * rho_bar[i] * e_m
                + h2[i]
        })
    };
    let w20_0 = w20_at(0.0);
    let w20_tau = w20_at(-tau0);
    let w11_0 = w11_at(0.0);
    let w11_tau = w11_at(-tau0);

    let w20_pair = (w20_0, w20_tau);
    let w11_pair = (w11_0, w11_tau);
    let b_phibar_w20 = nl.bilinear(&phi_bar, &w20_pair);
    let b_phi_w11 = nl.bilinear(&phi, &w11_pair);
    let c_phi_phi_phibar = nl.trilinear(&phi, &phi, &phi_bar);
    let g21_vec: [C64; 5] = std::array::from_fn(|i| {
        b_phibar_w20[i] + 2.0 * b_phi_w11[i] + c_phi_phi_phibar[i]
    });
    let g21 = project(&g21_vec);

    let c1 = C64::i() / (2.0 * w0) * (g20 * g11 - 2.0 * g11.norm_sqr() - g02.norm_sqr() / 3.0)
        + g21 / 2.0;

    let xi_prime = xi_prime_analytic(params, e2, w0, tau0);
    if xi_prime.re.abs() < 1e-12 {
        return Err(HopfError::DegenerateTransversality { value: xi_prime.re });
    }
    let gamma1 = -c1.re / xi_prime.re;
    let gamma2 = 2.0 * c1.re;
    let t_period = -(c1.im + gamma1 * xi_prime.im) / w0;

    Ok(NormalForm {
        g20,
        g11,
        g02,
        g21,
        h1: std::array::from_fn(|i| h1[i]),
        h2: std::array::from_fn(|i| h2[i]),
        w20_0,
        w20_tau,
        w11_0,
        w11_tau,
        c1,
        xi_prime,
        cond_d1,
        cond_d2,
        gamma1,
        gamma2,
        t_period,
    })
}

/// Bundled normal-form results with spelled-out verdicts.
#[derive(Debug, Clone)]
pub struct HopfReport {
    pub w0: f64,
    pub tau0: f64,
    pub eigen: EigenPair,
    pub normal: NormalForm,
}

impl HopfReport {
    /// Eigenvectors plus normal form at a verified crossing.
    pub fn compute(
        params: &Parameters,
        e2: &State,
        w0: f64,
        tau0: f64,
    ) -> Result<Self, HopfError> {
        let eigen = eigen_pair(params, e2, w0, tau0)?;
        let normal = normal_form(params, e2, &eigen, w0, tau0)?;
        Ok(Self {
            w0,
            tau0,
            eigen,
            normal,
        })
    }

    /// Bifurcation direction: periodic orbits for delays above (supercritical)
    /// or below (subcritical) the critical one.
    pub fn direction(&self) -> &'static str {
        if self.normal.gamma1 > 0.0 {
            "supercritical (periodic orbits for tau3 > tau0)"
        } else {
            "subcritical (periodic orbits for tau3 < tau0)"
        }
    }

    /// Orbital stability of the bifurcating cycle.
    pub fn orbit_stability(&self) -> &'static str {
        if self.normal.gamma2 < 0.0 {
            "stable"
        } else {
            "unstable"
        }
    }

    /// Trend of the cycle period with the delay.
    pub fn period_trend(&self) -> &'static str {
        if self.normal.t_period > 0.0 {
            "period increases with tau3"
        } else {
            "period decreases with tau3"
        }
    }
}

/// Analytic root velocity at the crossing from the reciprocal formula
/// obtained by implicit differentiation of the characteristic equation:
/// `(d xi / d tau3)^{-1} = -P'(xi)/(xi P(xi)) + Q'(xi)/(xi Q(xi)) - tau3/xi`
/// where `P` collects the delay-free terms and `Q` the delayed ones.
pub fn xi_prime_analytic(params: &Parameters, e2: &State, w0: f64, tau0: f64) -> C64 {
    let mut zero_delay = *params;
    zero_delay.tau1 = 0.0;
    zero_delay.tau2 = 0.0;
    let coeffs = charstab::e2_coeffs_at(&zero_delay, e2);
    let xi = C64::new(0.0, w0);
    let [i1, i2, i3, i4, i5] = coeffs.i.map(|c| C64::new(c, 0.0));
    let [t1, t2, t3, t4, t5] = coeffs.t.map(|c| C64::new(c, 0.0));
    let p = ((((xi + i1) * xi + i2) * xi + i3) * xi + i4) * xi + i5;
    let p_d = (((5.0 * xi + 4.0 * i1) * xi + 3.0 * i2) * xi + 2.0 * i3) * xi + i4;
    let q = (((t1 * xi + t2) * xi + t3) * xi + t4) * xi + t5;
    let q_d = ((4.0 * t1 * xi + 3.0 * t2) * xi + 2.0 * t3) * xi + t4;
    let inv = -p_d / (xi * p) + q_d / (xi * q) - tau0 / xi;
    1.0 / inv
}

/// Numeric oracle for `xi'(tau0)`: tracks the crossing root by complex
/// Newton iteration on the determinant characteristic value at
/// `tau0 +- delta` (`delta = 1e-3`) and central-differences the root.
pub fn xi_prime_numeric_oracle(params: &Parameters, e2: &State, w0: f64, tau0: f64) -> C64 {
    let jac = charstab::jacobian_blocks(params, e2);
    let delta = 1e-3;
    let start = C64::new(0.0, w0);
    let plus = charstab::newton_root(&jac, tau0 + delta, start);
    let minus = charstab::newton_root(&jac, tau0 - delta, start);
    (plus - minus) / (2.0 * delta)
}
