//! Linear stability machinery for the delayed system.
//!
//! Provides the Jacobian delay blocks at any equilibrium, evaluation of the
//! characteristic quasi-polynomial `det(s I - A0 - A1 e^{-s tau1} -
//! A2 e^{-s tau2} - A3 e^{-s tau3})`, right-half-plane root counting by the
//! argument principle, and — for the immunity-activated equilibrium with
//! `tau1 = tau2 = 0` — the closed-form characteristic coefficients, the
//! crossing-frequency quintic `F(h)`, the delay ladder, the critical delay,
//! and the transversality sign.

use nalgebra::{Complex, Matrix5, SMatrix};
use thiserror::Error;

use crate::equilibria::{self, EquilibriaError};
use crate::model::{Parameters, State};

type C64 = Complex<f64>;

/// Jacobian of the delayed right-hand side split by argument: `a0` with
/// respect to the current state and `a1`/`a2`/`a3` with respect to the
/// `tau1`/`tau2`/`tau3`-lagged states.
///
/// `a1` is nonzero only in row 2, `a2` only in row 3, `a3` only in row 5.
#[derive(Debug, Clone)]
pub struct DelayJacobian {
    pub a0: Matrix5<f64>,
    pub a1: Matrix5<f64>,
    pub a2: Matrix5<f64>,
    pub a3: Matrix5<f64>,
    /// Delays carried along so evaluation sites agree with the blocks.
    pub delays: (f64, f64, f64),
}

/// The ten closed-form characteristic coefficients at the immunity-activated
/// equilibrium (with `tau1 = tau2 = 0`) and the derived quintic coefficients.
///
/// The characteristic equation reads
/// `xi^5 + I1 xi^4 + ... + I5 + (T1 xi^4 + ... + T5) e^{-xi tau3} = 0`,
/// and a crossing frequency `w` satisfies `F(w^2) = 0` for the quintic
/// `F(h) = h^5 + A1 h^4 + ... + A5`.
#[derive(Debug, Clone, Copy)]
pub struct CharCoeffsE2 {
    /// Delay-free coefficients, highest degree first after the monic term.
    pub i: [f64; 5],
    /// Coefficients multiplying `e^{-xi tau3}`, highest degree first.
    pub t: [f64; 5],
    /// Quintic coefficients `A1..A5` derived by squaring and adding the
    /// real/imaginary split of the characteristic equation on the imaginary
    /// axis; `A5 = I5^2 - T5^2` exactly.
    pub a_quintic: [f64; 5],
}

/// The critical immune-response delay and its crossing data.
#[derive(Debug, Clone)]
pub struct CriticalDelay {
    /// Smallest ladder delay over all crossing frequencies.
    pub tau0: f64,
    /// Crossing frequency at `tau0`.
    pub w0: f64,
    /// `w0^2`.
    pub h0: f64,
    /// All ladder entries `(root index, ladder index, tau)`.
    pub ladder: Vec<(usize, usize, f64)>,
    /// Sign of `F'(h0)`: +1 destabilizing crossing, -1 stabilizing, 0
    /// degenerate (double root).
    pub transversality_sign: i8,
}

/// Per-inequality report for the stability hypothesis on the combined
/// coefficients `E_j = I_j + T_j` (Routh–Hurwitz-style conditions that make
/// the equilibrium stable at zero immune delay).
#[derive(Debug, Clone)]
pub struct HypothesisReport {
    /// Each named inequality and whether it holds strictly.
    pub inequalities: Vec<(String, f64, bool)>,
    /// True iff every inequality holds.
    pub ok: bool,
}

/// Errors from characteristic-stability computations.
#[derive(Debug, Error)]
pub enum CharStabError {
    #[error("operation requires tau1 = tau2 = 0 (got tau1 = {tau1}, tau2 = {tau2})")]
    UnsupportedDelays { tau1: f64, tau2: f64 },
    #[error("immunity-activated equilibrium absent (r1 <= 1 or r0 <= 1)")]
    NoE2,
    #[error(transparent)]
    Equilibria(#[from] EquilibriaError),
    #[error("suspected root on the counting contour at s = {s} (|char| = {value:.3e})")]
    BoundaryRoot { s: C64, value: f64 },
    #[error("winding number {winding} not close to an integer after refinement cap")]
    NonIntegerWinding { winding: f64 },
    #[error(
        "frequency {w} is not a genuine crossing: cos^2 + sin^2 = {norm} differs from 1 \
         beyond 1e-6"
    )]
    NotACrossing { w: f64, norm: f64 },
    #[error("ladder delay {tau} failed root verification (|char| = {value:.3e})")]
    LadderVerification { tau: f64, value: f64 },
}

/// Jacobian delay blocks of the right-hand side at an equilibrium.
pub fn jacobian_blocks(params: &Parameters, equilibrium: &State) -> DelayJacobian {
    let p = params;
    let s = equilibrium;
    let e1 = p.survival1();
    let e2 = p.survival2();
    let inc = p.beta1 * s.v + p.beta2 * s.y;
    let mut a0 = Matrix5::zeros();
    let mut a1 = Matrix5::zeros();
    let mut a2 = Matrix5::zeros();
    let mut a3 = Matrix5::zeros();
    a0[(0, 0)] = -inc - p.mu1;
    a0[(0, 2)] = -p.beta2 * s.x;
    a0[(0, 3)] = -p.beta1 * s.x;
    a1[(1, 0)] = p.rho * e1 * inc;
    a1[(1, 2)] = p.rho * e1 * p.beta2 * s.x;
    a1[(1, 3)] = p.rho * e1 * p.beta1 * s.x;
    a0[(1, 1)] = -(p.alpha + p.mu2);
    a2[(2, 0)] = (1.0 - p.rho) * e2 * inc;
    a2[(2, 2)] = (1.0 - p.rho) * e2 * p.beta2 * s.x;
    a2[(2, 3)] = (1.0 - p.rho) * e2 * p.beta1 * s.x;
    a0[(2, 1)] = p.alpha;
    a0[(2, 2)] = -p.mu3 - p.a * s.z;
    a0[(2, 4)] = -p.a * s.y;
    a0[(3, 2)] = p.k;
    a0[(3, 3)] = -p.mu4;
    a3[(4, 2)] = p.c * s.z / (p.h + s.z);
    a3[(4, 4)] = p.c * s.y * p.h / ((p.h + s.z) * (p.h + s.z));
    a0[(4, 2)] = -p.eta * s.z;
    a0[(4, 4)] = -p.mu5 - p.eta * s.y;
    DelayJacobian {
        a0,
        a1,
        a2,
        a3,
        delays: (p.tau1, p.tau2, p.tau3),
    }
}

/// Characteristic quasi-polynomial value
/// `det(s I - a0 - a1 e^{-s tau1} - a2 e^{-s tau2} - a3 e^{-s tau3})`
/// by complex 5x5 LU with partial pivoting.
pub fn char_value(jac: &DelayJacobian, delays: (f64, f64, f64), s: C64) -> C64 {
    let (tau1, tau2, tau3) = delays;
    let e1 = (-s * tau1).exp();
    let e2 = (-s * tau2).exp();
    let e3 = (-s * tau3).exp();
    let mut m: SMatrix<C64, 5, 5> = SMatrix::zeros();
    for r in 0..5 {
        for c in 0..5 {
            let diag = if r == c { s } else { C64::new(0.0, 0.0) };
            m[(r, c)] = diag
                - C64::new(jac.a0[(r, c)], 0.0)
                - C64::new(jac.a1[(r, c)], 0.0) * e1
                - C64::new(jac.a2[(r, c)], 0.0) * e2
                - C64::new(jac.a3[(r, c)], 0.0) * e3;
        }
    }
    m.lu().determinant()
}

/// Counts characteristic roots in the right-half-plane rectangle
/// `[1e-6, sigma_max] x [-omega_max, omega_max]` by the winding number of
/// the characteristic value along the boundary.
///
/// The boundary is sampled `n_boundary` points per edge, with adaptive
/// doubling wherever a phase step exceeds pi/2, capped at 2^16 samples per
/// edge. Errors if a boundary root is suspected or the winding refuses to be
/// an integer.
pub fn count_unstable_roots(
    jac: &DelayJacobian,
    delays: (f64, f64, f64),
    sigma_max: f64,
    omega_max: f64,
    n_boundary: usize,
) -> Result<usize, CharStabError> {
    let eps = 1e-6;
    let corners = [
        C64::new(eps, -omega_max),
        C64::new(sigma_max, -omega_max),
        C64::new(sigma_max, omega_max),
        C64::new(eps, omega_max),
    ];
    // Scale for boundary-root detection: the characteristic magnitude spans
    // many orders along an edge (roots cluster near the origin while the
    // determinant grows like |s|^5), so each sample is compared against a
    // local Hadamard bound prod_r (|s| + ||row_r||_1) rather than a global
    // edge average.
    let row_norms: [f64; 5] = std::array::from_fn(|r| {
        (0..5)
            .map(|c| {
                jac.a0[(r, c)].abs()
                    + jac.a1[(r, c)].abs()
                    + jac.a2[(r, c)].abs()
                    + jac.a3[(r, c)].abs()
            })
            .sum()
    });
    let local_scale = |s: C64| -> f64 {
        row_norms
            .iter()
            .map(|rn| s.norm() + rn)
            .product()
    };
    let check = |s: C64, v: C64| -> Result<(), CharStabError> {
        if v.norm() < 1e-12 * local_scale(s) {
            Err(CharStabError::BoundaryRoot { s, value: v.norm() })
        } else {
            Ok(())
        }
    };
    // Refinement cap: bisection depth per initial interval. Roots merely
    // close to (not on) the contour are resolved once the spacing drops
    // below their distance; 60 halvings take the initial spacing to ~1e-16
    // of the edge, so only a root essentially on the contour exhausts it.
    const MAX_DEPTH: u32 = 60;
    let mut total = 0.0_f64;
    let tau_max = delays.0.max(delays.1).max(delays.2);
    for e in 0..4 {
        let ca = corners[e];
        let cb = corners[(e + 1) % 4];
        // The delayed terms rotate like e^{-s tau} along the edge, so the
        // initial grid must resolve that oscillation (phase change at most
        // pi/4 per interval) or whole turns alias away between samples; the
        // bisection below only repairs isolated near-edge roots.
        let oscillation = ((cb - ca).norm() * tau_max / (std::f64::consts::PI / 4.0)).ceil();
        let n = (n_boundary.max(16)).max(oscillation as usize);
        let pts: Vec<C64> = (0..=n)
            .map(|i| {
                let t = i as f64 / n as f64;
                ca + (cb - ca) * C64::new(t, 0.0)
            })
            .collect();
        let vals: Vec<C64> = pts.iter().map(|&s| char_value(jac, delays, s)).collect();
        for (&s, &v) in pts.iter().zip(&vals) {
            check(s, v)?;
        }
        // Accumulated argument with local bisection. A phase step above
        // pi/2 or a large modulus jump both signal a root near the interval
        // (sampling coarser than the root distance aliases the winding), so
        // such intervals are split until both calm down.
        let mut stack: Vec<(C64, C64, C64, C64, u32)> = pts
            .windows(2)
            .zip(vals.windows(2))
            .rev()
            .map(|(p, v)| (p[0], p[1], v[0], v[1], MAX_DEPTH))
            .collect();
        while let Some((a, b, va, vb, depth)) = stack.pop() {
            let step = (vb / va).arg();
            let ratio = vb.norm() / va.norm();
            if step.abs() <= std::f64::consts::FRAC_PI_2 && (0.25..=4.0).contains(&ratio) {
                total += step;
                continue;
            }
            let mid = 0.5 * (a + b);
            if depth == 0 {
                return Err(CharStabError::BoundaryRoot {
                    s: mid,
                    value: char_value(jac, delays, mid).norm(),
                });
            }
            let vm = char_value(jac, delays, mid);
            check(mid, vm)?;
            stack.push((mid, b, vm, vb, depth - 1));
            stack.push((a, mid, va, vm, depth - 1));
        }
    }
    let winding = total / (2.0 * std::f64::consts::PI);
    let rounded = winding.round();
    if (winding - rounded).abs() > 1e-3 {
        return Err(CharStabError::NonIntegerWinding { winding });
    }
    Ok(rounded.max(0.0) as usize)
}

/// Closed-form characteristic coefficients at the immunity-activated
/// equilibrium with `tau1 = tau2 = 0`, plus the derived quintic.
pub fn e2_coeffs(params: &Parameters) -> Result<CharCoeffsE2, CharStabError> {
    if params.tau1 != 0.0 || params.tau2 != 0.0 {
        return Err(CharStabError::UnsupportedDelays {
            tau1: params.tau1,
            tau2: params.tau2,
        });
    }
    let set = equilibria::equilibria(params)?;
    let e2 = set.e2.ok_or(CharStabError::NoE2)?;
    Ok(e2_coeffs_at(params, &e2))
}

/// Same as [`e2_coeffs`] but with the equilibrium already computed.
pub fn e2_coeffs_at(params: &Parameters, e2: &State) -> CharCoeffsE2 {
    let p = params;
    let (x2, y2, v2, z2) = (e2.x, e2.y, e2.v, e2.z);
    let b1x = p.beta1 * x2;
    let b2x = p.beta2 * x2;
    let q = p.beta1 * v2 + p.beta2 * y2 + p.mu1;
    let r = p.alpha + p.mu2;
    let m4 = p.mu4;
    let m = p.mu3 + p.a * z2;
    let u = p.mu5 + p.eta * y2;
    let k = p.k;
    let al = p.alpha;
    let rho = p.rho;
    let mu1 = p.mu1;
    let mu2 = p.mu2;
    let e = p.a * y2 * p.eta * z2;
    let g5 = p.c * p.h * y2 / ((p.h + z2) * (p.h + z2));
    let c5 = p.a * p.c * y2 * z2 / (p.h + z2);
    let om = 1.0 - rho;

    let i1 = q + r + m4 + m + u - om * b2x;
    let i2 = q * (r + m4 + m + u) + r * (m4 + m + u) + m4 * (m + u) + m * u
        - e
        - al * rho * b2x
        - k * om * b1x
        - om * b2x * (mu1 + r + u + m4);
    let i3 = q * r * (m4 + m + u) + m4 * r * (m + u) + q * m * u + m4 * q * (m + u) + r * m * u
        - e * (q + r + m4)
        - k * al * rho * b1x
        + m4 * m * u
        - al * rho * b2x * (mu1 + u + m4)
        - k * om * b1x * (mu1 + r + u)
        - om * b2x * (mu1 * (r + u + m4) + r * (u + m4) + u * m4);
    let i4 = m4 * q * r * (m + u) + m4 * r * m * u + q * r * m * u + m4 * q * m * u
        - e * (q * (r + m4) + m4 * r)
        - k * al * rho * b1x * (mu1 + u)
        - om * b2x * (mu1 * r * (u + m4) + mu1 * m4 * u + m4 * r * u)
        - k * om * b1x * (mu1 * (r + u) + r * u)
        - al * rho * b2x * (mu1 * (u + m4) + m4 * u);
    let i5 = m4 * q * r * m * u
        - e * m4 * q * r
        - al * rho * b2x * mu1 * m4 * u
        - k * al * rho * b1x * mu1 * u
        - om * b2x * mu1 * m4 * r * u
        - k * om * b1x * mu1 * r * u;

    let t1 = -g5;
    let t2 = c5 + g5 * (om * b2x - (q + r + m4 + m));
    let t3 = c5 * (q + r + m4) + g5 * (al * rho * b2x + om * k * b1x)
        - g5 * (q * (r + m4 + m) + r * (m4 + m))
        + g5 * (om * b2x * (mu1 + r + m4) - m4 * m);
    let t4 = c5 * (q * (r + m4) + r * m4)
        + g5 * om * k * b1x * (mu1 + r)
        + g5 * (al * rho * b2x * (mu1 + m4)
            + al * rho * k * b1x
            + om * b2x * (mu1 * al + mu1 * mu2 + mu1 * m4 + al * m4 + mu2 * m4))
        - g5 * (q * r * (m + m4) + m4 * q * m)
        - g5 * m4 * r * m;
    let t5 = c5 * m4 * q * r
        + g5 * om * r * (b2x * mu1 * m4 + k * p.beta1 * mu1 * x2)
        + g5 * (al * rho * mu1 * x2 * (p.beta2 * m4 + k * p.beta1) - m4 * q * r * m);

    let i = [i1, i2, i3, i4, i5];
    let t = [t1, t2, t3, t4, t5];
    CharCoeffsE2 {
        i,
        t,
        a_quintic: a_quintic_from(&i, &t),
    }
}

/// Quintic coefficients `A1..A5` from squaring and adding the real and
/// imaginary parts of the characteristic equation on the imaginary axis.
fn a_quintic_from(i: &[f64; 5], t: &[f64; 5]) -> [f64; 5] {
    let [i1, i2, i3, i4, i5] = *i;
    let [t1, t2, t3, t4, t5] = *t;
    [
        i1 * i1 - 2.0 * i2 - t1 * t1,
        i2 * i2 + 2.0 * i4 - 2.0 * i1 * i3 - t2 * t2 + 2.0 * t1 * t3,
        i3 * i3 + 2.0 * i1 * i5 - 2.0 * i2 * i4 - 2.0 * t1 * t5 + 2.0 * t2 * t4 - t3 * t3,
        i4 * i4 - 2.0 * i3 * i5 + 2.0 * t3 * t5 - t4 * t4,
        i5 * i5 - t5 * t5,
    ]
}

impl CharCoeffsE2 {
    /// Evaluates the closed-form characteristic function
    /// `xi^5 + I1 xi^4 + ... + I5 + (T1 xi^4 + ... + T5) e^{-xi tau3}`.
    pub fn eval(&self, xi: C64, tau3: f64) -> C64 {
        let mut p_part = xi + self.i[0];
        for &c in &self.i[1..] {
            p_part = p_part * xi + c;
        }
        let mut q_part = C64::new(self.t[0], 0.0);
        for &c in &self.t[1..] {
            q_part = q_part * xi + c;
        }
        p_part + q_part * (-xi * tau3).exp()
    }

    /// Evaluates the crossing quintic `F(h) = h^5 + A1 h^4 + ... + A5`.
    pub fn f_of(&self, h: f64) -> f64 {
        let mut v = h + self.a_quintic[0];
        for &c in &self.a_quintic[1..] {
            v = v * h + c;
        }
        v
    }

    /// Evaluates `F'(h)`.
    pub fn f_prime(&self, h: f64) -> f64 {
        let [a1, a2, a3, a4, _] = self.a_quintic;
        (((5.0 * h + 4.0 * a1) * h + 3.0 * a2) * h + 2.0 * a3) * h + a4
    }

    /// Scale used for relative tolerances, `1 + sum |coefficients|`.
    pub fn scale(&self) -> f64 {
        1.0 + self
            .i
            .iter()
            .chain(self.t.iter())
            .map(|c| c.abs())
            .sum::<f64>()
    }
}

/// Evaluates the three Routh–Hurwitz-style inequality groups on
/// `E_j = I_j + T_j` (stability of the equilibrium at zero immune delay).
pub fn check_hypothesis_h(coeffs: &CharCoeffsE2) -> HypothesisReport {
    let e: Vec<f64> = (0..5).map(|j| coeffs.i[j] + coeffs.t[j]).collect();
    let (e1, e2, e3, e4, e5) = (e[0], e[1], e[2], e[3], e[4]);
    let first = e1 * e2 - e3;
    let third = first * e3 - e1 * e1 * e4 + e1 * e5;
    let mut inequalities = vec![("E1 E2 - E3 > 0".to_string(), first, first > 0.0)];
    for (j, ej) in e.iter().enumerate() {
        inequalities.push((format!("E{} > 0", j + 1), *ej, *ej > 0.0));
    }
    inequalities.push((
        "(E1 E2 - E3) E3 - E1^2 E4 + E1 E5 > 0".to_string(),
        third,
        third > 0.0,
    ));
    let ok = inequalities.iter().all(|(_, _, holds)| *holds);
    HypothesisReport { inequalities, ok }
}

/// All real positive roots of a real polynomial given by descending-degree
/// coefficients, via companion-matrix eigenvalues with Newton polish.
///
/// Keeps eigenvalues with `|imag| < 1e-8 (1 + |real|)` and `real > 1e-10`,
/// polishes each by Newton to residual below `1e-12 * scale`, and
/// deduplicates within `1e-8` relative.
pub fn positive_real_roots(poly: &[f64]) -> Vec<f64> {
    assert!(
        !poly.is_empty() && poly[0] != 0.0,
        "leading coefficient must be nonzero"
    );
    let n = poly.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    // Companion matrix of the monic normalization.
    let monic: Vec<f64> = poly[1..].iter().map(|c| c / poly[0]).collect();
    let mut comp = nalgebra::DMatrix::<f64>::zeros(n, n);
    for r in 1..n {
        comp[(r, r - 1)] = 1.0;
    }
    for r in 0..n {
        comp[(r, n - 1)] = -monic[n - 1 - r];
    }
    let eigs = comp.complex_eigenvalues();
    // Evaluates the polynomial, its derivative, and the sum of term
    // magnitudes; the latter is the honest residual scale for graded
    // coefficients (the polynomial can be orders of magnitude smaller near a
    // root than its coefficient sum suggests).
    let eval = |x: f64| -> (f64, f64, f64) {
        let mut v = poly[0];
        let mut d = 0.0;
        let mut mag = poly[0].abs();
        for &c in &poly[1..] {
            d = d * x + v;
            v = v * x + c;
            mag = mag * x.abs() + c.abs();
        }
        (v, d, mag)
    };
    let mut roots: Vec<f64> = Vec::new();
    for ev in eigs.iter() {
        if ev.im.abs() >= 1e-8 * (1.0 + ev.re.abs()) || ev.re <= 1e-10 {
            continue;
        }
        let mut x = ev.re;
        for _ in 0..100 {
            let (v, d, _) = eval(x);
            if d == 0.0 {
                break;
            }
            let step = v / d;
            x -= step;
            if step.abs() < 1e-15 * (1.0 + x.abs()) {
                break;
            }
        }
        if !x.is_finite() || x <= 1e-10 {
            continue;
        }
        let (v, _, mag) = eval(x);
        if v.abs() > 1e-10 * (mag + f64::MIN_POSITIVE) {
            continue;
        }
        if !roots.iter().any(|r| (r - x).abs() < 1e-8 * (1.0 + x.abs())) {
            roots.push(x);
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots
}

/// Ladder of delays at which the crossing frequency `w` puts a root pair on
/// the imaginary axis: `tau_n = (theta + 2 pi n) / w` for `n = 0..=n_max`.
///
/// `(cos(w tau), sin(w tau))` is obtained by solving the 2x2 linear system
/// formed by the real and imaginary parts of the characteristic equation at
/// `xi = i w`, which is unambiguous in quadrant. Each ladder entry is
/// verified by evaluating the characteristic function.
pub fn tau_ladder(
    coeffs: &CharCoeffsE2,
    w: f64,
    n_max: usize,
) -> Result<Vec<f64>, CharStabError> {
    let [i1, i2, i3, i4, i5] = coeffs.i;
    let [t1, t2, t3, t4, t5] = coeffs.t;
    let w2 = w * w;
    let cc = t1 * w2 * w2 - t3 * w2 + t5;
    let ss = -t2 * w2 * w + t4 * w;
    let e1 = -i1 * w2 * w2 + i3 * w2 - i5;
    let e2 = w2 * w2 * w - i2 * w2 * w + i4 * w;
    let den = cc * cc + ss * ss;
    let cos_wt = (cc * e1 - ss * e2) / den;
    let sin_wt = (ss * e1 + cc * e2) / den;
    let norm = cos_wt * cos_wt + sin_wt * sin_wt;
    if (norm - 1.0).abs() > 1e-6 {
        return Err(CharStabError::NotACrossing { w, norm });
    }
    let mut theta = sin_wt.atan2(cos_wt);
    if theta < 0.0 {
        theta += 2.0 * std::f64::consts::PI;
    }
    let scale = coeffs.scale();
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let tau = (theta + 2.0 * std::f64::consts::PI * n as f64) / w;
        let value = coeffs.eval(C64::new(0.0, w), tau).norm();
        if value > 1e-7 * scale {
            return Err(CharStabError::LadderVerification { tau, value });
        }
        out.push(tau);
    }
    Ok(out)
}

/// Sign of `F'(h0)` at a crossing, which equals the sign of
/// `d Re xi / d tau3` there. Returns 0 when `|F'(h0)|` is below
/// `1e-10 * scale` (degenerate double root).
pub fn transversality(coeffs: &CharCoeffsE2, h0: f64) -> i8 {
    let fp = coeffs.f_prime(h0);
    // Degeneracy is judged against the term magnitudes of F' at h0 itself:
    // the quintic coefficients are strongly graded, so a global coefficient
    // sum would dwarf every value the derivative can actually take near the
    // crossing.
    let [a1, a2, a3, a4, _] = coeffs.a_quintic;
    let h = h0.abs();
    let scale = 5.0 * h * h * h * h
        + 4.0 * a1.abs() * h * h * h
        + 3.0 * a2.abs() * h * h
        + 2.0 * a3.abs() * h
        + a4.abs();
    if fp.abs() < 1e-10 * scale {
        0
    } else if fp > 0.0 {
        1
    } else {
        -1
    }
}

/// Critical immune-response delay for the immunity-activated equilibrium
/// with `tau1 = tau2 = 0`.
///
/// Enumerates the positive roots of `F`, builds a ladder per root, and takes
/// the global minimum delay. Returns `None` when `F` has no positive root
/// (the equilibrium is then stable for every immune delay).
pub fn critical_tau0(params: &Parameters) -> Result<Option<CriticalDelay>, CharStabError> {
    let coeffs = e2_coeffs(params)?;
    critical_tau0_from(&coeffs)
}

/// Same as [`critical_tau0`] starting from precomputed coefficients.
pub fn critical_tau0_from(
    coeffs: &CharCoeffsE2,
) -> Result<Option<CriticalDelay>, CharStabError> {
    let mut poly = vec![1.0];
    poly.extend_from_slice(&coeffs.a_quintic);
    let roots = positive_real_roots(&poly);
    if roots.is_empty() {
        return Ok(None);
    }
    let n_max = 3;
    let mut ladder_all: Vec<(usize, usize, f64)> = Vec::new();
    let mut best: Option<(f64, f64, f64)> = None; // (tau0, w0, h0)
    for (m, &h) in roots.iter().enumerate() {
        let w = h.sqrt();
        let ladder = tau_ladder(coeffs, w, n_max)?;
        for (n, &tau) in ladder.iter().enumerate() {
            ladder_all.push((m, n, tau));
            if best.map_or(true, |(t0, _, _)| tau < t0) {
                best = Some((tau, w, h));
            }
        }
    }
    let (tau0, w0, h0) = best.expect("nonempty root set");
    ladder_all.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap());
    Ok(Some(CriticalDelay {
        tau0,
        w0,
        h0,
        ladder: ladder_all,
        transversality_sign: transversality(coeffs, h0),
    }))
}

/// Tracks a characteristic root by complex Newton iteration on
/// [`char_value`], starting at `xi0` for the given immune delay.
pub fn newton_root(jac: &DelayJacobian, tau3: f64, xi0: C64) -> C64 {
    let (tau1, tau2, _) = jac.delays;
    let delays = (tau1, tau2, tau3);
    let mut xi = xi0;
    for _ in 0..60 {
        let f = char_value(jac, delays, xi);
        let d = 1e-7 * (1.0 + xi.norm());
        let fp = (char_value(jac, delays, xi + C64::new(d, 0.0))
            - char_value(jac, delays, xi - C64::new(d, 0.0)))
            / C64::new(2.0 * d, 0.0);
        let step = f / fp;
        xi -= step;
        if step.norm() < 1e-13 * (1.0 + xi.norm()) {
            break;
        }
    }
    xi
}
