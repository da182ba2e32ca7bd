//! Time-dependent real potentials with exact-in-time antiderivatives.
//!
//! The splitting scheme integrates the potential phase exactly over each
//! step, so a potential must expose G_n(τ, x) = ∫₀^τ V(t_n + s, x) ds in
//! closed form (or fall back to adaptive quadrature, see
//! [`QuadraturePotential`]).

use crate::geometry::Point2;

pub trait Potential: Send + Sync {
    /// V(t, x).
    fn value(&self, t: f64, x: Point2) -> f64;

    /// G_n(τ, x) = ∫₀^τ V(t_n + s, x) ds; must vanish at τ = 0.
    fn antiderivative(&self, t_n: f64, tau: f64, x: Point2) -> f64;
}

/// V ≡ 0.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroPotential;

impl Potential for ZeroPotential {
    fn value(&self, _t: f64, _x: Point2) -> f64 {
        0.0
    }

    fn antiderivative(&self, _t_n: f64, _tau: f64, _x: Point2) -> f64 {
        0.0
    }
}

/// Harmonic trap of strength `v0` perturbed by a rotating sinusoidal stirrer
/// of relative amplitude `eps` and angular frequency `omega`:
/// V(t, x) = v0 r² (1 + eps cos(2θ - ω t)) in polar coordinates.
#[derive(Debug, Clone, Copy)]
pub struct StirrerPotential {
    pub v0: f64,
    pub eps: f64,
    pub omega: f64,
}

impl Potential for StirrerPotential {
    fn value(&self, t: f64, x: Point2) -> f64 {
        let r2 = x.x * x.x + x.y * x.y;
        if r2 == 0.0 {
            return 0.0;
        }
        let theta = x.y.atan2(x.x);
        self.v0 * r2 * (1.0 + self.eps * (2.0 * theta - self.omega * t).cos())
    }

    fn antiderivative(&self, t_n: f64, tau: f64, x: Point2) -> f64 {
        stirrer_antiderivative(t_n, tau, x, self.v0, self.eps, self.omega)
    }
}

/// Closed-form ∫₀^τ V0 r² (1 + ε cos(2θ - ω(t_n+s))) ds. For |ωτ| below
/// roundoff the ω → 0 limit V0 r² τ (1 + ε cos(2θ - ω t_n)) is used.
pub fn stirrer_antiderivative(
    t_n: f64,
    tau: f64,
    x: Point2,
    v0: f64,
    eps: f64,
    omega: f64,
) -> f64 {
    let r2 = x.x * x.x + x.y * x.y;
    if r2 == 0.0 || tau == 0.0 {
        return 0.0;
    }
    let two_theta = 2.0 * x.y.atan2(x.x);
    if (omega * tau).abs() < 1e-12 {
        return v0 * r2 * tau * (1.0 + eps * (two_theta - omega * t_n).cos());
    }
    let s0 = (two_theta - omega * t_n).sin();
    let s1 = (two_theta - omega * (t_n + tau)).sin();
    v0 * r2 * (tau + eps / omega * (s0 - s1))
}

/// Wraps a plain V(t, x) with an adaptive-Simpson antiderivative for
/// potentials without a closed form. Integration tolerance 1e-12 per
/// evaluation; construction logs a warning since stepping cost grows
/// noticeably.
pub struct QuadraturePotential<F> {
    value: F,
    tol: f64,
}

impl<F: Fn(f64, Point2) -> f64 + Send + Sync> QuadraturePotential<F> {
    pub fn new(value: F) -> Self {
        log::warn!(
            "potential without closed-form antiderivative: falling back to adaptive quadrature"
        );
        Self { value, tol: 1e-12 }
    }
}

impl<F: Fn(f64, Point2) -> f64 + Send + Sync> Potential for QuadraturePotential<F> {
    fn value(&self, t: f64, x: Point2) -> f64 {
        (self.value)(t, x)
    }

    fn antiderivative(&self, t_n: f64, tau: f64, x: Point2) -> f64 {
        if tau == 0.0 {
            return 0.0;
        }
        adaptive_simpson(|s| (self.value)(t_n + s, x), 0.0, tau, self.tol)
    }
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(&f, a, b, fa, fm, fb, whole, tol, 40)
}
