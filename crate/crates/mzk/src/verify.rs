//! Independent oracles: finite-difference residuals for the reduced ODE and
//! the full PDE, a fixed-step RK4 integrator for the reduced equation,
//! numeric differentiation for profile identification, and the per-family
//! primitive check `dH/dv = h`.
//!
//! Derivative stencils are 5-point central with Richardson extrapolation over
//! steps `h` and `h/2` (the third derivative uses the 2nd-order 5-point form,
//! extrapolated to 4th order).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{Aux, ClassId, FamilyDescriptor};
use crate::families::{EvalResult, EvalStatus};
use crate::model::{h_eval, EquationParams, JetPoint, WaveConstants};
use crate::specfun::elliptic_f;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("insufficient domain: only {usable} of {total} sample points evaluable")]
    InsufficientDomain { usable: usize, total: usize },
    #[error("trajectory blow-up at r = {r}: |v| exceeded {limit:.1e}")]
    BlowUp { r: f64, limit: f64 },
    #[error("sample v = {0} violates the case's domain inequalities")]
    Domain(f64),
    #[error("invalid input: {0}")]
    BadInput(String),
}

/// Residual summary of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_abs: f64,
    /// `max_abs` normalized by `1 +` the largest term magnitude at the worst
    /// point (per-point normalization, maximized).
    pub max_rel: f64,
    pub n_points: usize,
    pub n_skipped_poles: usize,
    pub fd_step: f64,
}

/// 4th-order first derivative.
fn d1(f: &mut dyn FnMut(f64) -> Option<f64>, x: f64, h: f64) -> Option<f64> {
    Some((-f(x + 2.0 * h)? + 8.0 * f(x + h)? - 8.0 * f(x - h)? + f(x - 2.0 * h)?) / (12.0 * h))
}

/// 4th-order second derivative.
fn d2(f: &mut dyn FnMut(f64) -> Option<f64>, x: f64, h: f64) -> Option<f64> {
    Some(
        (-f(x + 2.0 * h)? + 16.0 * f(x + h)? - 30.0 * f(x)? + 16.0 * f(x - h)?
            - f(x - 2.0 * h)?)
            / (12.0 * h * h),
    )
}

/// 2nd-order third derivative.
fn d3(f: &mut dyn FnMut(f64) -> Option<f64>, x: f64, h: f64) -> Option<f64> {
    Some((f(x + 2.0 * h)? - 2.0 * f(x + h)? + 2.0 * f(x - h)? - f(x - 2.0 * h)?) / (2.0 * h * h * h))
}

fn richardson(order: i32, coarse: f64, fine: f64) -> f64 {
    let p = 2.0f64.powi(order);
    (p * fine - coarse) / (p - 1.0)
}

/// Richardson-extrapolated jet `(v, v1, v2, v3)` of a scalar profile.
pub fn fd_jet(f: &mut dyn FnMut(f64) -> Option<f64>, x: f64, h: f64) -> Option<(f64, f64, f64, f64)> {
    let v = f(x)?;
    let v1 = richardson(4, d1(f, x, h)?, d1(f, x, 0.5 * h)?);
    let v2 = richardson(4, d2(f, x, h)?, d2(f, x, 0.5 * h)?);
    let v3 = richardson(2, d3(f, x, h)?, d3(f, x, 0.5 * h)?);
    Some((v, v1, v2, v3))
}

fn default_ode_step(width: f64) -> f64 {
    1e-3 * (width / 20.0)
}

/// Residual of the reduced equation
/// `-c v1 + A v v1 + B v^2 v1 + (M+N) v3 = 0`
/// over `n` regular samples of `interval`; poles are skipped and counted.
pub fn ode_residual(
    profile: &dyn Fn(f64) -> EvalResult,
    params: &EquationParams,
    c: f64,
    interval: (f64, f64),
    n: usize,
    fd_step: Option<f64>,
) -> Result<ResidualReport, VerifyError> {
    if n < 7 {
        return Err(VerifyError::BadInput(format!("need n >= 7 samples, got {n}")));
    }
    let (r0, r1) = interval;
    let width = (r1 - r0).abs();
    let h = fd_step.unwrap_or_else(|| default_ode_step(width));
    let mut eval = |r: f64| {
        let res = profile(r);
        if res.is_ok() {
            res.value
        } else {
            None
        }
    };

    let mut max_abs = 0.0f64;
    let mut max_rel = 0.0f64;
    let mut usable = 0;
    for i in 0..n {
        let r = r0 + (r1 - r0) * i as f64 / (n - 1) as f64;
        let Some((v, v1, _v2, v3)) = fd_jet(&mut eval, r, h) else {
            continue;
        };
        usable += 1;
        let t1 = -c * v1;
        let t2 = params.a * v * v1;
        let t3 = params.b * v * v * v1;
        let t4 = params.mu() * v3;
        let res = (t1 + t2 + t3 + t4).abs();
        let scale = 1.0 + t1.abs().max(t2.abs()).max(t3.abs()).max(t4.abs());
        max_abs = max_abs.max(res);
        max_rel = max_rel.max(res / scale);
    }
    if usable * 2 < n {
        return Err(VerifyError::InsufficientDomain { usable, total: n });
    }
    Ok(ResidualReport {
        max_abs,
        max_rel,
        n_points: usable,
        n_skipped_poles: n - usable,
        fd_step: h,
    })
}

/// One axis of an evaluation grid.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl AxisSpec {
    pub fn new(min: f64, max: f64, n: usize) -> Self {
        Self { min, max, n }
    }

    pub fn at(&self, i: usize) -> f64 {
        if self.n <= 1 {
            self.min
        } else {
            self.min + (self.max - self.min) * i as f64 / (self.n - 1) as f64
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    pub x: AxisSpec,
    pub y: AxisSpec,
    pub t: AxisSpec,
    /// Per-axis finite-difference step (default 0.05).
    pub fd_step: f64,
}

impl GridSpec {
    pub fn cube(min: f64, max: f64, n: usize) -> Self {
        Self {
            x: AxisSpec::new(min, max, n),
            y: AxisSpec::new(min, max, n),
            t: AxisSpec::new(min, max, n),
            fd_step: 0.05,
        }
    }
}

/// Residual of the full equation
/// `u_t + A u u_x + B u^2 u_x + M u_xxx + N u_xyy = 0`
/// over a grid; the mixed derivative applies the first-derivative stencil in
/// `x` to second-derivative stencils in `y`.
pub fn pde_residual(
    u: &dyn Fn(f64, f64, f64) -> EvalResult,
    params: &EquationParams,
    grid: &GridSpec,
) -> Result<ResidualReport, VerifyError> {
    if grid.x.n < 7 || grid.y.n < 7 || grid.t.n < 7 {
        return Err(VerifyError::BadInput("need >= 7 points per axis".into()));
    }
    let h = grid.fd_step;
    let eval = |x: f64, y: f64, t: f64| {
        let res = u(x, y, t);
        if res.is_ok() {
            res.value
        } else {
            None
        }
    };

    let mut max_abs = 0.0f64;
    let mut max_rel = 0.0f64;
    let mut usable = 0;
    let total = grid.x.n * grid.y.n * grid.t.n;

    for it in 0..grid.t.n {
        let t = grid.t.at(it);
        for iy in 0..grid.y.n {
            let y = grid.y.at(iy);
            for ix in 0..grid.x.n {
                let x = grid.x.at(ix);

                let res = (|| -> Option<(f64, f64)> {
                    let u0 = eval(x, y, t)?;
                    let mut ft = |tt: f64| eval(x, y, tt);
                    let ut = richardson(4, d1(&mut ft, t, h)?, d1(&mut ft, t, 0.5 * h)?);
                    let mut fx = |xx: f64| eval(xx, y, t);
                    let ux = richardson(4, d1(&mut fx, x, h)?, d1(&mut fx, x, 0.5 * h)?);
                    let uxxx = richardson(2, d3(&mut fx, x, h)?, d3(&mut fx, x, 0.5 * h)?);
                    // u_xyy: d/dx of the 5-point d2 in y, Richardson over
                    // both axes at once.
                    let dyy_at = |step: f64| -> Option<f64> {
                        let mut fyy = |xx: f64| {
                            let mut fy = |yy: f64| eval(xx, yy, t);
                            d2(&mut fy, y, step)
                        };
                        d1(&mut fyy, x, step)
                    };
                    let uxyy = richardson(2, dyy_at(h)?, dyy_at(0.5 * h)?);

                    let t1 = ut;
                    let t2 = params.a * u0 * ux;
                    let t3 = params.b * u0 * u0 * ux;
                    let t4 = params.m * uxxx;
                    let t5 = params.n * uxyy;
                    let r = (t1 + t2 + t3 + t4 + t5).abs();
                    let scale = 1.0
                        + t1.abs()
                            .max(t2.abs())
                            .max(t3.abs())
                            .max(t4.abs())
                            .max(t5.abs());
                    Some((r, scale))
                })();

                if let Some((r, scale)) = res {
                    usable += 1;
                    max_abs = max_abs.max(r);
                    max_rel = max_rel.max(r / scale);
                }
            }
        }
    }
    if usable * 2 < total {
        return Err(VerifyError::InsufficientDomain { usable, total });
    }
    Ok(ResidualReport {
        max_abs,
        max_rel,
        n_points: usable,
        n_skipped_poles: total - usable,
        fd_step: h,
    })
}

const BLOWUP_LIMIT: f64 = 1e12;

/// Classical fixed-step RK4 on the first-order system
/// `(v, v1, v2)' = (v1, v2, -(B v^2 + A v - c) v1 / (M+N))`.
///
/// Fixed step keeps trajectories reproducible for the conservation tests;
/// blow-ups are detected, not stepped over. `v3` in the returned jets is the
/// right-hand side of the last component.
pub fn rk_integrate(
    params: &EquationParams,
    c: f64,
    init: &JetPoint,
    r_end: f64,
    step: f64,
) -> Result<Vec<JetPoint>, VerifyError> {
    if params.is_degenerate() {
        return Err(VerifyError::BadInput("M + N must be nonzero".into()));
    }
    if step <= 0.0 {
        return Err(VerifyError::BadInput(format!("step must be positive, got {step}")));
    }
    let mu = params.mu();
    let rhs = |s: [f64; 3]| {
        [
            s[1],
            s[2],
            -(params.b * s[0] * s[0] + params.a * s[0] - c) * s[1] / mu,
        ]
    };
    let n_steps = ((r_end - init.r) / step).ceil().max(0.0) as usize;
    let mut out = Vec::with_capacity(n_steps + 1);
    let mut state = [init.v, init.v1, init.v2];
    let mut r = init.r;
    let push = |out: &mut Vec<JetPoint>, r: f64, s: [f64; 3]| {
        let v3 = -(params.b * s[0] * s[0] + params.a * s[0] - c) * s[1] / mu;
        out.push(JetPoint { r, v: s[0], v1: s[1], v2: s[2], v3: Some(v3) });
    };
    push(&mut out, r, state);
    for i in 0..n_steps {
        let h = step.min(r_end - r);
        let k1 = rhs(state);
        let k2 = rhs(add(state, scale(k1, 0.5 * h)));
        let k3 = rhs(add(state, scale(k2, 0.5 * h)));
        let k4 = rhs(add(state, scale(k3, h)));
        for j in 0..3 {
            state[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        r = init.r + step * (i + 1) as f64;
        if r > r_end {
            r = r_end;
        }
        if state[0].abs() > BLOWUP_LIMIT {
            return Err(VerifyError::BlowUp { r, limit: BLOWUP_LIMIT });
        }
        push(&mut out, r, state);
    }
    Ok(out)
}

fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Jets of a sampled profile with derivatives from the FD stencils
/// (used when identify input carries only `(r, v)`).
pub fn profile_jets(
    profile: &dyn Fn(f64) -> EvalResult,
    rs: &[f64],
    fd_step: f64,
) -> Vec<Option<JetPoint>> {
    let mut eval = |r: f64| {
        let res = profile(r);
        if res.status == EvalStatus::Ok {
            res.value
        } else {
            None
        }
    };
    rs.iter()
        .map(|&r| {
            fd_jet(&mut eval, r, fd_step).map(|(v, v1, v2, v3)| JetPoint {
                r,
                v,
                v1,
                v2,
                v3: Some(v3),
            })
        })
        .collect()
}

/// Closed-form antiderivative `H` of `h` for the given family, oriented so
/// that `dH/dv = +h` on the family's domain. `None` outside the domain.
///
/// These are the per-family quadratures behind the implicit description
/// `r +- H(v) = C1`; sub-interval pieces (separated by poles of `h`) switch
/// form and orientation as needed.
pub fn primitive_value(fd: &FamilyDescriptor, wc: &WaveConstants, v: f64) -> Option<f64> {
    let a = fd.params.a;
    let mu = fd.params.mu();
    let c = wc.c;
    let k = fd.k_const;
    let finite = |x: f64| if x.is_finite() { Some(x) } else { None };

    match (&fd.class_id, &fd.aux) {
        (ClassId::Solg21, Aux::Quadratic) => {
            // integral of sqrt(6(M+N)/q), q = 6 c v^2 + C2 v - C3, in log
            // form; valid for both signs of c. The log argument keeps one
            // sign per connected domain component, so |.| is safe.
            let q = 6.0 * c * v * v + wc.c2 * v - wc.c3;
            if mu / q <= 0.0 {
                return None;
            }
            let qp = 12.0 * c * v + wc.c2;
            let arg = c.signum() * qp + 2.0 * (6.0 * c * q).sqrt();
            finite((mu / c).sqrt() * arg.abs().ln())
        }
        (ClassId::Solg22, Aux::Quadratic) => {
            let q = 6.0 * c * v * v + wc.c2 * v - wc.c3;
            if mu / q <= 0.0 {
                return None;
            }
            let disc = wc.c2 * wc.c2 + 24.0 * c * wc.c3;
            if disc <= 0.0 {
                return None;
            }
            let qp = 12.0 * c * v + wc.c2;
            let arg = qp / disc.sqrt();
            if arg.abs() > 1.0 {
                return None;
            }
            finite(c.signum() * (-mu / c).sqrt() * arg.asin())
        }
        (ClassId::Solg3Triple, Aux::TripleCubic { .. }) => {
            let g = c - a * v;
            if 3.0 * mu / g <= 0.0 {
                return None;
            }
            finite(2.0 * a.signum() * (3.0 * mu / g).sqrt())
        }
        (ClassId::Solg3Caso2A1, Aux::DoubleCubic { phi, .. }) => {
            let g = c - a * phi;
            let num = 3.0 * c - 2.0 * a * phi - a * v;
            let arg2 = num / (3.0 * g);
            if g / mu <= 0.0 || !(0.0..1.0).contains(&arg2) {
                return None;
            }
            let sigma = if v < *phi { 1.0 } else { -1.0 };
            finite(sigma * 2.0 * (mu / g).sqrt() * arg2.sqrt().atanh())
        }
        (ClassId::Solg3Caso2A2, Aux::DoubleCubic { phi, .. }) => {
            let g = c - a * phi;
            let num = 3.0 * c - 2.0 * a * phi - a * v;
            let arg2 = num / (-3.0 * g);
            if mu <= 0.0 || g >= 0.0 || arg2 < 0.0 {
                return None;
            }
            let sigma = if v < *phi { -1.0 } else { 1.0 };
            finite(sigma * 2.0 * (mu / -g).sqrt() * arg2.sqrt().atan())
        }
        (ClassId::Solg3Caso2B, Aux::DoubleCubic { phi, .. }) => {
            let g = c - a * phi;
            let den = a * v + 2.0 * a * phi - 3.0 * c;
            let arg2 = 3.0 * g / den;
            if mu >= 0.0 || g <= 0.0 || arg2 < 0.0 {
                return None;
            }
            // arccot(x) = atan(1/x) on the positive branch.
            let sigma = (v - phi).signum();
            finite(sigma * 2.0 * (-mu / g).sqrt() * (arg2.sqrt().recip()).atan())
        }
        (ClassId::Solg3SimplesA1, Aux::ThreeCubic { phi1, phi2, phi3 }) => {
            if v <= *phi3 {
                return None;
            }
            let pref = (-12.0 * mu / (a * (phi2 - phi1))).sqrt();
            let z = ((phi2 - phi1) / (v - phi1)).sqrt();
            let m = (phi3 - phi1) / (phi2 - phi1);
            finite(-pref * elliptic_f(z, m).ok()?)
        }
        (ClassId::Solg3SimplesA2, Aux::ThreeCubic { phi1, phi2, phi3 }) => {
            if v <= *phi1 || v >= *phi2 {
                return None;
            }
            // Prefactor carries phi3 - phi1 (the phi2 - phi1 variant is not a
            // primitive of h).
            let pref = (-12.0 * mu / (a * (phi3 - phi1))).sqrt();
            let z = ((v - phi1) / (phi2 - phi1)).sqrt();
            let m = (phi2 - phi1) / (phi3 - phi1);
            finite(pref * elliptic_f(z, m).ok()?)
        }
        (ClassId::Solg3SimplesB1, Aux::ThreeCubic { phi1, phi2, phi3 }) => {
            if v <= *phi2 || v >= *phi3 {
                return None;
            }
            let pref = (12.0 * mu / (a * (phi2 - phi1))).sqrt();
            let z = ((v - phi2) / (phi3 - phi2)).sqrt();
            let m = (phi2 - phi3) / (phi2 - phi1);
            finite(pref * elliptic_f(z, m).ok()?)
        }
        (ClassId::Solg3SimplesB2, Aux::ThreeCubic { phi1, phi2, phi3 }) => {
            if v >= *phi1 {
                return None;
            }
            let pref = (12.0 * mu / (a * (phi2 - phi1))).sqrt();
            let z = ((phi2 - phi1) / (phi2 - v)).sqrt();
            let m = (phi2 - phi3) / (phi2 - phi1);
            finite(pref * elliptic_f(z, m).ok()?)
        }
        (ClassId::Solg4Cuadruple, Aux::QuadrupleQuartic { phi }) => {
            let k = k?;
            if k <= 0.0 {
                return None;
            }
            finite(-k.sqrt() / (v - phi))
        }
        (ClassId::Sol1RTriple, Aux::TripleQuartic { phi1, phi2 }) => {
            let k = k?;
            let tau = k * (v - phi2) / (v - phi1);
            if tau < 0.0 {
                return None;
            }
            finite(k.signum() * 2.0 / (phi2 - phi1) * tau.sqrt())
        }
        (ClassId::Sol2RDPlus | ClassId::Sol2RDMinus, Aux::TwoDouble { phi1, phi2 }) => {
            let k = k?;
            if k <= 0.0 {
                return None;
            }
            let tau = (v - phi2) / (v - phi1);
            if tau < 0.0 {
                finite(k.sqrt() / (phi1 - phi2) * ((phi2 - v) / (v - phi1)).ln())
            } else if tau > 0.0 {
                finite(k.sqrt() / (phi2 - phi1) * tau.ln())
            } else {
                None
            }
        }
        (ClassId::Solg4DoubleCompl, Aux::DoubleComplex { a: re, b: im }) => {
            let k = k?;
            if k <= 0.0 {
                return None;
            }
            finite(k.sqrt() / im * ((v - re) / im).atan())
        }
        (ClassId::Solg41D2RealesA, Aux::DoubleTwoReal { phi1, phi2, phi3 }) => {
            let k = k?;
            let that = k * (phi1 - phi2) * (phi3 - phi1);
            if that <= 0.0 {
                return None;
            }
            let g = (phi1 - phi2) * (v - phi3) / ((phi3 - phi1) * (v - phi2));
            if g < 0.0 {
                return None;
            }
            // dg/dv = (phi1-phi2)(phi3-phi2) / ((phi3-phi1)(v-phi2)^2) has
            // constant sign; orient so dH/dv = +h.
            let sigma = (k * (phi1 - phi2) * (phi3 - phi2) * (phi3 - phi1)).signum();
            finite(sigma * 2.0 * k / that.sqrt() * g.sqrt().atan())
        }
        (
            ClassId::Solg41D2RealesB1 | ClassId::Solg41D2RealesB2,
            Aux::DoubleTwoReal { phi1, phi2, phi3 },
        ) => {
            let k = k?;
            let that = k * (phi2 - phi1) * (phi3 - phi1);
            if that <= 0.0 {
                return None;
            }
            let g = (phi2 - phi1) * (v - phi3) / ((phi3 - phi1) * (v - phi2));
            if g < 0.0 {
                return None;
            }
            let sigma = (k * (phi2 - phi1) * (phi3 - phi2) * (phi3 - phi1)).signum();
            if g < 1.0 {
                finite(sigma * 2.0 * k / that.sqrt() * g.sqrt().atanh())
            } else {
                finite(-sigma * 2.0 * k / that.sqrt() * (1.0 / g.sqrt()).atanh())
            }
        }
        (
            ClassId::Solg4Dobley2Comp1 | ClassId::Solg4Dobley2Comp2,
            Aux::DoubleComplexPair { phi1, a: re, b: im },
        ) => {
            let k = k?;
            if k <= 0.0 {
                return None;
            }
            let r2 = (phi1 - re) * (phi1 - re) + im * im;
            let root = ((v - re) * (v - re) + im * im).sqrt();
            let pref = (4.0 * k / r2).sqrt();
            if v < *phi1 {
                let arg = r2.sqrt() / (v - phi1 - root);
                finite(-pref * arg.atanh())
            } else if v > *phi1 {
                let arg = (v - phi1 - root) / r2.sqrt();
                finite(pref * arg.atanh())
            } else {
                None
            }
        }
        (
            ClassId::Sol4Dist1 | ClassId::Sol4Dist2 | ClassId::Sol4Dist3 | ClassId::Sol4Dist4,
            Aux::FourDistinct { phi },
        ) => {
            if !phi.iter().all(|e| e.is_real()) {
                return None;
            }
            let [p1, p2, p3, p4] = [phi[0].re, phi[1].re, phi[2].re, phi[3].re];
            let k = k?;
            match fd.class_id {
                ClassId::Sol4Dist1 => {
                    if k <= 0.0 || (v > p1 && v < p4) {
                        return None;
                    }
                    let pref = (4.0 * k / ((p3 - p1) * (p4 - p2))).sqrt();
                    let z2 = (p4 - p2) * (v - p1) / ((p4 - p1) * (v - p2));
                    if z2 < 0.0 {
                        return None;
                    }
                    let m = (p3 - p2) * (p4 - p1) / ((p3 - p1) * (p4 - p2));
                    // z(v) decreases on both outer lobes.
                    finite(-pref * elliptic_f(z2.sqrt(), m).ok()?)
                }
                ClassId::Sol4Dist2 => {
                    if k <= 0.0 || v <= p2 || v >= p3 {
                        return None;
                    }
                    let pref = (4.0 * k / ((p3 - p2) * (p4 - p1))).sqrt();
                    let z2 = (p4 - p1) * (v - p2) / ((p4 - p2) * (v - p1));
                    let m = (p3 - p1) * (p4 - p2) / ((p3 - p2) * (p4 - p1));
                    finite(pref * elliptic_f(z2.sqrt(), m).ok()?)
                }
                ClassId::Sol4Dist3 => {
                    if k >= 0.0 || v <= p1 || v >= p2 {
                        return None;
                    }
                    let pref = (4.0 * k / ((p1 - p2) * (p4 - p3))).sqrt();
                    let z2 = (p4 - p3) * (v - p2) / ((p4 - p2) * (v - p3));
                    if z2 < 0.0 {
                        return None;
                    }
                    let m = (p3 - p1) * (p4 - p2) / ((p2 - p1) * (p4 - p3));
                    finite(-pref * elliptic_f(z2.sqrt(), m).ok()?)
                }
                ClassId::Sol4Dist4 => {
                    if k >= 0.0 || v <= p3 || v >= p4 {
                        return None;
                    }
                    let pref = (4.0 * k / ((p1 - p3) * (p4 - p2))).sqrt();
                    let z2 = (p4 - p2) * (v - p3) / ((p4 - p3) * (v - p2));
                    let m = (p2 - p1) * (p4 - p3) / ((p3 - p1) * (p4 - p2));
                    finite(pref * elliptic_f(z2.sqrt(), m).ok()?)
                }
                _ => unreachable!(),
            }
        }
        _ => None,
    }
}

/// Checks `dH/dv = h` by central differences at each sample.
pub fn primitive_check(
    fd: &FamilyDescriptor,
    wc: &WaveConstants,
    v_samples: &[f64],
    fd_step: Option<f64>,
) -> Result<ResidualReport, VerifyError> {
    if v_samples.is_empty() {
        return Err(VerifyError::BadInput("no samples".into()));
    }
    let mut max_abs = 0.0f64;
    let mut max_rel = 0.0f64;
    let mut step_used = 0.0;
    for &v in v_samples {
        let h = fd_step.unwrap_or(1e-4 * (1.0 + v.abs()));
        step_used = h;
        let mut f = |x: f64| primitive_value(fd, wc, x);
        let hv = h_eval(&fd.params, wc, v).map_err(|_| VerifyError::Domain(v))?;
        let dh = richardson(
            4,
            d1(&mut f, v, h).ok_or(VerifyError::Domain(v))?,
            d1(&mut f, v, 0.5 * h).ok_or(VerifyError::Domain(v))?,
        );
        let err = (dh - hv).abs();
        max_abs = max_abs.max(err);
        max_rel = max_rel.max(err / (1.0 + hv.abs()));
    }
    Ok(ResidualReport {
        max_abs,
        max_rel,
        n_points: v_samples.len(),
        n_skipped_poles: 0,
        fd_step: step_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{descriptor_from_free_params, ClassId, FreeParams};
    use crate::families::{evaluate, evaluate_profile, EvalResult, WavePoint};
    use crate::model::WaveConstants;

    fn kink() -> (EquationParams, WaveConstants, crate::classify::FamilyDescriptor) {
        let params = EquationParams::new(1.0, 2.0, -1.0, -1.0 / 3.0).unwrap();
        let free = FreeParams { c: Some(0.25), c1: Some(0.0), ..Default::default() };
        let (wc, fd) = descriptor_from_free_params(ClassId::Sol2RDPlus, &params, &free).unwrap();
        (params, wc, fd)
    }

    #[test]
    fn kink_ode_residual_is_tiny() {
        let (params, wc, fd) = kink();
        let profile = |r: f64| evaluate_profile(&fd, &wc, r);
        // At the default step the third-derivative stencil sits on its
        // roundoff floor (~5e-6 relative); still inside the acceptance
        // threshold.
        let default_step = ode_residual(&profile, &params, wc.c, (-10.0, 10.0), 101, None).unwrap();
        assert!(default_step.max_rel <= 1e-5, "max_rel = {:.3e}", default_step.max_rel);
        // A truncation/roundoff-balanced step reaches 1e-6 comfortably.
        let tuned =
            ode_residual(&profile, &params, wc.c, (-10.0, 10.0), 101, Some(0.01)).unwrap();
        assert!(tuned.max_rel <= 1e-6, "max_rel = {:.3e}", tuned.max_rel);
        assert_eq!(tuned.n_skipped_poles, 0);
    }

    #[test]
    fn constant_profile_residual_is_roundoff() {
        let params = EquationParams::new(1.3, -0.7, 0.4, 0.6).unwrap();
        let profile = |_: f64| EvalResult::ok(2.5);
        let report = ode_residual(&profile, &params, 1.0, (-5.0, 5.0), 21, None).unwrap();
        assert!(report.max_abs < 1e-12);
    }

    #[test]
    fn perturbed_kink_fails_loudly() {
        // Negative control: adding 0.01 r breaks the residual by far more
        // than the acceptance threshold.
        let (params, wc, fd) = kink();
        let profile = |r: f64| {
            let base = evaluate_profile(&fd, &wc, r);
            EvalResult::ok(base.value.unwrap() + 0.01 * r)
        };
        let report = ode_residual(&profile, &params, wc.c, (-10.0, 10.0), 101, None).unwrap();
        assert!(report.max_rel > 1e-2, "max_rel = {:.3e}", report.max_rel);
        assert!(report.max_rel > 100.0 * 1e-5);
    }

    #[test]
    fn richardson_order_on_kink() {
        // With the step in the truncation-dominated regime, halving it must
        // cut the residual by at least 8x (4th-order stencils).
        let (params, wc, fd) = kink();
        let profile = |r: f64| evaluate_profile(&fd, &wc, r);
        let coarse = ode_residual(&profile, &params, wc.c, (-10.0, 10.0), 41, Some(0.4)).unwrap();
        let fine = ode_residual(&profile, &params, wc.c, (-10.0, 10.0), 41, Some(0.2)).unwrap();
        assert!(
            coarse.max_abs >= 8.0 * fine.max_abs,
            "coarse {:.3e} fine {:.3e}",
            coarse.max_abs,
            fine.max_abs
        );
    }

    #[test]
    fn insufficient_domain_reported() {
        let params = EquationParams::new(1.0, 0.0, 0.5, 0.5).unwrap();
        let profile = |_: f64| EvalResult::pole();
        let err = ode_residual(&profile, &params, 1.0, (-1.0, 1.0), 11, None).unwrap_err();
        assert!(matches!(err, VerifyError::InsufficientDomain { .. }));
    }

    #[test]
    fn pde_zero_solution_and_soliton() {
        let params = EquationParams::new(0.0, 1.0, 1.0, 1.0).unwrap();
        let zero = |_: f64, _: f64, _: f64| EvalResult::ok(0.0);
        let report = pde_residual(&zero, &params, &GridSpec::cube(-0.5, 0.5, 7)).unwrap();
        assert_eq!(report.max_abs, 0.0);

        let free = FreeParams { c: Some(1.0), c1: Some(0.0), rho: Some(0.0), ..Default::default() };
        let (wc, fd) =
            descriptor_from_free_params(ClassId::Solg41D2RealesB1, &params, &free).unwrap();
        let u = |x: f64, y: f64, t: f64| evaluate(&fd, &wc, WavePoint::new(x, y, t));
        let report = pde_residual(&u, &params, &GridSpec::cube(-0.4, 0.4, 9)).unwrap();
        assert!(report.max_rel <= 1e-4, "max_rel = {:.3e}", report.max_rel);
    }

    #[test]
    fn traveling_profile_satisfies_advection_identity() {
        // u(x, y, t) = v(x + y - c t) gives u_t = -c u_x for any profile.
        let (_, wc, fd) = kink();
        let c = wc.c;
        let h = 1e-3;
        for (x, y, t) in [(0.1, -0.2, 0.3), (0.5, 0.4, -0.6), (-0.3, 0.2, 0.9)] {
            let u = |x: f64, y: f64, t: f64| {
                evaluate(&fd, &wc, WavePoint::new(x, y, t)).value.unwrap()
            };
            let ut = (u(x, y, t + h) - u(x, y, t - h)) / (2.0 * h);
            let ux = (u(x + h, y, t) - u(x - h, y, t)) / (2.0 * h);
            assert!((ut + c * ux).abs() < 1e-8, "advection identity at ({x},{y},{t})");
        }
    }

    #[test]
    fn rk_constant_is_fixed_point() {
        let params = EquationParams::new(1.0, 1.0, 0.5, 0.5).unwrap();
        let init = JetPoint::new(0.0, 0.9, 0.0, 0.0);
        let traj = rk_integrate(&params, 1.0, &init, 5.0, 1e-2).unwrap();
        for p in traj {
            assert_eq!(p.v, 0.9);
            assert_eq!(p.v1, 0.0);
        }
    }

    #[test]
    fn rk_blowup_detected() {
        let params = EquationParams::new(0.0, -1.0, 0.005, 0.005).unwrap();
        let init = JetPoint::new(0.0, 10.0, 10.0, 10.0);
        let err = rk_integrate(&params, 1.0, &init, 10.0, 1e-3).unwrap_err();
        assert!(matches!(err, VerifyError::BlowUp { .. }));
    }

    #[test]
    fn rk_matches_closed_form_soliton() {
        // Seed from the analytic jet of the dark branch at its peak and
        // integrate to r = 5.
        let params = EquationParams::new(0.0, 1.0, 1.0, 1.0).unwrap();
        let free = FreeParams { c: Some(1.0), c1: Some(0.0), rho: Some(0.0), ..Default::default() };
        let (wc, fd) =
            descriptor_from_free_params(ClassId::Solg41D2RealesB2, &params, &free).unwrap();
        let s6 = 6.0f64.sqrt();
        // v(r) = -sqrt(6) sech(r / sqrt 2): v(0) = -sqrt 6, v1(0) = 0,
        // v2(0) = sqrt(6)/2.
        let init = JetPoint::new(0.0, -s6, 0.0, s6 / 2.0);
        let traj = rk_integrate(&params, wc.c, &init, 5.0, 1e-3).unwrap();
        let mut worst = 0.0f64;
        for p in &traj {
            let closed = evaluate_profile(&fd, &wc, p.r).value.unwrap();
            worst = worst.max((closed - p.v).abs());
        }
        assert!(worst <= 1e-6, "max |closed - rk| = {worst:.3e}");
    }

    #[test]
    fn rk_then_identify_recovers_seeded_constants() {
        // Seed the jet from the level-set parametrization of (C2, C3):
        // v1 = sqrt(-P(v)/(6(M+N))), v2 = -P'(v)/(12(M+N)).
        let params = EquationParams::new(0.7, 1.1, 0.6, 0.5).unwrap();
        let wc = WaveConstants::new(1.2, 0.0, 0.4, -0.8).unwrap();
        let poly = crate::model::build_p(&params, &wc).unwrap();
        let mu = params.mu();
        let v0 = 0.8;
        let rad = -poly.eval(v0) / (6.0 * mu);
        assert!(rad > 0.0, "seed point must lie on a real branch");
        let init = JetPoint::new(0.0, v0, rad.sqrt(), -poly.eval_derivative(v0) / (12.0 * mu));
        let traj = rk_integrate(&params, wc.c, &init, 6.0, 1e-3).unwrap();
        let jets: Vec<JetPoint> = traj
            .into_iter()
            .step_by(150)
            .filter(|p| p.v.abs() > 0.1)
            .collect();
        let (c2, c3, _fd) = crate::classify::identify(&jets, &params, wc.c, None).unwrap();
        assert!((c2 - wc.c2).abs() <= 1e-6 * (1.0 + wc.c2.abs()), "C2 = {c2}");
        assert!((c3 - wc.c3).abs() <= 1e-6 * (1.0 + wc.c3.abs()), "C3 = {c3}");
    }

    #[test]
    fn primitive_check_rejects_out_of_domain_samples() {
        // Bright-soliton constants: h needs P < 0, violated at v = 3.
        let params = EquationParams::new(0.0, 1.0, 1.0, 1.0).unwrap();
        let free = FreeParams { c: Some(1.0), c1: Some(0.0), rho: Some(0.0), ..Default::default() };
        let (wc, fd) =
            descriptor_from_free_params(ClassId::Solg41D2RealesB1, &params, &free).unwrap();
        let err = primitive_check(&fd, &wc, &[3.0], None).unwrap_err();
        assert!(matches!(err, VerifyError::Domain(_)));
    }

    #[test]
    fn fd_jets_track_analytic_derivatives() {
        let mut f = |x: f64| Some((2.0 * x).sin());
        let (v, v1, v2, v3) = fd_jet(&mut f, 0.4, 1e-2).unwrap();
        assert!((v - (0.8f64).sin()).abs() < 1e-14);
        assert!((v1 - 2.0 * (0.8f64).cos()).abs() < 1e-10);
        assert!((v2 + 4.0 * (0.8f64).sin()).abs() < 1e-8);
        assert!((v3 + 8.0 * (0.8f64).cos()).abs() < 1e-6);
    }
}
