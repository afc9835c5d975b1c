//! Special-function kernel: Carlson `R_F`, the incomplete elliptic integral of
//! the first kind, and the Jacobi elliptic sine.
//!
//! Parameter convention: the second argument of `F` and `sn` multiplies `s^2`
//! directly,
//!
//! ```text
//! F(z, m) = integral_0^z ds / sqrt((1 - s^2)(1 - m s^2)),
//! ```
//!
//! so `m` here is what is often written `k^2`. Arguments `m > 1` and `m < 0`
//! arise from root cross-ratios and are handled by the reciprocal-parameter
//! and negative-parameter transformations, which continue `sn` as the solution
//! of `sn'^2 = (1 - sn^2)(1 - m sn^2)`, `sn(0) = 0`, `sn'(0) = 1`.

use thiserror::Error;

/// Relative tolerance for the Carlson duplication loop.
const CARLSON_TOL: f64 = 1e-14;

/// Parameter below which the Landen recursion switches to the small-m series.
const LANDEN_CUTOFF: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum SpecFunError {
    #[error("carlson_rf domain: arguments must be nonnegative with at most one zero (x={0}, y={1}, z={2})")]
    CarlsonDomain(f64, f64, f64),
    #[error("elliptic_f domain: need |z| <= 1 and 1 - m z^2 > 0 (z={0}, m={1})")]
    EllipticDomain(f64, f64),
}

/// Carlson symmetric elliptic integral `R_F(x, y, z)`.
///
/// `R_F(x,y,z) = (1/2) integral_0^inf dt / sqrt((t+x)(t+y)(t+z))` for
/// nonnegative arguments, at most one of them zero. Standard duplication
/// iteration with a degree-6 series tail; relative error below 1e-12.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> Result<f64, SpecFunError> {
    if !(x >= 0.0 && y >= 0.0 && z >= 0.0) {
        return Err(SpecFunError::CarlsonDomain(x, y, z));
    }
    let zeros = [x, y, z].iter().filter(|&&a| a == 0.0).count();
    if zeros >= 2 {
        return Err(SpecFunError::CarlsonDomain(x, y, z));
    }

    let (mut x, mut y, mut z) = (x, y, z);
    let mut mean;
    loop {
        let sx = x.sqrt();
        let sy = y.sqrt();
        let sz = z.sqrt();
        let lambda = sx * sy + sy * sz + sz * sx;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
        mean = (x + y + z) / 3.0;
        let dev = (mean - x).abs().max((mean - y).abs()).max((mean - z).abs());
        if dev < CARLSON_TOL * mean {
            break;
        }
    }
    let dx = (mean - x) / mean;
    let dy = (mean - y) / mean;
    let dz = (mean - z) / mean;
    let e2 = dx * dy - dz * dz;
    let e3 = dx * dy * dz;
    // DLMF 19.36.1 through degree 6 in the deviations.
    let series = 1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0
        - 5.0 * e2 * e2 * e2 / 208.0
        + 3.0 * e3 * e3 / 104.0
        + e2 * e2 * e3 / 16.0;
    Ok(series / mean.sqrt())
}

/// Incomplete elliptic integral of the first kind `F(z, m)` in the
/// parameter-times-`s^2` convention.
///
/// Implemented as `z * R_F(1 - z^2, 1 - m z^2, 1)`, odd in `z`. Valid for any
/// real `m` as long as the integrand stays real on `[0, z]`, i.e.
/// `1 - m z^2 > 0` (the endpoint `z = +-1` is allowed for `m < 1`).
pub fn elliptic_f(z: f64, m: f64) -> Result<f64, SpecFunError> {
    if !(z.is_finite() && m.is_finite()) || z.abs() > 1.0 {
        return Err(SpecFunError::EllipticDomain(z, m));
    }
    let omz2 = 1.0 - z * z;
    let omm = 1.0 - m * z * z;
    if omm < 0.0 || (omm == 0.0 && omz2 == 0.0) {
        return Err(SpecFunError::EllipticDomain(z, m));
    }
    Ok(z * carlson_rf(omz2, omm, 1.0)?)
}

/// Complete elliptic integral of the first kind `K(m) = F(1, m)`, `m < 1`.
pub fn elliptic_k(m: f64) -> Result<f64, SpecFunError> {
    if m >= 1.0 {
        return Err(SpecFunError::EllipticDomain(1.0, m));
    }
    carlson_rf(0.0, 1.0 - m, 1.0)
}

/// Jacobi elliptic sine `sn(u, m)`, the functional inverse of [`elliptic_f`]
/// in its first argument, continued periodically over the reals.
///
/// - `0 <= m <= 1`: descending Landen recursion.
/// - `m > 1`: reciprocal parameter, `sn(u,m) = sn(u sqrt(m), 1/m) / sqrt(m)`.
/// - `m < 0`: negative parameter,
///   `sn(u,m) = sn(u sqrt(1-m), mu) / (sqrt(1-m) dn(u sqrt(1-m), mu))` with
///   `mu = -m / (1-m)`.
pub fn jacobi_sn(u: f64, m: f64) -> f64 {
    if !u.is_finite() || !m.is_finite() {
        return f64::NAN;
    }
    if m > 1.0 {
        let rm = m.sqrt();
        return jacobi_sn(u * rm, 1.0 / m) / rm;
    }
    if m < 0.0 {
        let g = (1.0 - m).sqrt();
        let mu = -m / (1.0 - m);
        let s = sn_canonical(u * g, mu);
        let dn = (1.0 - mu * s * s).sqrt();
        return s / (g * dn);
    }
    sn_canonical(u, m)
}

/// `sn` for `0 <= m <= 1` by descending Landen transformation.
fn sn_canonical(u: f64, m: f64) -> f64 {
    if m >= 1.0 - 1e-15 {
        return u.tanh();
    }
    if m <= LANDEN_CUTOFF {
        return sn_small_m(u, m);
    }
    // Collect the descending parameter ladder, then ascend.
    let mut kappas = [0.0f64; 32];
    let mut depth = 0;
    let mut mc = m;
    let mut uc = u;
    while mc > LANDEN_CUTOFF && depth < 32 {
        let kp = (1.0 - mc).sqrt();
        let kappa = (1.0 - kp) / (1.0 + kp);
        kappas[depth] = kappa;
        depth += 1;
        uc /= 1.0 + kappa;
        mc = kappa * kappa;
    }
    let mut s = sn_small_m(uc, mc);
    for &kappa in kappas[..depth].iter().rev() {
        s = (1.0 + kappa) * s / (1.0 + kappa * s * s);
    }
    s
}

/// First-order small-parameter expansion, `O(m^2)` accurate.
fn sn_small_m(u: f64, m: f64) -> f64 {
    let (sin_u, cos_u) = u.sin_cos();
    sin_u - 0.25 * m * (u - sin_u * cos_u) * cos_u
}

#[allow(clippy::excessive_precision)]
#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Adaptive Simpson quadrature, the independent oracle for F and R_F.
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, m: f64, b: f64) -> f64 {
            (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
        }
        fn recurse(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            m: f64,
            b: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let left = simpson(f, a, lm, m);
            let right = simpson(f, m, rm, b);
            if depth > 60 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            recurse(f, a, lm, m, left, 0.5 * tol, depth + 1)
                + recurse(f, m, rm, b, right, 0.5 * tol, depth + 1)
        }
        let m = 0.5 * (a + b);
        recurse(f, a, m, b, simpson(f, a, m, b), tol, 0)
    }

    /// Quadrature oracle for F(z, m) on the defining integral.
    fn elliptic_f_quadrature(z: f64, m: f64) -> f64 {
        // Substitute s = z * sin(theta) to remove the endpoint singularity at
        // |z| = 1.
        let f = |theta: f64| {
            let s = z * theta.sin();
            z * theta.cos() / (((1.0 - s * s) * (1.0 - m * s * s)).sqrt())
        };
        adaptive_simpson(&f, 0.0, std::f64::consts::FRAC_PI_2, 1e-13)
    }

    #[test]
    fn rf_equal_arguments() {
        // R_F(x,x,x) = x^{-1/2}
        assert!((carlson_rf(1.0, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((carlson_rf(4.0, 4.0, 4.0).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn rf_against_quadrature() {
        // (1/2) int_0^inf dt / sqrt(t (t+1) (t+2)), split at t = 1 and mapped
        // to finite intervals: on [0,1] substitute t = s^2, on [1,inf)
        // substitute t = 1/u^2; both remove the sqrt endpoint singularities.
        let inner = |s: f64| 2.0 / (((s * s + 1.0) * (s * s + 2.0)).sqrt());
        let outer = |u: f64| 2.0 / (((1.0 + u * u) * (1.0 + 2.0 * u * u)).sqrt());
        let oracle = 0.5
            * (adaptive_simpson(&inner, 0.0, 1.0, 1e-13)
                + adaptive_simpson(&outer, 0.0, 1.0, 1e-13));
        // Frozen oracle output.
        let frozen = 1.3110287771460598;
        assert!(
            (oracle - frozen).abs() < 1e-9,
            "quadrature oracle moved: {oracle} vs {frozen}"
        );
        let got = carlson_rf(0.0, 1.0, 2.0).unwrap();
        assert!((got - frozen).abs() < 1e-10, "R_F(0,1,2) = {got}");
    }

    #[test]
    fn rf_domain_errors() {
        assert!(carlson_rf(-1.0, 1.0, 1.0).is_err());
        assert!(carlson_rf(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn elliptic_f_trivial_values() {
        for m in [-2.0, 0.0, 0.3, 0.9, 4.0] {
            assert_eq!(elliptic_f(0.0, m).unwrap(), 0.0);
        }
        for z in [-0.9f64, -0.4, 0.2, 0.7] {
            assert!((elliptic_f(z, 0.0).unwrap() - z.asin()).abs() < 1e-14);
        }
    }

    #[test]
    fn elliptic_f_against_quadrature_point() {
        let oracle = elliptic_f_quadrature(0.5, 0.3);
        // Frozen oracle output for (z, m) = (0.5, 0.3).
        let frozen = 0.5306368995398675;
        assert!(
            (oracle - frozen).abs() < 1e-11,
            "oracle moved: {oracle} vs {frozen}"
        );
        assert!((elliptic_f(0.5, 0.3).unwrap() - frozen).abs() < 1e-10);
    }

    #[test]
    fn elliptic_f_quadrature_sweep() {
        // 500 deterministic samples across z in (-0.95, 0.95), m in (0, 0.95).
        let mut worst = 0.0f64;
        for i in 0..500 {
            let z = -0.95 + 1.9 * (i as f64 + 0.5) / 500.0;
            let m = 0.95 * (((i * 7919) % 1000) as f64 + 0.5) / 1000.0;
            let got = elliptic_f(z, m).unwrap();
            let want = elliptic_f_quadrature(z, m);
            worst = worst.max((got - want).abs());
        }
        assert!(worst < 1e-10, "max |F - quadrature| = {worst:.3e}");
    }

    #[test]
    fn elliptic_f_domain_error() {
        // Integrand turns imaginary inside [0, z] when m z^2 > 1.
        assert!(elliptic_f(0.9, 2.0).is_err());
        assert!(elliptic_f(1.2, 0.3).is_err());
        // Logarithmic endpoint divergence z = 1, m = 1.
        assert!(elliptic_f(1.0, 1.0).is_err());
    }

    #[test]
    fn sn_trivial_values() {
        for m in [-1.0, 0.0, 0.5, 3.0] {
            assert_eq!(jacobi_sn(0.0, m), 0.0);
        }
        for u in [-2.0f64, -0.3, 0.7, 5.0] {
            assert!((jacobi_sn(u, 0.0) - u.sin()).abs() < 1e-12);
            assert!((jacobi_sn(u, 1.0) - u.tanh()).abs() < 1e-12);
        }
    }

    #[test]
    fn sn_round_trip_single() {
        let u = elliptic_f(0.7, 0.4).unwrap();
        assert!((jacobi_sn(u, 0.4) - 0.7).abs() < 1e-10);
    }

    #[test]
    fn sn_inverse_pair_sweep() {
        let mut worst = 0.0f64;
        for i in 0..500 {
            let z = -0.95 + 1.9 * (i as f64 + 0.5) / 500.0;
            let m = 0.95 * (((i * 104729) % 1000) as f64 + 0.5) / 1000.0;
            let u = elliptic_f(z, m).unwrap();
            worst = worst.max((jacobi_sn(u, m) - z).abs());
        }
        assert!(worst < 1e-9, "max |sn(F(z,m),m) - z| = {worst:.3e}");
    }

    /// Independent inverse-of-F evaluation: bisect F(z, m) = u on the
    /// principal quarter period.
    fn sn_by_inverting_f(u: f64, m: f64) -> f64 {
        let quarter = elliptic_k(m).unwrap();
        assert!(u.abs() <= quarter, "restrict to the principal range");
        let target = u.abs();
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if elliptic_f(mid, m).unwrap() < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi) * u.signum()
    }

    #[test]
    fn sn_landen_agrees_with_inverse_of_f() {
        // Landen-recursion sn against the defining inverse, principal range.
        let mut worst = 0.0f64;
        for i in 0..60 {
            let m = 0.93 * (i as f64 + 0.5) / 60.0;
            let quarter = elliptic_k(m).unwrap();
            for j in 0..20 {
                let u = quarter * (-0.98 + 1.96 * (j as f64 + 0.5) / 20.0);
                worst = worst.max((jacobi_sn(u, m) - sn_by_inverting_f(u, m)).abs());
            }
        }
        assert!(worst < 1e-9, "max |sn_landen - sn_inverse| = {worst:.3e}");
    }

    #[test]
    fn sn_reciprocal_parameter_consistency() {
        // For m > 1 both evaluation paths must agree: definition via the
        // transformed call and the inverse of F where F is defined
        // (|z| < 1/sqrt(m)).
        for &m in &[1.5f64, 3.0, 9.9] {
            let zmax = 0.95 / m.sqrt();
            for j in 0..25 {
                let z = zmax * (j as f64 + 0.5) / 25.0;
                let u = elliptic_f(z, m).unwrap();
                let got = jacobi_sn(u, m);
                assert!(
                    (got - z).abs() < 1e-9,
                    "m={m}: sn(F({z},m),m) = {got}"
                );
            }
        }
    }

    #[test]
    fn sn_negative_parameter_satisfies_ode() {
        // sn'^2 = (1 - sn^2)(1 - m sn^2) via central differences.
        for &m in &[-0.5, -2.0, -7.0] {
            for j in 1..20 {
                let u = 0.15 * j as f64;
                let h = 1e-5;
                let d = (jacobi_sn(u + h, m) - jacobi_sn(u - h, m)) / (2.0 * h);
                let s = jacobi_sn(u, m);
                let rhs = (1.0 - s * s) * (1.0 - m * s * s);
                assert!(
                    (d * d - rhs).abs() < 1e-7,
                    "m={m} u={u}: sn'^2={} rhs={rhs}",
                    d * d
                );
            }
        }
    }

    proptest! {
        #[test]
        fn elliptic_f_odd(z in -0.99f64..0.99, m in -3.0f64..0.99) {
            let plus = elliptic_f(z, m).unwrap();
            let minus = elliptic_f(-z, m).unwrap();
            prop_assert!((plus + minus).abs() <= 4.0 * f64::EPSILON * plus.abs().max(1.0));
        }

        #[test]
        fn sn_odd(u in -6.0f64..6.0, m in -3.0f64..3.0) {
            let plus = jacobi_sn(u, m);
            let minus = jacobi_sn(-u, m);
            prop_assert!((plus + minus).abs() <= 4.0 * f64::EPSILON * plus.abs().max(1.0));
        }
    }
}
