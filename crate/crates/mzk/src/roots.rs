//! Roots of `P(z)` with multiplicities.
//!
//! Two detection paths. The numeric path solves the quartic through the
//! resolvent cubic, polishes with Newton, and clusters roots whose distance is
//! below `rel_tol * scale`. The template path checks the closed-form
//! iff-conditions on `(c, C2, C3)` that characterize each degenerate pattern
//! and, on a match, returns the exact roots. Templates take precedence: the
//! classification is discontinuous in `(C2, C3)` and near-degenerate numeric
//! input would otherwise land in a neighboring pattern.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{EquationParams, QuarticPoly, WaveConstants};

/// Relative tolerance used by the exact-template matcher.
const TEMPLATE_TOL: f64 = 1e-9;

/// Default clustering tolerance for the numeric solver.
pub const DEFAULT_REL_TOL: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum RootsError {
    #[error("P is constant (A = B = 0 and c = 0); no root structure")]
    DegenerateInput,
    #[error("rel_tol {0} outside [1e-12, 1e-4]")]
    BadTolerance(f64),
}

/// One root with its multiplicity; complex roots come in conjugate pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootEntry {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
}

impl RootEntry {
    fn real(re: f64, multiplicity: usize) -> Self {
        Self { re, im: 0.0, multiplicity }
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn is_real(&self) -> bool {
        self.im == 0.0
    }
}

/// Multiplicity pattern of the root set, keyed by effective degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootPattern {
    /// Degree 2, simple roots (real or a conjugate pair; a doubled quadratic
    /// root is recorded in the entries).
    Q2Simple,
    C3Triple,
    C3Double,
    C3Distinct,
    C3WithComplexPair,
    C4Quadruple,
    C4Triple,
    C4DoubleDoubleReal,
    C4DoubleDoubleComplex,
    C4DoublePlusTwoReal,
    C4DoublePlusTwoComplex,
    C4FourDistinctReal,
    C4WithComplexPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootStructure {
    pub entries: Vec<RootEntry>,
    pub degree: usize,
    pub pattern: RootPattern,
}

impl RootStructure {
    /// Real roots sorted ascending as `(value, multiplicity)` pairs.
    pub fn real_roots(&self) -> Vec<(f64, usize)> {
        let mut rr: Vec<(f64, usize)> = self
            .entries
            .iter()
            .filter(|e| e.is_real())
            .map(|e| (e.re, e.multiplicity))
            .collect();
        rr.sort_by(|a, b| a.0.total_cmp(&b.0));
        rr
    }

    /// Upper-half-plane members of each conjugate pair.
    pub fn complex_pairs(&self) -> Vec<(Complex64, usize)> {
        self.entries
            .iter()
            .filter(|e| e.im > 0.0)
            .map(|e| (e.as_complex(), e.multiplicity))
            .collect()
    }

    fn from_entries(mut entries: Vec<RootEntry>, degree: usize) -> Self {
        entries.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let pattern = assign_pattern(&entries, degree);
        Self { entries, degree, pattern }
    }
}

fn assign_pattern(entries: &[RootEntry], degree: usize) -> RootPattern {
    let mut mults: Vec<(usize, bool)> = entries
        .iter()
        .map(|e| (e.multiplicity, e.is_real()))
        .collect();
    mults.sort_by_key(|m| std::cmp::Reverse(m.0));
    let n_complex = entries.iter().filter(|e| !e.is_real()).count();
    match degree {
        2 => RootPattern::Q2Simple,
        3 => match mults.first() {
            Some((3, _)) => RootPattern::C3Triple,
            Some((2, _)) => RootPattern::C3Double,
            _ if n_complex > 0 => RootPattern::C3WithComplexPair,
            _ => RootPattern::C3Distinct,
        },
        _ => match mults.first() {
            Some((4, _)) => RootPattern::C4Quadruple,
            Some((3, _)) => RootPattern::C4Triple,
            Some((2, dbl_real)) if mults.len() == 2 && mults[1].0 == 2 => {
                if *dbl_real && mults[1].1 {
                    RootPattern::C4DoubleDoubleReal
                } else {
                    RootPattern::C4DoubleDoubleComplex
                }
            }
            Some((2, _)) if n_complex == 0 => RootPattern::C4DoublePlusTwoReal,
            Some((2, _)) => RootPattern::C4DoublePlusTwoComplex,
            _ if n_complex == 0 => RootPattern::C4FourDistinctReal,
            _ => RootPattern::C4WithComplexPair,
        },
    }
}

/// Numeric root solve with multiplicity clustering.
///
/// Closed-form solve (resolvent cubic for the quartic), Newton polish on the
/// input polynomial, then clustering at `rel_tol * scale` with
/// `scale = 1 + max |root|`. Cluster centers of multiplicity `m` are
/// re-polished on the `(m-1)`-th derivative, where they are simple.
pub fn solve_structure(poly: &QuarticPoly, rel_tol: f64) -> Result<RootStructure, RootsError> {
    if !(1e-12..=1e-4).contains(&rel_tol) {
        return Err(RootsError::BadTolerance(rel_tol));
    }
    let degree = poly.degree();
    if degree == 2 && poly.coeffs[2] == 0.0 {
        return Err(RootsError::DegenerateInput);
    }
    let monic = monic_coeffs(poly);

    // Multiple roots smear the closed-form solve by O(eps^(1/mult)), far
    // beyond any clustering radius, so multiplicities are detected first
    // through the derivative chain: a root of multiplicity m is a
    // well-conditioned simple root of the (m-1)-th derivative at which all
    // lower derivatives vanish to evaluation accuracy.
    if let Some(entries) = detect_multiple(&monic, rel_tol) {
        let mut entries = entries;
        let scale = 1.0 + entries.iter().map(|e| e.0.norm()).fold(0.0, f64::max);
        symmetrize(&mut entries, rel_tol * scale);
        let entries = entries
            .into_iter()
            .map(|(z, m)| RootEntry { re: z.re, im: z.im, multiplicity: m })
            .collect();
        return Ok(RootStructure::from_entries(entries, degree));
    }

    let raw: Vec<Complex64> = match degree {
        4 => {
            let [a, b, c, d, e] = poly.coeffs;
            solve_quartic(a, b, c, d, e)
        }
        3 => {
            let [_, b, c, d, e] = poly.coeffs;
            solve_cubic(b, c, d, e).to_vec()
        }
        _ => {
            let [_, _, c, d, e] = poly.coeffs;
            solve_quadratic(c, d, e).to_vec()
        }
    };

    let polished: Vec<Complex64> = raw
        .iter()
        .map(|&z| newton_polish(&monic, z, 12))
        .collect();

    let scale = 1.0 + polished.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let clusters = cluster(&polished, rel_tol * scale);

    let mut entries: Vec<(Complex64, usize)> = clusters
        .into_iter()
        .map(|(center, mult)| (refine_multiple(&monic, center, mult), mult))
        .collect();
    symmetrize(&mut entries, rel_tol * scale);
    let entries = entries
        .into_iter()
        .map(|(z, m)| RootEntry { re: z.re, im: z.im, multiplicity: m })
        .collect();
    Ok(RootStructure::from_entries(entries, degree))
}

/// `|Q(z)|` measured against the roundoff scale of its own evaluation.
fn eval_small(coeffs: &[f64], z: Complex64, rel_tol: f64) -> bool {
    let thr = (1e2 * f64::EPSILON).max(rel_tol * rel_tol);
    let zn = z.norm();
    let mut mag = 0.0;
    for &c in coeffs {
        mag = mag * zn + c.abs();
    }
    horner(coeffs, z).norm() <= thr * mag.max(1e-300)
}

/// Top-down multiplicity detection over the derivative chain. Returns the
/// full root multiset when a multiple root is found, `None` when all roots
/// are simple at this resolution.
fn detect_multiple(monic: &[f64], rel_tol: f64) -> Option<Vec<(Complex64, usize)>> {
    let deg = monic.len() - 1;
    let dp = derivative_coeffs(monic);
    let real = |x: f64| Complex64::new(x, 0.0);
    match deg {
        4 => {
            let dpp = derivative_coeffs(&dp);
            // Quadruple: the single root of P'''.
            let z0 = -monic[1] / 4.0;
            if eval_small(monic, real(z0), rel_tol)
                && eval_small(&dp, real(z0), rel_tol)
                && eval_small(&dpp, real(z0), rel_tol)
            {
                return Some(vec![(real(z0), 4)]);
            }
            // Triple: a real root of P'' with P = P' = 0 there.
            for zeta in solve_quadratic(dpp[0], dpp[1], dpp[2]) {
                if zeta.im != 0.0 {
                    continue;
                }
                if eval_small(monic, zeta, rel_tol) && eval_small(&dp, zeta, rel_tol) {
                    // Root sum of the monic quartic is -a3.
                    let simple = newton_polish(monic, real(-monic[1] - 3.0 * zeta.re), 8);
                    return Some(vec![(zeta, 3), (simple, 1)]);
                }
            }
            // Doubles: roots of P' where P also vanishes.
            let crit = solve_cubic(dp[0], dp[1], dp[2], dp[3]);
            let mut doubles: Vec<Complex64> = crit
                .into_iter()
                .filter(|&eta| eval_small(monic, eta, rel_tol))
                .collect();
            dedupe(&mut doubles, 1e-8);
            match doubles.len() {
                2 => Some(vec![(doubles[0], 2), (doubles[1], 2)]),
                1 => {
                    let eta = Complex64::new(doubles[0].re, 0.0);
                    let rest = deflate(monic, eta.re);
                    let rest = deflate(&rest, eta.re);
                    let simple = solve_quadratic(rest[0], rest[1], rest[2]);
                    Some(vec![(eta, 2), (simple[0], 1), (simple[1], 1)])
                }
                _ => None,
            }
        }
        3 => {
            let z0 = -monic[1] / 3.0;
            if eval_small(monic, real(z0), rel_tol) && eval_small(&dp, real(z0), rel_tol) {
                return Some(vec![(real(z0), 3)]);
            }
            for eta in solve_quadratic(dp[0], dp[1], dp[2]) {
                if eta.im != 0.0 {
                    continue;
                }
                if eval_small(monic, eta, rel_tol) {
                    let simple = newton_polish(monic, real(-monic[1] - 2.0 * eta.re), 8);
                    return Some(vec![(eta, 2), (simple, 1)]);
                }
            }
            None
        }
        _ => {
            let z0 = -monic[1] / 2.0;
            if eval_small(monic, real(z0), rel_tol) {
                return Some(vec![(real(z0), 2)]);
            }
            None
        }
    }
}

/// Merge near-identical candidates (a doubled critical point reported twice).
fn dedupe(zs: &mut Vec<Complex64>, tol: f64) {
    let mut i = 0;
    while i < zs.len() {
        let mut j = i + 1;
        while j < zs.len() {
            if (zs[i] - zs[j]).norm() <= tol * (1.0 + zs[i].norm()) {
                zs.swap_remove(j);
            } else {
                j += 1;
            }
        }
        i += 1;
    }
}

/// Synthetic division by `(z - root)`, dropping the remainder.
fn deflate(coeffs: &[f64], root: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(coeffs.len() - 1);
    let mut acc = 0.0;
    for &c in &coeffs[..coeffs.len() - 1] {
        acc = acc * root + c;
        out.push(acc);
    }
    out
}

fn monic_coeffs(poly: &QuarticPoly) -> Vec<f64> {
    let lead_idx = poly.coeffs.iter().position(|&c| c != 0.0).unwrap_or(4);
    let lead = poly.coeffs[lead_idx];
    poly.coeffs[lead_idx..].iter().map(|&c| c / lead).collect()
}

fn horner(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn derivative_coeffs(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len() - 1;
    coeffs[..n]
        .iter()
        .enumerate()
        .map(|(i, &c)| c * (n - i) as f64)
        .collect()
}

fn newton_polish(coeffs: &[f64], z0: Complex64, iters: usize) -> Complex64 {
    let deriv = derivative_coeffs(coeffs);
    let mut z = z0;
    for _ in 0..iters {
        let f = horner(coeffs, z);
        let d = horner(&deriv, z);
        if d.norm() < 1e-300 {
            break;
        }
        let step = f / d;
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        z -= step;
        if step.norm() < 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

fn cluster(roots: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let mut remaining: Vec<Complex64> = roots.to_vec();
    let mut out = Vec::new();
    while let Some(seed) = remaining.pop() {
        let mut members = vec![seed];
        loop {
            let center = mean(&members);
            let before = members.len();
            let mut i = 0;
            while i < remaining.len() {
                if (remaining[i] - center).norm() <= tol {
                    members.push(remaining.swap_remove(i));
                } else {
                    i += 1;
                }
            }
            if members.len() == before {
                break;
            }
        }
        out.push((mean(&members), members.len()));
    }
    out
}

fn mean(zs: &[Complex64]) -> Complex64 {
    zs.iter().sum::<Complex64>() / zs.len() as f64
}

fn refine_multiple(coeffs: &[f64], center: Complex64, mult: usize) -> Complex64 {
    if mult <= 1 {
        return newton_polish(coeffs, center, 4);
    }
    let mut c = coeffs.to_vec();
    for _ in 0..(mult - 1) {
        c = derivative_coeffs(&c);
    }
    newton_polish(&c, center, 8)
}

/// Flatten tiny imaginary parts and pair near-conjugates exactly.
fn symmetrize(entries: &mut [(Complex64, usize)], tol: f64) {
    for e in entries.iter_mut() {
        if e.0.im.abs() <= tol {
            e.0.im = 0.0;
        }
    }
    for i in 0..entries.len() {
        if entries[i].0.im <= 0.0 {
            continue;
        }
        for j in 0..entries.len() {
            if i == j || entries[j].0.im >= 0.0 {
                continue;
            }
            if (entries[i].0 - entries[j].0.conj()).norm() <= 2.0 * tol
                && entries[i].1 == entries[j].1
            {
                let re = 0.5 * (entries[i].0.re + entries[j].0.re);
                let im = 0.5 * (entries[i].0.im - entries[j].0.im);
                entries[i].0 = Complex64::new(re, im);
                entries[j].0 = Complex64::new(re, -im);
            }
        }
    }
}

/// `a z^2 + b z + c`, `a != 0`, stable real branch.
fn solve_quadratic(a: f64, b: f64, c: f64) -> [Complex64; 2] {
    let disc = b * b - 4.0 * a * c;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        let q = -0.5 * (b + b.signum() * sq);
        let r1 = q / a;
        let r2 = if q != 0.0 { c / q } else { r1 };
        [Complex64::new(r1, 0.0), Complex64::new(r2, 0.0)]
    } else {
        let re = -b / (2.0 * a);
        let im = (-disc).sqrt() / (2.0 * a).abs();
        [Complex64::new(re, im), Complex64::new(re, -im)]
    }
}

/// `a z^3 + b z^2 + c z + d`, `a != 0`. Cardano, trigonometric branch for the
/// three-real case.
fn solve_cubic(a: f64, b: f64, c: f64, d: f64) -> [Complex64; 3] {
    let b = b / a;
    let c = c / a;
    let d = d / a;
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let disc = -(4.0 * p * p * p + 27.0 * q * q);
    let roots_t: [Complex64; 3] = if disc > 0.0 {
        let mag = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * mag)).clamp(-1.0, 1.0).acos() / 3.0;
        let third = 2.0 * std::f64::consts::PI / 3.0;
        [
            Complex64::new(mag * arg.cos(), 0.0),
            Complex64::new(mag * (arg - third).cos(), 0.0),
            Complex64::new(mag * (arg + third).cos(), 0.0),
        ]
    } else {
        let inner = Complex64::new(q * q / 4.0 + p * p * p / 27.0, 0.0).sqrt();
        let half_q = Complex64::new(0.5 * q, 0.0);
        let mut u3 = -half_q + inner;
        if u3.norm() < 1e-300 {
            u3 = -half_q - inner;
        }
        let u = u3.powf(1.0 / 3.0);
        let omega = Complex64::new(-0.5, 0.75f64.sqrt());
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (slot, rot) in out
            .iter_mut()
            .zip([Complex64::new(1.0, 0.0), omega, omega.conj()])
        {
            let uk = u * rot;
            *slot = if uk.norm() > 1e-150 {
                uk - Complex64::new(p / 3.0, 0.0) / uk
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        out
    };
    roots_t.map(|t| t - shift)
}

/// `a z^4 + b z^3 + c z^2 + d z + e`, `a != 0`, via the resolvent cubic of the
/// depressed quartic.
fn solve_quartic(a: f64, b: f64, c: f64, d: f64, e: f64) -> Vec<Complex64> {
    let b = b / a;
    let c = c / a;
    let d = d / a;
    let e = e / a;
    let shift = b / 4.0;
    let b2 = b * b;
    let p = c - 3.0 * b2 / 8.0;
    let q = d - b * c / 2.0 + b2 * b / 8.0;
    let r = e - b * d / 4.0 + b2 * c / 16.0 - 3.0 * b2 * b2 / 256.0;

    let ys: Vec<Complex64> = if q.abs() <= 1e-14 * (1.0 + p.abs() + r.abs()) {
        // Biquadratic.
        let mut out = Vec::with_capacity(4);
        for z in solve_quadratic(1.0, p, r) {
            let s = z.sqrt();
            out.push(s);
            out.push(-s);
        }
        out
    } else {
        // Resolvent 8 m^3 - 4 p m^2 - 8 r m + (4 p r - q^2) = 0. A real root
        // with 2m - p >= 0 always exists (conjugate pairing factors any real
        // quartic into two real quadratics); take the one with the largest
        // alpha^2 = 2m - p for headroom.
        let res = solve_cubic(8.0, -4.0 * p, -8.0 * r, 4.0 * p * r - q * q);
        let m = res
            .iter()
            .filter(|z| z.im.abs() <= 1e-9 * (1.0 + z.re.abs()))
            .map(|z| z.re)
            .max_by(f64::total_cmp)
            .unwrap_or(res[0].re);
        let alpha = (2.0 * m - p).max(0.0).sqrt();
        // q != 0 here, so alpha > 0 up to roundoff.
        let beta = if alpha > 1e-150 {
            0.5 * q / alpha
        } else {
            (m * m - r).max(0.0).sqrt()
        };
        // y^4 + p y^2 + q y + r = (y^2 + a y + m - b)(y^2 - a y + m + b)
        let mut out = Vec::with_capacity(4);
        out.extend(solve_quadratic(1.0, alpha, m - beta));
        out.extend(solve_quadratic(1.0, -alpha, m + beta));
        out
    };
    ys.into_iter().map(|y| y - shift).collect()
}

/// Closed-form degenerate templates on `(c, C2, C3)`.
///
/// Returns the exact roots when one of the triple/double/quadruple conditions
/// holds to relative `1e-9`; `None` for generic constants (simple-root
/// structures are left to the numeric solver).
pub fn structure_from_template(
    params: &EquationParams,
    wc: &WaveConstants,
) -> Option<RootStructure> {
    structure_from_template_with_tol(params, wc, TEMPLATE_TOL)
}

/// Template matcher with an explicit tolerance: constants recovered from
/// sampled data carry their own uncertainty, and degenerate patterns split
/// like the square root of a constant perturbation, so callers with noisy
/// input widen the match radius instead of the clustering radius.
pub fn structure_from_template_with_tol(
    params: &EquationParams,
    wc: &WaveConstants,
    tol: f64,
) -> Option<RootStructure> {
    let a = params.a;
    let b = params.b;
    let c = wc.c;
    let scale2 = 1.0 + wc.c2.abs();
    let scale3 = 1.0 + wc.c3.abs();
    let close2 = |x: f64| (x - wc.c2).abs() <= tol * scale2;
    let close3 = |x: f64| (x - wc.c3).abs() <= tol * scale3;

    if b == 0.0 && a != 0.0 {
        // Cubic triple root at c/A.
        if close2(-6.0 * c * c / a) && close3(-2.0 * c * c * c / (a * a)) {
            return Some(RootStructure::from_entries(
                vec![RootEntry::real(c / a, 3)],
                3,
            ));
        }
        // Cubic double root: any phi with P(phi) = P'(phi) = 0, i.e. a real
        // root of P' = 6A z^2 - 12c z - C2 whose template constants match.
        let dp = [6.0 * a, -12.0 * c, -wc.c2];
        for phi in real_quadratic_roots(6.0 * a, -12.0 * c, -wc.c2) {
            let phi = newton_polish(&dp, Complex64::new(phi, 0.0), 3).re;
            let c2t = 6.0 * a * phi * phi - 12.0 * c * phi;
            let c3t = 4.0 * a * phi * phi * phi - 6.0 * c * phi * phi;
            if close2(c2t) && close3(c3t) {
                let simple = 3.0 * c / a - 2.0 * phi;
                if (simple - phi).abs() <= tol * (1.0 + phi.abs()) {
                    continue; // the triple case, caught above
                }
                return Some(RootStructure::from_entries(
                    vec![RootEntry::real(phi, 2), RootEntry::real(simple, 1)],
                    3,
                ));
            }
        }
        return None;
    }
    if b == 0.0 {
        return None;
    }

    let delta = a * a + 4.0 * b * c;
    // Quadruple root at -A/2B: c = -A^2/4B with pinned C2, C3.
    if delta.abs() <= tol * (1.0 + a * a)
        && close2(-a * a * a / (2.0 * b * b))
        && close3(a * a * a * a / (16.0 * b * b * b))
    {
        return Some(RootStructure::from_entries(
            vec![RootEntry::real(-a / (2.0 * b), 4)],
            4,
        ));
    }
    // Triple root, both sign branches.
    if delta > 0.0 {
        let sd = delta.sqrt();
        let sd3 = (delta * delta * delta).sqrt();
        for sgn in [1.0, -1.0] {
            let c2t = (a * (a * a + 6.0 * b * c) + sgn * sd3) / (b * b);
            let c3t =
                -(a * a * (a * a + 6.0 * b * c) + sgn * a * sd3 + 6.0 * b * b * c * c)
                    / (2.0 * b * b * b);
            if close2(c2t) && close3(c3t) {
                let triple = -(a + sgn * sd) / (2.0 * b);
                let simple = -(a - sgn * 3.0 * sd) / (2.0 * b);
                return Some(RootStructure::from_entries(
                    vec![RootEntry::real(triple, 3), RootEntry::real(simple, 1)],
                    4,
                ));
            }
        }
    }
    // Two double roots: real pair for delta > 0, conjugate pair otherwise.
    {
        let s6 = a * a + 6.0 * b * c;
        let c2t = a * s6 / (b * b);
        let c3t = s6 * s6 / (4.0 * b * b * b);
        if close2(c2t) && close3(c3t) && delta.abs() > tol * (1.0 + a * a) {
            if delta > 0.0 {
                let s = (3.0 * delta).sqrt();
                return Some(RootStructure::from_entries(
                    vec![
                        RootEntry::real((-a - s) / (2.0 * b), 2),
                        RootEntry::real((-a + s) / (2.0 * b), 2),
                    ],
                    4,
                ));
            }
            let re = -a / (2.0 * b);
            let im = (-3.0 * delta).sqrt() / (2.0 * b.abs());
            return Some(RootStructure::from_entries(
                vec![
                    RootEntry { re, im, multiplicity: 2 },
                    RootEntry { re, im: -im, multiplicity: 2 },
                ],
                4,
            ));
        }
    }
    // Double root rho plus a simple pair: rho is a common root of P and P'.
    let dp = [4.0 * b, 6.0 * a, -12.0 * c, -wc.c2];
    for rho in real_cubic_roots(4.0 * b, 6.0 * a, -12.0 * c, -wc.c2) {
        let rho = newton_polish(&dp, Complex64::new(rho, 0.0), 3).re;
        let c2t = 2.0 * rho * (2.0 * b * rho * rho + 3.0 * a * rho - 6.0 * c);
        let c3t = rho * rho * (3.0 * b * rho * rho + 4.0 * a * rho - 6.0 * c);
        if !(close2(c2t) && close3(c3t)) {
            continue;
        }
        let disc5 = -2.0 * b * b * rho * rho - 2.0 * a * b * rho + a * a + 6.0 * b * c;
        if disc5.abs() <= tol * (1.0 + a * a + 6.0 * (b * c).abs()) {
            continue; // degenerates to triple / double-double, caught above
        }
        if disc5 > 0.0 {
            let s = disc5.sqrt();
            let p2 = -(rho * b + a - s) / b;
            let p3 = -(rho * b + a + s) / b;
            let (lo, hi) = if p2 < p3 { (p2, p3) } else { (p3, p2) };
            return Some(RootStructure::from_entries(
                vec![
                    RootEntry::real(rho, 2),
                    RootEntry::real(lo, 1),
                    RootEntry::real(hi, 1),
                ],
                4,
            ));
        }
        let re = -(rho * b + a) / b;
        let im = (-disc5).sqrt() / b.abs();
        return Some(RootStructure::from_entries(
            vec![
                RootEntry::real(rho, 2),
                RootEntry { re, im, multiplicity: 1 },
                RootEntry { re, im: -im, multiplicity: 1 },
            ],
            4,
        ));
    }
    None
}

/// Exact roots of the four-distinct template given `(rho, lambda)`:
/// `phi_{1,2} = rho -+ sqrt(lambda)` and the complementary pair. Entries turn
/// complex when a discriminant goes negative.
pub fn roots_four_distinct(
    params: &EquationParams,
    c: f64,
    rho: f64,
    lambda: f64,
) -> [Complex64; 4] {
    let a = params.a;
    let b = params.b;
    let sl = Complex64::new(lambda, 0.0).sqrt();
    let disc = (a * a + 6.0 * b * c
        - 2.0 * b * b * rho * rho
        - 2.0 * a * b * rho
        - b * b * lambda)
        / (b * b);
    let sd = Complex64::new(disc, 0.0).sqrt();
    let first = Complex64::new(rho, 0.0);
    let second = Complex64::new(-(b * rho + a) / b, 0.0);
    [first + sl, first - sl, second + sd, second - sd]
}

/// Constants `(C2, C3)` of the four-distinct template.
pub fn constants_four_distinct(
    params: &EquationParams,
    c: f64,
    rho: f64,
    lambda: f64,
) -> (f64, f64) {
    let a = params.a;
    let b = params.b;
    let c2 = 4.0 * b * rho.powi(3) + 6.0 * a * rho * rho + 4.0 * b * lambda * rho
        + 2.0 * a * lambda
        - 12.0 * c * rho;
    let c3 = 3.0 * b * rho.powi(4) + 4.0 * a * rho.powi(3)
        - 2.0 * b * lambda * rho * rho
        - 4.0 * a * lambda * rho
        - b * lambda * lambda
        - 6.0 * c * rho * rho
        + 6.0 * c * lambda;
    (c2, c3)
}

fn real_quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        if b == 0.0 {
            return vec![];
        }
        return vec![-c / b];
    }
    solve_quadratic(a, b, c)
        .into_iter()
        .filter(|z| z.im == 0.0)
        .map(|z| z.re)
        .collect()
}

fn real_cubic_roots(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    if a == 0.0 {
        return real_quadratic_roots(b, c, d);
    }
    solve_cubic(a, b, c, d)
        .into_iter()
        .filter(|z| z.im.abs() <= 1e-9 * (1.0 + z.re.abs()))
        .map(|z| z.re)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_p;
    use proptest::prelude::*;

    fn poly(coeffs: [f64; 5]) -> QuarticPoly {
        QuarticPoly { coeffs }
    }

    #[test]
    fn bright_soliton_roots() {
        // z^4 - 6 z^2: {0 x2, +-sqrt 6}.
        let s = solve_structure(&poly([1.0, 0.0, -6.0, 0.0, 0.0]), 1e-8).unwrap();
        assert_eq!(s.pattern, RootPattern::C4DoublePlusTwoReal);
        let rr = s.real_roots();
        let s6 = 6.0f64.sqrt();
        assert_eq!(rr.len(), 3);
        assert!((rr[0].0 + s6).abs() < 1e-10 && rr[0].1 == 1);
        assert!(rr[1].0.abs() < 1e-10 && rr[1].1 == 2);
        assert!((rr[2].0 - s6).abs() < 1e-10 && rr[2].1 == 1);
    }

    #[test]
    fn quadruple_template() {
        // A=2, B=1: c = -1, C2 = -4, C3 = 1, quadruple root at -1.
        let params = EquationParams::new(2.0, 1.0, 1.0, 1.0).unwrap();
        let wc = WaveConstants::new(-1.0, 0.0, -4.0, 1.0).unwrap();
        let s = structure_from_template(&params, &wc).unwrap();
        assert_eq!(s.pattern, RootPattern::C4Quadruple);
        assert!((s.entries[0].re + 1.0).abs() < 1e-12);
        let num = solve_structure(&build_p(&params, &wc).unwrap(), 1e-7).unwrap();
        assert_eq!(num.pattern, RootPattern::C4Quadruple);
        assert!((num.entries[0].re + 1.0).abs() < 1e-6);
    }

    #[test]
    fn kink_template_two_double_roots() {
        // A=1, B=2, c=1/4 with the paired constants: double roots -1, 1/2.
        let params = EquationParams::new(1.0, 2.0, -1.0, -1.0 / 3.0).unwrap();
        let wc = WaveConstants::new(0.25, 0.0, 1.0, 0.5).unwrap();
        let s = structure_from_template(&params, &wc).unwrap();
        assert_eq!(s.pattern, RootPattern::C4DoubleDoubleReal);
        let rr = s.real_roots();
        assert!((rr[0].0 + 1.0).abs() < 1e-12 && rr[0].1 == 2);
        assert!((rr[1].0 - 0.5).abs() < 1e-12 && rr[1].1 == 2);
    }

    #[test]
    fn constructed_double_double_numeric() {
        // (z-1)^2 (z-2)^2 = z^4 - 6 z^3 + 13 z^2 - 12 z + 4.
        let s = solve_structure(&poly([1.0, -6.0, 13.0, -12.0, 4.0]), 1e-8).unwrap();
        assert_eq!(s.pattern, RootPattern::C4DoubleDoubleReal);
        let rr = s.real_roots();
        assert!((rr[0].0 - 1.0).abs() < 1e-7 && rr[0].1 == 2);
        assert!((rr[1].0 - 2.0).abs() < 1e-7 && rr[1].1 == 2);
    }

    #[test]
    fn cubic_structures() {
        // 2(z-1)(z+2)(z-3) = 2z^3 - 4z^2 - 10z + 12, B = 0.
        let s = solve_structure(&poly([0.0, 2.0, -4.0, -10.0, 12.0]), 1e-8).unwrap();
        assert_eq!(s.pattern, RootPattern::C3Distinct);
        // 2(z-1)(z^2+1) = 2z^3 - 2z^2 + 2z - 2: complex pair.
        let s = solve_structure(&poly([0.0, 2.0, -2.0, 2.0, -2.0]), 1e-8).unwrap();
        assert_eq!(s.pattern, RootPattern::C3WithComplexPair);
    }

    #[test]
    fn quadratic_structure() {
        let s = solve_structure(&poly([0.0, 0.0, -6.0, 0.0, 24.0]), 1e-8).unwrap();
        assert_eq!(s.pattern, RootPattern::Q2Simple);
        let rr = s.real_roots();
        assert!((rr[0].0 + 2.0).abs() < 1e-10 && (rr[1].0 - 2.0).abs() < 1e-10);
    }

    #[test]
    fn degenerate_input_rejected() {
        assert_eq!(
            solve_structure(&poly([0.0, 0.0, 0.0, 0.0, 1.0]), 1e-8),
            Err(RootsError::DegenerateInput)
        );
        assert!(matches!(
            solve_structure(&poly([1.0, 0.0, 0.0, 0.0, 1.0]), 1.0),
            Err(RootsError::BadTolerance(_))
        ));
    }

    #[test]
    fn generic_constants_match_no_template() {
        let params = EquationParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let wc = WaveConstants::new(0.77, 0.0, 0.313, -0.521).unwrap();
        assert!(structure_from_template(&params, &wc).is_none());
    }

    #[test]
    fn four_distinct_template_matches_p() {
        let params = EquationParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let (rho, lambda, c) = (0.0, 1.0, 1.0);
        let (c2, c3) = constants_four_distinct(&params, c, rho, lambda);
        let wc = WaveConstants::new(c, 0.0, c2, c3).unwrap();
        let p = build_p(&params, &wc).unwrap();
        for z in roots_four_distinct(&params, c, rho, lambda) {
            assert!(z.im == 0.0 && p.eval(z.re).abs() < 1e-12, "P({z}) != 0");
        }
    }

    fn reconstruct(s: &RootStructure, lead: f64, z: f64) -> f64 {
        let mut acc = Complex64::new(lead, 0.0);
        for e in &s.entries {
            for _ in 0..e.multiplicity {
                acc *= Complex64::new(z, 0.0) - e.as_complex();
            }
        }
        acc.re
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn reconstruction(b in -10.0f64..10.0, a in -10.0f64..10.0,
                          c in -10.0f64..10.0, d in -10.0f64..10.0,
                          e in -10.0f64..10.0) {
            prop_assume!(b.abs() > 1e-3);
            let p = poly([b, a, c, d, e]);
            let s = solve_structure(&p, 1e-8).unwrap();
            prop_assert_eq!(s.entries.iter().map(|x| x.multiplicity).sum::<usize>(), 4);
            let scale = p.coeffs.iter().map(|x| x.abs()).fold(0.0, f64::max);
            for z in [-2.0, -0.5, 0.3, 1.7, 3.1] {
                let want = p.eval(z);
                let got = reconstruct(&s, b, z);
                let zscale = scale * (1.0 + z.abs()).powi(4);
                prop_assert!((want - got).abs() <= 1e-8 * zscale,
                    "at z={}: want {} got {}", z, want, got);
            }
        }

        #[test]
        fn conjugate_closure(b in -5.0f64..5.0, a in -5.0f64..5.0,
                             c in -5.0f64..5.0, d in -5.0f64..5.0,
                             e in -5.0f64..5.0) {
            prop_assume!(b.abs() > 1e-3);
            let s = solve_structure(&poly([b, a, c, d, e]), 1e-8).unwrap();
            for entry in &s.entries {
                if entry.im != 0.0 {
                    let twin = s.entries.iter().find(|o|
                        o.re == entry.re && o.im == -entry.im
                        && o.multiplicity == entry.multiplicity);
                    prop_assert!(twin.is_some(), "unpaired root {:?}", entry);
                }
            }
        }
    }

    #[test]
    fn template_and_solver_agree_on_templates() {
        let cases: Vec<(EquationParams, WaveConstants)> = vec![
            (
                EquationParams::new(2.0, 1.0, 1.0, 1.0).unwrap(),
                WaveConstants::new(-1.0, 0.0, -4.0, 1.0).unwrap(),
            ),
            (
                EquationParams::new(1.0, 2.0, -1.0, -1.0 / 3.0).unwrap(),
                WaveConstants::new(0.25, 0.0, 1.0, 0.5).unwrap(),
            ),
            (
                // cubic triple root at c/A
                EquationParams::new(1.5, 0.0, 1.0, 1.0).unwrap(),
                WaveConstants::new(
                    1.2,
                    0.0,
                    -6.0 * 1.2 * 1.2 / 1.5,
                    -2.0 * 1.2f64.powi(3) / (1.5 * 1.5),
                )
                .unwrap(),
            ),
            (
                // quartic triple root, A=1, B=1, c=0.5, plus branch
                EquationParams::new(1.0, 1.0, -1.0, -1.0).unwrap(),
                WaveConstants::new(
                    0.5,
                    0.0,
                    4.0 + 27.0f64.sqrt(),
                    -(4.0 + 27.0f64.sqrt() + 1.5) / 2.0,
                )
                .unwrap(),
            ),
        ];
        for (params, wc) in cases {
            let t = structure_from_template(&params, &wc).expect("template must match");
            let n = solve_structure(&build_p(&params, &wc).unwrap(), 1e-7).unwrap();
            assert_eq!(t.pattern, n.pattern, "pattern mismatch for {params:?}");
            let scale =
                1.0 + t.entries.iter().map(|e| e.as_complex().norm()).fold(0.0, f64::max);
            for (te, ne) in t.entries.iter().zip(n.entries.iter()) {
                assert!(
                    (te.as_complex() - ne.as_complex()).norm() <= 1e-6 * scale,
                    "template {te:?} vs numeric {ne:?}"
                );
            }
        }
    }
}
