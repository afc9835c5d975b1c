//! The family decision tree.
//!
//! `classify` maps `(EquationParams, WaveConstants)` through the root
//! structure of `P` and the sign conditions of the classification table to a
//! [`FamilyDescriptor`]. Some table rows hold two coexisting solution
//! branches (different `v`-intervals of the same level set); those are
//! reported as one descriptor whose `siblings` list both class ids.
//!
//! `identify` recovers `(C2, C3)` from sampled jets of an unknown profile by
//! taking medians of the first integrals, checks their constancy, and then
//! classifies.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{build_p, i2, i3, EquationParams, JetPoint, ModelError, WaveConstants};
use crate::roots::{
    self, solve_structure, structure_from_template, RootEntry, RootPattern, RootStructure,
    RootsError,
};

/// Dead zone for sign tests, relative to the scale of the tested quantity.
/// Boundaries belong to adjacent degenerate classes; landing inside the zone
/// raises a boundary warning instead of silently picking a side.
const SIGN_DEAD_ZONE: f64 = 1e-10;

/// Default constancy tolerance for `identify`.
pub const IDENTIFY_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("unsupported root structure {pattern:?}: {diagnostic}")]
    UnsupportedStructure {
        pattern: RootPattern,
        diagnostic: String,
    },
    #[error("samples are not a traveling-wave solution: I3 deviation {i3_dev:.3e}, I2 deviation {i2_dev:.3e} exceed tolerance {tol:.3e}")]
    NotASolution { i3_dev: f64, i2_dev: f64, tol: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Roots(#[from] RootsError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// The 25 solution classes: 24 closed-form families plus the constant class
/// of the degenerate `M + N = 0` equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassId {
    Constant,
    Solg21,
    Solg22,
    Solg3Triple,
    Solg3Caso2A1,
    Solg3Caso2A2,
    Solg3Caso2B,
    Solg3SimplesA1,
    Solg3SimplesA2,
    Solg3SimplesB1,
    Solg3SimplesB2,
    Solg4Cuadruple,
    Sol1RTriple,
    Sol2RDPlus,
    Sol2RDMinus,
    Solg4DoubleCompl,
    Solg41D2RealesA,
    Solg41D2RealesB1,
    Solg41D2RealesB2,
    Solg4Dobley2Comp1,
    Solg4Dobley2Comp2,
    Sol4Dist1,
    Sol4Dist2,
    Sol4Dist3,
    Sol4Dist4,
}

pub const ALL_CLASSES: [ClassId; 25] = [
    ClassId::Constant,
    ClassId::Solg21,
    ClassId::Solg22,
    ClassId::Solg3Triple,
    ClassId::Solg3Caso2A1,
    ClassId::Solg3Caso2A2,
    ClassId::Solg3Caso2B,
    ClassId::Solg3SimplesA1,
    ClassId::Solg3SimplesA2,
    ClassId::Solg3SimplesB1,
    ClassId::Solg3SimplesB2,
    ClassId::Solg4Cuadruple,
    ClassId::Sol1RTriple,
    ClassId::Sol2RDPlus,
    ClassId::Sol2RDMinus,
    ClassId::Solg4DoubleCompl,
    ClassId::Solg41D2RealesA,
    ClassId::Solg41D2RealesB1,
    ClassId::Solg41D2RealesB2,
    ClassId::Solg4Dobley2Comp1,
    ClassId::Solg4Dobley2Comp2,
    ClassId::Sol4Dist1,
    ClassId::Sol4Dist2,
    ClassId::Sol4Dist3,
    ClassId::Sol4Dist4,
];

impl ClassId {
    pub fn label(&self) -> &'static str {
        match self {
            ClassId::Constant => "CONSTANT",
            ClassId::Solg21 => "SOLG21",
            ClassId::Solg22 => "SOLG22",
            ClassId::Solg3Triple => "SOLG3TRIPLE",
            ClassId::Solg3Caso2A1 => "SOLG3CASO2A1",
            ClassId::Solg3Caso2A2 => "SOLG3CASO2A2",
            ClassId::Solg3Caso2B => "SOLG3CASO2B",
            ClassId::Solg3SimplesA1 => "SOLG3SIMPLESA1",
            ClassId::Solg3SimplesA2 => "SOLG3SIMPLESA2",
            ClassId::Solg3SimplesB1 => "SOLG3SIMPLESB1",
            ClassId::Solg3SimplesB2 => "SOLG3SIMPLESB2",
            ClassId::Solg4Cuadruple => "SOLG4CUADRUPLE",
            ClassId::Sol1RTriple => "SOL1RTRIPLE",
            ClassId::Sol2RDPlus => "SOL2RD+",
            ClassId::Sol2RDMinus => "SOL2RD-",
            ClassId::Solg4DoubleCompl => "SOLG4DOUBLECOMPL",
            ClassId::Solg41D2RealesA => "SOLG41D2REALES_A",
            ClassId::Solg41D2RealesB1 => "SOLG41D2REALES_B1",
            ClassId::Solg41D2RealesB2 => "SOLG41D2REALES_B2",
            ClassId::Solg4Dobley2Comp1 => "SOLG4DOBLEY2COMP1",
            ClassId::Solg4Dobley2Comp2 => "SOLG4DOBLEY2COMP2",
            ClassId::Sol4Dist1 => "SOL4DIST1",
            ClassId::Sol4Dist2 => "SOL4DIST2",
            ClassId::Sol4Dist3 => "SOL4DIST3",
            ClassId::Sol4Dist4 => "SOL4DIST4",
        }
    }

    pub fn parse(s: &str) -> Option<ClassId> {
        // A trailing '+'/'-' marks the two-double-root branch; elsewhere
        // '-'/'_' are separators.
        fn key(s: &str) -> String {
            let mut t = s.trim().to_lowercase();
            if let Some(stripped) = t.strip_suffix('+') {
                t = format!("{stripped}plus");
            } else if let Some(stripped) = t.strip_suffix('-') {
                t = format!("{stripped}minus");
            }
            t.chars().filter(|c| c.is_ascii_alphanumeric()).collect()
        }
        let norm = key(s);
        ALL_CLASSES.iter().copied().find(|c| key(c.label()) == norm)
    }

    /// Number of free parameters of the family.
    pub fn k(&self) -> usize {
        self.free_params().len()
    }

    pub fn free_params(&self) -> &'static [&'static str] {
        use ClassId::*;
        match self {
            Constant => &["u0"],
            Solg21 | Solg22 => &["c", "C1", "C2", "C3"],
            Solg3Triple => &["c", "C1"],
            Solg3Caso2A1 | Solg3Caso2A2 | Solg3Caso2B => &["c", "phi", "C1"],
            Solg3SimplesA1 | Solg3SimplesA2 | Solg3SimplesB1 | Solg3SimplesB2 => {
                &["c", "C1", "phi1", "phi2"]
            }
            Solg4Cuadruple => &["C1"],
            Sol1RTriple | Sol2RDPlus | Sol2RDMinus | Solg4DoubleCompl => &["c", "C1"],
            Solg41D2RealesA | Solg41D2RealesB1 | Solg41D2RealesB2 | Solg4Dobley2Comp1
            | Solg4Dobley2Comp2 => &["c", "C1", "rho"],
            Sol4Dist1 | Sol4Dist2 | Sol4Dist3 | Sol4Dist4 => &["c", "C1", "rho", "lambda"],
        }
    }
}

impl std::fmt::Display for ClassId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Sign branch selector for the `+-`/`-+` formula pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    #[default]
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(&self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Family-specific auxiliary constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Aux {
    /// Degree-2 families use the wave constants directly.
    Quadratic,
    /// Cubic triple root `phi = c/A`.
    TripleCubic { phi: f64 },
    /// Cubic double root `phi` with simple root `3c/A - 2 phi`.
    DoubleCubic { phi: f64, simple: f64 },
    /// Cubic simple roots sorted ascending.
    ThreeCubic { phi1: f64, phi2: f64, phi3: f64 },
    /// Quartic quadruple root `-A/2B`.
    QuadrupleQuartic { phi: f64 },
    /// Quartic triple root `phi1`, simple `phi2`.
    TripleQuartic { phi1: f64, phi2: f64 },
    /// Two real double roots, `phi1 < phi2`.
    TwoDouble { phi1: f64, phi2: f64 },
    /// Two conjugate double roots `a +- i b`.
    DoubleComplex { a: f64, b: f64 },
    /// Double root `phi1` and simple real roots `phi2 < phi3`.
    DoubleTwoReal { phi1: f64, phi2: f64, phi3: f64 },
    /// Double root `phi1` and a conjugate pair `a +- i b`.
    DoubleComplexPair { phi1: f64, a: f64, b: f64 },
    /// Four simple roots; complex entries appear on the complex-valid
    /// branches.
    FourDistinct { phi: [RootEntry; 4] },
    /// Constant profile value (degenerate equation).
    ConstantValue { value: f64 },
}

/// Everything needed to evaluate and report one classified family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyDescriptor {
    pub class_id: ClassId,
    /// Coexisting solution branches for the same constants (includes
    /// `class_id`).
    pub siblings: Vec<ClassId>,
    pub params: EquationParams,
    /// `K = -6(M+N)/B`, present only for `B != 0`.
    pub k_const: Option<f64>,
    pub roots: RootStructure,
    pub aux: Aux,
    pub branch: Branch,
    pub free_params: Vec<String>,
    /// Sign tests that landed inside the dead zone.
    pub warnings: Vec<String>,
}

impl FamilyDescriptor {
    pub fn contains(&self, class: ClassId) -> bool {
        self.siblings.contains(&class)
    }

    /// Printable name of the classification outcome: the class label, or the
    /// shared stem when the descriptor bundles sibling branches.
    pub fn family_label(&self) -> &'static str {
        use ClassId::*;
        if self.siblings.len() < 2 {
            return self.class_id.label();
        }
        match self.class_id {
            Solg3SimplesA1 => "SOLG3SIMPLES_A",
            Solg3SimplesB1 => "SOLG3SIMPLES_B",
            Sol2RDPlus => "SOL2RD",
            Solg41D2RealesB1 => "SOLG41D2REALES_B",
            Solg4Dobley2Comp1 => "SOLG4DOBLEY2COMP",
            Sol4Dist1 => "SOL4DIST_KPOS",
            Sol4Dist3 => "SOL4DIST_KNEG",
            other => other.label(),
        }
    }

    pub fn k(&self) -> usize {
        self.free_params.len()
    }

    pub fn with_branch(mut self, branch: Branch) -> Self {
        self.branch = branch;
        self
    }

    pub fn with_class(mut self, class: ClassId) -> Result<Self, ClassifyError> {
        if !self.contains(class) {
            return Err(ClassifyError::InvalidInput(format!(
                "class {class} is not admissible here; classification gives {}",
                self.family_label()
            )));
        }
        self.class_id = class;
        Ok(self)
    }
}

struct SignTests {
    warnings: Vec<String>,
}

impl SignTests {
    fn new() -> Self {
        Self { warnings: Vec::new() }
    }

    fn sign(&mut self, value: f64, scale: f64, what: &str) -> f64 {
        if value.abs() <= SIGN_DEAD_ZONE * scale.abs().max(1.0) {
            self.warnings.push(format!(
                "boundary case: {what} = {value:.3e} inside the sign dead zone; picked {}",
                if value >= 0.0 { "+" } else { "-" }
            ));
        }
        if value >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Classify `(params, wc)` into its solution family.
pub fn classify(
    params: &EquationParams,
    wc: &WaveConstants,
) -> Result<FamilyDescriptor, ClassifyError> {
    classify_with_tol(params, wc, roots::DEFAULT_REL_TOL)
}

pub fn classify_with_tol(
    params: &EquationParams,
    wc: &WaveConstants,
    rel_tol: f64,
) -> Result<FamilyDescriptor, ClassifyError> {
    classify_with_tols(params, wc, rel_tol, None)
}

/// Classification with an explicit template-match tolerance, used when the
/// constants come from sampled data and carry uncertainty.
pub fn classify_with_tols(
    params: &EquationParams,
    wc: &WaveConstants,
    rel_tol: f64,
    template_tol: Option<f64>,
) -> Result<FamilyDescriptor, ClassifyError> {
    if wc.c == 0.0 {
        return Err(ClassifyError::Model(ModelError::ZeroWaveSpeed));
    }
    let mut tests = SignTests::new();
    let poly = build_p(params, wc)?;
    let template = match template_tol {
        Some(t) => roots::structure_from_template_with_tol(params, wc, t),
        None => structure_from_template(params, wc),
    };
    let structure = match template {
        Some(s) => s,
        None => solve_structure(&poly, rel_tol)?,
    };

    if params.is_degenerate() {
        // M + N = 0: the reduced ODE factors and only constants remain.
        return Ok(FamilyDescriptor {
            class_id: ClassId::Constant,
            siblings: vec![ClassId::Constant],
            params: *params,
            k_const: params.k_const(),
            roots: structure,
            aux: Aux::ConstantValue { value: 0.0 },
            branch: Branch::default(),
            free_params: strs(ClassId::Constant.free_params()),
            warnings: tests.warnings,
        });
    }

    let mu = params.mu();
    let k_const = params.k_const();
    let root_scale = 1.0
        + structure
            .entries
            .iter()
            .map(|e| e.as_complex().norm())
            .fold(0.0, f64::max);

    let (classes, aux): (Vec<ClassId>, Aux) = match structure.pattern {
        RootPattern::Q2Simple => {
            let t = tests.sign(mu / wc.c, (mu / wc.c).abs(), "(M+N)/c");
            let class = if t > 0.0 { ClassId::Solg21 } else { ClassId::Solg22 };
            (vec![class], Aux::Quadratic)
        }
        RootPattern::C3Triple => {
            let phi = structure.entries[0].re;
            (vec![ClassId::Solg3Triple], Aux::TripleCubic { phi })
        }
        RootPattern::C3Double => {
            let phi = double_root(&structure);
            let simple = simple_roots(&structure)[0];
            let g = wc.c - params.a * phi;
            let gsign = tests.sign(g, 1.0 + wc.c.abs() + (params.a * phi).abs(), "c - A*phi");
            let class = if mu > 0.0 {
                if gsign > 0.0 { ClassId::Solg3Caso2A1 } else { ClassId::Solg3Caso2A2 }
            } else if gsign > 0.0 {
                ClassId::Solg3Caso2B
            } else {
                ClassId::Solg3Caso2A1
            };
            (vec![class], Aux::DoubleCubic { phi, simple })
        }
        RootPattern::C3Distinct => {
            let rr = structure.real_roots();
            let aux = Aux::ThreeCubic { phi1: rr[0].0, phi2: rr[1].0, phi3: rr[2].0 };
            let t = tests.sign(mu / params.a, (mu / params.a).abs(), "(M+N)/A");
            let classes = if t < 0.0 {
                vec![ClassId::Solg3SimplesA1, ClassId::Solg3SimplesA2]
            } else {
                vec![ClassId::Solg3SimplesB1, ClassId::Solg3SimplesB2]
            };
            (classes, aux)
        }
        RootPattern::C3WithComplexPair => {
            return Err(ClassifyError::UnsupportedStructure {
                pattern: structure.pattern,
                diagnostic: format!(
                    "cubic P with one real root and a complex pair has no closed-form \
                     family in the classification table; roots {:?}",
                    structure.entries
                ),
            });
        }
        RootPattern::C4Quadruple => {
            let phi = structure.entries[0].re;
            (vec![ClassId::Solg4Cuadruple], Aux::QuadrupleQuartic { phi })
        }
        RootPattern::C4Triple => {
            let phi1 = triple_root(&structure);
            let phi2 = simple_roots(&structure)[0];
            (vec![ClassId::Sol1RTriple], Aux::TripleQuartic { phi1, phi2 })
        }
        RootPattern::C4DoubleDoubleReal => {
            let rr = structure.real_roots();
            (
                vec![ClassId::Sol2RDPlus, ClassId::Sol2RDMinus],
                Aux::TwoDouble { phi1: rr[0].0, phi2: rr[1].0 },
            )
        }
        RootPattern::C4DoubleDoubleComplex => {
            let pair = structure.complex_pairs()[0].0;
            (
                vec![ClassId::Solg4DoubleCompl],
                Aux::DoubleComplex { a: pair.re, b: pair.im.abs() },
            )
        }
        RootPattern::C4DoublePlusTwoReal => {
            let phi1 = double_root(&structure);
            let mut simple = simple_roots(&structure);
            simple.sort_by(f64::total_cmp);
            let (phi2, phi3) = (simple[0], simple[1]);
            let k = k_const.expect("quartic pattern requires B != 0");
            let t = k * (phi1 - phi2) * (phi3 - phi1);
            let scale = (1.0 + k.abs()) * root_scale * root_scale;
            let tsign = tests.sign(t, scale, "K(phi1-phi2)(phi3-phi1)");
            let classes = if tsign > 0.0 {
                vec![ClassId::Solg41D2RealesA]
            } else {
                vec![ClassId::Solg41D2RealesB1, ClassId::Solg41D2RealesB2]
            };
            (classes, Aux::DoubleTwoReal { phi1, phi2, phi3 })
        }
        RootPattern::C4DoublePlusTwoComplex => {
            let phi1 = double_root(&structure);
            let pair = structure.complex_pairs()[0].0;
            (
                vec![ClassId::Solg4Dobley2Comp1, ClassId::Solg4Dobley2Comp2],
                Aux::DoubleComplexPair { phi1, a: pair.re, b: pair.im.abs() },
            )
        }
        RootPattern::C4FourDistinctReal | RootPattern::C4WithComplexPair => {
            let k = k_const.expect("quartic pattern requires B != 0");
            let ksign = tests.sign(k, 1.0 + k.abs(), "K");
            let classes = if ksign > 0.0 {
                vec![ClassId::Sol4Dist1, ClassId::Sol4Dist2]
            } else {
                vec![ClassId::Sol4Dist3, ClassId::Sol4Dist4]
            };
            (classes, Aux::FourDistinct { phi: four_entries(&structure) })
        }
    };

    let free_params = strs(aux_free_params(&aux));
    Ok(FamilyDescriptor {
        class_id: classes[0],
        siblings: classes,
        params: *params,
        k_const,
        roots: structure,
        aux,
        branch: Branch::default(),
        free_params,
        warnings: tests.warnings,
    })
}

fn strs(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn aux_free_params(aux: &Aux) -> &'static [&'static str] {
    match aux {
        Aux::Quadratic => &["c", "C1", "C2", "C3"],
        Aux::TripleCubic { .. } => &["c", "C1"],
        Aux::DoubleCubic { .. } => &["c", "phi", "C1"],
        Aux::ThreeCubic { .. } => &["c", "C1", "phi1", "phi2"],
        Aux::QuadrupleQuartic { .. } => &["C1"],
        Aux::TripleQuartic { .. } | Aux::TwoDouble { .. } | Aux::DoubleComplex { .. } => {
            &["c", "C1"]
        }
        Aux::DoubleTwoReal { .. } | Aux::DoubleComplexPair { .. } => &["c", "C1", "rho"],
        Aux::FourDistinct { .. } => &["c", "C1", "rho", "lambda"],
        Aux::ConstantValue { .. } => &["u0"],
    }
}

fn double_root(s: &RootStructure) -> f64 {
    s.entries
        .iter()
        .find(|e| e.multiplicity == 2 && e.is_real())
        .map(|e| e.re)
        .expect("pattern guarantees a real double root")
}

fn triple_root(s: &RootStructure) -> f64 {
    s.entries
        .iter()
        .find(|e| e.multiplicity == 3)
        .map(|e| e.re)
        .expect("pattern guarantees a triple root")
}

fn simple_roots(s: &RootStructure) -> Vec<f64> {
    s.entries
        .iter()
        .filter(|e| e.multiplicity == 1 && e.is_real())
        .map(|e| e.re)
        .collect()
}

/// Four simple roots in evaluation order: real roots first (ascending), then
/// conjugate pairs with the `+i` member leading. Placing a lone conjugate
/// pair in the trailing slots makes the complex-branch formulas
/// conjugation-symmetric, so they evaluate to real values along the real
/// orbit anchored at the leading real roots.
fn four_entries(s: &RootStructure) -> [RootEntry; 4] {
    let mut flat: Vec<RootEntry> = Vec::with_capacity(4);
    for e in &s.entries {
        for _ in 0..e.multiplicity {
            flat.push(RootEntry { multiplicity: 1, ..*e });
        }
    }
    flat.sort_by(|a, b| {
        (a.im != 0.0)
            .cmp(&(b.im != 0.0))
            .then(a.re.total_cmp(&b.re))
            .then(b.im.total_cmp(&a.im))
    });
    [flat[0], flat[1], flat[2], flat[3]]
}

/// Result of a profile identification: recovered constants, their measured
/// constancy deviations, and the classified family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Identification {
    pub c2: f64,
    pub c3: f64,
    /// Max absolute deviation of I2 (resp. I3) from its median.
    pub i2_dev: f64,
    pub i3_dev: f64,
    pub descriptor: FamilyDescriptor,
}

/// Recover `(C2, C3)` from sampled jets via the first integrals, check their
/// constancy, and classify.
pub fn identify(
    samples: &[JetPoint],
    params: &EquationParams,
    c: f64,
    tol: Option<f64>,
) -> Result<(f64, f64, FamilyDescriptor), ClassifyError> {
    identify_detailed(samples, params, c, tol).map(|id| (id.c2, id.c3, id.descriptor))
}

/// As [`identify`], also reporting the measured invariant deviations.
pub fn identify_detailed(
    samples: &[JetPoint],
    params: &EquationParams,
    c: f64,
    tol: Option<f64>,
) -> Result<Identification, ClassifyError> {
    let tol = tol.unwrap_or(IDENTIFY_TOL);
    if samples.len() < 3 {
        return Err(ClassifyError::InvalidInput(format!(
            "identify needs at least 3 samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|p| p.v == 0.0) {
        return Err(ClassifyError::InvalidInput(
            "identify requires v != 0 at every sample".into(),
        ));
    }

    let i3_vals: Vec<f64> = samples.iter().map(|p| i3(params, c, p)).collect();
    let c3 = median(&i3_vals);
    let i3_dev = max_abs_dev(&i3_vals, c3);

    let i2_vals: Vec<f64> = samples
        .iter()
        .map(|p| i2(params, c, c3, p))
        .collect::<Result<_, _>>()?;
    let c2 = median(&i2_vals);
    let i2_dev = max_abs_dev(&i2_vals, c2);

    let tol3 = tol * (1.0 + c3.abs());
    let tol2 = tol * (1.0 + c2.abs());
    if i3_dev > tol3 || i2_dev > tol2 {
        return Err(ClassifyError::NotASolution {
            i3_dev,
            i2_dev,
            tol: tol3.max(tol2),
        });
    }

    // The recovered constants are only as sharp as the invariant spread;
    // widen the degenerate-template match radius accordingly.
    let uncertainty = (i3_dev / (1.0 + c3.abs())).max(i2_dev / (1.0 + c2.abs()));
    let template_tol = (3.0 * uncertainty).max(1e-9);
    let wc = WaveConstants::new(c, 0.0, c2, c3)?;
    let descriptor = classify_with_tols(params, &wc, roots::DEFAULT_REL_TOL, Some(template_tol))?;
    Ok(Identification { c2, c3, i2_dev, i3_dev, descriptor })
}

fn median(xs: &[f64]) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn max_abs_dev(xs: &[f64], center: f64) -> f64 {
    xs.iter().map(|x| (x - center).abs()).fold(0.0, f64::max)
}

/// Free parameters supplied when a family is requested by class id instead of
/// by integration constants.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct FreeParams {
    pub c: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
    pub phi: Option<f64>,
    pub phi1: Option<f64>,
    pub phi2: Option<f64>,
    pub rho: Option<f64>,
    pub lambda: Option<f64>,
    pub u0: Option<f64>,
    pub branch: Option<Branch>,
}

impl FreeParams {
    fn req(&self, v: Option<f64>, name: &str) -> Result<f64, ClassifyError> {
        v.ok_or_else(|| ClassifyError::InvalidInput(format!("missing free parameter {name}")))
    }
}

/// Constructs `(WaveConstants, FamilyDescriptor)` for a requested class from
/// its free parameters using the closed-form template constants, then
/// re-classifies to validate admissibility.
pub fn descriptor_from_free_params(
    class: ClassId,
    params: &EquationParams,
    free: &FreeParams,
) -> Result<(WaveConstants, FamilyDescriptor), ClassifyError> {
    use ClassId::*;
    let a = params.a;
    let b = params.b;
    let c1 = free.c1.unwrap_or(0.0);
    let branch = free.branch.unwrap_or_default();

    let wc = match class {
        Constant => {
            let c = free.c.unwrap_or(1.0);
            WaveConstants::new(c, c1, free.c2.unwrap_or(0.0), free.c3.unwrap_or(0.0))?
        }
        Solg21 | Solg22 => {
            let c = free.req(free.c, "c")?;
            WaveConstants::new(c, c1, free.req(free.c2, "C2")?, free.req(free.c3, "C3")?)?
        }
        Solg3Triple => {
            let c = free.req(free.c, "c")?;
            require(b == 0.0 && a != 0.0, "needs B = 0, A != 0")?;
            WaveConstants::new(c, c1, -6.0 * c * c / a, -2.0 * c * c * c / (a * a))?
        }
        Solg3Caso2A1 | Solg3Caso2A2 | Solg3Caso2B => {
            let c = free.req(free.c, "c")?;
            let phi = free.req(free.phi, "phi")?;
            require(b == 0.0 && a != 0.0, "needs B = 0, A != 0")?;
            WaveConstants::new(
                c,
                c1,
                6.0 * a * phi * phi - 12.0 * c * phi,
                4.0 * a * phi * phi * phi - 6.0 * c * phi * phi,
            )?
        }
        Solg3SimplesA1 | Solg3SimplesA2 | Solg3SimplesB1 | Solg3SimplesB2 => {
            let c = free.req(free.c, "c")?;
            let p1 = free.req(free.phi1, "phi1")?;
            let p2 = free.req(free.phi2, "phi2")?;
            require(b == 0.0 && a != 0.0, "needs B = 0, A != 0")?;
            let c2 = 2.0 * a * (p1 * p1 + p1 * p2 + p2 * p2) - 6.0 * c * (p1 + p2);
            let c3 = 2.0 * a * p1 * p2 * (p1 + p2) - 6.0 * c * p1 * p2;
            WaveConstants::new(c, c1, c2, c3)?
        }
        Solg4Cuadruple => {
            require(b != 0.0, "needs B != 0")?;
            let c = -a * a / (4.0 * b);
            if let Some(given) = free.c {
                require(
                    (given - c).abs() <= 1e-12 * (1.0 + c.abs()),
                    "quadruple root forces c = -A^2/(4B)",
                )?;
            }
            WaveConstants::new(
                c,
                c1,
                -a * a * a / (2.0 * b * b),
                a * a * a * a / (16.0 * b * b * b),
            )?
        }
        Sol1RTriple => {
            require(b != 0.0, "needs B != 0")?;
            let c = free.req(free.c, "c")?;
            let delta = a * a + 4.0 * b * c;
            require(delta > 0.0, "triple root needs A^2 + 4Bc > 0")?;
            let sgn = branch.sign();
            let sd3 = (delta * delta * delta).sqrt();
            let c2 = (a * (a * a + 6.0 * b * c) + sgn * sd3) / (b * b);
            let c3 = -(a * a * (a * a + 6.0 * b * c) + sgn * a * sd3 + 6.0 * b * b * c * c)
                / (2.0 * b * b * b);
            WaveConstants::new(c, c1, c2, c3)?
        }
        Sol2RDPlus | Sol2RDMinus | Solg4DoubleCompl => {
            require(b != 0.0, "needs B != 0")?;
            let c = free.req(free.c, "c")?;
            let s6 = a * a + 6.0 * b * c;
            WaveConstants::new(c, c1, a * s6 / (b * b), s6 * s6 / (4.0 * b * b * b))?
        }
        Solg41D2RealesA | Solg41D2RealesB1 | Solg41D2RealesB2 | Solg4Dobley2Comp1
        | Solg4Dobley2Comp2 => {
            require(b != 0.0, "needs B != 0")?;
            let c = free.req(free.c, "c")?;
            let rho = free.req(free.rho, "rho")?;
            let c2 = 2.0 * rho * (2.0 * b * rho * rho + 3.0 * a * rho - 6.0 * c);
            let c3 = rho * rho * (3.0 * b * rho * rho + 4.0 * a * rho - 6.0 * c);
            WaveConstants::new(c, c1, c2, c3)?
        }
        Sol4Dist1 | Sol4Dist2 | Sol4Dist3 | Sol4Dist4 => {
            require(b != 0.0, "needs B != 0")?;
            let c = free.req(free.c, "c")?;
            let rho = free.req(free.rho, "rho")?;
            let lambda = free.req(free.lambda, "lambda")?;
            let (c2, c3) = roots::constants_four_distinct(params, c, rho, lambda);
            WaveConstants::new(c, c1, c2, c3)?
        }
    };

    let mut fd = classify(params, &wc)?.with_class(class)?.with_branch(branch);
    if class == Constant {
        fd.aux = Aux::ConstantValue { value: free.u0.unwrap_or(0.0) };
    }
    Ok((wc, fd))
}

fn require(cond: bool, msg: &str) -> Result<(), ClassifyError> {
    if cond {
        Ok(())
    } else {
        Err(ClassifyError::InvalidInput(msg.into()))
    }
}

/// Roots of a classified four-distinct family in evaluation order.
pub fn four_distinct_roots(fd: &FamilyDescriptor) -> Option<[Complex64; 4]> {
    if let Aux::FourDistinct { phi } = &fd.aux {
        Some([
            phi[0].as_complex(),
            phi[1].as_complex(),
            phi[2].as_complex(),
            phi[3].as_complex(),
        ])
    } else {
        None
    }
}
