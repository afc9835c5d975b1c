//! Traveling-wave solution engine for the modified Zakharov-Kuznetsov equation
//!
//! ```text
//! u_t + A u u_x + B u^2 u_x + M u_xxx + N u_xyy = 0
//! ```
//!
//! The substitution `u(x,y,t) = v(r)`, `r = x + y - c t` reduces the PDE to the
//! third-order ODE `-c v' + A v v' + B v^2 v' + (M+N) v''' = 0`. Two first
//! integrals `I3` and `I2` fix constants `C3`, `C2`, and every traveling wave
//! is a level set of the quartic
//!
//! ```text
//! P(z) = B z^4 + 2 A z^3 - 6 c z^2 - C2 z + C3 .
//! ```
//!
//! The root multiplicities of `P` split the solution set into 25 closed-form
//! families. This crate classifies a given `(A, B, M, N, c, C2, C3)` into its
//! family, evaluates every family in closed form, identifies the family of
//! externally supplied profiles via the first integrals, and verifies all
//! outputs against the governing ODE/PDE with finite-difference residuals and
//! an independent Runge-Kutta integrator.
//!
//! Module map:
//! - [`specfun`]: Carlson `R_F`, incomplete elliptic `F`, Jacobi `sn`.
//! - [`model`]: shared domain types, `P`, the first integrals, `h`.
//! - [`roots`]: root finding with multiplicity detection and exact templates.
//! - [`classify`]: the family decision tree and profile identification.
//! - [`families`]: closed-form evaluators for all 25 families.
//! - [`verify`]: FD residuals, RK4 oracle, primitive checks.
//! - [`cli`]: command-line surface (`classify`, `eval`, `sample`,
//!   `identify`, `verify`).

pub mod classify;
pub mod cli;
pub mod families;
pub mod model;
pub mod roots;
pub mod specfun;
pub mod verify;

pub use classify::{classify, identify, ClassId, FamilyDescriptor};
pub use families::{evaluate, evaluate_profile, EvalResult, EvalStatus, WavePoint};
pub use model::{EquationParams, JetPoint, QuarticPoly, WaveConstants};
pub use roots::RootStructure;
pub use verify::ResidualReport;
