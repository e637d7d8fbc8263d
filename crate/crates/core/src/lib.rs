//! Nonsingular ℤᵈ-actions on purely atomic σ-finite measure spaces.
//!
//! Every quantity here is an exact finite sum: spaces are atomic, integrands
//! are finitely supported, and infinite spaces are described lazily by rules
//! together with an exhaustion `S_1 ⊆ S_2 ⊆ …` of finite atom sets.
//!
//! * [`measure`]: atoms, spaces, nonnegative integrable functions.
//! * [`action`]: group elements, cube windows, actions, Radon–Nikodym
//!   cocycles and the dual (transfer) operators.
//! * [`maximal`]: the maximal-average statistic over cube windows, partial
//!   dual sums and the conservativity verdict.
//! * [`maharam`]: the Maharam skew product on `S × (0, ∞)`.
//! * [`hopf`]: Hopf labels, orbit exploration and the Krengel normal form.
//! * [`zoo`]: example actions with known ground truth.
//! * [`io`]: JSON documents describing spaces and actions.

pub mod action;
pub mod error;
pub mod hopf;
pub mod io;
pub mod maharam;
pub mod maximal;
pub mod measure;
pub mod zoo;

pub use action::{CubeWindow, GroupElement, NsAction, WindowKind};
pub use error::{Error, Result};
pub use measure::{Atom, AtomSpace, L1Function};

/// Default relative tolerance for identity checks.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

/// Relative deviation `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_dev(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
