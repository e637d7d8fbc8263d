//! The Maharam skew product
//!
//! ```text
//! φ*_t(s, y) = (φ_t(s), y · dμ/dμ∘φ_t (s)) = (φ_t(s), y / w_t(s))
//! ```
//!
//! on `S × (0, ∞)` with `μ × Leb`. Sets on the product are finite unions of
//! rectangles `{atom} × (a, b]`; the family is closed under `φ*_t`, so every
//! pushforward and every product measure below is exact.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::action::{CubeWindow, GroupElement, NsAction};
use crate::error::{Error, Result};
use crate::maximal::max_dual_function;
use crate::measure::{integrate, Atom, AtomSpace, L1Function};
use crate::{rel_dev, DEFAULT_REL_TOL};

/// `{atom} × (a, b]` with `0 ≤ a < b < ∞`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub atom: Atom,
    pub a: f64,
    pub b: f64,
}

impl Rect {
    pub fn new(atom: Atom, a: f64, b: f64) -> Result<Self> {
        let r = Rect { atom, a, b };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite() && self.a >= 0.0 && self.b > self.a) {
            return Err(Error::InvalidInput(format!(
                "rect {} x ({}, {}] needs 0 <= a < b < inf",
                self.atom, self.a, self.b
            )));
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// `μ(atom) · (b − a)`.
    pub fn measure(&self, space: &AtomSpace) -> Result<f64> {
        Ok(space.weight(&self.atom)? * self.length())
    }

    pub fn overlaps(&self, other: &Rect) -> bool {
        self.atom == other.atom && self.a < other.b && other.a < self.b
    }
}

/// The skew-product action over a base action.
#[derive(Clone, Debug)]
pub struct MaharamAction {
    base: NsAction,
}

/// Wraps `action` after checking its cocycle on `J_2` over `S_2`.
pub fn extend(action: &NsAction) -> Result<MaharamAction> {
    let report = action.check_cocycle(2, &action.sample_atoms(2), DEFAULT_REL_TOL)?;
    if let Some(v) = report.violation {
        return Err(Error::CocycleViolation {
            t: v.t,
            u: v.u,
            atom: v.atom,
            deviation: v.deviation,
        });
    }
    if report.group_law_failures > 0 {
        return Err(Error::Construction("base action violates the group law".into()));
    }
    Ok(MaharamAction { base: action.clone() })
}

impl MaharamAction {
    pub fn base(&self) -> &NsAction {
        &self.base
    }

    /// `dμ/dμ∘φ_t (s) = 1 / w_t(s)`: the factor applied to the fiber coordinate.
    pub fn fiber_factor(&self, t: &GroupElement, s: &Atom) -> Result<f64> {
        let (_, log_rn) = self.base.apply_with_log_rn(t, s)?;
        Ok((-log_rn).exp())
    }

    /// `φ*_t(s, y)`.
    pub fn apply_point(&self, t: &GroupElement, s: &Atom, y: f64) -> Result<(Atom, f64)> {
        let (image, log_rn) = self.base.apply_with_log_rn(t, s)?;
        Ok((image, y * (-log_rn).exp()))
    }

    /// `φ*_t(r) = {φ_t(atom)} × (a / w_t(atom), b / w_t(atom)]`.
    pub fn push_rect(&self, t: &GroupElement, r: &Rect) -> Result<Rect> {
        r.validate()?;
        let (atom, log_rn) = self.base.apply_with_log_rn(t, &r.atom)?;
        let factor = (-log_rn).exp();
        Ok(Rect {
            atom,
            a: r.a * factor,
            b: r.b * factor,
        })
    }

    /// Compares `(μ × Leb)(r)` with `(μ × Leb)(φ*_t r)` for each rect.
    pub fn check_measure_preservation(&self, t: &GroupElement, rects: &[Rect], tol: f64) -> Result<MeasureReport> {
        for r in rects {
            r.validate()?;
        }
        for (i, r) in rects.iter().enumerate() {
            if let Some(other) = rects[i + 1..].iter().find(|o| r.overlaps(o)) {
                return Err(Error::InvalidInput(format!(
                    "rects {} x ({}, {}] and {} x ({}, {}] overlap",
                    r.atom, r.a, r.b, other.atom, other.a, other.b
                )));
            }
        }
        let space = self.base.space();
        let mut entries = Vec::with_capacity(rects.len());
        let mut max_rel_dev: f64 = 0.0;
        for r in rects {
            let image = self.push_rect(t, r)?;
            let before = r.measure(space)?;
            let after = image.measure(space)?;
            let dev = rel_dev(before, after);
            max_rel_dev = max_rel_dev.max(dev);
            entries.push(RectDeviation {
                rect: r.clone(),
                image,
                before,
                after,
                rel_dev: dev,
            });
        }
        Ok(MeasureReport {
            t: t.clone(),
            entries,
            max_rel_dev,
            tol,
            pass: max_rel_dev <= tol,
        })
    }

    /// Both sides of the extension identity for `g*_m = I_{S_m × (0, m)}`:
    ///
    /// ```text
    /// n^{-d} ∫∫ max_{0≤t≤(n−1)𝟙} g*_m∘φ*_t d(μ×Leb) = (m / n^d) ∫ max_t φ̂_t I_{S_m} dμ
    /// ```
    ///
    /// The left side is the product measure of `⋃_t φ*_{−t}(S_m × (0, m))`,
    /// assembled fiber by fiber from pulled-back rectangles; the right side
    /// is the base maximal statistic.
    pub fn extension_stat(&self, m: usize, n: usize) -> Result<ExtensionStat> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidInput(
                "extension statistic needs m >= 1 and n >= 1".into(),
            ));
        }
        let d = self.base.dim();
        let window = CubeWindow::corner(n, d);
        let cells = window.len() as f64;
        let s_m = self.base.sample_atoms(m);
        let space = self.base.space();

        let mut fibers: BTreeMap<Atom, Vec<(f64, f64)>> = BTreeMap::new();
        for t in window.iter() {
            let back = -&t;
            for b in &s_m {
                let pulled = self.push_rect(&back, &Rect::new(b.clone(), 0.0, m as f64)?)?;
                fibers.entry(pulled.atom).or_default().push((pulled.a, pulled.b));
            }
        }
        let mut lhs = 0.0;
        for (atom, intervals) in fibers {
            lhs += space.weight(&atom)? * union_length(intervals);
        }
        lhs /= cells;

        let indicator = L1Function::indicator(space, &s_m)?;
        let max_fn = max_dual_function(&self.base, &indicator, window)?;
        let rhs = m as f64 * integrate(space, &max_fn)? / cells;
        Ok(ExtensionStat { m, n, lhs, rhs })
    }
}

/// Lebesgue measure of a finite union of half-open intervals.
fn union_length(mut intervals: Vec<(f64, f64)>) -> f64 {
    intervals.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let mut total = 0.0;
    let mut current: Option<(f64, f64)> = None;
    for (a, b) in intervals {
        current = match current {
            Some((ca, cb)) if a <= cb => Some((ca, cb.max(b))),
            Some((ca, cb)) => {
                total += cb - ca;
                Some((a, b))
            }
            None => Some((a, b)),
        };
    }
    if let Some((ca, cb)) = current {
        total += cb - ca;
    }
    total
}

#[derive(Clone, Debug, Serialize)]
pub struct RectDeviation {
    pub rect: Rect,
    pub image: Rect,
    pub before: f64,
    pub after: f64,
    pub rel_dev: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasureReport {
    pub t: GroupElement,
    pub entries: Vec<RectDeviation>,
    pub max_rel_dev: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExtensionStat {
    pub m: usize,
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
}

impl ExtensionStat {
    pub fn rel_dev(&self) -> f64 {
        rel_dev(self.lhs, self.rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::Generator;
    use crate::zoo;

    fn a(k: i64) -> Atom {
        Atom::scalar(k)
    }

    fn one() -> GroupElement {
        GroupElement::from(1)
    }

    #[test]
    fn extend_examples() {
        let e2 = extend(&zoo::fixture("E2").unwrap()).unwrap();
        assert_eq!(e2.apply_point(&one(), &a(0), 1.0).unwrap(), (a(1), 0.5));
        let c4 = extend(&zoo::fixture("C4").unwrap()).unwrap();
        for k in 0..4 {
            assert_eq!(c4.fiber_factor(&one(), &a(k)).unwrap(), 1.0);
        }
        let od3 = extend(&zoo::fixture("OD3").unwrap()).unwrap();
        let f = od3.fiber_factor(&one(), &Atom(vec![0, 0, 0])).unwrap();
        assert!((f - 1.5).abs() < 1e-12);
    }

    #[test]
    fn extend_rejects_broken_cocycle() {
        let space = AtomSpace::finite("S3", (0..3).map(|k| (a(k), (k + 1) as f64))).unwrap();
        let swap01: BTreeMap<Atom, Atom> = [(a(0), a(1)), (a(1), a(0)), (a(2), a(2))].into();
        let swap12: BTreeMap<Atom, Atom> = [(a(0), a(0)), (a(1), a(2)), (a(2), a(1))].into();
        let action = NsAction::new(
            "S3",
            space,
            vec![
                Generator::from_permutation(swap01).unwrap(),
                Generator::from_permutation(swap12).unwrap(),
            ],
        )
        .unwrap();
        assert!(matches!(extend(&action), Err(Error::CocycleViolation { .. })));
    }

    #[test]
    fn push_rect_examples() {
        let e2 = extend(&zoo::fixture("E2").unwrap()).unwrap();
        let r = Rect::new(a(0), 0.0, 1.0).unwrap();
        assert_eq!(e2.push_rect(&one(), &r).unwrap(), Rect::new(a(1), 0.0, 0.5).unwrap());
        assert_eq!(e2.push_rect(&GroupElement::from(0), &r).unwrap(), r);
        let od3 = extend(&zoo::fixture("OD3").unwrap()).unwrap();
        let img = od3
            .push_rect(&one(), &Rect::new(Atom(vec![0, 0, 0]), 0.0, 1.0).unwrap())
            .unwrap();
        assert_eq!(img.atom, Atom(vec![1, 0, 0]));
        assert!((img.b - 1.5).abs() < 1e-12);
    }

    #[test]
    fn measure_preservation_examples() {
        let e2 = extend(&zoo::fixture("E2").unwrap()).unwrap();
        let rep = e2
            .check_measure_preservation(&one(), &[Rect::new(a(0), 0.0, 1.0).unwrap()], 1e-9)
            .unwrap();
        assert!(rep.pass);
        assert_eq!((rep.entries[0].before, rep.entries[0].after), (1.0, 1.0));
        let od3 = extend(&zoo::fixture("OD3").unwrap()).unwrap();
        let rep = od3
            .check_measure_preservation(&one(), &[Rect::new(Atom(vec![0, 0, 0]), 0.0, 1.0).unwrap()], 1e-9)
            .unwrap();
        assert!(rep.pass);
        assert!((rep.entries[0].before - 0.216).abs() < 1e-15);
        assert!((rep.entries[0].after - 0.216).abs() < 1e-12);
    }

    #[test]
    fn overlapping_rects_rejected() {
        let e2 = extend(&zoo::fixture("E2").unwrap()).unwrap();
        let rects = [Rect::new(a(0), 0.0, 1.0).unwrap(), Rect::new(a(0), 0.5, 2.0).unwrap()];
        assert!(matches!(
            e2.check_measure_preservation(&one(), &rects, 1e-9),
            Err(Error::InvalidInput(_))
        ));
        // touching half-open intervals are disjoint
        let rects = [Rect::new(a(0), 0.0, 1.0).unwrap(), Rect::new(a(0), 1.0, 2.0).unwrap()];
        assert!(e2.check_measure_preservation(&one(), &rects, 1e-9).is_ok());
        assert!(Rect::new(a(0), 1.0, 1.0).is_err());
        assert!(Rect::new(a(0), -1.0, 1.0).is_err());
    }

    #[test]
    fn extension_stat_examples() {
        let e2 = extend(&zoo::fixture("E2").unwrap()).unwrap();
        let x = e2.extension_stat(1, 8).unwrap();
        assert_eq!((x.lhs, x.rhs), (0.5, 0.5));
        let c4 = extend(&zoo::fixture("C4").unwrap()).unwrap();
        let x = c4.extension_stat(1, 8).unwrap();
        assert_eq!((x.lhs, x.rhs), (0.5, 0.5));
        let od3 = extend(&zoo::fixture("OD3").unwrap()).unwrap();
        let x = od3.extension_stat(1, 1).unwrap();
        assert!(x.rel_dev() <= 1e-12);
        assert!((x.lhs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn union_length_merges_overlaps() {
        assert_eq!(union_length(vec![(0.0, 1.0), (0.5, 2.0), (3.0, 4.0)]), 3.0);
        assert_eq!(union_length(vec![]), 0.0);
    }
}
