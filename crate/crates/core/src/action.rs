//! Nonsingular ℤᵈ-actions given by commuting generators, their
//! Radon–Nikodym cocycles, and the dual operators `φ̂_t`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{Atom, AtomSpace, L1Function};
use crate::{rel_dev, DEFAULT_REL_TOL};

/// Default bound on the magnitude of any atom coordinate reached while
/// exploring a lazy action.
pub const DEFAULT_EXPLORE_LIMIT: i64 = 1_000_000;

/// An element of ℤᵈ.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement(pub Vec<i64>);

impl GroupElement {
    pub fn zero(d: usize) -> Self {
        GroupElement(vec![0; d])
    }

    pub fn unit(d: usize, axis: usize) -> Self {
        let mut v = vec![0; d];
        v[axis] = 1;
        GroupElement(v)
    }

    /// `k·𝟙`
    pub fn diagonal(d: usize, k: i64) -> Self {
        GroupElement(vec![k; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Component-wise partial order.
    pub fn le(&self, other: &GroupElement) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Sup norm.
    pub fn max_abs(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }
}

impl From<i64> for GroupElement {
    fn from(k: i64) -> Self {
        GroupElement(vec![k])
    }
}

impl From<Vec<i64>> for GroupElement {
    fn from(v: Vec<i64>) -> Self {
        GroupElement(v)
    }
}

impl Add for &GroupElement {
    type Output = GroupElement;
    fn add(self, rhs: &GroupElement) -> GroupElement {
        debug_assert_eq!(self.0.len(), rhs.0.len());
        GroupElement(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &GroupElement {
    type Output = GroupElement;
    fn sub(self, rhs: &GroupElement) -> GroupElement {
        debug_assert_eq!(self.0.len(), rhs.0.len());
        GroupElement(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &GroupElement {
    type Output = GroupElement;
    fn neg(self) -> GroupElement {
        GroupElement(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    /// `[0, (n−1)𝟙]`, `n^d` elements.
    Corner,
    /// `J_n = [−n𝟙, n𝟙]`, `(2n+1)^d` elements.
    Centered,
}

impl fmt::Display for WindowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WindowKind::Corner => "corner",
            WindowKind::Centered => "centered",
        })
    }
}

impl std::str::FromStr for WindowKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corner" => Ok(WindowKind::Corner),
            "centered" => Ok(WindowKind::Centered),
            other => Err(Error::InvalidInput(format!("unknown window kind '{other}'"))),
        }
    }
}

/// A finite sub-cube of ℤᵈ.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct CubeWindow {
    pub kind: WindowKind,
    pub n: usize,
    pub d: usize,
}

impl CubeWindow {
    pub fn corner(n: usize, d: usize) -> Self {
        CubeWindow {
            kind: WindowKind::Corner,
            n,
            d,
        }
    }

    pub fn centered(n: usize, d: usize) -> Self {
        CubeWindow {
            kind: WindowKind::Centered,
            n,
            d,
        }
    }

    pub fn new(kind: WindowKind, n: usize, d: usize) -> Self {
        CubeWindow { kind, n, d }
    }

    fn bounds(&self) -> (i64, i64) {
        match self.kind {
            WindowKind::Corner => (0, self.n as i64 - 1),
            WindowKind::Centered => (-(self.n as i64), self.n as i64),
        }
    }

    pub fn side(&self) -> usize {
        match self.kind {
            WindowKind::Corner => self.n,
            WindowKind::Centered => 2 * self.n + 1,
        }
    }

    pub fn len(&self) -> usize {
        self.side().pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, t: &GroupElement) -> bool {
        let (lo, hi) = self.bounds();
        t.dim() == self.d && t.0.iter().all(|&c| lo <= c && c <= hi)
    }

    /// Elements in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = GroupElement> {
        let (lo, hi) = self.bounds();
        let d = self.d;
        let total = self.len();
        let side = self.side() as i64;
        (0..total).map(move |mut idx| {
            let mut v = vec![0i64; d];
            for slot in v.iter_mut().rev() {
                *slot = lo + (idx as i64 % side);
                idx /= side as usize;
            }
            debug_assert!(v.iter().all(|&c| c <= hi));
            GroupElement(v)
        })
    }
}

pub type AtomMap = Arc<dyn Fn(&Atom) -> Option<Atom> + Send + Sync>;
pub type AtomShift = Arc<dyn Fn(&Atom, i64) -> Option<Atom> + Send + Sync>;
pub type FreenessRule = Arc<dyn Fn(&Atom) -> Option<bool> + Send + Sync>;

/// One invertible generator `T_i` together with its inverse.
///
/// `shift` may provide `T_i^k` in closed form; otherwise powers are taken by
/// iterating `forward` or `backward`.
#[derive(Clone)]
pub struct Generator {
    forward: AtomMap,
    backward: AtomMap,
    shift: Option<AtomShift>,
}

impl Generator {
    pub fn new(forward: AtomMap, backward: AtomMap) -> Self {
        Generator {
            forward,
            backward,
            shift: None,
        }
    }

    pub fn with_shift(mut self, shift: AtomShift) -> Self {
        self.shift = Some(shift);
        self
    }

    pub fn identity() -> Self {
        Generator::new(Arc::new(|a| Some(a.clone())), Arc::new(|a| Some(a.clone())))
            .with_shift(Arc::new(|a, _| Some(a.clone())))
    }

    /// A finite permutation given as a map `atom ↦ image`.
    pub fn from_permutation(table: BTreeMap<Atom, Atom>) -> Result<Self> {
        let mut inverse = BTreeMap::new();
        for (from, to) in &table {
            if !table.contains_key(to) {
                return Err(Error::Construction(format!(
                    "permutation maps {from} to {to}, which is not in its domain"
                )));
            }
            if inverse.insert(to.clone(), from.clone()).is_some() {
                return Err(Error::Construction(format!("permutation is not injective at {to}")));
            }
        }
        let forward = Arc::new(table);
        let backward = Arc::new(inverse);
        Ok(Generator::new(
            Arc::new(move |a| forward.get(a).cloned()),
            Arc::new(move |a| backward.get(a).cloned()),
        ))
    }

    pub fn forward(&self, a: &Atom) -> Option<Atom> {
        (self.forward)(a)
    }

    pub fn backward(&self, a: &Atom) -> Option<Atom> {
        (self.backward)(a)
    }

    /// `T^k a`.
    pub fn power(&self, a: &Atom, k: i64) -> Option<Atom> {
        if let Some(shift) = &self.shift {
            return shift(a, k);
        }
        let step = if k >= 0 { &self.forward } else { &self.backward };
        let mut x = a.clone();
        for _ in 0..k.unsigned_abs() {
            x = step(&x)?;
        }
        Some(x)
    }
}

/// A nonsingular ℤᵈ-action on an atomic space, specified by `d` generators.
///
/// `φ_t` is evaluated along the axis-ordered path: `t_1` steps of `T_1`, then
/// `t_2` steps of `T_2`, and so on. Path independence rests on commutativity
/// of the generators, which is checked by sampling
/// ([`NsAction::check_commutativity`]) rather than assumed.
#[derive(Clone)]
pub struct NsAction {
    name: String,
    space: AtomSpace,
    generators: Vec<Generator>,
    explore_limit: i64,
    freeness: Option<FreenessRule>,
}

impl fmt::Debug for NsAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NsAction")
            .field("name", &self.name)
            .field("space", &self.space)
            .field("d", &self.dim())
            .finish()
    }
}

impl NsAction {
    /// Validates bijectivity of every generator on the sampled atoms
    /// (the whole space if finite, `S_2` otherwise).
    pub fn new(name: impl Into<String>, space: AtomSpace, generators: Vec<Generator>) -> Result<Self> {
        let name = name.into();
        if generators.is_empty() {
            return Err(Error::Construction(format!(
                "action '{name}' needs at least one generator"
            )));
        }
        let action = NsAction {
            name,
            space,
            generators,
            explore_limit: DEFAULT_EXPLORE_LIMIT,
            freeness: None,
        };
        for s in action.sample_atoms(2) {
            for (i, g) in action.generators.iter().enumerate() {
                let image = g.forward(&s).filter(|x| action.space.contains(x));
                let pre = g.backward(&s).filter(|x| action.space.contains(x));
                let (Some(image), Some(pre)) = (image, pre) else {
                    return Err(Error::Construction(format!(
                        "generator {} of '{}' is undefined at {s}",
                        i + 1,
                        action.name
                    )));
                };
                if g.backward(&image).as_ref() != Some(&s) || g.forward(&pre).as_ref() != Some(&s) {
                    return Err(Error::Construction(format!(
                        "generator {} of '{}' is not inverted by its inverse at {s}",
                        i + 1,
                        action.name
                    )));
                }
            }
        }
        Ok(action)
    }

    pub fn with_explore_limit(mut self, limit: i64) -> Self {
        self.explore_limit = limit;
        self
    }

    /// Declares, per atom, whether its orbit is known to be free.
    pub fn with_freeness(mut self, rule: FreenessRule) -> Self {
        self.freeness = Some(rule);
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &AtomSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn explore_limit(&self) -> i64 {
        self.explore_limit
    }

    pub fn declared_free(&self, s: &Atom) -> Option<bool> {
        self.freeness.as_ref().and_then(|rule| rule(s))
    }

    /// Sample atoms for sampled checks: the whole space if finite, `S_m` otherwise.
    pub fn sample_atoms(&self, m: usize) -> Vec<Atom> {
        self.space.exhaustion(m)
    }

    fn check_dim(&self, t: &GroupElement) -> Result<()> {
        if t.dim() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: t.dim(),
            });
        }
        Ok(())
    }

    fn check_reach(&self, atom: &Atom, t: &GroupElement, reached: &Atom) -> Result<()> {
        if let Some(c) = reached.max_abs_coord() {
            if c.abs() > self.explore_limit {
                return Err(Error::ExplorationLimit {
                    atom: atom.clone(),
                    t: t.clone(),
                    coordinate: c,
                    limit: self.explore_limit,
                });
            }
        }
        Ok(())
    }

    /// `φ_t(s)` together with `ln w_t(s)`, accumulated segment by segment
    /// along the axis-ordered path.
    pub fn apply_with_log_rn(&self, t: &GroupElement, s: &Atom) -> Result<(Atom, f64)> {
        self.check_dim(t)?;
        let mut log_mu = self.space.weight(s)?.ln();
        let mut log_rn = 0.0;
        let mut x = s.clone();
        for (g, &k) in self.generators.iter().zip(&t.0) {
            if k == 0 {
                continue;
            }
            let y = g.power(&x, k).ok_or_else(|| Error::UnknownAtom(x.clone()))?;
            self.check_reach(s, t, &y)?;
            let next_log_mu = self.space.weight(&y)?.ln();
            log_rn += next_log_mu - log_mu;
            log_mu = next_log_mu;
            x = y;
        }
        Ok((x, log_rn))
    }

    /// `φ_t(s)`.
    pub fn apply(&self, t: &GroupElement, s: &Atom) -> Result<Atom> {
        self.check_dim(t)?;
        if !self.space.contains(s) {
            return Err(Error::UnknownAtom(s.clone()));
        }
        let mut x = s.clone();
        for (g, &k) in self.generators.iter().zip(&t.0) {
            if k == 0 {
                continue;
            }
            let y = g.power(&x, k).ok_or_else(|| Error::UnknownAtom(x.clone()))?;
            self.check_reach(s, t, &y)?;
            if !self.space.contains(&y) {
                return Err(Error::UnknownAtom(y));
            }
            x = y;
        }
        Ok(x)
    }

    /// `w_t(s) = dμ∘φ_t/dμ (s) = μ(φ_t s)/μ(s)`.
    pub fn rn_derivative(&self, t: &GroupElement, s: &Atom) -> Result<f64> {
        Ok(self.apply_with_log_rn(t, s)?.1.exp())
    }

    /// The dual operator `φ̂_t g = g∘φ_t · w_t`.
    ///
    /// The result is supported on `φ_{−t}(supp g)`.
    pub fn dual_apply(&self, t: &GroupElement, g: &L1Function) -> Result<L1Function> {
        self.check_dim(t)?;
        if t.is_zero() {
            return Ok(g.clone());
        }
        let back = -t;
        let mut values = BTreeMap::new();
        for (a, _) in g.iter() {
            let s = self.apply(&back, a)?;
            let (image, log_rn) = self.apply_with_log_rn(t, &s)?;
            let v = g.get(&image) * log_rn.exp();
            values.insert(s, v);
        }
        L1Function::new(&self.space, values)
    }

    /// Both sides of `∫_A φ̂_t g dμ = ∫ g · I_A∘φ_t^{-1} dμ`; the right side
    /// is the integral of `g` over `φ_t(A)`.
    pub fn check_duality(&self, t: &GroupElement, g: &L1Function, set: &[Atom]) -> Result<(f64, f64)> {
        self.check_dim(t)?;
        let set: BTreeSet<&Atom> = set.iter().collect();
        let mut lhs = 0.0;
        let mut image_set = BTreeSet::new();
        for s in &set {
            let (image, log_rn) = self.apply_with_log_rn(t, s)?;
            lhs += g.get(&image) * log_rn.exp() * self.space.weight(s)?;
            image_set.insert(image);
        }
        let mut rhs = 0.0;
        for s in &image_set {
            rhs += g.get(s) * self.space.weight(s)?;
        }
        Ok((lhs, rhs))
    }

    /// Verifies `w_{t+u}(s) = w_t(s)·w_u(φ_t s)` for all `t, u` in `J_radius`.
    pub fn check_cocycle(&self, radius: usize, samples: &[Atom], tol: f64) -> Result<CocycleReport> {
        let window: Vec<GroupElement> = CubeWindow::centered(radius, self.dim()).iter().collect();
        let mut report = CocycleReport {
            radius,
            samples: samples.len(),
            checked: 0,
            max_rel_dev: 0.0,
            tol,
            violation: None,
            group_law_failures: 0,
            pass: true,
        };
        for s in samples {
            for t in &window {
                let (ts, log_wt) = self.apply_with_log_rn(t, s)?;
                for u in &window {
                    let tu = t + u;
                    let (tus, log_wtu) = self.apply_with_log_rn(&tu, s)?;
                    let (uts, log_wu) = self.apply_with_log_rn(u, &ts)?;
                    if tus != uts {
                        report.group_law_failures += 1;
                    }
                    let lhs = log_wtu.exp();
                    let rhs = (log_wt + log_wu).exp();
                    let dev = rel_dev(lhs, rhs);
                    report.checked += 1;
                    let worse = dev > report.max_rel_dev;
                    if worse {
                        report.max_rel_dev = dev;
                    }
                    if (dev > tol || tus != uts) && (report.violation.is_none() || worse) {
                        report.violation = Some(CocycleViolation {
                            t: t.clone(),
                            u: u.clone(),
                            atom: s.clone(),
                            lhs,
                            rhs,
                            deviation: dev,
                        });
                    }
                }
            }
        }
        report.pass = report.max_rel_dev <= tol && report.group_law_failures == 0;
        Ok(report)
    }

    /// Sampled commutativity `T_i T_j s = T_j T_i s`; returns the failing
    /// `(i, j, s)` triples.
    pub fn check_commutativity(&self, samples: &[Atom]) -> Vec<(usize, usize, Atom)> {
        let mut failures = Vec::new();
        for s in samples {
            for i in 0..self.dim() {
                for j in (i + 1)..self.dim() {
                    let gi = &self.generators[i];
                    let gj = &self.generators[j];
                    let ij = gj.forward(s).and_then(|x| gi.forward(&x));
                    let ji = gi.forward(s).and_then(|x| gj.forward(&x));
                    if ij.is_none() || ij != ji {
                        failures.push((i, j, s.clone()));
                    }
                }
            }
        }
        failures
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CocycleViolation {
    pub t: GroupElement,
    pub u: GroupElement,
    pub atom: Atom,
    pub lhs: f64,
    pub rhs: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CocycleReport {
    pub radius: usize,
    pub samples: usize,
    pub checked: usize,
    pub max_rel_dev: f64,
    pub tol: f64,
    pub violation: Option<CocycleViolation>,
    /// Count of `(t, u, s)` with `φ_{t+u}(s) ≠ φ_u(φ_t s)`.
    pub group_law_failures: usize,
    pub pass: bool,
}

impl CocycleReport {
    pub fn default_tol() -> f64 {
        DEFAULT_REL_TOL
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    fn a(k: i64) -> Atom {
        Atom::scalar(k)
    }

    fn g1(k: i64) -> GroupElement {
        GroupElement::from(k)
    }

    #[test]
    fn window_enumeration() {
        let c = CubeWindow::corner(3, 2);
        let v: Vec<_> = c.iter().collect();
        assert_eq!(v.len(), 9);
        assert_eq!(v[0], GroupElement(vec![0, 0]));
        assert_eq!(v[1], GroupElement(vec![0, 1]));
        assert_eq!(v[8], GroupElement(vec![2, 2]));
        let j = CubeWindow::centered(2, 1);
        assert_eq!(j.iter().map(|t| t.0[0]).collect::<Vec<_>>(), vec![-2, -1, 0, 1, 2]);
        assert_eq!(CubeWindow::centered(2, 3).len(), 125);
        assert!(GroupElement(vec![0, 1]).le(&GroupElement(vec![1, 1])));
        assert!(!GroupElement(vec![2, 0]).le(&GroupElement(vec![1, 1])));
    }

    #[test]
    fn apply_examples() {
        let tr1 = zoo::fixture("TR1").unwrap();
        assert_eq!(tr1.apply(&g1(5), &a(-2)).unwrap(), a(3));
        assert_eq!(tr1.apply(&g1(0), &a(-2)).unwrap(), a(-2));
        let od3 = zoo::fixture("OD3").unwrap();
        let origin = Atom(vec![0, 0, 0]);
        assert_eq!(od3.apply(&g1(1), &origin).unwrap(), Atom(vec![1, 0, 0]));
        assert_eq!(od3.apply(&g1(3), &origin).unwrap(), Atom(vec![1, 1, 0]));
        assert_eq!(od3.apply(&g1(8), &origin).unwrap(), origin);
    }

    #[test]
    fn rn_derivative_examples() {
        let e2 = zoo::fixture("E2").unwrap();
        assert_eq!(e2.rn_derivative(&g1(1), &a(0)).unwrap(), 2.0);
        assert_eq!(e2.rn_derivative(&g1(2), &a(0)).unwrap(), 1.0);
        let od3 = zoo::fixture("OD3").unwrap();
        let w = od3.rn_derivative(&g1(1), &Atom(vec![0, 0, 0])).unwrap();
        assert!((w - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn exploration_limit_is_reported() {
        let tr1 = zoo::fixture("TR1").unwrap().with_explore_limit(100);
        let err = tr1.apply(&g1(150), &a(0)).unwrap_err();
        assert!(matches!(err, Error::ExplorationLimit { coordinate: 150, .. }));
        let err = tr1.rn_derivative(&g1(-101), &a(0)).unwrap_err();
        assert!(matches!(err, Error::ExplorationLimit { coordinate: -101, .. }));
    }

    #[test]
    fn dimension_mismatch() {
        let st2 = zoo::fixture("ST2").unwrap();
        assert!(matches!(
            st2.apply(&g1(1), &a(0)),
            Err(Error::Dimension { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn cocycle_examples() {
        let e2 = zoo::fixture("E2").unwrap();
        let r = e2.check_cocycle(2, &e2.sample_atoms(1), 1e-9).unwrap();
        assert!(r.pass);
        assert_eq!(r.max_rel_dev, 0.0);
        assert_eq!(r.checked, 2 * 25);
        let od3 = zoo::fixture("OD3").unwrap();
        let r = od3.check_cocycle(4, &od3.sample_atoms(1), 1e-9).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn dual_apply_examples() {
        let e2 = zoo::fixture("E2").unwrap();
        let g = L1Function::new(e2.space(), [(a(0), 3.0), (a(1), 5.0)]).unwrap();
        let h = e2.dual_apply(&g1(1), &g).unwrap();
        assert_eq!(h.get(&a(0)), 10.0);
        assert_eq!(h.get(&a(1)), 1.5);
        assert_eq!(h.norm(), 13.0);
        assert_eq!(e2.dual_apply(&g1(0), &g).unwrap(), g);

        let c4 = zoo::fixture("C4").unwrap();
        let ind = L1Function::indicator(c4.space(), [&a(0)]).unwrap();
        let h = c4.dual_apply(&g1(1), &ind).unwrap();
        assert_eq!(h, L1Function::indicator(c4.space(), [&a(3)]).unwrap());
    }

    #[test]
    fn duality_examples() {
        let e2 = zoo::fixture("E2").unwrap();
        let g = L1Function::new(e2.space(), [(a(0), 3.0), (a(1), 5.0)]).unwrap();
        assert_eq!(e2.check_duality(&g1(1), &g, &[a(0)]).unwrap(), (10.0, 10.0));
        assert_eq!(e2.check_duality(&g1(0), &g, &[a(1)]).unwrap(), (10.0, 10.0));
        let c4 = zoo::fixture("C4").unwrap();
        let ind = L1Function::indicator(c4.space(), [&a(0)]).unwrap();
        assert_eq!(c4.check_duality(&g1(2), &ind, &[a(2)]).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn non_commuting_generators_are_caught() {
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
        assert!(!action.check_commutativity(&action.sample_atoms(0)).is_empty());
        let r = action.check_cocycle(1, &action.sample_atoms(0), 1e-9).unwrap();
        assert!(!r.pass);
        assert!(r.violation.is_some());
    }

    #[test]
    fn broken_permutation_rejected() {
        let table: BTreeMap<Atom, Atom> = [(a(0), a(1)), (a(1), a(1))].into();
        assert!(Generator::from_permutation(table).is_err());
    }
}
