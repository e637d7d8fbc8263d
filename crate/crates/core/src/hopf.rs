//! Hopf conservative/dissipative labels for atomic actions and the Krengel
//! normal form of dissipative actions.
//!
//! On an atomic space an atom is conservative exactly when its orbit has a
//! nontrivial stabilizer. For a free orbit
//! `Σ_t φ̂_t g(s) = μ(s)⁻¹ Σ_{s' ∈ orbit} g(s')μ(s') ≤ ‖g‖/μ(s) < ∞`, so the
//! atom lies in the dissipative part; a nontrivial stabilizer makes every
//! orbit value recur infinitely often and the sum diverges. Freeness of an
//! infinite orbit cannot be decided from a finite window, so it is taken
//! from the builder's declaration and is otherwise reported as undetermined.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action::{CubeWindow, Generator, GroupElement, NsAction};
use crate::error::{Error, Result};
use crate::measure::{Atom, AtomSpace, L1Function};
use crate::zoo::lattice_cube;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "label", rename_all = "lowercase")]
pub enum HopfLabel {
    Conservative,
    Dissipative,
    Undetermined { radius: usize },
}

impl fmt::Display for HopfLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HopfLabel::Conservative => f.write_str("conservative"),
            HopfLabel::Dissipative => f.write_str("dissipative"),
            HopfLabel::Undetermined { radius } => write!(f, "undetermined({radius})"),
        }
    }
}

/// Labels of the atoms in the explored region (`S_radius`).
#[derive(Clone, Debug, Serialize)]
pub struct HopfLabels {
    pub radius: usize,
    #[serde(serialize_with = "labels_as_list")]
    pub labels: BTreeMap<Atom, HopfLabel>,
}

fn labels_as_list<S: serde::Serializer>(
    labels: &BTreeMap<Atom, HopfLabel>,
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Entry<'a> {
        atom: &'a Atom,
        #[serde(flatten)]
        label: &'a HopfLabel,
    }
    serializer.collect_seq(labels.iter().map(|(atom, label)| Entry { atom, label }))
}

impl HopfLabels {
    pub fn get(&self, atom: &Atom) -> Option<HopfLabel> {
        self.labels.get(atom).copied()
    }

    pub fn count(&self, label: HopfLabel) -> usize {
        self.labels.values().filter(|&&l| l == label).count()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitRecord {
    pub seed: Atom,
    pub radius: usize,
    pub points: Vec<(GroupElement, Atom)>,
    /// Nonzero `t` in the window with `φ_t(seed) = seed`.
    pub stabilizer: Vec<GroupElement>,
}

impl OrbitRecord {
    pub fn is_free(&self) -> bool {
        self.stabilizer.is_empty()
    }
}

/// `{(t, φ_t s) : t ∈ J_radius}` together with the stabilizer found there.
pub fn orbit_explore(action: &NsAction, s: &Atom, radius: usize) -> Result<OrbitRecord> {
    if radius == 0 {
        return Err(Error::InvalidInput(
            "orbit exploration radius must be at least 1".into(),
        ));
    }
    let mut points = Vec::new();
    let mut stabilizer = Vec::new();
    for t in CubeWindow::centered(radius, action.dim()).iter() {
        let image = action.apply(&t, s)?;
        if !t.is_zero() && &image == s {
            stabilizer.push(t.clone());
        }
        points.push((t, image));
    }
    Ok(OrbitRecord {
        seed: s.clone(),
        radius,
        points,
        stabilizer,
    })
}

/// Atoms enumerated before an orbit is declared too large to close.
pub const ORBIT_CLOSURE_BUDGET: usize = 4096;

/// Enumerates the full orbit of `s` under the generators and their inverses.
/// Returns `None` if it exceeds `budget` atoms. A finite orbit of a ℤᵈ-action
/// always has a nontrivial stabilizer.
pub fn orbit_closure(action: &NsAction, s: &Atom, budget: usize) -> Result<Option<BTreeSet<Atom>>> {
    let mut seen = BTreeSet::from([s.clone()]);
    let mut frontier = vec![s.clone()];
    while let Some(x) = frontier.pop() {
        for g in action.generators() {
            for y in [g.forward(&x), g.backward(&x)] {
                let y = y.ok_or_else(|| Error::UnknownAtom(x.clone()))?;
                if seen.insert(y.clone()) {
                    if seen.len() > budget {
                        return Ok(None);
                    }
                    frontier.push(y);
                }
            }
        }
    }
    Ok(Some(seen))
}

/// Hopf label of a single atom.
///
/// Conservative if a nonzero stabilizer element lies in `J_radius`, or if the
/// whole orbit is finite and enumerated (always the case on finite spaces).
/// Dissipative if the window orbit is free and the builder declares the
/// orbit free. Undetermined otherwise.
pub fn hopf_label(action: &NsAction, s: &Atom, radius: usize) -> Result<HopfLabel> {
    let orbit = orbit_explore(action, s, radius)?;
    if !orbit.is_free() {
        return Ok(HopfLabel::Conservative);
    }
    if action.declared_free(s) == Some(true) {
        return Ok(HopfLabel::Dissipative);
    }
    let budget = action.space().len().unwrap_or(ORBIT_CLOSURE_BUDGET);
    if orbit_closure(action, s, budget)?.is_some() {
        return Ok(HopfLabel::Conservative);
    }
    Ok(HopfLabel::Undetermined { radius })
}

/// Labels every atom of `S_radius`.
pub fn hopf_decompose(action: &NsAction, radius: usize) -> Result<HopfLabels> {
    let atoms = action.sample_atoms(radius);
    let labels = atoms
        .par_iter()
        .map(|s| hopf_label(action, s, radius).map(|l| (s.clone(), l)))
        .collect::<Result<Vec<_>>>()?;
    Ok(HopfLabels {
        radius,
        labels: labels.into_iter().collect(),
    })
}

/// The translation action `ψ_t(w, s) = (w, s + t)` on `W × ℤᵈ` with measure
/// `τ ⊗ l`. Atoms are the coordinates of `w` followed by `s`.
pub fn build_translation_action(base: &AtomSpace, d: usize) -> Result<NsAction> {
    if d == 0 {
        return Err(Error::InvalidParameter("translation dimension must be positive".into()));
    }
    let weight_base = base.clone();
    let exhaustion_base = base.clone();
    let space = AtomSpace::lazy(
        format!("{} x Z^{d}", base.name()),
        Arc::new(move |a: &Atom| {
            let cut = a.len().checked_sub(d)?;
            weight_base.weight(&Atom(a.0[..cut].to_vec())).ok()
        }),
        Some(Arc::new(move |m: usize| {
            let cube = lattice_cube(d, m as i64);
            exhaustion_base
                .exhaustion(m)
                .iter()
                .flat_map(|w| {
                    cube.iter().map(move |s| {
                        let mut v = w.0.clone();
                        v.extend_from_slice(&s.0);
                        Atom(v)
                    })
                })
                .collect()
        })),
        f64::INFINITY,
    )?;
    // Coordinates are addressed from the end so that W-atoms of any length work.
    let gens = (0..d)
        .map(|axis| {
            let from_end = d - axis;
            let shift = move |a: &Atom, k: i64| {
                let mut v = a.0.clone();
                let idx = v.len().checked_sub(from_end)?;
                v[idx] += k;
                Some(Atom(v))
            };
            Generator::new(Arc::new(move |a| shift(a, 1)), Arc::new(move |a| shift(a, -1))).with_shift(Arc::new(shift))
        })
        .collect();
    Ok(NsAction::new(format!("translation on {}", space.name()), space, gens)?.with_freeness(Arc::new(|_| Some(true))))
}

/// A dissipative action presented as a translation on `W × ℤᵈ`:
/// `Φ(w, t) = φ_t(w)` for representatives `w` with `τ(w) = μ(w)`.
#[derive(Clone, Debug)]
pub struct KrengelForm {
    pub d: usize,
    /// Radius of the tabulated region `J_radius` of `Φ`.
    pub radius: usize,
    /// Representatives with weights `τ`; empty when the region was empty.
    pub base: Option<AtomSpace>,
    pub table: BTreeMap<(Atom, GroupElement), Atom>,
}

impl KrengelForm {
    pub fn representatives(&self) -> Vec<Atom> {
        self.base.as_ref().and_then(|b| b.atoms()).unwrap_or_default()
    }

    pub fn tau(&self, w: &Atom) -> Result<f64> {
        self.base
            .as_ref()
            .ok_or_else(|| Error::UnknownAtom(w.clone()))?
            .weight(w)
    }

    pub fn phi(&self, w: &Atom, s: &GroupElement) -> Option<&Atom> {
        self.table.get(&(w.clone(), s.clone()))
    }

    /// The translation model `ψ` on `W × ℤᵈ`.
    pub fn translation_action(&self) -> Result<NsAction> {
        let base = self
            .base
            .as_ref()
            .ok_or_else(|| Error::Degenerate("empty normal form has no translation model".into()))?;
        build_translation_action(base, self.d)
    }

    /// `f = g∘Φ` on the tabulated region of `W × ℤᵈ`.
    pub fn pull_back(&self, g: &L1Function) -> Result<L1Function> {
        let model = self.translation_action()?;
        let values = self.table.iter().filter_map(|((w, s), atom)| {
            let v = g.get(atom);
            (v > 0.0).then(|| {
                let mut coords = w.0.clone();
                coords.extend_from_slice(&s.0);
                (Atom(coords), v)
            })
        });
        L1Function::new(model.space(), values)
    }

    pub fn to_doc(&self) -> Result<KrengelDoc> {
        let mut representatives = Vec::new();
        for w in self.representatives() {
            representatives.push(RepresentativeDoc {
                tau: self.tau(&w)?,
                atom: w,
            });
        }
        Ok(KrengelDoc {
            d: self.d,
            radius: self.radius,
            representatives,
            phi: self
                .table
                .iter()
                .map(|((w, s), atom)| PhiEntry {
                    w: w.clone(),
                    s: s.clone(),
                    atom: atom.clone(),
                })
                .collect(),
        })
    }

    pub fn from_doc(doc: KrengelDoc) -> Result<Self> {
        let base = if doc.representatives.is_empty() {
            None
        } else {
            Some(AtomSpace::finite(
                "W",
                doc.representatives.into_iter().map(|r| (r.atom, r.tau)),
            )?)
        };
        let mut table = BTreeMap::new();
        for e in doc.phi {
            if e.s.dim() != doc.d {
                return Err(Error::Dimension {
                    expected: doc.d,
                    got: e.s.dim(),
                });
            }
            table.insert((e.w, e.s), e.atom);
        }
        Ok(KrengelForm {
            d: doc.d,
            radius: doc.radius,
            base,
            table,
        })
    }
}

/// JSON layout of a [`KrengelForm`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KrengelDoc {
    pub d: usize,
    pub radius: usize,
    pub representatives: Vec<RepresentativeDoc>,
    pub phi: Vec<PhiEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentativeDoc {
    pub atom: Atom,
    pub tau: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiEntry {
    pub w: Atom,
    pub s: GroupElement,
    pub atom: Atom,
}

/// Builds the Krengel normal form of the dissipative atoms in `region`.
///
/// Region atoms are grouped into orbits by exploring `J_radius` around each;
/// the representative of an orbit is its minimal region atom and
/// `Φ(w, t) = φ_t(w)` is tabulated for `t ∈ J_radius`.
pub fn krengel_normal_form(action: &NsAction, region: &[Atom], radius: usize) -> Result<KrengelForm> {
    let d = action.dim();
    let region: BTreeSet<Atom> = region.iter().cloned().collect();
    if region.is_empty() {
        return Ok(KrengelForm {
            d,
            radius,
            base: None,
            table: BTreeMap::new(),
        });
    }
    for s in &region {
        let label = hopf_label(action, s, radius)?;
        if label != HopfLabel::Dissipative {
            return Err(Error::InvalidInput(format!(
                "atom {s} is labeled {label}; the normal form needs dissipative atoms only"
            )));
        }
    }
    let mut assigned: BTreeSet<Atom> = BTreeSet::new();
    let mut reps = Vec::new();
    for s in &region {
        if assigned.contains(s) {
            continue;
        }
        let orbit = orbit_explore(action, s, radius)?;
        let members: BTreeSet<&Atom> = orbit
            .points
            .iter()
            .map(|(_, a)| a)
            .filter(|a| region.contains(*a) && !assigned.contains(*a))
            .collect();
        let rep = (*members.iter().next().expect("seed is its own orbit member")).clone();
        assigned.extend(members.into_iter().cloned());
        reps.push(rep);
    }
    let mut table = BTreeMap::new();
    let mut weights = Vec::new();
    for w in &reps {
        weights.push((w.clone(), action.space().weight(w)?));
        for t in CubeWindow::centered(radius, d).iter() {
            let image = action.apply(&t, w)?;
            table.insert((w.clone(), t), image);
        }
    }
    Ok(KrengelForm {
        d,
        radius,
        base: Some(AtomSpace::finite("W", weights)?),
        table,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivarianceFailure {
    pub w: Atom,
    pub s: GroupElement,
    pub t: GroupElement,
    /// `Φ(w, s + t)` from the table.
    pub tabulated: Option<Atom>,
    /// `φ_t(Φ(w, s))`.
    pub acted: Option<Atom>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub radius: usize,
    pub equivariance_checked: usize,
    pub equivariance_failures: Vec<EquivarianceFailure>,
    pub injective: bool,
    /// Entries whose image atom is missing from the space or has a weight of
    /// a different null status than `τ(w)`.
    pub support_mismatches: Vec<(Atom, GroupElement)>,
    /// Whether `μ∘Φ⁻¹` equals `τ ⊗ l` exactly on the region (not required).
    pub measure_exact: bool,
    pub tau_matches_base: bool,
    pub pass: bool,
}

/// Checks `Φ∘ψ_t = φ_t∘Φ` and `μ∘Φ⁻¹ ∼ τ⊗l` on the tabulated region.
pub fn verify_equivalence(action: &NsAction, form: &KrengelForm, radius: usize) -> Result<EquivalenceReport> {
    let radius = radius.min(form.radius);
    let window = CubeWindow::centered(radius, form.d);
    let elements: Vec<GroupElement> = window.iter().collect();
    let mut report = EquivalenceReport {
        radius,
        equivariance_checked: 0,
        equivariance_failures: Vec::new(),
        injective: true,
        support_mismatches: Vec::new(),
        measure_exact: true,
        tau_matches_base: true,
        pass: false,
    };
    if form.d != action.dim() {
        return Err(Error::Dimension {
            expected: action.dim(),
            got: form.d,
        });
    }
    let mut seen: BTreeMap<&Atom, (&Atom, &GroupElement)> = BTreeMap::new();
    for ((w, s), atom) in &form.table {
        if seen.insert(atom, (w, s)).is_some() {
            report.injective = false;
        }
    }
    for w in form.representatives() {
        let tau = form.tau(&w)?;
        match form.phi(&w, &GroupElement::zero(form.d)) {
            Some(origin) => match action.space().weight(origin) {
                Ok(mu) if crate::rel_dev(mu, tau) <= 1e-12 => {}
                _ => report.tau_matches_base = false,
            },
            None => report.tau_matches_base = false,
        }
        for s in &elements {
            let start = form.phi(&w, s);
            match start.map(|a| action.space().weight(a)) {
                Some(Ok(mu)) if mu > 0.0 && tau > 0.0 => {
                    if crate::rel_dev(mu, tau) > 1e-12 {
                        report.measure_exact = false;
                    }
                }
                _ => report.support_mismatches.push((w.clone(), s.clone())),
            }
            for t in &elements {
                let target = s + t;
                if !window.contains(&target) {
                    continue;
                }
                report.equivariance_checked += 1;
                let tabulated = form.phi(&w, &target).cloned();
                let acted = start.and_then(|a| action.apply(t, a).ok());
                if tabulated.is_none() || tabulated != acted {
                    report.equivariance_failures.push(EquivarianceFailure {
                        w: w.clone(),
                        s: s.clone(),
                        t: t.clone(),
                        tabulated,
                        acted,
                    });
                }
            }
        }
    }
    report.pass = report.equivariance_failures.is_empty()
        && report.injective
        && report.support_mismatches.is_empty()
        && report.tau_matches_base;
    Ok(report)
}
