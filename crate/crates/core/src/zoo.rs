//! Exactly computable example actions with declared conservative/dissipative
//! ground truth.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::action::{Generator, NsAction};
use crate::error::{Error, Result};
use crate::hopf::build_translation_action;
use crate::measure::{Atom, AtomSpace};

/// Builder name plus parameters. Serialized with a `builder` tag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "snake_case", deny_unknown_fields)]
pub enum ZooSpec {
    /// Product of cyclic rotations `c_i ↦ c_i + 1 mod N_i` with product weights.
    Cyclic {
        sizes: Vec<i64>,
        #[serde(default)]
        weights: Option<Vec<Vec<f64>>>,
    },
    /// Translation `ψ_t(w, s) = (w, s + t)` on `W × ℤᵈ` with weights `τ(w)`.
    Translation {
        tau: Vec<f64>,
        d: usize,
    },
    /// d-fold product of the depth-`depth` binary odometer with wrap-around.
    Odometer {
        depth: u32,
        p: f64,
        d: usize,
    },
    /// Translation on ℤ^{|active|} driven only by the active axes of ℤᵈ.
    Stabilizer {
        d: usize,
        active: Vec<usize>,
    },
    DisjointUnion {
        left: Box<ZooSpec>,
        right: Box<ZooSpec>,
    },
}

/// Declared Hopf type of a builder.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GroundTruth {
    Conservative,
    Dissipative,
    Mixed { parts: Vec<(String, GroundTruth)> },
}

impl fmt::Display for GroundTruth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundTruth::Conservative => f.write_str("conservative"),
            GroundTruth::Dissipative => f.write_str("dissipative"),
            GroundTruth::Mixed { parts } => {
                f.write_str("mixed(")?;
                for (i, (name, truth)) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{name}: {truth}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl ZooSpec {
    pub fn name(&self) -> String {
        match self {
            ZooSpec::Cyclic { sizes, .. } => format!(
                "cyclic({})",
                sizes.iter().map(|n| n.to_string()).collect::<Vec<_>>().join("x")
            ),
            ZooSpec::Translation { tau, d } => format!("translation(|W|={}, d={d})", tau.len()),
            ZooSpec::Odometer { depth, p, d } => format!("odometer(K={depth}, p={p}, d={d})"),
            ZooSpec::Stabilizer { d, active } => format!("stabilizer(d={d}, active={active:?})"),
            ZooSpec::DisjointUnion { left, right } => {
                format!("disjoint_union({}, {})", left.name(), right.name())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ZooSpec::Cyclic { sizes, .. } => sizes.len(),
            ZooSpec::Translation { d, .. } | ZooSpec::Odometer { d, .. } | ZooSpec::Stabilizer { d, .. } => *d,
            ZooSpec::DisjointUnion { left, .. } => left.dim(),
        }
    }
}

/// The six canonical fixtures.
pub const FIXTURES: [&str; 6] = ["E2", "C4", "TR1", "ST2", "OD3", "MIX"];

pub fn fixture_spec(name: &str) -> Option<ZooSpec> {
    Some(match name {
        "E2" => ZooSpec::Cyclic {
            sizes: vec![2],
            weights: Some(vec![vec![1.0, 2.0]]),
        },
        "C4" => ZooSpec::Cyclic {
            sizes: vec![4],
            weights: None,
        },
        "TR1" => ZooSpec::Translation { tau: vec![1.0], d: 1 },
        "ST2" => ZooSpec::Stabilizer { d: 2, active: vec![0] },
        "OD3" => ZooSpec::Odometer { depth: 3, p: 0.4, d: 1 },
        "MIX" => ZooSpec::DisjointUnion {
            left: Box::new(fixture_spec("C4")?),
            right: Box::new(fixture_spec("TR1")?),
        },
        _ => return None,
    })
}

/// Builds one of [`FIXTURES`].
pub fn fixture(name: &str) -> Result<NsAction> {
    let spec = fixture_spec(name).ok_or_else(|| Error::InvalidInput(format!("unknown fixture '{name}'")))?;
    Ok(build(&spec)?.renamed(name))
}

pub fn build(spec: &ZooSpec) -> Result<NsAction> {
    match spec {
        ZooSpec::Cyclic { sizes, weights } => cyclic(sizes, weights.as_deref()),
        ZooSpec::Translation { tau, d } => {
            let w = translation_base(tau)?;
            build_translation_action(&w, *d)
        }
        ZooSpec::Odometer { depth, p, d } => odometer(*depth, *p, *d),
        ZooSpec::Stabilizer { d, active } => stabilizer(*d, active),
        ZooSpec::DisjointUnion { left, right } => disjoint_union(&build(left)?, &build(right)?),
    }
}

pub fn ground_truth(spec: &ZooSpec) -> GroundTruth {
    match spec {
        ZooSpec::Cyclic { .. } | ZooSpec::Odometer { .. } | ZooSpec::Stabilizer { .. } => GroundTruth::Conservative,
        ZooSpec::Translation { .. } => GroundTruth::Dissipative,
        ZooSpec::DisjointUnion { left, right } => GroundTruth::Mixed {
            parts: vec![(left.name(), ground_truth(left)), (right.name(), ground_truth(right))],
        },
    }
}

/// Declared truth for a single atom (unions dispatch on the tag coordinate).
pub fn atom_truth(spec: &ZooSpec, atom: &Atom) -> Option<GroundTruth> {
    match spec {
        ZooSpec::DisjointUnion { left, right } => {
            let (&tag, rest) = atom.coords().split_first()?;
            let inner = Atom(rest.to_vec());
            match tag {
                0 => atom_truth(left, &inner),
                1 => atom_truth(right, &inner),
                _ => None,
            }
        }
        other => Some(ground_truth(other)),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BuilderInfo {
    pub name: &'static str,
    pub params: &'static str,
    pub ground_truth: &'static str,
}

pub fn list_builders() -> Vec<BuilderInfo> {
    vec![
        BuilderInfo {
            name: "cyclic",
            params: "N: sizes per axis joined by 'x' (each >= 1); weights: optional per-axis atom weights, ':'-separated within an axis, '/' between axes",
            ground_truth: "conservative",
        },
        BuilderInfo {
            name: "translation",
            params: "tau: ':'-separated positive weights of the base points W; d: dimension (default 1)",
            ground_truth: "dissipative",
        },
        BuilderInfo {
            name: "odometer",
            params: "K: depth >= 1; p: probability of digit 1, 0 < p < 1, p != 1/2; d: dimension (default 1)",
            ground_truth: "conservative",
        },
        BuilderInfo {
            name: "stabilizer",
            params: "d: dimension; active: ':'-separated active axes (at least one axis must stay inactive)",
            ground_truth: "conservative",
        },
        BuilderInfo {
            name: "disjoint_union",
            params: "left, right: nested builder specs of equal dimension (JSON only)",
            ground_truth: "mixed",
        },
    ]
}

fn cyclic(sizes: &[i64], weights: Option<&[Vec<f64>]>) -> Result<NsAction> {
    if sizes.is_empty() {
        return Err(Error::InvalidParameter("cyclic needs at least one axis".into()));
    }
    if let Some(&bad) = sizes.iter().find(|&&n| n <= 0) {
        return Err(Error::InvalidParameter(format!("cyclic size N={bad} must be positive")));
    }
    let d = sizes.len();
    let axis_weights: Vec<Vec<f64>> = match weights {
        None => sizes.iter().map(|&n| vec![1.0; n as usize]).collect(),
        Some(w) => {
            if w.len() != d || w.iter().zip(sizes).any(|(wi, &n)| wi.len() != n as usize) {
                return Err(Error::InvalidParameter(
                    "cyclic weights must give one weight per atom on every axis".into(),
                ));
            }
            w.to_vec()
        }
    };
    let mut atoms = vec![(Vec::new(), 1.0)];
    for (axis, &n) in sizes.iter().enumerate() {
        let mut next = Vec::with_capacity(atoms.len() * n as usize);
        for (coords, weight) in &atoms {
            for c in 0..n {
                let mut v: Vec<i64> = coords.clone();
                v.push(c);
                next.push((v, weight * axis_weights[axis][c as usize]));
            }
        }
        atoms = next;
    }
    let space = AtomSpace::finite(
        format!(
            "cyclic({})",
            sizes.iter().map(|n| n.to_string()).collect::<Vec<_>>().join("x")
        ),
        atoms.into_iter().map(|(v, w)| (Atom(v), w)),
    )?;
    let gens = sizes
        .iter()
        .enumerate()
        .map(|(axis, &n)| {
            let shift = move |a: &Atom, k: i64| {
                let mut v = a.0.clone();
                let c = v.get_mut(axis)?;
                *c = (*c + k).rem_euclid(n);
                Some(Atom(v))
            };
            Generator::new(Arc::new(move |a| shift(a, 1)), Arc::new(move |a| shift(a, -1))).with_shift(Arc::new(shift))
        })
        .collect();
    let action = NsAction::new(space.name().to_string(), space, gens)?;
    Ok(action.with_freeness(Arc::new(|_| Some(false))))
}

fn translation_base(tau: &[f64]) -> Result<AtomSpace> {
    if tau.is_empty() {
        return Err(Error::InvalidParameter(
            "translation needs at least one base point".into(),
        ));
    }
    if tau.len() == 1 {
        // A single base point contributes no coordinate: atoms are plain ℤᵈ.
        AtomSpace::finite("W", [(Atom(Vec::new()), tau[0])])
    } else {
        AtomSpace::finite("W", tau.iter().enumerate().map(|(i, &w)| (Atom::scalar(i as i64), w)))
    }
    .map_err(|e| Error::InvalidParameter(e.to_string()))
}

fn odometer(depth: u32, p: f64, d: usize) -> Result<NsAction> {
    if depth == 0 || depth > 20 {
        return Err(Error::InvalidParameter(format!(
            "odometer depth K={depth} must be in 1..=20"
        )));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "odometer p={p} must satisfy 0 < p < 1"
        )));
    }
    if p == 0.5 {
        return Err(Error::InvalidParameter(
            "odometer p=1/2 is measure preserving; the nonsingular odometer needs p != 1/2".into(),
        ));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("odometer dimension must be positive".into()));
    }
    let k = depth as usize;
    let period = 1i64 << depth;
    let digits = |mut value: i64| -> Vec<i64> {
        (0..k)
            .map(|_| {
                let b = value & 1;
                value >>= 1;
                b
            })
            .collect()
    };
    let total = (period as usize).pow(d as u32);
    let mut atoms = Vec::with_capacity(total);
    for mut idx in 0..total {
        let mut bits = Vec::with_capacity(k * d);
        let mut weight = 1.0;
        for _ in 0..d {
            let block = digits((idx % period as usize) as i64);
            idx /= period as usize;
            for &b in &block {
                weight *= if b == 1 { p } else { 1.0 - p };
            }
            bits.extend(block);
        }
        atoms.push((Atom(bits), weight));
    }
    let space = AtomSpace::finite(format!("odometer(K={depth}, p={p}, d={d})"), atoms)?;
    let gens = (0..d)
        .map(|axis| {
            // add-with-carry, least significant digit first
            let shift = move |a: &Atom, steps: i64| {
                let block = a.0.get(axis * k..(axis + 1) * k)?;
                let value: i64 = block.iter().rev().fold(0, |acc, &b| (acc << 1) | b);
                let next = (value + steps).rem_euclid(period);
                let mut v = a.0.clone();
                for (j, slot) in v[axis * k..(axis + 1) * k].iter_mut().enumerate() {
                    *slot = (next >> j) & 1;
                }
                Some(Atom(v))
            };
            Generator::new(Arc::new(move |a| shift(a, 1)), Arc::new(move |a| shift(a, -1))).with_shift(Arc::new(shift))
        })
        .collect();
    let action = NsAction::new(space.name().to_string(), space, gens)?;
    Ok(action.with_freeness(Arc::new(|_| Some(false))))
}

fn stabilizer(d: usize, active: &[usize]) -> Result<NsAction> {
    if d == 0 {
        return Err(Error::InvalidParameter("stabilizer dimension must be positive".into()));
    }
    let mut sorted = active.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != active.len() || sorted.iter().any(|&i| i >= d) {
        return Err(Error::InvalidParameter(format!(
            "active axes {active:?} must be distinct and below d={d}"
        )));
    }
    if sorted.len() == d {
        return Err(Error::InvalidParameter(
            "stabilizer needs at least one inactive axis (all-active is a translation)".into(),
        ));
    }
    let k = sorted.len();
    let space = AtomSpace::lazy(
        format!("Z^{k}"),
        Arc::new(move |a: &Atom| (a.len() == k).then_some(1.0)),
        Some(Arc::new(move |m: usize| lattice_cube(k, m as i64))),
        f64::INFINITY,
    )?;
    let gens = (0..d)
        .map(|axis| match sorted.iter().position(|&i| i == axis) {
            None => Generator::identity(),
            Some(coord) => coordinate_shift(coord),
        })
        .collect();
    let action = NsAction::new(format!("stabilizer(d={d}, active={active:?})"), space, gens)?;
    Ok(action.with_freeness(Arc::new(|_| Some(false))))
}

/// `(x, k) ↦ x + k·e_coord`.
pub(crate) fn coordinate_shift(coord: usize) -> Generator {
    let shift = move |a: &Atom, k: i64| {
        let mut v = a.0.clone();
        *v.get_mut(coord)? += k;
        Some(Atom(v))
    };
    Generator::new(Arc::new(move |a| shift(a, 1)), Arc::new(move |a| shift(a, -1))).with_shift(Arc::new(shift))
}

/// All points of `[−m, m]^k`, lexicographic.
pub(crate) fn lattice_cube(k: usize, m: i64) -> Vec<Atom> {
    let side = (2 * m + 1) as usize;
    let total = side.pow(k as u32);
    (0..total)
        .map(|mut idx| {
            let mut v = vec![0i64; k];
            for slot in v.iter_mut().rev() {
                *slot = (idx % side) as i64 - m;
                idx /= side;
            }
            Atom(v)
        })
        .collect()
}

/// Tags atoms of `left` with 0 and atoms of `right` with 1.
pub fn disjoint_union(left: &NsAction, right: &NsAction) -> Result<NsAction> {
    if left.dim() != right.dim() {
        return Err(Error::InvalidParameter(format!(
            "disjoint union needs equal dimensions, got {} and {}",
            left.dim(),
            right.dim()
        )));
    }
    let parts = [left.clone(), right.clone()];
    let split = |a: &Atom| -> Option<(usize, Atom)> {
        let (&tag, rest) = a.coords().split_first()?;
        (tag == 0 || tag == 1).then(|| (tag as usize, Atom(rest.to_vec())))
    };
    let name = format!("{} + {}", left.name(), right.name());
    let space = if left.space().is_finite() && right.space().is_finite() {
        let mut atoms = Vec::new();
        for (tag, part) in parts.iter().enumerate() {
            for a in part.space().atoms().unwrap_or_default() {
                atoms.push((Atom::tagged(tag as i64, &a), part.space().weight(&a)?));
            }
        }
        AtomSpace::finite(name.clone(), atoms)?
    } else {
        let weight_parts = parts.clone();
        let exhaustion_parts = parts.clone();
        AtomSpace::lazy(
            name.clone(),
            Arc::new(move |a: &Atom| {
                let (tag, inner) = split(a)?;
                weight_parts[tag].space().weight(&inner).ok()
            }),
            Some(Arc::new(move |m: usize| {
                exhaustion_parts
                    .iter()
                    .enumerate()
                    .flat_map(|(tag, p)| {
                        p.space()
                            .exhaustion(m)
                            .into_iter()
                            .map(move |a| Atom::tagged(tag as i64, &a))
                    })
                    .collect()
            })),
            left.space().total_mass() + right.space().total_mass(),
        )?
    };
    let gens = (0..left.dim())
        .map(|axis| {
            let p = parts.clone();
            let forward = {
                let p = p.clone();
                move |a: &Atom| {
                    let (tag, inner) = split(a)?;
                    Some(Atom::tagged(tag as i64, &p[tag].generators()[axis].forward(&inner)?))
                }
            };
            let backward = {
                let p = p.clone();
                move |a: &Atom| {
                    let (tag, inner) = split(a)?;
                    Some(Atom::tagged(tag as i64, &p[tag].generators()[axis].backward(&inner)?))
                }
            };
            let shift = move |a: &Atom, k: i64| {
                let (tag, inner) = split(a)?;
                Some(Atom::tagged(tag as i64, &p[tag].generators()[axis].power(&inner, k)?))
            };
            Generator::new(Arc::new(forward), Arc::new(backward)).with_shift(Arc::new(shift))
        })
        .collect();
    let limit = left.explore_limit().max(right.explore_limit());
    let free_parts = parts.clone();
    Ok(NsAction::new(name, space, gens)?
        .with_explore_limit(limit)
        .with_freeness(Arc::new(move |a| {
            let (tag, inner) = split(a)?;
            free_parts[tag].declared_free(&inner)
        })))
}

/// Parses `k=v,k=v` CLI-style parameters for a builder into a spec.
pub fn spec_from_params(builder: &str, params: &BTreeMap<String, String>) -> Result<ZooSpec> {
    let get = |key: &str| params.get(key).map(String::as_str);
    let need = |key: &str| {
        get(key).ok_or_else(|| Error::InvalidParameter(format!("builder '{builder}' needs parameter '{key}'")))
    };
    let int = |key: &str, v: &str| {
        v.trim()
            .parse::<i64>()
            .map_err(|_| Error::InvalidParameter(format!("parameter {key}='{v}' is not an integer")))
    };
    let real = |key: &str, v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|_| Error::InvalidParameter(format!("parameter {key}='{v}' is not a number")))
    };
    let dim = |default: usize| -> Result<usize> {
        match get("d") {
            None => Ok(default),
            Some(v) => usize::try_from(int("d", v)?)
                .map_err(|_| Error::InvalidParameter(format!("parameter d='{v}' must be positive"))),
        }
    };
    let allowed: &[&str] = match builder {
        "cyclic" => &["N", "weights"],
        "translation" => &["tau", "d"],
        "odometer" => &["K", "p", "d"],
        "stabilizer" => &["d", "active"],
        other => {
            if let Some(spec) = fixture_spec(other) {
                if let Some(k) = params.keys().next() {
                    return Err(Error::InvalidParameter(format!(
                        "fixture '{other}' takes no parameter '{k}'"
                    )));
                }
                return Ok(spec);
            }
            return Err(Error::InvalidParameter(format!("unknown zoo builder '{other}'")));
        }
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::InvalidParameter(format!(
            "builder '{builder}' has no parameter '{k}'"
        )));
    }
    Ok(match builder {
        "cyclic" => {
            let sizes = need("N")?.split('x').map(|v| int("N", v)).collect::<Result<Vec<_>>>()?;
            let weights = match get("weights") {
                None => None,
                Some(w) => Some(
                    w.split('/')
                        .map(|axis| axis.split(':').map(|v| real("weights", v)).collect::<Result<Vec<_>>>())
                        .collect::<Result<Vec<_>>>()?,
                ),
            };
            ZooSpec::Cyclic { sizes, weights }
        }
        "translation" => ZooSpec::Translation {
            tau: match get("tau") {
                None => vec![1.0],
                Some(t) => t.split(':').map(|v| real("tau", v)).collect::<Result<Vec<_>>>()?,
            },
            d: dim(1)?,
        },
        "odometer" => {
            let k = int("K", need("K")?)?;
            ZooSpec::Odometer {
                depth: u32::try_from(k)
                    .map_err(|_| Error::InvalidParameter(format!("parameter K={k} must be positive")))?,
                p: real("p", need("p")?)?,
                d: dim(1)?,
            }
        }
        "stabilizer" => ZooSpec::Stabilizer {
            d: dim(2)?,
            active: match get("active") {
                None => vec![0],
                Some(a) if a.trim().is_empty() => Vec::new(),
                Some(a) => a
                    .split(':')
                    .map(|v| {
                        usize::try_from(int("active", v)?)
                            .map_err(|_| Error::InvalidParameter(format!("active axis '{v}' must be >= 0")))
                    })
                    .collect::<Result<Vec<_>>>()?,
            },
        },
        _ => unreachable!(),
    })
}
