//! Purely atomic σ-finite measure spaces and finitely supported nonnegative
//! functions on them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Number of exhaustion levels sampled when validating a lazy space.
const EXHAUSTION_PROBE: usize = 8;

/// Opaque discrete atom identifier.
///
/// Atoms are short integer tuples ordered lexicographically. A one-coordinate
/// atom serializes as a bare integer, anything else as an array.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Atom(pub Vec<i64>);

impl Atom {
    pub fn scalar(k: i64) -> Self {
        Atom(vec![k])
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Prepend a tag coordinate (used by disjoint unions).
    pub fn tagged(tag: i64, inner: &Atom) -> Self {
        let mut v = Vec::with_capacity(inner.len() + 1);
        v.push(tag);
        v.extend_from_slice(&inner.0);
        Atom(v)
    }

    pub fn max_abs_coord(&self) -> Option<i64> {
        self.0.iter().copied().max_by_key(|c| c.unsigned_abs())
    }
}

impl From<i64> for Atom {
    fn from(k: i64) -> Self {
        Atom::scalar(k)
    }
}

impl From<Vec<i64>> for Atom {
    fn from(v: Vec<i64>) -> Self {
        Atom(v)
    }
}

impl fmt::Display for Atom {
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

impl std::str::FromStr for Atom {
    type Err = Error;

    /// Parses `7`, `-3`, `(1,0,1)` or `()`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidInput(format!("cannot parse atom '{s}'"));
        if let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
            if inner.trim().is_empty() {
                return Ok(Atom(Vec::new()));
            }
            inner
                .split(',')
                .map(|c| c.trim().parse::<i64>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()
                .map(Atom)
        } else {
            s.parse::<i64>().map(Atom::scalar).map_err(|_| bad())
        }
    }
}

impl Serialize for Atom {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.len() == 1 {
            serializer.serialize_i64(self.0[0])
        } else {
            self.0.serialize(serializer)
        }
    }
}

impl<'de> Deserialize<'de> for Atom {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Scalar(i64),
            Tuple(Vec<i64>),
        }
        Ok(match Repr::deserialize(deserializer)? {
            Repr::Scalar(k) => Atom::scalar(k),
            Repr::Tuple(v) => Atom(v),
        })
    }
}

pub type WeightRule = Arc<dyn Fn(&Atom) -> Option<f64> + Send + Sync>;
pub type ExhaustionRule = Arc<dyn Fn(usize) -> Vec<Atom> + Send + Sync>;

#[derive(Clone)]
enum Universe {
    Finite(BTreeMap<Atom, f64>),
    Lazy {
        weight: WeightRule,
        exhaustion: ExhaustionRule,
        total_mass: f64,
    },
}

/// A σ-finite purely atomic measure space.
///
/// Finite spaces store their atoms explicitly and use the trivial exhaustion
/// `S_m = S`. Infinite spaces are rule-defined: a weight rule answering
/// membership and mass, plus a monotone exhaustion by finite atom sets.
#[derive(Clone)]
pub struct AtomSpace {
    name: String,
    universe: Arc<Universe>,
}

impl fmt::Debug for AtomSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AtomSpace")
            .field("name", &self.name)
            .field("finite", &self.is_finite())
            .finish()
    }
}

impl AtomSpace {
    /// Builds a finite space from explicit atoms and weights.
    pub fn finite<I>(name: impl Into<String>, atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Atom, f64)>,
    {
        let mut map = BTreeMap::new();
        for (atom, weight) in atoms {
            check_weight(&atom, weight)?;
            if map.insert(atom.clone(), weight).is_some() {
                return Err(Error::Construction(format!("duplicate atom {atom}")));
            }
        }
        if map.is_empty() {
            return Err(Error::Construction("a finite space needs at least one atom".into()));
        }
        Ok(AtomSpace {
            name: name.into(),
            universe: Arc::new(Universe::Finite(map)),
        })
    }

    /// Builds a lazily described, typically infinite, space.
    ///
    /// The exhaustion is mandatory. The first few levels are probed for
    /// monotonicity and for positive weights on every listed atom.
    pub fn lazy(
        name: impl Into<String>,
        weight: WeightRule,
        exhaustion: Option<ExhaustionRule>,
        total_mass: f64,
    ) -> Result<Self> {
        let name = name.into();
        let exhaustion =
            exhaustion.ok_or_else(|| Error::Construction(format!("lazy space '{name}' has no exhaustion rule")))?;
        let mut previous: BTreeSet<Atom> = BTreeSet::new();
        for m in 0..=EXHAUSTION_PROBE {
            let level: BTreeSet<Atom> = exhaustion(m).into_iter().collect();
            if !previous.is_subset(&level) {
                return Err(Error::Construction(format!(
                    "exhaustion of '{name}' is not monotone at level {m}"
                )));
            }
            for atom in &level {
                match weight(atom) {
                    Some(w) => check_weight(atom, w)?,
                    None => {
                        return Err(Error::Construction(format!(
                            "exhaustion level {m} of '{name}' lists atom {atom} outside the universe"
                        )))
                    }
                }
            }
            previous = level;
        }
        Ok(AtomSpace {
            name,
            universe: Arc::new(Universe::Lazy {
                weight,
                exhaustion,
                total_mass,
            }),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_finite(&self) -> bool {
        matches!(*self.universe, Universe::Finite(_))
    }

    /// All atoms of a finite space in sorted order.
    pub fn atoms(&self) -> Option<Vec<Atom>> {
        match &*self.universe {
            Universe::Finite(map) => Some(map.keys().cloned().collect()),
            Universe::Lazy { .. } => None,
        }
    }

    pub fn len(&self) -> Option<usize> {
        match &*self.universe {
            Universe::Finite(map) => Some(map.len()),
            Universe::Lazy { .. } => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.weight_opt(atom).is_some()
    }

    fn weight_opt(&self, atom: &Atom) -> Option<f64> {
        match &*self.universe {
            Universe::Finite(map) => map.get(atom).copied(),
            Universe::Lazy { weight, .. } => weight(atom),
        }
    }

    /// The measure `μ({atom})`.
    pub fn weight(&self, atom: &Atom) -> Result<f64> {
        let w = self.weight_opt(atom).ok_or_else(|| Error::UnknownAtom(atom.clone()))?;
        check_weight(atom, w)?;
        Ok(w)
    }

    /// The exhaustion set `S_m`, sorted.
    pub fn exhaustion(&self, m: usize) -> Vec<Atom> {
        match &*self.universe {
            Universe::Finite(map) => map.keys().cloned().collect(),
            Universe::Lazy { exhaustion, .. } => {
                let mut v = exhaustion(m);
                v.sort();
                v.dedup();
                v
            }
        }
    }

    /// Total mass: the exact sum for finite spaces, the declared value
    /// (infinite unless stated otherwise) for lazy ones.
    pub fn total_mass(&self) -> f64 {
        match &*self.universe {
            Universe::Finite(map) => map.values().sum(),
            Universe::Lazy { total_mass, .. } => *total_mass,
        }
    }
}

fn check_weight(atom: &Atom, weight: f64) -> Result<()> {
    if weight.is_finite() && weight > 0.0 {
        Ok(())
    } else {
        Err(Error::BadWeight {
            atom: atom.clone(),
            weight,
        })
    }
}

/// A finitely supported nonnegative function with its cached L¹ norm.
///
/// Only strictly positive values are stored, so the key set is the support.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct L1Function {
    values: BTreeMap<Atom, f64>,
    norm: f64,
}

impl L1Function {
    pub fn new<I>(space: &AtomSpace, values: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Atom, f64)>,
    {
        let mut map = BTreeMap::new();
        for (atom, value) in values {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::BadValue { atom, value });
            }
            if !space.contains(&atom) {
                return Err(Error::UnknownAtom(atom));
            }
            if value > 0.0 {
                *map.entry(atom).or_insert(0.0) += value;
            }
        }
        let norm = sorted_integral(space, &map)?;
        Ok(L1Function { values: map, norm })
    }

    pub fn zero() -> Self {
        L1Function {
            values: BTreeMap::new(),
            norm: 0.0,
        }
    }

    /// Indicator of a finite atom set.
    pub fn indicator<'a, I>(space: &AtomSpace, atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Atom>,
    {
        Self::new(space, atoms.into_iter().map(|a| (a.clone(), 1.0)))
    }

    pub fn get(&self, atom: &Atom) -> f64 {
        self.values.get(atom).copied().unwrap_or(0.0)
    }

    pub fn support(&self) -> impl Iterator<Item = &Atom> {
        self.values.keys()
    }

    pub fn support_len(&self) -> usize {
        self.values.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Atom, f64)> {
        self.values.iter().map(|(a, v)| (a, *v))
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "scale factor {c} must be finite and nonnegative"
            )));
        }
        if c == 0.0 {
            return Ok(Self::zero());
        }
        Ok(L1Function {
            values: self.values.iter().map(|(a, v)| (a.clone(), v * c)).collect(),
            norm: self.norm * c,
        })
    }

    pub fn sum(&self, other: &L1Function, space: &AtomSpace) -> Result<Self> {
        Self::new(space, self.iter().chain(other.iter()).map(|(a, v)| (a.clone(), v)))
    }

    /// Pointwise `self ≤ other`.
    pub fn le(&self, other: &L1Function) -> bool {
        self.values.iter().all(|(a, v)| *v <= other.get(a))
    }
}

fn sorted_integral(space: &AtomSpace, values: &BTreeMap<Atom, f64>) -> Result<f64> {
    let mut total = 0.0;
    for (atom, value) in values {
        total += value * space.weight(atom)?;
    }
    Ok(total)
}

/// `∫ f dμ`, summed in sorted atom order.
pub fn integrate(space: &AtomSpace, f: &L1Function) -> Result<f64> {
    sorted_integral(space, &f.values)
}

/// A nonnegative integrand that may not be finitely supported.
pub enum Integrand<'a> {
    Finite(L1Function),
    Rule {
        value: Box<dyn Fn(&Atom) -> f64 + 'a>,
        /// `R(ε)`: an exhaustion level outside of which the mass is at most `ε`.
        tail_radius: Option<Box<dyn Fn(f64) -> usize + 'a>>,
    },
}

/// Result of [`truncate_l1`]: `f_ε ≤ f` pointwise with `‖f − f_ε‖ ≤ certified_error`.
#[derive(Clone, Debug)]
pub struct Truncation {
    pub function: L1Function,
    pub radius: Option<usize>,
    pub certified_error: f64,
}

/// Restricts an integrand to the exhaustion set `S_{R(ε)}`.
pub fn truncate_l1(space: &AtomSpace, f: Integrand<'_>, eps: f64) -> Result<Truncation> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidInput(format!("truncation level {eps} must be positive")));
    }
    match f {
        Integrand::Finite(function) => Ok(Truncation {
            function,
            radius: None,
            certified_error: 0.0,
        }),
        Integrand::Rule { value, tail_radius } => {
            if space.is_finite() {
                let atoms = space.exhaustion(0);
                let function = L1Function::new(
                    space,
                    atoms.into_iter().map(|a| {
                        let v = value(&a);
                        (a, v)
                    }),
                )?;
                return Ok(Truncation {
                    function,
                    radius: None,
                    certified_error: 0.0,
                });
            }
            let tail_radius = tail_radius.ok_or_else(|| {
                Error::Unsupported("truncating a rule on an infinite space needs a tail bound".into())
            })?;
            let radius = tail_radius(eps);
            let atoms = space.exhaustion(radius);
            let function = L1Function::new(
                space,
                atoms.into_iter().map(|a| {
                    let v = value(&a);
                    (a, v)
                }),
            )?;
            Ok(Truncation {
                function,
                radius: Some(radius),
                certified_error: eps,
            })
        }
    }
}
