//! JSON documents for spaces and actions.
//!
//! A finite space or action can be given explicitly:
//!
//! ```json
//! {"atoms": [0, 1], "weights": [1.0, 2.0], "generators": [[1, 0]],
//!  "ground_truth": "conservative"}
//! ```
//!
//! where each generator lists the image of every atom, in the order of
//! `atoms`. Anything lazy is named through a zoo builder,
//! `{"builder": "translation", "tau": [1.0], "d": 1}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::action::{Generator, NsAction};
use crate::error::{Error, Result};
use crate::measure::{Atom, AtomSpace};
use crate::zoo::{self, GroundTruth, ZooSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitSpace {
    pub atoms: Vec<Atom>,
    pub weights: Vec<f64>,
}

impl ExplicitSpace {
    pub fn build(&self) -> Result<AtomSpace> {
        if self.atoms.len() != self.weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} atoms but {} weights",
                self.atoms.len(),
                self.weights.len()
            )));
        }
        AtomSpace::finite("explicit", self.atoms.iter().cloned().zip(self.weights.iter().copied()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceDoc {
    Zoo(ZooSpec),
    Explicit(ExplicitSpace),
}

impl SpaceDoc {
    pub fn build(&self) -> Result<AtomSpace> {
        match self {
            SpaceDoc::Zoo(spec) => Ok(zoo::build(spec)?.space().clone()),
            SpaceDoc::Explicit(e) => e.build(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeclaredTruth {
    Conservative,
    Dissipative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitAction {
    pub atoms: Vec<Atom>,
    pub weights: Vec<f64>,
    pub generators: Vec<Vec<Atom>>,
    #[serde(default)]
    pub ground_truth: Option<DeclaredTruth>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ActionDoc {
    Zoo(ZooSpec),
    Explicit(ExplicitAction),
}

impl ActionDoc {
    pub fn build(&self) -> Result<NsAction> {
        match self {
            ActionDoc::Zoo(spec) => zoo::build(spec),
            ActionDoc::Explicit(e) => {
                let space = ExplicitSpace {
                    atoms: e.atoms.clone(),
                    weights: e.weights.clone(),
                }
                .build()?;
                let gens = e
                    .generators
                    .iter()
                    .enumerate()
                    .map(|(i, images)| {
                        if images.len() != e.atoms.len() {
                            return Err(Error::InvalidInput(format!(
                                "generator {} lists {} images for {} atoms",
                                i + 1,
                                images.len(),
                                e.atoms.len()
                            )));
                        }
                        let table: BTreeMap<Atom, Atom> = e.atoms.iter().cloned().zip(images.iter().cloned()).collect();
                        Generator::from_permutation(table)
                    })
                    .collect::<Result<Vec<_>>>()?;
                NsAction::new("explicit", space, gens)
            }
        }
    }

    /// Declared truth for one atom, if the document states one.
    pub fn atom_truth(&self, atom: &Atom) -> Option<GroundTruth> {
        match self {
            ActionDoc::Zoo(spec) => zoo::atom_truth(spec, atom),
            ActionDoc::Explicit(e) => e.ground_truth.map(|t| match t {
                DeclaredTruth::Conservative => GroundTruth::Conservative,
                DeclaredTruth::Dissipative => GroundTruth::Dissipative,
            }),
        }
    }
}
