//! JSON form of a network.
//!
//! CPT rows are keyed by the comma-joined parent states in declared parent
//! order; a root variable has the single key `""`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Cpt, Network, NetworkDef, Variable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub variables: Vec<Variable>,
    pub cpts: Vec<CptFile>,
    pub hypothesis_var: String,
    pub evidence_vars: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CptFile {
    pub child: String,
    #[serde(default)]
    pub parents: Vec<String>,
    pub rows: BTreeMap<String, Vec<f64>>,
}

impl NetworkFile {
    pub fn from_def(def: &NetworkDef) -> Self {
        let states: BTreeMap<&str, &[String]> = def
            .variables
            .iter()
            .map(|v| (v.id.as_str(), v.states.as_slice()))
            .collect();
        let cpts = def
            .cpts
            .iter()
            .map(|cpt| {
                let keys = parent_keys(&cpt.parents, &states).unwrap_or_default();
                CptFile {
                    child: cpt.child.clone(),
                    parents: cpt.parents.clone(),
                    rows: keys.into_iter().zip(cpt.table.iter().cloned()).collect(),
                }
            })
            .collect();
        NetworkFile {
            variables: def.variables.clone(),
            cpts,
            hypothesis_var: def.hypothesis_var.clone(),
            evidence_vars: def.evidence_vars.clone(),
        }
    }

    /// Converts to the tabular definition without validating it.
    ///
    /// Fails only when the row keys cannot be matched to parent states.
    pub fn to_def(&self) -> Result<NetworkDef> {
        let states: BTreeMap<&str, &[String]> = self
            .variables
            .iter()
            .map(|v| (v.id.as_str(), v.states.as_slice()))
            .collect();
        let mut cpts = Vec::with_capacity(self.cpts.len());
        for cpt in &self.cpts {
            let keys = parent_keys(&cpt.parents, &states).ok_or_else(|| {
                Error::InvalidModel(format!("CPT `{}` names an undeclared parent", cpt.child))
            })?;
            if let Some(extra) = cpt.rows.keys().find(|k| !keys.contains(k)) {
                return Err(Error::InvalidModel(format!(
                    "CPT `{}` has a row for unknown parent states `{extra}`",
                    cpt.child
                )));
            }
            let table = keys
                .iter()
                .map(|k| {
                    cpt.rows.get(k).cloned().ok_or_else(|| {
                        Error::InvalidModel(format!("CPT `{}` is missing row `{k}`", cpt.child))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            cpts.push(Cpt {
                child: cpt.child.clone(),
                parents: cpt.parents.clone(),
                table,
            });
        }
        Ok(NetworkDef {
            variables: self.variables.clone(),
            cpts,
            hypothesis_var: self.hypothesis_var.clone(),
            evidence_vars: self.evidence_vars.clone(),
        })
    }

    pub fn into_network(self) -> Result<Network> {
        Network::new(self.to_def()?)
    }
}

/// Row keys in table order, or `None` if a parent is undeclared.
fn parent_keys(parents: &[String], states: &BTreeMap<&str, &[String]>) -> Option<Vec<String>> {
    let mut keys = vec![String::new()];
    for (i, p) in parents.iter().enumerate() {
        let ss = states.get(p.as_str())?;
        keys = keys
            .iter()
            .flat_map(|k| {
                ss.iter().map(move |s| {
                    if i == 0 {
                        s.clone()
                    } else {
                        format!("{k},{s}")
                    }
                })
            })
            .collect();
    }
    Some(keys)
}

impl Serialize for Network {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        NetworkFile::from_def(self.def()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Network {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        NetworkFile::deserialize(d)?
            .into_network()
            .map_err(serde::de::Error::custom)
    }
}
