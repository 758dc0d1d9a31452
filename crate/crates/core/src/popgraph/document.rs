use serde::{Deserialize, Serialize};

use super::{Mode, PopulationGraph, UnitId};
use crate::error::{Error, Result};

/// JSON snapshot of a population:
/// `{mode, N, units: [{id, y, size}], edges: [[i, j]], networks: [[ids]]}`.
///
/// Units are listed in id order, edges as `i < j` in lexicographic order and
/// networks by smallest member, so a given population always serialises to
/// the same bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationDocument {
    pub mode: Mode,
    #[serde(rename = "N")]
    pub n: usize,
    pub units: Vec<UnitRecord>,
    pub edges: Vec<[UnitId; 2]>,
    pub networks: Vec<Vec<UnitId>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitRecord {
    pub id: UnitId,
    pub y: u32,
    pub size: u32,
}

impl From<&PopulationGraph> for PopulationDocument {
    fn from(pop: &PopulationGraph) -> Self {
        Self {
            mode: pop.mode(),
            n: pop.len(),
            units: (0..pop.len() as UnitId)
                .map(|id| UnitRecord {
                    id,
                    y: pop.y(id),
                    size: pop.size(id),
                })
                .collect(),
            edges: pop.edges().map(|(a, b)| [a, b]).collect(),
            networks: pop.networks().iter().map(|n| n.members.clone()).collect(),
        }
    }
}

impl PopulationDocument {
    pub fn into_population(self) -> Result<PopulationGraph> {
        if self.units.len() != self.n {
            return Err(Error::Document(format!(
                "`units` lists {} units but N = {}",
                self.units.len(),
                self.n
            )));
        }
        let mut cases = Vec::new();
        let mut sizes = Vec::with_capacity(self.n);
        for (pos, unit) in self.units.iter().enumerate() {
            if unit.id as usize != pos {
                return Err(Error::Document(format!(
                    "units[{pos}] has id {} (units must be listed in id order)",
                    unit.id
                )));
            }
            match self.mode {
                Mode::Person if unit.size != 1 => {
                    return Err(Error::Document(format!("units[{pos}]: person units have size 1")))
                }
                Mode::Person if unit.y > 1 => {
                    return Err(Error::Document(format!("units[{pos}]: y must be 0 or 1")))
                }
                Mode::Household if unit.y != 0 && unit.y != unit.size => {
                    return Err(Error::Document(format!(
                        "units[{pos}]: a case household has y equal to its size"
                    )))
                }
                _ => {}
            }
            if unit.y > 0 {
                cases.push(unit.id);
            }
            sizes.push(unit.size);
        }
        let edges: Vec<(UnitId, UnitId)> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        let sizes = match self.mode {
            Mode::Person => None,
            Mode::Household => Some(sizes),
        };
        let pop = PopulationGraph::from_parts(self.mode, self.n, sizes, &cases, &edges)
            .map_err(|e| Error::Document(e.to_string()))?;

        let mut declared: Vec<Vec<UnitId>> = self
            .networks
            .into_iter()
            .map(|mut members| {
                members.sort_unstable();
                members
            })
            .collect();
        declared.sort();
        let mut derived: Vec<Vec<UnitId>> =
            pop.networks().iter().map(|n| n.members.clone()).collect();
        derived.sort();
        if declared != derived {
            return Err(Error::Document(
                "`networks` is not the partition of cases into connected components".into(),
            ));
        }
        Ok(pop)
    }
}

impl PopulationGraph {
    pub fn to_document(&self) -> PopulationDocument {
        PopulationDocument::from(self)
    }

    /// Compact JSON export.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("population document serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PopulationDocument =
            serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        doc.into_population()
    }
}
