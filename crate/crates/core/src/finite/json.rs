//! JSON forms: `{"points": [...], "opens": [[...], ...]}` for spaces and
//! `{"graph": {"a": "x", ...}}` (optionally with `source`/`target`) for maps.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bits::{bit, bits};
use crate::error::{Error, Result};

use super::{FiniteMap, FiniteSpace};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceJson {
    pub points: Vec<String>,
    /// Any family of opens; the lattice it generates is used.
    pub opens: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SpaceJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<SpaceJson>,
    pub graph: BTreeMap<String, String>,
}

fn lookup(points: &[String], name: &str) -> Result<usize> {
    points.iter().position(|p| p == name).ok_or_else(|| Error::Schema(format!("unknown point {name:?}")))
}

impl SpaceJson {
    pub fn to_space(&self) -> Result<FiniteSpace> {
        let mut sorted = self.points.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.points.len() {
            return Err(Error::Schema("duplicate point names".into()));
        }
        let subbasis = self
            .opens
            .iter()
            .map(|o| o.iter().try_fold(0u64, |m, p| Ok(m | bit(lookup(&self.points, p)?))))
            .collect::<Result<Vec<u64>>>()?;
        FiniteSpace::new(self.points.clone(), &subbasis)
    }

    pub fn from_space(space: &FiniteSpace) -> Self {
        SpaceJson {
            points: space.labels().to_vec(),
            opens: space.opens().iter().map(|&o| bits(o).map(|x| space.label(x).to_string()).collect()).collect(),
        }
    }
}

impl MapJson {
    /// Resolves the map; missing `source`/`target` default to `ambient`.
    pub fn to_map(&self, ambient: Option<&FiniteSpace>) -> Result<FiniteMap> {
        let resolve = |s: &Option<SpaceJson>| -> Result<FiniteSpace> {
            match (s, ambient) {
                (Some(j), _) => j.to_space(),
                (None, Some(a)) => Ok(a.clone()),
                (None, None) => Err(Error::Schema("map needs a source and target space".into())),
            }
        };
        let source = resolve(&self.source)?;
        let target = resolve(&self.target)?;
        let mut graph = vec![usize::MAX; source.len()];
        for (a, b) in &self.graph {
            let x = lookup(source.labels(), a)?;
            graph[x] = lookup(target.labels(), b)?;
        }
        if let Some(x) = graph.iter().position(|&y| y == usize::MAX) {
            return Err(Error::Schema(format!("graph misses point {:?}", source.label(x))));
        }
        FiniteMap::new(source, target, graph)
    }

    pub fn from_map(f: &FiniteMap) -> Self {
        MapJson {
            source: Some(SpaceJson::from_space(f.source())),
            target: Some(SpaceJson::from_space(f.target())),
            graph: (0..f.source().len())
                .map(|x| (f.source().label(x).to_string(), f.target().label(f.apply(x)).to_string()))
                .collect(),
        }
    }
}

pub fn space_from_json(text: &str) -> Result<FiniteSpace> {
    let j: SpaceJson = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    j.to_space()
}

pub fn space_to_json(space: &FiniteSpace) -> String {
    serde_json::to_string(&SpaceJson::from_space(space)).expect("serializable")
}

pub fn map_from_json(text: &str, ambient: Option<&FiniteSpace>) -> Result<FiniteMap> {
    let j: MapJson = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    j.to_map(ambient)
}

pub fn map_to_json(f: &FiniteMap) -> String {
    serde_json::to_string(&MapJson::from_map(f)).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let s = FiniteSpace::chain(3).with_labels(vec!["a".into(), "b".into(), "c".into()]).unwrap();
        let back = space_from_json(&space_to_json(&s)).unwrap();
        assert_eq!(back, s);
        let f = FiniteMap::identity(&s);
        assert_eq!(map_from_json(&map_to_json(&f), None).unwrap(), f);
    }

    #[test]
    fn sierpinski_from_text() {
        let s = space_from_json(r#"{"points": ["0", "1"], "opens": [["1"]]}"#).unwrap();
        assert_eq!(s, FiniteSpace::sierpinski());
        let m = map_from_json(r#"{"graph": {"0": "1", "1": "1"}}"#, Some(&s)).unwrap();
        assert_eq!(m.graph(), &[1, 1]);
    }

    #[test]
    fn malformed_is_schema_error() {
        assert!(matches!(space_from_json("{"), Err(Error::Schema(_))));
        assert!(matches!(space_from_json(r#"{"points": ["a"], "opens": [["b"]]}"#), Err(Error::Schema(_))));
    }
}
