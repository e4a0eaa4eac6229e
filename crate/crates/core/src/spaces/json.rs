use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{CoarseMap, ControlPair, FiniteMetricSpace, GridMetric, Metric, PointId};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MetricJson {
    Matrix { rows: Vec<Vec<u64>> },
    Taxicab,
    Chebyshev,
}

/// Wire form of a space.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceJson {
    pub label: String,
    pub points: Vec<PointId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<BTreeMap<String, Vec<i64>>>,
    pub metric: MetricJson,
}

impl From<&FiniteMetricSpace> for SpaceJson {
    fn from(space: &FiniteMetricSpace) -> Self {
        let coords = space.has_coords().then(|| {
            (0..space.len())
                .map(|i| (space.id(i).to_string(), space.coords(i).unwrap().to_vec()))
                .collect()
        });
        let metric = match space.metric() {
            Metric::Matrix(_) => MetricJson::Matrix {
                rows: (0..space.len())
                    .map(|i| (0..space.len()).map(|j| space.dist(i, j)).collect())
                    .collect(),
            },
            Metric::Lattice(GridMetric::Taxicab) => MetricJson::Taxicab,
            Metric::Lattice(GridMetric::Chebyshev) => MetricJson::Chebyshev,
        };
        SpaceJson {
            label: space.label().to_string(),
            points: space.ids().to_vec(),
            coords,
            metric,
        }
    }
}

impl TryFrom<SpaceJson> for FiniteMetricSpace {
    type Error = Error;

    fn try_from(json: SpaceJson) -> Result<Self> {
        let lattice = match json.metric {
            MetricJson::Matrix { rows } => {
                let space = FiniteMetricSpace::from_matrix(json.label, json.points.clone(), rows)?;
                // coordinates on matrix spaces are carried for rendering only
                return match json.coords {
                    None => Ok(space),
                    Some(map) => {
                        let mut flat = Vec::new();
                        let mut dim = None;
                        for &id in space.ids() {
                            let c = map
                                .get(&id.to_string())
                                .ok_or_else(|| Error::InvalidInput(format!("missing coordinates for {id}")))?;
                            if *dim.get_or_insert(c.len()) != c.len() {
                                return Err(Error::InvalidInput("coordinate dimensions differ".into()));
                            }
                            flat.extend_from_slice(c);
                        }
                        Ok(FiniteMetricSpace {
                            dim: dim.unwrap_or(0),
                            coords: Some(flat),
                            ..space
                        })
                    }
                };
            }
            MetricJson::Taxicab => GridMetric::Taxicab,
            MetricJson::Chebyshev => GridMetric::Chebyshev,
        };
        let map = json
            .coords
            .ok_or_else(|| Error::InvalidInput("lattice metrics need coordinates".into()))?;
        let coords = json
            .points
            .iter()
            .map(|id| {
                map.get(&id.to_string())
                    .cloned()
                    .ok_or_else(|| Error::InvalidInput(format!("missing coordinates for {id}")))
            })
            .collect::<Result<Vec<_>>>()?;
        FiniteMetricSpace::from_coords_with_ids(json.label, json.points, coords, lattice)
    }
}

impl Serialize for FiniteMetricSpace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpaceJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteMetricSpace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = SpaceJson::deserialize(d)?;
        FiniteMetricSpace::try_from(json).map_err(serde::de::Error::custom)
    }
}

/// Wire form of a coarse map; the spaces are referenced by label.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoarseMapJson {
    pub source: String,
    pub target: String,
    pub map: BTreeMap<String, PointId>,
    pub controls: ControlPair,
}

impl CoarseMap {
    pub fn to_json(&self) -> CoarseMapJson {
        CoarseMapJson {
            source: self.source().label().to_string(),
            target: self.target().label().to_string(),
            map: self.pairs().into_iter().map(|(a, b)| (a.to_string(), b)).collect(),
            controls: self.controls().clone(),
        }
    }

    pub fn from_json(
        json: &CoarseMapJson,
        source: Arc<FiniteMetricSpace>,
        target: Arc<FiniteMetricSpace>,
    ) -> Result<Self> {
        for (expected, found) in [(&json.source, source.label()), (&json.target, target.label())] {
            if expected != found {
                return Err(Error::SpaceMismatch {
                    expected: expected.clone(),
                    found: found.to_string(),
                });
            }
        }
        let pairs = json
            .map
            .iter()
            .map(|(k, &v)| {
                k.parse::<PointId>()
                    .map(|a| (a, v))
                    .map_err(|_| Error::InvalidInput(format!("bad point id `{k}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        CoarseMap::from_ids(source, target, &pairs, json.controls.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{build_grid_space, DEFAULT_POINT_CAP};

    #[test]
    fn lattice_space_roundtrip() {
        let g = build_grid_space(2, 1, 1, GridMetric::Taxicab, DEFAULT_POINT_CAP).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        assert!(text.contains(r#""kind":"taxicab""#));
        let back: FiniteMetricSpace = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn matrix_space_from_json() {
        let text = r#"{"label":"tri","points":[3,1,2],
            "metric":{"kind":"matrix","rows":[[0,1,2],[1,0,1],[2,1,0]]}}"#;
        let s: FiniteMetricSpace = serde_json::from_str(text).unwrap();
        assert_eq!(s.ids(), &[1, 2, 3]);
        // row for id 3 was first
        assert_eq!(s.dist_ids(3, 1).unwrap(), 1);
        assert_eq!(s.dist_ids(3, 2).unwrap(), 2);
        let again: FiniteMetricSpace = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn rejects_broken_metric() {
        let text = r#"{"label":"x","points":[0,1,2],
            "metric":{"kind":"matrix","rows":[[0,1,9],[1,0,1],[9,1,0]]}}"#;
        assert!(serde_json::from_str::<FiniteMetricSpace>(text).is_err());
        let missing = r#"{"label":"x","points":[0],"metric":{"kind":"taxicab"}}"#;
        assert!(serde_json::from_str::<FiniteMetricSpace>(missing).is_err());
    }
}
