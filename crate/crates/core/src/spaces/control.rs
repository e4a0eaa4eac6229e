use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{FiniteMetricSpace, PointId};
use crate::error::{Error, Result};

/// Linear part of a control function: `at + slope * (t - from)` for `t >= from`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearTail {
    pub from: u64,
    pub at: u64,
    pub slope: u64,
}

/// Nondecreasing integer step function with a strictly increasing linear
/// tail. The tail is what witnesses unboundedness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawControlFn")]
pub struct ControlFn {
    /// `(t, value)` breakpoints: the value holds from `t` up to the next breakpoint.
    steps: Vec<(u64, u64)>,
    tail: LinearTail,
}

#[derive(Deserialize)]
struct RawControlFn {
    #[serde(default)]
    steps: Vec<(u64, u64)>,
    tail: LinearTail,
}

impl TryFrom<RawControlFn> for ControlFn {
    type Error = Error;

    fn try_from(raw: RawControlFn) -> Result<Self> {
        ControlFn::new(raw.steps, raw.tail)
    }
}

impl ControlFn {
    pub fn new(steps: Vec<(u64, u64)>, tail: LinearTail) -> Result<Self> {
        if tail.slope == 0 {
            return Err(Error::InvalidInput("control tail must be strictly increasing".into()));
        }
        if tail.from > 0 && steps.first().map(|s| s.0) != Some(0) {
            return Err(Error::InvalidInput("control function undefined near 0".into()));
        }
        if steps.windows(2).any(|w| w[0].0 >= w[1].0 || w[0].1 > w[1].1) {
            return Err(Error::InvalidInput("control steps must be nondecreasing".into()));
        }
        if let Some(&(t, v)) = steps.last() {
            if t >= tail.from && tail.from > 0 {
                return Err(Error::InvalidInput("control steps overlap the tail".into()));
            }
            if v > tail.at {
                return Err(Error::InvalidInput("control tail starts below the steps".into()));
            }
        }
        Ok(ControlFn { steps, tail })
    }

    /// `t -> offset + slope * t`.
    pub fn linear(slope: u64, offset: u64) -> Self {
        ControlFn {
            steps: Vec::new(),
            tail: LinearTail {
                from: 0,
                at: offset,
                slope: slope.max(1),
            },
        }
    }

    pub fn identity() -> Self {
        Self::linear(1, 0)
    }

    /// `t -> max(t - shift, 0)`.
    pub fn shifted(shift: u64) -> Self {
        if shift == 0 {
            return Self::identity();
        }
        ControlFn {
            steps: vec![(0, 0)],
            tail: LinearTail {
                from: shift,
                at: 0,
                slope: 1,
            },
        }
    }

    pub fn eval(&self, t: u64) -> u64 {
        if t >= self.tail.from {
            return self.tail.at + self.tail.slope * (t - self.tail.from);
        }
        match self.steps.partition_point(|&(from, _)| from <= t) {
            0 => 0,
            i => self.steps[i - 1].1,
        }
    }
}

/// Lower and upper controls of a coarse map, plus the co-density radius `N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlPair {
    pub p1: ControlFn,
    pub p2: ControlFn,
    #[serde(rename = "N")]
    pub n: u64,
}

impl ControlPair {
    pub fn new(p1: ControlFn, p2: ControlFn, n: u64) -> Result<Self> {
        Ok(ControlPair { p1, p2, n })
    }

    pub fn identity() -> Self {
        ControlPair {
            p1: ControlFn::identity(),
            p2: ControlFn::identity(),
            n: 0,
        }
    }

    /// First `t <= max_t` with `p1(t) > p2(t)`.
    pub fn order_violation(&self, max_t: u64) -> Option<u64> {
        (0..=max_t).find(|&t| self.p1.eval(t) > self.p2.eval(t))
    }
}

/// A total map between two finite spaces together with its claimed controls.
#[derive(Clone, Debug)]
pub struct CoarseMap {
    source: Arc<FiniteMetricSpace>,
    target: Arc<FiniteMetricSpace>,
    /// Target index for each source index.
    map: Vec<usize>,
    controls: ControlPair,
}

impl CoarseMap {
    pub fn new(
        source: Arc<FiniteMetricSpace>,
        target: Arc<FiniteMetricSpace>,
        map: Vec<usize>,
        controls: ControlPair,
    ) -> Result<Self> {
        if map.len() != source.len() {
            return Err(Error::InvalidInput("coarse map must be total on the source".into()));
        }
        if map.iter().any(|&t| t >= target.len()) {
            return Err(Error::InvalidInput("coarse map leaves the target".into()));
        }
        Ok(CoarseMap {
            source,
            target,
            map,
            controls,
        })
    }

    /// Builds the map from `(source id, target id)` pairs.
    pub fn from_ids(
        source: Arc<FiniteMetricSpace>,
        target: Arc<FiniteMetricSpace>,
        pairs: &[(PointId, PointId)],
        controls: ControlPair,
    ) -> Result<Self> {
        let mut map = vec![usize::MAX; source.len()];
        for &(a, b) in pairs {
            map[source.require_index(a)?] = target.require_index(b)?;
        }
        if let Some(i) = map.iter().position(|&t| t == usize::MAX) {
            return Err(Error::InvalidInput(format!("coarse map undefined at {}", source.id(i))));
        }
        Self::new(source, target, map, controls)
    }

    pub fn source(&self) -> &FiniteMetricSpace {
        &self.source
    }

    pub fn target(&self) -> &FiniteMetricSpace {
        &self.target
    }

    pub fn controls(&self) -> &ControlPair {
        &self.controls
    }

    /// Target index of the source point at `index`.
    pub fn apply(&self, index: usize) -> usize {
        self.map[index]
    }

    pub fn apply_id(&self, id: PointId) -> Result<PointId> {
        Ok(self.target.id(self.map[self.source.require_index(id)?]))
    }

    pub fn pairs(&self) -> Vec<(PointId, PointId)> {
        self.map
            .iter()
            .enumerate()
            .map(|(i, &t)| (self.source.id(i), self.target.id(t)))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolatedSide {
    /// `p1(d_X) > d_Y`
    Lower,
    /// `d_Y > p2(d_X)`
    Upper,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EmbeddingViolation {
    pub x: PointId,
    pub x2: PointId,
    pub source_dist: u64,
    pub target_dist: u64,
    pub side: ViolatedSide,
    pub bound: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EmbeddingReport {
    pub ok: bool,
    pub violation: Option<EmbeddingViolation>,
}

fn check_pairs(m: &CoarseMap, lower: bool) -> EmbeddingReport {
    let src = m.source();
    let dst = m.target();
    for i in 0..src.len() {
        for j in i + 1..src.len() {
            let dx = src.dist(i, j);
            let dy = dst.dist(m.map[i], m.map[j]);
            let lo = m.controls.p1.eval(dx);
            let hi = m.controls.p2.eval(dx);
            let side = if lower && lo > dy {
                Some((ViolatedSide::Lower, lo))
            } else if dy > hi {
                Some((ViolatedSide::Upper, hi))
            } else {
                None
            };
            if let Some((side, bound)) = side {
                return EmbeddingReport {
                    ok: false,
                    violation: Some(EmbeddingViolation {
                        x: src.id(i),
                        x2: src.id(j),
                        source_dist: dx,
                        target_dist: dy,
                        side,
                        bound,
                    }),
                };
            }
        }
    }
    EmbeddingReport {
        ok: true,
        violation: None,
    }
}

/// Checks `p1(d(x,x')) <= d(f x, f x') <= p2(d(x,x'))` on every pair and
/// reports the first violating pair in index order.
pub fn check_coarse_embedding(m: &CoarseMap) -> EmbeddingReport {
    check_pairs(m, true)
}

/// Only the upper inequality `d(f x, f x') <= p2(d(x,x'))`.
pub fn check_uniformly_expansive(m: &CoarseMap) -> EmbeddingReport {
    check_pairs(m, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::GridMetric;

    fn line(lo: i64, hi: i64, step: i64) -> Arc<FiniteMetricSpace> {
        Arc::new(
            FiniteMetricSpace::from_coords(
                format!("Z[{lo},{hi}]/{step}"),
                (lo..=hi).filter(|x| x % step == 0).map(|x| vec![x]).collect(),
                GridMetric::Taxicab,
            )
            .unwrap(),
        )
    }

    #[test]
    fn control_eval() {
        let f = ControlFn::shifted(4);
        assert_eq!(
            (0..8).map(|t| f.eval(t)).collect::<Vec<_>>(),
            vec![0, 0, 0, 0, 0, 1, 2, 3]
        );
        let g = ControlFn::linear(2, 1);
        assert_eq!(g.eval(3), 7);
        let h = ControlFn::new(
            vec![(0, 0), (3, 2), (5, 2)],
            LinearTail {
                from: 7,
                at: 4,
                slope: 3,
            },
        )
        .unwrap();
        assert_eq!(
            (0..10).map(|t| h.eval(t)).collect::<Vec<_>>(),
            vec![0, 0, 0, 2, 2, 2, 2, 4, 7, 10]
        );
    }

    #[test]
    fn control_rejects_bad_shapes() {
        let flat = LinearTail {
            from: 0,
            at: 0,
            slope: 0,
        };
        assert!(ControlFn::new(vec![], flat).is_err());
        let tail = LinearTail {
            from: 5,
            at: 1,
            slope: 1,
        };
        assert!(ControlFn::new(vec![(0, 3)], tail).is_err());
        assert!(ControlFn::new(vec![(0, 1), (2, 0)], tail).is_err());
        assert!(ControlFn::new(vec![(1, 0)], tail).is_err());
    }

    #[test]
    fn identity_embedding() {
        let s = line(-3, 3, 1);
        let m = CoarseMap::new(s.clone(), s, (0..7).collect(), ControlPair::identity()).unwrap();
        assert!(check_coarse_embedding(&m).ok);
    }

    #[test]
    fn doubling_embedding() {
        let src = line(0, 4, 1);
        let dst = line(0, 8, 2);
        let pairs: Vec<(PointId, PointId)> = (0..5).map(|i| (i, i)).collect();
        let twice = ControlFn::linear(2, 0);
        let m = CoarseMap::from_ids(src, dst, &pairs, ControlPair::new(twice.clone(), twice, 0).unwrap()).unwrap();
        assert!(check_coarse_embedding(&m).ok);
    }

    #[test]
    fn constant_map_violates_lower_control() {
        let src = line(0, 4, 1);
        let m = CoarseMap::new(src.clone(), src, vec![0; 5], ControlPair::identity()).unwrap();
        let report = check_coarse_embedding(&m);
        assert!(!report.ok);
        let v = report.violation.unwrap();
        assert_eq!((v.x, v.x2, v.side), (0, 1, ViolatedSide::Lower));
        // the constant map is still uniformly expansive
        assert!(check_uniformly_expansive(&m).ok);
    }

    #[test]
    fn control_json_roundtrip() {
        let pair = ControlPair::new(ControlFn::shifted(3), ControlFn::linear(2, 1), 1).unwrap();
        let text = serde_json::to_string(&pair).unwrap();
        let back: ControlPair = serde_json::from_str(&text).unwrap();
        assert_eq!(pair, back);
        let bad =
            r#"{"p1":{"steps":[],"tail":{"from":0,"at":0,"slope":0}},"p2":{"tail":{"from":0,"at":0,"slope":1}},"N":0}"#;
        assert!(serde_json::from_str::<ControlPair>(bad).is_err());
    }

    #[test]
    fn order_violation_is_found() {
        let pair = ControlPair::new(ControlFn::linear(2, 0), ControlFn::linear(1, 3), 0).unwrap();
        assert_eq!(pair.order_violation(10), Some(4));
        assert_eq!(ControlPair::identity().order_violation(10), None);
    }
}
