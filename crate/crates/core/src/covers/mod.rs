//! s-covers: sequences of set families where family `i` is `s(i)`-disjoint,
//! every set is `D`-bounded and the sets together cover the space.

mod brick;
mod check;
mod glue;
mod solver;
mod transform;

use serde::{Deserialize, Serialize};

use crate::spaces::{FiniteMetricSpace, PointId};

pub use brick::{brick_bound, brick_constant, brick_cover, brick_cover_of, BrickCover};
pub use check::{check_s_cover, check_set_family, CoverReport, CoverViolation, Predicate};
pub use glue::{enumerate_covers, glue_covers, GlueInput, GlueMode, GlueOutcome, ENUMERATE_POINT_CAP};
pub use solver::{
    extend_demands, seq_dimension, solve_s_cover, Exactness, SearchStats, SeqDimension, SolveMode, SolveOptions,
    SolveResult, SolveStatus, EXACT_POINT_CAP, HEURISTIC_POINT_CAP,
};
pub use transform::{
    family_solve_uniform, fiber_compose, finite_sum_cover, trace_cover, transport_cover, FiberSpec, SumPart,
    TransportResult, UniformResult, UniformVerdict,
};

/// One family of an s-cover. Sets are lists of point ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SetFamily {
    pub sets: Vec<Vec<PointId>>,
}

impl SetFamily {
    pub fn new(sets: Vec<Vec<PointId>>) -> Self {
        SetFamily { sets }
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Sorts points inside each set and the sets themselves.
    pub fn normalize(&mut self) {
        for set in &mut self.sets {
            set.sort_unstable();
            set.dedup();
        }
        self.sets.retain(|s| !s.is_empty());
        self.sets.sort();
    }

    pub fn points(&self) -> impl Iterator<Item = PointId> + '_ {
        self.sets.iter().flatten().copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SCover {
    /// Label of the space the cover lives on.
    pub space: String,
    /// Demand sequence: family `i` must be `s[i]`-disjoint.
    pub s: Vec<u64>,
    /// Uniform diameter bound.
    #[serde(rename = "D")]
    pub bound: u64,
    pub families: Vec<SetFamily>,
}

impl SCover {
    /// A cover skeleton with one empty family per demand.
    pub fn empty(space: &FiniteMetricSpace, s: &[u64], bound: u64) -> Self {
        SCover {
            space: space.label().to_string(),
            s: s.to_vec(),
            bound,
            families: vec![SetFamily::default(); s.len()],
        }
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    pub fn normalize(&mut self) {
        for f in &mut self.families {
            f.normalize();
        }
    }

    pub fn set_count(&self) -> usize {
        self.families.iter().map(SetFamily::len).sum()
    }

    /// Appends `extra` empty families with demand `demand`.
    pub fn pad(mut self, extra: usize, demand: u64) -> Self {
        for _ in 0..extra {
            self.s.push(demand);
            self.families.push(SetFamily::default());
        }
        self
    }
}
