use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{FinTree, Seq};
use crate::error::{Error, Result};

/// A finite system `M` of finite nonempty subsets of a ground set `L`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawOrdSet")]
pub struct OrdSet {
    ground: BTreeSet<u64>,
    members: BTreeSet<BTreeSet<u64>>,
}

#[derive(Deserialize)]
struct RawOrdSet {
    /// Defaults to the union of the members.
    #[serde(default)]
    ground: Option<BTreeSet<u64>>,
    members: BTreeSet<BTreeSet<u64>>,
}

impl TryFrom<RawOrdSet> for OrdSet {
    type Error = Error;

    fn try_from(raw: RawOrdSet) -> Result<Self> {
        let ground = raw
            .ground
            .unwrap_or_else(|| raw.members.iter().flatten().copied().collect());
        OrdSet::new(ground, raw.members)
    }
}

impl OrdSet {
    pub fn new(ground: BTreeSet<u64>, members: BTreeSet<BTreeSet<u64>>) -> Result<Self> {
        for m in &members {
            if m.is_empty() {
                return Err(Error::InvalidInput("members must be nonempty".into()));
            }
            if !m.is_subset(&ground) {
                return Err(Error::InvalidInput(format!("{m:?} leaves the ground set")));
            }
        }
        Ok(OrdSet { ground, members })
    }

    /// Ground set taken to be the union of the members.
    pub fn from_members<I, S>(members: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = u64>,
    {
        let members: BTreeSet<BTreeSet<u64>> = members.into_iter().map(|m| m.into_iter().collect()).collect();
        let ground = members.iter().flatten().copied().collect();
        Self::new(ground, members)
    }

    pub fn ground(&self) -> &BTreeSet<u64> {
        &self.ground
    }

    pub fn members(&self) -> &BTreeSet<BTreeSet<u64>> {
        &self.members
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// `M^σ = { τ nonempty : τ ∪ σ ∈ M, τ ∩ σ = ∅ }`.
pub fn restrict(m: &OrdSet, sigma: &BTreeSet<u64>) -> OrdSet {
    let members = m
        .members
        .iter()
        .filter(|mu| sigma.is_subset(mu))
        .map(|mu| mu.difference(sigma).copied().collect::<BTreeSet<u64>>())
        .filter(|tau| !tau.is_empty())
        .collect();
    OrdSet {
        ground: m.ground.clone(),
        members,
    }
}

/// `Ord ∅ = 0`; otherwise the least `α` exceeding `Ord M^{a}` for every
/// `a ∈ L`, i.e. one more than the largest of them.
pub fn ord_set(m: &OrdSet) -> u64 {
    fn go(m: &OrdSet, memo: &mut HashMap<BTreeSet<BTreeSet<u64>>, u64>) -> u64 {
        if m.members.is_empty() {
            return 0;
        }
        if let Some(&v) = memo.get(&m.members) {
            return v;
        }
        let mut best = 0;
        for &a in &m.ground {
            let sub = restrict(m, &BTreeSet::from([a]));
            best = best.max(go(&sub, memo) + 1);
        }
        memo.insert(m.members.clone(), best);
        best
    }
    go(m, &mut HashMap::new())
}

/// Tree of strictly increasing sequences over `L`: the root is present iff
/// `M` is nonempty and `σ` is present iff `M^{father(σ)}` is nonempty.
pub fn ta_tree(m: &OrdSet) -> FinTree {
    let mut nodes = BTreeSet::new();
    if m.is_empty() {
        return FinTree { nodes };
    }
    let ground: Vec<u64> = m.ground.iter().copied().collect();
    let mut stack: Vec<Seq> = vec![Vec::new()];
    while let Some(sigma) = stack.pop() {
        let set: BTreeSet<u64> = sigma.iter().copied().collect();
        let open = !restrict(m, &set).is_empty();
        if open {
            for &b in &ground {
                if sigma.last().is_none_or(|&l| b > l) {
                    let mut child = sigma.clone();
                    child.push(b);
                    stack.push(child);
                }
            }
        }
        nodes.insert(sigma);
    }
    FinTree { nodes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::{rank_levels, rank_recursive};

    fn set(v: &[u64]) -> BTreeSet<u64> {
        v.iter().copied().collect()
    }

    fn system(ms: &[&[u64]]) -> OrdSet {
        OrdSet::from_members(ms.iter().map(|m| m.to_vec())).unwrap()
    }

    #[test]
    fn restrict_examples() {
        let m = system(&[&[1], &[2]]);
        assert_eq!(restrict(&m, &set(&[])), m);
        assert!(restrict(&m, &set(&[1])).is_empty());
        let m = system(&[&[1, 2]]);
        assert_eq!(restrict(&m, &set(&[1])).members(), &[set(&[2])].into_iter().collect());
    }

    #[test]
    fn ord_examples() {
        assert_eq!(ord_set(&OrdSet::default()), 0);
        assert_eq!(ord_set(&system(&[&[1], &[2]])), 1);
        assert_eq!(ord_set(&system(&[&[1, 2]])), 2);
    }

    #[test]
    fn ta_examples() {
        assert!(ta_tree(&OrdSet::default()).is_empty());
        let m = system(&[&[1, 2]]);
        let t = ta_tree(&m);
        assert!(t.contains(&[1]) && t.contains(&[1, 2]));
        assert_eq!(rank_recursive(&t), Some(ord_set(&m)));
        assert_eq!(rank_levels(&t), Some(2));
    }

    #[test]
    fn rejects_bad_members() {
        assert!(OrdSet::new(set(&[1]), [set(&[])].into_iter().collect()).is_err());
        assert!(OrdSet::new(set(&[1]), [set(&[2])].into_iter().collect()).is_err());
    }
}
