//! Finite trees on finite sequences of naturals: ranks computed two ways,
//! the Kleene-Brouwer order, t-embeddings, `Ord` of set systems and
//! empirical dimension trees built from solver verdicts.

mod empirical;
mod ord;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use empirical::{empirical_dim_tree, EmpiricalTree, EmpiricalTreeConfig, Variant};
pub use ord::{ord_set, restrict, ta_tree, OrdSet};

/// A finite sequence of naturals; a node of a tree.
pub type Seq = Vec<u64>;

/// Prefix-closed finite set of sequences.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "TreeNodes")]
pub struct FinTree {
    nodes: BTreeSet<Seq>,
}

#[derive(Deserialize)]
struct TreeNodes {
    nodes: BTreeSet<Seq>,
}

impl TryFrom<TreeNodes> for FinTree {
    type Error = Error;

    fn try_from(raw: TreeNodes) -> Result<Self> {
        FinTree::new(raw.nodes)
    }
}

impl FinTree {
    /// Validates prefix closure.
    pub fn new(nodes: BTreeSet<Seq>) -> Result<Self> {
        for s in &nodes {
            if !s.is_empty() && !nodes.contains(&s[..s.len() - 1]) {
                return Err(Error::InvalidInput(format!("tree is not prefix closed at {s:?}")));
            }
        }
        Ok(FinTree { nodes })
    }

    pub fn empty() -> Self {
        FinTree::default()
    }

    pub fn nodes(&self) -> &BTreeSet<Seq> {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, s: &[u64]) -> bool {
        self.nodes.contains(s)
    }

    /// Immediate extensions of `s` present in the tree.
    pub fn children<'a>(&'a self, s: &'a [u64]) -> impl Iterator<Item = &'a Seq> + 'a {
        self.nodes
            .range::<[u64], _>((std::ops::Bound::Excluded(s), std::ops::Bound::Unbounded))
            .take_while(move |t| t.starts_with(s))
            .filter(move |t| t.len() == s.len() + 1)
    }

    pub fn is_leaf(&self, s: &[u64]) -> bool {
        self.children(s).next().is_none()
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Prefix closure of `seqs`, including the empty sequence when `seqs` is
/// nonempty.
pub fn tree_from_sequences<I, S>(seqs: I) -> FinTree
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u64]>,
{
    let mut nodes = BTreeSet::new();
    for s in seqs {
        let s = s.as_ref();
        for k in 0..=s.len() {
            nodes.insert(s[..k].to_vec());
        }
    }
    FinTree { nodes }
}

/// Rank of every node by the recursive definition: leaves have rank 0,
/// otherwise one more than the largest child rank.
pub fn node_ranks_recursive(t: &FinTree) -> BTreeMap<Seq, u64> {
    fn go(t: &FinTree, s: &[u64], out: &mut BTreeMap<Seq, u64>) -> u64 {
        let mut best = None;
        for c in t.children(s) {
            let r = go(t, c, out);
            best = Some(best.map_or(r + 1, |b: u64| b.max(r + 1)));
        }
        let r = best.unwrap_or(0);
        out.insert(s.to_vec(), r);
        r
    }
    let mut out = BTreeMap::new();
    if !t.is_empty() {
        go(t, &[], &mut out);
    }
    out
}

/// Rank of the root, `None` for the empty tree.
pub fn rank_recursive(t: &FinTree) -> Option<u64> {
    node_ranks_recursive(t).get(&Vec::new()).copied()
}

/// Level of every node under iterated leaf stripping: level 0 are the
/// leaves, level `a` the leaves left after removing all lower levels.
pub fn node_levels(t: &FinTree) -> BTreeMap<Seq, u64> {
    let mut remaining: HashMap<&[u64], usize> = HashMap::new();
    for s in t.nodes() {
        remaining.entry(s.as_slice()).or_insert(0);
        if let Some((_, parent)) = s.split_last() {
            *remaining.entry(parent).or_insert(0) += 1;
        }
    }
    let mut current: Vec<&[u64]> = remaining.iter().filter(|(_, &c)| c == 0).map(|(&s, _)| s).collect();
    let mut out = BTreeMap::new();
    let mut level = 0;
    while !current.is_empty() {
        let mut next = Vec::new();
        for s in current {
            out.insert(s.to_vec(), level);
            if let Some((_, parent)) = s.split_last() {
                let c = remaining.get_mut(parent).expect("parent present");
                *c -= 1;
                if *c == 0 {
                    next.push(parent);
                }
            }
        }
        current = next;
        level += 1;
    }
    out
}

pub fn rank_levels(t: &FinTree) -> Option<u64> {
    node_levels(t).get(&Vec::new()).copied()
}

/// Rank computed in one pass over the nodes sorted by the Kleene-Brouwer
/// order, where every child precedes its parent.
pub fn rank_kb(t: &FinTree) -> Option<u64> {
    let mut ranks: HashMap<&[u64], u64> = HashMap::new();
    for s in kb_sort(t.nodes().iter()) {
        let r = ranks.get(s.as_slice()).copied().unwrap_or(0);
        ranks.insert(s.as_slice(), r);
        if let Some((_, parent)) = s.split_last() {
            let e = ranks.entry(parent).or_insert(0);
            *e = (*e).max(r + 1);
        }
    }
    ranks.get([].as_slice()).copied()
}

/// Kleene-Brouwer order: `s < t` iff `t` is a proper prefix of `s`, or `s`
/// is smaller at the first index where they differ.
pub fn kb_compare(s: &[u64], t: &[u64]) -> Ordering {
    for (a, b) in s.iter().zip(t) {
        if a != b {
            return a.cmp(b);
        }
    }
    t.len().cmp(&s.len())
}

pub fn kb_sort<'a, I>(nodes: I) -> Vec<&'a Seq>
where
    I: IntoIterator<Item = &'a Seq>,
{
    let mut v: Vec<&Seq> = nodes.into_iter().collect();
    v.sort_by(|a, b| kb_compare(a, b));
    v
}

/// Pointwise least strictly increasing sequence dominating `s`.
pub fn canonical_increasing_embed(s: &[u64]) -> Seq {
    let mut out: Seq = Vec::with_capacity(s.len());
    for &v in s {
        let next = match out.last() {
            Some(&prev) => v.max(prev + 1),
            None => v,
        };
        out.push(next);
    }
    out
}

/// Is `f` a t-embedding of `src` into `dst`: total on `src`, length
/// preserving, prefix preserving and landing in `dst`?
pub fn check_t_embedding(f: &BTreeMap<Seq, Seq>, src: &FinTree, dst: &FinTree) -> bool {
    src.nodes().iter().all(|s| {
        let Some(image) = f.get(s) else {
            return false;
        };
        if image.len() != s.len() || !dst.contains(image) {
            return false;
        }
        match s.split_last() {
            None => true,
            Some((_, parent)) => f.get(parent).is_some_and(|fp| image.starts_with(fp)),
        }
    })
}

/// The suffix tree `{ γ : root ⌢ γ ∈ t }`.
pub fn subtree_matrix(t: &FinTree, root: &[u64]) -> Result<FinTree> {
    if !t.contains(root) {
        return Err(Error::InvalidInput(format!("{root:?} is not a node")));
    }
    let nodes = t
        .nodes()
        .range::<[u64], _>((std::ops::Bound::Included(root), std::ops::Bound::Unbounded))
        .take_while(|s| s.starts_with(root))
        .map(|s| s[root.len()..].to_vec())
        .collect();
    Ok(FinTree { nodes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(seqs: &[&[u64]]) -> FinTree {
        tree_from_sequences(seqs.iter().copied())
    }

    #[test]
    fn closure_examples() {
        assert!(tree(&[]).is_empty());
        let t = tree(&[&[2, 1]]);
        let want: BTreeSet<Seq> = [vec![], vec![2], vec![2, 1]].into_iter().collect();
        assert_eq!(t.nodes(), &want);
        let t = tree(&[&[1], &[2, 1]]);
        assert_eq!(t.len(), 4);
    }

    #[test]
    fn rank_examples() {
        let root = tree(&[&[]]);
        assert_eq!(rank_recursive(&root), Some(0));
        assert_eq!(rank_levels(&root), Some(0));
        let t = tree(&[&[1], &[2, 1]]);
        assert_eq!(rank_recursive(&t), Some(2));
        assert_eq!(rank_levels(&t), Some(2));
        assert_eq!(rank_kb(&t), Some(2));
        let ranks = node_ranks_recursive(&t);
        assert_eq!(ranks[&vec![1]], 0);
        assert_eq!(ranks[&vec![2]], 1);
        let fan = tree_from_sequences((1..=5).map(|i| vec![i]));
        assert_eq!(rank_recursive(&fan), Some(1));
        assert_eq!(rank_recursive(&FinTree::empty()), None);
        assert_eq!(rank_levels(&FinTree::empty()), None);
    }

    #[test]
    fn kb_examples() {
        assert_eq!(kb_compare(&[1, 2], &[1, 3]), Ordering::Less);
        assert_eq!(kb_compare(&[1, 5], &[1]), Ordering::Less);
        assert_eq!(kb_compare(&[1], &[1, 5]), Ordering::Greater);
        assert_eq!(kb_compare(&[4, 4], &[4, 4]), Ordering::Equal);
        assert_eq!(kb_compare(&[2], &[1, 9]), Ordering::Greater);
    }

    #[test]
    fn canonical_examples() {
        assert_eq!(canonical_increasing_embed(&[3, 1, 1]), vec![3, 4, 5]);
        assert_eq!(canonical_increasing_embed(&[1, 2, 3]), vec![1, 2, 3]);
        assert_eq!(canonical_increasing_embed(&[5]), vec![5]);
    }

    #[test]
    fn t_embedding_examples() {
        let t = tree(&[&[1, 1], &[2]]);
        let id: BTreeMap<Seq, Seq> = t.nodes().iter().map(|s| (s.clone(), s.clone())).collect();
        assert!(check_t_embedding(&id, &t, &t));
        let mut bad = id.clone();
        bad.insert(vec![2], vec![2, 0]);
        assert!(!check_t_embedding(&bad, &t, &tree(&[&[1, 1], &[2, 0]])));
        let canon: BTreeMap<Seq, Seq> = t
            .nodes()
            .iter()
            .map(|s| (s.clone(), canonical_increasing_embed(s)))
            .collect();
        let image = tree_from_sequences(canon.values());
        assert!(check_t_embedding(&canon, &t, &image));
    }

    #[test]
    fn matrix_examples() {
        let t = tree(&[&[1], &[2, 1], &[2, 3, 1]]);
        assert_eq!(subtree_matrix(&t, &[]).unwrap(), t);
        assert_eq!(subtree_matrix(&t, &[1]).unwrap(), tree(&[&[]]));
        assert_eq!(subtree_matrix(&t, &[2]).unwrap(), tree(&[&[1], &[3, 1]]));
        assert!(subtree_matrix(&t, &[7]).is_err());
    }

    #[test]
    fn rejects_open_trees() {
        let nodes: BTreeSet<Seq> = [vec![], vec![1, 2]].into_iter().collect();
        assert!(FinTree::new(nodes).is_err());
        assert!(serde_json::from_str::<FinTree>(r#"{"nodes":[[],[1,2]]}"#).is_err());
        let ok: FinTree = serde_json::from_str(r#"{"nodes":[[],[1]]}"#).unwrap();
        assert_eq!(ok.len(), 2);
    }
}
