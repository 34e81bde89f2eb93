//! Geometry-only merge schedule shared by encoder and decoder.
//!
//! The octree is walked as `3 * depth` binary levels, one Morton bit per
//! level, finest first. At level `l` every working node is identified by its
//! code with the lowest `3 * depth - l` bits dropped; two adjacent nodes whose
//! identifiers agree above the last bit are siblings and merge, every other
//! node is promoted unchanged. Only pairs are stored: a promote is implied by
//! any working index not covered by a pair.

use crate::voxel::Geometry;

/// One butterfly: working entries `src` and `src + 1` merge into one node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairStep {
    pub src: usize,
    pub w_a: u64,
    pub w_b: u64,
    /// Position of this pair's high-pass in the root-first, left-to-right scan
    /// (1-based; 0 is the DC).
    pub traversal: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Level {
    /// Binary merge level, `3 * depth` (finest) down to 1.
    pub level: u32,
    /// Number of working entries entering this level.
    pub width: usize,
    pub pairs: Vec<PairStep>,
}

impl Level {
    /// Number of working entries after this level.
    pub fn out_width(&self) -> usize {
        self.width - self.pairs.len()
    }
}

/// Fully expanded view of a single pair or promote step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MergeStep {
    pub level: u32,
    pub src_a: usize,
    /// `None` for a promote.
    pub src_b: Option<usize>,
    pub dst: usize,
    pub w_a: u64,
    pub w_b: Option<u64>,
}

impl MergeStep {
    pub fn is_pair(&self) -> bool {
        self.src_b.is_some()
    }

    pub fn dst_weight(&self) -> u64 {
        self.w_a + self.w_b.unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergeSchedule {
    depth: u32,
    n_voxels: usize,
    /// Ordered from level `3 * depth` down to level 1.
    levels: Vec<Level>,
}

impl MergeSchedule {
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn n_voxels(&self) -> usize {
        self.n_voxels
    }

    pub fn n_highpass(&self) -> usize {
        self.levels.iter().map(|l| l.pairs.len()).sum()
    }

    /// Levels in execution order (finest first).
    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Every pair and promote step, level by level, by replaying weights.
    pub fn steps(&self) -> Vec<MergeStep> {
        let mut weights = vec![1u64; self.n_voxels];
        let mut out = Vec::new();
        for level in &self.levels {
            let mut next = Vec::with_capacity(level.out_width());
            let mut pairs = level.pairs.iter().peekable();
            let mut i = 0;
            while i < level.width {
                let step = match pairs.peek() {
                    Some(p) if p.src == i => {
                        pairs.next();
                        i += 2;
                        MergeStep {
                            level: level.level,
                            src_a: i - 2,
                            src_b: Some(i - 1),
                            dst: next.len(),
                            w_a: weights[i - 2],
                            w_b: Some(weights[i - 1]),
                        }
                    }
                    _ => {
                        i += 1;
                        MergeStep {
                            level: level.level,
                            src_a: i - 1,
                            src_b: None,
                            dst: next.len(),
                            w_a: weights[i - 1],
                            w_b: None,
                        }
                    }
                };
                next.push(step.dst_weight());
                out.push(step);
            }
            weights = next;
        }
        out
    }

    /// Canonical serialization, used to compare schedules byte for byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.n_highpass() * 32);
        out.extend_from_slice(&self.depth.to_le_bytes());
        out.extend_from_slice(&(self.n_voxels as u64).to_le_bytes());
        for level in &self.levels {
            out.extend_from_slice(&level.level.to_le_bytes());
            out.extend_from_slice(&(level.width as u64).to_le_bytes());
            out.extend_from_slice(&(level.pairs.len() as u64).to_le_bytes());
            for p in &level.pairs {
                for v in [p.src as u64, p.w_a, p.w_b, p.traversal as u64] {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        out
    }
}

/// Derives the merge schedule from the Morton set alone.
pub fn build_schedule(geometry: &Geometry) -> MergeSchedule {
    let depth = geometry.depth();
    let n = geometry.len();
    let mut ids: Vec<u64> = geometry.codes().to_vec();
    let mut weights = vec![1u64; n];
    let mut first_leaf: Vec<usize> = (0..n).collect();
    let mut levels = Vec::with_capacity(3 * depth as usize);
    // (leftmost leaf of the pair, level, index into levels, index into pairs)
    let mut order_keys = Vec::with_capacity(n.saturating_sub(1));

    for level in (1..=3 * depth).rev() {
        let width = ids.len();
        let mut pairs = Vec::new();
        let mut next_ids = Vec::with_capacity(width);
        let mut next_w = Vec::with_capacity(width);
        let mut next_first = Vec::with_capacity(width);
        let mut i = 0;
        while i < width {
            next_ids.push(ids[i] >> 1);
            next_first.push(first_leaf[i]);
            if i + 1 < width && ids[i] >> 1 == ids[i + 1] >> 1 {
                order_keys.push((first_leaf[i], level, levels.len(), pairs.len()));
                pairs.push(PairStep { src: i, w_a: weights[i], w_b: weights[i + 1], traversal: 0 });
                next_w.push(weights[i] + weights[i + 1]);
                i += 2;
            } else {
                next_w.push(weights[i]);
                i += 1;
            }
        }
        levels.push(Level { level, width, pairs });
        ids = next_ids;
        weights = next_w;
        first_leaf = next_first;
    }
    debug_assert_eq!(ids.len(), 1);

    // A pre-order walk of the merge tree visits nodes by leftmost leaf, and
    // among nodes sharing a leftmost leaf (one left spine) from the root down.
    order_keys.sort_unstable_by_key(|&(leaf, level, _, _)| (leaf, level));
    for (t, &(_, _, li, pi)) in order_keys.iter().enumerate() {
        levels[li].pairs[pi].traversal = t + 1;
    }

    MergeSchedule { depth, n_voxels: n, levels }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn geo(depth: u32, codes: &[u64]) -> Geometry {
        Geometry::new(depth, codes.to_vec()).unwrap()
    }

    #[test]
    fn single_voxel_has_no_pairs() {
        let s = build_schedule(&geo(3, &[42]));
        assert_eq!(s.n_highpass(), 0);
        assert_eq!(s.levels().len(), 9);
        assert!(s.steps().iter().all(|st| !st.is_pair()));
    }

    #[test]
    fn two_leaves() {
        let s = build_schedule(&geo(1, &[0, 1]));
        let steps = s.steps();
        assert_eq!(
            steps,
            vec![
                MergeStep { level: 3, src_a: 0, src_b: Some(1), dst: 0, w_a: 1, w_b: Some(1) },
                MergeStep { level: 2, src_a: 0, src_b: None, dst: 0, w_a: 2, w_b: None },
                MergeStep { level: 1, src_a: 0, src_b: None, dst: 0, w_a: 2, w_b: None },
            ]
        );
        assert_eq!(s.n_highpass(), 1);
    }

    #[test]
    fn promote_then_pair() {
        let s = build_schedule(&geo(1, &[0, 1, 4]));
        let steps = s.steps();
        assert_eq!(
            steps,
            vec![
                MergeStep { level: 3, src_a: 0, src_b: Some(1), dst: 0, w_a: 1, w_b: Some(1) },
                MergeStep { level: 3, src_a: 2, src_b: None, dst: 1, w_a: 1, w_b: None },
                MergeStep { level: 2, src_a: 0, src_b: None, dst: 0, w_a: 2, w_b: None },
                MergeStep { level: 2, src_a: 1, src_b: None, dst: 1, w_a: 1, w_b: None },
                MergeStep { level: 1, src_a: 0, src_b: Some(1), dst: 0, w_a: 2, w_b: Some(1) },
            ]
        );
        assert_eq!(s.n_highpass(), 2);
        // Root pair (level 1) is scanned first, then its left child.
        assert_eq!(s.levels()[2].pairs[0].traversal, 1);
        assert_eq!(s.levels()[0].pairs[0].traversal, 2);
    }

    /// Explicit merge tree, used as a traversal-order oracle.
    enum Node {
        Leaf,
        Promote(Box<Node>),
        Pair { level: u32, tag: (usize, usize), left: Box<Node>, right: Box<Node> },
    }

    fn explicit_tree(s: &MergeSchedule) -> Node {
        let mut nodes: Vec<Node> = (0..s.n_voxels()).map(|_| Node::Leaf).collect();
        for (li, level) in s.levels().iter().enumerate() {
            let mut next = Vec::new();
            let mut it = nodes.into_iter().enumerate().peekable();
            let mut pi = 0;
            while let Some((i, node)) = it.next() {
                if level.pairs.get(pi).is_some_and(|p| p.src == i) {
                    let (_, right) = it.next().unwrap();
                    next.push(Node::Pair {
                        level: level.level,
                        tag: (li, pi),
                        left: Box::new(node),
                        right: Box::new(right),
                    });
                    pi += 1;
                } else {
                    next.push(Node::Promote(Box::new(node)));
                }
            }
            nodes = next;
        }
        assert_eq!(nodes.len(), 1);
        nodes.pop().unwrap()
    }

    fn preorder(node: &Node, out: &mut Vec<(usize, usize)>) {
        match node {
            Node::Leaf => {}
            Node::Promote(c) => preorder(c, out),
            Node::Pair { tag, left, right, .. } => {
                out.push(*tag);
                preorder(left, out);
                preorder(right, out);
            }
        }
    }

    fn root_level(node: &Node) -> Option<u32> {
        match node {
            Node::Leaf => None,
            Node::Promote(c) => root_level(c),
            Node::Pair { level, .. } => Some(*level),
        }
    }

    fn arb_geometry() -> impl Strategy<Value = Geometry> {
        (1u32..=6).prop_flat_map(|depth| {
            let max = 1u64 << (3 * depth);
            prop::collection::btree_set(0..max, 1..400usize)
                .prop_map(move |set: BTreeSet<u64>| Geometry::new(depth, set.into_iter().collect()).unwrap())
        })
    }

    proptest! {
        #[test]
        fn one_highpass_per_merge(g in arb_geometry()) {
            let s = build_schedule(&g);
            prop_assert_eq!(s.n_highpass(), g.len() - 1);
            let last = s.levels().last().unwrap();
            prop_assert_eq!(last.out_width(), 1);
            let root = s.steps().last().copied().unwrap();
            prop_assert_eq!(root.dst_weight(), g.len() as u64);
        }

        #[test]
        fn pure_function_of_geometry(g in arb_geometry()) {
            let copy = Geometry::new(g.depth(), g.codes().to_vec()).unwrap();
            prop_assert_eq!(build_schedule(&g).to_bytes(), build_schedule(&copy).to_bytes());
        }

        #[test]
        fn pairs_are_siblings(g in arb_geometry()) {
            let s = build_schedule(&g);
            let total = 3 * g.depth();
            // Track the smallest original code under each working node.
            let mut codes: Vec<u64> = g.codes().to_vec();
            let mut all_codes: Vec<Vec<u64>> = codes.iter().map(|&c| vec![c]).collect();
            for level in s.levels() {
                let mut next = Vec::new();
                let mut next_all = Vec::new();
                let mut i = 0;
                let mut pairs = level.pairs.iter().peekable();
                while i < level.width {
                    if pairs.peek().is_some_and(|p| p.src == i) {
                        pairs.next();
                        let bit = total - level.level;
                        for &a in &all_codes[i] {
                            for &b in &all_codes[i + 1] {
                                prop_assert_eq!(a >> (bit + 1), b >> (bit + 1));
                                prop_assert_eq!((a >> bit) & 1, 0);
                                prop_assert_eq!((b >> bit) & 1, 1);
                            }
                        }
                        let mut merged = all_codes[i].clone();
                        merged.extend_from_slice(&all_codes[i + 1]);
                        next.push(codes[i]);
                        next_all.push(merged);
                        i += 2;
                    } else {
                        next.push(codes[i]);
                        next_all.push(all_codes[i].clone());
                        i += 1;
                    }
                }
                codes = next;
                all_codes = next_all;
            }
        }

        #[test]
        fn traversal_is_tree_preorder(g in arb_geometry()) {
            let s = build_schedule(&g);
            let tree = explicit_tree(&s);
            let mut order = Vec::new();
            preorder(&tree, &mut order);
            let got: Vec<usize> = order.iter().map(|&(li, pi)| s.levels()[li].pairs[pi].traversal).collect();
            let expected: Vec<usize> = (1..g.len()).collect();
            prop_assert_eq!(got, expected);
            if g.len() > 1 {
                prop_assert!(root_level(&tree).is_some());
            }
        }
    }
}
