//! Fractional cascading over the cut-line tree.
//!
//! Every tree node owns a sorted catalog of keys. The augmented list of a
//! node merges its catalog with every fourth element of each child's
//! augmented list, and each augmented element keeps bridge positions into
//! both children. After one binary search at the root, the successor in
//! every catalog along a root-to-leaf path costs O(1) per level.

use crate::cutline::CutLineTree;

const SAMPLE: usize = 4;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct FcNode {
    keys: Vec<i64>,
    /// Position of the first catalog key `>=` each augmented key; one extra
    /// sentinel entry equal to the catalog length.
    own: Vec<u32>,
    /// Bridges into the left and right child's augmented lists, with the
    /// same sentinel convention.
    down: [Vec<u32>; 2],
    children: [Option<u32>; 2],
    catalog_len: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FractionalCascade {
    nodes: Vec<FcNode>,
    root: u32,
}

/// How successor searches along a tree path are performed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SearchMode {
    Cascade,
    /// Independent binary search in every catalog.
    Binary,
}

impl FractionalCascade {
    /// Builds the structure; `catalogs[u]` must be sorted ascending.
    pub fn build(tree: &CutLineTree, catalogs: &[Vec<i64>]) -> Self {
        let n = tree.nodes.len();
        let mut nodes: Vec<FcNode> = vec![FcNode::default(); n];
        // Children have larger ids than parents, so a reverse sweep is
        // bottom-up.
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_by_key(|&u| std::cmp::Reverse(tree.node(u).level));
        for u in order {
            let t = tree.node(u);
            let children = [t.left, t.right];
            let cat = &catalogs[u as usize];
            let mut keys: Vec<i64> = cat.clone();
            for c in children.iter().flatten() {
                let ck = &nodes[*c as usize].keys;
                keys.extend(ck.iter().skip(SAMPLE - 1).step_by(SAMPLE));
            }
            keys.sort_unstable();
            let own = bridges(&keys, cat);
            let mut down = [Vec::new(), Vec::new()];
            for (slot, c) in children.iter().enumerate() {
                if let Some(c) = c {
                    down[slot] = bridges(&keys, &nodes[*c as usize].keys);
                }
            }
            nodes[u as usize] = FcNode { keys, own, down, children, catalog_len: cat.len() as u32 };
        }
        FractionalCascade { nodes, root: tree.root }
    }

    pub fn size(&self) -> usize {
        self.nodes.iter().map(|n| n.keys.len()).sum()
    }

    /// For each node of the root-to-leaf `path`, the index of the first
    /// catalog key `>= y`.
    pub fn successors(&self, path: &[u32], y: i64) -> Vec<usize> {
        let mut out = Vec::with_capacity(path.len());
        if path.is_empty() || self.nodes.is_empty() {
            return out;
        }
        debug_assert_eq!(path[0], self.root);
        let mut node = &self.nodes[path[0] as usize];
        let mut pos = node.keys.partition_point(|&k| k < y);
        for (i, &u) in path.iter().enumerate() {
            out.push(node.own[pos] as usize);
            let Some(&next) = path.get(i + 1) else { break };
            let slot = if node.children[0] == Some(next) { 0 } else { 1 };
            debug_assert_eq!(node.children[slot], Some(next), "path must follow tree edges from {u}");
            let child = &self.nodes[next as usize];
            let mut p = node.down[slot][pos] as usize;
            while p > 0 && child.keys[p - 1] >= y {
                p -= 1;
            }
            node = child;
            pos = p;
        }
        out
    }
}

/// For each position in `keys` (plus one past the end), the index of the
/// first element of `target` that is `>=` the key.
fn bridges(keys: &[i64], target: &[i64]) -> Vec<u32> {
    let mut out = Vec::with_capacity(keys.len() + 1);
    let mut j = 0;
    for &k in keys {
        while j < target.len() && target[j] < k {
            j += 1;
        }
        out.push(j as u32);
    }
    out.push(target.len() as u32);
    out
}

/// Baseline: independent binary searches.
pub fn successors_binary(catalogs: &[Vec<i64>], path: &[u32], y: i64) -> Vec<usize> {
    path.iter().map(|&u| catalogs[u as usize].partition_point(|&k| k < y)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutline::{build_cutline_tree, CutAxis};
    use crate::geom::Point;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> CutLineTree {
        let mut xs: Vec<i64> = (0..n as i64 * 3).collect();
        xs.shuffle(rng);
        let pts: Vec<Point> = xs[..n].iter().map(|&x| Point::new(x, rng.gen_range(0..1000))).collect();
        build_cutline_tree(&pts, CutAxis::Vertical).unwrap()
    }

    fn all_paths(tree: &CutLineTree, rng: &mut ChaCha8Rng) -> Vec<u32> {
        let mut path = vec![tree.root];
        loop {
            let n = tree.node(*path.last().unwrap());
            let next = match (n.left, n.right) {
                (Some(l), Some(r)) => Some(if rng.gen() { l } else { r }),
                (a, b) => a.or(b),
            };
            match next {
                Some(c) => path.push(c),
                None => return path,
            }
        }
    }

    #[test]
    fn single_line_is_plain_array() {
        let tree = build_cutline_tree(&[Point::new(0, 0)], CutAxis::Vertical).unwrap();
        let cats = vec![vec![1, 5, 9]];
        let fc = FractionalCascade::build(&tree, &cats);
        assert_eq!(fc.size(), 3);
        for y in -1..11 {
            assert_eq!(fc.successors(&[0], y), successors_binary(&cats, &[0], y));
        }
    }

    #[test]
    fn empty_catalogs() {
        let tree =
            build_cutline_tree(&[Point::new(0, 0), Point::new(1, 1), Point::new(2, 2)], CutAxis::Vertical).unwrap();
        let cats = vec![Vec::new(); tree.nodes.len()];
        let fc = FractionalCascade::build(&tree, &cats);
        assert_eq!(fc.size(), 0);
        let path = vec![tree.root, tree.node(tree.root).left.unwrap()];
        // Successor index 0 in an empty catalog means "none".
        assert_eq!(fc.successors(&path, 7), vec![0, 0]);
    }

    #[test]
    fn agrees_with_binary_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut probes = 0;
        for _ in 0..20 {
            let n = rng.gen_range(1..300);
            let tree = random_tree(&mut rng, n);
            let cats: Vec<Vec<i64>> = (0..tree.nodes.len())
                .map(|_| {
                    let mut c: Vec<i64> = (0..rng.gen_range(0..40)).map(|_| rng.gen_range(-500..500)).collect();
                    c.sort();
                    c.dedup();
                    c
                })
                .collect();
            let fc = FractionalCascade::build(&tree, &cats);
            let total: usize = cats.iter().map(Vec::len).sum();
            assert!(fc.size() <= 2 * total + tree.nodes.len());
            for _ in 0..5000 {
                let path = all_paths(&tree, &mut rng);
                let y = rng.gen_range(-520..520);
                assert_eq!(fc.successors(&path, y), successors_binary(&cats, &path, y));
                probes += 1;
            }
        }
        assert_eq!(probes, 100_000);
    }
}
