//! Compositional trees: validation, leaf-first indexing and structural queries.
//!
//! A compositional tree is a rooted tree over `p` variables in which every
//! internal node equals the sum of its children and the `q` leaves sum to one.
//! On construction nodes are re-indexed so that leaves occupy `0..q` (in order
//! of first appearance in the edge list) and internal nodes follow, ordered by
//! height. Every child therefore has a smaller index than its parent and the
//! root is always `p - 1`. Labels remain the only external identifiers.
//!
//! Children keep the order in which their edges were listed. The fused penalty
//! chains siblings in that order, so reordering the input changes which
//! adjacent differences are penalized.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A validated compositional tree with leaf-first indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionalTree {
    names: Vec<String>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    height: Vec<usize>,
    leaves_under: Vec<usize>,
    q: usize,
    index: HashMap<String, usize>,
}

/// Level sets `S_1, ..., S_L`: `S_1` holds the leaves and `S_l` the nodes whose
/// deepest child lies in `S_{l-1}`. Together they partition all nodes and the
/// last level is the root alone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSets {
    pub levels: Vec<Vec<usize>>,
}

impl LevelSets {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

/// One failed compositional constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    /// Leaf values do not sum to one.
    LeafSum { sum: f64 },
    /// An internal node differs from the sum of its children.
    NodeSum { node: usize, value: f64, children_sum: f64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CompositionReport {
    pub violations: Vec<Violation>,
}

impl CompositionReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Builds a compositional tree from `(child, parent)` label pairs.
pub fn build_tree<S: AsRef<str>>(edges: &[(S, S)]) -> Result<CompositionalTree> {
    CompositionalTree::from_edges(edges)
}

impl CompositionalTree {
    pub fn from_edges<S: AsRef<str>>(edges: &[(S, S)]) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::EmptyTree);
        }

        // Labels in order of first appearance.
        let mut labels: Vec<String> = Vec::new();
        let mut tmp_id: HashMap<String, usize> = HashMap::new();
        let mut intern = |label: &str, labels: &mut Vec<String>| -> usize {
            if let Some(&id) = tmp_id.get(label) {
                return id;
            }
            let id = labels.len();
            labels.push(label.to_string());
            tmp_id.insert(label.to_string(), id);
            id
        };

        let mut seen_edges: HashSet<(usize, usize)> = HashSet::new();
        let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for (child, parent) in edges {
            let c = intern(child.as_ref(), &mut labels);
            let p = intern(parent.as_ref(), &mut labels);
            if !seen_edges.insert((c, p)) {
                return Err(Error::DuplicateEdge {
                    child: labels[c].clone(),
                    parent: labels[p].clone(),
                });
            }
            pairs.push((c, p));
        }

        let n = labels.len();
        let mut parent: Vec<Option<usize>> = vec![None; n];
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(c, p) in &pairs {
            if let Some(existing) = parent[c] {
                let mut parents = vec![labels[existing].clone()];
                parents.extend(
                    pairs
                        .iter()
                        .filter(|&&(cc, pp)| cc == c && pp != existing)
                        .map(|&(_, pp)| labels[pp].clone()),
                );
                return Err(Error::MultipleParents {
                    node: labels[c].clone(),
                    parents,
                });
            }
            parent[c] = Some(p);
            children[p].push(c);
        }

        // Cycle detection by walking parent chains: 0 = unvisited, 1 = on the
        // current walk, 2 = known to reach a root.
        let mut state = vec![0u8; n];
        for start in 0..n {
            if state[start] != 0 {
                continue;
            }
            let mut walk: Vec<usize> = Vec::new();
            let mut cur = Some(start);
            while let Some(v) = cur {
                match state[v] {
                    2 => break,
                    1 => {
                        let pos = walk.iter().position(|&w| w == v).unwrap_or(0);
                        let mut cycle: Vec<String> =
                            walk[pos..].iter().map(|&w| labels[w].clone()).collect();
                        cycle.push(labels[v].clone());
                        return Err(Error::CycleDetected(cycle));
                    }
                    _ => {
                        state[v] = 1;
                        walk.push(v);
                        cur = parent[v];
                    }
                }
            }
            for w in walk {
                state[w] = 2;
            }
        }

        let roots: Vec<usize> = (0..n).filter(|&v| parent[v].is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::MultipleRoots(
                roots.iter().map(|&r| labels[r].clone()).collect(),
            ));
        }

        for v in 0..n {
            if children[v].len() == 1 {
                return Err(Error::SingleChildNode {
                    node: labels[v].clone(),
                    child: labels[children[v][0]].clone(),
                });
            }
        }

        // Heights and leftmost leaf (by first appearance) via post-order.
        let root = roots[0];
        let mut order = Vec::with_capacity(n);
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            order.push(v);
            stack.extend(children[v].iter().copied());
        }
        let leaves_tmp: Vec<usize> = (0..n).filter(|&v| children[v].is_empty()).collect();
        let mut leaf_rank = vec![usize::MAX; n];
        for (rank, &v) in leaves_tmp.iter().enumerate() {
            leaf_rank[v] = rank;
        }
        let mut height = vec![1usize; n];
        let mut min_leaf = leaf_rank.clone();
        for &v in order.iter().rev() {
            for &c in &children[v] {
                height[v] = height[v].max(height[c] + 1);
                min_leaf[v] = min_leaf[v].min(min_leaf[c]);
            }
        }

        let q = leaves_tmp.len();
        let mut internal: Vec<usize> = (0..n).filter(|&v| !children[v].is_empty()).collect();
        internal.sort_by_key(|&v| (height[v], min_leaf[v], v));

        let mut new_id = vec![0usize; n];
        for (i, &v) in leaves_tmp.iter().chain(internal.iter()).enumerate() {
            new_id[v] = i;
        }
        let mut names = vec![String::new(); n];
        let mut new_parent = vec![None; n];
        let mut new_children = vec![Vec::new(); n];
        let mut new_height = vec![0; n];
        for v in 0..n {
            let id = new_id[v];
            names[id] = labels[v].clone();
            new_parent[id] = parent[v].map(|p| new_id[p]);
            new_children[id] = children[v].iter().map(|&c| new_id[c]).collect();
            new_height[id] = height[v];
        }
        let mut leaves_under = vec![0usize; n];
        for v in 0..n {
            leaves_under[v] = if v < q {
                1
            } else {
                new_children[v].iter().map(|&c| leaves_under[c]).sum()
            };
        }
        let index = names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();

        Ok(Self {
            names,
            parent: new_parent,
            children: new_children,
            height: new_height,
            leaves_under,
            q,
            index,
        })
    }

    /// Reads a tree file: one `child<TAB>parent` edge per line, `#` comments.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let edges = parse_edges(&text)?;
        Self::from_edges(&edges)
    }

    pub fn p(&self) -> usize {
        self.names.len()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn root(&self) -> usize {
        self.p() - 1
    }

    pub fn is_leaf(&self, j: usize) -> bool {
        j < self.q
    }

    pub fn name(&self, j: usize) -> &str {
        &self.names[j]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn parent(&self, j: usize) -> Option<usize> {
        self.parent[j]
    }

    pub fn children(&self, j: usize) -> &[usize] {
        &self.children[j]
    }

    /// Internal node indices, `q..p`, in increasing order.
    pub fn internal_nodes(&self) -> std::ops::Range<usize> {
        self.q..self.p()
    }

    /// Number of leaves in the subtree rooted at `j`.
    pub fn leaves_under(&self, j: usize) -> usize {
        self.leaves_under[j]
    }

    /// Ancestors of `j` from its parent up to and including the root.
    pub fn ancestors(&self, j: usize) -> Result<Vec<usize>> {
        self.check_index(j)?;
        let mut out = Vec::new();
        let mut cur = self.parent[j];
        while let Some(a) = cur {
            out.push(a);
            cur = self.parent[a];
        }
        Ok(out)
    }

    pub fn depth(&self, j: usize) -> Result<usize> {
        self.check_index(j)?;
        let mut d = 0;
        let mut cur = self.parent[j];
        while let Some(a) = cur {
            d += 1;
            cur = self.parent[a];
        }
        Ok(d)
    }

    pub fn level_sets(&self) -> LevelSets {
        let l_max = self.height[self.root()];
        let mut levels = vec![Vec::new(); l_max];
        for j in 0..self.p() {
            levels[self.height[j] - 1].push(j);
        }
        LevelSets { levels }
    }

    /// Number of fused (adjacent sibling) differences; always `q - 1`.
    pub fn fused_row_count(&self) -> usize {
        self.internal_nodes()
            .map(|j| self.children[j].len() - 1)
            .sum()
    }

    /// Fills internal-node values from leaf values by summation.
    pub fn expand_leaves(&self, leaves: &[f64]) -> Result<Vec<f64>> {
        if leaves.len() != self.q {
            return Err(Error::LengthMismatch {
                expected: self.q,
                got: leaves.len(),
            });
        }
        let mut full = vec![0.0; self.p()];
        full[..self.q].copy_from_slice(leaves);
        for j in self.internal_nodes() {
            full[j] = self.children[j].iter().map(|&c| full[c]).sum();
        }
        Ok(full)
    }

    /// Checks the compositional constraints on a full length-`p` vector.
    pub fn check_composition(&self, x: &[f64], tol: f64) -> Result<CompositionReport> {
        if x.len() != self.p() {
            return Err(Error::LengthMismatch {
                expected: self.p(),
                got: x.len(),
            });
        }
        let mut report = CompositionReport::default();
        let leaf_sum: f64 = x[..self.q].iter().sum();
        if (leaf_sum - 1.0).abs() > tol {
            report.violations.push(Violation::LeafSum { sum: leaf_sum });
        }
        for j in self.internal_nodes() {
            let children_sum: f64 = self.children[j].iter().map(|&c| x[c]).sum();
            if (x[j] - children_sum).abs() > tol {
                report.violations.push(Violation::NodeSum {
                    node: j,
                    value: x[j],
                    children_sum,
                });
            }
        }
        Ok(report)
    }

    /// Edges as `(child, parent)` labels in index order of the child.
    pub fn edges(&self) -> Vec<(String, String)> {
        (0..self.p())
            .filter_map(|j| {
                self.parent[j].map(|p| (self.names[j].clone(), self.names[p].clone()))
            })
            .collect()
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j >= self.p() {
            return Err(Error::IndexOutOfRange {
                index: j,
                p: self.p(),
            });
        }
        Ok(())
    }
}

/// Parses tree-file text into `(child, parent)` pairs.
pub fn parse_edges(text: &str) -> Result<Vec<(String, String)>> {
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("expected `child<TAB>parent`, found {} field(s)", fields.len()),
            });
        }
        let (child, parent) = (fields[0].trim(), fields[1].trim());
        if child.is_empty() || parent.is_empty() {
            return Err(Error::Parse {
                line: i + 1,
                msg: "empty node label".to_string(),
            });
        }
        edges.push((child.to_string(), parent.to_string()));
    }
    Ok(edges)
}
