//! Length trees: rooted trees with positive edge weights and a fixed
//! cyclic order of children at every node.
//!
//! Nodes live in a flat arena and are referenced by `NodeId`. Child order is
//! preserved exactly as parsed and is never resorted; it is the embedding
//! data the rest of the crate relies on.

use crate::error::{Error, Result};
use serde::Deserialize;
use std::collections::VecDeque;

pub type NodeId = usize;

/// One node of a [`LengthTree`].
#[derive(Debug, Clone)]
pub struct TreeNode {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    /// Weight of the edge to the parent; `None` only at the root.
    pub weight_to_parent: Option<f64>,
    pub children: Vec<NodeId>,
    pub label: Option<String>,
}

/// A rooted ordered tree with positive edge weights.
#[derive(Debug, Clone)]
pub struct LengthTree {
    nodes: Vec<TreeNode>,
    root: NodeId,
}

/// Summary quantities of a tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeStats {
    /// Edge count.
    pub m: usize,
    pub n_leaves: usize,
    /// Length of the longest root-to-leaf path.
    pub longest_root_path: f64,
    /// Maximum level (edges) below the root.
    pub depth: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    label: Option<String>,
    weight: Option<f64>,
    children: Option<Vec<RawNode>>,
}

/// Borrowing serializer for one subtree in the nested JSON form.
pub(crate) struct NestedTree<'a> {
    pub tree: &'a LengthTree,
    pub id: NodeId,
}

impl serde::Serialize for NestedTree<'_> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let n = self.tree.node(self.id);
        let count = usize::from(!n.children.is_empty())
            + usize::from(n.label.is_some())
            + usize::from(n.weight_to_parent.is_some());
        let mut map = s.serialize_map(Some(count))?;
        if !n.children.is_empty() {
            map.serialize_entry(
                "children",
                &NestedChildren {
                    tree: self.tree,
                    ids: &n.children,
                },
            )?;
        }
        if let Some(l) = &n.label {
            map.serialize_entry("label", l)?;
        }
        if let Some(w) = n.weight_to_parent {
            map.serialize_entry("weight", &w)?;
        }
        map.end()
    }
}

struct NestedChildren<'a> {
    tree: &'a LengthTree,
    ids: &'a [NodeId],
}

impl serde::Serialize for NestedChildren<'_> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.ids.len()))?;
        for &c in self.ids {
            seq.serialize_element(&NestedTree {
                tree: self.tree,
                id: c,
            })?;
        }
        seq.end()
    }
}

impl LengthTree {
    /// Build a tree from parallel arrays; used by generators and tests.
    pub fn from_nodes(nodes: Vec<TreeNode>, root: NodeId) -> Result<Self> {
        if root >= nodes.len() {
            return Err(Error::UnknownNode(format!("root index {root}")));
        }
        let tree = LengthTree { nodes, root };
        tree.check()?;
        Ok(tree)
    }

    fn check(&self) -> Result<()> {
        if self.nodes.len() < 2 {
            return Err(Error::Parse {
                path: "root".into(),
                msg: "empty tree (no edges)".into(),
            });
        }
        for n in &self.nodes {
            match (n.parent, n.weight_to_parent) {
                (None, None) if n.id == self.root => {}
                (Some(_), Some(w)) if w > 0.0 && w.is_finite() => {}
                _ => {
                    return Err(Error::Parse {
                        path: format!("node {}", n.id),
                        msg: "inconsistent parent/weight".into(),
                    })
                }
            }
        }
        Ok(())
    }

    /// Parse the nested-JSON tree format:
    /// `{"label": string?, "weight": number (absent only at root), "children": [node...]?}`.
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawNode = serde_json::from_str(text)?;
        if raw.weight.is_some() {
            return Err(Error::Parse {
                path: "root".into(),
                msg: "root must not carry a weight".into(),
            });
        }
        let mut nodes = Vec::new();
        Self::convert(&raw, None, None, "root", &mut nodes)?;
        if nodes.len() < 2 {
            return Err(Error::Parse {
                path: "root".into(),
                msg: "empty tree (no edges)".into(),
            });
        }
        Ok(LengthTree { nodes, root: 0 })
    }

    fn convert(
        raw: &RawNode,
        parent: Option<NodeId>,
        weight: Option<f64>,
        path: &str,
        nodes: &mut Vec<TreeNode>,
    ) -> Result<NodeId> {
        if let Some(w) = weight {
            if w <= 0.0 || !w.is_finite() {
                return Err(Error::Parse {
                    path: path.into(),
                    msg: format!("edge weight must be a positive finite number, got {w}"),
                });
            }
        }
        let id = nodes.len();
        nodes.push(TreeNode {
            id,
            parent,
            weight_to_parent: weight,
            children: Vec::new(),
            label: raw.label.clone(),
        });
        if let Some(children) = &raw.children {
            for (i, ch) in children.iter().enumerate() {
                let cpath = format!("{path}.children[{i}]");
                let w = ch.weight.ok_or_else(|| Error::Parse {
                    path: cpath.clone(),
                    msg: "missing \"weight\"".into(),
                })?;
                let cid = Self::convert(ch, Some(id), Some(w), &cpath, nodes)?;
                nodes[id].children.push(cid);
            }
        }
        Ok(id)
    }

    /// Emit the nested-JSON form (inverse of [`LengthTree::parse`]).
    pub fn to_json_value(&self) -> serde_json::Value {
        self.node_to_value(self.root)
    }

    fn node_to_value(&self, id: NodeId) -> serde_json::Value {
        let n = &self.nodes[id];
        let mut map = serde_json::Map::new();
        if let Some(l) = &n.label {
            map.insert("label".into(), serde_json::Value::String(l.clone()));
        }
        if let Some(w) = n.weight_to_parent {
            map.insert("weight".into(), serde_json::json!(w));
        }
        if !n.children.is_empty() {
            let ch: Vec<_> = n.children.iter().map(|&c| self.node_to_value(c)).collect();
            map.insert("children".into(), serde_json::Value::Array(ch));
        }
        serde_json::Value::Object(map)
    }

    /// Nested-JSON text, serialized straight from the arena (byte-identical
    /// to `to_json_value().to_string()` but without the intermediate value
    /// tree; keys come out in alphabetical order either way).
    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&NestedTree {
            tree: self,
            id: self.root,
        })
        .expect("tree serialization cannot fail")
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        self.nodes[id].children.is_empty()
    }

    /// Degree counting the parent edge.
    pub fn degree(&self, id: NodeId) -> usize {
        self.nodes[id].children.len() + usize::from(self.nodes[id].parent.is_some())
    }

    pub fn leaves(&self) -> Vec<NodeId> {
        self.nodes.iter().filter(|n| n.children.is_empty()).map(|n| n.id).collect()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.children.is_empty()).count()
    }

    /// Weight of the edge from `id` to its parent. Panics at the root.
    pub fn weight(&self, id: NodeId) -> f64 {
        self.nodes[id].weight_to_parent.expect("root has no parent edge")
    }

    pub fn max_edge_weight(&self) -> f64 {
        self.nodes.iter().filter_map(|n| n.weight_to_parent).fold(0.0, f64::max)
    }

    /// Pre-order node ids (parent before children, children in stored order).
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            out.push(id);
            for &c in self.nodes[id].children.iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    pub fn stats(&self) -> TreeStats {
        let mut n_leaves = 0;
        let mut longest = 0.0f64;
        let mut depth = 0usize;
        // (node, path length, level)
        let mut stack = vec![(self.root, 0.0f64, 0usize)];
        while let Some((id, len, lvl)) = stack.pop() {
            let n = &self.nodes[id];
            if n.children.is_empty() {
                n_leaves += 1;
                longest = longest.max(len);
                depth = depth.max(lvl);
            }
            for &c in &n.children {
                stack.push((c, len + self.weight(c), lvl + 1));
            }
        }
        TreeStats {
            m: self.edge_count(),
            n_leaves,
            longest_root_path: longest,
            depth,
        }
    }

    /// Merge away all degree-2 nodes, summing the merged edge weights.
    /// A degree-2 root is removed by merging its two incident edges and
    /// rerooting at its first child. Leaf set and leaf-to-leaf path lengths
    /// are unchanged.
    pub fn normalize(&self) -> LengthTree {
        let mut nodes: Vec<Option<TreeNode>> = self.nodes.iter().cloned().map(Some).collect();
        let mut root = self.root;
        loop {
            let mut changed = false;

            // non-root nodes with exactly one child
            let candidate = nodes.iter().flatten().find(|n| {
                n.id != root && n.parent.is_some() && n.children.len() == 1
            }).map(|n| n.id);
            if let Some(v) = candidate {
                let parent = nodes[v].as_ref().unwrap().parent.unwrap();
                let child = nodes[v].as_ref().unwrap().children[0];
                let w_up = nodes[v].as_ref().unwrap().weight_to_parent.unwrap();
                {
                    let c = nodes[child].as_mut().unwrap();
                    c.parent = Some(parent);
                    c.weight_to_parent = Some(c.weight_to_parent.unwrap() + w_up);
                }
                let p = nodes[parent].as_mut().unwrap();
                let slot = p.children.iter().position(|&x| x == v).unwrap();
                p.children[slot] = child;
                nodes[v] = None;
                changed = true;
            } else if nodes[root].as_ref().unwrap().children.len() == 2 {
                // degree-2 root: merge the two incident edges, delete the root
                let a = nodes[root].as_ref().unwrap().children[0];
                let b = nodes[root].as_ref().unwrap().children[1];
                let wa = nodes[a].as_ref().unwrap().weight_to_parent.unwrap();
                let wb = nodes[b].as_ref().unwrap().weight_to_parent.unwrap();
                {
                    let bn = nodes[b].as_mut().unwrap();
                    bn.parent = Some(a);
                    bn.weight_to_parent = Some(wa + wb);
                }
                {
                    let an = nodes[a].as_mut().unwrap();
                    an.parent = None;
                    an.weight_to_parent = None;
                    // b takes the cyclic slot the old root edge had
                    an.children.insert(0, b);
                }
                nodes[root] = None;
                root = a;
                changed = true;
            }

            if !changed {
                break;
            }
        }

        // compact ids in preorder
        let mut old_new = vec![usize::MAX; nodes.len()];
        let mut order = Vec::new();
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            old_new[id] = order.len();
            order.push(id);
            for &c in nodes[id].as_ref().unwrap().children.iter().rev() {
                stack.push(c);
            }
        }
        let new_nodes = order
            .iter()
            .map(|&old| {
                let n = nodes[old].as_ref().unwrap();
                TreeNode {
                    id: old_new[old],
                    parent: n.parent.map(|p| old_new[p]),
                    weight_to_parent: n.weight_to_parent,
                    children: n.children.iter().map(|&c| old_new[c]).collect(),
                    label: n.label.clone(),
                }
            })
            .collect();
        LengthTree { nodes: new_nodes, root: 0 }
    }

    /// Reorient the tree so `new_root` is the root. The underlying weighted
    /// tree and the cyclic order of edges around every node are unchanged;
    /// node ids are preserved.
    pub fn reroot(&self, new_root: NodeId) -> Result<LengthTree> {
        if new_root >= self.nodes.len() {
            return Err(Error::UnknownNode(format!("node index {new_root}")));
        }
        if new_root == self.root {
            return Ok(self.clone());
        }
        let mut path = vec![new_root];
        while let Some(p) = self.nodes[*path.last().unwrap()].parent {
            path.push(p);
        }
        debug_assert_eq!(*path.last().unwrap(), self.root);

        let mut nodes = self.nodes.clone();
        for i in 0..path.len() {
            let v = path[i];
            let old = &self.nodes[v];
            if i == 0 {
                // new root: cycle was (parent, c1..ck) -> children (c1..ck, parent)
                let mut ch = old.children.clone();
                ch.push(old.parent.unwrap());
                nodes[v].children = ch;
                nodes[v].parent = None;
                nodes[v].weight_to_parent = None;
            } else {
                let toward = path[i - 1]; // former child, new parent
                let j = old.children.iter().position(|&c| c == toward).unwrap();
                let k = old.children.len();
                let mut ch = Vec::with_capacity(k);
                for step in 1..k {
                    ch.push(old.children[(j + step) % k]);
                }
                if let Some(op) = old.parent {
                    // old parent joins the cycle in its original slot
                    ch.insert(k - 1 - j, op);
                }
                nodes[v].children = ch;
                nodes[v].parent = Some(toward);
                // the edge (v, toward) keeps its weight, now oriented v -> toward
                nodes[v].weight_to_parent = self.nodes[toward].weight_to_parent;
            }
        }
        Ok(LengthTree { nodes, root: new_root })
    }

    pub fn reroot_by_label(&self, label: &str) -> Result<LengthTree> {
        self.reroot(self.find_by_label(label)?)
    }

    pub fn find_by_label(&self, label: &str) -> Result<NodeId> {
        let mut hits = self.nodes.iter().filter(|n| n.label.as_deref() == Some(label));
        match (hits.next(), hits.next()) {
            (Some(n), None) => Ok(n.id),
            (Some(_), Some(_)) => Err(Error::UnknownNode(format!("label \"{label}\" is ambiguous"))),
            _ => Err(Error::UnknownNode(format!("label \"{label}\""))),
        }
    }

    /// Fill in missing labels level by level: root "u", its children
    /// "u1".."um", children of "u1" become "u11", "u12", ...
    pub fn with_auto_labels(&self) -> LengthTree {
        let mut nodes = self.nodes.clone();
        let mut effective = vec![String::new(); nodes.len()];
        let mut queue = VecDeque::from([self.root]);
        while let Some(id) = queue.pop_front() {
            let eff = match &nodes[id].label {
                Some(l) => l.clone(),
                None => {
                    let name = match nodes[id].parent {
                        None => "u".to_string(),
                        Some(p) => {
                            let j = nodes[p].children.iter().position(|&c| c == id).unwrap();
                            format!("{}{}", effective[p], j + 1)
                        }
                    };
                    nodes[id].label = Some(name.clone());
                    name
                }
            };
            effective[id] = eff;
            for &c in &nodes[id].children {
                queue.push_back(c);
            }
        }
        LengthTree { nodes, root: self.root }
    }

    /// Structural equality of weighted embedded rooted trees: exact weights,
    /// children compared in order, the root's children compared as a cycle
    /// (rotations allowed). Labels are ignored.
    pub fn canonical_eq(&self, other: &LengthTree) -> bool {
        if self.nodes.len() != other.nodes.len() {
            return false;
        }
        let ra = &self.nodes[self.root];
        let rb = &other.nodes[other.root];
        let k = ra.children.len();
        if k != rb.children.len() {
            return false;
        }
        (0..k).any(|rot| {
            (0..k).all(|i| {
                self.subtree_eq(ra.children[i], other, rb.children[(i + rot) % k])
            })
        })
    }

    fn subtree_eq(&self, a: NodeId, other: &LengthTree, b: NodeId) -> bool {
        let na = &self.nodes[a];
        let nb = &other.nodes[b];
        if na.weight_to_parent != nb.weight_to_parent
            || na.children.len() != nb.children.len()
        {
            return false;
        }
        na.children
            .iter()
            .zip(&nb.children)
            .all(|(&ca, &cb)| self.subtree_eq(ca, other, cb))
    }

    /// Sorted multiset of all pairwise leaf-to-leaf path lengths. Leaves are
    /// taken in the unrooted sense (degree 1), so the multiset is invariant
    /// under rerooting.
    pub fn leaf_distances(&self) -> Vec<f64> {
        // distance from root to every node
        let mut dist = vec![0.0f64; self.nodes.len()];
        for &id in &self.preorder() {
            if let Some(p) = self.nodes[id].parent {
                dist[id] = dist[p] + self.weight(id);
            }
        }
        let leaves: Vec<NodeId> = self
            .nodes
            .iter()
            .filter(|n| self.degree(n.id) <= 1)
            .map(|n| n.id)
            .collect();
        let mut out = Vec::new();
        for i in 0..leaves.len() {
            for j in (i + 1)..leaves.len() {
                let (a, b) = (leaves[i], leaves[j]);
                // walk up to the common ancestor
                let mut seen = std::collections::HashSet::new();
                let mut cur = Some(a);
                while let Some(c) = cur {
                    seen.insert(c);
                    cur = self.nodes[c].parent;
                }
                let mut anc = b;
                while !seen.contains(&anc) {
                    anc = self.nodes[anc].parent.unwrap();
                }
                out.push(dist[a] + dist[b] - 2.0 * dist[anc]);
            }
        }
        out.sort_by(|x, y| x.partial_cmp(y).unwrap());
        out
    }
}
