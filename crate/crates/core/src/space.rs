//! Finite filtered probability spaces represented as scenario trees.
//!
//! Nodes at depth `t` are the atoms of the time-`t` information. Every node is
//! addressed by its index in the canonical depth-first (pre-order) traversal,
//! children visited in the order they were specified. Leaves below any node
//! occupy a contiguous range of the leaf ordering, which makes conditional
//! expectations a matter of summing slices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when validating branch probabilities.
pub const PROB_TOL: f64 = 1e-12;

/// Index of a node in canonical depth-first order.
pub type NodeId = usize;

/// Recursive description of a tree, as read from input files.
///
/// The `prob` of the root is ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub prob: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<NodeSpec>,
}

impl NodeSpec {
    pub fn leaf(prob: f64) -> Self {
        Self {
            prob,
            children: Vec::new(),
        }
    }

    pub fn branch(prob: f64, children: Vec<NodeSpec>) -> Self {
        Self { prob, children }
    }

    /// Complete tree of depth `depth` where every node branches with `probs`.
    pub fn uniform(depth: usize, probs: &[f64]) -> Self {
        fn build(prob: f64, depth: usize, probs: &[f64]) -> NodeSpec {
            if depth == 0 {
                return NodeSpec::leaf(prob);
            }
            NodeSpec::branch(prob, probs.iter().map(|&p| build(p, depth - 1, probs)).collect())
        }
        build(1.0, depth, probs)
    }
}

/// The fixed stochastic basis: an immutable, validated scenario tree.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredTree {
    horizon: usize,
    parent: Vec<Option<NodeId>>,
    depth: Vec<usize>,
    cond_prob: Vec<f64>,
    abs_prob: Vec<f64>,
    children: Vec<Vec<NodeId>>,
    by_depth: Vec<Vec<NodeId>>,
    depth_pos: Vec<usize>,
    internal_pos: Vec<Option<usize>>,
    internal: Vec<NodeId>,
    leaf_range: Vec<(usize, usize)>,
    /// Position of each node among its siblings (0 for the root).
    sibling_pos: Vec<usize>,
}

impl FilteredTree {
    /// Validates `spec` and assigns canonical node indices.
    ///
    /// Branch probabilities must be positive and sum to one within
    /// [`PROB_TOL`] at every internal node; they are then renormalised once.
    pub fn build(spec: &NodeSpec) -> Result<Self> {
        let horizon = spec_depth(spec);
        if horizon == 0 {
            return Err(Error::BadParameters("tree must have depth at least 1".into()));
        }
        let mut tree = FilteredTree {
            horizon,
            parent: Vec::new(),
            depth: Vec::new(),
            cond_prob: Vec::new(),
            abs_prob: Vec::new(),
            children: Vec::new(),
            by_depth: vec![Vec::new(); horizon + 1],
            depth_pos: Vec::new(),
            internal_pos: Vec::new(),
            internal: Vec::new(),
            leaf_range: Vec::new(),
            sibling_pos: Vec::new(),
        };
        tree.visit(spec, None, 0, 0, 1.0, 1.0)?;
        Ok(tree)
    }

    fn visit(
        &mut self,
        spec: &NodeSpec,
        parent: Option<NodeId>,
        depth: usize,
        sibling: usize,
        cond: f64,
        abs: f64,
    ) -> Result<NodeId> {
        let id = self.parent.len();
        self.parent.push(parent);
        self.depth.push(depth);
        self.cond_prob.push(cond);
        self.abs_prob.push(abs);
        self.children.push(Vec::new());
        self.depth_pos.push(self.by_depth[depth].len());
        self.by_depth[depth].push(id);
        self.sibling_pos.push(sibling);
        self.leaf_range.push((0, 0));

        if spec.children.is_empty() {
            self.internal_pos.push(None);
            if depth != self.horizon {
                return Err(Error::NonUniformDepth {
                    path: self.path(id),
                    depth,
                    horizon: self.horizon,
                });
            }
            let leaf = self.depth_pos[id];
            self.leaf_range[id] = (leaf, leaf + 1);
            return Ok(id);
        }

        self.internal_pos.push(Some(self.internal.len()));
        self.internal.push(id);
        let probs = normalised_probs(spec, || self.path(id))?;
        let first_leaf = self.by_depth[self.horizon].len();
        for (k, (child, p)) in spec.children.iter().zip(probs).enumerate() {
            let c = self.visit(child, Some(id), depth + 1, k, p, abs * p)?;
            self.children[id].push(c);
        }
        self.leaf_range[id] = (first_leaf, self.by_depth[self.horizon].len());
        Ok(id)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.by_depth[self.horizon].len()
    }

    pub fn parent(&self, node: NodeId) -> Option<NodeId> {
        self.parent[node]
    }

    pub fn depth(&self, node: NodeId) -> usize {
        self.depth[node]
    }

    pub fn children(&self, node: NodeId) -> &[NodeId] {
        &self.children[node]
    }

    pub fn is_leaf(&self, node: NodeId) -> bool {
        self.children[node].is_empty()
    }

    /// Conditional probability of the edge into `node` (1 for the root).
    pub fn cond_prob(&self, node: NodeId) -> f64 {
        self.cond_prob[node]
    }

    /// Unconditional probability of the atom `node`.
    pub fn prob(&self, node: NodeId) -> f64 {
        self.abs_prob[node]
    }

    /// Nodes at depth `t`, in canonical order.
    pub fn nodes_at(&self, t: usize) -> &[NodeId] {
        &self.by_depth[t]
    }

    /// Position of `node` among the nodes of its depth.
    pub fn depth_index(&self, node: NodeId) -> usize {
        self.depth_pos[node]
    }

    pub fn leaves(&self) -> &[NodeId] {
        &self.by_depth[self.horizon]
    }

    /// Internal nodes (depths `0..T`) in canonical order. These carry the
    /// trading decisions.
    pub fn internal_nodes(&self) -> &[NodeId] {
        &self.internal
    }

    pub fn internal_index(&self, node: NodeId) -> Option<usize> {
        self.internal_pos[node]
    }

    /// Half-open range of leaf indices below `node`.
    pub fn leaf_range(&self, node: NodeId) -> (usize, usize) {
        self.leaf_range[node]
    }

    /// Nodes from the root down to `node`, inclusive.
    pub fn path_to(&self, node: NodeId) -> Vec<NodeId> {
        let mut path = vec![node];
        let mut cur = node;
        while let Some(p) = self.parent[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Human-readable address such as `root/1/0`.
    pub fn path(&self, node: NodeId) -> String {
        let mut parts = vec!["root".to_string()];
        for n in self.path_to(node).into_iter().skip(1) {
            parts.push(self.sibling_pos[n].to_string());
        }
        parts.join("/")
    }

    /// The reference measure restricted to leaves.
    pub fn base_measure(&self) -> Measure {
        Measure {
            weights: self.leaves().iter().map(|&l| self.abs_prob[l]).collect(),
        }
    }

    /// Recursive description equivalent to this tree.
    pub fn to_spec(&self) -> NodeSpec {
        fn build(tree: &FilteredTree, node: NodeId) -> NodeSpec {
            NodeSpec {
                prob: tree.cond_prob[node],
                children: tree.children[node].iter().map(|&c| build(tree, c)).collect(),
            }
        }
        build(self, 0)
    }
}

fn spec_depth(spec: &NodeSpec) -> usize {
    spec.children.iter().map(|c| 1 + spec_depth(c)).max().unwrap_or(0)
}

/// Checks branch probabilities and rescales them so that their sequential sum
/// is exactly 1. Rescaling is skipped when that already holds, which makes
/// the operation idempotent (saved trees reload bit-identically).
fn normalised_probs(spec: &NodeSpec, path: impl Fn() -> String) -> Result<Vec<f64>> {
    let mut sum = 0.0;
    for c in &spec.children {
        if !(c.prob > 0.0) || !c.prob.is_finite() {
            return Err(Error::NonPositiveProbability {
                path: path(),
                prob: c.prob,
            });
        }
        sum += c.prob;
    }
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(Error::ProbabilitySumViolation { path: path(), sum });
    }
    let mut probs: Vec<f64> = spec.children.iter().map(|c| c.prob).collect();
    if sum != 1.0 {
        let n = probs.len();
        let mut head = 0.0;
        for p in probs.iter_mut().take(n - 1) {
            *p /= sum;
            head += *p;
        }
        probs[n - 1] = 1.0 - head;
    }
    Ok(probs)
}

/// A scalar random variable: one value per leaf, canonical leaf order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomVariable(pub Vec<f64>);

impl RandomVariable {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Builds a variable from a function of the leaf's node id.
    pub fn from_leaves(tree: &FilteredTree, f: impl Fn(NodeId) -> f64) -> Self {
        Self(tree.leaves().iter().map(|&l| f(l)).collect())
    }
}

/// A scalar process indexed by node: `values[node]` is the value at that atom.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedProcess {
    pub values: Vec<f64>,
}

impl AdaptedProcess {
    pub fn at(&self, node: NodeId) -> f64 {
        self.values[node]
    }

    /// Values at depth `t`, in canonical order.
    pub fn at_depth(&self, tree: &FilteredTree, t: usize) -> Vec<f64> {
        tree.nodes_at(t).iter().map(|&n| self.values[n]).collect()
    }

    /// Terminal values as a random variable.
    pub fn terminal(&self, tree: &FilteredTree) -> RandomVariable {
        RandomVariable(self.at_depth(tree, tree.horizon()))
    }
}

/// A probability measure on the leaves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measure {
    pub weights: Vec<f64>,
}

impl Measure {
    /// Validates non-negativity and normalisation.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(&w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::NonPositiveProbability {
                path: "measure".into(),
                prob: w,
            });
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::ProbabilitySumViolation {
                path: "measure".into(),
                sum,
            });
        }
        Ok(Self { weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Equivalence to the (full-support) reference measure.
    pub fn is_equivalent(&self) -> bool {
        self.weights.iter().all(|&w| w > 0.0)
    }

    /// Mass of the atom `node`.
    pub fn mass(&self, tree: &FilteredTree, node: NodeId) -> f64 {
        let (a, b) = tree.leaf_range(node);
        self.weights[a..b].iter().sum()
    }
}

/// `sum_leaves q(w) x(w)` in canonical leaf order.
pub fn expectation(x: &RandomVariable, q: &Measure) -> Result<f64> {
    if x.len() != q.len() {
        return Err(Error::SizeMismatch {
            expected: q.len(),
            got: x.len(),
        });
    }
    Ok(x.0.iter().zip(&q.weights).map(|(v, w)| v * w).sum())
}

/// Conditional expectation of `x` given the time-`t` atoms, one value per
/// depth-`t` node. Atoms of zero `q`-mass get the value 0.
pub fn conditional_expectation(
    tree: &FilteredTree,
    x: &RandomVariable,
    q: &Measure,
    t: usize,
) -> Result<Vec<f64>> {
    if x.len() != tree.leaf_count() || q.len() != tree.leaf_count() {
        return Err(Error::SizeMismatch {
            expected: tree.leaf_count(),
            got: if x.len() != tree.leaf_count() { x.len() } else { q.len() },
        });
    }
    if t > tree.horizon() {
        return Err(Error::DepthOutOfRange {
            depth: t,
            horizon: tree.horizon(),
        });
    }
    Ok(tree
        .nodes_at(t)
        .iter()
        .map(|&n| {
            let (a, b) = tree.leaf_range(n);
            let mass: f64 = q.weights[a..b].iter().sum();
            if mass > 0.0 {
                let num: f64 = x.0[a..b].iter().zip(&q.weights[a..b]).map(|(v, w)| v * w).sum();
                num / mass
            } else {
                0.0
            }
        })
        .collect())
}
