//! Price-model families sharing one scenario tree, trading strategies and
//! wealth, and the conditional supports of price increments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, AffineHull, HULL_TOL};
use crate::space::{AdaptedProcess, FilteredTree, NodeId};

/// One adapted `R^d` price process on the shared tree.
///
/// `increments[node]` is the price change on the edge into `node`; the root
/// entry is the zero vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceModel {
    pub name: String,
    pub initial: Vec<f64>,
    pub increments: Vec<Vec<f64>>,
}

impl PriceModel {
    pub fn dim(&self) -> usize {
        self.initial.len()
    }

    pub fn increment(&self, node: NodeId) -> &[f64] {
        &self.increments[node]
    }

    /// Price vectors at every node.
    pub fn prices(&self, tree: &FilteredTree) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = vec![Vec::new(); tree.node_count()];
        out[0] = self.initial.clone();
        for n in 1..tree.node_count() {
            let p = tree.parent(n).expect("non-root node");
            out[n] = out[p].iter().zip(&self.increments[n]).map(|(a, b)| a + b).collect();
        }
        out
    }

    /// Increments of the children of `node`.
    pub fn child_increments<'a>(&'a self, tree: &FilteredTree, node: NodeId) -> Vec<&'a [f64]> {
        tree.children(node).iter().map(|&c| self.increment(c)).collect()
    }
}

/// A non-empty family of price models on one tree.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFamily {
    pub tree: FilteredTree,
    pub models: Vec<PriceModel>,
    dim: usize,
}

impl ModelFamily {
    pub fn new(tree: FilteredTree, models: Vec<PriceModel>) -> Result<Self> {
        let first = models
            .first()
            .ok_or_else(|| Error::BadParameters("model family is empty".into()))?;
        let dim = first.dim();
        if dim == 0 {
            return Err(Error::BadParameters("models need at least one asset".into()));
        }
        for (i, m) in models.iter().enumerate() {
            if models[..i].iter().any(|o| o.name == m.name) {
                return Err(Error::BadParameters(format!("duplicate model name `{}`", m.name)));
            }
            if m.dim() != dim {
                return Err(Error::SizeMismatch {
                    expected: dim,
                    got: m.dim(),
                });
            }
            if m.increments.len() != tree.node_count() {
                return Err(Error::SizeMismatch {
                    expected: tree.node_count(),
                    got: m.increments.len(),
                });
            }
            if let Some(bad) = m.increments.iter().find(|v| v.len() != dim) {
                return Err(Error::SizeMismatch {
                    expected: dim,
                    got: bad.len(),
                });
            }
        }
        Ok(Self { tree, models, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn model(&self, name: &str) -> Result<&PriceModel> {
        self.models
            .iter()
            .find(|m| m.name == name)
            .ok_or_else(|| Error::UnknownModel(name.to_string()))
    }

    pub fn names(&self) -> Vec<String> {
        self.models.iter().map(|m| m.name.clone()).collect()
    }

    /// Sub-family with the named members, in the given order.
    pub fn subfamily(&self, names: &[&str]) -> Result<Self> {
        let models = names
            .iter()
            .map(|n| self.model(n).cloned())
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.tree.clone(), models)
    }

    /// Number of scalar strategy coordinates.
    pub fn strategy_dims(&self) -> usize {
        self.tree.internal_nodes().len() * self.dim
    }
}

/// A predictable strategy: one position vector per internal node. The
/// position held over period `t` is decided at the depth-`(t-1)` node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    pub positions: Vec<Vec<f64>>,
}

impl Strategy {
    pub fn zeros(tree: &FilteredTree, dim: usize) -> Self {
        Self {
            positions: vec![vec![0.0; dim]; tree.internal_nodes().len()],
        }
    }

    /// Strategy holding `per_depth[t-1]` at every depth-`(t-1)` node.
    pub fn per_depth(tree: &FilteredTree, per_depth: &[Vec<f64>]) -> Result<Self> {
        if per_depth.len() != tree.horizon() {
            return Err(Error::SizeMismatch {
                expected: tree.horizon(),
                got: per_depth.len(),
            });
        }
        Ok(Self {
            positions: tree
                .internal_nodes()
                .iter()
                .map(|&n| per_depth[tree.depth(n)].clone())
                .collect(),
        })
    }

    /// Row-major flattening: internal node index major, asset minor.
    pub fn from_flat(tree: &FilteredTree, dim: usize, flat: &[f64]) -> Result<Self> {
        let n = tree.internal_nodes().len();
        if flat.len() != n * dim {
            return Err(Error::SizeMismatch {
                expected: n * dim,
                got: flat.len(),
            });
        }
        Ok(Self {
            positions: flat.chunks(dim).map(|c| c.to_vec()).collect(),
        })
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.positions.iter().flatten().copied().collect()
    }

    pub fn position(&self, tree: &FilteredTree, node: NodeId) -> &[f64] {
        let idx = tree.internal_index(node).expect("positions live on internal nodes");
        &self.positions[idx]
    }

    pub fn max_abs(&self) -> f64 {
        self.positions.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn check_shape(&self, tree: &FilteredTree, dim: usize) -> Result<()> {
        let n = tree.internal_nodes().len();
        if self.positions.len() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                got: self.positions.len(),
            });
        }
        if let Some(bad) = self.positions.iter().find(|p| p.len() != dim) {
            return Err(Error::SizeMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        Ok(())
    }
}

/// `W_t = w0 + sum_{s<=t} <phi_s, dS_s>` at every node.
pub fn wealth_process(
    tree: &FilteredTree,
    model: &PriceModel,
    w0: f64,
    phi: &Strategy,
) -> Result<AdaptedProcess> {
    phi.check_shape(tree, model.dim())?;
    let mut values = vec![0.0; tree.node_count()];
    values[0] = w0;
    // Parents precede children in depth-first order.
    for n in 1..tree.node_count() {
        let p = tree.parent(n).expect("non-root node");
        values[n] = values[p] + dot(phi.position(tree, p), model.increment(n));
    }
    Ok(AdaptedProcess { values })
}

/// `W_t - w0` at every node as a sparse linear form in the flat strategy
/// coordinates (see [`Strategy::to_flat`]).
pub fn wealth_coefficients(tree: &FilteredTree, model: &PriceModel) -> Vec<Vec<(usize, f64)>> {
    let d = model.dim();
    let mut out: Vec<Vec<(usize, f64)>> = vec![Vec::new(); tree.node_count()];
    for n in 1..tree.node_count() {
        let p = tree.parent(n).expect("non-root node");
        let base = tree.internal_index(p).expect("parent is internal") * d;
        let mut expr = out[p].clone();
        for (j, &v) in model.increment(n).iter().enumerate() {
            if v != 0.0 {
                expr.push((base + j, v));
            }
        }
        out[n] = expr;
    }
    out
}

/// Affine hull of the conditional support of the increment out of `node`.
pub fn conditional_support(tree: &FilteredTree, model: &PriceModel, node: NodeId) -> AffineHull {
    let incs = model.child_increments(tree, node);
    AffineHull::of_points(&incs, model.dim())
}

/// Conditional supports at every internal node of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceField {
    /// Indexed by internal-node index.
    pub hulls: Vec<AffineHull>,
}

impl SubspaceField {
    pub fn of_model(tree: &FilteredTree, model: &PriceModel) -> Self {
        Self {
            hulls: tree
                .internal_nodes()
                .iter()
                .map(|&n| conditional_support(tree, model, n))
                .collect(),
        }
    }

    pub fn full(tree: &FilteredTree, dim: usize) -> Self {
        Self {
            hulls: vec![AffineHull::full(dim); tree.internal_nodes().len()],
        }
    }
}

/// Projects each position onto its node's (linear) support.
pub fn project_strategy(tree: &FilteredTree, phi: &Strategy, field: &SubspaceField) -> Result<Strategy> {
    let positions = phi
        .positions
        .iter()
        .zip(&field.hulls)
        .enumerate()
        .map(|(i, (pos, hull))| {
            if !hull.is_linear() {
                return Err(Error::AffineSupportNotLinear {
                    path: tree.path(tree.internal_nodes()[i]),
                });
            }
            Ok(hull.project(pos))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Strategy { positions })
}

/// Containment of conditional supports in those of a reference model.
#[derive(Debug, Clone, PartialEq)]
pub struct ContainmentReport {
    pub star: String,
    /// `(model name, node, contained)` for every model and internal node.
    pub entries: Vec<(String, NodeId, bool)>,
}

impl ContainmentReport {
    pub fn all_contained(&self) -> bool {
        self.entries.iter().all(|e| e.2)
    }

    pub fn violations(&self) -> impl Iterator<Item = &(String, NodeId, bool)> {
        self.entries.iter().filter(|e| !e.2)
    }
}

/// Checks `D_t^S ⊆ D_t^{S*}` node-wise: every child increment of `S` must lie
/// within [`HULL_TOL`] of the affine hull of the reference increments.
pub fn check_containment(family: &ModelFamily, star: &str) -> Result<ContainmentReport> {
    let star_model = family.model(star)?;
    let tree = &family.tree;
    let field = SubspaceField::of_model(tree, star_model);
    let mut entries = Vec::new();
    for m in &family.models {
        for (i, &n) in tree.internal_nodes().iter().enumerate() {
            let hull = &field.hulls[i];
            let ok = m
                .child_increments(tree, n)
                .iter()
                .all(|inc| hull.distance(inc) <= HULL_TOL);
            entries.push((m.name.clone(), n, ok));
        }
    }
    Ok(ContainmentReport {
        star: star.to_string(),
        entries,
    })
}
