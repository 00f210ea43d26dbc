//! No-arbitrage on a single model and across a family: node-wise checks,
//! quantitative certificates `(β, κ)`, the robust no-arbitrage LP and the
//! position bounds `G_t` for admissible strategies.

pub mod hull;

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::lp::{row_key, Cmp, LinearProgram, Sense};
use crate::market::{check_containment, conditional_support, wealth_coefficients, ModelFamily, PriceModel, Strategy};
use crate::rng::substream;
use crate::space::{FilteredTree, NodeId};

/// Tolerance on the robust no-arbitrage LP optimum.
pub const RNA_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CertOptions {
    /// Seed for direction sampling in hulls of dimension three or more.
    pub seed: u64,
}

/// Increments out of one node, in coordinates of their linear hull.
struct Local {
    linear: bool,
    coords: Vec<Vec<f64>>,
    probs: Vec<f64>,
    k: usize,
}

impl Local {
    fn new(tree: &FilteredTree, model: &PriceModel, node: NodeId) -> Self {
        let hull = conditional_support(tree, model, node);
        let coords = model
            .child_increments(tree, node)
            .iter()
            .map(|inc| hull.coordinates(inc))
            .collect();
        let probs = tree.children(node).iter().map(|&c| tree.cond_prob(c)).collect();
        Local {
            linear: hull.is_linear(),
            k: hull.dim(),
            coords,
            probs,
        }
    }

    fn radius_tol(&self) -> f64 {
        1e-10 * self.coords.iter().map(|c| norm(c)).fold(1.0, f64::max)
    }

    fn na(&self) -> bool {
        if !self.linear {
            return false;
        }
        match self.k {
            0 => true,
            1..=3 => hull::facets(&self.coords, self.k).inradius() > self.radius_tol(),
            _ => hull::origin_in_relint(&self.coords, self.k),
        }
    }
}

/// One-period no-arbitrage at `node`: the origin is in the relative interior
/// of the convex hull of the child increments.
pub fn one_step_na(tree: &FilteredTree, model: &PriceModel, node: NodeId) -> bool {
    Local::new(tree, model, node).na()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NaReport {
    pub holds: bool,
    pub violations: Vec<NodeId>,
}

/// Multi-period no-arbitrage: one-step NA at every internal node.
pub fn na_check(tree: &FilteredTree, model: &PriceModel) -> NaReport {
    let violations: Vec<NodeId> = tree
        .internal_nodes()
        .iter()
        .copied()
        .filter(|&n| !one_step_na(tree, model, n))
        .collect();
    NaReport {
        holds: violations.is_empty(),
        violations,
    }
}

fn checked_local(tree: &FilteredTree, model: &PriceModel, node: NodeId) -> Result<Local> {
    let local = Local::new(tree, model, node);
    if !local.na() {
        return Err(Error::ArbitrageAtNode {
            model: model.name.clone(),
            path: tree.path(node),
        });
    }
    if local.k == 0 {
        return Err(Error::DegenerateSupport { path: tree.path(node) });
    }
    Ok(local)
}

fn local_beta(local: &Local, seed: u64, node: NodeId) -> Result<(f64, Vec<Vec<f64>>)> {
    if local.k <= 3 {
        let f = hull::facets(&local.coords, local.k);
        return Ok((f.inradius(), f.normals));
    }
    let mut rng = substream(seed, node as u64);
    let beta = hull::SAMPLED_SHRINK * hull::sampled_inradius(&local.coords, local.k, &mut rng);
    if beta <= 0.0 {
        return Err(Error::Numeric(format!("sampled in-radius {beta:e} is not positive")));
    }
    Ok((beta, Vec::new()))
}

/// Largest uniform `β` and matching `κ` at `node`: every unit direction `ξ`
/// in the support leaves conditional mass at least `κ` on `<ξ, ΔS> <= -β`.
pub fn beta_kappa(tree: &FilteredTree, model: &PriceModel, node: NodeId, opts: CertOptions) -> Result<(f64, f64)> {
    let local = checked_local(tree, model, node)?;
    let (beta, normals) = local_beta(&local, opts.seed, node)?;
    let kappa = match local.k {
        1 => {
            let t = beta * (1.0 - 1e-9);
            let below = hull::mass_below(&local.coords, &local.probs, &[1.0], -t);
            let above = hull::mass_below(&local.coords, &local.probs, &[-1.0], -t);
            below.min(above)
        }
        2 => hull::planar_kappa(&local.coords, &local.probs, beta),
        k => {
            let mut rng = substream(opts.seed, (node as u64) | (1 << 63));
            hull::candidate_kappa(&local.coords, &local.probs, beta, &normals, k, &mut rng)
        }
    };
    Ok((beta, kappa))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeCertificate {
    pub node: NodeId,
    pub path: String,
    /// Trading period `t`; the node sits at depth `t - 1`.
    pub period: usize,
    pub beta: f64,
    pub kappa: f64,
    pub support_dim: usize,
    pub one_step_na: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NaCertificate {
    pub model: String,
    pub na: bool,
    pub nodes: Vec<NodeCertificate>,
}

/// Certificates at every internal node. Nodes with support `{0}` carry
/// `(∞, 1)`; nodes that violate one-step NA carry `(0, 0)`.
pub fn certificates(tree: &FilteredTree, model: &PriceModel, opts: CertOptions) -> Result<NaCertificate> {
    let mut nodes = Vec::new();
    let mut na = true;
    for &n in tree.internal_nodes() {
        let local = Local::new(tree, model, n);
        let ok = local.na();
        na &= ok;
        let (beta, kappa) = if !ok {
            (0.0, 0.0)
        } else if local.k == 0 {
            (f64::INFINITY, 1.0)
        } else {
            beta_kappa(tree, model, n, opts)?
        };
        nodes.push(NodeCertificate {
            node: n,
            path: tree.path(n),
            period: tree.depth(n) + 1,
            beta,
            kappa,
            support_dim: local.k,
            one_step_na: ok,
        });
    }
    Ok(NaCertificate {
        model: model.name.clone(),
        na,
        nodes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustNaVerdict {
    pub holds: bool,
    /// Optimal value of the normalised arbitrage LP.
    pub optimum: f64,
    /// Maximiser when the condition fails.
    pub witness: Option<Strategy>,
}

/// Robust no-arbitrage: no strategy has non-negative terminal gains under
/// every model while being strictly profitable under some model.
///
/// Maximises the summed expected gain over `‖φ‖_∞ <= 1` subject to
/// non-negative terminal gains in every model and scenario.
pub fn robust_na(family: &ModelFamily) -> Result<RobustNaVerdict> {
    let tree = &family.tree;
    let n = family.strategy_dims();
    let mut lp = LinearProgram::new(Sense::Maximize);
    for _ in 0..n {
        lp.add_var(0.0, -1.0, 1.0);
    }
    let mut seen = HashSet::new();
    for model in &family.models {
        let coeffs = wealth_coefficients(tree, model);
        for &leaf in tree.leaves() {
            let p = tree.prob(leaf);
            for &(j, a) in &coeffs[leaf] {
                lp.objective[j] += p * a;
            }
            if !coeffs[leaf].is_empty() && seen.insert(row_key(&coeffs[leaf])) {
                lp.add_row(coeffs[leaf].clone(), Cmp::Ge, 0.0);
            }
        }
    }
    let sol = lp.solve().map_err(|e| Error::Numeric(format!("robust NA program: {e}")))?;
    let holds = sol.objective <= RNA_TOL;
    let witness = if holds {
        None
    } else {
        Some(Strategy::from_flat(tree, family.dim(), &sol.x)?)
    };
    Ok(RobustNaVerdict {
        holds,
        optimum: sol.objective,
        witness,
    })
}

/// Models that are arbitrage-free and whose conditional supports contain
/// those of every other model in the family.
pub fn assumption_na(family: &ModelFamily) -> Result<Vec<String>> {
    let mut stars = Vec::new();
    for m in &family.models {
        if na_check(&family.tree, m).holds && check_containment(family, &m.name)?.all_contained() {
            stars.push(m.name.clone());
        }
    }
    Ok(stars)
}

/// Bounds on the projected positions of strategies whose wealth stays
/// non-negative, one per internal node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundProcess {
    pub model: String,
    pub w0: f64,
    /// Indexed by internal-node index; `+∞` where the support is `{0}`.
    pub bounds: Vec<f64>,
}

impl BoundProcess {
    pub fn at(&self, tree: &FilteredTree, node: NodeId) -> f64 {
        self.bounds[tree.internal_index(node).expect("internal node")]
    }
}

/// `G_1 = w0 / β_1` and `G_{t+1} = (w0 + Σ_{s<=t} G_s ‖ΔS_s‖) / β_{t+1}`
/// along each path.
pub fn g_bounds(tree: &FilteredTree, model: &PriceModel, w0: f64, opts: CertOptions) -> Result<BoundProcess> {
    if !(w0 > 0.0 && w0.is_finite()) {
        return Err(Error::BadParameters(format!("initial wealth must be positive, got {w0}")));
    }
    if !na_check(tree, model).holds {
        return Err(Error::ArbitrageInModel(model.name.clone()));
    }
    let mut acc = vec![0.0; tree.node_count()];
    let mut bounds = vec![0.0; tree.internal_nodes().len()];
    for (i, &n) in tree.internal_nodes().iter().enumerate() {
        acc[n] = match tree.parent(n) {
            None => w0,
            Some(p) => {
                let step = norm(model.increment(n));
                let g = bounds[tree.internal_index(p).expect("internal parent")];
                acc[p] + if step == 0.0 { 0.0 } else { g * step }
            }
        };
        let local = Local::new(tree, model, n);
        bounds[i] = if local.k == 0 {
            f64::INFINITY
        } else {
            acc[n] / local_beta(&local, opts.seed, n)?.0
        };
    }
    Ok(BoundProcess {
        model: model.name.clone(),
        w0,
        bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::NodeSpec;

    fn one_step(incs: &[Vec<f64>], probs: &[f64]) -> (FilteredTree, PriceModel) {
        let spec = NodeSpec::branch(1.0, probs.iter().map(|&p| NodeSpec::leaf(p)).collect());
        let tree = FilteredTree::build(&spec).unwrap();
        let d = incs[0].len();
        let mut increments = vec![vec![0.0; d]];
        increments.extend(incs.iter().cloned());
        let model = PriceModel {
            name: "m".into(),
            initial: vec![1.0; d],
            increments,
        };
        (tree, model)
    }

    #[test]
    fn coin_certificate() {
        let (tree, m) = one_step(&[vec![1.0], vec![-1.0]], &[0.5, 0.5]);
        assert!(one_step_na(&tree, &m, 0));
        assert_eq!(beta_kappa(&tree, &m, 0, CertOptions::default()).unwrap(), (1.0, 0.5));
        let g = g_bounds(&tree, &m, 1.0, CertOptions::default()).unwrap();
        assert_eq!(g.bounds, vec![1.0]);
    }

    #[test]
    fn asymmetric_segment_certificate() {
        let (tree, m) = one_step(&[vec![-0.5], vec![4.0]], &[0.5, 0.5]);
        assert_eq!(beta_kappa(&tree, &m, 0, CertOptions::default()).unwrap(), (0.5, 0.5));
    }

    #[test]
    fn cross_polytope_certificate() {
        let incs = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
        let (tree, m) = one_step(&incs, &[0.25; 4]);
        let (b, k) = beta_kappa(&tree, &m, 0, CertOptions::default()).unwrap();
        assert!((b - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((k - 0.25).abs() < 1e-12);
    }

    #[test]
    fn one_sided_and_single_child_nodes() {
        let (tree, m) = one_step(&[vec![1.0], vec![2.0]], &[0.5, 0.5]);
        assert!(!one_step_na(&tree, &m, 0));
        assert!(matches!(
            beta_kappa(&tree, &m, 0, CertOptions::default()),
            Err(Error::ArbitrageAtNode { .. })
        ));
        let (tree, m) = one_step(&[vec![3.0]], &[1.0]);
        assert!(!one_step_na(&tree, &m, 0));
        let (tree, m) = one_step(&[vec![0.0]], &[1.0]);
        assert!(one_step_na(&tree, &m, 0));
        assert!(matches!(
            beta_kappa(&tree, &m, 0, CertOptions::default()),
            Err(Error::DegenerateSupport { .. })
        ));
        let c = certificates(&tree, &m, CertOptions::default()).unwrap();
        assert_eq!((c.nodes[0].beta, c.nodes[0].kappa), (f64::INFINITY, 1.0));
    }

    #[test]
    fn four_dimensional_simplex_uses_sampling() {
        // Regular-ish simplex around the origin in R^4.
        let mut incs: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        incs.push(vec![-1.0; 4]);
        let (tree, m) = one_step(&incs, &[0.2; 5]);
        assert!(one_step_na(&tree, &m, 0));
        let (b, k) = beta_kappa(&tree, &m, 0, CertOptions { seed: 5 }).unwrap();
        assert!(b > 0.0 && k > 0.0);
        // Facet through e1..e4 has distance 1/2 from the origin.
        assert!(b <= 0.5 + 1e-12);
    }

    #[test]
    fn robust_na_of_a_pure_gain_model_fails() {
        let (tree, m) = one_step(&[vec![3.0], vec![3.0]], &[0.5, 0.5]);
        let fam = ModelFamily::new(tree, vec![m]).unwrap();
        let v = robust_na(&fam).unwrap();
        assert!(!v.holds);
        assert_eq!(v.witness.unwrap().positions, vec![vec![1.0]]);
        assert!(assumption_na(&fam).unwrap().is_empty());
    }

    #[test]
    fn two_one_sided_models_can_still_be_robustly_arbitrage_free() {
        // Neither model is arbitrage-free on its own, yet any position that
        // is safe under both models has zero gain.
        let (tree, a) = one_step(&[vec![1.0], vec![2.0]], &[0.5, 0.5]);
        let mut b = a.clone();
        b.name = "b".into();
        b.increments = vec![vec![0.0], vec![-1.0], vec![0.0]];
        let fam = ModelFamily::new(tree.clone(), vec![a.clone(), b.clone()]).unwrap();
        assert!(!na_check(&tree, &a).holds && !na_check(&tree, &b).holds);
        assert!(robust_na(&fam).unwrap().holds);
    }
}
