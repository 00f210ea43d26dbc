#![allow(dead_code)]

use rand::Rng;
use robustlab_core::linalg::{dot, norm};
use robustlab_core::rng::LabRng;
use robustlab_core::*;

pub fn one_step_family(models: &[(&str, Vec<Vec<f64>>)], probs: &[f64]) -> ModelFamily {
    let tree = FilteredTree::build(&NodeSpec::branch(1.0, probs.iter().map(|&p| NodeSpec::leaf(p)).collect())).unwrap();
    let models = models
        .iter()
        .map(|(name, incs)| {
            let d = incs[0].len();
            let mut increments = vec![vec![0.0; d]];
            increments.extend(incs.iter().cloned());
            PriceModel {
                name: name.to_string(),
                initial: vec![0.0; d],
                increments,
            }
        })
        .collect();
    ModelFamily::new(tree, models).unwrap()
}

/// One step, increments ±1 with probability 1/2.
pub fn coin() -> ModelFamily {
    gen_bachelier(1, 0.5, 0.0, &[(1.0, 0.0)]).unwrap()
}

/// Two one-step models with increments {-1, 3} and {-3, 1}.
pub fn two_model() -> ModelFamily {
    one_step_family(
        &[("a", vec![vec![-1.0], vec![3.0]]), ("b", vec![vec![-3.0], vec![1.0]])],
        &[0.5, 0.5],
    )
}

/// One step in the plane, three scenarios around the origin.
pub fn plane() -> ModelFamily {
    one_step_family(
        &[("plane", vec![vec![1.0, 0.0], vec![-1.0, 1.0], vec![0.0, -1.0]])],
        &[0.5, 0.25, 0.25],
    )
}

pub fn random_tree(rng: &mut LabRng, max_horizon: usize, max_children: usize) -> FilteredTree {
    fn node(rng: &mut LabRng, depth: usize, max_children: usize, prob: f64) -> NodeSpec {
        if depth == 0 {
            return NodeSpec::leaf(prob);
        }
        let k = rng.gen_range(1..=max_children);
        let w: Vec<f64> = (0..k).map(|_| rng.gen_range(1..=4) as f64).collect();
        let total: f64 = w.iter().sum();
        NodeSpec::branch(prob, w.iter().map(|x| node(rng, depth - 1, max_children, x / total)).collect())
    }
    let t = rng.gen_range(1..=max_horizon);
    FilteredTree::build(&node(rng, t, max_children, 1.0)).unwrap()
}

/// Integer increments drawn uniformly from `lo..=hi`.
pub fn random_model(rng: &mut LabRng, tree: &FilteredTree, d: usize, name: &str, lo: i32, hi: i32) -> PriceModel {
    let increments = (0..tree.node_count())
        .map(|n| {
            if n == tree.root() {
                vec![0.0; d]
            } else {
                (0..d).map(|_| rng.gen_range(lo..=hi) as f64).collect()
            }
        })
        .collect();
    PriceModel {
        name: name.to_string(),
        initial: vec![0.0; d],
        increments,
    }
}

/// Independent one-step arbitrage search for `d <= 2`: an arbitrage cone,
/// when non-empty, contains an axis, an increment direction or a normal
/// to an increment.
pub fn node_has_arbitrage(tree: &FilteredTree, model: &PriceModel, node: usize) -> bool {
    let incs = model.child_increments(tree, node);
    let d = model.dim();
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        dirs.push(e);
    }
    for inc in &incs {
        dirs.push(inc.to_vec());
        if d == 2 {
            dirs.push(vec![-inc[1], inc[0]]);
        }
    }
    // Bisectors of pairs of normals reach the interior of a pointed cone.
    if d == 2 {
        let normals: Vec<Vec<f64>> = incs
            .iter()
            .filter(|v| norm(v) > 0.0)
            .flat_map(|v| {
                let r = norm(v);
                [vec![-v[1] / r, v[0] / r], vec![v[1] / r, -v[0] / r]]
            })
            .collect();
        for a in &normals {
            for b in &normals {
                dirs.push(vec![a[0] + b[0], a[1] + b[1]]);
            }
        }
    }
    let negated: Vec<Vec<f64>> = dirs.iter().map(|v| v.iter().map(|x| -x).collect()).collect();
    dirs.extend(negated);
    dirs.iter().any(|xi| {
        let gains: Vec<f64> = incs.iter().map(|inc| dot(xi, inc)).collect();
        gains.iter().all(|&g| g >= -1e-12) && gains.iter().any(|&g| g > 1e-12)
    })
}

pub fn has_arbitrage(tree: &FilteredTree, model: &PriceModel) -> bool {
    tree.internal_nodes().iter().any(|&n| node_has_arbitrage(tree, model, n))
}

/// Uniform unit vector in `R^k`.
pub fn unit(rng: &mut LabRng, k: usize) -> Vec<f64> {
    robustlab_core::arbitrage::hull::random_unit(rng, k)
}

/// Like [`random_model`], but each node's children are redrawn until the
/// node is one-step arbitrage free.
pub fn random_na_model(rng: &mut LabRng, tree: &FilteredTree, d: usize, name: &str, lo: i32, hi: i32) -> PriceModel {
    let mut model = random_model(rng, tree, d, name, lo, hi);
    for &n in tree.internal_nodes() {
        while !robustlab_core::one_step_na(tree, &model, n) {
            for &c in tree.children(n) {
                model.increments[c] = (0..d).map(|_| rng.gen_range(lo..=hi) as f64).collect();
            }
        }
    }
    model
}

/// A model whose increments stay inside the conditional supports of `star`.
pub fn contained_model(rng: &mut LabRng, tree: &FilteredTree, star: &PriceModel, name: &str) -> PriceModel {
    let d = star.dim();
    let field = SubspaceField::of_model(tree, star);
    let mut increments = vec![vec![0.0; d]; tree.node_count()];
    for (i, &n) in tree.internal_nodes().iter().enumerate() {
        let full = field.hulls[i].dim() == d;
        for &c in tree.children(n) {
            increments[c] = if full {
                (0..d).map(|_| rng.gen_range(-2..=2) as f64).collect()
            } else {
                let s = rng.gen_range(-2..=2) as f64;
                star.increment(c).iter().map(|x| s * x).collect()
            };
        }
    }
    PriceModel {
        name: name.to_string(),
        initial: vec![0.0; d],
        increments,
    }
}
