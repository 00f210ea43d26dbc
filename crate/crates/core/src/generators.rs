//! Built-in example markets.

use serde::Serialize;

use crate::arbitrage::na_check;
use crate::consistency::PathLaw;
use crate::error::{Error, Result};
use crate::lp::{Cmp, LinearProgram, LpError, Sense};
use crate::market::{ModelFamily, PriceModel};
use crate::space::{FilteredTree, Measure, NodeSpec, RandomVariable};

/// Binary tree with branch probabilities `(p, 1 - p)` for the moves
/// `+1, -1`, and one model per `(sigma, mu)` with increments `sigma·ε + mu`.
pub fn gen_bachelier(horizon: usize, p: f64, s0: f64, thetas: &[(f64, f64)]) -> Result<ModelFamily> {
    if horizon == 0 || !(p > 0.0 && p < 1.0) || thetas.is_empty() {
        return Err(Error::BadParameters(
            "need horizon >= 1, p in (0, 1) and at least one (sigma, mu)".into(),
        ));
    }
    let tree = FilteredTree::build(&NodeSpec::uniform(horizon, &[p, 1.0 - p]))?;
    let models = thetas
        .iter()
        .enumerate()
        .map(|(i, &(sigma, mu))| {
            let increments = (0..tree.node_count())
                .map(|n| match tree.parent(n) {
                    None => vec![0.0],
                    Some(par) => {
                        let up = tree.children(par)[0] == n;
                        vec![if up { sigma + mu } else { -sigma + mu }]
                    }
                })
                .collect();
            PriceModel {
                name: format!("theta{}", i + 1),
                initial: vec![s0],
                increments,
            }
        })
        .collect();
    ModelFamily::new(tree, models)
}

/// Two-period market with three models on a shared tree. The first branching
/// realises `(X, ε_1)` with `X` uniform on the `n`-point grid over
/// `[-M, M]` and `ε_1 ∈ {-1/2, 4}` independent; the second realises
/// `ε_2 = ±1/2`.
///
/// * `star`: increments `ε_1`, `ε_2`
/// * `tilde`: increments `X`, `3 - X`
/// * `bar`: increments `3`, `0`
pub fn gen_remark_example(m: f64, n: usize) -> Result<ModelFamily> {
    if !(m > 1.0) || n < 3 || n.is_multiple_of(2) {
        return Err(Error::BadParameters(format!(
            "need M > 1 and an odd grid size n >= 3, got M = {m}, n = {n}"
        )));
    }
    let grid: Vec<f64> = (0..n)
        .map(|i| m * (2.0 * i as f64 - (n - 1) as f64) / (n - 1) as f64)
        .collect();
    let eps1 = [-0.5, 4.0];
    let eps2 = [0.5, -0.5];
    let p1 = 1.0 / (2 * n) as f64;
    let spec = NodeSpec::branch(
        1.0,
        (0..2 * n)
            .map(|_| NodeSpec::branch(p1, eps2.iter().map(|_| NodeSpec::leaf(0.5)).collect()))
            .collect(),
    );
    let tree = FilteredTree::build(&spec)?;
    let count = tree.node_count();
    let mut star = vec![vec![0.0]; count];
    let mut tilde = vec![vec![0.0]; count];
    let mut bar = vec![vec![0.0]; count];
    for (k, &c) in tree.children(tree.root()).iter().enumerate() {
        let x = grid[k / 2];
        star[c] = vec![eps1[k % 2]];
        tilde[c] = vec![x];
        bar[c] = vec![3.0];
        for (j, &g) in tree.children(c).iter().enumerate() {
            star[g] = vec![eps2[j]];
            tilde[g] = vec![3.0 - x];
            bar[g] = vec![0.0];
        }
    }
    let model = |name: &str, increments| PriceModel {
        name: name.into(),
        initial: vec![0.0],
        increments,
    };
    ModelFamily::new(tree, vec![model("star", star), model("tilde", tilde), model("bar", bar)])
}

/// Drift pairs of the two models of [`gen_two_drift`].
pub const TWO_DRIFTS: [(f64, f64); 2] = [(0.1, 0.3), (0.2, 0.5)];

/// Two-period coin-flip market `S_t = Σ (μ_s + ε_s)` with two drift
/// vectors, and the law of the price path under each model.
pub fn gen_two_drift() -> Result<(ModelFamily, Vec<PathLaw>)> {
    let tree = FilteredTree::build(&NodeSpec::uniform(2, &[0.5, 0.5]))?;
    let models: Vec<PriceModel> = TWO_DRIFTS
        .iter()
        .enumerate()
        .map(|(i, &(mu1, mu2))| {
            let increments = (0..tree.node_count())
                .map(|n| match tree.parent(n) {
                    None => vec![0.0],
                    Some(par) => {
                        let eps = if tree.children(par)[0] == n { 1.0 } else { -1.0 };
                        let mu = if tree.depth(n) == 1 { mu1 } else { mu2 };
                        vec![mu + eps]
                    }
                })
                .collect();
            PriceModel {
                name: format!("theta{}", i + 1),
                initial: vec![0.0],
                increments,
            }
        })
        .collect();
    let laws = models.iter().map(|m| PathLaw::of_model(&tree, m)).collect();
    Ok((ModelFamily::new(tree, models)?, laws))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptionMarket {
    /// Option price processes, one model per pricing measure.
    #[serde(skip)]
    pub family: ModelFamily,
    pub measures: Vec<Measure>,
}

/// Option-price models `E_Q[G | F_t]` for up to `k` distinct martingale
/// measures `Q` of the stock that reproduce the prices `g` of the payoffs.
pub fn gen_option_trading(
    tree: &FilteredTree,
    stock: &PriceModel,
    payoffs: &[RandomVariable],
    g: &[f64],
    k: usize,
) -> Result<OptionMarket> {
    if payoffs.is_empty() || payoffs.len() != g.len() || k == 0 {
        return Err(Error::BadParameters("need matching non-empty payoffs and prices, and k >= 1".into()));
    }
    if let Some(bad) = payoffs.iter().find(|p| p.len() != tree.leaf_count()) {
        return Err(Error::SizeMismatch {
            expected: tree.leaf_count(),
            got: bad.len(),
        });
    }
    if !na_check(tree, stock).holds {
        return Err(Error::ArbitrageInStockModel(stock.name.clone()));
    }
    let base = tree.base_measure();
    let leaves = tree.leaf_count();
    // Rows shared by every program: martingale property and pricing.
    let build = |floor: f64| {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let q: Vec<usize> = (0..leaves).map(|_| lp.add_var(0.0, 0.0, 1.0)).collect();
        lp.add_row(q.iter().map(|&v| (v, 1.0)).collect(), Cmp::Eq, 1.0);
        for &n in tree.internal_nodes() {
            for j in 0..stock.dim() {
                let mut row = Vec::new();
                for &c in tree.children(n) {
                    let a = stock.increment(c)[j];
                    if a != 0.0 {
                        let (lo, hi) = tree.leaf_range(c);
                        row.extend((lo..hi).map(|l| (q[l], a)));
                    }
                }
                if !row.is_empty() {
                    lp.add_row(row, Cmp::Eq, 0.0);
                }
            }
        }
        for (pay, &price) in payoffs.iter().zip(g) {
            let row = q.iter().zip(&pay.0).filter(|(_, &x)| x != 0.0).map(|(&v, &x)| (v, x)).collect();
            lp.add_row(row, Cmp::Eq, price);
        }
        if floor > 0.0 {
            for (l, &v) in q.iter().enumerate() {
                lp.add_row(vec![(v, 1.0)], Cmp::Ge, floor * base.weights[l]);
            }
        }
        (lp, q)
    };

    // Largest uniform density floor: positive iff an equivalent measure exists.
    let (mut lp, q) = build(0.0);
    let delta = lp.add_var(1.0, 0.0, f64::INFINITY);
    for (l, &v) in q.iter().enumerate() {
        lp.add_row(vec![(v, 1.0), (delta, -base.weights[l])], Cmp::Ge, 0.0);
    }
    let center = match lp.solve() {
        Ok(s) if s.x[delta] > 1e-10 => s,
        Ok(_) | Err(LpError::Infeasible) => return Err(Error::NoConsistentPricingMeasure),
        Err(e) => return Err(Error::Numeric(e.to_string())),
    };
    let floor = 0.5 * center.x[delta];

    let mut found: Vec<Vec<f64>> = Vec::new();
    for obj in 0..2 * leaves {
        if found.len() == k {
            break;
        }
        let (mut lp, q) = build(floor);
        let leaf = (obj / 2) % leaves;
        lp.objective[q[leaf]] = if obj % 2 == 0 { 1.0 } else { -1.0 };
        let sol = lp.solve().map_err(|e| Error::Numeric(e.to_string()))?;
        let w: Vec<f64> = q.iter().map(|&v| sol.x[v].max(0.0)).collect();
        if !found.iter().any(|f| f.iter().zip(&w).all(|(a, b)| (a - b).abs() <= 1e-9)) {
            found.push(w);
        }
    }

    let mut measures = Vec::new();
    let mut models = Vec::new();
    for (i, mut w) in found.into_iter().enumerate() {
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        let measure = Measure::new(w)?;
        let prices: Vec<Vec<f64>> = (0..tree.node_count())
            .map(|n| {
                let (lo, hi) = tree.leaf_range(n);
                let mass: f64 = measure.weights[lo..hi].iter().sum();
                payoffs
                    .iter()
                    .map(|pay| (lo..hi).map(|l| measure.weights[l] * pay.0[l]).sum::<f64>() / mass)
                    .collect()
            })
            .collect();
        let increments = (0..tree.node_count())
            .map(|n| match tree.parent(n) {
                None => vec![0.0; payoffs.len()],
                Some(p) => prices[n].iter().zip(&prices[p]).map(|(a, b)| a - b).collect(),
            })
            .collect();
        models.push(PriceModel {
            name: format!("Q{}", i + 1),
            initial: prices[tree.root()].clone(),
            increments,
        });
        measures.push(measure);
    }
    Ok(OptionMarket {
        family: ModelFamily::new(tree.clone(), models)?,
        measures,
    })
}
