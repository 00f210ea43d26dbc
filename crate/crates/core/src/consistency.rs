//! Rectangularity of a family of two-period laws: closure under gluing the
//! first-period marginal of one law to the second-period kernel of another.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::market::PriceModel;
use crate::space::FilteredTree;

/// Position and mass tolerance for law comparisons.
pub const LAW_TOL: f64 = 1e-12;

/// `(x_1, mass of x_1, law of x_2 - x_1 given x_1)`.
type Slice = (f64, f64, Vec<(f64, f64)>);

/// A finitely supported law of a price path `(x_1, ..., x_T)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathLaw {
    pub atoms: Vec<(Vec<f64>, f64)>,
}

impl PathLaw {
    /// Law of the first asset's price path under `model`.
    pub fn of_model(tree: &FilteredTree, model: &PriceModel) -> Self {
        let prices = model.prices(tree);
        let atoms = tree
            .leaves()
            .iter()
            .map(|&l| {
                let path = tree.path_to(l).iter().skip(1).map(|&n| prices[n][0]).collect();
                (path, tree.prob(l))
            })
            .collect();
        PathLaw { atoms }
    }

    fn horizon(&self) -> Option<usize> {
        self.atoms.first().map(|a| a.0.len())
    }

    /// Atoms with equal paths merged, sorted by path.
    fn canonical(&self) -> Vec<(Vec<f64>, f64)> {
        let mut out: Vec<(Vec<f64>, f64)> = Vec::new();
        let mut atoms = self.atoms.clone();
        atoms.sort_by(|a, b| cmp_paths(&a.0, &b.0));
        for (x, m) in atoms {
            match out.last_mut() {
                Some(last) if same_path(&last.0, &x) => last.1 += m,
                _ => out.push((x, m)),
            }
        }
        out
    }

    /// First marginal and, per first-period atom, the law of `x_2 - x_1`.
    fn decompose(&self) -> Vec<Slice> {
        let mut groups: BTreeMap<u64, Slice> = BTreeMap::new();
        for (x, m) in self.canonical() {
            let e = groups.entry(order_key(x[0])).or_insert((x[0], 0.0, Vec::new()));
            e.1 += m;
            e.2.push((x[1] - x[0], m));
        }
        groups
            .into_values()
            .map(|(x1, m1, incs)| (x1, m1, incs.into_iter().map(|(d, m)| (d, m / m1)).collect()))
            .collect()
    }

    /// Same support and masses within [`LAW_TOL`].
    pub fn approx_eq(&self, other: &PathLaw) -> bool {
        let (a, b) = (self.canonical(), other.canonical());
        a.len() == b.len()
            && a.iter()
                .zip(&b)
                .all(|(p, q)| same_path(&p.0, &q.0) && (p.1 - q.1).abs() <= LAW_TOL)
    }
}

fn same_path(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= LAW_TOL * (1.0 + x.abs()))
}

fn cmp_paths(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        if !((x - y).abs() <= LAW_TOL * (1.0 + x.abs())) {
            return x.total_cmp(y);
        }
    }
    a.len().cmp(&b.len())
}

/// Order-preserving integer key of a finite float.
fn order_key(x: f64) -> u64 {
    let b = (x + 0.0).to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

/// `P_0^first ⊗ P_1^kernel`. Outside the support of the kernel law's first
/// marginal, the kernel at the nearest first-period atom is used (the lower
/// one on ties).
pub fn recombine(first: &PathLaw, kernel: &PathLaw) -> PathLaw {
    let k = kernel.decompose();
    let mut atoms = Vec::new();
    for (x1, m1, _) in first.decompose() {
        let (_, _, incs) = k
            .iter()
            .min_by(|a, b| (a.0 - x1).abs().total_cmp(&(b.0 - x1).abs()).then(a.0.total_cmp(&b.0)))
            .expect("non-empty law");
        for &(d, m) in incs {
            atoms.push((vec![x1, x1 + d], m1 * m));
        }
    }
    PathLaw { atoms }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recombination {
    /// 1-based index of the law supplying the first marginal.
    pub first: usize,
    /// 1-based index of the law supplying the kernel.
    pub kernel: usize,
    pub law: PathLaw,
}

impl Recombination {
    pub fn describe(&self) -> String {
        format!("P_0^{} ⊗ P_1^{}", self.first, self.kernel)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeConsistencyVerdict {
    pub consistent: bool,
    /// First recombination, in (first, kernel) order, missing from the family.
    pub witness: Option<Recombination>,
    pub recombinations_checked: usize,
}

/// Checks that every recombination of two laws lies in the family.
pub fn time_consistency_check(laws: &[PathLaw]) -> Result<TimeConsistencyVerdict> {
    if laws.is_empty() {
        return Err(Error::BadParameters("need at least one law".into()));
    }
    for law in laws {
        match law.horizon() {
            Some(2) if law.atoms.iter().all(|a| a.0.len() == 2) => {}
            Some(t) => return Err(Error::UnsupportedHorizon(t)),
            None => return Err(Error::BadParameters("law without atoms".into())),
        }
    }
    let mut checked = 0;
    for i in 0..laws.len() {
        for j in 0..laws.len() {
            let law = recombine(&laws[i], &laws[j]);
            checked += 1;
            if !laws.iter().any(|l| l.approx_eq(&law)) {
                return Ok(TimeConsistencyVerdict {
                    consistent: false,
                    witness: Some(Recombination {
                        first: i + 1,
                        kernel: j + 1,
                        law,
                    }),
                    recombinations_checked: checked,
                });
            }
        }
    }
    Ok(TimeConsistencyVerdict {
        consistent: true,
        witness: None,
        recombinations_checked: checked,
    })
}
