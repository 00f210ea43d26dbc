//! Small dense vector helpers and the affine-hull primitive.

use nalgebra::DMatrix;

/// Relative singular-value cut-off for rank decisions.
pub const RANK_TOL: f64 = 1e-10;
/// Absolute distance below which a point is considered inside an affine set.
pub const HULL_TOL: f64 = 1e-9;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Orthonormal basis of the span of `vectors` (each of length `dim`).
///
/// Uses the left singular vectors whose singular values exceed
/// `RANK_TOL` times the largest one.
pub fn orthonormal_span(vectors: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    if vectors.is_empty() || dim == 0 {
        return Vec::new();
    }
    let m = DMatrix::from_fn(dim, vectors.len(), |i, j| vectors[j][i]);
    let svd = m.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return Vec::new();
    }
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > RANK_TOL * smax)
        .map(|(k, _)| u.column(k).iter().cloned().collect())
        .collect()
}

/// Smallest affine set containing a finite point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineHull {
    /// Point of the set closest to the origin; `None` when the origin lies in
    /// the set, i.e. the set is a linear subspace.
    pub offset: Option<Vec<f64>>,
    /// Orthonormal basis of the direction space.
    pub basis: Vec<Vec<f64>>,
    pub ambient_dim: usize,
}

impl AffineHull {
    pub fn of_points(points: &[&[f64]], dim: usize) -> Self {
        let anchor = points[0];
        let diffs: Vec<Vec<f64>> = points[1..].iter().map(|p| sub(p, anchor)).collect();
        let basis = orthonormal_span(&diffs, dim);
        let mut hull = AffineHull {
            offset: None,
            basis,
            ambient_dim: dim,
        };
        let closest = hull.residual(anchor);
        if norm(&closest) > HULL_TOL {
            hull.offset = Some(closest);
        }
        hull
    }

    /// The full space `R^dim`.
    pub fn full(dim: usize) -> Self {
        let basis = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        AffineHull {
            offset: None,
            basis,
            ambient_dim: dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_linear(&self) -> bool {
        self.offset.is_none()
    }

    /// True for the degenerate set `{0}`.
    pub fn is_zero(&self) -> bool {
        self.is_linear() && self.basis.is_empty()
    }

    /// Orthogonal projection onto the direction space.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for b in &self.basis {
            let c = dot(b, x);
            for (o, bi) in out.iter_mut().zip(b) {
                *o += c * bi;
            }
        }
        out
    }

    /// Component of `x` orthogonal to the direction space.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        sub(x, &self.project(x))
    }

    /// Euclidean distance from `x` to the affine set.
    pub fn distance(&self, x: &[f64]) -> f64 {
        match &self.offset {
            None => norm(&self.residual(x)),
            Some(o) => norm(&self.residual(&sub(x, o))),
        }
    }

    /// Coordinates of `x` in the basis (ignores the orthogonal part).
    pub fn coordinates(&self, x: &[f64]) -> Vec<f64> {
        self.basis.iter().map(|b| dot(b, x)).collect()
    }

    /// Maps basis coordinates back to the ambient space.
    pub fn embed(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient_dim];
        for (b, c) in self.basis.iter().zip(y) {
            for (o, bi) in out.iter_mut().zip(b) {
                *o += c * bi;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_of_straddling_scalars_is_the_line() {
        let h = AffineHull::of_points(&[&[-1.0], &[1.0]], 1);
        assert!(h.is_linear());
        assert_eq!(h.dim(), 1);
    }

    #[test]
    fn single_point_is_affine() {
        let h = AffineHull::of_points(&[&[3.0]], 1);
        assert_eq!(h.offset, Some(vec![3.0]));
        assert_eq!(h.dim(), 0);
    }

    #[test]
    fn x_axis_hull() {
        let h = AffineHull::of_points(&[&[-1.0, 0.0], &[2.0, 0.0]], 2);
        assert!(h.is_linear());
        assert_eq!(h.dim(), 1);
        assert!((h.basis[0][0].abs() - 1.0).abs() < 1e-12);
        assert!(h.distance(&[5.0, 0.0]) < 1e-12);
        assert!((h.distance(&[0.0, 2.0]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn shifted_line_has_offset() {
        let h = AffineHull::of_points(&[&[0.0, 1.0], &[1.0, 1.0]], 2);
        let o = h.offset.clone().unwrap();
        assert!(o[0].abs() < 1e-12 && (o[1] - 1.0).abs() < 1e-12);
        assert!(h.distance(&[7.0, 1.0]) < 1e-12);
        assert!((h.distance(&[0.0, 0.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn basis_is_orthonormal() {
        let pts: Vec<Vec<f64>> = vec![
            vec![1.0, 2.0, 0.5],
            vec![-3.0, 0.1, 2.0],
            vec![0.3, -1.0, -1.0],
            vec![2.0, 2.0, 2.0],
        ];
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let h = AffineHull::of_points(&refs, 3);
        for (i, a) in h.basis.iter().enumerate() {
            for (j, b) in h.basis.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot(a, b) - expected).abs() < 1e-10);
            }
        }
    }
}
