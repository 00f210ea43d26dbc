//! Geometry of a conditional increment cloud in its own linear hull:
//! origin-centred in-radius and the worst-direction mass.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{dot, norm};
use crate::lp::{Cmp, LinearProgram, Sense};
use crate::rng::LabRng;

/// Directions sampled when the hull has dimension four or more.
pub const RADIUS_SAMPLES: usize = 100_000;
/// Random directions added to the κ candidate set.
pub const KAPPA_SAMPLES: usize = 10_000;
/// Shrink factor applied to a sampled in-radius.
pub const SAMPLED_SHRINK: f64 = 0.99;

#[derive(Debug, Clone)]
pub struct Facets {
    /// Unit outward normals.
    pub normals: Vec<Vec<f64>>,
    /// `max_i <n, z_i>` for each normal; the origin is interior iff all are > 0.
    pub offsets: Vec<f64>,
}

impl Facets {
    pub fn inradius(&self) -> f64 {
        self.offsets.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

fn scale(points: &[Vec<f64>]) -> f64 {
    points.iter().map(|p| norm(p)).fold(0.0, f64::max)
}

/// Supporting hyperplanes of `conv(points)` for point clouds spanning
/// `R^k`, `k <= 3`.
pub fn facets(points: &[Vec<f64>], k: usize) -> Facets {
    let tol = 1e-9 * (1.0 + scale(points));
    let mut normals = Vec::new();
    let mut offsets = Vec::new();
    let consider = |n: Vec<f64>, anchor: &[f64], normals: &mut Vec<Vec<f64>>, offsets: &mut Vec<f64>| {
        let len = norm(&n);
        if len <= 1e-12 {
            return;
        }
        let n: Vec<f64> = n.iter().map(|v| v / len).collect();
        let c = dot(&n, anchor);
        let side: Vec<f64> = points.iter().map(|p| dot(&n, p) - c).collect();
        if side.iter().all(|&s| s <= tol) {
            offsets.push(c);
            normals.push(n.clone());
        }
        if side.iter().all(|&s| s >= -tol) {
            offsets.push(-c);
            normals.push(n.iter().map(|v| -v).collect());
        }
    };
    match k {
        1 => {
            consider(vec![1.0], &[max_coord(points)], &mut normals, &mut offsets);
            consider(vec![-1.0], &[min_coord(points)], &mut normals, &mut offsets);
        }
        2 => {
            for i in 0..points.len() {
                for j in i + 1..points.len() {
                    let e = [points[j][0] - points[i][0], points[j][1] - points[i][1]];
                    consider(vec![-e[1], e[0]], &points[i], &mut normals, &mut offsets);
                }
            }
        }
        3 => {
            for i in 0..points.len() {
                for j in i + 1..points.len() {
                    let a: Vec<f64> = (0..3).map(|c| points[j][c] - points[i][c]).collect();
                    for l in j + 1..points.len() {
                        let b: Vec<f64> = (0..3).map(|c| points[l][c] - points[i][c]).collect();
                        let n = vec![
                            a[1] * b[2] - a[2] * b[1],
                            a[2] * b[0] - a[0] * b[2],
                            a[0] * b[1] - a[1] * b[0],
                        ];
                        consider(n, &points[i], &mut normals, &mut offsets);
                    }
                }
            }
        }
        _ => panic!("facet enumeration supports dimension 1 to 3, got {k}"),
    }
    Facets { normals, offsets }
}

fn max_coord(points: &[Vec<f64>]) -> f64 {
    points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max)
}

fn min_coord(points: &[Vec<f64>]) -> f64 {
    points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min)
}

pub fn random_unit(rng: &mut LabRng, k: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-12 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// `min_y max_i <y, z_i>` over sampled unit directions.
pub fn sampled_inradius(points: &[Vec<f64>], k: usize, rng: &mut LabRng) -> f64 {
    let mut best = f64::INFINITY;
    for _ in 0..RADIUS_SAMPLES {
        let y = random_unit(rng, k);
        let m = points.iter().map(|p| dot(&y, p)).fold(f64::NEG_INFINITY, f64::max);
        best = best.min(m);
    }
    best
}

/// Whether the origin lies in the relative interior of `conv(points)`,
/// assuming the points span `R^k`: finds weights `λ >= δ > 0`, `Σλ = 1`,
/// `Σλ z = 0`.
pub fn origin_in_relint(points: &[Vec<f64>], k: usize) -> bool {
    let mut lp = LinearProgram::new(Sense::Maximize);
    let delta = lp.add_var(1.0, 0.0, 1.0);
    let lambda: Vec<usize> = points.iter().map(|_| lp.add_var(0.0, 0.0, 1.0)).collect();
    for &l in &lambda {
        lp.add_row(vec![(l, 1.0), (delta, -1.0)], Cmp::Ge, 0.0);
    }
    lp.add_row(lambda.iter().map(|&l| (l, 1.0)).collect(), Cmp::Eq, 1.0);
    for c in 0..k {
        let row = lambda
            .iter()
            .zip(points)
            .filter(|(_, p)| p[c] != 0.0)
            .map(|(&l, p)| (l, p[c]))
            .collect();
        lp.add_row(row, Cmp::Eq, 0.0);
    }
    match lp.solve() {
        Ok(sol) => sol.x[delta] > 1e-10,
        Err(_) => false,
    }
}

/// Probability mass of the points with `<y, z> <= threshold`.
pub fn mass_below(points: &[Vec<f64>], probs: &[f64], y: &[f64], threshold: f64) -> f64 {
    points
        .iter()
        .zip(probs)
        .filter(|(p, _)| dot(y, p) <= threshold)
        .map(|(_, w)| w)
        .sum()
}

/// Exact `min_{|y|=1} P(<y, z> <= -beta)` in the plane.
///
/// The mass is piecewise constant in the angle and upper semicontinuous, so
/// its minimum is attained on the open arcs between critical angles.
pub fn planar_kappa(points: &[Vec<f64>], probs: &[f64], beta: f64) -> f64 {
    let mut angles = Vec::new();
    for p in points {
        let rho = norm(p);
        if rho < beta || rho == 0.0 {
            continue;
        }
        let phi = p[1].atan2(p[0]);
        let alpha = (beta / rho).min(1.0).acos();
        for a in [phi + PI + alpha, phi + PI - alpha] {
            angles.push(a.rem_euclid(2.0 * PI));
        }
    }
    angles.sort_by(|a, b| a.total_cmp(b));
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut tests = Vec::new();
    if angles.is_empty() {
        tests.push(0.0);
    }
    for (i, &a) in angles.iter().enumerate() {
        let b = if i + 1 < angles.len() { angles[i + 1] } else { angles[0] + 2.0 * PI };
        tests.push(0.5 * (a + b));
    }
    tests
        .iter()
        .map(|t| mass_below(points, probs, &[t.cos(), t.sin()], -beta))
        .fold(f64::INFINITY, f64::min)
}

/// Minimum mass over facet normals, normalised points and random
/// directions, at threshold `-beta (1 - 1e-9)`.
pub fn candidate_kappa(
    points: &[Vec<f64>],
    probs: &[f64],
    beta: f64,
    normals: &[Vec<f64>],
    k: usize,
    rng: &mut LabRng,
) -> f64 {
    let threshold = -beta * (1.0 - 1e-9);
    let mut best = f64::INFINITY;
    let mut eval = |y: &[f64]| {
        best = best.min(mass_below(points, probs, y, threshold));
    };
    for n in normals {
        eval(n);
        eval(&n.iter().map(|v| -v).collect::<Vec<_>>());
    }
    for p in points {
        let r = norm(p);
        if r > 0.0 {
            let y: Vec<f64> = p.iter().map(|v| v / r).collect();
            eval(&y);
            eval(&y.iter().map(|v| -v).collect::<Vec<_>>());
        }
    }
    for _ in 0..KAPPA_SAMPLES {
        eval(&random_unit(rng, k));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_radius() {
        let pts = vec![vec![-0.5], vec![4.0]];
        assert_eq!(facets(&pts, 1).inradius(), 0.5);
        let pts = vec![vec![1.0], vec![2.0]];
        assert!(facets(&pts, 1).inradius() <= 0.0);
    }

    #[test]
    fn cross_polytope_radius_and_mass() {
        let pts = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
        let r = facets(&pts, 2).inradius();
        assert!((r - 0.5f64.sqrt()).abs() < 1e-12);
        let k = planar_kappa(&pts, &[0.25; 4], r);
        assert!((k - 0.25).abs() < 1e-12);
    }

    #[test]
    fn square_radius_and_mass() {
        // Vertices at (±1, ±1): in-radius 1, a near-axis direction sees two
        // vertices at or below -1 only exactly on the axis.
        let pts = vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![-1.0, -1.0]];
        let r = facets(&pts, 2).inradius();
        assert!((r - 1.0).abs() < 1e-12);
        let k = planar_kappa(&pts, &[0.25; 4], r);
        assert!((k - 0.25).abs() < 1e-12);
    }

    #[test]
    fn octahedron_radius() {
        let mut pts = Vec::new();
        for i in 0..3 {
            for s in [1.0, -1.0] {
                let mut p = vec![0.0; 3];
                p[i] = s;
                pts.push(p);
            }
        }
        let f = facets(&pts, 3);
        assert!((f.inradius() - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        let mut rng = crate::rng::generator(1);
        let k = candidate_kappa(&pts, &[1.0 / 6.0; 6], f.inradius(), &f.normals, 3, &mut rng);
        assert!((k - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn relint_lp() {
        let pts = vec![vec![1.0, 0.0], vec![-1.0, 1.0], vec![-1.0, -1.0]];
        assert!(origin_in_relint(&pts, 2));
        let pts = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0]];
        assert!(!origin_in_relint(&pts, 2));
    }

    #[test]
    fn sampled_radius_is_close_to_exact() {
        let pts = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
        let mut rng = crate::rng::generator(3);
        let r = sampled_inradius(&pts, 2, &mut rng);
        assert!(r >= 0.5f64.sqrt() - 1e-12 && r < 0.5f64.sqrt() + 1e-4);
    }
}
