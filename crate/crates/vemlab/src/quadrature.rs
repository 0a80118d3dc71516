//! Gauss-Legendre and Gauss-Lobatto rules on `[-1, 1]` plus polygon rules
//! built by fan sub-triangulation from the centroid.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::mesh::{ElementGeometry, Point2};
use crate::{Error, Result};

/// A one-dimensional rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct QuadRule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// A rule over a polygon; weights sum to its area.
#[derive(Clone, Debug)]
pub struct QuadRule2D {
    pub points: Vec<Point2>,
    pub weights: Vec<f64>,
}

impl QuadRule2D {
    pub fn integrate(&self, mut f: impl FnMut(Point2) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * f(p))
            .sum()
    }
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    // three-term recurrence for P_n and its derivative
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for m in 1..n {
        let p2 = ((2 * m + 1) as f64 * x * p1 - m as f64 * p0) / (m + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss-Legendre rule with `n` points, exact for degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> Result<QuadRule1D> {
    if n == 0 || n > 32 {
        return Err(Error::Quadrature(format!(
            "gauss_legendre supports 1..=32 points, got {n}"
        )));
    }
    if let Some(rule) = cache_get(RuleKind::Legendre, n) {
        return Ok(rule);
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Newton from the Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x.abs();
        nodes[n - 1 - i] = x.abs();
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    let rule = QuadRule1D { nodes, weights };
    cache_put(RuleKind::Legendre, n, &rule);
    Ok(rule)
}

/// Gauss-Lobatto rule with `n >= 2` points including the endpoints, exact for
/// degree `2n - 3`. Interior nodes are the roots of `P'_{n-1}`.
pub fn gauss_lobatto(n: usize) -> Result<QuadRule1D> {
    if n < 2 {
        return Err(Error::Quadrature(format!(
            "gauss_lobatto needs at least 2 points, got {n}"
        )));
    }
    if let Some(rule) = cache_get(RuleKind::Lobatto, n) {
        return Ok(rule);
    }
    let m = n - 1;
    let mut nodes = vec![0.0; n];
    nodes[0] = -1.0;
    nodes[n - 1] = 1.0;
    for i in 1..m {
        // roots of P'_m via Newton; d/dx P'_m from the Legendre ODE
        let mut x = (std::f64::consts::PI * (m - i) as f64 / m as f64).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(m, x);
            let ddp = (2.0 * x * dp - (m * (m + 1)) as f64 * p) / (1.0 - x * x);
            let dx = dp / ddp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = x;
    }
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let weights = nodes
        .iter()
        .map(|&x| {
            let (p, _) = legendre_and_derivative(m, x);
            2.0 / ((m * n) as f64 * p * p)
        })
        .collect();
    let rule = QuadRule1D { nodes, weights };
    cache_put(RuleKind::Lobatto, n, &rule);
    Ok(rule)
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum RuleKind {
    Legendre,
    Lobatto,
}

fn cache() -> &'static Mutex<HashMap<(RuleKind, usize), QuadRule1D>> {
    static CACHE: OnceLock<Mutex<HashMap<(RuleKind, usize), QuadRule1D>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cache_get(kind: RuleKind, n: usize) -> Option<QuadRule1D> {
    cache().lock().unwrap().get(&(kind, n)).cloned()
}

fn cache_put(kind: RuleKind, n: usize, rule: &QuadRule1D) {
    cache().lock().unwrap().insert((kind, n), rule.clone());
}

/// Rule over the element polygon, exact for bivariate polynomials up to
/// `degree`. Fan-triangulates from the centroid and maps a Gauss product on
/// the collapsed (Duffy) square to each triangle, so the element must be
/// star-shaped with respect to its centroid.
pub fn polygon_rule(geom: &ElementGeometry, degree: usize) -> Result<QuadRule2D> {
    let n1 = (degree + 3) / 2; // 2*n1 - 1 >= degree + 1 covers the Jacobian factor
    let gauss = gauss_legendre(n1.clamp(1, 32))?;
    let c = geom.centroid;
    let verts = &geom.vertices;
    let n = verts.len();
    let mut points = Vec::with_capacity(n * n1 * n1);
    let mut weights = Vec::with_capacity(n * n1 * n1);
    for i in 0..n {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        let jac2 = (a - c).cross(b - c); // twice the signed triangle area
        if jac2 <= 0.0 {
            return Err(Error::Quadrature(format!(
                "fan triangle {i} has non-positive area; cell is not star-shaped \
                 with respect to its centroid"
            )));
        }
        for (iu, &tu) in gauss.nodes.iter().enumerate() {
            let u = 0.5 * (tu + 1.0);
            let wu = 0.5 * gauss.weights[iu];
            for (iv, &tv) in gauss.nodes.iter().enumerate() {
                let v = 0.5 * (tv + 1.0);
                let wv = 0.5 * gauss.weights[iv];
                // collapsed map: P = C + u*[(A - C) + v*(B - A)], Jacobian u*jac2
                let p = c + ((a - c) + (b - a) * v) * u;
                points.push(p);
                weights.push(wu * wv * u * jac2);
            }
        }
    }
    Ok(QuadRule2D { points, weights })
}
