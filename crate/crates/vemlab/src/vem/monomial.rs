//! Scaled monomial bases on one element and exact (closed-form) integrals of
//! monomials over polygons, from which all polynomial Gram matrices are built.

use nalgebra::DMatrix;

use crate::mesh::{ElementGeometry, Point2};

/// Index of exponent pair `(p, q)` in graded lexicographic order
/// (degree-major, x-power descending): (0,0), (1,0), (0,1), (2,0), (1,1), ...
pub fn monomial_index(p: usize, q: usize) -> usize {
    let d = p + q;
    d * (d + 1) / 2 + q
}

/// Number of bivariate monomials of degree at most `k`.
pub fn poly_dim(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

fn exponent_list(max_deg: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(poly_dim(max_deg));
    for d in 0..=max_deg {
        for q in 0..=d {
            out.push((d - q, q));
        }
    }
    out
}

/// The basis `m_(p,q)(x) = ((x - x_E)/h_E)^p ((y - y_E)/h_E)^q`, `p + q <= k`.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    pub k: usize,
    pub exponents: Vec<(usize, usize)>,
    pub center: Point2,
    pub scale: f64,
}

impl MonomialBasis {
    pub fn new(geom: &ElementGeometry, k: usize) -> Self {
        MonomialBasis {
            k,
            exponents: exponent_list(k),
            center: geom.centroid,
            scale: geom.h,
        }
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    fn local(&self, p: Point2) -> (f64, f64) {
        (
            (p.x - self.center.x) / self.scale,
            (p.y - self.center.y) / self.scale,
        )
    }

    pub fn eval(&self, idx: usize, pt: Point2) -> f64 {
        let (xi, eta) = self.local(pt);
        let (p, q) = self.exponents[idx];
        xi.powi(p as i32) * eta.powi(q as i32)
    }

    /// Evaluates all basis functions at `pt` into `out` (length `dim()`).
    pub fn eval_all(&self, pt: Point2, out: &mut [f64]) {
        let (xi, eta) = self.local(pt);
        for (v, &(p, q)) in out.iter_mut().zip(&self.exponents) {
            *v = xi.powi(p as i32) * eta.powi(q as i32);
        }
    }

    pub fn grad(&self, idx: usize, pt: Point2) -> Point2 {
        let (xi, eta) = self.local(pt);
        let (p, q) = self.exponents[idx];
        let gx = if p == 0 {
            0.0
        } else {
            p as f64 / self.scale * xi.powi(p as i32 - 1) * eta.powi(q as i32)
        };
        let gy = if q == 0 {
            0.0
        } else {
            q as f64 / self.scale * xi.powi(p as i32) * eta.powi(q as i32 - 1)
        };
        Point2::new(gx, gy)
    }
}

/// Exact integrals `int_E ((x-cx)/s)^p ((y-cy)/s)^q dx dy` for all
/// `p + q <= max_deg`.
#[derive(Clone, Debug)]
pub struct MonomialTable {
    max_deg: usize,
    vals: Vec<f64>,
}

impl MonomialTable {
    pub fn get(&self, p: usize, q: usize) -> f64 {
        debug_assert!(p + q <= self.max_deg);
        self.vals[monomial_index(p, q)]
    }

    pub fn max_deg(&self) -> usize {
        self.max_deg
    }
}

fn factorials(n: usize) -> Vec<f64> {
    let mut f = vec![1.0; n + 1];
    for i in 1..=n {
        f[i] = f[i - 1] * i as f64;
    }
    f
}

fn binomials(n: usize) -> Vec<Vec<f64>> {
    let mut c = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..=n {
        c[i][0] = 1.0;
        for j in 1..=i {
            c[i][j] = c[i - 1][j - 1] + if j <= i - 1 { c[i - 1][j] } else { 0.0 };
        }
    }
    c
}

fn powers(x: f64, n: usize) -> Vec<f64> {
    let mut p = vec![1.0; n + 1];
    for i in 1..=n {
        p[i] = p[i - 1] * x;
    }
    p
}

/// Closed-form monomial integrals over the element polygon, by signed fan
/// triangulation from the centroid and the factorial formula on the reference
/// triangle. Exact for any simple polygon; `max_deg <= 16`.
pub fn monomial_integrals(
    geom: &ElementGeometry,
    center: Point2,
    scale: f64,
    max_deg: usize,
) -> MonomialTable {
    assert!(max_deg <= 16, "factorial formula used up to degree 16");
    let fact = factorials(max_deg + 2);
    let binom = binomials(max_deg);
    let apex = geom.centroid;
    let dim = poly_dim(max_deg);
    let mut raw = vec![0.0; dim];
    let verts = &geom.vertices;
    let n = verts.len();
    for t in 0..n {
        let a = (verts[t] - apex) * (1.0 / scale);
        let b = (verts[(t + 1) % n] - apex) * (1.0 / scale);
        let jac = a.cross(b); // signed; signed fans are exact even off-star
        if jac == 0.0 {
            continue;
        }
        let ax = powers(a.x, max_deg);
        let ay = powers(a.y, max_deg);
        let bx = powers(b.x, max_deg);
        let by = powers(b.y, max_deg);
        let mut idx = 0;
        for d in 0..=max_deg {
            for q in 0..=d {
                let p = d - q;
                // int_T (u a_x + w b_x)^p (u a_y + w b_y)^q du dw over the
                // reference triangle u, w >= 0, u + w <= 1
                let mut sum = 0.0;
                for i in 0..=p {
                    for j in 0..=q {
                        let um = i + j;
                        let wm = p + q - i - j;
                        let refint = fact[um] * fact[wm] / fact[um + wm + 2];
                        sum += binom[p][i]
                            * binom[q][j]
                            * ax[i]
                            * bx[p - i]
                            * ay[j]
                            * by[q - j]
                            * refint;
                    }
                }
                raw[idx] += jac * sum;
                idx += 1;
            }
        }
    }
    let s2 = scale * scale;
    for v in &mut raw {
        *v *= s2;
    }

    if center == apex {
        return MonomialTable { max_deg, vals: raw };
    }
    // re-center: xi_new = xi_old + d
    let d = (apex - center) * (1.0 / scale);
    let dx = powers(d.x, max_deg);
    let dy = powers(d.y, max_deg);
    let mut out = vec![0.0; dim];
    for dtot in 0..=max_deg {
        for q in 0..=dtot {
            let p = dtot - q;
            let mut sum = 0.0;
            for i in 0..=p {
                for j in 0..=q {
                    sum += binom[p][i] * binom[q][j] * dx[p - i] * dy[q - j]
                        * raw[monomial_index(i, j)];
                }
            }
            out[monomial_index(p, q)] = sum;
        }
    }
    MonomialTable { max_deg, vals: out }
}

/// Exact stiffness Gram `int_E grad m_a . grad m_b` on the first `dim`
/// monomials of `basis`.
pub fn stiffness_gram(basis: &MonomialBasis, table: &MonomialTable, dim: usize) -> DMatrix<f64> {
    let s2 = basis.scale * basis.scale;
    let mut g = DMatrix::zeros(dim, dim);
    for a in 0..dim {
        let (pa, qa) = basis.exponents[a];
        for b in a..dim {
            let (pb, qb) = basis.exponents[b];
            let mut v = 0.0;
            if pa > 0 && pb > 0 {
                v += (pa * pb) as f64 * table.get(pa + pb - 2, qa + qb);
            }
            if qa > 0 && qb > 0 {
                v += (qa * qb) as f64 * table.get(pa + pb, qa + qb - 2);
            }
            v /= s2;
            g[(a, b)] = v;
            g[(b, a)] = v;
        }
    }
    g
}

/// Exact mass Gram `int_E m_a m_b` on `rows x cols` leading monomials.
pub fn mass_gram(
    basis: &MonomialBasis,
    table: &MonomialTable,
    rows: usize,
    cols: usize,
) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(rows, cols);
    for a in 0..rows {
        let (pa, qa) = basis.exponents[a];
        for b in 0..cols {
            let (pb, qb) = basis.exponents[b];
            h[(a, b)] = table.get(pa + pb, qa + qb);
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn square() -> ElementGeometry {
        ElementGeometry::from_polygon(&[
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn indexing_is_graded_lex() {
        assert_eq!(monomial_index(0, 0), 0);
        assert_eq!(monomial_index(1, 0), 1);
        assert_eq!(monomial_index(0, 1), 2);
        assert_eq!(monomial_index(2, 0), 3);
        assert_eq!(monomial_index(1, 1), 4);
        assert_eq!(monomial_index(0, 2), 5);
        let b = MonomialBasis::new(&square(), 3);
        assert_eq!(b.dim(), 10);
        for (i, &(p, q)) in b.exponents.iter().enumerate() {
            assert_eq!(monomial_index(p, q), i);
        }
    }

    #[test]
    fn unit_square_absolute_integrals() {
        // with center 0 and scale 1 these are int x^p y^q = 1/((p+1)(q+1))
        let t = monomial_integrals(&square(), Point2::new(0.0, 0.0), 1.0, 10);
        for p in 0..=5 {
            for q in 0..=5 {
                let exact = 1.0 / ((p + 1) as f64 * (q + 1) as f64);
                assert_relative_eq!(t.get(p, q), exact, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn scaled_integrals_on_centered_square() {
        // centered at the centroid: odd moments vanish, int xi^2 = |E| /(12 s^2)
        let g = square();
        let t = monomial_integrals(&g, g.centroid, g.h, 4);
        assert_relative_eq!(t.get(0, 0), 1.0, max_relative = 1e-14);
        assert!(t.get(1, 0).abs() < 1e-15);
        assert!(t.get(0, 1).abs() < 1e-15);
        assert_relative_eq!(t.get(2, 0), 1.0 / 12.0 / 2.0, max_relative = 1e-13); // s^2 = 2
        assert_relative_eq!(t.get(1, 1), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn nonconvex_polygon_signed_fan_is_exact() {
        // L-shaped polygon: closed forms dividable into two rectangles
        let poly = vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 2.0),
            Point2::new(0.0, 2.0),
        ];
        let g = ElementGeometry::from_polygon(&poly).unwrap();
        let t = monomial_integrals(&g, Point2::new(0.0, 0.0), 1.0, 3);
        // area 3; int x = [0,2]x[0,1]: 2 + [0,1]x[1,2]: 1/2
        assert_relative_eq!(t.get(0, 0), 3.0, max_relative = 1e-13);
        assert_relative_eq!(t.get(1, 0), 2.5, max_relative = 1e-13);
        assert_relative_eq!(t.get(0, 1), 2.5, max_relative = 1e-13);
        // int x^2 = 8/3 + 1/3 = 3
        assert_relative_eq!(t.get(2, 0), 3.0, max_relative = 1e-13);
    }

    #[test]
    fn stiffness_gram_of_affines() {
        let g = square();
        let basis = MonomialBasis::new(&g, 1);
        let t = monomial_integrals(&g, basis.center, basis.scale, 2);
        let gram = stiffness_gram(&basis, &t, 3);
        // grad m_1 = (1/h, 0), grad m_2 = (0, 1/h), |E| = 1, h^2 = 2
        assert!(gram.row(0).iter().all(|v| v.abs() < 1e-15));
        assert_relative_eq!(gram[(1, 1)], 0.5, max_relative = 1e-13);
        assert_relative_eq!(gram[(2, 2)], 0.5, max_relative = 1e-13);
        assert!(gram[(1, 2)].abs() < 1e-15);
    }
}
