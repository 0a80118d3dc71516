//! Degrees of freedom of the local virtual space: vertex values, edge
//! Gauss-Lobatto values and scaled internal moments, plus the rank-one
//! averaging operators `R` that pin the energy projector on constants.

use crate::mesh::{ElementGeometry, Point2};
use crate::quadrature::{gauss_lobatto, QuadRule1D};
use crate::vem::monomial::poly_dim;
use crate::{Error, Result};

/// The averaging operator fixing constants in the energy projector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ROperator {
    /// Cell average, read off the first internal moment; needs `k >= 2`.
    CellMean,
    /// Average over the element boundary.
    BoundaryMean,
    /// Arithmetic average of the vertex values.
    VertexMean,
}

impl ROperator {
    pub fn label(self) -> &'static str {
        match self {
            ROperator::CellMean => "cell",
            ROperator::BoundaryMean => "boundary",
            ROperator::VertexMean => "vertex",
        }
    }
}

/// Layout of the `N k + k(k-1)/2` local dofs: vertex dofs first (cycle
/// order), then edge-interior dofs edge by edge, then internal moments.
#[derive(Clone, Debug)]
pub struct DofLayout {
    pub k: usize,
    /// Vertex (= edge) count of the element.
    pub n_vertices: usize,
    pub n_boundary: usize,
    pub n_internal: usize,
    pub n_dofs: usize,
    /// Coordinates of all boundary dofs, indexed like the dofs.
    pub boundary_points: Vec<Point2>,
    /// The `k+1`-point Gauss-Lobatto rule used on every edge.
    pub gll: QuadRule1D,
}

/// Builds the dof layout of one element for order `k >= 1`.
pub fn dof_layout(geom: &ElementGeometry, k: usize) -> Result<DofLayout> {
    if k == 0 {
        return Err(Error::Invalid("polynomial order k must be >= 1".into()));
    }
    let n = geom.n_edges;
    let gll = gauss_lobatto(k + 1)?;
    let mut boundary_points = geom.vertices.clone();
    for i in 0..n {
        let a = geom.vertices[i];
        let b = geom.vertices[(i + 1) % n];
        let mid = (a + b) * 0.5;
        let half = (b - a) * 0.5;
        for &t in &gll.nodes[1..k] {
            boundary_points.push(mid + half * t);
        }
    }
    Ok(DofLayout {
        k,
        n_vertices: n,
        n_boundary: n * k,
        n_internal: k * (k - 1) / 2,
        n_dofs: n * k + k * (k - 1) / 2,
        boundary_points,
        gll,
    })
}

impl DofLayout {
    /// Dof ids of the `k+1` Gauss-Lobatto nodes of edge `e`, in traversal
    /// order (start vertex, interior nodes, end vertex).
    pub fn edge_dof_ids(&self, e: usize) -> Vec<usize> {
        let n = self.n_vertices;
        let mut ids = Vec::with_capacity(self.k + 1);
        ids.push(e);
        for a in 0..self.k - 1 {
            ids.push(n + e * (self.k - 1) + a);
        }
        ids.push((e + 1) % n);
        ids
    }

    pub fn internal_dof(&self, i: usize) -> usize {
        self.n_boundary + i
    }
}

/// Weights `r` such that `R v = r . dofs(v)`; exact for every dof vector.
pub fn r_weights(layout: &DofLayout, geom: &ElementGeometry, r: ROperator) -> Result<Vec<f64>> {
    let mut w = vec![0.0; layout.n_dofs];
    match r {
        ROperator::CellMean => {
            if layout.k < 2 {
                return Err(Error::Invalid(
                    "cell-mean R uses the first internal moment and needs k >= 2".into(),
                ));
            }
            w[layout.internal_dof(0)] = 1.0;
        }
        ROperator::BoundaryMean => {
            let perimeter: f64 = geom.edge_lengths.iter().sum();
            for e in 0..layout.n_vertices {
                let ids = layout.edge_dof_ids(e);
                let scale = 0.5 * geom.edge_lengths[e] / perimeter;
                for (&id, &gw) in ids.iter().zip(&layout.gll.weights) {
                    w[id] += scale * gw;
                }
            }
        }
        ROperator::VertexMean => {
            let inv = 1.0 / layout.n_vertices as f64;
            for wi in w.iter_mut().take(layout.n_vertices) {
                *wi = inv;
            }
        }
    }
    Ok(w)
}

/// Applies the averaging operator to a dof vector.
pub fn apply_r(
    layout: &DofLayout,
    geom: &ElementGeometry,
    r: ROperator,
    dofs: &[f64],
) -> Result<f64> {
    let w = r_weights(layout, geom, r)?;
    Ok(w.iter().zip(dofs).map(|(a, b)| a * b).sum())
}

/// Evaluations/moments of every monomial at every dof: `D[j][alpha] =
/// dof_j(m_alpha)`. Internal moments use the exact integral table.
pub fn dof_matrix(
    geom: &ElementGeometry,
    layout: &DofLayout,
    basis: &crate::vem::monomial::MonomialBasis,
    table: &crate::vem::monomial::MonomialTable,
) -> nalgebra::DMatrix<f64> {
    let np = poly_dim(basis.k);
    let mut d = nalgebra::DMatrix::zeros(layout.n_dofs, np);
    let mut row = vec![0.0; np];
    for (j, &pt) in layout.boundary_points.iter().enumerate() {
        basis.eval_all(pt, &mut row);
        for (a, &v) in row.iter().enumerate() {
            d[(j, a)] = v;
        }
    }
    let inv_area = 1.0 / geom.area;
    for i in 0..layout.n_internal {
        let (pi, qi) = basis.exponents[i];
        for a in 0..np {
            let (pa, qa) = basis.exponents[a];
            d[(layout.internal_dof(i), a)] = inv_area * table.get(pi + pa, qi + qa);
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vem::monomial::{monomial_integrals, MonomialBasis};
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

    fn pentagon() -> ElementGeometry {
        ElementGeometry::from_polygon(&[
            Point2::new(0.0, 0.0),
            Point2::new(0.5, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn dof_counts() {
        let g = square();
        assert_eq!(dof_layout(&g, 1).unwrap().n_dofs, 4);
        assert_eq!(dof_layout(&g, 2).unwrap().n_dofs, 9);
        assert_eq!(dof_layout(&pentagon(), 3).unwrap().n_dofs, 18);
    }

    #[test]
    fn edge_dofs_follow_the_cycle() {
        let g = square();
        let l = dof_layout(&g, 3).unwrap();
        assert_eq!(l.edge_dof_ids(0), vec![0, 4, 5, 1]);
        assert_eq!(l.edge_dof_ids(3), vec![3, 10, 11, 0]);
        // interior Gauss-Lobatto points of edge 0 sit on the edge
        assert_relative_eq!(l.boundary_points[4].y, 0.0, epsilon = 1e-15);
        assert!(l.boundary_points[4].x < 0.5 && l.boundary_points[5].x > 0.5);
    }

    #[test]
    fn r_operators_reproduce_constants() {
        let g = pentagon();
        for k in 1..=4 {
            let l = dof_layout(&g, k).unwrap();
            let basis = MonomialBasis::new(&g, k);
            let table = monomial_integrals(&g, basis.center, basis.scale, 2 * k);
            let d = dof_matrix(&g, &l, &basis, &table);
            // dof vector of the constant 1 = first column of D
            let ones: Vec<f64> = d.column(0).iter().copied().collect();
            for r in [ROperator::BoundaryMean, ROperator::VertexMean] {
                assert_relative_eq!(
                    apply_r(&l, &g, r, &ones).unwrap(),
                    1.0,
                    max_relative = 1e-13
                );
            }
            if k >= 2 {
                assert_relative_eq!(
                    apply_r(&l, &g, ROperator::CellMean, &ones).unwrap(),
                    1.0,
                    max_relative = 1e-13
                );
            }
        }
    }

    #[test]
    fn r_of_x_on_unit_square() {
        let g = square();
        let l = dof_layout(&g, 1).unwrap();
        let dofs = [0.0, 1.0, 1.0, 0.0]; // v = x at the vertices
        assert_relative_eq!(
            apply_r(&l, &g, ROperator::VertexMean, &dofs).unwrap(),
            0.5,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            apply_r(&l, &g, ROperator::BoundaryMean, &dofs).unwrap(),
            0.5,
            max_relative = 1e-14
        );
    }

    #[test]
    fn cell_mean_requires_k2() {
        let g = square();
        let l = dof_layout(&g, 1).unwrap();
        assert!(apply_r(&l, &g, ROperator::CellMean, &[0.0; 4]).is_err());
    }

    #[test]
    fn r_is_idempotent_on_its_output() {
        let g = pentagon();
        let l = dof_layout(&g, 2).unwrap();
        let basis = MonomialBasis::new(&g, 2);
        let table = monomial_integrals(&g, basis.center, basis.scale, 4);
        let d = dof_matrix(&g, &l, &basis, &table);
        let dofs: Vec<f64> = (0..l.n_dofs).map(|i| (i as f64 * 0.7).sin()).collect();
        for r in [ROperator::CellMean, ROperator::BoundaryMean, ROperator::VertexMean] {
            let c = apply_r(&l, &g, r, &dofs).unwrap();
            // dof vector of the constant c
            let cd: Vec<f64> = d.column(0).iter().map(|v| c * v).collect();
            let again = apply_r(&l, &g, r, &cd).unwrap();
            assert_relative_eq!(again, c, max_relative = 1e-13);
        }
    }
}
