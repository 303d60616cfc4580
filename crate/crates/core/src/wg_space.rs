//! Weak Galerkin space: local bases, degree-of-freedom layout and the L²
//! projections onto element and edge polynomial spaces.
//!
//! For order k = 1 every triangle carries `[P_1(τ)]²` (six coefficients) and
//! every edge carries `V_0(e) = span{(1,0), (0,1), (-(y-ȳ_e), x-x̄_e)}` (three
//! coefficients), where `(x̄_e, ȳ_e)` is the edge midpoint. Edge unknowns are
//! single-valued: both neighbours of an interior edge read the same block.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use thiserror::Error;

use crate::mesh::{Mesh, Point, TriangleGeometry};
use crate::quadrature::Rules;

#[derive(Debug, Error, PartialEq)]
pub enum SpaceError {
    #[error("space order k = {0} is not supported (only k = 1)")]
    UnsupportedOrder(usize),
    #[error("edge Gram matrix is singular (edge length {0:e})")]
    SingularGram(f64),
}

/// Polynomial order k of the interior space. The edge space has order k - 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceOrder(usize);

impl SpaceOrder {
    pub const ONE: SpaceOrder = SpaceOrder(1);

    pub fn new(k: usize) -> Result<SpaceOrder, SpaceError> {
        if k == 1 {
            Ok(SpaceOrder(k))
        } else {
            Err(SpaceError::UnsupportedOrder(k))
        }
    }

    pub fn k(self) -> usize {
        self.0
    }
}

/// Monomials `(x - x_c)^a (y - y_c)^b` with `a + b <= degree`, graded order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarBasis {
    pub degree: usize,
    pub center: Point,
    exponents: Vec<(i32, i32)>,
}

impl ScalarBasis {
    pub fn new(degree: usize, center: Point) -> ScalarBasis {
        let mut exponents = Vec::new();
        for total in 0..=degree as i32 {
            for b in 0..=total {
                exponents.push((total - b, b));
            }
        }
        ScalarBasis {
            degree,
            center,
            exponents,
        }
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn eval(&self, x: Point) -> Vec<f64> {
        let (dx, dy) = (x[0] - self.center[0], x[1] - self.center[1]);
        self.exponents
            .iter()
            .map(|&(a, b)| dx.powi(a) * dy.powi(b))
            .collect()
    }

    /// Gradients of every basis function at `x`.
    pub fn grad(&self, x: Point) -> Vec<[f64; 2]> {
        let (dx, dy) = (x[0] - self.center[0], x[1] - self.center[1]);
        self.exponents
            .iter()
            .map(|&(a, b)| {
                let gx = if a > 0 { a as f64 * dx.powi(a - 1) * dy.powi(b) } else { 0.0 };
                let gy = if b > 0 { b as f64 * dx.powi(a) * dy.powi(b - 1) } else { 0.0 };
                [gx, gy]
            })
            .collect()
    }

    pub fn evaluate(&self, coeffs: &[f64], x: Point) -> f64 {
        self.eval(x).iter().zip(coeffs).map(|(p, c)| p * c).sum()
    }
}

/// Vector field on an edge spanned by the `V_0(e)` basis, evaluated at `x`.
pub fn edge_basis(mid: Point, x: Point) -> [[f64; 2]; 3] {
    [[1.0, 0.0], [0.0, 1.0], [-(x[1] - mid[1]), x[0] - mid[0]]]
}

pub fn edge_value(coeffs: &[f64], mid: Point, x: Point) -> [f64; 2] {
    let phi = edge_basis(mid, x);
    [
        coeffs[0] * phi[0][0] + coeffs[1] * phi[1][0] + coeffs[2] * phi[2][0],
        coeffs[0] * phi[0][1] + coeffs[1] * phi[1][1] + coeffs[2] * phi[2][1],
    ]
}

/// Geometry of one edge as used by the edge basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeFrame {
    pub a: Point,
    pub b: Point,
    pub mid: Point,
    pub length: f64,
}

impl EdgeFrame {
    pub fn new(a: Point, b: Point) -> EdgeFrame {
        EdgeFrame {
            a,
            b,
            mid: [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])],
            length: (b[0] - a[0]).hypot(b[1] - a[1]),
        }
    }

    /// `⟨φ_i, φ_j⟩_e` for the three edge basis functions.
    pub fn gram(&self, rules: &Rules) -> Matrix3<f64> {
        let mut g = Matrix3::zeros();
        for (x, w) in rules.edge.on_segment(self.a, self.b) {
            let phi = edge_basis(self.mid, x);
            for i in 0..3 {
                for j in 0..3 {
                    g[(i, j)] += w * (phi[i][0] * phi[j][0] + phi[i][1] * phi[j][1]);
                }
            }
        }
        g
    }

    fn solve_gram(&self, rules: &Rules, rhs: &Vector3<f64>) -> Result<Vector3<f64>, SpaceError> {
        let chol = self
            .gram(rules)
            .cholesky()
            .ok_or(SpaceError::SingularGram(self.length))?;
        Ok(chol.solve(rhs))
    }

    /// Coefficients of the L² projection `Q_b g` onto `V_0(e)`.
    pub fn project<G: Fn(Point) -> [f64; 2]>(&self, g: G, rules: &Rules) -> Result<[f64; 3], SpaceError> {
        let mut rhs = Vector3::zeros();
        for (x, w) in rules.edge.on_segment(self.a, self.b) {
            let gx = g(x);
            let phi = edge_basis(self.mid, x);
            for i in 0..3 {
                rhs[i] += w * (gx[0] * phi[i][0] + gx[1] * phi[i][1]);
            }
        }
        let c = self.solve_gram(rules, &rhs)?;
        Ok([c[0], c[1], c[2]])
    }
}

/// Everything element-local computations need to know about one triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementFrame {
    pub points: [Point; 3],
    pub geometry: TriangleGeometry,
    /// Local edge `i` is opposite vertex `i`.
    pub edges: [EdgeFrame; 3],
}

impl ElementFrame {
    pub fn from_points(points: [Point; 3]) -> ElementFrame {
        let geometry = TriangleGeometry::from_points(&points);
        let edges = [0, 1, 2].map(|i| EdgeFrame::new(points[(i + 1) % 3], points[(i + 2) % 3]));
        ElementFrame {
            points,
            geometry,
            edges,
        }
    }

    pub fn from_mesh(mesh: &Mesh, t: usize) -> ElementFrame {
        let points = mesh.triangle_points(t);
        let edges = [0, 1, 2].map(|i| EdgeFrame::new(points[(i + 1) % 3], points[(i + 2) % 3]));
        ElementFrame {
            points,
            geometry: mesh.geom(t).clone(),
            edges,
        }
    }

    pub fn area(&self) -> f64 {
        self.geometry.area
    }

    pub fn diameter(&self) -> f64 {
        self.geometry.diameter
    }

    pub fn normal(&self, local_edge: usize) -> Point {
        self.geometry.normals[local_edge]
    }

    /// Centred monomial basis of `P_m(τ)`.
    pub fn basis(&self, degree: usize) -> ScalarBasis {
        ScalarBasis::new(degree, self.geometry.centroid)
    }

    /// Matrix mapping interior coefficients (component-major, `2·dim P_k`)
    /// to the `V_0(e)` coefficients of `Q_b` of their trace on local edge `le`.
    pub fn trace_projection(&self, le: usize, order: SpaceOrder, rules: &Rules) -> Result<DMatrix<f64>, SpaceError> {
        let basis = self.basis(order.k());
        let np = basis.dim();
        let edge = &self.edges[le];
        let mut moments = DMatrix::zeros(3, 2 * np);
        for (x, w) in rules.edge.on_segment(edge.a, edge.b) {
            let phi = edge_basis(edge.mid, x);
            let p = basis.eval(x);
            for i in 0..3 {
                for c in 0..2 {
                    for (j, pj) in p.iter().enumerate() {
                        moments[(i, c * np + j)] += w * phi[i][c] * pj;
                    }
                }
            }
        }
        let chol = edge
            .gram(rules)
            .cholesky()
            .ok_or(SpaceError::SingularGram(edge.length))?;
        let mut out = DMatrix::zeros(3, 2 * np);
        for col in 0..2 * np {
            let r = Vector3::new(moments[(0, col)], moments[(1, col)], moments[(2, col)]);
            let s = chol.solve(&r);
            for i in 0..3 {
                out[(i, col)] = s[i];
            }
        }
        Ok(out)
    }

    /// L² projection of a vector field onto `[P_m(τ)]²`, component-major.
    pub fn project<W: Fn(Point) -> [f64; 2]>(&self, w: W, degree: usize, rules: &Rules) -> Vec<f64> {
        let basis = self.basis(degree);
        let np = basis.dim();
        let mut mass = DMatrix::zeros(np, np);
        let mut rhs = DMatrix::zeros(np, 2);
        for (x, wt) in rules.triangle.on_triangle(&self.points, self.area()) {
            let p = basis.eval(x);
            let wx = w(x);
            for i in 0..np {
                for j in 0..np {
                    mass[(i, j)] += wt * p[i] * p[j];
                }
                rhs[(i, 0)] += wt * wx[0] * p[i];
                rhs[(i, 1)] += wt * wx[1] * p[i];
            }
        }
        let sol = mass
            .cholesky()
            .expect("mass matrix of a non-degenerate triangle is SPD")
            .solve(&rhs);
        (0..2).flat_map(|c| (0..np).map(move |i| (c, i))).map(|(c, i)| sol[(i, c)]).collect()
    }

    /// Value of an interior vector polynomial at `x`.
    pub fn interior_value(&self, coeffs: &[f64], degree: usize, x: Point) -> [f64; 2] {
        let basis = self.basis(degree);
        let np = basis.dim();
        [basis.evaluate(&coeffs[..np], x), basis.evaluate(&coeffs[np..2 * np], x)]
    }

    /// Gradient `∂v_i/∂x_j` of an interior vector polynomial at `x`.
    pub fn interior_gradient(&self, coeffs: &[f64], degree: usize, x: Point) -> [[f64; 2]; 2] {
        let basis = self.basis(degree);
        let np = basis.dim();
        let g = basis.grad(x);
        let mut out = [[0.0; 2]; 2];
        for c in 0..2 {
            for (j, gj) in g.iter().enumerate() {
                out[c][0] += coeffs[c * np + j] * gj[0];
                out[c][1] += coeffs[c * np + j] * gj[1];
            }
        }
        out
    }
}

/// Global numbering: all interior blocks first, then all edge blocks.
#[derive(Debug, Clone)]
pub struct DofLayout {
    mesh: Arc<Mesh>,
    order: SpaceOrder,
    interior_block: usize,
    edge_block: usize,
    constrained: Vec<bool>,
    free: Vec<usize>,
    free_index: Vec<Option<usize>>,
}

impl DofLayout {
    /// Lays out `V_h` over `mesh`; DOFs on boundary edges are constrained.
    pub fn build(mesh: Arc<Mesh>, order: SpaceOrder) -> Result<DofLayout, SpaceError> {
        let order = SpaceOrder::new(order.k())?;
        let interior_block = 2 * ScalarBasis::new(order.k(), [0.0; 2]).dim();
        let edge_block = 3;
        let n_interior = interior_block * mesh.n_triangles();
        let total = n_interior + edge_block * mesh.n_edges();
        let mut constrained = vec![false; total];
        for (e, edge) in mesh.edges().iter().enumerate() {
            if edge.is_boundary() {
                let o = n_interior + edge_block * e;
                constrained[o..o + edge_block].fill(true);
            }
        }
        let mut free = Vec::with_capacity(total);
        let mut free_index = vec![None; total];
        for (g, &c) in constrained.iter().enumerate() {
            if !c {
                free_index[g] = Some(free.len());
                free.push(g);
            }
        }
        Ok(DofLayout {
            mesh,
            order,
            interior_block,
            edge_block,
            constrained,
            free,
            free_index,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn order(&self) -> SpaceOrder {
        self.order
    }

    pub fn interior_block(&self) -> usize {
        self.interior_block
    }

    pub fn edge_block(&self) -> usize {
        self.edge_block
    }

    pub fn local_size(&self) -> usize {
        self.interior_block + 3 * self.edge_block
    }

    pub fn total(&self) -> usize {
        self.constrained.len()
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    pub fn interior_offset(&self, t: usize) -> usize {
        self.interior_block * t
    }

    pub fn edge_offset(&self, e: usize) -> usize {
        self.interior_block * self.mesh.n_triangles() + self.edge_block * e
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.constrained[dof]
    }

    /// Global ids of the free DOFs, ascending.
    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    pub fn free_index(&self, dof: usize) -> Option<usize> {
        self.free_index[dof]
    }

    /// Global ids of the local DOFs of triangle `t`: interior block, then the
    /// blocks of local edges 0, 1, 2.
    pub fn local_dofs(&self, t: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.local_size());
        let o = self.interior_offset(t);
        out.extend(o..o + self.interior_block);
        for e in self.mesh.triangle_edges(t) {
            let o = self.edge_offset(e);
            out.extend(o..o + self.edge_block);
        }
        out
    }

    pub fn frame(&self, t: usize) -> ElementFrame {
        ElementFrame::from_mesh(&self.mesh, t)
    }

    pub fn edge_frame(&self, e: usize) -> EdgeFrame {
        let [a, b] = self.mesh.edge_points(e);
        EdgeFrame::new(a, b)
    }
}

/// A discrete weak function `{v_0, v_b}`: one coefficient vector read
/// through a layout.
#[derive(Debug, Clone)]
pub struct WgFunction {
    layout: Arc<DofLayout>,
    coeffs: Vec<f64>,
}

impl WgFunction {
    pub fn zeros(layout: Arc<DofLayout>) -> WgFunction {
        let coeffs = vec![0.0; layout.total()];
        WgFunction { layout, coeffs }
    }

    pub fn from_coeffs(layout: Arc<DofLayout>, coeffs: Vec<f64>) -> WgFunction {
        assert_eq!(coeffs.len(), layout.total(), "coefficient vector does not match layout");
        WgFunction { layout, coeffs }
    }

    /// `v_0` = element L² projection of `u`, `v_b` = `Q_b` of the trace of `u`.
    pub fn interpolate<U: Fn(Point) -> [f64; 2]>(
        layout: Arc<DofLayout>,
        u: U,
        rules: &Rules,
    ) -> Result<WgFunction, SpaceError> {
        let mut f = WgFunction::zeros(layout.clone());
        let k = layout.order().k();
        for t in 0..layout.mesh().n_triangles() {
            let c = layout.frame(t).project(&u, k, rules);
            f.interior_mut(t).copy_from_slice(&c);
        }
        for e in 0..layout.mesh().n_edges() {
            let c = layout.edge_frame(e).project(&u, rules)?;
            f.edge_mut(e).copy_from_slice(&c);
        }
        Ok(f)
    }

    pub fn layout(&self) -> &Arc<DofLayout> {
        &self.layout
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn interior(&self, t: usize) -> &[f64] {
        let o = self.layout.interior_offset(t);
        &self.coeffs[o..o + self.layout.interior_block()]
    }

    pub fn interior_mut(&mut self, t: usize) -> &mut [f64] {
        let o = self.layout.interior_offset(t);
        let n = self.layout.interior_block();
        &mut self.coeffs[o..o + n]
    }

    pub fn edge(&self, e: usize) -> &[f64] {
        let o = self.layout.edge_offset(e);
        &self.coeffs[o..o + self.layout.edge_block()]
    }

    pub fn edge_mut(&mut self, e: usize) -> &mut [f64] {
        let o = self.layout.edge_offset(e);
        let n = self.layout.edge_block();
        &mut self.coeffs[o..o + n]
    }

    /// Local coefficient vector of triangle `t` in `DofLayout::local_dofs` order.
    pub fn local(&self, t: usize) -> DVector<f64> {
        DVector::from_iterator(
            self.layout.local_size(),
            self.layout.local_dofs(t).into_iter().map(|g| self.coeffs[g]),
        )
    }
}
