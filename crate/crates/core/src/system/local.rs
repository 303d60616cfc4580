//! Element-local pieces of `a_w(·,·)`: weak operators, the stabilizer and
//! the load.

use nalgebra::{DMatrix, DVector, Matrix3};

use crate::quadrature::Rules;
use crate::wg_space::{ElementFrame, SpaceError, SpaceOrder};
use crate::weak_ops::ElementWeakOps;
use crate::mesh::Point;

/// One edge's contribution to the stabilizer: `P` maps local DOFs to the
/// `V_0(e)` coefficients of `Q_b v_0 - v_b`, `gram` measures them in L²(e).
#[derive(Debug, Clone)]
pub struct EdgeMismatch {
    pub map: DMatrix<f64>,
    pub gram: Matrix3<f64>,
}

#[derive(Debug, Clone)]
pub struct ElementKernel {
    pub frame: ElementFrame,
    pub order: SpaceOrder,
    pub ops: ElementWeakOps,
    /// Mass matrix of the `P_{k-1}(τ)` test basis.
    pub test_mass: DMatrix<f64>,
    pub mismatch: [EdgeMismatch; 3],
}

impl ElementKernel {
    pub fn new(frame: ElementFrame, order: SpaceOrder, rules: &Rules) -> Result<ElementKernel, SpaceError> {
        let ops = ElementWeakOps::new(&frame, order, rules);
        let nq = ops.test_basis.dim();
        let mut test_mass = DMatrix::zeros(nq, nq);
        for (x, w) in rules.triangle.on_triangle(&frame.points, frame.area()) {
            let q = ops.test_basis.eval(x);
            for a in 0..nq {
                for b in 0..nq {
                    test_mass[(a, b)] += w * q[a] * q[b];
                }
            }
        }
        let n_int = 2 * frame.basis(order.k()).dim();
        let n_loc = n_int + 9;
        let mut edges = Vec::with_capacity(3);
        for le in 0..3 {
            let trace = frame.trace_projection(le, order, rules)?;
            let mut map = DMatrix::zeros(3, n_loc);
            map.columns_mut(0, n_int).copy_from(&trace);
            for i in 0..3 {
                map[(i, n_int + 3 * le + i)] = -1.0;
            }
            edges.push(EdgeMismatch {
                map,
                gram: frame.edges[le].gram(rules),
            });
        }
        let mismatch: [EdgeMismatch; 3] = edges.try_into().unwrap();
        Ok(ElementKernel {
            frame,
            order,
            ops,
            test_mass,
            mismatch,
        })
    }

    pub fn local_size(&self) -> usize {
        self.ops.grad.ncols()
    }

    /// Local matrix of `s_τ(w, v) = h_τ⁻¹ ⟨Q_b w_0 - w_b, Q_b v_0 - v_b⟩_∂τ`.
    pub fn stabilizer_matrix(&self) -> DMatrix<f64> {
        let n = self.local_size();
        let mut s = DMatrix::zeros(n, n);
        for e in &self.mismatch {
            let gram = DMatrix::from_fn(3, 3, |i, j| e.gram[(i, j)]);
            s += e.map.transpose() * gram * &e.map;
        }
        s / self.frame.diameter()
    }

    /// `s_τ(v, v)` evaluated from the local coefficients.
    pub fn stabilizer_value(&self, local: &DVector<f64>) -> f64 {
        let sum: f64 = self
            .mismatch
            .iter()
            .map(|e| {
                let r = &e.map * local;
                let r = nalgebra::Vector3::new(r[0], r[1], r[2]);
                r.dot(&(e.gram * r))
            })
            .sum();
        sum / self.frame.diameter()
    }

    /// Local stiffness of `a_w` on this element.
    pub fn stiffness(&self, mu: f64, lambda: f64) -> DMatrix<f64> {
        let nq = self.test_mass.nrows();
        let mut mass4 = DMatrix::zeros(4 * nq, 4 * nq);
        for b in 0..4 {
            mass4.view_mut((b * nq, b * nq), (nq, nq)).copy_from(&self.test_mass);
        }
        let g = &self.ops.grad;
        let d = &self.ops.div;
        (g.transpose() * mass4 * g) * mu + (d.transpose() * &self.test_mass * d) * (mu + lambda) + self.stabilizer_matrix()
    }

    /// `(f, φ_i)_τ` for the interior basis functions; zero for edge DOFs.
    pub fn load<F: Fn(Point) -> [f64; 2]>(&self, f: F, rules: &Rules) -> DVector<f64> {
        let basis = self.frame.basis(self.order.k());
        let np = basis.dim();
        let mut out = DVector::zeros(self.local_size());
        for (x, w) in rules.triangle.on_triangle(&self.frame.points, self.frame.area()) {
            let fx = f(x);
            for (j, pj) in basis.eval(x).into_iter().enumerate() {
                out[j] += w * fx[0] * pj;
                out[np + j] += w * fx[1] * pj;
            }
        }
        out
    }
}
