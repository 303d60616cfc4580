//! Discrete weak gradient and weak divergence.
//!
//! On a triangle τ the weak gradient `∇_w v ∈ [P_{k-1}(τ)]^{2×2}` is fixed by
//!
//! ```text
//! (∇_w v, ψ)_τ = -(v_0, ∇·ψ)_τ + ⟨v_b, ψ n⟩_∂τ     for all ψ ∈ [P_{k-1}(τ)]^{2×2}
//! ```
//!
//! and the weak divergence `∇_w·v ∈ P_{k-1}(τ)` by the scalar analogue. Both
//! are linear in the local coefficients, so each is stored as a matrix acting
//! on the local DOF vector (`DofLayout::local_dofs` order).
//!
//! Matrix-valued coefficients are stored row-major per entry: the block for
//! entry `(i, j)` (i.e. `∂v_i/∂x_j`) starts at row `(2 i + j) · dim P_{k-1}`.

use nalgebra::{DMatrix, DVector};

use crate::mesh::Point;
use crate::quadrature::Rules;
use crate::wg_space::{edge_basis, ElementFrame, ScalarBasis, SpaceOrder};

#[derive(Debug, Clone)]
pub struct ElementWeakOps {
    /// Basis of `P_{k-1}(τ)` the coefficients refer to.
    pub test_basis: ScalarBasis,
    pub grad: DMatrix<f64>,
    pub div: DMatrix<f64>,
}

impl ElementWeakOps {
    /// Fast path for k = 1: `∇_w v = |τ|⁻¹ Σ_e ∫_e v_b ⊗ n_e`. Only the
    /// constant edge modes contribute; the rotation mode has zero mean.
    pub fn closed_form(frame: &ElementFrame) -> ElementWeakOps {
        let order = SpaceOrder::ONE;
        let n_int = 2 * frame.basis(order.k()).dim();
        let n_loc = n_int + 9;
        let mut grad = DMatrix::zeros(4, n_loc);
        let area = frame.area();
        for le in 0..3 {
            let n = frame.normal(le);
            let h = frame.edges[le].length;
            for comp in 0..2 {
                let col = n_int + 3 * le + comp;
                for j in 0..2 {
                    grad[(2 * comp + j, col)] = h * n[j] / area;
                }
            }
        }
        let div = DMatrix::from_fn(1, n_loc, |_, c| grad[(0, c)] + grad[(3, c)]);
        ElementWeakOps {
            test_basis: frame.basis(0),
            grad,
            div,
        }
    }

    /// Generic route: assemble the defining identity against every test
    /// basis function and solve with the local mass matrix.
    pub fn local_solve(frame: &ElementFrame, order: SpaceOrder, rules: &Rules) -> ElementWeakOps {
        let k = order.k();
        let trial = frame.basis(k);
        let test = frame.basis(k - 1);
        let (np, nq) = (trial.dim(), test.dim());
        let n_int = 2 * np;
        let n_loc = n_int + 9;

        let mut mass = DMatrix::zeros(nq, nq);
        // rhs_grad row (2i+j)·nq + m, rhs_div row m
        let mut rhs_grad = DMatrix::zeros(4 * nq, n_loc);
        let mut rhs_div = DMatrix::zeros(nq, n_loc);

        for (x, w) in rules.triangle.on_triangle(&frame.points, frame.area()) {
            let q = test.eval(x);
            let dq = test.grad(x);
            let p = trial.eval(x);
            for a in 0..nq {
                for b in 0..nq {
                    mass[(a, b)] += w * q[a] * q[b];
                }
            }
            // -(v_0, ∇·ψ): ψ = e_i e_jᵀ q_m has (∇·ψ)_i = ∂_j q_m
            for m in 0..nq {
                for i in 0..2 {
                    for (s, ps) in p.iter().enumerate() {
                        let col = i * np + s;
                        for j in 0..2 {
                            rhs_grad[((2 * i + j) * nq + m, col)] -= w * ps * dq[m][j];
                        }
                        rhs_div[(m, col)] -= w * ps * dq[m][i];
                    }
                }
            }
        }

        for le in 0..3 {
            let edge = &frame.edges[le];
            let n = frame.normal(le);
            for (x, w) in rules.edge.on_segment(edge.a, edge.b) {
                let q = test.eval(x);
                let phi = edge_basis(edge.mid, x);
                for (b, phib) in phi.iter().enumerate() {
                    let col = n_int + 3 * le + b;
                    for m in 0..nq {
                        for i in 0..2 {
                            for j in 0..2 {
                                rhs_grad[((2 * i + j) * nq + m, col)] += w * phib[i] * q[m] * n[j];
                            }
                        }
                        rhs_div[(m, col)] += w * (phib[0] * n[0] + phib[1] * n[1]) * q[m];
                    }
                }
            }
        }

        let chol = mass.cholesky().expect("mass matrix of a non-degenerate triangle is SPD");
        let mut grad = DMatrix::zeros(4 * nq, n_loc);
        for entry in 0..4 {
            let block = rhs_grad.rows(entry * nq, nq).into_owned();
            grad.rows_mut(entry * nq, nq).copy_from(&chol.solve(&block));
        }
        let div = chol.solve(&rhs_div);
        ElementWeakOps {
            test_basis: test,
            grad,
            div,
        }
    }

    pub fn new(frame: &ElementFrame, order: SpaceOrder, rules: &Rules) -> ElementWeakOps {
        if order.k() == 1 {
            ElementWeakOps::closed_form(frame)
        } else {
            ElementWeakOps::local_solve(frame, order, rules)
        }
    }

    pub fn gradient_coeffs(&self, local: &DVector<f64>) -> DVector<f64> {
        &self.grad * local
    }

    pub fn divergence_coeffs(&self, local: &DVector<f64>) -> DVector<f64> {
        &self.div * local
    }

    pub fn gradient_at(&self, local: &DVector<f64>, x: Point) -> [[f64; 2]; 2] {
        let c = self.gradient_coeffs(local);
        let q = self.test_basis.eval(x);
        let nq = q.len();
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = (0..nq).map(|m| c[(2 * i + j) * nq + m] * q[m]).sum();
            }
        }
        out
    }

    pub fn divergence_at(&self, local: &DVector<f64>, x: Point) -> f64 {
        let c = self.divergence_coeffs(local);
        self.test_basis.evaluate(c.as_slice(), x)
    }

    /// `∇·(μ ∇_w v) + ∇((μ+λ) ∇_w·v)` at `x`; identically zero for k = 1.
    pub fn stress_divergence_at(&self, local: &DVector<f64>, mu: f64, lambda: f64, x: Point) -> [f64; 2] {
        let g = self.gradient_coeffs(local);
        let d = self.divergence_coeffs(local);
        let dq = self.test_basis.grad(x);
        let nq = dq.len();
        let mut out = [0.0; 2];
        for i in 0..2 {
            for m in 0..nq {
                for j in 0..2 {
                    out[i] += mu * g[(2 * i + j) * nq + m] * dq[m][j];
                }
                out[i] += (mu + lambda) * d[m] * dq[m][i];
            }
        }
        out
    }
}

/// Weak gradient coefficients of the local DOF vector `local` on `frame`.
pub fn weak_gradient(frame: &ElementFrame, order: SpaceOrder, local: &DVector<f64>, rules: &Rules) -> DVector<f64> {
    ElementWeakOps::new(frame, order, rules).gradient_coeffs(local)
}

/// Weak divergence coefficients of the local DOF vector `local` on `frame`.
pub fn weak_divergence(frame: &ElementFrame, order: SpaceOrder, local: &DVector<f64>, rules: &Rules) -> DVector<f64> {
    ElementWeakOps::new(frame, order, rules).divergence_coeffs(local)
}
