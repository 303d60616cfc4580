//! Residual-type a posteriori indicators.
//!
//! Per element τ:
//!
//! ```text
//! η_c²  = h_τ² (μ⁻¹ + (μ+λ)⁻¹) ‖f + ∇·(μ∇_w u) + ∇((μ+λ)∇_w·u)‖²_τ
//! η_nc² = μ⁻¹ Σ_{e⊂∂τ} h_e ‖J_e(μ∇_w u + (μ+λ)(∇_w·u) I)‖²_e
//! osc²  = h_τ² (μ⁻¹ + (μ+λ)⁻¹) ‖f - f_h‖²_τ
//! s_τ   = h_τ⁻¹ ⟨Q_b u_0 - u_b, Q_b u_0 - u_b⟩_∂τ
//! ```
//!
//! An interior edge term is shared by two elements; each receives half of it
//! so the grand total counts every edge once. Boundary edges carry no jump.

use nalgebra::DVector;

use crate::mesh::Point;
use crate::problems::ProblemSpec;
use crate::quadrature::Rules;
use crate::system::{element_kernels, ElementKernel};
use crate::wg_space::{SpaceError, WgFunction};

pub type Stress = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ElementIndicator {
    pub eta_c2: f64,
    pub eta_nc2: f64,
    pub osc2: f64,
    pub stab: f64,
}

impl ElementIndicator {
    /// η²(τ): the sum of the four squared terms.
    pub fn total(&self) -> f64 {
        self.eta_c2 + self.eta_nc2 + self.osc2 + self.stab
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorIndicators {
    pub elements: Vec<ElementIndicator>,
    pub totals: ElementIndicator,
}

impl ErrorIndicators {
    fn from_elements(elements: Vec<ElementIndicator>) -> ErrorIndicators {
        let mut totals = ElementIndicator::default();
        for e in &elements {
            totals.eta_c2 += e.eta_c2;
            totals.eta_nc2 += e.eta_nc2;
            totals.osc2 += e.osc2;
            totals.stab += e.stab;
        }
        ErrorIndicators { elements, totals }
    }

    /// Grand total η².
    pub fn eta2(&self) -> f64 {
        self.totals.total()
    }

    pub fn eta(&self) -> f64 {
        self.eta2().sqrt()
    }

    /// η²(τ) for every element, indexed by triangle id.
    pub fn per_element(&self) -> Vec<f64> {
        self.elements.iter().map(ElementIndicator::total).collect()
    }
}

/// Stress and outward normal seen from one side of an edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressSide {
    pub stress: Stress,
    pub normal: Point,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeJump {
    pub edge: usize,
    /// `σ₁n₁ + σ₂n₂`; constant along the edge for k = 1.
    pub value: [f64; 2],
}

/// `[σ n]_e = σ₁n₁ + σ₂n₂` on interior edges, zero on boundary edges.
pub fn jump(edge: usize, left: StressSide, right: Option<StressSide>) -> EdgeJump {
    let value = match right {
        None => [0.0, 0.0],
        Some(right) => {
            let mut v = [0.0; 2];
            for side in [left, right] {
                for (i, vi) in v.iter_mut().enumerate() {
                    *vi += side.stress[i][0] * side.normal[0] + side.stress[i][1] * side.normal[1];
                }
            }
            v
        }
    };
    EdgeJump { edge, value }
}

/// `μ∇_w v + (μ+λ)(∇_w·v) I` at `x`.
pub fn discrete_stress(kernel: &ElementKernel, local: &DVector<f64>, mu: f64, lambda: f64, x: Point) -> Stress {
    let g = kernel.ops.gradient_at(local, x);
    let d = kernel.ops.divergence_at(local, x);
    let mut s = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            s[i][j] = mu * g[i][j];
        }
        s[i][i] += (mu + lambda) * d;
    }
    s
}

pub fn estimate(problem: &ProblemSpec, u_h: &WgFunction, rules: &Rules) -> Result<ErrorIndicators, SpaceError> {
    let layout = u_h.layout();
    let mesh = layout.mesh();
    let (mu, lambda) = (problem.mu(), problem.lambda());
    let weight = 1.0 / mu + 1.0 / (mu + lambda);
    let k = layout.order().k();
    let f = &*problem.body_force;

    let kernels = element_kernels(layout, rules)?;
    let locals: Vec<DVector<f64>> = (0..mesh.n_triangles()).map(|t| u_h.local(t)).collect();
    let mut elements = Vec::with_capacity(mesh.n_triangles());

    for (t, kernel) in kernels.iter().enumerate() {
        let frame = &kernel.frame;
        let h2 = frame.diameter().powi(2);
        let f_h = frame.project(f, k - 1, rules);
        let mut residual = 0.0;
        let mut oscillation = 0.0;
        for (x, w) in rules.triangle.on_triangle(&frame.points, frame.area()) {
            let fx = f(x);
            let div = kernel.ops.stress_divergence_at(&locals[t], mu, lambda, x);
            residual += w * ((fx[0] + div[0]).powi(2) + (fx[1] + div[1]).powi(2));
            let fh = frame.interior_value(&f_h, k - 1, x);
            oscillation += w * ((fx[0] - fh[0]).powi(2) + (fx[1] - fh[1]).powi(2));
        }
        elements.push(ElementIndicator {
            eta_c2: h2 * weight * residual,
            eta_nc2: 0.0,
            osc2: h2 * weight * oscillation,
            stab: kernel.stabilizer_value(&locals[t]),
        });
    }

    for (e, edge) in mesh.edges().iter().enumerate() {
        let Some(second) = edge.second else { continue };
        let first = edge.first;
        let [a, b] = mesh.edge_points(e);
        let h_e = mesh.edge_length(e);
        let mut norm2 = 0.0;
        for (x, w) in rules.edge.on_segment(a, b) {
            let side = |s: crate::mesh::EdgeSide| StressSide {
                stress: discrete_stress(&kernels[s.triangle], &locals[s.triangle], mu, lambda, x),
                normal: mesh.outward_normal(s),
            };
            let j = jump(e, side(first), Some(side(second))).value;
            norm2 += w * (j[0] * j[0] + j[1] * j[1]);
        }
        let share = 0.5 * h_e * norm2 / mu;
        elements[first.triangle].eta_nc2 += share;
        elements[second.triangle].eta_nc2 += share;
    }

    Ok(ErrorIndicators::from_elements(elements))
}
