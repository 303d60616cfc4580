//! Global assembly of
//!
//! ```text
//! a_w(w, v) = μ Σ (∇_w w, ∇_w v)_τ + (μ+λ) Σ (∇_w·w, ∇_w·v)_τ + s(w, v)
//! ```
//!
//! with the load `(f, v_0)`, Dirichlet data imposed as `u_b = Q_b g` on
//! boundary edges, and the SPD solve of the reduced system.

mod local;
pub mod sparse;

use std::sync::Arc;

use thiserror::Error;

pub use local::{EdgeMismatch, ElementKernel};
pub use sparse::{pcg, CgOutcome, CsrMatrix};

use crate::problems::ProblemSpec;
use crate::quadrature::Rules;
use crate::wg_space::{DofLayout, SpaceError, WgFunction};

/// Relative residual the solver must reach.
pub const SOLVER_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SystemError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("conjugate gradients stopped after {iterations} iterations at relative residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("the problem has no exact solution to measure the error against")]
    MissingExactSolution,
}

/// Assembled system over all DOFs together with its reduction to free DOFs.
#[derive(Debug, Clone)]
pub struct SparseSymSystem {
    layout: Arc<DofLayout>,
    /// `a_w` over every DOF, boundary edges included.
    pub full: CsrMatrix,
    /// `(f, φ_i)` over every DOF.
    pub full_load: Vec<f64>,
    /// `a_w` restricted to free DOFs.
    pub matrix: CsrMatrix,
    /// Free-DOF load with the constrained columns moved to the right side.
    pub rhs: Vec<f64>,
    /// `Q_b g` on constrained DOFs, zero elsewhere.
    pub constrained_values: Vec<f64>,
}

impl SparseSymSystem {
    pub fn layout(&self) -> &Arc<DofLayout> {
        &self.layout
    }
}

/// Element kernels for every triangle of the layout's mesh.
pub fn element_kernels(layout: &DofLayout, rules: &Rules) -> Result<Vec<ElementKernel>, SpaceError> {
    (0..layout.mesh().n_triangles())
        .map(|t| ElementKernel::new(layout.frame(t), layout.order(), rules))
        .collect()
}

pub fn assemble(problem: &ProblemSpec, layout: Arc<DofLayout>, rules: &Rules) -> Result<SparseSymSystem, SystemError> {
    let n = layout.total();
    let n_loc = layout.local_size();
    let mesh = layout.mesh().clone();
    let mut triplets = Vec::with_capacity(mesh.n_triangles() * n_loc * n_loc);
    let mut full_load = vec![0.0; n];
    for t in 0..mesh.n_triangles() {
        let kernel = ElementKernel::new(layout.frame(t), layout.order(), rules)?;
        let k = kernel.stiffness(problem.mu(), problem.lambda());
        let f = kernel.load(&*problem.body_force, rules);
        let dofs = layout.local_dofs(t);
        for (a, &ga) in dofs.iter().enumerate() {
            full_load[ga] += f[a];
            for (b, &gb) in dofs.iter().enumerate() {
                triplets.push((ga, gb, k[(a, b)]));
            }
        }
    }

    let mut constrained_values = vec![0.0; n];
    for (e, edge) in mesh.edges().iter().enumerate() {
        if edge.is_boundary() {
            let c = layout.edge_frame(e).project(&*problem.boundary, rules)?;
            let o = layout.edge_offset(e);
            constrained_values[o..o + 3].copy_from_slice(&c);
        }
    }

    let n_free = layout.n_free();
    let mut rhs: Vec<f64> = layout.free_dofs().iter().map(|&g| full_load[g]).collect();
    let mut reduced = Vec::with_capacity(triplets.len());
    for &(r, c, v) in &triplets {
        if let Some(fr) = layout.free_index(r) {
            match layout.free_index(c) {
                Some(fc) => reduced.push((fr, fc, v)),
                None => rhs[fr] -= v * constrained_values[c],
            }
        }
    }
    let matrix = CsrMatrix::from_triplets(n_free, reduced);
    let full = CsrMatrix::from_triplets(n, triplets);
    Ok(SparseSymSystem {
        layout,
        full,
        full_load,
        matrix,
        rhs,
        constrained_values,
    })
}

#[derive(Debug, Clone)]
pub struct Solved {
    pub solution: WgFunction,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solves the reduced system with Jacobi-preconditioned CG and scatters the
/// result, together with the boundary values, into a full `WgFunction`.
pub fn solve_spd(system: &SparseSymSystem) -> Result<Solved, SystemError> {
    let cap = 20 * system.matrix.dim().max(1);
    let out = pcg(&system.matrix, &system.rhs, SOLVER_TOL, cap);
    if !out.converged {
        return Err(SystemError::NotConverged {
            iterations: out.iterations,
            residual: out.relative_residual,
        });
    }
    let mut coeffs = system.constrained_values.clone();
    for (i, &g) in system.layout.free_dofs().iter().enumerate() {
        coeffs[g] = out.x[i];
    }
    Ok(Solved {
        solution: WgFunction::from_coeffs(system.layout.clone(), coeffs),
        iterations: out.iterations,
        relative_residual: out.relative_residual,
    })
}

/// `s_τ(v, v)` for every triangle.
pub fn stabilizer_per_element(v: &WgFunction, rules: &Rules) -> Result<Vec<f64>, SpaceError> {
    let layout = v.layout();
    (0..layout.mesh().n_triangles())
        .map(|t| {
            let kernel = ElementKernel::new(layout.frame(t), layout.order(), rules)?;
            Ok(kernel.stabilizer_value(&v.local(t)))
        })
        .collect()
}

/// `a_w(w, v)` summed element by element.
pub fn bilinear_form(problem: &ProblemSpec, w: &WgFunction, v: &WgFunction, rules: &Rules) -> Result<f64, SpaceError> {
    let layout = w.layout();
    let mut sum = 0.0;
    for t in 0..layout.mesh().n_triangles() {
        let kernel = ElementKernel::new(layout.frame(t), layout.order(), rules)?;
        let k = kernel.stiffness(problem.mu(), problem.lambda());
        sum += v.local(t).dot(&(k * w.local(t)));
    }
    Ok(sum)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyError {
    /// `(Σ μ‖∇u - ∇_w u_h‖² + (μ+λ)‖∇·u - ∇_w·u_h‖²)^{1/2}`
    pub e_h: f64,
    /// `s(u_h, u_h)`, a squared quantity.
    pub stabilizer: f64,
    /// `(E_h² + s(u_h, u_h))^{1/2}`
    pub total: f64,
}

pub fn energy_error(problem: &ProblemSpec, u_h: &WgFunction, rules: &Rules) -> Result<EnergyError, SystemError> {
    let exact = problem.exact.as_ref().ok_or(SystemError::MissingExactSolution)?;
    let (mu, lambda) = (problem.mu(), problem.lambda());
    let layout = u_h.layout();
    let mut e2 = 0.0;
    let mut stab = 0.0;
    for t in 0..layout.mesh().n_triangles() {
        let kernel = ElementKernel::new(layout.frame(t), layout.order(), rules)?;
        let local = u_h.local(t);
        stab += kernel.stabilizer_value(&local);
        let frame = &kernel.frame;
        for (x, w) in rules.triangle.on_triangle(&frame.points, frame.area()) {
            let gw = kernel.ops.gradient_at(&local, x);
            let dw = kernel.ops.divergence_at(&local, x);
            let g = (exact.gradient)(x);
            let mut grad_err = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    grad_err += (g[i][j] - gw[i][j]).powi(2);
                }
            }
            let div_err = (g[0][0] + g[1][1] - dw).powi(2);
            e2 += w * (mu * grad_err + (mu + lambda) * div_err);
        }
    }
    Ok(EnergyError {
        e_h: e2.sqrt(),
        stabilizer: stab,
        total: (e2 + stab).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Domain, Mesh, Triangle};
    use crate::problems::{make_problem, BenchmarkId, ExactSolution};
    use crate::wg_space::SpaceOrder;

    fn layout(domain: Domain) -> Arc<DofLayout> {
        Arc::new(DofLayout::build(Arc::new(Mesh::build_initial(domain)), SpaceOrder::ONE).unwrap())
    }

    #[test]
    fn symmetric_on_unit_square() {
        let p = make_problem(BenchmarkId::SquareSmooth, 0.5, 1.0).unwrap();
        let sys = assemble(&p, layout(Domain::UnitSquare), &Rules::default()).unwrap();
        assert!(sys.full.max_asymmetry() <= 1e-12);
        assert!(sys.matrix.max_asymmetry() <= 1e-12);
    }

    #[test]
    fn reference_triangle_load() {
        let mesh = Mesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![Triangle {
                vertices: [0, 1, 2],
                refinement_edge: 0,
                generation: 0,
            }],
        )
        .unwrap();
        let l = Arc::new(DofLayout::build(Arc::new(mesh), SpaceOrder::ONE).unwrap());
        let mut p = make_problem(BenchmarkId::PatchLinear, 0.5, 1.0).unwrap();
        p.body_force = Arc::new(|_| [1.0, 0.0]);
        let sys = assemble(&p, l, &Rules::default()).unwrap();
        // constant modes of the two components sit at local 0 and 3
        assert!((sys.full_load[0] - 0.5).abs() < 1e-15);
        assert!(sys.full_load[3].abs() < 1e-15);
    }

    #[test]
    fn rotation_energy() {
        // v = (-y, x) with v_b = Q_b trace v_0: a_w(v, v) = μ‖∇v‖² = 2μ|Ω|
        let l = layout(Domain::UnitSquare);
        let rules = Rules::default();
        let v = WgFunction::interpolate(l.clone(), |x| [-x[1], x[0]], &rules).unwrap();
        let p = make_problem(BenchmarkId::PatchLinear, 0.5, 1.0).unwrap();
        let a = bilinear_form(&p, &v, &v, &rules).unwrap();
        assert!((a - 2.0 * 0.5).abs() < 1e-13);
        let sys = assemble(&p, l, &rules).unwrap();
        assert!((sys.full.bilinear(v.coeffs(), v.coeffs()) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn energy_error_of_zero() {
        let l = layout(Domain::UnitSquare);
        let mut p = make_problem(BenchmarkId::PatchLinear, 0.5, 1.0).unwrap();
        p.exact = Some(ExactSolution {
            value: Arc::new(|x| [x[0], 0.0]),
            gradient: Arc::new(|_| [[1.0, 0.0], [0.0, 0.0]]),
        });
        let e = energy_error(&p, &WgFunction::zeros(l), &Rules::default()).unwrap();
        assert!((e.e_h.powi(2) - (0.5 + 1.5)).abs() < 1e-13);
        assert_eq!(e.stabilizer, 0.0);
    }

    #[test]
    fn missing_exact_solution() {
        let l = layout(Domain::UnitSquare);
        let mut p = make_problem(BenchmarkId::PatchLinear, 0.5, 1.0).unwrap();
        p.exact = None;
        assert!(matches!(
            energy_error(&p, &WgFunction::zeros(l), &Rules::default()),
            Err(SystemError::MissingExactSolution)
        ));
    }

    #[test]
    fn interpolated_linear_field_has_no_error() {
        let l = layout(Domain::LShape);
        let rules = Rules::default();
        let p = make_problem(BenchmarkId::PatchLinear, 0.5, 1.0).unwrap();
        let u = WgFunction::interpolate(l, &*p.boundary, &rules).unwrap();
        let e = energy_error(&p, &u, &rules).unwrap();
        assert!(e.e_h <= 1e-10);
        assert!(e.stabilizer <= 1e-24);
    }
}
