//! Model problem `-μΔu - (λ+μ)∇(∇·u) = f` in Ω, `u = g` on ∂Ω, and the
//! built-in benchmarks with closed-form solutions.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::mesh::{Domain, Point};

pub type VectorField = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;
pub type TensorField = Arc<dyn Fn(Point) -> [[f64; 2]; 2] + Send + Sync>;

#[derive(Debug, Error, PartialEq)]
pub enum ProblemError {
    #[error("shear modulus μ must be positive, got {0}")]
    NonPositiveMu(f64),
    #[error("λ must be non-negative, got {0}")]
    NegativeLambda(f64),
    #[error("Poisson ratio must lie in [0, 0.5), got {0}")]
    PoissonRatio(f64),
    #[error("Young's modulus must be positive, got {0}")]
    YoungModulus(f64),
    #[error("unknown benchmark {0:?}")]
    UnknownBenchmark(String),
}

/// Lamé parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lame {
    pub mu: f64,
    pub lambda: f64,
}

impl Lame {
    pub fn new(mu: f64, lambda: f64) -> Result<Lame, ProblemError> {
        if !(mu > 0.0) {
            return Err(ProblemError::NonPositiveMu(mu));
        }
        if !(lambda >= 0.0) {
            return Err(ProblemError::NegativeLambda(lambda));
        }
        Ok(Lame { mu, lambda })
    }

    /// μ = E/(2(1+ν)), λ = Eν/((1+ν)(1-2ν)).
    pub fn from_young_poisson(e: f64, nu: f64) -> Result<Lame, ProblemError> {
        if !(e > 0.0) {
            return Err(ProblemError::YoungModulus(e));
        }
        if !(0.0..0.5).contains(&nu) {
            return Err(ProblemError::PoissonRatio(nu));
        }
        Lame::new(e / (2.0 * (1.0 + nu)), e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)))
    }
}

#[derive(Clone)]
pub struct ExactSolution {
    pub value: VectorField,
    /// `grad[i][j] = ∂u_i/∂x_j`
    pub gradient: TensorField,
}

impl ExactSolution {
    pub fn divergence(&self, x: Point) -> f64 {
        let g = (self.gradient)(x);
        g[0][0] + g[1][1]
    }
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub lame: Lame,
    pub body_force: VectorField,
    pub boundary: VectorField,
    pub exact: Option<ExactSolution>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("lame", &self.lame)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl ProblemSpec {
    pub fn mu(&self) -> f64 {
        self.lame.mu
    }

    pub fn lambda(&self) -> f64 {
        self.lame.lambda
    }

    /// Same problem with f, g and the exact solution multiplied by `c`.
    pub fn scaled(&self, c: f64) -> ProblemSpec {
        let f = self.body_force.clone();
        let g = self.boundary.clone();
        ProblemSpec {
            lame: self.lame,
            body_force: Arc::new(move |x| {
                let v = f(x);
                [c * v[0], c * v[1]]
            }),
            boundary: Arc::new(move |x| {
                let v = g(x);
                [c * v[0], c * v[1]]
            }),
            exact: self.exact.as_ref().map(|ex| {
                let u = ex.value.clone();
                let du = ex.gradient.clone();
                ExactSolution {
                    value: Arc::new(move |x| {
                        let v = u(x);
                        [c * v[0], c * v[1]]
                    }),
                    gradient: Arc::new(move |x| {
                        let d = du(x);
                        [[c * d[0][0], c * d[0][1]], [c * d[1][0], c * d[1][1]]]
                    }),
                }
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchmarkId {
    /// u = (x+y, x-y) on the unit square.
    PatchLinear,
    /// u₁ = u₂ = sin(πx) sin(πy) on the unit square.
    SquareSmooth,
    /// u₁ = u₂ = r^{2/3} sin(2θ/3) on the L-shape.
    LShapeSingular,
}

impl BenchmarkId {
    pub fn domain(self) -> Domain {
        match self {
            BenchmarkId::PatchLinear | BenchmarkId::SquareSmooth => Domain::UnitSquare,
            BenchmarkId::LShapeSingular => Domain::LShape,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BenchmarkId::PatchLinear => "patch",
            BenchmarkId::SquareSmooth => "square-smooth",
            BenchmarkId::LShapeSingular => "lshape2d",
        }
    }
}

impl FromStr for BenchmarkId {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "patch" | "patch_linear" | "patch-linear" => Ok(BenchmarkId::PatchLinear),
            "square-smooth" | "square_smooth" => Ok(BenchmarkId::SquareSmooth),
            "lshape2d" | "lshape2d_singular" | "lshape" => Ok(BenchmarkId::LShapeSingular),
            other => Err(ProblemError::UnknownBenchmark(other.to_string())),
        }
    }
}

impl fmt::Display for BenchmarkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn make_problem(id: BenchmarkId, mu: f64, lambda: f64) -> Result<ProblemSpec, ProblemError> {
    let lame = Lame::new(mu, lambda)?;
    Ok(match id {
        BenchmarkId::PatchLinear => {
            let u: VectorField = Arc::new(|x: Point| [x[0] + x[1], x[0] - x[1]]);
            ProblemSpec {
                lame,
                body_force: Arc::new(|_| [0.0, 0.0]),
                boundary: u.clone(),
                exact: Some(ExactSolution {
                    value: u,
                    gradient: Arc::new(|_| [[1.0, 1.0], [1.0, -1.0]]),
                }),
            }
        }
        BenchmarkId::SquareSmooth => {
            let u: VectorField = Arc::new(|x: Point| {
                let s = (PI * x[0]).sin() * (PI * x[1]).sin();
                [s, s]
            });
            let force = move |x: Point| {
                let s = (PI * x[0]).sin() * (PI * x[1]).sin();
                let c = (PI * x[0]).cos() * (PI * x[1]).cos();
                // -μΔu = 2μπ² s; -(λ+μ)∂_i(∂_x s + ∂_y s) = (λ+μ)π²(s - c)
                let v = 2.0 * mu * PI * PI * s + (lambda + mu) * PI * PI * (s - c);
                [v, v]
            };
            ProblemSpec {
                lame,
                body_force: Arc::new(force),
                boundary: Arc::new(|_| [0.0, 0.0]),
                exact: Some(ExactSolution {
                    value: u,
                    gradient: Arc::new(|x: Point| {
                        let sx = PI * (PI * x[0]).cos() * (PI * x[1]).sin();
                        let sy = PI * (PI * x[0]).sin() * (PI * x[1]).cos();
                        [[sx, sy], [sx, sy]]
                    }),
                }),
            }
        }
        BenchmarkId::LShapeSingular => {
            let u: VectorField = Arc::new(|x: Point| {
                let v = corner::value(x);
                [v, v]
            });
            let force = move |x: Point| {
                let [[hxx, hxy], [_, hyy]] = corner::hessian(x);
                let s = -(lambda + mu);
                [s * (hxx + hxy), s * (hxy + hyy)]
            };
            ProblemSpec {
                lame,
                body_force: Arc::new(force),
                boundary: u.clone(),
                exact: Some(ExactSolution {
                    value: u,
                    gradient: Arc::new(|x: Point| {
                        let g = corner::gradient(x);
                        [g, g]
                    }),
                }),
            }
        }
    })
}

/// The harmonic corner function φ = r^{2/3} sin(2θ/3) = Im z^{2/3}, with
/// θ ∈ [0, 2π) so that the branch cut falls in the removed quadrant.
pub mod corner {
    use super::Point;
    use std::f64::consts::PI;

    pub fn polar(x: Point) -> (f64, f64) {
        let r = x[0].hypot(x[1]);
        let mut theta = x[1].atan2(x[0]);
        if theta < 0.0 {
            theta += 2.0 * PI;
        }
        (r, theta)
    }

    pub fn value(x: Point) -> f64 {
        let (r, t) = polar(x);
        r.powf(2.0 / 3.0) * (2.0 * t / 3.0).sin()
    }

    /// φ' = (2/3) z^{-1/3}: φ_x = Im φ', φ_y = Re φ'.
    pub fn gradient(x: Point) -> [f64; 2] {
        let (r, t) = polar(x);
        let a = 2.0 / 3.0 * r.powf(-1.0 / 3.0);
        [-a * (t / 3.0).sin(), a * (t / 3.0).cos()]
    }

    /// φ'' = -(2/9) z^{-4/3}: φ_xx = Im φ'', φ_xy = Re φ'', φ_yy = -φ_xx.
    pub fn hessian(x: Point) -> [[f64; 2]; 2] {
        let (r, t) = polar(x);
        let a = 2.0 / 9.0 * r.powf(-4.0 / 3.0);
        let xx = a * (4.0 * t / 3.0).sin();
        let xy = -a * (4.0 * t / 3.0).cos();
        [[xx, xy], [xy, -xx]]
    }
}
