//! Dörfler marking and the SOLVE → ESTIMATE → MARK → REFINE loop.

use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::estimator::{estimate, ErrorIndicators};
use crate::mesh::{bisect, Domain, Mesh, MeshError};
use crate::problems::ProblemSpec;
use crate::quadrature::Rules;
use crate::system::{assemble, energy_error, solve_spd, SystemError};
use crate::wg_space::{DofLayout, SpaceError, SpaceOrder, WgFunction};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("marking parameter must lie in (0, 1), got {0}")]
    Theta(f64),
    #[error("tolerance must be positive, got {0}")]
    Tolerance(f64),
    #[error("iteration cap must be at least 1")]
    Iterations,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptConfig {
    /// Dörfler parameter ϑ.
    pub theta: f64,
    /// Stop once η² falls below this.
    pub tol: f64,
    /// Stop before solving on a mesh with more free DOFs than this.
    pub max_dofs: usize,
    pub max_iters: usize,
    pub order: SpaceOrder,
    /// Refine every element instead of the Dörfler set.
    pub uniform: bool,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        AdaptConfig {
            theta: 0.5,
            tol: 1e-8,
            max_dofs: 50_000,
            max_iters: 200,
            order: SpaceOrder::ONE,
            uniform: false,
        }
    }
}

impl AdaptConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(ConfigError::Theta(self.theta));
        }
        if !(self.tol > 0.0) {
            return Err(ConfigError::Tolerance(self.tol));
        }
        if self.max_iters == 0 {
            return Err(ConfigError::Iterations);
        }
        Ok(())
    }
}

/// One completed SOLVE + ESTIMATE. Estimator parts are square roots of
/// their totals, so `eta² = eta_c² + eta_nc² + osc² + stab²`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptRecord {
    pub iter: usize,
    /// Free DOFs.
    pub dofs: usize,
    pub eta: f64,
    pub eta_c: f64,
    pub eta_nc: f64,
    pub osc: f64,
    pub stab: f64,
    /// E_h, when the exact solution is known.
    pub energy_err: Option<f64>,
    /// (E_h² + s(u_h, u_h))^{1/2}, when the exact solution is known.
    pub total_err: Option<f64>,
    /// E_h / η.
    pub effectivity: Option<f64>,
    pub cg_iterations: usize,
    pub cg_residual: f64,
    pub elapsed: Duration,
}

/// State handed to the observer after each level.
pub struct Level<'a> {
    pub record: &'a AdaptRecord,
    pub mesh: &'a Mesh,
    pub solution: &'a WgFunction,
    pub indicators: &'a ErrorIndicators,
}

#[derive(Debug, Error)]
pub enum AdaptFailure {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// A failed run with the records completed before the failure.
#[derive(Debug, Error)]
#[error("adaptive loop failed after {} levels: {source}", records.len())]
pub struct AdaptError {
    pub records: Vec<AdaptRecord>,
    #[source]
    pub source: AdaptFailure,
}

/// Minimal-cardinality set `M` with `Σ_{τ∈M} η²(τ) ≥ ϑ Σ_τ η²(τ)`.
///
/// Elements are taken by descending indicator, ties by ascending id. The
/// returned ids are in that order.
pub fn mark_dorfler(indicators: &[f64], theta: f64) -> Vec<usize> {
    let total: f64 = indicators.iter().sum();
    if !(total > 0.0) {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..indicators.len()).collect();
    order.sort_by(|&a, &b| indicators[b].total_cmp(&indicators[a]).then(a.cmp(&b)));
    let target = theta * total;
    let mut sum = 0.0;
    let mut marked = Vec::new();
    for t in order {
        if sum >= target {
            break;
        }
        sum += indicators[t];
        marked.push(t);
    }
    marked
}

pub fn amwg_loop(problem: &ProblemSpec, domain: Domain, config: &AdaptConfig) -> Result<Vec<AdaptRecord>, AdaptError> {
    amwg_loop_with(problem, Mesh::build_initial(domain), config, |_| {})
}

/// The adaptive loop from an explicit initial mesh, calling `observer` after
/// every completed level.
pub fn amwg_loop_with<F>(
    problem: &ProblemSpec,
    initial: Mesh,
    config: &AdaptConfig,
    mut observer: F,
) -> Result<Vec<AdaptRecord>, AdaptError>
where
    F: FnMut(&Level<'_>),
{
    let mut records = Vec::new();
    match run(problem, initial, config, &mut records, &mut observer) {
        Ok(()) => Ok(records),
        Err(source) => Err(AdaptError { records, source }),
    }
}

fn run<F>(
    problem: &ProblemSpec,
    initial: Mesh,
    config: &AdaptConfig,
    records: &mut Vec<AdaptRecord>,
    observer: &mut F,
) -> Result<(), AdaptFailure>
where
    F: FnMut(&Level<'_>),
{
    config.validate()?;
    let rules = Rules::default();
    let mut mesh = Arc::new(initial);
    for iter in 0..config.max_iters {
        let start = Instant::now();
        let layout = Arc::new(DofLayout::build(mesh.clone(), config.order)?);
        if iter > 0 && layout.n_free() > config.max_dofs {
            break;
        }

        // SOLVE
        let system = assemble(problem, layout.clone(), &rules)?;
        let solved = solve_spd(&system)?;
        // ESTIMATE
        let indicators = estimate(problem, &solved.solution, &rules)?;
        let energy = match problem.exact {
            Some(_) => Some(energy_error(problem, &solved.solution, &rules)?),
            None => None,
        };

        let eta = indicators.eta();
        let t = indicators.totals;
        let record = AdaptRecord {
            iter,
            dofs: layout.n_free(),
            eta,
            eta_c: t.eta_c2.sqrt(),
            eta_nc: t.eta_nc2.sqrt(),
            osc: t.osc2.sqrt(),
            stab: t.stab.sqrt(),
            energy_err: energy.map(|e| e.e_h),
            total_err: energy.map(|e| e.total),
            effectivity: energy.map(|e| e.e_h / eta),
            cg_iterations: solved.iterations,
            cg_residual: solved.relative_residual,
            elapsed: start.elapsed(),
        };
        observer(&Level {
            record: &record,
            mesh: &mesh,
            solution: &solved.solution,
            indicators: &indicators,
        });
        records.push(record);

        if indicators.eta2() < config.tol {
            break;
        }
        // MARK
        let marked = if config.uniform {
            (0..mesh.n_triangles()).collect()
        } else {
            mark_dorfler(&indicators.per_element(), config.theta)
        };
        // REFINE
        mesh = Arc::new(bisect(&mesh, &marked)?);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{make_problem, BenchmarkId};

    #[test]
    fn dorfler_examples() {
        let eta = [4.0, 3.0, 2.0, 1.0];
        assert_eq!(mark_dorfler(&eta, 0.5), vec![0, 1]);
        assert_eq!(mark_dorfler(&eta, 0.39), vec![0]);
        let mut all = mark_dorfler(&[1.0; 4], 0.999);
        all.sort();
        assert_eq!(all, vec![0, 1, 2, 3]);
        assert!(mark_dorfler(&[0.0; 3], 0.5).is_empty());
    }

    #[test]
    fn dorfler_ties_by_id() {
        assert_eq!(mark_dorfler(&[1.0, 2.0, 2.0, 1.0], 0.5), vec![1, 2]);
        assert_eq!(mark_dorfler(&[1.0, 1.0, 1.0, 1.0], 0.3), vec![0, 1]);
    }

    #[test]
    fn config_validation() {
        let mut c = AdaptConfig::default();
        assert!(c.validate().is_ok());
        c.theta = 1.0;
        assert_eq!(c.validate(), Err(ConfigError::Theta(1.0)));
        c.theta = 0.5;
        c.tol = 0.0;
        assert_eq!(c.validate(), Err(ConfigError::Tolerance(0.0)));
    }

    #[test]
    fn huge_tolerance_stops_after_one_level() {
        let p = make_problem(BenchmarkId::LShapeSingular, 0.5, 1.0).unwrap();
        let c = AdaptConfig {
            tol: 1e9,
            ..AdaptConfig::default()
        };
        let r = amwg_loop(&p, Domain::LShape, &c).unwrap();
        assert_eq!(r.len(), 1);
    }

    #[test]
    fn dof_cap_at_initial_count() {
        let p = make_problem(BenchmarkId::LShapeSingular, 0.5, 1.0).unwrap();
        let initial = DofLayout::build(Arc::new(Mesh::build_initial(Domain::LShape)), SpaceOrder::ONE)
            .unwrap()
            .n_free();
        let c = AdaptConfig {
            max_dofs: initial,
            ..AdaptConfig::default()
        };
        let r = amwg_loop(&p, Domain::LShape, &c).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].dofs, initial);
    }

    #[test]
    fn bad_config_reports_failure() {
        let p = make_problem(BenchmarkId::LShapeSingular, 0.5, 1.0).unwrap();
        let c = AdaptConfig {
            theta: 0.0,
            ..AdaptConfig::default()
        };
        let err = amwg_loop(&p, Domain::LShape, &c).unwrap_err();
        assert!(err.records.is_empty());
        assert!(matches!(err.source, AdaptFailure::Config(ConfigError::Theta(_))));
    }
}
