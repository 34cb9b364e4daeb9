//! Concrete problems built from a [`ProblemSpec`].

use strop_core::linops::{norm2, Matrix};
use strop_core::problems::{
    make_interpolating_least_squares, make_subspace_problem, orthogonality_error, random_init,
    spiked_data, ConstraintMap, FiniteSum, InitMode, LeastSquares, LinearConstraint, NoConstraints,
    OrthogonalityConstraint, ProblemError, SeparableQuadratic, SubspaceFit,
};

use crate::config::{Family, Init, ProblemSpec};
use crate::error::HarnessError;
use crate::output::read_data_csv;

#[derive(Debug, Clone)]
pub enum Instance {
    LeastSquares {
        ls: LeastSquares,
        none: NoConstraints,
    },
    Subspace {
        fit: SubspaceFit,
        cons: OrthogonalityConstraint,
    },
    ToyEquality {
        objective: SeparableQuadratic,
        cons: LinearConstraint,
    },
}

impl Instance {
    pub fn build(spec: &ProblemSpec) -> Result<Self, HarnessError> {
        match &spec.family {
            Family::LeastSquares { n, d } => {
                let ls = make_interpolating_least_squares(*n, *d, spec.seed)?;
                Ok(Instance::LeastSquares {
                    ls,
                    none: NoConstraints { dim: *d },
                })
            }
            Family::Subspace { k, data, .. } => {
                let spiked = spec.spiked().expect("subspace family has a spiked spec");
                let matrix = match data {
                    Some(path) => {
                        let (header, matrix) = read_data_csv(path)?;
                        if (header.d, header.k, header.n) != (spiked.d, spiked.k, spiked.n) {
                            return Err(HarnessError::invalid(
                                "problem.data",
                                format!(
                                    "file has d={}, k={}, n={} but the config asks for d={}, k={}, n={}",
                                    header.d, header.k, header.n, spiked.d, spiked.k, spiked.n
                                ),
                            ));
                        }
                        matrix
                    }
                    None => spiked_data(&spiked)?,
                };
                let (fit, cons) = make_subspace_problem(&matrix, *k)?;
                Ok(Instance::Subspace { fit, cons })
            }
            Family::ToyEquality => {
                let objective = SeparableQuadratic::half_squared_norm(2);
                let row = Matrix::from_rows(&[vec![1.0, 0.0]]).map_err(ProblemError::from)?;
                let cons = LinearConstraint::new(row, vec![1.0])?;
                Ok(Instance::ToyEquality { objective, cons })
            }
        }
    }

    pub fn objective(&self) -> &dyn FiniteSum {
        match self {
            Instance::LeastSquares { ls, .. } => ls,
            Instance::Subspace { fit, .. } => fit,
            Instance::ToyEquality { objective, .. } => objective,
        }
    }

    /// The constraint map; empty for unconstrained families.
    pub fn constraints(&self) -> &dyn ConstraintMap {
        match self {
            Instance::LeastSquares { none, .. } => none,
            Instance::Subspace { cons, .. } => cons,
            Instance::ToyEquality { cons, .. } => cons,
        }
    }

    pub fn is_constrained(&self) -> bool {
        self.constraints().num_constraints() > 0
    }

    /// Column count of `W` for matrix-valued iterates.
    pub fn rank(&self) -> Option<usize> {
        match self {
            Instance::Subspace { fit, .. } => Some(fit.rank()),
            _ => None,
        }
    }

    /// Family-level feasibility: `‖WᵀW − I‖_F` for subspace fitting,
    /// `‖c(x)‖` for other constrained families.
    pub fn feasibility(&self, x: &[f64]) -> Option<f64> {
        match self {
            Instance::LeastSquares { .. } => None,
            Instance::Subspace { fit, .. } => Some(orthogonality_error(x, fit.rank())),
            Instance::ToyEquality { cons, .. } => Some(norm2(&cons.value(x))),
        }
    }

    /// `Σ_i f_i(x)`.
    pub fn objective_total(&self, x: &[f64]) -> f64 {
        let p = self.objective();
        p.value(x) * p.num_samples() as f64
    }

    /// Exact per-sample smoothness constants of the unpenalized objective,
    /// when the family is quadratic.
    pub fn sample_smoothness(&self) -> Option<Vec<f64>> {
        match self {
            Instance::LeastSquares { ls, .. } => Some(ls.sample_smoothness()),
            Instance::ToyEquality { objective, .. } => Some(objective.sample_smoothness()),
            Instance::Subspace { .. } => None,
        }
    }

    /// Exact per-sample smoothness of `φ_i = f_i + (μ/2)‖c‖²` when both
    /// parts are quadratic: `L_i + μ‖A‖₂²` for linear constraints `Ax = b`.
    pub fn penalized_sample_smoothness(&self, mu: f64) -> Option<Vec<f64>> {
        match self {
            Instance::LeastSquares { ls, .. } => Some(ls.sample_smoothness()),
            Instance::ToyEquality { objective, cons } => {
                let a = strop_core::linops::max_singular_value(&cons.jacobian(&[0.0, 0.0]));
                Some(
                    objective
                        .sample_smoothness()
                        .into_iter()
                        .map(|l| l + mu * a * a)
                        .collect(),
                )
            }
            Instance::Subspace { .. } => None,
        }
    }

    pub fn initial_point(&self, spec: &ProblemSpec) -> Result<Vec<f64>, HarnessError> {
        let dim = self.objective().dim();
        let (d, k) = match self.rank() {
            Some(k) => (dim / k, k),
            None => (dim, 1),
        };
        Ok(match spec.init {
            Init::Zeros => vec![0.0; dim],
            Init::Gaussian => random_init(d, k, spec.seed, InitMode::Gaussian)?,
            Init::Orthonormal => random_init(d, k, spec.seed, InitMode::Orthonormal)?,
        })
    }
}
