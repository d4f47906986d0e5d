//! Problem descriptions: the original constrained instance, its epigraph
//! lift with one auxiliary variable per node, and the generic
//! linear-objective form the engine consumes.

use ndarray::{s, Array1};

use crate::convex::{ConvexFunction, SimpleSet};
use crate::error::{Error, Result};

const WITNESS_TOL: f64 = 1e-9;

/// A sum-of-local-objectives instance: minimize sum_j f_j(x) over x in X
/// subject to every node's g_j(x) <= 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    m: usize,
    x_set: SimpleSet,
    objectives: Vec<ConvexFunction>,
    constraints: Vec<Vec<ConvexFunction>>,
    feasible_point: Array1<f64>,
}

impl ProblemSpec {
    /// Build and validate an instance. A node with no constraints gets the
    /// vacuous constraint -1 <= 0 so that every node has tau_j >= 1 and the
    /// random constraint draw stays well defined.
    ///
    /// The feasibility witness makes solvability checkable up front: it must
    /// lie in X and satisfy every constraint.
    pub fn new(
        x_set: SimpleSet,
        objectives: Vec<ConvexFunction>,
        constraints: Vec<Vec<ConvexFunction>>,
        feasible_point: Array1<f64>,
    ) -> Result<Self> {
        let m = x_set.dimension();
        if m == 0 {
            return Err(Error::ZeroDimension);
        }
        let n = objectives.len();
        if n == 0 {
            return Err(Error::EmptyProblem);
        }
        if constraints.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: constraints.len(),
            });
        }
        for f in &objectives {
            if f.dimension() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: f.dimension(),
                });
            }
        }
        let constraints: Vec<Vec<ConvexFunction>> = constraints
            .into_iter()
            .map(|list| {
                if list.is_empty() {
                    vec![ConvexFunction::constant(m, -1.0)]
                } else {
                    list
                }
            })
            .collect();
        for list in &constraints {
            for g in list {
                if g.dimension() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        got: g.dimension(),
                    });
                }
            }
        }
        if feasible_point.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: feasible_point.len(),
            });
        }
        if !x_set.contains(&feasible_point, WITNESS_TOL) {
            return Err(Error::InfeasibleWitness(format!(
                "witness violates the common set by {:e}",
                x_set.violation(&feasible_point)
            )));
        }
        for (j, list) in constraints.iter().enumerate() {
            for (l, g) in list.iter().enumerate() {
                let v = g.evaluate(&feasible_point)?;
                if v > WITNESS_TOL {
                    return Err(Error::InfeasibleWitness(format!(
                        "witness violates constraint {} of node {} by {:e}",
                        l + 1,
                        j + 1,
                        v
                    )));
                }
            }
        }
        Ok(ProblemSpec {
            m,
            x_set,
            objectives,
            constraints,
            feasible_point,
        })
    }

    pub fn n(&self) -> usize {
        self.objectives.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn x_set(&self) -> &SimpleSet {
        &self.x_set
    }

    pub fn objective(&self, j: usize) -> &ConvexFunction {
        &self.objectives[j]
    }

    pub fn objectives(&self) -> &[ConvexFunction] {
        &self.objectives
    }

    pub fn constraints_of(&self, j: usize) -> &[ConvexFunction] {
        &self.constraints[j]
    }

    pub fn feasible_point(&self) -> &Array1<f64> {
        &self.feasible_point
    }

    /// F(x) = sum_j f_j(x).
    pub fn total_objective(&self, x: &Array1<f64>) -> Result<f64> {
        let mut total = 0.0;
        for f in &self.objectives {
            total += f.evaluate(x)?;
        }
        Ok(total)
    }

    /// Worst constraint violation over all nodes at x (common set excluded).
    pub fn constraint_violation(&self, x: &Array1<f64>) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for list in &self.constraints {
            for g in list {
                worst = worst.max(g.evaluate(x)?.max(0.0));
            }
        }
        Ok(worst)
    }
}

/// The epigraph form: decision (x, t) in R^{m+n}, linear cost 1't over the
/// t-block, per-node objective constraint f_j(x) - t_j <= 0, original g_j on
/// the x-block, and Theta = X x R^n.
#[derive(Debug, Clone, PartialEq)]
pub struct EpigraphProblem {
    m: usize,
    n: usize,
    theta_set: SimpleSet,
    cost: Array1<f64>,
    objectives: Vec<ConvexFunction>,
    constraints: Vec<Vec<ConvexFunction>>,
}

/// Lift an instance into its epigraph form. Reported objective values divide
/// by n: the stored cost vector is the unscaled [0_m; 1_n].
pub fn lift(p: &ProblemSpec) -> Result<EpigraphProblem> {
    let m = p.m();
    let n = p.n();
    let theta_set = p.x_set().cylinder_extend(n)?;
    let mut cost = Array1::zeros(m + n);
    cost.slice_mut(s![m..]).fill(1.0);
    Ok(EpigraphProblem {
        m,
        n,
        theta_set,
        cost,
        objectives: p.objectives().to_vec(),
        constraints: (0..n).map(|j| p.constraints_of(j).to_vec()).collect(),
    })
}

impl EpigraphProblem {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Dimension of the lifted decision variable.
    pub fn d(&self) -> usize {
        self.m + self.n
    }

    pub fn theta_set(&self) -> &SimpleSet {
        &self.theta_set
    }

    pub fn cost(&self) -> &Array1<f64> {
        &self.cost
    }

    /// Reported objectives divide the raw cost value by n.
    pub fn objective_scale(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn objective(&self, j: usize) -> &ConvexFunction {
        &self.objectives[j]
    }

    pub fn constraints_of(&self, j: usize) -> &[ConvexFunction] {
        &self.constraints[j]
    }

    /// Value of the lifted objective constraint f_j(x) - t_j at theta.
    pub fn objective_constraint_value(&self, j: usize, theta: &Array1<f64>) -> Result<f64> {
        let (x, t) = split(theta, self.m, self.n)?;
        Ok(self.objectives[j].evaluate(&x)? - t[j])
    }
}

/// The generic linear-objective form: minimize c'theta over Theta subject to
/// one scalar constraint and one constraint vector per node.
#[derive(Debug, Clone, PartialEq)]
pub struct GenericProblem {
    d: usize,
    cost: Array1<f64>,
    theta_set: SimpleSet,
    scalar_constraints: Vec<ConvexFunction>,
    vector_constraints: Vec<Vec<ConvexFunction>>,
    objective_scale: f64,
}

impl GenericProblem {
    pub fn new(
        cost: Array1<f64>,
        theta_set: SimpleSet,
        scalar_constraints: Vec<ConvexFunction>,
        vector_constraints: Vec<Vec<ConvexFunction>>,
        objective_scale: f64,
    ) -> Result<Self> {
        let d = theta_set.dimension();
        if cost.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: cost.len(),
            });
        }
        let n = scalar_constraints.len();
        if n == 0 {
            return Err(Error::EmptyProblem);
        }
        if vector_constraints.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: vector_constraints.len(),
            });
        }
        for f in &scalar_constraints {
            if f.dimension() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: f.dimension(),
                });
            }
        }
        for list in &vector_constraints {
            if list.is_empty() {
                return Err(Error::EmptyProblem);
            }
            for g in list {
                if g.dimension() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: g.dimension(),
                    });
                }
            }
        }
        Ok(GenericProblem {
            d,
            cost,
            theta_set,
            scalar_constraints,
            vector_constraints,
            objective_scale,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.scalar_constraints.len()
    }

    pub fn cost(&self) -> &Array1<f64> {
        &self.cost
    }

    pub fn theta_set(&self) -> &SimpleSet {
        &self.theta_set
    }

    pub fn scalar_constraint(&self, j: usize) -> &ConvexFunction {
        &self.scalar_constraints[j]
    }

    pub fn vector_constraints_of(&self, j: usize) -> &[ConvexFunction] {
        &self.vector_constraints[j]
    }

    pub fn objective_scale(&self) -> f64 {
        self.objective_scale
    }

    /// Worst violation over scalar and vector constraints at theta.
    pub fn feasibility_residual(&self, theta: &Array1<f64>) -> Result<f64> {
        let mut worst: f64 = self.theta_set.violation(theta);
        for f in &self.scalar_constraints {
            worst = worst.max(f.evaluate(theta)?.max(0.0));
        }
        for list in &self.vector_constraints {
            for g in list {
                worst = worst.max(g.evaluate(theta)?.max(0.0));
            }
        }
        Ok(worst)
    }
}

/// Unfold the lift into the generic form: theta = (x, t), the scalar
/// constraint of node j is f_j(x) - t_j, and each g extends to theta by
/// ignoring the t-block.
pub fn to_generic(e: &EpigraphProblem) -> Result<GenericProblem> {
    let m = e.m();
    let n = e.n();
    let d = e.d();
    let mut scalar = Vec::with_capacity(n);
    let mut vector = Vec::with_capacity(n);
    for j in 0..n {
        scalar.push(ConvexFunction::lifted(
            e.objective(j).clone(),
            d,
            Some((m + j, -1.0)),
        )?);
        vector.push(
            e.constraints_of(j)
                .iter()
                .map(|g| ConvexFunction::lifted(g.clone(), d, None))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    GenericProblem::new(
        e.cost().clone(),
        e.theta_set().clone(),
        scalar,
        vector,
        e.objective_scale(),
    )
}

/// Split theta into its decision and auxiliary blocks.
pub fn split(theta: &Array1<f64>, m: usize, n: usize) -> Result<(Array1<f64>, Array1<f64>)> {
    if theta.len() != m + n {
        return Err(Error::DimensionMismatch {
            expected: m + n,
            got: theta.len(),
        });
    }
    Ok((theta.slice(s![..m]).to_owned(), theta.slice(s![m..]).to_owned()))
}

/// Inverse of `split`.
pub fn join(x: &Array1<f64>, t: &Array1<f64>) -> Array1<f64> {
    let mut theta = Array1::zeros(x.len() + t.len());
    theta.slice_mut(s![..x.len()]).assign(x);
    theta.slice_mut(s![x.len()..]).assign(t);
    theta
}
