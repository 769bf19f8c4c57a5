//! Weak constraints: the objective `H_P(M)` and best models.

use crate::ground::{AtomId, GroundProgram};
use crate::model::{body_true, Interpretation, ModelError, Program};
use crate::solver::{cost_of, AspSolver};

/// Sum of the weights of weak constraints whose (ground) bodies are true.
pub fn objective(p: &Program, i: &Interpretation) -> Result<u128, ModelError> {
    let mut total = 0u128;
    for w in &p.weak_constraints {
        if body_true(&w.body, i)? {
            total += u128::from(w.weight);
        }
    }
    Ok(total)
}

/// Objective of a model mask over the base of `gp`.
pub fn objective_ids(gp: &GroundProgram, mask: &[bool]) -> u128 {
    cost_of(gp, mask)
}

#[derive(Clone, Debug, Default)]
pub struct OptimizeOptions {
    /// Enumerate every best model instead of returning the first one found.
    pub all: bool,
    /// Upper limit on the number of best models returned with `all`.
    pub limit: Option<usize>,
    /// When enumerating, distinguish models only by these atoms.
    pub projection: Option<Vec<AtomId>>,
    /// Literals every model must satisfy.
    pub assumptions: Vec<(AtomId, bool)>,
}

#[derive(Clone, Debug)]
pub struct BestModels {
    pub cost: u128,
    pub models: Vec<Vec<bool>>,
    /// Every improving model met during branch and bound, in order.
    pub trace: Vec<(u128, Vec<bool>)>,
}

/// Branch and bound over stable models. Returns `None` when there is no
/// stable model satisfying the assumptions.
pub fn best_models(gp: &GroundProgram, opts: &OptimizeOptions) -> Option<BestModels> {
    let mut solver = AspSolver::new(gp);
    let mut trace = Vec::new();
    let mut best: Option<(u128, Vec<bool>)> = None;
    while let Some(m) = solver.next_model(&opts.assumptions) {
        let c = solver.cost(&m);
        debug_assert!(best.as_ref().is_none_or(|(b, _)| c < *b));
        trace.push((c, m.clone()));
        best = Some((c, m));
        if c == 0 {
            break;
        }
        solver.set_cost_bound(c - 1);
    }
    let (cost, first) = best?;
    let models = if opts.all {
        enumerate_with_cost(gp, cost, opts)
    } else {
        vec![first]
    };
    Some(BestModels { cost, models, trace })
}

/// All stable models (modulo projection) with objective at most `bound`.
pub fn enumerate_with_cost(gp: &GroundProgram, bound: u128, opts: &OptimizeOptions) -> Vec<Vec<bool>> {
    let mut solver = AspSolver::new(gp);
    solver.set_cost_bound(bound);
    let mut out = Vec::new();
    while opts.limit.is_none_or(|l| out.len() < l) {
        let Some(m) = solver.next_model(&opts.assumptions) else {
            break;
        };
        solver.block(&m, opts.projection.as_deref());
        out.push(m);
    }
    out
}

/// Some stable model with objective at most `bound`, if one exists.
pub fn model_within(gp: &GroundProgram, bound: u128, assumptions: &[(AtomId, bool)]) -> Option<Vec<bool>> {
    let mut solver = AspSolver::new(gp);
    solver.set_cost_bound(bound);
    solver.next_model(assumptions)
}
