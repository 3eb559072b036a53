//! Exact inference: variable elimination inside rules and fixed-point
//! iteration across them.

mod factor;
mod plan;
mod solve;

use thiserror::Error;

use crate::fgg::{Diagnostic, Fgg, Hypergraph};
use crate::tensor::WeightTensor;

pub use plan::{plan_elimination, plan_with_order, EliminationPlan};
pub use solve::{SolveOptions, Solver, SolverState, Status};

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error("grammar is invalid:\n{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Diagnostic>),
    #[error("weights diverged at iteration {} (largest entry above the bound)", .0.iteration)]
    Divergent(Box<SolverState>),
    #[error("graph has a nonterminal edge `{0}`")]
    Nonterminal(String),
}

/// Start-symbol weights together with the final solver state.
#[derive(Clone, Debug)]
pub struct Solution {
    pub start: WeightTensor,
    pub state: SolverState,
}

pub fn solve_fixed_point(g: &Fgg, opts: &SolveOptions) -> Result<SolverState, InferenceError> {
    Ok(Solver::new(g)?.solve(opts))
}

/// Weights of the start symbol. Divergence is an error that carries the
/// last iterate; running out of iterations is not.
pub fn query_start(g: &Fgg, opts: &SolveOptions) -> Result<Solution, InferenceError> {
    let state = solve_fixed_point(g, opts)?;
    if state.status == Status::Divergent {
        return Err(InferenceError::Divergent(Box::new(state)));
    }
    Ok(Solution { start: state.tau[&g.start].clone(), state })
}

fn check_terminal(g: &Fgg, h: &Hypergraph) -> Result<(), InferenceError> {
    match h.edges.iter().find(|e| !g.factors.contains_key(&e.label)) {
        Some(e) => Err(InferenceError::Nonterminal(e.label.clone())),
        None => Ok(()),
    }
}

/// Sum of assignment weights of a terminal-only graph, as a tensor over its
/// external nodes.
pub fn external_marginal(g: &Fgg, h: &Hypergraph) -> Result<WeightTensor, InferenceError> {
    check_terminal(g, h)?;
    let plan = plan_elimination(g, h);
    Ok(solve::contract(g, h, &plan.order, None, &mut 0))
}

/// As [`external_marginal`] with a caller-chosen elimination order.
pub fn external_marginal_with_order(g: &Fgg, h: &Hypergraph, order: Vec<usize>) -> Result<WeightTensor, InferenceError> {
    check_terminal(g, h)?;
    let plan = plan_with_order(g, h, order);
    Ok(solve::contract(g, h, &plan.order, None, &mut 0))
}

/// Product of factor values under one assignment, given as a value index per node.
pub fn assignment_weight(g: &Fgg, h: &Hypergraph, assignment: &[usize]) -> Result<f64, InferenceError> {
    check_terminal(g, h)?;
    Ok(h.edges
        .iter()
        .map(|e| {
            let idx: Vec<usize> = e.att.iter().map(|&a| assignment[a]).collect();
            g.factors[&e.label].weights.get(&idx)
        })
        .product())
}
