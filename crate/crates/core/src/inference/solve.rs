//! Fixed-point iteration for the nonterminal weights.

use std::sync::Arc;

use indexmap::IndexMap;

use super::factor::{eliminate, product_over, Factor};
use super::plan::{plan_elimination, EliminationPlan};
use super::InferenceError;
use crate::fgg::{validate, Fgg, Hypergraph};
use crate::tensor::WeightTensor;
use crate::value::Domain;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Any weight above this counts as divergence.
    pub divergence_bound: f64,
}

impl Default for SolveOptions {
    fn default() -> SolveOptions {
        SolveOptions { tol: 1e-10, max_iter: 10_000, divergence_bound: 1e12 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIter,
    Divergent,
}

/// Iterate number `iteration`; `delta` is its sup distance from the previous one.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub tau: IndexMap<String, WeightTensor>,
    pub iteration: usize,
    pub delta: f64,
    pub status: Status,
}

/// A validated grammar with one elimination plan per rule.
#[derive(Clone, Debug)]
pub struct Solver {
    fgg: Fgg,
    plans: Vec<EliminationPlan>,
    nt_domains: IndexMap<String, Vec<Arc<Domain>>>,
}

impl Solver {
    pub fn new(g: &Fgg) -> Result<Solver, InferenceError> {
        let diags = validate(g);
        if !diags.is_empty() {
            return Err(InferenceError::Invalid(diags));
        }
        let plans = g.rules.iter().map(|r| plan_elimination(g, &r.rhs)).collect();
        let nt_domains = g
            .nonterminals()
            .filter_map(|l| Some((l.name.clone(), g.nonterminal_domains(&l.name)?)))
            .collect();
        Ok(Solver { fgg: g.clone(), plans, nt_domains })
    }

    pub fn fgg(&self) -> &Fgg {
        &self.fgg
    }

    pub fn plan(&self, rule: usize) -> &EliminationPlan {
        &self.plans[rule]
    }

    pub fn zero(&self) -> IndexMap<String, WeightTensor> {
        self.nt_domains.iter().map(|(k, d)| (k.clone(), WeightTensor::zeros(d.clone()))).collect()
    }

    /// Weight of one rule's right-hand side given nonterminal weights `tau`,
    /// as a tensor over its external nodes. Also returns the table-operation count.
    pub fn rule_contribution(&self, rule: usize, tau: &IndexMap<String, WeightTensor>) -> (WeightTensor, u64) {
        let h = &self.fgg.rules[rule].rhs;
        let mut ops = 0;
        let out = contract(&self.fgg, h, &self.plans[rule].order, Some(tau), &mut ops);
        (out, ops)
    }

    /// One Jacobi step: every nonterminal is recomputed from `tau`.
    pub fn step(&self, tau: &IndexMap<String, WeightTensor>) -> IndexMap<String, WeightTensor> {
        let mut next = self.zero();
        for (i, r) in self.fgg.rules.iter().enumerate() {
            let (w, _) = self.rule_contribution(i, tau);
            let acc = next.get_mut(&r.lhs).expect("every lhs is a declared nonterminal");
            *acc = add(acc, &w);
        }
        next
    }

    /// Iterates from zero until the sup change drops below `tol`, the
    /// iteration budget runs out, or a weight exceeds the divergence bound.
    /// `observe` sees every iterate.
    pub fn solve_observed(&self, opts: &SolveOptions, mut observe: impl FnMut(&SolverState)) -> SolverState {
        let mut state =
            SolverState { tau: self.zero(), iteration: 0, delta: f64::INFINITY, status: Status::MaxIter };
        while state.iteration < opts.max_iter {
            let next = self.step(&state.tau);
            let delta = next
                .iter()
                .map(|(k, t)| t.sup_distance(&state.tau[k]))
                .fold(0.0, |a: f64, b| if b.is_nan() { f64::INFINITY } else { a.max(b) });
            let blown = next.values().flat_map(|t| t.data()).any(|&x| !x.is_finite() || x > opts.divergence_bound);
            state = SolverState { tau: next, iteration: state.iteration + 1, delta, status: Status::MaxIter };
            if blown {
                state.status = Status::Divergent;
            } else if delta < opts.tol {
                state.status = Status::Converged;
            }
            observe(&state);
            if state.status != Status::MaxIter {
                break;
            }
        }
        state
    }

    pub fn solve(&self, opts: &SolveOptions) -> SolverState {
        self.solve_observed(opts, |_| {})
    }
}

fn add(a: &WeightTensor, b: &WeightTensor) -> WeightTensor {
    let data = a.data().iter().zip(b.data()).map(|(x, y)| x + y).collect();
    WeightTensor::from_raw(a.domains().to_vec(), data)
}

/// Sums out the internal nodes of `h` in `order` and returns the table over
/// its external nodes. Nonterminal edges read `tau`; without `tau` they are
/// an error.
pub(crate) fn contract(
    g: &Fgg,
    h: &Hypergraph,
    order: &[usize],
    tau: Option<&IndexMap<String, WeightTensor>>,
    ops: &mut u64,
) -> WeightTensor {
    let mut factors: Vec<Factor> = h
        .edges
        .iter()
        .map(|e| {
            let t = match g.factors.get(&e.label) {
                Some(f) => &f.weights,
                None => tau
                    .and_then(|tau| tau.get(&e.label))
                    .unwrap_or_else(|| panic!("no weights for nonterminal `{}`", e.label)),
            };
            Factor::from_table(t.data(), &t.shape(), &e.att)
        })
        .collect();
    for &v in order {
        let (touched, rest): (Vec<Factor>, Vec<Factor>) = factors.into_iter().partition(|f| f.vars.contains(&v));
        let d = g.node_domain(h, v).len();
        factors = rest;
        factors.push(eliminate(&touched, Some((v, d)), ops));
    }
    let out: Vec<(usize, usize)> = h.ext.iter().map(|&x| (x, g.node_domain(h, x).len())).collect();
    let data = product_over(&factors, &out, ops);
    let doms = h.ext.iter().map(|&x| g.node_domain(h, x).clone()).collect();
    WeightTensor::from_raw(doms, data)
}
