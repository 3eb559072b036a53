use fggppl::fgg::DiagCode;
use fggppl::fixtures::{parse_tree_graph, pcfg_derivation_fgg, PcfgWeights};
use fggppl::inference::{
    assignment_weight, external_marginal, plan_elimination, query_start, solve_fixed_point, InferenceError,
    SolveOptions, Status,
};

fn weights(binary: f64, lexical: f64) -> PcfgWeights {
    let mut w = PcfgWeights::single();
    w.binary[0].3 = binary;
    w.lexical[0].2 = lexical;
    w
}

#[test]
fn subcritical_pcfg_sums_to_one() {
    let s = query_start(&pcfg_derivation_fgg(&PcfgWeights::single()), &SolveOptions::default()).unwrap();
    assert_eq!(s.state.status, Status::Converged);
    assert!((s.start.total() - 1.0).abs() < 1e-8);
}

#[test]
fn supercritical_pcfg_takes_the_least_root() {
    // Z = 0.2 + 0.8 Z^2 has roots 1/4 and 1.
    let s = query_start(&pcfg_derivation_fgg(&weights(0.8, 0.2)), &SolveOptions::default()).unwrap();
    assert!((s.start.total() - 0.25).abs() < 1e-9);
}

#[test]
fn one_iteration_sees_only_leaves() {
    let opts = SolveOptions { max_iter: 1, ..SolveOptions::default() };
    let state = solve_fixed_point(&pcfg_derivation_fgg(&PcfgWeights::single()), &opts).unwrap();
    assert_eq!(state.status, Status::MaxIter);
    assert_eq!(state.iteration, 1);
    assert_eq!(state.tau["X"].data(), &[0.7]);
    assert_eq!(state.tau["S'"].total(), 0.0);
}

#[test]
fn improper_weights_diverge() {
    let err = query_start(&pcfg_derivation_fgg(&weights(1.8, 0.2)), &SolveOptions::default()).unwrap_err();
    match err {
        InferenceError::Divergent(s) => {
            assert_eq!(s.status, Status::Divergent);
            assert!(s.iteration < 100);
        }
        other => panic!("{other}"),
    }
}

#[test]
fn invalid_grammars_are_rejected_up_front() {
    let mut g = pcfg_derivation_fgg(&PcfgWeights::single());
    g.rules[1].rhs.edges[1].att.clear();
    match solve_fixed_point(&g, &SolveOptions::default()) {
        Err(InferenceError::Invalid(d)) => assert!(d.iter().any(|d| d.code == DiagCode::AttArity)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn factor_graph_marginal_matches_the_tree_weight() {
    let g = pcfg_derivation_fgg(&PcfgWeights::small());
    let h = parse_tree_graph();
    // S -> A B with A -> a and B -> b is the only nonzero assignment.
    let total = external_marginal(&g, &h).unwrap().total();
    assert!((total - 0.6 * 0.8 * 1.0).abs() < 1e-15);
    // N = [S, A, B], W = [a, b].
    assert!((assignment_weight(&g, &h, &[0, 1, 2, 0, 1]).unwrap() - 0.48).abs() < 1e-15);
    assert_eq!(assignment_weight(&g, &h, &[0, 2, 1, 0, 1]).unwrap(), 0.0);
}

#[test]
fn nonterminal_edges_need_weights() {
    let g = pcfg_derivation_fgg(&PcfgWeights::single());
    assert!(matches!(external_marginal(&g, &g.rules[1].rhs), Err(InferenceError::Nonterminal(l)) if l == "X"));
}

#[test]
fn plans_cover_every_internal_node() {
    let g = pcfg_derivation_fgg(&PcfgWeights::small());
    for r in &g.rules {
        let plan = plan_elimination(&g, &r.rhs);
        let mut order = plan.order.clone();
        order.sort_unstable();
        assert_eq!(order, r.rhs.internal_nodes());
    }
    let plan = plan_elimination(&g, &parse_tree_graph());
    assert_eq!(plan.order.len(), 5);
    assert!(plan.widest.len() <= 3);
}
