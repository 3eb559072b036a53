use super::*;
use crate::fgg::validate;
use crate::fixtures::{suite, CKY_PARAMS, PCFG_PARAMS, PCFGW_AND_SOURCE, PCFG_SOURCE};
use crate::frontend::{load, Params};

fn programs() -> Vec<TypedProgram> {
    let mut out: Vec<TypedProgram> = suite().iter().map(|p| load(p.source, &p.params()).unwrap()).collect();
    out.push(load(PCFGW_AND_SOURCE, &Params::from_str(CKY_PARAMS).unwrap()).unwrap());
    out
}

fn expected_rules(tp: &TypedProgram) -> usize {
    let live = |e: &Expr| tp.typed(e.id).is_some();
    let mut n = 1 + tp.functions.len();
    tp.program.walk(&mut |e| {
        if !live(e) {
            return;
        }
        n += match &e.kind {
            ExprKind::If { then_branch: a, else_branch: b, .. } | ExprKind::Case { left: a, right: b, .. } => {
                live(a) as usize + live(b) as usize
            }
            _ => 1,
        };
    });
    n
}

#[test]
fn one_rule_per_construct() {
    for tp in programs() {
        let cu = translate(&tp);
        assert_eq!(cu.fgg.rules.len(), expected_rules(&tp));
        assert_eq!(cu.provenance.len(), cu.fgg.rules.len());
    }
}

#[test]
fn expression_arity_is_environment_plus_result() {
    for tp in programs() {
        let cu = translate(&tp);
        let mut checked = 0;
        tp.program.walk(&mut |e| {
            let Some(te) = tp.typed(e.id) else { return };
            let name = format!("{}@{}", e.kind_tag(), e.span);
            if let Some(l) = cu.fgg.label(&name) {
                assert_eq!(l.arity, te.env.len() + 1, "{name}");
                checked += 1;
            }
        });
        assert!(checked > 0);
        assert_eq!(cu.fgg.label(&cu.fgg.start).unwrap().arity, 1);
    }
}

#[test]
fn output_is_well_formed_before_and_after_passes() {
    for tp in programs() {
        let cu = translate(&tp);
        assert!(validate(&cu.fgg).is_empty(), "{:?}", validate(&cu.fgg));
        for bits in 0..16 {
            let s = simplify(&cu, PassSet::from_bits(bits));
            assert!(validate(&s.fgg).is_empty(), "passes {bits}: {:?}", validate(&s.fgg));
            assert_eq!(s.provenance.len(), s.fgg.rules.len());
        }
    }
}

#[test]
fn every_terminal_has_a_kind_and_description() {
    for tp in programs() {
        let cu = translate(&tp);
        for name in cu.fgg.factors.keys() {
            assert!(cu.factor_kinds.contains_key(name));
            assert!(cu.descriptions.contains_key(name));
        }
        for l in cu.fgg.nonterminals() {
            assert!(cu.roles.contains_key(&l.name));
        }
    }
}

#[test]
fn pcfg_simplifies_to_three_rules() {
    let tp = load(PCFG_SOURCE, &Params::from_str(PCFG_PARAMS).unwrap()).unwrap();
    let cu = simplify(&translate(&tp), PassSet::all());
    assert_eq!(cu.fgg.rules.len(), 3);
    let start: Vec<_> = cu.fgg.rules_for(&cu.fgg.start).collect();
    assert_eq!(start.len(), 1);
    let rhs = &start[0].1.rhs;
    assert_eq!(rhs.nodes.len(), 2);
    assert_eq!(rhs.edges.len(), 2);
    assert_eq!(rhs.edges.iter().filter(|e| e.label == "d").count(), 1);
    assert_eq!(cu.fgg.rules_for("d").count(), 2);
}

#[test]
fn pass_sets_parse() {
    assert_eq!("all".parse::<PassSet>().unwrap(), PassSet::all());
    assert_eq!("none".parse::<PassSet>().unwrap(), PassSet::none());
    let s: PassSet = "prune, contract".parse().unwrap();
    assert!(s.contains(Pass::Prune) && s.contains(Pass::Contract));
    assert!(!s.contains(Pass::Inline) && !s.contains(Pass::Compose));
    assert!("fold".parse::<PassSet>().is_err());
}
