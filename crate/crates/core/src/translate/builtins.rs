use std::sync::Arc;

use crate::frontend::eval::apply;
use crate::frontend::{Builtin, Params};
use crate::tensor::WeightTensor;
use crate::value::{Domain, Value};

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// `[v = x]` over `(x, v)`.
pub fn copy_table(x: &Arc<Domain>, v: &Arc<Domain>) -> WeightTensor {
    WeightTensor::from_fn(vec![x.clone(), v.clone()], |a| indicator(a[0] == a[1]))
}

/// `d(v)` over `(d, v)`.
pub fn density_table(dist: &Arc<Domain>, v: &Arc<Domain>, params: &Params) -> WeightTensor {
    WeightTensor::from_fn(vec![dist.clone(), v.clone()], |a| params.density(a[0], a[1]))
}

/// `[c = b]` over the condition.
pub fn bool_guard(cond: &Arc<Domain>, b: bool) -> WeightTensor {
    WeightTensor::from_fn(vec![cond.clone()], |a| indicator(*a[0] == Value::Bool(b)))
}

/// `[s = inl y]` or `[s = inr y]` over `(s, y)`.
pub fn sum_guard(scrutinee: &Arc<Domain>, binder: &Arc<Domain>, left: bool) -> WeightTensor {
    WeightTensor::from_fn(vec![scrutinee.clone(), binder.clone()], |a| {
        indicator(match a[0] {
            Value::Inl(x) if left => **x == *a[1],
            Value::Inr(x) if !left => **x == *a[1],
            _ => false,
        })
    })
}

/// `[v = op(args)]` over `(args.., v)`.
pub fn builtin_table(op: &Builtin, args: &[Arc<Domain>], out: &Arc<Domain>, params: &Params) -> WeightTensor {
    let mut doms = args.to_vec();
    doms.push(out.clone());
    let n = args.len();
    WeightTensor::from_fn(doms, |a| indicator(apply(op, &a[..n], params).as_ref() == Some(a[n])))
}

pub fn describe(op: &Builtin) -> String {
    match op {
        Builtin::Const(c) => format!("{{0}} = {c}"),
        Builtin::Eq => "{2} = ({0} = {1})".into(),
        Builtin::Neq => "{2} = ({0} != {1})".into(),
        Builtin::Pair => "{2} = ({0}, {1})".into(),
        Builtin::Cons => "{2} = cons({0}, {1})".into(),
        Builtin::Param(t) => format!("{{1}} = {t}[{{0}}]"),
        other => format!("{{1}} = {}({{0}})", other.tag()),
    }
}
