use super::ast::Builtin;
use super::params::Params;
use crate::value::Value;

/// Applies a builtin to argument values. `None` means the application is
/// undefined (for instance `fst` of a non-pair, or `car nil`), which the
/// compiled grammar treats as weight zero.
pub fn apply(op: &Builtin, args: &[&Value], params: &Params) -> Option<Value> {
    Some(match (op, args) {
        (Builtin::Const(v), []) => v.clone(),
        (Builtin::Eq, [a, b]) => Value::Bool(a == b),
        (Builtin::Neq, [a, b]) => Value::Bool(a != b),
        (Builtin::Pair, [a, b]) => Value::pair((*a).clone(), (*b).clone()),
        (Builtin::Cons, [a, b]) => Value::cons((*a).clone(), (*b).clone()),
        (Builtin::Fst, [Value::Pair(a, _)]) => (**a).clone(),
        (Builtin::Snd, [Value::Pair(_, b)]) => (**b).clone(),
        (Builtin::Inl, [a]) => Value::inl((*a).clone()),
        (Builtin::Inr, [a]) => Value::inr((*a).clone()),
        (Builtin::Car | Builtin::Cdr, [Value::Inr(cell)]) => match &**cell {
            Value::Pair(h, t) => {
                if *op == Builtin::Car {
                    (**h).clone()
                } else {
                    (**t).clone()
                }
            }
            _ => return None,
        },
        (Builtin::Param(table), [key]) => return params.lookup(table, key),
        _ => return None,
    })
}
