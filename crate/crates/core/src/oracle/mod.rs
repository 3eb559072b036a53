//! Reference implementations that share no code with the compiler or the
//! solver beyond the value and grammar data types.

pub mod enumerate;
pub mod inside;
pub mod interp;

pub use enumerate::{brute_force_marginal, derivations, truncated_wx, tree_weight, EnumerateError};
pub use inside::{inside, Cnf};
pub use interp::{branches, interpret, path_weights, Branch, Decision};
