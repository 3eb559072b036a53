//! Compile a small first-order probabilistic language to factor graph
//! grammars and compute exact marginals over them.

pub mod cli;
pub mod fgg;
pub mod fixtures;
pub mod frontend;
pub mod inference;
pub mod oracle;
pub mod render;
pub mod tensor;
pub mod translate;
pub mod value;

pub use translate::{CompilationUnit, PassSet};

/// Front end, translation and the selected simplification passes.
pub fn compile(source: &str, params: &frontend::Params, passes: PassSet) -> Result<CompilationUnit, frontend::FrontendError> {
    let tp = frontend::load(source, params)?;
    Ok(translate::simplify(&translate::translate(&tp), passes))
}
