//! Command-line driver.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::fgg::{self, Fgg};
use crate::frontend::{self, Params};
use crate::inference::{query_start, InferenceError, SolveOptions, Solver, Status};
use crate::oracle;
use crate::render::{self, Descriptions};
use crate::tensor::WeightTensor;
use crate::translate::{flatten, simplify, translate, CompilationUnit, PassSet};
use crate::value::Value;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_FRONTEND: i32 = 2;
pub const EXIT_DIVERGENT: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "fggppl", version, about = "Compile probabilistic programs to factor graph grammars and solve them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Translate a program and write the grammar as JSON.
    Compile(CompileArgs),
    /// Solve for the start symbol's weights.
    Infer(InferArgs),
    /// Check the compiled grammar against the interpreter.
    Compare(CompareArgs),
    /// List derivation trees up to a height.
    Enumerate(EnumerateArgs),
    /// Draw every rule.
    Render(RenderArgs),
}

#[derive(Args, Debug)]
struct Input {
    /// Program source, or a grammar if the name ends in `.json`.
    input: PathBuf,
    #[arg(long)]
    params: Option<PathBuf>,
    /// `all`, `none`, or a comma-separated subset of prune,inline,compose,contract.
    #[arg(long, default_value = "all")]
    passes: String,
    /// Inline every expression nonterminal, even where that adds rules.
    #[arg(long)]
    flatten: bool,
}

#[derive(Args, Debug)]
struct Solve {
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long = "max-iter", default_value_t = 10_000)]
    max_iter: usize,
}

#[derive(Args, Debug)]
struct CompileArgs {
    #[command(flatten)]
    input: Input,
    /// Output path; a `.provenance.json` sidecar is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InferArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    solve: Solve,
    /// Print every nonterminal, not only the start symbol.
    #[arg(long)]
    all: bool,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    solve: Solve,
    #[arg(long, default_value_t = 4)]
    depth: usize,
    /// Grammar to check instead of the freshly compiled one.
    #[arg(long)]
    fgg: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// Root nonterminal; defaults to the start symbol.
    #[arg(long)]
    nonterminal: Option<String>,
    #[arg(long, default_value_t = 100_000)]
    limit: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Dot,
    Latex,
    Json,
}

#[derive(Args, Debug)]
struct RenderArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value_t = Format::Dot)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl ToString) -> Failure {
        Failure { code, message: message.to_string() }
    }
}

type Outcome = Result<(), Failure>;

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_IO } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Compile(a) => compile(&a, out),
        Command::Infer(a) => infer(&a, out),
        Command::Compare(a) => compare(&a, out),
        Command::Enumerate(a) => enumerate(&a, out),
        Command::Render(a) => render_cmd(&a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// `%.12g`-style formatting.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if !(-5..12).contains(&exp) {
        let s = format!("{x:.11e}");
        let (m, e) = s.split_once('e').expect("exponent");
        format!("{}e{e}", trim(m.to_string()))
    } else {
        trim(format!("{x:.*}", (11 - exp).max(0) as usize))
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, text: &str) -> Outcome {
    out.write_all(text.as_bytes()).map_err(|e| Failure::new(EXIT_IO, e))
}

fn is_grammar(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "json")
}

fn params(input: &Input) -> Result<Params, Failure> {
    match &input.params {
        Some(p) => Params::from_str(&read(p)?).map_err(|e| Failure::new(EXIT_FRONTEND, e)),
        None => Ok(Params::empty()),
    }
}

fn passes(input: &Input) -> Result<PassSet, Failure> {
    input.passes.parse().map_err(|e: String| Failure::new(EXIT_IO, e))
}

fn compile_unit(input: &Input) -> Result<CompilationUnit, Failure> {
    let source = read(&input.input)?;
    let params = params(input)?;
    let tp = frontend::load(&source, &params)
        .map_err(|e| Failure::new(EXIT_FRONTEND, format!("{}:{e}", input.input.display())))?;
    let cu = simplify(&translate(&tp), passes(input)?);
    Ok(if input.flatten { flatten(&cu) } else { cu })
}

fn load_grammar(path: &Path) -> Result<Fgg, Failure> {
    let g = fgg::json::from_str(&read(path)?).map_err(|e| Failure::new(EXIT_FRONTEND, format!("{}: {e}", path.display())))?;
    let diags = fgg::validate(&g);
    if let Some(d) = diags.first() {
        return Err(Failure::new(EXIT_FRONTEND, format!("{}: {d}", path.display())));
    }
    Ok(g)
}

/// The grammar and, for compiled programs, factor descriptions.
fn grammar(input: &Input) -> Result<(Fgg, Descriptions), Failure> {
    if is_grammar(&input.input) {
        Ok((load_grammar(&input.input)?, Descriptions::new()))
    } else {
        let cu = compile_unit(input)?;
        Ok((cu.fgg, cu.descriptions))
    }
}

fn options(s: &Solve) -> Result<SolveOptions, Failure> {
    if !(s.tol > 0.0) {
        return Err(Failure::new(EXIT_IO, "--tol must be positive"));
    }
    Ok(SolveOptions { tol: s.tol, max_iter: s.max_iter, ..SolveOptions::default() })
}

fn compile(a: &CompileArgs, out: &mut dyn Write) -> Outcome {
    let cu = compile_unit(&a.input)?;
    let json = fgg::json::to_string_pretty(&cu.fgg);
    match &a.out {
        Some(path) => {
            write_file(path, &json)?;
            let mut side = path.as_os_str().to_owned();
            side.push(".provenance.json");
            let prov = serde_json::to_string_pretty(&cu.provenance_json()).expect("provenance serializes");
            write_file(Path::new(&side), &(prov + "\n"))?;
            emit(out, &format!("wrote {} ({} rules)\n", path.display(), cu.fgg.rules.len()))
        }
        None => emit(out, &json),
    }
}

fn entry_label(name: &str, vals: &[&Value]) -> String {
    if vals.is_empty() {
        name.to_string()
    } else {
        let v: Vec<String> = vals.iter().map(ToString::to_string).collect();
        format!("{name}({})", v.join(", "))
    }
}

fn print_tensor(out: &mut dyn Write, name: &str, t: &WeightTensor) -> Outcome {
    for (vals, w) in t.entries() {
        emit(out, &format!("{} = {}\n", entry_label(name, &vals), fmt_num(w)))?;
    }
    Ok(())
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Converged => "converged",
        Status::MaxIter => "not converged (iteration limit)",
        Status::Divergent => "divergent",
    }
}

fn infer(a: &InferArgs, out: &mut dyn Write) -> Outcome {
    let (g, _) = grammar(&a.input)?;
    let opts = options(&a.solve)?;
    let solver = Solver::new(&g).map_err(|e| Failure::new(EXIT_FRONTEND, e))?;
    let state = solver.solve(&opts);
    let divergent = state.status == Status::Divergent;
    emit(out, &format!("status: {}\n", status_name(state.status)))?;
    emit(out, &format!("iterations: {}\n", state.iteration))?;
    emit(out, &format!("delta: {}\n", fmt_num(state.delta)))?;
    if divergent {
        emit(out, "partial results (last iterate):\n")?;
    }
    for (name, t) in &state.tau {
        if a.all || *name == g.start {
            print_tensor(out, name, t)?;
        }
    }
    if divergent {
        return Err(Failure::new(EXIT_DIVERGENT, format!("weights exceeded {} at iteration {}", fmt_num(opts.divergence_bound), state.iteration)));
    }
    Ok(())
}

fn compare(a: &CompareArgs, out: &mut dyn Write) -> Outcome {
    const EXACT: f64 = 1e-12;
    let source = read(&a.input.input)?;
    let params = params(&a.input)?;
    let surface = frontend::parse(&source).map_err(|e| Failure::new(EXIT_FRONTEND, e))?;
    let cu = compile_unit(&a.input)?;
    let opts = options(&a.solve)?;

    let interp = oracle::interpret(&surface, &params, a.depth);
    let flat = flatten(&cu);
    let trunc = oracle::truncated_wx(&flat.fgg, &flat.fgg.start, a.depth, 1_000_000)
        .map_err(|e| Failure::new(EXIT_MISMATCH, e))?;
    let checked = match &a.fgg {
        Some(p) => load_grammar(p)?,
        None => cu.fgg.clone(),
    };
    let fixed = match query_start(&checked, &opts) {
        Ok(s) => s.start,
        Err(InferenceError::Divergent(s)) => {
            return Err(Failure::new(EXIT_DIVERGENT, format!("fixed point diverged at iteration {}", s.iteration)))
        }
        Err(e) => return Err(Failure::new(EXIT_FRONTEND, e)),
    };
    let reference = if a.fgg.is_some() {
        Some(query_start(&cu.fgg, &opts).map_err(|e| Failure::new(EXIT_MISMATCH, e))?.start)
    } else {
        None
    };

    let by_value = |t: &WeightTensor| -> BTreeMap<Value, f64> {
        t.entries().map(|(v, w)| (v.first().map_or(Value::Unit, |x| (*x).clone()), w)).collect()
    };
    let (tmap, fmap) = (by_value(&trunc), by_value(&fixed));
    let rmap = reference.as_ref().map(by_value);
    let mut values: Vec<&Value> = interp.keys().chain(tmap.keys()).chain(fmap.keys()).collect();
    values.sort();
    values.dedup();

    emit(out, &format!("depth {}\nvalue\tinterpret\ttruncated\tfixed point\n", a.depth))?;
    let mut bad = Vec::new();
    for v in values {
        let i = interp.get(v).copied().unwrap_or(0.0);
        let t = tmap.get(v).copied().unwrap_or(0.0);
        let f = fmap.get(v).copied().unwrap_or(0.0);
        emit(out, &format!("{v}\t{}\t{}\t{}\n", fmt_num(i), fmt_num(t), fmt_num(f)))?;
        if (i - t).abs() > EXACT {
            bad.push(format!("{v}: interpreter and truncation differ by {}", fmt_num((i - t).abs())));
        }
        if f < i.max(t) - EXACT {
            bad.push(format!("{v}: fixed point {} is below the truncation {}", fmt_num(f), fmt_num(i.max(t))));
        }
        if let Some(r) = &rmap {
            let r = r.get(v).copied().unwrap_or(0.0);
            if (f - r).abs() > 1e-8 {
                bad.push(format!("{v}: grammar gives {}, compiled program gives {}", fmt_num(f), fmt_num(r)));
            }
        }
    }
    if bad.is_empty() {
        emit(out, "ok\n")
    } else {
        Err(Failure::new(EXIT_MISMATCH, format!("comparison failed:\n  {}", bad.join("\n  "))))
    }
}

fn enumerate(a: &EnumerateArgs, out: &mut dyn Write) -> Outcome {
    let (g, _) = grammar(&a.input)?;
    let root = a.nonterminal.clone().unwrap_or_else(|| g.start.clone());
    if !g.is_nonterminal(&root) {
        return Err(Failure::new(EXIT_IO, format!("`{root}` is not a nonterminal")));
    }
    let trees = oracle::derivations(&g, &root, a.depth, a.limit).map_err(|e| Failure::new(EXIT_IO, e))?;
    let mut total = 0.0;
    for t in &trees {
        let w = oracle::tree_weight(&g, t).map_err(|e| Failure::new(EXIT_IO, e))?.total();
        total += w;
        emit(out, &format!("{t}\t{}\n", fmt_num(w)))?;
    }
    emit(out, &format!("{} trees, total {}\n", trees.len(), fmt_num(total)))
}

fn render_cmd(a: &RenderArgs, out: &mut dyn Write) -> Outcome {
    let (g, desc) = grammar(&a.input)?;
    let text = match a.format {
        Format::Dot => render::to_dot(&g, &desc),
        Format::Latex => render::to_latex(&g, &desc),
        Format::Json => fgg::json::to_string_pretty(&g),
    };
    match &a.out {
        Some(p) => write_file(p, &text),
        None => emit(out, &text),
    }
}

#[cfg(test)]
mod tests {
    use super::fmt_num;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(0.847), "0.847");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(2.0 / 3.0 * 1e-7), "6.66666666667e-8");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(123456.0), "123456");
    }
}
