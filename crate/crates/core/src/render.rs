//! Rule diagrams: round nodes for variables, filled squares for factors and
//! nonterminals, double outlines for external nodes.

use std::fmt::Write;

use indexmap::IndexMap;

use crate::fgg::{Edge, Fgg, Hypergraph};
use crate::translate::simplify::fill;

/// Factor formulas keyed by terminal label, with `{i}` for attachment `i`.
pub type Descriptions = IndexMap<String, String>;

fn caption(g: &Fgg, h: &Hypergraph, e: &Edge, desc: &Descriptions) -> String {
    if g.is_nonterminal(&e.label) {
        let att: Vec<&str> = e.att.iter().map(|&a| h.nodes[a].id.as_str()).collect();
        return format!("{}({})", e.label, att.join(", "));
    }
    match desc.get(&e.label) {
        Some(t) => fill(t, |i| e.att.get(i).map_or("_".into(), |&a| h.nodes[a].id.clone())),
        None => e.label.clone(),
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// One `digraph` block per rule.
pub fn to_dot(g: &Fgg, desc: &Descriptions) -> String {
    let mut out = String::new();
    for (ri, r) in g.rules.iter().enumerate() {
        let h = &r.rhs;
        writeln!(out, "digraph rule{ri} {{").unwrap();
        writeln!(out, "  label=\"{}\";", dot_escape(&format!("{} ->", r.lhs))).unwrap();
        writeln!(out, "  labelloc=t;").unwrap();
        writeln!(out, "  edge [dir=none];").unwrap();
        for (ni, n) in h.nodes.iter().enumerate() {
            let ext = h.ext.iter().position(|&x| x == ni);
            let style = match ext {
                Some(k) => format!("shape=doublecircle, style=filled, fillcolor=lightgray, xlabel=\"{}\"", k + 1),
                None => "shape=circle".to_string(),
            };
            writeln!(out, "  n{ni} [label=\"{}\", {style}];", dot_escape(&n.id)).unwrap();
        }
        for (ei, e) in h.edges.iter().enumerate() {
            let fill = if g.is_nonterminal(&e.label) { "gray" } else { "black" };
            writeln!(
                out,
                "  f{ei} [label=\"\", shape=square, style=filled, fillcolor={fill}, width=0.15, xlabel=\"{}\"];",
                dot_escape(&caption(g, h, e, desc))
            )
            .unwrap();
            for (k, &a) in e.att.iter().enumerate() {
                if e.att.len() > 1 {
                    writeln!(out, "  f{ei} -> n{a} [taillabel=\"{}\"];", k + 1).unwrap();
                } else {
                    writeln!(out, "  f{ei} -> n{a};").unwrap();
                }
            }
        }
        writeln!(out, "}}").unwrap();
    }
    out
}

fn tex_escape(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\textbackslash{}"),
            '{' | '}' | '_' | '#' | '%' | '&' | '$' => {
                out.push('\\');
                out.push(c);
            }
            '^' => out.push_str("\\^{}"),
            '~' => out.push_str("\\~{}"),
            '\'' => out.push_str("\\textquotesingle{}"),
            '<' => out.push_str("\\textless{}"),
            '>' => out.push_str("\\textgreater{}"),
            _ => out.push(c),
        }
    }
    out
}

/// A standalone TikZ document with one picture per rule. Variables sit on
/// the top row, factors below, and attachments are straight lines.
pub fn to_latex(g: &Fgg, desc: &Descriptions) -> String {
    let mut out = String::new();
    out.push_str("\\documentclass[border=4pt]{standalone}\n\\usepackage{tikz}\n\\usepackage{textcomp}\n");
    out.push_str("\\tikzset{var/.style={circle,draw,minimum size=7mm,inner sep=1pt},\n");
    out.push_str("  ext/.style={var,fill=black!15,double},\n");
    out.push_str("  fac/.style={rectangle,fill=black,minimum size=2.5mm,inner sep=0pt},\n");
    out.push_str("  nt/.style={rectangle,draw,fill=black!40,minimum size=3mm,inner sep=0pt}}\n");
    out.push_str("\\begin{document}\n");
    for r in &g.rules {
        let h = &r.rhs;
        out.push_str("\\begin{tikzpicture}\n");
        writeln!(out, "  \\node[anchor=east] at (-1,0) {{\\texttt{{{}}} $\\to$}};", tex_escape(&r.lhs)).unwrap();
        for (ni, n) in h.nodes.iter().enumerate() {
            let style = if h.is_external(ni) { "ext" } else { "var" };
            writeln!(out, "  \\node[{style}] (n{ni}) at ({:.1},0) {{\\texttt{{{}}}}};", 1.6 * ni as f64, tex_escape(&n.id))
                .unwrap();
        }
        for (ei, e) in h.edges.iter().enumerate() {
            let style = if g.is_nonterminal(&e.label) { "nt" } else { "fac" };
            let x = if e.att.is_empty() {
                1.6 * ei as f64
            } else {
                1.6 * e.att.iter().sum::<usize>() as f64 / e.att.len() as f64
            };
            let y = -1.5 - 0.9 * ei as f64;
            writeln!(
                out,
                "  \\node[{style},label={{[font=\\scriptsize]right:\\texttt{{{}}}}}] (f{ei}) at ({x:.2},{y:.1}) {{}};",
                tex_escape(&caption(g, h, e, desc))
            )
            .unwrap();
            for &a in &e.att {
                writeln!(out, "  \\draw (f{ei}) -- (n{a});").unwrap();
            }
        }
        if h.nodes.is_empty() && h.edges.is_empty() {
            out.push_str("  \\path (0,0);\n");
        }
        out.push_str("\\end{tikzpicture}\n");
    }
    out.push_str("\\end{document}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{branching_fgg, pcfg_derivation_fgg, PcfgWeights};

    #[test]
    fn one_block_per_rule() {
        let g = pcfg_derivation_fgg(&PcfgWeights::single());
        let dot = to_dot(&g, &Descriptions::new());
        assert_eq!(dot.matches("digraph ").count(), 3);
        assert!(dot.contains("doublecircle"));
    }

    #[test]
    fn empty_rule_is_a_valid_picture() {
        let mut g = branching_fgg(0.5, 0.25);
        g.rules[0].rhs.edges.clear();
        let tex = to_latex(&g, &Descriptions::new());
        assert_eq!(tex.matches("\\begin{tikzpicture}").count(), 2);
        assert!(tex.contains("\\path (0,0);"));
        let dot = to_dot(&g, &Descriptions::new());
        assert!(dot.starts_with("digraph rule0 {"));
    }

    #[test]
    fn descriptions_name_the_attached_nodes() {
        let mut d = Descriptions::new();
        d.insert("p_lex".into(), "{1} ~ p({0})".into());
        let g = pcfg_derivation_fgg(&PcfgWeights::single());
        assert!(to_dot(&g, &d).contains("W2 ~ p(N1)"));
    }
}
