//! Textbook inside algorithm for grammars in Chomsky normal form.

use std::collections::HashMap;

#[derive(Clone, Debug, PartialEq)]
pub struct Cnf {
    pub start: String,
    /// `X -> Y Z` with weight.
    pub binary: Vec<(String, String, String, f64)>,
    /// `X -> a` with weight.
    pub lexical: Vec<(String, String, f64)>,
}

/// Total weight of all parses of `words` from the start symbol.
pub fn inside(g: &Cnf, words: &[&str]) -> f64 {
    let n = words.len();
    if n == 0 {
        return 0.0;
    }
    // chart[i][j]: spans words[i..j].
    let mut chart: Vec<Vec<HashMap<&str, f64>>> = vec![vec![HashMap::new(); n + 1]; n + 1];
    for (i, w) in words.iter().enumerate() {
        for (x, a, p) in &g.lexical {
            if a == w {
                *chart[i][i + 1].entry(x.as_str()).or_insert(0.0) += p;
            }
        }
    }
    for len in 2..=n {
        for i in 0..=n - len {
            let j = i + len;
            for k in i + 1..j {
                for (x, y, z, p) in &g.binary {
                    let l = chart[i][k].get(y.as_str()).copied().unwrap_or(0.0);
                    let r = chart[k][j].get(z.as_str()).copied().unwrap_or(0.0);
                    if l * r > 0.0 {
                        *chart[i][j].entry(x.as_str()).or_insert(0.0) += p * l * r;
                    }
                }
            }
        }
    }
    chart[0][n].get(g.start.as_str()).copied().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_word_sentence() {
        let g = Cnf {
            start: "S".into(),
            binary: vec![("S".into(), "A".into(), "B".into(), 0.6)],
            lexical: vec![("S".into(), "a".into(), 0.4), ("A".into(), "a".into(), 1.0), ("B".into(), "b".into(), 1.0)],
        };
        assert_eq!(inside(&g, &["a", "b"]), 0.6);
        assert_eq!(inside(&g, &["a"]), 0.4);
        assert_eq!(inside(&g, &["b", "a"]), 0.0);
    }
}
