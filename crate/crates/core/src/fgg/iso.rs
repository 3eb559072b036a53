use std::collections::BTreeMap;

use super::Hypergraph;

/// True iff there is a bijection between the nodes and between the edges of
/// `a` and `b` that preserves node domains, edge labels, attachment order,
/// and the external-node sequence.
pub fn isomorphic(a: &Hypergraph, b: &Hypergraph) -> bool {
    if a.nodes.len() != b.nodes.len() || a.edges.len() != b.edges.len() || a.ext.len() != b.ext.len() {
        return false;
    }
    fn signature(g: &Hypergraph) -> BTreeMap<(&str, usize), usize> {
        let mut m = BTreeMap::new();
        for e in &g.edges {
            *m.entry((e.label.as_str(), e.att.len())).or_default() += 1;
        }
        m
    }
    if signature(a) != signature(b) {
        return false;
    }
    let mut s = Search {
        a,
        b,
        ab: vec![None; a.nodes.len()],
        ba: vec![None; b.nodes.len()],
        used: vec![false; b.edges.len()],
        trail: Vec::new(),
    };
    for (&x, &y) in a.ext.iter().zip(&b.ext) {
        if !s.bind(x, y) {
            return false;
        }
    }
    s.search(0)
}

struct Search<'g> {
    a: &'g Hypergraph,
    b: &'g Hypergraph,
    ab: Vec<Option<usize>>,
    ba: Vec<Option<usize>>,
    used: Vec<bool>,
    trail: Vec<usize>,
}

impl Search<'_> {
    fn bind(&mut self, x: usize, y: usize) -> bool {
        match (self.ab[x], self.ba[y]) {
            (Some(y2), _) => y2 == y,
            (None, Some(_)) => false,
            (None, None) => {
                if self.a.nodes[x].domain != self.b.nodes[y].domain {
                    return false;
                }
                self.ab[x] = Some(y);
                self.ba[y] = Some(x);
                self.trail.push(x);
                true
            }
        }
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let x = self.trail.pop().unwrap();
            let y = self.ab[x].take().unwrap();
            self.ba[y] = None;
        }
    }

    fn search(&mut self, k: usize) -> bool {
        if k == self.a.edges.len() {
            return self.leftovers_match();
        }
        let ea = &self.a.edges[k];
        for j in 0..self.b.edges.len() {
            let eb = &self.b.edges[j];
            if self.used[j] || eb.label != ea.label || eb.att.len() != ea.att.len() {
                continue;
            }
            let mark = self.trail.len();
            let ok = ea.att.iter().zip(&eb.att).all(|(&x, &y)| self.bind(x, y));
            if ok {
                self.used[j] = true;
                if self.search(k + 1) {
                    return true;
                }
                self.used[j] = false;
            }
            self.undo_to(mark);
        }
        false
    }

    /// Isolated nodes can be paired up freely as long as domains agree.
    fn leftovers_match(&self) -> bool {
        fn count<'g>(g: &'g Hypergraph, map: &[Option<usize>]) -> BTreeMap<&'g str, usize> {
            let mut m = BTreeMap::new();
            for (i, n) in g.nodes.iter().enumerate() {
                if map[i].is_none() {
                    *m.entry(n.domain.as_str()).or_default() += 1;
                }
            }
            m
        }
        count(self.a, &self.ab) == count(self.b, &self.ba)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Hypergraph {
        let mut g = Hypergraph::new();
        let x = g.add_node("x", "D");
        let y = g.add_node("y", "D");
        let z = g.add_node("z", "E");
        g.add_edge("e1", "F", vec![x, y]);
        g.add_edge("e2", "G", vec![y, z]);
        g.add_node("lonely", "D");
        g.ext = vec![x, y];
        g
    }

    #[test]
    fn identity() {
        assert!(isomorphic(&sample(), &sample()));
    }

    #[test]
    fn renaming() {
        let mut g = sample();
        for (i, n) in g.nodes.iter_mut().enumerate() {
            n.id = format!("n{i}");
        }
        g.edges.reverse();
        assert!(isomorphic(&sample(), &g));
    }

    #[test]
    fn ext_order_matters() {
        let mut g = sample();
        g.ext.reverse();
        assert!(!isomorphic(&sample(), &g));
    }

    #[test]
    fn attachment_order_matters() {
        let mut g = sample();
        g.edges[0].att.reverse();
        g.ext.clear();
        let mut h = sample();
        h.ext.clear();
        assert!(!isomorphic(&h, &g));
    }

    #[test]
    fn domains_matter() {
        let mut g = sample();
        g.nodes[3].domain = "E".into();
        assert!(!isomorphic(&sample(), &g));
    }
}
