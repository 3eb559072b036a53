//! Weight-preserving grammar rewrites.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use super::{CompilationUnit, FactorKind, NtRole, Provenance};
use crate::fgg::{fresh_name, EdgeLabel, FactorTable, Hypergraph, Naming, Rule};
use crate::tensor::{MultiIndex, WeightTensor};

/// Largest factor table `compose` may create.
pub const COMPOSE_LIMIT: usize = 65536;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pass {
    /// Drop rules that can only contribute zero, and unreachable rules.
    Prune,
    /// Substitute nonterminals that have a single rule, or a single use.
    Inline,
    /// Merge two builtin factors that meet at a private node.
    Compose,
    /// Fuse the two ends of a variable copy.
    Contract,
}

impl Pass {
    pub const ALL: [Pass; 4] = [Pass::Prune, Pass::Inline, Pass::Compose, Pass::Contract];

    pub fn name(self) -> &'static str {
        match self {
            Pass::Prune => "prune",
            Pass::Inline => "inline",
            Pass::Compose => "compose",
            Pass::Contract => "contract",
        }
    }
}

impl fmt::Display for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PassSet(u8);

impl PassSet {
    pub fn all() -> PassSet {
        PassSet(0b1111)
    }

    pub fn none() -> PassSet {
        PassSet(0)
    }

    pub fn only(p: Pass) -> PassSet {
        PassSet::none().with(p)
    }

    pub fn with(self, p: Pass) -> PassSet {
        PassSet(self.0 | Self::bit(p))
    }

    pub fn contains(self, p: Pass) -> bool {
        self.0 & Self::bit(p) != 0
    }

    /// Bit 1 prune, 2 inline, 4 compose, 8 contract.
    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn from_bits(bits: u8) -> PassSet {
        PassSet(bits & 0b1111)
    }

    fn bit(p: Pass) -> u8 {
        match p {
            Pass::Prune => 1,
            Pass::Inline => 2,
            Pass::Compose => 4,
            Pass::Contract => 8,
        }
    }
}

impl FromStr for PassSet {
    type Err = String;

    /// `all`, `none`, or a comma-separated list of pass names.
    fn from_str(s: &str) -> Result<PassSet, String> {
        match s.trim() {
            "all" => return Ok(PassSet::all()),
            "none" | "" => return Ok(PassSet::none()),
            _ => {}
        }
        s.split(',').try_fold(PassSet::none(), |acc, name| {
            let p = Pass::ALL
                .into_iter()
                .find(|p| p.name() == name.trim())
                .ok_or_else(|| format!("unknown pass `{}`", name.trim()))?;
            Ok(acc.with(p))
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PassEvent {
    pub pass: Pass,
    pub detail: String,
}

impl fmt::Display for PassEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pass, self.detail)
    }
}

/// Applies the enabled passes until none of them changes the grammar.
pub fn simplify(cu: &CompilationUnit, passes: PassSet) -> CompilationUnit {
    let mut cu = cu.clone();
    loop {
        let mut fired = false;
        for p in Pass::ALL {
            if passes.contains(p) {
                fired |= run_pass(&mut cu, p);
            }
        }
        if !fired {
            break;
        }
    }
    collect_garbage(&mut cu);
    for r in &mut cu.fgg.rules {
        tidy_node_ids(&mut r.rhs);
    }
    cu
}

fn generated_id(id: &str) -> bool {
    id.strip_prefix('v').is_some_and(|rest| rest.chars().all(|c| c.is_ascii_digit() || c == '_'))
}

/// Renumbers generated internal node ids as `v1`, `v2`, ...
fn tidy_node_ids(h: &mut Hypergraph) {
    let rename: Vec<usize> =
        h.internal_nodes().into_iter().filter(|&n| generated_id(&h.nodes[n].id)).collect();
    let mut k = 0;
    for n in rename {
        let id = loop {
            k += 1;
            let c = format!("v{k}");
            if !h.nodes.iter().any(|m| m.id == c) {
                break c;
            }
        };
        h.nodes[n].id = id;
    }
}

/// Runs one pass to exhaustion. Returns whether it changed anything.
pub fn run_pass(cu: &mut CompilationUnit, pass: Pass) -> bool {
    let fired = match pass {
        Pass::Prune => prune(cu),
        Pass::Inline => inline(cu),
        Pass::Compose => compose(cu),
        Pass::Contract => contract(cu),
    };
    collect_garbage(cu);
    fired
}

fn log(cu: &mut CompilationUnit, pass: Pass, detail: String) {
    cu.pass_log.push(PassEvent { pass, detail });
}

fn keep_rules(cu: &mut CompilationUnit, keep: impl Fn(usize, &Rule) -> bool) {
    let flags: Vec<bool> = cu.fgg.rules.iter().enumerate().map(|(i, r)| keep(i, r)).collect();
    let mut it = flags.iter();
    cu.fgg.rules.retain(|_| *it.next().unwrap());
    let mut it = flags.iter();
    cu.provenance.retain(|_| *it.next().unwrap());
}

fn prune(cu: &mut CompilationUnit) -> bool {
    let before = cu.fgg.rules.len();
    loop {
        let zero: HashSet<&str> =
            cu.fgg.factors.iter().filter(|(_, f)| f.weights.is_all_zero()).map(|(k, _)| k.as_str()).collect();
        let productive: HashSet<&str> = cu.fgg.rules.iter().map(|r| r.lhs.as_str()).collect();
        let dead: Vec<(usize, String)> = cu
            .fgg
            .rules
            .iter()
            .enumerate()
            .filter_map(|(i, r)| {
                let e = r.rhs.edges.iter().find(|e| {
                    if cu.fgg.is_nonterminal(&e.label) {
                        !productive.contains(e.label.as_str())
                    } else {
                        zero.contains(e.label.as_str())
                    }
                })?;
                Some((i, format!("rule {i} ({}) needs `{}`, which has no weight", r.lhs, e.label)))
            })
            .collect();
        let mut ids: HashSet<usize> = dead.iter().map(|d| d.0).collect();
        // Keep one start rule so the start symbol keeps its type.
        let starts: Vec<usize> = cu.fgg.rules_for(&cu.fgg.start).map(|(i, _)| i).collect();
        if let Some(&first) = starts.first().filter(|_| starts.iter().all(|i| ids.contains(i))) {
            ids.remove(&first);
        }
        let dead: Vec<(usize, String)> = dead.into_iter().filter(|d| ids.contains(&d.0)).collect();
        if dead.is_empty() {
            break;
        }
        keep_rules(cu, |i, _| !ids.contains(&i));
        for (_, d) in dead {
            log(cu, Pass::Prune, d);
        }
    }

    let mut reach: HashSet<String> = HashSet::from([cu.fgg.start.clone()]);
    let mut stack = vec![cu.fgg.start.clone()];
    while let Some(x) = stack.pop() {
        for r in cu.fgg.rules.iter().filter(|r| r.lhs == x) {
            for e in &r.rhs.edges {
                if cu.fgg.is_nonterminal(&e.label) && reach.insert(e.label.clone()) {
                    stack.push(e.label.clone());
                }
            }
        }
    }
    let unreachable: Vec<String> =
        cu.fgg.rules.iter().filter(|r| !reach.contains(&r.lhs)).map(|r| r.lhs.clone()).collect();
    if !unreachable.is_empty() {
        keep_rules(cu, |_, r| reach.contains(&r.lhs));
        for x in unreachable {
            log(cu, Pass::Prune, format!("`{x}` is unreachable"));
        }
    }
    cu.fgg.rules.len() < before
}

fn inline(cu: &mut CompilationUnit) -> bool {
    let mut fired = false;
    while let Some(x) = inline_candidate(cu) {
        let rules: Vec<usize> = cu.fgg.rules_for(&x).map(|(i, _)| i).collect();
        if rules.len() == 1 {
            inline_single(cu, &x, rules[0]);
        } else {
            inline_alternatives(cu, &x, &rules);
        }
        cu.fgg.labels.shift_remove(&x);
        cu.roles.shift_remove(&x);
        fired = true;
    }
    fired
}

/// A nonterminal that is neither the start nor a function, does not occur in
/// its own rules, and either has one rule or is used by exactly one edge.
fn inline_candidate(cu: &CompilationUnit) -> Option<String> {
    let g = &cu.fgg;
    let mut uses: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, r) in g.rules.iter().enumerate() {
        for e in &r.rhs.edges {
            uses.entry(e.label.as_str()).or_default().push(i);
        }
    }
    let eligible = |x: &String, role: &NtRole| -> Option<(usize, usize)> {
        if matches!(role, NtRole::Start | NtRole::Function) {
            return None;
        }
        let own: Vec<&Rule> = g.rules_for(x).map(|(_, r)| r).collect();
        let used_by = uses.get(x.as_str())?;
        if own.is_empty() || own.iter().any(|r| r.rhs.edges.iter().any(|e| &e.label == x)) {
            return None;
        }
        Some((own.len(), used_by.len()))
    };
    // Single-rule symbols anywhere, then single-use alternatives innermost
    // first, so that no alternative is copied before it is absorbed.
    cu.roles
        .iter()
        .find(|(x, role)| eligible(x, role).is_some_and(|(rules, _)| rules == 1))
        .or_else(|| cu.roles.iter().rev().find(|(x, role)| eligible(x, role).is_some_and(|(_, uses)| uses == 1)))
        .map(|(x, _)| x.clone())
}

fn inline_single(cu: &mut CompilationUnit, x: &str, rule: usize) {
    let body = cu.fgg.rules[rule].rhs.clone();
    let mut hosts = 0;
    for r in &mut cu.fgg.rules {
        let sites: BTreeMap<usize, &Hypergraph> =
            r.rhs.edges.iter().enumerate().filter(|(_, e)| e.label == x).map(|(i, _)| (i, &body)).collect();
        if sites.is_empty() {
            continue;
        }
        hosts += sites.len();
        r.rhs = r.rhs.substitute(&sites, |_| Naming::Fresh).expect("arity checked at translation");
    }
    keep_rules(cu, |i, _| i != rule);
    log(cu, Pass::Inline, format!("`{x}` into {hosts} use(s)"));
}

fn inline_alternatives(cu: &mut CompilationUnit, x: &str, rules: &[usize]) {
    let (host, edge) = cu
        .fgg
        .rules
        .iter()
        .enumerate()
        .find_map(|(i, r)| r.rhs.edges.iter().position(|e| e.label == x).map(|e| (i, e)))
        .expect("candidate has one use");
    let mut new_rules = Vec::new();
    let mut new_prov = Vec::new();
    for &ri in rules {
        let sites = BTreeMap::from([(edge, &cu.fgg.rules[ri].rhs)]);
        let rhs = cu.fgg.rules[host].rhs.substitute(&sites, |_| Naming::Fresh).expect("arity checked at translation");
        new_rules.push(Rule { lhs: cu.fgg.rules[host].lhs.clone(), rhs });
        new_prov.push(Provenance {
            span: cu.provenance[ri].span,
            construct: format!("{}; {}", cu.provenance[host].construct, cu.provenance[ri].construct),
        });
    }
    let host_lhs = cu.fgg.rules[host].lhs.clone();
    let old_rules = std::mem::take(&mut cu.fgg.rules);
    let old_prov = std::mem::take(&mut cu.provenance);
    let mut fresh = Some((new_rules, new_prov));
    for (i, (r, p)) in old_rules.into_iter().zip(old_prov).enumerate() {
        if i == host {
            let (rs, ps) = fresh.take().unwrap();
            cu.fgg.rules.extend(rs);
            cu.provenance.extend(ps);
        } else if r.lhs != x {
            cu.fgg.rules.push(r);
            cu.provenance.push(p);
        }
    }
    log(cu, Pass::Inline, format!("{} alternatives of `{x}` into `{host_lhs}`", rules.len()));
}

/// Where each attachment of a factor lands: the shared node, or a slot of
/// the merged scope.
type Placement = Vec<Option<usize>>;

fn compose(cu: &mut CompilationUnit) -> bool {
    let mut fired = false;
    let mut cache: HashMap<(String, String, Placement, Placement), String> = HashMap::new();
    for ri in 0..cu.fgg.rules.len() {
        while let Some((n, a, b)) = compose_site(cu, ri) {
            compose_at(cu, ri, n, a, b, &mut cache);
            fired = true;
        }
    }
    fired
}

fn compose_site(cu: &CompilationUnit, ri: usize) -> Option<(usize, usize, usize)> {
    let g = &cu.fgg;
    let h = &g.rules[ri].rhs;
    let composable = |e: usize| {
        cu.factor_kinds.get(&h.edges[e].label).is_some_and(|k| k.composable())
    };
    for n in h.internal_nodes() {
        let touching: Vec<usize> = (0..h.edges.len()).filter(|&e| h.edges[e].att.contains(&n)).collect();
        let [a, b] = touching[..] else { continue };
        if h.degree(n) != 2 || !composable(a) || !composable(b) {
            continue;
        }
        let (scope, _, _) = merged_scope(h, n, a, b);
        let size: usize = scope.iter().map(|&m| g.node_domain(h, m).len()).product();
        if size <= COMPOSE_LIMIT {
            return Some((n, a, b));
        }
    }
    None
}

fn merged_scope(h: &Hypergraph, n: usize, a: usize, b: usize) -> (Vec<usize>, Placement, Placement) {
    let mut scope: Vec<usize> = Vec::new();
    let place = |att: &[usize], scope: &mut Vec<usize>| -> Placement {
        att.iter()
            .map(|&m| {
                (m != n).then(|| {
                    scope.iter().position(|&s| s == m).unwrap_or_else(|| {
                        scope.push(m);
                        scope.len() - 1
                    })
                })
            })
            .collect()
    };
    let pa = place(&h.edges[a].att, &mut scope);
    let pb = place(&h.edges[b].att, &mut scope);
    (scope, pa, pb)
}

fn compose_at(
    cu: &mut CompilationUnit,
    ri: usize,
    n: usize,
    a: usize,
    b: usize,
    cache: &mut HashMap<(String, String, Placement, Placement), String>,
) {
    let h = &cu.fgg.rules[ri].rhs;
    let (scope, pa, pb) = merged_scope(h, n, a, b);
    let (la, lb) = (h.edges[a].label.clone(), h.edges[b].label.clone());
    let key = (la.clone(), lb.clone(), pa.clone(), pb.clone());
    let label = match cache.get(&key) {
        Some(l) => l.clone(),
        None => {
            let doms: Vec<_> = scope.iter().map(|&m| cu.fgg.node_domain(h, m).clone()).collect();
            let dn = cu.fgg.node_domain(h, n).len();
            let (ta, tb) = (&cu.fgg.factors[&la].weights, &cu.fgg.factors[&lb].weights);
            let shape: Vec<usize> = doms.iter().map(|d| d.len()).collect();
            let mut data = Vec::with_capacity(shape.iter().product());
            let index = |p: &Placement, idx: &[usize], k: usize| -> Vec<usize> {
                p.iter().map(|s| s.map_or(k, |s| idx[s])).collect()
            };
            for idx in MultiIndex::new(&shape) {
                data.push((0..dn).map(|k| ta.get(&index(&pa, &idx, k)) * tb.get(&index(&pb, &idx, k))).sum());
            }
            let weights = WeightTensor::new(doms, data).expect("shape matches scope");
            let owner = cu.fgg.rules[ri].lhs.clone();
            let name = fresh_name(&format!("{owner}.comp"), |c| cu.fgg.labels.contains_key(c));
            let desc = compose_description(
                cu.descriptions.get(&la).map_or("", String::as_str),
                &pa,
                cu.descriptions.get(&lb).map_or("", String::as_str),
                &pb,
            );
            cu.fgg.labels.insert(name.clone(), EdgeLabel::terminal(name.clone(), scope.len()));
            cu.fgg.factors.insert(name.clone(), FactorTable { label: name.clone(), weights });
            cu.factor_kinds.insert(name.clone(), FactorKind::Builtin);
            cu.descriptions.insert(name.clone(), desc);
            cache.insert(key, name.clone());
            name
        }
    };
    let h = &mut cu.fgg.rules[ri].rhs;
    let node = h.nodes[n].id.clone();
    h.edges[a].label = label.clone();
    h.edges[a].att = scope;
    h.edges.remove(b);
    h.remove_node(n);
    log(cu, Pass::Compose, format!("`{la}` and `{lb}` at node `{node}` into `{label}`"));
}

/// Replaces each `{i}` placeholder with `f(i)`.
pub(crate) fn fill(template: &str, f: impl Fn(usize) -> String) -> String {
    let mut out = String::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        match after.find('}').and_then(|close| after[..close].parse::<usize>().ok().map(|i| (close, i))) {
            Some((close, i)) => {
                out.push_str(&f(i));
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

/// Splits `"{k} = rhs"` into `(k, rhs)`.
fn defining(template: &str) -> Option<(usize, &str)> {
    let rest = template.strip_prefix('{')?;
    let close = rest.find('}')?;
    let k = rest[..close].parse().ok()?;
    Some((k, rest[close + 1..].strip_prefix(" = ")?))
}

/// Drops one pair of parentheses that encloses the whole string.
fn unwrap(s: &str) -> &str {
    let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) else { return s };
    let mut depth = 0i32;
    for c in inner.chars() {
        depth += match c {
            '(' => 1,
            ')' => -1,
            _ => 0,
        };
        if depth < 0 {
            return s;
        }
    }
    inner
}

fn compose_description(da: &str, pa: &Placement, db: &str, pb: &Placement) -> String {
    let slot = |p: &Placement, i: usize| p.get(i).copied().flatten().map_or("_".into(), |s| format!("{{{s}}}"));
    let wrap = |s: String| if s.contains(' ') && !s.starts_with('(') { format!("({s})") } else { s };
    // One side defines the shared node; substitute its formula into the other.
    for (def, pdef, user, puser) in [(da, pa, db, pb), (db, pb, da, pa)] {
        let Some((k, rhs)) = defining(def) else { continue };
        if pdef.get(k) != Some(&None) {
            continue;
        }
        let expr = fill(rhs, |i| slot(pdef, i));
        if let Some((j, guard)) = defining(user) {
            if puser.get(j) == Some(&None) && (guard == "true" || guard == "false") {
                return if guard == "true" { unwrap(&expr).to_string() } else { format!("not {}", wrap(expr)) };
            }
        }
        return fill(user, |i| if puser.get(i) == Some(&None) { wrap(expr.clone()) } else { slot(puser, i) });
    }
    format!("{} * {}", fill(da, |i| slot(pa, i)), fill(db, |i| slot(pb, i)))
}

fn contract(cu: &mut CompilationUnit) -> bool {
    let mut fired = false;
    for ri in 0..cu.fgg.rules.len() {
        loop {
            let h = &cu.fgg.rules[ri].rhs;
            let site = h.edges.iter().enumerate().find_map(|(ei, e)| {
                if cu.factor_kinds.get(&e.label) != Some(&FactorKind::Copy) {
                    return None;
                }
                let [x, v] = e.att[..] else { return None };
                if x == v {
                    return Some((ei, None));
                }
                if h.nodes[x].domain != h.nodes[v].domain {
                    return None;
                }
                match (h.is_external(x), h.is_external(v)) {
                    (true, true) => None,
                    (_, true) => Some((ei, Some((v, x)))),
                    _ => Some((ei, Some((x, v)))),
                }
            });
            let Some((ei, merge)) = site else { break };
            let lhs = cu.fgg.rules[ri].lhs.clone();
            let h = &mut cu.fgg.rules[ri].rhs;
            h.edges.remove(ei);
            let detail = match merge {
                Some((keep, drop)) => {
                    let d = format!("`{}` into `{}` in a rule of `{lhs}`", h.nodes[drop].id, h.nodes[keep].id);
                    h.merge_nodes(keep, drop);
                    d
                }
                None => format!("trivial copy in a rule of `{lhs}`"),
            };
            log(cu, Pass::Contract, detail);
            fired = true;
        }
    }
    fired
}

/// Drops labels, factors and domains that nothing refers to.
fn collect_garbage(cu: &mut CompilationUnit) {
    let g = &cu.fgg;
    let mut used: HashSet<String> = HashSet::from([g.start.clone()]);
    for r in &g.rules {
        used.insert(r.lhs.clone());
        used.extend(r.rhs.edges.iter().map(|e| e.label.clone()));
    }
    cu.fgg.labels.retain(|k, _| used.contains(k));
    cu.fgg.factors.retain(|k, _| used.contains(k));
    cu.roles.retain(|k, _| used.contains(k));
    cu.factor_kinds.retain(|k, _| used.contains(k));
    cu.descriptions.retain(|k, _| used.contains(k));

    let mut doms: HashSet<String> = HashSet::new();
    for r in &cu.fgg.rules {
        doms.extend(r.rhs.nodes.iter().map(|n| n.domain.clone()));
    }
    for f in cu.fgg.factors.values() {
        doms.extend(f.weights.domains().iter().map(|d| d.name().to_string()));
    }
    cu.fgg.domains.retain(|k, _| doms.contains(k));
}

/// Inlines every nonterminal other than the start symbol and functions, at
/// every use, so that each remaining rule is one path through a function body
/// (or the main expression). The rule count may grow.
pub fn flatten(cu: &CompilationUnit) -> CompilationUnit {
    let mut cu = cu.clone();
    loop {
        let g = &cu.fgg;
        let target = cu.roles.iter().find(|(x, role)| {
            !matches!(role, NtRole::Start | NtRole::Function)
                && !g.rules_for(x).any(|(_, r)| r.rhs.edges.iter().any(|e| &e.label == *x))
        });
        let Some((x, _)) = target else { break };
        let x = x.clone();
        let alternatives: Vec<(Hypergraph, Provenance)> =
            g.rules_for(&x).map(|(i, r)| (r.rhs.clone(), cu.provenance[i].clone())).collect();
        let old_rules = std::mem::take(&mut cu.fgg.rules);
        let old_prov = std::mem::take(&mut cu.provenance);
        for (r, p) in old_rules.into_iter().zip(old_prov) {
            if r.lhs == x {
                continue;
            }
            let sites: Vec<usize> = (0..r.rhs.edges.len()).filter(|&e| r.rhs.edges[e].label == x).collect();
            if sites.is_empty() {
                cu.fgg.rules.push(r);
                cu.provenance.push(p);
                continue;
            }
            let shape = vec![alternatives.len(); sites.len()];
            for choice in MultiIndex::new(&shape) {
                let map: BTreeMap<usize, &Hypergraph> =
                    sites.iter().zip(&choice).map(|(&e, &k)| (e, &alternatives[k].0)).collect();
                let rhs = r.rhs.substitute(&map, |_| Naming::Fresh).expect("arity checked at translation");
                let mut construct = p.construct.clone();
                for &k in &choice {
                    if alternatives.len() > 1 {
                        construct = format!("{construct}; {}", alternatives[k].1.construct);
                    }
                }
                cu.fgg.rules.push(Rule { lhs: r.lhs.clone(), rhs });
                cu.provenance.push(Provenance { span: p.span, construct });
            }
        }
        cu.fgg.labels.shift_remove(&x);
        cu.roles.shift_remove(&x);
    }
    collect_garbage(&mut cu);
    for r in &mut cu.fgg.rules {
        tidy_node_ids(&mut r.rhs);
    }
    cu
}
