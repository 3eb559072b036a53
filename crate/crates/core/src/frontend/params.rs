//! Parameter files: declared domains, distribution tables and input constants.
//!
//! ```json
//! { "domains": {"N": ["S", "A"]},
//!   "params":  {"p": {"S": {"inl a": 0.4, "inr (A, B)": 0.6}}},
//!   "inputs":  {"w": {"list": [{"atom": "a"}]}} }
//! ```
//!
//! Keys are value literals; values may be literals or tagged JSON. The table
//! `p` at key `k` is the distribution value `dist(p[k])`.

use std::collections::BTreeMap;

use indexmap::IndexMap;
use serde::Deserialize;
use serde_json::Value as Json;
use thiserror::Error;

use crate::value::{parse_value, Value, ZERO_DIST};

#[derive(Debug, Error)]
pub enum ParamsError {
    #[error("parameter file: {0}")]
    Json(String),
    #[error("parameter file: {0}")]
    Value(#[from] crate::value::ValueError),
    #[error("parameter file: table `{table}` at `{key}`: weight for `{value}` must be finite and nonnegative")]
    Weight { table: String, key: String, value: String },
    #[error("parameter file: `{0}` is reserved")]
    Reserved(String),
    #[error("parameter file: {what} `{value}` appears twice")]
    Duplicate { what: String, value: String },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Params {
    pub domains: IndexMap<String, Vec<Value>>,
    /// table name -> key -> outcome -> weight
    pub tables: IndexMap<String, IndexMap<Value, IndexMap<Value, f64>>>,
    pub inputs: IndexMap<String, Value>,
    dists: BTreeMap<String, (String, Value)>,
}

#[derive(Deserialize)]
struct ParamsJson {
    #[serde(default)]
    domains: IndexMap<String, Vec<Json>>,
    #[serde(default)]
    params: IndexMap<String, IndexMap<String, IndexMap<String, f64>>>,
    #[serde(default)]
    inputs: IndexMap<String, Json>,
}

pub fn dist_name(table: &str, key: &Value) -> String {
    format!("{table}[{key}]")
}

impl Params {
    pub fn empty() -> Params {
        Params::default()
    }

    pub fn from_str(text: &str) -> Result<Params, ParamsError> {
        let doc: ParamsJson = serde_json::from_str(text).map_err(|e| ParamsError::Json(e.to_string()))?;
        let mut p = Params::default();
        for (name, vals) in doc.domains {
            let vals = vals.iter().map(Value::from_json).collect::<Result<Vec<_>, _>>()?;
            for (i, v) in vals.iter().enumerate() {
                if vals[..i].contains(v) {
                    return Err(ParamsError::Duplicate { what: format!("domain `{name}`: value"), value: v.to_string() });
                }
            }
            p.domains.insert(name, vals);
        }
        for (table, rows) in doc.params {
            if table == ZERO_DIST {
                return Err(ParamsError::Reserved(table));
            }
            let mut parsed = IndexMap::new();
            for (key, row) in rows {
                let k = parse_value(&key)?;
                let mut out = IndexMap::new();
                for (val, w) in row {
                    if !w.is_finite() || w < 0.0 {
                        return Err(ParamsError::Weight { table: table.clone(), key: key.clone(), value: val });
                    }
                    let v = parse_value(&val)?;
                    if out.insert(v.clone(), w).is_some() {
                        return Err(ParamsError::Duplicate { what: format!("table `{table}` at `{key}`: outcome"), value: v.to_string() });
                    }
                }
                if parsed.insert(k.clone(), out).is_some() {
                    return Err(ParamsError::Duplicate { what: format!("table `{table}`: key"), value: k.to_string() });
                }
            }
            p.tables.insert(table, parsed);
        }
        for (name, v) in doc.inputs {
            p.inputs.insert(name, Value::from_json(&v)?);
        }
        p.index();
        Ok(p)
    }

    pub fn with_table(mut self, table: &str, rows: Vec<(Value, Vec<(Value, f64)>)>) -> Params {
        let t = rows.into_iter().map(|(k, r)| (k, r.into_iter().collect())).collect();
        self.tables.insert(table.to_string(), t);
        self.index();
        self
    }

    pub fn with_input(mut self, name: &str, v: Value) -> Params {
        self.inputs.insert(name.to_string(), v);
        self
    }

    pub fn with_domain(mut self, name: &str, values: Vec<Value>) -> Params {
        self.domains.insert(name.to_string(), values);
        self
    }

    fn index(&mut self) {
        self.dists.clear();
        for (t, rows) in &self.tables {
            for k in rows.keys() {
                self.dists.insert(dist_name(t, k), (t.clone(), k.clone()));
            }
        }
    }

    pub fn has_table(&self, table: &str) -> bool {
        self.tables.contains_key(table)
    }

    /// The distribution value `p[key]`, if the table has that row.
    pub fn lookup(&self, table: &str, key: &Value) -> Option<Value> {
        self.tables.get(table)?.get(key).map(|_| Value::Dist(dist_name(table, key)))
    }

    /// Density of distribution value `dist` at `v`; zero for non-distributions.
    pub fn density(&self, dist: &Value, v: &Value) -> f64 {
        let Value::Dist(name) = dist else { return 0.0 };
        let Some((t, k)) = self.dists.get(name) else { return 0.0 };
        self.tables[t][k].get(v).copied().unwrap_or(0.0)
    }

    /// Outcomes with positive weight, in table order.
    pub fn support(&self, dist: &Value) -> Vec<Value> {
        let Value::Dist(name) = dist else { return vec![] };
        let Some((t, k)) = self.dists.get(name) else { return vec![] };
        self.tables[t][k].iter().filter(|(_, &w)| w > 0.0).map(|(v, _)| v.clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_lookup() {
        let p = Params::from_str(
            r#"{"params": {"p": {"S": {"inl a": 0.7, "inr (S, S)": 0.3}}},
                "inputs": {"w": {"list": [{"atom": "a"}]}}}"#,
        )
        .unwrap();
        let d = p.lookup("p", &Value::atom("S")).unwrap();
        assert_eq!(d, Value::Dist("p[S]".into()));
        assert_eq!(p.density(&d, &Value::inl(Value::atom("a"))), 0.7);
        assert_eq!(p.density(&d, &Value::inr(Value::pair(Value::atom("S"), Value::atom("S")))), 0.3);
        assert_eq!(p.density(&Value::Dist(ZERO_DIST.into()), &Value::Bool(true)), 0.0);
        assert_eq!(p.support(&d).len(), 2);
        assert_eq!(p.inputs["w"], Value::list([Value::atom("a")]));
        assert!(p.lookup("p", &Value::atom("T")).is_none());
    }

    #[test]
    fn negative_weight_rejected() {
        assert!(Params::from_str(r#"{"params": {"p": {"S": {"a": -1}}}}"#).is_err());
    }

    #[test]
    fn spellings_of_one_value_collide() {
        let e = Params::from_str(r#"{"params": {"p": {"S": {"inl a": 0.5, "inl  a": 0.5}}}}"#).unwrap_err();
        assert!(matches!(e, ParamsError::Duplicate { .. }), "{e}");
        assert!(Params::from_str(r#"{"params": {"p": {"S": {}, " S": {}}}}"#).is_err());
        assert!(Params::from_str(r#"{"domains": {"N": ["a", "a"]}}"#).is_err());
    }
}
