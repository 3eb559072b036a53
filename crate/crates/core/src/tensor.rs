//! Dense nonnegative tensors indexed by tuples of domain values.

use std::sync::Arc;

use serde_json::Value as Json;
use thiserror::Error;

use crate::value::{Domain, Value};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("tensor data has {got} entries, shape needs {expected}")]
    Shape { expected: usize, got: usize },
    #[error("tensor entry {index} is {value}; weights must be finite and nonnegative")]
    BadWeight { index: usize, value: f64 },
    #[error("nested table does not match shape: {0}")]
    Nested(String),
}

/// Row-major dense table over the product of `domains`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightTensor {
    domains: Vec<Arc<Domain>>,
    data: Vec<f64>,
}

impl WeightTensor {
    pub fn zeros(domains: Vec<Arc<Domain>>) -> WeightTensor {
        let n = domains.iter().map(|d| d.len()).product();
        WeightTensor { domains, data: vec![0.0; n] }
    }

    pub fn scalar(x: f64) -> WeightTensor {
        WeightTensor { domains: Vec::new(), data: vec![x] }
    }

    /// Builds a tensor, rejecting wrong lengths and negative or non-finite entries.
    pub fn new(domains: Vec<Arc<Domain>>, data: Vec<f64>) -> Result<WeightTensor, TensorError> {
        let expected: usize = domains.iter().map(|d| d.len()).product();
        if expected != data.len() {
            return Err(TensorError::Shape { expected, got: data.len() });
        }
        if let Some((index, &value)) = data.iter().enumerate().find(|(_, x)| !x.is_finite() || **x < 0.0) {
            return Err(TensorError::BadWeight { index, value });
        }
        Ok(WeightTensor { domains, data })
    }

    /// Builds a tensor by evaluating `f` at every value tuple.
    pub fn from_fn(domains: Vec<Arc<Domain>>, mut f: impl FnMut(&[&Value]) -> f64) -> WeightTensor {
        let mut t = WeightTensor::zeros(domains);
        let doms = t.domains.clone();
        let mut tuple: Vec<&Value> = Vec::with_capacity(doms.len());
        for (i, idx) in MultiIndex::new(&t.shape()).enumerate() {
            tuple.clear();
            tuple.extend(idx.iter().zip(&doms).map(|(&k, d)| d.value(k)));
            t.data[i] = f(&tuple);
        }
        t
    }

    pub(crate) fn from_raw(domains: Vec<Arc<Domain>>, data: Vec<f64>) -> WeightTensor {
        debug_assert_eq!(domains.iter().map(|d| d.len()).product::<usize>(), data.len());
        WeightTensor { domains, data }
    }

    pub fn domains(&self) -> &[Arc<Domain>] {
        &self.domains
    }

    pub fn arity(&self) -> usize {
        self.domains.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.domains.iter().map(|d| d.len()).collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.domains)
            .fold(0, |acc, (&i, d)| acc * d.len() + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.linear_index(idx)]
    }

    /// Looks up an entry by values; `None` when a value is outside its domain.
    pub fn get_values(&self, values: &[Value]) -> Option<f64> {
        if values.len() != self.domains.len() {
            return None;
        }
        let idx = values
            .iter()
            .zip(&self.domains)
            .map(|(v, d)| d.index_of(v))
            .collect::<Option<Vec<_>>>()?;
        Some(self.get(&idx))
    }

    /// Iterates `(value tuple, weight)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<&Value>, f64)> + '_ {
        MultiIndex::new(&self.shape()).zip(&self.data).map(move |(idx, &w)| {
            let vals = idx.iter().zip(&self.domains).map(|(&k, d)| d.value(k)).collect();
            (vals, w)
        })
    }

    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn is_all_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0.0)
    }

    /// Largest absolute entrywise difference; infinite if shapes differ.
    pub fn sup_distance(&self, other: &WeightTensor) -> f64 {
        if self.shape() != other.shape() {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Sums out axis `axis`.
    pub fn sum_axis(&self, axis: usize) -> WeightTensor {
        let mut doms = self.domains.clone();
        doms.remove(axis);
        let mut out = WeightTensor::zeros(doms);
        for (idx, &w) in MultiIndex::new(&self.shape()).zip(&self.data) {
            let mut rest = idx.clone();
            rest.remove(axis);
            let k = out.linear_index(&rest);
            out.data[k] += w;
        }
        out
    }

    /// Nested arrays in row-major order; a bare number for arity 0.
    pub fn to_nested_json(&self) -> Json {
        fn build(data: &[f64], shape: &[usize]) -> Json {
            match shape.split_first() {
                None => number(data[0]),
                Some((&n, rest)) => {
                    let stride: usize = rest.iter().product();
                    Json::Array((0..n).map(|i| build(&data[i * stride..(i + 1) * stride], rest)).collect())
                }
            }
        }
        fn number(x: f64) -> Json {
            serde_json::Number::from_f64(x).map(Json::Number).unwrap_or(Json::Null)
        }
        if self.data.is_empty() {
            return Json::Array(Vec::new());
        }
        build(&self.data, &self.shape())
    }

    pub fn from_nested_json(domains: Vec<Arc<Domain>>, j: &Json) -> Result<WeightTensor, TensorError> {
        fn walk(j: &Json, shape: &[usize], out: &mut Vec<f64>) -> Result<(), TensorError> {
            match shape.split_first() {
                None => {
                    let x = j.as_f64().ok_or_else(|| TensorError::Nested(format!("expected number, got {j}")))?;
                    out.push(x);
                    Ok(())
                }
                Some((&n, rest)) => {
                    let items = j
                        .as_array()
                        .ok_or_else(|| TensorError::Nested(format!("expected array of length {n}")))?;
                    if items.len() != n {
                        return Err(TensorError::Nested(format!(
                            "expected array of length {n}, got {}",
                            items.len()
                        )));
                    }
                    items.iter().try_for_each(|item| walk(item, rest, out))
                }
            }
        }
        let shape: Vec<usize> = domains.iter().map(|d| d.len()).collect();
        let mut data = Vec::with_capacity(shape.iter().product());
        walk(j, &shape, &mut data)?;
        WeightTensor::new(domains, data)
    }
}

/// Row-major odometer over a shape.
#[derive(Clone, Debug)]
pub struct MultiIndex {
    shape: Vec<usize>,
    cur: Vec<usize>,
    done: bool,
}

impl MultiIndex {
    pub fn new(shape: &[usize]) -> MultiIndex {
        MultiIndex {
            shape: shape.to_vec(),
            cur: vec![0; shape.len()],
            done: shape.contains(&0),
        }
    }
}

impl Iterator for MultiIndex {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.cur.clone();
        let mut k = self.shape.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.cur[k] += 1;
            if self.cur[k] < self.shape[k] {
                break;
            }
            self.cur[k] = 0;
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom(name: &str, n: usize) -> Arc<Domain> {
        Arc::new(Domain::new(name, (0..n).map(|i| Value::atom(format!("{name}{i}"))).collect()).unwrap())
    }

    #[test]
    fn nested_json_round_trip() {
        let t = WeightTensor::new(vec![dom("a", 2), dom("b", 3)], vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let j = t.to_nested_json();
        assert_eq!(j, serde_json::json!([[0.0, 1.0, 2.0], [3.0, 4.0, 5.0]]));
        assert_eq!(WeightTensor::from_nested_json(t.domains().to_vec(), &j).unwrap(), t);
        let s = WeightTensor::scalar(0.25);
        assert_eq!(s.to_nested_json(), serde_json::json!(0.25));
    }

    #[test]
    fn rejects_negative() {
        assert!(matches!(
            WeightTensor::new(vec![dom("a", 2)], vec![0.5, -1.0]),
            Err(TensorError::BadWeight { index: 1, .. })
        ));
        assert!(WeightTensor::new(vec![dom("a", 2)], vec![0.5]).is_err());
    }

    #[test]
    fn sum_axis_marginalizes() {
        let t = WeightTensor::new(vec![dom("a", 2), dom("b", 2)], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(t.sum_axis(0).data(), &[4.0, 6.0]);
        assert_eq!(t.sum_axis(1).data(), &[3.0, 7.0]);
    }

    #[test]
    fn odometer_covers_shape() {
        let all: Vec<_> = MultiIndex::new(&[2, 1, 3]).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[5], vec![1, 0, 2]);
        assert_eq!(MultiIndex::new(&[]).count(), 1);
        assert_eq!(MultiIndex::new(&[2, 0]).count(), 0);
    }
}
