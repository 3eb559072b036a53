//! Dense factors over rule nodes and the product-sum kernel.

/// A table over distinct node indices, row-major in `vars` order.
#[derive(Clone, Debug)]
pub(crate) struct Factor {
    pub vars: Vec<usize>,
    pub dims: Vec<usize>,
    pub data: Vec<f64>,
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

impl Factor {
    /// Views a table whose axes are attached to `att`. Repeated attachments
    /// keep only the diagonal.
    pub fn from_table(data: &[f64], table_dims: &[usize], att: &[usize]) -> Factor {
        let mut vars = Vec::new();
        let mut dims = Vec::new();
        for (&a, &d) in att.iter().zip(table_dims) {
            if !vars.contains(&a) {
                vars.push(a);
                dims.push(d);
            }
        }
        if vars.len() == att.len() {
            return Factor { vars, dims, data: data.to_vec() };
        }
        let ts = strides(table_dims);
        let view: Vec<usize> = vars
            .iter()
            .map(|v| att.iter().zip(&ts).filter(|(a, _)| *a == v).map(|(_, s)| s).sum())
            .collect();
        let out = product_sum(&[(&view, data)], &dims, None, &mut 0);
        Factor { vars, dims, data: out }
    }

    fn strides_over(&self, scope: &[usize]) -> Vec<usize> {
        let own = strides(&self.dims);
        scope
            .iter()
            .map(|v| self.vars.iter().position(|x| x == v).map_or(0, |i| own[i]))
            .collect()
    }
}

/// Multiplies `factors` and sums out `var` (if any), leaving a factor over
/// the remaining union of their variables. Adds the size of the full
/// product table to `ops`.
pub(crate) fn eliminate(factors: &[Factor], var: Option<(usize, usize)>, ops: &mut u64) -> Factor {
    let mut vars = Vec::new();
    let mut dims = Vec::new();
    for f in factors {
        for (&v, &d) in f.vars.iter().zip(&f.dims) {
            if Some(v) != var.map(|x| x.0) && !vars.contains(&v) {
                vars.push(v);
                dims.push(d);
            }
        }
    }
    let mut scope = vars.clone();
    if let Some((v, _)) = var {
        scope.push(v);
    }
    let views: Vec<(Vec<usize>, &[f64])> = factors.iter().map(|f| (f.strides_over(&scope), &f.data[..])).collect();
    let refs: Vec<(&Vec<usize>, &[f64])> = views.iter().map(|(s, d)| (s, *d)).collect();
    let data = product_sum(&refs, &dims, var.map(|x| x.1), ops);
    Factor { vars, dims, data }
}

/// Multiplies factors into a table laid out over `out` (which may include
/// variables no factor mentions).
pub(crate) fn product_over(factors: &[Factor], out: &[(usize, usize)], ops: &mut u64) -> Vec<f64> {
    let scope: Vec<usize> = out.iter().map(|x| x.0).collect();
    let dims: Vec<usize> = out.iter().map(|x| x.1).collect();
    let views: Vec<(Vec<usize>, &[f64])> = factors.iter().map(|f| (f.strides_over(&scope), &f.data[..])).collect();
    let refs: Vec<(&Vec<usize>, &[f64])> = views.iter().map(|(s, d)| (s, *d)).collect();
    product_sum(&refs, &dims, None, ops)
}

/// Core loop. Each view gives, per output axis (plus one trailing summed
/// axis when `summed` is set), the stride into that factor's data.
fn product_sum(views: &[(&Vec<usize>, &[f64])], dims: &[usize], summed: Option<usize>, ops: &mut u64) -> Vec<f64> {
    let n: usize = dims.iter().product();
    let inner = summed.unwrap_or(1);
    *ops += (n * inner) as u64;
    let mut out = vec![0.0; n];
    if n == 0 || inner == 0 {
        return out;
    }
    let k = dims.len();
    let mut idx = vec![0usize; k];
    let mut base = vec![0usize; views.len()];
    let sum_stride: Vec<usize> = views.iter().map(|(s, _)| if summed.is_some() { s[k] } else { 0 }).collect();
    for slot in out.iter_mut() {
        let mut acc = 0.0;
        for j in 0..inner {
            let mut p = 1.0;
            for (f, (_, data)) in views.iter().enumerate() {
                p *= data[base[f] + j * sum_stride[f]];
                if p == 0.0 {
                    break;
                }
            }
            acc += p;
        }
        *slot = acc;
        let mut a = k;
        while a > 0 {
            a -= 1;
            idx[a] += 1;
            for (f, (s, _)) in views.iter().enumerate() {
                base[f] += s[a];
            }
            if idx[a] < dims[a] {
                break;
            }
            for (f, (s, _)) in views.iter().enumerate() {
                base[f] -= s[a] * dims[a];
            }
            idx[a] = 0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_of_repeated_attachment() {
        let f = Factor::from_table(&[1.0, 2.0, 3.0, 4.0], &[2, 2], &[7, 7]);
        assert_eq!(f.vars, vec![7]);
        assert_eq!(f.data, vec![1.0, 4.0]);
    }

    #[test]
    fn matrix_product_by_elimination() {
        let a = Factor { vars: vec![0, 1], dims: vec![2, 2], data: vec![1.0, 2.0, 3.0, 4.0] };
        let b = Factor { vars: vec![1, 2], dims: vec![2, 2], data: vec![5.0, 6.0, 7.0, 8.0] };
        let mut ops = 0;
        let c = eliminate(&[a, b], Some((1, 2)), &mut ops);
        assert_eq!(c.vars, vec![0, 2]);
        assert_eq!(c.data, vec![19.0, 22.0, 43.0, 50.0]);
        assert_eq!(ops, 8);
    }

    #[test]
    fn product_broadcasts_missing_axes() {
        let a = Factor { vars: vec![1], dims: vec![2], data: vec![2.0, 3.0] };
        let out = product_over(&[a], &[(0, 2), (1, 2)], &mut 0);
        assert_eq!(out, vec![2.0, 3.0, 2.0, 3.0]);
    }
}
