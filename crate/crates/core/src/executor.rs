//! Reference implementation of ncon contraction semantics on dense tensors.
//!
//! Tensors are row-major. A network is contracted by taking partial traces
//! first, then pairwise contractions in the given label order (each step sums
//! over every label the chosen pair shares), then outer products of whatever
//! pieces remain in position order, and finally a permutation putting the
//! output axes in the order -1, -2, ...

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::{AddAssign, Mul};

use num_complex::Complex64;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::model::Label;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExecError {
    #[error("data length {len} does not match shape {shape:?}")]
    DataLength { shape: Vec<usize>, len: usize },
    #[error("tensor dimensions must be at least 1, got shape {0:?}")]
    ZeroDimension(Vec<usize>),
    #[error("label {label} joins axes of dimension {a} and {b}")]
    DimensionMismatch { label: Label, a: usize, b: usize },
    #[error("tensor {tensor} has {rank} axes but {labels} labels")]
    RankMismatch { tensor: usize, rank: usize, labels: usize },
    #[error("inconsistent labels: {0}")]
    BadLabels(String),
    #[error("invalid contraction order: {0}")]
    BadOrder(String),
    #[error("no tensors to contract")]
    Empty,
}

pub trait Scalar:
    Copy + Debug + PartialEq + Zero + One + AddAssign + Mul<Output = Self> + Send + Sync + 'static
{
    fn to_complex(self) -> Complex64;
    fn magnitude(self) -> f64;
}

impl Scalar for f64 {
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }

    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn to_complex(self) -> Complex64 {
        self
    }

    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor<T = f64> {
    shape: Vec<usize>,
    data: Vec<T>,
}

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

/// Advances a row-major multi-index; returns false after the last one.
fn increment(idx: &mut [usize], shape: &[usize]) -> bool {
    for axis in (0..idx.len()).rev() {
        idx[axis] += 1;
        if idx[axis] < shape[axis] {
            return true;
        }
        idx[axis] = 0;
    }
    false
}

impl<T: Scalar> DenseTensor<T> {
    pub fn new(shape: Vec<usize>, data: Vec<T>) -> Result<Self, ExecError> {
        if shape.contains(&0) {
            return Err(ExecError::ZeroDimension(shape));
        }
        let len: usize = shape.iter().product();
        if len != data.len() {
            return Err(ExecError::DataLength { shape, len: data.len() });
        }
        Ok(DenseTensor { shape, data })
    }

    pub fn scalar(value: T) -> Self {
        DenseTensor {
            shape: Vec::new(),
            data: vec![value],
        }
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        DenseTensor {
            shape,
            data: vec![T::zero(); len],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut t = Self::zeros(vec![dim, dim]);
        for i in 0..dim {
            t.data[i * dim + i] = T::one();
        }
        t
    }

    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let len: usize = shape.iter().product();
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0; shape.len()];
        for _ in 0..len {
            data.push(f(&idx));
            increment(&mut idx, &shape);
        }
        DenseTensor { shape, data }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, idx: &[usize]) -> T {
        let off: usize = idx.iter().zip(strides(&self.shape)).map(|(i, s)| i * s).sum();
        self.data[off]
    }

    /// Axis `k` of the result is axis `perm[k]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            return self.clone();
        }
        let src = strides(&self.shape);
        let shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let step: Vec<usize> = perm.iter().map(|&p| src[p]).collect();
        let mut data = Vec::with_capacity(self.data.len());
        let mut idx = vec![0; shape.len()];
        for _ in 0..self.data.len() {
            let off: usize = idx.iter().zip(&step).map(|(i, s)| i * s).sum();
            data.push(self.data[off]);
            increment(&mut idx, &shape);
        }
        DenseTensor { shape, data }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> DenseTensor<U> {
        DenseTensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn to_complex(&self) -> DenseTensor<Complex64> {
        self.map(T::to_complex)
    }

    /// Largest absolute elementwise difference relative to the largest
    /// magnitude in either tensor.
    pub fn relative_error(&self, other: &Self) -> f64 {
        if self.shape != other.shape {
            return f64::INFINITY;
        }
        let scale = self
            .data
            .iter()
            .chain(&other.data)
            .map(|x| x.magnitude())
            .fold(0.0, f64::max);
        let diff = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| {
                let d = a.to_complex() - b.to_complex();
                d.norm()
            })
            .fold(0.0, f64::max);
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }
}

fn check_rank<T: Scalar>(t: &DenseTensor<T>, labels: &[Label], tensor: usize) -> Result<(), ExecError> {
    if t.rank() != labels.len() {
        return Err(ExecError::RankMismatch {
            tensor,
            rank: t.rank(),
            labels: labels.len(),
        });
    }
    Ok(())
}

/// Sums over the diagonal of every label repeated within `labels`.
pub fn partial_trace<T: Scalar>(
    t: &DenseTensor<T>,
    labels: &[Label],
) -> Result<(DenseTensor<T>, Vec<Label>), ExecError> {
    check_rank(t, labels, 0)?;
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut keep: Vec<usize> = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        let hits: Vec<usize> = (0..labels.len()).filter(|&k| labels[k] == l).collect();
        match hits.len() {
            1 => keep.push(i),
            2 if hits[0] == i => {
                let (a, b) = (t.shape[hits[0]], t.shape[hits[1]]);
                if a != b {
                    return Err(ExecError::DimensionMismatch { label: l, a, b });
                }
                pairs.push((hits[0], hits[1]));
            }
            2 => {}
            n => {
                return Err(ExecError::BadLabels(format!(
                    "label {l} appears {n} times on one tensor"
                )))
            }
        }
    }
    if pairs.is_empty() {
        return Ok((t.clone(), labels.to_vec()));
    }
    let out_shape: Vec<usize> = keep.iter().map(|&k| t.shape[k]).collect();
    let out_strides = strides(&out_shape);
    let mut out = DenseTensor::zeros(out_shape);
    let mut idx = vec![0; t.rank()];
    for &x in &t.data {
        if pairs.iter().all(|&(a, b)| idx[a] == idx[b]) {
            let off: usize = keep.iter().zip(&out_strides).map(|(&k, s)| idx[k] * s).sum();
            out.data[off] += x;
        }
        increment(&mut idx, &t.shape);
    }
    let out_labels = keep.iter().map(|&k| labels[k]).collect();
    Ok((out, out_labels))
}

/// Contracts two trace-free tensors over all shared labels. The result's
/// labels are `a`'s survivors followed by `b`'s survivors.
pub fn pairwise_contract<T: Scalar>(
    a: &DenseTensor<T>,
    la: &[Label],
    b: &DenseTensor<T>,
    lb: &[Label],
) -> Result<(DenseTensor<T>, Vec<Label>), ExecError> {
    check_rank(a, la, 0)?;
    check_rank(b, lb, 1)?;
    let shared: Vec<Label> = la.iter().copied().filter(|l| lb.contains(l)).collect();
    let pos = |ls: &[Label], l: Label| ls.iter().position(|&x| x == l).unwrap();
    let free_a: Vec<usize> = (0..la.len()).filter(|&i| !shared.contains(&la[i])).collect();
    let free_b: Vec<usize> = (0..lb.len()).filter(|&i| !shared.contains(&lb[i])).collect();
    let sa: Vec<usize> = shared.iter().map(|&l| pos(la, l)).collect();
    let sb: Vec<usize> = shared.iter().map(|&l| pos(lb, l)).collect();
    for (k, &l) in shared.iter().enumerate() {
        let (da, db) = (a.shape[sa[k]], b.shape[sb[k]]);
        if da != db {
            return Err(ExecError::DimensionMismatch { label: l, a: da, b: db });
        }
    }

    let perm_a: Vec<usize> = free_a.iter().chain(&sa).copied().collect();
    let perm_b: Vec<usize> = sb.iter().chain(&free_b).copied().collect();
    let ma = a.permute(&perm_a);
    let mb = b.permute(&perm_b);
    let m: usize = free_a.iter().map(|&i| a.shape[i]).product();
    let k: usize = sa.iter().map(|&i| a.shape[i]).product();
    let n: usize = free_b.iter().map(|&i| b.shape[i]).product();

    let mut out = vec![T::zero(); m * n];
    for i in 0..m {
        let row = &ma.data[i * k..(i + 1) * k];
        let dst = &mut out[i * n..(i + 1) * n];
        for (kk, &x) in row.iter().enumerate() {
            let src = &mb.data[kk * n..(kk + 1) * n];
            for (d, &y) in dst.iter_mut().zip(src) {
                *d += x * y;
            }
        }
    }
    let shape = free_a
        .iter()
        .map(|&i| a.shape[i])
        .chain(free_b.iter().map(|&i| b.shape[i]))
        .collect();
    let labels = free_a
        .iter()
        .map(|&i| la[i])
        .chain(free_b.iter().map(|&i| lb[i]))
        .collect();
    Ok((DenseTensor { shape, data: out }, labels))
}

fn check_network<T: Scalar>(tensors: &[DenseTensor<T>], labels: &[Vec<Label>]) -> Result<(), ExecError> {
    if tensors.is_empty() {
        return Err(ExecError::Empty);
    }
    if tensors.len() != labels.len() {
        return Err(ExecError::BadLabels(format!(
            "{} tensors but {} label lists",
            tensors.len(),
            labels.len()
        )));
    }
    let mut seen: BTreeMap<Label, (usize, usize)> = BTreeMap::new();
    for (t, (tensor, ls)) in tensors.iter().zip(labels).enumerate() {
        check_rank(tensor, ls, t)?;
        for (axis, &l) in ls.iter().enumerate() {
            if l == 0 {
                return Err(ExecError::BadLabels("label 0 is not allowed".into()));
            }
            let d = tensor.shape[axis];
            let entry = seen.entry(l).or_insert((0, d));
            if entry.1 != d {
                return Err(ExecError::DimensionMismatch {
                    label: l,
                    a: entry.1,
                    b: d,
                });
            }
            entry.0 += 1;
        }
    }
    let mut open = 0;
    for (&l, &(count, _)) in &seen {
        let expected = if l > 0 { 2 } else { 1 };
        if count != expected {
            return Err(ExecError::BadLabels(format!(
                "label {l} appears {count} times, expected {expected}"
            )));
        }
        if l < 0 {
            open += 1;
        }
    }
    if seen.keys().any(|&l| l < -open) {
        return Err(ExecError::BadLabels(format!(
            "open labels are not contiguous -1..=-{open}"
        )));
    }
    Ok(())
}

/// Contracts a network in ncon convention. `order` lists positive labels;
/// `None` means ascending. Trace labels may appear in `order` or not; a label
/// already summed by an earlier step is skipped.
pub fn ncon_execute<T: Scalar>(
    tensors: &[DenseTensor<T>],
    labels: &[Vec<Label>],
    order: Option<&[Label]>,
) -> Result<DenseTensor<T>, ExecError> {
    check_network(tensors, labels)?;

    let mut pieces: Vec<(DenseTensor<T>, Vec<Label>)> = Vec::with_capacity(tensors.len());
    let mut traced: Vec<Label> = Vec::new();
    for (t, ls) in tensors.iter().zip(labels) {
        for (i, &l) in ls.iter().enumerate() {
            if ls[..i].contains(&l) {
                traced.push(l);
            }
        }
        pieces.push(partial_trace(t, ls)?);
    }

    let mut pending: Vec<Label> = pieces
        .iter()
        .flat_map(|(_, ls)| ls.iter().copied().filter(|&l| l > 0))
        .collect();
    pending.sort_unstable();
    pending.dedup();
    let order: Vec<Label> = match order {
        None => pending.clone(),
        Some(o) => {
            let mut sorted = o.to_vec();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(ExecError::BadOrder("order repeats a label".into()));
            }
            for &l in o {
                if l <= 0 || (!pending.contains(&l) && !traced.contains(&l)) {
                    return Err(ExecError::BadOrder(format!("label {l} is not an internal label")));
                }
            }
            if let Some(missing) = pending.iter().find(|l| !o.contains(l)) {
                return Err(ExecError::BadOrder(format!("label {missing} is missing")));
            }
            o.to_vec()
        }
    };

    for l in order {
        let holders: Vec<usize> = (0..pieces.len()).filter(|&i| pieces[i].1.contains(&l)).collect();
        let [i, j] = holders[..] else {
            continue;
        };
        let (b, lb) = pieces.remove(j);
        let (a, la) = &pieces[i];
        pieces[i] = pairwise_contract(a, la, &b, &lb)?;
    }

    let mut iter = pieces.into_iter();
    let (mut result, mut result_labels) = iter.next().ok_or(ExecError::Empty)?;
    for (t, ls) in iter {
        (result, result_labels) = pairwise_contract(&result, &result_labels, &t, &ls)?;
    }

    let mut perm: Vec<usize> = (0..result_labels.len()).collect();
    perm.sort_by_key(|&i| -result_labels[i]);
    Ok(result.permute(&perm))
}

/// A real or complex tensor; mixed inputs are promoted to complex.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyTensor {
    Real(DenseTensor<f64>),
    Complex(DenseTensor<Complex64>),
}

impl AnyTensor {
    pub fn shape(&self) -> &[usize] {
        match self {
            AnyTensor::Real(t) => t.shape(),
            AnyTensor::Complex(t) => t.shape(),
        }
    }

    pub fn to_complex(&self) -> DenseTensor<Complex64> {
        match self {
            AnyTensor::Real(t) => t.to_complex(),
            AnyTensor::Complex(t) => t.clone(),
        }
    }
}

pub fn ncon_execute_any(
    tensors: &[AnyTensor],
    labels: &[Vec<Label>],
    order: Option<&[Label]>,
) -> Result<AnyTensor, ExecError> {
    let reals: Option<Vec<DenseTensor<f64>>> = tensors
        .iter()
        .map(|t| match t {
            AnyTensor::Real(r) => Some(r.clone()),
            AnyTensor::Complex(_) => None,
        })
        .collect();
    match reals {
        Some(r) => ncon_execute(&r, labels, order).map(AnyTensor::Real),
        None => {
            let c: Vec<_> = tensors.iter().map(AnyTensor::to_complex).collect();
            ncon_execute(&c, labels, order).map(AnyTensor::Complex)
        }
    }
}
