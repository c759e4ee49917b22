//! Seeded random networks and tensors for property tests and benchmarks.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::compile::LabeledNetwork;
use crate::executor::DenseTensor;
use crate::model::Label;

#[derive(Debug, Clone)]
pub struct NetworkShape {
    pub tensors: RangeInclusive<usize>,
    pub dims: RangeInclusive<u64>,
    /// Extra internal edges added on top of a random spanning tree.
    pub extra_edges: RangeInclusive<usize>,
    pub open_legs: RangeInclusive<usize>,
    /// Probability that an extra edge is a partial trace on one tensor.
    pub trace_probability: f64,
}

impl Default for NetworkShape {
    fn default() -> Self {
        NetworkShape {
            tensors: 3..=6,
            dims: 2..=6,
            extra_edges: 0..=3,
            open_legs: 0..=3,
            trace_probability: 0.0,
        }
    }
}

impl NetworkShape {
    pub fn closed(mut self) -> Self {
        self.open_legs = 0..=0;
        self
    }

    /// Spanning tree only: no cycles.
    pub fn tree(mut self) -> Self {
        self.extra_edges = 0..=0;
        self
    }
}

/// A connected network: a random spanning tree plus extra edges and open
/// legs, with each tensor's axes shuffled.
pub fn random_network<R: Rng>(rng: &mut R, shape: &NetworkShape) -> LabeledNetwork {
    let n = rng.gen_range(shape.tensors.clone());
    let mut lists: Vec<Vec<Label>> = vec![Vec::new(); n];
    let mut dims = BTreeMap::new();
    let mut next: Label = 1;
    let mut edge = |a: usize, b: usize, lists: &mut Vec<Vec<Label>>, rng: &mut R| {
        lists[a].push(next);
        lists[b].push(next);
        dims.insert(next, rng.gen_range(shape.dims.clone()));
        next += 1;
    };
    for i in 1..n {
        let j = rng.gen_range(0..i);
        edge(i, j, &mut lists, rng);
    }
    for _ in 0..rng.gen_range(shape.extra_edges.clone()) {
        let a = rng.gen_range(0..n);
        let b = if n == 1 || rng.gen_bool(shape.trace_probability) {
            a
        } else {
            let mut b = rng.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            b
        };
        edge(a, b, &mut lists, rng);
    }
    let mut open = rng.gen_range(shape.open_legs.clone());
    if lists.iter().any(Vec::is_empty) && open == 0 {
        open = 1;
    }
    let mut plaques: Vec<Label> = (1..=open as Label).map(|k| -k).collect();
    plaques.shuffle(rng);
    for (k, l) in plaques.into_iter().enumerate() {
        // the first legs go to tensors that would otherwise have no axes
        let t = lists
            .iter()
            .position(Vec::is_empty)
            .filter(|_| k < n)
            .unwrap_or_else(|| rng.gen_range(0..n));
        lists[t].push(l);
        dims.insert(l, rng.gen_range(shape.dims.clone()));
    }
    for ls in &mut lists {
        ls.shuffle(rng);
    }
    LabeledNetwork::from_labels(lists, &dims)
}

/// Uniform entries in [-1, 1] for every tensor, shaped by the label dims.
pub fn random_tensors<R: Rng>(rng: &mut R, net: &LabeledNetwork) -> Vec<DenseTensor<f64>> {
    (0..net.len())
        .map(|p| DenseTensor::from_fn(net.shape(p), |_| rng.gen_range(-1.0..=1.0)))
        .collect()
}
