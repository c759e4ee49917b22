//! Test-side oracles, written independently of the library algorithms:
//! brute-force tree enumeration, direct nested summation and finite
//! differences.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use ttc_core::{load_project, Label, Project};

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture_bytes(name: &str) -> Vec<u8> {
    std::fs::read(fixtures_dir().join(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

pub fn fixture(name: &str) -> Project {
    load_project(&fixture_bytes(name)).unwrap_or_else(|e| panic!("loading {name}: {e}"))
}

/// Fixtures that load and validate.
pub const VALID_FIXTURES: &[&str] = &[
    "matmul.tnp",
    "matrix_chain.tnp",
    "fig2a_pair.tnp",
    "trace_ab.tnp",
    "six_closed.tnp",
    "trace_ring.tnp",
    "binary_mera.tnp",
];

fn without_traces(labels: &[Label]) -> Vec<Label> {
    labels
        .iter()
        .copied()
        .filter(|l| labels.iter().filter(|x| *x == l).count() == 1)
        .collect()
}

fn union_cost(a: &[Label], b: &[Label], dims: &BTreeMap<Label, u64>) -> u128 {
    let mut seen: Vec<Label> = a.to_vec();
    for &l in b {
        if !seen.contains(&l) {
            seen.push(l);
        }
    }
    seen.iter().map(|l| dims[l] as u128).product()
}

fn merge(a: &[Label], b: &[Label]) -> Vec<Label> {
    a.iter()
        .chain(b)
        .copied()
        .filter(|l| !(a.contains(l) && b.contains(l)))
        .collect()
}

fn cheapest(items: &[Vec<Label>], dims: &BTreeMap<Label, u64>) -> u128 {
    if items.len() <= 1 {
        return 0;
    }
    let mut best = u128::MAX;
    for i in 0..items.len() {
        for j in i + 1..items.len() {
            let step = union_cost(&items[i], &items[j], dims);
            let mut rest: Vec<Vec<Label>> = items
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i && k != j)
                .map(|(_, v)| v.clone())
                .collect();
            rest.push(merge(&items[i], &items[j]));
            best = best.min(step + cheapest(&rest, dims));
        }
    }
    best
}

/// Minimum total cost over every sequence of pairwise contractions, found by
/// trying every pair at every step. Outer products included.
pub fn exhaustive_min_cost(lists: &[Vec<Label>], dims: &BTreeMap<Label, u64>) -> u128 {
    let items: Vec<Vec<Label>> = lists.iter().map(|l| without_traces(l)).collect();
    cheapest(&items, dims)
}

/// Binary tree given as nested pairs of 0-based tensor positions.
#[derive(Debug, Clone)]
pub enum Bracket {
    Leaf(usize),
    Pair(Box<Bracket>, Box<Bracket>),
}

pub fn pair(a: Bracket, b: Bracket) -> Bracket {
    Bracket::Pair(Box::new(a), Box::new(b))
}

/// Total cost of a fixed bracketing, computed from scratch.
pub fn bracket_cost(lists: &[Vec<Label>], dims: &BTreeMap<Label, u64>, b: &Bracket) -> u128 {
    fn go(lists: &[Vec<Label>], dims: &BTreeMap<Label, u64>, b: &Bracket) -> (Vec<Label>, u128) {
        match b {
            Bracket::Leaf(p) => (without_traces(&lists[*p]), 0),
            Bracket::Pair(x, y) => {
                let (lx, cx) = go(lists, dims, x);
                let (ly, cy) = go(lists, dims, y);
                (merge(&lx, &ly), cx + cy + union_cost(&lx, &ly, dims))
            }
        }
    }
    go(lists, dims, b).1
}

/// Direct evaluation of the summation definition: every assignment of every
/// label, product of the addressed entries, accumulated into the output
/// element addressed by the open labels -1, -2, ... Returns (shape, data).
pub fn nested_sum(data: &[Vec<f64>], lists: &[Vec<Label>], dims: &BTreeMap<Label, u64>) -> (Vec<usize>, Vec<f64>) {
    let mut labels: Vec<Label> = lists.iter().flatten().copied().collect();
    labels.sort_unstable();
    labels.dedup();
    let open: Vec<Label> = {
        let mut o: Vec<Label> = labels.iter().copied().filter(|&l| l < 0).collect();
        o.sort_by_key(|l| -l);
        o
    };
    let out_shape: Vec<usize> = open.iter().map(|l| dims[l] as usize).collect();
    let mut out = vec![0.0; out_shape.iter().product()];
    let extent: Vec<usize> = labels.iter().map(|l| dims[l] as usize).collect();
    let slot = |l: Label| labels.iter().position(|&x| x == l).unwrap();
    let mut value = vec![0usize; labels.len()];
    loop {
        let mut prod = 1.0;
        for (t, ls) in lists.iter().enumerate() {
            let mut flat = 0;
            for &l in ls {
                flat = flat * dims[&l] as usize + value[slot(l)];
            }
            prod *= data[t][flat];
        }
        let mut o = 0;
        for &l in &open {
            o = o * dims[&l] as usize + value[slot(l)];
        }
        out[o] += prod;

        let mut k = labels.len();
        loop {
            if k == 0 {
                return (out_shape, out);
            }
            k -= 1;
            value[k] += 1;
            if value[k] < extent[k] {
                break;
            }
            value[k] = 0;
        }
    }
}

/// Central-difference gradient of `f` at `x`.
pub fn numerical_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Largest absolute difference relative to the largest reference magnitude.
pub fn rel_err(got: &[f64], want: &[f64]) -> f64 {
    assert_eq!(got.len(), want.len(), "length mismatch");
    let scale = want.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = got.iter().zip(want).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// A random permutation of the internal labels: always a valid ncon order.
pub fn random_order<R: Rng>(rng: &mut R, lists: &[Vec<Label>]) -> Vec<Label> {
    let mut ls: Vec<Label> = lists.iter().flatten().copied().filter(|&l| l > 0).collect();
    ls.sort_unstable();
    ls.dedup();
    ls.shuffle(rng);
    ls
}
