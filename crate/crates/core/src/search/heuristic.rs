//! Restricted searches for networks too large for the exhaustive DP.
//!
//! * `quick`: greedy. Repeatedly contract the index-sharing pair with the
//!   smallest pairwise cost; ties go to the larger summed dimension, then to
//!   the smaller shared label.
//! * `thorough`: the greedy tree plus randomized greedy restarts that sample
//!   pairs with probability proportional to `(min_cost / cost)^2`. Seeded.
//! * `extensive`: iterative-deepening cost-capped DP restricted to subsets
//!   connected by shared indices. The cap starts at the cheapest pairwise
//!   step and is multiplied by the smallest index dimension each round,
//!   bounded above by the greedy cost. Falls back to greedy when the
//!   wall-clock budget runs out.
//!
//! None of these claim optimality.

use std::cmp::Reverse;
use std::collections::HashMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cost::Problem;
use super::tree::{ContractionTree, Shape};
use super::{SearchError, SearchMode, SearchOptions};
use crate::compile::LabeledNetwork;
use crate::model::Label;

pub fn heuristic_order(
    net: &LabeledNetwork,
    mode: SearchMode,
    opts: &SearchOptions,
) -> Result<ContractionTree, SearchError> {
    if net.is_empty() {
        return Err(SearchError::Empty);
    }
    let p = Problem::new(net).ok_or(SearchError::TooManyLabels)?;
    let quick = ContractionTree::build(net, &greedy(&p, &mut Deterministic))?;
    let tree = match mode {
        SearchMode::Quick | SearchMode::Full => quick,
        SearchMode::Thorough => thorough(net, &p, quick, opts)?,
        SearchMode::Extensive => {
            let deadline = Instant::now() + opts.budget;
            let ext = ContractionTree::build(net, &extensive(&p, deadline))?;
            better(ext, quick)
        }
    };
    Ok(tree)
}

/// Keeps the cheaper tree; equal cost goes to the smaller linearized order.
fn better(a: ContractionTree, b: ContractionTree) -> ContractionTree {
    let key = |t: &ContractionTree| (t.total_cost(), t.linearize());
    if key(&b) < key(&a) {
        b
    } else {
        a
    }
}

fn thorough(
    net: &LabeledNetwork,
    p: &Problem,
    mut best: ContractionTree,
    opts: &SearchOptions,
) -> Result<ContractionTree, SearchError> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.restarts {
        let shape = greedy(p, &mut Sampled(&mut rng));
        let t = ContractionTree::build(net, &shape)?;
        if t.total_cost() <= best.total_cost() {
            best = better(best, t);
        }
    }
    Ok(best)
}

#[derive(Clone)]
struct Piece {
    legs: u128,
    shape: Shape,
}

struct Candidate {
    i: usize,
    j: usize,
    cost: u128,
    reduction: u128,
    first_label: Label,
}

trait PairPicker {
    fn pick(&mut self, candidates: &[Candidate]) -> usize;
}

struct Deterministic;

impl PairPicker for Deterministic {
    fn pick(&mut self, candidates: &[Candidate]) -> usize {
        (0..candidates.len())
            .min_by_key(|&k| {
                let c = &candidates[k];
                (c.cost, Reverse(c.reduction), c.first_label, c.i, c.j)
            })
            .unwrap_or(0)
    }
}

struct Sampled<'a>(&'a mut ChaCha8Rng);

impl PairPicker for Sampled<'_> {
    fn pick(&mut self, candidates: &[Candidate]) -> usize {
        let min = candidates.iter().map(|c| c.cost).min().unwrap_or(1).max(1) as f64;
        let weights: Vec<f64> = candidates
            .iter()
            .map(|c| (min / c.cost.max(1) as f64).powi(2))
            .collect();
        let total: f64 = weights.iter().sum();
        let mut x = self.0.gen::<f64>() * total;
        for (k, w) in weights.iter().enumerate() {
            if x < *w {
                return k;
            }
            x -= w;
        }
        candidates.len() - 1
    }
}

fn greedy(p: &Problem, picker: &mut impl PairPicker) -> Shape {
    greedy_over(p, (0..p.len()).collect(), picker)
}

/// Greedy contraction of the given tensor positions. Pairs that share an
/// index are preferred; outer products happen only when none remain.
fn greedy_over(p: &Problem, positions: Vec<usize>, picker: &mut impl PairPicker) -> Shape {
    let mut pieces: Vec<Piece> = positions
        .into_iter()
        .map(|i| Piece {
            legs: p.legs[i],
            shape: Shape::Leaf(i),
        })
        .collect();
    let mut candidates = Vec::new();
    while pieces.len() > 1 {
        candidates.clear();
        for i in 0..pieces.len() {
            for j in i + 1..pieces.len() {
                let shared = pieces[i].legs & pieces[j].legs;
                if shared != 0 {
                    candidates.push(candidate(p, &pieces, i, j, shared));
                }
            }
        }
        if candidates.is_empty() {
            for i in 0..pieces.len() {
                for j in i + 1..pieces.len() {
                    candidates.push(candidate(p, &pieces, i, j, 0));
                }
            }
        }
        let k = picker.pick(&candidates);
        let (i, j) = (candidates[k].i, candidates[k].j);
        let right = pieces.remove(j);
        let left = &mut pieces[i];
        left.legs ^= right.legs;
        left.shape = Shape::join(left.shape.clone(), right.shape);
    }
    pieces.pop().map(|p| p.shape).unwrap_or(Shape::Leaf(0))
}

fn candidate(p: &Problem, pieces: &[Piece], i: usize, j: usize, shared: u128) -> Candidate {
    Candidate {
        i,
        j,
        cost: p.prod(pieces[i].legs | pieces[j].legs).unwrap_or(u128::MAX),
        reduction: p.prod(shared).unwrap_or(u128::MAX),
        first_label: if shared == 0 {
            0
        } else {
            p.bit_label[shared.trailing_zeros() as usize]
        },
    }
}

/// Connected components of tensor positions, each sorted, ordered by their
/// smallest position.
fn components(p: &Problem) -> Vec<Vec<usize>> {
    let n = p.len();
    let mut comp: Vec<usize> = (0..n).collect();
    fn find(c: &mut [usize], mut x: usize) -> usize {
        while c[x] != x {
            c[x] = c[c[x]];
            x = c[x];
        }
        x
    }
    for i in 0..n {
        for j in i + 1..n {
            if p.legs[i] & p.legs[j] != 0 {
                let (a, b) = (find(&mut comp, i), find(&mut comp, j));
                comp[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_index: HashMap<usize, usize> = HashMap::new();
    for i in 0..n {
        let r = find(&mut comp, i);
        let g = *root_index.entry(r).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(i);
    }
    groups
}

fn extensive(p: &Problem, deadline: Instant) -> Shape {
    let mut parts = components(p).into_iter().map(|members| {
        if members.len() > 64 {
            return greedy_over(p, members, &mut Deterministic);
        }
        capped_search(p, members, deadline)
    });
    let first = parts.next().unwrap_or(Shape::Leaf(0));
    parts.fold(first, Shape::join)
}

fn capped_search(p: &Problem, members: Vec<usize>, deadline: Instant) -> Shape {
    if members.len() == 1 {
        return Shape::Leaf(members[0]);
    }
    let fallback = greedy_over(p, members.clone(), &mut Deterministic);
    let bound = shape_cost(p, &fallback).unwrap_or(u128::MAX);
    let min_dim = p.bit_dim.iter().copied().min().unwrap_or(2).max(2) as u128;
    let mut cap = u128::MAX;
    for (a, &i) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            if p.legs[i] & p.legs[j] != 0 {
                cap = cap.min(p.prod(p.legs[i] | p.legs[j]).unwrap_or(u128::MAX));
            }
        }
    }
    loop {
        cap = cap.min(bound);
        match capped_dp(p, &members, cap, deadline) {
            Ok(Some(shape)) => return shape,
            Ok(None) if cap >= bound => return fallback,
            Ok(None) => cap = cap.saturating_mul(min_dim),
            Err(Timeout) => return fallback,
        }
    }
}

fn shape_cost(p: &Problem, shape: &Shape) -> Option<u128> {
    fn walk(p: &Problem, s: &Shape) -> Option<(u128, u128)> {
        match s {
            Shape::Leaf(i) => Some((p.legs[*i], 0)),
            Shape::Join(a, b) => {
                let (la, ca) = walk(p, a)?;
                let (lb, cb) = walk(p, b)?;
                let step = p.prod(la | lb)?;
                Some((la ^ lb, ca.checked_add(cb)?.checked_add(step)?))
            }
        }
    }
    walk(p, shape).map(|(_, c)| c)
}

struct Timeout;

struct Entry {
    cost: u128,
    legs: u128,
    left: u64,
    right: u64,
    seq: Vec<Label>,
}

/// DP over connected subsets of `members` whose subtree cost stays within
/// `cap`. Returns the best full tree, `None` if no tree fits under the cap.
fn capped_dp(p: &Problem, members: &[usize], cap: u128, deadline: Instant) -> Result<Option<Shape>, Timeout> {
    let k = members.len();
    let mut table: HashMap<u64, Entry> = HashMap::new();
    let mut layers: Vec<Vec<u64>> = vec![Vec::new(); k + 1];
    for (local, &pos) in members.iter().enumerate() {
        let m = 1u64 << local;
        table.insert(
            m,
            Entry {
                cost: 0,
                legs: p.legs[pos],
                left: 0,
                right: 0,
                seq: Vec::new(),
            },
        );
        layers[1].push(m);
    }
    for size in 2..=k {
        let mut fresh: HashMap<u64, Entry> = HashMap::new();
        for a in 1..=size / 2 {
            let b = size - a;
            for &m1 in &layers[a] {
                if Instant::now() > deadline {
                    return Err(Timeout);
                }
                for &m2 in &layers[b] {
                    if m1 & m2 != 0 || (a == b && m2 <= m1) {
                        continue;
                    }
                    let (e1, e2) = (&table[&m1], &table[&m2]);
                    let shared = e1.legs & e2.legs;
                    if shared == 0 {
                        continue;
                    }
                    let Some(total) = p
                        .prod(e1.legs | e2.legs)
                        .and_then(|s| s.checked_add(e1.cost)?.checked_add(e2.cost))
                    else {
                        continue;
                    };
                    if total > cap {
                        continue;
                    }
                    let merged = m1 | m2;
                    if let Some(cur) = fresh.get(&merged) {
                        if total > cur.cost {
                            continue;
                        }
                    }
                    let mut first = e1.seq.clone();
                    first.extend(&e2.seq);
                    let mut second = e2.seq.clone();
                    second.extend(&e1.seq);
                    let (left, right, mut seq) = if second < first {
                        (m2, m1, second)
                    } else {
                        (m1, m2, first)
                    };
                    seq.extend(p.labels_of(shared));
                    let replace = match fresh.get(&merged) {
                        None => true,
                        Some(cur) => total < cur.cost || seq < cur.seq,
                    };
                    if replace {
                        fresh.insert(
                            merged,
                            Entry {
                                cost: total,
                                legs: e1.legs ^ e2.legs,
                                left,
                                right,
                                seq,
                            },
                        );
                    }
                }
            }
        }
        let mut keys: Vec<u64> = fresh.keys().copied().collect();
        keys.sort_unstable();
        layers[size] = keys;
        table.extend(fresh);
    }
    let full = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
    if !table.contains_key(&full) {
        return Ok(None);
    }
    fn unfold(m: u64, table: &HashMap<u64, Entry>, members: &[usize]) -> Shape {
        if m.count_ones() == 1 {
            return Shape::Leaf(members[m.trailing_zeros() as usize]);
        }
        let e = &table[&m];
        Shape::join(unfold(e.left, table, members), unfold(e.right, table, members))
    }
    Ok(Some(unfold(full, &table, members)))
}
