//! Exhaustive optimal search: dynamic programming over all tensor subsets.
//!
//! `best(S) = min over S = S1 + S2 of best(S1) + best(S2) + cost(S1, S2)`,
//! with every bipartition considered (outer products included). Equal-cost
//! candidates are ranked by their linearized order, smallest first.

use super::cost::Problem;
use super::tree::{ContractionTree, Shape};
use super::SearchError;
use crate::compile::LabeledNetwork;
use crate::model::Label;

/// Largest tensor count the exhaustive search accepts.
pub const N_FULL_CAP: usize = 16;

pub fn optimal_order_full(net: &LabeledNetwork) -> Result<ContractionTree, SearchError> {
    optimal_order_full_with_cap(net, N_FULL_CAP)
}

pub fn optimal_order_full_with_cap(net: &LabeledNetwork, cap: usize) -> Result<ContractionTree, SearchError> {
    let n = net.len();
    if n > cap || n > 31 {
        return Err(SearchError::TooManyTensors { n, cap });
    }
    let problem = Problem::new(net).ok_or(SearchError::TooManyLabels)?;
    let shape = subset_dp(&problem)?;
    let mut tree = ContractionTree::build(net, &shape)?;
    tree.guaranteed_optimal = true;
    Ok(tree)
}

#[derive(Clone, Copy)]
struct Choice {
    left: u32,
    right: u32,
}

fn subset_dp(p: &Problem) -> Result<Shape, SearchError> {
    let n = p.len();
    if n == 0 {
        return Err(SearchError::Empty);
    }
    let size = 1usize << n;
    let full = (size - 1) as u32;

    let mut legs = vec![0u128; size];
    let mut prod: Vec<Option<u128>> = vec![Some(1); size];
    for mask in 1..size {
        let low = mask.trailing_zeros() as usize;
        legs[mask] = legs[mask & (mask - 1)] ^ p.legs[low];
        prod[mask] = p.prod(legs[mask]);
    }

    let mut best: Vec<Option<u128>> = vec![None; size];
    let mut choice = vec![Choice { left: 0, right: 0 }; size];
    let mut seq: Vec<Vec<Label>> = vec![Vec::new(); size];
    for i in 0..n {
        best[1 << i] = Some(0);
    }

    for mask in 1..=full {
        if mask.count_ones() < 2 {
            continue;
        }
        let m = mask as usize;
        let Some(result_prod) = prod[m] else {
            continue;
        };
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        let mut cur: Option<u128> = None;
        let mut cur_seq: Vec<Label> = Vec::new();
        let mut cur_choice = Choice { left: 0, right: 0 };

        let mut sub = rest;
        loop {
            let s1 = sub | low;
            let s2 = mask ^ s1;
            if s2 != 0 {
                if let Some(total) = candidate(p, &legs, &best, s1, s2, result_prod) {
                    if cur.is_none_or(|c| total <= c) {
                        let shared = legs[s1 as usize] & legs[s2 as usize];
                        let (l, r, cand) = ordered_seq(&seq, s1, s2, p.labels_of(shared));
                        if cur.is_none_or(|c| total < c) || cand < cur_seq {
                            cur = Some(total);
                            cur_seq = cand;
                            cur_choice = Choice { left: l, right: r };
                        }
                    }
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        best[m] = cur;
        seq[m] = cur_seq;
        choice[m] = cur_choice;
    }

    if best[full as usize].is_none() {
        return Err(SearchError::Cost(super::CostError::Overflow));
    }
    Ok(unfold(full, &choice))
}

fn candidate(p: &Problem, legs: &[u128], best: &[Option<u128>], s1: u32, s2: u32, result_prod: u128) -> Option<u128> {
    let c1 = best[s1 as usize]?;
    let c2 = best[s2 as usize]?;
    let shared = legs[s1 as usize] & legs[s2 as usize];
    let step = result_prod.checked_mul(p.prod(shared)?)?;
    c1.checked_add(c2)?.checked_add(step)
}

/// Picks which side goes first in post-order so that the linearized order is
/// lexicographically smallest; returns (left, right, sequence).
fn ordered_seq(seq: &[Vec<Label>], s1: u32, s2: u32, consumed: Vec<Label>) -> (u32, u32, Vec<Label>) {
    let (a, b) = (&seq[s1 as usize], &seq[s2 as usize]);
    let mut first = Vec::with_capacity(a.len() + b.len() + consumed.len());
    first.extend(a);
    first.extend(b);
    let mut second = Vec::with_capacity(first.len());
    second.extend(b);
    second.extend(a);
    let (l, r, mut s) = if second < first {
        (s2, s1, second)
    } else {
        (s1, s2, first)
    };
    s.extend(consumed);
    (l, r, s)
}

fn unfold(mask: u32, choice: &[Choice]) -> Shape {
    if mask.count_ones() == 1 {
        return Shape::Leaf(mask.trailing_zeros() as usize);
    }
    let c = choice[mask as usize];
    Shape::join(unfold(c.left, choice), unfold(c.right, choice))
}
