//! Exact best response of the searcher against a finite hider mix.
//!
//! States are sets of covered arcs. Hider weight sits on nodes and on arc
//! midpoints, so the cost of traversing an arc starting at time `t` is
//! `w_mid·(t + len/2) + w_node·(t + len)` for the node it newly reaches.
//! Times and weights are scaled to integers; `i128` is used when the largest
//! possible total fits, big integers otherwise.

use std::ops::{Add, Mul};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rustc_hash::FxHashMap;

use super::OracleError;
use crate::network::{NodeIx, RootedNetwork};
use crate::ratio::{self, Rational};
use crate::search::{Direction, PureSearch, Step};

pub const MAX_ARCS: usize = 128;

trait Cost: Clone + Ord + Zero + Add<Output = Self> + Mul<Output = Self> {
    fn from_big(b: &BigInt) -> Self;
    fn to_big(&self) -> BigInt;
}

impl Cost for i128 {
    fn from_big(b: &BigInt) -> Self {
        b.to_i128().expect("checked against overflow bound")
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Cost for BigInt {
    fn from_big(b: &BigInt) -> Self {
        b.clone()
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

#[derive(Debug, Clone)]
pub struct BestResponse {
    pub search: PureSearch,
    /// Expected search time of `search` against the weights.
    pub cost: Rational,
    /// Distinct covered-arc sets visited.
    pub states: usize,
}

/// Cheapest whole-arc search against `mid_weight[arc]` at arc midpoints and
/// `node_weight[node]` at nodes. Ties go to the lowest arc index.
pub fn best_response(
    net: &RootedNetwork,
    mid_weight: &[Rational],
    node_weight: &[Rational],
    cap: usize,
) -> Result<BestResponse, OracleError> {
    let n = net.arc_count();
    if n > MAX_ARCS {
        return Err(OracleError::TooManyArcs(n));
    }
    let time_scale = ratio::common_denominator(net.arcs().iter().map(|a| &a.length)) * BigInt::from(2);
    let weight_scale = ratio::common_denominator(mid_weight.iter().chain(node_weight));
    let scale_int = |r: &Rational, s: &BigInt| -> BigInt { (r * Rational::from_integer(s.clone())).to_integer() };
    let lens: Vec<BigInt> = net.arcs().iter().map(|a| scale_int(&a.length, &time_scale)).collect();
    let mids: Vec<BigInt> = mid_weight.iter().map(|w| scale_int(w, &weight_scale)).collect();
    let nodes: Vec<BigInt> = node_weight.iter().map(|w| scale_int(w, &weight_scale)).collect();

    let total_time: BigInt = lens.iter().sum();
    let total_weight: BigInt = mids.iter().chain(&nodes).sum();
    let bound = &total_time * &total_weight * BigInt::from(4);
    let (cost, steps, states) = if bound < BigInt::from(i128::MAX) {
        solve::<i128>(net, &lens, &mids, &nodes, cap)?
    } else {
        solve::<BigInt>(net, &lens, &mids, &nodes, cap)?
    };
    let denom = Rational::from_integer(time_scale * weight_scale);
    Ok(BestResponse {
        search: PureSearch::new(steps),
        cost: Rational::from_integer(cost) / denom,
        states,
    })
}

struct Solver<'a, T> {
    net: &'a RootedNetwork,
    lens: Vec<T>,
    halves: Vec<T>,
    mids: Vec<T>,
    nodes: Vec<T>,
    full: u128,
    cap: usize,
    memo: FxHashMap<u128, (T, u8, bool)>,
}

fn solve<T: Cost>(
    net: &RootedNetwork,
    lens: &[BigInt],
    mids: &[BigInt],
    nodes: &[BigInt],
    cap: usize,
) -> Result<(BigInt, Vec<Step>, usize), OracleError> {
    let n = net.arc_count();
    let mut s = Solver {
        net,
        lens: lens.iter().map(T::from_big).collect(),
        halves: lens.iter().map(|l| T::from_big(&(l / BigInt::from(2)))).collect(),
        mids: mids.iter().map(T::from_big).collect(),
        nodes: nodes.iter().map(T::from_big).collect(),
        full: if n == 128 { u128::MAX } else { (1u128 << n) - 1 },
        cap,
        memo: FxHashMap::default(),
    };
    let mut covered = vec![false; net.node_count()];
    covered[net.root().0] = true;
    let cost = s.go(0, T::zero(), &mut covered)?;

    let mut steps = Vec::with_capacity(n);
    let mut mask = 0u128;
    while mask != s.full {
        let (_, a, reverse) = s.memo[&mask].clone();
        let dir = if reverse { Direction::Reverse } else { Direction::Forward };
        steps.push(Step::new(crate::network::ArcIx(a as usize), dir));
        mask |= 1u128 << a;
    }
    Ok((cost.to_big(), steps, s.memo.len()))
}

impl<T: Cost> Solver<'_, T> {
    fn go(&mut self, mask: u128, t: T, covered: &mut [bool]) -> Result<T, OracleError> {
        if mask == self.full {
            return Ok(T::zero());
        }
        if let Some((c, _, _)) = self.memo.get(&mask) {
            return Ok(c.clone());
        }
        let mut best: Option<(T, u8, bool)> = None;
        for a in 0..self.net.arc_count() {
            if mask & (1u128 << a) != 0 {
                continue;
            }
            let arc = self.net.arc(crate::network::ArcIx(a));
            let (cu, cv) = (covered[arc.u.0], covered[arc.v.0]);
            let (reverse, fresh): (bool, Option<NodeIx>) = match (cu, cv) {
                (true, true) => (false, None),
                (true, false) => (false, Some(arc.v)),
                (false, true) => (true, Some(arc.u)),
                (false, false) => continue,
            };
            let end = t.clone() + self.lens[a].clone();
            let mut step = self.mids[a].clone() * (t.clone() + self.halves[a].clone());
            if let Some(x) = fresh {
                step = step + self.nodes[x.0].clone() * end.clone();
                covered[x.0] = true;
            }
            let rest = self.go(mask | (1u128 << a), end, covered);
            if let Some(x) = fresh {
                covered[x.0] = false;
            }
            let total = step + rest?;
            if best.as_ref().is_none_or(|(b, _, _)| total < *b) {
                best = Some((total, a as u8, reverse));
            }
        }
        let best = best.expect("connected network always has a next arc");
        if self.memo.len() >= self.cap {
            return Err(OracleError::CapExceeded(self.memo.len()));
        }
        let c = best.0.clone();
        self.memo.insert(mask, best);
        Ok(c)
    }
}
