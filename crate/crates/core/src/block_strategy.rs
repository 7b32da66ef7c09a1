//! The block-optimal strategy: an even mix of a search and its block-reversed twin.

use std::collections::{HashSet, VecDeque};

use thiserror::Error;

use crate::decomposition::{self, Decomposition};
use crate::network::{ArcIx, NodeIx, Point, RootedNetwork};
use crate::ratio::{self, Rational};
use crate::search::{self, Direction, Lottery, PureSearch, Step, Strategy, TimeTable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlockError {
    #[error("arcs do not form a 2-arc-connected subnetwork around node `{node}`")]
    NotTwoArcConnected { node: String },
}

/// A whole-arc search of the arcs in `block`, starting and ending at `entry`, whose
/// time-reverse is again a search from `entry`.
///
/// Built by ear insertion: the first ear is a cycle through `entry`; each later ear
/// is a path between covered nodes, spliced in where its start is already covered
/// and its end is still left later on, so that both directions stay valid.
pub fn reversible_block_search(
    net: &RootedNetwork,
    block: &[ArcIx],
    entry: NodeIx,
) -> Result<PureSearch, BlockError> {
    let in_block: HashSet<ArcIx> = block.iter().copied().collect();
    let mut used: HashSet<ArcIx> = HashSet::new();
    let mut covered = vec![false; net.node_count()];
    covered[entry.0] = true;
    let mut seq: Vec<Step> = Vec::new();
    let fail = |x: NodeIx| BlockError::NotTwoArcConnected {
        node: net.node_name(x).to_string(),
    };

    let mut sorted = block.to_vec();
    sorted.sort();
    while used.len() < sorted.len() {
        let (e, p) = sorted
            .iter()
            .filter(|a| !used.contains(a))
            .find_map(|&a| {
                let arc = net.arc(a);
                if covered[arc.u.0] {
                    Some((a, arc.u))
                } else if covered[arc.v.0] {
                    Some((a, arc.v))
                } else {
                    None
                }
            })
            .ok_or_else(|| fail(entry))?;
        let w = net.arc(e).other(p);
        let mut ear = vec![Step::leaving(net, e, p)];
        if !covered[w.0] {
            ear.extend(path_to_covered(net, &in_block, &used, &covered, e, w).ok_or_else(|| fail(w))?);
        }
        let q = ear.last().unwrap().to(net);
        let (first_arrival, last_departure) = (first_arrivals(net, &seq), last_departures(net, &seq));
        let slot = |p: NodeIx, q: NodeIx| -> Option<usize> {
            (0..=seq.len()).find(|&i| {
                let p_ok = p == entry || first_arrival[p.0].is_some_and(|f| f < i);
                let q_ok = q == entry || last_departure[q.0].is_some_and(|l| l >= i);
                p_ok && q_ok
            })
        };
        let (at, ear) = match slot(p, q) {
            Some(i) => (i, ear),
            None => {
                let flipped: Vec<Step> = ear.iter().rev().map(|s| s.flipped()).collect();
                (slot(q, p).ok_or_else(|| fail(p))?, flipped)
            }
        };
        for s in &ear {
            used.insert(s.arc);
            covered[s.to(net).0] = true;
        }
        seq.splice(at..at, ear);
    }
    Ok(PureSearch::new(seq))
}

/// Shortest path (in arcs) from uncovered `w` to the covered set over unused block arcs other than `skip`.
fn path_to_covered(
    net: &RootedNetwork,
    in_block: &HashSet<ArcIx>,
    used: &HashSet<ArcIx>,
    covered: &[bool],
    skip: ArcIx,
    w: NodeIx,
) -> Option<Vec<Step>> {
    let mut prev: Vec<Option<(NodeIx, ArcIx)>> = vec![None; net.node_count()];
    let mut seen = vec![false; net.node_count()];
    seen[w.0] = true;
    let mut queue = VecDeque::from([w]);
    while let Some(x) = queue.pop_front() {
        for &a in net.incident(x) {
            if a == skip || !in_block.contains(&a) || used.contains(&a) || net.arc(a).is_loop() {
                continue;
            }
            let y = net.arc(a).other(x);
            if seen[y.0] {
                continue;
            }
            seen[y.0] = true;
            prev[y.0] = Some((x, a));
            if covered[y.0] {
                let mut steps = Vec::new();
                let mut z = y;
                while z != w {
                    let (from, arc) = prev[z.0].unwrap();
                    steps.push(Step::leaving(net, arc, from));
                    z = from;
                }
                steps.reverse();
                return Some(steps);
            }
            queue.push_back(y);
        }
    }
    None
}

fn first_arrivals(net: &RootedNetwork, seq: &[Step]) -> Vec<Option<usize>> {
    let mut out = vec![None; net.node_count()];
    for (i, s) in seq.iter().enumerate() {
        let to = s.to(net);
        if out[to.0].is_none() {
            out[to.0] = Some(i);
        }
    }
    out
}

fn last_departures(net: &RootedNetwork, seq: &[Step]) -> Vec<Option<usize>> {
    let mut out = vec![None; net.node_count()];
    for (i, s) in seq.iter().enumerate() {
        out[s.from(net).0] = Some(i);
    }
    out
}

/// A search of a block with the detours hanging off it, kept structured so it can be mirrored.
#[derive(Debug, Clone)]
enum Item {
    Step(Step),
    /// A bridge step followed by the exhaustive search of everything beyond it.
    Branch(Step, Vec<Item>),
}

fn flatten(items: &[Item], out: &mut Vec<Step>) {
    for it in items {
        match it {
            Item::Step(s) => out.push(*s),
            Item::Branch(s, body) => {
                out.push(*s);
                flatten(body, out);
            }
        }
    }
}

/// Reverses the order at every level and the direction of block steps; bridge
/// steps keep pointing away from the root.
fn mirror(items: &[Item]) -> Vec<Item> {
    items
        .iter()
        .rev()
        .map(|it| match it {
            Item::Step(s) => Item::Step(s.flipped()),
            Item::Branch(s, body) => Item::Branch(*s, mirror(body)),
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct BetaStrategy {
    pub s1: PureSearch,
    pub s2: PureSearch,
    /// Per block: its reversible search from its entry, and the reverse.
    pub block_searches: Vec<(PureSearch, PureSearch)>,
    /// Bridges leaving the root, in the order S1 takes them.
    pub root_branch_order: Vec<ArcIx>,
    t1: TimeTable,
    t2: TimeTable,
}

impl BetaStrategy {
    pub fn lottery(&self) -> Lottery {
        Lottery::new(vec![(ratio::half(), self.s1.clone()), (ratio::half(), self.s2.clone())])
            .expect("halves sum to one")
    }
}

impl Strategy for BetaStrategy {
    fn time_to(&self, net: &RootedNetwork, p: &Point) -> Rational {
        (self.t1.time(net, p) + self.t2.time(net, p)) / ratio::int(2)
    }
}

pub fn build_beta(net: &RootedNetwork, dec: &Decomposition) -> Result<BetaStrategy, BlockError> {
    let mut block_searches = Vec::with_capacity(dec.blocks.len());
    for b in &dec.blocks {
        let s = reversible_block_search(net, &b.arcs, b.entry)?;
        let r = search::reverse(&s);
        block_searches.push((s, r));
    }
    let root_items = node_items(net, dec, &block_searches, net.root(), None);
    let root_branch_order = root_items
        .iter()
        .filter_map(|it| match it {
            Item::Branch(s, _) => Some(s.arc),
            Item::Step(_) => None,
        })
        .collect();
    let mut steps1 = Vec::new();
    flatten(&root_items, &mut steps1);
    let mut steps2 = Vec::new();
    flatten(&mirror(&root_items), &mut steps2);
    let (s1, s2) = (PureSearch::new(steps1), PureSearch::new(steps2));
    debug_assert!(search::is_valid(net, &s1), "S1 invalid: {}", s1.display(net));
    debug_assert!(search::is_valid(net, &s2), "S2 invalid: {}", s2.display(net));
    let (t1, t2) = (TimeTable::new(net, &s1), TimeTable::new(net, &s2));
    Ok(BetaStrategy {
        s1,
        s2,
        block_searches,
        root_branch_order,
        t1,
        t2,
    })
}

/// Everything searched from node `x` onwards: its block if it enters one, otherwise
/// the bridges leaving it.
fn node_items(
    net: &RootedNetwork,
    dec: &Decomposition,
    blocks: &[(PureSearch, PureSearch)],
    x: NodeIx,
    via: Option<ArcIx>,
) -> Vec<Item> {
    match dec.block_of_node(x) {
        Some(k) => {
            let mut items = branches_at(net, dec, blocks, x, via);
            let mut arrived = HashSet::from([x]);
            for s in &blocks[k].0.steps {
                items.push(Item::Step(*s));
                let to = s.to(net);
                if arrived.insert(to) {
                    items.extend(branches_at(net, dec, blocks, to, via));
                }
            }
            items
        }
        None => branches_at(net, dec, blocks, x, via),
    }
}

/// Bridges at `x` pointing away from the root, each with its exhaustive continuation.
fn branches_at(
    net: &RootedNetwork,
    dec: &Decomposition,
    blocks: &[(PureSearch, PureSearch)],
    x: NodeIx,
    via: Option<ArcIx>,
) -> Vec<Item> {
    let hx = dec.node_height(x);
    net.incident(x)
        .iter()
        .filter(|&&a| Some(a) != via && dec.is_bridge(a))
        .filter(|&&a| dec.node_height(net.arc(a).other(x)) > hx)
        .map(|&a| {
            let y = net.arc(a).other(x);
            Item::Branch(Step::leaving(net, a, x), node_items(net, dec, blocks, y, Some(a)))
        })
        .collect()
}

/// Points where the hider is not dominated: bridge-part leaves and the midpoint of every block arc.
pub fn undominated_points(net: &RootedNetwork, dec: &Decomposition) -> Vec<Point> {
    let mut pts: Vec<Point> = dec
        .bridge_leaves(net)
        .into_iter()
        .map(|x| net.node_point(x))
        .collect();
    for b in &dec.blocks {
        pts.extend(b.arcs.iter().map(|&a| net.midpoint(a)));
    }
    pts
}

/// `(μ + π)/2`.
pub fn beta_bound(net: &RootedNetwork, dec: &Decomposition) -> Rational {
    (net.total_measure() + decomposition::network_height(dec)) / ratio::int(2)
}

/// Worst expected time of the constructed β over undominated hider points.
pub fn beta_max_time(net: &RootedNetwork, dec: &Decomposition) -> Result<Rational, BlockError> {
    let beta = build_beta(net, dec)?;
    Ok(undominated_points(net, dec)
        .iter()
        .map(|p| beta.time_to(net, p))
        .max()
        .unwrap_or_else(ratio::zero))
}

/// Which way a step runs relative to its arc, for display.
pub fn direction_mark(d: Direction) -> &'static str {
    match d {
        Direction::Forward => "fwd",
        Direction::Reverse => "rev",
    }
}
