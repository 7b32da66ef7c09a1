//! Random trees and hider distributions shared by the property suite and the acceptance gate.
#![allow(dead_code)]

use expsearch::network::NetworkBuilder;
use expsearch::ratio::{self, rat, Rational};
use expsearch::search::{self, expected_time, Atom, HiderDistribution, Step};
use expsearch::tree_game;
use expsearch::{ArcIx, NodeIx, Point, PureSearch, RootedNetwork};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use proptest::sample::Index;

/// Arc `k` joins node `k + 1` to an earlier node; lengths are small fractions.
#[derive(Debug, Clone)]
pub struct TreeShape {
    pub parents: Vec<Index>,
    pub lengths: Vec<(i64, i64)>,
    /// Hang the second arc from the root too, so the root branches.
    pub fork: bool,
}

impl TreeShape {
    pub fn build(&self) -> RootedNetwork {
        let name = |i: usize| if i == 0 { "O".to_string() } else { format!("N{i}") };
        let mut b = NetworkBuilder::new("O");
        for (k, (p, (num, den))) in self.parents.iter().zip(&self.lengths).enumerate() {
            let parent = if self.fork && k == 1 { 0 } else { p.index(k + 1) };
            b = b.arc(&format!("e{k}"), &name(parent), &name(k + 1), rat(*num, *den));
        }
        b.build().expect("generated tree is valid")
    }
}

/// Trees with 2 to `max_arcs` arcs, so at most `max_arcs` leaves.
pub fn tree_shape(max_arcs: usize) -> impl Strategy<Value = TreeShape> {
    shape(max_arcs, false)
}

/// Like [`tree_shape`] but the root always has at least two children.
pub fn forked_tree_shape(max_arcs: usize) -> impl Strategy<Value = TreeShape> {
    shape(max_arcs, true)
}

fn shape(max_arcs: usize, fork: bool) -> impl Strategy<Value = TreeShape> {
    (2..=max_arcs).prop_flat_map(move |n| {
        (
            prop::collection::vec(any::<Index>(), n),
            prop::collection::vec((1i64..=6, 1i64..=4), n),
        )
            .prop_map(move |(parents, lengths)| TreeShape { parents, lengths, fork })
    })
}

/// Integer weights for every non-root node and every arc midpoint.
pub fn weights(len: usize) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0u32..5, len)
}

/// Atoms on nodes (first `node_count - 1` weights, skipping the root) and arc
/// midpoints (the rest), normalized. All-zero weights fall back to the first leaf.
pub fn atoms_from(net: &RootedNetwork, w: &[u32]) -> HiderDistribution {
    let mut pts: Vec<Point> = net
        .nodes()
        .filter(|&x| x != net.root())
        .map(|x| net.node_point(x))
        .collect();
    pts.extend(net.arc_ixs().map(|a| net.midpoint(a)));
    let mut raw: Vec<u32> = w.iter().copied().chain(std::iter::repeat(0)).take(pts.len()).collect();
    if raw.iter().all(|&v| v == 0) {
        let leaf = net.leaves()[0];
        let i = pts.iter().position(|p| net.same_point(p, &net.node_point(leaf))).unwrap();
        raw[i] = 1;
    }
    let total: u32 = raw.iter().sum();
    HiderDistribution {
        atoms: pts
            .into_iter()
            .zip(raw)
            .filter(|(_, v)| *v > 0)
            .map(|(point, v)| Atom {
                point,
                mass: rat(v as i64, total as i64),
            })
            .collect(),
        uniforms: Vec::new(),
    }
}

/// Children of each node of a tree, as (arc, child).
pub fn children(net: &RootedNetwork) -> Vec<Vec<(ArcIx, NodeIx)>> {
    let mut out = vec![Vec::new(); net.node_count()];
    let mut seen = vec![false; net.node_count()];
    let mut stack = vec![net.root()];
    seen[net.root().0] = true;
    while let Some(x) = stack.pop() {
        for &a in net.incident(x) {
            let y = net.arc(a).other(x);
            if !seen[y.0] {
                seen[y.0] = true;
                out[x.0].push((a, y));
                stack.push(y);
            }
        }
    }
    out
}

/// Depth-first steps of the subtree entered through `arc` from `x`.
pub fn subtree_steps(net: &RootedNetwork, kids: &[Vec<(ArcIx, NodeIx)>], arc: ArcIx, x: NodeIx, out: &mut Vec<Step>) {
    out.push(Step::leaving(net, arc, x));
    let y = net.arc(arc).other(x);
    for &(a, _) in &kids[y.0] {
        subtree_steps(net, kids, a, y, out);
    }
}

/// Completes a valid prefix by always taking the lowest-index arc that touches the searched set.
pub fn complete(net: &RootedNetwork, mut steps: Vec<Step>) -> PureSearch {
    let mut used = vec![false; net.arc_count()];
    let mut covered = vec![false; net.node_count()];
    covered[net.root().0] = true;
    for s in &steps {
        used[s.arc.0] = true;
        covered[s.to(net).0] = true;
    }
    while steps.len() < net.arc_count() {
        let a = net
            .arc_ixs()
            .find(|&a| !used[a.0] && (covered[net.arc(a).u.0] || covered[net.arc(a).v.0]))
            .expect("connected");
        let from = if covered[net.arc(a).u.0] { net.arc(a).u } else { net.arc(a).v };
        let s = Step::leaving(net, a, from);
        used[a.0] = true;
        covered[s.to(net).0] = true;
        steps.push(s);
    }
    PureSearch::new(steps)
}

/// Total length of the subtree entered through `arc` from `x`, the arc included.
pub fn subtree_len(net: &RootedNetwork, kids: &[Vec<(ArcIx, NodeIx)>], arc: ArcIx, x: NodeIx) -> Rational {
    let mut steps = Vec::new();
    subtree_steps(net, kids, arc, x, &mut steps);
    steps.iter().map(|s| net.length(s.arc).clone()).fold(ratio::zero(), |a, b| a + b)
}

/// Order swap of two sibling subtrees: searching the denser one first is never
/// slower, and the difference is exactly `ν(A)λ(B) − ν(B)λ(A)`.
pub fn density_exchange(shape: &TreeShape, w: &[u32], pick: &[Index; 3]) -> Result<(), TestCaseError> {
    let net = shape.build();
    let nu = atoms_from(&net, w);
    let kids = children(&net);
    let forks: Vec<NodeIx> = net.nodes().filter(|x| kids[x.0].len() >= 2).collect();
    prop_assert!(!forks.is_empty(), "forked tree has a branch node");
    let x = forks[pick[0].index(forks.len())];
    let k = kids[x.0].len();
    let i = pick[1].index(k);
    let j = (i + 1 + pick[2].index(k - 1)) % k;
    let (arc_a, arc_b) = (kids[x.0][i].0, kids[x.0][j].0);

    // path from the root down to x
    let mut prefix = Vec::new();
    let mut cur = x;
    while cur != net.root() {
        let (p, a) = net
            .nodes()
            .find_map(|p| kids[p.0].iter().find(|(_, c)| *c == cur).map(|(a, _)| (p, *a)))
            .unwrap();
        prefix.push(Step::leaving(&net, a, p));
        cur = p;
    }
    prefix.reverse();

    let (mut sa, mut sb) = (Vec::new(), Vec::new());
    subtree_steps(&net, &kids, arc_a, x, &mut sa);
    subtree_steps(&net, &kids, arc_b, x, &mut sb);
    let ab = complete(&net, [prefix.clone(), sa.clone(), sb.clone()].concat());
    let ba = complete(&net, [prefix, sb.clone(), sa.clone()].concat());
    prop_assert!(search::is_valid(&net, &ab) && search::is_valid(&net, &ba));

    let mass = |steps: &[Step]| -> Rational {
        nu.atoms
            .iter()
            .filter(|at| match net.locate(&at.point) {
                expsearch::network::Location::Node(y) => y != x && steps.iter().any(|s| s.to(&net) == y),
                expsearch::network::Location::Interior { arc, .. } => steps.iter().any(|s| s.arc == arc),
            })
            .map(|at| at.mass.clone())
            .fold(ratio::zero(), |a, b| a + b)
    };
    let len = |steps: &[Step]| -> Rational { steps.iter().map(|s| net.length(s.arc).clone()).fold(ratio::zero(), |a, b| a + b) };
    let (ma, mb, la, lb) = (mass(&sa), mass(&sb), len(&sa), len(&sb));
    let (t_ab, t_ba) = (expected_time(&net, &ab, &nu), expected_time(&net, &ba, &nu));
    prop_assert_eq!(&t_ba - &t_ab, &ma * &lb - &mb * &la);
    if &ma / &la >= &mb / &lb {
        prop_assert!(t_ab <= t_ba, "denser first must not be slower");
    } else {
        prop_assert!(t_ba <= t_ab, "denser first must not be slower");
    }
    Ok(())
}

/// Every branch at every branch node carries the same mass per unit length under EBD.
pub fn ebd_equal_density(shape: &TreeShape) -> Result<(), TestCaseError> {
    let net = shape.build();
    let e = tree_game::ebd(&net).map_err(|err| TestCaseError::fail(err.to_string()))?;
    let kids = children(&net);
    let total: Rational = e.iter().map(|(_, m)| m.clone()).fold(ratio::zero(), |a, b| a + b);
    prop_assert_eq!(total, ratio::one());
    for x in net.nodes() {
        if kids[x.0].len() < 2 {
            continue;
        }
        let densities: Vec<Rational> = kids[x.0]
            .iter()
            .map(|&(a, _)| {
                let mut steps = Vec::new();
                subtree_steps(&net, &kids, a, x, &mut steps);
                let m: Rational = e
                    .iter()
                    .filter(|(leaf, _)| steps.iter().any(|s| s.to(&net) == *leaf))
                    .map(|(_, m)| m.clone())
                    .fold(ratio::zero(), |a, b| a + b);
                m / subtree_len(&net, &kids, a, x)
            })
            .collect();
        prop_assert!(densities.windows(2).all(|w| w[0] == w[1]), "unequal densities at {}: {:?}", net.node_name(x), densities);
    }
    Ok(())
}
