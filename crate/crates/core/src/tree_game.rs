//! The search game on trees: equal-branch-density hider, biased depth-first
//! searcher, and the Bayesian search problem.

use std::collections::{HashMap, VecDeque};

use num_traits::Zero;
use thiserror::Error;

use crate::network::{self, ArcIx, Location, NetworkError, NodeIx, Point, RootedNetwork};
use crate::ratio::{self, Rational};
use crate::search::{HiderDistribution, PureSearch, SearchError, Step, Strategy};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("network is not a tree ({arcs} arcs, {nodes} nodes)")]
    NotATree { arcs: usize, nodes: usize },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Search(#[from] SearchError),
}

/// Parent/child structure of a rooted tree, children in canonical arc order.
#[derive(Debug, Clone)]
pub struct TreeLayout {
    pub root: NodeIx,
    /// Root first, then breadth-first.
    pub order: Vec<NodeIx>,
    pub parent: Vec<Option<(NodeIx, ArcIx)>>,
    pub children: Vec<Vec<(ArcIx, NodeIx)>>,
    pub depth: Vec<Rational>,
    /// Total arc length strictly below each node.
    pub below: Vec<Rational>,
    /// Equal-branch-density mean leaf depth of the subtree at each node, measured from it.
    pub ebd_depth: Vec<Rational>,
}

impl TreeLayout {
    pub fn new(tree: &RootedNetwork) -> Result<Self, TreeError> {
        if !tree.is_tree() {
            return Err(TreeError::NotATree {
                arcs: tree.arc_count(),
                nodes: tree.node_count(),
            });
        }
        let n = tree.node_count();
        let root = tree.root();
        let mut parent = vec![None; n];
        let mut children = vec![Vec::new(); n];
        let mut depth = vec![ratio::zero(); n];
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        seen[root.0] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            order.push(x);
            for &a in tree.incident(x) {
                let y = tree.arc(a).other(x);
                if !seen[y.0] {
                    seen[y.0] = true;
                    parent[y.0] = Some((x, a));
                    depth[y.0] = &depth[x.0] + tree.length(a);
                    children[x.0].push((a, y));
                    queue.push_back(y);
                }
            }
        }
        let mut below = vec![ratio::zero(); n];
        let mut ebd_depth = vec![ratio::zero(); n];
        for &x in order.iter().rev() {
            let mut total = ratio::zero();
            let mut weighted = ratio::zero();
            for &(a, y) in &children[x.0] {
                let branch = tree.length(a) + &below[y.0];
                let d = tree.length(a) + &ebd_depth[y.0];
                weighted += &branch * d;
                total += branch;
            }
            if !total.is_zero() {
                ebd_depth[x.0] = weighted / &total;
            }
            below[x.0] = total;
        }
        Ok(Self {
            root,
            order,
            parent,
            children,
            depth,
            below,
            ebd_depth,
        })
    }

    /// Length of the branch that starts with arc `a` into child `y`.
    pub fn branch_len(&self, tree: &RootedNetwork, a: ArcIx, y: NodeIx) -> Rational {
        tree.length(a) + &self.below[y.0]
    }

    /// EBD mean depth of that branch, measured from its top node.
    pub fn branch_ebd_depth(&self, tree: &RootedNetwork, a: ArcIx, y: NodeIx) -> Rational {
        tree.length(a) + &self.ebd_depth[y.0]
    }

    pub fn leaves(&self) -> Vec<NodeIx> {
        self.order
            .iter()
            .copied()
            .filter(|&x| x != self.root && self.children[x.0].is_empty())
            .collect()
    }

    /// Path from the root to `x`: (node, index of the child taken) for each ancestor.
    pub fn path_to(&self, x: NodeIx) -> Vec<(NodeIx, usize)> {
        let mut path = Vec::new();
        let mut y = x;
        while let Some((p, a)) = self.parent[y.0] {
            let i = self.children[p.0].iter().position(|&(b, _)| b == a).unwrap();
            path.push((p, i));
            y = p;
        }
        path.reverse();
        path
    }

    /// Distance from the tree's root to `p`, and the deeper endpoint of its arc.
    pub fn point_depth(&self, tree: &RootedNetwork, p: &Point) -> Rational {
        match tree.locate(p) {
            Location::Node(x) => self.depth[x.0].clone(),
            Location::Interior { arc, offset } => {
                let a = tree.arc(arc);
                if self.depth[a.u.0] < self.depth[a.v.0] {
                    &self.depth[a.u.0] + offset
                } else {
                    &self.depth[a.v.0] + (&a.length - offset)
                }
            }
        }
    }
}

/// Leaf probabilities of the equal-branch-density distribution, leaves in breadth-first order.
pub fn ebd(tree: &RootedNetwork) -> Result<Vec<(NodeIx, Rational)>, TreeError> {
    let layout = TreeLayout::new(tree)?;
    Ok(ebd_from_layout(tree, &layout))
}

pub fn ebd_from_layout(tree: &RootedNetwork, layout: &TreeLayout) -> Vec<(NodeIx, Rational)> {
    let mut mass = vec![ratio::zero(); tree.node_count()];
    mass[layout.root.0] = ratio::one();
    for &x in &layout.order {
        if layout.children[x.0].is_empty() {
            continue;
        }
        let m = mass[x.0].clone();
        for &(a, y) in &layout.children[x.0] {
            mass[y.0] = &m * layout.branch_len(tree, a, y) / &layout.below[x.0];
        }
    }
    if layout.children[layout.root.0].is_empty() {
        return Vec::new();
    }
    layout.leaves().into_iter().map(|x| (x, mass[x.0].clone())).collect()
}

/// EBD-weighted mean root-to-leaf distance.
pub fn ebd_distance(tree: &RootedNetwork) -> Result<Rational, TreeError> {
    Ok(TreeLayout::new(tree)?.ebd_depth[tree.root().0].clone())
}

pub fn tree_value(tree: &RootedNetwork) -> Result<Rational, TreeError> {
    let d = ebd_distance(tree)?;
    Ok((tree.total_measure() + d) / ratio::int(2))
}

/// One binary decision of the depth-first rule at a branch node with `k` children:
/// search child `index` first with probability `prob`, otherwise the children after it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchDecision {
    pub node: NodeIx,
    pub index: usize,
    pub prob: Rational,
}

/// A randomized depth-first rule over a tree whose nodes may carry extra search
/// work that is done on arrival (used for blocks shrunk to a node).
#[derive(Debug, Clone)]
pub struct WeightedDfs {
    pub layout: TreeLayout,
    pub weights: Vec<Rational>,
    /// Per node: the chain of binary decisions over its children in canonical order.
    pub decisions: Vec<Vec<Rational>>,
    /// Per node and child index: expected time spent elsewhere below the node before
    /// the search enters that child.
    delay: Vec<Vec<Rational>>,
    /// Expected arrival time at each node, before its own weight is searched.
    arrive: Vec<Rational>,
}

impl WeightedDfs {
    /// Depth-first rule with the biased probabilities computed on `tree`, and extra
    /// search work `weights` at nodes.
    pub fn biased(tree: &RootedNetwork, layout: TreeLayout, weights: Vec<Rational>) -> Self {
        let n = tree.node_count();
        // total work (arcs plus node weights) strictly below each node
        let mut work_below = vec![ratio::zero(); n];
        for &x in layout.order.iter().rev() {
            let mut total = ratio::zero();
            for &(a, y) in &layout.children[x.0] {
                total += tree.length(a) + &weights[y.0] + &work_below[y.0];
            }
            work_below[x.0] = total;
        }
        let mut decisions = vec![Vec::new(); n];
        let mut delay = vec![Vec::new(); n];
        for &x in &layout.order {
            let kids = &layout.children[x.0];
            let k = kids.len();
            if k == 0 {
                continue;
            }
            let len: Vec<Rational> = kids.iter().map(|&(a, y)| layout.branch_len(tree, a, y)).collect();
            let dep: Vec<Rational> = kids.iter().map(|&(a, y)| layout.branch_ebd_depth(tree, a, y)).collect();
            let work: Vec<Rational> = kids
                .iter()
                .map(|&(a, y)| tree.length(a) + &weights[y.0] + &work_below[y.0])
                .collect();
            // suffix sums give the merged "rest" branch at each chain level
            let mut rest_len = vec![ratio::zero(); k + 1];
            let mut rest_dep_w = vec![ratio::zero(); k + 1];
            let mut rest_work = vec![ratio::zero(); k + 1];
            for j in (0..k).rev() {
                rest_len[j] = &rest_len[j + 1] + &len[j];
                rest_dep_w[j] = &rest_dep_w[j + 1] + &len[j] * &dep[j];
                rest_work[j] = &rest_work[j + 1] + &work[j];
            }
            let mut probs = Vec::with_capacity(k.saturating_sub(1));
            for j in 0..k - 1 {
                let total = &rest_len[j];
                let rest_d = &rest_dep_w[j + 1] / &rest_len[j + 1];
                probs.push(ratio::half() + (&dep[j] - rest_d) / (ratio::int(2) * total));
            }
            let mut d = Vec::with_capacity(k);
            let mut acc = ratio::zero();
            for i in 0..k {
                let mut di = acc.clone();
                if i < k - 1 {
                    di += (ratio::one() - &probs[i]) * &rest_work[i + 1];
                    acc += &probs[i] * &work[i];
                }
                d.push(di);
            }
            decisions[x.0] = probs;
            delay[x.0] = d;
        }
        let mut arrive = vec![ratio::zero(); n];
        for &x in &layout.order {
            for (i, &(a, y)) in layout.children[x.0].iter().enumerate() {
                arrive[y.0] = &arrive[x.0] + &weights[x.0] + &delay[x.0][i] + tree.length(a);
            }
        }
        Self {
            layout,
            weights,
            decisions,
            delay,
            arrive,
        }
    }

    /// Expected arrival time at node `x`, before its weight is searched.
    pub fn arrival(&self, x: NodeIx) -> &Rational {
        &self.arrive[x.0]
    }

    /// Expected time to a point on the tree itself.
    pub fn tree_point_time(&self, tree: &RootedNetwork, p: &Point) -> Rational {
        match tree.locate(p) {
            Location::Node(x) => self.arrive[x.0].clone(),
            Location::Interior { arc, offset } => {
                let a = tree.arc(arc);
                let (top, s) = if self.layout.parent[a.v.0].map(|(_, b)| b) == Some(arc) {
                    (a.u, offset)
                } else {
                    (a.v, &a.length - offset)
                };
                let i = self.layout.children[top.0]
                    .iter()
                    .position(|&(b, _)| b == arc)
                    .unwrap();
                &self.arrive[top.0] + &self.weights[top.0] + &self.delay[top.0][i] + s
            }
        }
    }

    /// Probability that each child branch of `x` is searched first.
    pub fn first_probs(&self, x: NodeIx) -> Vec<Rational> {
        let probs = &self.decisions[x.0];
        let k = self.layout.children[x.0].len();
        let mut out = Vec::with_capacity(k);
        let mut remaining = ratio::one();
        for p in probs {
            out.push(&remaining * p);
            remaining *= ratio::one() - p;
        }
        if k > 0 {
            out.push(remaining);
        }
        out
    }
}

/// The biased depth-first strategy of a tree.
#[derive(Debug, Clone)]
pub struct BiasedDfs {
    pub rule: WeightedDfs,
}

impl Strategy for BiasedDfs {
    fn time_to(&self, net: &RootedNetwork, p: &Point) -> Rational {
        self.rule.tree_point_time(net, p)
    }
}

pub fn biased_dfs(tree: &RootedNetwork) -> Result<BiasedDfs, TreeError> {
    let layout = TreeLayout::new(tree)?;
    let weights = vec![ratio::zero(); tree.node_count()];
    Ok(BiasedDfs {
        rule: WeightedDfs::biased(tree, layout, weights),
    })
}

#[derive(Debug, Clone)]
pub struct TreeGameSolution {
    pub ebd: Vec<(NodeIx, Rational)>,
    pub d: Rational,
    pub value: Rational,
    /// Per branch node: each outward arc with the probability it is searched first.
    pub branch_probs: Vec<(NodeIx, Vec<(ArcIx, Rational)>)>,
    pub strategy: BiasedDfs,
}

pub fn solve_tree(tree: &RootedNetwork) -> Result<TreeGameSolution, TreeError> {
    let strategy = biased_dfs(tree)?;
    let layout = &strategy.rule.layout;
    let ebd = ebd_from_layout(tree, layout);
    let d = layout.ebd_depth[layout.root.0].clone();
    let value = (tree.total_measure() + &d) / ratio::int(2);
    let branch_probs = layout
        .order
        .iter()
        .filter(|x| layout.children[x.0].len() >= 2)
        .map(|&x| {
            let firsts = strategy.rule.first_probs(x);
            let arcs = layout.children[x.0].iter().map(|&(a, _)| a);
            (x, arcs.zip(firsts).collect())
        })
        .collect();
    Ok(TreeGameSolution {
        ebd,
        d,
        value,
        branch_probs,
        strategy,
    })
}

/// An optimal search against a known hider distribution on a tree.
#[derive(Debug, Clone)]
pub struct BayesSolution {
    /// The tree refined so that interior atoms and segment ends are nodes.
    pub network: RootedNetwork,
    pub refinement: network::Refinement,
    pub search: PureSearch,
    pub value: Rational,
}

/// Minimizes expected search time on a tree by the ratio rule under tree precedence:
/// the unscheduled group of maximal mass-to-length ratio is merged behind its parent
/// group until everything hangs off the root.
pub fn bayes_tree_search(tree: &RootedNetwork, nu: &HiderDistribution) -> Result<BayesSolution, TreeError> {
    TreeLayout::new(tree)?;
    nu.validate(tree)?;
    let mut cuts: HashMap<ArcIx, Vec<Rational>> = HashMap::new();
    for a in &nu.atoms {
        if let Location::Interior { arc, offset } = tree.locate(&a.point) {
            cuts.entry(arc).or_default().push(offset);
        }
    }
    for u in &nu.uniforms {
        for o in [&u.from, &u.to] {
            if !o.is_zero() && o != tree.length(u.arc) {
                cuts.entry(u.arc).or_default().push(o.clone());
            }
        }
    }
    let refinement = network::refine(tree, &cuts)?;
    let net = refinement.network.clone();
    let fine = nu.refine(&refinement);
    let layout = TreeLayout::new(&net)?;

    // job per non-root node: the arc into it, weight = mass found on that arc
    let n = net.node_count();
    let mut weight = vec![ratio::zero(); n];
    let mut constant = ratio::zero();
    let arc_child = |arc: ArcIx| {
        let a = net.arc(arc);
        if layout.parent[a.v.0].map(|(_, b)| b) == Some(arc) {
            a.v
        } else {
            a.u
        }
    };
    for (loc, m) in fine.merged_atoms(&net) {
        if let Location::Node(x) = loc {
            if x != layout.root {
                weight[x.0] += m;
            }
        }
    }
    for u in &fine.uniforms {
        let y = arc_child(u.arc);
        weight[y.0] += &u.mass;
        // a segment covering its whole piece is met, on average, half a piece early
        constant -= &u.mass * (&u.to - &u.from) / ratio::int(2);
    }
    let proc: Vec<Rational> = (0..n)
        .map(|x| match layout.parent[x] {
            Some((_, a)) => net.length(a).clone(),
            None => ratio::zero(),
        })
        .collect();

    // groups: head node -> (sequence, weight, length)
    let mut group_of: Vec<usize> = (0..n).collect();
    let mut seq: Vec<Vec<usize>> = (0..n).map(|x| vec![x]).collect();
    let mut gw = weight.clone();
    let mut gp = proc.clone();
    let mut alive: Vec<bool> = vec![true; n];
    alive[layout.root.0] = false;
    fn find(g: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while g[r] != r {
            r = g[r];
        }
        let mut y = x;
        while g[y] != r {
            let next = g[y];
            g[y] = r;
            y = next;
        }
        r
    }
    // candidate order for ties: canonical arc order of the group head
    let head_key = |x: usize| layout.parent[x].map(|(_, a)| a.0).unwrap_or(usize::MAX);
    for _ in 1..n {
        let mut best: Option<usize> = None;
        for x in 0..n {
            if !alive[x] {
                continue;
            }
            best = match best {
                None => Some(x),
                Some(b) => {
                    let lhs = &gw[x] * &gp[b];
                    let rhs = &gw[b] * &gp[x];
                    if lhs > rhs || (lhs == rhs && head_key(x) < head_key(b)) {
                        Some(x)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        let g = best.expect("a non-root group remains");
        let parent_node = layout.parent[g].unwrap().0 .0;
        let p = find(&mut group_of, parent_node);
        let moved = std::mem::take(&mut seq[g]);
        seq[p].extend(moved);
        let (w, l) = (gw[g].clone(), gp[g].clone());
        gw[p] += w;
        gp[p] += l;
        group_of[g] = p;
        alive[g] = false;
    }
    let order = &seq[layout.root.0];
    let mut steps = Vec::with_capacity(n.saturating_sub(1));
    let mut t = ratio::zero();
    let mut value = constant;
    for &x in order.iter().skip(1) {
        let (p, a) = layout.parent[x].unwrap();
        steps.push(Step::leaving(&net, a, p));
        t += &proc[x];
        value += &weight[x] * &t;
    }
    Ok(BayesSolution {
        network: net,
        refinement,
        search: PureSearch::new(steps),
        value,
    })
}
