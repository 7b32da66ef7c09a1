//! Lower bounds on the game value, the networks used to derive them, and
//! approximation-factor curves.

use thiserror::Error;

use crate::block_strategy::{self, BlockError};
use crate::bridge_strategy;
use crate::decomposition::{self, Decomposition};
use crate::network::{Arc, NodeIx, RootedNetwork};
use crate::ratio::{self, Rational};
use crate::search::{Atom, HiderDistribution, UniformSegment};
use crate::tree_game::{self, TreeLayout};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("ratio {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error("curve step {0} must be positive")]
    BadStep(f64),
    #[error(transparent)]
    Block(#[from] BlockError),
}

/// `(μ² + π²)/(2μ)`.
pub fn pruning_bound(mu: &Rational, pi: &Rational) -> Rational {
    (mu * mu + pi * pi) / (ratio::int(2) * mu)
}

pub fn uniform_bound(mu: &Rational) -> Rational {
    mu / ratio::int(2)
}

/// Blocks shrunk to loops at the root: the bridge tree with every block arc
/// reattached at its root as a loop of the same length.
pub fn build_q_prime(net: &RootedNetwork, dec: &Decomposition) -> RootedNetwork {
    let tree = &dec.bridge_tree;
    let mut arcs: Vec<Arc> = tree.arcs().to_vec();
    for b in &dec.blocks {
        for &a in &b.arcs {
            let arc = net.arc(a);
            arcs.push(Arc {
                id: arc.id.clone(),
                u: tree.root(),
                v: tree.root(),
                length: arc.length.clone(),
            });
        }
    }
    // keep the original arc order
    arcs.sort_by_key(|a| net.arc_by_id(&a.id).map(|x| x.0));
    RootedNetwork::from_parts(tree.node_names().to_vec(), arcs, tree.root())
        .expect("shrinking blocks keeps the network connected")
}

/// The first deepest bridge-tree leaf, in breadth-first order.
fn deepest_leaf(layout: &TreeLayout) -> Option<NodeIx> {
    let leaves = layout.leaves();
    let best = leaves.iter().map(|x| &layout.depth[x.0]).max()?;
    leaves.into_iter().find(|x| &layout.depth[x.0] == best)
}

/// `Q′` with the path to the deepest leaf left bare and every subtree hanging off
/// it moved to the root.
pub fn build_q_double_prime(net: &RootedNetwork, dec: &Decomposition) -> RootedNetwork {
    let qp = build_q_prime(net, dec);
    let tree = &dec.bridge_tree;
    let layout = TreeLayout::new(tree).expect("bridge tree is a tree");
    let Some(target) = deepest_leaf(&layout) else {
        return qp;
    };
    let mut on_path = vec![false; tree.node_count()];
    let mut path_arcs = Vec::new();
    let mut y = target;
    while let Some((p, a)) = layout.parent[y.0] {
        on_path[y.0] = true;
        path_arcs.push(tree.arc(a).id.clone());
        y = p;
    }
    let root = qp.root();
    let mut arcs: Vec<Arc> = qp.arcs().to_vec();
    for arc in arcs.iter_mut() {
        if path_arcs.contains(&arc.id) || arc.is_loop() {
            continue;
        }
        // an arc hanging off an inner path node: move its upper end to the root
        let upper = if layout.depth[arc.u.0] <= layout.depth[arc.v.0] {
            &mut arc.u
        } else {
            &mut arc.v
        };
        if on_path[upper.0] {
            *upper = root;
        }
    }
    RootedNetwork::from_parts(qp.node_names().to_vec(), arcs, root)
        .expect("pruning keeps the network connected")
}

/// Uniform density `1/μ` on block arcs; the bridge mass sits on the bridge-tree
/// leaves in equal-branch-density proportions. A leaf that is a block puts its
/// share at the block's entry node.
pub fn pushed_uniform(net: &RootedNetwork, dec: &Decomposition) -> HiderDistribution {
    let mu = net.total_measure();
    let mut nu = HiderDistribution::default();
    let share = &dec.mu1 / &mu;
    let e = tree_game::ebd(&dec.bridge_tree).expect("bridge tree is a tree");
    for (leaf, m) in e {
        let x = match dec.block_at_tree_node(leaf) {
            Some(k) => dec.blocks[k].entry,
            None => net
                .node(dec.bridge_tree.node_name(leaf))
                .expect("bridge-tree leaves are original nodes"),
        };
        nu.atoms.push(Atom {
            point: net.node_point(x),
            mass: &share * m,
        });
    }
    for b in &dec.blocks {
        for &a in &b.arcs {
            nu.uniforms.push(UniformSegment {
                arc: a,
                from: ratio::zero(),
                to: net.length(a).clone(),
                mass: net.length(a) / &mu,
            });
        }
    }
    nu
}

/// `(μ + (μ1/μ)·D(Q^t))/2`.
pub fn pushed_uniform_bound(net: &RootedNetwork, dec: &Decomposition) -> Rational {
    let mu = net.total_measure();
    let d = tree_game::ebd_distance(&dec.bridge_tree).expect("bridge tree is a tree");
    (&mu + &dec.mu1 / &mu * d) / ratio::int(2)
}

pub fn sqrt2_f64() -> f64 {
    std::f64::consts::SQRT_2
}

/// `(1+√2)/2`, the worst factor of the better of the two strategies.
pub fn golden_factor() -> f64 {
    (1.0 + sqrt2_f64()) / 2.0
}

/// Where `f` peaks: `√2 − 1`.
pub fn breakpoint_low() -> f64 {
    sqrt2_f64() - 1.0
}

/// Where `g` falls to `(1+√2)/2`: `√((3−√2)/(1+√2))`.
pub fn breakpoint_high() -> f64 {
    ((3.0 - sqrt2_f64()) / (1.0 + sqrt2_f64())).sqrt()
}

fn check(r: f64) -> Result<f64, BoundsError> {
    if (0.0..=1.0).contains(&r) {
        Ok(r)
    } else {
        Err(BoundsError::OutOfRange(r))
    }
}

pub fn factor_f(r: f64) -> Result<f64, BoundsError> {
    let r = check(r)?;
    Ok((1.0 + r) / (1.0 + r * r))
}

pub fn factor_g(r: f64) -> Result<f64, BoundsError> {
    let r = check(r)?;
    Ok(2.0 / (1.0 + r * r))
}

/// Best guarantee from choosing between the two strategies given `r`.
pub fn combined_factor(r: f64) -> Result<f64, BoundsError> {
    let r = check(r)?;
    Ok(if r <= breakpoint_low() {
        factor_f(r)?
    } else if r <= breakpoint_high() {
        golden_factor()
    } else {
        factor_g(r)?
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub r: f64,
    pub f: f64,
    pub g: f64,
    pub combined: f64,
}

/// Rows at multiples of `step` on `[0, 1]` plus both breakpoints, sorted by `r`.
pub fn bound_curve(step: f64) -> Result<Vec<CurveRow>, BoundsError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(BoundsError::BadStep(step));
    }
    let mut rs = Vec::new();
    let mut k = 0u64;
    loop {
        let r = k as f64 * step;
        if r > 1.0 + 1e-12 {
            break;
        }
        rs.push(r.min(1.0));
        k += 1;
    }
    rs.push(breakpoint_low());
    rs.push(breakpoint_high());
    rs.sort_by(f64::total_cmp);
    rs.into_iter()
        .map(|r| {
            Ok(CurveRow {
                r,
                f: factor_f(r)?,
                g: factor_g(r)?,
                combined: combined_factor(r)?,
            })
        })
        .collect()
}

/// Guarantee for β from the sharper height ratio `π/μ`.
pub fn beta_factor(net: &RootedNetwork, dec: &Decomposition) -> f64 {
    let h = ratio::to_f64(&(decomposition::network_height(dec) / net.total_measure()));
    factor_f(h.clamp(0.0, 1.0)).unwrap().min(golden_factor())
}

#[derive(Debug, Clone)]
pub struct BoundsReport {
    pub mu: Rational,
    pub mu1: Rational,
    pub mu2: Rational,
    pub uniform_lb: Rational,
    pub pruning_lb: Rational,
    pub pushed_uniform_lb: Rational,
    pub beta_ub: Rational,
    pub gamma_ub: Rational,
    pub gamma_worst: Rational,
    pub r: Rational,
    pub pi: Rational,
    pub factor_beta: f64,
    pub factor_gamma: Rational,
    pub combined_factor: f64,
}

impl BoundsReport {
    pub fn best_lower(&self) -> Rational {
        [&self.uniform_lb, &self.pruning_lb, &self.pushed_uniform_lb]
            .into_iter()
            .max()
            .cloned()
            .unwrap()
    }

    pub fn best_upper(&self) -> Rational {
        std::cmp::min(&self.beta_ub, &self.gamma_worst).clone()
    }
}

pub fn report(net: &RootedNetwork, dec: &Decomposition) -> Result<BoundsReport, BoundsError> {
    let mu = net.total_measure();
    let pi = decomposition::network_height(dec);
    let r = decomposition::bridge_ratio(dec);
    let gamma = bridge_strategy::build_gamma(net, dec)?;
    Ok(BoundsReport {
        uniform_lb: uniform_bound(&mu),
        pruning_lb: pruning_bound(&mu, &pi),
        pushed_uniform_lb: pushed_uniform_bound(net, dec),
        beta_ub: block_strategy::beta_max_time(net, dec)?,
        gamma_ub: bridge_strategy::gamma_upper_bound(dec),
        gamma_worst: gamma.worst_case(net),
        factor_beta: beta_factor(net, dec),
        factor_gamma: bridge_strategy::gamma_factor(dec),
        combined_factor: combined_factor(ratio::to_f64(&r).clamp(0.0, 1.0))?,
        mu1: dec.mu1.clone(),
        mu2: dec.mu2.clone(),
        mu,
        r,
        pi,
    })
}
