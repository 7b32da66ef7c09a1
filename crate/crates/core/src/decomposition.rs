//! Bridges, blocks and the bridge tree.

use std::collections::HashSet;

use num_traits::Zero;

use crate::network::{Arc, ArcIx, NodeIx, Point, RootedNetwork};
use crate::ratio::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    /// Arcs in canonical order.
    pub arcs: Vec<ArcIx>,
    /// Nodes in order of first appearance among `arcs`.
    pub nodes: Vec<NodeIx>,
    pub length: Rational,
    /// The block node nearest the root.
    pub entry: NodeIx,
    /// The bridge leading into the block, `None` for a root block.
    pub parent_bridge: Option<ArcIx>,
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub bridges: Vec<ArcIx>,
    pub blocks: Vec<Block>,
    /// Shrinks every block to one node; arcs are the bridges with the same ids and lengths.
    pub bridge_tree: RootedNetwork,
    pub mu1: Rational,
    pub mu2: Rational,
    is_bridge: Vec<bool>,
    block_of_arc: Vec<Option<usize>>,
    block_of_node: Vec<Option<usize>>,
    tree_node: Vec<NodeIx>,
    block_tree_node: Vec<NodeIx>,
    /// Distance from the root in the bridge tree, per original node.
    node_height: Vec<Rational>,
    pi: Rational,
    mu: Rational,
}

/// Marks every bridge with a single iterative low-link traversal.
pub fn find_bridges(net: &RootedNetwork) -> Vec<bool> {
    let n = net.node_count();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut is_bridge = vec![false; net.arc_count()];
    let mut time = 0;
    // (node, arc used to enter, next incident index)
    let mut stack: Vec<(NodeIx, Option<ArcIx>, usize)> = Vec::new();
    for start in net.nodes() {
        if disc[start.0] != usize::MAX {
            continue;
        }
        disc[start.0] = time;
        low[start.0] = time;
        time += 1;
        stack.push((start, None, 0));
        while let Some(&mut (x, via, ref mut next)) = stack.last_mut() {
            let inc = net.incident(x);
            if *next < inc.len() {
                let a = inc[*next];
                *next += 1;
                if Some(a) == via || net.arc(a).is_loop() {
                    continue;
                }
                let y = net.arc(a).other(x);
                if disc[y.0] == usize::MAX {
                    disc[y.0] = time;
                    low[y.0] = time;
                    time += 1;
                    stack.push((y, Some(a), 0));
                } else {
                    low[x.0] = low[x.0].min(disc[y.0]);
                }
            } else {
                stack.pop();
                if let (Some(a), Some(&(parent, _, _))) = (via, stack.last()) {
                    low[parent.0] = low[parent.0].min(low[x.0]);
                    if low[x.0] > disc[parent.0] {
                        is_bridge[a.0] = true;
                    }
                }
            }
        }
    }
    is_bridge
}

pub fn decompose(net: &RootedNetwork) -> Decomposition {
    let is_bridge = find_bridges(net);
    let mut block_of_arc = vec![None; net.arc_count()];
    let mut block_of_node = vec![None; net.node_count()];
    let mut members: Vec<Vec<ArcIx>> = Vec::new();
    for a in net.arc_ixs() {
        if is_bridge[a.0] || block_of_arc[a.0].is_some() {
            continue;
        }
        let k = members.len();
        let mut arcs = Vec::new();
        let mut stack = vec![net.arc(a).u];
        block_of_node[net.arc(a).u.0] = Some(k);
        while let Some(x) = stack.pop() {
            for &b in net.incident(x) {
                if is_bridge[b.0] || block_of_arc[b.0].is_some() {
                    continue;
                }
                block_of_arc[b.0] = Some(k);
                arcs.push(b);
                let y = net.arc(b).other(x);
                if block_of_node[y.0].is_none() {
                    block_of_node[y.0] = Some(k);
                    stack.push(y);
                }
            }
        }
        arcs.sort();
        members.push(arcs);
    }

    // bridge tree nodes: original nodes outside blocks keep their names, blocks get fresh ones
    let taken: HashSet<&str> = net.node_names().iter().map(String::as_str).collect();
    let mut names = Vec::new();
    let mut tree_node = vec![NodeIx(0); net.node_count()];
    for x in net.nodes() {
        if block_of_node[x.0].is_none() {
            tree_node[x.0] = NodeIx(names.len());
            names.push(net.node_name(x).to_string());
        }
    }
    let mut block_tree_node = Vec::with_capacity(members.len());
    for k in 0..members.len() {
        let mut name = format!("block{k}");
        while taken.contains(name.as_str()) {
            name.push('\'');
        }
        block_tree_node.push(NodeIx(names.len()));
        names.push(name);
    }
    for x in net.nodes() {
        if let Some(k) = block_of_node[x.0] {
            tree_node[x.0] = block_tree_node[k];
        }
    }
    let tree_arcs: Vec<Arc> = net
        .arc_ixs()
        .filter(|a| is_bridge[a.0])
        .map(|a| {
            let arc = net.arc(a);
            Arc {
                id: arc.id.clone(),
                u: tree_node[arc.u.0],
                v: tree_node[arc.v.0],
                length: arc.length.clone(),
            }
        })
        .collect();
    let bridge_tree = RootedNetwork::from_parts(names, tree_arcs, tree_node[net.root().0])
        .expect("bridge tree of a connected network is connected");

    // heights and entries by a root-first sweep over the tree
    let mut tree_height = vec![None::<Rational>; bridge_tree.node_count()];
    let mut tree_parent_arc = vec![None::<ArcIx>; bridge_tree.node_count()];
    tree_height[bridge_tree.root().0] = Some(ratio::zero());
    let mut queue = std::collections::VecDeque::from([bridge_tree.root()]);
    while let Some(t) = queue.pop_front() {
        let ht = tree_height[t.0].clone().unwrap();
        for &a in bridge_tree.incident(t) {
            let s = bridge_tree.arc(a).other(t);
            if tree_height[s.0].is_none() {
                tree_height[s.0] = Some(&ht + bridge_tree.length(a));
                tree_parent_arc[s.0] = Some(a);
                queue.push_back(s);
            }
        }
    }
    let node_height: Vec<Rational> = net
        .nodes()
        .map(|x| tree_height[tree_node[x.0].0].clone().unwrap())
        .collect();

    let mut blocks = Vec::with_capacity(members.len());
    for (k, arcs) in members.into_iter().enumerate() {
        let mut nodes = Vec::new();
        for &a in &arcs {
            for x in [net.arc(a).u, net.arc(a).v] {
                if !nodes.contains(&x) {
                    nodes.push(x);
                }
            }
        }
        // tree arcs share ids and order with the original bridges
        let parent_bridge = tree_parent_arc[block_tree_node[k].0]
            .map(|ta| net.arc_by_id(&bridge_tree.arc(ta).id).unwrap());
        let entry = match parent_bridge {
            None => net.root(),
            Some(b) => {
                let arc = net.arc(b);
                if block_of_node[arc.u.0] == Some(k) {
                    arc.u
                } else {
                    arc.v
                }
            }
        };
        let length = net.measure_of(&arcs);
        blocks.push(Block {
            arcs,
            nodes,
            length,
            entry,
            parent_bridge,
        });
    }

    let bridges: Vec<ArcIx> = net.arc_ixs().filter(|a| is_bridge[a.0]).collect();
    let mu1 = net.measure_of(&bridges);
    let mu = net.total_measure();
    let mu2 = &mu - &mu1;
    let pi = node_height.iter().max().cloned().unwrap_or_else(ratio::zero);
    Decomposition {
        bridges,
        blocks,
        bridge_tree,
        mu1,
        mu2,
        is_bridge,
        block_of_arc,
        block_of_node,
        tree_node,
        block_tree_node,
        node_height,
        pi,
        mu,
    }
}

impl Decomposition {
    pub fn is_bridge(&self, a: ArcIx) -> bool {
        self.is_bridge[a.0]
    }

    pub fn block_of_arc(&self, a: ArcIx) -> Option<usize> {
        self.block_of_arc[a.0]
    }

    pub fn block_of_node(&self, x: NodeIx) -> Option<usize> {
        self.block_of_node[x.0]
    }

    /// The bridge-tree node an original node maps to.
    pub fn tree_node(&self, x: NodeIx) -> NodeIx {
        self.tree_node[x.0]
    }

    pub fn block_tree_node(&self, k: usize) -> NodeIx {
        self.block_tree_node[k]
    }

    /// Inverse of [`Self::block_tree_node`].
    pub fn block_at_tree_node(&self, t: NodeIx) -> Option<usize> {
        self.block_tree_node.iter().position(|&b| b == t)
    }

    /// The original bridge arc carrying the same id as a bridge-tree arc.
    pub fn bridge_of_tree_arc(&self, net: &RootedNetwork, ta: ArcIx) -> ArcIx {
        net.arc_by_id(&self.bridge_tree.arc(ta).id)
            .expect("bridge tree arcs are original bridges")
    }

    pub fn node_height(&self, x: NodeIx) -> &Rational {
        &self.node_height[x.0]
    }

    /// Leaf nodes of the bridge part: original nodes that are bridge-tree leaves.
    pub fn bridge_leaves(&self, net: &RootedNetwork) -> Vec<NodeIx> {
        net.leaves()
            .into_iter()
            .filter(|&x| self.block_of_node[x.0].is_none())
            .collect()
    }

    pub fn mu(&self) -> &Rational {
        &self.mu
    }
}

/// Distance from the root to the image of `p` in the bridge tree.
pub fn height(net: &RootedNetwork, dec: &Decomposition, p: &Point) -> Rational {
    let arc = net.arc(p.arc);
    if !dec.is_bridge(p.arc) {
        return dec.node_height(arc.u).clone();
    }
    let (hu, hv) = (dec.node_height(arc.u), dec.node_height(arc.v));
    if hu < hv {
        hu + &p.offset
    } else {
        hv + (&arc.length - &p.offset)
    }
}

pub fn network_height(dec: &Decomposition) -> Rational {
    dec.pi.clone()
}

pub fn bridge_ratio(dec: &Decomposition) -> Rational {
    if dec.mu.is_zero() {
        return ratio::zero();
    }
    &dec.mu1 / &dec.mu
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::network::NetworkBuilder;
    use crate::ratio::{int, rat};

    fn ids(net: &RootedNetwork, arcs: &[ArcIx]) -> Vec<String> {
        let mut v: Vec<String> = arcs.iter().map(|&a| net.arc(a).id.clone()).collect();
        v.sort();
        v
    }

    #[test]
    fn qbar_has_four_bridges_and_one_block() {
        let net = fixtures::qbar();
        let dec = decompose(&net);
        assert_eq!(ids(&net, &dec.bridges), ["a", "b", "c", "d"]);
        assert_eq!(dec.blocks.len(), 1);
        assert_eq!(ids(&net, &dec.blocks[0].arcs), ["w", "x", "y", "z"]);
        assert_eq!(dec.mu1, int(9));
        assert_eq!(dec.mu2, int(6));
        assert_eq!(bridge_ratio(&dec), rat(3, 5));
        assert_eq!(network_height(&dec), int(5));
        let c = net.node("C").unwrap();
        assert_eq!(height(&net, &dec, &net.node_point(c)), int(5));
        let x = net.arc_by_id("x").unwrap();
        assert_eq!(height(&net, &dec, &Point::new(x, rat(1, 3))), int(2));
        assert_eq!(height(&net, &dec, &net.node_point(net.root())), int(0));
        assert_eq!(net.node_name(dec.blocks[0].entry), "E");
        assert_eq!(dec.bridge_tree.arc_count(), 4);
        assert_eq!(dec.bridge_tree.total_measure(), int(9));
    }

    #[test]
    fn trees_are_all_bridges() {
        let net = NetworkBuilder::new("O")
            .arc("a", "O", "A", int(1))
            .arc("b", "A", "B", int(2))
            .arc("c", "A", "C", int(1))
            .build()
            .unwrap();
        let dec = decompose(&net);
        assert_eq!(dec.bridges.len(), 3);
        assert!(dec.blocks.is_empty());
        assert_eq!(bridge_ratio(&dec), int(1));
        let b = net.arc_by_id("b").unwrap();
        assert_eq!(height(&net, &dec, &Point::new(b, rat(1, 2))), rat(3, 2));
    }

    #[test]
    fn circle_spike_and_loops() {
        let net = fixtures::circle_spike(&rat(1, 2)).unwrap();
        let dec = decompose(&net);
        assert_eq!(ids(&net, &dec.bridges), ["spike"]);
        assert_eq!(dec.blocks.len(), 1);
        assert_eq!(network_height(&dec), int(1));

        let circle = fixtures::circle();
        let dec = decompose(&circle);
        assert!(dec.bridges.is_empty());
        assert_eq!(dec.blocks.len(), 1);
        assert_eq!(network_height(&dec), int(0));
        assert_eq!(bridge_ratio(&dec), int(0));
    }

    #[test]
    fn parallel_arcs_are_not_bridges() {
        let net = NetworkBuilder::new("O")
            .arc("p", "O", "A", int(1))
            .arc("q", "O", "A", int(1))
            .arc("t", "A", "B", int(1))
            .build()
            .unwrap();
        let dec = decompose(&net);
        assert_eq!(ids(&net, &dec.bridges), ["t"]);
        assert_eq!(dec.blocks[0].entry, net.root());
    }
}
