//! The bridge-optimal strategy: biased depth-first on the bridge tree, with each
//! block searched completely the first time it is reached.

use crate::block_strategy::{reversible_block_search, BlockError};
use crate::decomposition::{self, Decomposition};
use crate::network::{Location, NodeIx, Point, RootedNetwork};
use crate::ratio::{self, Rational};
use crate::search::{PureSearch, Strategy, TimeTable};
use crate::tree_game::{self, TreeLayout, WeightedDfs};

#[derive(Debug, Clone)]
pub struct GammaStrategy {
    pub tree: RootedNetwork,
    /// Biased depth-first rule on the bridge tree; block lengths are node weights.
    pub tree_rule: WeightedDfs,
    /// Per block: the search used from its entry node. A block is only ever entered
    /// at its entry, so one search per block suffices.
    pub block_entries: Vec<PureSearch>,
    tables: Vec<TimeTable>,
    dec: Decomposition,
}

pub fn build_gamma(net: &RootedNetwork, dec: &Decomposition) -> Result<GammaStrategy, BlockError> {
    let tree = dec.bridge_tree.clone();
    let layout = TreeLayout::new(&tree).expect("bridge tree is a tree");
    let mut weights = vec![ratio::zero(); tree.node_count()];
    let mut block_entries = Vec::with_capacity(dec.blocks.len());
    let mut tables = Vec::with_capacity(dec.blocks.len());
    for (k, b) in dec.blocks.iter().enumerate() {
        weights[dec.block_tree_node(k).0] = b.length.clone();
        let s = reversible_block_search(net, &b.arcs, b.entry)?;
        tables.push(block_table(net, &s, b.entry));
        block_entries.push(s);
    }
    let tree_rule = WeightedDfs::biased(&tree, layout, weights);
    Ok(GammaStrategy {
        tree,
        tree_rule,
        block_entries,
        tables,
        dec: dec.clone(),
    })
}

/// Time table of a block search started at `entry` rather than the network root.
fn block_table(net: &RootedNetwork, s: &PureSearch, entry: NodeIx) -> TimeTable {
    TimeTable::from_start(net, s, entry)
}

impl GammaStrategy {
    fn tree_point(&self, net: &RootedNetwork, p: &Point) -> Point {
        let id = &net.arc(p.arc).id;
        let ta = self.tree.arc_by_id(id).expect("bridge is a tree arc");
        Point::new(ta, p.offset.clone())
    }

    /// Least upper bound of the expected time over all points of the network.
    pub fn worst_case(&self, net: &RootedNetwork) -> Rational {
        let mut worst = ratio::zero();
        for x in self.dec.bridge_leaves(net) {
            worst = worst.max(self.time_to(net, &net.node_point(x)));
        }
        for (k, b) in self.dec.blocks.iter().enumerate() {
            // the last point of a block is met when its search ends
            let arrive = self.tree_rule.arrival(self.dec.block_tree_node(k));
            worst = worst.max(arrive + &b.length);
        }
        worst
    }
}

impl Strategy for GammaStrategy {
    fn time_to(&self, net: &RootedNetwork, p: &Point) -> Rational {
        let block = match net.locate(p) {
            Location::Node(x) => self.dec.block_of_node(x),
            Location::Interior { arc, .. } => self.dec.block_of_arc(arc),
        };
        match block {
            Some(k) => {
                let arrive = self.tree_rule.arrival(self.dec.block_tree_node(k));
                arrive + self.tables[k].time(net, p)
            }
            None => {
                let tp = match net.locate(p) {
                    Location::Node(x) => self.tree.node_point(self.dec.tree_node(x)),
                    Location::Interior { .. } => self.tree_point(net, p),
                };
                self.tree_rule.tree_point_time(&self.tree, &tp)
            }
        }
    }
}

/// `μ2 + (μ1 + D(Q^t))/2`.
pub fn gamma_upper_bound(dec: &Decomposition) -> Rational {
    let d = tree_game::ebd_distance(&dec.bridge_tree).expect("bridge tree is a tree");
    &dec.mu2 + (&dec.mu1 + d) / ratio::int(2)
}

/// `2/(1+r²)`.
pub fn gamma_factor(dec: &Decomposition) -> Rational {
    let r = decomposition::bridge_ratio(dec);
    ratio::int(2) / (ratio::one() + &r * &r)
}
