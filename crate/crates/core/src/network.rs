//! Rooted metric multigraphs and points on them.
//!
//! A [`RootedNetwork`] is always valid: connected, positive lengths, unique ids,
//! root present. Raw input goes through [`NetworkSpec`] and [`validate`].

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ratio::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeIx(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArcIx(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("network is disconnected: node `{node}` is unreachable from root")]
    Disconnected { node: String },
    #[error("arc `{arc}` has non-positive length {length}")]
    NonpositiveLength { arc: String, length: Rational },
    #[error("root `{root}` is not a declared node")]
    MissingRoot { root: String },
    #[error("arc id `{arc}` is used more than once")]
    DuplicateArcId { arc: String },
    #[error("node id `{node}` is declared more than once")]
    DuplicateNodeId { node: String },
    #[error("arc `{arc}` references undeclared node `{node}`")]
    UnknownNode { arc: String, node: String },
    #[error("unknown arc `{arc}`")]
    UnknownArc { arc: String },
    #[error("offset {offset} is outside arc `{arc}` of length {length}")]
    OffsetOutOfRange {
        arc: String,
        offset: Rational,
        length: Rational,
    },
    #[error("point at offset {offset} of arc `{arc}` is a node")]
    PointIsNode { arc: String, offset: Rational },
    #[error("invalid length `{0}`")]
    BadLength(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc {
    pub id: String,
    pub u: NodeIx,
    pub v: NodeIx,
    pub length: Rational,
}

impl Arc {
    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }

    /// The endpoint opposite `x`. For loops this is `x` itself.
    pub fn other(&self, x: NodeIx) -> NodeIx {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }

    pub fn touches(&self, x: NodeIx) -> bool {
        self.u == x || self.v == x
    }
}

/// A point on an arc, `offset` measured from the arc's `u` endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Point {
    pub arc: ArcIx,
    pub offset: Rational,
}

impl Point {
    pub fn new(arc: ArcIx, offset: Rational) -> Self {
        Self { arc, offset }
    }
}

/// A point resolved against the node identification at arc ends.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Location {
    Node(NodeIx),
    Interior { arc: ArcIx, offset: Rational },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedNetwork {
    nodes: Vec<String>,
    arcs: Vec<Arc>,
    root: NodeIx,
    node_index: HashMap<String, NodeIx>,
    arc_index: HashMap<String, ArcIx>,
    incidence: Vec<Vec<ArcIx>>,
}

/// An exact number as written in input files: a JSON number or a `"p/q"` string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExactNumber {
    Number(serde_json::Number),
    Text(String),
}

impl ExactNumber {
    pub fn to_rational(&self) -> Result<Rational, NetworkError> {
        let text = match self {
            ExactNumber::Number(n) => n.to_string(),
            ExactNumber::Text(s) => s.clone(),
        };
        ratio::parse_rational(&text).map_err(|_| NetworkError::BadLength(text))
    }

    pub fn parse(&self) -> Result<Rational, ratio::ParseRationalError> {
        match self {
            ExactNumber::Number(n) => ratio::parse_rational(&n.to_string()),
            ExactNumber::Text(s) => ratio::parse_rational(s),
        }
    }

    pub fn exact(r: &Rational) -> Self {
        if r.is_integer() {
            if let Ok(n) = r.to_integer().to_string().parse::<i64>() {
                return ExactNumber::Number(n.into());
            }
        }
        ExactNumber::Text(r.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcSpec {
    pub id: String,
    pub u: String,
    pub v: String,
    pub length: ExactNumber,
}

/// The on-disk network format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub root: String,
    pub nodes: Vec<String>,
    pub arcs: Vec<ArcSpec>,
}

/// Checks every network invariant, reporting the first violation.
pub fn validate(spec: &NetworkSpec) -> Result<(), NetworkError> {
    RootedNetwork::from_spec(spec).map(|_| ())
}

impl RootedNetwork {
    pub fn from_spec(spec: &NetworkSpec) -> Result<Self, NetworkError> {
        let mut arcs = Vec::with_capacity(spec.arcs.len());
        let mut node_index = HashMap::new();
        for (i, name) in spec.nodes.iter().enumerate() {
            if node_index.insert(name.clone(), NodeIx(i)).is_some() {
                return Err(NetworkError::DuplicateNodeId { node: name.clone() });
            }
        }
        let root = *node_index
            .get(&spec.root)
            .ok_or_else(|| NetworkError::MissingRoot {
                root: spec.root.clone(),
            })?;
        let mut seen = HashSet::new();
        for a in &spec.arcs {
            if !seen.insert(a.id.as_str()) {
                return Err(NetworkError::DuplicateArcId { arc: a.id.clone() });
            }
            let length = a.length.to_rational()?;
            if !length.is_positive() {
                return Err(NetworkError::NonpositiveLength {
                    arc: a.id.clone(),
                    length,
                });
            }
            let lookup = |n: &String| {
                node_index
                    .get(n)
                    .copied()
                    .ok_or_else(|| NetworkError::UnknownNode {
                        arc: a.id.clone(),
                        node: n.clone(),
                    })
            };
            arcs.push(Arc {
                id: a.id.clone(),
                u: lookup(&a.u)?,
                v: lookup(&a.v)?,
                length,
            });
        }
        Self::from_parts(spec.nodes.clone(), arcs, root)
    }

    /// Assembles a network from already-resolved parts, checking connectivity and lengths.
    pub fn from_parts(nodes: Vec<String>, arcs: Vec<Arc>, root: NodeIx) -> Result<Self, NetworkError> {
        let mut node_index = HashMap::new();
        for (i, name) in nodes.iter().enumerate() {
            if node_index.insert(name.clone(), NodeIx(i)).is_some() {
                return Err(NetworkError::DuplicateNodeId { node: name.clone() });
            }
        }
        if root.0 >= nodes.len() {
            return Err(NetworkError::MissingRoot {
                root: format!("#{}", root.0),
            });
        }
        let mut arc_index = HashMap::new();
        let mut incidence = vec![Vec::new(); nodes.len()];
        for (i, a) in arcs.iter().enumerate() {
            if arc_index.insert(a.id.clone(), ArcIx(i)).is_some() {
                return Err(NetworkError::DuplicateArcId { arc: a.id.clone() });
            }
            if !a.length.is_positive() {
                return Err(NetworkError::NonpositiveLength {
                    arc: a.id.clone(),
                    length: a.length.clone(),
                });
            }
            incidence[a.u.0].push(ArcIx(i));
            if a.v != a.u {
                incidence[a.v.0].push(ArcIx(i));
            }
        }
        let net = Self {
            nodes,
            arcs,
            root,
            node_index,
            arc_index,
            incidence,
        };
        let reached = net.reachable_from(net.root, |_| true);
        if let Some(i) = reached.iter().position(|r| !r) {
            return Err(NetworkError::Disconnected {
                node: net.nodes[i].clone(),
            });
        }
        Ok(net)
    }

    pub fn to_spec(&self) -> NetworkSpec {
        NetworkSpec {
            root: self.node_name(self.root).to_string(),
            nodes: self.nodes.clone(),
            arcs: self
                .arcs
                .iter()
                .map(|a| ArcSpec {
                    id: a.id.clone(),
                    u: self.node_name(a.u).to_string(),
                    v: self.node_name(a.v).to_string(),
                    length: ExactNumber::exact(&a.length),
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, crate::Error> {
        let spec: NetworkSpec = serde_json::from_str(text)?;
        Ok(Self::from_spec(&spec)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_spec()).expect("network serializes")
    }

    /// Graphviz rendering; arc labels carry id and length.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("graph \"{name}\" {{\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let shape = if NodeIx(i) == self.root {
                "doublecircle"
            } else {
                "circle"
            };
            out.push_str(&format!("  \"{n}\" [shape={shape}];\n"));
        }
        for a in &self.arcs {
            out.push_str(&format!(
                "  \"{}\" -- \"{}\" [label=\"{} ({})\"];\n",
                self.node_name(a.u),
                self.node_name(a.v),
                a.id,
                a.length
            ));
        }
        out.push_str("}\n");
        out
    }

    pub fn root(&self) -> NodeIx {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeIx> + '_ {
        (0..self.nodes.len()).map(NodeIx)
    }

    pub fn arc_ixs(&self) -> impl Iterator<Item = ArcIx> + '_ {
        (0..self.arcs.len()).map(ArcIx)
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, a: ArcIx) -> &Arc {
        &self.arcs[a.0]
    }

    pub fn length(&self, a: ArcIx) -> &Rational {
        &self.arcs[a.0].length
    }

    pub fn node_name(&self, n: NodeIx) -> &str {
        &self.nodes[n.0]
    }

    pub fn node_names(&self) -> &[String] {
        &self.nodes
    }

    pub fn node(&self, name: &str) -> Option<NodeIx> {
        self.node_index.get(name).copied()
    }

    pub fn arc_by_id(&self, id: &str) -> Option<ArcIx> {
        self.arc_index.get(id).copied()
    }

    pub fn require_arc(&self, id: &str) -> Result<ArcIx, NetworkError> {
        self.arc_by_id(id)
            .ok_or_else(|| NetworkError::UnknownArc { arc: id.to_string() })
    }

    /// Arcs incident to `n` in canonical order; loops appear once.
    pub fn incident(&self, n: NodeIx) -> &[ArcIx] {
        &self.incidence[n.0]
    }

    pub fn degree(&self, n: NodeIx) -> usize {
        self.incidence[n.0]
            .iter()
            .map(|&a| if self.arc(a).is_loop() { 2 } else { 1 })
            .sum()
    }

    /// Non-root nodes of degree one.
    pub fn leaves(&self) -> Vec<NodeIx> {
        self.nodes()
            .filter(|&n| n != self.root && self.degree(n) == 1)
            .collect()
    }

    pub fn total_measure(&self) -> Rational {
        self.arcs.iter().map(|a| a.length.clone()).sum()
    }

    pub fn measure_of<'a>(&self, arcs: impl IntoIterator<Item = &'a ArcIx>) -> Rational {
        arcs.into_iter().map(|&a| self.length(a).clone()).sum()
    }

    /// Nodes reachable from `start` using only arcs accepted by `allow`.
    pub fn reachable_from(&self, start: NodeIx, allow: impl Fn(ArcIx) -> bool) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        seen[start.0] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for &a in self.incident(x) {
                if !allow(a) {
                    continue;
                }
                let y = self.arc(a).other(x);
                if !seen[y.0] {
                    seen[y.0] = true;
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    pub fn is_tree(&self) -> bool {
        self.arcs.len() + 1 == self.nodes.len()
    }

    pub fn locate(&self, p: &Point) -> Location {
        let arc = self.arc(p.arc);
        if p.offset.is_zero() {
            Location::Node(arc.u)
        } else if p.offset == arc.length {
            Location::Node(arc.v)
        } else {
            Location::Interior {
                arc: p.arc,
                offset: p.offset.clone(),
            }
        }
    }

    /// Equality of points modulo the identification of arc ends with nodes.
    pub fn same_point(&self, p: &Point, q: &Point) -> bool {
        self.locate(p) == self.locate(q)
    }

    pub fn check_point(&self, p: &Point) -> Result<(), NetworkError> {
        let arc = self.arc(p.arc);
        if p.offset.is_negative() || p.offset > arc.length {
            return Err(NetworkError::OffsetOutOfRange {
                arc: arc.id.clone(),
                offset: p.offset.clone(),
                length: arc.length.clone(),
            });
        }
        Ok(())
    }

    /// A point representing node `n`. Panics for an isolated node, which a valid
    /// network only has when it is the single-node network.
    pub fn node_point(&self, n: NodeIx) -> Point {
        let a = self.incident(n)[0];
        let offset = if self.arc(a).u == n {
            ratio::zero()
        } else {
            self.length(a).clone()
        };
        Point::new(a, offset)
    }

    pub fn point_by_id(&self, arc: &str, offset: Rational) -> Result<Point, NetworkError> {
        let p = Point::new(self.require_arc(arc)?, offset);
        self.check_point(&p)?;
        Ok(p)
    }

    pub fn midpoint(&self, a: ArcIx) -> Point {
        Point::new(a, self.length(a) / ratio::int(2))
    }

    pub fn describe_point(&self, p: &Point) -> String {
        match self.locate(p) {
            Location::Node(n) => self.node_name(n).to_string(),
            Location::Interior { arc, offset } => format!("{}@{}", self.arc(arc).id, offset),
        }
    }

    fn fresh_name(&self, base: String, taken: impl Fn(&str) -> bool) -> String {
        let mut name = base;
        while taken(&name) {
            name.push('\'');
        }
        name
    }
}

impl fmt::Display for RootedNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "root {} | {} nodes | {} arcs | measure {}",
            self.node_name(self.root),
            self.nodes.len(),
            self.arcs.len(),
            self.total_measure()
        )?;
        for a in &self.arcs {
            writeln!(
                f,
                "  {:<8} {} -- {}  length {}",
                a.id,
                self.node_name(a.u),
                self.node_name(a.v),
                a.length
            )?;
        }
        Ok(())
    }
}

/// The subnetwork formed by `arcs`, rooted at `root`, keeping ids. Nodes appear in
/// original order.
pub fn induced(net: &RootedNetwork, arcs: &[ArcIx], root: NodeIx) -> Result<RootedNetwork, NetworkError> {
    let mut keep = vec![false; net.node_count()];
    keep[root.0] = true;
    for &a in arcs {
        keep[net.arc(a).u.0] = true;
        keep[net.arc(a).v.0] = true;
    }
    let mut map = vec![NodeIx(usize::MAX); net.node_count()];
    let mut nodes = Vec::new();
    for x in net.nodes().filter(|x| keep[x.0]) {
        map[x.0] = NodeIx(nodes.len());
        nodes.push(net.node_name(x).to_string());
    }
    let mut sorted = arcs.to_vec();
    sorted.sort();
    let sub = sorted
        .iter()
        .map(|&a| {
            let arc = net.arc(a);
            Arc {
                id: arc.id.clone(),
                u: map[arc.u.0],
                v: map[arc.v.0],
                length: arc.length.clone(),
            }
        })
        .collect();
    RootedNetwork::from_parts(nodes, sub, map[root.0])
}

/// Incremental construction for fixtures and tests. Nodes are declared on first use.
#[derive(Debug, Clone)]
pub struct NetworkBuilder {
    root: String,
    nodes: Vec<String>,
    arcs: Vec<ArcSpec>,
}

impl NetworkBuilder {
    pub fn new(root: &str) -> Self {
        Self {
            root: root.to_string(),
            nodes: vec![root.to_string()],
            arcs: Vec::new(),
        }
    }

    pub fn node(mut self, name: &str) -> Self {
        if !self.nodes.iter().any(|n| n == name) {
            self.nodes.push(name.to_string());
        }
        self
    }

    pub fn arc(self, id: &str, u: &str, v: &str, length: Rational) -> Self {
        let mut b = self.node(u).node(v);
        b.arcs.push(ArcSpec {
            id: id.to_string(),
            u: u.to_string(),
            v: v.to_string(),
            length: ExactNumber::Text(length.to_string()),
        });
        b
    }

    pub fn spec(&self) -> NetworkSpec {
        NetworkSpec {
            root: self.root.clone(),
            nodes: self.nodes.clone(),
            arcs: self.arcs.clone(),
        }
    }

    pub fn build(&self) -> Result<RootedNetwork, NetworkError> {
        RootedNetwork::from_spec(&self.spec())
    }
}

/// Result of cutting arcs into pieces: the refined network and how original points map onto it.
#[derive(Debug, Clone)]
pub struct Refinement {
    pub network: RootedNetwork,
    /// For each original arc, its pieces in order from `u` with their starting offsets.
    pieces: Vec<Vec<(ArcIx, Rational)>>,
}

impl Refinement {
    pub fn map_point(&self, p: &Point) -> Point {
        let pieces = &self.pieces[p.arc.0];
        let (arc, start) = pieces
            .iter()
            .rev()
            .find(|(_, start)| *start <= p.offset)
            .unwrap_or(&pieces[0]);
        Point::new(*arc, &p.offset - start)
    }

    pub fn pieces(&self, original: ArcIx) -> &[(ArcIx, Rational)] {
        &self.pieces[original.0]
    }

    /// The original arc that a refined arc belongs to.
    pub fn original_arc(&self, refined: ArcIx) -> ArcIx {
        self.pieces
            .iter()
            .position(|ps| ps.iter().any(|(a, _)| *a == refined))
            .map(ArcIx)
            .expect("every refined arc has an origin")
    }
}

/// Cuts each listed arc at the given interior offsets (sorted, deduplicated internally).
/// Pieces keep the orientation of their arc and take its place in canonical order.
pub fn refine(net: &RootedNetwork, cuts: &HashMap<ArcIx, Vec<Rational>>) -> Result<Refinement, NetworkError> {
    let mut nodes = net.nodes.clone();
    let mut arcs = Vec::new();
    let mut pieces = Vec::with_capacity(net.arc_count());
    let mut taken_nodes: HashSet<String> = nodes.iter().cloned().collect();
    let mut taken_arcs: HashSet<String> = net.arcs.iter().map(|a| a.id.clone()).collect();
    for (i, arc) in net.arcs.iter().enumerate() {
        let mut offsets = cuts.get(&ArcIx(i)).cloned().unwrap_or_default();
        offsets.sort();
        offsets.dedup();
        for o in &offsets {
            if !o.is_positive() || *o >= arc.length {
                return Err(NetworkError::PointIsNode {
                    arc: arc.id.clone(),
                    offset: o.clone(),
                });
            }
        }
        if offsets.is_empty() {
            pieces.push(vec![(ArcIx(arcs.len()), ratio::zero())]);
            arcs.push(arc.clone());
            continue;
        }
        taken_arcs.remove(&arc.id);
        let mut cut_nodes = Vec::with_capacity(offsets.len());
        for o in &offsets {
            let name = net.fresh_name(format!("{}@{}", arc.id, o), |n| taken_nodes.contains(n));
            taken_nodes.insert(name.clone());
            cut_nodes.push(NodeIx(nodes.len()));
            nodes.push(name);
        }
        let mut ends = vec![arc.u];
        ends.extend(cut_nodes);
        ends.push(arc.v);
        let mut starts = vec![ratio::zero()];
        starts.extend(offsets.iter().cloned());
        starts.push(arc.length.clone());
        let mut mine = Vec::new();
        for k in 0..ends.len() - 1 {
            let id = net.fresh_name(format!("{}.{}", arc.id, k + 1), |n| taken_arcs.contains(n));
            taken_arcs.insert(id.clone());
            mine.push((ArcIx(arcs.len()), starts[k].clone()));
            arcs.push(Arc {
                id,
                u: ends[k],
                v: ends[k + 1],
                length: &starts[k + 1] - &starts[k],
            });
        }
        pieces.push(mine);
    }
    let network = RootedNetwork::from_parts(nodes, arcs, net.root)?;
    Ok(Refinement { network, pieces })
}

/// Promotes an interior point to a node, splitting its arc in two.
pub fn subdivide(net: &RootedNetwork, p: &Point) -> Result<Refinement, NetworkError> {
    net.check_point(p)?;
    if let Location::Node(_) = net.locate(p) {
        return Err(NetworkError::PointIsNode {
            arc: net.arc(p.arc).id.clone(),
            offset: p.offset.clone(),
        });
    }
    refine(net, &HashMap::from([(p.arc, vec![p.offset.clone()])]))
}

/// Cuts every arc in `arcs` into `ceil(length / h)` equal cells.
pub fn cells(net: &RootedNetwork, arcs: &[ArcIx], h: &Rational) -> Result<Refinement, NetworkError> {
    let mut cuts = HashMap::new();
    for &a in arcs {
        let len = net.length(a);
        let m = (len / h).ceil().to_integer();
        let m: i64 = m.to_string().parse().unwrap_or(1).max(1);
        if m > 1 {
            let cell = len / ratio::int(m);
            cuts.insert(a, (1..m).map(|k| &cell * ratio::int(k)).collect());
        }
    }
    refine(net, &cuts)
}
