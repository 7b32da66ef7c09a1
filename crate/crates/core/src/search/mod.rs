//! Whole-arc expanding searches, hider distributions and search times.

pub mod io;

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::network::{ArcIx, Location, NetworkError, NodeIx, Point, Refinement, RootedNetwork};
use crate::ratio::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("search is not a valid expanding search: {0}")]
    Invalid(String),
    #[error("lottery probabilities sum to {0}, not 1")]
    ProbabilitySum(Rational),
    #[error("negative probability or mass {0}")]
    Negative(Rational),
    #[error("hider distribution has total mass {0}, not 1")]
    MassSum(Rational),
    #[error("segment [{from}, {to}] does not fit arc `{arc}`")]
    BadSegment {
        arc: String,
        from: Rational,
        to: Rational,
    },
    #[error("region has zero length")]
    ZeroLength,
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Forward,
    Reverse,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Forward => Direction::Reverse,
            Direction::Reverse => Direction::Forward,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step {
    pub arc: ArcIx,
    pub dir: Direction,
}

impl Step {
    pub fn new(arc: ArcIx, dir: Direction) -> Self {
        Self { arc, dir }
    }

    pub fn from(&self, net: &RootedNetwork) -> NodeIx {
        let a = net.arc(self.arc);
        match self.dir {
            Direction::Forward => a.u,
            Direction::Reverse => a.v,
        }
    }

    pub fn to(&self, net: &RootedNetwork) -> NodeIx {
        let a = net.arc(self.arc);
        match self.dir {
            Direction::Forward => a.v,
            Direction::Reverse => a.u,
        }
    }

    pub fn flipped(self) -> Self {
        Self::new(self.arc, self.dir.flip())
    }

    /// Step traversing `arc` away from node `x`.
    pub fn leaving(net: &RootedNetwork, arc: ArcIx, x: NodeIx) -> Self {
        if net.arc(arc).u == x {
            Self::new(arc, Direction::Forward)
        } else {
            Self::new(arc, Direction::Reverse)
        }
    }

    /// Distance along the step from its start to point `offset` of its arc.
    fn reach(&self, net: &RootedNetwork, offset: &Rational) -> Rational {
        match self.dir {
            Direction::Forward => offset.clone(),
            Direction::Reverse => net.length(self.arc) - offset,
        }
    }
}

/// An ordered list of whole-arc traversals. Validity against a network is checked
/// by [`is_valid`], not on construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PureSearch {
    pub steps: Vec<Step>,
}

impl PureSearch {
    pub fn new(steps: Vec<Step>) -> Self {
        Self { steps }
    }

    /// Builds a search from `(arc id, forward?)` pairs.
    pub fn from_ids(net: &RootedNetwork, steps: &[(&str, bool)]) -> Result<Self, NetworkError> {
        steps
            .iter()
            .map(|&(id, fwd)| {
                let dir = if fwd {
                    Direction::Forward
                } else {
                    Direction::Reverse
                };
                Ok(Step::new(net.require_arc(id)?, dir))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self::new)
    }

    /// Renders steps as `x,y′,...`, priming reverse traversals.
    pub fn display(&self, net: &RootedNetwork) -> String {
        self.steps
            .iter()
            .map(|s| {
                let id = &net.arc(s.arc).id;
                match s.dir {
                    Direction::Forward => id.clone(),
                    Direction::Reverse => format!("{id}′"),
                }
            })
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Explains why `s` is not a valid expanding search of `net`, if it is not.
pub fn check_valid(net: &RootedNetwork, s: &PureSearch) -> Result<(), SearchError> {
    check_valid_from(net, s, net.root())
}

fn check_valid_from(net: &RootedNetwork, s: &PureSearch, start: NodeIx) -> Result<(), SearchError> {
    let mut used = vec![false; net.arc_count()];
    let mut covered = vec![false; net.node_count()];
    covered[start.0] = true;
    for (k, step) in s.steps.iter().enumerate() {
        if step.arc.0 >= net.arc_count() {
            return Err(SearchError::Invalid(format!("step {} names no arc", k + 1)));
        }
        let id = &net.arc(step.arc).id;
        if used[step.arc.0] {
            return Err(SearchError::Invalid(format!("arc `{id}` traversed twice")));
        }
        let from = step.from(net);
        if !covered[from.0] {
            return Err(SearchError::Invalid(format!(
                "step {} on `{id}` starts at uncovered node `{}`",
                k + 1,
                net.node_name(from)
            )));
        }
        used[step.arc.0] = true;
        covered[step.to(net).0] = true;
    }
    if let Some(a) = used.iter().position(|u| !u) {
        return Err(SearchError::Invalid(format!(
            "arc `{}` is never searched",
            net.arc(ArcIx(a)).id
        )));
    }
    Ok(())
}

pub fn is_valid(net: &RootedNetwork, s: &PureSearch) -> bool {
    check_valid(net, s).is_ok()
}

/// Steps in reverse order with directions flipped.
pub fn reverse(s: &PureSearch) -> PureSearch {
    PureSearch::new(s.steps.iter().rev().map(|st| st.flipped()).collect())
}

/// Whether the time-reverse of `s` is itself a valid search from the root.
pub fn is_reversible(net: &RootedNetwork, s: &PureSearch) -> bool {
    is_valid(net, s) && is_valid(net, &reverse(s))
}

/// First time `s` covers `p`. Panics if `s` never reaches `p`.
pub fn search_time(net: &RootedNetwork, s: &PureSearch, p: &Point) -> Rational {
    match net.locate(p) {
        Location::Node(x) => node_time(net, s, x),
        Location::Interior { arc, offset } => {
            let mut t = ratio::zero();
            for step in &s.steps {
                if step.arc == arc {
                    return t + step.reach(net, &offset);
                }
                t += net.length(step.arc);
            }
            panic!("search never covers arc `{}`", net.arc(arc).id)
        }
    }
}

fn node_time(net: &RootedNetwork, s: &PureSearch, x: NodeIx) -> Rational {
    if x == net.root() {
        return ratio::zero();
    }
    let mut t = ratio::zero();
    for step in &s.steps {
        t += net.length(step.arc);
        if step.to(net) == x {
            return t;
        }
    }
    panic!("search never reaches node `{}`", net.node_name(x))
}

/// Arrival time at every node, `None` where the search never arrives.
pub fn node_times(net: &RootedNetwork, s: &PureSearch) -> Vec<Option<Rational>> {
    node_times_from(net, s, net.root())
}

fn node_times_from(net: &RootedNetwork, s: &PureSearch, start: NodeIx) -> Vec<Option<Rational>> {
    let mut times = vec![None; net.node_count()];
    times[start.0] = Some(ratio::zero());
    let mut t = ratio::zero();
    for step in &s.steps {
        t += net.length(step.arc);
        let to = step.to(net);
        if times[to.0].is_none() {
            times[to.0] = Some(t.clone());
        }
    }
    times
}

/// Start time and step for every arc a search traverses; lets repeated point queries run in constant time.
#[derive(Debug, Clone)]
pub struct TimeTable {
    starts: Vec<Option<(Rational, Step)>>,
    nodes: Vec<Option<Rational>>,
}

impl TimeTable {
    pub fn new(net: &RootedNetwork, s: &PureSearch) -> Self {
        Self::from_start(net, s, net.root())
    }

    /// Times for a search that begins at `start` instead of the root.
    pub fn from_start(net: &RootedNetwork, s: &PureSearch, start: NodeIx) -> Self {
        let mut starts = vec![None; net.arc_count()];
        let mut t = ratio::zero();
        for step in &s.steps {
            starts[step.arc.0] = Some((t.clone(), *step));
            t += net.length(step.arc);
        }
        Self {
            starts,
            nodes: node_times_from(net, s, start),
        }
    }

    /// Same as [`search_time`]. Panics if the point is never reached.
    pub fn time(&self, net: &RootedNetwork, p: &Point) -> Rational {
        match net.locate(p) {
            Location::Node(x) => self.nodes[x.0].clone().expect("search reaches node"),
            Location::Interior { arc, offset } => {
                let (t, step) = self.starts[arc.0].as_ref().expect("search covers arc");
                t + step.reach(net, &offset)
            }
        }
    }
}

/// Anything that yields an expected search time against a fixed hider point.
///
/// All strategies here mix whole-arc searches, so the time is affine along the
/// interior of each arc.
pub trait Strategy {
    fn time_to(&self, net: &RootedNetwork, p: &Point) -> Rational;
}

impl Strategy for PureSearch {
    fn time_to(&self, net: &RootedNetwork, p: &Point) -> Rational {
        search_time(net, self, p)
    }
}

/// A finite lottery over pure searches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lottery {
    pub entries: Vec<(Rational, PureSearch)>,
}

impl Lottery {
    pub fn new(entries: Vec<(Rational, PureSearch)>) -> Result<Self, SearchError> {
        let mut total = ratio::zero();
        for (p, _) in &entries {
            if p.is_negative() {
                return Err(SearchError::Negative(p.clone()));
            }
            total += p;
        }
        if !total.is_one() {
            return Err(SearchError::ProbabilitySum(total));
        }
        Ok(Self { entries })
    }

    pub fn pure(s: PureSearch) -> Self {
        Self {
            entries: vec![(ratio::one(), s)],
        }
    }

    pub fn check_valid(&self, net: &RootedNetwork) -> Result<(), SearchError> {
        self.entries.iter().try_for_each(|(_, s)| check_valid(net, s))
    }
}

impl Strategy for Lottery {
    fn time_to(&self, net: &RootedNetwork, p: &Point) -> Rational {
        self.entries
            .iter()
            .filter(|(q, _)| !q.is_zero())
            .map(|(q, s)| q * search_time(net, s, p))
            .sum()
    }
}

/// Either an explicit lottery or one of the branch-rule strategies.
#[derive(Debug, Clone)]
pub enum MixedStrategy {
    Lottery(Lottery),
    BiasedDfs(crate::tree_game::BiasedDfs),
    Gamma(crate::bridge_strategy::GammaStrategy),
}

impl Strategy for MixedStrategy {
    fn time_to(&self, net: &RootedNetwork, p: &Point) -> Rational {
        match self {
            MixedStrategy::Lottery(l) => l.time_to(net, p),
            MixedStrategy::BiasedDfs(b) => b.time_to(net, p),
            MixedStrategy::Gamma(g) => g.time_to(net, p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub point: Point,
    pub mass: Rational,
}

/// Mass spread evenly over `[from, to]` of one arc.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformSegment {
    pub arc: ArcIx,
    pub from: Rational,
    pub to: Rational,
    pub mass: Rational,
}

impl UniformSegment {
    pub fn len(&self) -> Rational {
        &self.to - &self.from
    }

    pub fn midpoint(&self) -> Point {
        Point::new(self.arc, (&self.from + &self.to) / ratio::int(2))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HiderDistribution {
    pub atoms: Vec<Atom>,
    pub uniforms: Vec<UniformSegment>,
}

impl HiderDistribution {
    pub fn point_mass(p: Point) -> Self {
        Self {
            atoms: vec![Atom {
                point: p,
                mass: ratio::one(),
            }],
            uniforms: Vec::new(),
        }
    }

    /// Uniform over the whole network.
    pub fn uniform(net: &RootedNetwork) -> Self {
        let mu = net.total_measure();
        Self {
            atoms: Vec::new(),
            uniforms: net
                .arc_ixs()
                .map(|a| UniformSegment {
                    arc: a,
                    from: ratio::zero(),
                    to: net.length(a).clone(),
                    mass: net.length(a) / &mu,
                })
                .collect(),
        }
    }

    pub fn total_mass(&self) -> Rational {
        let atoms: Rational = self.atoms.iter().map(|a| a.mass.clone()).sum();
        let unif: Rational = self.uniforms.iter().map(|u| u.mass.clone()).sum();
        atoms + unif
    }

    pub fn validate(&self, net: &RootedNetwork) -> Result<(), SearchError> {
        for a in &self.atoms {
            if a.mass.is_negative() {
                return Err(SearchError::Negative(a.mass.clone()));
            }
            net.check_point(&a.point)?;
        }
        for u in &self.uniforms {
            if u.mass.is_negative() {
                return Err(SearchError::Negative(u.mass.clone()));
            }
            if u.from.is_negative() || u.from >= u.to || &u.to > net.length(u.arc) {
                return Err(SearchError::BadSegment {
                    arc: net.arc(u.arc).id.clone(),
                    from: u.from.clone(),
                    to: u.to.clone(),
                });
            }
        }
        let total = self.total_mass();
        if !total.is_one() {
            return Err(SearchError::MassSum(total));
        }
        Ok(())
    }

    /// Transfers the distribution onto a refinement of its network.
    pub fn refine(&self, r: &Refinement) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                point: r.map_point(&a.point),
                mass: a.mass.clone(),
            })
            .collect();
        let mut uniforms = Vec::new();
        for u in &self.uniforms {
            let pieces = r.pieces(u.arc);
            let seg_len = u.len();
            for (k, (piece, start)) in pieces.iter().enumerate() {
                let end = match pieces.get(k + 1) {
                    Some((_, s)) => s.clone(),
                    None => start + r.network.length(*piece),
                };
                let lo = std::cmp::max(start.clone(), u.from.clone());
                let hi = std::cmp::min(end, u.to.clone());
                if lo < hi {
                    uniforms.push(UniformSegment {
                        arc: *piece,
                        mass: &u.mass * (&hi - &lo) / &seg_len,
                        from: &lo - start,
                        to: &hi - start,
                    });
                }
            }
        }
        Self { atoms, uniforms }
    }

    /// Collapses atoms sharing a location, summing masses. Order follows first occurrence.
    pub fn merged_atoms(&self, net: &RootedNetwork) -> Vec<(Location, Rational)> {
        let mut order: Vec<Location> = Vec::new();
        let mut mass: HashMap<Location, Rational> = HashMap::new();
        for a in &self.atoms {
            let loc = net.locate(&a.point);
            if !mass.contains_key(&loc) {
                order.push(loc.clone());
            }
            *mass.entry(loc).or_insert_with(ratio::zero) += &a.mass;
        }
        order
            .into_iter()
            .map(|l| {
                let m = mass.remove(&l).unwrap();
                (l, m)
            })
            .collect()
    }
}

/// Expected time of `s` against `nu`. A uniform segment lies inside one arc, where
/// search times are affine, so it contributes its mass times the time at its midpoint.
pub fn expected_time(net: &RootedNetwork, s: &impl Strategy, nu: &HiderDistribution) -> Rational {
    let mut total = ratio::zero();
    for a in &nu.atoms {
        if !a.mass.is_zero() {
            total += &a.mass * s.time_to(net, &a.point);
        }
    }
    for u in &nu.uniforms {
        if !u.mass.is_zero() {
            total += &u.mass * s.time_to(net, &u.midpoint());
        }
    }
    total
}

/// The worst candidate for the searcher and its time; the first maximizer wins ties.
pub fn max_time(net: &RootedNetwork, s: &impl Strategy, candidates: &[Point]) -> Option<(Rational, Point)> {
    let mut best: Option<(Rational, Point)> = None;
    for p in candidates {
        let t = s.time_to(net, p);
        if best.as_ref().is_none_or(|(b, _)| t > *b) {
            best = Some((t, p.clone()));
        }
    }
    best
}

/// A piece of an arc, used to describe regions for [`density`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub arc: ArcIx,
    pub from: Rational,
    pub to: Rational,
}

impl Segment {
    pub fn whole(net: &RootedNetwork, arc: ArcIx) -> Self {
        Self {
            arc,
            from: ratio::zero(),
            to: net.length(arc).clone(),
        }
    }

    fn contains(&self, net: &RootedNetwork, p: &Point) -> bool {
        let arc = net.arc(self.arc);
        match net.locate(p) {
            Location::Node(x) => {
                (self.from.is_zero() && x == arc.u) || (self.to == arc.length && x == arc.v)
            }
            Location::Interior { arc: a, offset } => {
                a == self.arc && self.from <= offset && offset <= self.to
            }
        }
    }
}

/// Mass of `nu` in `region`.
pub fn mass_in(net: &RootedNetwork, nu: &HiderDistribution, region: &[Segment]) -> Rational {
    let mut m = ratio::zero();
    for a in &nu.atoms {
        if region.iter().any(|s| s.contains(net, &a.point)) {
            m += &a.mass;
        }
    }
    for u in &nu.uniforms {
        for s in region.iter().filter(|s| s.arc == u.arc) {
            let lo = std::cmp::max(&s.from, &u.from);
            let hi = std::cmp::min(&s.to, &u.to);
            if lo < hi {
                m += &u.mass * (hi - lo) / u.len();
            }
        }
    }
    m
}

/// Search density: mass over length.
pub fn density(net: &RootedNetwork, nu: &HiderDistribution, region: &[Segment]) -> Result<Rational, SearchError> {
    let len: Rational = region.iter().map(|s| &s.to - &s.from).sum();
    if !len.is_positive() {
        return Err(SearchError::ZeroLength);
    }
    Ok(mass_in(net, nu, region) / len)
}
