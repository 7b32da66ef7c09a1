//! JSON forms of strategies and hider distributions.
//!
//! Strategy: `{"lottery":[{"prob":"1/2","steps":[["d","fwd"],["x","rev"]]}]}`.
//! Hider: `{"atoms":[{"node":"C","mass":1}, {"arc":"x","offset":"1/2","mass":0}],
//! "uniforms":[{"arc":"x","from":0,"to":2,"mass":0}]}`.

use serde::{Deserialize, Serialize};

use super::{Atom, Direction, HiderDistribution, Lottery, PureSearch, SearchError, Step, UniformSegment};
use crate::network::{ExactNumber, NetworkError, Point, RootedNetwork};
use crate::ratio::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DirSpec {
    #[serde(rename = "fwd")]
    Fwd,
    #[serde(rename = "rev")]
    Rev,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpec {
    pub prob: ExactNumber,
    pub steps: Vec<(String, DirSpec)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySpec {
    pub lottery: Vec<SearchSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AtomSpec {
    Node {
        node: String,
        mass: ExactNumber,
    },
    Point {
        arc: String,
        offset: ExactNumber,
        mass: ExactNumber,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformSpec {
    pub arc: String,
    pub from: ExactNumber,
    pub to: ExactNumber,
    pub mass: ExactNumber,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HiderSpec {
    #[serde(default)]
    pub atoms: Vec<AtomSpec>,
    #[serde(default)]
    pub uniforms: Vec<UniformSpec>,
}

fn num(x: &ExactNumber) -> Result<Rational, SearchError> {
    Ok(x.to_rational()?)
}

pub fn search_from_spec(net: &RootedNetwork, steps: &[(String, DirSpec)]) -> Result<PureSearch, SearchError> {
    steps
        .iter()
        .map(|(id, d)| {
            let dir = match d {
                DirSpec::Fwd => Direction::Forward,
                DirSpec::Rev => Direction::Reverse,
            };
            Ok(Step::new(net.require_arc(id)?, dir))
        })
        .collect::<Result<Vec<_>, SearchError>>()
        .map(PureSearch::new)
}

pub fn search_to_spec(net: &RootedNetwork, s: &PureSearch) -> Vec<(String, DirSpec)> {
    s.steps
        .iter()
        .map(|st| {
            let d = match st.dir {
                Direction::Forward => DirSpec::Fwd,
                Direction::Reverse => DirSpec::Rev,
            };
            (net.arc(st.arc).id.clone(), d)
        })
        .collect()
}

/// Parses and validates a lottery against `net`.
pub fn lottery_from_spec(net: &RootedNetwork, spec: &StrategySpec) -> Result<Lottery, SearchError> {
    let entries = spec
        .lottery
        .iter()
        .map(|e| Ok((num(&e.prob)?, search_from_spec(net, &e.steps)?)))
        .collect::<Result<Vec<_>, SearchError>>()?;
    let lottery = Lottery::new(entries)?;
    lottery.check_valid(net)?;
    Ok(lottery)
}

pub fn lottery_to_spec(net: &RootedNetwork, l: &Lottery) -> StrategySpec {
    StrategySpec {
        lottery: l
            .entries
            .iter()
            .map(|(p, s)| SearchSpec {
                prob: ExactNumber::exact(p),
                steps: search_to_spec(net, s),
            })
            .collect(),
    }
}

pub fn hider_from_spec(net: &RootedNetwork, spec: &HiderSpec) -> Result<HiderDistribution, SearchError> {
    let mut atoms = Vec::new();
    for a in &spec.atoms {
        let (point, mass) = match a {
            AtomSpec::Node { node, mass } => {
                let x = net.node(node).ok_or_else(|| NetworkError::UnknownNode {
                    arc: "(atom)".into(),
                    node: node.clone(),
                })?;
                (net.node_point(x), num(mass)?)
            }
            AtomSpec::Point { arc, offset, mass } => (net.point_by_id(arc, num(offset)?)?, num(mass)?),
        };
        atoms.push(Atom { point, mass });
    }
    let mut uniforms = Vec::new();
    for u in &spec.uniforms {
        uniforms.push(UniformSegment {
            arc: net.require_arc(&u.arc)?,
            from: num(&u.from)?,
            to: num(&u.to)?,
            mass: num(&u.mass)?,
        });
    }
    let nu = HiderDistribution { atoms, uniforms };
    nu.validate(net)?;
    Ok(nu)
}

pub fn hider_to_spec(net: &RootedNetwork, nu: &HiderDistribution) -> HiderSpec {
    let atoms = nu
        .atoms
        .iter()
        .map(|a| match net.locate(&a.point) {
            crate::network::Location::Node(x) => AtomSpec::Node {
                node: net.node_name(x).to_string(),
                mass: ExactNumber::exact(&a.mass),
            },
            crate::network::Location::Interior { arc, offset } => AtomSpec::Point {
                arc: net.arc(arc).id.clone(),
                offset: ExactNumber::exact(&offset),
                mass: ExactNumber::exact(&a.mass),
            },
        })
        .collect();
    let uniforms = nu
        .uniforms
        .iter()
        .map(|u| UniformSpec {
            arc: net.arc(u.arc).id.clone(),
            from: ExactNumber::exact(&u.from),
            to: ExactNumber::exact(&u.to),
            mass: ExactNumber::exact(&u.mass),
        })
        .collect();
    HiderSpec { atoms, uniforms }
}

/// Convenience for a single hider point given on the command line.
pub fn point_from_ids(net: &RootedNetwork, arc: &str, offset: Rational) -> Result<Point, SearchError> {
    Ok(net.point_by_id(arc, offset)?)
}
