//! Built-in networks.

use num_traits::Signed;
use thiserror::Error;

use crate::network::{NetworkBuilder, NetworkError, RootedNetwork};
use crate::ratio::{self, int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FixtureError {
    #[error("unknown fixture `{0}`")]
    Unknown(String),
    #[error("bad fixture parameter `{0}`")]
    BadParameter(String),
    #[error("alpha {0} is outside [0, 1)")]
    AlphaOutOfRange(Rational),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Fixture names accepted by [`by_name`]; parameters follow a colon.
pub const NAMES: &[&str] = &[
    "qbar",
    "fig4",
    "circle",
    "three_parallel",
    "circle_spike:<alpha>",
    "star:<n>",
    "q_prime:<fixture>",
    "q_double_prime:<fixture>",
];

/// The worked example with one block `x,y,z,w` and bridges `a,b,c,d`.
///
/// Arc order puts `d` before `a` and `x` first in the block, so the canonical
/// block-optimal pair is `d,x,b,y′,w′,c,z′,a` and `a,d,z,c,w,y,b,x′`.
pub fn qbar() -> RootedNetwork {
    NetworkBuilder::new("O")
        .arc("d", "O", "E", int(2))
        .arc("a", "O", "A", int(2))
        .arc("b", "F", "B", int(2))
        .arc("c", "G", "C", int(3))
        .arc("x", "E", "F", int(2))
        .arc("y", "M", "F", int(2))
        .arc("z", "E", "G", int(1))
        .arc("w", "G", "M", int(1))
        .build()
        .expect("qbar is valid")
}

/// Nineteen unit arcs: fifteen in bundles of three parallel arcs, four bridges.
///
/// Two bundles share the root (one block under arc connectivity). Bridge `a`
/// leaves the first bundle for a third bundle, from whose far end bridges `b`
/// and `c` lead to two more bundles. Bridge `d` runs from the root to a leaf.
/// Total length 19, bridge length 4.
pub fn fig4() -> RootedNetwork {
    let mut b = NetworkBuilder::new("O");
    let bundles = [("r", "O", "P"), ("s", "O", "R"), ("t", "U1", "V1"), ("m", "U2", "V2"), ("n", "U3", "V3")];
    for (prefix, u, v) in bundles {
        for k in 1..=3 {
            b = b.arc(&format!("{prefix}{k}"), u, v, int(1));
        }
    }
    b.arc("a", "P", "U1", int(1))
        .arc("b", "V1", "U2", int(1))
        .arc("c", "V1", "U3", int(1))
        .arc("d", "O", "L", int(1))
        .build()
        .expect("fig4 is valid")
}

/// A loop of length 2 at the root.
pub fn circle() -> RootedNetwork {
    NetworkBuilder::new("O")
        .arc("c", "O", "O", int(2))
        .build()
        .expect("circle is valid")
}

pub fn three_parallel() -> RootedNetwork {
    NetworkBuilder::new("O")
        .arc("p1", "O", "P", int(1))
        .arc("p2", "O", "P", int(1))
        .arc("p3", "O", "P", int(1))
        .build()
        .expect("three_parallel is valid")
}

/// Circle of length 2 through `O` and `A`, clockwise arc `1+alpha`, plus a unit spike `A–B`.
pub fn circle_spike(alpha: &Rational) -> Result<RootedNetwork, FixtureError> {
    if alpha.is_negative() || *alpha >= ratio::one() {
        return Err(FixtureError::AlphaOutOfRange(alpha.clone()));
    }
    Ok(NetworkBuilder::new("O")
        .arc("cw", "O", "A", ratio::one() + alpha)
        .arc("ccw", "O", "A", ratio::one() - alpha)
        .arc("spike", "A", "B", int(1))
        .build()?)
}

/// One unit arc and `n` arcs of length `√2/n` from the root. `√2` is a rational
/// approximation accurate far beyond double precision.
pub fn star(n: usize) -> Result<RootedNetwork, FixtureError> {
    if n == 0 {
        return Err(FixtureError::BadParameter("star needs n >= 1".into()));
    }
    let short = ratio::sqrt2() / int(n as i64);
    let mut b = NetworkBuilder::new("O").arc("long", "O", "L", int(1));
    for k in 1..=n {
        b = b.arc(&format!("s{k}"), "O", &format!("L{k}"), short.clone());
    }
    Ok(b.build()?)
}

/// Resolves a fixture name such as `qbar`, `circle_spike:1/2`, `star:10` or `q_prime:qbar`.
pub fn by_name(name: &str) -> Result<RootedNetwork, FixtureError> {
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (name, None),
    };
    let need = || arg.ok_or_else(|| FixtureError::BadParameter(name.to_string()));
    match head {
        "qbar" => Ok(qbar()),
        "fig4" => Ok(fig4()),
        "circle" => Ok(circle()),
        "three_parallel" => Ok(three_parallel()),
        "circle_spike" => {
            let alpha = match arg {
                Some(a) => ratio::parse_rational(a).map_err(|_| FixtureError::BadParameter(a.into()))?,
                None => ratio::half(),
            };
            circle_spike(&alpha)
        }
        "star" => {
            let n: usize = need()?
                .parse()
                .map_err(|_| FixtureError::BadParameter(name.to_string()))?;
            star(n)
        }
        "q_prime" | "q_double_prime" => {
            let base = by_name(need()?)?;
            let dec = crate::decomposition::decompose(&base);
            Ok(if head == "q_prime" {
                crate::bounds::build_q_prime(&base, &dec)
            } else {
                crate::bounds::build_q_double_prime(&base, &dec)
            })
        }
        _ => Err(FixtureError::Unknown(name.to_string())),
    }
}
