//! Closed-form families: the circle with a spike, and the star that shows the
//! block-optimal guarantee is tight.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::block_strategy::{self, BlockError};
use crate::decomposition::decompose;
use crate::fixtures::{self, FixtureError};
use crate::network::{NetworkError, RootedNetwork};
use crate::ratio::{self, int, Rational};
use crate::search::{Atom, HiderDistribution, Lottery, PureSearch, UniformSegment};
use crate::tree_game;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyticError {
    #[error("alpha {0} is outside the allowed range")]
    OutOfRange(Rational),
    #[error("star needs at least one short arc")]
    EmptyStar,
    #[error(transparent)]
    Fixture(#[from] FixtureError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Block(#[from] BlockError),
}

/// A circle-with-spike network together with its parameter.
#[derive(Debug, Clone)]
pub struct CircleSpikeInstance {
    pub alpha: Rational,
    pub network: RootedNetwork,
}

impl CircleSpikeInstance {
    pub fn new(alpha: &Rational) -> Result<Self, AnalyticError> {
        Ok(Self {
            alpha: alpha.clone(),
            network: fixtures::circle_spike(alpha)?,
        })
    }
}

/// `(4+α)/(2+α)`. Defined on `[0, 1]`; the closed end is the degenerate limit.
pub fn cs_value(alpha: &Rational) -> Result<Rational, AnalyticError> {
    if alpha.is_negative() || *alpha > ratio::one() {
        return Err(AnalyticError::OutOfRange(alpha.clone()));
    }
    Ok((int(4) + alpha) / (int(2) + alpha))
}

/// Mass on the clockwise arc in the optimal hider mix: `2α/(α+2)`.
pub fn cs_pbar(alpha: &Rational) -> Rational {
    int(2) * alpha / (alpha + int(2))
}

/// Atom `1 − p` at the spike tip and mass `p` uniform on the clockwise arc.
pub fn cs_family(inst: &CircleSpikeInstance, p: &Rational) -> HiderDistribution {
    let net = &inst.network;
    let b = net.node("B").expect("spike tip");
    let cw = net.arc_by_id("cw").expect("clockwise arc");
    let mut nu = HiderDistribution {
        atoms: vec![Atom {
            point: net.node_point(b),
            mass: ratio::one() - p,
        }],
        uniforms: Vec::new(),
    };
    if !p.is_zero() {
        nu.uniforms.push(UniformSegment {
            arc: cw,
            from: ratio::zero(),
            to: net.length(cw).clone(),
            mass: p.clone(),
        });
    }
    nu
}

pub fn cs_hider(inst: &CircleSpikeInstance) -> HiderDistribution {
    cs_family(inst, &cs_pbar(&inst.alpha))
}

/// Clockwise first: around to `A`, the spike, then the short arc back.
pub fn cs_p_plus(net: &RootedNetwork) -> PureSearch {
    PureSearch::from_ids(net, &[("cw", true), ("spike", true), ("ccw", false)]).expect("fixture arcs")
}

/// Anticlockwise to `A`, the spike, then the long arc from `O`.
pub fn cs_p_minus(net: &RootedNetwork) -> PureSearch {
    PureSearch::from_ids(net, &[("ccw", true), ("spike", true), ("cw", true)]).expect("fixture arcs")
}

/// Anticlockwise to `A`, the spike, then the long arc from `A` back to `O`.
pub fn cs_p_back(net: &RootedNetwork) -> PureSearch {
    PureSearch::from_ids(net, &[("ccw", true), ("spike", true), ("cw", false)]).expect("fixture arcs")
}

/// The optimal searcher mix: the three searches above with probabilities
/// `1/2`, `1/(2(2+α))`, `(1+α)/(2(2+α))`.
pub fn cs_searcher(inst: &CircleSpikeInstance) -> Lottery {
    let net = &inst.network;
    let a = &inst.alpha;
    let two_two_a = int(2) * (int(2) + a);
    Lottery::new(vec![
        (ratio::half(), cs_p_back(net)),
        (ratio::one() / &two_two_a, cs_p_minus(net)),
        ((ratio::one() + a) / &two_two_a, cs_p_plus(net)),
    ])
    .expect("probabilities sum to one")
}

/// `((2+√2)/2) / ((2+√2+1/n)/(1+√2))` in floating point. Valid for `n ≥ 2`; with a
/// single short arc of length `√2` the height is `√2`, not 1.
pub fn star_ratio_closed(n: usize) -> f64 {
    let s = std::f64::consts::SQRT_2;
    ((2.0 + s) / 2.0) / ((2.0 + s + 1.0 / n as f64) / (1.0 + s))
}

pub fn star_network(n: usize) -> Result<RootedNetwork, AnalyticError> {
    if n == 0 {
        return Err(AnalyticError::EmptyStar);
    }
    Ok(fixtures::star(n)?)
}

/// Worst-case time of β over the game value, both computed on the star itself.
pub fn star_ratio(n: usize) -> Result<f64, AnalyticError> {
    let net = star_network(n)?;
    let dec = decompose(&net);
    let beta = block_strategy::beta_max_time(&net, &dec)?;
    let value = tree_game::tree_value(&net).expect("star is a tree");
    Ok(ratio::to_f64(&(beta / value)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Point;
    use crate::ratio::rat;
    use crate::search::{expected_time, Strategy};

    #[test]
    fn value_formula() {
        assert_eq!(cs_value(&int(0)).unwrap(), int(2));
        assert_eq!(cs_value(&int(1)).unwrap(), rat(5, 3));
        assert!(cs_value(&rat(-1, 2)).is_err());
        assert_eq!(cs_pbar(&rat(1, 2)), rat(2, 5));
    }

    #[test]
    fn searcher_equalizes_and_hider_guarantees() {
        for a in [rat(0, 1), rat(1, 4), rat(1, 2), rat(3, 4)] {
            let inst = CircleSpikeInstance::new(&a).unwrap();
            let net = &inst.network;
            let v = cs_value(&a).unwrap();
            let sigma = cs_searcher(&inst);
            let cw = net.arc_by_id("cw").unwrap();
            for k in 1..8 {
                let p = Point::new(cw, net.length(cw) * rat(k, 8));
                assert_eq!(sigma.time_to(net, &p), v);
            }
            assert_eq!(sigma.time_to(net, &net.node_point(net.node("B").unwrap())), v);
            let nu = cs_hider(&inst);
            let plus = expected_time(net, &cs_p_plus(net), &nu);
            let minus = expected_time(net, &cs_p_minus(net), &nu);
            assert_eq!(plus, v);
            assert!(minus >= v);
        }
    }

    #[test]
    fn bayesian_formulas() {
        let a = rat(1, 2);
        let inst = CircleSpikeInstance::new(&a).unwrap();
        let net = &inst.network;
        let p = rat(1, 3);
        let nu = cs_family(&inst, &p);
        let plus = &p * (int(1) + &a) / int(2) + (int(1) - &p) * (int(2) + &a);
        let minus = &p * (int(2) - &a + (int(1) + &a) / int(2)) + (int(1) - &p) * (int(2) - &a);
        assert_eq!(expected_time(net, &cs_p_plus(net), &nu), plus);
        assert_eq!(expected_time(net, &cs_p_minus(net), &nu), minus);
    }

    #[test]
    fn star_ratio_grows() {
        let r1 = star_ratio(1).unwrap();
        let r2 = star_ratio(2).unwrap();
        let r4 = star_ratio(4).unwrap();
        assert!(r1 < r2 && r2 < r4);
        // with one short arc the short leaf is the deepest, so the closed form starts at n = 2
        assert!((r2 - star_ratio_closed(2)).abs() < 1e-12);
        assert!((r4 - star_ratio_closed(4)).abs() < 1e-12);
    }
}
