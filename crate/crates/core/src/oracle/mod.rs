//! Desk-scale ground truth: the whole-arc search game on a subdivided network
//! against a finite set of hider points.
//!
//! The exact solver never builds the full matrix. It grows a set of searches by
//! row generation: solve the restricted game, ask the best-response DP for the
//! cheapest search against the hider's mix, and stop once no search beats the
//! restricted value. The iterative fallback enumerates every search instead.

pub mod dp;
pub mod lp;

use num_traits::{Signed, ToPrimitive};
use thiserror::Error;

use crate::decomposition::decompose;
use crate::network::{self, Location, NetworkError, Point, Refinement, RootedNetwork};
use crate::ratio::{self, Rational};
use crate::search::{Direction, PureSearch, Step, TimeTable};

pub use dp::{best_response, BestResponse};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("cap exceeded after {0} searches or states")]
    CapExceeded(usize),
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("{0} arcs after subdivision; at most {max} supported", max = dp::MAX_ARCS)]
    TooManyArcs(usize),
    #[error("subdivision step must be positive")]
    BadStep,
    #[error("no hider candidates")]
    NoCandidates,
    #[error("payoff matrix is empty or ragged")]
    BadMatrix,
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// How the matrix game is solved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolveMode {
    /// Rational simplex; gap is zero.
    Exact,
    /// Regret matching until the gap is at most `eps`.
    Iterative { eps: f64, max_iter: usize, seed: u64 },
}

/// Seed for the iterative solver from `EXPSEARCH_SEED`, default 0.
pub fn seed_from_env() -> u64 {
    std::env::var("EXPSEARCH_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(0)
}

#[derive(Debug, Clone)]
pub struct OracleConfig {
    /// Cell length on the arcs that carry hider candidates; `None` keeps whole arcs.
    pub h: Option<Rational>,
    pub mode: SolveMode,
    /// Limit on enumerated searches, or on DP states in exact mode.
    pub cap: usize,
    /// Put candidates on every node and every cell, not just the undominated ones.
    pub no_dominance: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            h: None,
            mode: SolveMode::Exact,
            cap: 2_000_000,
            no_dominance: false,
        }
    }
}

/// Hider candidates on a refined network, with the refinement that produced them.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub refinement: Refinement,
    /// Points of `refinement.network`.
    pub candidates: Vec<Point>,
}

/// Leaves of the bridge part, entries of leaf blocks, and the midpoint of every
/// cell of length at most `h` on block arcs. Returned on the original network.
///
/// Leaf-block entries carry the mass of the pushed-uniform hider, so they are
/// kept even though each is dominated by points of its block.
pub fn hider_candidates(net: &RootedNetwork, h: Option<&Rational>, no_dominance: bool) -> Result<Vec<Point>, OracleError> {
    let d = discretize(net, h, no_dominance)?;
    let r = &d.refinement;
    Ok(d.candidates
        .iter()
        .map(|p| match r.network.locate(p) {
            Location::Node(x) if x.0 < net.node_count() => net.node_point(x),
            _ => {
                let orig = r.original_arc(p.arc);
                let start = r.pieces(orig).iter().find(|(a, _)| *a == p.arc).unwrap().1.clone();
                Point::new(orig, start + &p.offset)
            }
        })
        .collect())
}

pub fn discretize(net: &RootedNetwork, h: Option<&Rational>, no_dominance: bool) -> Result<Discretization, OracleError> {
    if h.is_some_and(|h| *h <= ratio::zero()) {
        return Err(OracleError::BadStep);
    }
    let dec = decompose(net);
    let graded: Vec<_> = net
        .arc_ixs()
        .filter(|&a| no_dominance || dec.block_of_arc(a).is_some())
        .collect();
    let refinement = match h {
        Some(h) => network::cells(net, &graded, h)?,
        None => network::refine(net, &Default::default())?,
    };
    let fine = &refinement.network;
    let mut candidates = Vec::new();
    if no_dominance {
        candidates.extend(fine.nodes().filter(|&x| x != fine.root()).map(|x| fine.node_point(x)));
    } else {
        for x in dec.bridge_leaves(net) {
            candidates.push(fine.node_point(x));
        }
        for leaf in dec.bridge_tree.leaves() {
            if let Some(k) = dec.block_at_tree_node(leaf) {
                let entry = dec.blocks[k].entry;
                if entry != net.root() {
                    candidates.push(fine.node_point(entry));
                }
            }
        }
    }
    for &a in &graded {
        for (piece, _) in refinement.pieces(a) {
            candidates.push(fine.midpoint(*piece));
        }
    }
    if candidates.is_empty() {
        return Err(OracleError::NoCandidates);
    }
    Ok(Discretization { refinement, candidates })
}

/// Every whole-arc search, in depth-first order over the arc index of each next step.
pub fn enumerate_searches(net: &RootedNetwork, cap: usize) -> Result<Vec<PureSearch>, OracleError> {
    fn extend(
        net: &RootedNetwork,
        used: &mut Vec<bool>,
        covered: &mut Vec<bool>,
        prefix: &mut Vec<Step>,
        out: &mut Vec<PureSearch>,
        cap: usize,
    ) -> Result<(), OracleError> {
        if prefix.len() == net.arc_count() {
            if out.len() >= cap {
                return Err(OracleError::CapExceeded(out.len() + 1));
            }
            out.push(PureSearch::new(prefix.clone()));
            return Ok(());
        }
        for a in net.arc_ixs() {
            if used[a.0] {
                continue;
            }
            let arc = net.arc(a);
            let (dir, fresh) = match (covered[arc.u.0], covered[arc.v.0]) {
                (true, true) => (Direction::Forward, None),
                (true, false) => (Direction::Forward, Some(arc.v)),
                (false, true) => (Direction::Reverse, Some(arc.u)),
                (false, false) => continue,
            };
            used[a.0] = true;
            if let Some(x) = fresh {
                covered[x.0] = true;
            }
            prefix.push(Step::new(a, dir));
            let r = extend(net, used, covered, prefix, out, cap);
            prefix.pop();
            if let Some(x) = fresh {
                covered[x.0] = false;
            }
            used[a.0] = false;
            r?;
        }
        Ok(())
    }
    let mut used = vec![false; net.arc_count()];
    let mut covered = vec![false; net.node_count()];
    covered[net.root().0] = true;
    let mut out = Vec::new();
    extend(net, &mut used, &mut covered, &mut Vec::new(), &mut out, cap)?;
    Ok(out)
}

/// Solution of a finite game in which the searcher (rows) pays the hider (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct GameSolution {
    pub value: Rational,
    pub searcher_mix: Vec<Rational>,
    pub hider_mix: Vec<Rational>,
    /// Worst column against the searcher mix minus best row against the hider mix.
    pub gap: f64,
    pub iterations: usize,
}

pub fn solve_matrix_game(payoff: &[Vec<Rational>], mode: SolveMode) -> Result<GameSolution, OracleError> {
    let width = payoff.first().map_or(0, Vec::len);
    if width == 0 || payoff.iter().any(|r| r.len() != width) {
        return Err(OracleError::BadMatrix);
    }
    match mode {
        SolveMode::Exact => {
            let s = lp::solve_exact(payoff);
            Ok(GameSolution {
                value: s.value,
                searcher_mix: s.row_mix,
                hider_mix: s.col_mix,
                gap: 0.0,
                iterations: 0,
            })
        }
        SolveMode::Iterative { eps, max_iter, seed } => {
            let f: Vec<Vec<f64>> = payoff.iter().map(|r| r.iter().map(ratio::to_f64).collect()).collect();
            let s = lp::solve_iterative(&f, eps, max_iter, seed).map_err(OracleError::NoConvergence)?;
            let exact = |v: f64| Rational::from_float(v).unwrap_or_else(ratio::zero);
            Ok(GameSolution {
                value: exact(s.value),
                searcher_mix: s.row_mix.into_iter().map(exact).collect(),
                hider_mix: s.col_mix.into_iter().map(exact).collect(),
                gap: s.gap,
                iterations: s.iterations,
            })
        }
    }
}

/// The restricted game that certifies the value: every search the solver
/// considered against every hider candidate.
#[derive(Debug, Clone)]
pub struct MatrixGame {
    pub searcher_strategies: Vec<PureSearch>,
    pub hider_points: Vec<Point>,
    pub payoff: Vec<Vec<Rational>>,
    pub value: Rational,
    pub searcher_mix: Vec<Rational>,
    pub hider_mix: Vec<Rational>,
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub value: Rational,
    /// The subdivided network that strategies and points refer to.
    pub network: RootedNetwork,
    pub game: MatrixGame,
    pub h: Option<Rational>,
    pub gap: f64,
    /// Searches enumerated, or generated by best response in exact mode.
    pub searches_considered: usize,
    /// DP states of the last best-response call; zero in iterative mode.
    pub dp_states: usize,
    pub iterations: usize,
}

impl OracleResult {
    /// Hider points with positive weight, paired with their weight.
    pub fn hider_support(&self) -> Vec<(&Point, &Rational)> {
        self.game
            .hider_points
            .iter()
            .zip(&self.game.hider_mix)
            .filter(|(_, w)| **w > ratio::zero())
            .collect()
    }

    pub fn searcher_support(&self) -> Vec<(&PureSearch, &Rational)> {
        self.game
            .searcher_strategies
            .iter()
            .zip(&self.game.searcher_mix)
            .filter(|(_, w)| **w > ratio::zero())
            .collect()
    }
}

fn payoff_row(net: &RootedNetwork, s: &PureSearch, points: &[Point]) -> Vec<Rational> {
    let t = TimeTable::new(net, s);
    points.iter().map(|p| t.time(net, p)).collect()
}

/// Spreads a hider mix onto node weights and arc-midpoint weights for the DP.
fn weights(net: &RootedNetwork, points: &[Point], mix: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut mids = vec![ratio::zero(); net.arc_count()];
    let mut nodes = vec![ratio::zero(); net.node_count()];
    for (p, w) in points.iter().zip(mix) {
        match net.locate(p) {
            Location::Node(x) => nodes[x.0] += w,
            Location::Interior { arc, offset } => {
                debug_assert_eq!(offset * ratio::int(2), *net.length(arc));
                mids[arc.0] += w;
            }
        }
    }
    (mids, nodes)
}

/// Value of the discretized game on `net`, with certificate mixes.
pub fn oracle_value(net: &RootedNetwork, cfg: &OracleConfig) -> Result<OracleResult, OracleError> {
    let disc = discretize(net, cfg.h.as_ref(), cfg.no_dominance)?;
    let fine = disc.refinement.network;
    let points = disc.candidates;
    if fine.arc_count() > dp::MAX_ARCS {
        return Err(OracleError::TooManyArcs(fine.arc_count()));
    }
    match cfg.mode {
        SolveMode::Iterative { .. } => {
            let searches = enumerate_searches(&fine, cfg.cap)?;
            let payoff: Vec<Vec<Rational>> = searches.iter().map(|s| payoff_row(&fine, s, &points)).collect();
            let sol = solve_matrix_game(&payoff, cfg.mode)?;
            Ok(OracleResult {
                value: sol.value.clone(),
                network: fine,
                searches_considered: searches.len(),
                game: MatrixGame {
                    searcher_strategies: searches,
                    hider_points: points,
                    payoff,
                    value: sol.value,
                    searcher_mix: sol.searcher_mix,
                    hider_mix: sol.hider_mix,
                },
                h: cfg.h.clone(),
                gap: sol.gap,
                dp_states: 0,
                iterations: sol.iterations,
            })
        }
        SolveMode::Exact => {
            let uniform = vec![ratio::one() / ratio::int(points.len() as i64); points.len()];
            let (mids, nodes) = weights(&fine, &points, &uniform);
            let first = best_response(&fine, &mids, &nodes, cfg.cap)?;
            let mut searches = vec![first.search];
            let mut payoff = vec![payoff_row(&fine, &searches[0], &points)];
            let mut rounds = 0;
            loop {
                rounds += 1;
                let sol = lp::solve_exact(&payoff);
                let (mids, nodes) = weights(&fine, &points, &sol.col_mix);
                let br = best_response(&fine, &mids, &nodes, cfg.cap)?;
                if br.cost >= sol.value {
                    return Ok(OracleResult {
                        value: sol.value.clone(),
                        network: fine,
                        searches_considered: searches.len(),
                        game: MatrixGame {
                            searcher_strategies: searches,
                            hider_points: points,
                            payoff,
                            value: sol.value,
                            searcher_mix: sol.row_mix,
                            hider_mix: sol.col_mix,
                        },
                        h: cfg.h.clone(),
                        gap: 0.0,
                        dp_states: br.states,
                        iterations: rounds,
                    });
                }
                payoff.push(payoff_row(&fine, &br.search, &points));
                searches.push(br.search);
            }
        }
    }
}

/// Worst case of an f64 gap as a rational-friendly tolerance check.
pub fn within(a: &Rational, b: &Rational, tol: f64) -> bool {
    (a - b).abs().to_f64().is_some_and(|d| d <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::network::NetworkBuilder;
    use crate::ratio::{int, rat};
    use crate::tree_game;

    #[test]
    fn enumeration_counts() {
        let one = NetworkBuilder::new("O").arc("e", "O", "L", int(1)).build().unwrap();
        assert_eq!(enumerate_searches(&one, 10).unwrap().len(), 1);
        let two = NetworkBuilder::new("u")
            .arc("p", "u", "v", int(1))
            .arc("q", "u", "v", int(1))
            .build()
            .unwrap();
        assert_eq!(enumerate_searches(&two, 10).unwrap().len(), 2);
        let star = NetworkBuilder::new("O")
            .arc("a", "O", "A", int(1))
            .arc("b", "O", "B", int(1))
            .arc("c", "O", "C", int(1))
            .build()
            .unwrap();
        assert_eq!(enumerate_searches(&star, 10).unwrap().len(), 6);
        assert_eq!(enumerate_searches(&star, 5), Err(OracleError::CapExceeded(6)));
    }

    #[test]
    fn star_game_value() {
        let star = NetworkBuilder::new("O")
            .arc("a", "O", "A", int(1))
            .arc("b", "O", "B", int(1))
            .arc("c", "O", "C", int(1))
            .build()
            .unwrap();
        let leaves: Vec<Point> = star.leaves().into_iter().map(|x| star.node_point(x)).collect();
        let rows: Vec<Vec<Rational>> = enumerate_searches(&star, 10)
            .unwrap()
            .iter()
            .map(|s| payoff_row(&star, s, &leaves))
            .collect();
        assert_eq!(solve_matrix_game(&rows, SolveMode::Exact).unwrap().value, int(2));
        let r = oracle_value(&star, &OracleConfig::default()).unwrap();
        assert_eq!(r.value, int(2));
    }

    #[test]
    fn candidate_sets() {
        let net = fixtures::qbar();
        let c = hider_candidates(&net, None, false).unwrap();
        let names: Vec<String> = c.iter().map(|p| net.describe_point(p)).collect();
        assert_eq!(c.len(), 7, "{names:?}");
        let cs = fixtures::circle_spike(&rat(1, 2)).unwrap();
        let c = hider_candidates(&cs, Some(&rat(1, 4)), false).unwrap();
        // B, six cells of cw, two of ccw
        assert_eq!(c.len(), 1 + 6 + 2);
        assert!(discretize(&cs, Some(&int(0)), false).is_err());
    }

    #[test]
    fn tree_value_matches() {
        let t = NetworkBuilder::new("O")
            .arc("a", "O", "A", int(1))
            .arc("b", "O", "B", int(2))
            .arc("c", "B", "C", int(1))
            .arc("d", "B", "D", rat(1, 2))
            .build()
            .unwrap();
        let r = oracle_value(&t, &OracleConfig::default()).unwrap();
        assert_eq!(r.value, tree_game::tree_value(&t).unwrap());
    }

    #[test]
    fn qbar_in_sandwich() {
        let net = fixtures::qbar();
        let r = oracle_value(&net, &OracleConfig::default()).unwrap();
        assert!(r.value >= rat(25, 3) && r.value <= int(10), "{}", r.value);
        // regression constant for the whole-arc game on the seven undominated points
        assert_eq!(r.value, rat(129, 14));
        // certificates
        for row in &r.game.payoff {
            let e: Rational = row.iter().zip(&r.game.hider_mix).map(|(a, b)| a * b).sum();
            assert!(e >= r.value);
        }
    }

    #[test]
    fn fig4_and_refined_qbar_constants() {
        let r = oracle_value(&fixtures::fig4(), &OracleConfig::default()).unwrap();
        assert_eq!(r.value, rat(2105, 209));
        let half = OracleConfig {
            h: Some(rat(1, 2)),
            ..OracleConfig::default()
        };
        let q = fixtures::qbar();
        assert_eq!(oracle_value(&q, &half).unwrap().value, rat(129, 14));
        let dec = decompose(&q);
        let qp = crate::bounds::build_q_prime(&q, &dec);
        let qpp = crate::bounds::build_q_double_prime(&q, &dec);
        assert_eq!(oracle_value(&qp, &half).unwrap().value, rat(653, 75));
        assert_eq!(oracle_value(&qpp, &half).unwrap().value, rat(43, 5));
    }

    #[test]
    fn iterative_mode_agrees_on_small_game() {
        let net = fixtures::three_parallel();
        let cfg = OracleConfig {
            mode: SolveMode::Iterative { eps: 1e-4, max_iter: 1_000_000, seed: 1 },
            ..OracleConfig::default()
        };
        let r = oracle_value(&net, &cfg).unwrap();
        assert!(within(&r.value, &rat(3, 2), 1e-4));
        let exact = oracle_value(&net, &OracleConfig::default()).unwrap();
        assert_eq!(exact.value, rat(3, 2));
    }
}
