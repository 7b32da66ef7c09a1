//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each, and
//! exits non-zero if any failed.
//!
//! Run with `cargo test -p expsearch-core --test acceptance`.

mod common;

use std::time::{Duration, Instant};

use expsearch::analytic::{self, CircleSpikeInstance};
use expsearch::block_strategy::{self, build_beta};
use expsearch::bounds;
use expsearch::bridge_strategy::build_gamma;
use expsearch::decomposition::{self, decompose};
use expsearch::fixtures;
use expsearch::network::{self, induced, Location};
use expsearch::oracle::{self, best_response, OracleConfig};
use expsearch::ratio::{self, int, rat, Rational};
use expsearch::search::{self, search_time, Strategy};
use expsearch::tree_game;
use expsearch::{Point, PureSearch, RootedNetwork};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

/// Tolerances and budgets, one per figure quoted by the criteria.
mod tol {
    use std::time::Duration;

    /// "to 12 significant digits": relative error below half a unit in the 12th digit.
    pub const SIG12: f64 = 5e-12;
    /// Oracle agreement with a closed form on 2-arc-connected networks.
    pub const ORACLE_EPS: f64 = 1e-6;
    /// Hider guarantee slack against enumerated searches.
    pub const HIDER_SLACK: f64 = 1e-9;
    /// Grid step and adjacent-value bound for the combined factor curve.
    pub const CURVE_STEP: f64 = 0.001;
    pub const CURVE_JUMP: f64 = 0.01;
    /// Star ratio distance from the limit at n = 10⁴.
    pub const STAR_LIMIT: f64 = 1e-3;
    /// Slack in the γ factor check.
    pub const GAMMA_EPS: f64 = 1e-9;
    pub const TABLE_BUDGET: Duration = Duration::from_secs(1);
    pub const TREE_BUDGET: Duration = Duration::from_secs(60);
    pub const GRID_PER_ARC: i64 = 100;
    pub const TREE_CASES: u32 = 50;
    pub const PROPERTY_CASES: u32 = 200;
}

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        // bound first so a NaN comparison fails the check
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn alphas() -> [Rational; 4] {
    [int(0), rat(1, 4), rat(1, 2), rat(3, 4)]
}

/// Every named fixture the gate sweeps.
fn all_fixtures() -> Vec<(String, RootedNetwork)> {
    let mut out: Vec<(String, RootedNetwork)> = vec![
        ("qbar".into(), fixtures::qbar()),
        ("fig4".into(), fixtures::fig4()),
        ("circle".into(), fixtures::circle()),
        ("three_parallel".into(), fixtures::three_parallel()),
        ("q_prime:qbar".into(), fixtures::by_name("q_prime:qbar").unwrap()),
        ("q_double_prime:qbar".into(), fixtures::by_name("q_double_prime:qbar").unwrap()),
    ];
    for a in alphas() {
        out.push((format!("circle_spike:{a}"), fixtures::circle_spike(&a).unwrap()));
    }
    for n in [2, 3, 5] {
        out.push((format!("star:{n}"), fixtures::star(n).unwrap()));
    }
    out
}

fn node(net: &RootedNetwork, name: &str) -> Point {
    net.node_point(net.node(name).expect("fixture node"))
}

fn table_reproduction() -> Check {
    let start = Instant::now();
    let net = fixtures::qbar();
    let dec = decompose(&net);
    let beta = build_beta(&net, &dec).map_err(|e| e.to_string())?;
    let (s1, s2) = (&beta.s1, &beta.s2);
    for (name, t1, t2) in [("A", 15, 2), ("B", 6, 13), ("C", 12, 8)] {
        let p = node(&net, name);
        let got = (search_time(&net, s1, &p), search_time(&net, s2, &p));
        ensure!(got == (int(t1), int(t2)), "leaf {name}: got {:?}, expected ({t1}, {t2})", got);
    }
    // block midpoints: the y, z, w rows and the row sums
    for (id, t1, t2) in [("y", rat(7, 1), rat(10, 1)), ("z", rat(25, 2), rat(9, 2)), ("w", rat(17, 2), rat(17, 2))] {
        let p = net.midpoint(net.arc_by_id(id).unwrap());
        let got = (search_time(&net, s1, &p), search_time(&net, s2, &p));
        ensure!(got == (t1.clone(), t2.clone()), "midpoint of {id}: got {:?}", got);
    }
    let x = net.midpoint(net.arc_by_id("x").unwrap());
    ensure!(
        search_time(&net, s1, &x) + search_time(&net, s2, &x) == int(17),
        "row sum at the midpoint of x"
    );
    for b in &dec.blocks {
        for &a in &b.arcs {
            for k in 1..tol::GRID_PER_ARC {
                let p = Point::new(a, net.length(a) * rat(k, tol::GRID_PER_ARC));
                let sum = search_time(&net, s1, &p) + search_time(&net, s2, &p);
                let want = net.total_measure() + decomposition::height(&net, &dec, &p);
                ensure!(sum == want && want == int(17), "T(S1)+T(S2) at {} is {sum}", net.describe_point(&p));
            }
        }
    }
    let el = start.elapsed();
    ensure!(el < tol::TABLE_BUDGET, "took {el:?}");
    Ok(())
}

fn beta_guarantee() -> Check {
    let net = fixtures::qbar();
    let got = block_strategy::beta_max_time(&net, &decompose(&net)).map_err(|e| e.to_string())?;
    ensure!(got == int(10), "qbar: {got}");
    for a in alphas() {
        let net = fixtures::circle_spike(&a).unwrap();
        let got = block_strategy::beta_max_time(&net, &decompose(&net)).map_err(|e| e.to_string())?;
        ensure!(got == int(2), "circle_spike {a}: {got}");
    }
    // one short arc is longer than the long arc, so the closed form starts at two
    let want = (2.0 + std::f64::consts::SQRT_2) / 2.0;
    for n in [2, 3, 10, 100] {
        let net = fixtures::star(n).unwrap();
        let got = block_strategy::beta_max_time(&net, &decompose(&net)).map_err(|e| e.to_string())?;
        ensure!(rel_close(ratio::to_f64(&got), want, tol::SIG12), "star {n}: {got}");
    }
    for (name, net) in all_fixtures() {
        let dec = decompose(&net);
        let beta = build_beta(&net, &dec).map_err(|e| e.to_string())?;
        let mu = net.total_measure();
        for a in net.arc_ixs() {
            for k in 0..tol::GRID_PER_ARC {
                let p = Point::new(a, net.length(a) * rat(k, tol::GRID_PER_ARC - 1));
                let t = beta.time_to(&net, &p);
                let cap = (&mu + decomposition::height(&net, &dec, &p)) / int(2);
                ensure!(t <= cap, "{name} at {}: {t} > {cap}", net.describe_point(&p));
            }
        }
    }
    Ok(())
}

fn tree_oracle() -> Check {
    let start = Instant::now();
    let mut r = runner(tol::TREE_CASES);
    r.run(&common::tree_shape(6), |shape| {
        let tree = shape.build();
        let value = tree_game::tree_value(&tree).unwrap();
        let want = (tree.total_measure() + tree_game::ebd_distance(&tree).unwrap()) / int(2);
        proptest::prop_assert_eq!(&value, &want);
        let o = oracle::oracle_value(&tree, &OracleConfig::default()).unwrap();
        proptest::prop_assert_eq!(&o.value, &want);
        let dfs = tree_game::biased_dfs(&tree).unwrap();
        for x in tree.leaves() {
            proptest::prop_assert_eq!(dfs.time_to(&tree, &tree.node_point(x)), want.clone());
        }
        Ok(())
    })
    .map_err(|e| e.to_string())?;
    let el = start.elapsed();
    ensure!(el < tol::TREE_BUDGET, "took {el:?}");
    Ok(())
}

fn two_arc_connected() -> Check {
    for (name, net, h) in [
        ("circle", fixtures::circle(), Some(rat(1, 4))),
        ("three_parallel", fixtures::three_parallel(), None),
    ] {
        let half = net.total_measure() / int(2);
        let cfg = OracleConfig {
            h: h.clone(),
            ..OracleConfig::default()
        };
        let o = oracle::oracle_value(&net, &cfg).map_err(|e| e.to_string())?;
        ensure!(oracle::within(&o.value, &half, tol::ORACLE_EPS), "{name}: oracle {}", o.value);
        let dec = decompose(&net);
        let beta = build_beta(&net, &dec).map_err(|e| e.to_string())?;
        for p in oracle::hider_candidates(&net, h.as_ref(), false).map_err(|e| e.to_string())? {
            let t = beta.time_to(&net, &p);
            ensure!(t == half, "{name}: β at {} is {t}", net.describe_point(&p));
        }
    }
    Ok(())
}

fn circle_spike() -> Check {
    let h = rat(1, 8);
    for a in alphas() {
        let inst = CircleSpikeInstance::new(&a).map_err(|e| e.to_string())?;
        let net = &inst.network;
        let v = analytic::cs_value(&a).map_err(|e| e.to_string())?;
        let sigma = analytic::cs_searcher(&inst);
        let cw = net.arc_by_id("cw").unwrap();
        // equalizes on the hider's support: the spike tip and the long arc;
        // the short arc is reached no later
        for p in oracle::hider_candidates(net, Some(&h), false).map_err(|e| e.to_string())? {
            let t = sigma.time_to(net, &p);
            let on_support = p.arc == cw || matches!(net.locate(&p), Location::Node(_));
            ensure!(
                if on_support { t == v } else { t <= v },
                "α={a}: σ at {} is {t}, value {v}",
                net.describe_point(&p)
            );
        }
        ensure!(sigma.time_to(net, &node(net, "B")) == v, "α={a}: σ at B");

        // best whole-arc search on the 1/8 grid against the optimal hider
        let arcs: Vec<_> = net.arc_ixs().collect();
        let grid = network::cells(net, &arcs, &h).map_err(|e| e.to_string())?;
        let fine = &grid.network;
        let nu = analytic::cs_hider(&inst);
        let mut mids = vec![ratio::zero(); fine.arc_count()];
        let mut nodes = vec![ratio::zero(); fine.node_count()];
        for at in &nu.atoms {
            match fine.locate(&grid.map_point(&at.point)) {
                Location::Node(x) => nodes[x.0] += &at.mass,
                Location::Interior { arc, .. } => mids[arc.0] += &at.mass,
            }
        }
        for u in &nu.uniforms {
            for (piece, _) in grid.pieces(u.arc) {
                mids[piece.0] += &u.mass * fine.length(*piece) / u.len();
            }
        }
        let br = best_response(fine, &mids, &nodes, 2_000_000).map_err(|e| e.to_string())?;
        ensure!(
            ratio::to_f64(&br.cost) >= ratio::to_f64(&v) - tol::HIDER_SLACK,
            "α={a}: best search {} costs {}",
            br.search.display(fine),
            br.cost
        );

        let cfg = OracleConfig {
            h: Some(h.clone()),
            ..OracleConfig::default()
        };
        let o = oracle::oracle_value(net, &cfg).map_err(|e| e.to_string())?;
        ensure!(oracle::within(&o.value, &v, ratio::to_f64(&h) / 2.0), "α={a}: oracle {} vs {v}", o.value);
    }
    Ok(())
}

fn lower_bounds() -> Check {
    let f4 = fixtures::fig4();
    let got = bounds::pushed_uniform_bound(&f4, &decompose(&f4));
    ensure!(got == rat(184, 19), "fig4 pushed uniform: {got}");
    let q = fixtures::qbar();
    let dq = decompose(&q);
    let got = bounds::pruning_bound(&q.total_measure(), &decomposition::network_height(&dq));
    ensure!(got == rat(25, 3), "qbar pruning: {got}");

    for (name, net) in all_fixtures() {
        let dec = decompose(&net);
        let rep = bounds::report(&net, &dec).map_err(|e| e.to_string())?;
        let o = oracle::oracle_value(&net, &OracleConfig::default()).map_err(|e| format!("{name}: {e}"))?;
        ensure!(rep.best_lower() <= o.value, "{name}: lower {} > oracle {}", rep.best_lower(), o.value);
        ensure!(o.value <= rep.beta_ub, "{name}: oracle {} > β {}", o.value, rep.beta_ub);
        ensure!(o.value <= rep.gamma_worst, "{name}: oracle {} > γ {}", o.value, rep.gamma_worst);
    }

    let cfg = OracleConfig {
        h: Some(rat(1, 2)),
        ..OracleConfig::default()
    };
    let on = |net: &RootedNetwork| oracle::oracle_value(net, &cfg).map(|o| o.value).map_err(|e| e.to_string());
    let full = on(&q)?;
    let prime = on(&bounds::build_q_prime(&q, &dq))?;
    let double = on(&bounds::build_q_double_prime(&q, &dq))?;
    ensure!(double <= prime && prime <= full, "Q″ {double}, Q′ {prime}, Q {full}");
    Ok(())
}

fn factor_curve() -> Check {
    let golden = bounds::golden_factor();
    let f = bounds::factor_f(bounds::breakpoint_low()).map_err(|e| e.to_string())?;
    let g = bounds::factor_g(bounds::breakpoint_high()).map_err(|e| e.to_string())?;
    ensure!(rel_close(golden, (1.0 + 2f64.sqrt()) / 2.0, tol::SIG12), "golden {golden}");
    ensure!(rel_close(f, golden, tol::SIG12) && rel_close(g, golden, tol::SIG12), "f {f}, g {g}");

    let steps = (1.0 / tol::CURVE_STEP).round() as usize;
    let grid: Vec<f64> = (0..=steps)
        .map(|k| bounds::combined_factor(k as f64 * tol::CURVE_STEP))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    for (k, w) in grid.windows(2).enumerate() {
        ensure!((w[1] - w[0]).abs() < tol::CURVE_JUMP, "jump at r = {}", k as f64 * tol::CURVE_STEP);
    }
    let peak = grid.iter().copied().fold(f64::MIN, f64::max);
    let at_breaks = [bounds::breakpoint_low(), bounds::breakpoint_high()]
        .map(|r| bounds::combined_factor(r).unwrap())
        .into_iter()
        .fold(f64::MIN, f64::max);
    ensure!(peak <= golden * (1.0 + tol::SIG12), "grid peak {peak}");
    ensure!(rel_close(at_breaks, golden, tol::SIG12), "peak at breakpoints {at_breaks}");

    let mut nets = vec![("qbar".to_string(), fixtures::qbar())];
    for a in alphas() {
        nets.push((format!("circle_spike:{a}"), fixtures::circle_spike(&a).unwrap()));
    }
    for (name, net) in nets {
        let dec = decompose(&net);
        let gamma = build_gamma(&net, &dec).map_err(|e| e.to_string())?;
        let r = decomposition::bridge_ratio(&dec);
        let scaled = gamma.worst_case(&net) * (ratio::one() + &r * &r) / int(2);
        let o = oracle::oracle_value(&net, &OracleConfig::default()).map_err(|e| e.to_string())?;
        ensure!(
            ratio::to_f64(&scaled) <= ratio::to_f64(&o.value) + tol::GAMMA_EPS,
            "{name}: T(γ)(1+r²)/2 = {scaled} > oracle {}",
            o.value
        );
    }
    Ok(())
}

fn star_tightness() -> Check {
    let ns = [1, 2, 4, 16, 100, 1000, 10_000];
    let ratios: Vec<f64> = ns
        .iter()
        .map(|&n| analytic::star_ratio(n))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    for (w, n) in ratios.windows(2).zip(ns.windows(2)) {
        ensure!(w[0] < w[1], "not increasing from n={} to n={}: {} vs {}", n[0], n[1], w[0], w[1]);
    }
    let last = *ratios.last().unwrap();
    ensure!((last - bounds::golden_factor()).abs() < tol::STAR_LIMIT, "n=10⁴: {last}");
    Ok(())
}

fn property_suites() -> Check {
    use proptest::prelude::*;
    use proptest::sample::Index;
    let mut r = runner(tol::PROPERTY_CASES);
    r.run(
        &(common::forked_tree_shape(7), common::weights(16), any::<[Index; 3]>()),
        |(shape, w, pick)| common::density_exchange(&shape, &w, &pick),
    )
    .map_err(|e| format!("density exchange: {e}"))?;

    let net = fixtures::qbar();
    let dec = decompose(&net);
    let block = &dec.blocks[0];
    let sub = induced(&net, &block.arcs, block.entry).map_err(|e| e.to_string())?;
    let s = PureSearch::from_ids(&sub, &[("x", true), ("y", false), ("w", false), ("z", false)]).map_err(|e| e.to_string())?;
    let rev = PureSearch::from_ids(&sub, &[("z", true), ("w", true), ("y", true), ("x", false)]).map_err(|e| e.to_string())?;
    ensure!(search::is_reversible(&sub, &s), "x,y′,w′,z′ rejected");
    ensure!(search::reverse(&s) == rev, "reverse of x,y′,w′,z′ is {}", search::reverse(&s).display(&sub));
    ensure!(search::is_reversible(&sub, &rev), "z,w,y,x′ rejected");

    let mut r = runner(tol::PROPERTY_CASES);
    r.run(&common::tree_shape(7), |shape| common::ebd_equal_density(&shape))
        .map_err(|e| format!("equal branch density: {e}"))?;
    Ok(())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("table reproduction on qbar", table_reproduction),
        ("block-optimal guarantee", beta_guarantee),
        ("tree game equals oracle", tree_oracle),
        ("2-arc-connected value is half the measure", two_arc_connected),
        ("circle with spike", circle_spike),
        ("lower bounds and sandwich", lower_bounds),
        ("factor curve and bridge-optimal check", factor_curve),
        ("star tightness", star_tightness),
        ("property suites", property_suites),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let el: Duration = start.elapsed();
        match outcome {
            Ok(()) => println!("criterion {}: PASS  {name} ({:.2?})", k + 1, el),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({:.2?}): {why}", k + 1, el);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
