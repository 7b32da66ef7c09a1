use std::fs;
use std::path::{Path, PathBuf};

use expsearch::analytic::{self, CircleSpikeInstance};
use expsearch::block_strategy;
use expsearch::bounds;
use expsearch::bridge_strategy;
use expsearch::decomposition::{self, decompose};
use expsearch::fixtures;
use expsearch::oracle::{self, OracleConfig, SolveMode};
use expsearch::ratio::{self, Rational};
use expsearch::search::io::{self as sio, HiderSpec, StrategySpec};
use expsearch::search::{expected_time, Strategy};
use expsearch::tree_game;
use expsearch::{HiderDistribution, Point, RootedNetwork};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::error::{lib, CliError};
use crate::report::NumberFormat;

/// What a command produced: a report, or raw text such as DOT or CSV.
pub enum Output {
    Report(Value),
    Text(String),
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn parse<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read(path)?).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

fn invalid<E: Into<expsearch::Error>>(path: &Path) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Invalid {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv is utf-8")
}

pub fn load_network(network: Option<&PathBuf>, fixture: Option<&str>) -> Result<RootedNetwork, CliError> {
    match (network, fixture) {
        (Some(p), None) => match RootedNetwork::from_json(&read(p)?) {
            Ok(net) => Ok(net),
            Err(expsearch::Error::Json(source)) => Err(CliError::Parse { path: p.clone(), source }),
            Err(e) => Err(CliError::Invalid { path: p.clone(), source: e }),
        },
        (None, Some(name)) => fixtures::by_name(name).map_err(lib),
        _ => Err(CliError::Usage("give exactly one of --network or --fixture".into())),
    }
}

fn load_hider(net: &RootedNetwork, path: &Path) -> Result<HiderDistribution, CliError> {
    let spec: HiderSpec = parse(path)?;
    sio::hider_from_spec(net, &spec).map_err(invalid(path))
}

fn network_summary(net: &RootedNetwork, fmt: NumberFormat) -> Value {
    let arcs: Vec<Value> = net
        .arcs()
        .iter()
        .map(|a| json!({"id": a.id, "u": net.node_name(a.u), "v": net.node_name(a.v), "length": fmt.q(&a.length)}))
        .collect();
    json!({
        "root": net.node_name(net.root()),
        "nodes": net.node_count(),
        "measure": fmt.q(&net.total_measure()),
        "tree": net.is_tree(),
        "leaves": net.leaves().into_iter().map(|x| net.node_name(x).to_string()).collect::<Vec<_>>(),
        "arcs": arcs,
    })
}

pub fn inspect(net: &RootedNetwork, dot: bool, fmt: NumberFormat) -> Output {
    if dot {
        return Output::Text(net.to_dot("network"));
    }
    Output::Report(network_summary(net, fmt))
}

pub fn decompose_cmd(net: &RootedNetwork, dot: bool, tree_out: Option<&PathBuf>, fmt: NumberFormat) -> Result<Output, CliError> {
    let dec = decompose(net);
    if let Some(p) = tree_out {
        write(p, &dec.bridge_tree.to_json())?;
    }
    if dot {
        return Ok(Output::Text(dec.bridge_tree.to_dot("bridge_tree")));
    }
    let bridges: Vec<String> = net.arc_ixs().filter(|&a| dec.is_bridge(a)).map(|a| net.arc(a).id.clone()).collect();
    let blocks: Vec<Value> = dec
        .blocks
        .iter()
        .enumerate()
        .map(|(k, b)| {
            json!({
                "block": dec.bridge_tree.node_name(dec.block_tree_node(k)),
                "entry": net.node_name(b.entry),
                "length": fmt.q(&b.length),
                "arcs": b.arcs.iter().map(|&a| net.arc(a).id.clone()).collect::<Vec<_>>().join(" "),
            })
        })
        .collect();
    let tree: Value = serde_json::to_value(dec.bridge_tree.to_spec()).expect("spec serializes");
    Ok(Output::Report(json!({
        "bridges": bridges,
        "blocks": blocks,
        "mu": fmt.q(dec.mu()),
        "mu1": fmt.q(&dec.mu1),
        "mu2": fmt.q(&dec.mu2),
        "r": fmt.q(&decomposition::bridge_ratio(&dec)),
        "pi": fmt.q(&decomposition::network_height(&dec)),
        "bridge_tree": tree,
    })))
}

pub fn tree_solve(net: &RootedNetwork, fmt: NumberFormat) -> Result<Output, CliError> {
    let sol = tree_game::solve_tree(net).map_err(lib)?;
    let ebd: Vec<Value> = sol
        .ebd
        .iter()
        .map(|(x, m)| json!({"leaf": net.node_name(*x), "mass": fmt.q(m)}))
        .collect();
    let mut branches = Vec::new();
    for (x, arcs) in &sol.branch_probs {
        for (a, p) in arcs {
            branches.push(json!({"node": net.node_name(*x), "arc": net.arc(*a).id, "first": fmt.q(p)}));
        }
    }
    Ok(Output::Report(json!({
        "ebd": ebd,
        "D": fmt.q(&sol.d),
        "value": fmt.q(&sol.value),
        "branch_probabilities": branches,
    })))
}

pub fn bayes(net: &RootedNetwork, hider: &Path, fmt: NumberFormat) -> Result<Output, CliError> {
    let nu = load_hider(net, hider)?;
    let sol = tree_game::bayes_tree_search(net, &nu).map_err(lib)?;
    let fine = &sol.network;
    Ok(Output::Report(json!({
        "search": sol.search.display(fine),
        "steps": sio::search_to_spec(fine, &sol.search),
        "value": fmt.q(&sol.value),
        "refined_arcs": fine.arc_count(),
    })))
}

pub fn beta(net: &RootedNetwork, out: Option<&PathBuf>, fmt: NumberFormat) -> Result<Output, CliError> {
    let dec = decompose(net);
    let b = block_strategy::build_beta(net, &dec).map_err(lib)?;
    let spec = sio::lottery_to_spec(net, &b.lottery());
    if let Some(p) = out {
        write(p, &(serde_json::to_string_pretty(&spec).expect("spec serializes") + "\n"))?;
    }
    let points: Vec<Value> = block_strategy::undominated_points(net, &dec)
        .iter()
        .map(|p| json!({"point": net.describe_point(p), "time": fmt.q(&b.time_to(net, p))}))
        .collect();
    Ok(Output::Report(json!({
        "s1": b.s1.display(net),
        "s2": b.s2.display(net),
        "worst_time": fmt.q(&block_strategy::beta_max_time(net, &dec).map_err(lib)?),
        "bound": fmt.q(&block_strategy::beta_bound(net, &dec)),
        "factor": fmt.f(bounds::beta_factor(net, &dec)),
        "undominated": points,
        "strategy": serde_json::to_value(&spec).expect("spec serializes"),
    })))
}

pub fn gamma(net: &RootedNetwork, fmt: NumberFormat) -> Result<Output, CliError> {
    let dec = decompose(net);
    let g = bridge_strategy::build_gamma(net, &dec).map_err(lib)?;
    let tree = &g.tree;
    let mut rule = Vec::new();
    for x in tree.nodes() {
        let kids = &g.tree_rule.layout.children[x.0];
        if kids.len() < 2 {
            continue;
        }
        for ((a, _), p) in kids.iter().zip(g.tree_rule.first_probs(x)) {
            rule.push(json!({"node": tree.node_name(x), "arc": tree.arc(*a).id, "first": fmt.q(&p)}));
        }
    }
    let blocks: Vec<Value> = dec
        .blocks
        .iter()
        .zip(&g.block_entries)
        .enumerate()
        .map(|(k, (b, s))| {
            json!({
                "block": tree.node_name(dec.block_tree_node(k)),
                "entry": net.node_name(b.entry),
                "search": s.display(net),
            })
        })
        .collect();
    Ok(Output::Report(json!({
        "tree_rule": rule,
        "block_searches": blocks,
        "worst_time": fmt.q(&g.worst_case(net)),
        "upper_bound": fmt.q(&bridge_strategy::gamma_upper_bound(&dec)),
        "factor": fmt.q(&bridge_strategy::gamma_factor(&dec)),
    })))
}

pub fn bounds_cmd(net: &RootedNetwork, fmt: NumberFormat) -> Result<Output, CliError> {
    let dec = decompose(net);
    let r = bounds::report(net, &dec).map_err(lib)?;
    Ok(Output::Report(json!({
        "mu": fmt.q(&r.mu),
        "mu1": fmt.q(&r.mu1),
        "mu2": fmt.q(&r.mu2),
        "r": fmt.q(&r.r),
        "pi": fmt.q(&r.pi),
        "lower": {
            "uniform": fmt.q(&r.uniform_lb),
            "pruning": fmt.q(&r.pruning_lb),
            "pushed_uniform": fmt.q(&r.pushed_uniform_lb),
            "best": fmt.q(&r.best_lower()),
        },
        "upper": {
            "beta": fmt.q(&r.beta_ub),
            "gamma_bound": fmt.q(&r.gamma_ub),
            "gamma_worst": fmt.q(&r.gamma_worst),
            "best": fmt.q(&r.best_upper()),
        },
        "factors": {
            "beta": fmt.f(r.factor_beta),
            "gamma": fmt.q(&r.factor_gamma),
            "combined": fmt.f(r.combined_factor),
        },
    })))
}

pub fn bound_curve(step: f64, out: Option<&PathBuf>, json_out: bool, fmt: NumberFormat) -> Result<Output, CliError> {
    let rows = bounds::bound_curve(step).map_err(lib)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["r", "f", "g", "combined"])?;
    for row in &rows {
        let cells = [row.r, row.f, row.g, row.combined].map(|x| match fmt.f(x) {
            Value::String(s) => s,
            _ => unreachable!(),
        });
        w.write_record(&cells)?;
    }
    let text = finish(w);
    if let Some(p) = out {
        write(p, &text)?;
    }
    if json_out || out.is_some() {
        let rows: Vec<Value> = rows
            .iter()
            .map(|r| json!({"r": fmt.f(r.r), "f": fmt.f(r.f), "g": fmt.f(r.g), "combined": fmt.f(r.combined)}))
            .collect();
        return Ok(Output::Report(json!({"rows": rows})));
    }
    Ok(Output::Text(text))
}

pub fn circle_spike(alpha: &Rational, fmt: NumberFormat) -> Result<Output, CliError> {
    let inst = CircleSpikeInstance::new(alpha).map_err(lib)?;
    let net = &inst.network;
    let v = analytic::cs_value(alpha).map_err(lib)?;
    let sigma = analytic::cs_searcher(&inst);
    let nu = analytic::cs_hider(&inst);
    let cw = net.arc_by_id("cw").expect("fixture arc");
    let mut points = vec![net.node_point(net.node("B").expect("fixture node"))];
    points.extend((1..8).map(|k| Point::new(cw, net.length(cw) * ratio::rat(k, 8))));
    let table: Vec<Value> = points
        .iter()
        .map(|p| {
            let t = sigma.time_to(net, p);
            json!({"point": net.describe_point(p), "time": fmt.q(&t), "equalized": t == v})
        })
        .collect();
    let searches: Vec<Value> = [
        ("P+", analytic::cs_p_plus(net)),
        ("P-", analytic::cs_p_minus(net)),
        ("P-back", analytic::cs_p_back(net)),
    ]
    .iter()
    .map(|(name, s)| json!({"search": name, "steps": s.display(net), "against_hider": fmt.q(&expected_time(net, s, &nu))}))
    .collect();
    let lottery: Vec<Value> = sigma
        .entries
        .iter()
        .map(|(p, s)| json!({"prob": fmt.q(p), "search": s.display(net)}))
        .collect();
    Ok(Output::Report(json!({
        "alpha": fmt.q(alpha),
        "value": fmt.q(&v),
        "hider_arc_mass": fmt.q(&analytic::cs_pbar(alpha)),
        "hider": serde_json::to_value(sio::hider_to_spec(net, &nu)).expect("spec serializes"),
        "searcher": lottery,
        "equalizer": table,
        "searches": searches,
    })))
}

pub struct OracleArgs {
    pub h: Option<Rational>,
    pub eps: f64,
    pub cap: usize,
    pub no_dominance: bool,
    pub iterative: bool,
    pub max_iter: usize,
    pub matrix: Option<PathBuf>,
}

pub fn oracle_cmd(net: &RootedNetwork, a: &OracleArgs, fmt: NumberFormat) -> Result<Output, CliError> {
    let mode = if a.iterative {
        SolveMode::Iterative {
            eps: a.eps,
            max_iter: a.max_iter,
            seed: oracle::seed_from_env(),
        }
    } else {
        SolveMode::Exact
    };
    let cfg = OracleConfig {
        h: a.h.clone(),
        mode,
        cap: a.cap,
        no_dominance: a.no_dominance,
    };
    let r = oracle::oracle_value(net, &cfg).map_err(lib)?;
    let fine = &r.network;
    // iterative results are floats in disguise; exact fractions of them are noise
    let num = |q: &Rational| if a.iterative { fmt.f(ratio::to_f64(q)) } else { fmt.q(q) };
    if let Some(p) = &a.matrix {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["search".to_string()];
        header.extend(r.game.hider_points.iter().map(|p| fine.describe_point(p)));
        w.write_record(&header)?;
        for (s, row) in r.game.searcher_strategies.iter().zip(&r.game.payoff) {
            let mut rec = vec![s.display(fine)];
            rec.extend(row.iter().map(|v| ratio::format_rational(v, fmt.decimals)));
            w.write_record(&rec)?;
        }
        let text = finish(w);
        write(p, &text)?;
    }
    let searcher: Vec<Value> = r
        .searcher_support()
        .into_iter()
        .map(|(s, w)| json!({"prob": num(w), "search": s.display(fine)}))
        .collect();
    let hider: Vec<Value> = r
        .hider_support()
        .into_iter()
        .map(|(p, w)| json!({"prob": num(w), "point": fine.describe_point(p)}))
        .collect();
    Ok(Output::Report(json!({
        "value": num(&r.value),
        "h": r.h.as_ref().map(|h| fmt.q(h)).unwrap_or(Value::String("whole arcs".into())),
        "solver": if a.iterative { "iterative" } else { "exact" },
        "eps": fmt.f(a.eps),
        "gap": fmt.f(r.gap),
        "counts": {
            "refined_arcs": fine.arc_count(),
            "hider_candidates": r.game.hider_points.len(),
            "searches": r.searches_considered,
            "searcher_support": searcher.len(),
            "hider_support": hider.len(),
            "dp_states": r.dp_states,
            "iterations": r.iterations,
        },
        "searcher_mix": searcher,
        "hider_mix": hider,
    })))
}

pub fn evaluate(net: &RootedNetwork, strategy: &Path, hider: &Path, fmt: NumberFormat) -> Result<Output, CliError> {
    let spec: StrategySpec = parse(strategy)?;
    let lottery = sio::lottery_from_spec(net, &spec).map_err(invalid(strategy))?;
    lottery.check_valid(net).map_err(invalid(strategy))?;
    let nu = load_hider(net, hider)?;
    let per_search: Vec<Value> = lottery
        .entries
        .iter()
        .map(|(p, s)| json!({"prob": fmt.q(p), "search": s.display(net), "expected_time": fmt.q(&expected_time(net, s, &nu))}))
        .collect();
    Ok(Output::Report(json!({
        "expected_time": fmt.q(&expected_time(net, &lottery, &nu)),
        "searches": per_search,
    })))
}

pub fn fixtures_cmd(name: Option<&str>, dot: bool) -> Result<Output, CliError> {
    match name {
        None => Ok(Output::Report(json!({ "fixtures": fixtures::NAMES }))),
        Some(n) => {
            let net = fixtures::by_name(n).map_err(lib)?;
            Ok(Output::Text(if dot { net.to_dot(n) } else { net.to_json() + "\n" }))
        }
    }
}
