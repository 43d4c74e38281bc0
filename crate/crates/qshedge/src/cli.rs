//! Command-line front end.
//!
//! ```text
//! qshedge support <model.json|->             quasi-sure supports, polar atoms
//! qshedge price   <model.json|-> [--payoff SPEC]   superhedging price, both routes
//! qshedge check   <model.json|->             AIP / NA classification or tree report
//! qshedge hedge   <model.json|-> [--payoff SPEC]   backward superhedging on a tree
//! ```
//!
//! Flags: `--payoff call:K | put:K | linear:c1,c2,...` overrides the model
//! payoff; `--tolerance X` overrides the LP tolerance; `--normalize`
//! accepts unnormalized prior weights; `--oracle` appends brute-force
//! cross-checks to the report.
//!
//! Reports are byte-identical across runs on identical input: orderings
//! are fixed and every float prints with 17 significant digits. Exit
//! codes: 0 success or NA, 2 parse error, 3 instantaneous profit or
//! global AIP failure, 4 AIP-only, 5 internal invariant breach.

use crate::arbitrage::{analyze, classify, interval_rule_1d, MarketClass};
use crate::geometry::{MinimaxRow, Point};
use crate::measures::relevant_atoms;
use crate::model::{parse_model, ModelFile, ModelPayload, OnePeriodModel, PayoffSpec, TreeModel};
use crate::multiperiod::{backward_superhedge, global_aip, NodeValue};
use crate::pricing::{
    price_via_biconjugate, superhedge_price, Claim, OnePeriodMarket, PriceStatus,
};
use crate::{oracle, Error};
use std::collections::BTreeMap;
use std::io::{Read, Write};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_IP: i32 = 3;
pub const EXIT_AIP_ONLY: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;

/// 17-significant-digit float formatting; the one way numbers reach a
/// report.
fn fmt(x: f64) -> String {
    if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else {
        format!("{x:.16e}")
    }
}

fn fmt_point(p: &Point) -> String {
    if p.dim() == 1 {
        fmt(p.coord(0))
    } else {
        let coords: Vec<String> = p.coords().iter().map(|&c| fmt(c)).collect();
        format!("({})", coords.join(", "))
    }
}

fn fmt_points(points: &[Point]) -> String {
    let parts: Vec<String> = points.iter().map(fmt_point).collect();
    format!("[{}]", parts.join(", "))
}

fn fmt_weights(weights: &[f64]) -> String {
    let parts: Vec<String> = weights.iter().map(|&w| fmt(w)).collect();
    format!("[{}]", parts.join(", "))
}

struct Options {
    command: String,
    input: String,
    payoff: Option<PayoffSpec>,
    tolerance: f64,
    normalize: bool,
    oracle: bool,
}

fn parse_args(args: &[String]) -> Result<Options, Error> {
    let mut positional = Vec::new();
    let mut payoff = None;
    let mut tolerance = crate::DEFAULT_TOLERANCE;
    let mut normalize = false;
    let mut oracle = false;
    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        match arg.as_str() {
            "--payoff" => {
                let value = iter
                    .next()
                    .ok_or_else(|| Error::Parse("--payoff needs a value".into()))?;
                payoff = Some(PayoffSpec::parse_flag(value)?);
            }
            "--tolerance" => {
                let value = iter
                    .next()
                    .ok_or_else(|| Error::Parse("--tolerance needs a value".into()))?;
                tolerance = value
                    .parse()
                    .map_err(|_| Error::Parse(format!("tolerance '{value}'")))?;
                if tolerance.is_nan() || tolerance <= 0.0 || !tolerance.is_finite() {
                    return Err(Error::Parse(format!("tolerance {tolerance} must be > 0")));
                }
            }
            "--normalize" => normalize = true,
            "--oracle" => oracle = true,
            other if other.starts_with("--") => {
                return Err(Error::Parse(format!("unknown flag '{other}'")));
            }
            _ => positional.push(arg.clone()),
        }
    }
    let [command, input] = positional.as_slice() else {
        return Err(Error::Parse(
            "usage: qshedge <support|price|check|hedge> <model.json|-> [flags]".into(),
        ));
    };
    Ok(Options {
        command: command.clone(),
        input: input.clone(),
        payoff,
        tolerance,
        normalize,
        oracle,
    })
}

fn read_model(opts: &Options) -> Result<ModelFile, Error> {
    let text = if opts.input == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Error::Parse(format!("reading stdin: {e}")))?;
        buf
    } else {
        std::fs::read_to_string(&opts.input)
            .map_err(|e| Error::Parse(format!("reading {}: {e}", opts.input)))?
    };
    parse_model(&text)
}

/// Runs a parsed command line, writing the report to `out`; returns the
/// process exit code. Errors land on stderr via the caller.
pub fn run(args: &[String], out: &mut dyn Write) -> i32 {
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| dispatch(args, out)));
    match outcome {
        Ok(Ok(code)) => code,
        Ok(Err(err)) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .map(String::as_str)
                .or_else(|| panic.downcast_ref::<&str>().copied())
                .unwrap_or("invariant breach");
            eprintln!("internal error: {msg}");
            EXIT_INTERNAL
        }
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::GlobalIpDetected(_) => EXIT_IP,
        _ => EXIT_PARSE,
    }
}

fn dispatch(args: &[String], out: &mut dyn Write) -> Result<i32, Error> {
    let opts = parse_args(args)?;
    let model = read_model(&opts)?;
    match (opts.command.as_str(), &model.payload) {
        ("support", ModelPayload::OnePeriod(one)) => cmd_support(one, &opts, out),
        ("price", ModelPayload::OnePeriod(one)) => cmd_price(one, &opts, out),
        ("check", ModelPayload::OnePeriod(one)) => cmd_check_one(one, &opts, out),
        ("check", ModelPayload::Tree(tree)) => cmd_check_tree(tree, &opts, out),
        ("hedge", ModelPayload::Tree(tree)) => cmd_hedge(tree, &opts, out),
        ("support" | "price", ModelPayload::Tree(_)) => Err(Error::Parse(format!(
            "'{}' needs a one-period model",
            opts.command
        ))),
        ("hedge", ModelPayload::OnePeriod(_)) => {
            Err(Error::Parse("'hedge' needs a tree model".into()))
        }
        (other, _) => Err(Error::Parse(format!("unknown command '{other}'"))),
    }
}

fn write_line(out: &mut dyn Write, line: String) -> Result<(), Error> {
    writeln!(out, "{line}").map_err(|e| Error::Parse(format!("writing report: {e}")))
}

// ---------- support ----------

fn cmd_support(one: &OnePeriodModel, opts: &Options, out: &mut dyn Write) -> Result<i32, Error> {
    let market = one.to_market(opts.normalize)?;
    let support = market.support();
    let increments = market.increment_support();
    let relevant = relevant_atoms(market.priors());
    let polar: Vec<usize> = (0..market.atom_count())
        .filter(|j| !relevant.contains(j))
        .collect();
    write_line(out, format!("supp Y = {}", fmt_points(support.points())))?;
    write_line(out, format!("supp dY = {}", fmt_points(increments.points())))?;
    let polar_list: Vec<String> = polar.iter().map(|j| j.to_string()).collect();
    write_line(out, format!("polar atoms = [{}]", polar_list.join(", ")))?;
    Ok(EXIT_OK)
}

// ---------- price ----------

fn cmd_price(one: &OnePeriodModel, opts: &Options, out: &mut dyn Write) -> Result<i32, Error> {
    let market = one.to_market(opts.normalize)?;
    let (claim, spec) = one.resolve_claim(&market, opts.payoff.as_ref())?;
    let result = superhedge_price(&market, &claim, opts.tolerance)?;

    if result.status == PriceStatus::InstantaneousProfit {
        write_line(out, "INSTANTANEOUS PROFIT".into())?;
        write_line(out, format!("price = {}", fmt(result.price)))?;
        let report = analyze(&market, opts.tolerance);
        if let Some((theta, epsilon)) = report.ip_certificate {
            write_line(out, format!("ip direction = {}", fmt_point(&theta)))?;
            write_line(out, format!("ip margin = {}", fmt(epsilon)))?;
        }
        return Ok(EXIT_IP);
    }

    write_line(out, format!("price = {}", fmt(result.price)))?;
    let theta = result.theta_hat.as_ref().expect("finite price has a hedge");
    write_line(out, format!("theta = {}", fmt_point(theta)))?;
    write_line(out, format!("closedness = {}", result.closedness))?;
    write_line(
        out,
        format!("multiple hedges = {}", result.multiple_hedges),
    )?;
    let atoms = relevant_atoms(market.priors());
    for (j, slack) in atoms.iter().zip(&result.certificate_slack) {
        write_line(out, format!("slack[{j}] = {}", fmt(*slack)))?;
    }
    match &spec {
        Some(spec) => {
            let dual = price_via_biconjugate(&market, |z| spec.evaluate(z), opts.tolerance)?;
            let gap = (result.price - dual).abs();
            write_line(out, format!("route discrepancy = {}", fmt(gap)))?;
        }
        None => write_line(
            out,
            "route discrepancy = n/a (per-atom claim)".into(),
        )?,
    }

    if opts.oracle {
        let rows = price_rows(&market, &claim)?;
        let radius = theta.linf_norm() + 1.0;
        let (grid_value, _) = oracle::refined_grid_minimax(&rows, market.dimension(), radius, 16, 21);
        write_line(out, format!("oracle grid price = {}", fmt(grid_value)))?;
        write_line(
            out,
            format!("oracle grid gap = {}", fmt((grid_value - result.price).abs())),
        )?;
        let dual = oracle::minimax_by_enumeration(&rows, market.dimension(), opts.tolerance);
        write_line(out, format!("oracle dual price = {}", fmt(dual)))?;
        write_line(
            out,
            format!("oracle dual gap = {}", fmt((dual - result.price).abs())),
        )?;
        if let Some(spec) = &spec {
            let samples: Vec<(Point, f64)> = market
                .support()
                .points()
                .iter()
                .map(|z| (z.clone(), spec.evaluate(z).expect("validated payoff")))
                .collect();
            let env = oracle::envelope_by_enumeration(&samples, market.initial(), opts.tolerance);
            write_line(out, format!("oracle envelope = {}", fmt(env)))?;
            write_line(
                out,
                format!("oracle envelope gap = {}", fmt((env - result.price).abs())),
            )?;
        }
    }
    Ok(EXIT_OK)
}

fn price_rows(market: &OnePeriodMarket, claim: &Claim) -> Result<Vec<MinimaxRow>, Error> {
    let atoms = relevant_atoms(market.priors());
    let mut rows = Vec::with_capacity(atoms.len());
    for &j in &atoms {
        let offset = match claim {
            Claim::PerAtom(values) => values[j],
            Claim::OnSupport(_) => {
                let f = claim.as_function().expect("table claim");
                f(market.terminal().value(j)).ok_or_else(|| {
                    Error::ClaimMismatch(format!("no payoff for atom {j}"))
                })?
            }
        };
        rows.push(MinimaxRow::new(
            offset,
            market.initial().minus(market.terminal().value(j)),
        ));
    }
    Ok(rows)
}

// ---------- check ----------

fn cmd_check_one(one: &OnePeriodModel, opts: &Options, out: &mut dyn Write) -> Result<i32, Error> {
    let market = one.to_market(opts.normalize)?;
    let class = classify(&market, opts.tolerance);
    let report = analyze(&market, opts.tolerance);
    write_line(out, format!("classification = {class}"))?;
    write_line(out, format!("aip = {}", report.aip))?;
    write_line(out, format!("na = {}", report.na))?;
    if let Some(weights) = &report.aip_certificate {
        write_line(out, format!("aip weights = {}", fmt_weights(weights)))?;
    }
    if let Some((theta, epsilon)) = &report.ip_certificate {
        write_line(out, format!("ip direction = {}", fmt_point(theta)))?;
        write_line(out, format!("ip margin = {}", fmt(*epsilon)))?;
    }
    if let Some(weights) = &report.na_certificate {
        write_line(out, format!("na weights = {}", fmt_weights(weights)))?;
    }
    if let Some(direction) = &report.na_violation {
        write_line(out, format!("na violation = {}", fmt_point(direction)))?;
    }
    if opts.oracle {
        let support = market.increment_support();
        let origin = Point::zero(market.dimension());
        let enumerated =
            oracle::hull_contains_by_enumeration(support.points(), &origin, opts.tolerance);
        write_line(out, format!("oracle hull membership = {enumerated}"))?;
        if enumerated != report.aip {
            panic!("hull enumeration disagrees with the AIP check");
        }
        if market.dimension() == 1 {
            let interval = interval_rule_1d(&market)?;
            write_line(out, format!("oracle interval rule = {interval}"))?;
            if interval != report.aip {
                panic!("interval rule disagrees with the AIP check");
            }
        }
    }
    Ok(match class {
        MarketClass::Na => EXIT_OK,
        MarketClass::AipOnly => EXIT_AIP_ONLY,
        MarketClass::Ip => EXIT_IP,
    })
}

fn cmd_check_tree(spec: &TreeModel, opts: &Options, out: &mut dyn Write) -> Result<i32, Error> {
    let tree = spec.to_tree(opts.normalize)?;
    let report = global_aip(&tree, opts.tolerance);
    write_line(out, format!("global AIP = {}", report.global_aip))?;
    write_line(out, format!("global NA = {}", report.global_na))?;
    if report.failing_nodes.is_empty() {
        write_line(out, "failing nodes = []".into())?;
    } else {
        for (id, class) in &report.failing_nodes {
            write_line(out, format!("node {id}: {class}"))?;
        }
    }
    if opts.oracle {
        let found = crate::multiperiod::brute_force_global_ip(&tree, 2.0, 1.0)?;
        write_line(out, format!("oracle grid ip = {found}"))?;
        if found && report.global_aip {
            panic!("grid profit found on a tree passing global AIP");
        }
    }
    Ok(if !report.global_aip {
        EXIT_IP
    } else if !report.global_na {
        EXIT_AIP_ONLY
    } else {
        EXIT_OK
    })
}

// ---------- hedge ----------

fn cmd_hedge(spec: &TreeModel, opts: &Options, out: &mut dyn Write) -> Result<i32, Error> {
    let tree = spec.to_tree(opts.normalize)?;
    let payoff = spec.resolve_terminal_payoff(&tree, opts.payoff.as_ref())?;
    let values = backward_superhedge(&tree, &payoff, opts.tolerance)?;

    let mut by_depth: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for id in tree.node_ids() {
        let depth = tree.node(id).expect("listed node").depth;
        by_depth.entry(depth).or_default().push(id);
    }
    for (depth, ids) in by_depth.iter().rev() {
        for id in ids {
            match &values[id] {
                NodeValue::Priced { value, theta } => {
                    let mut line = format!("depth {depth}: node {id} value = {}", fmt(*value));
                    if let Some(theta) = theta {
                        line.push_str(&format!(" theta = {}", fmt_point(theta)));
                    }
                    write_line(out, line)?;
                }
                NodeValue::Unreachable => {
                    write_line(out, format!("depth {depth}: node {id} unconstrained"))?;
                }
            }
        }
    }
    let root_value = values[&tree.root()]
        .value()
        .expect("root is always reachable");
    write_line(out, format!("root cost = {}", fmt(root_value)))?;

    if opts.oracle {
        let mut worst_gap = 0.0f64;
        for id in tree.node_ids() {
            let node = tree.node(id).expect("listed node");
            if node.children.is_empty() {
                continue;
            }
            if let NodeValue::Priced { value, theta } = &values[&id] {
                let market = crate::multiperiod::one_step_market(&tree, id)?;
                let child_values: Vec<f64> = node
                    .children
                    .iter()
                    .map(|c| values[c].value().unwrap_or(0.0))
                    .collect();
                let rows = price_rows(&market, &Claim::PerAtom(child_values))?;
                let radius = theta.as_ref().map_or(1.0, Point::linf_norm) + 1.0;
                let (grid_value, _) =
                    oracle::refined_grid_minimax(&rows, tree.dimension(), radius, 16, 21);
                worst_gap = worst_gap.max((grid_value - value).abs());
            }
        }
        write_line(out, format!("oracle worst node gap = {}", fmt(worst_gap)))?;
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_is_17_significant_digits() {
        assert_eq!(fmt(10.0), "1.0000000000000000e1");
        assert_eq!(fmt(0.5), "5.0000000000000000e-1");
        assert_eq!(fmt(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn args_parse_flags_and_positionals() {
        let args: Vec<String> = ["price", "m.json", "--payoff", "call:100", "--oracle"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let opts = parse_args(&args).unwrap();
        assert_eq!(opts.command, "price");
        assert_eq!(opts.input, "m.json");
        assert!(opts.oracle);
        assert_eq!(opts.payoff, Some(PayoffSpec::Call { strike: 100.0 }));
    }

    #[test]
    fn args_reject_unknown_flags() {
        let args: Vec<String> = ["check", "m.json", "--fast"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert!(parse_args(&args).is_err());
    }
}
