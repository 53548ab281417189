import argparse
import dataclasses
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np
import pandas as pd
from dotenv import load_dotenv

from tradenet.analysis.demand import Demand
from tradenet.analysis.dynamics import Dynamics, Scheduler
from tradenet.analysis.equilibria import Equilibria
from tradenet.analysis.fairness import Fairness
from tradenet.analysis.game import TradingGame
from tradenet.analysis.geometry import Geometry
from tradenet.analysis.reduction import Reduction
from tradenet.analysis.welfare import Welfare
from tradenet.exact import format_number, format_vector, on_lattice, to_fraction
from tradenet.exceptions import (
    EnumerationCapError, RoundCapReached, ScenarioError, TradeNetError, VerificationError
)
from tradenet.logging_config import logger
from tradenet.models import RunConfig
from tradenet.scenario import ALGORITHMS, RunSpec, Scenario

ANALYSES = ("ce", "ne-check", "extend-ce", "core", "fairness", "essential", "reduce", "taxed", "facets", "implement")

RNG_NAME = f"{Scheduler.RNG_ALGORITHM} (numpy {np.__version__})"

def _fraction(text):
    try:
        return to_fraction(text)
    except ValueError as error:
        raise argparse.ArgumentTypeError(str(error))

def _require(value, kind, name):
    if value is None:
        raise ScenarioError(f"scenario has no {kind} named '{name}'")
    return value

def _verified(result, check, message):
    """Embed ``verified: true`` or refuse to emit the result."""
    if not check:
        raise VerificationError(message)
    result["verified"] = True
    return result

# ---- validate ----

def _grid_box(demand, agent, step):
    low, high = demand.default_box(agent)
    cells = math.ceil((high - low) / step)
    return low, low + cells * step

def cmd_validate(path):
    """
    Parse a scenario and report its structure.

    Parameters
    ----------
    path : str
        Scenario file or fixture name

    Returns
    -------
    dict
        Size, max degree Delta, finite/integral flags and a per-agent substitutability verdict
    """
    scenario = Scenario.from_file(path)
    market = scenario.market
    demand = Demand(market)
    step = Fraction(1, 2)
    agents = {}
    for agent in market.agents:
        entry = {"trades": len(market.incident(agent))}
        try:
            verdict = demand.is_fully_substitutable(agent, _grid_box(demand, agent, step), step)
            entry["fully_substitutable"] = verdict.substitutable
            if not verdict:
                entry["witness"] = {
                    "p": format_vector(verdict.witness["p"]),
                    "p_prime": format_vector(verdict.witness["p_prime"]),
                    "bundle": market.sort_trades(verdict.witness["bundle"]),
                    "condition": verdict.witness["condition"],
                }
        except EnumerationCapError as error:
            logger.warning(f"Skipping substitutability of {agent}: {error}")
            entry["fully_substitutable"] = None
        agents[agent] = entry
    return {
        "name": market.name,
        "n": market.n,
        "m": market.m,
        "Delta": market.max_degree,
        "finite_valuations": market.all_finite,
        "integral": market.is_integral,
        "agents": agents,
        "runs": sorted(scenario.runs),
        "schedules": sorted(scenario.schedules),
    }

# ---- run ----

def _run_spec(scenario, args):
    if args.run is not None:
        spec = _require(scenario.run(args.run), "run", args.run)
    else:
        spec = RunSpec("cli", args.algorithm or "offers", RunConfig())
    config = spec.config
    overrides = {}
    if args.epsilon is not None:
        overrides["epsilon"] = args.epsilon
    if args.rounds is not None:
        overrides["rounds"] = args.rounds
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.R is not None:
        overrides["R"] = args.R
    if overrides:
        config = dataclasses.replace(config, **overrides)
    algorithm = args.algorithm or spec.algorithm
    if algorithm == "offers" and config.epsilon is None:
        config = dataclasses.replace(config, epsilon=Fraction(1, 2))
    schedule = args.schedule if args.schedule is not None else spec.schedule
    if schedule is not None:
        _require(scenario.schedule(schedule), "schedule", schedule)
    return RunSpec(spec.name, algorithm, config, schedule)

def execute_run(scenario, spec, out_dir, tag="", plot=False):
    """
    Run one dynamics configuration and write its trace and terminal state.

    Returns
    -------
    dict
        Summary row: seed, rounds, terminal phi or ce_gap, wall time and RNG name
    """
    market = scenario.market
    dynamics = Dynamics(market)
    scheduler = scenario.scheduler(spec)
    started = time.perf_counter()
    if spec.algorithm == "offers":
        run = dynamics.run_offer_dynamics(spec.config, scheduler)
        trace = run.trace
        terminal = {
            "offers": run.offers.to_dict(market),
            "outcome": dynamics.game.outcome_of_offers(run.offers).to_dict(market),
            "rounds": run.rounds,
            "terminated": run.terminated,
        }
        if run.terminated:
            terminal["nash"] = "eps_tight_nash"
            terminal["verified"] = True
        row = {"phi": dynamics.potential_phi(run.offers, spec.config.epsilon), "terminated": run.terminated}
    else:
        run = dynamics.run_price_dynamics(spec.config, scheduler)
        trace = run.trace
        origin = trace.records[0].snapshot
        if not on_lattice(run.final_prices, run.epsilon, origin):
            raise VerificationError("final prices left the price lattice")
        gap = dynamics.ce_gap(run.average_prices)
        terminal = _verified({
            "final_prices": format_vector(run.final_prices),
            "average_prices": format_vector(run.average_prices),
            "epsilon": format_number(run.epsilon),
            "rounds": run.rounds,
            "ce_gap_average": format_number(gap),
            "ce_gap_final": format_number(dynamics.ce_gap(run.final_prices)),
        }, gap >= 0, "ce_gap below zero")
        row = {"ce_gap": format_number(gap), "epsilon": format_number(run.epsilon), "terminated": True}
    wall = time.perf_counter() - started

    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, f"trace{tag}.jsonl"), "w", encoding="utf-8") as handle:
        handle.write(trace.to_jsonl(market))
    with open(os.path.join(out_dir, f"terminal{tag}.json"), "w", encoding="utf-8") as handle:
        json.dump(terminal, handle, indent=4, sort_keys=True)
    if plot:
        _write_plot(trace, market, out_dir, tag)

    row.update({
        "seed": spec.config.seed if spec.schedule is None else None,
        "algorithm": spec.algorithm,
        "rounds": run.rounds,
        "wall_time": round(wall, 6),
        "rng": RNG_NAME if spec.schedule is None else "scripted",
    })
    return row

def _write_plot(trace, market, out_dir, tag):
    import matplotlib
    matplotlib.use("Agg")
    from tradenet import visuals

    if trace.algorithm == "clock":
        df = visuals.plot_lyapunov(trace, Welfare(market).market_value(), path=os.path.join(out_dir, f"lyapunov{tag}.png"))
        df[["round", "L"]].to_csv(os.path.join(out_dir, f"lyapunov{tag}.dat"), sep=" ", index=False)
    else:
        df = visuals.plot_potential(trace, path=os.path.join(out_dir, f"potential{tag}.png"))
        df[["round", "phi"]].to_csv(os.path.join(out_dir, f"potential{tag}.dat"), sep=" ", index=False)

def _sweep_task(task):
    source, spec, seed, out_dir, plot = task
    scenario = Scenario.from_file(source)
    spec = RunSpec(spec.name, spec.algorithm, dataclasses.replace(spec.config, seed=seed), None)
    return execute_run(scenario, spec, out_dir, tag=f"-seed{seed}", plot=plot)

def cmd_run(args):
    """
    Run offer or clock dynamics; a sweep repeats the run over consecutive seeds.

    Returns
    -------
    int
        0 on clean termination, 3 when an offer run stops at its round cap
    """
    scenario = Scenario.from_file(args.scenario)
    spec = _run_spec(scenario, args)
    if spec.algorithm not in ALGORITHMS:
        raise ScenarioError(f"unknown algorithm '{spec.algorithm}'")
    out_dir = args.out

    if args.sweep:
        if spec.schedule is not None:
            raise ScenarioError("seed sweeps need a random scheduler, not a scripted schedule")
        seeds = range(spec.config.seed, spec.config.seed + args.sweep)
        tasks = [(scenario.source, spec, seed, out_dir, args.plot) for seed in seeds]
        if args.workers > 1:
            with ProcessPoolExecutor(max_workers=args.workers) as executor:
                rows = list(executor.map(_sweep_task, tasks))
        else:
            rows = [_sweep_task(task) for task in tasks]
    else:
        rows = [execute_run(scenario, spec, out_dir, plot=args.plot)]

    summary = pd.DataFrame(rows).sort_values("seed", na_position="first") if args.sweep else pd.DataFrame(rows)
    os.makedirs(out_dir, exist_ok=True)
    summary.to_csv(os.path.join(out_dir, "summary.csv"), index=False)
    if args.format == "csv":
        print(summary.to_csv(index=False), end="")
    else:
        print(json.dumps(summary.to_dict(orient="records"), indent=4, default=str))

    capped = [row for row in rows if not row["terminated"]]
    if capped:
        raise RoundCapReached(f"{len(capped)} run(s) stopped at the round cap")
    return 0

# ---- analyze ----

def _analyze_ce(scenario, args):
    market = scenario.market
    equilibria = Equilibria(market)
    arrangement = equilibria.solve_ce_prices(integral=args.integral)
    result = arrangement.to_dict(market)
    result["market_value"] = format_number(Welfare(market).market_value())
    result["lyapunov"] = format_number(equilibria.lyapunov(arrangement.prices))
    return _verified(result, equilibria.is_competitive_equilibrium(arrangement), "solved prices failed the CE check")

def _analyze_ne_check(scenario, args):
    market = scenario.market
    offers = _require(scenario.offer_profile(args.offers), "offer profile", args.offers)
    epsilon = args.epsilon if args.epsilon is not None else Fraction(1, 2)
    game = TradingGame(market)
    report = game.is_nash(offers, epsilon)
    result = {"status": report.status, "epsilon": format_number(epsilon)}
    if report.witness_agent is not None:
        result["witness"] = {
            "agent": report.witness_agent,
            "offers": format_vector(report.witness_offers),
            "gain": format_number(report.witness_gain),
        }
    if report.crossed_trades:
        result["crossed_trades"] = list(report.crossed_trades)
    if report.status == "eps_tight_nash":
        result["approximate_ce"] = game.approx_ce_from_tight_ne(offers, epsilon).to_dict(market)
    result["verified"] = True
    return result

def _analyze_extend(scenario, args):
    market = scenario.market
    offers = _require(scenario.offer_profile(args.offers), "offer profile", args.offers)
    game = TradingGame(market)
    bound = game.extension_bound()
    epsilon = args.epsilon if args.epsilon is not None else (bound / 2 if bound else Fraction(1, 2))
    arrangement = game.extend_ne_to_ce(offers, epsilon)
    result = arrangement.to_dict(market)
    result["epsilon"] = format_number(epsilon)
    integral = all(p.denominator == 1 for p in arrangement.prices.values())
    return _verified(result, Equilibria(market).is_competitive_equilibrium(arrangement) and integral,
                     "extension is not an integral competitive equilibrium")

def _imputation_json(market, imputation):
    return {a: format_number(imputation[a]) for a in market.agents}

def _analyze_core(scenario, args):
    market = scenario.market
    fairness = Fairness(market)
    cf = fairness.characteristic_function()
    result = {"characteristic_function": cf.to_dict(), "core_nonempty": fairness.core_nonempty(cf)}
    if result["core_nonempty"] and market.n <= Fairness.MAX_VERTEX_AGENTS:
        result["vertices"] = [_imputation_json(market, v) for v in fairness.core_vertices(cf)]
    if args.imputation is not None:
        x = _require(scenario.imputation(args.imputation), "imputation", args.imputation)
        check = fairness.is_core_imputation(cf, x)
        result["imputation"] = {"in_core": check.in_core}
        if check.violation is not None:
            result["imputation"]["violation"] = {
                "kind": check.violation.kind,
                "coalition": [a for a in market.agents if a in check.violation.coalition],
                "value": format_number(check.violation.value),
                "bound": format_number(check.violation.bound),
            }
    if args.outcome is not None:
        outcome = _require(scenario.outcome(args.outcome), "outcome", args.outcome)
        in_core = fairness.is_core_outcome(outcome)
        entry = {"in_core": in_core}
        if market.n <= Fairness.MAX_ORACLE_AGENTS:
            oracle, _ = fairness.core_outcome_oracle(outcome)
            if oracle != in_core:
                raise VerificationError("blocking search disagrees with the imputation criterion")
            entry["oracle_agrees"] = True
        result["outcome"] = entry
    result["verified"] = True
    return result

def _analyze_fairness(scenario, args):
    market = scenario.market
    fairness = Fairness(market)
    cf = fairness.characteristic_function()
    imputations = {
        "leximin": fairness.leximin_imputation(cf),
        "leximax": fairness.leximax_imputation(cf),
    }
    if market.n <= Fairness.MAX_MINVAR_AGENTS:
        imputations["minvar"] = fairness.minvar_imputation(cf)
    result = {name: _imputation_json(market, x) for name, x in imputations.items()}
    essential = fairness.essential_agents()
    result["essential"] = [a for a in market.agents if a in essential]
    result["inessential_max_utility"] = {
        a: format_number(fairness.maximize_agent_utility(cf, a)) for a in market.agents if a not in essential
    }
    in_core = all(fairness.is_core_imputation(cf, x) for x in imputations.values())
    return _verified(result, in_core, "a fair imputation left the core")

def _analyze_essential(scenario, args):
    market = scenario.market
    essential = Fairness(market).essential_agents()
    return {"essential": [a for a in market.agents if a in essential], "verified": True}

def _analyze_reduce(scenario, args):
    market = scenario.market
    reduction = Reduction(market)
    welfare = Welfare(market)
    auction = reduction.to_auction()
    round_trip = all(
        reduction.tau(a, reduction.tau(a, b)) == b for a in market.agents for b in market.bundles(a)
    )
    preserved = all(
        reduction.auction_social_welfare(reduction.map_allocation(phi)) == welfare.social_welfare(phi)
        for phi in market.allocations()
    )
    result = {
        "goods": list(auction.goods),
        "valuations": {
            a: [{"goods": market.sort_trades(g), "value": format_number(v)} for g, v in auction.valuations[a].items()]
            for a in market.agents
        },
        "round_trip": round_trip,
        "welfare_preserved": preserved,
    }
    checks = round_trip and preserved
    if args.arrangement is not None:
        arrangement = _require(scenario.arrangement(args.arrangement), "arrangement", args.arrangement)
        result["holdings"] = {
            a: market.sort_trades(g) for a, g in reduction.map_allocation(arrangement.allocation).items()
        }
        result["ce_mapping"] = reduction.verify_ce_mapping(arrangement)
        checks = checks and result["ce_mapping"]
    return _verified(result, checks, "reduction identities failed")

def _analyze_taxed(scenario, args):
    market = scenario.market
    arrangement = _require(scenario.arrangement(args.arrangement), "arrangement", args.arrangement)
    alpha = args.alpha if args.alpha is not None else to_fraction(scenario.alpha or 0)
    check = Fairness(market).taxed_ce_check(arrangement, alpha)
    result = {
        "alpha": format_number(alpha),
        "taxed_ce": check.taxed_ce,
        "original_ce": check.original_ce,
        "efficient": check.efficient,
        "original_ce_implies_taxed_ce": check.original_ce_implies_taxed_ce,
        "taxed_allocation_efficient": check.taxed_allocation_efficient,
    }
    if not check.taxed_allocation_efficient:
        logger.warning("taxed equilibrium allocation is not efficient")
    return _verified(result, check.original_ce_implies_taxed_ce, "an original equilibrium failed in the taxed market")

def _analyze_facets(scenario, args):
    market = scenario.market
    geometry = Geometry(market)
    demand = Demand(market)
    step = args.step if args.step is not None else Fraction(1, 2)
    agents = [args.agent] if args.agent else [a for a in market.agents if 0 < len(market.incident(a)) <= Geometry.MAX_DIMENSION]
    result = {}
    agree = True
    for agent in agents:
        market.check_agent(agent)
        box = _grid_box(demand, agent, step)
        facets = geometry.lip_facets(agent, box, step)
        verdict = geometry.is_substitutes_by_normals(agent, box, step)
        grid = demand.is_fully_substitutable(agent, box, step)
        agree = agree and verdict.substitutable == grid.substitutable
        result[agent] = {
            "facets": [f.to_dict() for f in facets],
            "substitutes_by_normals": verdict.substitutable,
            "fully_substitutable": grid.substitutable,
        }
    return _verified({"agents": result}, agree, "facet verdict disagrees with the substitutability grid check")

def _analyze_implement(scenario, args):
    market = scenario.market
    fairness = Fairness(market)
    cf = fairness.characteristic_function()
    if args.imputation is not None:
        x = _require(scenario.imputation(args.imputation), "imputation", args.imputation)
    else:
        x = fairness.leximin_imputation(cf)
    allocation = Welfare(market).efficient_allocations()[0]
    outcome = fairness.implement_imputation(allocation, x)
    result = outcome.to_dict(market)
    result["utilities"] = _imputation_json(market, x)
    return _verified(result, fairness.is_core_outcome(outcome), "implemented outcome is not in the core")

ANALYZERS = {
    "ce": _analyze_ce,
    "ne-check": _analyze_ne_check,
    "extend-ce": _analyze_extend,
    "core": _analyze_core,
    "fairness": _analyze_fairness,
    "essential": _analyze_essential,
    "reduce": _analyze_reduce,
    "taxed": _analyze_taxed,
    "facets": _analyze_facets,
    "implement": _analyze_implement,
}

def cmd_analyze(args):
    """Dispatch one analysis and return its JSON-ready result."""
    scenario = Scenario.from_file(args.scenario)
    logger.debug(f"Analyzing {scenario.market.name}: {args.what}")
    return ANALYZERS[args.what](scenario, args)

# ---- entry point ----

def build_parser():
    parser = argparse.ArgumentParser(prog="tradenet", description="Trading-network markets: equilibria, dynamics and fairness.")
    commands = parser.add_subparsers(dest="command", required=True)

    validate = commands.add_parser("validate", help="parse a scenario and report its structure")
    validate.add_argument("--scenario", required=True)

    run = commands.add_parser("run", help="run offer or clock dynamics")
    run.add_argument("--scenario", required=True)
    run.add_argument("--algorithm", choices=ALGORITHMS)
    run.add_argument("--run", help="named run from the scenario")
    run.add_argument("--schedule", help="named scripted schedule")
    run.add_argument("--seed", type=int)
    run.add_argument("--epsilon", type=_fraction)
    run.add_argument("--rounds", type=int)
    run.add_argument("--R", type=_fraction)
    run.add_argument("--sweep", type=int, default=0, help="number of consecutive seeds")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--out", default="out")
    run.add_argument("--format", choices=("json", "csv"), default="json")
    run.add_argument("--plot", action="store_true", help="write (round, L) or (round, phi) data and a figure")

    analyze = commands.add_parser("analyze", help="run one analysis and print JSON")
    analyze.add_argument("what", choices=ANALYSES)
    analyze.add_argument("--scenario", required=True)
    analyze.add_argument("--offers")
    analyze.add_argument("--arrangement")
    analyze.add_argument("--outcome")
    analyze.add_argument("--imputation")
    analyze.add_argument("--epsilon", type=_fraction)
    analyze.add_argument("--alpha", type=_fraction)
    analyze.add_argument("--agent")
    analyze.add_argument("--step", type=_fraction)
    analyze.add_argument("--integral", action="store_true")
    return parser

def main(argv=None):
    load_dotenv()
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            print(json.dumps(cmd_validate(args.scenario), indent=4))
            return 0
        if args.command == "run":
            return cmd_run(args)
        print(json.dumps(cmd_analyze(args), indent=4))
        return 0
    except TradeNetError as error:
        print(f"error: {error}", file=sys.stderr)
        return error.exit_code
