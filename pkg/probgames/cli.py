import argparse
import json
import os
import sys
from importlib import resources
from typing import Any, Dict, List, Optional

from probgames.compose import par_transformed_tables, seq_transformed_table
from probgames.config import load_config, validate_config
from probgames.dist import ell, marginals
from probgames.errors import (
    GameError, GameFileError, GridTooLarge, InvalidWitness, UnsupportedComposition, UnsupportedShape,
)
from probgames.game import ParNode, SeqNode, evaluate, expected_outcome
from probgames.gamefile import (
    BuiltGame, build, format_profile, parse_game_file, parse_joint, parse_profile, parse_witness,
)
from probgames.laws import GenConfig, run_law_suite
from probgames.logger import log_error, log_info, log_verdict, log_warning, setup_logger
from probgames.solver import backward_induction, grid_oracle, support_enumeration
from probgames.utils import format_value

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_UNSUPPORTED = 2
EXIT_INPUT = 3

DEMOS = {
    "matching-pennies": "matching_pennies.game",
    "market-entry": "market_entry.game",
}


def _emit(args: argparse.Namespace, payload: Dict[str, Any], text: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        print(text)


def _load_game(path: str, config: Dict[str, Any]) -> BuiltGame:
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    expr = parse_game_file(text, max_conditioned=config["MAX_CONDITIONED_TABLE"])
    return build(expr, max_conditioned=config["MAX_CONDITIONED_TABLE"])


def _read_witness(value: str) -> str:
    if os.path.exists(value):
        with open(value, encoding="utf-8") as handle:
            return handle.read()
    return value


def handle_check(args: argparse.Namespace, config: Dict[str, Any], logger: Any) -> int:
    """Handle check command."""
    try:
        built = _load_game(args.file, config)
        if args.joint:
            phi = parse_joint(args.joint, built)
        elif args.profile:
            phi = parse_profile(args.profile, built)
        else:
            log_error(logger, "Provide a profile or --joint", exc_info=False)
            return EXIT_INPUT
        witness = parse_witness(_read_witness(args.witness), built) if args.witness else None

        log_info(logger, "Checking profile", {"game": built.game.name, "profile": phi})
        verdict = evaluate(built.game, built.state, built.k, phi, witness=witness)
    except UnsupportedComposition as e:
        log_warning(logger, "Membership is undecidable without a witness", {"provenance": e.provenance})
        _emit(args, {"result": "unsupported", "reason": str(e), "provenance": e.provenance},
              f"UNSUPPORTED: {e}\nSupply a decomposition witness with --witness to decide this profile.")
        return EXIT_UNSUPPORTED
    except (GameFileError, InvalidWitness, OSError, ValueError) as e:
        log_error(logger, f"Error checking profile: {str(e)}", exc_info=False)
        _emit(args, {"result": "error", "reason": str(e)}, f"Error: {e}")
        return EXIT_INPUT

    log_verdict(logger, built.game.name, verdict)
    if verdict.holds:
        _emit(args, {"result": "equilibrium", "reason": None, "component": None}, "EQUILIBRIUM")
        return EXIT_OK
    _emit(args, {"result": "not-equilibrium", "reason": verdict.reason, "component": verdict.component},
          f"NOT AN EQUILIBRIUM\nreason: {verdict.reason}\ncomponent: {verdict.component}")
    return EXIT_NEGATIVE


def _solve(built: BuiltGame, args: argparse.Namespace, config: Dict[str, Any]) -> Dict[str, Any]:
    game, x, k = built.game, built.state, built.k
    if args.method == "support-enum":
        found = support_enumeration(game, x, k, max_moves=config["MAX_SUPPORT_ENUM_MOVES"])
        profiles = [ell(a, b) for a, b in found.equilibria]
        return {"profiles": profiles, "approximate": False, "degenerate": found.degenerate}
    if args.method == "backward-induction":
        profiles = [ell(a, b) for a, b in backward_induction(game, x, k)]
        return {"profiles": profiles, "approximate": False, "degenerate": False}
    resolution = args.resolution or config["GRID_RESOLUTION"]
    epsilon = args.epsilon if args.epsilon is not None else config["GRID_EPSILON"]
    profiles = grid_oracle(game, x, k, resolution, epsilon=epsilon, max_points=config["MAX_GRID_POINTS"])
    return {"profiles": profiles, "approximate": True, "degenerate": False,
            "resolution": resolution, "epsilon": epsilon}


def handle_solve(args: argparse.Namespace, config: Dict[str, Any], logger: Any) -> int:
    """Handle solve command."""
    try:
        built = _load_game(args.file, config)
        log_info(logger, "Solving game", {"game": built.game.name, "method": args.method})
        solved = _solve(built, args, config)
    except (UnsupportedShape, GridTooLarge, UnsupportedComposition) as e:
        log_warning(logger, f"Method {args.method} cannot solve this game", {"reason": str(e)})
        _emit(args, {"result": "unsupported", "reason": str(e), "equilibria": []}, f"UNSUPPORTED: {e}")
        return EXIT_UNSUPPORTED
    except (GameFileError, OSError, ValueError) as e:
        log_error(logger, f"Error solving game: {str(e)}", exc_info=False)
        _emit(args, {"result": "error", "reason": str(e), "equilibria": []}, f"Error: {e}")
        return EXIT_INPUT

    lines = [format_profile(built, phi) for phi in solved["profiles"]]
    payload = {
        "result": "found" if lines else "none",
        "method": args.method,
        "approximate": solved["approximate"],
        "degenerate": solved["degenerate"],
        "equilibria": lines,
    }
    text = list(lines) or ["no equilibria found"]
    if solved["approximate"]:
        payload.update(resolution=solved["resolution"], epsilon=solved["epsilon"])
        text.insert(0, f"approximate (grid resolution {solved['resolution']}, epsilon {solved['epsilon']:g}):")
    if solved["degenerate"]:
        text.append("note: degenerate game, equilibrium sets listed by their extreme points")
    _emit(args, payload, "\n".join(text))
    return EXIT_OK if lines else EXIT_NEGATIVE


def handle_laws(args: argparse.Namespace, config: Dict[str, Any], logger: Any) -> int:
    """Handle laws command."""
    cfg = GenConfig(
        seed=config["LAW_SEED"] if args.seed is None else args.seed,
        cases=config["LAW_CASES"] if args.cases is None else args.cases,
        max_set_size=config["LAW_MAX_SET_SIZE"],
        max_payoff_abs=config["LAW_MAX_PAYOFF_ABS"],
    )
    log_info(logger, "Running law suite", {"seed": cfg.seed, "cases": cfg.cases})
    report = run_law_suite(cfg)
    if report.vacuous:
        log_warning(logger, "Law suite ran no comparisons", {"cases": cfg.cases})
    if args.format == "json":
        print(report.to_json())
    else:
        print(report.to_text())
    return EXIT_OK if report.ok else EXIT_NEGATIVE


def _global_payoff(value):
    # par utilities carry the same global vector on both sides
    while type(value) is tuple and value:
        value = value[0]
    return value


def _table_text(table: Dict) -> List[str]:
    return [f"    {format_value(y)} -> {format_value(_global_payoff(v))}" for y, v in table.items()]


def _demo_tables(built: BuiltGame, phi) -> List[str]:
    spec = built.game.eq
    lines = []
    if isinstance(spec, ParNode):
        left_k, right_k = par_transformed_tables(spec.left, spec.right, built.state, built.k, phi)
        lines.append(f"  utility faced by {spec.left.name}:")
        lines.extend(_table_text(left_k))
        lines.append(f"  utility faced by {spec.right.name}:")
        lines.extend(_table_text(right_k))
    elif isinstance(spec, SeqNode):
        _, second = marginals(phi)
        lines.append(f"  utility faced by {spec.first.name} given {spec.second.name}'s strategy:")
        lines.extend(_table_text(seq_transformed_table(spec.first, spec.second, built.k, second)))
    return lines


def handle_demo(args: argparse.Namespace, config: Dict[str, Any], logger: Any) -> int:
    """Handle demo command."""
    if args.name not in DEMOS:
        log_error(logger, f"Unknown demo: {args.name}", exc_info=False)
        print(f"Unknown demo {args.name!r}; choose one of {', '.join(DEMOS)}")
        return EXIT_UNSUPPORTED
    try:
        text = resources.files("probgames").joinpath("games", DEMOS[args.name]).read_text(encoding="utf-8")
        built = build(parse_game_file(text, config["MAX_CONDITIONED_TABLE"]), config["MAX_CONDITIONED_TABLE"])
        game = built.game
        if isinstance(game.eq, ParNode):
            method = "support enumeration"
            profiles = [ell(a, b) for a, b in support_enumeration(game, built.state, built.k).equilibria]
        else:
            method = "backward induction"
            profiles = [ell(a, b) for a, b in backward_induction(game, built.state, built.k)]
    except GameError as e:
        log_error(logger, f"Error running demo: {str(e)}")
        return EXIT_INPUT

    lines = ["game file:"]
    lines.extend(f"  {line}" for line in text.splitlines() if line and not line.startswith("#"))
    lines.append(f"composition: {game.name}")
    lines.append(f"utility carrier: {game.utility_alg}")
    lines.append("utility table:")
    lines.extend(_table_text(built.k))
    lines.append(f"equilibria by {method}:")
    payload = {"demo": args.name, "game": game.name, "method": method, "equilibria": [], "expected_payoff": []}
    for phi in profiles:
        payoff = format_value(_global_payoff(expected_outcome(game, built.state, built.k, phi)))
        lines.append(f"  {format_profile(built, phi)}")
        lines.extend(_demo_tables(built, phi))
        lines.append(f"  expected payoff: {payoff}")
        payload["equilibria"].append(format_profile(built, phi))
        payload["expected_payoff"].append(payoff)
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if profiles else EXIT_NEGATIVE


def main() -> Optional[int]:
    """Main entry point for the probgames CLI."""
    parser = argparse.ArgumentParser(description="Check, solve and test probabilistic open games.")
    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    formats = {"choices": ["text", "json"], "default": "text", "help": "Output format"}

    check_parser = subparsers.add_parser("check", help="Check whether a profile is an equilibrium")
    check_parser.add_argument("file", help="Game description file")
    check_parser.add_argument("profile", nargs="?", help="Per-component profile, e.g. 'p1: H=1/2,T=1/2; p2: H=1'")
    check_parser.add_argument("--joint", help="Joint distribution over composite strategies instead of a profile")
    check_parser.add_argument("--witness", help="Decomposition witness as JSON text or a path to a JSON file")
    check_parser.add_argument("--format", **formats)

    solve_parser = subparsers.add_parser("solve", help="Find equilibria")
    solve_parser.add_argument("file", help="Game description file")
    solve_parser.add_argument("--method", choices=["support-enum", "backward-induction", "grid"],
                              default="support-enum", help="Solution method")
    solve_parser.add_argument("--resolution", type=int, help="Grid denominator for --method grid")
    solve_parser.add_argument("--epsilon", type=float, help="Best-response tolerance for --method grid")
    solve_parser.add_argument("--format", **formats)

    laws_parser = subparsers.add_parser("laws", help="Run the law suite")
    laws_parser.add_argument("--seed", type=int, help="Generator seed")
    laws_parser.add_argument("--cases", type=int, help="Number of generated cases")
    laws_parser.add_argument("--format", **formats)

    demo_parser = subparsers.add_parser("demo", help="Walk through a bundled example")
    demo_parser.add_argument("name", help=f"One of: {', '.join(DEMOS)}")
    demo_parser.add_argument("--format", **formats)

    args = parser.parse_args()

    try:
        config = load_config()
        validate_config(config)
    except ValueError as e:
        print(f"Error: Invalid configuration: {str(e)}", file=sys.stderr)
        return EXIT_INPUT

    logger = setup_logger("probgames", config["PROBGAMES_LOG_FILE"] or None, config["PROBGAMES_LOG_LEVEL"])

    try:
        if args.command == "check":
            return handle_check(args, config, logger)
        if args.command == "solve":
            return handle_solve(args, config, logger)
        if args.command == "laws":
            return handle_laws(args, config, logger)
        if args.command == "demo":
            return handle_demo(args, config, logger)
        parser.print_help()
        return EXIT_OK
    except Exception as e:
        log_error(logger, f"Unexpected error: {str(e)}")
        print(f"Error: {str(e)}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
