"""Command-line front end: run experiments, validate schedules, run checkers
and monitors, sweep seeds, and render traces.

Exit-code contract (for CI): 0 pass, 1 fail or reject, 2 inconclusive or
parse error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .algorithms import (
    alg_cyclic_cycles,
    alg_move_east,
    alg_sro,
    alg_stay,
    alg_tricolor,
    cyc_initial_config,
    flag_scheme_algorithm,
)
from .core import Point, make_configuration
from .engine import Algorithm, Rigidity, Trace, read_trace, run, write_trace
from .problems import INCONCLUSIVE, OK, REJECT, check_cge, check_cyc, check_rdv, check_sro
from .scheduler import (
    ENERGY_RESTRICTED,
    FSYNCH,
    KIND_NAMES,
    ROUND_ROBIN,
    RSYNCH,
    SSYNCH,
    SchedulerKind,
    check_fair,
    default_fairness_window,
    read_schedule,
    validate,
)
from .simulators import (
    extract_induced_schedule,
    monitor_properties,
    sim_lumi_by_fcom,
    sim_rs_by_s,
)

SIMPLE_ALGOS = {
    "sro": alg_sro,
    "stay": alg_stay,
    "move-east": alg_move_east,
    "tricolor": alg_tricolor,
    "flag-scheme": flag_scheme_algorithm,
}
ALGO_NAMES = sorted(SIMPLE_ALGOS) + ["cyclic-cycles", "sim-rs-by-s", "sim-lumi-by-fcom"]


def build_algorithm(
    name: str,
    n: int | None = None,
    inner: str | None = None,
    d_rel: float | None = None,
) -> Algorithm:
    if name in SIMPLE_ALGOS:
        return SIMPLE_ALGOS[name]()
    if name == "cyclic-cycles":
        if n is None:
            raise ValueError("cyclic-cycles needs --n")
        return alg_cyclic_cycles(n, d_rel=(lambda _i: d_rel) if d_rel is not None else None)
    if name in ("sim-rs-by-s", "sim-lumi-by-fcom"):
        if inner is None:
            raise ValueError(f"{name} needs --inner")
        if inner not in SIMPLE_ALGOS and inner != "cyclic-cycles":
            raise ValueError(f"unknown inner algorithm {inner!r}")
        inner_algo = build_algorithm(inner, n=n)
        if name == "sim-rs-by-s":
            return sim_rs_by_s(inner_algo)
        if n is None:
            raise ValueError("sim-lumi-by-fcom needs --n")
        return sim_lumi_by_fcom(inner_algo, n)
    raise ValueError(f"unknown algorithm {name!r}; choose from {', '.join(ALGO_NAMES)}")


@dataclasses.dataclass
class RunConfig:
    algo: str = ""
    inner: str | None = None
    scheduler: str = SSYNCH
    blocks: str | None = None
    schedule_file: str | None = None
    n: int | None = None
    rounds: int | None = None  # defaults to 50, or the schedule file's length
    seed: int = 0
    delta: float | None = None
    chirality: bool = True
    positions: str | None = None
    radius: float = 1.0
    d_rel: float | None = None  # constant mover distance, as a radius fraction
    out: str = "trace.out"


def _parse_positions(text: str) -> list[Point]:
    pts = []
    for tok in text.split():
        x, y = tok.split(",")
        pts.append(Point(float(x), float(y)))
    return pts


def _parse_blocks(text: str, n: int) -> SchedulerKind:
    blocks = []
    for chunk in text.split("|"):
        blocks.append(frozenset(int(t) for t in chunk.split()))
    kind = SchedulerKind(ROUND_ROBIN, tuple(blocks))
    if frozenset().union(*blocks) != frozenset(range(n)):
        raise ValueError("round-robin blocks must cover robots 0..n-1")
    return kind


def validate_run_config(cfg: RunConfig) -> list[str]:
    """Cross-field validity; returns field-level diagnostics."""
    problems = []
    if cfg.algo not in ALGO_NAMES:
        problems.append(f"algo: unknown algorithm {cfg.algo!r}")
        return problems
    if cfg.scheduler not in KIND_NAMES:
        problems.append(f"scheduler: unknown kind {cfg.scheduler!r}")
    if cfg.rounds is not None and cfg.rounds < 0:
        problems.append("rounds: must be nonnegative")
    if cfg.algo == "sro":
        if cfg.positions and len(_parse_positions(cfg.positions)) != 2:
            problems.append("positions: sro runs with exactly 2 robots")
        if cfg.n not in (None, 2):
            problems.append("n: sro runs with exactly 2 robots")
        if cfg.delta is not None:
            problems.append("delta: sro requires rigid movement")
        if not cfg.chirality:
            problems.append("chirality: sro requires chirality")
    if cfg.algo == "cyclic-cycles":
        if cfg.n is None or cfg.n < 3:
            problems.append("n: cyclic-cycles needs n >= 3")
        if not cfg.chirality:
            problems.append("chirality: cyclic-cycles requires chirality")
        if cfg.d_rel is not None and not 0.0 < cfg.d_rel < 1.0:
            problems.append("d-rel: must be a radius fraction in (0, 1)")
    if cfg.algo.startswith("sim-") and not cfg.inner:
        problems.append(f"inner: {cfg.algo} needs an inner algorithm")
    if cfg.algo == "sim-lumi-by-fcom":
        if not cfg.chirality:
            problems.append("chirality: sim-lumi-by-fcom requires chirality")
        if cfg.scheduler not in (RSYNCH, FSYNCH):
            problems.append("scheduler: sim-lumi-by-fcom hosts rsynch or fsynch schedules")
    if cfg.algo == "sim-rs-by-s" and cfg.scheduler == ENERGY_RESTRICTED:
        problems.append("scheduler: sim-rs-by-s hosts cannot skip rounds")
    if cfg.scheduler == ROUND_ROBIN and not cfg.blocks:
        problems.append("blocks: round-robin needs --blocks")
    return problems


def initial_configuration(cfg: RunConfig, algo: Algorithm):
    if cfg.algo == "cyclic-cycles":
        return cyc_initial_config(cfg.n, cfg.radius)
    if cfg.positions:
        positions = _parse_positions(cfg.positions)
    else:
        n = cfg.n if cfg.n is not None else (algo.robot_count or 2)
        if cfg.algo == "sro":
            positions = [Point(0.0, 0.0), Point(1.0, 1.0)]
        else:
            positions = [Point(50.0 * i, 0.0) for i in range(n)]
    return make_configuration(positions, palette=algo.palette)


def execute_run(cfg: RunConfig) -> Trace:
    algo = build_algorithm(cfg.algo, n=cfg.n, inner=cfg.inner, d_rel=cfg.d_rel)
    config0 = initial_configuration(cfg, algo)
    if cfg.n is not None and config0.n != cfg.n:
        raise ValueError(f"n={cfg.n} but {config0.n} positions were given")
    rounds = cfg.rounds
    if cfg.schedule_file:
        prefix, _ = read_schedule(cfg.schedule_file)
        schedule = prefix
        if rounds is None:
            rounds = len(prefix)
    elif cfg.scheduler == ROUND_ROBIN:
        schedule = _parse_blocks(cfg.blocks, config0.n)
    else:
        schedule = SchedulerKind(cfg.scheduler)
    trace = run(
        config0,
        schedule,
        algo,
        rigidity=Rigidity(cfg.delta),
        rounds=50 if rounds is None else rounds,
        seed=cfg.seed,
        chirality=cfg.chirality,
    )
    if cfg.inner:
        trace = dataclasses.replace(
            trace, header=dataclasses.replace(trace.header, inner=cfg.inner)
        )
    return trace


def _load_config_file(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, val = (s.strip() for s in body.split("=", 1))
            values[key.replace("-", "_")] = val
    return values


_BOOLS = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        for key, val in _load_config_file(args.config).items():
            if not hasattr(cfg, key):
                raise ValueError(f"{args.config}: unknown config key {key!r}")
            current = getattr(cfg, key)
            field_type = type(current) if current is not None else str
            if key in ("n", "rounds", "seed"):
                setattr(cfg, key, int(val))
            elif key in ("delta", "radius", "d_rel"):
                setattr(cfg, key, float(val))
            elif key == "chirality":
                setattr(cfg, key, _BOOLS[val.lower()])
            else:
                setattr(cfg, key, field_type(val))
    for key in (
        "algo", "inner", "scheduler", "blocks", "schedule_file", "n", "rounds",
        "seed", "delta", "positions", "radius", "d_rel", "out",
    ):
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    if args.no_chirality:
        cfg.chirality = False
    return cfg


def _add_run_arguments(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="key=value config file; flags override it")
    sub.add_argument("--algo", help=f"one of: {', '.join(ALGO_NAMES)}")
    sub.add_argument("--inner", help="inner algorithm for the meta-simulators")
    sub.add_argument("--scheduler", choices=KIND_NAMES)
    sub.add_argument("--blocks", help="round-robin partition, e.g. '0 1|2'")
    sub.add_argument("--schedule-file", dest="schedule_file", help="explicit schedule file")
    sub.add_argument("--n", type=int)
    sub.add_argument("--rounds", type=int)
    sub.add_argument("--seed", type=int)
    sub.add_argument("--delta", type=float, help="non-rigid movement floor; omit for rigid")
    sub.add_argument("--no-chirality", action="store_true")
    sub.add_argument("--positions", help="initial positions, e.g. '0,0 1,1'")
    sub.add_argument("--radius", type=float, help="circle radius for cyclic-cycles")
    sub.add_argument("--d-rel", dest="d_rel", type=float,
                     help="cyclic-cycles mover distance as a radius fraction")
    sub.add_argument("--out", help="trace output path")


def cmd_run(args: argparse.Namespace) -> int:
    try:
        cfg = _config_from_args(args)
        diagnostics = validate_run_config(cfg)
        if diagnostics:
            for d in diagnostics:
                print(f"config error: {d}", file=sys.stderr)
            return 1
        trace = execute_run(cfg)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    write_trace(trace, cfg.out)
    print(f"wrote {len(trace.rounds)} rounds to {cfg.out}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        prefix, file_kind = read_schedule(args.schedule)
    except (ValueError, OSError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    kind = args.kind or file_kind
    try:
        report = validate(prefix, kind)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if report.ok:
        print(f"valid {kind} prefix of {len(prefix)} rounds")
        return 0
    print(f"invalid at round {report.round}: {report.rule}")
    return 1


_CHECKERS = {
    "rdv": check_rdv,
    "sro": check_sro,
    "cge": check_cge,
}

_MONITOR_FAMILY = {"p-props": "sim-rs-by-s", "step-lemmas": "sim-lumi-by-fcom"}


def _run_problem_check(
    trace: Trace, problem: str, tol: float, d_rel: float | None = None
) -> tuple[str, str]:
    if problem == "cyc":
        d_fn = (lambda _i: d_rel) if d_rel is not None else None
        verdict = check_cyc(trace, trace.initial.n, d_rel=d_fn, tol=tol)
    else:
        verdict = _CHECKERS[problem](trace, tol=tol)
    if verdict.status == OK:
        return OK, f"{problem}: ok"
    if verdict.status == REJECT:
        return REJECT, f"{problem}: reject at round {verdict.round}: {verdict.reason}"
    return INCONCLUSIVE, f"{problem}: inconclusive: {verdict.reason}"


def _run_monitor_check(trace: Trace, monitor: str) -> tuple[str, str]:
    family = _MONITOR_FAMILY[monitor]
    if trace.header.algo != family:
        raise ValueError(f"monitor {monitor} applies to {family} traces, not {trace.header.algo!r}")
    violations = monitor_properties(trace)
    if violations:
        return REJECT, f"{monitor}: {len(violations)} violations; first: {violations[0]}"
    return OK, f"{monitor}: ok"


def _run_induced_check(trace: Trace) -> tuple[str, str]:
    induced = extract_induced_schedule(trace)
    target = RSYNCH if trace.header.algo == "sim-rs-by-s" else SSYNCH
    report = validate(induced, target)
    if not report.ok:
        return REJECT, f"induced: invalid {target} at induced round {report.round}: {report.rule}"
    fairness = check_fair(induced, default_fairness_window(trace.initial.n))
    if not fairness.ok:
        robot, gap, rnd = fairness.violations[0]
        return REJECT, f"induced: robot {robot} starved for {gap} induced rounds (at {rnd})"
    return OK, f"induced: valid fair {target} schedule of {len(induced)} rounds"


def cmd_check(args: argparse.Namespace) -> int:
    try:
        trace = read_trace(args.trace)
    except (ValueError, OSError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.problem:
            status, message = _run_problem_check(trace, args.problem, args.tol, args.d_rel)
        elif args.monitor == "induced":
            status, message = _run_induced_check(trace)
        else:
            status, message = _run_monitor_check(trace, args.monitor)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(message)
    return {OK: 0, REJECT: 1, INCONCLUSIVE: 2}[status]


def cmd_sweep(args: argparse.Namespace) -> int:
    lo, _, hi = args.seeds.partition(":")
    seeds = range(int(lo), int(hi or lo) + 1)
    outcomes = {OK: 0, REJECT: 0, INCONCLUSIVE: 0}
    first_bad: tuple[int, str] | None = None
    for seed in seeds:
        cfg = _config_from_args(args)
        cfg.seed = seed
        diagnostics = validate_run_config(cfg)
        if diagnostics:
            for d in diagnostics:
                print(f"config error: {d}", file=sys.stderr)
            return 1
        try:
            trace = execute_run(cfg)
            if args.check in _MONITOR_FAMILY:
                status, message = _run_monitor_check(trace, args.check)
            elif args.check == "induced":
                status, message = _run_induced_check(trace)
            else:
                status, message = _run_problem_check(trace, args.check, args.tol, cfg.d_rel)
        except (ValueError, RuntimeError) as exc:
            status, message = REJECT, f"error: {exc}"
        outcomes[status] += 1
        if status == REJECT and first_bad is None:
            first_bad = (seed, message)
    print(
        f"seeds {seeds.start}..{seeds.stop - 1}: "
        f"{outcomes[OK]} pass, {outcomes[REJECT]} fail, {outcomes[INCONCLUSIVE]} inconclusive"
    )
    if first_bad is not None:
        print(f"first counterexample seed {first_bad[0]}: {first_bad[1]}")
        return 1
    return 0


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def _bounds(trace: Trace) -> tuple[float, float, float, float]:
    xs = [p.x for c in trace.configs() for _, p, _ in c.entries]
    ys = [p.y for c in trace.configs() for _, p, _ in c.entries]
    return min(xs), min(ys), max(xs), max(ys)


def svg_plot(trace: Trace) -> str:
    x0, y0, x1, y1 = _bounds(trace)
    pad = 0.05 * max(x1 - x0, y1 - y0, 1.0)
    x0, y0, x1, y1 = x0 - pad, y0 - pad, x1 + pad, y1 + pad
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0:.6g} {-y1:.6g} '
        f'{x1 - x0:.6g} {y1 - y0:.6g}" width="640" height="640">'
    ]
    stroke = 0.004 * max(x1 - x0, y1 - y0)
    for rid in range(trace.initial.n):
        color = _PALETTE[rid % len(_PALETTE)]
        pts = " ".join(f"{c.position(rid).x:.9g},{-c.position(rid).y:.9g}" for c in trace.configs())
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{stroke:.6g}"/>'
        )
        p = trace.initial.position(rid)
        parts.append(f'<circle cx="{p.x:.9g}" cy="{-p.y:.9g}" r="{2 * stroke:.6g}" fill="{color}"/>')
    parts.append("</svg>")
    return "\n".join(parts)


def ascii_plot(trace: Trace, width: int = 72, height: int = 28) -> str:
    x0, y0, x1, y1 = _bounds(trace)
    spanx = max(x1 - x0, 1e-9)
    spany = max(y1 - y0, 1e-9)
    grid = [["." for _ in range(width)] for _ in range(height)]
    symbols = "0123456789abcdefghijklmnopqrstuvwxyz"
    for c in trace.configs():
        for rid, p, _ in c.entries:
            col = int((p.x - x0) / spanx * (width - 1))
            row = int((y1 - p.y) / spany * (height - 1))
            cell = grid[row][col]
            sym = symbols[rid % len(symbols)]
            grid[row][col] = sym if cell in (".", sym) else "#"
    lines = ["".join(row) for row in grid]
    lines.append(f"x: [{x0:.6g}, {x1:.6g}]  y: [{y0:.6g}, {y1:.6g}]  rounds: {len(trace.rounds)}")
    return "\n".join(lines)


def cmd_plot(args: argparse.Namespace) -> int:
    try:
        trace = read_trace(args.trace)
    except (ValueError, OSError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    if args.out and args.out.endswith(".svg"):
        rendering = svg_plot(trace)
    else:
        rendering = ascii_plot(trace)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(rendering + "\n")
        print(f"wrote {args.out}")
    else:
        print(rendering)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="lcmswarm", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    p_run = subs.add_parser("run", help="run an experiment and write a trace")
    _add_run_arguments(p_run)
    p_run.set_defaults(func=cmd_run)

    p_val = subs.add_parser("validate", help="validate a schedule file")
    p_val.add_argument("--schedule", required=True)
    p_val.add_argument("--kind", choices=KIND_NAMES, help="defaults to the file header kind")
    p_val.set_defaults(func=cmd_validate)

    p_chk = subs.add_parser("check", help="run a problem checker or monitor on a trace")
    group = p_chk.add_mutually_exclusive_group(required=True)
    group.add_argument("--problem", choices=("rdv", "sro", "cyc", "cge"))
    group.add_argument("--monitor", choices=("p-props", "step-lemmas", "induced"))
    p_chk.add_argument("--trace", required=True)
    p_chk.add_argument("--tol", type=float, default=1e-9)
    p_chk.add_argument("--d-rel", dest="d_rel", type=float,
                       help="mover distance fraction the trace was produced with")
    p_chk.set_defaults(func=cmd_check)

    p_swp = subs.add_parser("sweep", help="run many seeds and aggregate checker verdicts")
    _add_run_arguments(p_swp)
    p_swp.add_argument("--seeds", required=True, help="inclusive seed range, e.g. 0:99")
    p_swp.add_argument(
        "--check",
        required=True,
        choices=("rdv", "sro", "cyc", "cge", "p-props", "step-lemmas", "induced"),
    )
    p_swp.add_argument("--tol", type=float, default=1e-9)
    p_swp.set_defaults(func=cmd_sweep)

    p_plt = subs.add_parser("plot", help="render robot trajectories from a trace")
    p_plt.add_argument("--trace", required=True)
    p_plt.add_argument("--out", help="output path; .svg renders vector output")
    p_plt.set_defaults(func=cmd_plot)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
