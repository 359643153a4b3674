"""Meta-simulators and their monitors.

Two wrappers let weaker hosts run protocols written for stronger settings:

* sim-rs-by-s: full-light robots under any semi-synchronous schedule execute
  a protocol written for the restricted-repetition scheduler.  Bookkeeping
  lights (step, executed, charged) serialize inner executions so that the
  induced activation sequence has a full-activation prefix followed by
  nonempty proper subsets with consecutive sets disjoint.

* sim-lumi-by-fcom: external-light robots under a restricted-repetition
  schedule execute a protocol written for full lights.  Each robot displays a
  copy of its successor location's colors, letting its successor reconstruct
  the color it cannot see; mega-cycles guarantee every robot executes the
  inner protocol exactly once per cycle, so the induced schedule is fair.

Both wrappers annotate inner executions in the trace; extract_induced_schedule
and monitor_properties work off those annotations.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import (
    ORIGIN,
    Configuration,
    LightTuple,
    ModelKind,
    ObservedLocation,
    Point,
    Snapshot,
    make_configuration,
    order_locations,
    palette_size,
    points_close,
)
from .engine import Algorithm, Rigidity, StepResult, Trace, run
from .scheduler import SchedulePrefix

# An induced schedule is just a schedule prefix extracted from a trace.
InducedSchedule = SchedulePrefix


class SimulationFault(RuntimeError):
    """An internal consistency rule of a meta-simulator failed."""


def flat_color(values: tuple[int, ...], palette: tuple[int, ...]) -> int:
    """Row-major index of an inner color tuple within its palette."""
    idx = 0
    for v, size in zip(values, palette):
        idx = idx * size + v
    return idx


def unflatten_color(idx: int, palette: tuple[int, ...]) -> tuple[int, ...]:
    out = []
    for size in reversed(palette):
        out.append(idx % size)
        idx //= size
    return tuple(reversed(out))


def _project_inner_snapshot(
    snap: Snapshot, k: int, own_inner: tuple[int, ...], add_self: bool
) -> Snapshot:
    """Synthesize the full-light view the inner algorithm would see.

    Carries only inner light values.  For an external-light host the
    observer's own (reconstructed) color is inserted at the origin, matching
    what a real full-light Look would return.
    """
    observed = []
    for loc in snap.observed:
        vals = [t[:k] for t in (loc.lights or ())]
        if add_self and points_close(loc.point, ORIGIN):
            vals.append(own_inner)
        observed.append(ObservedLocation(loc.point, loc.count, tuple(sorted(vals))))
    return Snapshot(tuple(observed), own_inner, snap.multiplicity_visible)


# ---------------------------------------------------------------------------
# sim-RS-by-S
# ---------------------------------------------------------------------------

RS_STEP_1, RS_STEP_2, RS_STEP_3, RS_STEP_4, RS_STEP_5, RS_STEP_M = range(6)
CH_C, CH_E, CH_M = range(3)

# Step configurations a healthy run may exhibit.
RS_STEP_SETS = tuple(
    frozenset(s)
    for s in (
        {RS_STEP_1}, {RS_STEP_2}, {RS_STEP_3}, {RS_STEP_4}, {RS_STEP_5}, {RS_STEP_M},
        {RS_STEP_1, RS_STEP_2}, {RS_STEP_2, RS_STEP_3}, {RS_STEP_3, RS_STEP_1},
        {RS_STEP_2, RS_STEP_4}, {RS_STEP_4, RS_STEP_5}, {RS_STEP_2, RS_STEP_5},
        {RS_STEP_2, RS_STEP_M},
    )
)


@dataclass(frozen=True)
class RsBySLayout:
    """Variable layout of the sim-rs-by-s palette: inner vars, then step,
    executed, charged."""

    inner: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.inner)

    @property
    def step(self) -> int:
        return self.k

    @property
    def executed(self) -> int:
        return self.k + 1

    @property
    def charged(self) -> int:
        return self.k + 2

    @property
    def palette(self) -> tuple[int, ...]:
        return self.inner + (6, 2, 3)


def rs_by_s_color_count(inner_colors: int) -> int:
    """Total light-state count of the wrapper for an inner palette of the
    given size: 6 steps x 2 executed flags x 3 charge states per color."""
    return 36 * inner_colors


def sim_rs_by_s(inner: Algorithm) -> Algorithm:
    """Wrap an inner protocol for execution by full-light robots under any
    fair semi-synchronous host schedule."""
    layout = RsBySLayout(inner.palette)
    k, STEP, EXEC, CHARGED = layout.k, layout.step, layout.executed, layout.charged

    def step(snap: Snapshot) -> StepResult:
        all_lights = [t for loc in snap.observed for t in loc.lights]
        steps = frozenset(t[STEP] for t in all_lights)
        own = snap.own_light

        def run_inner() -> tuple[dict[int, int], Point, tuple[str, ...]]:
            inner_snap = _project_inner_snapshot(snap, k, own[:k], add_self=False)
            res = inner.step(inner_snap)
            return dict(res.light), res.destination, ("inner-exec",) + res.events

        if steps == {RS_STEP_1}:
            light, dest, events = run_inner()
            light.update({STEP: RS_STEP_2, EXEC: 1, CHARGED: CH_E})
            return StepResult(light=light, destination=dest, events=events)

        if steps == {RS_STEP_2}:
            if all(t[CHARGED] == CH_E for t in all_lights):
                return StepResult(light={STEP: RS_STEP_3})
            if all(t[EXEC] == 1 for t in all_lights):
                return StepResult(light={STEP: RS_STEP_M})
            if own[EXEC] == 0 and own[CHARGED] == CH_C:
                light, dest, events = run_inner()
                light.update({STEP: RS_STEP_4, EXEC: 1, CHARGED: CH_M})
                return StepResult(light=light, destination=dest, events=events)
            return StepResult()

        if steps == {RS_STEP_3}:  # reset all flags, then back to step 1
            if any(t[EXEC] == 1 and t[CHARGED] == CH_E for t in all_lights):
                if own[EXEC] == 1 and own[CHARGED] == CH_E:
                    return StepResult(light={EXEC: 0, CHARGED: CH_C})
                return StepResult()
            return StepResult(light={STEP: RS_STEP_1})

        if steps == {RS_STEP_4}:  # recharge the robots that sat out
            if any(t[CHARGED] == CH_E for t in all_lights):
                if own[CHARGED] == CH_E:
                    return StepResult(light={CHARGED: CH_C})
                return StepResult()
            return StepResult(light={STEP: RS_STEP_5})

        if steps == {RS_STEP_5}:  # discharge the robots that just moved
            if any(t[CHARGED] == CH_M for t in all_lights):
                if own[CHARGED] == CH_M:
                    return StepResult(light={CHARGED: CH_E})
                return StepResult()
            return StepResult(light={STEP: RS_STEP_2})

        if steps == {RS_STEP_M}:  # end of mega-cycle: clear executed flags
            if not all(t[EXEC] == 0 for t in all_lights):
                if own[EXEC] != 0:
                    return StepResult(light={EXEC: 0})
                return StepResult()
            return StepResult(light={STEP: RS_STEP_2})

        if steps <= {RS_STEP_1, RS_STEP_2}:
            return StepResult(light={STEP: RS_STEP_2})
        if steps <= {RS_STEP_2, RS_STEP_3}:
            return StepResult(light={STEP: RS_STEP_3})
        if steps <= {RS_STEP_2, RS_STEP_4}:
            return StepResult(light={STEP: RS_STEP_4})
        if steps <= {RS_STEP_4, RS_STEP_5}:
            return StepResult(light={STEP: RS_STEP_5})
        if steps <= {RS_STEP_5, RS_STEP_2}:
            return StepResult(light={STEP: RS_STEP_2})
        if steps <= {RS_STEP_3, RS_STEP_1}:
            return StepResult(light={STEP: RS_STEP_1})
        if steps <= {RS_STEP_2, RS_STEP_M} and all(t[EXEC] == 1 for t in all_lights):
            return StepResult(light={STEP: RS_STEP_M})
        if steps <= {RS_STEP_M, RS_STEP_2} and all(t[EXEC] == 0 for t in all_lights):
            return StepResult(light={STEP: RS_STEP_2})
        return StepResult()

    return Algorithm(
        "sim-rs-by-s",
        layout.palette,
        step,
        ModelKind.LUMI,
        needs_chirality=inner.needs_chirality,
        min_robots=max(1, inner.min_robots),
    )


# ---------------------------------------------------------------------------
# sim-LUMI-by-FCOM
# ---------------------------------------------------------------------------

FC_STEP_1, FC_STEP_2, FC_STEP_3, FC_STEP_M = range(4)
# suc.executed is a set over {False, True}, encoded as a bitmask.
EXEC_SET_EMPTY, EXEC_SET_FALSE, EXEC_SET_TRUE, EXEC_SET_BOTH = range(4)

FC_STEP_SETS = tuple(
    frozenset(s)
    for s in (
        {FC_STEP_1}, {FC_STEP_2}, {FC_STEP_3}, {FC_STEP_M},
        {FC_STEP_1, FC_STEP_2}, {FC_STEP_2, FC_STEP_3}, {FC_STEP_3, FC_STEP_1},
        {FC_STEP_2, FC_STEP_M}, {FC_STEP_M, FC_STEP_2},
    )
)


@dataclass(frozen=True)
class LumiByFcomLayout:
    """Variable layout of the sim-lumi-by-fcom palette.

    After the inner vars come one per-color occupancy counter for the
    successor location (multisets, counts 0..n), then step, executed, the
    suc.executed set, and the two checked flags.  Multiset counters rather
    than plain color sets keep own-color reconstruction a singleton even when
    co-located robots share a color.
    """

    inner: tuple[int, ...]
    n: int

    @property
    def k(self) -> int:
        return len(self.inner)

    @property
    def ell(self) -> int:
        return palette_size(self.inner)

    @property
    def counts(self) -> int:  # first successor-color counter
        return self.k

    @property
    def step(self) -> int:
        return self.k + self.ell

    @property
    def executed(self) -> int:
        return self.step + 1

    @property
    def suc_executed(self) -> int:
        return self.step + 2

    @property
    def checked(self) -> int:
        return self.step + 3

    @property
    def suc_checked(self) -> int:
        return self.step + 4

    @property
    def palette(self) -> tuple[int, ...]:
        return self.inner + (self.n + 1,) * self.ell + (4, 2, 4, 2, 2)


def lumi_by_fcom_color_count(inner_colors: int, n: int) -> int:
    """Total light-state count of the wrapper: inner color x successor color
    multiset x 4 steps x 2 executed x 4 suc.executed sets x 2 x 2 checked."""
    return 128 * inner_colors * (n + 1) ** inner_colors


def _exec_mask(flags) -> int:
    mask = 0
    for f in flags:
        mask |= EXEC_SET_TRUE if f else EXEC_SET_FALSE
    return mask


def sim_lumi_by_fcom(inner: Algorithm, n: int) -> Algorithm:
    """Wrap an inner full-light protocol for execution by external-light
    robots under a restricted-repetition host schedule; needs chirality."""
    layout = LumiByFcomLayout(inner.palette, n)
    k, ell = layout.k, layout.ell
    COUNTS, STEP, EXEC = layout.counts, layout.step, layout.executed
    SUC_EXEC, CHECKED, SUC_CHECKED = layout.suc_executed, layout.checked, layout.suc_checked
    inner_palette = inner.palette

    def step(snap: Snapshot) -> StepResult:
        ring = order_locations([loc.point for loc in snap.observed])
        io = ring.index_of(ORIGIN)
        suc_loc = ring.locations[ring.suc(io)]
        pred_loc = ring.locations[ring.pred(io)]
        here = snap.location_at(ORIGIN)
        at_suc = snap.location_at(suc_loc)
        at_pred = snap.location_at(pred_loc)
        others = [t for loc in snap.observed for t in loc.lights]
        others_steps = frozenset(t[STEP] for t in others)

        def pred_field(idx: int) -> int:
            vals = {t[idx] for t in at_pred.lights}
            if len(vals) != 1:
                raise SimulationFault("predecessor-location robots disagree on a copied light")
            return vals.pop()

        def own_executed() -> bool:
            mask = pred_field(SUC_EXEC)
            seen = _exec_mask(bool(t[EXEC]) for t in here.lights)
            return (mask & ~seen) == EXEC_SET_TRUE

        def all_robots_executed() -> bool:
            return all(t[EXEC] == 1 for t in others) and own_executed()

        def reset_checking() -> dict[int, int]:
            out = {COUNTS + c: 0 for c in range(ell)}
            out[SUC_EXEC] = EXEC_SET_FALSE
            out[SUC_CHECKED] = 0
            out[CHECKED] = 0
            return out

        def checked_flags_reset(t: tuple[int, ...]) -> bool:
            return (
                all(t[COUNTS + c] == 0 for c in range(ell))
                and t[SUC_EXEC] == EXEC_SET_FALSE
                and t[SUC_CHECKED] == 0
                and t[CHECKED] == 0
            )

        if others_steps == {FC_STEP_1}:  # copy colors and flags of the successor
            light: dict[int, int] = {COUNTS + c: 0 for c in range(ell)}
            for t in at_suc.lights:
                var = COUNTS + flat_color(t[:k], inner_palette)
                light[var] = min(light[var] + 1, n)
            light[SUC_EXEC] = _exec_mask(bool(t[EXEC]) for t in at_suc.lights)
            if all(t[CHECKED] == 1 for t in at_suc.lights):
                light[SUC_CHECKED] = 1
            light[CHECKED] = 1
            done = all(t[CHECKED] == 1 and t[SUC_CHECKED] == 1 for t in others)
            light[STEP] = FC_STEP_2 if done else FC_STEP_1
            return StepResult(light=light)

        if others_steps == {FC_STEP_2}:  # perform one simulated activation
            if all_robots_executed():
                return StepResult(light={STEP: FC_STEP_M})
            if own_executed():
                return StepResult(light={STEP: FC_STEP_2})
            # Determine own color: predecessor's copy of this location's
            # multiset minus the colors visible here.
            counts = [pred_field(COUNTS + c) for c in range(ell)]
            for t in here.lights:
                counts[flat_color(t[:k], inner_palette)] -= 1
            if sum(counts) != 1 or any(c < 0 for c in counts):
                raise SimulationFault(f"own-color reconstruction is not a singleton: {counts}")
            own_color = unflatten_color(counts.index(1), inner_palette)
            inner_snap = _project_inner_snapshot(snap, k, own_color, add_self=True)
            res = inner.step(inner_snap)
            light = {i: v for i, v in enumerate(own_color)}
            light.update(res.light)
            light.update({EXEC: 1, STEP: FC_STEP_3})
            events = (
                "inner-exec",
                f"own-color:{flat_color(own_color, inner_palette)}",
            ) + res.events
            return StepResult(light=light, destination=res.destination, events=events)

        if others_steps == {FC_STEP_3}:  # reset checking flags
            light = reset_checking()
            done = all(checked_flags_reset(t) for t in others)
            light[STEP] = FC_STEP_1 if done else FC_STEP_3
            return StepResult(light=light)

        if others_steps == {FC_STEP_M}:  # reset executed flags
            light = {EXEC: 0, SUC_EXEC: EXEC_SET_FALSE}
            done = all(
                t[EXEC] == 0 and t[SUC_EXEC] == EXEC_SET_FALSE for t in others
            )
            light[STEP] = FC_STEP_2 if done else FC_STEP_M
            return StepResult(light=light)

        if others_steps <= {FC_STEP_1, FC_STEP_2}:
            return StepResult(light={STEP: FC_STEP_2})
        if others_steps <= {FC_STEP_2, FC_STEP_3}:
            return StepResult(light={STEP: FC_STEP_3})
        if others_steps <= {FC_STEP_2, FC_STEP_M} and all_robots_executed():
            return StepResult(light={STEP: FC_STEP_M})
        if others_steps <= {FC_STEP_3, FC_STEP_1}:
            return StepResult(light={STEP: FC_STEP_1})
        if others_steps <= {FC_STEP_M, FC_STEP_2} and all(t[EXEC] == 0 for t in others):
            return StepResult(light={STEP: FC_STEP_2})
        return StepResult()

    return Algorithm(
        "sim-lumi-by-fcom",
        layout.palette,
        step,
        ModelKind.FCOM,
        needs_chirality=True,
        min_robots=2,
    )


# ---------------------------------------------------------------------------
# Induced schedules, fidelity replay, monitors.
# ---------------------------------------------------------------------------

def extract_induced_schedule(trace: Trace) -> InducedSchedule:
    """Collect, per round with at least one inner execution, the set of robots
    that executed the inner algorithm."""
    if not trace.header.algo.startswith("sim-"):
        raise ValueError("trace lacks meta-simulator annotations")
    sets = []
    for r in trace.rounds:
        s = frozenset(rid for rid, evs in r.events.items() if "inner-exec" in evs)
        if s:
            sets.append(s)
    return SchedulePrefix(tuple(sets), trace.initial.n)


def inner_initial_config(trace: Trace, inner: Algorithm) -> Configuration:
    """Project the trace's initial configuration onto the inner protocol."""
    k = len(inner.palette)
    positions = []
    lights = []
    for rid in range(trace.initial.n):
        positions.append(trace.initial.position(rid))
        lights.append(LightTuple(trace.initial.light(rid).values[:k], inner.palette))
    return make_configuration(positions, lights)


def verify_inner_fidelity(trace: Trace, inner: Algorithm, tol: float = 1e-9) -> list[str]:
    """Replay the inner protocol directly under the induced schedule and
    compare, event round by event round, every robot's position and inner
    light against the simulator's record.  Returns human-readable mismatches.
    """
    if trace.header.delta is not None:
        raise ValueError("fidelity replay requires a rigid-movement trace")
    induced = extract_induced_schedule(trace)
    k = len(inner.palette)
    violations: list[str] = []
    if not induced.sets:
        return violations
    direct = run(
        inner_initial_config(trace, inner),
        induced,
        inner,
        model=ModelKind.LUMI,
        rigidity=Rigidity(),
        seed=trace.header.seed,
    )
    event_rounds = [i for i, r in enumerate(trace.rounds)
                    if any("inner-exec" in evs for evs in r.events.values())]
    for j, round_idx in enumerate(event_rounds):
        sim_config = trace.rounds[round_idx].config
        ref_config = direct.rounds[j].config
        for rid in range(trace.initial.n):
            if not points_close(sim_config.position(rid), ref_config.position(rid), tol):
                violations.append(
                    f"inner round {j + 1}: robot {rid} position diverges at trace round {round_idx + 1}"
                )
            if sim_config.light(rid).values[:k] != ref_config.light(rid).values:
                violations.append(
                    f"inner round {j + 1}: robot {rid} inner light diverges at trace round {round_idx + 1}"
                )
    return violations


def _mega_cycle_violations(
    trace: Trace, exec_flags: list[list[int]], events_by_round: list[frozenset[int]]
) -> list[str]:
    """Check that between mega-cycle boundaries every robot executes the inner
    algorithm exactly once.  A cycle closes when every executed flag is up and
    reopens once they have all been cleared."""
    n = trace.initial.n
    violations = []
    counts = {r: 0 for r in range(n)}
    draining = False
    for i, execs in enumerate(events_by_round):
        flags = exec_flags[i + 1]  # post-round flags
        if draining and execs:
            violations.append(f"round {i + 1}: inner execution between mega-cycles")
        for rid in execs:
            counts[rid] += 1
            if counts[rid] > 1:
                violations.append(f"round {i + 1}: robot {rid} executed twice in a mega-cycle")
        if not draining and all(flags):
            missing = [r for r, c in counts.items() if c != 1]
            if missing:
                violations.append(f"round {i + 1}: mega-cycle closed without robots {missing}")
            draining = True
        elif draining and not any(flags):
            counts = {r: 0 for r in range(n)}
            draining = False
    return violations


def _monitor_rs_by_s(trace: Trace, layout: RsBySLayout) -> list[str]:
    STEP, EXEC, CHARGED = layout.step, layout.executed, layout.charged
    configs = trace.configs()
    n = trace.initial.n
    violations: list[str] = []

    def flags(config, rid):
        t = config.light(rid).values
        return t[STEP], t[EXEC], t[CHARGED]

    events_by_round = [
        frozenset(rid for rid, evs in r.events.items() if "inner-exec" in evs)
        for r in trace.rounds
    ]
    exec_flags = [[c.light(r).values[EXEC] for r in range(n)] for c in configs]

    last_singleton = None
    last_exec_set: frozenset[int] = frozenset()
    for i, config in enumerate(configs):
        state = [flags(config, r) for r in range(n)]
        steps = frozenset(s for s, _, _ in state)
        if steps not in RS_STEP_SETS:
            violations.append(f"round {i}: step configuration {sorted(steps)} is not allowed")
            continue
        if i > 0 and events_by_round[i - 1]:
            last_exec_set = events_by_round[i - 1]
        if len(steps) != 1:
            continue
        (step_val,) = steps
        pairs = [(c, e) for _, e, c in state]
        charged = [c for _, _, c in state]
        executed = [e for _, e, _ in state]
        if step_val == RS_STEP_1:
            if any(p != (CH_C, 0) for p in pairs):
                violations.append(f"round {i}: step-1 robots must all be charged and unexecuted")
        elif step_val == RS_STEP_2:
            if CH_M in charged:
                violations.append(f"round {i}: just-moved charge flag inside step 2")
            if CH_E not in charged:
                violations.append(f"round {i}: step 2 lacks a discharged robot")
            if any(c == CH_E and e == 0 for c, e in zip(charged, executed)):
                if any(executed):
                    violations.append(f"round {i}: stale discharged robot outside a fresh mega-cycle")
            if all(c == CH_E for c in charged) and not all(executed):
                violations.append(f"round {i}: fully discharged swarm with unexecuted robots")
            if all(c == CH_E and e == 1 for c, e in zip(charged, executed)):
                if last_singleton not in (RS_STEP_1, RS_STEP_2):
                    violations.append(f"round {i}: full execution without a preceding step 1")
        elif step_val == RS_STEP_3:
            if any(p not in ((CH_C, 0), (CH_E, 1)) for p in pairs):
                violations.append(f"round {i}: step-3 flags outside the reset/executed pair")
        elif step_val == RS_STEP_4:
            moved = frozenset(r for r, (_, e, c) in enumerate(state) if c == CH_M)
            if any(c == CH_M and e == 0 for c, e in zip(charged, executed)):
                violations.append(f"round {i}: moved-but-unexecuted robot in step 4")
            if not moved or len(moved) >= n:
                violations.append(f"round {i}: step-4 movers must be a nonempty proper subset")
            elif moved != last_exec_set:
                violations.append(f"round {i}: step-4 movers differ from the last inner execution")
        elif step_val == RS_STEP_5:
            if any(c == CH_M and e == 0 for c, e in zip(charged, executed)):
                violations.append(f"round {i}: moved-but-unexecuted robot in step 5")
            if any(c == CH_E and e == 0 for c, e in zip(charged, executed)):
                violations.append(f"round {i}: discharged-but-unexecuted robot in step 5")
            spent = frozenset(r for r, (_, e, c) in enumerate(state) if c in (CH_M, CH_E))
            if not spent or len(spent) >= n:
                violations.append(f"round {i}: step-5 spent robots must be a nonempty proper subset")
        elif step_val == RS_STEP_M:
            if CH_M in charged:
                violations.append(f"round {i}: just-moved charge flag inside step m")
            ready = sum(1 for c in charged if c == CH_C)
            if ready == 0 or ready >= n:
                violations.append(f"round {i}: step-m charged robots must be a nonempty proper subset")
        last_singleton = step_val

    violations.extend(_mega_cycle_violations(trace, exec_flags, events_by_round))
    return violations


def _monitor_lumi_by_fcom(trace: Trace, layout: LumiByFcomLayout) -> list[str]:
    k, ell = layout.k, layout.ell
    COUNTS, STEP, EXEC = layout.counts, layout.step, layout.executed
    SUC_EXEC, CHECKED, SUC_CHECKED = layout.suc_executed, layout.checked, layout.suc_checked
    inner_palette = layout.inner
    configs = trace.configs()
    n = trace.initial.n
    violations: list[str] = []

    def actual_suc_state(config: Configuration, rid: int):
        """Ground-truth successor-location color counts and executed flags."""
        ring = order_locations([p for _, p, _ in config.entries])
        own = config.position(rid)
        suc_loc = ring.locations[ring.suc(ring.index_of(own))]
        counts = [0] * ell
        mask = 0
        for other, p, lt in config.entries:
            if points_close(p, suc_loc):
                counts[flat_color(lt.values[:k], inner_palette)] += 1
                mask |= EXEC_SET_TRUE if lt.values[EXEC] else EXEC_SET_FALSE
        return [min(c, layout.n) for c in counts], mask

    events_by_round = [
        frozenset(rid for rid, evs in r.events.items() if "inner-exec" in evs)
        for r in trace.rounds
    ]
    exec_flags = [[c.light(r).values[EXEC] for r in range(n)] for c in configs]

    # Own-color reconstruction: every event value must match the executing
    # robot's actual inner color before the round.
    for i, r in enumerate(trace.rounds):
        pre = configs[i]
        for rid, evs in r.events.items():
            for ev in evs:
                if ev.startswith("own-color:"):
                    claimed = int(ev.split(":", 1)[1])
                    actual = flat_color(pre.light(rid).values[:k], inner_palette)
                    if claimed != actual:
                        violations.append(
                            f"round {i + 1}: robot {rid} reconstructed color {claimed}, actual {actual}"
                        )

    def checking_reset(t: tuple[int, ...]) -> bool:
        return (
            all(t[COUNTS + c] == 0 for c in range(ell))
            and t[SUC_EXEC] == EXEC_SET_FALSE
            and t[CHECKED] == 0
            and t[SUC_CHECKED] == 0
        )

    for i, config in enumerate(configs):
        steps = frozenset(config.light(r).values[STEP] for r in range(n))
        if steps not in FC_STEP_SETS:
            violations.append(f"round {i}: step configuration {sorted(steps)} is not allowed")

    # The step-transition guarantees, checked at every individual change.  A robot
    # may do its phase's work in the very round it joins the phase (the
    # all-but-one deviant), so the assertions are anchored to transitions,
    # not to the first uniform configuration.
    for i in range(1, len(configs)):
        pre, post = configs[i - 1], configs[i]
        for rid in range(n):
            s_old = pre.light(rid).values[STEP]
            s_new = post.light(rid).values[STEP]
            t = post.light(rid).values
            if s_old == FC_STEP_1 and s_new == FC_STEP_2:
                # Finished copying: flags up and the displayed copy must match
                # the successor location's ground truth.
                if t[CHECKED] != 1 or t[SUC_CHECKED] != 1:
                    violations.append(f"round {i}: robot {rid} left copying with flags down")
                counts, mask = actual_suc_state(post, rid)
                got = [t[COUNTS + c] for c in range(ell)]
                if got != counts:
                    violations.append(
                        f"round {i}: robot {rid} successor-color copy {got} != actual {counts}"
                    )
                if t[SUC_EXEC] != mask:
                    violations.append(
                        f"round {i}: robot {rid} successor-executed copy {t[SUC_EXEC]} != {mask}"
                    )
            elif s_old == FC_STEP_2 and s_new == FC_STEP_M:
                stale = [q for q in range(n) if pre.light(q).values[EXEC] != 1]
                if stale:
                    violations.append(
                        f"round {i}: robot {rid} closed the mega-cycle with {stale} unexecuted"
                    )
            elif s_old == FC_STEP_M and s_new == FC_STEP_2:
                if t[EXEC] != 0 or t[SUC_EXEC] != EXEC_SET_FALSE:
                    violations.append(f"round {i}: robot {rid} left flag reset without resetting")
                stale = [
                    q for q in range(n)
                    if q != rid and pre.light(q).values[EXEC] != 0
                ]
                if stale:
                    violations.append(
                        f"round {i}: robot {rid} reopened simulation with {stale} not reset"
                    )
            elif s_old == FC_STEP_3 and s_new == FC_STEP_1:
                stale = [
                    q for q in range(n)
                    if q != rid and not checking_reset(pre.light(q).values)
                ]
                if stale:
                    violations.append(
                        f"round {i}: robot {rid} left flag clearing while {stale} were stale"
                    )

    violations.extend(_mega_cycle_violations(trace, exec_flags, events_by_round))
    return violations


def derive_rs_layout(palette: tuple[int, ...]) -> RsBySLayout:
    if len(palette) < 3 or palette[-3:] != (6, 2, 3):
        raise ValueError("palette does not look like a sim-rs-by-s layout")
    return RsBySLayout(palette[:-3])


def derive_fcom_layout(palette: tuple[int, ...]) -> LumiByFcomLayout:
    if len(palette) < 6 or palette[-5:] != (4, 2, 4, 2, 2):
        raise ValueError("palette does not look like a sim-lumi-by-fcom layout")
    body = palette[:-5]
    for k in range(len(body) + 1):
        inner = body[:k]
        ell = palette_size(inner)
        tail = body[k:]
        if len(tail) == ell and len(set(tail)) <= 1 and (not tail or tail[0] >= 2):
            return LumiByFcomLayout(inner, (tail[0] - 1) if tail else 1)
    raise ValueError("cannot derive the inner palette from this layout")


def monitor_properties(trace: Trace) -> list[str]:
    """Run the meta-simulator monitors appropriate for the trace.

    For sim-rs-by-s: the per-step flag invariants and the allowed step
    configurations.  For sim-lumi-by-fcom: the step-transition conclusions,
    own-color reconstruction, and flag hygiene.  Both check that every
    completed mega-cycle executes every robot exactly once.
    """
    if trace.header.algo == "sim-rs-by-s":
        return _monitor_rs_by_s(trace, derive_rs_layout(trace.header.palette))
    if trace.header.algo == "sim-lumi-by-fcom":
        return _monitor_lumi_by_fcom(trace, derive_fcom_layout(trace.header.palette))
    raise ValueError(f"trace algorithm {trace.header.algo!r} has no monitors")
