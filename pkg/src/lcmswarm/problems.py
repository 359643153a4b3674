"""Trace-level checkers for the benchmark problems.

Each checker is a pure fold over a trace and returns a three-way verdict:
ok, reject (with the first violating round), or inconclusive.  Inconclusive
is reserved for liveness-style goals that a finite prefix can neither
establish nor refute.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .algorithms import CYC_B, CYC_STATUS, STATUS_CENTER, STATUS_FINAL, decode_cyc_pattern
from .core import Configuration, Point, distance, midpoint, points_close, sub
from .engine import Trace

OK = "ok"
REJECT = "reject"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Verdict:
    status: str
    round: int | None = None
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.status == OK


def _ok() -> Verdict:
    return Verdict(OK)


def _reject(round_: int, reason: str) -> Verdict:
    return Verdict(REJECT, round_, reason)


def _inconclusive(reason: str) -> Verdict:
    return Verdict(INCONCLUSIVE, None, reason)


def cog(config: Configuration) -> Point:
    """Center of gravity: the arithmetic mean of all robot positions."""
    if config.n < 1:
        raise ValueError("need at least one robot")
    return Point(
        sum(p.x for _, p, _ in config.entries) / config.n,
        sum(p.y for _, p, _ in config.entries) / config.n,
    )


# ---------------------------------------------------------------------------
# Shrinking rotation.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiagonalSquare:
    """The square whose diagonal is the segment between two points; the region
    includes the boundary."""

    a: Point
    b: Point

    def vertices(self) -> tuple[Point, Point, Point, Point]:
        m = midpoint(self.a, self.b)
        hx, hy = (self.b.x - self.a.x) / 2.0, (self.b.y - self.a.y) / 2.0
        return (self.a, Point(m.x - hy, m.y + hx), self.b, Point(m.x + hy, m.y - hx))

    def contains(self, p: Point, tol: float) -> bool:
        vs = self.vertices()
        sign = 0
        for i in range(4):
            q, r = vs[i], vs[(i + 1) % 4]
            cross = (r.x - q.x) * (p.y - q.y) - (r.y - q.y) * (p.x - q.x)
            if cross > tol:
                side = 1
            elif cross < -tol:
                side = -1
            else:
                continue
            if sign == 0:
                sign = side
            elif side != sign:
                return False
        return True


def check_sro(trace: Trace, tol: float = 1e-9) -> Verdict:
    """Every transition between distinct configurations must be a 90 degree
    clockwise equal-length turn or a 45 degree clockwise turn shrunk by
    1/sqrt(2), and both new endpoints must stay inside the square spanned two
    patterns earlier.

    Checking stops once the segment shrinks below 1000*tol of the coordinate
    magnitude: beneath that floor the double grid holding the positions can
    no longer express angles and ratios to the stated tolerance, and the
    spiral has converged for every purpose the tolerance can resolve.
    """
    if trace.initial.n != 2:
        raise ValueError("shrinking rotation is a two-robot problem")
    configs = trace.configs()
    rounds = [0]
    distinct = [(configs[0].position(0), configs[0].position(1))]
    for i, c in enumerate(configs[1:], start=1):
        a, b = c.position(0), c.position(1)
        pa, pb = distinct[-1]
        ref = max(distance(pa, pb), 1e-300)
        if distance(a, pa) > tol * ref or distance(b, pb) > tol * ref:
            distinct.append((a, b))
            rounds.append(i)

    for i in range(1, len(distinct)):
        (pa, pb), (a, b) = distinct[i - 1], distinct[i]
        v_old = sub(pb, pa)
        v_new = sub(b, a)
        len_old = math.hypot(v_old.x, v_old.y)
        len_new = math.hypot(v_new.x, v_new.y)
        span = max(1.0, abs(pa.x), abs(pa.y), abs(pb.x), abs(pb.y))
        if len_old <= 1000.0 * tol * span:
            return _ok()  # converged below the resolvable scale
        if len_old <= 0.0:
            return _reject(rounds[i - 1], "degenerate segment")
        ratio = len_new / len_old
        angle = math.atan2(
            v_old.x * v_new.y - v_old.y * v_new.x, v_old.x * v_new.x + v_old.y * v_new.y
        )
        quarter = abs(angle + math.pi / 2.0) <= tol and abs(ratio - 1.0) <= tol
        eighth = abs(angle + math.pi / 4.0) <= tol and abs(ratio - 1.0 / math.sqrt(2.0)) <= tol
        if not (quarter or eighth):
            return _reject(
                rounds[i],
                f"transition is neither a quarter turn nor a shrunk eighth turn "
                f"(angle {angle:.6g}, ratio {ratio:.6g})",
            )
        if i >= 2:
            qa, qb = distinct[i - 2]
            square = DiagonalSquare(qa, qb)
            slack = tol * max(distance(qa, qb), 1.0)
            if not (square.contains(a, slack) and square.contains(b, slack)):
                return _reject(rounds[i], "configuration escaped the grandparent square")
    return _ok()


# ---------------------------------------------------------------------------
# Cyclic circles.
# ---------------------------------------------------------------------------

def check_cyc(
    trace: Trace,
    n: int,
    d_rel: Callable[[int], float] | None = None,
    tol: float = 1e-9,
) -> Verdict:
    """Project the trace onto its uniform-status rounds and verify the pattern
    alternation and the counter sequence.

    The circle robots must never move.  Rounds where the status lights are
    mixed are transitional and ignored.  The verdict is ok only after a full
    counter cycle of 2^(n-1) oscillations; a shorter clean prefix is
    inconclusive.
    """
    if trace.initial.n != n:
        raise ValueError(f"trace has {trace.initial.n} robots, expected {n}")
    d_fn = d_rel or (lambda _i: 0.5)
    k = 2 ** (n - 1)
    initial = trace.initial
    view = decode_cyc_pattern([p for _, p, _ in initial.entries], n)

    def rid_at(p: Point) -> int:
        for rid, q, _ in initial.entries:
            if points_close(q, p, tol * view.radius):
                return rid
        raise ValueError("initial pattern decode lost a robot")

    mover = rid_at(view.mover)
    ring_ids = [rid_at(p) for p in view.ring]
    pos_tol = max(tol, 1e-12) * view.radius
    unit = Point(
        (view.vacancy.x - view.center.x) / view.radius,
        (view.vacancy.y - view.center.y) / view.radius,
    )

    labels: list[tuple[int, int]] = []  # (counter index or -1 for the base pattern, round)
    configs = trace.configs()
    for i, config in enumerate(configs):
        for rid in ring_ids:
            if not points_close(config.position(rid), initial.position(rid), pos_tol):
                return _reject(i, f"circle robot {rid} moved")
        statuses = [config.light(rid).values[CYC_STATUS] for rid in range(n)]
        bits = [config.light(rid).values[CYC_B] for rid in ring_ids]
        idx = sum(b << j for j, b in enumerate(bits))
        mover_pos = config.position(mover)
        if all(s == STATUS_CENTER for s in statuses):
            if not points_close(mover_pos, view.center, pos_tol):
                return _reject(i, "uniform center status while the mover is away from the center")
            label = -1
        elif all(s == STATUS_FINAL for s in statuses):
            frac = d_fn(idx)
            target = Point(
                view.center.x + frac * view.radius * unit.x,
                view.center.y + frac * view.radius * unit.y,
            )
            if not points_close(mover_pos, target, pos_tol):
                return _reject(i, "uniform final status while the mover is off its target")
            label = idx
        else:
            continue
        if not labels or labels[-1][0] != label:
            labels.append((label, i))

    expected = 0
    oscillations = 0
    for j, (label, rnd) in enumerate(labels):
        if j % 2 == 0:
            if label != -1:
                return _reject(rnd, "pattern sequence must alternate starting from the base pattern")
        else:
            if label == -1:
                return _reject(rnd, "pattern sequence must alternate")
            if label != expected % k:
                return _reject(rnd, f"counter showed {label}, expected {expected % k}")
            expected += 1
            oscillations += 1
    if oscillations >= k:
        return _ok()
    return _inconclusive(f"observed {oscillations} of {k} oscillations")


# ---------------------------------------------------------------------------
# Center-of-gravity expansion.
# ---------------------------------------------------------------------------

_FLOOR_GUARD = 2.0 ** -44  # absorbs mean-of-integers rounding near lattice points


def cge_target_map(a: float, b: float) -> float:
    """Target coordinate: floor(2a - b), guarded against representation error
    when 2a - b sits exactly on a lattice point."""
    v = 2.0 * a - b
    return float(math.floor(v + _FLOOR_GUARD * max(1.0, abs(v))))


def cge_targets(config: Configuration) -> list[Point]:
    c = cog(config)
    return [
        Point(cge_target_map(p.x, c.x), cge_target_map(p.y, c.y))
        for _, p, _ in config.entries
    ]


def check_cge(trace: Trace, tol: float = 1e-9) -> Verdict:
    """Each robot must move straight to its expansion target and then stop.

    Movement may take several rounds but must stay on the segment from the
    initial position to the target with the remaining distance shrinking; an
    activated robot that idles short of its target is rejected, as is any
    motion after arrival.  Robots still en route at the end of the prefix
    leave the verdict inconclusive.
    """
    if trace.initial.n < 2:
        raise ValueError("expansion needs at least 2 robots")
    targets = cge_targets(trace.initial)
    configs = trace.configs()
    n = trace.initial.n

    reached = [False] * n
    remaining = [0.0] * n
    for rid in range(n):
        p0 = trace.initial.position(rid)
        remaining[rid] = distance(p0, targets[rid])
        reached[rid] = remaining[rid] <= tol

    for i, rec in enumerate(trace.rounds, start=1):
        prev = configs[i - 1]
        for rid in range(n):
            p_old, p_new = prev.position(rid), rec.config.position(rid)
            target = targets[rid]
            moved = distance(p_old, p_new)
            if reached[rid]:
                if moved > tol:
                    return _reject(i, f"robot {rid} moved after reaching its target")
                continue
            span = distance(trace.initial.position(rid), target)
            slack = tol * max(span, 1.0)
            detour = distance(trace.initial.position(rid), p_new) + distance(p_new, target) - span
            if detour > slack:
                return _reject(i, f"robot {rid} left the straight segment to its target")
            left = distance(p_new, target)
            if left > remaining[rid] + slack:
                return _reject(i, f"robot {rid} moved away from its target")
            if rid in rec.eset and moved <= tol and left > tol:
                return _reject(i, f"robot {rid} was activated but idled short of its target")
            remaining[rid] = left
            if left <= tol:
                reached[rid] = True
    if all(reached):
        return _ok()
    stragglers = [r for r in range(n) if not reached[r]]
    return _inconclusive(f"robots {stragglers} have not reached their targets")


# ---------------------------------------------------------------------------
# Rendezvous.
# ---------------------------------------------------------------------------

def check_rdv(trace: Trace, tol: float = 1e-9) -> Verdict:
    """Two robots must meet and never separate afterwards."""
    if trace.initial.n != 2:
        raise ValueError("rendezvous is a two-robot problem")
    gathered_at: int | None = None
    for i, config in enumerate(trace.configs()):
        together = distance(config.position(0), config.position(1)) <= tol
        if gathered_at is None:
            if together:
                gathered_at = i
        elif not together:
            return _reject(i, f"robots separated after gathering at round {gathered_at}")
    if gathered_at is None:
        return _inconclusive("robots never gathered within the prefix")
    return _ok()
