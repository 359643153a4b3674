"""Activation-set sequences and their per-scheduler validity rules.

Covers validity checking for five scheduler kinds, the energy ledger of
one-cycle-per-charge robots, the mapping that deletes forced idle rounds,
a bounded-window fairness proxy, and seeded schedule generators.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

FSYNCH = "fsynch"
SSYNCH = "ssynch"
RSYNCH = "rsynch"
ROUND_ROBIN = "round-robin"
ENERGY_RESTRICTED = "energy-restricted-ssynch"

KIND_NAMES = (FSYNCH, SSYNCH, RSYNCH, ROUND_ROBIN, ENERGY_RESTRICTED)


@dataclass(frozen=True)
class SchedulerKind:
    """A scheduler family; round-robin additionally carries its partition."""

    name: str
    blocks: tuple[frozenset[int], ...] | None = None

    def __post_init__(self):
        if self.name not in KIND_NAMES:
            raise ValueError(f"unknown scheduler kind {self.name!r}")
        if self.blocks is not None:
            if self.name != ROUND_ROBIN:
                raise ValueError("only round-robin takes partition blocks")
            if len(self.blocks) < 2:
                raise ValueError("round-robin needs a period of at least two blocks")
            if any(not b for b in self.blocks):
                raise ValueError("round-robin blocks must be nonempty")
            union: set[int] = set()
            for b in self.blocks:
                if union & b:
                    raise ValueError("round-robin blocks must be pairwise disjoint")
                union |= b


def round_robin(blocks) -> SchedulerKind:
    return SchedulerKind(ROUND_ROBIN, tuple(frozenset(b) for b in blocks))


@dataclass(frozen=True)
class SchedulePrefix:
    """Finite prefix of an activation sequence; sets[i] activates in round i+1."""

    sets: tuple[frozenset[int], ...]
    n: int

    def __post_init__(self):
        for i, s in enumerate(self.sets):
            for rid in s:
                if not 0 <= rid < self.n:
                    raise ValueError(f"round {i + 1}: member id {rid} out of range for n={self.n}")

    def __len__(self) -> int:
        return len(self.sets)

    @property
    def all_robots(self) -> frozenset[int]:
        return frozenset(range(self.n))


@dataclass(frozen=True)
class ValidityReport:
    ok: bool
    round: int | None = None  # 1-based first violating round
    rule: str | None = None

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class EnergyLedger:
    """Per-round sets of full-energy robots.

    charged[i] is the set before round i+1 is scheduled: all robots start
    charged, an activated robot depletes for exactly one round, and an idle
    robot is (re)charged the following round.  There is one more entry than
    rounds, covering the state after the last round.
    """

    charged: tuple[frozenset[int], ...]
    violations: tuple[tuple[int, str], ...]  # (round, rule)

    def before_round(self, i: int) -> frozenset[int]:
        """Charged set at the start of 1-based round i."""
        return self.charged[i - 1]


@dataclass(frozen=True)
class FairnessReport:
    ok: bool
    window: int
    violations: tuple[tuple[int, int, int], ...]  # (robot, gap, round observed)


def energy_ledger(prefix: SchedulePrefix) -> EnergyLedger:
    """Unroll the charge recurrence; flag rounds that activate depleted robots."""
    full = prefix.all_robots
    charged = [full]
    violations = []
    for i, e in enumerate(prefix.sets, start=1):
        if not e <= charged[-1]:
            violations.append((i, "depleted-robot-activated"))
        charged.append(full - e)
    return EnergyLedger(tuple(charged), tuple(violations))


def _validate_rsynch(prefix: SchedulePrefix) -> ValidityReport:
    full = prefix.all_robots
    sets = prefix.sets
    p = 0
    while p < len(sets) and sets[p] == full:
        p += 1
    for i in range(p, len(sets)):
        e = sets[i]
        if not e:
            return ValidityReport(False, i + 1, "empty-set")
        if e == full:
            return ValidityReport(False, i + 1, "full-set-after-partial")
        if i > p and sets[i - 1] & e:
            return ValidityReport(False, i + 1, "overlap-consecutive")
    return ValidityReport(True)


def _validate_round_robin(prefix: SchedulePrefix, kind: SchedulerKind) -> ValidityReport:
    full = prefix.all_robots
    sets = prefix.sets
    if kind.blocks is not None:
        blocks = kind.blocks
        if frozenset().union(*blocks) != full:
            return ValidityReport(False, 1, "blocks-do-not-cover")
    else:
        blocks = None
        for p in range(2, len(sets) + 1):
            head = sets[:p]
            if all(head) and sum(len(b) for b in head) == prefix.n and frozenset().union(*head) == full:
                blocks = head
                break
        if blocks is None:
            return ValidityReport(False, 1, "no-partition-period")
    p = len(blocks)
    for i, e in enumerate(sets):
        if e != blocks[i % p]:
            return ValidityReport(False, i + 1, "period-mismatch")
    return ValidityReport(True)


def validate(prefix: SchedulePrefix, kind: SchedulerKind | str) -> ValidityReport:
    """Check a prefix against a scheduler family; report the first violation."""
    if isinstance(kind, str):
        kind = SchedulerKind(kind)
    if prefix.n < 1:
        raise ValueError("need at least one robot")
    full = prefix.all_robots

    if kind.name == SSYNCH:
        for i, e in enumerate(prefix.sets, start=1):
            if not e:
                return ValidityReport(False, i, "empty-set")
        return ValidityReport(True)

    if kind.name == FSYNCH:
        for i, e in enumerate(prefix.sets, start=1):
            if e != full:
                return ValidityReport(False, i, "not-full-set")
        return ValidityReport(True)

    if kind.name == RSYNCH:
        return _validate_rsynch(prefix)

    if kind.name == ENERGY_RESTRICTED:
        ledger = energy_ledger(prefix)
        for i, e in enumerate(prefix.sets, start=1):
            if not e <= ledger.before_round(i):
                return ValidityReport(False, i, "depleted-robot-activated")
            if not e and ledger.before_round(i):
                return ValidityReport(False, i, "idle-while-charged")
        return ValidityReport(True)

    return _validate_round_robin(prefix, kind)


def phi(prefix: SchedulePrefix) -> SchedulePrefix:
    """Delete the forced idle rounds of an energy-restricted prefix.

    The result is always valid under the restricted-repetition scheduler:
    leading full-swarm sets (each followed by a deleted forced-idle round)
    and a tail of nonempty sets with consecutive sets disjoint.
    """
    report = validate(prefix, ENERGY_RESTRICTED)
    if not report:
        raise ValueError(
            f"prefix invalid under energy restriction: {report.rule} at round {report.round}"
        )
    return SchedulePrefix(tuple(e for e in prefix.sets if e), prefix.n)


def check_fair(prefix: SchedulePrefix, window: int) -> FairnessReport:
    """Bounded-window fairness proxy.

    Flags every robot whose gap between consecutive activations, since the
    start, or through the end of the prefix exceeds `window` rounds.
    Fairness of an infinite sequence is undecidable from a prefix; this is
    the explicit finite surrogate used everywhere in the harness.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    last = {r: 0 for r in range(prefix.n)}
    violations = []
    for i, e in enumerate(prefix.sets, start=1):
        for r in sorted(e):
            gap = i - last[r]
            if gap > window:
                violations.append((r, gap, i))
            last[r] = i
    end = len(prefix.sets)
    for r in range(prefix.n):
        gap = end - last[r]
        if gap > window:
            violations.append((r, gap, end))
    return FairnessReport(not violations, window, tuple(violations))


def default_fairness_window(n: int) -> int:
    return 2 * n


def _sample_nonempty(rng: random.Random, pool: list[int]) -> set[int]:
    k = rng.randint(1, len(pool))
    return set(rng.sample(pool, k))


def generate(
    kind: SchedulerKind | str,
    n: int,
    rounds: int,
    seed: int,
) -> SchedulePrefix:
    """Deterministically generate a valid activation prefix.

    Random generators force-include any robot approaching the default
    fairness window, so their output is always fair with window <= 2n.
    """
    if isinstance(kind, str):
        kind = SchedulerKind(kind)
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if n < 1:
        raise ValueError("need at least one robot")
    rng = random.Random(seed)
    full = frozenset(range(n))
    window = default_fairness_window(n)

    if kind.name == FSYNCH:
        return SchedulePrefix((full,) * rounds, n)

    if kind.name == ROUND_ROBIN:
        if kind.blocks is None:
            raise ValueError("round-robin generation requires partition blocks")
        if frozenset().union(*kind.blocks) != full:
            raise ValueError("round-robin blocks must cover the whole swarm")
        p = len(kind.blocks)
        return SchedulePrefix(tuple(kind.blocks[i % p] for i in range(rounds)), n)

    if kind.name == SSYNCH:
        sets = []
        last = {r: 0 for r in range(n)}
        for i in range(1, rounds + 1):
            s = _sample_nonempty(rng, list(range(n)))
            s |= {r for r in range(n) if i - last[r] >= window}
            sets.append(frozenset(s))
            for r in s:
                last[r] = i
        return SchedulePrefix(tuple(sets), n)

    if kind.name == RSYNCH:
        if n == 1:
            # A nonempty proper subset of a single robot cannot exist; the
            # only valid prefixes activate the full swarm forever.
            return SchedulePrefix((full,) * rounds, n)
        p_full = rng.choice([0, 0, 1, 2, rng.randint(0, rounds)])
        p_full = min(p_full, rounds)
        sets = [full] * p_full
        last = {r: p_full if p_full else 0 for r in range(n)}
        prev: frozenset[int] | None = None
        for i in range(p_full + 1, rounds + 1):
            allowed = sorted(full - prev) if prev else sorted(full)
            s = _sample_nonempty(rng, allowed)
            s |= {r for r in allowed if i - last[r] >= window}
            if len(s) == n:
                removable = sorted(r for r in s if i - last[r] < window)
                s.discard(removable[0] if removable else min(s))
            prev = frozenset(s)
            sets.append(prev)
            for r in prev:
                last[r] = i
        return SchedulePrefix(tuple(sets), n)

    # Energy-restricted: activate within the charged set, idling only when
    # a full activation forces it.
    sets = []
    charged = full
    last = {r: 0 for r in range(n)}
    for i in range(1, rounds + 1):
        if not charged:
            sets.append(frozenset())
        else:
            s = _sample_nonempty(rng, sorted(charged))
            s |= {r for r in charged if i - last[r] >= window}
            sets.append(frozenset(s))
            for r in s:
                last[r] = i
        charged = full - sets[-1]
    return SchedulePrefix(tuple(sets), n)


def write_schedule(prefix: SchedulePrefix, kind_name: str, path: str) -> None:
    """Write a schedule file: header line, then one activation set per line."""
    lines = [f"n={prefix.n} kind={kind_name}"]
    for e in prefix.sets:
        lines.append(" ".join(str(r) for r in sorted(e)))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_schedule(path: str) -> tuple[SchedulePrefix, str]:
    """Parse a schedule file; an empty line denotes an empty activation set."""
    with open(path) as fh:
        raw = fh.read().split("\n")
    if raw and raw[-1] == "":
        raw.pop()
    if not raw:
        raise ValueError(f"{path}:1: missing schedule header")
    header = raw[0].split()
    fields = dict(tok.split("=", 1) for tok in header if "=" in tok)
    if "n" not in fields or "kind" not in fields:
        raise ValueError(f"{path}:1: header must declare n=<count> kind=<scheduler>")
    n = int(fields["n"])
    kind_name = fields["kind"]
    sets = []
    for lineno, line in enumerate(raw[1:], start=2):
        body = line.strip()
        try:
            sets.append(frozenset(int(tok) for tok in body.split()) if body else frozenset())
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: bad robot id: {exc}") from exc
    return SchedulePrefix(tuple(sets), n), kind_name
