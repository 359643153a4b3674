import math
import random

import pytest

from lcmswarm.algorithms import (
    CYC_B,
    CYC_CARRY,
    CYC_PALETTE,
    CYC_STATUS,
    CYC_SUC_B,
    STATUS_CENTER,
    STATUS_FINAL,
    FlagScheme,
    MalformedPatternError,
    alg_cyclic_cycles,
    alg_move_east,
    alg_sro,
    alg_stay,
    alg_tricolor,
    classify_step_config,
    cyc_initial_config,
    decode_cyc_pattern,
    flag_scheme,
    flag_scheme_algorithm,
    is_except1,
    is_same,
)
from lcmswarm.core import (
    LightTuple,
    LocalFrame,
    ModelKind,
    Point,
    distance,
    make_configuration,
    points_close,
    snapshot,
)
from lcmswarm.engine import FrameSpec, run
from lcmswarm.scheduler import SSYNCH, SchedulePrefix, check_fair, generate


def observe(algo, cfg, rid, model):
    return algo.step(snapshot(model, cfg, rid, LocalFrame(cfg.position(rid))))


class TestSro:
    def test_step_from_origin(self):
        cfg = make_configuration([Point(0, 0), Point(1, 1)])
        res = observe(alg_sro(), cfg, 0, ModelKind.OBLOT)
        assert points_close(res.destination, Point(0, 1))

    def test_step_is_symmetric(self):
        cfg = make_configuration([Point(0, 0), Point(1, 1)])
        res = observe(alg_sro(), cfg, 1, ModelKind.OBLOT)
        # Destination is in robot 1's frame; (1,0) global is (0,-1) local.
        assert points_close(res.destination, Point(0, -1))

    def test_rejects_extra_robots(self):
        cfg = make_configuration([Point(0, 0), Point(1, 1), Point(2, 2)])
        with pytest.raises(MalformedPatternError):
            observe(alg_sro(), cfg, 0, ModelKind.OBLOT)

    def test_both_moving_keeps_length_one_moving_shrinks(self):
        cfg = make_configuration([Point(0, 0), Point(1, 1)])
        d0 = math.sqrt(2.0)
        both = run(cfg, SchedulePrefix((frozenset({0, 1}),), 2), alg_sro())
        c = both.rounds[0].config
        assert distance(c.position(0), c.position(1)) == pytest.approx(d0, abs=1e-12)
        one = run(cfg, SchedulePrefix((frozenset({0}),), 2), alg_sro())
        c = one.rounds[0].config
        assert distance(c.position(0), c.position(1)) == pytest.approx(d0 / math.sqrt(2), abs=1e-12)

    def test_alternation_shrinks_by_sqrt2_each_move(self):
        cfg = make_configuration([Point(0, 0), Point(1, 1)])
        alternation = SchedulePrefix(tuple(frozenset({k % 2}) for k in range(12)), 2)
        trace = run(cfg, alternation, alg_sro())
        lengths = [math.sqrt(2.0)]
        for r in trace.rounds:
            lengths.append(distance(r.config.position(0), r.config.position(1)))
        for prev, cur in zip(lengths, lengths[1:]):
            assert cur / prev == pytest.approx(1 / math.sqrt(2), abs=1e-9)


def cyc_lights(**overrides):
    vals = {"status": STATUS_CENTER, "b": 0, "c": 0, "suc_b": 0}
    vals.update(overrides)
    return LightTuple((vals["status"], vals["b"], vals["c"], vals["suc_b"]), CYC_PALETTE)


class TestCyclicCycles:
    def _config(self, n, lights, mover_at=None):
        base = cyc_initial_config(n)
        positions = [p for _, p, _ in base.entries]
        if mover_at is not None:
            positions[0] = mover_at
        return make_configuration(positions, lights)

    @pytest.mark.parametrize("pred_c,pred_suc_b,want_b,want_c", [
        (1, 1, 0, 1),
        (1, 0, 1, 0),
        (0, 1, 1, 0),
        (0, 0, 0, 0),
    ])
    def test_full_adder_cell(self, pred_c, pred_suc_b, want_b, want_c):
        # Robot 1 increments when the mover is back at the center, everything
        # before it in the chain shows center and everything after shows final.
        lights = [
            cyc_lights(status=STATUS_CENTER, c=pred_c, suc_b=pred_suc_b),  # mover = pred of r_1
            cyc_lights(status=STATUS_FINAL),
            cyc_lights(status=STATUS_FINAL, b=1),
        ]
        cfg = self._config(3, lights)
        res = observe(alg_cyclic_cycles(3), cfg, 1, ModelKind.FCOM)
        assert res.light[CYC_B] == want_b
        assert res.light[CYC_CARRY] == want_c
        assert res.light[CYC_SUC_B] == 1  # copies the successor's b bit
        assert res.light[CYC_STATUS] == STATUS_CENTER

    def test_mover_departs_only_from_full_center_pattern(self):
        cfg = self._config(3, [cyc_lights(), cyc_lights(), cyc_lights()])
        res = observe(alg_cyclic_cycles(3), cfg, 0, ModelKind.FCOM)
        assert res.light[CYC_STATUS] == STATUS_FINAL
        assert points_close(res.destination, Point(0.5, 0.0), 1e-9)
        # With a circle robot still showing final, the mover waits.
        cfg = self._config(3, [cyc_lights(), cyc_lights(status=STATUS_FINAL), cyc_lights()])
        res = observe(alg_cyclic_cycles(3), cfg, 0, ModelKind.FCOM)
        assert res.light == {} and points_close(res.destination, Point(0, 0))

    def test_mover_returns_and_injects_carry(self):
        lights = [
            cyc_lights(status=STATUS_FINAL),
            cyc_lights(status=STATUS_FINAL, b=1),
            cyc_lights(status=STATUS_FINAL),
        ]
        cfg = self._config(3, lights, mover_at=Point(0.5, 0.0))
        res = observe(alg_cyclic_cycles(3), cfg, 0, ModelKind.FCOM)
        assert res.light == {
            CYC_STATUS: STATUS_CENTER, CYC_B: 0, CYC_CARRY: 1, CYC_SUC_B: 1,
        }
        assert points_close(res.destination, Point(-0.5, 0.0))  # center, in the mover's frame

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_counter_follows_reference_counter(self, n):
        algo = alg_cyclic_cycles(n)
        trace = run(cyc_initial_config(n), "fsynch", algo, rounds=30 * 2 ** (n - 1), seed=0)
        seen = []
        for config in trace.configs():
            statuses = [config.light(r).values[CYC_STATUS] for r in range(n)]
            if all(s == STATUS_FINAL for s in statuses):
                bits = [config.light(r).values[CYC_B] for r in range(1, n)]
                value = sum(b << i for i, b in enumerate(bits))
                if not seen or seen[-1] != value:
                    seen.append(value)
        reference = [i % 2 ** (n - 1) for i in range(len(seen))]
        assert seen == reference
        assert len(seen) > 2 ** (n - 1)

    def test_circle_robots_never_move(self):
        trace = run(cyc_initial_config(4), "ssynch", alg_cyclic_cycles(4), rounds=150, seed=2)
        for r in trace.rounds:
            for rid in range(1, 4):
                assert r.config.position(rid) == trace.initial.position(rid)

    def test_d_rel_must_stay_inside_the_circle(self):
        algo = alg_cyclic_cycles(3, d_rel=lambda i: 1.5)
        with pytest.raises(ValueError, match="fraction"):
            run(cyc_initial_config(3), "fsynch", algo, rounds=2, seed=0)


class TestDecode:
    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_initial_pattern(self, n):
        cfg = cyc_initial_config(n, radius=2.0)
        view = decode_cyc_pattern([p for _, p, _ in cfg.entries], n)
        assert points_close(view.mover, Point(0, 0))
        assert points_close(view.center, Point(0, 0), 1e-9)
        assert view.radius == pytest.approx(2.0, abs=1e-9)
        assert points_close(view.vacancy, Point(2.0, 0.0), 1e-6)
        assert len(view.ring) == n - 1
        # Ring is clockwise from the vacancy: first entry is robot 1's spot.
        assert points_close(view.ring[0], cfg.position(1), 1e-9)

    def test_displaced_mover_still_decodes(self):
        cfg = cyc_initial_config(3)
        pts = [Point(0.5, 0.0)] + [cfg.position(i) for i in (1, 2)]
        view = decode_cyc_pattern(pts, 3)
        assert points_close(view.mover, Point(0.5, 0.0))

    def test_scatter_is_malformed(self):
        pts = [Point(0, 0), Point(1, 0), Point(0, 3), Point(7, 2)]
        with pytest.raises(MalformedPatternError):
            decode_cyc_pattern(pts, 4)

    def test_wrong_count_is_malformed(self):
        with pytest.raises(MalformedPatternError):
            decode_cyc_pattern([Point(0, 0)], 3)


class TestClassify:
    def test_spec_examples(self):
        assert classify_step_config([2, 2, 2]).kind == "same"
        got = classify_step_config([2, 2, 1])
        assert (got.kind, got.alpha, got.gamma, got.deviant) == ("except1", 2, 1, 2)
        assert classify_step_config([1, 2, 3]).kind == "mixed"

    def test_predicates(self):
        assert is_same([4, 4], 4)
        assert not is_same([4, 3], 4)
        assert is_except1([2, 2, 1], 2, 1)
        assert not is_except1([2, 1, 1], 2, 1)
        assert not is_except1([2, 2, 2], 2, 1)


ALPHA, BETA, GAMMA = 0, 1, 2


def scheme_config(steps, flags):
    lights = [LightTuple((s, f), (3, 2)) for s, f in zip(steps, flags)]
    return make_configuration([Point(10.0 * i, 0.0) for i in range(len(steps))], lights)


def scheme_state(config):
    steps = tuple(lt.values[0] for _, _, lt in config.entries)
    flags = tuple(lt.values[1] for _, _, lt in config.entries)
    return steps, flags


class TestFlagScheme:
    def test_react_rules(self):
        scheme = flag_scheme(ALPHA, BETA)
        assert scheme.react([ALPHA, ALPHA], [False, True]) == (ALPHA, True)
        assert scheme.react([ALPHA, ALPHA], [True, True]) == (BETA, True)
        assert scheme.react([BETA, BETA], [False, False]) == (BETA, None)
        assert scheme.react([ALPHA, BETA], [True, True]) == (BETA, None)
        assert scheme.react([ALPHA, GAMMA], [True, True]) == (None, None)

    def test_full_activation_finishes_in_two_rounds(self):
        algo = flag_scheme_algorithm(ALPHA, BETA)
        cfg = scheme_config([ALPHA] * 3, [0] * 3)
        trace = run(cfg, "fsynch", algo, rounds=2, seed=0)
        steps, flags = scheme_state(trace.rounds[1].config)
        assert steps == (BETA,) * 3 and flags == (1,) * 3

    def test_lone_deviant_rejoins(self):
        algo = flag_scheme_algorithm(ALPHA, BETA)
        cfg = scheme_config([GAMMA, ALPHA, ALPHA], [0, 0, 0])
        trace = run(cfg, SchedulePrefix((frozenset({0}),), 3), algo)
        steps, flags = scheme_state(trace.rounds[0].config)
        assert steps == (ALPHA, ALPHA, ALPHA)
        assert flags == (1, 0, 0)

    def test_terminal_class_is_stable(self):
        algo = flag_scheme_algorithm(ALPHA, BETA)
        cfg = scheme_config([BETA] * 3, [1] * 3)
        trace = run(cfg, "fsynch", algo, rounds=3, seed=0)
        for r in trace.rounds:
            assert scheme_state(r.config) == ((BETA,) * 3, (1,) * 3)

    @pytest.mark.parametrize("seed", range(30))
    def test_target_class_reached_under_fair_schedules(self, seed):
        rng = random.Random(seed)
        n = rng.choice([2, 3, 4])
        steps = [ALPHA] * n
        if rng.random() < 0.5:
            steps[rng.randrange(n)] = GAMMA
        window = 2 * n
        horizon = 4 * n * window
        schedule = generate(SSYNCH, n, horizon, seed)
        assert check_fair(schedule, window).ok
        trace = run(scheme_config(steps, [0] * n), schedule, flag_scheme_algorithm(ALPHA, BETA))
        for r in trace.rounds:
            got_steps, got_flags = scheme_state(r.config)
            if all(f == 1 for f in got_flags) and (
                is_same(got_steps, BETA) or is_except1(got_steps, BETA, ALPHA)
            ):
                return
        pytest.fail(f"terminal class not reached within {horizon} rounds")


class TestUtilityAlgorithms:
    def test_stay_stays(self):
        cfg = make_configuration([Point(3, 4), Point(5, 6)])
        trace = run(cfg, "fsynch", alg_stay(), rounds=3, seed=0)
        assert trace.rounds[-1].config == cfg

    def test_move_east_drifts_east(self):
        cfg = make_configuration([Point(0, 0)])
        trace = run(cfg, "fsynch", alg_move_east(), rounds=4, seed=0)
        assert trace.rounds[-1].config.position(0) == Point(4, 0)

    def test_tricolor_cycles_colors(self):
        cfg = make_configuration([Point(0, 0), Point(9, 0)], palette=(3,))
        trace = run(cfg, "fsynch", alg_tricolor(), rounds=3, seed=0)
        assert [c.light(0).values[0] for c in trace.configs()] == [0, 1, 2, 0]
