import math

import numpy as np
import pytest

from errors import DegenerateReachError, SolverError
from game_core import compile_tree
from games.kuhn import kuhn_equilibrium_policy
from games.matrix import MatrixGame
from policy import TabularPolicy, policy_vector, segment_softmax
from solvers import runner
from solvers.cfr import GIGA, HEDGE, REGRET_MATCHING, CfrState, cfr_br_step, cfr_step
from solvers.ed import QC_L2, QC_MD, QC_SOFTMAX, EdState, apply_update, ed_step
from solvers.records import BestIterateTracker
from solvers.runner import SolverConfig, evaluation_schedule, run
from solvers.schedule import CONSTANT, SQRT, StepSchedule
from solvers.xfp import XfpState, xfp_step

KUHN_VALUE = -1.0 / 18.0


@pytest.fixture
def matrix_tree():
    return compile_tree(MatrixGame([[1.0, -1.0], [-2.0, 3.0]]))


def _on_simplex(tree, vector, tol=1e-12):
    return (vector >= 0).all() and np.abs(tree.segment_sums(vector) - 1.0).max() <= tol


def _regret_bound(tree, iterations):
    """Σ_i |S_i| Δu √|A_i| / √T using each player's widest infostate."""
    total = 0.0
    for player in (0, 1):
        infostates = tree.player_infostate_list(player)
        widest = max(info.num_actions for info in infostates)
        total += len(infostates) * tree.utility_range * math.sqrt(widest)
    return total / math.sqrt(iterations)


class TestEvaluationSchedule:
    def test_powers_of_two_plus_last(self):
        assert evaluation_schedule(10) == [1, 2, 4, 8, 10]
        assert evaluation_schedule(8) == [1, 2, 4, 8]

    def test_fixed_cadence(self):
        points = evaluation_schedule(1000, 10)
        assert len(points) == 100
        assert points[0] == 10 and points[-1] == 1000

    def test_empty_budget(self):
        assert evaluation_schedule(0) == []

    def test_bad_cadence(self):
        with pytest.raises(ValueError):
            evaluation_schedule(10, 0)


class TestStepSchedule:
    def test_sqrt(self):
        schedule = StepSchedule.parse("sqrt", scale=2.0)
        assert schedule.kind == SQRT
        assert schedule.rate(4) == 1.0

    def test_constant(self):
        schedule = StepSchedule.parse("0.5", scale=2.0)
        assert schedule.kind == CONSTANT
        assert schedule.rate(1) == schedule.rate(100) == 1.0

    @pytest.mark.parametrize("text", ["fast", "", None])
    def test_unparseable(self, text):
        with pytest.raises(ValueError):
            StepSchedule.parse(text)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            StepSchedule(CONSTANT, 0.0)
        with pytest.raises(ValueError):
            StepSchedule().rate(0)


class TestCfr:
    def test_first_iteration_regrets(self, matrix_tree):
        state, _ = cfr_step(CfrState.initial(matrix_tree))
        # row vs uniform columns: q^c = [0, 0.5]; col (negated payoffs) vs uniform rows: q^c = [0.5, -1]
        assert np.allclose(state.regrets, [-0.25, 0.25, 0.75, -0.75], atol=1e-15)
        assert state.current.tolist() == [0.0, 1.0, 1.0, 0.0]
        assert np.allclose(state.average_policy(), 0.5)

    def test_average_is_current_before_any_step(self, kuhn_tree):
        state = CfrState.initial(kuhn_tree)
        assert np.array_equal(state.average_policy(), kuhn_tree.uniform_vector())

    def test_unknown_learner(self, kuhn_tree):
        with pytest.raises(ValueError):
            CfrState.initial(kuhn_tree, learner="adam")

    def test_below_regret_bound(self, kuhn_tree):
        result = run(SolverConfig("cfr", "kuhn", 1000, eval_every=100))
        by_iteration = {r.iteration: r.nashconv for r in result.records}
        for t in (100, 1000):
            assert by_iteration[t] < _regret_bound(kuhn_tree, t)

    def test_trend(self):
        result = run(SolverConfig("cfr", "kuhn", 512))
        nashconv = {r.iteration: r.nashconv for r in result.records}
        assert nashconv[512] < nashconv[16] < nashconv[1]

    @pytest.mark.parametrize("game, iterations", [
        ("kuhn", 1024),
        ("leduc", 1024),
        ("goofspiel", 1024),
        pytest.param("liars_dice", 64, marks=pytest.mark.slow),
    ])
    def test_average_nashconv_never_increases_from_t4(self, game, iterations):
        # Goofspiel's average rises between T=2 and T=4
        records = run(SolverConfig("cfr", game, iterations)).records
        curve = [r.nashconv for r in records if r.iteration >= 4]
        assert len(curve) >= 5
        for previous, later in zip(curve, curve[1:]):
            assert later <= previous + 1e-12

    @pytest.mark.slow
    def test_kuhn_game_value(self, kuhn_tree):
        result = run(SolverConfig("cfr", "kuhn", 10000))
        final = result.final_record
        assert final.value_p0 == pytest.approx(KUHN_VALUE, abs=1e-3)
        assert final.nashconv < 1e-2
        assert final.nashconv < _regret_bound(kuhn_tree, 10000)


class TestXfp:
    def test_first_iteration_is_the_best_response(self, kuhn_tree):
        from best_response import best_response_vector

        uniform = kuhn_tree.uniform_vector()
        expected = best_response_vector(kuhn_tree, uniform, 0)[0] + best_response_vector(kuhn_tree, uniform, 1)[0]
        state, record = xfp_step(XfpState.initial(kuhn_tree))
        assert np.array_equal(state.average, expected)
        assert record.iteration == 1

    def test_one_shot_mixture(self, matrix_tree):
        from best_response import best_response_vector

        state = XfpState.initial(matrix_tree)
        state.iteration = 1
        old = state.average.copy()
        response = best_response_vector(matrix_tree, old, 0)[0] + best_response_vector(matrix_tree, old, 1)[0]
        state, _ = xfp_step(state, evaluate=False)
        assert np.allclose(state.average, 0.5 * old + 0.5 * response, atol=1e-15)

    def test_trend(self):
        result = run(SolverConfig("xfp", "kuhn", 1000))
        assert result.records[-1].nashconv < result.records[0].nashconv / 10


class TestEdUpdates:
    def test_mirror_descent_step(self, matrix_tree):
        state = EdState.initial(matrix_tree, QC_MD)
        params = apply_update(state, np.array([1.0, 0.0, 1.0, 0.0]), 1.0)
        probs = segment_softmax(params, matrix_tree.slot_offsets, matrix_tree.slot_infostate)
        e = math.e
        assert np.allclose(probs[:2], [e / (e + 1), 1 / (e + 1)], atol=1e-15)

    def test_projected_step(self, matrix_tree):
        state = EdState.initial(matrix_tree, QC_L2)
        params = apply_update(state, np.array([1.0, 0.0, 1.0, 0.0]), 0.1)
        assert np.allclose(params[:2], [0.55, 0.45], atol=1e-15)

    def test_softmax_step_direction(self, matrix_tree):
        state = EdState.initial(matrix_tree, QC_SOFTMAX)
        params = apply_update(state, np.array([1.0, 0.0, 1.0, 0.0]), 0.3)
        assert np.allclose(params[:2], 0.3 * np.array([0.25, -0.25]), atol=1e-15)

    def test_q_l2_needs_positive_start(self, kuhn_tree):
        start = kuhn_tree.uniform_vector()
        start[0], start[1] = 1.0, 0.0
        with pytest.raises(ValueError):
            EdState.initial(kuhn_tree, "q_l2", params=start)

    def test_unknown_variant(self, kuhn_tree):
        with pytest.raises(ValueError):
            EdState.initial(kuhn_tree, "qc_adam")


class TestEd:
    def test_projected_iterates_stay_on_simplex(self, kuhn_tree):
        state = EdState.initial(kuhn_tree, QC_L2)
        for _ in range(50):
            state, _ = ed_step(state, evaluate=False)
            assert _on_simplex(kuhn_tree, state.policy())

    def test_player_order_does_not_matter(self, kuhn_tree):
        forward = EdState.initial(kuhn_tree, QC_SOFTMAX)
        backward = EdState.initial(kuhn_tree, QC_SOFTMAX)
        for _ in range(20):
            forward, _ = ed_step(forward, evaluate=False, player_order=(0, 1))
            backward, _ = ed_step(backward, evaluate=False, player_order=(1, 0))
            assert np.array_equal(forward.params, backward.params)

    def test_matches_cfr_br_with_projected_gradient(self, kuhn_tree):
        schedule = StepSchedule(SQRT, 1.0)
        ed = EdState.initial(kuhn_tree, QC_L2, schedule=schedule)
        cfr = CfrState.initial(kuhn_tree, learner=GIGA, schedule=schedule)
        for _ in range(100):
            ed, _ = ed_step(ed, evaluate=False)
            cfr, _ = cfr_br_step(cfr, evaluate=False)
            assert np.abs(ed.policy() - cfr.current).max() <= 1e-12

    def test_mirror_descent_matches_cfr_br_hedge(self, kuhn_tree):
        ed = EdState.initial(kuhn_tree, QC_MD, schedule=StepSchedule(CONSTANT, 0.5))
        cfr = CfrState.initial(kuhn_tree, learner=HEDGE, temperature=2.0)
        for _ in range(100):
            ed, _ = ed_step(ed, evaluate=False)
            cfr, _ = cfr_br_step(cfr, evaluate=False, hedge=True)
            assert np.abs(ed.policy() - cfr.current).max() <= 1e-12

    def test_record_reports_best_iterate(self, kuhn_tree):
        state = EdState.initial(kuhn_tree, QC_SOFTMAX)
        running_min = math.inf
        previous_best = math.inf
        for _ in range(30):
            state, record = ed_step(state)
            running_min = min(running_min, record.nashconv)
            assert record.best_iter_nashconv <= running_min + 1e-12
            assert record.best_iter_nashconv <= previous_best + 1e-12
            previous_best = record.best_iter_nashconv

    @pytest.mark.slow
    @pytest.mark.parametrize("game", ["kuhn", "leduc"])
    def test_current_iterate_converges(self, game):
        config = SolverConfig("ed_qc_softmax", game, 10000, schedule=StepSchedule(SQRT, 1.0), eval_every=10)
        records = run(config).records
        assert records[0].iteration == 10
        assert records[-1].nashconv <= records[0].nashconv / 10
        running_min = min(r.nashconv for r in records)
        assert records[-1].best_iter_nashconv <= running_min + 1e-12

    @pytest.mark.slow
    def test_softmax_logits_stay_finite_on_leduc(self, leduc_tree):
        state = EdState.initial(leduc_tree, QC_SOFTMAX)
        for _ in range(10000):
            state, _ = ed_step(state, evaluate=False)
        assert np.isfinite(state.params).all()

    @pytest.mark.parametrize("algorithm", ["ed_qc_softmax", "ed_qc_md"])
    def test_pure_initial_policy(self, kuhn_tree, algorithm):
        start = TabularPolicy("kuhn", kuhn_equilibrium_policy())
        result = run(SolverConfig(algorithm, "kuhn", 4, initial_policy=start))
        assert [r.iteration for r in result.records] == [1, 2, 4]
        assert all(math.isfinite(r.nashconv) for r in result.records)
        assert result.final_record.best_iter_nashconv < 1e-9
        never_played = policy_vector(kuhn_tree, start) == 0.0
        assert never_played.any()
        assert (policy_vector(kuhn_tree, result.current_policy)[never_played] == 0.0).all()

    def test_q_l2_zero_reach_mass_fails_the_run(self):
        with pytest.raises(SolverError) as info:
            run(SolverConfig("ed_q_l2", "kuhn", 4))
        assert info.value.iteration == 1
        assert isinstance(info.value.cause, DegenerateReachError)

    def test_q_l2_degenerate_fallback(self):
        result = run(SolverConfig("ed_q_l2", "kuhn", 64, allow_degenerate=True))
        nashconv = [r.nashconv for r in result.records]
        assert all(math.isfinite(value) for value in nashconv)
        assert nashconv[-1] < nashconv[0]


class TestBestIterate:
    def test_tracker_values_never_decrease(self):
        tracker = BestIterateTracker()
        for t, value in enumerate([-0.5, -0.7, -0.2, -0.3, -0.1]):
            tracker.offer(0, t, value, np.zeros(2))
        assert tracker.history[0] == [-0.5, -0.5, -0.2, -0.2, -0.1]
        assert tracker.best_iterations[0] == 4
        assert tracker.nash_conv is None

    def test_cfr_br_tracker_is_monotone(self, kuhn_tree):
        state = CfrState.initial(kuhn_tree, learner=REGRET_MATCHING)
        for _ in range(50):
            state, _ = cfr_br_step(state, evaluate=False)
        for values in state.tracker.history:
            assert all(b >= a for a, b in zip(values, values[1:]))

    def test_best_iterate_bounded_by_average_regret(self, kuhn_tree):
        state = CfrState.initial(kuhn_tree, learner=REGRET_MATCHING)
        for _ in range(200):
            state, _ = cfr_br_step(state, evaluate=False)
        game_values = (KUHN_VALUE, -KUHN_VALUE)
        regrets = [state.meter.average_regret(player) for player in (0, 1)]
        for player in (0, 1):
            assert game_values[player] - state.tracker.best_values[player] <= regrets[player] + 1e-9
        assert state.tracker.nash_conv <= 2 * max(regrets) + 1e-9

    def test_equilibrium_start_stays_unexploitable(self, kuhn_tree):
        start = policy_vector(kuhn_tree, TabularPolicy("kuhn", kuhn_equilibrium_policy()))
        state = CfrState.initial(kuhn_tree, learner=REGRET_MATCHING, policy=start)
        state, record = cfr_br_step(state)
        assert record.best_iter_nashconv < 1e-9


class TestRun:
    def test_zero_iterations(self, kuhn_tree):
        result = run(SolverConfig("cfr", "kuhn", 0))
        assert result.records == []
        assert result.final_record is None
        assert np.array_equal(policy_vector(kuhn_tree, result.reported_policy), kuhn_tree.uniform_vector())

    def test_deterministic_by_default(self):
        config = SolverConfig("ed_qc_softmax", "kuhn", 64)
        first = [r.as_row() for r in run(config).records]
        second = [r.as_row() for r in run(config).records]
        assert first == second
        assert all(row["wall_ms"] == 0 for row in first)

    def test_progress_callback(self):
        seen = []
        run(SolverConfig("xfp", "kuhn", 16), progress=seen.append)
        assert [r.iteration for r in seen] == [1, 2, 4, 8, 16]

    def test_ed_reports_best_iterate(self):
        result = run(SolverConfig("ed_qc_softmax", "kuhn", 20))
        assert result.best_policy is not None
        for key in result.best_policy:
            assert np.array_equal(result.reported_policy[key], result.best_policy[key])

    def test_cfr_reports_average(self):
        result = run(SolverConfig("cfr", "kuhn", 8))
        assert result.best_policy is None
        assert result.final_record.best_iter_nashconv is None

    def test_unknown_algorithm(self):
        with pytest.raises(ValueError):
            SolverConfig("sgd", "kuhn", 10)

    def test_step_failure_carries_iteration(self, monkeypatch):
        calls = []

        def failing_step(state, evaluate=True):
            calls.append(state.iteration)
            if len(calls) == 3:
                raise FloatingPointError("overflow")
            state.iteration += 1
            return state, None

        monkeypatch.setattr(runner, "ed_step", failing_step)
        with pytest.raises(SolverError) as info:
            run(SolverConfig("ed_qc_md", "kuhn", 10))
        assert info.value.iteration == 3
        assert isinstance(info.value.cause, FloatingPointError)
