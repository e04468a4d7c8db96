import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irvaudit.projection import kkt_residual, project_simplex, project_simplex_metric
from irvaudit.weights import (
    OnsState,
    SchemeBank,
    compute_weights,
    intersection_trajectory,
    new_scheme_state,
    ons_step,
    parse_scheme,
    record_step,
)
from oracles import grid_search_projection

ALL_SPECS = [
    "linear",
    "quadratic",
    "largest",
    "linear-plus",
    "quadratic-plus",
    "largest-count:5",
    "largest-mean:5",
    "linear-count:7",
    "linear-mean:7",
    "ons:4",
]


class TestSpecGrammar:
    @pytest.mark.parametrize("text", ALL_SPECS)
    def test_roundtrip(self, text):
        assert str(parse_scheme(text)) == text

    @pytest.mark.parametrize("bad", ["largest-count", "largest-count:0", "ons:2", "ons", "foo", "linear:3"])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            parse_scheme(bad)


class TestComputeWeights:
    def w(self, spec_text, M, history=None):
        spec = parse_scheme(spec_text)
        state = new_scheme_state(spec, len(M))
        for step in history or []:
            record_step(spec, state, step, step)
        return compute_weights(spec, state, np.array(M, dtype=float))

    def test_largest(self):
        assert self.w("largest", [1.2, 3.4, 0.9]).tolist() == [0.0, 1.0, 0.0]

    def test_largest_splits_ties(self):
        assert self.w("largest", [2.0, 2.0, 1.0]).tolist() == [0.5, 0.5, 0.0]

    def test_linear_and_quadratic(self):
        assert self.w("linear", [1.5, 0.5]).tolist() == [1.5, 0.5]
        assert self.w("quadratic", [1.5, 0.5]).tolist() == [2.25, 0.25]

    def test_quadratic_plus_gate(self):
        assert self.w("quadratic-plus", [1.5, 0.8, 2.0]).tolist() == [2.25, 0.0, 4.0]

    def test_linear_plus_keeps_exact_ones(self):
        assert self.w("linear-plus", [1.0, 0.8, 1.5]).tolist() == [1.0, 0.0, 1.5]

    def test_plus_variants_without_leader_fall_back(self):
        assert self.w("linear-plus", [0.9, 0.4]).tolist() == [0.9, 0.4]
        assert self.w("quadratic-plus", [0.9, 0.4]).tolist() == pytest.approx([0.81, 0.16])

    def test_linear_count_example(self):
        # leaders over the window were r2, r2, r1 (1-based)
        history = [[1.0, 2.0, 0.5], [1.0, 3.0, 0.5], [5.0, 4.0, 0.5]]
        assert self.w("linear-count:3", [1.0, 1.0, 1.0], history).tolist() == [1.0, 2.0, 0.0]

    def test_largest_count_takes_most_frequent(self):
        history = [[1.0, 2.0, 0.5], [1.0, 3.0, 0.5], [5.0, 4.0, 0.5]]
        assert self.w("largest-count:3", [1.0, 1.0, 1.0], history).tolist() == [0.0, 1.0, 0.0]

    def test_window_drops_old_steps(self):
        history = [[9.0, 1.0], [1.0, 2.0], [1.0, 3.0]]
        assert self.w("largest-count:2", [1.0, 1.0], history).tolist() == [0.0, 1.0]

    def test_mean_kinds(self):
        history = [[1.0, 2.0], [3.0, 2.0]]
        assert self.w("largest-mean:5", [1.0, 1.0], history).tolist() == [0.5, 0.5]
        assert self.w("linear-mean:5", [1.0, 1.0], history).tolist() == [2.0, 2.0]

    @pytest.mark.parametrize("spec", ["largest-count:4", "largest-mean:4", "linear-count:4", "linear-mean:4"])
    def test_warmup_uniform(self, spec):
        assert self.w(spec, [1.0, 1.0, 1.0]).tolist() == pytest.approx([1 / 3] * 3)

    @pytest.mark.parametrize("spec", ALL_SPECS)
    def test_infinite_sentinel_dominates(self, spec):
        w = self.w(spec, [2.0, math.inf, 3.0])
        assert w.tolist() == [0.0, 1.0, 0.0]
        w = self.w(spec, [math.inf, 1.0, math.inf])
        assert w.tolist() == [0.5, 0.0, 0.5]

    @given(
        st.sampled_from(ALL_SPECS),
        st.lists(st.floats(0.1, 10.0), min_size=2, max_size=6),
    )
    def test_nonnegative_with_positive_sum(self, spec_text, M):
        w = self.w(spec_text, M)
        assert (w >= 0).all()
        assert w.sum() > 0

    @pytest.mark.parametrize("spec", ["largest", "largest-count:3", "largest-mean:3", "linear-count:3"])
    def test_argmax_selection_scale_invariant(self, spec, scale=7.25):
        history = [[1.0, 2.0, 0.5], [4.0, 3.0, 0.5]]
        base = self.w(spec, [1.0, 2.0, 1.5], history)
        scaled = self.w(spec, [s * scale for s in [1.0, 2.0, 1.5]], [[v * scale for v in row] for row in history])
        assert ((base > 0) == (scaled > 0)).all()


class TestPredictability:
    @pytest.mark.parametrize("spec_text", ALL_SPECS)
    def test_truncated_history_reproduces_weights(self, spec_text):
        rng = np.random.default_rng(5)
        increments = rng.uniform(0.5, 2.0, size=(30, 4))
        spec = parse_scheme(spec_text)
        _, weights = intersection_trajectory(spec, increments)
        # replay only the first t-1 steps and recompute the weights for step t
        for t in (1, 7, 29):
            state = new_scheme_state(spec, 4)
            M = np.ones(4)
            for s in range(t):
                M = M * increments[s]
                record_step(spec, state, M, increments[s])
            w = compute_weights(spec, state, M)
            np.testing.assert_array_equal(w, weights[t])


class TestTheorem1Identity:
    def test_linear_equals_mean_of_bases(self):
        rng = np.random.default_rng(11)
        for r in (2, 5, 15):
            increments = rng.uniform(0.5, 2.0, size=(200, r))
            M_int, _ = intersection_trajectory(parse_scheme("linear"), increments)
            bases = np.vstack([np.ones(r), np.cumprod(increments, axis=0)])
            np.testing.assert_allclose(M_int, bases.mean(axis=1), rtol=1e-9)


class TestOns:
    def test_initial_portfolio_uniform(self):
        assert OnsState.fresh(3).p.tolist() == pytest.approx([1 / 3] * 3)

    def test_single_requirement_stays_pointmass(self):
        state = OnsState.fresh(1)
        for x in ([2.0], [0.5], [1.3]):
            p = ons_step(state, x, delta=4.0)
            assert p.tolist() == [1.0]

    def test_two_requirement_example_matches_grid_oracle(self):
        state = OnsState.fresh(2)
        p = ons_step(state, [2.0, 0.5], delta=4.0)
        # brute-force the 1-D slice of the simplex
        g = np.array([2.0, 0.5]) / 1.25
        A = np.eye(2) + np.outer(g, g)
        y = 4.0 * np.linalg.solve(A, 2.0 * g)
        t = np.linspace(0.0, 1.0, 200_001)
        pts = np.stack([t, 1.0 - t], axis=1)
        diffs = pts - y
        vals = np.einsum("ij,jk,ik->i", diffs, A, diffs)
        best = pts[np.argmin(vals)]
        assert p == pytest.approx(best, abs=1e-4)
        assert abs(p.sum() - 1.0) < 1e-9

    def test_rejects_bad_increments(self):
        state = OnsState.fresh(2)
        with pytest.raises(ValueError):
            ons_step(state, [1.0, math.inf], delta=4.0)
        with pytest.raises(ValueError):
            ons_step(state, [1.0, 0.0], delta=4.0)

    def test_portfolio_stays_on_simplex(self):
        rng = np.random.default_rng(3)
        state = OnsState.fresh(4)
        for _ in range(60):
            p = ons_step(state, rng.uniform(0.5, 2.0, 4), delta=4.0)
            assert abs(p.sum() - 1.0) <= 1e-9
            assert (p >= -1e-12).all()


class TestProjection:
    def test_euclidean_matches_known(self):
        np.testing.assert_allclose(project_simplex(np.array([0.2, 0.8])), [0.2, 0.8], atol=1e-12)
        np.testing.assert_allclose(project_simplex(np.array([2.0, 0.0])), [1.0, 0.0], atol=1e-12)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25)
    def test_metric_projection_kkt(self, seed):
        rng = np.random.default_rng(seed)
        r = int(rng.integers(2, 6))
        G = rng.normal(size=(r, r))
        A = np.eye(r) + G @ G.T
        y = rng.normal(scale=2.0, size=r)
        q = project_simplex_metric(y, A)
        assert abs(q.sum() - 1.0) <= 1e-9
        assert (q >= -1e-12).all()
        assert kkt_residual(q, y, A) <= 1e-8

    def test_matches_grid_oracle_r3(self):
        rng = np.random.default_rng(8)
        for _ in range(5):
            G = rng.normal(size=(3, 3))
            A = np.eye(3) + G @ G.T
            y = rng.normal(scale=1.5, size=3)
            q = project_simplex_metric(y, A)
            ref = grid_search_projection(y, A)
            assert np.abs(q - ref).max() <= 1.5e-4


class TestSchemeBankMatchesScalar:
    @pytest.mark.parametrize("spec_text", ALL_SPECS)
    def test_increment_streams(self, spec_text):
        rng = np.random.default_rng(17)
        spec = parse_scheme(spec_text)
        n_orders, r, steps = 3, 4, 25
        streams = rng.uniform(0.5, 2.0, size=(n_orders, steps, r))

        bank = SchemeBank(spec, n_orders, r)
        scalar = [new_scheme_state(spec, r) for _ in range(n_orders)]
        M_scalar = [np.ones(r) for _ in range(n_orders)]
        logM = np.zeros((n_orders, r))
        rows = np.arange(n_orders)

        for t in range(steps):
            m = streams[:, t, :]
            inc_bank = bank.increments(rows, logM, m)
            for o in range(n_orders):
                w = compute_weights(spec, scalar[o], M_scalar[o])
                inc = float(w @ m[o]) / float(w.sum())
                assert inc_bank[o] == pytest.approx(inc, rel=1e-9)
                assert min(m[o]) - 1e-12 <= inc <= max(m[o]) + 1e-12
                M_scalar[o] = M_scalar[o] * m[o]
                record_step(spec, scalar[o], M_scalar[o], m[o])
            logM = logM + np.log(m)
            bank.record(rows, logM, m)

    def test_partial_rows_keep_their_buffers(self):
        spec = parse_scheme("largest-count:3")
        bank = SchemeBank(spec, 3, 2)
        logM = np.zeros((3, 2))
        m = np.array([[1.5, 0.5], [0.5, 1.5], [1.2, 0.8]])
        bank.increments(np.arange(3), logM, m)
        logM = logM + np.log(m)
        bank.record(np.arange(3), logM, m)
        # only rows 0 and 2 stay in play
        rows = np.array([0, 2])
        inc = bank.increments(rows, logM[rows], m[rows])
        assert inc.shape == (2,)
        w_row0 = compute_weights(spec, _replayed_state(spec, [m[0]]), np.exp(logM[0]))
        assert inc[0] == pytest.approx(float(w_row0 @ m[0]) / w_row0.sum(), rel=1e-9)


def _replayed_state(spec, increment_rows):
    state = new_scheme_state(spec, len(increment_rows[0]))
    M = np.ones_like(increment_rows[0])
    for m in increment_rows:
        M = M * m
        record_step(spec, state, M, m)
    return state
