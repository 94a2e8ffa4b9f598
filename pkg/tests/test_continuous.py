import numpy as np
import pytest

from urllc.continuous import baseline_greedy_continuous, continuous_sla_satisfied, ita
from urllc.fbl import SlaParams, db_to_linear, frame_error_probability, min_snr_for_d
from urllc.instance import MeanSnrModel, ScenarioConfig, SnrGrid, generate_snr_grid, verify_schedule

SLA = SlaParams()


class TestSlaInequality:
    def test_empty(self):
        assert not continuous_sla_satisfied([], SLA)

    def test_three_blocks(self):
        # 3 blocks clear the target from ~1.24 dB upwards
        assert continuous_sla_satisfied([db_to_linear(1.5)] * 3, SLA)
        assert not continuous_sla_satisfied([db_to_linear(1.0)] * 3, SLA)

    def test_agrees_with_error_probability(self):
        rng = np.random.default_rng(0)
        for _ in range(2000):
            snrs = db_to_linear(rng.uniform(-5, 15, size=int(rng.integers(1, 6))))
            pe = frame_error_probability(snrs, SLA)
            if pe == 0 or abs(np.log(pe / SLA.target_error)) > 1e-6:
                assert continuous_sla_satisfied(snrs, SLA) == (pe <= SLA.target_error)


class TestBaseline:
    def test_single_strong_user(self):
        grid = SnrGrid(np.full((1, 5), db_to_linear(20.0)))
        r = baseline_greedy_continuous(grid, [1.0], SLA, np.random.default_rng(0))
        assert r.admitted_users == [0] and r.schedule.sum() == 1

    def test_zero_grid(self):
        grid = SnrGrid(np.zeros((3, 4)))
        r = baseline_greedy_continuous(grid, np.ones(3), SLA, np.random.default_rng(0))
        assert r.admitted_count == 0 and r.schedule.sum() == 0

    def test_priority(self):
        grid = SnrGrid(np.array([[100.0], [100.0]]))
        r = baseline_greedy_continuous(grid, [5.0, 1.0], SLA, np.random.default_rng(0))
        assert r.admitted_users == [0]

    def test_failed_user_releases_blocks(self):
        # user 0 (higher utility) cannot be served, user 1 needs the blocks it tried
        grid = SnrGrid(np.array([[0.01, 0.01], [100.0, 100.0]]))
        r = baseline_greedy_continuous(grid, [5.0, 1.0], SLA, np.random.default_rng(0))
        assert r.admitted_users == [1]


class TestIta:
    def test_one_user_one_block(self):
        grid = SnrGrid(np.array([[min_snr_for_d(1, SLA) * 1.01]]))
        r, state = ita(grid, [1.0], SLA, rng=np.random.default_rng(0), return_state=True)
        assert r.admitted_users == [0]
        assert state.history[0].d == 1 and state.history[0].admitted == [0]

    def test_zero_grid(self):
        grid = SnrGrid(np.zeros((3, 4)))
        r, state = ita(grid, np.ones(3), SLA, d_max=4, rng=np.random.default_rng(0), return_state=True)
        assert r.admitted_count == 0 and state.level == 4

    def test_bad_dmax(self):
        with pytest.raises(ValueError):
            ita(SnrGrid(np.ones((1, 1))), [1.0], SLA, d_max=0)

    def test_uses_matching_then_greedy(self):
        s1 = min_snr_for_d(1, SLA)
        s2 = min_snr_for_d(2, SLA)
        # two users fight over one strong block, then share weaker ones
        gamma = np.array([
            [s1 * 1.5, s2 * 1.2, s2 * 1.2, 0.0],
            [s1 * 1.5, 0.0, s2 * 1.2, s2 * 1.2],
        ])
        r, state = ita(SnrGrid(gamma), [2.0, 1.0], SLA, rng=np.random.default_rng(0), return_state=True)
        methods = [lvl.method for lvl in state.history]
        assert methods[0] == "matching"
        assert 0 in state.history[0].admitted
        assert verify_schedule(SnrGrid(gamma), r.admitted_users, r.schedule, SLA)

    def test_invariants_on_random_grids(self):
        for seed in range(40):
            cfg = ScenarioConfig(K=12, R=10, seed=seed, mean_snr=MeanSnrModel("uniform_db", 0, 20))
            grid = generate_snr_grid(cfg, 0)
            r, state = ita(grid, np.ones(cfg.K), SLA, rng=np.random.default_rng(seed), return_state=True)
            assert verify_schedule(grid, r.admitted_users, r.schedule, SLA)
            assert (r.schedule.sum(axis=0) <= 1).all()
            assert len(state.history) <= state.d_max
            seen = []
            for lvl in state.history:
                assert not set(lvl.admitted) & set(seen)  # admitted set only grows
                seen.extend(lvl.admitted)
                s = min_snr_for_d(lvl.d, SLA)
                for k in lvl.admitted:
                    snrs = grid.gamma[k, r.schedule[k] == 1]
                    assert len(snrs) >= lvl.d and np.all(snrs >= s)
                    assert continuous_sla_satisfied(snrs, SLA)
            assert sorted(seen) == r.admitted_users

    def test_beats_baseline_when_congested(self):
        cfg = ScenarioConfig(K=20, R=10, seed=1)
        ita_total = base_total = 0
        for t in range(60):
            grid = generate_snr_grid(cfg, t)
            ita_total += ita(grid, np.ones(20), SLA, rng=np.random.default_rng(t)).admitted_count
            base_total += baseline_greedy_continuous(grid, np.ones(20), SLA, np.random.default_rng(t)).admitted_count
        assert ita_total >= base_total
