"""Smoothing-weight schedules."""

import math

import numpy as np
import pytest

from spansmooth.schedule import ScheduleConfig, epsilon_at, schedule_table


def linear(epsilon0=0.1, tau=0.01, n_epochs=16):
    return ScheduleConfig(kind="linear_decay", epsilon0=epsilon0, tau=tau, n_epochs=n_epochs)


class TestEpsilonAt:
    def test_linear_decay_start(self):
        assert epsilon_at(linear(), 0) == 0.1

    def test_linear_decay_mid(self):
        assert epsilon_at(linear(), 4) == pytest.approx(0.06, abs=1e-15)

    def test_linear_decay_clamped(self):
        assert epsilon_at(linear(), 15) == 0.0

    def test_linear_decay_exact_float_ladder(self):
        config = linear()
        for epoch in range(config.n_epochs):
            assert epsilon_at(config, epoch) == max(0.0, 0.1 - epoch * 0.01)

    def test_two_stage(self):
        config = ScheduleConfig(kind="two_stage", epsilon0=0.1, stage1_epochs=4, n_epochs=16)
        assert epsilon_at(config, 3) == 0.1
        assert epsilon_at(config, 4) == 0.0
        assert [epsilon_at(config, i) for i in range(6)] == [0.1, 0.1, 0.1, 0.1, 0.0, 0.0]

    def test_constant_is_epoch_independent(self):
        config = ScheduleConfig(kind="constant", epsilon0=0.25, n_epochs=12)
        values = {epsilon_at(config, i) for i in range(12)}
        assert values == {0.25}

    def test_epoch_out_of_range(self):
        with pytest.raises(ValueError):
            epsilon_at(linear(n_epochs=4), 4)
        with pytest.raises(ValueError):
            epsilon_at(linear(), -1)


class TestScheduleProperties:
    def test_nonincreasing_in_epoch(self):
        rng = np.random.default_rng(17)
        kinds = ("constant", "two_stage", "linear_decay")
        for _ in range(1000):
            n = int(rng.integers(1, 24))
            config = ScheduleConfig(
                kind=kinds[int(rng.integers(3))],
                epsilon0=float(rng.uniform(0, 1)),
                tau=float(rng.uniform(0, 1)),
                stage1_epochs=int(rng.integers(0, n + 1)),
                n_epochs=n,
            )
            values = [epsilon_at(config, i) for i in range(n)]
            for a, b in zip(values, values[1:]):
                assert b <= a
            assert all(0.0 <= v <= config.epsilon0 for v in values)

    def test_linear_decay_hits_zero_at_ceiling(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            epsilon0 = float(rng.uniform(0.01, 1.0))
            tau = float(rng.uniform(0.005, 0.5))
            zero_epoch = math.ceil(epsilon0 / tau)
            config = linear(epsilon0, tau, n_epochs=zero_epoch + 5)
            assert epsilon_at(config, zero_epoch) == 0.0
            for epoch in range(zero_epoch, zero_epoch + 5):
                assert epsilon_at(config, epoch) == 0.0
            if zero_epoch >= 1:
                assert epsilon_at(config, zero_epoch - 1) >= 0.0


class TestScheduleConfig:
    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            ScheduleConfig(kind="exp", epsilon0=0.1, n_epochs=4)
        with pytest.raises(ValueError):
            ScheduleConfig(kind="constant", epsilon0=1.5, n_epochs=4)
        with pytest.raises(ValueError):
            ScheduleConfig(kind="constant", epsilon0=0.1, n_epochs=0)
        with pytest.raises(ValueError):
            ScheduleConfig(kind="two_stage", epsilon0=0.1, n_epochs=4, stage1_epochs=5)
        with pytest.raises(ValueError):
            ScheduleConfig(kind="linear_decay", epsilon0=0.1, tau=-0.1, n_epochs=4)

    def test_table_covers_all_epochs(self):
        rows = schedule_table(linear(n_epochs=16))
        assert [r[0] for r in rows] == list(range(16))
        assert rows[0][1] == 0.1
        assert rows[10][1] == 0.0
