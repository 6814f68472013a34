"""Observation model tests: weekly incidence, windows, initial states."""

import numpy as np
import pytest

from mediaflu.epi import (
    SEEIIR,
    SEIR,
    CompartmentState,
    EpiParams,
    MediaFunction,
    NO_MEDIA,
    integrate,
)
from mediaflu.errors import (
    CoverageError,
    InfeasibleInitializationError,
    ModelVariantError,
    TruncatedWindowError,
)
from mediaflu.observe import (
    FitWindow,
    WeeklySeries,
    apply_window,
    initial_state,
    make_window,
    weekly_incidence,
)


def series_with_peak_at(peak, length=30, kind="lab_confirmed_pct"):
    vals = np.concatenate([np.linspace(0.1, 5.0, peak + 1), np.linspace(4.8, 0.1, length - peak - 1)])
    return WeeklySeries("s", tuple(str(i) for i in range(length)), vals, kind)


class TestWeeklyIncidence:
    def test_no_epidemic_gives_zeros(self):
        params = EpiParams(beta=0.0, sigma=0.5, gamma=0.5)
        init = CompartmentState.seeiir(1.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        traj = integrate(params, init, 7.0 * 10)
        assert np.all(weekly_incidence(traj, 10) == 0.0)

    def test_telescoping_sum(self):
        params = EpiParams.from_natural(1.6, 1.5, 2.0)
        init = initial_state(0.5, params)
        traj = integrate(params, init, 7.0 * 20)
        weeks = weekly_incidence(traj, 20)
        total_onsets = traj.cumulative_onsets[int(round(7 * 20 / traj.dt))]
        assert weeks.sum() == pytest.approx(100.0 * total_onsets, abs=1e-6)

    def test_linear_in_scale(self):
        params = EpiParams.from_natural(1.5, 2.0, 2.0)
        init = initial_state(0.3, params)
        traj = integrate(params, init, 7.0 * 8)
        one = weekly_incidence(traj, 8, scale=1.0)
        three = weekly_incidence(traj, 8, scale=3.0)
        assert np.allclose(three, 3.0 * one, rtol=1e-14)

    def test_media_suppresses_peak_then_slows_decay(self):
        # direct integration of both runs: the media curve sits below the
        # plain one through the peak, then crosses above it because the
        # slower susceptible depletion slows the decay
        media = EpiParams.from_natural(1.5, 2.0, 2.0, MediaFunction("linear", 0.05))
        plain = EpiParams.from_natural(1.5, 2.0, 2.0, NO_MEDIA)
        init = initial_state(0.01, media)
        n = 40
        wm = weekly_incidence(integrate(media, init, 7.0 * n), n)
        wp = weekly_incidence(integrate(plain, init, 7.0 * n), n)
        peak = int(np.argmax(wp))
        assert wm.max() < wp.max()
        assert np.all(wm[peak - 1 : peak + 2] <= wp[peak - 1 : peak + 2])
        assert np.any(wm[peak:] > wp[peak:])

    def test_coverage_error(self):
        params = EpiParams.from_natural(1.5, 2.0, 2.0)
        traj = integrate(params, initial_state(0.5, params), 7.0 * 5)
        with pytest.raises(CoverageError):
            weekly_incidence(traj, 6)

    def test_dt_must_divide_week(self):
        params = EpiParams.from_natural(1.5, 2.0, 2.0)
        traj = integrate(params, initial_state(0.5, params), 21.0, dt=0.3)
        with pytest.raises(ValueError):
            weekly_incidence(traj, 3)


class TestMakeWindow:
    def test_default_window_around_peak(self):
        w = make_window(series_with_peak_at(10))
        assert (w.start, w.stop) == (6, 22)

    def test_early_peak_truncates(self):
        with pytest.raises(TruncatedWindowError) as err:
            make_window(series_with_peak_at(2, length=30))
        feasible = err.value.feasible
        assert feasible is not None
        assert feasible.start == 0
        assert feasible.stop == 14

    def test_tiny_window(self):
        w = make_window(series_with_peak_at(10), start_offset=0, length=2)
        assert (w.start, w.stop) == (10, 12)

    def test_relabeling_keeps_indices(self):
        base = series_with_peak_at(10)
        shifted = WeeklySeries(
            base.season,
            tuple(str(int(l) + 100) for l in base.week_labels),
            base.values.copy(),
            base.kind,
        )
        assert make_window(base) == make_window(shifted)

    def test_window_validation(self):
        with pytest.raises(ValueError):
            FitWindow(peak_index=10, start_offset=1)
        with pytest.raises(ValueError):
            FitWindow(peak_index=10, length=1)

    def test_apply_window_slices(self):
        s = series_with_peak_at(10)
        w = make_window(s)
        sliced = apply_window(s, w)
        assert len(sliced) == 16
        assert sliced.week_labels[0] == "6"
        assert np.array_equal(sliced.values, s.values[6:22])


class TestInitialState:
    def test_equal_rates_example(self):
        params = EpiParams(beta=0.75, sigma=0.5, gamma=0.5)
        st = initial_state(1.0, params, SEEIIR)
        assert st.e_total == pytest.approx(0.01, rel=1e-12)
        assert st.i_total == pytest.approx(0.01, rel=1e-12)
        assert st.s == pytest.approx(0.98, rel=1e-12)

    def test_equal_split_across_stages(self):
        params = EpiParams(beta=0.75, sigma=0.5, gamma=0.5)
        st = initial_state(1.0, params, SEEIIR)
        assert st.values[1] == st.values[2] == pytest.approx(0.005)
        assert st.values[3] == st.values[4] == pytest.approx(0.005)

    def test_seir_variant(self):
        params = EpiParams(beta=0.75, sigma=0.5, gamma=0.25)
        st = initial_state(2.0, params, SEIR)
        assert st.variant == SEIR
        assert st.e_total == pytest.approx(0.01)
        assert st.i_total == pytest.approx(0.02)

    def test_limit_to_disease_free(self):
        params = EpiParams(beta=0.75, sigma=0.5, gamma=0.5)
        st = initial_state(1e-9, params, SEEIIR)
        assert st.s > 1.0 - 1e-10
        zero = initial_state(0.0, params, SEEIIR)
        assert zero.s == 1.0

    def test_infeasible_when_s_nonpositive(self):
        params = EpiParams(beta=0.75, sigma=1.0 / 3.0, gamma=1.0)  # gamma/sigma = 3
        with pytest.raises(InfeasibleInitializationError):
            initial_state(30.0, params, SEEIIR)

    def test_domain_checks(self):
        params = EpiParams(beta=0.75, sigma=0.5, gamma=0.5)
        with pytest.raises(ValueError):
            initial_state(-1.0, params)
        with pytest.raises(ValueError):
            initial_state(100.0, params)
        with pytest.raises(ModelVariantError):
            initial_state(1.0, params, "sir")

    def test_states_satisfy_invariants(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            params = EpiParams.from_natural(
                rng.uniform(1, 2), rng.uniform(1, 3), rng.uniform(1, 5)
            )
            variant = SEEIIR if rng.random() < 0.5 else SEIR
            obs = rng.uniform(0.01, 10.0)
            try:
                st = initial_state(obs, params, variant)
            except InfeasibleInitializationError:
                continue
            assert abs(sum(st.values) - 1.0) < 1e-9
