import math

import pytest

from polarrabi.errors import NearDegeneracy, UnsupportedParameter
from polarrabi.model import ModelParams, StateLabel, jc_crossing_scan
from polarrabi.perturbation import (coupled_labels, energy_with_correction, perturbed_state, state_norm,
                                    state_norm_or_inf, state_orders, v_matrix_element)

RES = ModelParams(g_R=0.01, g_S=0.01)
P10 = StateLabel(10, 1)


def test_v_diagonal_block_zero():
    for s in (1, -1):
        for a in (1, -1):
            assert v_matrix_element(StateLabel(10, a), StateLabel(10, s), RES) == 0.0


def test_v_adjacent_needs_g_s():
    p = ModelParams(g_R=0.02)
    assert v_matrix_element(StateLabel(9, 1), P10, p) == 0.0


def test_v_resonant_example():
    p = ModelParams(g_S=0.01)
    assert v_matrix_element(StateLabel(1, 1), StateLabel(2, 1), p) == pytest.approx(0.01, abs=1e-15)


def test_v_distance_two_uses_g_r():
    p = ModelParams(omega_a=0.9, g_R=0.02)
    assert v_matrix_element(StateLabel(8, -1), P10, p) != 0.0
    assert v_matrix_element(StateLabel(8, -1), P10, p.with_couplings(g_R=0.0)) == 0.0


def test_v_far_manifolds_zero():
    assert v_matrix_element(StateLabel(7, 1), P10, RES) == 0.0
    assert v_matrix_element(StateLabel(13, -1), P10, RES) == 0.0


def test_g_s_prime_unsupported():
    p = ModelParams(g_S_prime=0.01)
    with pytest.raises(UnsupportedParameter):
        v_matrix_element(P10, StateLabel(9, 1), p)
    with pytest.raises(UnsupportedParameter):
        energy_with_correction(P10, p)


def test_e2_zero_without_coupling():
    assert energy_with_correction(P10, ModelParams()).e2 == 0.0


def test_frozen_e2():
    assert energy_with_correction(P10, RES).e2 == pytest.approx(-3.793995325102791e-4, rel=1e-12)
    assert energy_with_correction(StateLabel(10, -1), RES).e2 == pytest.approx(-1.222699515486592e-4, rel=1e-12)


def test_e2_explicit_sum():
    p = ModelParams(omega_a=0.9, g_R=0.02, g_S=0.015)
    lab = StateLabel(4, -1)
    from polarrabi.model import jc_energy
    manual = sum(v_matrix_element(k, lab, p) ** 2 / (jc_energy(lab, p) - jc_energy(k, p))
                 for k in coupled_labels(lab, p))
    assert energy_with_correction(lab, p).e2 == pytest.approx(manual, rel=1e-14)


def test_e2_continuous_across_g_s_large_detuning():
    lab = StateLabel(1, 1)
    vals = [energy_with_correction(lab, ModelParams(omega_a=0.5, g_R=0.01, g_S=g)).e2
            for g in [i * 1e-3 for i in range(11)]]
    assert all(math.isfinite(v) for v in vals)
    diffs = [abs(b - a) for a, b in zip(vals, vals[1:])]
    assert max(diffs) < 1e-4


def test_state_collapses_without_coupling():
    assert perturbed_state(P10, ModelParams()).amplitudes == {P10: 1.0}


def test_state_support_n_pm_4():
    st = perturbed_state(P10, RES)
    assert st.manifolds() == list(range(6, 15))


def test_central_amplitude_formula():
    first, _ = state_orders(P10, RES)
    st = perturbed_state(P10, RES)
    assert st.central == pytest.approx(1 - 0.5 * sum(c * c for c in first.values()), abs=1e-15)
    assert st.central <= 1.0


def test_central_dominance():
    for g in (0.001, 0.01, 0.03, 0.05):
        st = perturbed_state(P10, ModelParams(g_R=g, g_S=g))
        assert all(abs(st.central) >= abs(a) for a in st.amplitudes.values())


def test_norm_close_to_one():
    assert abs(state_norm(P10, RES) - 1) < 1e-3
    assert state_norm(P10, RES) == pytest.approx(0.9999520703827612, abs=1e-12)


def test_near_degeneracy_raised_and_flagged():
    g = jc_crossing_scan(ModelParams(), (0.0, 0.3), n_max=11, n_min=9, xtol=1e-15)
    p = ModelParams(g_R=g, g_S=0.01)
    with pytest.raises(NearDegeneracy) as exc:
        for lab in (StateLabel(n, s) for n in range(9, 12) for s in (1, -1)):
            perturbed_state(lab, p)
    assert abs(exc.value.gap) < 1e-6
    results = [state_norm_or_inf(StateLabel(n, s), p) for n in range(9, 12) for s in (1, -1)]
    assert any(flag for _, flag in results)
    assert all(norm == math.inf for norm, flag in results if flag)
