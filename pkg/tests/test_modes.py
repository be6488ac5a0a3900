import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shearspec import dispersion as dsp
from shearspec import modes
from shearspec.errors import NotInflection

# roots of k coth k = 1 + g computed with 30-digit arithmetic
COUETTE_K_MINUS = {1.0: 1.915008048154537, 3.0: 3.997302692060430}


@pytest.mark.parametrize("g", sorted(COUETTE_K_MINUS))
def test_couette_k_minus(couette, g):
    assert modes.find_k_minus(couette, g) == pytest.approx(COUETTE_K_MINUS[g], abs=1e-10)


def test_k_minus_bracketing(tanh2):
    km = modes.find_k_minus(tanh2, 1.0)
    assert modes.F_bottom(tanh2, 1.0, 0.0) == pytest.approx(-1.0, abs=1e-10)
    assert abs(modes.F_bottom(tanh2, 1.0, km)) < 1e-10
    ks = np.linspace(0.0, 3 * km, 100)
    vals = np.array([modes.F_bottom(tanh2, 1.0, k) for k in ks])
    assert np.all(vals[ks < km] < 0) and np.all(vals[ks > km] > 0)


def test_capillary_roots(tanh2):
    sigma = 0.05
    cap = modes.find_k_minus(tanh2, 1.0, sigma)
    assert len(cap.roots) == 2
    for k in cap.roots:
        assert abs(modes.F_bottom(tanh2, 1.0, k, sigma)) < 1e-8
    peak = modes.F_bottom(tanh2, 1.0, cap.k_peak, sigma)
    assert cap.g_sharp == pytest.approx(peak + 1.0, rel=1e-8)
    # above g_sharp nothing is left
    none = modes.find_k_minus(tanh2, cap.g_sharp + 0.5, sigma)
    assert none.roots == ()


def test_capillary_concave_in_K(tanh2):
    Ks = np.linspace(0.1, 40.0, 30)
    f = np.array([modes.F_bottom(tanh2, 1.0, math.sqrt(K), 0.05) for K in Ks])
    assert np.all(np.diff(f, 2) < 0)


def test_sl_couette_not_inflection(couette):
    with pytest.raises(NotInflection):
        modes.sl_negative_eigenvalues(couette, 1.0, 0.0)
    with pytest.raises(NotInflection):
        modes.find_k_C(couette, -0.5)


def test_sl_tanh_negative_eigenvalue(tanh2):
    eig = modes.sl_negative_eigenvalues(tanh2, 1.0, 0.0)
    assert eig and all(e.lam < 0 for e in eig)
    for e in eig:
        assert abs(dsp.eval_F(tanh2, 1.0, 0.0, e.k, 0.0).F) < 1e-6
        assert abs(-e.lam - e.k ** 2) < 1e-5 * max(1.0, e.k ** 2)


def test_sl_count_matches_root_scan(tanh2, tanh_half, cubic):
    for p, g in ((tanh2, 1.0), (tanh_half, 1.0), (cubic, 1.0)):
        eig = modes.sl_negative_eigenvalues(p, g, 0.0)
        assert len(eig) == len(modes.find_S(p, g, 0.0).S)


def test_k_C_channel_classification(tanh2, tanh_half):
    assert modes.find_k_C(tanh_half, 0.0) is None
    kC = modes.find_k_C(tanh2, 0.0)
    assert kC is not None
    y0, _, ls = __import__("shearspec").solve_limit(tanh2, kC, 0.0).end
    assert abs(y0) * math.exp(ls) < 1e-8


def test_dirichlet_ground_state_vs_shooting(tanh2):
    lam = modes.dirichlet_ground_state(tanh2, 0.0)
    assert math.sqrt(-lam) == pytest.approx(modes.find_k_C(tanh2, 0.0), rel=1e-5)


def test_F0_sign_agrees_with_k_C(tanh2, tanh_half):
    assert modes.eval_F0(tanh2, 0.0) > 0
    assert modes.eval_F0(tanh_half, 0.0) <= 0


def test_F0_independent_of_g(tanh2):
    vals = {round(dsp.eval_F(tanh2, g, 0.0, 0.0, 0.0).F.real + g, 12) for g in (0.5, 1.0, 2.0)}
    assert len(vals) == 1
    assert vals.pop() == pytest.approx(modes.eval_F0(tanh2, 0.0), abs=1e-11)


def test_S_tanh_half(tanh_half):
    e = modes.find_S(tanh_half, 1.0, 0.0)
    assert len(e.S) == 1 and e.classification == "single_root"
    assert e.S[0] > modes.find_k_minus(tanh_half, 1.0)
    assert e.k0_positive
    assert e.k_C is None


def test_S_tanh2_two_roots(tanh2):
    F0 = modes.eval_F0(tanh2, 0.0)
    e = modes.find_S(tanh2, 1.05 * F0, 0.0)
    assert e.classification == "two_roots"
    k1, k0 = e.S
    assert k1 < e.k_C < k0
    for k in e.S:
        assert abs(dsp.eval_F(tanh2, 1.05 * F0, 0.0, k, 0.0).F) < 1e-8


def test_S_tanh2_single_root_below_F0(tanh2):
    e = modes.find_S(tanh2, 1.0, 0.0)
    assert e.F0 > 1.0
    assert e.classification == "single_root"
    assert len(e.S) == 1


def test_S_nonpositive_potential_k0_above_k_minus(tanh_half):
    x = np.linspace(-2, 0, 401)
    assert np.all(modes.potential(tanh_half, 0.0, x) <= 1e-12)
    e = modes.find_S(tanh_half, 1.0, 0.0)
    assert e.S[-1] > modes.find_k_minus(tanh_half, 1.0)


def test_S_cubic(cubic):
    # positive potential, F0 < 0: a single root k0 and no channel mode
    x = np.linspace(-2, 0, 401)
    assert np.all(modes.potential(cubic, 0.0, x) > 0)
    e = modes.find_S(cubic, 1.0, 0.0)
    assert e.k_C is None and e.F0 < 0
    assert len(e.S) == 1 and e.classification == "single_root"


def test_report_lines_and_csv(tmp_path, tanh2):
    rep = modes.neutral_modes(tanh2, 1.0, 0.02)
    lines = rep.lines()
    keys = [ln.split("=", 1)[0] for ln in lines]
    assert keys[:3] == ["g", "sigma", "k_minus"]
    assert "g_sharp" in keys and "inflection[0].S" in keys
    assert all("=" in ln for ln in lines)
    rep.write_csv(tmp_path / "n.csv")
    rows = (tmp_path / "n.csv").read_text().splitlines()
    assert rows[0].startswith("c0,x20,sign_U3,k_C,F0,S")
    assert len(rows) == 2


def test_couette_report_has_no_entries(couette):
    rep = modes.neutral_modes(couette, 1.0)
    assert rep.entries == ()
    assert rep.k_minus == pytest.approx(COUETTE_K_MINUS[1.0], abs=1e-10)


@settings(max_examples=10, deadline=None)
@given(g=st.floats(0.3, 3.0))
def test_k_minus_is_root_for_any_g(tanh_half, g):
    km = modes.find_k_minus(tanh_half, g)
    assert abs(modes.F_bottom(tanh_half, g, km)) < 1e-9
    assert modes.F_bottom(tanh_half, g, 0.98 * km) < 0 < modes.F_bottom(tanh_half, g, 1.02 * km)
