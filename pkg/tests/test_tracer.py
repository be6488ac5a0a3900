import csv
import math

import numpy as np
import pytest

from shearspec import modes, tracer
from shearspec.contour import rectangle
from shearspec.dispersion import eval_F
from shearspec.errors import PreconditionFailed
from shearspec.tracer import Termination


def couette_root(k, sign):
    a = k / math.tanh(k)
    return (-1 + sign * math.sqrt(1 + 4 * a)) / (2 * a)


@pytest.fixture(scope="module")
def tanh2_data(tanh2):
    km = modes.find_k_minus(tanh2, 1.0)
    (k0,) = modes.find_S(tanh2, 1.0, 0.0).S
    return km, k0


def test_couette_index_zero(couette):
    assert tracer.index_count(couette, 1.0, 0.0, 1.0) == 0


def test_couette_rectangle_real_root(couette):
    # closed form (-1 + sqrt(1 + 4 coth 1)) / (2 coth 1)
    c = couette_root(1.0, 1)
    assert c == pytest.approx(0.5713586711, abs=1e-9)
    assert tracer.index_count(couette, 1.0, 0.0, 1.0, rectangle(0.55 - 0.1j, 0.7 + 0.1j)) == 1


def test_tanh_index_in_window(tanh2, tanh2_data):
    km, k0 = tanh2_data
    assert tracer.index_count(tanh2, 1.0, 0.0, 0.5 * (km + k0)) == 1


def test_newton_couette(couette):
    r = tracer.newton(couette, 1.0, 0.0, 2.0, 0.3)
    assert r.c.real == pytest.approx(couette_root(2.0, 1), abs=1e-12)
    assert abs(r.F) < 1e-12


def test_seed_couette_k100(couette):
    cp, cm = tracer.seed_guess(couette, 1.0, 100.0)
    assert cp == pytest.approx(0.095125, abs=1e-6)
    assert abs(cp - couette_root(100.0, 1)) < 1e-4


def test_seed_polishing_and_scaling(tanh2):
    errs = []
    for k in (50.0, 100.0, 200.0, 400.0):
        cp, cm = tracer.seed_large_k(tanh2, 1.0, k)
        assert cp.iterations <= 8 and cm.iterations <= 8
        s = math.sqrt(1.0 / k)
        errs.append(abs((cp.c.real - tanh2.Umax) / s - 1))
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_seed_below_threshold(tanh2):
    with pytest.raises(ValueError):
        tracer.seed_large_k(tanh2, 1.0, 5.0)


def test_weak_mode_sign(tanh2):
    _, cm = tracer.seed_large_k(tanh2, 1.0, 60.0)
    wm = tracer.weak_mode(tanh2, 1.0, 60.0, cm.c.real)
    from shearspec.profile import invert
    u2 = float(tanh2.U2(invert(tanh2, wm.c.real)))
    assert np.sign(wm.c.imag) == np.sign(u2)
    assert abs(wm.c.real - cm.c.real) < 1e-8


def test_couette_c_plus_decreasing(couette):
    b = tracer.trace_branch(couette, 1.0, 0.0, (0.0, couette_root(1e-9, 1)), 5.0, "c_plus")
    c = b.c.real
    assert np.all(np.diff(c) < 0) and np.all(c > 0)
    assert b.termination is Termination.K_RANGE_END
    for p in b.points[::10]:
        if p.k > 0:
            assert p.c.real == pytest.approx(couette_root(p.k, 1), abs=1e-9)


def test_couette_c_minus_reaches_bottom(couette):
    b = tracer.trace_branch(couette, 1.0, 0.0, (0.0, (-1 - math.sqrt(5)) / 2), 5.0,
                            "c_minus_lower")
    assert np.all(np.diff(b.c.real) > 0)
    assert b.termination is Termination.REACHED_SEGMENT
    assert b.k_end == pytest.approx(1.915008048154537, abs=1e-8)
    assert b.c_end.real == pytest.approx(-1.0, abs=1e-10)
    for p in b.points:
        assert p.absF < tracer.BRANCH_TOL and abs(p.dFdc) > tracer.SIMPLE_TOL


def test_tanh_branch_k_minus_to_k0(tanh2, tanh2_data):
    km, k0 = tanh2_data
    b = tracer.trace_branch(tanh2, 1.0, 0.0, (km, complex(tanh2.Umin)), 5.0, "c_minus_lower")
    assert b.termination is Termination.REACHED_SEGMENT
    assert b.k_end == pytest.approx(k0, abs=1e-7)
    assert abs(b.c_end) < 1e-7
    inner = b.points[1:-1]
    assert all(p.c.imag > 0 for p in inner)
    assert all(tracer.in_semicircle(tanh2, p.c) for p in inner)


def test_branch_even_in_k(tanh2, tanh2_data):
    km, k0 = tanh2_data
    b = tracer.trace_branch(tanh2, 1.0, 0.0, (km, complex(tanh2.Umin)), 5.0, "c_minus_lower")
    for p in b.points[5:-5:len(b.points) // 5]:
        neg = tracer.newton(tanh2, 1.0, 0.0, -p.k, p.c)
        assert abs(neg.c - p.c) < 1e-9


def test_bifurcation_slope_at_k_minus(tanh2, tanh2_data):
    km, _ = tanh2_data
    s = tracer.bifurcation_slope(tanh2, 1.0, 0.0, km, tanh2.Umin)
    assert abs(s.slope.imag) < 1e-6
    assert s.slope.real > 0


def test_bifurcation_slope_signs(tanh2, tanh2_data, cubic):
    _, k0 = tanh2_data
    # U''' < 0: unstable side k < k0
    assert tracer.bifurcation_slope(tanh2, 1.0, 0.0, k0, 0.0).im_slope_sign == -1
    (kc,) = modes.find_S(cubic, 1.0, 0.0).S
    # U''' > 0: unstable side k > k0
    assert tracer.bifurcation_slope(cubic, 1.0, 0.0, kc, 0.0).im_slope_sign == 1


def test_census_couette(couette):
    km = 1.915008048154537
    lo = tracer.mode_census(couette, 1.0, 0.0, 1.0)
    hi = tracer.mode_census(couette, 1.0, 0.0, 3.0)
    assert lo.index_upper == hi.index_upper == 0
    assert lo.neutral_nonsingular == pytest.approx(
        sorted([couette_root(1.0, -1), couette_root(1.0, 1)]), abs=1e-10)
    assert hi.neutral_nonsingular == pytest.approx([couette_root(3.0, 1)], abs=1e-10)
    assert km > 1.0


def test_census_tanh_window(tanh2, tanh2_data):
    km, k0 = tanh2_data
    cz = tracer.mode_census(tanh2, 1.0, 0.0, 0.5 * (km + k0))
    assert cz.index_upper == 1 and len(cz.unstable) == 1
    c = cz.unstable[0]
    assert c.imag > 0 and tracer.in_semicircle(tanh2, c)
    assert len([x for x in cz.neutral_nonsingular if x > tanh2.Umax]) == 1
    # the conjugate mode is a root of the continuation below the axis only through
    # conjugation: F(k, conj c) = conj F(k, c)
    Fc = eval_F(tanh2, 1.0, 0.0, cz.k, c.conjugate()).F
    assert abs(Fc) < 1e-8


def test_census_large_k_weak_mode(tanh2):
    cz = tracer.mode_census(tanh2, 1.0, 0.0, 60.0)
    assert cz.index_upper == 0
    assert any("sub-resolution" in note for note in cz.flagged)


def test_census_csv(tmp_path, couette):
    cs = [tracer.mode_census(couette, 1.0, 0.0, k) for k in (1.0, 3.0)]
    tracer.write_census_csv(cs, tmp_path / "c.csv")
    rows = (tmp_path / "c.csv").read_text().splitlines()
    assert rows[0] == "k,n_unstable,index,modes"
    assert rows[1].split(",")[3].count(";") == 1


def test_branch_csv(tmp_path, couette):
    b = tracer.trace_branch(couette, 1.0, 0.0, (0.0, (-1 - math.sqrt(5)) / 2), 5.0, "c_minus_lower")
    tracer.write_branch_csv([b], tmp_path / "b.csv")
    with open(tmp_path / "b.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["k", "Re c", "Im c", "|F|", "|dF/dc|", "label", "termination"]
    assert rows[-1][-1].startswith("reached_segment")
    assert all(r[-1] == "" for r in rows[1:-1])


def test_closed_low_k_branch(tanh2):
    F0 = modes.eval_F0(tanh2, 0.0)
    br = tracer.closed_low_k_branch(tanh2, 1.05 * F0, 0.0)
    ks, cs = br.k, br.c
    assert ks[0] == pytest.approx(-ks[-1])
    mid = int(np.argmin(np.abs(ks)))
    assert ks[mid] == 0.0 and cs[mid].imag > 0
    assert abs(cs[0]) < 1e-7 and abs(cs[-1]) < 1e-7
    assert tracer.closed_low_k_branch(tanh2, 0.95 * F0, 0.0) is None


def test_closed_branch_preconditions(cubic, tanh_half):
    with pytest.raises(PreconditionFailed):
        tracer.closed_low_k_branch(cubic, 1.0, 0.0)
    with pytest.raises(PreconditionFailed):
        tracer.closed_low_k_branch(tanh_half, 1.0, 0.0)


def test_k1_scaling(tanh2):
    F0 = modes.eval_F0(tanh2, 0.0)
    k1 = [modes.find_S(tanh2, F0 + eps, 0.0).S[0] for eps in (0.01, 0.04)]
    assert k1[1] / k1[0] == pytest.approx(2.0, rel=0.1)


@pytest.mark.parametrize("regime", ["no_k1", "k1_below_k_minus", "k1_above_k_minus"])
def test_branch_endpoint_multiset(tanh2, regime):
    F0 = modes.eval_F0(tanh2, 0.0)
    g = {"no_k1": 1.0, "k1_below_k_minus": 1.05 * F0, "k1_above_k_minus": 1.3}[regime]
    km = modes.find_k_minus(tanh2, g)
    S = modes.find_S(tanh2, g, 0.0).S
    assert len(S) == (1 if regime == "no_k1" else 2)
    if len(S) == 2:
        assert (S[0] <= km) == (regime == "k1_below_k_minus")
    allowed = [(km, tanh2.Umin)] + [(k, 0.0) for k in S]
    for seed in [(km, complex(tanh2.Umin))] + [(k, 0j) for k in S]:
        for target in (0.0, 6.0):
            b = tracer.trace_branch(tanh2, g, 0.0, seed, target, "x")
            if len(b.points) < 2:
                continue
            if b.termination is Termination.REACHED_SEGMENT:
                assert any(abs(b.k_end - k) < 1e-7 and abs(b.c_end.real - c) < 1e-7
                           for k, c in allowed)
            else:
                # only the low-k branch from k1 runs to k = 0, where evenness closes it
                assert b.points[0].k == S[0] and len(S) == 2 and b.points[-1].k == 0.0
                assert b.points[-1].c.imag > 0


def test_index_conservation(tanh2, tanh2_data):
    km, k0 = tanh2_data
    inside = np.linspace(km, k0, 22)[1:-1]
    below = np.linspace(0.0, km, 21)[:-1]
    assert {tracer.index_count(tanh2, 1.0, 0.0, k) for k in inside} == {1}
    assert {tracer.index_count(tanh2, 1.0, 0.0, k) for k in below} == {0}


def test_conjugate_census_mirrors(tanh2):
    d = 1e-4 * tanh2.spread
    R = 0.5 * tanh2.spread + d
    upper = rectangle(complex(-R, d), complex(R, R))
    lower = rectangle(complex(-R, -R), complex(R, -d))
    f = tracer.Fbold_function(tanh2, 1.0, 0.0, 1.0)
    from shearspec.contour import winding_number
    assert winding_number(f, upper) == winding_number(f, lower) == 1
    cz = tracer.mode_census(tanh2, 1.0, 0.0, 1.0)
    (c,) = cz.unstable
    assert abs(f(c.conjugate())) < 1e-8 * abs(f(c.conjugate() + 0.1))
