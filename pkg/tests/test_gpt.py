import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from gptbell import gpt, spaces
from gptbell.errors import NotAnEffectError, ValidationError
from gptbell.gpt import Effect


def _oracle_lambda(e, f):
    """Independent solve of the smearing program with scipy over (lam, g)."""
    sp = e.space
    Vm = sp.scale * sp.vertices
    ev, fv = e.values(), f.values()
    k, d = Vm.shape
    # g(w) <= lam*e(w) + (1-lam)/2 ; same for f ; g >= 0 ; lam*(e+f-1)(w) <= g(w)
    A = np.vstack([
        np.column_stack([-(ev - 0.5), Vm]),
        np.column_stack([-(fv - 0.5), Vm]),
        np.column_stack([np.zeros(k), -Vm]),
        np.column_stack([ev + fv - 1.0, -Vm]),
    ])
    b = np.concatenate([np.full(k, 0.5), np.full(k, 0.5), np.zeros(2 * k)])
    c = np.zeros(d + 1)
    c[0] = -1
    res = linprog(c, A_ub=A, b_ub=b, bounds=[(0, 1)] + [(None, None)] * d, method="highs")
    return -res.fun


def _pent(i):
    return Effect(spaces.polygon(5).dual_rays[i], spaces.polygon(5))


def test_make_effect_accepts_and_rejects():
    sq = spaces.squit()
    assert gpt.make_effect(sq, [1, 1, 1]).values().max() == pytest.approx(1.0)
    with pytest.raises(NotAnEffectError) as info:
        gpt.make_effect(sq, [3, 0, 0])
    assert info.value.value == pytest.approx(1.5)


def test_smear_example():
    sq = spaces.squit()
    e = Effect(np.array([1.0, 1, 1]), sq)
    # e/2 + u/4 with u = (0, 0, 2)
    s = gpt.smear(e, 0.5)
    assert np.allclose(s.functional, [0.5, 0.5, 1.0])
    assert np.allclose(gpt.smear(e, 1.0).functional, e.functional)
    assert np.allclose(gpt.smear(e, 0.0).functional, sq.order_unit / 2)
    assert np.allclose(gpt.smear(e, 0.0, 0.3).functional, 0.3 * sq.order_unit)
    with pytest.raises(ValidationError):
        gpt.smear(s, 1.5)


def test_classical_jointly_measurable_with_min():
    c2 = spaces.classical(2)
    e, f = Effect(np.array([1.0, 0.3]), c2), Effect(np.array([0.4, 0.8]), c2)
    ok, g = gpt.is_jointly_measurable(e, f)
    assert ok
    assert gpt.jm_violation(e, f, g) < 1e-8
    assert gpt.jm_violation(e, f, np.minimum(e.functional, f.functional)) == 0.0


def test_squit_pair_not_jointly_measurable():
    sq = spaces.squit()
    ok, g = gpt.is_jointly_measurable(Effect(np.array([1.0, 1, 1]), sq), Effect(np.array([1.0, -1, 1]), sq))
    assert not ok and g is None


def test_squit_values():
    sq = spaces.squit()
    e, f = Effect(np.array([1.0, 1, 1]), sq), Effect(np.array([1.0, -1, 1]), sq)
    assert gpt.lambda_ef(e, f)[0] == pytest.approx(0.5, abs=1e-9)
    assert gpt.t_ef(e, f)[0] == pytest.approx(0.5, abs=1e-9)
    assert gpt.dual_program(e, f)[0] == pytest.approx(0.5, abs=1e-9)
    assert gpt.lambda_opt(sq).value == pytest.approx(0.5, abs=1e-9)


def test_pentagon_closed_forms():
    s5 = math.sqrt(5)
    assert gpt.lambda_ef(_pent(0), _pent(1))[0] == pytest.approx((3 + 2 * s5) / 11, abs=1e-6)
    assert gpt.lambda_ef(_pent(0), _pent(2))[0] == pytest.approx((8 + 3 * s5) / 19, abs=1e-6)
    assert gpt.lambda_opt(spaces.polygon(5)).value == pytest.approx((3 + 2 * s5) / 11, abs=1e-6)


def test_pentagon_biased():
    lb, p, q, _ = gpt.lambda_bar_ef(_pent(0), _pent(1))
    assert lb == pytest.approx((5 + math.sqrt(5)) / 10, abs=1e-6)
    assert p == pytest.approx(1, abs=1e-4) and q == pytest.approx(1, abs=1e-4)


def test_degenerate_effects_give_one():
    sq = spaces.squit()
    zero, unit = Effect(np.zeros(3), sq), Effect(sq.order_unit, sq)
    e = Effect(np.array([1.0, 1, 1]), sq)
    for a, b in [(zero, e), (e, unit), (zero, unit)]:
        assert gpt.lambda_ef(a, b)[0] == pytest.approx(1.0)


def test_lambda_at_one_reports_half_bias():
    c2 = spaces.classical(2)
    lb, p, q, _ = gpt.lambda_bar_ef(Effect(np.array([1.0, 0]), c2), Effect(np.array([0.0, 1]), c2))
    assert lb == pytest.approx(1.0) and p == q == 0.5


def test_lambda_opt_tie_break_is_first_pair():
    res = gpt.lambda_opt(spaces.squit())
    assert res.pair == (0, 1)
    assert min(res.table.values()) == pytest.approx(res.value)


def test_too_few_effects():
    c1 = spaces.classical(1)
    assert gpt.lambda_opt(c1).value == 1.0


def _random_pairs(count, seed):
    rng = np.random.default_rng(seed)
    pool = [spaces.classical(2), spaces.classical(3), spaces.squit(), spaces.polygon(5), spaces.polygon(6), spaces.polygon(7)]
    for _ in range(count):
        sp = pool[int(rng.integers(len(pool)))]
        yield gpt.random_effect(sp, rng), gpt.random_effect(sp, rng)


def test_t_lambda_relation_random_pairs():
    for e, f in _random_pairs(500, 1):
        lam = gpt.lambda_ef(e, f)[0]
        t = gpt.t_ef(e, f)[0]
        assert t == pytest.approx((1 - lam) / (2 * lam), abs=1e-6)


def test_against_scipy_oracle():
    for e, f in _random_pairs(60, 2):
        assert gpt.lambda_ef(e, f)[0] == pytest.approx(_oracle_lambda(e, f), abs=1e-7)


def test_strong_duality_random_pairs():
    for e, f in _random_pairs(150, 3):
        assert gpt.dual_program(e, f)[0] == pytest.approx(gpt.t_ef(e, f)[0], abs=1e-6)


def test_symmetry_and_biased_dominates():
    for e, f in _random_pairs(150, 4):
        lam = gpt.lambda_ef(e, f)[0]
        assert gpt.lambda_ef(f, e)[0] == pytest.approx(lam, abs=1e-9)
        assert gpt.lambda_bar_ef(e, f)[0] >= lam - 1e-9


def test_biased_equals_unbiased_on_complements():
    for e, _ in _random_pairs(50, 5):
        ec = gpt.complement(e)
        assert gpt.lambda_bar_ef(e, ec)[0] == pytest.approx(gpt.lambda_ef(e, ec)[0], abs=1e-9)


def test_feasibility_floor():
    """g = (e + f)/4 is a joint effect for the half-smeared pair."""
    for e, f in _random_pairs(500, 6):
        g = 0.25 * (e.functional + f.functional)
        assert gpt.jm_violation(gpt.smear(e, 0.5), gpt.smear(f, 0.5), g) <= 1e-12


def test_monotonicity_in_lambda():
    rng = np.random.default_rng(8)
    for e, f in _random_pairs(100, 7):
        lam, g = gpt.lambda_ef(e, f)
        lam2 = float(rng.uniform(0, lam))
        g2 = g * lam2 / lam
        assert gpt.jm_violation(gpt.smear(e, lam2), gpt.smear(f, lam2), g2) <= 1e-9


@pytest.mark.parametrize("n", [5, 7, 8])
def test_polygon_cyclic_symmetry(n):
    sp = spaces.polygon(n)
    rays = sp.dual_rays
    by_offset = {}
    for i, j in itertools.permutations(range(n), 2):
        lam = gpt.lambda_ef(Effect(rays[i], sp), Effect(rays[j], sp))[0]
        by_offset.setdefault((j - i) % n, []).append(lam)
    for vals in by_offset.values():
        assert max(vals) - min(vals) < 1e-9


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.integers(0, 3))
def test_smear_stays_an_effect(lam, p, k):
    sq = spaces.squit()
    e = Effect(sq.dual_rays[k], sq)
    s = gpt.smear(e, lam, p)
    vals = s.values()
    assert vals.min() >= -1e-12 and vals.max() <= 1 + 1e-12


def test_complement_involution():
    sq = spaces.squit()
    e = Effect(np.array([1.0, 1, 1]), sq)
    assert np.array_equal(gpt.complement(gpt.complement(e)).functional, e.functional)


def test_audit_passes_on_polygon():
    ok, ext, worst = gpt.audit_lambda_opt(spaces.polygon(5), samples=100, seed=1)
    assert ok and worst >= ext - 1e-6


def test_report_fields():
    rep = gpt.incompatibility_report(_pent(0), _pent(1))
    d = rep.to_dict()
    assert d["t"] == pytest.approx(d["dual_value"], abs=1e-6)
    assert d["lambda"] == pytest.approx((3 + 2 * math.sqrt(5)) / 11, abs=1e-6)
