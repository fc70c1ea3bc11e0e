"""Acceptance checks, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line with the measured value and
runtime; run with ``pytest tests/test_acceptance.py -s`` to see them.
"""
import itertools
import math
import time

import numpy as np

from gptbell import bell, gpt, spaces, tensor
from gptbell.gpt import Effect

SQRT5 = math.sqrt(5)

# collected for the terminal summary (see conftest.py)
LINES = []


class Criterion:
    def __init__(self, label, budget):
        self.label, self.budget = label, budget
        self.checks = []

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def check(self, name, ok):
        self.checks.append((name, bool(ok)))

    def close(self, tol_name, abs_err, tol):
        self.check(tol_name, abs_err <= tol)

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        self.check(f"runtime {elapsed:.2f}s < {self.budget}s", elapsed < self.budget)
        ok = exc_type is None and all(c[1] for c in self.checks)
        failed = [c[0] for c in self.checks if not c[1]]
        detail = "; ".join(failed) if failed else f"{len(self.checks)} checks"
        line = f"{'PASS' if ok else 'FAIL'}  {self.label}  ({detail}, {elapsed:.2f}s)"
        LINES.append(line)
        print("\n" + line)
        if exc_type is None:
            assert ok, f"{self.label}: {failed}"
        return False


def test_c1_squit_lambda_opt():
    with Criterion("C1 squit lambda_opt = 1/2", 1.0) as c:
        sq = spaces.squit()
        res = gpt.lambda_opt(sq)
        c.close(f"lambda_opt={res.value:.12f}", abs(res.value - 0.5), 1e-9)
        e, f = Effect(np.array([1.0, 1, 1]), sq), Effect(np.array([1.0, -1, 1]), sq)
        lam = gpt.lambda_ef(e, f)[0]
        c.close(f"lambda(e,f)={lam:.12f}", abs(lam - 0.5), 1e-9)


def test_c2_classical_lambda_opt():
    with Criterion("C2 classical(n) lambda_opt = 1 for n = 2..8", 10.0) as c:
        for n in range(2, 9):
            val = gpt.lambda_opt(spaces.classical(n), full_table=False).value
            c.close(f"n={n} lambda_opt={val:.12f}", abs(val - 1.0), 1e-9)


def test_c3_pentagon_pairs():
    with Criterion("C3 pentagon lambda_{e1,e2}, lambda_{e1,e3}", 1.0) as c:
        sp = spaces.polygon(5)
        e = [Effect(r, sp) for r in sp.dual_rays]
        l12 = gpt.lambda_ef(e[0], e[1])[0]
        l13 = gpt.lambda_ef(e[0], e[2])[0]
        c.close(f"l12={l12:.9f}", abs(l12 - (3 + 2 * SQRT5) / 11), 1e-6)
        c.close(f"l13={l13:.9f}", abs(l13 - (8 + 3 * SQRT5) / 19), 1e-6)


def test_c4_pentagon_biased():
    with Criterion("C4 pentagon lambda_bar_opt = (5+sqrt5)/10, p = q = 1", 5.0) as c:
        lb, pair, p, q = gpt.lambda_bar_opt(spaces.polygon(5))
        c.close(f"lambda_bar={lb:.9f}", abs(lb - (5 + SQRT5) / 10), 1e-6)
        c.close(f"p={p:.6f}", abs(p - 1), 1e-4)
        c.close(f"q={q:.6f}", abs(q - 1), 1e-4)


def test_c5_relation_and_duality():
    with Criterion("C5 t = (1-lambda)/(2 lambda) and dual = t on all extreme pairs", 30.0) as c:
        worst_rel = worst_dual = 0.0
        count = 0
        for sp in (spaces.squit(), spaces.polygon(5), spaces.polygon(6)):
            E = sp.extreme_effects
            for i, j in itertools.combinations(range(len(E)), 2):
                e, f = Effect(E[i], sp), Effect(E[j], sp)
                lam = gpt.lambda_ef(e, f)[0]
                t = gpt.t_ef(e, f)[0]
                dual = gpt.dual_program(e, f)[0]
                worst_rel = max(worst_rel, abs(t - (1 - lam) / (2 * lam)))
                worst_dual = max(worst_dual, abs(dual - t))
                count += 1
        c.close(f"relation err {worst_rel:.2e} over {count} pairs", worst_rel, 1e-6)
        c.close(f"duality err {worst_dual:.2e}", worst_dual, 1e-6)


def test_c6_squit_tsirelson():
    with Criterion("C6 Tsirelson(squit x_max squit) = 4 = 2/lambda_opt", 30.0) as c:
        sq = spaces.squit()
        rep = bell.tsirelson_bound(sq, sq)
        c.close(f"tsirelson={rep.bell_value:.9f}", abs(rep.bell_value - 4), 1e-6)
        c.close(f"2/lambda_opt={rep.bound_unbiased:.9f}", abs(rep.bell_value - rep.bound_unbiased), 1e-6)


def test_c7_maximally_entangled_pentagon():
    with Criterion("C7 ME(5): Bell = 6/sqrt5, <B1> = (5-2sqrt5)/5, biased bound = 6/sqrt5", 30.0) as c:
        st = tensor.maximally_entangled(5)
        sp = st.space_b
        val, setting = bell.best_state_setting(st)
        c.close(f"bell={val:.9f}", abs(val - 6 / SQRT5), 1e-6)
        c.close("argmax reproduces", abs(bell.bell_value(st, setting) - val), 1e-9)
        target = (5 - 2 * SQRT5) / 5
        exps = [bell.expectation_b(st, gpt.DichotomicObservable(gpt.complement(Effect(r, sp)))) for r in sp.dual_rays]
        worst = max(abs(x - target) for x in exps)
        c.close(f"<B1>={exps[0]:.9f} (worst err {worst:.1e})", worst, 1e-6)
        lb = gpt.lambda_bar_opt(sp)[0]
        bb = bell.biased_bound(lb, exps[0])
        c.close(f"biased bound={bb:.9f}", abs(bb - 6 / SQRT5), 1e-6)


def test_c8_octagon_tsirelson():
    with Criterion("C8 Tsirelson(polygon(8) x_max polygon(8)) = 2/lambda_opt", 180.0) as c:
        sp = spaces.polygon(8)
        rep = bell.tsirelson_bound(sp, sp)
        lam = gpt.lambda_opt(sp, full_table=False)
        t = gpt.t_ef(*lam.effects)[0]
        c.close(f"tsirelson={rep.bell_value:.9f} vs 2/lambda_opt={2 / lam.value:.9f}", abs(rep.bell_value - 2 / lam.value), 1e-6)
        c.close(f"2(2t+1)={2 * (2 * t + 1):.9f}", abs(rep.bell_value - 2 * (2 * t + 1)), 1e-6)


def test_c9_property_suite():
    with Criterion("C9 property suite (floor, smearing identities, min cone, monotonicity)", 60.0) as c:
        rng = np.random.default_rng(2718)
        pool = [spaces.classical(3), spaces.squit(), spaces.polygon(5), spaces.polygon(6), spaces.polygon(7)]

        # (a) g = (e + f)/4 at lambda = 1/2
        worst = 0.0
        for _ in range(500):
            sp = pool[int(rng.integers(len(pool)))]
            e, f = gpt.random_effect(sp, rng), gpt.random_effect(sp, rng)
            g = 0.25 * (e.functional + f.functional)
            worst = max(worst, gpt.jm_violation(gpt.smear(e, 0.5), gpt.smear(f, 0.5), g))
        c.close(f"(a) floor violation {worst:.1e}", worst, 1e-12)

        # (b) smearing identities
        pairs = [(spaces.squit(), spaces.squit()), (spaces.polygon(5), spaces.polygon(5))]
        worst_u = worst_b = 0.0
        for k in range(200):
            sa, sb = pairs[k % 2]
            w = rng.dirichlet(np.ones(len(sa.vertices) * len(sb.vertices)))
            W = (tensor.vertex_pair_matrix(sa, sb) @ w).reshape(sa.dimension, sb.dimension)
            if k % 5 == 0:
                W = tensor.pr_box().W if k % 2 == 0 else tensor.maximally_entangled(5).W
            st = tensor.BipartiteState(W, sa, sb)
            s = bell.ChshSetting.from_effects(*(gpt.random_effect(x, rng) for x in (sa, sa, sb, sb)))
            lam = float(rng.uniform())
            base = bell.bell_value(st, s)
            worst_u = max(worst_u, abs(bell.smeared_bell(st, s, lam) - lam * base))
            b1 = bell.expectation_b(st, s.b1)
            worst_b = max(worst_b, abs(bell.smeared_bell(st, s, lam, 1.0) - (lam * base + 2 * (1 - lam) * b1)))
        c.close(f"(b) unbiased err {worst_u:.1e}", worst_u, 1e-12)
        c.close(f"(b) biased err {worst_b:.1e}", worst_b, 1e-12)

        # (c) min-cone maximum
        for sp in (spaces.squit(), spaces.polygon(5)):
            v = bell.tsirelson_bound(sp, sp, tensor.MIN).bell_value
            c.check(f"(c) {sp.name} min-cone max {v:.9f} <= 2", v <= 2 + 1e-6)

        # (d) monotonicity on sampled solutions
        worst = 0.0
        for _ in range(100):
            sp = pool[int(rng.integers(len(pool)))]
            e, f = gpt.random_effect(sp, rng), gpt.random_effect(sp, rng)
            lam, g = gpt.lambda_ef(e, f)
            lam2 = float(rng.uniform(0, lam))
            worst = max(worst, gpt.jm_violation(gpt.smear(e, lam2), gpt.smear(f, lam2), g * lam2 / lam))
        c.close(f"(d) monotonicity violation {worst:.1e}", worst, 1e-9)


def test_c10_quantum_limit():
    with Criterion("C10 lambda_opt(polygon(64)) within 5e-3 of 1/sqrt2", 30.0) as c:
        val = gpt.lambda_opt(spaces.polygon(64), full_table=False).value
        c.close(f"lambda_opt={val:.9f}", abs(val - 1 / math.sqrt(2)), 5e-3)


def test_note_pentagon_tsirelson_interval():
    with Criterion("Note pentagon x_max Tsirelson in [6/sqrt5, 4sqrt5-6]", 60.0) as c:
        sp = spaces.polygon(5)
        val = bell.tsirelson_bound(sp, sp).bell_value
        c.check(f"value={val:.9f}", 6 / SQRT5 - 1e-6 <= val <= 4 * SQRT5 - 6 + 1e-6)
