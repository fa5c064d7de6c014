"""Acceptance gate: one test per criterion, one summary line per criterion.

Each test records PASS/FAIL with a short detail string; the lines are
printed in the pytest terminal summary (see conftest.py) and also when
this file is run directly with ``python tests/test_acceptance.py``.
"""

import math
import random
import time
from contextlib import contextmanager
from fractions import Fraction

from ppt_lab import actions as A
from ppt_lab import analysis as AN
from ppt_lab import groups as G
from ppt_lab import oracle as O
from ppt_lab import product as P

LL = G.LAMPLIGHTER
BS2 = G.BaumslagSolitar(2)
F2 = G.FreeGroup(2)
Z2 = G.FreeAbelian(2)
TOL = 1e-9

RESULTS = {}


@contextmanager
def criterion(number, title):
    detail = []
    try:
        yield detail
    except BaseException as exc:
        RESULTS[number] = (False, title, f"{type(exc).__name__}: {exc}")
        raise
    RESULTS[number] = (True, title, "; ".join(detail))


def summary_lines():
    lines = []
    for number in sorted(RESULTS):
        ok, title, detail = RESULTS[number]
        lines.append(f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {title} [{detail}]")
    return lines


def gens(group):
    return list(group.generators().values())


def test_01_oracle_equivalence():
    with criterion(1, "closed-form tree displacement equals coset-graph BFS") as out:
        start = time.perf_counter()
        cases = [("t1", LL), ("t2", LL), ("tn", BS2)]
        for kind, group in cases:
            checked, mismatches = O.check_ball(A.make_action(kind, group), gens(group), 6)
            assert mismatches == [], f"{kind}: {len(mismatches)} mismatches"
            out.append(f"{kind}: {checked} elements, 0 mismatches")
        elapsed = time.perf_counter() - start
        assert elapsed < 60, f"took {elapsed:.1f}s"
        out.append(f"{elapsed:.1f}s")


def test_02_lamplighter_audit():
    with criterion(2, "lamplighter T1xT2 counts equal the predicted count and are stable") as out:
        p = P.ProductAction([A.make_action("t1", LL), A.make_action("t2", LL)])
        for r in range(4):
            predicted = P.claim_predicted_count(r)
            low = P.properness_audit(p, gens(LL), 2 * r + 2, [r])
            high = P.properness_audit(p, gens(LL), 2 * r + 4, [r])
            assert low.counts[r] == high.counts[r] == predicted, (r, low.counts, high.counts)
            assert high.stable[r]
            if r == 0:
                assert high.counts[0] == 2
            out.append(f"N({r})={predicted}")


def test_03_bs_plane_times_tree_audit():
    with criterion(3, "BS(1,2) on H2 x T2 stable for L=10..12; t^-k a t^k has displacement 2k") as out:
        p = P.ProductAction([A.make_action("h2", BS2), A.make_action("tn", BS2)])
        r_grid = [1, 2, 3]
        at10 = P.properness_audit(p, gens(BS2), 10, r_grid)
        at12 = P.properness_audit(p, gens(BS2), 12, r_grid)
        assert at10.counts == at12.counts, (at10.counts, at12.counts)
        assert all(at12.stable.values())
        out.append("N=" + ",".join(str(at12.counts[r]) for r in r_grid))
        tree = P.ProductAction([A.make_action("tn", BS2)])
        t, a = BS2.generators()["t"], BS2.generators()["a"]
        for k in range(7):
            assert P.l1_displacement(tree, G.power(t, -k) * a * G.power(t, k)) == 2 * k
        out.append("family 2k exact for k<=6")


def test_04_busemann_homomorphism():
    with criterion(4, "Busemann additivity, generator values, nonzero iff loxodromic") as out:
        tn = A.make_action("tn", BS2)
        end = A.default_end(tn)
        A.verify_end(tn, end, gens(BS2))
        rng = random.Random(2024)
        for _ in range(1000):
            g = G.BsElement.make(2, rng.randint(-6, 6), rng.randint(-99, 99), rng.randint(0, 5))
            h = G.BsElement.make(2, rng.randint(-6, 6), rng.randint(-99, 99), rng.randint(0, 5))
            lhs = A.busemann(tn, end, g * h)
            assert lhs == A.busemann(tn, end, g) + A.busemann(tn, end, h)
            assert isinstance(lhs, int)
        out.append("1000 pairs exact")
        assert A.busemann(tn, end, BS2.generators()["t"]) == 1
        assert A.busemann(tn, end, BS2.generators()["a"]) == 0
        ball = G.ball(gens(BS2), 6)
        for g in ball:
            assert (A.busemann(tn, end, g) != 0) == (A.classify_element(tn, g) == "loxodromic")
        out.append(f"{len(ball)} ball elements")


def test_05_rank_obstruction():
    with criterion(5, "rank obstruction on random wide matrices and Z^2 on one line") as out:
        rng = random.Random(5)
        for _ in range(100):
            m = rng.randint(1, 4)
            r = rng.randint(m + 1, m + 3)
            phi = [[Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(r)]
                   for _ in range(m)]
            ob = AN.rank_obstruction(phi)
            assert ob is not None
            assert any(ob.z)
            assert all(sum(a * b for a, b in zip(row, ob.z)) == 0 for row in phi)
            for n in range(1, 101):
                v = [math.floor(n * zi) for zi in ob.z]
                assert max(abs(sum(a * b for a, b in zip(row, v))) for row in phi) <= ob.K
        out.append("100 matrices")
        p = P.ProductAction([A.make_action("line", Z2, [1, -1])])
        report = P.properness_audit(p, gens(Z2), 8, [0, 1])
        assert report.verdict == P.NON_PROPER_WITNESS
        assert report.family["family"] == "(n,n)"
        out.append("Z2 one line: family (n,n)")


def test_06_confining():
    with criterion(6, "confining check at window 32: pass with n0=0, reversed fails condition 1") as out:
        start = time.perf_counter()
        H, alpha, in_A = AN.lamplighter_confining_instance(radius=32)
        rep = AN.confining_check(H, alpha, in_A)
        first = time.perf_counter() - start
        assert rep.passed and rep.condition3["n0"] == 0
        start = time.perf_counter()
        H, alpha, in_A = AN.lamplighter_confining_instance(radius=32, reverse=True)
        rev = AN.confining_check(H, alpha, in_A)
        second = time.perf_counter() - start
        assert rev.condition1["holds"] is False and rev.condition1["counterexample"]
        assert first < 10 and second < 10, (first, second)
        out.append(f"{first:.1f}s and {second:.1f}s; counterexample "
                   f"{rev.condition1['counterexample']}")


def test_07_pingpong():
    with criterion(7, "<x^2, y^2> certified to length 12; (t, a t a^-1) refused") as out:
        x, y = F2.generators()["x"], F2.generators()["y"]
        res = AN.pingpong_certify(A.make_action("cayley", F2), x, y, N=2, W=12)
        assert res.certified
        assert res.words_checked == 4 * (3 ** 12 - 1) // 2
        out.append(f"{res.words_checked} words, none trivial")
        t, a = BS2.generators()["t"], BS2.generators()["a"]
        ref = AN.pingpong_certify(A.make_action("tn", BS2), t, a * t * a.inverse())
        assert not ref.certified and ref.common_end
        out.append(f"common end {ref.common_end}")


def test_08_tits_trichotomy():
    with criterion(8, "Tits report cases 1, 2 and 3") as out:
        z = P.ProductAction([A.make_action("line", Z2, [1, 0]), A.make_action("line", Z2, [0, 1])])
        assert AN.tits_report(z, gens(Z2)).case == 1
        f = P.ProductAction([A.make_action("cayley", F2)])
        assert AN.tits_report(f, gens(F2)).case == 2
        b = P.ProductAction([A.make_action("tn", BS2), A.make_action("h2", BS2)])
        rep = AN.tits_report(b, gens(BS2), alpha=BS2.generators()["t"])
        assert rep.case == 3
        assert rep.drifts[0] * rep.drifts[1] < 0
        out.append(f"case 3 drifts {rep.drifts[0]}, {rep.drifts[1]:.6f}")


def test_09_growth():
    with criterion(9, "growth series exact; BS(1,2) exponential at L=8") as out:
        assert AN.growth_series(gens(F2), 5).sizes == [1, 5, 17, 53, 161, 485]
        assert AN.growth_series(gens(Z2), 6).sizes == [1, 5, 13, 25, 41, 61, 85]
        bs = AN.growth_series(gens(BS2), 8)
        assert bs.exponential
        out.append("BS(1,2) sizes " + ",".join(map(str, bs.sizes)))


def test_10_commutators_on_quasi_lines():
    with criterion(10, "commutators of radius-5 ball elements fix every quasi-line basepoint") as out:
        factors = [
            (Z2, [1, -1]), (Z2, [1, 0]), (Z2, [0, 1]),
            (LL, [1]), (BS2, [1]), (F2, [1, 1]), (F2, [2, -3]),
        ]
        for group, phi in factors:
            action = A.make_action("line", group, phi)
            worst, _ = P.commutator_displacements(action, G.ball(gens(group), 5))
            assert worst == 0
        out.append(f"{len(factors)} quasi-line factors")


if __name__ == "__main__":
    import sys

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except Exception:  # noqa: BLE001 - reported through RESULTS
                failed += 1
    print("\n".join(summary_lines()))
    sys.exit(1 if failed else 0)
