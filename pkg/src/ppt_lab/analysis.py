"""Tits-alternative machinery over the concrete actions.

Verdicts here are either structural (``exact=True``) or evidence gathered
at a finite word radius.  Searches that the underlying existence arguments
leave unspecified (for instance the element swapping attracting and
repelling fixed points across two focal factors) are labelled as searches
in the emitted reports.
"""

from __future__ import annotations

import hashlib
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from . import actions as A
from . import groups as G
from .actions import FLOAT_TOL, Undetermined
from .product import ProductAction

ELLIPTIC = "elliptic"
HOROCYCLIC = "horocyclic"
LINEAL = "lineal"
FOCAL = "focal"
GENERAL = "general-type"


# --------------------------------------------------------------------------
# action classification


@dataclass
class Classification:
    type: str
    exact: bool
    orientable: bool = None  # lineal only
    witnesses: list = field(default_factory=list)
    fixed_end: str = None
    notes: list = field(default_factory=list)

    def to_dict(self):
        out = {
            "type": self.type,
            "exact": self.exact,
            "witnesses": [G.format_element(g) for g in self.witnesses],
        }
        if self.type == LINEAL:
            out["orientable"] = self.orientable
        if self.fixed_end is not None:
            out["fixed_end"] = self.fixed_end
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def _shared_ends(action, g, h):
    """Which ends of g (+1 / -1) are also ends of h."""
    shared = set()
    for sg in (1, -1):
        for sh in (1, -1):
            if A.ends_equal(action, g, sg, h, sh):
                shared.add(sg)
    return shared


def _preserves(action, s, g, sign):
    """Does s fix the end g^{sign inf}?"""
    conj = s * g * s.inverse()
    return A.ends_equal(action, conj, sign, g, sign)


def _swaps(action, s, g):
    conj = s * g * s.inverse()
    return A.ends_equal(action, conj, 1, g, -1)


def _independent_pair(action, loxodromics):
    for i, g in enumerate(loxodromics):
        for h in loxodromics[i + 1:]:
            if not _shared_ends(action, g, h):
                return g, h
    return None


def classify_action(action, gens, W=4, max_loxodromics=48):
    """Place the action of <gens> in the five-way taxonomy."""
    if W < 2:
        raise ValueError("W must be at least 2")
    gens = list(gens)
    if action.kind == A.LINE:
        movers = [s for s in gens if A.phi_value(action, s) != 0]
        if not movers:
            return Classification(ELLIPTIC, True, notes=["phi vanishes on generators"])
        return Classification(LINEAL, True, orientable=True, witnesses=movers[:1],
                              fixed_end="+inf/-inf")

    elems = list(G.ball(gens, W))
    loxodromics, parabolics = [], []
    try:
        for g in elems:
            kind = A.classify_element(action, g)
            if kind == "loxodromic":
                loxodromics.append(g)
            elif kind == "parabolic":
                parabolics.append(g)
    except Undetermined as exc:
        return Classification(ELLIPTIC, False, notes=[str(exc)])

    if not loxodromics:
        if action.is_tree:
            # generators and their pairwise products are elliptic (W >= 2):
            # a global fixed vertex exists
            return Classification(ELLIPTIC, True, notes=["no loxodromic up to length 2"])
        if parabolics:
            exact = all(s.k == 0 for s in gens)
            return Classification(HOROCYCLIC, exact, witnesses=parabolics[:1], fixed_end="inf")
        return Classification(ELLIPTIC, all(G.is_identity(s) for s in gens))

    loxodromics = loxodromics[:max_loxodromics]
    g0 = loxodromics[0]
    plus, minus = A.endpoints(action, g0)
    try:
        shares = []
        for h in loxodromics[1:]:
            sh = _shared_ends(action, g0, h)
            if not sh:
                return Classification(GENERAL, True, witnesses=[g0, h])
            shares.append((h, sh))

        if all(sh == {1, -1} for _, sh in shares):
            preserved = all(
                (_preserves(action, s, g0, 1) and _preserves(action, s, g0, -1))
                or (_swaps(action, s, g0))
                for s in gens)
            orientable = not any(_swaps(action, s, g0) for s in gens)
            return Classification(LINEAL, preserved, orientable=orientable, witnesses=[g0],
                                  fixed_end=f"{plus} / {minus}")

        for sign, label in ((1, plus), (-1, minus)):
            if all(sign in sh for _, sh in shares):
                if all(_preserves(action, s, g0, sign) for s in gens):
                    other = next(h for h, sh in shares if sh != {1, -1})
                    return Classification(FOCAL, True, witnesses=[g0, other], fixed_end=label)

        pair = _independent_pair(action, loxodromics)
        if pair:
            return Classification(GENERAL, True, witnesses=list(pair))
        return Classification(FOCAL, False, witnesses=[g0],
                              notes=["loxodromics pairwise share an end; no fixed end verified"])
    except Undetermined as exc:
        return Classification(FOCAL, False, witnesses=[g0], notes=[str(exc)])


# --------------------------------------------------------------------------
# ping-pong


@dataclass
class PingPongResult:
    certified: bool
    reason: str
    ends: dict = field(default_factory=dict)
    N: int = 0
    W: int = 0
    words_checked: int = 0
    digest: str = None
    common_end: str = None

    def to_dict(self):
        out = {
            "certified": self.certified,
            "reason": self.reason,
            "ends": self.ends,
            "N": self.N,
            "W": self.W,
            "words_checked": self.words_checked,
        }
        if self.digest:
            out["word_list_sha256"] = self.digest
            out["word_list_rule"] = (
                "all nonempty reduced words over G,g,H,h (G=g^-1) of length <= W, "
                "depth-first, letter order g,G,h,H, one word per line")
        if self.common_end:
            out["common_end"] = self.common_end
        return out


def reduced_words(W):
    """Reduced words over letters 0=g, 1=g^-1, 2=h, 3=h^-1, depth-first."""
    inverse = {0: 1, 1: 0, 2: 3, 3: 2}
    stack = [((c,)) for c in (3, 2, 1, 0)]
    while stack:
        word = stack.pop()
        yield word
        if len(word) < W:
            last = word[-1]
            for c in (3, 2, 1, 0):
                if c != inverse[last]:
                    stack.append(word + (c,))


def pingpong_certify(action, g, h, N=2, W=12):
    """Certify <g^N, h^N> free by disjoint ends plus exact word checks."""
    ends = {}
    for name, x in (("g", g), ("h", h)):
        if A.classify_element(action, x) != "loxodromic":
            return PingPongResult(False, f"{name} is not loxodromic", N=N, W=W)
        plus, minus = A.endpoints(action, x)
        ends[name] = {"attracting": plus, "repelling": minus}
    for sg in (1, -1):
        for sh in (1, -1):
            if A.ends_equal(action, g, sg, h, sh):
                which = ends["g"]["attracting" if sg > 0 else "repelling"]
                return PingPongResult(
                    False, "shared end", ends=ends, N=N, W=W, common_end=which)

    letters = [G.power(g, N), G.power(g, -N), G.power(h, N), G.power(h, -N)]
    names = "gGhH"
    digest = hashlib.sha256()
    values = {}
    count = 0
    for word in reduced_words(W):
        prefix = values.get(word[:-1]) if len(word) > 1 else G.power(g, 0)
        value = prefix * letters[word[-1]]
        if len(word) < W:
            values[word] = value
        count += 1
        digest.update(("".join(names[c] for c in word) + "\n").encode())
        if G.is_identity(value):
            return PingPongResult(False, "identity word", ends=ends, N=N, W=W,
                                  words_checked=count,
                                  common_end="".join(names[c] for c in word))
    return PingPongResult(True, "certified", ends=ends, N=N, W=W, words_checked=count,
                          digest=digest.hexdigest())


# --------------------------------------------------------------------------
# Tits report


@dataclass
class TitsReport:
    verdict: str
    case: int = None
    rank_bound: int = None
    factors: list = field(default_factory=list)
    certificate: PingPongResult = None
    alpha: object = None
    drifts: list = None
    notes: list = field(default_factory=list)

    def to_dict(self):
        out = {
            "verdict": self.verdict,
            "case": self.case,
            "factors": [c.to_dict() for c in self.factors],
            "notes": list(self.notes),
        }
        if self.rank_bound is not None:
            out["rank_bound"] = self.rank_bound
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_dict()
        if self.alpha is not None:
            out["alpha"] = G.format_element(self.alpha)
            out["alpha_drift_toward_fixed_end"] = self.drifts
        return out


def tits_report(p, gens, W=4, alpha=None, search_radius=None, pingpong_W=8):
    """Trichotomy verdict for the subgroup generated by ``gens``."""
    gens = list(gens)
    factors = [classify_action(f, gens, W) for f in p.factors]
    types = [c.type for c in factors]

    for f, c in zip(p.factors, factors):
        if c.type == GENERAL:
            g, h = c.witnesses
            cert = pingpong_certify(f, g, h, N=1, W=pingpong_W)
            verdict = "contains-F2" if cert.certified else "undecided"
            return TitsReport(verdict, 2 if cert.certified else None, factors=factors,
                              certificate=cert)

    if all(t in (ELLIPTIC, LINEAL) for t in types):
        rank = sum(1 for t in types if t == LINEAL)
        return TitsReport(f"virtually-abelian(rank <= {rank})", 1, rank_bound=rank,
                          factors=factors)

    focal = [i for i, t in enumerate(types) if t == FOCAL]
    if HOROCYCLIC in types or len(focal) < 2:
        return TitsReport("undecided", factors=factors,
                          notes=["needs two focal factors and no horocyclic factor"])

    ends = []
    for i in focal:
        end = A.default_end(p.factors[i])
        try:
            A.verify_end(p.factors[i], end, gens)
        except A.ActionError as exc:
            return TitsReport("undecided", factors=factors, notes=[str(exc)])
        ends.append(end)

    if alpha is not None:
        candidates = [alpha]
        notes = ["alpha supplied"]
    else:
        radius = search_radius if search_radius is not None else W
        candidates = list(G.ball(gens, radius))
        notes = [f"alpha found by search over the word ball of radius {radius}"]
    for a in candidates:
        drifts = [A.drift(p.factors[i], end, a) for i, end in zip(focal, ends)]
        if any(abs(d) <= FLOAT_TOL for d in drifts):
            continue
        if any(d > 0 for d in drifts) and any(d < 0 for d in drifts):
            return TitsReport("amenable-not-virtually-abelian", 3, factors=factors, alpha=a,
                              drifts=[float(d) if isinstance(d, float) else d for d in drifts],
                              notes=notes + ["case (3) evidence; local finiteness not checked"])
    return TitsReport("undecided", factors=factors,
                      notes=notes + ["no alpha with opposite drift found"])


# --------------------------------------------------------------------------
# rank obstruction


@dataclass(frozen=True)
class RankObstruction:
    z: tuple
    K: Fraction
    family: str
    checked_n: int


def rational_nullspace(rows):
    """Basis of {z : M z = 0} over Q by exact row reduction."""
    m = [[Fraction(x) for x in row] for row in rows]
    ncols = len(m[0]) if m else 0
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        lead = m[r][c]
        m[r] = [x / lead for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                factor = m[i][c]
                m[i] = [a - factor * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    basis = []
    for free in (c for c in range(ncols) if c not in pivots):
        z = [Fraction(0)] * ncols
        z[free] = Fraction(1)
        for row, pc in enumerate(pivots):
            z[pc] = -m[row][free]
        basis.append(z)
    return basis


def _family_text(z):
    parts = []
    for zi in z:
        if zi == 0:
            parts.append("0")
        elif zi.denominator == 1:
            k = zi.numerator
            parts.append("n" if k == 1 else "-n" if k == -1 else f"{k}n")
        else:
            parts.append(f"floor({zi}n)")
    return "(" + ",".join(parts) + ")"


def rank_obstruction(phi, checked_n=100):
    """Nullvector of the homomorphism matrix and the bounded family floor(n z)."""
    rows = [[Fraction(x) for x in row] for row in phi]
    if not rows or not rows[0]:
        raise ValueError("empty matrix")
    basis = rational_nullspace(rows)
    if not basis:
        return None
    z = basis[0]
    scale = min(abs(x) for x in z if x != 0)
    z = [x / scale for x in z]
    first = next(x for x in z if x != 0)
    if first < 0:
        z = [-x for x in z]
    K = sum(abs(x) for row in rows for x in row)
    for row in rows:
        assert sum(a * b for a, b in zip(row, z)) == 0
    for n in range(1, checked_n + 1):
        v = [math.floor(n * x) for x in z]
        worst = max(abs(sum(a * b for a, b in zip(row, v))) for row in rows)
        assert worst <= K, f"bound violated at n={n}"
    return RankObstruction(tuple(z), K, _family_text(z), checked_n)


# --------------------------------------------------------------------------
# confining subsets


@dataclass
class LampWindow:
    """Lamp configurations (shift 0) supported in [-radius, radius].

    Enumerates every configuration with at most ``max_lamps`` lamps plus
    ``samples`` seeded random configurations.
    """

    radius: int = 32
    max_lamps: int = 2
    samples: int = 200
    seed: int = 0

    def elements(self):
        import itertools

        positions = range(-self.radius, self.radius + 1)
        out = []
        for size in range(self.max_lamps + 1):
            for support in itertools.combinations(positions, size):
                out.append(G.LamplighterElement(support, 0))
        rng = random.Random(self.seed)
        seen = set(out)
        for _ in range(self.samples):
            g = G.LamplighterElement(tuple(p for p in positions if rng.random() < 0.5), 0)
            if g not in seen:
                seen.add(g)
                out.append(g)
        return out

    def contains(self, g):
        return g.shift == 0 and all(-self.radius <= p <= self.radius for p in g.support)

    def describe(self):
        return {
            "support_window": [-self.radius, self.radius],
            "max_lamps_exhaustive": self.max_lamps,
            "random_samples": self.samples,
            "seed": self.seed,
        }


@dataclass
class ConfiningReport:
    condition1: dict
    condition2: dict
    condition3: dict
    truncation: dict
    minimal_n: dict = field(default_factory=dict, repr=False)

    @property
    def passed(self):
        return (self.condition1["holds"] is True and self.condition2["holds"] is True
                and self.condition3["holds"] is True)

    def to_dict(self):
        return {
            "passed": self.passed,
            "condition1": self.condition1,
            "condition2": self.condition2,
            "condition3": self.condition3,
            "truncation": self.truncation,
        }


def confining_check(H, alpha, in_A, N=80, n0_max=8, max_pairs=400_000):
    """Check the three confining conditions on a finite window of H."""
    elems = H.elements()
    A_elems = [h for h in elems if in_A(h)]

    cond1 = {"holds": True, "checked": len(A_elems), "counterexample": None}
    for h in A_elems:
        if not in_A(alpha(h)):
            cond1 = {"holds": False, "checked": len(A_elems),
                     "counterexample": G.format_element(h),
                     "image": G.format_element(alpha(h))}
            break

    minimal = {}
    unknown = 0
    for h in elems:
        x, found = h, None
        for n in range(N + 1):
            if in_A(x):
                found = n
                break
            x = alpha(x)
        minimal[h] = found
        if found is None:
            unknown += 1
    found_ns = [n for n in minimal.values() if n is not None]
    cond2 = {
        "holds": True if unknown == 0 else None,
        "checked": len(elems),
        "max_n": max(found_ns) if found_ns else None,
        "unknown_within_N": unknown,
        "N": N,
        "histogram": {str(k): v for k, v in sorted(Counter(found_ns).items())},
    }

    k = len(A_elems)
    if k * k > max_pairs:
        k = int(math.isqrt(max_pairs))
    pool = A_elems[:k]
    products = [a * b for a in pool for b in pool]
    cond3 = {"holds": None, "n0": None, "pairs_checked": len(products), "n0_max": n0_max}
    current = products
    for n0 in range(n0_max + 1):
        if all(in_A(x) for x in current):
            cond3.update(holds=True, n0=n0)
            break
        current = [alpha(x) for x in current]

    truncation = dict(H.describe())
    truncation["A_elements_in_window"] = len(A_elems)
    truncation["pair_pool"] = len(pool)
    return ConfiningReport(cond1, cond2, cond3, truncation, minimal)


def lamplighter_confining_instance(radius=32, r0=2, reverse=False, **window):
    """H = lamp configurations, alpha = conjugation by t (or t^-1),
    A = {h in H : d_T1(x, h x) <= r0}."""
    t = G.LAMPLIGHTER.generators()["t"]
    x = t.inverse() if reverse else t
    xi = x.inverse()
    t1 = A.make_action("t1", G.LAMPLIGHTER)

    def alpha(h):
        return x * h * xi

    def in_A(h):
        return h.shift == 0 and A.displacement(t1, h) <= r0

    return LampWindow(radius=radius, **window), alpha, in_A


# --------------------------------------------------------------------------
# stabilizers and growth


def extract_stabilizer(pairs):
    """From (g, image of x under g) pairs, elements g^-1 h fixing x."""
    fibres = {}
    for g, image in pairs:
        fibres.setdefault(image, []).append(g)
    out = []
    for members in fibres.values():
        if len(members) < 2:
            continue
        rep_inv = members[0].inverse()
        out.extend(rep_inv * h for h in members)
    return out


def orbit_pairs(action, elems):
    return [(g, A.basepoint_image(action, g)) for g in elems]


@dataclass
class GrowthSeries:
    sizes: list
    exponential: bool
    margin: float
    tail: int

    def to_dict(self):
        return {"sizes": self.sizes, "exponential": self.exponential,
                "margin": self.margin, "tail": self.tail}


def growth_series(gens, L, margin=0.5, tail=3, budget=G.DEFAULT_BALL_BUDGET):
    """Ball sizes |B(0)|..|B(L)| and an exponential-growth flag.

    The flag is set when the last ``tail`` ratios |B(k+1)|/|B(k)| all stay
    at or above 1 + margin.  Polynomial growth has ratios tending to 1.
    """
    if L < 4:
        raise ValueError("growth series needs L >= 4")
    layers = G.ball_layers(gens, L, budget)
    sizes, total = [], 0
    for layer in layers:
        total += len(layer)
        sizes.append(total)
    ratios = [sizes[k + 1] / sizes[k] for k in range(len(sizes) - 1)]
    exponential = all(r >= 1 + margin for r in ratios[-tail:])
    return GrowthSeries(sizes, exponential, margin, tail)
