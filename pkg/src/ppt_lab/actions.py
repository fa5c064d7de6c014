"""Concrete isometric actions and their displacement geometry.

Supported spaces (``ActionHandle.kind``):

``bass-serre-tree-T1``
    Lamplighter on the tree of the structure with stable letter ``t``;
    basepoint the coset of lamps on positions ``<= 0``.
``bass-serre-tree-T2``
    Lamplighter on the tree of the structure with stable letter ``t**-1``;
    basepoint the coset of lamps on positions ``>= 0``.
``bs-tree-Tn``
    BS(1, n) on its (n+1)-regular Bass-Serre tree; basepoint ``<a>``.
``free-cayley-tree``
    Free group on its Cayley tree; basepoint the identity vertex.
``quasi-line-via-homomorphism``
    Any group acting on R by translation through a homomorphism ``phi``;
    basepoint 0.
``hyperbolic-plane``
    BS(1, n) on the upper half-plane by ``z -> n**k z + q``; basepoint i.

Tree quantities are exact integers.  Hyperbolic-plane distances are floats
compared with ``FLOAT_TOL``.

Sign conventions: the fixed end of T1 and Tn is the limit of
``t**-m x``; that of T2 is the limit of ``t**m x``.  ``drift`` is the raw
horofunction increment ``d(x, c) - d(gx, c)`` toward the end; ``busemann``
multiplies it by the end's orientation.  Default orientations make the
Busemann value of the stable letter +1 on each tree (so ``t`` has
Busemann value +1 on T1 and Tn and -1 on T2), ``+log n`` for ``t`` on the
hyperbolic plane, and ``phi`` on a quasi-line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import groups as G
from .groups import (
    BaumslagSolitar,
    BsElement,
    FreeAbelian,
    FreeElement,
    FreeGroup,
    GroupError,
    Lamplighter,
    LamplighterElement,
    ZnElement,
)

FLOAT_TOL = 1e-9

T1 = "bass-serre-tree-T1"
T2 = "bass-serre-tree-T2"
TN = "bs-tree-Tn"
CAYLEY = "free-cayley-tree"
LINE = "quasi-line-via-homomorphism"
H2 = "hyperbolic-plane"

TREE_KINDS = (T1, T2, TN, CAYLEY)
HNN_TREE_KINDS = (T1, T2, TN)

KIND_ALIASES = {
    "t1": T1,
    "t2": T2,
    "tn": TN,
    "tree": TN,
    "cayley": CAYLEY,
    "line": LINE,
    "h2": H2,
}

_COMPATIBLE = {
    T1: (Lamplighter,),
    T2: (Lamplighter,),
    TN: (BaumslagSolitar,),
    CAYLEY: (FreeGroup,),
    H2: (BaumslagSolitar,),
    LINE: (Lamplighter, BaumslagSolitar, FreeGroup, FreeAbelian),
}


class ActionError(ValueError):
    """Incompatible group/action combination or an unsupported query."""


class Undetermined(Exception):
    """An analytic quantity could not be pinned down within its window."""


@dataclass(frozen=True)
class ActionHandle:
    kind: str
    group: object
    phi: tuple = None  # quasi-line homomorphism coefficients

    def __post_init__(self):
        if self.kind not in _COMPATIBLE:
            raise ActionError(f"unknown space kind {self.kind!r}")
        if not isinstance(self.group, _COMPATIBLE[self.kind]):
            raise ActionError(f"{self.kind} does not accept group {self.group}")
        if self.kind == LINE:
            if self.phi is None:
                raise ActionError("quasi-line action needs a homomorphism phi")
            want = _phi_length(self.group)
            if len(self.phi) != want:
                raise ActionError(f"phi needs {want} coefficients for {self.group}")
            object.__setattr__(self, "phi", tuple(Fraction(c) for c in self.phi))
        elif self.phi is not None:
            raise ActionError("phi only applies to quasi-line actions")

    @property
    def is_tree(self):
        return self.kind in TREE_KINDS

    def describe(self):
        out = {"space": self.kind, "group": self.group.descriptor()}
        if self.phi is not None:
            out["phi"] = [str(c) for c in self.phi]
        return out


def make_action(kind, group, phi=None):
    kind = KIND_ALIASES.get(kind.lower(), kind)
    return ActionHandle(kind, group, tuple(phi) if phi is not None else None)


def _phi_length(group):
    if isinstance(group, FreeAbelian):
        return group.dim
    if isinstance(group, FreeGroup):
        return group.rank
    return 1  # coefficient of the t-exponent


def _check(action, g):
    if g.group != action.group:
        raise ActionError(f"element of {g.group} does not belong to {action.group}")


def phi_value(action, g):
    """The designated homomorphism to R (exact rational)."""
    phi = action.phi
    if isinstance(g, ZnElement):
        coords = g.coords
    elif isinstance(g, FreeElement):
        coords = g.exponent_sums()
    elif isinstance(g, LamplighterElement):
        coords = (g.shift,)
    else:
        coords = (g.k,)
    return sum((c * x for c, x in zip(phi, coords)), Fraction(0))


# --------------------------------------------------------------------------
# hyperbolic plane


@dataclass(frozen=True)
class HPoint:
    x: object
    y: object

    def __post_init__(self):
        if not self.y > 0:
            raise ActionError("upper half-plane point needs y > 0")


def h2_image(g):
    """g . i for the affine action z -> n**k z + q (exact)."""
    return HPoint(g.q, Fraction(g.base) ** g.k)


def h2_distance(p, q):
    num = (p.x - q.x) ** 2 + (p.y - q.y) ** 2
    return math.acosh(float(1 + num / (2 * p.y * q.y)))


def _h2_displacement(g):
    p = h2_image(g)
    # arccosh((x^2 + y^2 + 1) / 2y), exact argument then one float op
    arg = (p.x * p.x + p.y * p.y + 1) / (2 * p.y)
    return math.acosh(float(arg))


# --------------------------------------------------------------------------
# displacement


def displacement(action, g):
    """d(x, g x) for the action's basepoint x."""
    _check(action, g)
    kind = action.kind
    if kind == T1:
        nf = G.lamplighter_nf_right(g)
        return nf.i + nf.j
    if kind == T2:
        nf = G.lamplighter_nf_left(g)
        return nf.i + nf.j
    if kind == TN:
        nf = G.bs_normal_form(g)
        return nf.i + nf.j
    if kind == CAYLEY:
        return len(g.word)
    if kind == LINE:
        return abs(phi_value(action, g))
    return _h2_displacement(g)


def distance_between(action, g, h):
    """d(g x, h x), using that the action is by isometries."""
    return displacement(action, g.inverse() * h)


def basepoint_image(action, g):
    """Hashable exact identity of the point g x."""
    _check(action, g)
    kind = action.kind
    if kind in HNN_TREE_KINDS:
        return coset_key(action, g)
    if kind == CAYLEY:
        return g.word
    if kind == LINE:
        return phi_value(action, g)
    p = h2_image(g)
    return (p.x, p.y)


# --------------------------------------------------------------------------
# vertex stabilizers and cosets (used by the oracle)


def stable_letter(action):
    gens = action.group.generators()
    if action.kind == T2:
        return gens["t"].inverse()
    return gens["t"]


def stabilizer_contains(action, g):
    """Is g in the stabilizer of the basepoint vertex?"""
    kind = action.kind
    if kind == T1:
        return g.shift == 0 and (not g.support or g.support[-1] <= 0)
    if kind == T2:
        return g.shift == 0 and (not g.support or g.support[0] >= 0)
    if kind == TN:
        return g.k == 0 and g.exp == 0
    if kind == CAYLEY:
        return not g.word
    raise ActionError(f"{kind} has no vertex stabilizer")


def coset_key(action, g):
    """Canonical key of the coset g Stab(x)."""
    kind = action.kind
    if kind == T1:
        # right multiplication by (h, 0), supp h <= 0, changes f on positions <= -n
        return (g.shift, tuple(p for p in g.support if p > -g.shift))
    if kind == T2:
        return (g.shift, tuple(p for p in g.support if p < -g.shift))
    if kind == TN:
        step = Fraction(g.base) ** g.k
        q = g.q
        return (g.k, q - (q // step) * step)
    if kind == CAYLEY:
        return g.word
    raise ActionError(f"{kind} has no vertex cosets")


def tree_degree(action):
    if action.kind in (T1, T2):
        return 3
    if action.kind == TN:
        return action.group.n + 1
    if action.kind == CAYLEY:
        return 2 * action.group.rank
    raise ActionError(f"{action.kind} is not a tree")


# --------------------------------------------------------------------------
# translation length and classification

WINDOW = 16


@dataclass(frozen=True)
class TranslationLength:
    value: object  # int on trees, float on H2, Fraction on lines; None if undetermined
    orbit: tuple = ()

    @property
    def determined(self):
        return self.value is not None


def orbit_distances(action, g, window=WINDOW):
    out = []
    gk = g.group.identity()
    for _ in range(window):
        gk = gk * g
        out.append(displacement(action, gk))
    return out


def translation_length(action, g, window=WINDOW):
    """Stable length lim d(x, g^k x) / k.

    Trees: stable once the last four successive differences agree.  A
    nonpositive difference anywhere proves ellipticity, since a hyperbolic
    tree isometry has d(x, g^k x) = k l + const, strictly increasing.
    Otherwise the result is undetermined rather than a guess.
    """
    _check(action, g)
    if action.kind == LINE:
        return TranslationLength(abs(phi_value(action, g)))
    if action.kind == H2:
        return TranslationLength(abs(g.k) * math.log(g.base))
    d = orbit_distances(action, g, window)
    seq = [0] + d
    diffs = [seq[i + 1] - seq[i] for i in range(len(seq) - 1)]
    if len(diffs) >= 4 and len(set(diffs[-4:])) == 1 and diffs[-1] >= 0:
        return TranslationLength(diffs[-1], tuple(d))
    if any(x <= 0 for x in diffs):
        return TranslationLength(0, tuple(d))
    return TranslationLength(None, tuple(d))


def classify_element(action, g, window=WINDOW):
    """'elliptic', 'parabolic' or 'loxodromic'."""
    _check(action, g)
    if action.kind == H2:
        if g.k != 0:
            return "loxodromic"
        return "parabolic" if g.num != 0 else "elliptic"
    if action.kind == LINE:
        return "loxodromic" if phi_value(action, g) != 0 else "elliptic"
    ell = translation_length(action, g, window)
    if not ell.determined:
        raise Undetermined(f"translation length of {G.format_element(g)} undetermined")
    return "loxodromic" if ell.value > 0 else "elliptic"


# --------------------------------------------------------------------------
# ends and Busemann values


@dataclass(frozen=True)
class HoroEnd:
    """A boundary point fixed by the whole group.

    For trees it is the limit of the ray ``step**m x``; on the plane and on
    quasi-lines it is the point at +infinity.
    """

    step: object = None
    orientation: int = 1
    label: str = ""

    def describe(self):
        return {"end": self.label, "orientation": self.orientation}


def default_end(action):
    kind = action.kind
    gens = action.group.generators()
    if kind in (T1, TN):
        return HoroEnd(gens["t"].inverse(), -1, "lim t^-m x")
    if kind == T2:
        return HoroEnd(gens["t"], -1, "lim t^m x")
    if kind in (H2, LINE):
        return HoroEnd(None, 1, "+inf")
    raise ActionError(f"{kind} has no globally fixed end")


def _ray_depth(action, g, end):
    return int(displacement(action, g)) + 4


def _ray_drift(action, end, g, m):
    c = G.power(end.step, m)
    return displacement(action, c) - distance_between(action, g, c)


def end_fixed_by(action, end, s):
    """Does s fix the end?  Exact on trees: d(s c_m, c_m) stays bounded."""
    if end.step is None:
        return True
    m = _ray_depth(action, s, end)
    c1 = G.power(end.step, m)
    c2 = G.power(end.step, m + 4)
    return distance_between(action, s * c1, c1) == distance_between(action, s * c2, c2)


def drift(action, end, g):
    """Raw horofunction increment of g toward the end (positive = toward)."""
    _check(action, g)
    if action.kind == H2:
        return g.k * math.log(g.base)
    if action.kind == LINE:
        return phi_value(action, g)
    if end.step is None:
        raise ActionError("tree ends need a ray step")
    if not end_fixed_by(action, end, g):
        raise ActionError(f"end {end.label} is not fixed by {G.format_element(g)}")
    m = _ray_depth(action, g, end)
    v1 = _ray_drift(action, end, g, m)
    v2 = _ray_drift(action, end, g, m + 1)
    assert v1 == v2, "ray vertex not deep enough"
    return v1


def busemann(action, end, g):
    """Busemann homomorphism value of g at the fixed end."""
    return end.orientation * drift(action, end, g)


def verify_end(action, end, gens):
    """Raise unless every generator fixes the end."""
    for s in gens:
        if not end_fixed_by(action, end, s):
            raise ActionError(f"end {end.label} is not fixed by {G.format_element(s)}")


# --------------------------------------------------------------------------
# ends of loxodromics

INF = "inf"


def h2_fixed_points(g):
    """(attracting, repelling) boundary points of a loxodromic affine map."""
    if g.k == 0:
        raise ActionError("not loxodromic")
    other = g.q / (1 - Fraction(g.base) ** g.k)
    return (INF, other) if g.k > 0 else (other, INF)


def gromov_products(action, u, v, depth):
    """(u^K x | v^K x)_x for K = 1..depth."""
    out = []
    uk, vk = u.group.identity(), v.group.identity()
    for _ in range(depth):
        uk, vk = uk * u, vk * v
        a, b = displacement(action, uk), displacement(action, vk)
        c = distance_between(action, uk, vk)
        out.append((a + b - c) / 2)
    return out


def same_end(action, u, v, depth=8, max_depth=32):
    """Do the rays u^K x and v^K x converge to the same end of the tree?

    The Gromov product of the ray points is eventually constant for distinct
    ends and grows without bound for equal ones.  The depth doubles until
    the last three products are either equal or strictly increasing.
    """
    while True:
        p = gromov_products(action, u, v, depth)
        tail = p[-3:]
        if tail[0] == tail[1] == tail[2]:
            return False
        if tail[0] < tail[1] < tail[2]:
            return True
        if depth >= max_depth:
            raise Undetermined("end comparison did not settle")
        depth *= 2


def endpoints(action, g):
    """Symbolic attracting/repelling points used in witnesses."""
    if action.kind == H2:
        plus, minus = h2_fixed_points(g)
        return str(plus), str(minus)
    if action.kind == LINE:
        return ("+inf", "-inf") if phi_value(action, g) > 0 else ("-inf", "+inf")
    w = G.format_element(g)
    return f"lim ({w})^K x", f"lim ({w})^-K x"


def ends_equal(action, g, sg, h, sh):
    """Is g^{sg inf} equal to h^{sh inf}?  (sg, sh in {+1, -1})."""
    if action.kind == H2:
        pg = h2_fixed_points(g)[0 if sg > 0 else 1]
        ph = h2_fixed_points(h)[0 if sh > 0 else 1]
        return pg == ph
    if action.kind == LINE:
        return (phi_value(action, g) * sg > 0) == (phi_value(action, h) * sh > 0)
    return same_end(action, g if sg > 0 else g.inverse(), h if sh > 0 else h.inverse())
