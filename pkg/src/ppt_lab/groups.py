"""Exact element arithmetic for the four built-in group families.

Families:

* ``lamplighter`` -- Z_2 wr Z, elements ``(f, n)`` stored as the sorted lamp
  support of ``f`` plus the shift ``n``.  Multiplication follows
  ``(f, n) * (g, m) = (h, n + m)`` with ``h(k) = f(k) + g(n + k)``, so left
  multiplication by ``t`` moves every lamp one step *down*:
  ``t * a`` is the lamp at -1 with shift 1.
* ``bs`` -- BS(1, n) as affine maps ``x -> n**k * x + q`` with ``q`` an
  n-adic rational ``num / n**exp`` (``exp`` minimal).
* ``free`` -- free group on ``rank`` letters, freely reduced words of signed
  generator indices.
* ``zn`` -- Z^r, integer coordinate vectors.

HNN normal forms
----------------
The lamplighter is an ascending HNN extension in two ways.  Under the
multiplication above, conjugation by ``t`` shifts lamps down, so the vertex
group of the first structure (stable letter ``t``) is the set of lamp
configurations supported on positions ``<= 0``; its coordinate ``j >= 0``
is the lamp at position ``-j``.  The second structure uses the stable letter
``s = t**-1`` and the vertex group supported on positions ``>= 0``, whose
coordinate ``j <= 0`` is the lamp at position ``-j``.  In these coordinates
the textbook formulas hold verbatim for the mirrored configuration
``F(x) = f(-x)``::

    k_R = max(0, max supp f, -n)    m_R = n + k_R
    k_L = max(0, -min supp f, n)    m_L = k_L - n

The coset-graph oracle (``ppt_lab.oracle``) confirms ``k_R + m_R`` and
``k_L + m_L`` as tree distances on full balls.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union


class GroupError(ValueError):
    """Invalid element, mixed group instances, or a malformed descriptor."""


class ResourceBudgetError(RuntimeError):
    """An enumeration would exceed its configured element budget."""


# --------------------------------------------------------------------------
# element types


def _new(cls, *values):
    """Construct without validation; for results of exact arithmetic."""
    obj = object.__new__(cls)
    for name, value in zip(cls.__dataclass_fields__, values):
        object.__setattr__(obj, name, value)
    return obj


@dataclass(frozen=True)
class LamplighterElement:
    support: tuple = ()
    shift: int = 0

    def __post_init__(self):
        s = self.support
        if any(s[i] >= s[i + 1] for i in range(len(s) - 1)):
            raise GroupError(f"lamp support must be strictly increasing: {s}")

    @property
    def group(self):
        return LAMPLIGHTER

    def __mul__(self, other):
        return mul(self, other)

    def __pow__(self, k):
        return power(self, k)

    def inverse(self):
        n = self.shift
        return _new(LamplighterElement, tuple(p + n for p in self.support), -n)

    def _mul(self, other):
        n = self.shift
        moved = {p - n for p in other.support}
        lamps = moved.symmetric_difference(self.support)
        return _new(LamplighterElement, tuple(sorted(lamps)), n + other.shift)

    def sort_key(self):
        return (len(self.support), abs(self.shift), self.shift, self.support)


@dataclass(frozen=True)
class BsElement:
    """The affine map ``x -> base**k * x + num / base**exp``."""

    base: int
    k: int = 0
    num: int = 0
    exp: int = 0

    def __post_init__(self):
        if self.base < 2:
            raise GroupError("BS(1,n) needs n >= 2")
        if self.exp < 0:
            raise GroupError("denominator exponent must be nonnegative")
        if self.exp > 0 and self.num % self.base == 0:
            raise GroupError("n-adic form is not reduced")
        if self.num == 0 and self.exp != 0:
            raise GroupError("zero translation must have exponent 0")

    @classmethod
    def make(cls, base, k, num, exp=0):
        if base < 2:
            raise GroupError("BS(1,n) needs n >= 2")
        if num == 0:
            return _new(cls, base, k, 0, 0)
        if exp < 0:
            num, exp = num * base ** (-exp), 0
        while exp > 0 and num % base == 0:
            num //= base
            exp -= 1
        return _new(cls, base, k, num, exp)

    @classmethod
    def from_fraction(cls, base, k, q):
        q = Fraction(q)
        den, exp = q.denominator, 0
        scale = 1
        while den > 1:
            if scale % den == 0:
                break
            scale *= base
            exp += 1
            if exp > 4096:
                raise GroupError(f"{q} is not an n-adic rational for n={base}")
        if scale % den:
            raise GroupError(f"{q} is not an n-adic rational for n={base}")
        return cls.make(base, k, q.numerator * (scale // den), exp)

    @property
    def q(self):
        return Fraction(self.num, self.base ** self.exp)

    @property
    def group(self):
        return BaumslagSolitar(self.base)

    def __mul__(self, other):
        return mul(self, other)

    def __pow__(self, k):
        return power(self, k)

    def inverse(self):
        # (k, q)^-1 = (-k, -q n^-k)
        n, k = self.base, self.k
        if k <= 0:
            return BsElement.make(n, -k, -self.num * n ** (-k), self.exp)
        return BsElement.make(n, -k, -self.num, self.exp + k)

    def _mul(self, other):
        n = self.base
        k1 = self.k
        # n^{k1} q2 as num2' / n^{e2'}
        if k1 >= 0:
            num2, e2 = other.num * n ** k1, other.exp
        else:
            num2, e2 = other.num, other.exp - k1
        e = max(e2, self.exp)
        num = num2 * n ** (e - e2) + self.num * n ** (e - self.exp)
        return BsElement.make(n, k1 + other.k, num, e)

    def sort_key(self):
        return (abs(self.k), self.k, self.exp, abs(self.num), self.num)


@dataclass(frozen=True)
class FreeElement:
    rank: int
    word: tuple = ()

    def __post_init__(self):
        w = self.word
        for x in w:
            if x == 0 or abs(x) > self.rank:
                raise GroupError(f"bad letter {x} for rank {self.rank}")
        if any(w[i] == -w[i + 1] for i in range(len(w) - 1)):
            raise GroupError(f"word not freely reduced: {w}")

    @classmethod
    def reduce(cls, rank, letters):
        out = []
        for x in letters:
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
        return cls(rank, tuple(out))

    @property
    def group(self):
        return FreeGroup(self.rank)

    def __mul__(self, other):
        return mul(self, other)

    def __pow__(self, k):
        return power(self, k)

    def __len__(self):
        return len(self.word)

    def inverse(self):
        return _new(FreeElement, self.rank, tuple(-x for x in reversed(self.word)))

    def _mul(self, other):
        a, b = self.word, other.word
        c = 0
        m = min(len(a), len(b))
        while c < m and a[-1 - c] == -b[c]:
            c += 1
        return _new(FreeElement, self.rank, a[: len(a) - c] + b[c:])

    def exponent_sums(self):
        sums = [0] * self.rank
        for x in self.word:
            sums[abs(x) - 1] += 1 if x > 0 else -1
        return tuple(sums)

    def sort_key(self):
        return (len(self.word), tuple((abs(x), x < 0) for x in self.word))


@dataclass(frozen=True)
class ZnElement:
    coords: tuple

    @property
    def group(self):
        return FreeAbelian(len(self.coords))

    def __mul__(self, other):
        return mul(self, other)

    def __pow__(self, k):
        return power(self, k)

    def inverse(self):
        return _new(ZnElement, tuple(-c for c in self.coords))

    def _mul(self, other):
        return _new(ZnElement, tuple(x + y for x, y in zip(self.coords, other.coords)))

    def sort_key(self):
        return (sum(abs(c) for c in self.coords), tuple((abs(c), c < 0) for c in self.coords))


GroupElement = Union[LamplighterElement, BsElement, FreeElement, ZnElement]


# --------------------------------------------------------------------------
# group instances


@dataclass(frozen=True)
class Lamplighter:
    family = "lamplighter"

    def identity(self):
        return LamplighterElement()

    def generators(self):
        return {"a": LamplighterElement((0,), 0), "t": LamplighterElement((), 1)}

    def descriptor(self):
        return {"family": "lamplighter"}

    def parse_element(self, text):
        fields = _fields(text)
        if fields is None:
            return _parse_word(self, text)
        _only(fields, {"lamps", "shift"})
        lamps = sorted(set(_ints(fields.get("lamps", ""))))
        if len(lamps) != len(_ints(fields.get("lamps", ""))):
            raise GroupError("duplicate lamp positions")
        return LamplighterElement(tuple(lamps), int(fields.get("shift", "0")))

    def format_element(self, g):
        return "lamps=" + ",".join(map(str, g.support)) + f";shift={g.shift}"


LAMPLIGHTER = Lamplighter()


@dataclass(frozen=True)
class BaumslagSolitar:
    n: int
    family = "bs"

    def __post_init__(self):
        if self.n < 2:
            raise GroupError("BS(1,n) needs n >= 2")

    def identity(self):
        return BsElement(self.n)

    def generators(self):
        return {"a": BsElement(self.n, 0, 1, 0), "t": BsElement(self.n, 1, 0, 0)}

    def descriptor(self):
        return {"family": "bs", "n": self.n}

    def parse_element(self, text):
        fields = _fields(text)
        if fields is None:
            return _parse_word(self, text)
        _only(fields, {"k", "q", "num", "exp"})
        k = int(fields.get("k", "0"))
        if "q" in fields:
            if "num" in fields or "exp" in fields:
                raise GroupError("give either q or num/exp")
            return BsElement.from_fraction(self.n, k, Fraction(fields["q"]))
        num, exp = int(fields.get("num", "0")), int(fields.get("exp", "0"))
        g = BsElement.make(self.n, k, num, exp)
        if exp < 0:
            raise GroupError("exp must be nonnegative")
        return g

    def format_element(self, g):
        return f"k={g.k};num={g.num};exp={g.exp}"


@dataclass(frozen=True)
class FreeGroup:
    rank: int
    family = "free"

    def __post_init__(self):
        if self.rank < 1:
            raise GroupError("free group rank must be >= 1")

    def identity(self):
        return FreeElement(self.rank)

    def letter_names(self):
        if self.rank <= 4:
            return ["x", "y", "z", "w"][: self.rank]
        return [f"x{i}" for i in range(1, self.rank + 1)]

    def generators(self):
        return {name: FreeElement(self.rank, (i + 1,)) for i, name in enumerate(self.letter_names())}

    def descriptor(self):
        return {"family": "free", "rank": self.rank}

    def parse_element(self, text):
        if _fields(text) is not None:
            raise GroupError("free group elements are written as words, e.g. 'x*y^-1'")
        return _parse_word(self, text)

    def format_element(self, g):
        if not g.word:
            return "e"
        names = self.letter_names()
        out = []
        for x in g.word:
            name = names[abs(x) - 1]
            if out and out[-1][0] == name and (out[-1][1] > 0) == (x > 0):
                out[-1][1] += 1 if x > 0 else -1
            else:
                out.append([name, 1 if x > 0 else -1])
        return "*".join(n if p == 1 else f"{n}^{p}" for n, p in out)


@dataclass(frozen=True)
class FreeAbelian:
    dim: int
    family = "zn"

    def __post_init__(self):
        if self.dim < 1:
            raise GroupError("Z^r needs r >= 1")

    def identity(self):
        return ZnElement((0,) * self.dim)

    def generators(self):
        gens = {}
        for i in range(self.dim):
            c = [0] * self.dim
            c[i] = 1
            gens[f"h{i + 1}"] = ZnElement(tuple(c))
        return gens

    def descriptor(self):
        return {"family": "zn", "dim": self.dim}

    def parse_element(self, text):
        fields = _fields(text)
        if fields is None:
            return _parse_word(self, text)
        _only(fields, {"coords"})
        coords = tuple(_ints(fields["coords"]))
        if len(coords) != self.dim:
            raise GroupError(f"expected {self.dim} coordinates, got {len(coords)}")
        return ZnElement(coords)

    def format_element(self, g):
        return "coords=" + ",".join(map(str, g.coords))


Group = Union[Lamplighter, BaumslagSolitar, FreeGroup, FreeAbelian]


def make_group(family, n=None, rank=None, dim=None):
    """Build a group instance from a family name and its parameter."""
    family = family.lower()
    if family == "lamplighter":
        return LAMPLIGHTER
    if family == "bs":
        if n is None:
            raise GroupError("bs needs parameter n")
        return BaumslagSolitar(int(n))
    if family == "free":
        return FreeGroup(int(rank if rank is not None else 2))
    if family == "zn":
        if dim is None:
            raise GroupError("zn needs parameter dim")
        return FreeAbelian(int(dim))
    raise GroupError(f"unknown group family {family!r}")


# --------------------------------------------------------------------------
# arithmetic


def _instance_key(g):
    if isinstance(g, BsElement):
        return g.base
    if isinstance(g, FreeElement):
        return g.rank
    if isinstance(g, ZnElement):
        return len(g.coords)
    return None


def same_group(g, h):
    return type(g) is type(h) and _instance_key(g) == _instance_key(h)


def mul(g, h):
    if not same_group(g, h):
        raise GroupError(f"cannot multiply elements of {g.group} and {h.group}")
    return g._mul(h)


def inv(g):
    return g.inverse()


def power(g, k):
    if k < 0:
        g, k = g.inverse(), -k
    result = g.group.identity()
    base = g
    while k:
        if k & 1:
            result = result._mul(base)
        base = base._mul(base)
        k >>= 1
    return result


def commutator(g, h):
    return g * h * g.inverse() * h.inverse()


def conjugate(x, g):
    """Return ``x g x^-1``."""
    return x * g * x.inverse()


def is_identity(g):
    return g == g.group.identity()


def format_element(g):
    return g.group.format_element(g)


def canonical_bytes(g):
    """Byte key used for hashing and golden output."""
    desc = g.group.descriptor()
    params = ",".join(f"{k}={desc[k]}" for k in sorted(desc) if k != "family")
    return f"{desc['family']}({params}):{format_element(g)}".encode()


def words_product(group, letters: Sequence):
    g = group.identity()
    for x in letters:
        g = g * x
    return g


# --------------------------------------------------------------------------
# HNN normal forms


@dataclass(frozen=True)
class HnnNormalForm:
    """``stable**-i * stem * stable**j``.

    ``stem`` is a tuple of vertex-group coordinates for the lamplighter
    (nonnegative for the right structure, nonpositive for the left one), or
    the integer exponent ``m`` of ``a**m`` for BS(1, n).
    """

    i: int
    stem: object
    j: int
    structure: str  # "right" | "left" | "bs"
    base: int = 0

    def is_reduced(self):
        if self.i < 0 or self.j < 0:
            return False
        if self.i == 0 or self.j == 0:
            return True
        if self.structure in ("right", "left"):
            return 0 in self.stem
        return self.stem % self.base != 0

    @property
    def displacement(self):
        return self.i + self.j


def lamplighter_nf_right(g):
    """Normal form for the structure with stable letter t (tree T1)."""
    f, n = g.support, g.shift
    k = max(0, -n, f[-1] if f else 0)
    m = n + k
    stem = tuple(sorted(k - p for p in f))
    return HnnNormalForm(k, stem, m, "right")


def lamplighter_nf_left(g):
    """Normal form for the structure with stable letter s = t^-1 (tree T2)."""
    f, n = g.support, g.shift
    k = max(0, n, -f[0] if f else 0)
    m = k - n
    stem = tuple(sorted(-p - k for p in f))
    return HnnNormalForm(k, stem, m, "left")


def bs_normal_form(g):
    """Normal form t^-i a^m t^j of an element of BS(1, n)."""
    n = g.base
    i = max(g.exp, -g.k, 0)
    j = g.k + i
    m = g.num * n ** (i - g.exp)
    return HnnNormalForm(i, m, j, "bs", n)


def evaluate_normal_form(nf, group):
    """Multiply a normal form back out into a group element."""
    if nf.structure == "right":
        t = LamplighterElement((), 1)
        stem = LamplighterElement(tuple(sorted(-c for c in nf.stem)), 0)
        return power(t, -nf.i) * stem * power(t, nf.j)
    if nf.structure == "left":
        s = LamplighterElement((), -1)
        stem = LamplighterElement(tuple(sorted(-c for c in nf.stem)), 0)
        return power(s, -nf.i) * stem * power(s, nf.j)
    gens = group.generators()
    return power(gens["t"], -nf.i) * power(gens["a"], nf.stem) * power(gens["t"], nf.j)


# --------------------------------------------------------------------------
# balls


DEFAULT_BALL_BUDGET = 3_000_000


def symmetrize(gens: Iterable):
    """Generators followed by inverses, deduplicated, order preserved."""
    out = []
    for g in list(gens) + [g.inverse() for g in gens]:
        if g not in out and not is_identity(g):
            out.append(g)
    return out


def ball_layers(gens, L, budget=DEFAULT_BALL_BUDGET):
    """Spheres S(0), ..., S(L) of the word metric, in deterministic BFS order."""
    gens = list(gens)
    if not gens:
        raise GroupError("ball needs at least one generator")
    if L < 0:
        raise GroupError("radius must be nonnegative")
    sgens = symmetrize(gens)
    e = gens[0].group.identity()
    seen = {e}
    layers = [[e]]
    for _ in range(L):
        nxt = []
        for g in layers[-1]:
            for s in sgens:
                h = g._mul(s)
                if h not in seen:
                    seen.add(h)
                    nxt.append(h)
            if len(seen) > budget:
                raise ResourceBudgetError(f"ball exceeds budget of {budget} elements")
        layers.append(nxt)
    return layers


def ball(gens, L, budget=DEFAULT_BALL_BUDGET):
    """Elements of word length <= L mapped to their word length (BFS order)."""
    out = {}
    for length, layer in enumerate(ball_layers(gens, L, budget)):
        for g in layer:
            out[g] = length
    return out


# --------------------------------------------------------------------------
# text parsing helpers

_TOKEN = re.compile(r"([A-Za-z][A-Za-z0-9]*)(?:\^\(?(-?\d+)\)?)?")


def _fields(text):
    text = text.strip()
    if "=" not in text:
        return None
    out = {}
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise GroupError(f"malformed field {part!r}")
        key, value = part.split("=", 1)
        key = key.strip().lower()
        if key in out:
            raise GroupError(f"duplicate field {key!r}")
        out[key] = value.strip()
    return out


def _only(fields, allowed):
    extra = set(fields) - allowed
    if extra:
        raise GroupError(f"unknown element fields: {sorted(extra)}")


def _ints(text):
    text = text.strip()
    if not text:
        return []
    try:
        return [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise GroupError(f"expected comma-separated integers, got {text!r}") from exc


def _parse_word(group, text):
    gens = group.generators()
    text = text.strip()
    if text in ("", "e", "1"):
        return group.identity()
    g = group.identity()
    cleaned = text.replace("*", " ")
    for chunk in cleaned.split():
        pos = 0
        while pos < len(chunk):
            m = _TOKEN.match(chunk, pos)
            if not m:
                raise GroupError(f"cannot parse word {text!r}")
            name = m.group(1)
            # single-letter generators may be run together: "ata"
            if name not in gens and all(c in gens for c in name):
                if m.group(2) is not None:
                    for c in name[:-1]:
                        g = g * gens[c]
                    g = g * power(gens[name[-1]], int(m.group(2)))
                else:
                    for c in name:
                        g = g * gens[c]
            elif name in gens:
                g = g * power(gens[name], int(m.group(2) or 1))
            else:
                raise GroupError(f"unknown generator {name!r} in {text!r}")
            pos = m.end()
    return g
