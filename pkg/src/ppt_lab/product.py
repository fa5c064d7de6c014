"""l1-products of actions and the desk-scale properness audit."""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

from . import actions as A
from . import groups as G
from .actions import FLOAT_TOL

PROPER_EVIDENCE = "proper-evidence"
NON_PROPER_WITNESS = "non-proper-witness"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ProductAction:
    factors: tuple

    def __post_init__(self):
        if not self.factors:
            raise A.ActionError("a product needs at least one factor")
        object.__setattr__(self, "factors", tuple(self.factors))
        group = self.factors[0].group
        if any(f.group != group for f in self.factors):
            raise A.ActionError("all factors must share one group instance")

    @property
    def group(self):
        return self.factors[0].group

    def drop(self, index):
        return ProductAction(self.factors[:index] + self.factors[index + 1:])

    def describe(self):
        return [f.describe() for f in self.factors]


def l1_displacement(p, g):
    """Sum of factor displacements; exact unless a factor is the plane."""
    return sum(A.displacement(f, g) for f in p.factors)


def _le(value, r):
    return value <= r + FLOAT_TOL


@dataclass
class AuditReport:
    L: int
    r_grid: list
    delta: int
    counts: dict
    previous_counts: dict
    stable: dict
    borderline: dict
    min_nonzero: object
    witnesses: list
    verdict: str
    family: dict = None
    ball_size: int = 0
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return {
            "L": self.L,
            "delta": self.delta,
            "ball_size": self.ball_size,
            "rows": [
                {
                    "r": r,
                    "N": self.counts[r],
                    "N_previous": self.previous_counts[r],
                    "stable": self.stable[r],
                    "borderline": self.borderline[r],
                }
                for r in self.r_grid
            ],
            "min_nonzero_displacement": self.min_nonzero,
            "witnesses": [G.format_element(g) for g in self.witnesses],
            "verdict": self.verdict,
            "family": self.family,
            "warnings": list(self.warnings),
        }


def audit_counts(p, elems, r_grid):
    """N(r) over the given elements for each threshold."""
    disps = [l1_displacement(p, g) for g in elems]
    return {r: sum(1 for d in disps if _le(d, r)) for r in r_grid}


def properness_audit(p, gens, L, r_grid, delta=2, family_powers=16, budget=G.DEFAULT_BALL_BUDGET):
    """Count ball elements of small l1 displacement at radii L and L - delta."""
    r_grid = sorted(r_grid)
    notes = []
    if L <= max(r_grid):
        msg = f"L={L} does not exceed max r={max(r_grid)}; counts may be truncated"
        warnings.warn(msg)
        notes.append(msg)
    if delta < 1 or delta > L:
        raise ValueError("delta must lie in [1, L]")
    lengths = G.ball(gens, L, budget)
    disp = {g: l1_displacement(p, g) for g in lengths}

    counts, prev, stable, border = {}, {}, {}, {}
    for r in r_grid:
        inside = [g for g, d in disp.items() if _le(d, r)]
        counts[r] = len(inside)
        prev[r] = sum(1 for g in inside if lengths[g] <= L - delta)
        stable[r] = counts[r] == prev[r]
        border[r] = sum(1 for g in inside if abs(disp[g] - r) <= FLOAT_TOL)

    nonzero = [d for d in disp.values() if d > FLOAT_TOL]
    min_nonzero = min(nonzero) if nonzero else None
    witnesses = []
    if min_nonzero is not None:
        witnesses = sorted(
            (g for g, d in disp.items() if abs(d - min_nonzero) <= FLOAT_TOL),
            key=lambda g: g.sort_key())[:10]

    family = None
    if all(stable.values()):
        verdict = PROPER_EVIDENCE
    else:
        family = find_infinite_family(p, disp, max(r_grid), family_powers)
        verdict = NON_PROPER_WITNESS if family else INCONCLUSIVE

    return AuditReport(
        L=L,
        r_grid=r_grid,
        delta=delta,
        counts=counts,
        previous_counts=prev,
        stable=stable,
        borderline=border,
        min_nonzero=min_nonzero,
        witnesses=witnesses,
        verdict=verdict,
        family=family,
        ball_size=len(lengths),
        warnings=notes,
    )


def find_infinite_family(p, disp, r, powers=16):
    """An infinite set of elements with l1 displacement <= r, if one is visible.

    For products of quasi-lines over Z^d the family comes from the rank
    obstruction; otherwise it is the cyclic group of a ball element whose
    first ``powers`` powers are nontrivial and stay within displacement r.
    """
    group = p.group
    if isinstance(group, G.FreeAbelian) and all(f.kind == A.LINE for f in p.factors):
        from .analysis import rank_obstruction

        obstruction = rank_obstruction([list(f.phi) for f in p.factors])
        if obstruction is None:
            return None
        return {
            "source": "rank-obstruction",
            "nullvector": [str(z) for z in obstruction.z],
            "bound_K": str(obstruction.K),
            "family": obstruction.family,
        }
    candidates = sorted(
        (g for g, d in disp.items() if _le(d, r) and not G.is_identity(g)),
        key=lambda g: (float(disp[g]), g.sort_key()))
    for g in candidates:
        gk = g.group.identity()
        ok = True
        for _ in range(powers):
            gk = gk * g
            if G.is_identity(gk) or not _le(l1_displacement(p, gk), r):
                ok = False
                break
        if ok:
            return {
                "source": "bounded-powers",
                "generator": G.format_element(g),
                "family": f"({G.format_element(g)})^k, k in Z",
                "powers_checked": powers,
            }
    return None


# --------------------------------------------------------------------------
# lamplighter closed-form count


def claim_predicted_count(r):
    """#{(f, n) : d_T1 + d_T2 <= r}, by direct enumeration.

    The displacement bound forces |n| <= r and supp f inside [-r, r], so
    enumerating that window and filtering with the exact displacement is
    complete.
    """
    if r < 0:
        raise ValueError("r must be nonnegative")
    t1 = A.make_action("t1", G.LAMPLIGHTER)
    t2 = A.make_action("t2", G.LAMPLIGHTER)
    window = range(-r, r + 1)
    count = 0
    for n in window:
        for size in range(len(window) + 1):
            for support in itertools.combinations(window, size):
                g = G.LamplighterElement(support, n)
                if A.displacement(t1, g) + A.displacement(t2, g) <= r:
                    count += 1
    return count


# --------------------------------------------------------------------------
# reduction and commutator checks


def reduction_check(p, factor_index, subgroup_gens, L, r_grid):
    """Dropping a factor fixed by the subgroup leaves every count unchanged.

    Returns ``(counts_with, counts_without)``.
    """
    factor = p.factors[factor_index]
    for s in subgroup_gens:
        if A.displacement(factor, s) > FLOAT_TOL:
            raise A.ActionError(
                f"{G.format_element(s)} moves the basepoint of factor {factor_index}")
    elems = list(G.ball(subgroup_gens, L))
    return audit_counts(p, elems, r_grid), audit_counts(p.drop(factor_index), elems, r_grid)


def commutator_displacements(action, elems):
    """Maximum displacement of [g, h] over all pairs, with a witness pair."""
    elems = list(elems)
    worst, witness = 0, None
    for g in elems:
        for h in elems:
            d = A.displacement(action, G.commutator(g, h))
            if d > worst:
                worst, witness = d, (g, h)
    return worst, witness
