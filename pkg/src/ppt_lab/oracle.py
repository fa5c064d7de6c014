"""Ground-truth tree distances by coset enumeration.

The Bass-Serre tree of an ascending HNN extension with vertex group ``A``
and stable letter ``s`` has vertex set ``G/A`` and edges ``{gA, gsA}``.
The neighbours of ``gA`` are therefore ``g h s^{+-1} A`` for ``h`` in
``A``; a finite set of powers of the generators lying in ``A`` covers every
coset class that can occur, and full degree at every interior vertex is
asserted rather than assumed.  Coset identity uses a canonical key that is
re-checked algebraically (``r^-1 g`` in ``A``) on every hit.

Nothing here consults a normal form or a closed-form displacement.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from . import actions as A
from . import groups as G


class OracleRangeError(LookupError):
    """g x lies outside the explored neighbourhood."""


class OracleConsistencyError(AssertionError):
    """The explored graph violated a structural invariant."""


@dataclass
class CosetGraph:
    action: object
    depth: int
    keys: list = field(default_factory=list)
    reps: list = field(default_factory=list)
    dist: list = field(default_factory=list)
    adjacency: list = field(default_factory=list)
    index: dict = field(default_factory=dict)
    root: int = 0

    def __len__(self):
        return len(self.keys)

    def label(self, v):
        return G.format_element(self.reps[v])

    def edges(self):
        for u, nbrs in enumerate(self.adjacency):
            for v in nbrs:
                if u < v:
                    yield u, v

    def edge_list_text(self):
        """One edge per line: ``u<TAB>v<TAB>label_u<TAB>label_v``."""
        lines = [f"{u}\t{v}\t{self.label(u)}\t{self.label(v)}" for u, v in self.edges()]
        return "\n".join(lines) + ("\n" if lines else "")

    def bfs_distances(self, source):
        out = [-1] * len(self)
        out[source] = 0
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for v in self.adjacency[u]:
                if out[v] < 0:
                    out[v] = out[u] + 1
                    queue.append(v)
        return out


def _stabilizer_moves(action):
    degree = A.tree_degree(action)
    gens = list(action.group.generators().values())
    moves = [action.group.identity()]
    for s in gens + [g.inverse() for g in gens]:
        if A.stabilizer_contains(action, s):
            for k in range(1, degree + 1):
                h = G.power(s, k)
                if h not in moves:
                    moves.append(h)
    return moves


def _neighbour_candidates(action):
    if action.kind == A.CAYLEY:
        return G.symmetrize(action.group.generators().values())
    s = A.stable_letter(action)
    out = []
    for h in _stabilizer_moves(action):
        for step in (s, s.inverse()):
            out.append(h * step)
    return out


def build_coset_graph(action, depth, budget=200_000):
    """All vertices within tree distance ``depth`` of the basepoint."""
    if not action.is_tree:
        raise A.ActionError(f"{action.kind} is not a tree action")
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    degree = A.tree_degree(action)
    moves = _neighbour_candidates(action)
    graph = CosetGraph(action, depth)

    def add(rep, d):
        key = A.coset_key(action, rep)
        graph.index[key] = len(graph.keys)
        graph.keys.append(key)
        graph.reps.append(rep)
        graph.dist.append(d)
        graph.adjacency.append([])
        return graph.index[key]

    add(action.group.identity(), 0)
    frontier = [0]
    for d in range(depth):
        nxt = []
        for u in frontier:
            rep = graph.reps[u]
            nbrs = []
            for mv in moves:
                g = rep * mv
                key = A.coset_key(action, g)
                v = graph.index.get(key)
                if v is None:
                    v = add(g, d + 1)
                    nxt.append(v)
                    if len(graph) > budget:
                        raise G.ResourceBudgetError(f"coset graph exceeds {budget} vertices")
                elif not _same_coset(action, graph.reps[v], g):
                    raise OracleConsistencyError("coset key collision")
                if v != u and v not in nbrs:
                    nbrs.append(v)
            if len(nbrs) != degree:
                raise OracleConsistencyError(
                    f"vertex {graph.label(u)} has {len(nbrs)} neighbours, expected {degree}")
            for v in nbrs:
                if v not in graph.adjacency[u]:
                    graph.adjacency[u].append(v)
                if u not in graph.adjacency[v]:
                    graph.adjacency[v].append(u)
        frontier = nxt
    for v, d in enumerate(graph.bfs_distances(graph.root)):
        if d != graph.dist[v]:
            raise OracleConsistencyError("explored graph is not a tree")
    return graph


def _same_coset(action, g, h):
    if action.kind == A.CAYLEY:
        return g == h
    return A.stabilizer_contains(action, g.inverse() * h)


def oracle_distance(graph, g):
    """BFS distance from the basepoint to g x."""
    key = A.coset_key(graph.action, g)
    v = graph.index.get(key)
    if v is None:
        raise OracleRangeError(f"{G.format_element(g)} x lies beyond depth {graph.depth}")
    if not _same_coset(graph.action, graph.reps[v], g):
        raise OracleConsistencyError("coset key collision")
    return graph.dist[v]


def check_ball(action, gens, L, depth=None, graph=None):
    """Compare closed-form displacement with the oracle on a word ball.

    Returns ``(checked, mismatches)``; mismatches list
    ``(element, closed_form, oracle)``.
    """
    if graph is None:
        graph = build_coset_graph(action, L if depth is None else depth)
    mismatches = []
    elems = G.ball(gens, L)
    for g in elems:
        closed = A.displacement(action, g)
        try:
            truth = oracle_distance(graph, g)
        except OracleRangeError:
            truth = None
        if closed != truth:
            mismatches.append((g, closed, truth))
    return len(elems), mismatches
