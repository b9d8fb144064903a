"""Lattice graphs, Pauli-string interactions, interaction norms and derivations.

An interaction assigns a Hermitian operator to each of finitely many site
subsets.  Terms are stored as sums of real-coefficient Pauli strings so that
Hermiticity is structural; dense matrices exist only transiently per term.
Norms weight term size by a stretched-exponential decay profile
xi_b(x) = exp(-b x**p) with 0 < p < 1.
"""

from __future__ import annotations

import json
import math
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dense import (
    DenseOperator,
    check_site_cap,
    embed,
    operator_norm,
    pauli_decompose,
    string_matrix,
)

PAULI_LABELS = frozenset("XYZ")
DERIVATION_CLEANUP_TOL = 1e-14
DEFAULT_DECAY_B = 1.0
DEFAULT_DECAY_P = 0.5


# ---------------------------------------------------------------------------
# lattice graphs
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LatticeGraph:
    """Finite graph with precomputed all-pairs graph distances."""

    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    boundary: str = "open"
    _dist: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        vertices = tuple(sorted(int(v) for v in self.vertices))
        if len(set(vertices)) != len(vertices):
            raise ValueError("duplicate vertices")
        edges = tuple(tuple(sorted((int(u), int(v)))) for u, v in self.edges)
        for u, v in edges:
            if u == v or u not in vertices or v not in vertices:
                raise ValueError(f"invalid edge ({u}, {v})")
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_dist", _all_pairs_distances(vertices, edges))

    def distance(self, u: int, v: int) -> int:
        d = self._dist.get((u, v))
        if d is None:
            raise ValueError(f"no path between {u} and {v}")
        return d

    def set_distance(self, X, Z) -> int:
        """d(X, Z) = min over pairs; 0 when the sets intersect."""
        X, Z = _as_set(X), _as_set(Z)
        return min(self.distance(x, z) for x in X for z in Z)

    def diameter(self, X) -> int:
        """D(X): maximum pairwise distance within X."""
        X = sorted(_as_set(X))
        return max(
            (self.distance(x, y) for i, x in enumerate(X) for y in X[i:]),
            default=0,
        )

    def anchored_diameter(self, X, Z) -> int:
        """D_Z(X) = D(X) + d(X, Z)."""
        return self.diameter(X) + self.set_distance(X, Z)

    def fatten(self, X, radius: int) -> frozenset[int]:
        """All vertices within graph distance `radius` of X."""
        X = _as_set(X)
        if radius < 0:
            raise ValueError("radius must be non-negative")
        return frozenset(
            v for v in self.vertices if min(self.distance(v, x) for x in X) <= radius
        )


def _as_set(X) -> frozenset[int]:
    X = frozenset(int(x) for x in X)
    if not X:
        raise ValueError("site set must be nonempty")
    return X


def _all_pairs_distances(vertices, edges):
    adjacency = {v: [] for v in vertices}
    for u, v in edges:
        adjacency[u].append(v)
        adjacency[v].append(u)
    dist = {}
    for source in vertices:
        seen = {source: 0}
        frontier = [source]
        d = 0
        while frontier:
            d += 1
            nxt = []
            for u in frontier:
                for w in adjacency[u]:
                    if w not in seen:
                        seen[w] = d
                        nxt.append(w)
            frontier = nxt
        for target, d in seen.items():
            dist[(source, target)] = d
    return dist


def chain(length: int, boundary: str = "open") -> LatticeGraph:
    """One-dimensional chain of `length` sites, open or periodic."""
    if not isinstance(length, int) or length < 1:
        raise ValueError(f"length must be a positive integer, got {length}")
    if boundary not in ("open", "periodic"):
        raise ValueError(f"boundary must be 'open' or 'periodic', got {boundary!r}")
    edges = [(i, i + 1) for i in range(length - 1)]
    if boundary == "periodic":
        if length < 3:
            raise ValueError("periodic chains need at least 3 sites")
        edges.append((length - 1, 0))
    return LatticeGraph(tuple(range(length)), tuple(edges), boundary=boundary)


# ---------------------------------------------------------------------------
# decay profile
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayFunction:
    """Stretched exponential xi_b(x) = exp(-b x**p), decreasing and
    logarithmically superadditive (xi(x+y) >= xi(x) xi(y))."""

    b: float = DEFAULT_DECAY_B
    p: float = DEFAULT_DECAY_P

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError(f"decay rate b must be positive, got {self.b}")
        if not 0 < self.p < 1:
            raise ValueError(f"stretch exponent p must lie in (0, 1), got {self.p}")

    def __call__(self, x: float) -> float:
        if x < 0:
            raise ValueError("decay argument must be non-negative")
        return math.exp(-self.b * x**self.p)


# ---------------------------------------------------------------------------
# interactions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PauliString:
    """Real multiple of a tensor product of single-site Paulis."""

    coeff: float
    sites: tuple[int, ...]
    labels: str

    def __post_init__(self):
        coeff = float(self.coeff)
        pairs = sorted(zip((int(s) for s in self.sites), self.labels))
        sites = tuple(s for s, _ in pairs)
        labels = "".join(l for _, l in pairs)
        if len(sites) != len(set(sites)):
            raise ValueError(f"duplicate sites in Pauli string: {self.sites}")
        if not sites:
            raise ValueError("Pauli string needs at least one site")
        if any(l not in PAULI_LABELS for l in labels):
            raise ValueError(f"labels must be drawn from X, Y, Z, got {self.labels!r}")
        object.__setattr__(self, "coeff", coeff)
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "labels", labels)

    def matrix(self) -> DenseOperator:
        op = string_matrix(self.sites, self.labels)
        return DenseOperator(op.sites, self.coeff * op.matrix)


@dataclass(frozen=True)
class InteractionTerm:
    """One interaction term: a support set and a sum of Pauli strings on it."""

    support: frozenset[int]
    strings: tuple[PauliString, ...]

    def __post_init__(self):
        support = frozenset(int(s) for s in self.support)
        strings = tuple(self.strings)
        if not strings:
            raise ValueError("interaction term needs at least one Pauli string")
        covered = frozenset(s for ps in strings for s in ps.sites)
        if covered != support:
            raise ValueError(
                f"term support {sorted(support)} must equal the sites carrying "
                f"non-identity Paulis {sorted(covered)}"
            )
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "strings", strings)

    def matrix(self) -> DenseOperator:
        sites = tuple(sorted(self.support))
        total = np.zeros((2 ** len(sites), 2 ** len(sites)), dtype=complex)
        for ps in self.strings:
            total += embed(ps.matrix(), sites).matrix
        return DenseOperator(sites, total)

    def norm(self) -> float:
        # one Pauli string: spectral norm is |coeff| (Paulis are unitary)
        if len(self.strings) == 1:
            return abs(self.strings[0].coeff)
        return operator_norm(self.matrix().matrix)


def term(coeff: float, sites, labels: str) -> InteractionTerm:
    """Single-string term helper."""
    ps = PauliString(coeff, tuple(sites), labels)
    return InteractionTerm(frozenset(ps.sites), (ps,))


@dataclass(frozen=True)
class Interaction:
    """Finite collection of Hermitian terms keyed by their supports."""

    terms: tuple[InteractionTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    def __len__(self) -> int:
        return len(self.terms)

    def support(self) -> frozenset[int]:
        return frozenset(s for t in self.terms for s in t.support)

    def by_support(self) -> dict[frozenset[int], list[InteractionTerm]]:
        grouped: dict[frozenset[int], list[InteractionTerm]] = {}
        for t in self.terms:
            grouped.setdefault(t.support, []).append(t)
        return grouped


@dataclass(frozen=True)
class Decomposition:
    """Partition of an interaction's terms into k layers."""

    layers: tuple[Interaction, ...]
    commuting: bool = False

    @property
    def k(self) -> int:
        return len(self.layers)


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def _support_norms(phi: Interaction) -> dict[frozenset[int], float]:
    norms = {}
    for support, terms in phi.by_support().items():
        if len(terms) == 1:
            norms[support] = terms[0].norm()
        else:
            sites = tuple(sorted(support))
            total = np.zeros((2 ** len(sites),) * 2, dtype=complex)
            for t in terms:
                total += t.matrix().matrix
            norms[support] = operator_norm(total)
    return norms


def interaction_norm(phi: Interaction, decay: DecayFunction, graph: LatticeGraph) -> float:
    """sup over sites x of sum_{X containing x} ||Phi(X)|| / xi_b(D(X))."""
    norms = _support_norms(phi)
    weights = {X: n / decay(graph.diameter(X)) for X, n in norms.items()}
    return _sup_site_sum(weights, graph)


def anchored_norm(phi: Interaction, decay: DecayFunction, Z, graph: LatticeGraph) -> float:
    """Interaction norm weighted by D_Z(X) = D(X) + d(X, Z) instead of D(X)."""
    Z = _as_set(Z)
    norms = _support_norms(phi)
    weights = {X: n / decay(graph.anchored_diameter(X, Z)) for X, n in norms.items()}
    return _sup_site_sum(weights, graph)


def _sup_site_sum(weights: dict[frozenset[int], float], graph: LatticeGraph) -> float:
    best = 0.0
    for x in graph.vertices:
        total = math.fsum(w for X, w in weights.items() if x in X)
        best = max(best, total)
    return best


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------

def assemble(phi: Interaction, region, cap: int | None = None) -> DenseOperator:
    """Sum of all terms supported inside `region`, embedded on its Hilbert space.

    Terms reaching outside the region are dropped with a warning.  Raises
    ResourceCapError when the region exceeds the dense site cap.
    """
    region = tuple(sorted(int(s) for s in region))
    check_site_cap(len(region), cap)
    region_set = set(region)
    total = np.zeros((2 ** len(region),) * 2, dtype=complex)
    dropped = 0
    for t in phi.terms:
        if not t.support <= region_set:
            dropped += 1
            continue
        total += embed(t.matrix(), region).matrix
    if dropped:
        warnings.warn(
            f"dropped {dropped} term(s) not supported inside the region",
            stacklevel=2,
        )
    return DenseOperator(region, total)


# ---------------------------------------------------------------------------
# decompositions
# ---------------------------------------------------------------------------

def decompose_even_odd(phi: Interaction, graph: LatticeGraph) -> Decomposition:
    """Two commuting layers of nearest-neighbour edge terms on a chain.

    Edges {2x, 2x+1} form layer 1 and {2x+1, 2x+2} layer 2.  Every term must
    be supported on exactly one edge of the chain.
    """
    length = len(graph.vertices)
    edge_set = set(graph.edges)
    layers: tuple[list[InteractionTerm], list[InteractionTerm]] = ([], [])
    for t in phi.terms:
        support = tuple(sorted(t.support))
        if len(support) != 2 or support not in edge_set:
            raise ValueError(
                f"even/odd decomposition requires edge terms, got support {support}"
            )
        u, v = support
        if graph.boundary == "periodic" and (u, v) == (0, length - 1):
            left = length - 1
        else:
            left = u
        layers[left % 2].append(t)
    for layer in layers:
        seen: set[int] = set()
        for t in layer:
            if t.support & seen:
                raise ValueError(
                    "even/odd layers are not support-disjoint "
                    "(odd-length periodic chains cannot be two-coloured)"
                )
            seen |= t.support
    return Decomposition(
        layers=(Interaction(tuple(layers[0])), Interaction(tuple(layers[1]))),
        commuting=True,
    )


def decompose_greedy_coloring(phi: Interaction) -> Decomposition:
    """Greedy partition into layers whose terms have pairwise disjoint supports."""
    layers: list[list[InteractionTerm]] = []
    occupied: list[set[int]] = []
    for t in phi.terms:
        for layer, used in zip(layers, occupied):
            if not (t.support & used):
                layer.append(t)
                used |= t.support
                break
        else:
            layers.append([t])
            occupied.append(set(t.support))
    return Decomposition(
        layers=tuple(Interaction(tuple(layer)) for layer in layers),
        commuting=True,
    )


# ---------------------------------------------------------------------------
# truncation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TruncationBoundReport:
    """Both sides of the truncation norm bound at one range R."""

    radius: int
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


def truncate(phi: Interaction, radius: int, graph: LatticeGraph) -> Interaction:
    """Keep only terms whose support diameter is at most `radius`."""
    if radius < 0:
        raise ValueError("radius must be non-negative")
    kept = tuple(t for t in phi.terms if graph.diameter(t.support) <= radius)
    return Interaction(kept)


def truncation_bound_check(
    phi: Interaction,
    radius: int,
    decay: DecayFunction,
    b_prime: float,
    graph: LatticeGraph,
) -> TruncationBoundReport:
    """Check ||Phi_R - Phi||_{b'} <= xi_{b-b'}(R+1) ||Phi||_b (same stretch p)."""
    if not 0 < b_prime < decay.b:
        raise ValueError(f"b' must satisfy 0 < b' < b = {decay.b}, got {b_prime}")
    dropped = Interaction(
        tuple(t for t in phi.terms if graph.diameter(t.support) > radius)
    )
    weaker = DecayFunction(b=b_prime, p=decay.p)
    gap = DecayFunction(b=decay.b - b_prime, p=decay.p)
    lhs = interaction_norm(dropped, weaker, graph) if dropped.terms else 0.0
    rhs = gap(radius + 1) * interaction_norm(phi, decay, graph)
    return TruncationBoundReport(radius=radius, lhs=lhs, rhs=rhs)


# ---------------------------------------------------------------------------
# derivation on interactions
# ---------------------------------------------------------------------------

def derivation(
    phi: Interaction, psi: Interaction, cleanup_tol: float = DERIVATION_CLEANUP_TOL
) -> Interaction:
    """Interaction X -> sum over overlapping pairs Y u Y' = X of i [Phi(Y), Psi(Y')].

    Each commutator is computed densely on the union support and re-expanded
    in the Pauli basis; coefficients below `cleanup_tol` are dropped.  Pairs
    with disjoint supports commute and are skipped.
    """
    collected: dict[frozenset[int], dict[tuple, float]] = {}
    for t_phi in phi.terms:
        for t_psi in psi.terms:
            if not (t_phi.support & t_psi.support):
                continue
            union = t_phi.support | t_psi.support
            sites = tuple(sorted(union))
            a = embed(t_phi.matrix(), sites).matrix
            b = embed(t_psi.matrix(), sites).matrix
            comm = 1j * (a @ b - b @ a)
            bucket = collected.setdefault(union, {})
            for coeff, pairs in pauli_decompose(DenseOperator(sites, comm), cleanup_tol):
                if abs(coeff.imag) > 1e-10:
                    raise AssertionError("commutator of Hermitian terms must be Hermitian")
                bucket[pairs] = bucket.get(pairs, 0.0) + coeff.real
    terms = []
    for union in sorted(collected, key=sorted):
        strings = []
        for pairs, coeff in sorted(collected[union].items()):
            if abs(coeff) < cleanup_tol or not pairs:
                continue
            sites = tuple(s for s, _ in pairs)
            labels = "".join(l for _, l in pairs)
            strings.append(PauliString(coeff, sites, labels))
        if not strings:
            continue
        covered = frozenset(s for ps in strings for s in ps.sites)
        terms.append(InteractionTerm(covered, tuple(strings)))
    return Interaction(tuple(terms))


# ---------------------------------------------------------------------------
# model container and config files
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpinModel:
    """A lattice, its interaction, the decay profile and a default observable."""

    graph: LatticeGraph
    interaction: Interaction
    decay: DecayFunction
    observable: PauliString | None = None
    name: str = "model"

    def observable_or_raise(self) -> PauliString:
        if self.observable is None:
            raise ValueError(f"model {self.name!r} does not define an observable")
        return self.observable


def _reject_unknown(mapping: dict, allowed: set[str], context: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ValueError(f"unknown field(s) {sorted(unknown)} in {context}")


def parse_model(data: dict, name: str = "model") -> SpinModel:
    """Build a SpinModel from the config mapping; unknown fields are rejected."""
    if not isinstance(data, dict):
        raise ValueError("model config must be a mapping")
    _reject_unknown(data, {"lattice", "decay", "terms", "observable"}, "model config")

    lattice = data.get("lattice")
    if not isinstance(lattice, dict):
        raise ValueError("model config requires a 'lattice' mapping")
    _reject_unknown(lattice, {"type", "length", "boundary"}, "lattice")
    if lattice.get("type") != "chain":
        raise ValueError(f"unsupported lattice type {lattice.get('type')!r}")
    graph = chain(lattice["length"], lattice.get("boundary", "open"))

    decay_cfg = data.get("decay", {})
    if not isinstance(decay_cfg, dict):
        raise ValueError("'decay' must be a mapping")
    _reject_unknown(decay_cfg, {"b", "p"}, "decay")
    decay = DecayFunction(
        b=decay_cfg.get("b", DEFAULT_DECAY_B), p=decay_cfg.get("p", DEFAULT_DECAY_P)
    )

    terms = []
    for i, entry in enumerate(data.get("terms", [])):
        if not isinstance(entry, dict):
            raise ValueError(f"terms[{i}] must be a mapping")
        _reject_unknown(entry, {"sites", "pauli", "coeff"}, f"terms[{i}]")
        terms.append(term(entry["coeff"], entry["sites"], entry["pauli"]))
        if not terms[-1].support <= set(graph.vertices):
            raise ValueError(f"terms[{i}] uses sites outside the lattice")

    observable = None
    if "observable" in data:
        obs = data["observable"]
        if not isinstance(obs, dict):
            raise ValueError("'observable' must be a mapping")
        _reject_unknown(obs, {"sites", "pauli", "coeff"}, "observable")
        observable = PauliString(obs.get("coeff", 1.0), tuple(obs["sites"]), obs["pauli"])
        if not set(observable.sites) <= set(graph.vertices):
            raise ValueError("observable uses sites outside the lattice")

    return SpinModel(
        graph=graph,
        interaction=Interaction(tuple(terms)),
        decay=decay,
        observable=observable,
        name=name,
    )


def load_model(path) -> SpinModel:
    """Read a JSON model config file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"model file {path} is not valid JSON: {exc}") from None
    return parse_model(data, name=os.path.splitext(os.path.basename(str(path)))[0])
