"""Exact dense Hilbert-space backend: exponentials, Heisenberg evolution,
schedule execution, conditional expectations and spectral-norm errors.

Observables are evolved (Heisenberg picture).  Exponentials come from the
eigendecomposition of the Hermitian generator, so one eigensolve per layer
serves every signed duration a schedule requests.
"""

from __future__ import annotations

import numpy as np

from .dense import (
    DenseOperator,
    ResourceCapError,
    check_site_cap,
    embed,
    operator_norm,
    partial_trace,
    permute_qubit_order,
)
from .model import Decomposition, LatticeGraph, assemble
from .schedule import ProductSchedule

__all__ = [
    "DenseOperator",
    "ResourceCapError",
    "EvolutionPlan",
    "expm_hermitian",
    "heisenberg",
    "run_schedule",
    "conditional_expectation",
    "leakage_profile",
    "error_norm",
    "dump_operator",
]

HERMITICITY_TOL = 1e-12
UNITARITY_TOL = 1e-11


def _require_hermitian(op: DenseOperator, what: str) -> None:
    if not op.is_hermitian(HERMITICITY_TOL):
        raise ValueError(f"{what} must be Hermitian")


def expm_hermitian(hamiltonian: DenseOperator, t: float) -> DenseOperator:
    """exp(i t H) for Hermitian H, via eigendecomposition."""
    _require_hermitian(hamiltonian, "generator")
    check_site_cap(hamiltonian.n_sites)
    eigvals, eigvecs = np.linalg.eigh(hamiltonian.matrix)
    phases = np.exp(1j * t * eigvals)
    unitary = (eigvecs * phases) @ eigvecs.conj().T
    return DenseOperator(hamiltonian.sites, unitary)


def heisenberg(hamiltonian: DenseOperator, t: float, observable: DenseOperator) -> DenseOperator:
    """exp(i t H) O exp(-i t H); O is embedded onto H's sites if smaller."""
    observable = embed(observable, hamiltonian.sites)
    u = expm_hermitian(hamiltonian, t).matrix
    return DenseOperator(hamiltonian.sites, u @ observable.matrix @ u.conj().T)


class EvolutionPlan:
    """Cached layer exponentials for executing product schedules.

    One eigensolve per layer is shared by all durations; unitaries are
    memoized per (layer, duration).  Inserts are idempotent, so the cache is
    safe to share across threads evaluating independent (n, t) samples.
    """

    def __init__(self, decomposition: Decomposition, region, cap: int | None = None):
        self.region = tuple(sorted(int(s) for s in region))
        check_site_cap(len(self.region), cap)
        self.hamiltonians = [
            assemble(layer, self.region, cap) for layer in decomposition.layers
        ]
        self._eig = [np.linalg.eigh(h.matrix) for h in self.hamiltonians]
        self._cache: dict[tuple[int, float], np.ndarray] = {}

    @property
    def k(self) -> int:
        return len(self.hamiltonians)

    def unitary(self, layer: int, duration: float) -> np.ndarray:
        """exp(i * duration * K_layer); `layer` is 1-based."""
        key = (layer, float(duration))
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        eigvals, eigvecs = self._eig[layer - 1]
        u = (eigvecs * np.exp(1j * duration * eigvals)) @ eigvecs.conj().T
        defect = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
        if defect >= UNITARITY_TOL:
            raise AssertionError(f"cached exponential lost unitarity ({defect:.2e})")
        self._cache[key] = u
        return u

    def step_unitary(self, schedule: ProductSchedule, mu: float) -> np.ndarray:
        """Conjugating unitary of one schedule step of size mu.

        Entries are in application order, so the first entry contributes the
        rightmost (innermost) factor.
        """
        if schedule.k != self.k:
            raise ValueError(
                f"schedule has k={schedule.k} but decomposition has {self.k} layers"
            )
        u = np.eye(2 ** len(self.region), dtype=complex)
        for layer, fraction in schedule.entries:
            u = self.unitary(layer, fraction * mu) @ u
        return u

    def run(
        self, schedule: ProductSchedule, mu: float, n: int, observable: DenseOperator
    ) -> DenseOperator:
        """Apply n schedule steps of size mu to the observable."""
        if not isinstance(n, int) or n < 0:
            raise ValueError(f"step count n must be a non-negative integer, got {n}")
        observable = embed(observable, self.region)
        u = np.linalg.matrix_power(self.step_unitary(schedule, mu), n)
        return DenseOperator(self.region, u @ observable.matrix @ u.conj().T)


def run_schedule(
    decomposition: Decomposition,
    schedule: ProductSchedule,
    mu: float,
    n: int,
    observable: DenseOperator,
    region,
) -> DenseOperator:
    """One-shot schedule execution; build an EvolutionPlan to amortize caches."""
    return EvolutionPlan(decomposition, region).run(schedule, mu, n, observable)


def conditional_expectation(op: DenseOperator, keep, region=None) -> DenseOperator:
    """Normalized partial trace onto the sites `keep`, re-embedded with identity.

    Idempotent, unital and norm-contractive; leaves operators supported in
    `keep` unchanged.
    """
    if region is not None:
        op = embed(op, region)
    keep = tuple(sorted(int(s) for s in keep))
    if any(s not in op.sites for s in keep):
        raise ValueError(f"conditioning sites {keep} not contained in {op.sites}")
    complement = [s for s in op.sites if s not in keep]
    if not complement:
        return op
    reduced = partial_trace(op, keep)
    normalized = reduced.matrix / 2 ** len(complement)
    big = np.kron(normalized, np.eye(2 ** len(complement), dtype=complex))
    big = permute_qubit_order(big, keep + tuple(complement), op.sites)
    return DenseOperator(op.sites, big)


def leakage_profile(op: DenseOperator, anchor, graph: LatticeGraph, region=None):
    """Spectral norms of (E_{anchor^(r)} - id)(op) for r = 0 .. max distance.

    The last entry is exactly zero since the largest fattening covers the
    whole region.
    """
    region = tuple(sorted(region)) if region is not None else op.sites
    op = embed(op, region)
    anchor = frozenset(int(s) for s in anchor)
    radius_max = max(min(graph.distance(v, a) for a in anchor) for v in region)
    profile = []
    for radius in range(radius_max + 1):
        inside = sorted(s for s in graph.fatten(anchor, radius) if s in region)
        projected = conditional_expectation(op, inside)
        profile.append((radius, operator_norm(projected.matrix - op.matrix)))
    return profile


def error_norm(a: DenseOperator, b: DenseOperator) -> float:
    """Spectral norm of a - b."""
    if a.sites != b.sites:
        raise ValueError(f"operators live on different sites: {a.sites} vs {b.sites}")
    return operator_norm(a.matrix - b.matrix)


def dump_operator(op: DenseOperator, path) -> None:
    """Debug dump: row-major (real, imag) pairs of little-endian doubles."""
    data = np.ascontiguousarray(op.matrix.astype("<c16"))
    with open(path, "wb") as fh:
        fh.write(data.tobytes())
