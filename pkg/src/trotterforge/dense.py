"""Dense multi-qubit primitives: Pauli strings, Kronecker embedding, partial traces.

Site-ordering convention used everywhere in this package: a region is a
strictly increasing tuple of vertex indices, and the site with the lowest
index is the most significant tensor factor.  All golden values depend on
this ordering.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass

import numpy as np

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}

DEFAULT_SITE_CAP = 14
CAP_ENV_VAR = "TROTTERFORGE_DENSE_CAP"


class ResourceCapError(RuntimeError):
    """Raised when a dense computation would exceed the configured site cap."""


def dense_site_cap() -> int:
    """Maximum number of sites the dense backend accepts (env-overridable)."""
    raw = os.environ.get(CAP_ENV_VAR)
    if raw is None:
        return DEFAULT_SITE_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"{CAP_ENV_VAR} must be an integer, got {raw!r}") from None
    if cap < 1:
        raise ValueError(f"{CAP_ENV_VAR} must be positive, got {cap}")
    return cap


def check_site_cap(n_sites: int, cap: int | None = None) -> None:
    limit = dense_site_cap() if cap is None else cap
    if n_sites > limit:
        raise ResourceCapError(
            f"{n_sites} sites exceed the dense backend cap of {limit} "
            f"(override with {CAP_ENV_VAR})"
        )


@dataclass(frozen=True, eq=False)
class DenseOperator:
    """Complex matrix on the Hilbert space of a site tuple.

    `sites` must be strictly increasing; `matrix` has shape (2**n, 2**n).
    """

    sites: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        sites = tuple(int(s) for s in self.sites)
        if any(a >= b for a, b in zip(sites, sites[1:])):
            raise ValueError(f"sites must be strictly increasing, got {sites}")
        matrix = np.asarray(self.matrix, dtype=complex)
        dim = 2 ** len(sites)
        if matrix.shape != (dim, dim):
            raise ValueError(
                f"matrix shape {matrix.shape} does not match {len(sites)} sites"
            )
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "matrix", matrix)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T))) < tol


def identity_on(sites) -> DenseOperator:
    sites = tuple(sorted(int(s) for s in sites))
    return DenseOperator(sites, np.eye(2 ** len(sites), dtype=complex))


def string_matrix(sites, labels: str) -> DenseOperator:
    """Dense operator for a Pauli string, e.g. string_matrix((0, 2), "ZX")."""
    if len(sites) != len(labels):
        raise ValueError("one Pauli label per site required")
    pairs = sorted(zip((int(s) for s in sites), labels))
    if len({s for s, _ in pairs}) != len(pairs):
        raise ValueError(f"duplicate sites in {sites}")
    matrix = np.array([[1.0 + 0.0j]])
    for _, label in pairs:
        if label not in PAULI:
            raise ValueError(f"unknown Pauli label {label!r}")
        matrix = np.kron(matrix, PAULI[label])
    return DenseOperator(tuple(s for s, _ in pairs), matrix)


def permute_qubit_order(matrix: np.ndarray, src: tuple[int, ...], dst: tuple[int, ...]) -> np.ndarray:
    """Reorder tensor factors of `matrix` from site order `src` to `dst`."""
    if set(src) != set(dst):
        raise ValueError("source and destination site sets differ")
    n = len(src)
    if src == dst:
        return matrix
    axes = [src.index(s) for s in dst]
    tensor = matrix.reshape((2,) * (2 * n))
    tensor = tensor.transpose(axes + [n + a for a in axes])
    return tensor.reshape(2**n, 2**n)


def embed(op: DenseOperator, region) -> DenseOperator:
    """Embed `op` (tensored with identity) on the larger sorted `region`."""
    region = tuple(sorted(int(s) for s in region))
    missing = [s for s in region if s not in op.sites]
    if len(missing) + op.n_sites != len(region):
        raise ValueError(f"operator sites {op.sites} not contained in region {region}")
    if not missing:
        return DenseOperator(region, op.matrix)
    big = np.kron(op.matrix, np.eye(2 ** len(missing), dtype=complex))
    big = permute_qubit_order(big, op.sites + tuple(missing), region)
    return DenseOperator(region, big)


def partial_trace(op: DenseOperator, keep) -> DenseOperator:
    """Trace out all sites of `op` not in `keep` (unnormalized)."""
    keep = tuple(sorted(int(s) for s in keep))
    if any(s not in op.sites for s in keep):
        raise ValueError(f"keep sites {keep} not contained in {op.sites}")
    traced = [i for i, s in enumerate(op.sites) if s not in keep]
    n = op.n_sites
    tensor = op.matrix.reshape((2,) * (2 * n))
    # trace highest axis first so earlier indices stay valid
    remaining = n
    for i in reversed(traced):
        tensor = np.trace(tensor, axis1=i, axis2=i + remaining)
        remaining -= 1
    dim = 2 ** len(keep)
    return DenseOperator(keep, tensor.reshape(dim, dim))


def operator_norm(matrix: np.ndarray) -> float:
    """Spectral norm; Hermitian eigensolve with an SVD fallback."""
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.size == 0:
        return 0.0
    scale = float(np.max(np.abs(matrix)))
    if scale == 0.0:
        return 0.0
    if float(np.max(np.abs(matrix - matrix.conj().T))) < 1e-11 * max(scale, 1.0):
        return float(np.max(np.abs(np.linalg.eigvalsh(matrix))))
    return float(np.linalg.svd(matrix, compute_uv=False)[0])


def pauli_decompose(op: DenseOperator, tol: float = 1e-14):
    """Expand a dense operator in the Pauli-string basis of its sites.

    Returns a list of (coefficient, ((site, label), ...)) with the identity
    string keyed by an empty tuple; coefficients below `tol` are dropped.
    """
    n = op.n_sites
    dim = op.dim
    out = []
    for labels in itertools.product("IXYZ", repeat=n):
        basis = np.array([[1.0 + 0.0j]])
        for label in labels:
            basis = np.kron(basis, PAULI[label])
        coeff = complex(np.sum(basis.T * op.matrix)) / dim
        if abs(coeff) < tol:
            continue
        support = tuple(
            (site, label) for site, label in zip(op.sites, labels) if label != "I"
        )
        out.append((coeff, support))
    return out
