"""Qudit operator algebra and composite-system bookkeeping.

Operators and states are plain ``numpy`` arrays (dense, ``complex128``).
A :class:`SubsystemLayout` fixes the tensor-product ordering once so that
every operator and state built against it agrees on indexing: site 0 is
the most significant factor, i.e. the global basis index is
``sum(level[s] * stride[s])`` with strides decreasing left to right,
exactly the ``numpy.kron`` convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "SubsystemLayout",
    "lowering_op",
    "projector_op",
    "annihilation_op",
    "embed",
    "product_state",
    "logical_basis",
    "assert_hermitian",
    "check_state_vector",
    "check_density_matrix",
]

HERMITICITY_TOL = 1e-12


@dataclass(frozen=True)
class SubsystemLayout:
    """Ordered collection of qudit sites forming one Hilbert space.

    ``dims`` defaults to three levels per site; two-level layouts are
    allowed for cross-checks against qubit formulas.
    """

    labels: tuple[str, ...]
    dims: tuple[int, ...] = ()

    def __post_init__(self):
        labels = tuple(self.labels)
        dims = tuple(self.dims) if self.dims else (3,) * len(labels)
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate site labels in {labels}")
        if len(dims) != len(labels):
            raise ValueError("dims and labels must have equal length")
        if any(d < 2 for d in dims):
            raise ValueError("every site needs at least 2 levels")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dims", dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def strides(self) -> tuple[int, ...]:
        out = []
        s = 1
        for d in reversed(self.dims):
            out.append(s)
            s *= d
        return tuple(reversed(out))

    def site_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"unknown site label {label!r}; layout has {self.labels}") from None

    def dim_of(self, label: str) -> int:
        return self.dims[self.site_index(label)]

    def basis_index(self, levels: Mapping[str, int] | Sequence[int]) -> int:
        """Global index of the product state with the given per-site levels.

        Unlisted sites are taken in their ground state when ``levels`` is a
        mapping; a sequence must cover every site in layout order.
        """
        if isinstance(levels, Mapping):
            unknown = set(levels) - set(self.labels)
            if unknown:
                raise ValueError(f"unknown site labels {sorted(unknown)}")
            seq = [levels.get(lbl, 0) for lbl in self.labels]
        else:
            seq = list(levels)
            if len(seq) != len(self.labels):
                raise ValueError("level sequence must cover every site")
        idx = 0
        for lvl, d, stride in zip(seq, self.dims, self.strides):
            if not 0 <= lvl < d:
                raise ValueError(f"level {lvl} out of range for a {d}-level site")
            idx += lvl * stride
        return idx

    def site_levels(self, label: str) -> np.ndarray:
        """Local level of site ``label`` for every global basis index."""
        s = self.site_index(label)
        return (np.arange(self.total_dim) // self.strides[s]) % self.dims[s]


def lowering_op(k: int, d: int) -> np.ndarray:
    """Single-step lowering operator ``|k-1><k|`` in dimension ``d``."""
    if not 1 <= k <= d - 1:
        raise ValueError(f"lowering index k={k} must satisfy 1 <= k <= d-1={d - 1}")
    op = np.zeros((d, d), dtype=complex)
    op[k - 1, k] = 1.0
    return op


def projector_op(k: int, d: int) -> np.ndarray:
    """Level projector ``|k><k|`` in dimension ``d``."""
    if not 0 <= k <= d - 1:
        raise ValueError(f"level index k={k} must satisfy 0 <= k <= d-1={d - 1}")
    op = np.zeros((d, d), dtype=complex)
    op[k, k] = 1.0
    return op


def annihilation_op(d: int) -> np.ndarray:
    """Truncated ladder operator ``sum_k sqrt(k) |k-1><k|``.

    The sqrt(k) weights set the relative strength of the
    ``|k> <-> |k-1>`` transitions of a weakly anharmonic oscillator.
    """
    op = np.zeros((d, d), dtype=complex)
    for k in range(1, d):
        op[k - 1, k] = np.sqrt(k)
    return op


def embed(op: np.ndarray, site: str, layout: SubsystemLayout) -> np.ndarray:
    """Extend a single-site operator by identity on every other site."""
    s = layout.site_index(site)
    d = layout.dims[s]
    op = np.asarray(op, dtype=complex)
    if op.shape != (d, d):
        raise ValueError(f"operator shape {op.shape} does not match the {d}-level site {site!r}")
    left = int(np.prod(layout.dims[:s], initial=1))
    right = int(np.prod(layout.dims[s + 1 :], initial=1))
    return np.kron(np.kron(np.eye(left), op), np.eye(right)).astype(complex)


def product_state(layout: SubsystemLayout, levels: Mapping[str, int] | Sequence[int]) -> np.ndarray:
    """Computational product state; unlisted sites sit in their ground state."""
    vec = np.zeros(layout.total_dim, dtype=complex)
    vec[layout.basis_index(levels)] = 1.0
    return vec


# Default site names used by the encodings: a logical qubit is one excitation
# shared by a pair of transmons, so the single-qubit code S1 lives on (T1, T2)
# and the two-qubit code S2 on (T1, T2) x (T3, T4).
_S1_SITES = ("T1", "T2")
_S2_SITES = ("T1", "T2", "T3", "T4")


def logical_basis(
    encoding: str,
    layout: SubsystemLayout,
    transmons: Sequence[str] | None = None,
) -> list[np.ndarray]:
    """Ordered orthonormal basis of the requested decoherence-free code.

    ``"S1"`` returns ``[|0>_L, |1>_L] = [|10>, |01>]`` on the first pair;
    ``"S2"`` returns ``[|00>_L, |01>_L, |10>_L, |11>_L] =
    [|1010>, |1001>, |0110>, |0101>]`` on two pairs. All other sites are in
    their ground state.
    """
    if encoding == "S1":
        sites = tuple(transmons) if transmons is not None else _S1_SITES
        if len(sites) != 2:
            raise ValueError("S1 encoding needs exactly two transmons")
        patterns = [(1, 0), (0, 1)]
    elif encoding == "S2":
        sites = tuple(transmons) if transmons is not None else _S2_SITES
        if len(sites) != 4:
            raise ValueError("S2 encoding needs exactly four transmons")
        patterns = [(1, 0, 1, 0), (1, 0, 0, 1), (0, 1, 1, 0), (0, 1, 0, 1)]
    else:
        raise ValueError(f"unknown encoding {encoding!r}; expected 'S1' or 'S2'")
    for lbl in sites:
        if lbl not in layout.labels:
            raise ValueError(f"layout is missing transmon {lbl!r} required by {encoding}")
    return [product_state(layout, dict(zip(sites, pat))) for pat in patterns]


def assert_hermitian(op: np.ndarray, tol: float = HERMITICITY_TOL) -> None:
    dev = np.max(np.abs(op - op.conj().T))
    if dev > tol:
        raise ValueError(f"operator deviates from Hermiticity by {dev:.3e} (tol {tol:.1e})")


def check_state_vector(psi: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise ValueError("state vector must be one-dimensional")
    if abs(np.linalg.norm(psi) - 1.0) > tol:
        raise ValueError(f"state vector norm {np.linalg.norm(psi)} is not 1 within {tol:.1e}")
    return psi


def check_density_matrix(rho: np.ndarray, tol: float = 1e-12, eig_tol: float = -1e-10) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    assert_hermitian(rho, tol)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise ValueError(f"density matrix trace {tr} is not 1 within {tol:.1e}")
    if np.linalg.eigvalsh(rho).min() < eig_tol:
        raise ValueError("density matrix has a significantly negative eigenvalue")
    return rho
