"""Density operators and measurement: Born probabilities, expectation and
deviation, collapse, sequential chains, tomographic state recovery, and a
witness that no state is two-valued on the projector lattice.
"""
from __future__ import annotations

from collections import namedtuple

import numpy as np

from .lattice import Projector
from .linalg import (
    DEFAULT_TOL,
    DimensionMismatch,
    HermitianOperator,
    as_matrix,
    eig_hermitian,
    frobenius,
    require_square,
)

PROB_FLOOR = 1e-12

_PHASE_FLOOR = 1e-12


class ZeroProbability(ValueError):
    def __init__(self, probability):
        super().__init__(
            f"event probability {probability:.3e} is below the floor; "
            "conditioning on it is undefined"
        )
        self.probability = float(probability)


class UnderdeterminedFrame(ValueError):
    def __init__(self, rank, needed):
        super().__init__(
            f"projector frame spans only {rank} of the {needed} real "
            "dimensions of the Hermitian matrices"
        )
        self.rank = int(rank)
        self.needed = int(needed)


class InconsistentAssignments(ValueError):
    def __init__(self, residual):
        super().__init__(
            f"no density operator reproduces the assignments "
            f"(residual {residual:.3e})"
        )
        self.residual = float(residual)


class WitnessNotFound(RuntimeError):
    def __init__(self, best_probability):
        super().__init__(
            "witness search budget exhausted; best candidate probability "
            f"{best_probability:.3e}"
        )
        self.best_probability = float(best_probability)


class PureStateVector:
    """Unit vector with the global phase fixed: the first component larger
    than 1e-12 in modulus is made real positive, so ray equality is plain
    vector equality."""

    __slots__ = ("dim", "amplitudes")

    def __init__(self, amplitudes, tol=None):
        tol = DEFAULT_TOL if tol is None else float(tol)
        v = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(v.real)) or not np.all(np.isfinite(v.imag)):
            raise ValueError("amplitudes contain non-finite entries")
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > tol:
            raise ValueError(f"vector norm {norm} is not 1 within {tol}")
        v = v / norm
        idx = np.flatnonzero(np.abs(v) > _PHASE_FLOOR)
        lead = v[idx[0]]
        v = v * (lead.conj() / abs(lead))
        self.amplitudes = v
        self.amplitudes.setflags(write=False)
        self.dim = v.size

    @classmethod
    def normalized(cls, vector):
        v = np.asarray(vector, dtype=complex).reshape(-1)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(v / norm)

    def __repr__(self):
        return f"PureStateVector(dim={self.dim})"


class DensityState:
    """Positive unit-trace operator."""

    __slots__ = ("dim", "matrix")

    def __init__(self, matrix, tol=None):
        tol = DEFAULT_TOL if tol is None else float(tol)
        M = require_square(as_matrix(matrix))
        herm = frobenius(M - M.conj().T)
        if herm > tol * max(1.0, frobenius(M)):
            raise ValueError(f"density matrix not Hermitian (defect {herm:.3e})")
        M = (M + M.conj().T) / 2.0
        eigmin = float(np.linalg.eigvalsh(M)[0])
        if eigmin < -tol:
            raise ValueError(f"density matrix has eigenvalue {eigmin:.3e} < 0")
        tr = float(M.trace().real)
        if abs(tr - 1.0) > tol:
            raise ValueError(f"density matrix trace {tr} is not 1")
        self.matrix = M
        self.matrix.setflags(write=False)
        self.dim = M.shape[0]

    @classmethod
    def from_vector(cls, psi):
        if not isinstance(psi, PureStateVector):
            psi = PureStateVector(psi)
        v = psi.amplitudes
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, dim):
        return cls(np.eye(dim) / dim)

    def __repr__(self):
        return f"DensityState(dim={self.dim})"


def _proj_matrix(P):
    return P.matrix if isinstance(P, Projector) else as_matrix(P)


def _herm_matrix(A):
    return A.matrix if isinstance(A, HermitianOperator) else as_matrix(A)


def _check_dim(rho, M):
    if rho.dim != M.shape[0]:
        raise DimensionMismatch(
            f"state dim {rho.dim} vs operator dim {M.shape[0]}"
        )


def born_probability(rho: DensityState, P, tol=None) -> float:
    """tr(rho P), clamped to [0, 1] after checking it is within tol of it."""
    tol = DEFAULT_TOL if tol is None else float(tol)
    M = _proj_matrix(P)
    _check_dim(rho, M)
    p = float((rho.matrix @ M).trace().real)
    if p < -tol or p > 1.0 + tol:
        raise ValueError(f"probability {p} outside [0,1] beyond tolerance")
    return min(max(p, 0.0), 1.0)


def expectation(rho: DensityState, A) -> float:
    M = _herm_matrix(A)
    _check_dim(rho, M)
    return float((rho.matrix @ M).trace().real)


def std_deviation(rho: DensityState, A, tol=None) -> float:
    """sqrt(<A^2> - <A>^2); the radicand is clamped to 0 when within -tol."""
    tol = DEFAULT_TOL if tol is None else float(tol)
    M = _herm_matrix(A)
    _check_dim(rho, M)
    mean = float((rho.matrix @ M).trace().real)
    second = float((rho.matrix @ M @ M).trace().real)
    radicand = second - mean * mean
    if radicand < -tol:
        raise ValueError(f"variance came out {radicand:.3e} < 0")
    return float(np.sqrt(max(radicand, 0.0)))


def luders_collapse(rho: DensityState, P, prob_floor=PROB_FLOOR) -> DensityState:
    """Post-measurement state P rho P / tr(rho P)."""
    M = _proj_matrix(P)
    _check_dim(rho, M)
    p = float((rho.matrix @ M).trace().real)
    if p <= prob_floor:
        raise ZeroProbability(p)
    return DensityState(M @ rho.matrix @ M.conj().T / p)


SequentialProbability = namedtuple(
    "SequentialProbability", ["value", "reversed_value"]
)


def _chain_probability(rho, mats):
    acc = mats[0]
    for M in mats[1:]:
        acc = M @ acc
    p = float((acc @ rho.matrix @ acc.conj().T).trace().real)
    return min(max(p, 0.0), 1.0)


def sequential_probability(rho: DensityState, chain) -> SequentialProbability:
    """Probability of a chain of outcomes measured first-to-last:
    tr(Pn ... P1 rho P1 ... Pn). The reversed-order value rides along, since
    for non-commuting chains the order matters."""
    mats = [_proj_matrix(P) for P in chain]
    if not mats:
        raise ValueError("empty measurement chain")
    for M in mats:
        _check_dim(rho, M)
    return SequentialProbability(
        _chain_probability(rho, mats),
        _chain_probability(rho, mats[::-1]),
    )


def conditional_probability(rho: DensityState, target, given,
                            prob_floor=PROB_FLOOR) -> float:
    """Probability of target right after given succeeded: the two-step
    sequential probability divided by the probability of the condition."""
    p_given = born_probability(rho, given)
    if p_given <= prob_floor:
        raise ZeroProbability(p_given)
    joint = sequential_probability(rho, [given, target]).value
    return joint / p_given


def transition_probability(psi: PureStateVector, phi: PureStateVector) -> float:
    if psi.dim != phi.dim:
        raise DimensionMismatch(f"vector dims differ: {psi.dim} vs {phi.dim}")
    return float(abs(np.vdot(psi.amplitudes, phi.amplitudes)) ** 2)


def is_pure(rho: DensityState, tol=None) -> bool:
    """Extremality test rho^2 = rho."""
    tol = DEFAULT_TOL if tol is None else float(tol)
    return frobenius(rho.matrix @ rho.matrix - rho.matrix) <= tol


def purity(rho: DensityState) -> float:
    return float((rho.matrix @ rho.matrix).trace().real)


# --- tomography -----------------------------------------------------------

def tomography_frame(dim) -> list:
    """The standard informationally complete rank-1 family: basis rays e_j,
    then (e_j + e_k)/sqrt2 and (e_j + i e_k)/sqrt2 for j < k. Exactly dim^2
    projectors, in a fixed deterministic order."""
    eye = np.eye(dim)
    frame = [Projector(np.outer(eye[j], eye[j])) for j in range(dim)]
    for j in range(dim):
        for k in range(j + 1, dim):
            v = (eye[j] + eye[k]) / np.sqrt(2.0)
            frame.append(Projector(np.outer(v, v.conj())))
    for j in range(dim):
        for k in range(j + 1, dim):
            v = (eye[j] + 1j * eye[k]) / np.sqrt(2.0)
            frame.append(Projector(np.outer(v, v.conj())))
    return frame


def _herm_coordinate_row(P):
    """Row of real coefficients r with tr(T P) = r . theta, where theta is
    the real parametrization of Hermitian T: diagonal entries, then Re and
    Im of the upper triangle."""
    n = P.shape[0]
    row = [P[j, j].real for j in range(n)]
    for j in range(n):
        for k in range(j + 1, n):
            row.append(2.0 * P[k, j].real)
    for j in range(n):
        for k in range(j + 1, n):
            row.append(-2.0 * P[k, j].imag)
    return row


def _herm_from_coordinates(theta, n):
    T = np.zeros((n, n), dtype=complex)
    for j in range(n):
        T[j, j] = theta[j]
    pos = n
    for j in range(n):
        for k in range(j + 1, n):
            T[j, k] += theta[pos]
            T[k, j] += theta[pos]
            pos += 1
    for j in range(n):
        for k in range(j + 1, n):
            T[j, k] += 1j * theta[pos]
            T[k, j] += -1j * theta[pos]
            pos += 1
    return T


GleasonFit = namedtuple(
    "GleasonFit", ["state", "residual", "frame_rank", "dim_two_warning"]
)


def gleason_fit(assignments, fit_tol=1e-6) -> GleasonFit:
    """Recover the density operator behind projector-probability assignments.

    Linear least squares on the n^2 real parameters of a Hermitian matrix,
    then projection to the positive unit-trace set by eigenvalue clipping.
    The frame must be informationally complete (design-matrix rank n^2).
    The probability assignment on rays determines the state only from
    dimension 3 up, so dimension 2 is flagged in the result.
    """
    pairs = [(_proj_matrix(P), float(p)) for P, p in assignments]
    if not pairs:
        raise ValueError("no assignments given")
    n = pairs[0][0].shape[0]
    needed = n * n
    design = np.array([_herm_coordinate_row(P) for P, _ in pairs])
    probs = np.array([p for _, p in pairs])
    rank = int(np.linalg.matrix_rank(design, tol=1e-10 * max(1.0, n)))
    if rank < needed:
        raise UnderdeterminedFrame(rank, needed)
    theta, *_ = np.linalg.lstsq(design, probs, rcond=None)
    T = _herm_from_coordinates(theta, n)

    w, v = np.linalg.eigh(T)
    w = np.clip(w, 0.0, None)
    total = float(w.sum())
    if total <= PROB_FLOOR:
        raise InconsistentAssignments(1.0)
    T = (v * (w / total)) @ v.conj().T

    residual = max(
        abs(float((T @ P).trace().real) - p) for P, p in pairs
    )
    if residual > fit_tol:
        raise InconsistentAssignments(residual)
    return GleasonFit(DensityState(T), residual, rank, n == 2)


def kochen_specker_witness(rho: DensityState, delta=0.01, seed=42,
                           max_tries=500) -> Projector:
    """A rank-1 projector P with delta <= tr(rho P) <= 1 - delta, certifying
    that the state is not a two-valued (0/1) assignment.

    Deterministic first candidate: the normalized sum of the top and bottom
    eigenvectors; falls back to a seeded random search over the eigenbasis.
    """
    if rho.dim < 3:
        raise ValueError("two-valuedness is only excluded from dimension 3 up")
    es = eig_hermitian(HermitianOperator(rho.matrix))
    V = es.eigenvectors

    def probe(u):
        u = u / np.linalg.norm(u)
        P = Projector(np.outer(u, u.conj()))
        return P, float((rho.matrix @ P.matrix).trace().real)

    P, p = probe(V[:, -1] + V[:, 0])
    if delta <= p <= 1.0 - delta:
        return P

    rng = np.random.default_rng(seed)
    best_gap, best_p = None, p
    for _ in range(int(max_tries)):
        coeff = rng.standard_normal(rho.dim) + 1j * rng.standard_normal(rho.dim)
        P, p = probe(V @ coeff)
        if delta <= p <= 1.0 - delta:
            return P
        gap = max(delta - p, p - (1.0 - delta))
        if best_gap is None or gap < best_gap:
            best_gap, best_p = gap, p
    raise WitnessNotFound(best_p)
