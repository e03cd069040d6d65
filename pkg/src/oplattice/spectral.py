"""Projector-valued measures and the discrete functional calculus.

A Hermitian operator is carried to its PVM: a finite list of
(eigenvalue label, orthogonal projector) atoms, pairwise orthogonal and
summing to the identity. Functions of the operator are then weighted sums
f(A) = sum_a f(a) P_a, and a commuting family gets a joint PVM whose atoms
are products of the individual spectral projectors, labeled by tuples.
"""
from __future__ import annotations

from collections.abc import Mapping

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    DimensionMismatch,
    HermitianOperator,
    as_matrix,
    eig_hermitian,
    frobenius,
    matrix_from_json,
    matrix_to_json,
    require_square,
)

DEFAULT_CLUSTER_TOL = 1e-8

# Eigenprojectors of independently diagonalized commuting operators carry
# solver noise well above the base tolerance, so joint constructions get
# their own default.
JOINT_COMMUTE_TOL = 1e-8


class NonCommuting(ValueError):
    def __init__(self, i, j, defect):
        super().__init__(
            f"spectral measures of operators {i} and {j} do not commute "
            f"(defect {defect:.3e})"
        )
        self.pair = (i, j)
        self.defect = float(defect)


class MissingSample(KeyError):
    def __init__(self, label):
        super().__init__(f"no sample supplied for spectral label {label!r}")
        self.label = label


def _as_tuple(label):
    if isinstance(label, tuple):
        return tuple(float(x) for x in label)
    return (float(label),)


def _fro_batch(stack):
    """Frobenius norm of every matrix in a (k, n, n) stack."""
    return np.sqrt((np.abs(stack) ** 2).sum(axis=(1, 2)))


def _atom_residuals(dim, atoms, range_factors=None):
    """Worst-case invariant defects of an atom list.

    When range factors are available (orthonormal columns spanning each
    projector's range, as delivered by the eigensolver) the pairwise
    orthogonality residual is bounded through the factor overlaps. That
    costs O(n^3) for the whole family instead of O(k^2 n^3), and the bound
    is rigorous: the factors' own orthonormality defect is measured and
    folded in.
    """
    stack = np.stack([P for _, P in atoms])
    herm = float(_fro_batch(stack - stack.conj().transpose(0, 2, 1)).max())
    complete = frobenius(stack.sum(axis=0) - np.eye(dim))

    if range_factors is not None:
        cols = np.concatenate(range_factors, axis=1)
        G = cols.conj().T @ cols
        off = G.copy()
        pos = 0
        factor_defect = 0.0
        for V in range_factors:
            r = V.shape[1]
            factor_defect = max(
                factor_defect, frobenius(G[pos:pos + r, pos:pos + r] - np.eye(r))
            )
            off[pos:pos + r, pos:pos + r] = 0.0
            pos += r
        if cols.shape[1] == len(range_factors):
            # every atom rank 1: reconstruct them all in one shot
            outers = np.einsum("ia,ja->aij", cols, cols.conj())
            rank1_defect = float(_fro_batch(stack - outers).max())
        else:
            rank1_defect = max(
                frobenius(P - V @ V.conj().T)
                for (_, P), V in zip(atoms, range_factors)
            )
        # ||P_a P_b|| <= ||V_a+ V_b|| plus the factorization slop of each atom;
        # the whole off-block mass of one Gram matrix bounds every pair at once
        ortho = frobenius(off) + 2.0 * factor_defect + 2.0 * rank1_defect
        # with P = VV+ + E, expanding P^2 - P leaves V(V+V - I)V+ plus terms
        # linear and quadratic in E, so the same two defects bound idempotency
        fd, r1 = factor_defect, rank1_defect
        idem = (1.0 + fd) * fd + r1 * (3.0 + 2.0 * fd + r1)
    else:
        idem = float(_fro_batch(stack @ stack - stack).max())
        ortho = 0.0
        for a in range(len(atoms) - 1):
            prods = stack[a][None, :, :] @ stack[a + 1:]
            ortho = max(ortho, float(_fro_batch(prods).max()))

    return {
        "hermiticity": herm,
        "idempotency": idem,
        "completeness": complete,
        "orthogonality": float(ortho),
    }


class ProjectorValuedMeasure:
    """Finite PVM: atoms (label, projector).

    Labels are floats for a single operator and tuples of floats for joint
    measures. Construction verifies every invariant: each atom Hermitian
    and idempotent, atoms pairwise orthogonal, the sum equal to the
    identity, labels pairwise distinct.
    """

    __slots__ = ("dim", "atoms")

    def __init__(self, dim, atoms, tol=None, _range_factors=None):
        tol = DEFAULT_TOL if tol is None else float(tol)
        dim = int(dim)
        clean = []
        for label, P in atoms:
            P = require_square(as_matrix(P))
            if P.shape[0] != dim:
                raise DimensionMismatch(
                    f"atom is {P.shape[0]}x{P.shape[0]}, PVM dim is {dim}"
                )
            clean.append((label, P))
        if not clean:
            raise ValueError("a PVM needs at least one atom")
        report = _atom_residuals(dim, clean, _range_factors)
        worst = max(report.values())
        if worst > tol:
            raise ValueError(f"PVM invariants violated ({report})")
        keys = [_as_tuple(label) for label, _ in clean]
        if len(set(keys)) != len(keys):
            raise ValueError("PVM labels are not pairwise distinct")
        self.dim = dim
        self.atoms = clean

    @property
    def labels(self):
        return [label for label, _ in self.atoms]

    def projector_for(self, label):
        target = _as_tuple(label)
        for lab, P in self.atoms:
            if _as_tuple(lab) == target:
                return P
        raise KeyError(f"no atom labeled {label!r}")

    def __len__(self):
        return len(self.atoms)

    def __repr__(self):
        return f"ProjectorValuedMeasure(dim={self.dim}, atoms={len(self.atoms)})"


def pvm_residuals(pvm) -> dict:
    """Measured invariant defects: Hermiticity, idempotency, completeness,
    pairwise orthogonality. Useful for reports; construction already
    enforced them."""
    return _atom_residuals(pvm.dim, pvm.atoms)


def _coerce_hermitian(A):
    return A if isinstance(A, HermitianOperator) else HermitianOperator(A)


def spectral_decompose(A, cluster_tol=None) -> ProjectorValuedMeasure:
    """PVM of a Hermitian operator.

    Eigenvalues closer than cluster_tol * max(1, spectral spread) are merged
    into a single atom (single linkage on the sorted values), whose label is
    the mean of the merged eigenvalues and whose projector is the sum of the
    corresponding rank-1 projectors.
    """
    A = _coerce_hermitian(A)
    ctol = DEFAULT_CLUSTER_TOL if cluster_tol is None else float(cluster_tol)
    es = eig_hermitian(A)
    w, V = es.eigenvalues, es.eigenvectors
    threshold = ctol * max(1.0, float(w[-1] - w[0]))
    atoms = []
    factors = []
    start = 0
    for k in range(1, len(w) + 1):
        if k == len(w) or w[k] - w[k - 1] > threshold:
            block = V[:, start:k]
            atoms.append((float(np.mean(w[start:k])), block @ block.conj().T))
            factors.append(block)
            start = k
    return ProjectorValuedMeasure(A.dim, atoms, _range_factors=factors)


def _lookup_sample(mapping, label):
    if label in mapping:
        return mapping[label]
    # cluster labels are means, so give exact-key misses a little slack
    want = np.array(_as_tuple(label))
    scale = max(1.0, float(np.abs(want).max()))
    best_key, best_gap = None, None
    for key in mapping:
        have = np.array(_as_tuple(key))
        if have.shape != want.shape:
            continue
        gap = float(np.abs(have - want).max())
        if best_gap is None or gap < best_gap:
            best_key, best_gap = key, gap
    if best_gap is not None and best_gap <= 1e-9 * scale:
        return mapping[best_key]
    raise MissingSample(label)


def func_calculus(pvm, f) -> np.ndarray:
    """Evaluate f on the spectrum: sum_a f(a) P_a.

    f may be a mapping from labels to values (the discrete sampled form) or
    a callable evaluated at each label. A Hermitian operator is accepted in
    place of a PVM and decomposed with the default clustering.
    """
    if isinstance(pvm, HermitianOperator) or isinstance(pvm, np.ndarray):
        pvm = spectral_decompose(pvm)
    out = np.zeros((pvm.dim, pvm.dim), dtype=complex)
    for label, P in pvm.atoms:
        if isinstance(f, Mapping):
            value = _lookup_sample(f, label)
        else:
            value = f(label)
        out += complex(value) * P
    return out


def _pvm_commute_defect(p, q):
    worst = 0.0
    for _, P in p.atoms:
        for _, Q in q.atoms:
            worst = max(worst, frobenius(P @ Q - Q @ P))
    return worst


def pvm_commute(p, q, tol=None) -> bool:
    """True when every atom of p commutes with every atom of q within tol."""
    tol = DEFAULT_TOL if tol is None else float(tol)
    if p.dim != q.dim:
        raise DimensionMismatch(f"PVM dims differ: {p.dim} vs {q.dim}")
    return _pvm_commute_defect(p, q) <= tol


def joint_pvm(ops, cluster_tol=None, tol=None) -> ProjectorValuedMeasure:
    """Joint PVM of a commuting family, atoms labeled by eigenvalue tuples.

    Each joint projector is the product of one spectral projector per
    operator; products of rank 0 (trace below 0.5) are dropped. Pairwise
    commutation of the individual spectral measures is checked first.
    """
    ops = list(ops)
    if not ops:
        raise ValueError("joint_pvm needs at least one operator")
    tol = JOINT_COMMUTE_TOL if tol is None else float(tol)
    pvms = [spectral_decompose(op, cluster_tol) for op in ops]
    dim = pvms[0].dim
    for p in pvms[1:]:
        if p.dim != dim:
            raise DimensionMismatch("operators act on different spaces")
    for i in range(len(pvms)):
        for j in range(i + 1, len(pvms)):
            defect = _pvm_commute_defect(pvms[i], pvms[j])
            if defect > tol:
                raise NonCommuting(i, j, defect)

    atoms = [((), np.eye(dim, dtype=complex))]
    for p in pvms:
        grown = []
        for label, M in atoms:
            for lab, P in p.atoms:
                prod = M @ P
                if prod.trace().real >= 0.5:
                    grown.append((label + (float(lab),), prod))
        atoms = grown
    atoms.sort(key=lambda atom: atom[0])
    return ProjectorValuedMeasure(dim, atoms, tol=max(tol, DEFAULT_TOL))


def marginal_pvm(joint, coordinate, tol=None) -> ProjectorValuedMeasure:
    """Collapse a joint PVM onto one label coordinate by summing atoms."""
    groups: dict[float, np.ndarray] = {}
    for label, P in joint.atoms:
        key = float(label[coordinate])
        groups[key] = groups.get(key, 0) + P
    atoms = sorted(groups.items())
    return ProjectorValuedMeasure(joint.dim, atoms, tol=tol)


# --- JSON form: {"dim": n, "atoms": [{"label": [..], "projector": ..}]} ---

def pvm_to_json(pvm) -> dict:
    out = []
    for label, P in pvm.atoms:
        out.append({
            "label": [float(x) for x in _as_tuple(label)],
            "projector": matrix_to_json(P),
        })
    return {"dim": pvm.dim, "atoms": out}


def pvm_from_json(obj, tol=None) -> ProjectorValuedMeasure:
    atoms = []
    for atom in obj["atoms"]:
        lab = [float(x) for x in atom["label"]]
        label = lab[0] if len(lab) == 1 else tuple(lab)
        atoms.append((label, matrix_from_json(atom["projector"])))
    return ProjectorValuedMeasure(int(obj["dim"]), atoms, tol=tol)
