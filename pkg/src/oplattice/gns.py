"""Abstract *-algebras given by structure constants, linear functionals on
them, and the cyclic representation a state generates: quotient by the null
space of the Gram matrix, left multiplication pushed through, purity read
off the commutant.
"""
from __future__ import annotations

from collections import namedtuple

import numpy as np

from .algebras import _matrix_units, commutant
from .linalg import DimensionMismatch, as_matrix, frobenius, require_square
from .states import DensityState, is_pure

# Gram eigenvalues at or below this fraction of the top one are treated as
# exact zeros of the quotient. All shipped fixtures keep their spectral gap
# many orders above it.
GNS_NULL_RTOL = 1e-10

_AXIOM_TOL = 1e-8


class DegenerateAlgebra(ValueError):
    def __init__(self, what, defect):
        super().__init__(
            f"structure constants violate {what} (defect {defect:.3e})"
        )
        self.what = what
        self.defect = float(defect)


class NotAState(ValueError):
    def __init__(self, reason, defect):
        super().__init__(f"not a state: {reason} (defect {defect:.3e})")
        self.reason = reason
        self.defect = float(defect)


class InputIsPure(ValueError):
    def __init__(self):
        super().__init__("input state is pure; the demo needs a mixed one")


class AbstractStarAlgebra:
    """Finite-dimensional unital *-algebra in coordinates.

    mult[i, j, k] are the coefficients of b_i b_j on b_k, invol[i, k] those
    of the adjoint of b_i, unit the coordinates of the identity. All algebra
    axioms are verified numerically at construction.
    """

    __slots__ = ("n_basis", "mult", "invol", "unit")

    def __init__(self, mult_tensor, invol_matrix, unit_coeffs, tol=_AXIOM_TOL):
        c = np.asarray(mult_tensor, dtype=complex)
        s = np.asarray(invol_matrix, dtype=complex)
        u = np.asarray(unit_coeffs, dtype=complex).reshape(-1)
        n = u.size
        if c.shape != (n, n, n) or s.shape != (n, n):
            raise ValueError(
                f"shape mismatch: mult {c.shape}, invol {s.shape}, unit {n}"
            )
        scale = max(1.0, float(np.abs(c).max()))

        assoc = np.einsum("ijp,plq->ijlq", c, c) \
            - np.einsum("jlp,ipq->ijlq", c, c)
        defect = float(np.abs(assoc).max())
        if defect > tol * scale * scale:
            raise DegenerateAlgebra("associativity", defect)

        invol_sq = s.conj() @ s - np.eye(n)
        defect = float(np.abs(invol_sq).max())
        if defect > tol:
            raise DegenerateAlgebra("involution squaring to the identity",
                                    defect)

        anti = np.einsum("ijk,kq->ijq", c.conj(), s) \
            - np.einsum("jk,il,klq->ijq", s, s, c)
        defect = float(np.abs(anti).max())
        if defect > tol * scale:
            raise DegenerateAlgebra("the adjoint of a product", defect)

        eye = np.eye(n)
        left = np.einsum("i,ijq->jq", u, c) - eye
        right = np.einsum("j,ijq->iq", u, c) - eye
        defect = float(max(np.abs(left).max(), np.abs(right).max()))
        if defect > tol * scale:
            raise DegenerateAlgebra("the unit acting as identity", defect)

        star_u = np.einsum("i,ik->k", u.conj(), s)
        defect = float(np.abs(star_u - u).max())
        if defect > tol:
            raise DegenerateAlgebra("self-adjointness of the unit", defect)

        self.n_basis = n
        self.mult = c
        self.invol = s
        self.unit = u

    def multiply_coeffs(self, x, y):
        return np.einsum("i,j,ijk->k", np.asarray(x, dtype=complex),
                         np.asarray(y, dtype=complex), self.mult)

    def star_coeffs(self, x):
        return np.einsum("i,ik->k", np.asarray(x, dtype=complex).conj(),
                         self.invol)

    def __repr__(self):
        return f"AbstractStarAlgebra(n_basis={self.n_basis})"


class AlgebraicState:
    """Normalized positive functional, held as its values on the basis.
    Positivity is the Gram condition: the matrix of values on b_i* b_j must
    be positive semidefinite."""

    __slots__ = ("algebra", "values", "gram")

    def __init__(self, algebra: AbstractStarAlgebra, values, tol=_AXIOM_TOL):
        w = np.asarray(values, dtype=complex).reshape(-1)
        if w.size != algebra.n_basis:
            raise ValueError(
                f"{w.size} values for {algebra.n_basis} basis elements"
            )
        unit_value = complex(np.dot(algebra.unit, w))
        if abs(unit_value - 1.0) > tol:
            raise NotAState("the unit is not sent to 1",
                            abs(unit_value - 1.0))
        G = np.einsum("ik,kjp,p->ij", algebra.invol, algebra.mult, w)
        herm = float(np.abs(G - G.conj().T).max())
        if herm > tol * max(1.0, float(np.abs(G).max())):
            raise NotAState("Gram matrix is not Hermitian", herm)
        G = (G + G.conj().T) / 2.0
        eigmin = float(np.linalg.eigvalsh(G)[0])
        if eigmin < -tol:
            raise NotAState("Gram matrix is not positive", -eigmin)
        self.algebra = algebra
        self.values = w
        self.gram = G

    def __repr__(self):
        return f"AlgebraicState(n_basis={self.algebra.n_basis})"


GNSTriple = namedtuple("GNSTriple", ["rep_dim", "pi_images", "cyclic_vector"])


def gns_construct(alg: AbstractStarAlgebra, omega: AlgebraicState) -> GNSTriple:
    """Cyclic representation of the state.

    The Gram matrix is diagonalized, its numerical null space quotiented
    away, and left multiplication by each basis element is conjugated into
    the orthonormal quotient coordinates. The cyclic vector is the image of
    the unit.
    """
    if omega.algebra is not alg:
        omega = AlgebraicState(alg, omega.values)
    w, v = np.linalg.eigh(omega.gram)
    keep = w > GNS_NULL_RTOL * max(float(w[-1]), 0.0)
    r = int(np.count_nonzero(keep))
    if r == 0:
        raise NotAState("Gram matrix vanishes", float(np.abs(w).max()))
    wk = w[keep]
    vk = v[:, keep]
    into = np.sqrt(wk)[:, None] * vk.conj().T      # coefficients -> quotient
    back = vk * (1.0 / np.sqrt(wk))[None, :]       # right inverse of into
    images = [into @ alg.mult[i].T @ back for i in range(alg.n_basis)]
    cyclic = into @ alg.unit
    return GNSTriple(r, images, cyclic)


def verify_gns(triple: GNSTriple, alg: AbstractStarAlgebra,
               omega: AlgebraicState, tol=1e-9) -> dict:
    """Re-check every property the construction promises, reporting the
    measured residuals and the first violated one.

    Keys: ok, violation (None when ok), residuals, tol.
    """
    M = [as_matrix(m) for m in triple.pi_images]
    stack = np.stack(M)
    psi = np.asarray(triple.cyclic_vector, dtype=complex).reshape(-1)
    n = alg.n_basis

    hom = max(
        frobenius(M[i] @ M[j]
                  - np.einsum("k,kab->ab", alg.mult[i, j], stack))
        for i in range(n) for j in range(n)
    )
    inv = max(
        frobenius(M[i].conj().T
                  - np.einsum("k,kab->ab", alg.invol[i], stack))
        for i in range(n)
    )
    unit = frobenius(
        np.einsum("i,iab->ab", alg.unit, stack) - np.eye(triple.rep_dim)
    )
    expect = max(
        abs(complex(psi.conj() @ (M[i] @ psi)) - complex(omega.values[i]))
        for i in range(n)
    )
    orbit = np.stack([m @ psi for m in M], axis=1)
    sing = np.linalg.svd(orbit, compute_uv=False)
    rank = int(np.sum(sing > 1e-10 * max(1.0, float(sing[0]))))

    residuals = {
        "homomorphism": hom,
        "involution": inv,
        "unit": unit,
        "expectation": expect,
        "cyclic_rank_gap": triple.rep_dim - rank,
    }
    violation = None
    for key in ("homomorphism", "involution", "unit", "expectation"):
        if residuals[key] > tol:
            violation = key
            break
    if violation is None and rank != triple.rep_dim:
        violation = "cyclicity"
    return {"ok": violation is None, "violation": violation,
            "residuals": residuals, "tol": tol}


def gns_intertwiner(first: GNSTriple, second: GNSTriple, tol=1e-9) -> np.ndarray:
    """Unitary carrying the first representation onto the second, fixed by
    matching the two orbits of the cyclic vectors. Certified before return;
    triples of different states have none and raise."""
    if first.rep_dim != second.rep_dim:
        raise ValueError(
            f"representation dims differ: {first.rep_dim} vs {second.rep_dim}"
        )
    c1 = np.stack([as_matrix(m) @ first.cyclic_vector
                   for m in first.pi_images], axis=1)
    c2 = np.stack([as_matrix(m) @ second.cyclic_vector
                   for m in second.pi_images], axis=1)
    W = c2 @ np.linalg.pinv(c1)
    r = first.rep_dim
    defect = max(
        frobenius(W @ W.conj().T - np.eye(r)),
        frobenius(W @ c1 - c2),
        max(frobenius(W @ as_matrix(a) - as_matrix(b) @ W)
            for a, b in zip(first.pi_images, second.pi_images)),
    )
    if defect > tol * max(1.0, frobenius(c1)):
        raise ValueError(
            f"no unitary intertwiner within tolerance (defect {defect:.3e})"
        )
    return W


def is_pure_state(alg: AbstractStarAlgebra, omega: AlgebraicState) -> bool:
    """Purity through irreducibility: the commutant of the represented
    algebra is trivial exactly for pure states."""
    triple = gns_construct(alg, omega)
    prime = commutant(triple.pi_images, triple.rep_dim)
    return len(prime) == 1


def folium_state(triple: GNSTriple, T, alg: AbstractStarAlgebra) -> AlgebraicState:
    """Pull a density operator on the representation space back to an
    algebraic state: values tr(T pi(b_i))."""
    Tm = T.matrix if isinstance(T, DensityState) else \
        DensityState(as_matrix(T)).matrix
    if Tm.shape[0] != triple.rep_dim:
        raise DimensionMismatch(
            f"density dim {Tm.shape[0]} vs representation {triple.rep_dim}"
        )
    values = [complex(np.trace(Tm @ as_matrix(m))) for m in triple.pi_images]
    return AlgebraicState(alg, values)


# --- concrete matrix algebras as abstract ones ------------------------------

def algebra_from_matrices(mats, tol=_AXIOM_TOL) -> AbstractStarAlgebra:
    """Structure constants of a concrete matrix basis, expanded by least
    squares. The basis must be independent, closed under products and
    adjoints, and contain the identity; failures surface as residuals."""
    mats = [require_square(as_matrix(M)) for M in mats]
    if not mats:
        raise ValueError("empty basis")
    n = mats[0].shape[0]
    k = len(mats)
    V = np.stack([M.reshape(-1) for M in mats], axis=1)
    if np.linalg.matrix_rank(V, tol=1e-10) < k:
        raise ValueError("basis matrices are linearly dependent")

    def expand(rhs, what):
        sol, *_ = np.linalg.lstsq(V, rhs, rcond=None)
        resid = float(np.abs(V @ sol - rhs).max())
        if resid > tol * max(1.0, float(np.abs(rhs).max())):
            raise ValueError(f"{what} does not stay in the span "
                             f"(residual {resid:.3e})")
        return sol

    u = expand(np.eye(n, dtype=complex).reshape(-1), "the identity")
    adj = np.stack([M.conj().T.reshape(-1) for M in mats], axis=1)
    s = expand(adj, "an adjoint").T
    prods = np.stack(
        [(mats[i] @ mats[j]).reshape(-1) for i in range(k) for j in range(k)],
        axis=1,
    )
    c = expand(prods, "a product").T.reshape(k, k, k)
    return AbstractStarAlgebra(c, s, u, tol=tol)


def state_from_density(alg: AbstractStarAlgebra, mats, rho) -> AlgebraicState:
    """The algebraic state a density operator induces on a concrete basis."""
    rho = rho if isinstance(rho, DensityState) else DensityState(rho)
    values = [complex(np.trace(rho.matrix @ as_matrix(M))) for M in mats]
    return AlgebraicState(alg, values)


def mixed_to_vector_paradox_demo(rho, tol=1e-9) -> dict:
    """A mixed state becomes a single unit vector in its own representation,
    yet stays mixed: the commutant there is nontrivial, so the vector does
    not mean purity. The report shows both sides."""
    rho = rho if isinstance(rho, DensityState) else DensityState(rho)
    if is_pure(rho):
        raise InputIsPure()
    mats = _matrix_units(rho.dim)
    alg = algebra_from_matrices(mats)
    omega = state_from_density(alg, mats, rho)
    triple = gns_construct(alg, omega)
    prime = commutant(triple.pi_images, triple.rep_dim)
    check = verify_gns(triple, alg, omega, tol=tol)
    return {
        "dim": rho.dim,
        "rep_dim": triple.rep_dim,
        "cyclic_vector_norm": float(np.linalg.norm(triple.cyclic_vector)),
        "commutant_dimension": len(prime),
        "state_is_pure": len(prime) == 1,
        "expectation_residual": check["residuals"]["expectation"],
        "note": (
            "the cyclic vector is a unit vector, but purity is decided by "
            "the commutant on the representation space, and it is "
            "nontrivial here"
        ),
    }
