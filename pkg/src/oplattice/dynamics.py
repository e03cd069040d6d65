"""One-parameter unitary groups and their generators, Heisenberg evolution,
the three-way constant-of-motion equivalence, time-ordered evolution for
time-dependent generators, unitary/antiunitary symmetry operators, and
projective-representation multipliers.
"""
from __future__ import annotations

from collections import namedtuple

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    DimensionMismatch,
    HermitianOperator,
    UnitaryOperator,
    as_matrix,
    frobenius,
    operator_norm,
    require_square,
    require_same_dim,
)
from .spectral import func_calculus, spectral_decompose
from .states import DensityState

MAX_DYSON_ORDER = 12

# Incommensurate times, so a periodic generator cannot fake commutation by
# hitting a revival at every grid point.
DEFAULT_NOETHER_GRID = (0.1, 0.37, 1.0)

DEFAULT_STENCIL = (1e-3, 5e-4, -5e-4, -1e-3)


class InconsistentGroup(ValueError):
    def __init__(self, defect):
        super().__init__(
            f"samples are not consistent with a one-parameter group "
            f"(defect {defect:.3e})"
        )
        self.defect = float(defect)


class NotHermitianResult(ValueError):
    def __init__(self, defect):
        super().__init__(
            f"recovered generator is not Hermitian (defect {defect:.3e})"
        )
        self.defect = float(defect)


class EquivalenceViolation(RuntimeError):
    """The three conservation conditions must agree; disagreement means the
    tolerance budget failed, never a counterexample."""

    def __init__(self, details):
        super().__init__(f"equivalent conditions disagree: {details}")
        self.details = details


class OrderTooLarge(ValueError):
    def __init__(self, order):
        super().__init__(
            f"series order {order} exceeds the supported maximum "
            f"{MAX_DYSON_ORDER}"
        )
        self.order = int(order)


class QuadratureTooCoarse(ValueError):
    def __init__(self, nodes, needed):
        super().__init__(
            f"{nodes} quadrature nodes, need at least {needed} for this "
            "order and generator size"
        )
        self.nodes = int(nodes)
        self.needed = int(needed)


class NotACocycle(ValueError):
    def __init__(self, g1, g2, g3, defect):
        super().__init__(
            f"multiplier identity fails on ({g1!r}, {g2!r}, {g3!r}) "
            f"with defect {defect:.3e}"
        )
        self.triple = (g1, g2, g3)
        self.defect = float(defect)


def _herm(A):
    return A if isinstance(A, HermitianOperator) else HermitianOperator(A)


def evolve_unitary(H, t, hbar=1.0) -> UnitaryOperator:
    """exp(-i t H / hbar), assembled through the spectral measure so the
    result is unitary to machine precision."""
    pvm = spectral_decompose(_herm(H))
    U = func_calculus(pvm, lambda lam: np.exp(-1j * float(t) * lam / hbar))
    return UnitaryOperator(U)


def _unitary_matrix(U):
    return U.matrix if isinstance(U, UnitaryOperator) else as_matrix(U)


def generator_from_group(samples, group_tol=1e-8, recon_tol=1e-6,
                         hbar=1.0) -> HermitianOperator:
    """Recover H from samples (t, U_t) of U_t = exp(-i t H / hbar).

    Uses the central difference i*hbar*(U_t - U_{-t})/(2t) at the smallest
    sampled pair, Richardson-extrapolated against the half-step pair when
    the stencil contains one. The group law and a full reconstruction of
    the samples are verified before the result is returned.
    """
    table = {}
    for t, U in samples:
        table[float(t)] = require_square(_unitary_matrix(U))
    if not table:
        raise ValueError("no samples given")
    require_same_dim(*(M.shape[0] for M in table.values()))
    n = next(iter(table.values())).shape[0]
    eye = np.eye(n)

    if 0.0 in table:
        defect = frobenius(table[0.0] - eye)
        if defect > group_tol:
            raise InconsistentGroup(defect)

    pos = sorted(t for t in table if t > 0 and -t in table)
    if not pos:
        raise ValueError("samples must bracket 0 with at least one +/-t pair")

    def central(t):
        return 1j * hbar * (table[t] - table[-t]) / (2.0 * t)

    t_full = None
    for t in pos:
        if t / 2.0 in table and -t / 2.0 in table:
            t_full = t
            break
    if t_full is not None:
        # group-law consistency of the stencil itself
        half = table[t_full / 2.0]
        defect = frobenius(half @ half - table[t_full])
        if defect > group_tol:
            raise InconsistentGroup(defect)
        D = (4.0 * central(t_full / 2.0) - central(t_full)) / 3.0
    else:
        D = central(pos[0])

    herm_defect = frobenius(D - D.conj().T)
    if herm_defect > max(group_tol, 1e-8) * max(1.0, frobenius(D)):
        raise NotHermitianResult(herm_defect)
    H = HermitianOperator(D, tol=np.inf)

    worst = 0.0
    for t, U in table.items():
        worst = max(worst, frobenius(evolve_unitary(H, t, hbar).matrix - U))
    if worst > recon_tol:
        raise InconsistentGroup(worst)
    return H


def heisenberg_observable(A, H, t, hbar=1.0) -> HermitianOperator:
    """A_t = U_t^{-1} A U_t. The spectrum is untouched."""
    A = _herm(A)
    H = _herm(H)
    if A.dim != H.dim:
        raise DimensionMismatch(f"observable dim {A.dim} vs generator {H.dim}")
    U = evolve_unitary(H, t, hbar).matrix
    return HermitianOperator(U.conj().T @ A.matrix @ U)


NoetherReport = namedtuple(
    "NoetherReport",
    ["constant_of_motion", "dynamical_symmetry", "h_invariance", "defects"],
)


def noether_check(A, H, t_grid=None, s_grid=None, tol=1e-9,
                  hbar=1.0) -> NoetherReport:
    """Evaluate the three equivalent faces of conservation on finite grids:
    invariance of A under the H-evolution, commutation of the two unitary
    groups, and invariance of H under the A-evolution. The flags must agree;
    a split verdict raises, because the equivalence is a theorem and only
    the tolerance can fail."""
    A = _herm(A)
    H = _herm(H)
    if A.dim != H.dim:
        raise DimensionMismatch(f"dims differ: {A.dim} vs {H.dim}")
    t_grid = DEFAULT_NOETHER_GRID if t_grid is None else tuple(t_grid)
    s_grid = DEFAULT_NOETHER_GRID if s_grid is None else tuple(s_grid)
    if not t_grid or not s_grid:
        raise ValueError("grids must be nonempty")

    Us = {t: evolve_unitary(H, t, hbar).matrix for t in t_grid}
    Vs = {s: evolve_unitary(A, s, hbar).matrix for s in s_grid}

    d_const = max(
        frobenius(U.conj().T @ A.matrix @ U - A.matrix) for U in Us.values()
    )
    d_comm = max(
        frobenius(V @ U - U @ V) for U in Us.values() for V in Vs.values()
    )
    d_inv = max(
        frobenius(V @ H.matrix @ V.conj().T - H.matrix) for V in Vs.values()
    )

    flags = (d_const <= tol, d_comm <= tol, d_inv <= tol)
    defects = {
        "constant_of_motion": d_const,
        "dynamical_symmetry": d_comm,
        "h_invariance": d_inv,
    }
    if len(set(flags)) != 1:
        raise EquivalenceViolation({"flags": flags, "defects": defects,
                                    "tol": tol})
    return NoetherReport(*flags, defects)


def commuting_via_groups(A, B, grid=None, tol=1e-9, hbar=1.0) -> bool:
    """Group-level compatibility test: exp(-itA) and exp(-isB) commute for
    every (t, s) in the grid. Agrees with the spectral-measure test."""
    A = _herm(A)
    B = _herm(B)
    if A.dim != B.dim:
        raise DimensionMismatch(f"dims differ: {A.dim} vs {B.dim}")
    grid = DEFAULT_NOETHER_GRID if grid is None else tuple(grid)
    worst = 0.0
    for t in grid:
        U = evolve_unitary(A, t, hbar).matrix
        for s in grid:
            V = evolve_unitary(B, s, hbar).matrix
            worst = max(worst, frobenius(U @ V - V @ U))
    return worst <= tol


# --- time-dependent generators --------------------------------------------

def _prepare_grid(samples, t1, t2):
    pairs = sorted(
        ((float(t), _herm(H).matrix) for t, H in samples),
        key=lambda p: p[0],
    )
    if len(pairs) < 2:
        raise ValueError("need at least two time samples")
    taus = np.array([t for t, _ in pairs])
    if np.any(np.diff(taus) <= 0):
        raise ValueError("sample times must be distinct")
    if t1 > t2:
        raise ValueError(f"t1 {t1} exceeds t2 {t2}")
    if t1 < taus[0] - 1e-12 or t2 > taus[-1] + 1e-12:
        raise ValueError("samples do not cover the requested interval")
    stack = np.stack([H for _, H in pairs])

    def at(t):
        j = int(np.clip(np.searchsorted(taus, t), 1, len(taus) - 1))
        lo, hi = taus[j - 1], taus[j]
        lam = 0.0 if hi == lo else (t - lo) / (hi - lo)
        return (1.0 - lam) * stack[j - 1] + lam * stack[j]

    inner = [(t, Hm) for (t, Hm) in pairs if t1 + 1e-12 < t < t2 - 1e-12]
    grid = [(float(t1), at(t1))] + inner + [(float(t2), at(t2))]
    return grid


def _quadrature_gate(grid, order):
    if not (1 <= int(order) <= MAX_DYSON_ORDER):
        raise OrderTooLarge(order)
    times = np.array([t for t, _ in grid])
    norms = np.array([operator_norm(H) for _, H in grid])
    budget = float(np.trapezoid(norms, times)) if len(grid) > 1 else 0.0
    needed = int(np.ceil((order + 1) * max(1.0, budget)))
    if len(grid) < needed:
        raise QuadratureTooCoarse(len(grid), needed)


def dyson_evolve(H_samples, t1, t2, order=8, hbar=1.0) -> UnitaryOperator:
    """Ordered evolution for a sampled time-dependent generator.

    Product integral over the sample subintervals: each step exponentiates
    the endpoint average of H exactly, later times composing on the left.
    Unitary by construction; the truncated series lives in dyson_series as
    the independent cross-check.
    """
    t1, t2 = float(t1), float(t2)
    grid = _prepare_grid(H_samples, t1, t2)
    _quadrature_gate(grid, order)
    n = grid[0][1].shape[0]
    U = np.eye(n, dtype=complex)
    for (ta, Ha), (tb, Hb) in zip(grid[:-1], grid[1:]):
        step = evolve_unitary((Ha + Hb) / 2.0, tb - ta, hbar).matrix
        U = step @ U
    return UnitaryOperator(U)


def dyson_series(H_samples, t1, t2, order=8, hbar=1.0) -> np.ndarray:
    """Truncated time-ordered series, nested integrals done by cumulative
    trapezoid on the sample grid. Not exactly unitary; that is the point of
    keeping it separate from the product integral."""
    t1, t2 = float(t1), float(t2)
    grid = _prepare_grid(H_samples, t1, t2)
    _quadrature_gate(grid, order)
    times = np.array([t for t, _ in grid])
    stack = np.stack([H for _, H in grid])
    m, n = len(grid), stack.shape[1]

    total = np.eye(n, dtype=complex)
    phi = np.broadcast_to(np.eye(n, dtype=complex), (m, n, n)).copy()
    for _ in range(int(order)):
        integrand = (-1j / hbar) * np.einsum("tij,tjk->tik", stack, phi)
        nxt = np.zeros_like(phi)
        widths = np.diff(times)
        steps = 0.5 * widths[:, None, None] * (integrand[1:] + integrand[:-1])
        nxt[1:] = np.cumsum(steps, axis=0)
        phi = nxt
        total = total + phi[-1]
    return total


# --- symmetry operators ----------------------------------------------------

class SymmetryOperator:
    """Wigner symmetry in canonical form: a unitary matrix plus a flag, the
    antiunitary case acting as x -> U conj(x)."""

    __slots__ = ("dim", "matrix", "antiunitary")

    def __init__(self, matrix, antiunitary=False, tol=None):
        U = UnitaryOperator(matrix, tol=tol)
        self.matrix = U.matrix
        self.dim = U.dim
        self.antiunitary = bool(antiunitary)

    def apply(self, vector):
        v = np.asarray(vector, dtype=complex).reshape(-1)
        if v.size != self.dim:
            raise DimensionMismatch(f"vector dim {v.size} vs {self.dim}")
        return self.matrix @ (v.conj() if self.antiunitary else v)

    def compose(self, other):
        """self after other. Conjugation slides past the second factor when
        the first is antiunitary."""
        if self.dim != other.dim:
            raise DimensionMismatch(f"dims differ: {self.dim} vs {other.dim}")
        inner = other.matrix.conj() if self.antiunitary else other.matrix
        return SymmetryOperator(
            self.matrix @ inner,
            antiunitary=self.antiunitary != other.antiunitary,
        )

    def inverse(self):
        if self.antiunitary:
            return SymmetryOperator(self.matrix.T, antiunitary=True)
        return SymmetryOperator(self.matrix.conj().T)

    def __repr__(self):
        kind = "antiunitary" if self.antiunitary else "unitary"
        return f"SymmetryOperator(dim={self.dim}, {kind})"


def wigner_apply(V: SymmetryOperator, rho: DensityState) -> DensityState:
    """State transport rho -> V rho V^{-1}."""
    if V.dim != rho.dim:
        raise DimensionMismatch(f"dims differ: {V.dim} vs {rho.dim}")
    R = rho.matrix.conj() if V.antiunitary else rho.matrix
    return DensityState(V.matrix @ R @ V.matrix.conj().T)


def wigner_apply_observable(V: SymmetryOperator, A) -> HermitianOperator:
    """Observable transport A -> V A V^{-1}; pairs with wigner_apply so that
    expectations are preserved."""
    A = _herm(A)
    if V.dim != A.dim:
        raise DimensionMismatch(f"dims differ: {V.dim} vs {A.dim}")
    M = A.matrix.conj() if V.antiunitary else A.matrix
    return HermitianOperator(V.matrix @ M @ V.matrix.conj().T)


def spectrum_reversal_gap(H) -> float:
    """How far sigma(H) is from being symmetric under negation: the largest
    gap between the sorted spectrum and the sorted negated spectrum. Any
    unitary T with T H T^{-1} = -H needs this to vanish, so a positive gap
    certifies no such T exists (and time reversal must be antiunitary)."""
    w = np.linalg.eigvalsh(_herm(H).matrix)
    return float(np.max(np.abs(w + w[::-1])))


# --- projective multipliers -------------------------------------------------

class MultiplierTable:
    """Unit-modulus factors attached to ordered pairs of group elements."""

    __slots__ = ("elements", "omega")

    def __init__(self, elements, omega, tol=1e-9):
        self.elements = list(elements)
        table = {}
        for g in self.elements:
            for h in self.elements:
                try:
                    z = complex(omega[(g, h)])
                except KeyError:
                    raise ValueError(f"multiplier missing for ({g!r}, {h!r})")
                if abs(abs(z) - 1.0) > tol:
                    raise ValueError(
                        f"multiplier for ({g!r}, {h!r}) has modulus {abs(z)}"
                    )
                table[(g, h)] = z
        self.omega = table

    def __call__(self, g, h):
        return self.omega[(g, h)]


def cocycle_check(table: MultiplierTable, group_mult, tol=1e-9) -> bool:
    """Associativity constraint on the multipliers, over every triple:
    omega(g1,g2) omega(g1 g2, g3) = omega(g1, g2 g3) omega(g2, g3).
    When an identity element is present the equal-normalization consequence
    omega(g, e) = omega(e, g) is checked as well."""
    els = table.elements
    for g1 in els:
        for g2 in els:
            for g3 in els:
                lhs = table(g1, g2) * table(group_mult(g1, g2), g3)
                rhs = table(g1, group_mult(g2, g3)) * table(g2, g3)
                defect = abs(lhs - rhs)
                if defect > tol:
                    raise NotACocycle(g1, g2, g3, defect)
    identity = None
    for e in els:
        if all(group_mult(g, e) == g and group_mult(e, g) == g for g in els):
            identity = e
            break
    if identity is not None:
        for g in els:
            defect = abs(table(g, identity) - table(identity, g))
            if defect > tol:
                raise NotACocycle(g, identity, identity, defect)
    return True


def multipliers_from_operators(elements, group_mult, operators,
                               tol=1e-8) -> MultiplierTable:
    """Read the multipliers off a concrete projective family:
    U_g U_h = omega(g,h) U_{gh}. Each pair is verified to actually satisfy
    the relation with the extracted phase."""
    mats = {g: require_square(as_matrix(operators[g])) for g in elements}
    require_same_dim(*(M.shape[0] for M in mats.values()))
    dim = next(iter(mats.values())).shape[0]
    omega = {}
    for g in elements:
        for h in elements:
            prod = mats[g] @ mats[h]
            target = mats[group_mult(g, h)]
            z = complex(np.trace(prod @ np.linalg.inv(target))) / dim
            z = z / abs(z)
            defect = frobenius(prod - z * target)
            if defect > tol * max(1.0, frobenius(target)):
                raise ValueError(
                    f"operators are not projective on ({g!r}, {h!r}): "
                    f"defect {defect:.3e}"
                )
            omega[(g, h)] = z
    return MultiplierTable(elements, omega)


def phase_fix_one_parameter(samples):
    """Heuristic gauge fixing for a sampled one-parameter projective family:
    fit a single slope c to the unwrapped determinant phases and return the
    rephased family exp(-i c r) V_r together with c. Least squares on
    log-phases; no claim of canonicity."""
    pairs = sorted(((float(r), as_matrix(V)) for r, V in samples),
                   key=lambda p: p[0])
    if len(pairs) < 2:
        raise ValueError("need at least two samples to fit a phase slope")
    rs = np.array([r for r, _ in pairs])
    dim = pairs[0][1].shape[0]
    phases = np.unwrap([float(np.angle(np.linalg.det(V))) for _, V in pairs])
    slope = np.polynomial.polynomial.polyfit(rs, phases, 1)[1]
    c = float(slope) / dim
    fixed = [(r, np.exp(-1j * c * r) * V) for r, V in pairs]
    return c, fixed


# --- spin fixture -----------------------------------------------------------

def su2_fixture(hbar=1.0):
    """Spin one-half generators and their sanity report.

    Returns ([S_x, S_y, S_z], report) with the cyclic commutation residuals,
    the component spectra, a group-law residual for the one-parameter
    subgroups, and the quadratic invariant sum S_x^2 + S_y^2 + S_z^2 with
    its eigendecomposition (a multiple of the identity here).
    """
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    S = [HermitianOperator(hbar / 2.0 * m) for m in (sx, sy, sz)]

    residuals = []
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        comm = S[a].matrix @ S[b].matrix - S[b].matrix @ S[a].matrix
        residuals.append(frobenius(comm - 1j * hbar * S[c].matrix))

    spectra = [sorted(np.linalg.eigvalsh(Sk.matrix).tolist()) for Sk in S]

    group_defect = 0.0
    thetas = (0.3, 0.7, 1.1)
    for Sk in S:
        for u in thetas:
            for v in thetas:
                Uu = evolve_unitary(Sk, u, hbar).matrix
                Uv = evolve_unitary(Sk, v, hbar).matrix
                Uw = evolve_unitary(Sk, u + v, hbar).matrix
                group_defect = max(group_defect, frobenius(Uu @ Uv - Uw))

    quad = sum(Sk.matrix @ Sk.matrix for Sk in S)
    w, V = np.linalg.eigh(quad)
    report = {
        "commutator_residuals": residuals,
        "spectra": spectra,
        "group_law_defect": group_defect,
        "quadratic_invariant": quad,
        "quadratic_eigenvalues": w,
        "quadratic_eigenvectors": V,
        "expected_invariant_value": 3.0 * hbar * hbar / 4.0,
    }
    return S, report
