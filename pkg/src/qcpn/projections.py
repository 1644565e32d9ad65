"""K-theory generators Psi_N, P_N, R_N and the component representations.

The components of Psi_N carry square roots of q-multinomials, which do not
live in Q(s).  Everything here therefore works with the factored form

    psi_J = sqrt(u_J) * m_J,      u_J = [J]!  (a Laurent polynomial),

where m_J is a plain monomial with a q-power prefactor.  All identities of
interest (Psi^dag Psi = 1, P^2 = P = P^dag, equivariance) only ever involve
the squares u_J, so they stay exact in Q(s).  The equivariant pair
(P'_N, sigma^N) appears here conjugated by a constant diagonal matrix,
which changes no identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from .ncpoly import (
    NCPoly,
    Presentation,
    UqGenerator,
    letter,
    mul,
    normalize,
    star,
    uq_act,
)
from .qcoeff import ONE, ZERO, QScalar, qmultinomial, qpow

MultiIndex = Tuple[int, ...]


def multi_indices(total: int, n: int) -> List[MultiIndex]:
    """All (j_0,...,j_n) >= 0 with sum = total, in colexicographic order."""
    out: List[MultiIndex] = []

    def rec(slots: int, rem: int, acc: List[int]):
        if slots == 1:
            out.append(tuple(acc + [rem]))
            return
        for j in range(rem + 1):
            rec(slots - 1, rem - j, acc + [j])

    rec(n + 1, total, [])
    out.sort(key=lambda J: tuple(reversed(J)))
    return out


@dataclass
class AlgebraVector:
    """Factored Psi_N: components psi_J = sqrt(weights[J]) * monomials[J]."""

    N: int
    presentation: Presentation
    indices: List[MultiIndex]
    monomials: List[NCPoly]
    weights: List[QScalar]

    def __len__(self) -> int:
        return len(self.indices)


@dataclass
class AlgebraMatrix:
    """Factored P_N = U^{1/2} core U^{1/2} with U = diag(weights)."""

    N: int
    presentation: Presentation
    indices: List[MultiIndex]
    core: List[List[NCPoly]]
    weights: List[QScalar]

    def __len__(self) -> int:
        return len(self.indices)

    def scaled_entry(self, i: int, j: int) -> NCPoly:
        """Entry of the diagonally rescaled idempotent U * core (exact)."""
        return self.core[i][j].scale(self.weights[i])

    def diagonal_entry(self, i: int) -> NCPoly:
        """True (i,i) entry of P_N: u_i * core_ii, exact in Q(s)."""
        return self.core[i][i].scale(self.weights[i])

    def to_json(self) -> str:
        """JSON form with entries in canonical text (factored: core + weights)."""
        import json

        from .parser import print_expr

        return json.dumps(
            {
                "N": self.N,
                "n": self.presentation.n,
                "indices": [list(J) for J in self.indices],
                "weights": [str(u) for u in self.weights],
                "core": [[print_expr(e) for e in row] for row in self.core],
            },
            indent=1,
        )


def _psi_monomial(J: MultiIndex, N: int) -> Tuple[Fraction, Tuple[int, ...]]:
    """q-power exponent and word of the component monomial for index J."""
    n = len(J) - 1
    cross = sum(J[r] * J[s] for r in range(n + 1) for s in range(r + 1, n + 1))
    if N >= 0:
        e = Fraction(-cross, 2)
        w = tuple(letter(i, True) for i in range(n + 1) for _ in range(J[i]))
    else:
        e = Fraction(cross, 2) + sum(r * J[r] for r in range(n + 1))
        w = tuple(letter(i, False) for i in range(n + 1) for _ in range(J[i]))
    return e, w


def psi(N: int, n: int, P: Presentation | None = None) -> AlgebraVector:
    """The vector Psi_N over the level-n sphere, in factored form."""
    P = P or Presentation(n)
    idxs = multi_indices(abs(N), n)
    monos, weights = [], []
    for J in idxs:
        e, w = _psi_monomial(J, N)
        monos.append(NCPoly.word(w, qpow(e)))
        weights.append(qmultinomial(list(J)))
    return AlgebraVector(N, P, idxs, monos, weights)


def psi_dagger_psi(av: AlgebraVector) -> NCPoly:
    """Normal form of Psi_N^dag Psi_N (should be 1)."""
    P = av.presentation
    acc = NCPoly.zero()
    for m, u in zip(av.monomials, av.weights):
        acc = acc + mul(star(m), m, P).scale(u)
    return normalize(acc, P)


def projection(N: int, n: int, P: Presentation | None = None) -> AlgebraMatrix:
    """P_N = Psi_N Psi_N^dag in factored form (core_IJ = nf(m_I m_J^*))."""
    av = psi(N, n, P)
    P = av.presentation
    k = len(av)
    stars = [star(m) for m in av.monomials]
    core = [[mul(av.monomials[i], stars[j], P) for j in range(k)] for i in range(k)]
    return AlgebraMatrix(N, P, av.indices, core, av.weights)


def is_projection(M: AlgebraMatrix) -> bool:
    """Check core * U * core == core entrywise, i.e. P_N^2 = P_N."""
    P = M.presentation
    k = len(M)
    for i in range(k):
        for j in range(k):
            acc = NCPoly.zero()
            for l in range(k):
                acc = acc + mul(M.core[i][l], M.core[l][j], P).scale(M.weights[l])
            if normalize(acc - M.core[i][j], P).terms:
                return False
    return True


def is_selfadjoint(M: AlgebraMatrix) -> bool:
    """Check core_IJ == star(core_JI), i.e. P_N = P_N^dag."""
    P = M.presentation
    k = len(M)
    for i in range(k):
        for j in range(k):
            if normalize(M.core[i][j] - star(M.core[j][i], P), P).terms:
                return False
    return True


def qtrace(M: AlgebraMatrix) -> NCPoly:
    """q-trace sum_i q^{2i} M_ii with positional weights (Tr_q(P_1) = 1)."""
    P = M.presentation
    acc = NCPoly.zero()
    for i in range(len(M)):
        acc = acc + M.diagonal_entry(i).scale(qpow(2 * i))
    return normalize(acc, P)


def weight_matrix(N: int, n: int) -> List[QScalar]:
    """Diagonal of R_N: q^{(1/2) sum_i (n - 2i) j_i} at position J."""
    out = []
    for J in multi_indices(abs(N), n):
        e = Fraction(sum((n - 2 * i) * J[i] for i in range(n + 1)), 2)
        out.append(qpow(e))
    return out


def k2rho_eigenvalues(av: AlgebraVector) -> List[QScalar]:
    """Eigenvalues rho_J of K_2rho on the components of Psi_N."""
    out = []
    for m in av.monomials:
        res = uq_act(UqGenerator("K2rho"), m, av.presentation)
        (w, c), = m.terms.items()
        ev = res.terms.get(w, ZERO) / c
        if (res - m.scale(ev)).terms:
            raise ArithmeticError("component is not a K_2rho eigenvector (bug)")
        out.append(ev)
    return out


class UqMatrixRep:
    """Matrices of the component representation on span{m_J} (exact).

    sigma(x)_{J'J} is defined by x |> m_J = sum_{J'} sigma(x)_{J'J} m_{J'};
    it satisfies the U_q(su(n+1)) relations and is a constant diagonal
    conjugate of the representation on the normalized components.
    """

    def __init__(self, av: AlgebraVector):
        self.av = av
        self._word_pos = {next(iter(m.terms)): i for i, m in enumerate(av.monomials)}
        self._prefactor = [next(iter(m.terms.values())) for m in av.monomials]
        self._cache: Dict[UqGenerator, List[List[QScalar]]] = {}

    @property
    def dimension(self) -> int:
        return len(self.av)

    def matrix(self, x: UqGenerator) -> List[List[QScalar]]:
        cached = self._cache.get(x)
        if cached is not None:
            return cached
        k = len(self.av)
        out = [[ZERO] * k for _ in range(k)]
        for j, m in enumerate(self.av.monomials):
            img = uq_act(x, m, self.av.presentation)
            for w, c in img.terms.items():
                if w not in self._word_pos:
                    raise ArithmeticError("action does not close on the component span")
                jp = self._word_pos[w]
                out[jp][j] = c / self._prefactor[jp]
        self._cache[x] = out
        return out


def sigma_rep(N: int, n: int) -> UqMatrixRep:
    """Component matrix representation of the U_q(su(n+1)) generators."""
    return UqMatrixRep(psi(N, n))


# ---------------------------------------------------------------------------
# scalar-matrix helpers
# ---------------------------------------------------------------------------


def mat_mul(A: Sequence[Sequence[QScalar]], B: Sequence[Sequence[QScalar]]) -> List[List[QScalar]]:
    k = len(A)
    return [
        [sum((A[i][l] * B[l][j] for l in range(k)), ZERO) for j in range(k)]
        for i in range(k)
    ]


def mat_transpose(A: Sequence[Sequence[QScalar]]) -> List[List[QScalar]]:
    k = len(A)
    return [[A[j][i] for j in range(k)] for i in range(k)]


def mat_eq(A, B) -> bool:
    return all(a == b for ra, rb in zip(A, B) for a, b in zip(ra, rb))


def diag_conj(d: Sequence[QScalar], A: Sequence[Sequence[QScalar]], inverse: bool = False) -> List[List[QScalar]]:
    """d A d^{-1} (or d^{-1} A d) for a diagonal d."""
    k = len(A)
    out = [[ZERO] * k for _ in range(k)]
    for i in range(k):
        for j in range(k):
            if A[i][j].is_zero():
                continue
            f = d[j] / d[i] if inverse else d[i] / d[j]
            out[i][j] = A[i][j] * f
    return out


# ---------------------------------------------------------------------------
# equivariance
# ---------------------------------------------------------------------------

_STAR = {"E": "F", "F": "E", "K": "K", "Kinv": "Kinv"}
_S = {"E": ("E", -1, 1), "F": ("F", -1, -1), "K": ("Kinv", 1, 0), "Kinv": ("K", 1, 0)}


def gen_star(x: UqGenerator) -> UqGenerator:
    return UqGenerator(_STAR[x.kind], x.i)


def gen_antipode(x: UqGenerator, inverse: bool = False) -> Tuple[QScalar, UqGenerator]:
    """S(x) (or S^{-1}(x)) as (coefficient, generator)."""
    kind, sgn, qexp = _S[x.kind]
    if inverse:
        qexp = -qexp
    return QScalar.from_int(sgn) * qpow(qexp), UqGenerator(kind, x.i)


def _poly_mat_times_scalar_mat(Mp: List[List[NCPoly]], Ms: List[List[QScalar]]) -> List[List[NCPoly]]:
    k = len(Mp)
    out = [[NCPoly.zero() for _ in range(k)] for _ in range(k)]
    for i in range(k):
        for l in range(k):
            if Mp[i][l].is_zero():
                continue
            for j in range(k):
                if Ms[l][j].is_zero():
                    continue
                out[i][j] = out[i][j] + Mp[i][l].scale(Ms[l][j])
    return out


def _scalar_mat_times_poly_mat(Ms: List[List[QScalar]], Mp: List[List[NCPoly]]) -> List[List[NCPoly]]:
    k = len(Mp)
    out = [[NCPoly.zero() for _ in range(k)] for _ in range(k)]
    for i in range(k):
        for l in range(k):
            if Ms[i][l].is_zero():
                continue
            for j in range(k):
                out[i][j] = out[i][j] + Mp[l][j].scale(Ms[i][l])
    return out


def check_equivariance(N: int, n: int, x: UqGenerator) -> List[List[NCPoly]]:
    """Residual of the covariance identity for (P'_N, sigma^N), entrywise.

    Works with the diagonally rescaled pair p = U*core and
    sigma(y)^t = rho^{-1} sigma_comp(y^*) rho, where rho is the diagonal of
    K_2rho eigenvalues; this is the normalized pair conjugated by a constant
    diagonal matrix, so the residual vanishes iff the original one does.
    Returns the matrix of normalized residual entries (empty == equivariant).
    """
    av = psi(N, n)
    P = av.presentation
    rep = UqMatrixRep(av)
    rho = k2rho_eigenvalues(av)
    k = len(av)

    pmat = [[avm.scale(ONE) for avm in row] for row in _core_matrix(av)]
    for i in range(k):
        for j in range(k):
            pmat[i][j] = pmat[i][j].scale(av.weights[i])

    def sigma_t(y: UqGenerator) -> List[List[QScalar]]:
        return diag_conj(rho, rep.matrix(gen_star(y)), inverse=True)

    def act(gen: UqGenerator, M: List[List[NCPoly]]) -> List[List[NCPoly]]:
        return [[uq_act(gen, e, P) for e in row] for row in M]

    K = UqGenerator("K", x.i)
    Kinv = UqGenerator("Kinv", x.i)
    if x.kind in ("K", "Kinv"):
        lhs = _poly_mat_times_scalar_mat(act(x, pmat), sigma_t(x))
    elif x.kind in ("E", "F"):
        # Delta(x) = x (x) K + K^{-1} (x) x
        lhs_a = _poly_mat_times_scalar_mat(act(x, pmat), sigma_t(K))
        lhs_b = _poly_mat_times_scalar_mat(act(Kinv, pmat), sigma_t(x))
        lhs = [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(lhs_a, lhs_b)]
    else:
        raise ValueError("equivariance check supports E, F, K, K^-1")
    rhs = _scalar_mat_times_poly_mat(sigma_t(x), pmat)
    return [
        [normalize(lhs[i][j] - rhs[i][j], P) for j in range(k)]
        for i in range(k)
    ]


def _core_matrix(av: AlgebraVector) -> List[List[NCPoly]]:
    P = av.presentation
    stars = [star(m) for m in av.monomials]
    return [[mul(mi, sj, P) for sj in stars] for mi in av.monomials]


def check_rn_conjugation(N: int, n: int, x: UqGenerator) -> bool:
    """rho sigma(S(x))^t rho^{-1} == sigma(S^{-1}(x))^t on the component rep.

    rho = sigma(K_2rho) is the squared weight diagonal; the transposes make
    the conjugation implement S^{-2} rather than S^2.
    """
    av = psi(N, n)
    rep = UqMatrixRep(av)
    rho = k2rho_eigenvalues(av)
    cs, gs = gen_antipode(x)
    ci, gi = gen_antipode(x, inverse=True)
    lhs = diag_conj(rho, mat_transpose(rep.matrix(gs)))
    lhs = [[cs * e for e in row] for row in lhs]
    rhs = [[ci * e for e in row] for row in mat_transpose(rep.matrix(gi))]
    return mat_eq(lhs, rhs)
