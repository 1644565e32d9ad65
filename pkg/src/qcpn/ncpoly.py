"""Noncommutative *-polynomial engine for the odd quantum spheres.

Words are tuples of letters; letter ``2*i`` is the generator ``z_i`` and
``2*i + 1`` is ``z_i^*``.  Normal order interleaves by index,

    z_0^* < z_0 < z_1^* < z_1 < ... < z_n^* < z_n,

so a normal word is z_0^*^{a_0} z_0^{b_0} z_1^*^{a_1} z_1^{b_1} ... .  This
keeps every same-index pair adjacent, which is what lets the sphere
relation sum_j q^{2j} z_j^* z_j = 1 act as a rewrite rule (eliminating
z_n^* z_n) and makes the normal words an actual linear basis; a
starred-block-first order would hide the reducible pair inside words like
z_0^* z_1^* z_0 z_1 and normal forms would stop being unique.

Rewriting is memoized per presentation: the normal form of a word is
computed once and reused, which is what keeps the projection identity
checks fast.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Tuple

from .qcoeff import ONE, ZERO, QScalar, qpow

Word = Tuple[int, ...]
TermMap = Dict[Word, QScalar]

_Q = qpow(1)
_QINV = qpow(-1)
_ONE_MINUS_Q2 = ONE - qpow(2)
_MISS = object()

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20_000))


def letter(index: int, starred: bool) -> int:
    return 2 * index + (1 if starred else 0)


def letter_index(g: int) -> int:
    return g >> 1


def letter_starred(g: int) -> bool:
    return bool(g & 1)


@dataclass
class Presentation:
    """Level-n sphere presentation (generators z_0..z_n) with rule caches."""

    n: int
    sphere_reduction: bool = True
    max_steps: int = 50_000_000
    _nf_cache: Dict[Word, TermMap] = field(default_factory=dict, repr=False)
    _push_cache: Dict[Tuple[int, Word], TermMap] = field(default_factory=dict, repr=False)
    _pair_cache: Dict[Tuple[int, int], object] = field(default_factory=dict, repr=False)
    _steps: int = field(default=0, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("presentation level n must be >= 1")

    # -- single rewrite step --------------------------------------------------

    def _rewrite_pair(self, a: int, b: int) -> List[Tuple[QScalar, Word]] | None:
        """Rewrite for the adjacent pair (a, b), or None if already ordered."""
        ia, sa = a >> 1, a & 1
        ib, sb = b >> 1, b & 1
        n = self.n
        if sa == sb:
            if ia > ib:
                # z_j z_i -> q z_i z_j and z_j^* z_i^* -> q^{-1} z_i^* z_j^*  (j > i)
                return [(_Q if sa == 0 else _QINV, (b, a))]
            return None
        if sa == 0:  # unstarred then starred
            if ia > ib:  # z_j z_i^* -> q^{-1} z_i^* z_j  (j > i)
                return [(_QINV, (b, a))]
            if ia < ib:  # z_i z_j^* ordered (interleaved by index)
                return None
            # Same-index commutator, pre-solved into starred-first pairs only.
            # Without sphere reduction the cascade closes upward,
            #   z_i z_i^* -> z_i^* z_i - (1-q^2) sum_{j>i} q^{2(j-i-1)} z_j^* z_j;
            # with it the sphere identity is substituted as well, leaving only
            # indices strictly below i (plus a constant), which is what makes
            # the combined rewrite system terminate: raw z_j z_j^* tails would
            # oscillate with the sphere rule forever.
            if not self.sphere_reduction:
                out: List[Tuple[QScalar, Word]] = [(ONE, (b, a))]
                for j in range(ia + 1, n + 1):
                    out.append((-_ONE_MINUS_Q2 * qpow(2 * (j - ia - 1)), (letter(j, True), letter(j, False))))
                return out
            out = [(qpow(-2), (b, a)), (-_ONE_MINUS_Q2 * qpow(-2 * ia - 2), ())]
            for j in range(ia):
                out.append((_ONE_MINUS_Q2 * qpow(2 * j - 2 * ia - 2), (letter(j, True), letter(j, False))))
            return out
        # starred then unstarred
        if ia > ib:  # z_j^* z_i -> q z_i z_j^*  (j > i)
            return [(_Q, (b, a))]
        if ia == ib == n and self.sphere_reduction:
            # z_n^* z_n -> q^{-2n} (1 - sum_{j<n} q^{2j} z_j^* z_j)
            out = [(qpow(-2 * n), ())]
            for j in range(n):
                out.append((-qpow(2 * j - 2 * n), (letter(j, True), letter(j, False))))
            return out
        return None

    def _pair(self, a: int, b: int):
        key = (a, b)
        hit = self._pair_cache.get(key, _MISS)
        if hit is _MISS:
            hit = self._rewrite_pair(a, b)
            self._pair_cache[key] = hit
        return hit

    # -- word normal form ------------------------------------------------------
    #
    # Normalization works insertion-sort style: a letter is pushed onto the
    # front of an already-normal word, rewriting the boundary pair when
    # needed.  Memoizing on (letter, normal word) gives far more cache reuse
    # than memoizing whole unnormalized words.

    def _push(self, g: int, w: Word) -> TermMap:
        key = (g, w)
        cached = self._push_cache.get(key)
        if cached is not None:
            return cached
        if not w:
            res: TermMap = {(g,): ONE}
            self._push_cache[key] = res
            return res
        repl = self._pair(g, w[0])
        if repl is None:
            res = {(g,) + w: ONE}
            self._push_cache[key] = res
            return res
        self._steps += 1
        if self._steps > self.max_steps:
            raise RuntimeError("rewrite step budget exceeded (rule system bug?)")
        acc: TermMap = {}
        rest = w[1:]
        for coeff, mid in repl:
            poly: TermMap = {rest: ONE}
            for g2 in reversed(mid):
                poly = self._push_poly(g2, poly)
            for w2, c2 in poly.items():
                v = acc.get(w2, ZERO) + coeff * c2
                if v.is_zero():
                    acc.pop(w2, None)
                else:
                    acc[w2] = v
        self._push_cache[key] = acc
        return acc

    def _push_poly(self, g: int, poly: TermMap) -> TermMap:
        out: TermMap = {}
        for w, c in poly.items():
            for w2, c2 in self._push(g, w).items():
                v = out.get(w2, ZERO) + c * c2
                if v.is_zero():
                    out.pop(w2, None)
                else:
                    out[w2] = v
        return out

    def _normal_word(self, w: Word) -> TermMap:
        cached = self._nf_cache.get(w)
        if cached is not None:
            return cached
        poly: TermMap = {(): ONE}
        for g in reversed(w):
            poly = self._push_poly(g, poly)
        self._nf_cache[w] = poly
        return poly

    def check_letters(self, w: Word) -> None:
        for g in w:
            if not 0 <= (g >> 1) <= self.n:
                raise ValueError(f"generator index {g >> 1} out of range for n={self.n}")


class NCPoly:
    """Finite QScalar-linear combination of generator words."""

    __slots__ = ("terms",)

    def __init__(self, terms: TermMap | None = None):
        self.terms: TermMap = terms or {}

    # -- constructors ----------------------------------------------------------

    @staticmethod
    def zero() -> "NCPoly":
        return NCPoly({})

    @staticmethod
    def one() -> "NCPoly":
        return NCPoly({(): ONE})

    @staticmethod
    def scalar(c: QScalar) -> "NCPoly":
        return NCPoly({(): c}) if not c.is_zero() else NCPoly({})

    @staticmethod
    def gen(index: int, starred: bool = False) -> "NCPoly":
        return NCPoly({(letter(index, starred),): ONE})

    @staticmethod
    def word(letters: Iterable[int], coeff: QScalar = ONE) -> "NCPoly":
        w = tuple(letters)
        return NCPoly({w: coeff}) if not coeff.is_zero() else NCPoly({})

    # -- linear structure --------------------------------------------------------

    def __add__(self, other: "NCPoly") -> "NCPoly":
        out = dict(self.terms)
        for w, c in other.terms.items():
            v = out.get(w, ZERO) + c
            if v.is_zero():
                out.pop(w, None)
            else:
                out[w] = v
        return NCPoly(out)

    def __sub__(self, other: "NCPoly") -> "NCPoly":
        return self + (-other)

    def __neg__(self) -> "NCPoly":
        return NCPoly({w: -c for w, c in self.terms.items()})

    def scale(self, c: QScalar) -> "NCPoly":
        if c.is_zero():
            return NCPoly({})
        return NCPoly({w: c * cw for w, cw in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NCPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset((w, hash(c)) for w, c in self.terms.items()))

    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    # -- rendering ----------------------------------------------------------------

    @staticmethod
    def _word_str(w: Word) -> str:
        if not w:
            return "1"
        parts = []
        i = 0
        while i < len(w):
            g = w[i]
            j = i
            while j < len(w) and w[j] == g:
                j += 1
            name = f"z{g >> 1}" + ("*" if g & 1 else "")
            parts.append(name if j - i == 1 else f"{name}^{j - i}")
            i = j
        return " ".join(parts)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for w in sorted(self.terms):
            c = self.terms[w]
            cs = str(c)
            if c.is_one():
                term = self._word_str(w)
            elif w == ():
                term = cs if (c.is_monomial() or len(c.num) == 1) else f"({cs})"
            else:
                head = cs if c.is_monomial() else f"({cs})"
                term = f"{head} * {self._word_str(w)}"
            parts.append(term)
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"NCPoly({self})"


# ---------------------------------------------------------------------------
# algebra operations
# ---------------------------------------------------------------------------


def normalize(a: NCPoly, P: Presentation) -> NCPoly:
    """Unique normal form of a modulo the sphere relations (idempotent)."""
    out: TermMap = {}
    P._steps = 0  # the step budget bounds a single operation
    for w, c in a.terms.items():
        P.check_letters(w)
        for w2, c2 in P._normal_word(w).items():
            v = out.get(w2, ZERO) + c * c2
            if v.is_zero():
                out.pop(w2, None)
            else:
                out[w2] = v
    return NCPoly(out)


def mul(a: NCPoly, b: NCPoly, P: Presentation) -> NCPoly:
    """Normalized product."""
    out: TermMap = {}
    P._steps = 0
    for wa, ca in a.terms.items():
        for wb, cb in b.terms.items():
            c = ca * cb
            for w2, c2 in P._normal_word(wa + wb).items():
                v = out.get(w2, ZERO) + c * c2
                if v.is_zero():
                    out.pop(w2, None)
                else:
                    out[w2] = v
    return NCPoly(out)


def star(a: NCPoly, P: Presentation | None = None) -> NCPoly:
    """Antilinear antihomomorphism z_i <-> z_i^*; normalized if P given."""
    out: TermMap = {}
    for w, c in a.terms.items():
        w2 = tuple(g ^ 1 for g in reversed(w))
        out[w2] = c  # coefficients in Q(s) are real
    res = NCPoly(out)
    return normalize(res, P) if P is not None else res


# ---------------------------------------------------------------------------
# U_q(su(n+1)) generator action
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UqGenerator:
    """E_i, F_i, K_i, K_i^{-1} (1 <= i <= n), or the K-word K_2rho^{+-1}."""

    kind: str  # "E" | "F" | "K" | "Kinv" | "K2rho" | "K2rhoInv"
    i: int = 1

    def __str__(self) -> str:
        if self.kind in ("K2rho", "K2rhoInv"):
            return "K2rho" + ("^-1" if self.kind == "K2rhoInv" else "")
        suffix = {"E": "E", "F": "F", "K": "K", "Kinv": "K^-1"}[self.kind]
        return f"{suffix}_{self.i}"


def _k_weight(i: int, g: int, n: int) -> Fraction:
    """Exponent w with K_i |> g = q^w g for a single letter g."""
    t, starred = g >> 1, g & 1
    w = Fraction(0)
    if t == n - i:
        w += Fraction(1, 2)
    if t == n + 1 - i:
        w -= Fraction(1, 2)
    return -w if starred else w


def _k2rho_weight(g: int, n: int) -> int:
    """Exponent c with K_2rho |> g = q^c g."""
    acc = Fraction(0)
    for i in range(1, n + 1):
        acc += 2 * i * (n + 1 - i) * _k_weight(i, g, n)
    assert acc.denominator == 1
    return int(acc)


def _e_on_letter(i: int, g: int, n: int) -> Tuple[QScalar, int] | None:
    """E_i |> letter, or None if killed."""
    t, starred = g >> 1, g & 1
    if not starred:
        if t == n + 1 - i:  # E_i |> z_t = z_{t-1}
            return ONE, letter(t - 1, False)
        return None
    if t == n - i:  # E_i |> z_t^* = -q z_{t+1}^*
        return -_Q, letter(t + 1, True)
    return None


def _f_on_letter(i: int, g: int, n: int) -> Tuple[QScalar, int] | None:
    t, starred = g >> 1, g & 1
    if not starred:
        if t == n - i:  # F_i |> z_t = z_{t+1}
            return ONE, letter(t + 1, False)
        return None
    if t == n + 1 - i:  # F_i |> z_t^* = -q^{-1} z_{t-1}^*
        return -_QINV, letter(t - 1, True)
    return None


def uq_act(x: UqGenerator, a: NCPoly, P: Presentation) -> NCPoly:
    """Left module-algebra action of a U_q(su(n+1)) generator on a.

    E and F act through the coproduct Delta(E) = E (x) K + K^{-1} (x) E
    (likewise for F); K-type generators act multiplicatively.  Starred
    letters transform via x |> a^* = (S(x)^* |> a)^*.
    """
    n = P.n
    out = NCPoly.zero()
    if x.kind in ("K", "Kinv", "K2rho", "K2rhoInv"):
        sign = -1 if x.kind in ("Kinv", "K2rhoInv") else 1
        for w, c in a.terms.items():
            if x.kind in ("K", "Kinv"):
                e = sum((_k_weight(x.i, g, n) for g in w), Fraction(0)) * sign
            else:
                e = Fraction(sum(_k2rho_weight(g, n) for g in w) * sign)
            out = out + NCPoly.word(w, c * qpow(e))
        return normalize(out, P)
    if x.kind not in ("E", "F"):
        raise ValueError(f"unknown generator kind {x.kind}")
    on_letter = _e_on_letter if x.kind == "E" else _f_on_letter
    for w, c in a.terms.items():
        for p, g in enumerate(w):
            hit = on_letter(x.i, g, n)
            if hit is None:
                continue
            coeff, g2 = hit
            # K_i^{-1} weights to the left of p, K_i weights to the right
            e = Fraction(0)
            for r in range(p):
                e -= _k_weight(x.i, w[r], n)
            for r in range(p + 1, len(w)):
                e += _k_weight(x.i, w[r], n)
            out = out + NCPoly.word(w[:p] + (g2,) + w[p + 1:], c * coeff * qpow(e))
    return normalize(out, P)


def counit(x: UqGenerator) -> QScalar:
    return ZERO if x.kind in ("E", "F") else ONE
