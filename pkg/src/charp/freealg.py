"""Free associative algebra on a few letters, its Lie part, the PBW
filtration and the free quantized (Rees) algebra.

Homogeneous pieces are handled as dense vectors indexed by words in base
``g`` (first letter most significant), so concatenation of homogeneous
tensors is ``np.kron``.  Sparse :class:`TensorElt` values are what the
public API passes around.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Any, Iterable, Mapping, Protocol, Sequence

import numpy as np

from . import linalg


class DegreeCap(ValueError):
    pass


class LevelViolation(ArithmeticError):
    pass


class NotLie(ArithmeticError):
    pass


DEFAULT_NAMES = ("x", "y", "z")


def witt_dimension(d: int, g: int) -> int:
    """Dimension of the degree-``d`` part of the free Lie algebra on ``g`` letters."""
    total = 0
    for e in range(1, d + 1):
        if d % e == 0:
            total += _mobius(e) * g ** (d // e)
    return total // d


def _mobius(n: int) -> int:
    result, q = 1, 2
    while q * q <= n:
        if n % q == 0:
            n //= q
            if n % q == 0:
                return 0
            result = -result
        q += 1
    return -result if n > 1 else result


class FreeAlgebra:
    """T(V) over F_p on ``g`` named generators with a degree cap."""

    def __init__(self, p: int, g: int = 2, cap: int | None = None, names: Sequence[str] | None = None):
        self.p = linalg.check_prime(p)
        if not 1 <= g <= 3:
            raise ValueError("between 1 and 3 generators are supported")
        self.g = g
        self.cap = 2 * self.p if cap is None else int(cap)
        self.names = tuple(names) if names is not None else DEFAULT_NAMES[:g]
        if len(self.names) != g:
            raise ValueError("one name per generator")

    def __repr__(self):
        return f"FreeAlgebra(p={self.p}, g={self.g}, cap={self.cap})"

    # -- elements -----------------------------------------------------
    def element(self, terms: Mapping[tuple, int] | Iterable[tuple[tuple, int]]) -> "TensorElt":
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[tuple, int] = {}
        for w, c in items:
            w = tuple(int(a) for a in w)
            if any(not 0 <= a < self.g for a in w):
                raise ValueError(f"letter out of range in {w}")
            if len(w) > self.cap:
                raise DegreeCap(f"word of degree {len(w)} exceeds cap {self.cap}")
            acc[w] = (acc.get(w, 0) + int(c)) % self.p
        return TensorElt(self, {w: c for w, c in sorted(acc.items(), key=_word_key) if c})

    def gen(self, i: int) -> "TensorElt":
        return self.element({(i,): 1})

    def gens(self) -> tuple["TensorElt", ...]:
        return tuple(self.gen(i) for i in range(self.g))

    def one(self) -> "TensorElt":
        return self.element({(): 1})

    def zero(self) -> "TensorElt":
        return TensorElt(self, {})

    def from_dense(self, vec: np.ndarray, d: int) -> "TensorElt":
        vec = np.asarray(vec) % self.p
        terms = {}
        for idx in np.flatnonzero(vec):
            terms[_index_to_word(int(idx), d, self.g)] = int(vec[idx])
        return self.element(terms)

    def parse(self, text: str) -> "TensorElt":
        """Read the signed-sum-of-words format, e.g. ``xxy - 2 yx + 1``."""
        lookup = {n: i for i, n in enumerate(self.names)}
        s = text.replace(" ", "")
        if not s or s == "0":
            return self.zero()
        if s[0] not in "+-":
            s = "+" + s
        terms: dict[tuple, int] = {}
        for sign, body in _split_signed(s):
            digits = ""
            while body and body[0].isdigit():
                digits, body = digits + body[0], body[1:]
            body = body.lstrip("*")
            coeff = int(digits) if digits else 1
            if body in ("", "1"):
                word: tuple = ()
            else:
                try:
                    word = tuple(lookup[ch] for ch in body)
                except KeyError as exc:
                    raise ValueError(f"unknown generator {exc.args[0]!r} in {text!r}") from None
            terms[word] = terms.get(word, 0) + sign * coeff
        return self.element(terms)

    # -- Lie subspaces and PBW ------------------------------------------
    def bracket_vector(self, letters: Sequence[int]) -> np.ndarray:
        """Dense tensor of the left-normed bracket ``[v1,[v2,[...,vd]]]``."""
        return _bracket_vector(tuple(letters), self.g, self.p)

    def lie_basis(self, d: int) -> "LieBasis":
        if d > self.cap:
            raise DegreeCap(f"degree {d} exceeds cap {self.cap}")
        return _lie_basis(self.p, self.g, d)

    def pbw_basis(self, d: int) -> "PBWBasis":
        if d > self.cap:
            raise DegreeCap(f"degree {d} exceeds cap {self.cap}")
        return _pbw_basis(self.p, self.g, d)

    def lie_coordinates(self, t: "TensorElt") -> list[tuple[int, tuple[int, ...]]]:
        """Write a homogeneous Lie element as a combination of basis brackets."""
        d = t.homogeneous_degree()
        basis = self.lie_basis(d)
        if not basis.brackets:
            if t.is_zero():
                return []
            raise NotLie("no Lie elements in this degree")
        try:
            coords, _ = linalg.solve(basis.vectors.T, t.dense(d), self.p)
        except linalg.Inconsistent:
            raise NotLie(f"{t} is not a Lie polynomial") from None
        return [(int(c), basis.brackets[i]) for i, c in enumerate(coords) if c]

    def pbw_coordinates(self, t: "TensorElt") -> list[tuple[int, tuple[tuple[int, ...], ...]]]:
        """Coordinates of ``t`` in the basis of sorted products of Lie basis elements.

        Each entry is ``(coeff, factors)`` where every factor is the letter
        sequence of a left-normed bracket.
        """
        out = []
        for d, part in t.homogeneous_parts().items():
            if d == 0:
                out.append((part.terms[()], ()))
                continue
            basis = self.pbw_basis(d)
            for i, c in enumerate(basis.coordinates(part.dense(d))):
                if c:
                    out.append((int(c), basis.products[i]))
        return out

    def pbw_level(self, t: "TensorElt") -> int:
        """Least ``n`` with ``t`` in the span of products of at most ``n`` Lie elements."""
        coords = self.pbw_coordinates(t)
        return max((len(f) for _, f in coords), default=0)


def _split_signed(s: str):
    out, i = [], 0
    while i < len(s):
        sign = -1 if s[i] == "-" else 1
        j = i + 1
        while j < len(s) and s[j] not in "+-":
            j += 1
        out.append((sign, s[i + 1:j]))
        i = j
    return out


def _word_key(item):
    w = item[0]
    return (len(w), w)


def _index_to_word(idx: int, d: int, g: int) -> tuple[int, ...]:
    letters = []
    for _ in range(d):
        idx, r = divmod(idx, g)
        letters.append(r)
    return tuple(reversed(letters))


def _word_to_index(w: Sequence[int], g: int) -> int:
    idx = 0
    for a in w:
        idx = idx * g + a
    return idx


@lru_cache(maxsize=None)
def _bracket_vector(letters: tuple[int, ...], g: int, p: int) -> np.ndarray:
    eye = np.eye(g, dtype=np.int64)
    t = eye[letters[-1]]
    for a in reversed(letters[:-1]):
        t = (np.kron(eye[a], t) - np.kron(t, eye[a])) % p
    return t


@dataclass(frozen=True)
class LieBasis:
    """Independent left-normed brackets spanning L^d, chosen greedily in lex order."""

    degree: int
    brackets: tuple[tuple[int, ...], ...]
    vectors: np.ndarray = field(repr=False)
    p: int

    @property
    def dim(self) -> int:
        return len(self.brackets)

    @cached_property
    def echelon(self) -> np.ndarray:
        return linalg.rref(self.vectors, self.p)[0][: self.dim]


@lru_cache(maxsize=None)
def _lie_basis(p: int, g: int, d: int) -> LieBasis:
    seqs = list(itertools.product(range(g), repeat=d))
    vecs = np.array([_bracket_vector(s, g, p) for s in seqs], dtype=np.int64)
    keep = linalg.independent_rows(vecs, p)
    vectors = vecs[keep] if keep else np.zeros((0, g ** d), dtype=np.int64)
    return LieBasis(d, tuple(seqs[i] for i in keep), vectors, p)


@dataclass(frozen=True)
class PBWBasis:
    """Sorted products of Lie basis elements of total degree ``d``."""

    degree: int
    products: tuple[tuple[tuple[int, ...], ...], ...]
    matrix: np.ndarray = field(repr=False)
    p: int

    def coordinates(self, vec: np.ndarray) -> np.ndarray:
        return (self._inverse @ (np.asarray(vec, dtype=np.int64) % self.p)) % self.p

    @cached_property
    def _inverse(self) -> np.ndarray:
        # columns of matrix.T are the product tensors
        return linalg.mat_inverse(self.matrix.T, self.p)


@lru_cache(maxsize=None)
def _pbw_basis(p: int, g: int, d: int) -> PBWBasis:
    # Lie basis elements of all degrees <= d in one global order
    elements = []
    for e in range(1, d + 1):
        lb = _lie_basis(p, g, e)
        for letters, vec in zip(lb.brackets, lb.vectors):
            elements.append((e, letters, vec))
    products: list[tuple] = []
    vectors: list[np.ndarray] = []

    def extend(start, remaining, chosen):
        if remaining == 0:
            vec = np.ones(1, dtype=np.int64)
            for i in chosen:
                vec = np.kron(vec, elements[i][2]) % p
            products.append(tuple(elements[i][1] for i in chosen))
            vectors.append(vec)
            return
        for i in range(start, len(elements)):
            if elements[i][0] <= remaining:
                extend(i, remaining - elements[i][0], chosen + [i])

    extend(0, d, [])
    matrix = np.array(vectors, dtype=np.int64)
    if matrix.shape != (g ** d, g ** d):
        raise ArithmeticError(f"PBW count mismatch in degree {d}: {matrix.shape}")
    return PBWBasis(d, tuple(products), matrix, p)


class TensorElt:
    """Finitely supported F_p-combination of words."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg: FreeAlgebra, terms: Mapping[tuple, int]):
        self.alg = alg
        self.terms = dict(terms)

    @property
    def p(self) -> int:
        return self.alg.p

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def homogeneous_degree(self) -> int:
        degs = {len(w) for w in self.terms}
        if len(degs) > 1:
            raise ValueError("element is not homogeneous")
        return degs.pop() if degs else 0

    def homogeneous_parts(self) -> dict[int, "TensorElt"]:
        parts: dict[int, dict] = {}
        for w, c in self.terms.items():
            parts.setdefault(len(w), {})[w] = c
        return {d: TensorElt(self.alg, t) for d, t in sorted(parts.items())}

    def dense(self, d: int) -> np.ndarray:
        vec = np.zeros(self.alg.g ** d, dtype=np.int64)
        for w, c in self.terms.items():
            if len(w) != d:
                raise ValueError(f"word {w} is not of degree {d}")
            vec[_word_to_index(w, self.alg.g)] = c
        return vec

    def substitute_letter(self, letter: int, image: "TensorElt") -> "TensorElt":
        out = self.alg.zero()
        for w, c in self.terms.items():
            prod = self.alg.one()
            for a in w:
                prod = prod * (image if a == letter else self.alg.gen(a))
            out = out + c * prod
        return out

    def _check(self, other):
        if not isinstance(other, TensorElt):
            return NotImplemented
        if other.alg is not self.alg:
            raise ValueError("elements of different free algebras")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        acc = dict(self.terms)
        for w, c in other.terms.items():
            acc[w] = (acc.get(w, 0) + c) % self.p
        return self.alg.element(acc)

    def __neg__(self):
        return self.alg.element({w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, c):
        if isinstance(c, (int, np.integer)):
            return self.alg.element({w: c * v for w, v in self.terms.items()})
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            return other * self
        other = self._check(other)
        if other is NotImplemented:
            return other
        return tensor_mul(self, other)

    def __pow__(self, e: int):
        out = self.alg.one()
        for _ in range(e):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, TensorElt):
            return NotImplemented
        return self.alg is other.alg and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    def __str__(self):
        if not self.terms:
            return "0"
        pieces = []
        for w, c in self.terms.items():
            body = "".join(self.alg.names[a] for a in w) or "1"
            pieces.append((c, body))
        out = ""
        for i, (c, body) in enumerate(pieces):
            # print c as c or as -(p - c), whichever is shorter in magnitude
            neg = c > self.p // 2
            mag = self.p - c if neg else c
            if body == "1":
                coef, body = "", f"{mag}"
            else:
                coef = "" if mag == 1 else f"{mag} "
            if i == 0:
                out += ("-" if neg else "") + coef + body
            else:
                out += (" - " if neg else " + ") + coef + body
        return out

    def __repr__(self):
        return f"TensorElt({self})"


def tensor_mul(a: TensorElt, b: TensorElt) -> TensorElt:
    """Concatenation product; words longer than the cap raise :class:`DegreeCap`."""
    if a.degree() + b.degree() > a.alg.cap and a.terms and b.terms:
        raise DegreeCap(f"product degree {a.degree() + b.degree()} exceeds cap {a.alg.cap}")
    acc: dict[tuple, int] = {}
    p = a.p
    for u, c in a.terms.items():
        for v, e in b.terms.items():
            w = u + v
            acc[w] = (acc.get(w, 0) + c * e) % p
    return a.alg.element(acc)


def commutator(a: TensorElt, b: TensorElt) -> TensorElt:
    return a * b - b * a


def lie_basis(d: int, g: int, p: int) -> LieBasis:
    return _lie_basis(linalg.check_prime(p), g, d)


# -- the quantized algebra ---------------------------------------------------

@dataclass(frozen=True, eq=False)
class QuantElt:
    """Element of the Rees algebra: a tensor sitting at PBW level ``level``."""

    tensor: TensorElt
    level: int

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("level must be non-negative")

    @property
    def alg(self) -> FreeAlgebra:
        return self.tensor.alg

    def is_valid(self) -> bool:
        return self.alg.pbw_level(self.tensor) <= self.level

    def h(self, k: int = 1) -> "QuantElt":
        return QuantElt(self.tensor, self.level + k)

    @cached_property
    def products(self) -> list[tuple[int, tuple[tuple[int, ...], ...]]]:
        coords = self.alg.pbw_coordinates(self.tensor)
        if any(len(f) > self.level for _, f in coords):
            raise LevelViolation(f"tensor needs more than {self.level} Lie factors")
        return coords

    def __eq__(self, other):
        if not isinstance(other, QuantElt):
            return NotImplemented
        return self.level == other.level and self.tensor == other.tensor

    def __hash__(self):
        return hash((self.tensor, self.level))

    def __str__(self):
        return f"({self.tensor}, level={self.level})"


def quant_gen(alg: FreeAlgebra, i: int) -> QuantElt:
    return QuantElt(alg.gen(i), 1)


def quant_mul(a: QuantElt, b: QuantElt) -> QuantElt:
    return QuantElt(a.tensor * b.tensor, a.level + b.level)


def quant_bracket(a: QuantElt, b: QuantElt) -> QuantElt:
    """``{a, b}`` with ``h{a, b} = ab - ba``."""
    level = a.level + b.level - 1
    t = commutator(a.tensor, b.tensor)
    if level < 0 or a.alg.pbw_level(t) > level:
        raise LevelViolation(f"commutator of {a} and {b} is not at level {level}")
    return QuantElt(t, level)


@dataclass(frozen=True, eq=False)
class LieExpansion:
    """A Lie polynomial with its expression through left-normed brackets."""

    tensor: TensorElt
    terms: tuple[tuple[int, tuple[int, ...]], ...]

    def bracket_text(self) -> str:
        names = self.tensor.alg.names
        p = self.tensor.p
        out = []
        for c, letters in self.terms:
            nested = names[letters[-1]]
            for a in reversed(letters[:-1]):
                nested = f"[{names[a]},{nested}]"
            out.append(nested if c == 1 else f"{c}*{nested}")
        return " + ".join(out) if out else "0"


def compute_L(p: int, alg: FreeAlgebra | None = None) -> LieExpansion:
    """``(x+y)^p - x^p - y^p`` in T(x, y), with its bracket expansion."""
    alg = alg or FreeAlgebra(p, 2)
    if alg.cap < p:
        raise DegreeCap(f"cap {alg.cap} is below p = {p}")
    x, y = alg.gen(0), alg.gen(1)
    t = (x + y) ** p - x ** p - y ** p
    return LieExpansion(t, tuple(alg.lie_coordinates(t)))


def compute_P(p: int, alg: FreeAlgebra | None = None) -> QuantElt:
    """``(xy)^p - x^p y^p`` sitting at level ``p + 1``."""
    alg = alg or FreeAlgebra(p, 2)
    if alg.cap < 2 * p:
        raise DegreeCap(f"cap {alg.cap} is below 2p = {2 * p}")
    x, y = alg.gen(0), alg.gen(1)
    t = (x * y) ** p - x ** p * y ** p
    q = QuantElt(t, p + 1)
    if alg.pbw_level(t) > p + 1:
        raise LevelViolation("P does not lie in F_{p+1}")
    return q


@lru_cache(maxsize=None)
def universal_L(p: int) -> LieExpansion:
    return compute_L(p)


@lru_cache(maxsize=None)
def universal_P(p: int) -> QuantElt:
    return compute_P(p)


def universal_polynomials(p: int) -> tuple[LieExpansion, QuantElt]:
    """Cached ``(L, P)`` for evaluation in concrete algebras."""
    return universal_L(p), universal_P(p)


def ad_power(x: TensorElt, y: TensorElt, k: int) -> TensorElt:
    for _ in range(k):
        y = commutator(x, y)
    return y


def verify_ad_fr(p: int, alg: FreeAlgebra | None = None, y_letter: int = 1) -> bool:
    """Check ``[x^p, y] = (ad x)^p (y)`` by full expansion in T(V)."""
    alg = alg or FreeAlgebra(p, 2, cap=max(2 * p, p + 1))
    x, y = alg.gen(0), alg.gen(y_letter)
    return commutator(x ** p, y) == ad_power(x, y, p)


# -- evaluation ---------------------------------------------------------------

class EvalTarget(Protocol):
    """Ring-like context that universal polynomials are evaluated in.

    Only the operations the polynomial actually uses are called: words
    need ``mul``/``one``, bracket expansions need ``bracket``, quantized
    elements also need ``h_power``.
    """

    def zero(self) -> Any: ...
    def one(self) -> Any: ...
    def add(self, a: Any, b: Any) -> Any: ...
    def scale(self, c: int, a: Any) -> Any: ...
    def mul(self, a: Any, b: Any) -> Any: ...
    def bracket(self, a: Any, b: Any) -> Any: ...
    def h_power(self, a: Any, k: int) -> Any: ...


def _nested(letters, images, target, cache):
    if letters in cache:
        return cache[letters]
    if len(letters) == 1:
        val = images[letters[0]]
    else:
        val = target.bracket(images[letters[0]], _nested(letters[1:], images, target, cache))
    cache[letters] = val
    return val


def eval_quant(poly, images: Sequence[Any], target: EvalTarget):
    """Evaluate a tensor, Lie expansion or quantized element at ``images``.

    A target may declare ``h_order`` (least k with ``h^k = 0``) so that
    terms killed by h are skipped.
    """
    cache: dict = {}
    if isinstance(poly, LieExpansion):
        out = target.zero()
        for c, letters in poly.terms:
            out = target.add(out, target.scale(c, _nested(tuple(letters), images, target, cache)))
        return out
    if isinstance(poly, QuantElt):
        h_order = getattr(target, "h_order", None)
        out = target.zero()
        for c, factors in poly.products:
            shift = poly.level - len(factors)
            if h_order is not None and shift >= h_order:
                continue
            val = target.one()
            for letters in factors:
                val = target.mul(val, _nested(tuple(letters), images, target, cache))
            if shift:
                val = target.h_power(val, shift)
            out = target.add(out, target.scale(c, val))
        return out
    if isinstance(poly, TensorElt):
        out = target.zero()
        for w, c in poly.terms.items():
            val = target.one()
            for a in w:
                val = target.mul(val, images[a])
            out = target.add(out, target.scale(c, val))
        return out
    raise TypeError(f"cannot evaluate {type(poly).__name__}")


class TensorTarget:
    """T(V) itself as an evaluation target (h acts as the identity on tensors)."""

    def __init__(self, alg: FreeAlgebra):
        self.alg = alg

    def zero(self):
        return self.alg.zero()

    def one(self):
        return self.alg.one()

    def add(self, a, b):
        return a + b

    def scale(self, c, a):
        return c * a

    def mul(self, a, b):
        return a * b

    def bracket(self, a, b):
        return commutator(a, b)

    def h_power(self, a, k):
        return a


class MatrixLieTarget:
    """A Lie algebra given by structure constants on a basis (brackets only)."""

    def __init__(self, p: int, structure: np.ndarray):
        self.p = p
        self.structure = np.asarray(structure, dtype=np.int64) % p  # [i, j, :] = {e_i, e_j}
        self.dim = self.structure.shape[0]

    def basis(self, i: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=np.int64)
        v[i] = 1
        return v

    def zero(self):
        return np.zeros(self.dim, dtype=np.int64)

    def add(self, a, b):
        return (a + b) % self.p

    def scale(self, c, a):
        return (c * a) % self.p

    def bracket(self, a, b):
        return np.einsum("i,j,ijk->k", a, b, self.structure) % self.p


def two_step_lie(p: int) -> MatrixLieTarget:
    """Span of x, y with ``{x, y} = y``; y spans the first filtration step."""
    s = np.zeros((2, 2, 2), dtype=np.int64)
    s[0, 1, 1] = 1
    s[1, 0, 1] = -1
    return MatrixLieTarget(p, s)


def ad_power_in(target, x, y, k: int):
    for _ in range(k):
        y = target.bracket(x, y)
    return y
