"""Multivector algebra on the exterior algebra of R^m for 3 <= m <= 6.

A :class:`MultiVector` of grade ``p`` stores one real coefficient per
increasing index subset ``I = (i1 < ... < ip)`` of ``{1, ..., m}``, in
lexicographic order. Coefficient arrays may carry leading batch axes, so a
whole grid of multivectors is a single object and every operation
broadcasts over the batch.

Conventions
-----------
* The basis ``e_I`` is orthonormal for the induced inner product.
* The Hodge star is fixed by ``b ^ *a = <b, a> *1`` with the orientation
  ``e1 < ... < em``.
* The contraction is the adjoint of the wedge: ``<a -| b, c> = <a, b ^ c>``.
* ``bullet`` agrees with the contraction on 1-vectors and is extended to
  higher grades as a graded derivation.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

MIN_DIM = 3
MAX_DIM = 6
TOL = 1e-12


def _check_dim(m):
    if not MIN_DIM <= m <= MAX_DIM:
        raise ValueError(f"dimension m={m} outside [{MIN_DIM}, {MAX_DIM}]")


def _perm_sign(seq) -> int:
    """Sign of the permutation sorting ``seq`` (distinct entries)."""
    seq = list(seq)
    inv = 0
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                inv += 1
    return -1 if inv % 2 else 1


@lru_cache(maxsize=None)
def basis(m: int, p: int) -> tuple[tuple[int, ...], ...]:
    """Increasing index subsets of size ``p`` (1-based), lexicographic."""
    return tuple(combinations(range(1, m + 1), p))


@lru_cache(maxsize=None)
def _position(m: int, p: int) -> dict:
    return {idx: k for k, idx in enumerate(basis(m, p))}


@lru_cache(maxsize=None)
def _wedge_table(m: int, p: int, q: int) -> np.ndarray:
    """``W[i, j, k]`` = coefficient of ``e_K`` in ``e_I ^ e_J``."""
    bp, bq, bpq = basis(m, p), basis(m, q), _position(m, p + q)
    table = np.zeros((len(bp), len(bq), comb(m, p + q)))
    for i, I in enumerate(bp):
        for j, J in enumerate(bq):
            if set(I) & set(J):
                continue
            merged = I + J
            table[i, j, bpq[tuple(sorted(merged))]] = _perm_sign(merged)
    table.setflags(write=False)
    return table


@lru_cache(maxsize=None)
def _star_table(m: int, p: int) -> np.ndarray:
    """``S[i, k]`` = coefficient of ``e_K`` in ``*e_I``."""
    full = set(range(1, m + 1))
    pos = _position(m, m - p)
    table = np.zeros((comb(m, p), comb(m, m - p)))
    for i, I in enumerate(basis(m, p)):
        rest = tuple(sorted(full - set(I)))
        table[i, pos[rest]] = _perm_sign(I + rest)
    table.setflags(write=False)
    return table


class MultiVector:
    """Grade-``p`` element of the exterior algebra of R^m.

    Parameters
    ----------
    m : int
        Ambient dimension, 3 <= m <= 6.
    p : int
        Grade, 0 <= p <= m.
    coef : array_like
        Coefficients with shape ``(..., comb(m, p))``.
    """

    __slots__ = ("m", "p", "coef")
    __array_priority__ = 100

    def __init__(self, m: int, p: int, coef):
        _check_dim(m)
        if not 0 <= p <= m:
            raise ValueError(f"grade {p} outside [0, {m}]")
        coef = np.asarray(coef, dtype=float)
        if coef.ndim == 0 or coef.shape[-1] != comb(m, p):
            raise ValueError(
                f"coefficient axis must have length {comb(m, p)} for m={m}, p={p}"
            )
        self.m = m
        self.p = p
        self.coef = coef

    # construction ---------------------------------------------------------
    @classmethod
    def zero(cls, m: int, p: int, batch=()) -> "MultiVector":
        return cls(m, p, np.zeros(tuple(batch) + (comb(m, p),)))

    @classmethod
    def scalar(cls, m: int, value=1.0) -> "MultiVector":
        value = np.asarray(value, dtype=float)
        return cls(m, 0, value[..., None])

    @classmethod
    def blade(cls, m: int, *indices: int) -> "MultiVector":
        """Wedge of basis vectors ``e_{i1} ^ ... ^ e_{ip}`` (any order)."""
        p = len(indices)
        out = cls.zero(m, p)
        if len(set(indices)) < p:
            return out
        key = tuple(sorted(indices))
        out.coef[_position(m, p)[key]] = _perm_sign(indices)
        return out

    @classmethod
    def vector(cls, v) -> "MultiVector":
        """Grade-1 multivector from an array with last axis of length m."""
        v = np.asarray(v, dtype=float)
        return cls(v.shape[-1], 1, v)

    @classmethod
    def volume(cls, m: int) -> "MultiVector":
        return cls(m, m, np.ones(1))

    @classmethod
    def from_dict(cls, m: int, p: int, items: dict) -> "MultiVector":
        out = cls.zero(m, p)
        pos = _position(m, p)
        for key, val in items.items():
            idx = tuple(int(c) for c in key) if isinstance(key, str) else tuple(key)
            out.coef[pos[idx]] = float(val)
        return out

    # access ---------------------------------------------------------------
    @property
    def batch_shape(self) -> tuple:
        return self.coef.shape[:-1]

    def coefficient(self, *indices: int):
        """Coefficient of ``e_{i1} ^ ... ^ e_{ip}`` including the ordering sign."""
        key = tuple(sorted(indices))
        return _perm_sign(indices) * self.coef[..., _position(self.m, self.p)[key]]

    def as_dict(self) -> dict:
        """``{"12": coef, ...}`` for an unbatched multivector."""
        if self.batch_shape:
            raise ValueError("as_dict needs an unbatched multivector")
        return {
            "".join(str(i) for i in idx): float(c)
            for idx, c in zip(basis(self.m, self.p), self.coef)
        }

    def __getitem__(self, item) -> "MultiVector":
        if not isinstance(item, tuple):
            item = (item,)
        return MultiVector(self.m, self.p, self.coef[item + (slice(None),)])

    def __repr__(self):
        return f"MultiVector(m={self.m}, p={self.p}, batch={self.batch_shape})"

    # linear structure -----------------------------------------------------
    def _same(self, other):
        if not isinstance(other, MultiVector):
            return NotImplemented
        if other.m != self.m or other.p != self.p:
            raise ValueError("dimension or grade mismatch")
        return other

    def __add__(self, other):
        other = self._same(other)
        if other is NotImplemented:
            return other
        return MultiVector(self.m, self.p, self.coef + other.coef)

    def __sub__(self, other):
        other = self._same(other)
        if other is NotImplemented:
            return other
        return MultiVector(self.m, self.p, self.coef - other.coef)

    def __neg__(self):
        return MultiVector(self.m, self.p, -self.coef)

    def __mul__(self, scalar):
        if isinstance(scalar, MultiVector):
            return NotImplemented
        s = np.asarray(scalar, dtype=float)
        return MultiVector(self.m, self.p, self.coef * s[..., None])

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        s = np.asarray(scalar, dtype=float)
        return MultiVector(self.m, self.p, self.coef / s[..., None])

    # algebra shortcuts ----------------------------------------------------
    def __xor__(self, other):
        return wedge(self, other)

    def norm(self):
        return np.sqrt(inner(self, self))


def _pair(a: MultiVector, b: MultiVector):
    if a.m != b.m:
        raise ValueError(f"dimension mismatch: {a.m} vs {b.m}")


def wedge(a: MultiVector, b: MultiVector) -> MultiVector:
    """Exterior product ``a ^ b`` (grade ``p + q``)."""
    _pair(a, b)
    if a.p + b.p > a.m:
        raise ValueError(f"grade overflow: {a.p} + {b.p} > {a.m}")
    table = _wedge_table(a.m, a.p, b.p)
    coef = np.einsum("...i,...j,ijk->...k", a.coef, b.coef, table)
    return MultiVector(a.m, a.p + b.p, coef)


def hodge_star(a: MultiVector) -> MultiVector:
    """Hodge star, ``b ^ *a = <b, a> *1``."""
    return MultiVector(a.m, a.m - a.p, a.coef @ _star_table(a.m, a.p))


def contract(a: MultiVector, b: MultiVector) -> MultiVector:
    """Contraction ``a -| b`` of grade ``p - q``, adjoint to ``b ^ .``."""
    _pair(a, b)
    if b.p > a.p:
        raise ValueError(f"cannot contract grade {a.p} by grade {b.p}")
    table = _wedge_table(a.m, b.p, a.p - b.p)
    coef = np.einsum("...i,...j,jki->...k", a.coef, b.coef, table)
    return MultiVector(a.m, a.p - b.p, coef)


def inner(a: MultiVector, b: MultiVector):
    """Induced inner product of two multivectors of equal grade."""
    _pair(a, b)
    if a.p != b.p:
        raise ValueError(f"grade mismatch: {a.p} vs {b.p}")
    return np.sum(a.coef * b.coef, axis=-1)


@lru_cache(maxsize=None)
def _bullet_table(m: int, p: int, q: int) -> np.ndarray:
    """``B[i, j, k]`` = coefficient of ``e_K`` in ``e_I . e_J``.

    Built from ``a . v = a -| v`` on 1-vectors and the rule
    ``a . (b ^ c) = (a . b) ^ c + (-1)^{qr} (a . c) ^ b`` applied with ``b``
    the first factor of each basis blade.
    """
    np_ = comb(m, p)
    out = np.zeros((np_, comb(m, q), comb(m, p + q - 2)))
    eye = np.eye(np_)
    for j, J in enumerate(basis(m, q)):
        for i in range(np_):
            alpha = MultiVector(m, p, eye[i])
            out[i, j] = _bullet_blade(alpha, J).coef
    out.setflags(write=False)
    return out


def _bullet_blade(alpha: MultiVector, J: tuple) -> MultiVector:
    first = MultiVector.blade(alpha.m, J[0])
    if len(J) == 1:
        return contract(alpha, first)
    rest = MultiVector.blade(alpha.m, *J[1:])
    r = len(J) - 1
    head = wedge(contract(alpha, first), rest)
    tail = wedge(_bullet_blade(alpha, J[1:]), first)
    return head + tail * (-1.0) ** r


def bullet(a: MultiVector, b: MultiVector) -> MultiVector:
    """The operator ``a . b`` of grade ``p + q - 2``.

    Equal to ``a -| b`` for a 1-vector ``b`` and a graded derivation in
    ``b`` otherwise.
    """
    _pair(a, b)
    if b.p < 1:
        raise ValueError("bullet needs a right factor of grade >= 1")
    if a.p + b.p - 2 < 0 or a.p + b.p - 2 > a.m:
        raise ValueError(f"grade out of range: {a.p} + {b.p} - 2")
    table = _bullet_table(a.m, a.p, b.p)
    coef = np.einsum("...i,...j,ijk->...k", a.coef, b.coef, table)
    return MultiVector(a.m, a.p + b.p - 2, coef)


def pushforward(matrix, a: MultiVector) -> MultiVector:
    """Action of a linear map of R^m on ``a`` (``v1 ^ v2 -> Mv1 ^ Mv2``)."""
    M = np.asarray(matrix, dtype=float)
    m, p = a.m, a.p
    if p == 0:
        return MultiVector(m, 0, a.coef.copy())
    images = np.zeros((comb(m, p), comb(m, p)))
    cols = [MultiVector.vector(M[:, j]) for j in range(m)]
    for i, I in enumerate(basis(m, p)):
        acc = cols[I[0] - 1]
        for k in I[1:]:
            acc = wedge(acc, cols[k - 1])
        images[i] = acc.coef
    return MultiVector(m, p, a.coef @ images)


class SimpleUnitNormal:
    """Unit simple (m-2)-vector representing an oriented normal plane.

    Parameters
    ----------
    underlying : MultiVector
        Grade ``m - 2`` multivector, possibly batched.
    check : bool
        Verify unit length and that the normal projection is a rank
        ``m - 2`` orthogonal projector.
    """

    __slots__ = ("underlying", "unit")

    def __init__(self, underlying: MultiVector, check: bool = True, tol: float = 1e-10):
        if underlying.p != underlying.m - 2:
            raise ValueError("normal must have grade m - 2")
        self.underlying = underlying
        self.unit = True
        if check:
            if np.max(np.abs(underlying.norm() - 1.0)) > tol:
                raise ValueError("normal is not unit")
            P = normal_projector(self)
            m = underlying.m
            rank = np.trace(P, axis1=-2, axis2=-1)
            if np.max(np.abs(P @ P - P)) > tol or np.max(np.abs(rank - (m - 2))) > tol:
                raise ValueError("normal is not simple")

    @classmethod
    def from_tangents(cls, e1: MultiVector, e2: MultiVector, check: bool = False):
        """``*(e1 ^ e2)`` for orthonormal tangent vectors."""
        return cls(hodge_star(wedge(e1, e2)), check=check)

    @property
    def m(self) -> int:
        return self.underlying.m

    def tangent_plane(self) -> MultiVector:
        """``*n``, the oriented tangent 2-vector."""
        return hodge_star(self.underlying)


def _as_mv(n):
    return n.underlying if isinstance(n, SimpleUnitNormal) else n


def project_normal(n, w: MultiVector) -> MultiVector:
    """Normal projection ``(-1)^{m-1} n -| (n -| w)`` of a 1-vector."""
    nv = _as_mv(n)
    if w.p != 1:
        raise ValueError("project_normal acts on 1-vectors")
    if not isinstance(n, SimpleUnitNormal):
        if np.max(np.abs(nv.norm() - 1.0)) > 1e-8:
            raise ValueError("normal is not unit")
    sign = (-1.0) ** (nv.m - 1)
    return contract(nv, contract(nv, w)) * sign


def normal_projector(n) -> np.ndarray:
    """Matrix of the normal projection, shape ``(..., m, m)``."""
    nv = _as_mv(n)
    m = nv.m
    sign = (-1.0) ** (m - 1)
    cols = []
    for j in range(m):
        e = MultiVector(m, 1, np.broadcast_to(np.eye(m)[j], nv.batch_shape + (m,)))
        cols.append(contract(nv, contract(nv, e)).coef * sign)
    return np.stack(cols, axis=-1)
