"""Exact sparse linear algebra over the rationals.

Vectors are ``{key: Fraction}`` dicts over an arbitrary hashable key set;
zero coefficients are never stored.  Matrices are sparse column families
indexed by integers.  Everything is exact: no floats, no rounding, ever.

The workhorse is :class:`Span`, a self-reducing row-echelon basis used both
for rank/kernel computations and for building quotient spaces (reduction
rewrites "large" keys in terms of "small" ones, per a caller-chosen key
order).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Hashable, Iterable, Optional, Sequence


# ---------------------------------------------------------------------------
# vector helpers
# ---------------------------------------------------------------------------

def vaxpy(acc: dict, c: Fraction, v: dict) -> None:
    """acc += c * v, in place, dropping zeros."""
    if not c:
        return
    for k, a in v.items():
        s = acc.get(k, 0) + c * a
        if s:
            acc[k] = s
        else:
            acc.pop(k, None)


def vadd(u: dict, v: dict) -> dict:
    out = dict(u)
    vaxpy(out, Fraction(1), v)
    return out


def vsub(u: dict, v: dict) -> dict:
    out = dict(u)
    vaxpy(out, Fraction(-1), v)
    return out


def vscale(c, u: dict) -> dict:
    c = Fraction(c)
    if not c:
        return {}
    return {k: c * a for k, a in u.items()}


def default_key_sort(key) -> tuple:
    return (repr(key),)


class Span:
    """Row-reduced span of a family of vectors.

    The pivot of a row is its largest key under ``key_sort``; rows are kept
    fully reduced against each other, so :meth:`reduce` canonically rewrites
    any vector modulo the span, eliminating large keys in favour of small
    ones.
    """

    def __init__(self, key_sort: Callable = default_key_sort):
        self._key = key_sort
        self.rows: dict = {}  # pivot -> vector with coefficient 1 at pivot

    @property
    def rank(self) -> int:
        return len(self.rows)

    def pivots(self):
        return self.rows.keys()

    def reduce(self, vec: dict) -> dict:
        out = dict(vec)
        while True:
            hit = None
            for k in out:
                if k in self.rows:
                    if hit is None or self._key(k) > self._key(hit):
                        hit = k
            if hit is None:
                return out
            vaxpy(out, -out[hit], self.rows[hit])

    def contains(self, vec: dict) -> bool:
        return not self.reduce(vec)

    def add(self, vec: dict) -> bool:
        """Insert ``vec``; returns True iff it enlarged the span."""
        r = self.reduce(vec)
        if not r:
            return False
        p = max(r, key=self._key)
        c = r[p]
        row = {k: a / c for k, a in r.items()}
        for other in self.rows.values():
            if p in other:
                vaxpy(other, -other[p], row)
        self.rows[p] = row
        return True

    def extend(self, vecs: Iterable[dict]) -> None:
        for v in vecs:
            self.add(v)


class SpanWithCoords:
    """Span that remembers how each echelon row combines the inserted basis.

    Inserted vectors that enlarge the span become coordinate basis vectors
    (numbered in insertion order); :meth:`coords` expresses a vector of the
    span in that basis, returning None if the vector is outside.
    """

    def __init__(self, key_sort: Callable = default_key_sort):
        self._key = key_sort
        self.rows: dict = {}  # pivot -> (vector, combo over basis index)
        self.basis: list = []  # the independent inserted vectors, in order

    @property
    def rank(self) -> int:
        return len(self.basis)

    def _reduce(self, vec: dict):
        out = dict(vec)
        combo: dict = {}
        while True:
            hit = None
            for k in out:
                if k in self.rows:
                    if hit is None or self._key(k) > self._key(hit):
                        hit = k
            if hit is None:
                return out, combo
            c = out[hit]
            row, rcombo = self.rows[hit]
            vaxpy(out, -c, row)
            vaxpy(combo, c, rcombo)

    def add(self, vec: dict) -> bool:
        r, combo = self._reduce(vec)
        if not r:
            return False
        idx = len(self.basis)
        self.basis.append(dict(vec))
        # vec = r + sum(combo * basis), so r = vec - combo-part
        full = {idx: Fraction(1)}
        vaxpy(full, Fraction(-1), combo)
        p = max(r, key=self._key)
        c = r[p]
        row = {k: a / c for k, a in r.items()}
        rcombo = {i: a / c for i, a in full.items()}
        for other, ocombo in self.rows.values():
            if p in other:
                f = -other[p]
                vaxpy(other, f, row)
                vaxpy(ocombo, f, rcombo)
        self.rows[p] = (row, rcombo)
        return True

    def coords(self, vec: dict) -> Optional[dict]:
        r, combo = self._reduce(vec)
        if r:
            return None
        return combo


def solve_combination(generators: Sequence[dict], target: dict,
                      key_sort: Callable = default_key_sort) -> Optional[dict]:
    """Coefficients expressing ``target`` as a combination of ``generators``.

    Returns ``{index: Fraction}`` or None when ``target`` is outside the span.
    """
    span = SpanWithCoords(key_sort)
    placement = {}  # span basis index -> generator index
    for i, g in enumerate(generators):
        before = span.rank
        if span.add(g):
            placement[before] = i
    combo = span.coords(target)
    if combo is None:
        return None
    return {placement[j]: c for j, c in combo.items()}


# ---------------------------------------------------------------------------
# sparse matrices
# ---------------------------------------------------------------------------

class Matrix:
    """Sparse rational matrix, stored column-major."""

    def __init__(self, nrows: int, ncols: int, cols: Optional[dict] = None):
        self.nrows = nrows
        self.ncols = ncols
        self.cols: dict = cols if cols is not None else {}

    @classmethod
    def from_columns(cls, columns: Sequence[dict], nrows: int) -> "Matrix":
        cols = {j: dict(c) for j, c in enumerate(columns) if c}
        return cls(nrows, len(columns), cols)

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls(n, n, {j: {j: Fraction(1)} for j in range(n)})

    @classmethod
    def zero(cls, nrows: int, ncols: int) -> "Matrix":
        return cls(nrows, ncols, {})

    def column(self, j: int) -> dict:
        return self.cols.get(j, {})

    def entry(self, i: int, j: int) -> Fraction:
        return self.cols.get(j, {}).get(i, Fraction(0))

    def set_entry(self, i: int, j: int, v) -> None:
        v = Fraction(v)
        col = self.cols.setdefault(j, {})
        if v:
            col[i] = v
        else:
            col.pop(i, None)
            if not col:
                self.cols.pop(j, None)

    def apply(self, vec: dict) -> dict:
        out: dict = {}
        for j, c in vec.items():
            col = self.cols.get(j)
            if col:
                vaxpy(out, c, col)
        return out

    def compose(self, other: "Matrix") -> "Matrix":
        """self @ other."""
        if other.nrows != self.ncols:
            raise ValueError("shape mismatch in compose")
        cols = {}
        for j, col in other.cols.items():
            c = self.apply(col)
            if c:
                cols[j] = c
        return Matrix(self.nrows, other.ncols, cols)

    def add(self, other: "Matrix") -> "Matrix":
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("shape mismatch in add")
        cols = {j: dict(c) for j, c in self.cols.items()}
        for j, c in other.cols.items():
            acc = cols.setdefault(j, {})
            vaxpy(acc, Fraction(1), c)
            if not acc:
                cols.pop(j)
        return Matrix(self.nrows, self.ncols, cols)

    def scale(self, c) -> "Matrix":
        c = Fraction(c)
        if not c:
            return Matrix.zero(self.nrows, self.ncols)
        return Matrix(self.nrows, self.ncols,
                      {j: {i: c * v for i, v in col.items()}
                       for j, col in self.cols.items()})

    def sub(self, other: "Matrix") -> "Matrix":
        return self.add(other.scale(-1))

    def is_zero(self) -> bool:
        return not self.cols

    def __eq__(self, other) -> bool:
        return (isinstance(other, Matrix)
                and self.nrows == other.nrows and self.ncols == other.ncols
                and self.sub(other).is_zero())

    def nonzero_entries(self):
        for j in sorted(self.cols):
            for i in sorted(self.cols[j]):
                yield i, j, self.cols[j][i]

    def rank(self) -> int:
        span = Span(key_sort=lambda i: (i,))
        for j in sorted(self.cols):
            span.add(self.cols[j])
        return span.rank

    def kernel_basis(self) -> list:
        """Basis of the right kernel, as vectors over column indices."""
        span = SpanWithCoords(key_sort=lambda i: (i,))
        kernel = []
        inserted = []  # span basis position -> column index
        for j in range(self.ncols):
            col = self.cols.get(j, {})
            combo = span.coords(col)
            if combo is None:
                span.add(col)
                inserted.append(j)
            else:
                vec = {inserted[i]: -c for i, c in combo.items()}
                vec[j] = Fraction(1)
                kernel.append(vec)
        return kernel

    def nullity(self) -> int:
        return self.ncols - self.rank()


# ---------------------------------------------------------------------------
# quotient spaces
# ---------------------------------------------------------------------------

class QuotientSpace:
    """Quotient of the free space on ``keys`` by the span of ``relations``.

    The quotient basis is the set of non-pivot keys; ``project`` rewrites a
    vector canonically in terms of it.  Section maps are tautological: a
    basis key lifts to itself.
    """

    def __init__(self, keys: Sequence, relations: Iterable[dict],
                 key_sort: Callable = default_key_sort):
        self.key_sort = key_sort
        self.span = Span(key_sort)
        for r in relations:
            self.span.add(r)
        self.basis = [k for k in keys if k not in self.span.rows]
        self.index = {k: i for i, k in enumerate(self.basis)}

    @property
    def dim(self) -> int:
        return len(self.basis)

    def project(self, vec: dict) -> dict:
        out = self.span.reduce(vec)
        for k in out:
            if k not in self.index:
                raise ValueError(f"vector leaves the ambient space at {k!r}")
        return out

    def coords(self, vec: dict) -> dict:
        return {self.index[k]: c for k, c in self.project(vec).items()}

    def lift(self, i: int) -> dict:
        return {self.basis[i]: Fraction(1)}

    def matrix_of(self, op: Callable, src) -> Matrix:
        """Matrix of the map induced by ``op`` from ``src`` (any space with
        ``dim`` and ``lift``) to this quotient."""
        cols = []
        for i in range(src.dim):
            cols.append(self.coords(op(src.lift(i))))
        return Matrix.from_columns(cols, self.dim)

    def induces(self, op: Callable, src: "QuotientSpace") -> bool:
        """True iff ``op`` maps src's relation span into this relation span."""
        for rel in src.span.rows.values():
            if not self.span.contains(op(rel)):
                return False
        return True


class SubquotientSpace:
    """(span of ``generators``) / (span of ``relations``) inside a based space.

    Relations must lie in the span of the generators.  Coordinates live on
    the echelonized generator basis; sections lift quotient basis elements
    to actual ambient vectors.
    """

    def __init__(self, generators: Iterable[dict], relations: Iterable[dict],
                 key_sort: Callable = default_key_sort):
        self.key_sort = key_sort
        self.coord_span = SpanWithCoords(key_sort)
        for g in generators:
            self.coord_span.add(g)
        n = self.coord_span.rank
        rel_coords = []
        for r in relations:
            c = self.coord_span.coords(r)
            if c is None:
                raise ValueError("relation outside the generated subspace")
            rel_coords.append(c)
        self.quotient = QuotientSpace(range(n), rel_coords,
                                      key_sort=lambda i: (i,))

    @property
    def dim(self) -> int:
        return self.quotient.dim

    @property
    def sub_dim(self) -> int:
        return self.coord_span.rank

    def coords(self, vec: dict) -> dict:
        c = self.coord_span.coords(vec)
        if c is None:
            raise ValueError("vector outside the subspace")
        return self.quotient.coords(c)

    def lift(self, i: int) -> dict:
        out: dict = {}
        for j, c in self.quotient.lift(i).items():
            vaxpy(out, c, self.coord_span.basis[j])
        return out

    def matrix_of(self, op: Callable, src) -> Matrix:
        cols = []
        for i in range(src.dim):
            cols.append(self.coords(op(src.lift(i))))
        return Matrix.from_columns(cols, self.dim)
