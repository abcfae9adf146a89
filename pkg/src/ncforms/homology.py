"""Finite complexes of based rational vector spaces and their homology.

Builders here produce the Hochschild / cyclic / negative / periodic
complexes of a finite-dimensional presented algebra from the (b, B)
operators on forms, and the two-term supercomplex of a presented pair
(R, I) together with its unrolled nonnegatively graded version.  These are
the independent oracles the rest of the package is checked against.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .linalg import Matrix, QuotientSpace, Span
from .ncalg import Presentation
from .forms import (FormCalculus, FormMonomial, FormVector, FiltrationLevel,
                    add_into, degree_part, fm_sort_key, form_monomials)


@dataclass
class BasedSpace:
    labels: tuple

    def __post_init__(self):
        self.index = {l: i for i, l in enumerate(self.labels)}

    @property
    def dim(self) -> int:
        return len(self.labels)


@dataclass
class BettiTable:
    variant: str
    truncation: int
    betti: Dict[int, int]
    reliable: Dict[int, bool] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"variant": self.variant, "truncation": self.truncation,
                "betti": {str(k): v for k, v in sorted(self.betti.items())},
                "reliable": {str(k): v for k, v in sorted(self.reliable.items())}}


class TruncatedComplex:
    """Finite family of based spaces with differentials d_n: C^n -> C^(n+direction)."""

    def __init__(self, spaces: Dict[int, BasedSpace], diffs: Dict[int, Matrix],
                 direction: int = 1, name: str = ""):
        if direction not in (1, -1):
            raise ValueError("direction must be +1 or -1")
        self.spaces = spaces
        self.diffs = diffs
        self.direction = direction
        self.name = name

    def degrees(self) -> list:
        return sorted(self.spaces)

    def dim(self, n: int) -> int:
        sp = self.spaces.get(n)
        return sp.dim if sp else 0

    def check_composites_zero(self) -> bool:
        for n, dmat in self.diffs.items():
            nxt = self.diffs.get(n + self.direction)
            if nxt is not None and not nxt.compose(dmat).is_zero():
                return False
        return True

    def homology_rank(self, n: int) -> int:
        dim = self.dim(n)
        if dim == 0:
            return 0
        out = self.diffs.get(n)
        rank_out = out.rank() if out is not None else 0
        inc = self.diffs.get(n - self.direction)
        rank_in = inc.rank() if inc is not None else 0
        return dim - rank_out - rank_in

    def betti(self, variant: str = "", truncation: int = 0,
              reliable: Optional[Dict[int, bool]] = None) -> BettiTable:
        if not self.check_composites_zero():
            raise ValueError("differentials do not compose to zero")
        b = {n: self.homology_rank(n) for n in self.degrees()}
        return BettiTable(variant, truncation, b, reliable or {})


class SuperComplex:
    """Two-periodic complex: spaces E (even) and O (odd) with maps both ways."""

    def __init__(self, even: BasedSpace, odd: BasedSpace,
                 d_even_to_odd: Matrix, d_odd_to_even: Matrix, name: str = ""):
        self.even = even
        self.odd = odd
        self.d_eo = d_even_to_odd
        self.d_oe = d_odd_to_even
        self.name = name

    def check_composites_zero(self) -> bool:
        return (self.d_eo.compose(self.d_oe).is_zero()
                and self.d_oe.compose(self.d_eo).is_zero())

    def betti(self) -> Dict[int, int]:
        h_even = self.even.dim - self.d_eo.rank() - self.d_oe.rank()
        h_odd = self.odd.dim - self.d_oe.rank() - self.d_eo.rank()
        return {0: h_even, 1: h_odd}


# ---------------------------------------------------------------------------
# form bases of a finite-dimensional presented algebra
# ---------------------------------------------------------------------------

def algebra_form_basis(pres: Presentation, degree: int, len_bound: int,
                       unit_head: bool = True,
                       unit_degree_zero: bool = False) -> list:
    """Monomial basis of the degree-``degree`` forms of the presented algebra.

    Heads run over the augmented algebra except in degree zero, where the
    unit is included only when ``unit_degree_zero`` is set.
    """
    words = pres.basis_words(len_bound)
    heads = ([()] if (unit_head and (degree > 0 or unit_degree_zero)) else [])
    heads += words
    if degree == 0:
        return [FormMonomial(h, ()) for h in heads]
    out = []

    def tails(prefix, remaining, budget):
        if remaining == 0:
            yield prefix
            return
        for t in words:
            if len(t) <= budget - (remaining - 1):
                yield from tails(prefix + (t,), remaining - 1, budget - len(t))

    for h in heads:
        for tl in tails((), degree, len_bound - len(h)):
            out.append(FormMonomial(h, tl))
    return out


def operator_matrix(op: Callable, src: Sequence[FormMonomial],
                    dst: Sequence[FormMonomial]) -> Matrix:
    index = {m: i for i, m in enumerate(dst)}
    cols = []
    for m in src:
        col = {}
        for mm, c in op({m: Fraction(1)}).items():
            if mm not in index:
                raise ValueError(f"operator image leaves the basis at {mm}")
            col[index[mm]] = c
        cols.append(col)
    return Matrix.from_columns(cols, len(dst))


# ---------------------------------------------------------------------------
# (b, B) complexes: the independent oracle
# ---------------------------------------------------------------------------

def bb_complex(pres: Presentation, max_degree: int, variant: str,
               len_bound: Optional[int] = None,
               unit_degree_zero: bool = False):
    """Hochschild / cyclic / negative / periodic complexes of a presented
    algebra, truncated at form degree ``max_degree``.

    variant: "hh", "hc", "hn" return a TruncatedComplex (chain direction);
    "hp" returns a SuperComplex.  Degrees at the truncation edge lose Connes
    operator images and must be treated via stabilization.
    """
    if len_bound is None:
        if not pres.is_finite_dimensional():
            raise ValueError("infinite-dimensional algebra needs a length bound")
        len_bound = 12
    calc = FormCalculus(pres)
    N = max_degree
    bases = {n: algebra_form_basis(pres, n, len_bound + n,
                                   unit_degree_zero=unit_degree_zero)
             for n in range(N + 1)}
    b_mat = {n: operator_matrix(calc.b, bases[n], bases[n - 1])
             for n in range(1, N + 1)}
    B_mat = {n: operator_matrix(calc.connes_B, bases[n], bases[n + 1])
             for n in range(N)}
    variant = variant.lower()

    if variant == "hp":
        even_labels = [(n, m) for n in range(0, N + 1, 2) for m in bases[n]]
        odd_labels = [(n, m) for n in range(1, N + 1, 2) for m in bases[n]]
        even = BasedSpace(tuple(even_labels))
        odd = BasedSpace(tuple(odd_labels))

        def super_matrix(src: BasedSpace, dst: BasedSpace) -> Matrix:
            cols = []
            for (n, m) in src.labels:
                col: dict = {}
                if n >= 1:
                    for mm, c in calc.b({m: Fraction(1)}).items():
                        col[dst.index[(n - 1, mm)]] = col.get(dst.index[(n - 1, mm)], 0) + c
                if n + 1 <= N:
                    for mm, c in calc.connes_B({m: Fraction(1)}).items():
                        i = dst.index[(n + 1, mm)]
                        s = col.get(i, 0) + c
                        if s:
                            col[i] = s
                        else:
                            col.pop(i, None)
                cols.append({i: v for i, v in col.items() if v})
            return Matrix.from_columns(cols, dst.dim)

        return SuperComplex(even, odd, super_matrix(even, odd),
                            super_matrix(odd, even), name=f"hp(N={N})")

    if variant == "hh":
        slots = {n: [0] for n in range(N + 1)}
    elif variant == "hc":
        slots = {n: list(range(0, n // 2 + 1)) for n in range(N + 1)}
    elif variant == "hn":
        slots = {n: [-j for j in range((N - n) // 2 + 1)] for n in range(N + 1)}
    else:
        raise ValueError(f"unknown variant {variant!r}")

    spaces = {}
    for n in range(N + 1):
        labels = []
        for i in slots[n]:
            fdeg = n - 2 * i
            if 0 <= fdeg <= N:
                labels.extend((i, m) for m in bases[fdeg])
        spaces[n] = BasedSpace(tuple(labels))
    diffs = {}
    for n in range(1, N + 1):
        src, dst = spaces[n], spaces[n - 1]
        cols = []
        for (i, m) in src.labels:
            col: dict = {}
            fdeg = n - 2 * i
            if fdeg >= 1 and i in slots[n - 1]:
                for mm, c in calc.b({m: Fraction(1)}).items():
                    key = (i, mm)
                    if key in dst.index:
                        idx = dst.index[key]
                        s = col.get(idx, 0) + c
                        if s:
                            col[idx] = s
                        else:
                            col.pop(idx, None)
            if fdeg + 1 <= N and (i - 1) in slots[n - 1]:
                for mm, c in calc.connes_B({m: Fraction(1)}).items():
                    key = (i - 1, mm)
                    if key in dst.index:
                        idx = dst.index[key]
                        s = col.get(idx, 0) + c
                        if s:
                            col[idx] = s
                        else:
                            col.pop(idx, None)
            cols.append(col)
        diffs[n] = Matrix.from_columns(cols, dst.dim)
    return TruncatedComplex(spaces, diffs, direction=-1, name=f"{variant}(N={N})")


def hp_betti_stabilized(pres: Presentation, N: int,
                        len_bound: Optional[int] = None,
                        unit_degree_zero: bool = False) -> BettiTable:
    """Even/odd periodic Betti numbers with a stabilization flag from
    comparing truncations N and N+2."""
    b1 = bb_complex(pres, N, "hp", len_bound, unit_degree_zero).betti()
    b2 = bb_complex(pres, N + 2, "hp", len_bound, unit_degree_zero).betti()
    reliable = {k: b1[k] == b2[k] for k in (0, 1)}
    return BettiTable("hp", N, b2, reliable)


# ---------------------------------------------------------------------------
# the two-term supercomplex of a pair (R, I)
# ---------------------------------------------------------------------------

class TwoTermSupercomplex:
    """Degree-0 space against naturalized degree-1 forms, modulo the adic
    filtration at level n."""

    def __init__(self, calc: FormCalculus, n: int, len_bound: int,
                 unit_degree_zero: bool = True):
        self.calc = calc
        self.pres = calc.pres
        self.n = n
        self.len_bound = len_bound
        pres = self.pres
        words0 = [w for w in pres.basis_words(len_bound, include_unit=unit_degree_zero)
                  if pres.adic_degree(w) < n]
        self.zero_space = BasedSpace(tuple(words0))
        mon1 = list(algebra_form_basis(pres, 1, len_bound))
        rels = []
        level = FiltrationLevel(calc, n - 1, 1, len_bound)
        if n - 1 > 0:
            rels.extend(level.relation_vectors())
        # commutators [word, one-form]
        words = pres.basis_words(len_bound)
        for w in words:
            for m in mon1:
                if len(w) + m.total_length <= len_bound:
                    v: FormVector = {}
                    add_into(v, 1, calc.mono_times_word(m, w))
                    add_into(v, -1, calc.word_times_mono(w, m))
                    if v:
                        rels.append(v)
        self.one_space = QuotientSpace(
            [m for m in mon1 if m.total_length <= len_bound], rels, fm_sort_key)
        self.d_eo = self._matrix_nat_d()
        self.d_oe = self._matrix_b()

    def _matrix_nat_d(self) -> Matrix:
        cols = []
        for w in self.zero_space.labels:
            vec = self.calc.d({FormMonomial(w, ()): Fraction(1)})
            cols.append(self.one_space.coords(vec))
        return Matrix.from_columns(cols, self.one_space.dim)

    def _matrix_b(self) -> Matrix:
        cols = []
        for i in range(self.one_space.dim):
            vec = self.calc.b(self.one_space.lift(i))
            col = {}
            for m, c in vec.items():
                w = m.head
                if self.pres.adic_degree(w) < self.n:
                    j = self.zero_space.index.get(w)
                    if j is None:
                        raise ValueError("b image leaves the word basis")
                    s = col.get(j, 0) + c
                    if s:
                        col[j] = s
                    else:
                        col.pop(j, None)
            cols.append(col)
        return Matrix.from_columns(cols, self.zero_space.dim)

    def betti(self) -> Dict[int, int]:
        h_even = self.zero_space.dim - self.d_eo.rank() - self.d_oe.rank()
        h_odd = self.one_space.dim - self.d_oe.rank() - self.d_eo.rank()
        return {0: h_even, 1: h_odd}

    def check_composites_zero(self) -> bool:
        return (self.d_eo.compose(self.d_oe).is_zero()
                and self.d_oe.compose(self.d_eo).is_zero())


def x_complex(calc: FormCalculus, n: int, len_bound: int,
              unit_degree_zero: bool = True) -> TwoTermSupercomplex:
    return TwoTermSupercomplex(calc, n, len_bound, unit_degree_zero)
