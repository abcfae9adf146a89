"""The differential graded algebra of noncommutative forms and its operators.

A form monomial is ``head * d(t1) * d(t2) * ...`` with ``head`` a word of the
augmented algebra (possibly empty) and each ``t_i`` a nonempty normal word;
its degree is the number of ``d`` factors.  A form vector is an exact
rational combination of monomials and may mix degrees.

All the operators of the calculus live on :class:`FormCalculus`: the
differential ``d``, the Hochschild boundary ``b``, the Karoubi operator
``kappa``, the Connes operator ``B``, the degree scaling ``N``, the
contraction ``h``, the cochain-twisted ``nabla``, and the harmonic
projection ``P`` (a universal polynomial in ``kappa`` per degree).  Sign
conventions are pinned by the operator identities in the test suite:
``kappa = 1 - (b d + d b)``, ``h d + d h = 1`` away from the unit, and
``nabla b + b nabla = 1`` in degrees >= 2.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence

from .linalg import Span, vaxpy
from .ncalg import Presentation, Word, length_lex_key


class FormMonomial(NamedTuple):
    head: Word
    tail: tuple  # tuple[Word, ...], entries nonempty normal words

    @property
    def degree(self) -> int:
        return len(self.tail)

    @property
    def total_length(self) -> int:
        return len(self.head) + sum(len(t) for t in self.tail)


UNIT = FormMonomial((), ())

FormVector = Dict[FormMonomial, Fraction]


def fm_sort_key(m: FormMonomial) -> tuple:
    return (m.total_length, len(m.tail), m.head, m.tail)


def add_into(acc: FormVector, c, vec: FormVector) -> None:
    c = Fraction(c)
    if not c:
        return
    for m, a in vec.items():
        s = acc.get(m, 0) + c * a
        if s:
            acc[m] = s
        else:
            acc.pop(m, None)


def scale(c, vec: FormVector) -> FormVector:
    c = Fraction(c)
    if not c:
        return {}
    return {m: c * a for m, a in vec.items()}


def add(u: FormVector, v: FormVector) -> FormVector:
    out = dict(u)
    add_into(out, 1, v)
    return out


def sub(u: FormVector, v: FormVector) -> FormVector:
    out = dict(u)
    add_into(out, -1, v)
    return out


def degree_part(vec: FormVector, n: int) -> FormVector:
    return {m: c for m, c in vec.items() if m.degree == n}


def degrees(vec: FormVector) -> set:
    return {m.degree for m in vec}


def truncate_degree(vec: FormVector, max_degree: int) -> FormVector:
    return {m: c for m, c in vec.items() if m.degree <= max_degree}


def form_str(pres: Presentation, vec: FormVector) -> str:
    """Canonical text form, sorted so reports are diffable."""
    if not vec:
        return "0"
    parts = []
    for m in sorted(vec, key=fm_sort_key):
        c = vec[m]
        body = pres.word_str(m.head) if (m.head or not m.tail) else ""
        ds = " ".join(f"d({pres.word_str(t)})" for t in m.tail)
        mono = " ".join(x for x in (body, ds) if x) or "1"
        if c == 1:
            parts.append(mono)
        elif c == -1:
            parts.append(f"- {mono}" if parts else f"-{mono}")
            continue
        else:
            parts.append(f"{c} {mono}")
    out = []
    for i, p in enumerate(parts):
        if i and not p.startswith("- "):
            out.append("+ " + p)
        else:
            out.append(p)
    return " ".join(out)


def form_monomials(pres: Presentation, degree: int, max_len: int,
                   include_unit_head: bool = True) -> list:
    """All degree-``degree`` monomials of total length <= max_len."""
    heads = pres.basis_words(max_len, include_unit=True)
    if not include_unit_head:
        heads = [h for h in heads if h]
    tails_pool = pres.basis_words(max_len)
    out = []

    def build(prefix: tuple, used: int, k: int):
        if k == 0:
            out.append(prefix)
            return
        for t in tails_pool:
            if used + len(t) <= max_len - (k - 1):
                build(prefix + (t,), used + len(t), k - 1)

    for h in heads:
        if len(h) + degree <= max_len:
            build((), len(h), degree)
            tails_here = out
            out = []
            for tl in tails_here:
                if len(h) + sum(len(t) for t in tl) <= max_len:
                    out_m = FormMonomial(h, tl)
                    out.append(out_m)
            yield from out
            out = []


class TermCapExceeded(Exception):
    def __init__(self, stage: str, count: int, cap: int):
        super().__init__(f"{stage}: {count} terms exceeds cap {cap}")
        self.stage = stage
        self.count = count
        self.cap = cap


class FormCalculus:
    """Operator calculus on forms over a fixed presentation.

    ``phi`` assigns to each generator a degree-2 form vector; by default it
    is zero on free generators and ``(1-2e) de de`` on a generator ``e``
    carrying the rule ``e*e -> e``.  The extension rule
    ``phi(ab) = a phi(b) + phi(a) b + da db`` then defines ``phi`` on all
    words.
    """

    def __init__(self, pres: Presentation,
                 phi: Optional[Dict[int, FormVector]] = None,
                 term_cap: int = 2_000_000):
        self.pres = pres
        self.term_cap = term_cap
        self._phi_cache: dict = {}
        self._mul_letter_cache: dict = {}
        self._poly_cache: dict = {}
        if phi is None:
            phi = {}
            for g in range(len(pres.generators)):
                rule = pres.rules.get((g, g))
                if rule == {(g,): Fraction(1)}:
                    phi[g] = self._standard_idempotent_phi(g)
        self.phi = {g: dict(v) for g, v in phi.items()}
        self._idempotent_gens = {
            g for g in range(len(pres.generators))
            if pres.rules.get((g, g)) == {(g,): Fraction(1)}}

    def _standard_idempotent_phi(self, g: int) -> FormVector:
        # (1 - 2e) de de
        e = (g,)
        return {FormMonomial((), (e, e)): Fraction(1),
                FormMonomial(e, (e, e)): Fraction(-2)}

    def _guard(self, vec: FormVector, stage: str) -> FormVector:
        if len(vec) > self.term_cap:
            raise TermCapExceeded(stage, len(vec), self.term_cap)
        return vec

    # -- products ---------------------------------------------------------

    def word_times_mono(self, w: Word, m: FormMonomial) -> FormVector:
        out: FormVector = {}
        for h, c in self.pres.normalize_word(tuple(w) + m.head).items():
            out[FormMonomial(h, m.tail)] = c
        return out

    def _mono_times_letter(self, m: FormMonomial, g: int) -> FormVector:
        key = (m, g)
        hit = self._mul_letter_cache.get(key)
        if hit is not None:
            return hit
        out: FormVector = {}
        if not m.tail:
            for h, c in self.pres.normalize_word(m.head + (g,)).items():
                out[FormMonomial(h, ())] = c
        else:
            # (w . d(t)) . g = w . d(t g) - (w . t) . d(g)
            front = FormMonomial(m.head, m.tail[:-1])
            t = m.tail[-1]
            for u, c in self.pres.normalize_word(t + (g,)).items():
                if u:  # d(1) = 0
                    mm = FormMonomial(m.head, m.tail[:-1] + (u,))
                    s = out.get(mm, 0) + c
                    if s:
                        out[mm] = s
                    else:
                        out.pop(mm, None)
            for m2, c2 in self.mono_times_word(front, t).items():
                mm = FormMonomial(m2.head, m2.tail + ((g,),))
                s = out.get(mm, 0) - c2
                if s:
                    out[mm] = s
                else:
                    out.pop(mm, None)
        self._mul_letter_cache[key] = out
        return out

    def mono_times_word(self, m: FormMonomial, w: Word) -> FormVector:
        cur: FormVector = {m: Fraction(1)}
        for g in w:
            nxt: FormVector = {}
            for m1, c1 in cur.items():
                add_into(nxt, c1, self._mono_times_letter(m1, g))
            cur = nxt
        return cur

    def mul_monomials(self, m1: FormMonomial, m2: FormMonomial) -> FormVector:
        out: FormVector = {}
        for mm, c in self.mono_times_word(m1, m2.head).items():
            out[FormMonomial(mm.head, mm.tail + m2.tail)] = c
        return out

    def mul(self, u: FormVector, v: FormVector) -> FormVector:
        out: FormVector = {}
        for m1, c1 in u.items():
            for m2, c2 in v.items():
                add_into(out, c1 * c2, self.mul_monomials(m1, m2))
        return self._guard(out, "form product")

    def unit(self) -> FormVector:
        return {UNIT: Fraction(1)}

    def from_word(self, w: Word) -> FormVector:
        out: FormVector = {}
        for h, c in self.pres.normalize_word(tuple(w)).items():
            out[FormMonomial(h, ())] = c
        return out

    def from_elt(self, a) -> FormVector:
        out: FormVector = {}
        for w, c in a.items():
            add_into(out, c, self.from_word(w))
        return out

    def d_word(self, w: Word) -> FormVector:
        out: FormVector = {}
        for u, c in self.pres.normalize_word(tuple(w)).items():
            if u:
                out[FormMonomial((), (u,))] = c
        return out

    # -- the operator family -----------------------------------------------

    def d(self, vec: FormVector) -> FormVector:
        out: FormVector = {}
        for m, c in vec.items():
            if m.head:
                mm = FormMonomial((), (m.head,) + m.tail)
                s = out.get(mm, 0) + c
                if s:
                    out[mm] = s
                else:
                    out.pop(mm, None)
        return out

    def b(self, vec: FormVector) -> FormVector:
        out: FormVector = {}
        for m, c in vec.items():
            n = m.degree
            if n == 0:
                continue
            sign = Fraction(-1) if (n - 1) % 2 else Fraction(1)
            front = FormMonomial(m.head, m.tail[:-1])
            a = m.tail[-1]
            add_into(out, c * sign, self.mono_times_word(front, a))
            add_into(out, -c * sign, self.word_times_mono(a, front))
        return out

    def kappa(self, vec: FormVector) -> FormVector:
        out: FormVector = {}
        for m, c in vec.items():
            n = m.degree
            if n == 0:
                s = out.get(m, 0) + c
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
                continue
            sign = Fraction(-1) if (n - 1) % 2 else Fraction(1)
            a = m.tail[-1]
            da = FormMonomial((), (a,))
            for mm, c2 in self.mono_times_word(da, m.head).items():
                mm2 = FormMonomial(mm.head, mm.tail + m.tail[:-1])
                s = out.get(mm2, 0) + c * sign * c2
                if s:
                    out[mm2] = s
                else:
                    out.pop(mm2, None)
        return out

    def connes_B(self, vec: FormVector) -> FormVector:
        out: FormVector = {}
        for n in sorted(degrees(vec)):
            part = self.d(degree_part(vec, n))
            acc: FormVector = {}
            cur = part
            for _ in range(n + 1):
                add_into(acc, 1, cur)
                cur = self.kappa(cur)
            add_into(out, 1, acc)
        return out

    def N(self, vec: FormVector) -> FormVector:
        out: FormVector = {}
        for m, c in vec.items():
            if m.degree:
                out[m] = c * m.degree
        return out

    def h(self, vec: FormVector) -> FormVector:
        out: FormVector = {}
        for m, c in vec.items():
            n = m.degree
            if n == 0:
                continue
            sign = Fraction(-1) if (n - 1) % 2 else Fraction(1)
            front = FormMonomial(m.head, m.tail[:-1])
            add_into(out, c * sign, self.mono_times_word(front, m.tail[-1]))
        return out

    def nabla(self, vec: FormVector) -> FormVector:
        out: FormVector = {}
        for m, c in vec.items():
            if m.degree == 0:
                continue
            a1 = m.tail[0]
            rest = m.tail[1:]
            for p, cp in self.phi_word(a1).items():
                for h, ch in self.pres.normalize_word(m.head + p.head).items():
                    mm = FormMonomial(h, p.tail + rest)
                    s = out.get(mm, 0) - c * cp * ch
                    if s:
                        out[mm] = s
                    else:
                        out.pop(mm, None)
        return out

    # -- the degree-2 cochain phi -------------------------------------------

    def phi_word(self, w: Word) -> FormVector:
        w = tuple(w)
        hit = self._phi_cache.get(w)
        if hit is not None:
            return hit
        if len(w) == 0:
            out: FormVector = {}
        elif len(w) == 1:
            out = dict(self.phi.get(w[0], {}))
        else:
            g, rest = w[0], w[1:]
            out = {}
            # phi(g rest) = g phi(rest) + phi(g) rest + dg d(rest)
            for p, c in self.phi_word(rest).items():
                add_into(out, c, self.word_times_mono((g,), p))
            for p, c in self.phi_word((g,)).items():
                add_into(out, c, self.mono_times_word(p, rest))
            for u, c in self.pres.normalize_word(rest).items():
                if u:
                    mm = FormMonomial((), ((g,), u))
                    s = out.get(mm, 0) + c
                    if s:
                        out[mm] = s
                    else:
                        out.pop(mm, None)
        self._phi_cache[w] = out
        return out

    def phi_elt(self, a) -> FormVector:
        out: FormVector = {}
        for w, c in a.items():
            add_into(out, c, self.phi_word(w))
        return out

    def phi_consistency_report(self) -> list:
        """Rules whose rewrite contradicts the extension of phi.

        Nonempty output means the presentation is not quasi-free for this
        cochain, and cylinder constructions must refuse it.
        """
        bad = []
        for l, r in self.pres.rules.items():
            via_extension = self.phi_word(l)
            via_rewrite: FormVector = {}
            for u, c in r.items():
                add_into(via_rewrite, c, self.phi_word(u))
            if via_extension != via_rewrite:
                bad.append((l, via_extension, via_rewrite))
        return bad

    # -- harmonic projection -------------------------------------------------

    def harmonic_poly(self, n: int) -> List[Fraction]:
        """Coefficients of the unique polynomial p_n with p_n(kappa) the
        projection onto the generalized 1-eigenspace on degree-n forms.

        p_n = 1 mod (x-1)^2 and p_n = 0 mod q_n, where
        (x^n - 1)(x^(n+1) - 1) = (x-1)^2 q_n(x).
        """
        hit = self._poly_cache.get(n)
        if hit is not None:
            return hit
        if n == 0:
            self._poly_cache[0] = [Fraction(1)]
            return self._poly_cache[0]
        # q_n = (1 + x + ... + x^(n-1)) (1 + x + ... + x^n)
        a = [Fraction(1)] * n
        bb = [Fraction(1)] * (n + 1)
        qn = _poly_mul(a, bb)
        sq = [Fraction(1), Fraction(-2), Fraction(1)]  # (x-1)^2
        g, u, v = _poly_ext_gcd(sq, qn)
        # normalize so g = 1
        c = g[-1]
        v = [x / c for x in v]
        pn = _poly_mul(v, qn)
        self._poly_cache[n] = pn
        return pn

    def harmonic(self, vec: FormVector) -> FormVector:
        out: FormVector = {}
        for n in sorted(degrees(vec)):
            part = degree_part(vec, n)
            coeffs = self.harmonic_poly(n)
            acc: FormVector = {}
            cur = part
            for i, c in enumerate(coeffs):
                if c:
                    add_into(acc, c, cur)
                if i + 1 < len(coeffs):
                    cur = self.kappa(cur)
            add_into(out, 1, acc)
        return out

    # aliases matching the calculus' usual one-letter names
    P = harmonic
    B = connes_B


# ---------------------------------------------------------------------------
# polynomial helpers (dense, over Fraction)
# ---------------------------------------------------------------------------

def _poly_trim(p: list) -> list:
    while p and not p[-1]:
        p.pop()
    return p


def _poly_mul(a: list, b: list) -> list:
    out = [Fraction(0)] * (len(a) + len(b) - 1) if a and b else []
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            if y:
                out[i + j] += x * y
    return _poly_trim(out)


def _poly_sub(a: list, b: list) -> list:
    out = [Fraction(0)] * max(len(a), len(b))
    for i, x in enumerate(a):
        out[i] += x
    for i, x in enumerate(b):
        out[i] -= x
    return _poly_trim(out)


def _poly_divmod(a: list, b: list) -> tuple:
    a = list(a)
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    while len(a) >= len(b) and _poly_trim(a):
        k = len(a) - len(b)
        c = a[-1] / b[-1]
        q[k] = c
        for i, x in enumerate(b):
            a[i + k] -= c * x
        _poly_trim(a)
    return _poly_trim(q), a


def _poly_ext_gcd(a: list, b: list) -> tuple:
    """g, u, v with u a + v b = g."""
    r0, r1 = list(a), list(b)
    s0, s1 = [Fraction(1)], []
    t0, t1 = [], [Fraction(1)]
    while _poly_trim(list(r1)):
        q, r = _poly_divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, _poly_sub(s0, _poly_mul(q, s1))
        t0, t1 = t1, _poly_sub(t0, _poly_mul(q, t1))
    return r0, s0, t0


# ---------------------------------------------------------------------------
# adic filtration levels
# ---------------------------------------------------------------------------

class FiltrationLevel:
    """Spanning data for the level-p piece of the ideal-adic filtration in
    form degree q, within a total-length bound.

    Generators are products  s0 d(t1) s1 ... d(tq) sq  whose between-``d``
    segments carry total adic degree >= p; the d arguments themselves do not
    count.  Expansion into canonical monomials is length-homogeneous, so the
    span is complete within the bound.
    """

    def __init__(self, calc: FormCalculus, p: int, q: int, len_bound: int):
        self.calc = calc
        self.p = p
        self.q = q
        self.len_bound = len_bound
        self.pres = calc.pres
        self._augmentation_fast = (
            set(self.pres.ideal) ==
            {(g,) for g in range(len(self.pres.generators))}
            and len(self.pres.ideal) > 0)
        self.span = Span(fm_sort_key)
        if p > 0 and not self._augmentation_fast:
            for v in self.generators():
                self.span.add(v)

    def monomial_in_level(self, m: FormMonomial) -> bool:
        """Sufficient monomial test; exact for the full augmentation ideal."""
        if self.p <= 0:
            return True
        if self._augmentation_fast:
            return m.total_length - m.degree >= self.p
        return self.pres.adic_degree(m.head) >= self.p

    def generators(self) -> Iterable[FormVector]:
        pres = self.pres
        calc = self.calc
        p, q, L = self.p, self.q, self.len_bound
        words = pres.basis_words(L)
        by_len: dict = {}
        for w in words:
            by_len.setdefault(len(w), []).append(w)
        max_adic = {}
        for l, ws in by_len.items():
            max_adic[l] = max(pres.adic_degree(w) for w in ws)
        max_adic[0] = 0

        def seg_choices(budget):
            yield (), 0
            for l in range(1, budget + 1):
                for w in by_len.get(l, []):
                    yield w, pres.adic_degree(w)

        def best_possible(budget):
            # crude upper bound for pruning
            return budget

        def rec(slot, budget, adic_so_far, prefix_vec):
            # slots: 0..2q alternating segment, d-arg, segment, ...
            if slot == 2 * q + 1:
                if adic_so_far >= p:
                    yield prefix_vec
                return
            is_segment = (slot % 2 == 0)
            remaining_dargs = (2 * q + 1 - slot) // 2
            if is_segment:
                for w, a in seg_choices(budget - remaining_dargs):
                    nxt: FormVector = {}
                    for m, c in prefix_vec.items():
                        add_into(nxt, c, calc.mono_times_word(m, w))
                    if not nxt:
                        continue
                    segs_left = q - slot // 2
                    if adic_so_far + a + (budget - len(w)) < p:
                        continue
                    yield from rec(slot + 1, budget - len(w),
                                   adic_so_far + a, nxt)
            else:
                for l in range(1, budget - (remaining_dargs - 1) + 1):
                    for t in by_len.get(l, []):
                        nxt = {FormMonomial(m.head, m.tail + (t,)): c
                               for m, c in prefix_vec.items()}
                        yield from rec(slot + 1, budget - l, adic_so_far, nxt)

        if p <= 0:
            return
        yield from rec(0, L, 0, {UNIT: Fraction(1)})

    def contains(self, vec: FormVector) -> bool:
        if self.p <= 0:
            return True
        rest = {m: c for m, c in vec.items() if not self.monomial_in_level(m)}
        if not rest:
            return True
        if self._augmentation_fast:
            return False
        return self.span.contains(rest)

    def relation_vectors(self) -> list:
        """Vectors spanning the level, for quotient construction."""
        if self.p <= 0:
            raise ValueError("level p <= 0 is the whole space")
        if self._augmentation_fast:
            out = []
            for n_deg in (self.q,):
                for m in form_monomials(self.pres, n_deg, self.len_bound):
                    if self.monomial_in_level(m):
                        out.append({m: Fraction(1)})
            return out
        return [dict(v) for v in self.span.rows.values()]


def filtration_level(calc: FormCalculus, p: int, q: int, len_bound: int) -> FiltrationLevel:
    return FiltrationLevel(calc, p, q, len_bound)


def refined_filtration_vectors(calc: FormCalculus, p: int, q: int,
                               len_bound: int) -> list:
    """Spanning family where one marked d-argument's own adic degree also
    counts toward the level (the finer filtration used by the terminal
    two-term complex)."""
    pres = calc.pres
    out = []
    base = FiltrationLevel(calc, p, q, len_bound)
    out.extend(base.relation_vectors() if p > 0 else [])
    if p <= 0:
        return out
    words = pres.basis_words(len_bound)

    def rec(slot, budget, adic_so_far, marked_used, prefix_vec):
        if slot == 2 * q + 1:
            if adic_so_far >= p and marked_used:
                out.append(prefix_vec)
            return
        is_segment = (slot % 2 == 0)
        remaining_dargs = (2 * q + 1 - slot) // 2
        if is_segment:
            for w in [()] + [w for w in words if len(w) <= budget - remaining_dargs]:
                nxt: FormVector = {}
                for m, c in prefix_vec.items():
                    add_into(nxt, c, calc.mono_times_word(m, w))
                if nxt:
                    rec(slot + 1, budget - len(w),
                        adic_so_far + pres.adic_degree(w), marked_used, nxt)
        else:
            for t in words:
                if len(t) <= budget - (remaining_dargs - 1):
                    nxt = {FormMonomial(m.head, m.tail + (t,)): c
                           for m, c in prefix_vec.items()}
                    a = pres.adic_degree(t)
                    if a and not marked_used:
                        rec(slot + 1, budget - len(t), adic_so_far + a, True, nxt)
                    rec(slot + 1, budget - len(t), adic_so_far, marked_used, nxt)

    rec(0, len_bound, 0, False, {UNIT: Fraction(1)})
    return out


# ---------------------------------------------------------------------------
# randomized forms for identity testing
# ---------------------------------------------------------------------------

def random_form(calc: FormCalculus, rng, degree: int, max_word_len: int = 2,
                terms: int = 3) -> FormVector:
    pres = calc.pres
    words = pres.basis_words(max_word_len)
    heads = [()] + words
    out: FormVector = {}
    for _ in range(terms):
        head = rng.choice(heads)
        tail = tuple(rng.choice(words) for _ in range(degree))
        c = Fraction(rng.randint(-3, 3))
        if not c:
            c = Fraction(1)
        m = FormMonomial(head, tail)
        s = out.get(m, 0) + c
        if s:
            out[m] = s
        else:
            out.pop(m, None)
    return out
