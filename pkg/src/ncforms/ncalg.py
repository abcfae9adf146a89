"""Free words, rewriting presentations, and exact rational algebra elements.

A word is a tuple of generator indices; the empty word is the unit of the
augmented algebra.  An algebra element is a ``{word: Fraction}`` dict over
normal-form words.  Presentations carry rewrite rules (each left-hand
monomial maps to a combination of strictly smaller words in the
length-lexicographic order, so rewriting terminates) and an optional
monomial ideal used for adic degrees.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

Word = tuple  # tuple[int, ...]


class RewriteBudgetExceeded(Exception):
    """Rewriting did not reach a normal form within the step budget."""


def length_lex_key(word: Word) -> tuple:
    return (len(word), word)


def elt(word: Word, coeff=1) -> dict:
    c = Fraction(coeff)
    return {tuple(word): c} if c else {}


def elt_add(a: dict, b: dict) -> dict:
    out = dict(a)
    for w, c in b.items():
        s = out.get(w, 0) + c
        if s:
            out[w] = s
        else:
            out.pop(w, None)
    return out


def elt_scale(c, a: dict) -> dict:
    c = Fraction(c)
    if not c:
        return {}
    return {w: c * x for w, x in a.items()}


def elt_sub(a: dict, b: dict) -> dict:
    return elt_add(a, elt_scale(-1, b))


class Presentation:
    """Generators, rewrite rules, and a monomial ideal.

    ``rules`` maps a left-hand word to an algebra element supported on words
    strictly below it in length-lex order; this makes normalization a
    terminating rewriting process.  ``ideal`` is a tuple of monomial words
    generating a two-sided ideal, used only for adic degrees.
    """

    def __init__(self, generators: Sequence[str],
                 rules: Optional[Mapping[Word, Mapping[Word, Fraction]]] = None,
                 ideal: Sequence[Word] = (),
                 unital: bool = False):
        self.generators = tuple(generators)
        self.rules = {tuple(l): {tuple(w): Fraction(c) for w, c in r.items() if Fraction(c)}
                      for l, r in (rules or {}).items()}
        self.ideal = tuple(tuple(w) for w in ideal)
        self.unital = bool(unital)
        self._nf_cache: dict = {}
        self._validate()

    # -- construction checks -------------------------------------------------

    def _validate(self) -> None:
        n = len(self.generators)
        for l, r in self.rules.items():
            if not l:
                raise ValueError("empty rewrite left-hand side")
            if any(g < 0 or g >= n for g in l):
                raise ValueError("rule uses unknown generator")
            for w in r:
                if any(g < 0 or g >= n for g in w):
                    raise ValueError("rule result uses unknown generator")
                if length_lex_key(w) >= length_lex_key(l):
                    raise ValueError(
                        f"rule {self.word_str(l)} -> {self.word_str(w)} does not decrease the word order")
        for w in self.ideal:
            if not w:
                raise ValueError("ideal generators must be nonempty monomials")
            if any(g < 0 or g >= n for g in w):
                raise ValueError("ideal generator uses unknown generator")

    # -- rewriting ------------------------------------------------------------

    def is_normal(self, word: Word) -> bool:
        for l in self.rules:
            k = len(l)
            for i in range(len(word) - k + 1):
                if word[i:i + k] == l:
                    return False
        return True

    def normalize_word(self, word: Word, budget: int = 200000) -> dict:
        """Full normal form of a word, as an algebra element."""
        word = tuple(word)
        cached = self._nf_cache.get(word)
        if cached is not None:
            return dict(cached)
        steps = [0]

        def go(w: Word) -> dict:
            hit = self._nf_cache.get(w)
            if hit is not None:
                return hit
            for i in range(len(w)):
                for l, r in self.rules.items():
                    k = len(l)
                    if w[i:i + k] == l:
                        steps[0] += 1
                        if steps[0] > budget:
                            raise RewriteBudgetExceeded(self.word_str(word))
                        out: dict = {}
                        for u, c in r.items():
                            for v, c2 in go(w[:i] + u + w[i + k:]).items():
                                s = out.get(v, 0) + c * c2
                                if s:
                                    out[v] = s
                                else:
                                    out.pop(v, None)
                        self._nf_cache[w] = out
                        return out
            self._nf_cache[w] = {w: Fraction(1)}
            return self._nf_cache[w]

        return dict(go(word))

    def normalize(self, a: Mapping[Word, Fraction]) -> dict:
        out: dict = {}
        for w, c in a.items():
            for v, c2 in self.normalize_word(w).items():
                s = out.get(v, 0) + c * c2
                if s:
                    out[v] = s
                else:
                    out.pop(v, None)
        return out

    def multiply(self, a: Mapping, b: Mapping) -> dict:
        out: dict = {}
        for w1, c1 in a.items():
            for w2, c2 in b.items():
                for v, c in self.normalize_word(w1 + w2).items():
                    s = out.get(v, 0) + c1 * c2 * c
                    if s:
                        out[v] = s
                    else:
                        out.pop(v, None)
        return out

    def unit(self) -> dict:
        return {(): Fraction(1)}

    # -- bases ---------------------------------------------------------------

    def basis_words(self, max_len: int, include_unit: bool = False) -> list:
        """All normal-form words of length <= max_len, in length-lex order."""
        out = [()] if include_unit else []
        layer = [()]
        for _ in range(max_len):
            nxt = []
            for w in layer:
                for g in range(len(self.generators)):
                    w2 = w + (g,)
                    if self.is_normal(w2):
                        nxt.append(w2)
            out.extend(nxt)
            layer = nxt
            if not layer:
                break
        return out

    def is_finite_dimensional(self, probe: int = 12) -> bool:
        layer = [()]
        for _ in range(probe):
            layer = [w + (g,) for w in layer for g in range(len(self.generators))
                     if self.is_normal(w + (g,))]
            if not layer:
                return True
        return False

    # -- adic degrees ----------------------------------------------------------

    def adic_degree(self, word: Word) -> int:
        """Largest p with word in I^p: max count of disjoint ideal-generator
        occurrences, by dynamic programming along the word."""
        if not self.ideal:
            return 0
        n = len(word)
        deg = [0] * (n + 1)
        for i in range(1, n + 1):
            best = deg[i - 1]
            for g in self.ideal:
                k = len(g)
                if i >= k and word[i - k:i] == g:
                    cand = deg[i - k] + 1
                    if cand > best:
                        best = cand
            deg[i] = best
        return deg[n]

    def in_ideal_power(self, a: Mapping, p: int) -> bool:
        if p <= 0:
            return True
        return all(self.adic_degree(w) >= p for w in a)

    def reduce_mod_ideal_power(self, a: Mapping, p: int) -> dict:
        """Drop terms of adic degree >= p (the image in R/I^p)."""
        return {w: c for w, c in a.items() if self.adic_degree(w) < p}

    # -- formatting -------------------------------------------------------------

    def word_str(self, word: Word) -> str:
        if not word:
            return "1"
        return "*".join(self.generators[g] for g in word)

    def element_str(self, a: Mapping) -> str:
        if not a:
            return "0"
        parts = []
        for w in sorted(a, key=length_lex_key):
            c = a[w]
            if not w:
                parts.append(str(c))
            elif c == 1:
                parts.append(self.word_str(w))
            elif c == -1:
                parts.append("-" + self.word_str(w))
            else:
                parts.append(f"{c}*{self.word_str(w)}")
        text = " + ".join(parts)
        return text.replace("+ -", "- ")

    def parse_word(self, text: str) -> Word:
        text = text.strip()
        if text in ("1", ""):
            return ()
        names = {g: i for i, g in enumerate(self.generators)}
        out = []
        for part in text.split("*"):
            part = part.strip()
            if part not in names:
                raise ValueError(f"unknown generator {part!r}")
            out.append(names[part])
        return tuple(out)

    def parse_element(self, text: str) -> dict:
        text = text.strip()
        if text in ("0", ""):
            return {}
        text = text.replace("-", "+-")
        out: dict = {}
        for term in text.split("+"):
            term = term.strip()
            if not term:
                continue
            sign = Fraction(1)
            if term.startswith("-"):
                sign = Fraction(-1)
                term = term[1:].strip()
            coeff = Fraction(1)
            word: Word = ()
            pieces = [p.strip() for p in term.split("*")]
            start = 0
            if pieces and pieces[0] and (pieces[0][0].isdigit() or "/" in pieces[0]):
                coeff = Fraction(pieces[0])
                start = 1
            names = {g: i for i, g in enumerate(self.generators)}
            for p in pieces[start:]:
                if p == "1" or p == "":
                    continue
                if p not in names:
                    raise ValueError(f"unknown generator {p!r}")
                word = word + (names[p],)
            c = sign * coeff
            s = out.get(word, 0) + c
            if s:
                out[word] = s
            else:
                out.pop(word, None)
        return out


def unitalize(pres: Presentation) -> Presentation:
    """Adjoin a unit: the empty word becomes the unit of A + k.

    Generators are unchanged; an existing algebra unit (such as an idempotent
    generator) becomes an idempotent of the augmentation ideal.
    """
    return Presentation(pres.generators, pres.rules, pres.ideal, unital=True)


# ---------------------------------------------------------------------------
# local confluence
# ---------------------------------------------------------------------------

@dataclass
class ConfluenceReport:
    passed: bool
    checked: int
    failures: list = field(default_factory=list)  # (word, nf_left, nf_right)

    def __str__(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return f"confluence {status}: {self.checked} overlaps checked, {len(self.failures)} failures"


def check_local_confluence(pres: Presentation, max_len: int) -> ConfluenceReport:
    """Resolve all critical pairs of the rewrite system up to max_len."""
    rules = list(pres.rules.items())
    checked = 0
    failures = []

    def branch(word: Word, pos: int, lhs: Word, rhs: dict) -> dict:
        out: dict = {}
        for u, c in rhs.items():
            for v, c2 in pres.normalize_word(word[:pos] + u + word[pos + len(lhs):]).items():
                s = out.get(v, 0) + c * c2
                if s:
                    out[v] = s
                else:
                    out.pop(v, None)
        return out

    for a, (l1, r1) in enumerate(rules):
        for b, (l2, r2) in enumerate(rules):
            # suffix of l1 = prefix of l2
            for o in range(1, min(len(l1), len(l2))):
                if l1[len(l1) - o:] == l2[:o]:
                    w = l1 + l2[o:]
                    if len(w) <= max_len:
                        checked += 1
                        left = branch(w, 0, l1, r1)
                        right = branch(w, len(l1) - o, l2, r2)
                        if left != right:
                            failures.append((w, left, right))
            # l2 contained in l1
            if len(l2) <= len(l1):
                for i in range(len(l1) - len(l2) + 1):
                    if l1[i:i + len(l2)] == l2 and not (a == b and i == 0):
                        if len(l1) <= max_len:
                            checked += 1
                            left = branch(l1, 0, l1, r1)
                            right = branch(l1, i, l2, r2)
                            if left != right:
                                failures.append((l1, left, right))
    return ConfluenceReport(not failures, checked, failures)


# ---------------------------------------------------------------------------
# presentation files
# ---------------------------------------------------------------------------

def parse_presentation(text: str) -> Presentation:
    """Line-oriented presentation format; round-trips exactly.

    generators: x, y
    rules: x*x -> 0
    ideal: x*x
    unital: false
    """
    generators: list = []
    raw_rules: list = []
    ideal_words: list = []
    unital = False
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition(":")
        key = key.strip().lower()
        value = value.strip()
        if key == "generators":
            generators = [g.strip() for g in value.split(",") if g.strip()]
        elif key in ("rules", "rule"):
            lhs, arrow, rhs = value.partition("->")
            if not arrow:
                raise ValueError(f"rule line without '->': {line!r}")
            raw_rules.append((lhs.strip(), rhs.strip()))
        elif key == "ideal":
            ideal_words.extend(w.strip() for w in value.split(",") if w.strip())
        elif key == "unital":
            unital = value.lower() in ("true", "yes", "1")
        else:
            raise ValueError(f"unknown presentation key {key!r}")
    pres = Presentation(generators, unital=unital)
    rules = {pres.parse_word(l): pres.parse_element(r) for l, r in raw_rules}
    ideal = [pres.parse_word(w) for w in ideal_words]
    return Presentation(generators, rules, ideal, unital)


def format_presentation(pres: Presentation) -> str:
    lines = ["generators: " + ", ".join(pres.generators)]
    for l, r in pres.rules.items():
        lines.append(f"rules: {pres.word_str(l)} -> {pres.element_str(r)}")
    if pres.ideal:
        lines.append("ideal: " + ", ".join(pres.word_str(w) for w in pres.ideal))
    lines.append("unital: " + ("true" if pres.unital else "false"))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# stock presentations
# ---------------------------------------------------------------------------

def free_presentation(*names: str, ideal: Sequence[Word] = ()) -> Presentation:
    return Presentation(names or ("x",), ideal=ideal)


def idempotent_point() -> Presentation:
    """The ground field presented on one idempotent generator e, e*e -> e."""
    return Presentation(("e",), rules={(0, 0): {(0,): Fraction(1)}})


def nilpotent_line() -> Presentation:
    """One generator x with x*x -> 0 (a square-zero line)."""
    return Presentation(("x",), rules={(0, 0): {}})


def free_line_with_square_ideal() -> Presentation:
    """Free algebra on x with the monomial ideal (x*x)."""
    return Presentation(("x",), ideal=((0, 0),))


def free_line_with_augmentation_ideal() -> Presentation:
    """Free algebra on x with the monomial ideal (x)."""
    return Presentation(("x",), ideal=((0,),))
