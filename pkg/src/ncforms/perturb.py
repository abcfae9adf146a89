"""The homological perturbation engine for filtered cochain complexes.

A filtered complex here is a finite window of based spaces whose basis
labels carry a filtration level; the differential never decreases the
level.  Given a contracting homotopy for the level-preserving part of the
differential, the perturbation recursion produces a contracting homotopy
for the whole differential, exactly, below a requested depth.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .linalg import Matrix

Label = Tuple[int, object]  # (filtration level, tag)


@dataclass
class FilteredComplex:
    """Cochain complex with level-labelled bases.

    ``spaces[n]`` is a list of ``(level, tag)`` labels; ``delta[n]`` maps
    degree n to degree n+1 and must not decrease the level.
    """
    spaces: Dict[int, List[Label]]
    delta: Dict[int, Matrix]

    def degrees(self) -> list:
        return sorted(self.spaces)

    def dim(self, n: int) -> int:
        return len(self.spaces.get(n, []))

    def max_level(self) -> int:
        return max((lv for labels in self.spaces.values() for lv, _ in labels),
                   default=0)

    def check_delta_squared(self) -> bool:
        for n, d in self.delta.items():
            nxt = self.delta.get(n + 1)
            if nxt is not None and not nxt.compose(d).is_zero():
                return False
        return True

    def split_differential(self) -> Dict[int, Dict[int, Matrix]]:
        """Components delta_k raising the filtration level by exactly k.

        Raises if any entry strictly decreases the level.
        """
        out: Dict[int, Dict[int, Matrix]] = {}
        for n, d in self.delta.items():
            src = self.spaces[n]
            dst = self.spaces.get(n + 1, [])
            for i, j, v in d.nonzero_entries():
                k = dst[i][0] - src[j][0]
                if k < 0:
                    raise ValueError(
                        f"differential lowers filtration at degree {n}: "
                        f"{src[j]} -> {dst[i]}")
                out.setdefault(k, {}).setdefault(
                    n, Matrix.zero(len(dst), len(src))).set_entry(i, j, v)
        return out


@dataclass
class Contraction:
    """Degree -1 maps h[n]: C^n -> C^(n-1)."""
    maps: Dict[int, Matrix]

    def level_components(self, C: FilteredComplex) -> Dict[int, Dict[int, Matrix]]:
        out: Dict[int, Dict[int, Matrix]] = {}
        for n, h in self.maps.items():
            src = C.spaces[n]
            dst = C.spaces.get(n - 1, [])
            for i, j, v in h.nonzero_entries():
                k = dst[i][0] - src[j][0]
                out.setdefault(k, {}).setdefault(
                    n, Matrix.zero(len(dst), len(src))).set_entry(i, j, v)
        return out


def _compose_graded(a: Dict[int, Matrix], b: Dict[int, Matrix],
                    b_shift: int) -> Dict[int, Matrix]:
    """(a o b)[n] = a[n + b_shift] @ b[n], where b maps degree n to n + b_shift."""
    out = {}
    for n, bm in b.items():
        am = a.get(n + b_shift)
        if am is not None:
            out[n] = am.compose(bm)
    return out


def _add_graded(a: Dict[int, Matrix], b: Dict[int, Matrix]) -> Dict[int, Matrix]:
    out = dict(a)
    for n, m in b.items():
        out[n] = out[n].add(m) if n in out else m
    return out


def perturb_homotopy(h0: Contraction, C: FilteredComplex, depth: int) -> Contraction:
    """Contracting homotopy for the full differential from one for its
    level-preserving part, by the recursion
    h_n = - sum_i h_0 delta_(n-i) h_i.

    The result is exact on all filtration shifts below ``depth``; the window
    must contain enough levels for that to be meaningful.
    """
    comps = C.split_differential()
    if depth > C.max_level() + 1:
        raise ValueError(
            f"requested depth {depth} exceeds the available filtration window "
            f"({C.max_level() + 1} levels)")
    h_parts: Dict[int, Dict[int, Matrix]] = {0: dict(h0.maps)}
    for k in range(1, depth):
        acc: Dict[int, Dict[int, Matrix]] = {}
        for i in range(k):
            dk = comps.get(k - i)
            if not dk:
                continue
            # h0 delta_(k-i) h_i ; h has degree -1, delta degree +1
            step = _compose_graded(dk, h_parts[i], b_shift=-1)
            step = _compose_graded(h0.maps, step, b_shift=0)
            acc = _add_graded(acc, step)
        h_parts[k] = {n: m.scale(-1) for n, m in acc.items()}
    total: Dict[int, Matrix] = {}
    for k, part in h_parts.items():
        total = _add_graded(total, part)
    return Contraction(total)


def homotopy_residuals(h: Contraction, C: FilteredComplex) -> Dict[int, Matrix]:
    """R[n] = (h delta + delta h - 1) at degree n, as matrices."""
    out = {}
    for n in C.degrees():
        dim = C.dim(n)
        if dim == 0:
            continue
        acc = Matrix.zero(dim, dim)
        d_n = C.delta.get(n)
        h_up = h.maps.get(n + 1)
        if d_n is not None and h_up is not None:
            acc = acc.add(h_up.compose(d_n))
        h_n = h.maps.get(n)
        d_dn = C.delta.get(n - 1)
        if h_n is not None and d_dn is not None:
            acc = acc.add(d_dn.compose(h_n))
        out[n] = acc.sub(Matrix.identity(dim))
    return out


def verify_contraction(h: Contraction, C: FilteredComplex, depth: int) -> dict:
    """Check 1 = h delta + delta h on all level shifts < depth.

    Returns a report dict with the surviving residual entries (those are
    allowed only at level shifts >= depth).
    """
    residuals = homotopy_residuals(h, C)
    bad = []
    allowed = []
    for n, R in residuals.items():
        labels = C.spaces[n]
        for i, j, v in R.nonzero_entries():
            shift = labels[i][0] - labels[j][0]
            if shift < depth:
                bad.append((n, labels[i], labels[j], v))
            else:
                allowed.append((n, shift))
    return {"passed": not bad, "violations": bad,
            "tail_entries": len(allowed), "depth": depth}


# ---------------------------------------------------------------------------
# seeded random instances (used as the exact-arithmetic oracle in tests)
# ---------------------------------------------------------------------------

def random_filtered_complex(rng, degrees: int = 3, pairs_per_degree: int = 3,
                            levels: int = 4) -> Tuple[FilteredComplex, Contraction]:
    """A contractible filtered complex with a known level-0 contraction.

    Built from matched pairs (x -> y across consecutive degrees, same level)
    and then conjugated by a random unipotent level-raising automorphism, so
    the differential acquires nontrivial higher components while delta_0 and
    h_0 stay the matched-pair maps.
    """
    spaces: Dict[int, List[Label]] = {}
    for n in range(degrees + 1):
        labels = []
        if n < degrees:
            # cover every level at least once across the degree so the
            # requested verification depth is always meaningful
            labels += [((i + n) % levels if i < levels else rng.randrange(levels),
                        ("s", n, i)) for i in range(pairs_per_degree)]
        if n > 0:
            labels += [(lv, ("t", n - 1, i)) for (lv, (_, _, i)) in
                       [l for l in spaces[n - 1] if l[1][0] == "s"]]
        spaces[n] = labels

    # delta0: source cell (s, n, i) at degree n maps to its target (t, n, i)
    delta: Dict[int, Matrix] = {}
    for n in range(degrees):
        src = spaces[n]
        dst = spaces[n + 1]
        dst_index = {lab: i for i, lab in enumerate(dst)}
        m = Matrix.zero(len(dst), len(src))
        for j, (lv, tag) in enumerate(src):
            if tag[0] == "s":
                m.set_entry(dst_index[(lv, ("t",) + tag[1:])], j, 1)
        delta[n] = m
    h0_maps: Dict[int, Matrix] = {}
    for n in range(1, degrees + 1):
        src = spaces[n]
        dst = spaces[n - 1]
        dst_index = {lab: i for i, lab in enumerate(dst)}
        m = Matrix.zero(len(dst), len(src))
        for j, (lv, tag) in enumerate(src):
            if tag[0] == "t":
                m.set_entry(dst_index[(lv, ("s",) + tag[1:])], j, 1)
        h0_maps[n] = m

    # unipotent level-raising change of basis S = 1 + U per degree
    S: Dict[int, Matrix] = {}
    S_inv: Dict[int, Matrix] = {}
    for n, labels in spaces.items():
        dim = len(labels)
        U = Matrix.zero(dim, dim)
        for _ in range(dim):
            i = rng.randrange(dim)
            j = rng.randrange(dim)
            if labels[i][0] > labels[j][0]:
                U.set_entry(i, j, rng.randint(-2, 2))
        s = Matrix.identity(dim).add(U)
        # U is nilpotent (strictly level-raising), invert by geometric series
        inv = Matrix.identity(dim)
        term = Matrix.identity(dim)
        for _ in range(levels + 1):
            term = U.compose(term).scale(-1)
            if term.is_zero():
                break
            inv = inv.add(term)
        S[n] = s
        S_inv[n] = inv
    new_delta = {n: S[n + 1].compose(d).compose(S_inv[n])
                 for n, d in delta.items()}
    C = FilteredComplex(spaces, new_delta)
    # delta_0 of the conjugated complex equals the original delta_0, and h0
    # still contracts it (level-0 parts are untouched by unipotent raising)
    return C, Contraction(h0_maps)
