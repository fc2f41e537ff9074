"""Array LDPC matrices ``H(q, a)`` and their symmetries.

``H(q, a)`` has ``a*q`` rows and ``q*q`` columns, ``q`` an odd prime and
``a <= q``.  Column ``(i, j)`` (both in ``Z_q``) has flat index ``j*q + i``
and is adjacent to the rows ``<s, i + s*j mod q>`` for ``s`` in
``Z_a``; row ``<s, t>`` has flat index ``s*q + t``.  With this layout the
matrix is the block array ``[P^(s*j)]`` with ``P`` the cyclic shift
``e_l -> e_(l+1)``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from .tanner import MeasurementMatrix


def _is_prime(q: int) -> bool:
    if q < 2:
        return False
    return all(q % p for p in range(2, int(q**0.5) + 1))


def check_params(q: int, a: int) -> None:
    if q < 3 or q % 2 == 0 or not _is_prime(q):
        raise ValueError(f"q must be an odd prime, got {q}")
    if not 1 <= a <= q:
        raise ValueError(f"need 1 <= a <= q, got a={a}, q={q}")


def column_id(q: int, i: int, j: int) -> int:
    return (j % q) * q + (i % q)


def column_pair(q: int, v: int) -> tuple[int, int]:
    """Inverse of :func:`column_id`: ``v -> (i, j)``."""
    return v % q, v // q


def strip_row(q: int, s: int, t: int) -> int:
    return s * q + (t % q)


def row_pair(q: int, c: int) -> tuple[int, int]:
    return c // q, c % q


@lru_cache(maxsize=32)
def build_H(q: int, a: int) -> MeasurementMatrix:
    """The binary array LDPC matrix ``H(q, a)``."""
    check_params(q, a)
    cols = []
    for v in range(q * q):
        i, j = column_pair(q, v)
        cols.append([strip_row(q, s, i + s * j) for s in range(a)])
    return MeasurementMatrix.from_supports(a * q, q * q, cols)


def column_rows(q: int, a: int, i: int, j: int) -> tuple[int, ...]:
    """Row values ``(i, i+j, ..., i+(a-1)j) mod q`` of column ``(i, j)``."""
    return tuple((i + s * j) % q for s in range(a))


def column_from_rows(q: int, values) -> int:
    """Flat column index from its row values (an arithmetic progression)."""
    values = [int(x) % q for x in values]
    i = values[0]
    j = (values[1] - values[0]) % q if len(values) > 1 else 0
    if any((i + s * j) % q != values[s] for s in range(len(values))):
        raise ValueError(f"{values} is not a column of H(q, a) for q={q}")
    return column_id(q, i, j)


# -- automorphisms -------------------------------------------------------------

@dataclass(frozen=True)
class Automorphism:
    """``phi(i, j) = (alpha*i + beta1, alpha*j + beta2)`` on columns, paired
    with ``psi(<s, t>) = <s, alpha*t + beta1 + s*beta2>`` on rows."""

    q: int
    alpha: int
    beta1: int
    beta2: int

    def __post_init__(self):
        if self.alpha % self.q == 0:
            raise ValueError("alpha must be a unit of Z_q")

    def column(self, v: int) -> int:
        i, j = column_pair(self.q, v)
        return column_id(self.q, self.alpha * i + self.beta1, self.alpha * j + self.beta2)

    def row(self, c: int) -> int:
        s, t = row_pair(self.q, c)
        return strip_row(self.q, s, self.alpha * t + self.beta1 + s * self.beta2)

    def column_map(self) -> np.ndarray:
        return np.array([self.column(v) for v in range(self.q * self.q)], dtype=np.int64)


def automorphisms(q: int):
    """All ``q^2 (q-1)`` maps ``(alpha, beta1, beta2)``."""
    for alpha in range(1, q):
        for b1 in range(q):
            for b2 in range(q):
                yield Automorphism(q, alpha, b1, b2)


def apply_automorphism(q: int, a: int, aut: Automorphism, vset) -> tuple[int, ...]:
    """Image of a set of columns under ``aut``."""
    check_params(q, a)
    return tuple(sorted(aut.column(int(v)) for v in vset))


def is_automorphism(mat: MeasurementMatrix, col_map, row_map) -> bool:
    """Whether ``(col_map, row_map)`` maps every edge to an edge (bijectively)."""
    col_map = list(col_map)
    row_map = list(row_map)
    if sorted(col_map) != list(range(mat.n)) or sorted(row_map) != list(range(mat.m)):
        return False
    edges = set(mat.entries())
    return all((row_map[c], col_map[v]) in edges for (c, v) in edges)


def canonical_under_translations(q: int, vset) -> tuple[int, ...]:
    """Smallest image of ``vset`` under the ``q^2`` translations."""
    best = None
    for b1 in range(q):
        for b2 in range(q):
            img = tuple(sorted(column_id(q, i + b1, j + b2) for i, j in (column_pair(q, v) for v in vset)))
            if best is None or img < best:
                best = img
    return best


def orbit(q: int, vset) -> set[tuple[int, ...]]:
    """Orbit of a column set under all automorphisms."""
    pairs = [column_pair(q, v) for v in vset]
    out = set()
    for alpha in range(1, q):
        for b1 in range(q):
            for b2 in range(q):
                out.add(tuple(sorted(column_id(q, alpha * i + b1, alpha * j + b2) for i, j in pairs)))
    return out


# -- minimum size termatiko sets for a = 3 ---------------------------------

def size3_support_matrices(q: int):
    """The two families of 3-column support matrices, one per ``j``.

    Yields ``(form, j, columns)`` where each column is the triple of row
    values.  ``j`` runs over ``Z_q`` minus ``{q-1, q-2}``.
    """
    for j in range(q):
        if j in (q - 1, q - 2):
            continue
        base = [(0, 0, 0), (2, 2 + j, 2 + 2 * j)]
        f1 = base + [(-2 - 2 * j, 1, 4 + 2 * j)]
        f2 = base + [(4 + 2 * j, 1 + j, -2)]
        for form, cols in ((1, f1), (2, f2)):
            yield form, j, [tuple(x % q for x in c) for c in cols]


def size3_termatiko_sets(q: int) -> list[tuple[int, ...]]:
    """All termatiko sets of size 3 of ``H(q, 3)`` generated from the two
    support-matrix families and their automorphism orbits."""
    check_params(q, 3)
    found: set[tuple[int, ...]] = set()
    for _, _, cols in size3_support_matrices(q):
        vset = [column_from_rows(q, c) for c in cols]
        if len(set(vset)) != 3:
            continue
        found |= orbit(q, vset)
    return sorted(found)


def size3_count(q: int) -> int:
    """Closed form ``q^2 (q-1)(q-2) / 3``."""
    return q * q * (q - 1) * (q - 2) // 3


# -- codeword templates --------------------------------------------------------

_TERM = re.compile(r"([+-]?)(\d*)([a-z]?)")


def parse_linear(expr: str) -> dict[str, int]:
    """Parse an integer linear form like ``"2k+3z"`` or ``"-4i+2j"``.

    Returns coefficients keyed by symbol; the constant term uses key ``""``.
    """
    s = expr.replace(" ", "")
    if not s:
        raise ValueError("empty expression")
    out: dict[str, int] = {}
    pos = 0
    while pos < len(s):
        mt = _TERM.match(s, pos)
        if mt is None or mt.end() == pos:
            raise ValueError(f"cannot parse {expr!r} at {s[pos:]!r}")
        sign, digits, sym = mt.groups()
        if not digits and not sym:
            raise ValueError(f"cannot parse {expr!r}")
        coef = int(digits) if digits else 1
        if sign == "-":
            coef = -coef
        out[sym] = out.get(sym, 0) + coef
        pos = mt.end()
        if pos < len(s) and s[pos] not in "+-":
            raise ValueError(f"cannot parse {expr!r}")
    return out


def eval_linear(form: dict[str, int], env: dict[str, int], q: int) -> int:
    total = 0
    for sym, coef in form.items():
        if sym == "":
            total += coef
        elif sym == "q":
            total += coef * q
        else:
            if sym not in env:
                raise KeyError(f"symbol {sym!r} has no value")
            total += coef * env[sym]
    return total % q


@dataclass(frozen=True)
class CodewordTemplate:
    """Support matrix of a codeword split into two termatiko halves.

    ``left`` and ``right`` hold one column per entry; a column is a tuple of
    ``a`` linear forms giving the row values ``i, i+j, ..., i+(a-1)j``.
    ``q_values`` lists the primes the template is meant for (None: any
    prime ``>= q_min``), ``params`` default values for the symbols, and
    ``drop`` positions of columns to delete after instantiation (used when
    a specialization makes some columns coincide).
    """

    name: str
    a: int
    weight: int
    q_min: int
    q_values: tuple[int, ...] | None
    q_exclude: tuple[int, ...]
    params: dict
    left: tuple
    right: tuple
    drop_left: tuple[int, ...] = ()
    drop_right: tuple[int, ...] = ()
    description: str = ""

    def valid_q(self, q: int) -> bool:
        if not _is_prime(q) or q < max(self.q_min, self.a) or q in self.q_exclude:
            return False
        return self.q_values is None or q in self.q_values

    def smallest_q(self) -> int:
        q = max(self.q_min, self.a, 3)
        while not self.valid_q(q):
            q += 1
        return q

    def instantiate(self, q: int, **params) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Columns ``(T, S)`` of both halves in ``H(q, a)``."""
        if not self.valid_q(q):
            raise ValueError(f"template {self.name} is not defined for q={q}")
        env = dict(self.params)
        env.update(params)
        halves = []
        for cols, drop in ((self.left, self.drop_left), (self.right, self.drop_right)):
            out = []
            for k, col in enumerate(cols):
                if k in drop:
                    continue
                vals = [eval_linear(f, env, q) for f in col]
                out.append(column_from_rows(q, vals))
            halves.append(tuple(out))
        return halves[0], halves[1]


def _parse_template(text: str, source: str) -> CodewordTemplate:
    meta: dict[str, str] = {}
    left: list = []
    right: list = []
    side = left
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "|":
            side = right
            continue
        if ":" in line:
            k, v = line.split(":", 1)
            meta[k.strip()] = v.strip()
            continue
        try:
            side.append(tuple(parse_linear(tok) for tok in line.split()))
        except ValueError as exc:
            raise ValueError(f"{source}:{ln}: {exc}") from None

    def ints(key):
        v = meta.get(key, "").strip()
        return tuple(int(x) for x in v.replace(",", " ").split()) if v else ()

    params = {}
    for item in meta.get("params", "").replace(",", " ").split():
        k, v = item.split("=")
        params[k] = int(v)
    a = int(meta["a"])
    for col in left + right:
        if len(col) != a:
            raise ValueError(f"{source}: column with {len(col)} entries, expected {a}")
    qv = ints("q_values")
    return CodewordTemplate(
        name=meta["name"], a=a, weight=int(meta["weight"]), q_min=int(meta.get("q_min", "3")),
        q_values=qv or None, q_exclude=ints("q_exclude"), params=params,
        left=tuple(left), right=tuple(right), drop_left=ints("drop_left"), drop_right=ints("drop_right"),
        description=meta.get("description", ""),
    )


@lru_cache(maxsize=1)
def split_catalog() -> tuple[CodewordTemplate, ...]:
    """Codeword templates shipped in ``termatiko/data/catalog``."""
    base = resources.files("termatiko") / "data" / "catalog"
    out = []
    for entry in sorted(base.iterdir(), key=lambda p: p.name):
        if entry.name.endswith(".txt"):
            out.append(_parse_template(entry.read_text(encoding="utf-8"), entry.name))
    return tuple(out)


def catalog_entry(name: str) -> CodewordTemplate:
    for t in split_catalog():
        if t.name == name:
            return t
    raise KeyError(name)


# -- termatiko distance table ----------------------------------------------------

# Results of exhaustive searches that sharpen the general lower bound a.
# key (q, a) -> lower bound
_EXHAUSTIVE_LOWER = {(11, 4): 5, (7, 5): 6, (11, 6): 8, (11, 7): 9}
# Upper bounds with a witness that is not a catalog template:
# (q, a) -> (value, how it was found)
_OTHER_UPPER = {(7, 7): (7, "split of a small stopping set")}


@dataclass(frozen=True)
class DistanceBounds:
    lower: int
    upper: int | None
    lower_source: str
    upper_source: str

    @property
    def exact(self) -> bool:
        return self.upper is not None and self.lower == self.upper

    def render(self) -> str:
        if self.upper is None:
            return f">= {self.lower}"
        if self.exact:
            return str(self.lower)
        if self.upper == self.lower + 1:
            return f"{self.lower} or {self.upper}"
        return f"{self.lower}..{self.upper}"


def termatiko_distance_table(q: int, a: int) -> DistanceBounds:
    """Lower and upper bounds on the termatiko distance of ``H(q, a)``.

    The lower bound is ``a`` (no 4-cycles, column weight ``a``) unless a
    stored exhaustive search raised it.  Upper bounds come from the
    smallest half of a catalog codeword valid at ``q``, or from the size-3
    family when ``a = 3``.
    """
    check_params(q, a)
    lower, lsrc = a, "column weight, no 4-cycles"
    if (q, a) in _EXHAUSTIVE_LOWER:
        lower, lsrc = _EXHAUSTIVE_LOWER[(q, a)], "exhaustive search"
    upper, usrc = None, ""
    if a == 3:
        upper, usrc = 3, "size-3 family"
    for t in split_catalog():
        if t.a == a and t.valid_q(q):
            T, S = t.instantiate(q)
            h = min(len(T), len(S))
            if upper is None or h < upper:
                upper, usrc = h, f"catalog:{t.name}"
    if (q, a) in _OTHER_UPPER:
        val, src = _OTHER_UPPER[(q, a)]
        if upper is None or val < upper:
            upper, usrc = val, src
    if upper is not None and upper < lower:
        raise AssertionError("inconsistent stored bounds")
    return DistanceBounds(lower, upper, lsrc, usrc)


def load_support(name: str):
    """Stored codeword support: returns ``(q, a, columns)``."""
    path = resources.files("termatiko") / "data" / "supports" / f"{name}.txt"
    meta = {}
    cols = []
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" in line:
            k, v = line.split(":", 1)
            meta[k.strip()] = v.strip()
            continue
        cols.append([int(x) for x in line.split()])
    q, a = int(meta["q"]), int(meta["a"])
    return q, a, tuple(column_from_rows(q, c) for c in cols)
