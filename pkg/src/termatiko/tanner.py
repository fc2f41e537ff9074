"""Measurement matrices, their Tanner graphs and node-set algebra.

A :class:`MeasurementMatrix` holds a sparse nonnegative matrix with exact
rational entries.  Columns are *variables* (signal entries), rows are
*measurements*.  All indices are 0-based.
"""

from __future__ import annotations

import hashlib
import io
import os
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

import numpy as np

VARIABLE = "variable"
MEASUREMENT = "measurement"


class MatrixFormatError(ValueError):
    """A matrix file could not be parsed.  ``line`` is 1-based (0 if unknown)."""

    def __init__(self, message: str, line: int = 0, path: str | None = None):
        self.line = line
        self.path = path
        where = f"{path}:" if path else ""
        where += f"line {line}: " if line else ""
        super().__init__(where + message)


class MatrixValidationError(ValueError):
    """A matrix file parsed but its content is inconsistent."""


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, float):
        return Fraction(value)
    if isinstance(value, np.floating):
        return Fraction(float(value))
    return Fraction(str(value).strip())


class MeasurementMatrix:
    """Immutable sparse nonnegative matrix with rational entries.

    Parameters
    ----------
    m, n : int
        Number of measurements (rows) and variables (columns).
    entries : mapping ``(row, col) -> value``
        Nonzero entries.  Zero values are dropped; negative values are
        rejected.

    Notes
    -----
    Adjacency is stored both ways in CSR layout, sorted by index:
    ``row_ptr/row_idx`` list the variables of each measurement and
    ``col_ptr/col_idx`` the measurements of each variable.
    """

    __slots__ = (
        "m", "n", "_entries", "row_ptr", "row_idx", "col_ptr", "col_idx",
        "_row_adj", "_col_adj", "_binary", "_integer", "_digest",
    )

    def __init__(self, m: int, n: int, entries: Mapping[tuple[int, int], object]):
        m = int(m)
        n = int(n)
        if m < 0 or n < 0:
            raise ValueError("matrix dimensions must be nonnegative")
        clean: dict[tuple[int, int], Fraction] = {}
        for (r, c), val in entries.items():
            r, c = int(r), int(c)
            if not (0 <= r < m and 0 <= c < n):
                raise ValueError(f"entry ({r}, {c}) outside a {m}x{n} matrix")
            f = _as_fraction(val)
            if f < 0:
                raise ValueError(f"negative entry {f} at ({r}, {c})")
            if f != 0:
                clean[(r, c)] = f
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "_entries", clean)

        rows: list[list[int]] = [[] for _ in range(m)]
        cols: list[list[int]] = [[] for _ in range(n)]
        for r, c in sorted(clean):
            rows[r].append(c)
            cols[c].append(r)
        object.__setattr__(self, "_row_adj", tuple(tuple(x) for x in rows))
        object.__setattr__(self, "_col_adj", tuple(tuple(x) for x in cols))
        object.__setattr__(self, "row_ptr", _ptr(rows))
        object.__setattr__(self, "row_idx", _flat(rows))
        object.__setattr__(self, "col_ptr", _ptr(cols))
        object.__setattr__(self, "col_idx", _flat(cols))
        for arr in (self.row_ptr, self.row_idx, self.col_ptr, self.col_idx):
            arr.setflags(write=False)
        object.__setattr__(self, "_binary", all(v == 1 for v in clean.values()))
        object.__setattr__(self, "_integer", all(v.denominator == 1 for v in clean.values()))
        object.__setattr__(self, "_digest", None)

    def __setattr__(self, name, value):
        raise AttributeError("MeasurementMatrix is immutable")

    def __reduce__(self):
        return (MeasurementMatrix, (self.m, self.n, self._entries))

    # -- construction helpers -------------------------------------------
    @classmethod
    def from_dense(cls, rows) -> "MeasurementMatrix":
        """Build from a 2-D array-like (numbers, strings or Fractions)."""
        rows = [list(r) for r in rows]
        m = len(rows)
        n = len(rows[0]) if m else 0
        entries = {}
        for i, r in enumerate(rows):
            if len(r) != n:
                raise ValueError("ragged dense matrix")
            for j, v in enumerate(r):
                f = _as_fraction(v)
                if f != 0:
                    entries[(i, j)] = f
        return cls(m, n, entries)

    @classmethod
    def from_supports(cls, m: int, n: int, col_supports: Iterable[Iterable[int]]) -> "MeasurementMatrix":
        """Binary matrix given the row support of every column."""
        entries = {}
        for j, rows in enumerate(col_supports):
            for r in rows:
                entries[(int(r), j)] = 1
        return cls(m, n, entries)

    @classmethod
    def from_row_supports(cls, n: int, row_supports: Iterable[Iterable[int]]) -> "MeasurementMatrix":
        """Binary matrix given the column support of every row."""
        row_supports = [list(r) for r in row_supports]
        entries = {}
        for i, cols in enumerate(row_supports):
            for c in cols:
                entries[(i, int(c))] = 1
        return cls(len(row_supports), n, entries)

    # -- queries ----------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.m, self.n)

    @property
    def nnz(self) -> int:
        return len(self._entries)

    @property
    def is_binary(self) -> bool:
        return self._binary

    @property
    def is_integer(self) -> bool:
        return self._integer

    def entries(self) -> dict[tuple[int, int], Fraction]:
        return dict(self._entries)

    def get(self, row: int, col: int) -> Fraction:
        return self._entries.get((row, col), Fraction(0))

    def row(self, c: int) -> tuple[int, ...]:
        """Variables adjacent to measurement ``c`` (sorted)."""
        return self._row_adj[c]

    def col(self, v: int) -> tuple[int, ...]:
        """Measurements adjacent to variable ``v`` (sorted)."""
        return self._col_adj[v]

    @property
    def rows(self) -> tuple[tuple[int, ...], ...]:
        return self._row_adj

    @property
    def cols(self) -> tuple[tuple[int, ...], ...]:
        return self._col_adj

    def col_degrees(self) -> np.ndarray:
        return np.diff(self.col_ptr)

    def row_degrees(self) -> np.ndarray:
        return np.diff(self.row_ptr)

    def to_dense(self, dtype=object) -> np.ndarray:
        out = np.zeros((self.m, self.n), dtype=dtype)
        for (r, c), v in self._entries.items():
            out[r, c] = v if dtype is object else dtype(v)
        return out

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Parallel arrays ``(rows, cols)`` of the nonzeros, row-major order."""
        r = np.repeat(np.arange(self.m, dtype=np.int64), np.diff(self.row_ptr))
        return r, self.row_idx.copy()

    def edge_values(self) -> list[Fraction]:
        """Entry values in the order of :meth:`edges`."""
        r, c = self.edges()
        return [self._entries[(int(a), int(b))] for a, b in zip(r, c)]

    def with_rows(self, new_rows: Iterable[Mapping[int, object] | Iterable]) -> "MeasurementMatrix":
        """Return a copy with extra rows appended.

        Each row is either a mapping ``col -> value`` or a dense sequence.
        """
        entries = dict(self._entries)
        m = self.m
        for row in new_rows:
            if isinstance(row, Mapping):
                items = row.items()
            else:
                row = list(row)
                if len(row) != self.n:
                    raise ValueError("appended row has the wrong length")
                items = enumerate(row)
            for c, v in items:
                f = _as_fraction(v)
                if f != 0:
                    entries[(m, int(c))] = f
            m += 1
        return MeasurementMatrix(m, self.n, entries)

    def digest(self) -> str:
        """SHA-256 of a canonical text rendering; stable across formats."""
        if self._digest is None:
            h = hashlib.sha256(f"{self.m} {self.n}\n".encode())
            for (r, c) in sorted(self._entries):
                h.update(f"{r} {c} {self._entries[(r, c)]}\n".encode())
            object.__setattr__(self, "_digest", h.hexdigest())
        return self._digest

    def __eq__(self, other) -> bool:
        if not isinstance(other, MeasurementMatrix):
            return NotImplemented
        return self.m == other.m and self.n == other.n and self._entries == other._entries

    def __hash__(self) -> int:
        return hash(self.digest())

    def __repr__(self) -> str:
        kind = "binary" if self._binary else "weighted"
        return f"MeasurementMatrix({self.m}x{self.n}, nnz={self.nnz}, {kind})"


def _ptr(lists) -> np.ndarray:
    ptr = np.zeros(len(lists) + 1, dtype=np.int64)
    if lists:
        ptr[1:] = np.cumsum([len(x) for x in lists])
    return ptr


def _flat(lists) -> np.ndarray:
    if not lists or not any(lists):
        return np.zeros(0, dtype=np.int64)
    return np.fromiter((i for x in lists for i in x), dtype=np.int64)


@dataclass(frozen=True)
class NodeSet:
    """Set of Tanner-graph nodes, all on one side.

    ``members`` is a sorted tuple.  ``bits`` gives the set as an integer
    bit mask (bit ``i`` set iff ``i`` is a member).
    """

    kind: str
    members: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in (VARIABLE, MEASUREMENT):
            raise ValueError(f"unknown node kind {self.kind!r}")
        object.__setattr__(self, "members", tuple(sorted(set(int(x) for x in self.members))))

    @classmethod
    def variables(cls, items: Iterable[int]) -> "NodeSet":
        return cls(VARIABLE, tuple(items))

    @classmethod
    def measurements(cls, items: Iterable[int]) -> "NodeSet":
        return cls(MEASUREMENT, tuple(items))

    @property
    def bits(self) -> int:
        b = 0
        for x in self.members:
            b |= 1 << x
        return b

    def to_words(self, width: int) -> np.ndarray:
        """Bit set as ``ceil(width/64)`` little-endian ``uint64`` words."""
        words = np.zeros((width + 63) // 64, dtype=np.uint64)
        for x in self.members:
            if x >= width:
                raise ValueError("member outside the bit-set width")
            words[x >> 6] |= np.uint64(1) << np.uint64(x & 63)
        return words

    def _check(self, other: "NodeSet") -> None:
        if not isinstance(other, NodeSet) or other.kind != self.kind:
            raise TypeError("set algebra needs two node sets of the same kind")

    def __or__(self, other):
        self._check(other)
        return NodeSet(self.kind, self.members + other.members)

    def __and__(self, other):
        self._check(other)
        return NodeSet(self.kind, tuple(set(self.members) & set(other.members)))

    def __sub__(self, other):
        self._check(other)
        return NodeSet(self.kind, tuple(set(self.members) - set(other.members)))

    def __le__(self, other):
        self._check(other)
        return set(self.members) <= set(other.members)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, x) -> bool:
        return x in set(self.members)

    def __repr__(self) -> str:
        tag = "v" if self.kind == VARIABLE else "c"
        return tag + "{" + ",".join(map(str, self.members)) + "}"


def as_variable_set(items, n: int | None = None) -> tuple[int, ...]:
    """Sorted tuple of variable indices from a NodeSet or iterable."""
    if isinstance(items, NodeSet):
        if items.kind != VARIABLE:
            raise TypeError("expected a set of variable nodes")
        out = items.members
    else:
        out = tuple(sorted(set(int(x) for x in items)))
    if n is not None and out and (out[0] < 0 or out[-1] >= n):
        raise ValueError("variable index out of range")
    return out


def as_measurement_set(items, m: int | None = None) -> tuple[int, ...]:
    if isinstance(items, NodeSet):
        if items.kind != MEASUREMENT:
            raise TypeError("expected a set of measurement nodes")
        out = items.members
    else:
        out = tuple(sorted(set(int(x) for x in items)))
    if m is not None and out and (out[0] < 0 or out[-1] >= m):
        raise ValueError("measurement index out of range")
    return out


# -- graph operations -----------------------------------------------------

def neighbors(mat: MeasurementMatrix, index: int, kind: str = VARIABLE) -> NodeSet:
    """Neighborhood of one node.  ``kind`` is the side ``index`` lives on."""
    if kind == VARIABLE:
        if not 0 <= index < mat.n:
            raise IndexError("variable index out of range")
        return NodeSet(MEASUREMENT, mat.col(index))
    if kind == MEASUREMENT:
        if not 0 <= index < mat.m:
            raise IndexError("measurement index out of range")
        return NodeSet(VARIABLE, mat.row(index))
    raise ValueError(f"unknown node kind {kind!r}")


def neighbors_of_set(mat: MeasurementMatrix, nodes) -> NodeSet:
    """Union of neighborhoods.  Plain iterables are taken as variables."""
    if isinstance(nodes, NodeSet) and nodes.kind == MEASUREMENT:
        idx = as_measurement_set(nodes, mat.m)
        return NodeSet(VARIABLE, tuple({v for c in idx for v in mat.row(c)}))
    idx = as_variable_set(nodes, mat.n)
    return NodeSet(MEASUREMENT, tuple({c for v in idx for c in mat.col(v)}))


def restricted_neighbors(mat: MeasurementMatrix, c: int, within) -> NodeSet:
    """Variables adjacent to measurement ``c`` that lie in ``within``."""
    w = set(as_variable_set(within, mat.n))
    return NodeSet(VARIABLE, tuple(v for v in mat.row(c) if v in w))


def binarize(mat: MeasurementMatrix) -> MeasurementMatrix:
    """Support pattern of ``mat`` as a 0/1 matrix."""
    return MeasurementMatrix(mat.m, mat.n, {k: 1 for k in mat.entries()})


def is_stopping_set(mat: MeasurementMatrix, D) -> bool:
    """Every measurement touching ``D`` touches it at least twice.

    The empty set counts as a stopping set.
    """
    D = as_variable_set(D, mat.n)
    count: dict[int, int] = {}
    for v in D:
        for c in mat.col(v):
            count[c] = count.get(c, 0) + 1
    return all(k >= 2 for k in count.values())


# -- file formats -----------------------------------------------------------

FORMATS = ("alist", "dense", "csv")


def guess_format(path: str) -> str:
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".alist":
        return "alist"
    if ext == ".csv":
        return "csv"
    return "dense"


def _tokens(lines):
    """Yield ``(lineno, [tokens])`` for non-blank, non-comment lines."""
    for k, line in enumerate(lines, start=1):
        s = line.split("#", 1)[0].strip()
        if s:
            yield k, s.split()


def _ints(tokens, lineno, path):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise MatrixFormatError(f"expected integers, got {' '.join(tokens)!r}", lineno, path) from None


def parse_alist(text: str, path: str | None = None) -> MeasurementMatrix:
    """Parse the alist format (binary matrices only)."""
    it = _tokens(text.splitlines())

    def take(what):
        try:
            return next(it)
        except StopIteration:
            raise MatrixFormatError(f"unexpected end of file while reading {what}", 0, path) from None

    ln, tok = take("dimensions")
    dims = _ints(tok, ln, path)
    if len(dims) != 2:
        raise MatrixFormatError("first line must be 'n m'", ln, path)
    n, m = dims
    ln, tok = take("maximum degrees")
    mx = _ints(tok, ln, path)
    if len(mx) != 2:
        raise MatrixFormatError("second line must hold the two maximum degrees", ln, path)
    ln_cd, tok = take("column degrees")
    cdeg = _ints(tok, ln_cd, path)
    ln_rd, tok = take("row degrees")
    rdeg = _ints(tok, ln_rd, path)
    if len(cdeg) != n:
        raise MatrixValidationError(f"line {ln_cd}: {len(cdeg)} column degrees listed, expected {n}")
    if len(rdeg) != m:
        raise MatrixValidationError(f"line {ln_rd}: {len(rdeg)} row degrees listed, expected {m}")
    if max(cdeg, default=0) != mx[0] or max(rdeg, default=0) != mx[1]:
        raise MatrixValidationError("maximum degrees disagree with the degree lists")

    col_sets = []
    for j in range(n):
        ln, tok = take(f"column {j + 1}") if mx[0] > 0 else (0, [])
        vals = [x for x in _ints(tok, ln, path) if x != 0]
        if len(vals) != cdeg[j]:
            raise MatrixValidationError(f"line {ln}: column {j + 1} lists {len(vals)} rows, degree says {cdeg[j]}")
        if any(not 1 <= x <= m for x in vals) or len(set(vals)) != len(vals):
            raise MatrixValidationError(f"line {ln}: bad row index in column {j + 1}")
        col_sets.append({x - 1 for x in vals})
    row_sets = []
    for i in range(m):
        ln, tok = take(f"row {i + 1}") if mx[1] > 0 else (0, [])
        vals = [x for x in _ints(tok, ln, path) if x != 0]
        if len(vals) != rdeg[i]:
            raise MatrixValidationError(f"line {ln}: row {i + 1} lists {len(vals)} columns, degree says {rdeg[i]}")
        if any(not 1 <= x <= n for x in vals) or len(set(vals)) != len(vals):
            raise MatrixValidationError(f"line {ln}: bad column index in row {i + 1}")
        row_sets.append({x - 1 for x in vals})
    for i, cols in enumerate(row_sets):
        for j in cols:
            if i not in col_sets[j]:
                raise MatrixValidationError(f"row {i + 1} lists column {j + 1} but not vice versa")
    if sum(cdeg) != sum(rdeg):
        raise MatrixValidationError("column and row degree sums differ")
    return MeasurementMatrix.from_supports(m, n, [sorted(s) for s in col_sets])


def format_alist(mat: MeasurementMatrix) -> str:
    if not mat.is_binary:
        raise ValueError("alist only stores binary matrices")
    cd = [len(c) for c in mat.cols]
    rd = [len(r) for r in mat.rows]
    mc, mr = max(cd, default=0), max(rd, default=0)
    out = io.StringIO()
    out.write(f"{mat.n} {mat.m}\n{mc} {mr}\n")
    out.write(" ".join(map(str, cd)) + "\n")
    out.write(" ".join(map(str, rd)) + "\n")
    if mc:
        for c in mat.cols:
            out.write(" ".join(str(x + 1) for x in c) + " 0" * (mc - len(c)) + "\n")
    if mr:
        for r in mat.rows:
            out.write(" ".join(str(x + 1) for x in r) + " 0" * (mr - len(r)) + "\n")
    return out.getvalue()


def parse_dense(text: str, path: str | None = None) -> MeasurementMatrix:
    """Whitespace separated rows; entries are integers, decimals or ``p/q``."""
    rows = []
    width = None
    for ln, tok in _tokens(text.splitlines()):
        try:
            row = [Fraction(t) for t in tok]
        except (ValueError, ZeroDivisionError):
            raise MatrixFormatError(f"bad number in {' '.join(tok)!r}", ln, path) from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise MatrixFormatError(f"row has {len(row)} entries, expected {width}", ln, path)
        if any(x < 0 for x in row):
            raise MatrixFormatError("negative entry", ln, path)
        rows.append(row)
    return MeasurementMatrix.from_dense(rows)


def format_dense(mat: MeasurementMatrix) -> str:
    lines = []
    for i in range(mat.m):
        lines.append(" ".join(str(mat.get(i, j)) for j in range(mat.n)))
    return "\n".join(lines) + ("\n" if lines else "")


def parse_csv(text: str, path: str | None = None) -> MeasurementMatrix:
    """Sparse triplets ``row,col,value`` (0-based) after a header line.

    An optional ``# shape=m,n`` comment fixes the dimensions; otherwise they
    are inferred from the largest indices.
    """
    shape = None
    header_seen = False
    entries = {}
    for ln, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            body = s[1:].strip()
            if body.startswith("shape="):
                try:
                    a, b = body[6:].split(",")
                    shape = (int(a), int(b))
                except ValueError:
                    raise MatrixFormatError("bad shape comment", ln, path) from None
            continue
        parts = [p.strip() for p in s.split(",")]
        if not header_seen:
            if [p.lower() for p in parts] != ["row", "col", "value"]:
                raise MatrixFormatError("expected header 'row,col,value'", ln, path)
            header_seen = True
            continue
        if len(parts) != 3:
            raise MatrixFormatError("expected three comma separated fields", ln, path)
        try:
            r, c, v = int(parts[0]), int(parts[1]), Fraction(parts[2])
        except (ValueError, ZeroDivisionError):
            raise MatrixFormatError(f"bad triplet {s!r}", ln, path) from None
        if r < 0 or c < 0 or v < 0:
            raise MatrixFormatError("negative index or value", ln, path)
        if (r, c) in entries:
            raise MatrixFormatError(f"duplicate entry ({r}, {c})", ln, path)
        entries[(r, c)] = v
    if not header_seen:
        raise MatrixFormatError("missing header 'row,col,value'", 1, path)
    if shape is None:
        shape = (max((r for r, _ in entries), default=-1) + 1, max((c for _, c in entries), default=-1) + 1)
    try:
        return MeasurementMatrix(shape[0], shape[1], entries)
    except ValueError as exc:
        raise MatrixValidationError(str(exc)) from None


def format_csv(mat: MeasurementMatrix) -> str:
    out = [f"# shape={mat.m},{mat.n}", "row,col,value"]
    for (r, c) in sorted(mat.entries()):
        out.append(f"{r},{c},{mat.get(r, c)}")
    return "\n".join(out) + "\n"


_PARSERS = {"alist": parse_alist, "dense": parse_dense, "csv": parse_csv}
_FORMATTERS = {"alist": format_alist, "dense": format_dense, "csv": format_csv}


def load_matrix(path, fmt: str | None = None) -> MeasurementMatrix:
    """Read a matrix file; the format defaults to a guess from the suffix."""
    fmt = fmt or guess_format(path)
    if fmt not in _PARSERS:
        raise ValueError(f"unknown matrix format {fmt!r}")
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return _PARSERS[fmt](text, path=str(path))


def save_matrix(mat: MeasurementMatrix, path, fmt: str | None = None) -> None:
    fmt = fmt or guess_format(path)
    if fmt not in _FORMATTERS:
        raise ValueError(f"unknown matrix format {fmt!r}")
    atomic_write_text(path, _FORMATTERS[fmt](mat))


def atomic_write_text(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
