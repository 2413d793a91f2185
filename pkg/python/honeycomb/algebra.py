"""
Scalar and matrix arithmetic for the honeycomb pipeline.

Two scalar kinds are supported: double-precision reals (matrices are plain
``numpy`` arrays) and the finite fields F_p and F_{p^2}. Finite-field
elements are encoded as integers ``a + b*p`` standing for ``a + b*w``; all
arithmetic goes through lookup tables built once per field.
"""

import logging
from collections import deque
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Callable, Dict, Hashable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from sympy import isprime

from honeycomb.config import DEFAULT_TOLERANCES
from honeycomb.errors import CapExceeded, DivisionByZero, FieldMismatch, Singular

logger = logging.getLogger(__name__)

MINKOWSKI = np.diag([1.0, 1.0, 1.0, -1.0])
DEFAULT_GROUP_CAP = 1_000_000


class GaloisField:
    """The field F_p, or F_{p^2} built as F_p[w]/(w^2 - t*w - s).

    For odd ``p`` the extension uses ``t = 0`` and ``s`` the smallest
    quadratic non-residue, so ``w^2 = s``. For ``p = 2`` it uses
    ``w^2 = w + 1``.
    """

    def __init__(self, prime: int, degree: int = 1) -> None:
        if degree not in (1, 2):
            raise ValueError(f"only degree 1 and 2 fields are supported, got {degree}")
        if not isprime(prime):
            raise ValueError(f"{prime} is not a prime")
        self.prime = prime
        self.degree = degree
        self.size = prime**degree
        if degree == 1:
            self.trace_coeff, self.nonresidue = 0, 0
        elif prime == 2:
            self.trace_coeff, self.nonresidue = 1, 1
        else:
            squares = {(x * x) % prime for x in range(1, prime)}
            self.trace_coeff = 0
            self.nonresidue = next(x for x in range(2, prime) if x not in squares)
        self._build_tables()

    def _build_tables(self) -> None:
        p, n = self.prime, self.size
        t, s = self.trace_coeff, self.nonresidue
        coords = [(x % p, x // p) for x in range(n)]
        self.add_table: List[List[int]] = []
        self.mul_table: List[List[int]] = []
        for a, b in coords:
            add_row = []
            mul_row = []
            for c, d in coords:
                add_row.append((a + c) % p + ((b + d) % p) * p)
                bd = b * d
                mul_row.append((a * c + bd * s) % p + ((a * d + b * c + bd * t) % p) * p)
            self.add_table.append(add_row)
            self.mul_table.append(mul_row)
        self.neg_table = [((-a) % p) + ((-b) % p) * p for a, b in coords]
        self.inv_table = [-1] * n
        for x in range(1, n):
            row = self.mul_table[x]
            self.inv_table[x] = row.index(1)

    # encoding -----------------------------------------------------------

    def encode(self, a: int, b: int = 0) -> int:
        if self.degree == 1 and b % self.prime:
            raise FieldMismatch(f"{self} has no w coordinate")
        return a % self.prime + (b % self.prime) * self.prime

    def decode(self, x: int) -> Tuple[int, int]:
        return x % self.prime, x // self.prime

    def element(self, a: int, b: int = 0) -> "FieldElement":
        return FieldElement(self, self.encode(a, b))

    def elements(self) -> range:
        return range(self.size)

    # arithmetic on codes --------------------------------------------------

    def add(self, x: int, y: int) -> int:
        return self.add_table[x][y]

    def sub(self, x: int, y: int) -> int:
        return self.add_table[x][self.neg_table[y]]

    def mul(self, x: int, y: int) -> int:
        return self.mul_table[x][y]

    def neg(self, x: int) -> int:
        return self.neg_table[x]

    def inv(self, x: int) -> int:
        if x == 0:
            raise DivisionByZero(f"0 has no inverse in {self}")
        return self.inv_table[x]

    def square_roots(self, x: int) -> List[int]:
        """All ``y`` with ``y*y == x``, in increasing code order."""
        return [y for y in range(self.size) if self.mul_table[y][y] == x]

    def roots(self, coefficients: Sequence[int]) -> List[int]:
        """Roots of the polynomial with integer coefficients, highest degree first."""
        found = []
        for x in range(self.size):
            acc = 0
            for c in coefficients:
                acc = self.add(self.mul(acc, x), self.encode(c))
            if acc == 0:
                found.append(x)
        return found

    @property
    def descriptor(self) -> Tuple[int, int]:
        return self.prime, self.degree

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GaloisField) and self.descriptor == other.descriptor

    def __hash__(self) -> int:
        return hash(self.descriptor)

    def __repr__(self) -> str:
        return f"GF({self.prime})" if self.degree == 1 else f"GF({self.prime}^2)"


@lru_cache(maxsize=None)
def galois_field(prime: int, degree: int = 1) -> GaloisField:
    """Return the shared :class:`GaloisField` instance for ``(prime, degree)``."""
    return GaloisField(prime, degree)


@dataclass(frozen=True)
class FieldElement:
    """An element ``a + b*w`` of a finite field."""

    field: GaloisField
    code: int

    @property
    def a(self) -> int:
        return self.field.decode(self.code)[0]

    @property
    def b(self) -> int:
        return self.field.decode(self.code)[1]

    def _check(self, other: "FieldElement") -> None:
        if not isinstance(other, FieldElement) or other.field != self.field:
            raise FieldMismatch(f"cannot combine {self.field} with {getattr(other, 'field', other)!r}")

    def __add__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(self.field, self.field.add(self.code, other.code))

    def __sub__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(self.field, self.field.sub(self.code, other.code))

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(self.field, self.field.mul(self.code, other.code))

    def __neg__(self) -> "FieldElement":
        return FieldElement(self.field, self.field.neg(self.code))

    def inverse(self) -> "FieldElement":
        return FieldElement(self.field, self.field.inv(self.code))

    def is_zero(self) -> bool:
        return self.code == 0

    def __repr__(self) -> str:
        a, b = self.field.decode(self.code)
        return f"{a}" if not b else f"{a}+{b}w"


def field_ops(x: FieldElement, y: Optional[FieldElement], op: str) -> Union[FieldElement, bool]:
    """Apply ``op`` in {add, sub, mul, inv, eq}; ``inv`` ignores ``y``."""
    if op == "inv":
        return x.inverse()
    if y is None:
        raise ValueError(f"operation {op} needs two operands")
    x._check(y)
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "eq":
        return x.code == y.code
    raise ValueError(f"unknown field operation {op!r}")


@dataclass(frozen=True)
class FieldMatrix:
    """A square matrix over a finite field, stored as a row-major tuple of codes."""

    field: GaloisField
    size: int
    entries: Tuple[int, ...]

    @classmethod
    def identity(cls, field: GaloisField, size: int = 4) -> "FieldMatrix":
        return cls(field, size, tuple(1 if i == j else 0 for i in range(size) for j in range(size)))

    @classmethod
    def from_rows(cls, field: GaloisField, rows: Sequence[Sequence[Union[int, FieldElement]]]) -> "FieldMatrix":
        """Build a matrix from rows of integers (taken mod p) or field elements."""
        size = len(rows)
        codes = []
        for row in rows:
            if len(row) != size:
                raise ValueError("matrix must be square")
            for value in row:
                if isinstance(value, FieldElement):
                    if value.field != field:
                        raise FieldMismatch(f"entry from {value.field} in a {field} matrix")
                    codes.append(value.code)
                else:
                    codes.append(field.encode(int(value)))
        return cls(field, size, tuple(codes))

    @classmethod
    def block(cls, inner: "FieldMatrix") -> "FieldMatrix":
        """Embed a 3x3 matrix as the upper-left block of a 4x4 one fixing e3."""
        n = inner.size
        codes = []
        for i in range(n + 1):
            for j in range(n + 1):
                if i < n and j < n:
                    codes.append(inner.entries[i * n + j])
                else:
                    codes.append(1 if i == j else 0)
        return cls(inner.field, n + 1, tuple(codes))

    def __getitem__(self, index: Tuple[int, int]) -> FieldElement:
        i, j = index
        return FieldElement(self.field, self.entries[i * self.size + j])

    def rows(self) -> List[List[int]]:
        n = self.size
        return [list(self.entries[i * n : (i + 1) * n]) for i in range(n)]

    def _check(self, other: "FieldMatrix") -> None:
        if not isinstance(other, FieldMatrix) or other.field != self.field or other.size != self.size:
            raise FieldMismatch("matrix operands must share field and size")

    def __matmul__(self, other: "FieldMatrix") -> "FieldMatrix":
        self._check(other)
        n = self.size
        add, mul = self.field.add_table, self.field.mul_table
        a, b = self.entries, other.entries
        out = []
        for i in range(n):
            row = a[i * n : (i + 1) * n]
            for j in range(n):
                acc = 0
                for k in range(n):
                    acc = add[acc][mul[row[k]][b[k * n + j]]]
                out.append(acc)
        return FieldMatrix(self.field, n, tuple(out))

    def transpose(self) -> "FieldMatrix":
        n = self.size
        return FieldMatrix(self.field, n, tuple(self.entries[j * n + i] for i in range(n) for j in range(n)))

    def minkowski_adjoint(self) -> "FieldMatrix":
        """``A M^T A`` for the form diag(1,1,1,-1); the plain transpose for 3x3 blocks."""
        if self.size != 4:
            return self.transpose()
        neg = self.field.neg
        n = self.size
        out = []
        for i in range(n):
            for j in range(n):
                value = self.entries[j * n + i]
                out.append(neg(value) if (i == 3) != (j == 3) else value)
        return FieldMatrix(self.field, n, tuple(out))

    def inverse(self) -> "FieldMatrix":
        """Gauss-Jordan inverse.

        Raises:
            Singular: If the matrix is not invertible.
        """
        F = self.field
        n = self.size
        work = [self.rows()[i] + [1 if i == j else 0 for j in range(n)] for i in range(n)]
        for col in range(n):
            pivot = next((r for r in range(col, n) if work[r][col] != 0), None)
            if pivot is None:
                raise Singular(f"matrix over {F} is singular")
            work[col], work[pivot] = work[pivot], work[col]
            scale = F.inv(work[col][col])
            work[col] = [F.mul(scale, v) for v in work[col]]
            for r in range(n):
                if r != col and work[r][col] != 0:
                    factor = work[r][col]
                    work[r] = [F.sub(v, F.mul(factor, w)) for v, w in zip(work[r], work[col])]
        return FieldMatrix(F, n, tuple(v for row in work for v in row[n:]))

    def determinant(self) -> FieldElement:
        F = self.field
        n = self.size
        work = self.rows()
        det = 1
        for col in range(n):
            pivot = next((r for r in range(col, n) if work[r][col] != 0), None)
            if pivot is None:
                return FieldElement(F, 0)
            if pivot != col:
                work[col], work[pivot] = work[pivot], work[col]
                det = F.neg(det)
            det = F.mul(det, work[col][col])
            scale = F.inv(work[col][col])
            for r in range(col + 1, n):
                if work[r][col] != 0:
                    factor = F.mul(work[r][col], scale)
                    work[r] = [F.sub(v, F.mul(factor, w)) for v, w in zip(work[r], work[col])]
        return FieldElement(F, det)

    def trace(self) -> int:
        acc = 0
        for i in range(self.size):
            acc = self.field.add(acc, self.entries[i * self.size + i])
        return acc

    def is_identity(self) -> bool:
        n = self.size
        return all(v == (1 if i // n == i % n else 0) for i, v in enumerate(self.entries))

    def upper_block(self) -> "FieldMatrix":
        """The upper-left ``(n-1)x(n-1)`` block."""
        n = self.size
        return FieldMatrix(self.field, n - 1, tuple(self.entries[i * n + j] for i in range(n - 1) for j in range(n - 1)))

    def to_codes(self) -> List[List[int]]:
        return self.rows()


Matrix4 = Union[np.ndarray, FieldMatrix]


def identity_like(M: Matrix4) -> Matrix4:
    if isinstance(M, FieldMatrix):
        return FieldMatrix.identity(M.field, M.size)
    return np.eye(M.shape[0])


def _check_kinds(M: Matrix4, N: Matrix4) -> None:
    if isinstance(M, FieldMatrix) != isinstance(N, FieldMatrix):
        raise FieldMismatch("cannot mix real and finite-field matrices")


def mat_mul(M: Matrix4, N: Matrix4) -> Matrix4:
    _check_kinds(M, N)
    return M @ N


def mat_inv(M: Matrix4) -> Matrix4:
    if isinstance(M, FieldMatrix):
        return M.inverse()
    scale = max(1.0, float(np.abs(M).max()))
    if abs(np.linalg.det(M / scale)) < 1e-12:
        raise Singular("real matrix is singular")
    try:
        return np.linalg.inv(M)
    except np.linalg.LinAlgError as exc:
        raise Singular(str(exc)) from exc


def mat_transpose(M: Matrix4) -> Matrix4:
    if isinstance(M, FieldMatrix):
        return M.transpose()
    return M.T.copy()


def mat_eq_within(M: Matrix4, N: Matrix4, eps: float = DEFAULT_TOLERANCES.epsilon) -> bool:
    """Exact equality over finite fields, entrywise ``|M - N| <= eps`` over the reals."""
    _check_kinds(M, N)
    if isinstance(M, FieldMatrix):
        return M == N
    return bool(np.max(np.abs(M - N)) <= eps)


def mat_ops(M: Matrix4, N: Optional[Matrix4], op: str, eps: float = DEFAULT_TOLERANCES.epsilon) -> Union[Matrix4, bool]:
    """Apply ``op`` in {mul, inv, transpose, eq_within}; unary ops ignore ``N``."""
    if op == "inv":
        return mat_inv(M)
    if op == "transpose":
        return mat_transpose(M)
    if N is None:
        raise ValueError(f"operation {op} needs two operands")
    if op == "mul":
        return mat_mul(M, N)
    if op == "eq_within":
        return mat_eq_within(M, N, eps)
    raise ValueError(f"unknown matrix operation {op!r}")


def minkowski_adjoint(M: np.ndarray) -> np.ndarray:
    return MINKOWSKI @ M.T @ MINKOWSKI


def is_minkowski_isometry(M: Matrix4, eps: float = 1e-9) -> bool:
    """True iff ``M^-1 == A M^T A``.

    Raises:
        Singular: If ``M`` is not invertible.
    """
    if isinstance(M, FieldMatrix):
        return M.inverse() == M.minkowski_adjoint()
    inverse = mat_inv(M)
    scale = max(1.0, float(np.abs(M).max()))
    return bool(np.max(np.abs(inverse - minkowski_adjoint(M))) <= eps * scale * scale)


def preserves_form(M: np.ndarray, eps: float = 1e-9) -> bool:
    """``M^T A M == A``; equivalent to being a Minkowski isometry for invertible ``M``."""
    scale = max(1.0, float(np.abs(M).max()))
    return bool(np.max(np.abs(M.T @ MINKOWSKI @ M - MINKOWSKI)) <= eps * scale * scale)


def element_order(M: Matrix4, cap: int, eps: float = DEFAULT_TOLERANCES.epsilon) -> Optional[int]:
    """Smallest ``k <= cap`` with ``M^k == 1``, or ``None`` if there is none."""
    if cap < 1:
        raise ValueError("cap must be positive")
    identity = identity_like(M)
    power = M
    for k in range(1, cap + 1):
        if mat_eq_within(power, identity, eps):
            return k
        power = power @ M
    return None


def real_key(M: np.ndarray, kappa: float = DEFAULT_TOLERANCES.kappa) -> bytes:
    """Quantize each entry to the nearest multiple of ``kappa``."""
    return np.rint(M / kappa).astype(np.int64).tobytes()


def matrix_key(M: Matrix4, kappa: float = DEFAULT_TOLERANCES.kappa) -> Hashable:
    if isinstance(M, FieldMatrix):
        return M.entries
    return real_key(M, kappa)


def evaluate_word(generators: Sequence[Matrix4], word: Sequence[int]) -> Matrix4:
    """The product ``g[w0] @ g[w1] @ ...``; the identity for the empty word."""
    identity = identity_like(generators[0])
    return reduce(lambda acc, i: acc @ generators[i], word, identity)


@dataclass
class GroupEnumeration:
    """A finite matrix group with the shortest generator word of every element.

    ``elements`` and ``words`` iterate in breadth-first discovery order.
    """

    generators: Tuple[Matrix4, ...]
    elements: Dict[Hashable, Matrix4]
    words: Dict[Hashable, Tuple[int, ...]]
    key: Callable[[Matrix4], Hashable]

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, M: Matrix4) -> bool:
        return self.key(M) in self.elements

    def __iter__(self) -> Iterator[Matrix4]:
        return iter(self.elements.values())

    def word_of(self, M: Matrix4) -> Tuple[int, ...]:
        return self.words[self.key(M)]

    def index_of(self, M: Matrix4) -> int:
        return self._index()[self.key(M)]

    def _index(self) -> Dict[Hashable, int]:
        cached = getattr(self, "_index_cache", None)
        if cached is None or len(cached) != len(self.elements):
            cached = {k: i for i, k in enumerate(self.elements)}
            self._index_cache = cached
        return cached


def generate_group(
    generators: Sequence[Matrix4],
    cap: int = DEFAULT_GROUP_CAP,
    kappa: float = DEFAULT_TOLERANCES.kappa,
) -> GroupEnumeration:
    """Breadth-first closure of ``generators`` under right multiplication.

    Words are discovered in order of length, then generator index, so every
    element is paired with its shortest, lexicographically first word.

    Raises:
        CapExceeded: If the group has more than ``cap`` elements.
    """
    if not generators:
        raise ValueError("at least one generator is required")
    gens = tuple(generators)
    for g in gens[1:]:
        _check_kinds(gens[0], g)

    def key(M: Matrix4) -> Hashable:
        return matrix_key(M, kappa)

    identity = identity_like(gens[0])
    elements: Dict[Hashable, Matrix4] = {key(identity): identity}
    words: Dict[Hashable, Tuple[int, ...]] = {key(identity): ()}
    queue = deque([(identity, ())])
    while queue:
        element, word = queue.popleft()
        for index, generator in enumerate(gens):
            product = element @ generator
            k = key(product)
            if k in elements:
                continue
            if len(elements) >= cap:
                raise CapExceeded("group enumeration", cap)
            elements[k] = product
            words[k] = word + (index,)
            queue.append((product, word + (index,)))
    logger.debug("enumerated group of order %d from %d generators", len(elements), len(gens))
    return GroupEnumeration(gens, elements, words, key)
