import logging
from functools import cached_property
from typing import Optional, Tuple

import numpy as np

from ..models.field import FieldContext
from ..models.poly import PolyOverFq
from ..utils.config import Config
from ..utils.errors import FieldError, WorkBoundExceeded

logger = logging.getLogger(__name__)


class ResidueField:
    """k_v = F_q[t]/(pi) with every element held as a row of D base-field codes.

    Arithmetic is vectorised over arrays of shape (n, D) through the base field tables.
    """

    def __init__(self, ctx: FieldContext, pi: PolyOverFq, max_size: Optional[int] = None):
        if not pi.is_monic() or pi.degree < 1:
            raise FieldError("residue field needs a monic generator of positive degree")
        limit = max_size or Config.MAX_RESIDUE_FIELD
        size = ctx.q ** pi.degree
        if size > limit:
            raise WorkBoundExceeded(
                f"residue field of size {size} exceeds the residue-field bound",
                bound="max_residue_field", limit=limit, requested=size,
            )
        self.ctx = ctx
        self.pi = pi
        self.degree = pi.degree
        self.size = size
        self._add = ctx.add_table
        self._mul = ctx.mul_table
        self._neg = ctx.neg_table
        self._pi_low = np.array([pi.coeff(i) for i in range(self.degree)], dtype=np.int64)

    @cached_property
    def elements(self) -> np.ndarray:
        codes = np.arange(self.size, dtype=np.int64)
        q = self.ctx.q
        return np.stack([(codes // q ** i) % q for i in range(self.degree)], axis=1)

    def encode(self, rows: np.ndarray) -> np.ndarray:
        weights = self.ctx.q ** np.arange(self.degree, dtype=np.int64)
        return rows @ weights

    def constant(self, f: PolyOverFq, n: int = 1) -> np.ndarray:
        """f mod pi, broadcast to n rows."""
        r = f % self.pi
        row = np.array([r.coeff(i) for i in range(self.degree)], dtype=np.int64)
        return np.tile(row, (n, 1))

    def zeros(self, n: int) -> np.ndarray:
        return np.zeros((n, self.degree), dtype=np.int64)

    def is_zero(self, rows: np.ndarray) -> np.ndarray:
        return ~rows.any(axis=1)

    def add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self._add[a, b]

    def neg(self, a: np.ndarray) -> np.ndarray:
        return self._neg[a]

    def sub(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self._add[a, self._neg[b]]

    def scale(self, a: np.ndarray, n: int) -> np.ndarray:
        return self._mul[a, self.ctx.from_int(n)]

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        D = self.degree
        rows = a.shape[0]
        prod = np.zeros((rows, 2 * D - 1), dtype=np.int64)
        for i in range(D):
            for j in range(D):
                prod[:, i + j] = self._add[prod[:, i + j], self._mul[a[:, i], b[:, j]]]
        for top in range(2 * D - 2, D - 1, -1):
            c = self._neg[prod[:, top]]
            for i in range(D):
                prod[:, top - D + i] = self._add[prod[:, top - D + i], self._mul[c, self._pi_low[i]]]
        return prod[:, :D]

    def power(self, a: np.ndarray, e: int) -> np.ndarray:
        result = self.constant(PolyOverFq.one(self.ctx), a.shape[0])
        base = a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def inverse(self, a: np.ndarray) -> np.ndarray:
        """a^(Q-2); zero rows map to zero."""
        return self.power(a, self.size - 2)

    def evaluate(self, coeffs: Tuple[np.ndarray, ...], x: np.ndarray) -> np.ndarray:
        """Horner evaluation; coeffs lowest degree first, each already broadcast to x's rows."""
        acc = coeffs[-1]
        for c in reversed(coeffs[:-1]):
            acc = self.add(self.mul(acc, x), c)
        return acc

    @cached_property
    def square_codes(self) -> np.ndarray:
        """Boolean lookup over element codes: True for nonzero squares."""
        squares = self.encode(self.mul(self.elements, self.elements))
        table = np.zeros(self.size, dtype=bool)
        table[squares] = True
        table[0] = False
        return table

    def character(self, rows: np.ndarray) -> np.ndarray:
        """Quadratic character (odd characteristic): 1, -1, or 0."""
        if self.ctx.p == 2:
            raise FieldError("quadratic character needs odd characteristic")
        codes = self.encode(rows)
        chi = np.where(self.square_codes[codes], 1, -1)
        chi[codes == 0] = 0
        return chi

    def trace(self, rows: np.ndarray) -> np.ndarray:
        """Absolute trace to F_p as prime-field integers."""
        total = rows
        cur = rows
        for _ in range(self.ctx.k * self.degree - 1):
            cur = self.power(cur, self.ctx.p)
            total = self.add(total, cur)
        if np.any(total[:, 1:]) or np.any(total[:, 0] >= self.ctx.p):
            raise FieldError("trace left the prime field")
        return total[:, 0]
