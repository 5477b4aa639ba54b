from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Tuple

import numpy as np

from ..utils.config import Config
from ..utils.errors import FieldError, WorkBoundExceeded


def _mulmod_coords(a: Tuple[int, ...], b: Tuple[int, ...], modulus: Tuple[int, ...], p: int) -> Tuple[int, ...]:
    """Multiply two coordinate vectors as polynomials and reduce by the monic modulus."""

    k = len(modulus) - 1
    prod = [0] * (2 * k - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    for top in range(len(prod) - 1, k - 1, -1):
        c = prod[top]
        if c:
            for i in range(k):
                prod[top - k + i] = (prod[top - k + i] - c * modulus[i]) % p
    return tuple(prod[:k])


@dataclass(frozen=True)
class FieldContext:
    """F_q with q = p^k, elements in the polynomial basis over F_p[u]/(modulus).

    Element codes are the integers sum(c_i p^i) of the coordinate vectors.
    """

    p: int
    k: int
    modulus: Tuple[int, ...]

    @property
    def q(self) -> int:
        return self.p ** self.k

    def __repr__(self) -> str:
        return f"FieldContext(p={self.p}, k={self.k}, modulus={list(self.modulus)})"

    # coordinates <-> codes

    def coords(self, code: int) -> Tuple[int, ...]:
        out = []
        for _ in range(self.k):
            code, r = divmod(code, self.p)
            out.append(r)
        return tuple(out)

    def code(self, coords) -> int:
        value = 0
        for c in reversed(tuple(coords)):
            value = value * self.p + (int(c) % self.p)
        return value

    def from_int(self, n: int) -> int:
        """Code of the image of the integer n in the prime field."""
        return n % self.p

    # lookup tables, built lazily

    @cached_property
    def _tables(self) -> Dict[str, np.ndarray]:
        q, p = self.q, self.p
        if q > Config.MAX_FIELD_TABLE:
            raise WorkBoundExceeded(
                f"field tables for q={q} exceed the table bound",
                bound="max_field_table", limit=Config.MAX_FIELD_TABLE, requested=q,
            )
        digits = np.array([self.coords(c) for c in range(q)], dtype=np.int64).reshape(q, self.k)
        weights = p ** np.arange(self.k, dtype=np.int64)
        add = np.zeros((q, q), dtype=np.int64)
        for i in range(self.k):
            add += ((digits[:, None, i] + digits[None, :, i]) % p) * weights[i]
        neg = ((-digits) % p) @ weights

        exp, log = self._discrete_log_tables()
        logs = np.array(log, dtype=np.int64)
        exps = np.array(exp, dtype=np.int64)
        mul = exps[(logs[:, None] + logs[None, :]) % (q - 1)]
        mul[0, :] = 0
        mul[:, 0] = 0
        inv = np.zeros(q, dtype=np.int64)
        inv[1:] = exps[(-logs[1:]) % (q - 1)]
        return {"add": add, "mul": mul, "neg": neg, "inv": inv, "digits": digits}

    def _discrete_log_tables(self) -> Tuple[List[int], List[int]]:
        q = self.q
        for g in range(2 if q > 2 else 1, q):
            g_coords = self.coords(g)
            exp = [self.code((1,) + (0,) * (self.k - 1))]
            cur = self.coords(exp[0])
            for _ in range(q - 2):
                cur = _mulmod_coords(cur, g_coords, self.modulus, self.p)
                code = self.code(cur)
                if code == exp[0]:
                    break
                exp.append(code)
            if len(exp) == q - 1:
                log = [0] * q
                for i, c in enumerate(exp):
                    log[c] = i
                return exp, log
        raise FieldError(f"no primitive element found for {self!r}")

    @property
    def add_table(self) -> np.ndarray:
        return self._tables["add"]

    @property
    def mul_table(self) -> np.ndarray:
        return self._tables["mul"]

    @property
    def neg_table(self) -> np.ndarray:
        return self._tables["neg"]

    @property
    def inv_table(self) -> np.ndarray:
        return self._tables["inv"]

    @cached_property
    def _lists(self) -> Tuple[List[List[int]], List[List[int]], List[int], List[int]]:
        return (
            self.add_table.tolist(),
            self.mul_table.tolist(),
            self.neg_table.tolist(),
            self.inv_table.tolist(),
        )

    # scalar code arithmetic (hot path for polynomial code)

    def add(self, a: int, b: int) -> int:
        return self._lists[0][a][b]

    def sub(self, a: int, b: int) -> int:
        return self._lists[0][a][self._lists[2][b]]

    def neg(self, a: int) -> int:
        return self._lists[2][a]

    def mul(self, a: int, b: int) -> int:
        return self._lists[1][a][b]

    def inv(self, a: int) -> int:
        if a == 0:
            raise FieldError("inversion of zero")
        return self._lists[3][a]

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self.inv(a), -e
        result, base = 1, a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def is_square(self, a: int) -> bool:
        if a == 0 or self.p == 2:
            return True
        return self.pow(a, (self.q - 1) // 2) == 1

    # element-level API

    def element(self, value) -> "FieldElement":
        if isinstance(value, FieldElement):
            if value.ctx != self:
                raise FieldError("element belongs to another field")
            return value
        if isinstance(value, int):
            return FieldElement(self, self.from_int(value))
        return FieldElement(self, self.code(value))

    def zero(self) -> "FieldElement":
        return FieldElement(self, 0)

    def one(self) -> "FieldElement":
        return FieldElement(self, 1)

    def enumerate_elements(self) -> List["FieldElement"]:
        return [FieldElement(self, c) for c in range(self.q)]

    def to_json(self) -> Dict:
        return {"p": self.p, "k": self.k, "modulus": list(self.modulus)}


@dataclass(frozen=True)
class FieldElement:
    ctx: FieldContext
    code: int

    @property
    def coordinates(self) -> Tuple[int, ...]:
        return self.ctx.coords(self.code)

    def _other(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.ctx != self.ctx:
                raise FieldError("mixed field contexts")
            return other.code
        if isinstance(other, int):
            return self.ctx.from_int(other)
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        return FieldElement(self.ctx, self.ctx.add(self.code, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        return FieldElement(self.ctx, self.ctx.sub(self.code, o))

    def __rsub__(self, other):
        o = self._other(other)
        return FieldElement(self.ctx, self.ctx.sub(o, self.code))

    def __neg__(self):
        return FieldElement(self.ctx, self.ctx.neg(self.code))

    def __mul__(self, other):
        o = self._other(other)
        return FieldElement(self.ctx, self.ctx.mul(self.code, o))

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        return FieldElement(self.ctx, self.ctx.inv(self.code))

    def __truediv__(self, other):
        o = self._other(other)
        return FieldElement(self.ctx, self.ctx.mul(self.code, self.ctx.inv(o)))

    def __pow__(self, e: int):
        return FieldElement(self.ctx, self.ctx.pow(self.code, e))

    def frobenius(self) -> "FieldElement":
        return self ** self.ctx.p

    def is_zero(self) -> bool:
        return self.code == 0

    def __repr__(self) -> str:
        return f"F{self.ctx.q}{list(self.coordinates)}"
