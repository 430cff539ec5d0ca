"""Prime-field arithmetic and dense univariate polynomials.

Everything is exact integer math with canonical representatives in [0, q).
Interpolation is plain Lagrange via the master numerator polynomial, O(k^2);
the field sizes used here never justify anything fancier.
"""

from __future__ import annotations

from dataclasses import dataclass

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(q: int) -> bool:
    """Deterministic Miller-Rabin; the fixed bases decide correctly far
    beyond 64-bit inputs."""
    if q < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if q % p == 0:
            return q == p
    d, s = q - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, q)
        if x in (1, q - 1):
            continue
        for _ in range(s - 1):
            x = x * x % q
            if x == q - 1:
                break
        else:
            return False
    return True


def select_prime(n: int, alpha: int, c: int) -> int:
    """Smallest prime q with c*n*alpha < q <= 2*c*n*alpha (exists by Bertrand)."""
    if n < 1 or not 1 <= alpha <= n or c < 2:
        raise ValueError("need n >= 1, 1 <= alpha <= n, c >= 2")
    lo = c * n * alpha
    for q in range(lo + 1, 2 * lo + 1):
        if is_prime(q):
            return q
    raise ValueError(f"no prime in ({lo}, {2 * lo}]")  # unreachable for lo >= 1


class PrimeField:
    """GF(q) for prime q, with canonical elements 0..q-1."""

    __slots__ = ("q",)

    def __init__(self, q: int):
        if not is_prime(q):
            raise ValueError(f"{q} is not prime")
        self.q = q

    def element(self, x: int) -> int:
        return x % self.q

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.q

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.q

    def mul(self, a: int, b: int) -> int:
        return a * b % self.q

    def neg(self, a: int) -> int:
        return -a % self.q

    def inv(self, a: int) -> int:
        if a % self.q == 0:
            raise ZeroDivisionError("no inverse of 0")
        return pow(a, self.q - 2, self.q)

    def __eq__(self, other) -> bool:
        return isinstance(other, PrimeField) and other.q == self.q

    def __hash__(self) -> int:
        return hash(("PrimeField", self.q))

    def __repr__(self) -> str:
        return f"PrimeField({self.q})"


@dataclass(frozen=True)
class FieldPoly:
    """Dense polynomial over a prime field; coeffs ascending, no trailing zeros."""

    field: PrimeField
    coeffs: tuple[int, ...]

    @classmethod
    def make(cls, field: PrimeField, coeffs) -> "FieldPoly":
        cs = [c % field.q for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        return cls(field, tuple(cs))

    @classmethod
    def zero(cls, field: PrimeField) -> "FieldPoly":
        return cls(field, ())

    @classmethod
    def constant(cls, field: PrimeField, c: int) -> "FieldPoly":
        return cls.make(field, [c])

    @property
    def degree(self) -> int:
        """len(coeffs) - 1; the zero polynomial reports -1."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def evaluate(self, x: int) -> int:
        acc, q = 0, self.field.q
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % q
        return acc

    def add(self, other: "FieldPoly") -> "FieldPoly":
        self._check(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = (out[i] + c) % self.field.q
        return FieldPoly.make(self.field, out)

    def multiply(self, other: "FieldPoly") -> "FieldPoly":
        self._check(other)
        if self.is_zero() or other.is_zero():
            return FieldPoly.zero(self.field)
        q = self.field.q
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = (out[i + j] + a * b) % q
        return FieldPoly.make(self.field, out)

    def scale(self, k: int) -> "FieldPoly":
        return FieldPoly.make(self.field, [c * k for c in self.coeffs])

    def _check(self, other: "FieldPoly") -> None:
        if self.field.q != other.field.q:
            raise ValueError("mixed fields")


def interpolate(field: PrimeField, points) -> FieldPoly:
    """Unique polynomial of degree < len(points) through the given (x, y) pairs."""
    pts = [(x % field.q, y % field.q) for x, y in points]
    xs = [x for x, _ in pts]
    if len(set(xs)) != len(xs):
        raise ValueError("interpolation nodes must be distinct")
    if not pts:
        return FieldPoly.zero(field)
    q = field.q
    # master numerator prod (X - x_i), then divide out one root at a time
    master = [1]
    for x, _ in pts:
        nxt = [0] * (len(master) + 1)
        for i, c in enumerate(master):
            nxt[i + 1] = (nxt[i + 1] + c) % q
            nxt[i] = (nxt[i] - c * x) % q
        master = nxt
    acc = [0] * len(pts)
    for x, y in pts:
        if y == 0:
            continue
        # synthetic division of master by (X - x)
        numer = [0] * len(pts)
        carry = 0
        for i in range(len(master) - 1, 0, -1):
            carry = (master[i] + carry * x) % q
            numer[i - 1] = carry
        denom = 1
        for x2, _ in pts:
            if x2 != x:
                denom = denom * (x - x2) % q
        w = y * pow(denom, q - 2, q) % q
        for i, c in enumerate(numer):
            acc[i] = (acc[i] + c * w) % q
    return FieldPoly.make(field, acc)
