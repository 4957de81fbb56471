"""
Scalar arithmetic for the reference interpreter.

`IntegerArith` evaluates over unbounded integers, `FieldArith` over the prime
field GF(p). Both expose the same operations so the interpreter is agnostic of
the mode; operations that are undefined raise :class:`~zk_coder.errors.EvalError`.

"""
from zk_coder.constants import (
    DIVISION_BY_ZERO,
    INVERSE_OF_ZERO,
    NEGATIVE_EXPONENT,
    NEGATIVE_OPERAND,
    NO_INTEGER_INVERSE,
    NON_EXACT_DIVISION,
)
from zk_coder.errors import EvalError


def euclidean_divmod(a, b):
    """Quotient and remainder with ``0 <= r < |b|`` and ``a == q * b + r``."""
    if b == 0:
        raise EvalError(DIVISION_BY_ZERO, "{} divided by zero".format(a))
    r = a % abs(b)
    return (a - r) // b, r


class IntegerArith:
    """Unbounded integer semantics."""

    def normalize(self, a):
        return a

    def add(self, a, b):
        return a + b

    def subtract(self, a, b):
        return a - b

    def multiply(self, a, b):
        return a * b

    def negate(self, a):
        return -a

    def divide(self, a, b):
        if b == 0:
            raise EvalError(DIVISION_BY_ZERO, "{} / 0".format(a))
        q, r = euclidean_divmod(a, b)
        if r != 0:
            raise EvalError(NON_EXACT_DIVISION, "{} / {} leaves remainder {}".format(a, b, r))
        return q

    def modulo(self, a, b):
        return euclidean_divmod(a, b)[1]

    def floor_divide(self, a, b):
        return euclidean_divmod(a, b)[0]

    def power(self, a, e):
        if e < 0:
            raise EvalError(NEGATIVE_EXPONENT, "{} ** {}".format(a, e))
        return a ** e

    def inverse(self, a):
        if a == 0:
            raise EvalError(INVERSE_OF_ZERO, "inverse of 0")
        if a not in (1, -1):
            raise EvalError(NO_INTEGER_INVERSE, "{} has no integer inverse".format(a))
        return a

    def absolute(self, a):
        return abs(a)

    def sign(self, a):
        return (a > 0) - (a < 0)

    def _bitwise_operands(self, *operands):
        for operand in operands:
            if operand < 0:
                raise EvalError(NEGATIVE_OPERAND, "bitwise operation on negative value {}".format(operand))
        return operands

    def bit_and(self, a, b):
        a, b = self._bitwise_operands(a, b)
        return a & b

    def bit_or(self, a, b):
        a, b = self._bitwise_operands(a, b)
        return a | b

    def bit_xor(self, a, b):
        a, b = self._bitwise_operands(a, b)
        return a ^ b

    def less_than(self, a, b):
        return a < b

    def equal(self, a, b):
        return a == b

    def is_zero(self, a):
        return a == 0


class FieldArith(IntegerArith):
    """
    Arithmetic in GF(p). Values are kept as canonical representatives in
    ``[0, p)``; comparisons, `%`, `//` and bitwise operations act on them.

    """

    def __init__(self, prime):
        self.prime = prime

    def normalize(self, a):
        return a % self.prime

    def add(self, a, b):
        return (a + b) % self.prime

    def subtract(self, a, b):
        return (a - b) % self.prime

    def multiply(self, a, b):
        return (a * b) % self.prime

    def negate(self, a):
        return -a % self.prime

    def divide(self, a, b):
        if b % self.prime == 0:
            raise EvalError(DIVISION_BY_ZERO, "{} / 0 in GF(p)".format(a))
        return self.multiply(a, self.inverse(b))

    def modulo(self, a, b):
        return euclidean_divmod(a % self.prime, b % self.prime)[1]

    def floor_divide(self, a, b):
        return euclidean_divmod(a % self.prime, b % self.prime)[0]

    def power(self, a, e):
        return pow(a, e % self.prime, self.prime)

    def inverse(self, a):
        if a % self.prime == 0:
            raise EvalError(INVERSE_OF_ZERO, "inverse of 0 in GF(p)")
        return pow(a, -1, self.prime)

    def is_negative(self, a):
        return a % self.prime > (self.prime - 1) // 2

    def absolute(self, a):
        return self.negate(a) if self.is_negative(a) else a % self.prime

    def sign(self, a):
        if a % self.prime == 0:
            return 0
        return self.prime - 1 if self.is_negative(a) else 1

    def _bitwise_operands(self, *operands):
        return tuple(operand % self.prime for operand in operands)

    def less_than(self, a, b):
        return a % self.prime < b % self.prime

    def equal(self, a, b):
        return (a - b) % self.prime == 0

    def is_zero(self, a):
        return a % self.prime == 0
