"""Independent oracles shared by the test modules.

Everything here deliberately avoids the library's arithmetic paths:
multiplication is schoolbook carry-less multiply followed by long
division, inverses and intersection witnesses come from exhaustive
search, so the implementations under test are checked against routes
they do not share code with.
"""

import numpy as np

from skewcache import FieldSpec, permute

# x^8 + x^4 + x^3 + x + 1, used where tests need a GF(2^8) modulus
MODULUS_256 = 0x11B


def clmul(a: int, b: int) -> int:
    """Schoolbook carry-less multiply (no reduction)."""
    r = 0
    i = 0
    while b >> i:
        if (b >> i) & 1:
            r ^= a << i
        i += 1
    return r


def poly_mod_oracle(a: int, b: int) -> int:
    """Long division remainder over GF(2)."""
    db = b.bit_length() - 1
    while a and a.bit_length() - 1 >= db:
        a ^= b << (a.bit_length() - 1 - db)
    return a


def schoolbook_mul(modulus: int, x: int, y: int) -> int:
    """Multiply-then-divide oracle for binary field products."""
    return poly_mod_oracle(clmul(x, y), modulus)


def search_inverse(f: FieldSpec, x: int) -> int:
    """Exhaustive search for the multiplicative inverse."""
    for y in range(f.order):
        if f.mul(x, y) == 1:
            return y
    raise AssertionError(f"{x} has no inverse in {f!r}")


def brute_force_witnesses(sp, t, t2, s, s2) -> list[int]:
    """All ways where two domain sets map to the same physical set."""
    m = sp.field.order
    return [w for w in range(m) if permute(sp, t, s, w) == permute(sp, t2, s2, w)]


def small_fields(max_order: int) -> list[FieldSpec]:
    """Every supported field construction with order <= max_order."""
    fields = [FieldSpec.prime(p) for p in range(2, max_order + 1) if _is_prime(p)]
    n = 2
    while 2 ** n <= max_order:
        modulus = MODULUS_256 if n == 8 else 0
        fields.append(FieldSpec.binary(n, modulus=modulus))
        n += 1
    return fields


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def check_field_axioms(f: FieldSpec) -> None:
    """Exhaustive field-axiom check driven by full operation tables."""
    q = f.order
    ar = np.arange(q, dtype=np.int16)
    add = np.array([[f.add(x, y) for y in range(q)] for x in range(q)], dtype=np.int16)
    mul = np.array([[f.mul(x, y) for y in range(q)] for x in range(q)], dtype=np.int16)
    # commutativity and identities
    assert (add == add.T).all(), f"{f!r}: addition not commutative"
    assert (mul == mul.T).all(), f"{f!r}: multiplication not commutative"
    assert (add[0] == ar).all(), f"{f!r}: 0 is not the additive identity"
    assert (mul[1] == ar).all(), f"{f!r}: 1 is not the multiplicative identity"
    # associativity, all q^3 triples at once
    assert (add[add, :] == add[:, add]).all(), f"{f!r}: addition not associative"
    assert (mul[mul, :] == mul[:, mul]).all(), f"{f!r}: multiplication not associative"
    # distributivity: x*(y+z) == x*y + x*z
    left = mul[:, add]
    right = add[mul[:, :, None], mul[:, None, :]]
    assert (left == right).all(), f"{f!r}: distributivity fails"
    # subtraction really is the additive inverse: (x - y) + y == x
    sub = np.array([[f.sub(x, y) for y in range(q)] for x in range(q)], dtype=np.int16)
    assert (add[sub, ar[None, :]] == ar[:, None]).all(), f"{f!r}: sub is not inverse of add"
    # multiplicative inverses and no zero divisors
    for x in range(1, q):
        assert f.mul(x, f.inv(x)) == 1, f"{f!r}: inv({x}) wrong"
    assert (mul[1:, 1:] != 0).all(), f"{f!r}: zero divisors present"
