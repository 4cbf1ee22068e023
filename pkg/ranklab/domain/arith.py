"""
Exact integer arithmetic for the numerical invariants m(p, ℓ), a(p, ℓ),
c(p, 2) and the order formulas of wreath products and Sylow subgroups.
"""
from functools import reduce

from sympy import isprime, multiplicity, n_order, sqrt_mod
from sympy.ntheory import digits

from .exceptions import DomainError
from .model import InvariantTriple


def require_prime(value: int, name: str = "p") -> int:
    if not isinstance(value, int) or not isprime(value):
        raise DomainError(f"{name}={value} is not a prime")
    return value


def _require_pair(p: int, ell: int) -> None:
    require_prime(p, "p")
    require_prime(ell, "ell")
    if p == 2 and ell == 2:
        raise DomainError("the case p = ell = 2 is excluded")


def vp(n: int, ell: int) -> int:
    """ℓ-adic valuation of a nonzero integer."""
    if n == 0:
        raise DomainError("valuation of zero is undefined")
    return multiplicity(ell, abs(n))


def mult_order(p: int, ell: int) -> int:
    """m(p, ℓ): least n with ℓ | p^n − 1, and p − 1 when p = ℓ."""
    _require_pair(p, ell)
    if p == ell:
        return p - 1
    return n_order(p, ell)


def depth_a(p: int, ell: int) -> int:
    """a(p, ℓ): the exact power of ℓ dividing p^m(p,ℓ) − 1, and 1 when p = ℓ."""
    m = mult_order(p, ell)
    if p == ell:
        return 1
    return vp(p**m - 1, ell)


def depth_c(p: int) -> int:
    """c(p, 2) = v₂(p² − 1) for p ≡ 3 mod 4; always at least 3."""
    require_prime(p, "p")
    if p % 4 != 3:
        raise DomainError(f"c(p, 2) needs p ≡ 3 mod 4, got p={p}")
    return vp(p * p - 1, 2)


def invariant_triple(p: int, ell: int) -> InvariantTriple:
    m = mult_order(p, ell)
    a = depth_a(p, ell)
    c = depth_c(p) if ell == 2 and p % 4 == 3 else None
    return InvariantTriple(p=p, ell=ell, m=m, a=a, c=c)


def ladic_expansion(n: int, ell: int) -> list[int]:
    """Digits of n in base ℓ, least significant first; [] for n = 0."""
    if n < 0:
        raise DomainError(f"n={n} must be nonnegative")
    require_prime(ell, "ell")
    if n == 0:
        return []
    # sympy lists the base first, then the digits most significant first
    return digits(n, ell)[:0:-1]


def wreath_order(ell: int, r: int) -> int:
    """|W_r(ℓ)| = ℓ^((ℓ^r − 1)/(ℓ − 1))."""
    require_prime(ell, "ell")
    if r < 0:
        raise DomainError(f"r={r} must be nonnegative")
    return ell ** ((ell**r - 1) // (ell - 1))


def sylow_sym_valuation(n: int, ell: int) -> int:
    """v_ℓ(n!) = (n − digit sum of n in base ℓ) / (ℓ − 1), Legendre's formula."""
    return (n - sum(ladic_expansion(n, ell))) // (ell - 1)


def gl_order(d: int, q: int) -> int:
    """|GL_d(F_q)| = ∏_{i<d} (q^d − q^i)."""
    return reduce(lambda acc, i: acc * (q**d - q**i), range(d), 1)


def sqrt_minus_one(p: int, k: int = 1) -> int:
    """
    Least square root of −1 modulo p, lifted to modulo p^k. The lift is the
    unique root modulo p^k reducing to the least root modulo p.
    """
    require_prime(p, "p")
    if p % 4 != 1:
        raise DomainError(f"−1 is a square modulo p only for p ≡ 1 mod 4, got p={p}")
    root = min(sqrt_mod(p - 1, p, all_roots=True))
    if k == 1:
        return root
    lifts = [r for r in sqrt_mod(p**k - 1, p**k, all_roots=True) if r % p == root]
    return min(lifts)
