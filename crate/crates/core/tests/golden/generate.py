"""Independent oracle for the committed golden values.

Möbius values come from trial division (no sieve); phases come from exact
integer square roots, so frac(k * n^j * sqrt(D)) is correct to 2^-128
before the final conversion to float.

    python3 generate.py > golden.json
"""
import json
import math
from math import isqrt

K = 128
ONE = 1 << K
MASK = ONE - 1


def primes_upto(n):
    out = []
    for c in range(2, n + 1):
        if all(c % p for p in out if p * p <= c):
            out.append(c)
    return out


PRIMES = primes_upto(1000)


def mobius_trial(n):
    mu = 1
    for p in PRIMES:
        if p * p > n:
            break
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            mu = -mu
    if n > 1:
        mu = -mu
    return mu


def frac_sqrt_term(c_num, c_den, d, n, j):
    """frac((c_num/c_den) * n^j * sqrt(d)) * 2^K, floored."""
    m = c_num * n ** j
    sign = -1 if m < 0 else 1
    # |m| sqrt(d) / c_den scaled by 2^K
    v = isqrt(d * m * m * ONE * ONE) // c_den
    if sign < 0:
        v = -v - 1
    return v & MASK


def frac_rational(num, den, n, j):
    return ((num * n ** j * ONE) // den) & MASK


def phase(terms, n):
    """terms: list of ('sqrt', num, den, d, j) or ('rat', num, den, j)."""
    acc = 0
    for t in terms:
        if t[0] == "sqrt":
            acc += frac_sqrt_term(t[1], t[2], t[3], n, t[4])
        else:
            acc += frac_rational(t[1], t[2], n, t[3])
    return (acc & MASK) / ONE


def e(x):
    a = 2 * math.pi * x
    return complex(math.cos(a), math.sin(a))


def correlation(mu, terms, checkpoints):
    out = {}
    re, im = [], []
    cps = set(checkpoints)
    for n in range(1, max(checkpoints) + 1):
        if mu[n]:
            z = mu[n] * e(phase(terms, n))
            re.append(z.real)
            im.append(z.imag)
        if n in cps:
            s = complex(math.fsum(re), math.fsum(im)) / n
            out[str(n)] = [s.real, s.imag, abs(s)]
    return out


def weyl(terms, k, n_max):
    kt = []
    for t in terms:
        kt.append((t[0], t[1] * k) + tuple(t[2:]))
    re, im = [], []
    for n in range(-n_max, n_max + 1):
        z = e(phase(kt, n))
        re.append(z.real)
        im.append(z.imag)
    s = complex(math.fsum(re), math.fsum(im)) / (2 * n_max + 1)
    return abs(s)


def main():
    limit = 10 ** 6
    mu = [0] + [mobius_trial(n) for n in range(1, limit + 1)]
    mertens = {}
    acc = 0
    checkpoints = [10 ** k for k in range(1, 7)]
    for n in range(1, limit + 1):
        acc += mu[n]
        if n in checkpoints:
            mertens[str(n)] = acc

    linear = [("sqrt", 1, 1, 2, 1)]
    quadratic = [("sqrt", 1, 1, 2, 2)]
    cubic = [("sqrt", 1, 1, 3, 3), ("rat", 1, 5, 1)]
    corr_cps = [10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6]

    out = {
        "mertens": mertens,
        "correlation_linear_sqrt2": correlation(mu, linear, corr_cps),
        "correlation_quadratic_sqrt2": correlation(mu, quadratic, corr_cps),
        "weyl_abs_avg_1e5": {
            "sqrt2*n k=1": weyl(linear, 1, 10 ** 5),
            "sqrt2*n^2 k=1": weyl(quadratic, 1, 10 ** 5),
            "sqrt2*n^2 k=3": weyl(quadratic, 3, 10 ** 5),
            "sqrt3*n^3+n/5 k=1": weyl(cubic, 1, 10 ** 5),
        },
        "frac_n2_sqrt2": {str(n): phase(quadratic, n) for n in [1, 7, 1000, 123456, 10 ** 6, 10 ** 9]},
    }
    print(json.dumps(out, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
