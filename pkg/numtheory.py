"""
Aritmética de enteros grandes sobre gmpy2.

Todas las funciones aceptan y devuelven int de Python; gmpy2 solo se usa
internamente para las operaciones costosas.
"""
import hashlib
import secrets

import gmpy2

POWMOD_GMP_SIZE = 2 ** 64

MR_ROUNDS = 40


def _first_primes(count):
    primes = [2]
    while len(primes) < count:
        primes.append(int(gmpy2.next_prime(primes[-1])))
    return primes


# Primos pequeños para descartar candidatos antes de Miller-Rabin
_SMALL_PRIMES = _first_primes(300)


def powmod(a, b, c):
    """
    return int: (a ** b) % c

    Admite exponentes negativos cuando a es invertible módulo c.
    """
    if c == 1:
        return 0
    if b < 0:
        return int(gmpy2.powmod(invert(a, c), -b, c))
    if a == 1:
        return 1
    if max(a, b, c) < POWMOD_GMP_SIZE:
        return pow(a, b, c)
    return int(gmpy2.powmod(a, b, c))


def invert(a, b):
    """return int: x, where a * x == 1 mod b"""
    x = int(gmpy2.invert(a, b))
    if x == 0:
        raise ZeroDivisionError('invert(a, b) no inverse exists')
    return x


def is_prime(n):
    return n > 1 and bool(gmpy2.is_prime(n, MR_ROUNDS))


def next_prime(n):
    return int(gmpy2.next_prime(n))


def random_below(n):
    """Entero uniforme en [0, n)."""
    return secrets.randbelow(n)


def random_bits(bits):
    return secrets.randbits(bits)


def getprimeover(bits):
    """Primo aleatorio de exactamente `bits` bits."""
    while True:
        r = gmpy2.mpz(secrets.randbits(bits))
        r = gmpy2.bit_set(r, bits - 1)
        candidate = int(gmpy2.next_prime(r))
        if candidate.bit_length() == bits:
            return candidate


def _sieve_ok(n):
    for sp in _SMALL_PRIMES:
        if n % sp == 0:
            return n == sp
    return True


def safe_prime(bits):
    """
    Primo seguro p = 2p' + 1 de `bits` bits.

    Se criba p' y p contra primos pequeños antes de los tests de Miller-Rabin,
    que son la parte cara.
    """
    if bits < 8:
        raise ValueError('safe_prime necesita al menos 8 bits')
    while True:
        q = secrets.randbits(bits - 1) | (1 << (bits - 2)) | 1
        # q = 1 mod 3 implica 3 | 2q+1
        if q % 3 != 2:
            continue
        p = 2 * q + 1
        if not (_sieve_ok(q) and _sieve_ok(p)):
            continue
        if gmpy2.is_prime(q, 1) and gmpy2.is_prime(p, 1) \
                and gmpy2.is_prime(q, MR_ROUNDS) and gmpy2.is_prime(p, MR_ROUNDS):
            return int(p)


def is_safe_prime(p):
    return is_prime(p) and is_prime((p - 1) // 2)


def hash_to_int(*parts, bits=256):
    """
    Expande SHA-256 en modo contador hasta `bits` bits.

    Cada parte es bytes; se prefija su longitud para que la concatenación
    sea inyectiva.
    """
    seed = b''.join(len(part).to_bytes(4, 'big') + part for part in parts)
    out = b''
    counter = 0
    while len(out) * 8 < bits:
        out += hashlib.sha256(counter.to_bytes(4, 'big') + seed).digest()
        counter += 1
    value = int.from_bytes(out, 'big')
    return value >> (len(out) * 8 - bits)


def int_to_bytes(x):
    if x < 0:
        raise ValueError('int_to_bytes solo admite enteros no negativos')
    return x.to_bytes(max(1, (x.bit_length() + 7) // 8), 'big')
