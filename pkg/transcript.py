"""
Transcript Fiat-Shamir basado en SHA-256.

Acumula etiquetas y valores con longitud prefijada; prover y verifier que
añaden lo mismo en el mismo orden obtienen el mismo desafío.

    >>> t = Transcript(b"ctzk/eq", context=tag)
    >>> t.append_int(b"C1", c1)
    >>> c = t.challenge(q)
"""
import hashlib

from numtheory import int_to_bytes


class Transcript:
    """Transcript con separación de dominio por etiqueta."""

    def __init__(self, label, context=b''):
        self._hash = hashlib.sha256()
        self._append(b'label', label)
        self._append(b'context', context)

    def _append(self, label, data):
        self._hash.update(len(label).to_bytes(2, 'big'))
        self._hash.update(label)
        self._hash.update(len(data).to_bytes(4, 'big'))
        self._hash.update(data)

    def append_bytes(self, label, data):
        self._append(label, data)
        return self

    def append_int(self, label, value):
        self._append(label, int_to_bytes(value))
        return self

    def append_ints(self, label, values):
        for i, value in enumerate(values):
            self._append(label + b'[' + str(i).encode() + b']', int_to_bytes(value))
        return self

    def _expand(self, bits):
        seed = self._hash.copy().digest()
        out = b''
        counter = 0
        while len(out) * 8 < bits:
            out += hashlib.sha256(seed + counter.to_bytes(4, 'big')).digest()
            counter += 1
        return int.from_bytes(out, 'big') >> (len(out) * 8 - bits)

    def challenge(self, modulus):
        """Desafío en [0, modulus), con 128 bits extra para que el sesgo sea despreciable."""
        return self._expand(modulus.bit_length() + 128) % modulus

    def challenge_bits(self, bits):
        """Desafío en [0, 2^bits)."""
        return self._expand(bits)
