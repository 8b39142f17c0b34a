"""
Compromisos de Pedersen sobre un subgrupo de orden primo de Z_p*.

Este módulo contiene:
- Generación determinista de parámetros (p, q, g, h) sin setup confiable
- commit / verify_opening / combine (homomorfismo aditivo)
- Prueba de igualdad de mensajes comprometidos (Schnorr sobre h)
- Prueba de rango [1, 2^W) por descomposición en bits con pruebas OR

Todas las pruebas guardan (anuncio, desafío, respuesta). En modo no
interactivo el desafío se recalcula con el transcript; en modo interactivo
(interactive=True) solo se comprueba el álgebra para el desafío guardado,
que es lo que necesitan los simuladores y el arnés del juego.
"""
import functools
import logging
import secrets
from dataclasses import dataclass
from typing import Tuple

from errors import CommitmentError, ParameterError
from numtheory import hash_to_int, invert, is_prime, next_prime, powmod
from transcript import Transcript
from wire import (KIND_BIT_PROOF, KIND_COMMITMENT, KIND_EQ_PROOF, KIND_RANGE_PROOF,
                  WireReader, WireWriter)

logger = logging.getLogger(__name__)

HASH_WIDTH = 160
RANGE_WIDTH = 64
DEFAULT_BIT_LENGTHS = (2048, 256)
DEFAULT_LABEL = b'ctzk-pedersen-v1'


def no_wraparound_floor(hash_width=HASH_WIDTH):
    """Bits mínimos de q para que T+H(x) e I+H(x) nunca den la vuelta módulo q."""
    return hash_width + RANGE_WIDTH + 2


@dataclass(frozen=True)
class CommitParams:
    p: int
    q: int
    g: int
    h: int
    label: bytes = DEFAULT_LABEL

    def validate(self):
        """Lanza ParameterError si los parámetros no describen un subgrupo de orden q."""
        if not (is_prime(self.p) and is_prime(self.q)):
            raise ParameterError("p y q deben ser primos")
        if (self.p - 1) % self.q != 0:
            raise ParameterError("q debe dividir p - 1")
        for name, gen in (('g', self.g), ('h', self.h)):
            if not 1 < gen < self.p or powmod(gen, self.q, self.p) != 1:
                raise ParameterError(f"{name} no genera el subgrupo de orden q")
        if self.g == self.h:
            raise ParameterError("g y h deben ser distintos")
        return self

    def contains(self, value):
        return isinstance(value, int) and 0 < value < self.p and powmod(value, self.q, self.p) == 1

    @property
    def element_size(self):
        return (self.p.bit_length() + 7) // 8

    def to_dict(self):
        return {
            'p': hex(self.p), 'q': hex(self.q), 'g': hex(self.g), 'h': hex(self.h),
            'label': self.label.decode('ascii'),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(int(data['p'], 16), int(data['q'], 16), int(data['g'], 16),
                   int(data['h'], 16), data['label'].encode('ascii')).validate()


def derive_generator(p, q, label, tag=b'h'):
    """
    Hash-to-group: se hashea la etiqueta con un contador y se eleva al cofactor
    (p-1)/q; con p seguro eso es elevar al cuadrado. Nadie conoce log_g h.
    """
    cofactor = (p - 1) // q
    counter = 0
    while True:
        x = hash_to_int(label, tag, counter.to_bytes(4, 'big'), bits=p.bit_length() + 128) % p
        candidate = powmod(x, cofactor, p)
        if candidate not in (0, 1):
            return candidate
        counter += 1


def params_from_group(p, q, g, label=DEFAULT_LABEL, h=None, enforce_floor=True,
                      hash_width=HASH_WIDTH):
    """
    Parámetros sobre un grupo explícito. Con enforce_floor=False sirve para el
    grupo de juguete (p=23, q=11, g=4) de los tests.
    """
    if enforce_floor and q.bit_length() < no_wraparound_floor(hash_width):
        raise ParameterError(
            f"q de {q.bit_length()} bits está bajo el mínimo {no_wraparound_floor(hash_width)}")
    if h is None:
        h = derive_generator(p, q, label, b'h')
    return CommitParams(p, q, g, h, label).validate()


@functools.lru_cache(maxsize=8)
def setup_params(bit_lengths=DEFAULT_BIT_LENGTHS, seed_label=DEFAULT_LABEL,
                 hash_width=HASH_WIDTH):
    """
    Genera (p, q, g, h) de forma determinista a partir de seed_label.

    Args:
        bit_lengths: (bits de p, bits de q)
        seed_label: etiqueta de la que se derivan todos los valores
        hash_width: ancho del hash escalar, fija el mínimo de bits de q

    Returns:
        CommitParams validado
    """
    p_bits, q_bits = bit_lengths
    if q_bits < no_wraparound_floor(hash_width):
        raise ParameterError(
            f"q de {q_bits} bits está bajo el mínimo {no_wraparound_floor(hash_width)} "
            f"para hash de {hash_width} bits")
    if p_bits <= q_bits + 1:
        raise ParameterError("p debe ser mayor que q")

    counter = 0
    while True:
        seed = hash_to_int(seed_label, b'q', counter.to_bytes(4, 'big'), bits=q_bits)
        q = next_prime(seed | (1 << (q_bits - 1)))
        counter += 1
        if q.bit_length() == q_bits:
            break

    counter = 0
    while True:
        x = hash_to_int(seed_label, b'p', counter.to_bytes(4, 'big'), bits=p_bits)
        x |= 1 << (p_bits - 1)
        p = x - (x % (2 * q)) + 1
        counter += 1
        if p.bit_length() == p_bits and is_prime(p):
            break

    g = derive_generator(p, q, seed_label, b'g')
    h = derive_generator(p, q, seed_label, b'h')
    logger.info(f"Parámetros Pedersen generados: p={p_bits} bits, q={q_bits} bits")
    return CommitParams(p, q, g, h, seed_label).validate()


def random_scalar(params):
    return secrets.randbelow(params.q)


# ====================
# Compromisos
# ====================

@dataclass(frozen=True)
class Commitment:
    value: int

    def encode(self):
        return WireWriter(KIND_COMMITMENT).write_int(self.value).getvalue()

    @classmethod
    def decode(cls, data):
        reader = WireReader(data, KIND_COMMITMENT)
        commitment = cls(reader.read_int())
        reader.expect_end()
        return commitment


@dataclass(frozen=True)
class Opening:
    m: int
    r: int


def commit(params, m, r):
    """Devuelve g^m · h^r mod p."""
    if not (0 <= m < params.q and 0 <= r < params.q):
        raise CommitmentError("m y r deben estar en [0, q)")
    return Commitment(powmod(params.g, m, params.p) * powmod(params.h, r, params.p) % params.p)


def commit_fresh(params, m):
    """Compromiso con aleatoriedad nueva; devuelve (Commitment, Opening)."""
    r = random_scalar(params)
    return commit(params, m % params.q, r), Opening(m % params.q, r)


def verify_opening(params, C, m, r):
    if not (0 <= m < params.q and 0 <= r < params.q):
        return False
    return commit(params, m, r).value == C.value


def combine(params, terms, k=0):
    """
    ∏ C_i^{c_i} · g^k mod p.

    Args:
        terms: lista de (Commitment, coeficiente público)
        k: constante pública aditiva
    """
    if not terms:
        raise CommitmentError("combine necesita al menos un término")
    value = powmod(params.g, k % params.q, params.p)
    for commitment, coeff in terms:
        value = value * powmod(commitment.value, coeff % params.q, params.p) % params.p
    return Commitment(value)


def combine_openings(params, terms, k=0):
    """Apertura del resultado de combine() cuando se conocen las aperturas."""
    m = k
    r = 0
    for opening, coeff in terms:
        m += coeff * opening.m
        r += coeff * opening.r
    return Opening(m % params.q, r % params.q)


# ====================
# Prueba de igualdad
# ====================

@dataclass(frozen=True)
class EqProof:
    announcement: int
    challenge: int
    response: int

    def write_to(self, writer):
        writer.write_int(self.announcement).write_int(self.challenge).write_int(self.response)

    @classmethod
    def read_from(cls, reader):
        return cls(reader.read_int(), reader.read_int(), reader.read_int())

    def encode(self):
        writer = WireWriter(KIND_EQ_PROOF)
        self.write_to(writer)
        return writer.getvalue()

    @classmethod
    def decode(cls, data):
        reader = WireReader(data, KIND_EQ_PROOF)
        proof = cls.read_from(reader)
        reader.expect_end()
        return proof


def _eq_challenge(params, C1, C2, announcement, context):
    return (Transcript(params.label + b'/eq', context)
            .append_int(b'C1', C1.value)
            .append_int(b'C2', C2.value)
            .append_int(b'A', announcement)
            .challenge(params.q))


def _quotient(params, C1, C2):
    return C1.value * invert(C2.value, params.p) % params.p


def prove_equal(params, C1, open1, C2, open2, context=b''):
    """
    Prueba que C1 y C2 ocultan el mismo mensaje: C1/C2 = h^(r1-r2) y se prueba
    conocimiento de ese logaritmo en base h.
    """
    if open1.m % params.q != open2.m % params.q:
        raise CommitmentError("Los compromisos no ocultan el mismo mensaje")
    witness = (open1.r - open2.r) % params.q
    k = random_scalar(params)
    announcement = powmod(params.h, k, params.p)
    c = _eq_challenge(params, C1, C2, announcement, context)
    return EqProof(announcement, c, (k + c * witness) % params.q)


def verify_equal(params, C1, C2, proof, context=b'', interactive=False):
    if not (params.contains(C1.value) and params.contains(C2.value)
            and params.contains(proof.announcement)):
        return False
    if not (0 <= proof.challenge < params.q and 0 <= proof.response < params.q):
        return False
    if not interactive and proof.challenge != _eq_challenge(params, C1, C2, proof.announcement, context):
        return False
    lhs = powmod(params.h, proof.response, params.p)
    rhs = proof.announcement * powmod(_quotient(params, C1, C2), proof.challenge, params.p) % params.p
    return lhs == rhs


def simulate_equal(params, C1, C2, challenge):
    """Simulador HVZK: transcript válido para un desafío dado sin conocer testigo."""
    response = random_scalar(params)
    y = _quotient(params, C1, C2)
    announcement = powmod(params.h, response, params.p) * invert(powmod(y, challenge, params.p), params.p) % params.p
    return EqProof(announcement, challenge % params.q, response)


# ====================
# Pruebas OR por bit
# ====================

@dataclass(frozen=True)
class BitProof:
    a0: int
    a1: int
    c0: int
    c1: int
    s0: int
    s1: int

    def write_to(self, writer):
        for value in (self.a0, self.a1, self.c0, self.c1, self.s0, self.s1):
            writer.write_int(value)

    @classmethod
    def read_from(cls, reader):
        return cls(*(reader.read_int() for _ in range(6)))

    def encode(self):
        writer = WireWriter(KIND_BIT_PROOF)
        self.write_to(writer)
        return writer.getvalue()


def _bit_statements(params, B):
    """Y0 = B (bit 0) e Y1 = B/g (bit 1); ambos deben ser potencias de h."""
    return B.value, B.value * invert(params.g, params.p) % params.p


def _bit_challenge(params, B, a0, a1, context):
    return (Transcript(params.label + b'/bit', context)
            .append_int(b'B', B.value)
            .append_int(b'a0', a0)
            .append_int(b'a1', a1)
            .challenge(params.q))


def _simulated_branch(params, y, c):
    s = random_scalar(params)
    a = powmod(params.h, s, params.p) * invert(powmod(y, c, params.p), params.p) % params.p
    return a, s


def prove_bit(params, B, bit, r, context=b''):
    """Prueba OR (Cramer-Damgård-Schoenmakers) de que B compromete 0 o 1."""
    if bit not in (0, 1):
        raise CommitmentError("El valor comprometido no es un bit")
    ys = _bit_statements(params, B)
    other = 1 - bit
    c_other = random_scalar(params)
    a_other, s_other = _simulated_branch(params, ys[other], c_other)
    k = random_scalar(params)
    a_real = powmod(params.h, k, params.p)
    a = [0, 0]
    a[bit], a[other] = a_real, a_other
    c = _bit_challenge(params, B, a[0], a[1], context)
    c_real = (c - c_other) % params.q
    s_real = (k + c_real * r) % params.q
    cs, ss = [0, 0], [0, 0]
    cs[bit], cs[other] = c_real, c_other
    ss[bit], ss[other] = s_real, s_other
    return BitProof(a[0], a[1], cs[0], cs[1], ss[0], ss[1])


def verify_bit(params, B, proof, context=b'', interactive=False):
    values = (proof.a0, proof.a1)
    if not all(params.contains(v) for v in values + (B.value,)):
        return False
    if not all(0 <= v < params.q for v in (proof.c0, proof.c1, proof.s0, proof.s1)):
        return False
    if not interactive:
        if (proof.c0 + proof.c1) % params.q != _bit_challenge(params, B, proof.a0, proof.a1, context):
            return False
    for y, a, c, s in zip(_bit_statements(params, B), values, (proof.c0, proof.c1), (proof.s0, proof.s1)):
        if powmod(params.h, s, params.p) != a * powmod(y, c, params.p) % params.p:
            return False
    return True


def simulate_bit(params, B, challenge):
    """Simulador de la prueba OR: ambas ramas simuladas con c0 + c1 = challenge."""
    ys = _bit_statements(params, B)
    c0 = random_scalar(params)
    c1 = (challenge - c0) % params.q
    a0, s0 = _simulated_branch(params, ys[0], c0)
    a1, s1 = _simulated_branch(params, ys[1], c1)
    return BitProof(a0, a1, c0, c1, s0, s1)


# ====================
# Prueba de rango [1, 2^W)
# ====================

def range_weights(width):
    """Pesos 2^i para i < W-1 y 2^(W-1) - 1 para el último bit: cubren [0, 2^W - 2]."""
    return [1 << i for i in range(width - 1)] + [(1 << (width - 1)) - 1]


def decompose(v, width):
    """Bits b_i con Σ b_i·w_i = v para v en [0, 2^W - 2]."""
    half = 1 << (width - 1)
    if v < half:
        top, low = 0, v
    else:
        top, low = 1, v - (half - 1)
    return [(low >> i) & 1 for i in range(width - 1)] + [top]


@dataclass(frozen=True)
class RangeProof:
    width: int
    bit_commitments: Tuple[Commitment, ...]
    bit_proofs: Tuple[BitProof, ...]
    consistency: EqProof

    def write_to(self, writer):
        writer.write_u16(self.width)
        writer.write_u16(len(self.bit_commitments))
        for commitment in self.bit_commitments:
            writer.write_int(commitment.value)
        writer.write_u16(len(self.bit_proofs))
        for bit_proof in self.bit_proofs:
            bit_proof.write_to(writer)
        self.consistency.write_to(writer)

    @classmethod
    def read_from(cls, reader):
        width = reader.read_u16()
        commitments = tuple(Commitment(reader.read_int()) for _ in range(reader.read_u16()))
        bit_proofs = tuple(BitProof.read_from(reader) for _ in range(reader.read_u16()))
        return cls(width, commitments, bit_proofs, EqProof.read_from(reader))

    def encode(self):
        writer = WireWriter(KIND_RANGE_PROOF)
        self.write_to(writer)
        return writer.getvalue()

    @classmethod
    def decode(cls, data):
        reader = WireReader(data, KIND_RANGE_PROOF)
        proof = cls.read_from(reader)
        reader.expect_end()
        return proof


def _check_width(params, width):
    if width < 1 or (1 << width) > params.q:
        raise ParameterError(f"Ancho {width} inválido para q de {params.q.bit_length()} bits")


def _range_context(params, C, width, bit_commitments, context):
    t = Transcript(params.label + b'/range', context)
    t.append_int(b'C', C.value).append_int(b'W', width)
    t.append_ints(b'B', [b.value for b in bit_commitments])
    return t.challenge_bits(256).to_bytes(32, 'big')


def _range_targets(params, C, bit_commitments, width):
    shifted = combine(params, [(C, 1)], k=-1)
    weighted = combine(params, list(zip(bit_commitments, range_weights(width))))
    return shifted, weighted


def prove_nonneg_range(params, C, opening, width=RANGE_WIDTH, context=b''):
    """
    Prueba que C compromete un valor en [1, 2^W).

    Se descompone v = m - 1 en W bits con los pesos de range_weights(), se
    prueba que cada compromiso de bit abre a 0 o 1 y que C·g^-1 y
    ∏ B_i^{w_i} ocultan el mismo valor.
    """
    _check_width(params, width)
    m = opening.m
    if not 1 <= m < (1 << width):
        raise CommitmentError(f"Valor fuera de [1, 2^{width}): no se puede probar el rango")
    v = m - 1
    bits = decompose(v, width)
    rands = [random_scalar(params) for _ in bits]
    bit_commitments = tuple(commit(params, b, r) for b, r in zip(bits, rands))
    ctx = _range_context(params, C, width, bit_commitments, context)
    bit_proofs = tuple(
        prove_bit(params, B, b, r, ctx + i.to_bytes(2, 'big'))
        for i, (B, b, r) in enumerate(zip(bit_commitments, bits, rands))
    )
    shifted, weighted = _range_targets(params, C, bit_commitments, width)
    weighted_r = sum(w * r for w, r in zip(range_weights(width), rands)) % params.q
    consistency = prove_equal(params, shifted, Opening(v, opening.r), weighted,
                              Opening(v, weighted_r), ctx)
    return RangeProof(width, bit_commitments, bit_proofs, consistency)


def verify_nonneg_range(params, C, width, proof, context=b'', interactive=False):
    if proof.width != width or width < 1 or (1 << width) > params.q:
        return False
    if len(proof.bit_commitments) != width or len(proof.bit_proofs) != width:
        return False
    if not params.contains(C.value):
        return False
    ctx = _range_context(params, C, width, proof.bit_commitments, context)
    for i, (B, bit_proof) in enumerate(zip(proof.bit_commitments, proof.bit_proofs)):
        if not verify_bit(params, B, bit_proof, ctx + i.to_bytes(2, 'big'), interactive):
            return False
    shifted, weighted = _range_targets(params, C, proof.bit_commitments, width)
    return verify_equal(params, shifted, weighted, proof.consistency, ctx, interactive)


def simulate_range(params, C, width, challenges):
    """
    Simulador de la prueba de rango: compromisos de bit aleatorios y
    transcripts simulados para los desafíos dados (W de bit + 1 de consistencia).
    """
    _check_width(params, width)
    bit_commitments = tuple(Commitment(powmod(params.h, random_scalar(params), params.p))
                            for _ in range(width))
    bit_proofs = tuple(simulate_bit(params, B, c) for B, c in zip(bit_commitments, challenges[:width]))
    shifted, weighted = _range_targets(params, C, bit_commitments, width)
    consistency = simulate_equal(params, shifted, weighted, challenges[width])
    return RangeProof(width, bit_commitments, bit_proofs, consistency)
