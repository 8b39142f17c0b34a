"""
Firmas Camenisch-Lysyanskaya sobre RSA (módulo especial n = p·q con p, q seguros).

Una firma sobre m es (e, s, v) con v^e ≡ a^m · b^s · c (mod n). La prueba de
conocimiento de firma (SigPoK) muestra, sin revelar m ni la firma, que el
prover tiene una firma válida sobre el mensaje oculto en un compromiso de
Pedersen C_m = g^m h^r del grupo de orden primo.

Construcción de la prueba:
- Se aleatoriza la firma: v' = v·b^w, s' = s + w·e (sigue siendo válida).
- Con e = 2^(ℓ_e-1) + e' se prueba conocimiento de (e', m, s') en
  c · v'^(-2^(ℓ_e-1)) = v'^e' · a^-m · b^-s'   (mod n)
  y de (m, r) en C_m = g^m h^r (mod p), con la misma respuesta para m.
- El tamaño de las respuestas acota e' y m (chequeo de intervalo).
"""
import logging
import secrets
from dataclasses import dataclass

from errors import ParameterError, SignatureError
from numtheory import invert, is_prime, next_prime, powmod, safe_prime
from transcript import Transcript
from wire import KIND_CL_SIGNATURE, KIND_SIG_POK, WireReader, WireWriter

logger = logging.getLogger(__name__)

PRODUCTION_MODULUS_BITS = 2048
TOY_MODULUS_BITS = 512

MESSAGE_BITS = 226
CHALLENGE_BITS = 160
STAT_ZK_BITS = 80
E_INTERVAL_BITS = 120


@dataclass(frozen=True)
class CLParams:
    """Longitudes de la construcción CL02 para un tamaño de módulo."""
    modulus_bits: int
    message_bits: int = MESSAGE_BITS
    challenge_bits: int = CHALLENGE_BITS
    stat_zk_bits: int = STAT_ZK_BITS
    e_interval_bits: int = E_INTERVAL_BITS

    @property
    def e_bits(self):
        # e debe superar a los mensajes y a cualquier e' extraído
        return max(self.message_bits + 2,
                   self.e_interval_bits + self.stat_zk_bits + self.challenge_bits + 4)

    @property
    def s_bits(self):
        return self.modulus_bits + self.message_bits + self.stat_zk_bits

    @property
    def blind_bits(self):
        return self.modulus_bits + self.stat_zk_bits

    @property
    def e_offset(self):
        return 1 << (self.e_bits - 1)

    @property
    def e_response_bits(self):
        return self.e_interval_bits + self.stat_zk_bits + self.challenge_bits + 1

    @property
    def m_response_bits(self):
        return self.message_bits + self.stat_zk_bits + self.challenge_bits + 1

    @property
    def s_randomizer_bits(self):
        return max(self.s_bits, self.blind_bits + self.e_bits) + 1 + self.stat_zk_bits + self.challenge_bits


@dataclass(frozen=True)
class CLPublicKey:
    n: int
    a: int
    b: int
    c: int
    message_bits: int = MESSAGE_BITS

    @property
    def cl_params(self):
        return CLParams(self.n.bit_length(), self.message_bits)

    def fingerprint(self):
        return (Transcript(b'ctzk/cl-key')
                .append_int(b'n', self.n).append_int(b'a', self.a)
                .append_int(b'b', self.b).append_int(b'c', self.c)
                .challenge_bits(256).to_bytes(32, 'big'))

    def to_dict(self):
        return {'n': hex(self.n), 'a': hex(self.a), 'b': hex(self.b), 'c': hex(self.c),
                'message_bits': self.message_bits}

    @classmethod
    def from_dict(cls, data):
        return cls(int(data['n'], 16), int(data['a'], 16), int(data['b'], 16),
                   int(data['c'], 16), int(data.get('message_bits', MESSAGE_BITS)))


@dataclass(frozen=True)
class CLSecretKey:
    p: int
    q: int

    @property
    def group_order(self):
        """Orden de QR_n: p'·q'."""
        return ((self.p - 1) // 2) * ((self.q - 1) // 2)

    def to_dict(self):
        return {'p': hex(self.p), 'q': hex(self.q)}

    @classmethod
    def from_dict(cls, data):
        return cls(int(data['p'], 16), int(data['q'], 16))


@dataclass(frozen=True)
class CLSignature:
    e: int
    s: int
    v: int

    def write_to(self, writer):
        writer.write_int(self.e).write_int(self.s).write_int(self.v)

    @classmethod
    def read_from(cls, reader):
        return cls(reader.read_int(), reader.read_int(), reader.read_int())

    def encode(self):
        writer = WireWriter(KIND_CL_SIGNATURE)
        self.write_to(writer)
        return writer.getvalue()

    @classmethod
    def decode(cls, data):
        reader = WireReader(data, KIND_CL_SIGNATURE)
        sig = cls.read_from(reader)
        reader.expect_end()
        return sig


def _random_qr(n):
    while True:
        x = secrets.randbelow(n)
        if x > 1 and _gcd(x, n) == 1:
            return x * x % n


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def keygen(modulus_bits=PRODUCTION_MODULUS_BITS, toy=False):
    """
    Genera un par de claves CL.

    Args:
        modulus_bits: bits de n; ≥ 2048 salvo en modo juguete (≥ 512)
        toy: habilita módulos pequeños para tests

    Returns:
        tuple: (CLPublicKey, CLSecretKey)
    """
    minimum = TOY_MODULUS_BITS if toy else PRODUCTION_MODULUS_BITS
    if modulus_bits < minimum:
        raise ParameterError(f"Módulo de {modulus_bits} bits bajo el mínimo {minimum}")
    half = modulus_bits // 2
    while True:
        p = safe_prime(half)
        q = safe_prime(modulus_bits - half)
        n = p * q
        if p != q and n.bit_length() == modulus_bits:
            break
    pk = CLPublicKey(n, _random_qr(n), _random_qr(n), _random_qr(n))
    logger.info(f"Clave CL generada ({modulus_bits} bits{', juguete' if toy else ''})")
    return pk, CLSecretKey(p, q)


def _check_message(pk, m):
    if not 0 <= m < (1 << pk.message_bits):
        raise SignatureError(f"Mensaje fuera del intervalo [0, 2^{pk.message_bits})")


def _random_e(params):
    while True:
        e = next_prime(params.e_offset + secrets.randbits(params.e_interval_bits - 1))
        if e - params.e_offset < (1 << params.e_interval_bits):
            return e


def sign(sk, pk, m):
    _check_message(pk, m)
    params = pk.cl_params
    e = _random_e(params)
    s = secrets.randbits(params.s_bits)
    base = powmod(pk.a, m, pk.n) * powmod(pk.b, s, pk.n) % pk.n * pk.c % pk.n
    v = powmod(base, invert(e, sk.group_order), pk.n)
    return CLSignature(e, s, v)


def verify(pk, m, sig):
    if not 0 <= m < (1 << pk.message_bits):
        return False
    params = pk.cl_params
    offset = params.e_offset
    if not (offset <= sig.e < offset + (1 << params.e_interval_bits)) or sig.e % 2 == 0:
        return False
    # s' = s + w·e de una firma aleatorizada sigue por debajo de este tope
    if not (0 <= sig.s < (1 << params.s_randomizer_bits) and 0 < sig.v < pk.n):
        return False
    if not is_prime(sig.e):
        return False
    lhs = powmod(sig.v, sig.e, pk.n)
    rhs = powmod(pk.a, m, pk.n) * powmod(pk.b, sig.s, pk.n) % pk.n * pk.c % pk.n
    return lhs == rhs


# ====================
# Prueba de conocimiento de firma
# ====================

@dataclass(frozen=True)
class SigPoK:
    blinded_v: int
    rsa_announcement: int
    ped_announcement: int
    challenge: int
    e_response: int
    m_response: int
    s_response: int
    r_response: int

    def fields(self):
        return (self.blinded_v, self.rsa_announcement, self.ped_announcement, self.challenge,
                self.e_response, self.m_response, self.s_response, self.r_response)

    def write_to(self, writer):
        for value in self.fields():
            writer.write_int(value)

    @classmethod
    def read_from(cls, reader):
        return cls(*(reader.read_int() for _ in range(8)))

    def encode(self):
        writer = WireWriter(KIND_SIG_POK)
        self.write_to(writer)
        return writer.getvalue()

    @classmethod
    def decode(cls, data):
        reader = WireReader(data, KIND_SIG_POK)
        pok = cls.read_from(reader)
        reader.expect_end()
        return pok


def _pok_base(pk, blinded_v):
    """Z = c · v'^(-2^(ℓ_e-1)) mod n."""
    params = pk.cl_params
    return pk.c * powmod(blinded_v, -params.e_offset, pk.n) % pk.n


def _pok_challenge(pk, cparams, C_m, blinded_v, t_n, t_p, context):
    return (Transcript(cparams.label + b'/cl-pok', context)
            .append_bytes(b'pk', pk.fingerprint())
            .append_int(b'C_m', C_m.value)
            .append_int(b'v', blinded_v)
            .append_int(b'T_n', t_n)
            .append_int(b'T_p', t_p)
            .challenge_bits(pk.cl_params.challenge_bits))


class SigPoKProver:
    """
    Prover interactivo: announce() fija los aleatorizadores, respond(ch)
    produce las respuestas. Responder a dos desafíos con el mismo anuncio es
    exactamente lo que hace el extractor por rebobinado.
    """

    def __init__(self, pk, m, sig, cparams, C_m, r_m):
        if not verify(pk, m, sig):
            raise SignatureError("La firma no es válida para el mensaje")
        if C_m.value != (powmod(cparams.g, m % cparams.q, cparams.p)
                         * powmod(cparams.h, r_m, cparams.p) % cparams.p):
            raise SignatureError("C_m no compromete el mensaje firmado")
        self.pk = pk
        self.cparams = cparams
        self.C_m = C_m
        params = pk.cl_params
        w = secrets.randbits(params.blind_bits)
        self.blinded_v = sig.v * powmod(pk.b, w, pk.n) % pk.n
        self._e_prime = sig.e - params.e_offset
        self._m = m
        self._s_prime = sig.s + w * sig.e
        self._r = r_m
        self._e_tilde = secrets.randbits(params.e_response_bits - 1)
        self._m_tilde = secrets.randbits(params.m_response_bits - 1)
        self._s_tilde = secrets.randbits(params.s_randomizer_bits)
        self._r_tilde = secrets.randbelow(cparams.q)
        self.rsa_announcement = (powmod(self.blinded_v, self._e_tilde, pk.n)
                                 * powmod(pk.a, -self._m_tilde, pk.n) % pk.n
                                 * powmod(pk.b, -self._s_tilde, pk.n) % pk.n)
        self.ped_announcement = (powmod(cparams.g, self._m_tilde, cparams.p)
                                 * powmod(cparams.h, self._r_tilde, cparams.p) % cparams.p)

    def announce(self):
        return self.blinded_v, self.rsa_announcement, self.ped_announcement

    def fiat_shamir_challenge(self, context=b''):
        return _pok_challenge(self.pk, self.cparams, self.C_m, self.blinded_v,
                              self.rsa_announcement, self.ped_announcement, context)

    def respond(self, challenge):
        return SigPoK(
            self.blinded_v, self.rsa_announcement, self.ped_announcement, challenge,
            self._e_tilde + challenge * self._e_prime,
            self._m_tilde + challenge * self._m,
            self._s_tilde + challenge * self._s_prime,
            (self._r_tilde + challenge * self._r) % self.cparams.q,
        )


def prove_sig_knowledge(pk, m, sig, cparams, C_m, r_m, context=b''):
    """SigPoK no interactiva (Fiat-Shamir) ligada a (pk, C_m, context)."""
    prover = SigPoKProver(pk, m, sig, cparams, C_m, r_m)
    return prover.respond(prover.fiat_shamir_challenge(context))


def verify_sig_knowledge(pk, cparams, C_m, pok, context=b'', interactive=False):
    params = pk.cl_params
    if not (0 < pok.blinded_v < pk.n and _gcd(pok.blinded_v, pk.n) == 1):
        return False
    if not (0 < pok.rsa_announcement < pk.n and cparams.contains(pok.ped_announcement)):
        return False
    if not cparams.contains(C_m.value):
        return False
    if not 0 <= pok.challenge < (1 << params.challenge_bits):
        return False
    if not (0 <= pok.e_response < (1 << params.e_response_bits)
            and 0 <= pok.m_response < (1 << params.m_response_bits)
            and 0 <= pok.s_response < (1 << (params.s_randomizer_bits + 1))
            and 0 <= pok.r_response < cparams.q):
        return False
    if not interactive:
        expected = _pok_challenge(pk, cparams, C_m, pok.blinded_v, pok.rsa_announcement,
                                  pok.ped_announcement, context)
        if pok.challenge != expected:
            return False
    lhs_n = (powmod(pok.blinded_v, pok.e_response, pk.n)
             * powmod(pk.a, -pok.m_response, pk.n) % pk.n
             * powmod(pk.b, -pok.s_response, pk.n) % pk.n)
    rhs_n = pok.rsa_announcement * powmod(_pok_base(pk, pok.blinded_v), pok.challenge, pk.n) % pk.n
    if lhs_n != rhs_n:
        return False
    lhs_p = powmod(cparams.g, pok.m_response, cparams.p) * powmod(cparams.h, pok.r_response, cparams.p) % cparams.p
    rhs_p = pok.ped_announcement * powmod(C_m.value, pok.challenge, cparams.p) % cparams.p
    return lhs_p == rhs_p


def extract_signature(pk, first, second):
    """
    Extractor por rebobinado: de dos transcripts aceptados con el mismo anuncio
    y desafíos distintos recupera (m, firma válida sobre m).
    """
    if (first.blinded_v, first.rsa_announcement, first.ped_announcement) != \
            (second.blinded_v, second.rsa_announcement, second.ped_announcement):
        raise SignatureError("Los transcripts no comparten anuncio")
    delta = first.challenge - second.challenge
    if delta == 0:
        raise SignatureError("Los desafíos deben ser distintos")
    diffs = (first.e_response - second.e_response,
             first.m_response - second.m_response,
             first.s_response - second.s_response)
    if any(d % delta for d in diffs):
        raise SignatureError("Las respuestas no son divisibles por la diferencia de desafíos")
    e_prime, m, s_prime = (d // delta for d in diffs)
    signature = CLSignature(e_prime + pk.cl_params.e_offset, s_prime, first.blinded_v)
    return m, signature


def simulate_sig_knowledge(pk, cparams, C_m, challenge):
    """Simulador HVZK: v' aleatorio en QR_n y respuestas aleatorias en sus rangos."""
    params = pk.cl_params
    blinded_v = _random_qr(pk.n)
    e_response = secrets.randbits(params.e_response_bits - 1)
    m_response = secrets.randbits(params.m_response_bits - 1)
    s_response = secrets.randbits(params.s_randomizer_bits)
    r_response = secrets.randbelow(cparams.q)
    rsa_announcement = (powmod(blinded_v, e_response, pk.n)
                        * powmod(pk.a, -m_response, pk.n) % pk.n
                        * powmod(pk.b, -s_response, pk.n) % pk.n
                        * powmod(_pok_base(pk, blinded_v), -challenge, pk.n) % pk.n)
    ped_announcement = (powmod(cparams.g, m_response, cparams.p)
                        * powmod(cparams.h, r_response, cparams.p) % cparams.p
                        * powmod(C_m.value, -challenge, cparams.p) % cparams.p)
    return SigPoK(blinded_v, rsa_announcement, ped_announcement, challenge,
                  e_response, m_response, s_response, r_response)
