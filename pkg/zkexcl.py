"""
Pruebas de exclusión en conocimiento cero.

Dado un SCT y dos entradas adyacentes x, z del log con T_x < T_y < T_z, el
prover convence al verifier de que el SCT no está en el log sin revelar
ningún timestamp, índice ni hash:

1. Envía compromisos a T_x, H(x), I_x, H(y), T_y, T_z, H(z), I_z, un
   compromiso C_1 a 1 con su aleatoriedad, y una etiqueta de enlace.
2. El verifier calcula C_{I_x+H(x)}, C_{T_x+H(x)}, C_{T_y+H(y)},
   C_{I_z+H(z)} y C_{T_z+H(z)} por homomorfismo.
3. Siete SigPoK prueban que esos valores están firmados por el log (el v'
   aleatorizado de cada SigPoK hace de compromiso a la firma).
4. El verifier calcula C_{I_x+1}, C_{T_z-T_y} y C_{T_y-T_x}.
5. Una prueba de igualdad (I_x + 1 = I_z) y dos de rango (diferencias en
   [1, 2^64)) cierran la prueba.

Variantes:
- 'pi':          el log firma sumas v + H
- 'pi-prime':    el log firma concatenaciones v·2^W + H; el paso 2 usa
                 C_v^(2^W) · C_H
- 'actionable':  como 'pi' pero revela H(y) (compromiso con r = 0) para que
                 los navegadores puedan bloquear el SCT
"""
import bisect
import logging
import time
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Tuple

import clsig
import ctlog
from commitments import (HASH_WIDTH, RANGE_WIDTH, Commitment, EqProof, Opening, RangeProof, combine,
                         combine_openings, commit, commit_fresh, prove_equal, prove_nonneg_range,
                         random_scalar, simulate_equal, simulate_range, verify_equal,
                         verify_nonneg_range, verify_opening)
from errors import ProofError, WireFormatError
from numtheory import powmod, random_below
from transcript import Transcript
from wire import (KIND_ACTIONABLE_PROOF, KIND_EXCLUSION_PROOF, KIND_EXCLUSION_PROOF_V2,
                  SECTION_BINDING, SECTION_COMMITMENTS, SECTION_EQ, SECTION_POKS, SECTION_RANGES,
                  WireReader, WireWriter, section_sizes)

logger = logging.getLogger(__name__)

VARIANTS = {
    'pi': (KIND_EXCLUSION_PROOF, 'sum'),
    'pi-prime': (KIND_EXCLUSION_PROOF_V2, 'concat'),
    'actionable': (KIND_ACTIONABLE_PROOF, 'sum'),
}

VALUE_NAMES = ('t_x', 'h_x', 'i_x', 'h_y', 't_y', 't_z', 'h_z', 'i_z')
POK_COUNT = 7
SECTION_NAMES = {
    SECTION_COMMITMENTS: 'commitments',
    SECTION_POKS: 'poks',
    SECTION_EQ: 'eq',
    SECTION_RANGES: 'ranges',
    SECTION_BINDING: 'binding',
}


class VerifyReason(str, Enum):
    OPENING = 'opening'
    DERIVE = 'derive'
    POK_1 = 'pok-1'
    POK_2 = 'pok-2'
    POK_3 = 'pok-3'
    POK_4 = 'pok-4'
    POK_5 = 'pok-5'
    POK_6 = 'pok-6'
    POK_7 = 'pok-7'
    EQ = 'eq'
    RANGE_1 = 'range-1'
    RANGE_2 = 'range-2'
    MALFORMED = 'malformed'
    MMD = 'mmd'

    @classmethod
    def pok(cls, k):
        return cls(f'pok-{k}')


# ====================
# Tipos
# ====================

@dataclass(frozen=True)
class ValueCommitments:
    t_x: Commitment
    h_x: Commitment
    i_x: Commitment
    h_y: Optional[Commitment]
    t_y: Commitment
    t_z: Commitment
    h_z: Commitment
    i_z: Commitment

    def transported(self):
        """Compromisos que viajan en la prueba (sin h_y si está revelado)."""
        return [getattr(self, name) for name in VALUE_NAMES if getattr(self, name) is not None]


@dataclass(frozen=True)
class ExclusionProof:
    variant: str
    values: ValueCommitments
    one: Commitment
    one_randomness: int
    poks: Tuple[clsig.SigPoK, ...]
    eq: EqProof
    ranges: Tuple[RangeProof, RangeProof]
    binding: bytes
    revealed_hash: Optional[int] = None

    @property
    def mode(self):
        return VARIANTS[self.variant][1]

    def encode(self):
        kind = VARIANTS[self.variant][0]
        writer = WireWriter(kind)
        writer.begin_section(SECTION_COMMITMENTS)
        writer.write_ints([c.value for c in self.values.transported()])
        writer.write_int(self.one.value).write_int(self.one_randomness)
        if self.variant == 'actionable':
            writer.write_int(self.revealed_hash)
        writer.end_section()
        writer.begin_section(SECTION_POKS).write_u16(len(self.poks))
        for pok in self.poks:
            pok.write_to(writer)
        writer.end_section()
        writer.begin_section(SECTION_EQ)
        self.eq.write_to(writer)
        writer.end_section()
        writer.begin_section(SECTION_RANGES)
        for proof in self.ranges:
            proof.write_to(writer)
        writer.end_section()
        writer.begin_section(SECTION_BINDING).write_bytes(self.binding).end_section()
        return writer.getvalue()

    @classmethod
    def decode(cls, data, variant='pi'):
        if variant not in VARIANTS:
            raise WireFormatError(f"Variante desconocida: {variant}")
        reader = WireReader(data, VARIANTS[variant][0])
        section = reader.read_section(SECTION_COMMITMENTS)
        raw = section.read_ints()
        expected = len(VALUE_NAMES) - (1 if variant == 'actionable' else 0)
        if len(raw) != expected:
            raise WireFormatError(f"Se esperaban {expected} compromisos, hay {len(raw)}")
        names = [n for n in VALUE_NAMES if not (variant == 'actionable' and n == 'h_y')]
        mapping = {name: Commitment(value) for name, value in zip(names, raw)}
        mapping.setdefault('h_y', None)
        one = Commitment(section.read_int())
        one_randomness = section.read_int()
        revealed = section.read_int() if variant == 'actionable' else None
        section.expect_end()

        section = reader.read_section(SECTION_POKS)
        count = section.read_u16()
        if count != POK_COUNT:
            raise WireFormatError(f"Se esperaban {POK_COUNT} SigPoK, hay {count}")
        poks = tuple(clsig.SigPoK.read_from(section) for _ in range(count))
        section.expect_end()

        section = reader.read_section(SECTION_EQ)
        eq = EqProof.read_from(section)
        section.expect_end()

        section = reader.read_section(SECTION_RANGES)
        ranges = (RangeProof.read_from(section), RangeProof.read_from(section))
        section.expect_end()

        section = reader.read_section(SECTION_BINDING)
        binding = section.read_bytes()
        section.expect_end()
        reader.expect_end()
        return cls(variant, ValueCommitments(**mapping), one, one_randomness, poks, eq, ranges,
                   binding, revealed)


@dataclass(frozen=True)
class ProverWitness:
    """
    SCT y y las entradas adyacentes x, z con sus firmas. sth y mmd_ms son
    opcionales: si se dan, se exige que el MMD del SCT haya vencido.
    """
    sct: ctlog.SctBundle
    x: Tuple[ctlog.LogEntry, ctlog.EntrySignatures]
    z: Tuple[ctlog.LogEntry, ctlog.EntrySignatures]
    sth: Optional[ctlog.SignedTreeHead] = None
    mmd_ms: Optional[int] = None


# ====================
# Paso 2 y paso 4: compromisos derivados
# ====================

def _derive(params, mode, value_c, hash_c, width):
    if mode == 'sum':
        return combine(params, [(value_c, 1), (hash_c, 1)])
    return combine(params, [(value_c, 1 << width), (hash_c, 1)])


def _derive_opening(params, mode, value_o, hash_o, width):
    coeff = 1 if mode == 'sum' else 1 << width
    return combine_openings(params, [(value_o, coeff), (hash_o, 1)])


def binding_tag(params, pubkeys, variant, values, one, one_randomness, revealed_hash):
    t = Transcript(params.label + b'/exclusion', variant.encode('ascii'))
    for key in (pubkeys.hash_key, pubkeys.timestamp_key, pubkeys.index_key):
        t.append_bytes(b'pk', key.fingerprint())
    t.append_bytes(b'k_S', pubkeys.sct_key)
    t.append_ints(b'C', [c.value for c in values.transported()])
    t.append_int(b'C_1', one.value).append_int(b'r_1', one_randomness)
    if revealed_hash is not None:
        t.append_int(b'H_y', revealed_hash)
    return t.challenge_bits(256).to_bytes(32, 'big')


def signature_statements(params, pubkeys, values, mode, width):
    """Las 7 afirmaciones (clave, compromiso al mensaje firmado) en orden."""
    c_ix_hx = _derive(params, mode, values.i_x, values.h_x, width)
    c_tx_hx = _derive(params, mode, values.t_x, values.h_x, width)
    c_ty_hy = _derive(params, mode, values.t_y, values.h_y, width)
    c_iz_hz = _derive(params, mode, values.i_z, values.h_z, width)
    c_tz_hz = _derive(params, mode, values.t_z, values.h_z, width)
    return (
        (pubkeys.index_key, c_ix_hx),
        (pubkeys.hash_key, values.h_x),
        (pubkeys.timestamp_key, c_tx_hx),
        (pubkeys.timestamp_key, c_ty_hy),
        (pubkeys.index_key, c_iz_hz),
        (pubkeys.hash_key, values.h_z),
        (pubkeys.timestamp_key, c_tz_hz),
    )


def difference_commitments(params, values, one):
    ix_plus_one = combine(params, [(values.i_x, 1), (one, 1)])
    p1 = combine(params, [(values.t_z, 1), (values.t_y, -1)])
    p2 = combine(params, [(values.t_y, 1), (values.t_x, -1)])
    return ix_plus_one, p1, p2


def subproof_context(binding, label):
    return binding + label.encode('ascii')


def witness_values(witness, width=HASH_WIDTH):
    """Los ocho valores en claro que el prover compromete, por nombre."""
    (entry_x, _), (entry_z, _) = witness.x, witness.z
    return {
        't_x': entry_x.timestamp, 'h_x': entry_x.hash_scalar(width), 'i_x': entry_x.index,
        'h_y': witness.sct.hash_scalar(width), 't_y': witness.sct.timestamp,
        't_z': entry_z.timestamp, 'h_z': entry_z.hash_scalar(width), 'i_z': entry_z.index,
    }


def commit_values(params, variant, plain):
    """Compromete cada valor con aleatoriedad nueva (H(y) con r = 0 si se revela)."""
    commitments, openings = {}, {}
    for name in VALUE_NAMES:
        if name == 'h_y' and variant == 'actionable':
            commitments[name], openings[name] = commit(params, plain[name], 0), Opening(plain[name], 0)
        else:
            commitments[name], openings[name] = commit_fresh(params, plain[name])
    return commitments, openings


def transported_values(commitments, variant):
    mapping = dict(commitments)
    if variant == 'actionable':
        mapping['h_y'] = None
    return ValueCommitments(**mapping)


def signed_messages(witness, mode, width=HASH_WIDTH):
    """Los 7 pares (mensaje firmado, firma) en el orden de signature_statements()."""
    (entry_x, sigs_x), (entry_z, sigs_z) = witness.x, witness.z
    sct = witness.sct
    h_x, h_y, h_z = entry_x.hash_scalar(width), sct.hash_scalar(width), entry_z.hash_scalar(width)
    return (
        (ctlog.signed_value(mode, entry_x.index, h_x, width), sigs_x.sigma_i),
        (h_x, sigs_x.sigma_h),
        (ctlog.signed_value(mode, entry_x.timestamp, h_x, width), sigs_x.sigma_t),
        (ctlog.signed_value(mode, sct.timestamp, h_y, width), sct.sigma_th),
        (ctlog.signed_value(mode, entry_z.index, h_z, width), sigs_z.sigma_i),
        (h_z, sigs_z.sigma_h),
        (ctlog.signed_value(mode, entry_z.timestamp, h_z, width), sigs_z.sigma_t),
    )


def statement_openings(params, mode, openings, width=HASH_WIDTH):
    """Aperturas de los 7 compromisos de signature_statements()."""
    return (
        _derive_opening(params, mode, openings['i_x'], openings['h_x'], width),
        openings['h_x'],
        _derive_opening(params, mode, openings['t_x'], openings['h_x'], width),
        _derive_opening(params, mode, openings['t_y'], openings['h_y'], width),
        _derive_opening(params, mode, openings['i_z'], openings['h_z'], width),
        openings['h_z'],
        _derive_opening(params, mode, openings['t_z'], openings['h_z'], width),
    )


def difference_openings(params, openings, one_opening):
    return (
        combine_openings(params, [(openings['i_x'], 1), (one_opening, 1)]),
        combine_openings(params, [(openings['t_z'], 1), (openings['t_y'], -1)]),
        combine_openings(params, [(openings['t_y'], 1), (openings['t_x'], -1)]),
    )


# ====================
# Prover
# ====================

def check_witness(pubkeys, witness, mode='sum', width=HASH_WIDTH):
    """Lanza ProofError si el testigo no cumple las precondiciones del prover."""
    (entry_x, sigs_x), (entry_z, sigs_z) = witness.x, witness.z
    sct = witness.sct
    if entry_z.index != entry_x.index + 1:
        raise ProofError(f"Las entradas {entry_x.index} y {entry_z.index} no son adyacentes")
    if not entry_x.timestamp < sct.timestamp:
        raise ProofError("T_y no es posterior a T_x (p_2 ≤ 0)")
    if not sct.timestamp < entry_z.timestamp:
        raise ProofError("T_y no es anterior a T_z (p_1 ≤ 0)")
    for entry, sigs in (witness.x, witness.z):
        failures = ctlog.entry_signature_failures(pubkeys, entry, sigs, mode, width)
        if failures:
            raise ProofError(f"Firmas inválidas en la entrada {entry.index}: {', '.join(failures)}")
    if not ctlog.verify_sct(pubkeys, sct, mode, width):
        raise ProofError("El SCT no verifica bajo las claves del log")
    if witness.sth is not None and witness.mmd_ms is not None:
        if not witness.sth.verify(pubkeys):
            raise ProofError("El STH no está firmado por el log")
        if witness.sth.timestamp < sct.timestamp + witness.mmd_ms:
            raise ProofError("El MMD del SCT aún no ha vencido respecto al último STH")


def build_exclusion_proof(params, pubkeys, witness, variant='pi', width=HASH_WIDTH,
                          timings: Optional[Dict[str, float]] = None):
    """
    Construye la prueba de exclusión del SCT del testigo.

    Args:
        params: CommitParams del grupo de Pedersen
        pubkeys: LogPublicKeys del log
        witness: ProverWitness
        variant: 'pi', 'pi-prime' o 'actionable'
        timings: si se pasa un dict, se acumulan los ms de cada etapa

    Returns:
        ExclusionProof

    Raises:
        ProofError: si el testigo no cumple las precondiciones
    """
    if variant not in VARIANTS:
        raise ProofError(f"Variante desconocida: {variant}")
    mode = VARIANTS[variant][1]
    check_witness(pubkeys, witness, mode, width)
    started = time.perf_counter()
    timer = _Timer(timings)

    plain = witness_values(witness, width)
    commitments, openings = commit_values(params, variant, plain)
    one, one_opening = commit_fresh(params, 1)
    revealed = plain['h_y'] if variant == 'actionable' else None
    values = transported_values(commitments, variant)
    binding = binding_tag(params, pubkeys, variant, values, one, one_opening.r, revealed)
    timer.mark('commitments')

    full = ValueCommitments(**commitments)
    statements = signature_statements(params, pubkeys, full, mode, width)
    poks = tuple(
        clsig.prove_sig_knowledge(pk, m, sig, params, C, opening.r, subproof_context(binding, f'pok-{k}'))
        for k, ((pk, C), (m, sig), opening) in enumerate(
            zip(statements, signed_messages(witness, mode, width),
                statement_openings(params, mode, openings, width)), start=1)
    )
    timer.mark('poks')

    ix_plus_one, p1, p2 = difference_commitments(params, full, one)
    ix_plus_one_opening, p1_opening, p2_opening = difference_openings(params, openings, one_opening)
    eq = prove_equal(params, ix_plus_one, ix_plus_one_opening, full.i_z, openings['i_z'],
                     subproof_context(binding, 'eq'))
    timer.mark('eq')
    ranges = (
        prove_nonneg_range(params, p1, p1_opening, RANGE_WIDTH, subproof_context(binding, 'range-1')),
        prove_nonneg_range(params, p2, p2_opening, RANGE_WIDTH, subproof_context(binding, 'range-2')),
    )
    timer.mark('ranges')
    proof = ExclusionProof(variant, values, one, one_opening.r, poks, eq, ranges, binding, revealed)
    logger.info(f"✅ Prueba de exclusión '{variant}' construida en "
                f"{(time.perf_counter() - started) * 1000:.1f} ms")
    return proof


def build_exclusion_proof_v2(params, pubkeys, witness, width=HASH_WIDTH):
    """Variante Π′: el log firma concatenaciones."""
    return build_exclusion_proof(params, pubkeys, witness, 'pi-prime', width)


def build_actionable_proof(params, pubkeys, witness, width=HASH_WIDTH):
    return build_exclusion_proof(params, pubkeys, witness, 'actionable', width)


# ====================
# Verifier
# ====================

class _Timer:
    def __init__(self, timings):
        self.timings = timings
        self._last = time.perf_counter()

    def mark(self, stage):
        now = time.perf_counter()
        if self.timings is not None:
            self.timings[stage] = self.timings.get(stage, 0.0) + (now - self._last) * 1000
        self._last = now


def _reject(variant, reason):
    logger.warning(f"❌ Prueba '{variant}' rechazada: {reason.value}")
    return False, reason


def verify_exclusion_proof(params, pubkeys, proof, interactive=False, width=HASH_WIDTH,
                           timings: Optional[Dict[str, float]] = None):
    """
    Verifica una prueba en el orden del protocolo y aborta en el primer fallo.

    Args:
        interactive: solo comprueba el álgebra de cada subprueba para los
                     desafíos guardados (transcripts simulados)
        timings: si se pasa un dict, se acumulan los ms de cada etapa

    Returns:
        tuple: (aceptada, VerifyReason o None)
    """
    timer = _Timer(timings)
    variant = proof.variant
    if variant not in VARIANTS:
        return _reject(variant, VerifyReason.MALFORMED)
    mode = VARIANTS[variant][1]

    values = proof.values
    if variant == 'actionable':
        if proof.revealed_hash is None or not 0 <= proof.revealed_hash < (1 << width):
            return _reject(variant, VerifyReason.MALFORMED)
        values = ValueCommitments(**{name: getattr(values, name) for name in VALUE_NAMES
                                     if name != 'h_y'},
                                  h_y=Commitment(powmod(params.g, proof.revealed_hash, params.p)))
    if any(c is None or not params.contains(c.value) for c in (getattr(values, n) for n in VALUE_NAMES)):
        return _reject(variant, VerifyReason.MALFORMED)
    if len(proof.poks) != POK_COUNT:
        return _reject(variant, VerifyReason.MALFORMED)

    # 1. C_1 abre a 1
    if not (params.contains(proof.one.value)
            and verify_opening(params, proof.one, 1, proof.one_randomness)):
        return _reject(variant, VerifyReason.OPENING)
    timer.mark('opening')

    # 2. etiqueta de enlace y compromisos derivados
    expected = binding_tag(params, pubkeys, variant, proof.values, proof.one, proof.one_randomness,
                            proof.revealed_hash)
    if expected != proof.binding:
        return _reject(variant, VerifyReason.DERIVE)
    statements = signature_statements(params, pubkeys, values, mode, width)
    timer.mark('derive')

    # 3. siete SigPoK
    for k, ((pk, C), pok) in enumerate(zip(statements, proof.poks), start=1):
        if not clsig.verify_sig_knowledge(pk, params, C, pok, subproof_context(proof.binding, f'pok-{k}'), interactive):
            timer.mark('poks')
            return _reject(variant, VerifyReason.pok(k))
    timer.mark('poks')

    # 4. y 5. igualdad de índices y rangos de las diferencias de timestamps
    ix_plus_one, p1, p2 = difference_commitments(params, values, proof.one)
    if not verify_equal(params, ix_plus_one, values.i_z, proof.eq, subproof_context(proof.binding, 'eq'), interactive):
        return _reject(variant, VerifyReason.EQ)
    timer.mark('eq')
    for label, reason, C, range_proof in (('range-1', VerifyReason.RANGE_1, p1, proof.ranges[0]),
                                          ('range-2', VerifyReason.RANGE_2, p2, proof.ranges[1])):
        if not verify_nonneg_range(params, C, RANGE_WIDTH, range_proof, subproof_context(proof.binding, label),
                                   interactive):
            timer.mark('ranges')
            return _reject(variant, reason)
    timer.mark('ranges')
    logger.info(f"✅ Prueba de exclusión '{variant}' aceptada")
    return True, None


def verify_exclusion_proof_v2(params, pubkeys, proof, interactive=False, width=HASH_WIDTH):
    if proof.variant != 'pi-prime':
        return _reject(proof.variant, VerifyReason.MALFORMED)
    return verify_exclusion_proof(params, pubkeys, proof, interactive, width)


def verify_actionable_proof(params, pubkeys, proof, interactive=False, width=HASH_WIDTH):
    """
    Returns:
        tuple: (aceptada, VerifyReason o None, H(y) revelado o None)
    """
    if proof.variant != 'actionable':
        accepted, reason = _reject(proof.variant, VerifyReason.MALFORMED)
        return accepted, reason, None
    accepted, reason = verify_exclusion_proof(params, pubkeys, proof, interactive, width)
    return accepted, reason, (proof.revealed_hash if accepted else None)


def variant_of(data):
    """Variante de una prueba serializada según su byte de tipo."""
    if len(data) < 2:
        raise WireFormatError("Prueba vacía")
    for variant, (kind, _) in VARIANTS.items():
        if data[1] == kind:
            return variant
    raise WireFormatError(f"Tipo de prueba desconocido: 0x{data[1]:02x}")


def verify_proof_bytes(params, pubkeys, data, variant='pi', width=HASH_WIDTH):
    """Decodifica y verifica; una serialización inválida es un rechazo 'malformed'."""
    try:
        proof = ExclusionProof.decode(data, variant)
    except WireFormatError as exc:
        logger.warning(f"Prueba mal formada: {exc}")
        return False, VerifyReason.MALFORMED
    return verify_exclusion_proof(params, pubkeys, proof, width=width)


def match_sct_hash(h_revealed, sct_bundle, width=HASH_WIDTH):
    """¿Es este SCT el que reveló una prueba accionable?"""
    return sct_bundle.hash_scalar(width) == h_revealed


# ====================
# Simulador, testigos y tamaños
# ====================

def simulate_exclusion_proof(params, pubkeys, variant='pi', width=HASH_WIDTH):
    """
    Simulador HVZK compuesto: sin testigo alguno produce una prueba que
    verifica en modo interactivo (desafíos elegidos por el simulador).
    """
    if variant not in VARIANTS:
        raise ProofError(f"Variante desconocida: {variant}")
    mode = VARIANTS[variant][1]

    def random_element():
        return Commitment(powmod(params.h, random_scalar(params), params.p))

    revealed = random_below(1 << width) if variant == 'actionable' else None
    mapping = {name: random_element() for name in VALUE_NAMES}
    if variant == 'actionable':
        mapping['h_y'] = None
    values = ValueCommitments(**mapping)
    one, one_opening = commit_fresh(params, 1)
    binding = binding_tag(params, pubkeys, variant, values, one, one_opening.r, revealed)

    full = values
    if variant == 'actionable':
        full = ValueCommitments(**{**mapping, 'h_y': Commitment(powmod(params.g, revealed, params.p))})
    statements = signature_statements(params, pubkeys, full, mode, width)
    poks = tuple(
        clsig.simulate_sig_knowledge(pk, params, C, random_below(1 << pk.cl_params.challenge_bits))
        for pk, C in statements
    )
    ix_plus_one, p1, p2 = difference_commitments(params, full, one)
    eq = simulate_equal(params, ix_plus_one, full.i_z, random_scalar(params))
    ranges = tuple(
        simulate_range(params, C, RANGE_WIDTH, [random_scalar(params) for _ in range(RANGE_WIDTH + 1)])
        for C in (p1, p2)
    )
    return ExclusionProof(variant, values, one, one_opening.r, poks, eq, ranges, binding, revealed)


def find_witness(entries, sct, sth=None, mmd_ms=None):
    """
    Busca el par adyacente (x, z) con T_x < T_y < T_z.

    Args:
        entries: lista de (LogEntry, EntrySignatures) ordenada por índice

    Returns:
        ProverWitness o None si no existe (SCT incluido, fuera de rango o con
        un timestamp igual al de una entrada)
    """
    timestamps = [entry.timestamp for entry, _ in entries]
    pos = bisect.bisect_left(timestamps, sct.timestamp)
    if pos == 0 or pos == len(entries):
        return None
    if timestamps[pos] == sct.timestamp:
        return None
    x, z = entries[pos - 1], entries[pos]
    if z[0].index != x[0].index + 1:
        return None
    return ProverWitness(sct, x, z, sth, mmd_ms)


def proof_size_report(proof):
    """Bytes por sección de la prueba serializada, más el total."""
    data = proof.encode()
    sizes = section_sizes(data, VARIANTS[proof.variant][0])
    report = {SECTION_NAMES[tag]: size for tag, size in sizes.items()}
    report['total'] = len(data)
    return report
