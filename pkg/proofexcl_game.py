"""
Juego de solidez de las pruebas de exclusión.

Fase 1: el adversario envía λ mensajes (m, t) al log con t estrictamente
creciente y dentro de un rango polinómico en λ, y tras cada ronda lee las
entradas nuevas.

Fase 2: el adversario actúa de prover frente a un verifier honesto; el juego
devuelve b = 1 si el verifier acepta.

Estrategias:
    honest-excluded      el operador descarta una entrada tras emitir su SCT;
                         la exclusión es real y la prueba debe aceptarse
    index-hash-mix       z lleva las firmas de índice y de timestamp de la
                         entrada siguiente a x y la firma de hash de una
                         entrada posterior: I_x + 1 = I_z cuadra, σ_H no
    non-adjacent         x y z honestos pero con una entrada en medio
    reversed-timestamps  SCT posterior a z (T_z - T_y negativo)
    replayed-sct         reutiliza el SCT de la propia entrada x (T_y = T_x)
    forged-signature     SCT fabricado con una firma CL aleatoria
"""
import logging
import random
import secrets
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import clsig
import zkexcl
from commitments import (HASH_WIDTH, RANGE_WIDTH, commit_fresh, prove_equal, prove_nonneg_range,
                         random_scalar, setup_params, simulate_equal, simulate_range)
from ctlog import EntrySignatures, Log, LogConfig, LogKeys, SctBundle
from errors import ParameterError
from numtheory import random_below

logger = logging.getLogger(__name__)

STRATEGIES = (
    'honest-excluded',
    'index-hash-mix',
    'non-adjacent',
    'reversed-timestamps',
    'replayed-sct',
    'forged-signature',
)
GENUINE_EXCLUSIONS = ('honest-excluded',)
MIN_ROUNDS = 4
GAME_LABEL = b'ctzk-proofexcl-game'


@dataclass(frozen=True)
class GameSetup:
    params: object
    keys: LogKeys

    @classmethod
    def toy(cls):
        """Grupo de 512/256 bits y claves CL de 512 bits: solo para tests."""
        return cls(setup_params((512, 256), GAME_LABEL), LogKeys.generate(clsig.TOY_MODULUS_BITS, toy=True))


@dataclass
class GameTranscript:
    strategy: str
    security_parameter: int
    submissions: List[Tuple[bytes, int]] = field(default_factory=list)
    dropped_timestamp: Optional[int] = None
    bit: int = 0
    reason: Optional[zkexcl.VerifyReason] = None

    @property
    def timestamp_range(self):
        stamps = [t for _, t in self.submissions]
        return max(stamps) - min(stamps) if stamps else 0


def _phase_one(log, transcript, rng, drop_round):
    """λ rondas de envíos; devuelve los SCTs emitidos en orden."""
    lam = transcript.security_parameter
    t = 1000
    bundles = []
    for round_no in range(transcript.security_parameter):
        t += rng.randint(2, 4 * lam)
        data = f"cert-{round_no}-{rng.getrandbits(32):08x}".encode()
        drop = round_no == drop_round
        bundle, _, _ = log.submit(data, t, drop=drop)
        transcript.submissions.append((data, t))
        if drop:
            transcript.dropped_timestamp = t
        bundles.append(bundle)
    return bundles


def _forged_sct(pubkeys, data, timestamp, frontend_id=0):
    """SCT con firmas inventadas: el adversario no tiene las claves del log."""
    params = pubkeys.timestamp_key.cl_params
    fake = clsig.CLSignature(params.e_offset + 2 * secrets.randbits(params.e_interval_bits - 2) + 1,
                             secrets.randbits(params.s_bits),
                             random_below(pubkeys.timestamp_key.n))
    return SctBundle(data, timestamp, frontend_id, fake, fake, secrets.token_bytes(64))


def adversarial_proof(params, pubkeys, witness, overrides=None, width=HASH_WIDTH):
    """
    Prover que no comprueba precondiciones: compromete los valores del
    testigo (con los cambios de `overrides`) y produce cada subprueba
    honestamente cuando puede; cuando no, da la mejor falsificación a su
    alcance (prueba sobre un compromiso propio o transcript simulado con un
    desafío que no sale del hash).
    """
    plain = zkexcl.witness_values(witness, width)
    plain.update(overrides or {})
    commitments, openings = zkexcl.commit_values(params, 'pi', plain)
    one, one_opening = commit_fresh(params, 1)
    values = zkexcl.transported_values(commitments, 'pi')
    binding = zkexcl.binding_tag(params, pubkeys, 'pi', values, one, one_opening.r, None)

    statements = zkexcl.signature_statements(params, pubkeys, values, 'sum', width)
    poks = []
    for k, ((pk, C), (m, sig), opening) in enumerate(
            zip(statements, zkexcl.signed_messages(witness, 'sum', width),
                zkexcl.statement_openings(params, 'sum', openings, width)), start=1):
        context = zkexcl.subproof_context(binding, f'pok-{k}')
        if not clsig.verify(pk, m, sig):
            poks.append(clsig.simulate_sig_knowledge(pk, params, C,
                                                     random_below(1 << pk.cl_params.challenge_bits)))
        elif opening.m == m % params.q:
            poks.append(clsig.prove_sig_knowledge(pk, m, sig, params, C, opening.r, context))
        else:
            own, own_opening = commit_fresh(params, m)
            poks.append(clsig.prove_sig_knowledge(pk, m, sig, params, own, own_opening.r, context))

    ix_plus_one, p1, p2 = zkexcl.difference_commitments(params, values, one)
    ix_plus_one_opening, p1_opening, p2_opening = zkexcl.difference_openings(params, openings, one_opening)
    if ix_plus_one_opening.m == openings['i_z'].m:
        eq = prove_equal(params, ix_plus_one, ix_plus_one_opening, values.i_z, openings['i_z'],
                         zkexcl.subproof_context(binding, 'eq'))
    else:
        eq = simulate_equal(params, ix_plus_one, values.i_z, random_scalar(params))

    ranges = []
    for label, C, opening in (('range-1', p1, p1_opening), ('range-2', p2, p2_opening)):
        if 1 <= opening.m < (1 << RANGE_WIDTH):
            ranges.append(prove_nonneg_range(params, C, opening, RANGE_WIDTH,
                                             zkexcl.subproof_context(binding, label)))
        else:
            ranges.append(simulate_range(params, C, RANGE_WIDTH,
                                         [random_scalar(params) for _ in range(RANGE_WIDTH + 1)]))
    return zkexcl.ExclusionProof('pi', values, one, one_opening.r, tuple(poks), eq, tuple(ranges), binding)


def _phase_two(strategy, setup, log, bundles, transcript, rng):
    params, pubkeys = setup.params, log.public_keys()
    entries = log.entries_snapshot()
    k = rng.randrange(0, len(entries) - 2)
    a, b, c = entries[k], entries[k + 1], entries[k + 2]
    bundle_of = {bundle.timestamp: bundle for bundle in bundles}

    if strategy == 'honest-excluded':
        witness = zkexcl.find_witness(entries, bundle_of[transcript.dropped_timestamp])
        return zkexcl.build_exclusion_proof(params, pubkeys, witness)
    if strategy == 'index-hash-mix':
        mixed = EntrySignatures(c[1].sigma_h, b[1].sigma_t, b[1].sigma_i)
        witness = zkexcl.ProverWitness(bundle_of[b[0].timestamp], a, (b[0], mixed))
        return adversarial_proof(params, pubkeys, witness)
    if strategy == 'non-adjacent':
        witness = zkexcl.ProverWitness(bundle_of[b[0].timestamp], a, c)
        return adversarial_proof(params, pubkeys, witness)
    if strategy == 'reversed-timestamps':
        witness = zkexcl.ProverWitness(bundle_of[c[0].timestamp], a, b)
        return adversarial_proof(params, pubkeys, witness)
    if strategy == 'replayed-sct':
        witness = zkexcl.ProverWitness(bundle_of[a[0].timestamp], a, b)
        return adversarial_proof(params, pubkeys, witness)
    if strategy == 'forged-signature':
        t_y = rng.randint(a[0].timestamp + 1, b[0].timestamp - 1)
        witness = zkexcl.ProverWitness(_forged_sct(pubkeys, b'forged', t_y), a, b)
        return adversarial_proof(params, pubkeys, witness)
    raise ParameterError(f"Estrategia desconocida: {strategy}")


def play_proofexcl_game(strategy, security_parameter=8, setup=None, rng=None):
    """
    Juega una partida completa y devuelve su GameTranscript.

    Args:
        strategy: una de STRATEGIES
        security_parameter: λ, número de rondas de la fase 1 (mínimo 4)
        setup: GameSetup; si falta se generan parámetros de juguete
        rng: random.Random para reproducir la partida
    """
    if strategy not in STRATEGIES:
        raise ParameterError(f"Estrategia desconocida: {strategy}")
    rng = rng or random.Random()
    setup = setup or GameSetup.toy()
    lam = max(security_parameter, MIN_ROUNDS)
    transcript = GameTranscript(strategy, lam)
    log = Log(LogConfig(security_parameter=lam), setup.keys, clock=lambda: 0)

    drop_round = rng.randrange(1, lam - 1) if strategy == 'honest-excluded' else None
    bundles = _phase_one(log, transcript, rng, drop_round)

    proof = _phase_two(strategy, setup, log, bundles, transcript, rng)
    accepted, reason = zkexcl.verify_exclusion_proof(setup.params, log.public_keys(), proof)
    transcript.bit = int(accepted)
    transcript.reason = reason
    logger.info(f"🎲 Juego '{strategy}' (λ={lam}): b={transcript.bit}"
                f"{'' if reason is None else f' ({reason.value})'}")
    return transcript


def run_proofexcl_game(strategy, security_parameter=8, setup=None, rng=None):
    """Devuelve el bit b del verifier."""
    return play_proofexcl_game(strategy, security_parameter, setup, rng).bit
