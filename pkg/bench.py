"""
Mediciones de las pruebas de exclusión y del crecimiento del log.

Reproduce la tabla de tiempos y tamaños (media sobre 20 ejecuciones) por
componente: compromisos, las siete SigPoK, la prueba de igualdad y las dos
de rango. Además informa del aborto temprano (rechazo en la primera SigPoK
frente a verificación completa), de la fracción de la verificación que se
va en SigPoK y de los bytes que añaden las firmas nuevas a entradas y SCTs.
"""
import logging
import random
import statistics
import time
from dataclasses import dataclass, replace

import pandas as pd

import clsig
import ctlog
import zkexcl
from commitments import DEFAULT_BIT_LENGTHS, DEFAULT_LABEL, setup_params
from errors import ProofError

logger = logging.getLogger(__name__)

DEFAULT_RUNS = 20
TOY_BIT_LENGTHS = (512, 256)

# Cifras publicadas para claves CL de 2048 bits
REFERENCE = {
    'proof_bytes': 333216,
    'prover_ms': 5017.4,
    'verifier_ms': 2310.2,
    'verifier_poks_ms': 2274.0,
    'entry_growth_bytes': 1791,
    'sct_growth_bytes': 597,
    'early_abort_ratio': 1 / 7,
}

COMPONENTS = ('commitments', 'poks', 'eq', 'ranges')
_VERIFIER_STAGES = {'commitments': ('opening', 'derive'), 'poks': ('poks',), 'eq': ('eq',),
                    'ranges': ('ranges',)}
_SIZE_SECTIONS = {'commitments': ('commitments', 'binding'), 'poks': ('poks',), 'eq': ('eq',),
                  'ranges': ('ranges',)}


@dataclass
class BenchFixture:
    params: object
    log: ctlog.Log
    witness: zkexcl.ProverWitness
    sigs: ctlog.EntrySignatures


@dataclass
class BenchResult:
    variant: str
    runs: pd.DataFrame
    table: pd.DataFrame
    early_abort_ratio: float
    sigpok_share: float
    entry_growth: int
    sct_growth: int
    sct_growth_with_hash: int

    def summary(self):
        return {
            'variant': self.variant,
            'runs': len(self.runs),
            'proof_bytes': int(self.table.loc['total', 'bytes']),
            'prover_ms': round(float(self.table.loc['total', 'prover_ms']), 1),
            'verifier_ms': round(float(self.table.loc['total', 'verifier_ms']), 1),
            'early_abort_ratio': round(self.early_abort_ratio, 4),
            'sigpok_share': round(self.sigpok_share, 4),
            'entry_growth_bytes': self.entry_growth,
            'sct_growth_bytes': self.sct_growth,
            'sct_growth_with_hash_bytes': self.sct_growth_with_hash,
            'reference': REFERENCE,
        }


def prepare_fixture(toy=False, variant='pi', entries=8, seed=None):
    """Log con `entries` entradas y un SCT descartado en medio."""
    rng = random.Random(seed)
    if toy:
        params = setup_params(TOY_BIT_LENGTHS, DEFAULT_LABEL)
        keys = ctlog.LogKeys.generate(clsig.TOY_MODULUS_BITS, toy=True)
    else:
        params = setup_params(DEFAULT_BIT_LENGTHS, DEFAULT_LABEL)
        keys = ctlog.LogKeys.generate(clsig.PRODUCTION_MODULUS_BITS)
    mode = zkexcl.VARIANTS[variant][1]
    log = ctlog.Log(ctlog.LogConfig(signing_mode=mode), keys, clock=lambda: 0)
    t = rng.randint(1_600_000_000_000, 1_700_000_000_000)
    dropped = None
    for i in range(entries):
        t += rng.randint(1, 60_000)
        bundle, _, _ = log.submit(f"bench-cert-{i}".encode(), t, drop=(i == entries // 2))
        if i == entries // 2:
            dropped = bundle
    witness = zkexcl.find_witness(log.entries_snapshot(), dropped)
    if witness is None:
        raise ProofError("No se encontró testigo para el SCT descartado")
    return BenchFixture(params, log, witness, witness.x[1])


def _stage_sum(timings, stages):
    return sum(timings.get(stage, 0.0) for stage in stages)


def run_benchmark(runs=DEFAULT_RUNS, toy=False, variant='pi', fixture=None):
    """
    Mide `runs` construcciones y verificaciones de una prueba.

    Returns:
        BenchResult con la tabla por componente (media en ms y bytes)
    """
    fixture = fixture or prepare_fixture(toy, variant)
    pubkeys = fixture.log.public_keys()
    rows = []
    full_times, abort_times = [], []
    for run in range(runs):
        prover_timings, verifier_timings = {}, {}
        started = time.perf_counter()
        proof = zkexcl.build_exclusion_proof(fixture.params, pubkeys, fixture.witness, variant,
                                             timings=prover_timings)
        prover_ms = (time.perf_counter() - started) * 1000

        started = time.perf_counter()
        accepted, reason = zkexcl.verify_exclusion_proof(fixture.params, pubkeys, proof,
                                                         timings=verifier_timings)
        verifier_ms = (time.perf_counter() - started) * 1000
        if not accepted:
            raise ProofError(f"La prueba de referencia fue rechazada: {reason.value}")
        full_times.append(verifier_ms)

        broken = replace(proof, poks=(proof.poks[1],) + proof.poks[1:])
        started = time.perf_counter()
        zkexcl.verify_exclusion_proof(fixture.params, pubkeys, broken)
        abort_times.append((time.perf_counter() - started) * 1000)

        sizes = zkexcl.proof_size_report(proof)
        row = {'run': run, 'prover_ms': prover_ms, 'verifier_ms': verifier_ms, 'bytes': sizes['total']}
        for component in COMPONENTS:
            row[f'prover_{component}_ms'] = prover_timings.get(component, 0.0)
            row[f'verifier_{component}_ms'] = _stage_sum(verifier_timings, _VERIFIER_STAGES[component])
            row[f'{component}_bytes'] = sum(sizes.get(s, 0) for s in _SIZE_SECTIONS[component])
        rows.append(row)

    df = pd.DataFrame(rows)
    table = pd.DataFrame(
        [{'component': c,
          'prover_ms': df[f'prover_{c}_ms'].mean(),
          'verifier_ms': df[f'verifier_{c}_ms'].mean(),
          'bytes': int(df[f'{c}_bytes'].iloc[-1])} for c in COMPONENTS]
        + [{'component': 'total', 'prover_ms': df['prover_ms'].mean(),
            'verifier_ms': df['verifier_ms'].mean(), 'bytes': int(df['bytes'].iloc[-1])}]
    ).set_index('component')

    bundle = fixture.witness.sct
    result = BenchResult(
        variant=variant,
        runs=df,
        table=table,
        early_abort_ratio=statistics.median(abort_times) / statistics.median(full_times),
        sigpok_share=float(df['verifier_poks_ms'].sum() / df['verifier_ms'].sum()),
        entry_growth=ctlog.entry_signature_growth(fixture.sigs),
        sct_growth=ctlog.sct_signature_growth(bundle),
        sct_growth_with_hash=ctlog.sct_signature_growth(bundle, include_hash_signature=True),
    )
    logger.info(f"📊 Benchmark '{variant}': {result.table.loc['total', 'bytes']} bytes, "
                f"prover {result.table.loc['total', 'prover_ms']:.1f} ms, "
                f"verifier {result.table.loc['total', 'verifier_ms']:.1f} ms")
    return result


def format_report(result):
    """Tabla legible con las cifras de referencia al lado."""
    table = result.table.copy()
    table['prover_ms'] = table['prover_ms'].round(1)
    table['verifier_ms'] = table['verifier_ms'].round(1)
    lines = [f"Variante {result.variant}, {len(result.runs)} ejecuciones", table.to_string(), ""]
    lines.append(f"Tamaño: {int(table.loc['total', 'bytes'])} bytes "
                 f"(referencia {REFERENCE['proof_bytes']})")
    lines.append(f"SigPoK en verificación: {result.sigpok_share:.1%} "
                 f"(referencia {REFERENCE['verifier_poks_ms'] / REFERENCE['verifier_ms']:.1%})")
    lines.append(f"Aborto temprano / verificación completa: {result.early_abort_ratio:.3f} "
                 f"(referencia < {REFERENCE['early_abort_ratio']:.3f})")
    lines.append(f"Crecimiento por entrada: {result.entry_growth} bytes "
                 f"(referencia {REFERENCE['entry_growth_bytes']})")
    lines.append(f"Crecimiento por SCT: {result.sct_growth} bytes, {result.sct_growth_with_hash} con σ_H "
                 f"(referencia {REFERENCE['sct_growth_bytes']})")
    return "\n".join(lines)
