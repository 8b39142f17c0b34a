import dataclasses

import pytest

import bench
import zkexcl
from commitments import RANGE_WIDTH, commit_fresh, setup_params
from conftest import fill_log
from ctlog import Log, LogConfig
from errors import ProofError, WireFormatError
from zkexcl import VerifyReason

TIMESTAMPS = [100 * k for k in range(1, 8)]


@pytest.fixture(scope='module')
def concat_case(log_keys):
    log = Log(LogConfig(mmd_ms=0, signing_mode='concat'), log_keys, clock=lambda: 0)
    bundles = fill_log(log, TIMESTAMPS, drop_at=400)
    return log, bundles[400], zkexcl.find_witness(log.entries_snapshot(), bundles[400])


@pytest.fixture(scope='module')
def actionable_proof(params, excluded_case):
    log, _, witness = excluded_case
    return zkexcl.build_actionable_proof(params, log.public_keys(), witness)


# ====================
# Pruebas honestas
# ====================

def test_honest_proof_is_accepted(params, pubkeys, honest_proof):
    assert zkexcl.verify_exclusion_proof(params, pubkeys, honest_proof) == (True, None)


def test_witness_brackets_dropped_sct(excluded_case):
    _, sct, witness = excluded_case
    assert witness.x[0].timestamp == 4000
    assert witness.z[0].timestamp == 6000
    assert witness.z[0].index == witness.x[0].index + 1
    assert witness.sct == sct


def test_concat_variant(params, pubkeys, concat_case):
    _, _, witness = concat_case
    proof = zkexcl.build_exclusion_proof_v2(params, pubkeys, witness)
    assert proof.variant == 'pi-prime'
    assert zkexcl.verify_exclusion_proof_v2(params, pubkeys, proof) == (True, None)


def test_concat_witness_is_rejected_by_sum_prover(params, pubkeys, concat_case):
    _, _, witness = concat_case
    with pytest.raises(ProofError):
        zkexcl.build_exclusion_proof(params, pubkeys, witness, 'pi')


def test_actionable_proof_reveals_sct_hash(params, pubkeys, excluded_case, actionable_proof):
    _, sct, _ = excluded_case
    accepted, reason, revealed = zkexcl.verify_actionable_proof(params, pubkeys, actionable_proof)
    assert accepted and reason is None
    assert revealed == sct.hash_scalar()
    assert zkexcl.match_sct_hash(revealed, sct)
    assert actionable_proof.values.h_y is None


def test_actionable_hash_cannot_be_swapped(params, pubkeys, excluded_case, actionable_proof):
    log, _, _ = excluded_case
    other = log.entries_snapshot()[0][0].hash_scalar()
    tampered = dataclasses.replace(actionable_proof, revealed_hash=other)
    accepted, reason, revealed = zkexcl.verify_actionable_proof(params, pubkeys, tampered)
    assert not accepted and revealed is None
    assert reason == VerifyReason.DERIVE


def test_wrong_variant_entry_points(params, pubkeys, honest_proof):
    assert zkexcl.verify_exclusion_proof_v2(params, pubkeys, honest_proof) == (False, VerifyReason.MALFORMED)
    accepted, reason, _ = zkexcl.verify_actionable_proof(params, pubkeys, honest_proof)
    assert (accepted, reason) == (False, VerifyReason.MALFORMED)


# ====================
# Serialización
# ====================

def test_serialized_proof_verifies(params, pubkeys, honest_proof, actionable_proof):
    for proof in (honest_proof, actionable_proof):
        data = proof.encode()
        assert zkexcl.variant_of(data) == proof.variant
        assert zkexcl.ExclusionProof.decode(data, proof.variant) == proof
        assert zkexcl.verify_proof_bytes(params, pubkeys, data, proof.variant) == (True, None)


def test_truncated_or_mislabelled_bytes_are_malformed(params, pubkeys, honest_proof):
    data = honest_proof.encode()
    assert zkexcl.verify_proof_bytes(params, pubkeys, data[:-3]) == (False, VerifyReason.MALFORMED)
    assert zkexcl.verify_proof_bytes(params, pubkeys, data, 'actionable') == (False, VerifyReason.MALFORMED)
    with pytest.raises(WireFormatError):
        zkexcl.variant_of(b'\x01\x7f')


def test_size_report_covers_every_section(honest_proof):
    report = zkexcl.proof_size_report(honest_proof)
    assert set(report) == {'commitments', 'poks', 'eq', 'ranges', 'binding', 'total'}
    assert sum(v for k, v in report.items() if k != 'total') + 2 == report['total']
    assert report['ranges'] > report['poks']


# ====================
# Mutaciones
# ====================

def _verify(params, pubkeys, proof, timings=None):
    return zkexcl.verify_exclusion_proof(params, pubkeys, proof, timings=timings)


def test_wrong_one_randomness(params, pubkeys, honest_proof):
    tampered = dataclasses.replace(honest_proof, one_randomness=(honest_proof.one_randomness + 1) % params.q)
    assert _verify(params, pubkeys, tampered) == (False, VerifyReason.OPENING)


def test_swapped_value_commitment(params, pubkeys, honest_proof):
    other, _ = commit_fresh(params, 1234)
    values = dataclasses.replace(honest_proof.values, t_x=other)
    assert _verify(params, pubkeys, dataclasses.replace(honest_proof, values=values)) == \
        (False, VerifyReason.DERIVE)


@pytest.mark.parametrize('k', range(1, zkexcl.POK_COUNT + 1))
def test_each_pok_is_checked(params, pubkeys, honest_proof, k):
    poks = list(honest_proof.poks)
    poks[k - 1] = poks[k % zkexcl.POK_COUNT]
    tampered = dataclasses.replace(honest_proof, poks=tuple(poks))
    assert _verify(params, pubkeys, tampered) == (False, VerifyReason.pok(k))


def test_swapped_range_proofs(params, pubkeys, honest_proof):
    ranges = (honest_proof.ranges[1], honest_proof.ranges[0])
    assert _verify(params, pubkeys, dataclasses.replace(honest_proof, ranges=ranges)) == \
        (False, VerifyReason.RANGE_1)


def test_second_range_is_checked(params, pubkeys, honest_proof):
    ranges = (honest_proof.ranges[0], honest_proof.ranges[0])
    assert _verify(params, pubkeys, dataclasses.replace(honest_proof, ranges=ranges)) == \
        (False, VerifyReason.RANGE_2)


def test_equality_from_another_proof(params, pubkeys, excluded_case, honest_proof):
    log, _, witness = excluded_case
    other = zkexcl.build_exclusion_proof(params, log.public_keys(), witness)
    tampered = dataclasses.replace(honest_proof, eq=other.eq)
    assert _verify(params, pubkeys, tampered) == (False, VerifyReason.EQ)


def test_failed_pok_aborts_before_later_stages(params, pubkeys, honest_proof):
    poks = (honest_proof.poks[1],) + honest_proof.poks[1:]
    timings = {}
    accepted, reason = _verify(params, pubkeys, dataclasses.replace(honest_proof, poks=poks), timings)
    assert not accepted and reason == VerifyReason.POK_1
    assert set(timings) == {'opening', 'derive', 'poks'}

    full = {}
    _verify(params, pubkeys, honest_proof, full)
    assert set(full) == {'opening', 'derive', 'poks', 'eq', 'ranges'}


def test_prover_timings(params, excluded_case):
    log, _, witness = excluded_case
    timings = {}
    zkexcl.build_exclusion_proof(params, log.public_keys(), witness, timings=timings)
    assert set(timings) == {'commitments', 'poks', 'eq', 'ranges'}
    assert all(ms >= 0 for ms in timings.values())


# ====================
# Precondiciones del prover
# ====================

def test_find_witness_on_included_or_out_of_range_sct(make_log):
    log = make_log()
    bundles = fill_log(log, [10, 20, 30])
    entries = log.entries_snapshot()
    assert zkexcl.find_witness(entries, bundles[20]) is None
    assert zkexcl.find_witness(entries[1:], bundles[10]) is None
    assert zkexcl.find_witness(entries[:2], bundles[30]) is None


def test_non_adjacent_witness_is_refused(params, pubkeys, excluded_case):
    log, sct, _ = excluded_case
    entries = log.entries_snapshot()
    witness = zkexcl.ProverWitness(sct, entries[2], entries[4])
    with pytest.raises(ProofError):
        zkexcl.build_exclusion_proof(params, pubkeys, witness)


def test_timestamps_out_of_order_are_refused(params, pubkeys, excluded_case):
    log, sct, _ = excluded_case
    entries = log.entries_snapshot()
    with pytest.raises(ProofError):
        zkexcl.build_exclusion_proof(params, pubkeys, zkexcl.ProverWitness(sct, entries[5], entries[6]))


def test_mmd_must_have_elapsed(params, pubkeys, excluded_case):
    log, sct, witness = excluded_case
    sth = log.tree_head()
    assert sth.timestamp == 9000
    early = dataclasses.replace(witness, sth=sth, mmd_ms=10000)
    with pytest.raises(ProofError):
        zkexcl.check_witness(pubkeys, early)
    zkexcl.check_witness(pubkeys, dataclasses.replace(witness, sth=sth, mmd_ms=1000))


def test_unknown_variant(params, pubkeys, excluded_case):
    _, _, witness = excluded_case
    with pytest.raises(ProofError):
        zkexcl.build_exclusion_proof(params, pubkeys, witness, 'pi-2')


# ====================
# Conocimiento cero
# ====================

@pytest.mark.parametrize('variant', sorted(zkexcl.VARIANTS))
def test_simulated_proof_passes_interactive_verification_only(params, pubkeys, variant):
    simulated = zkexcl.simulate_exclusion_proof(params, pubkeys, variant)
    assert zkexcl.verify_exclusion_proof(params, pubkeys, simulated, interactive=True) == (True, None)
    accepted, reason = zkexcl.verify_exclusion_proof(params, pubkeys, simulated)
    assert not accepted and reason == VerifyReason.POK_1


def test_commitments_hide_the_witness(params, pubkeys, excluded_case):
    _, _, witness = excluded_case
    first = zkexcl.build_exclusion_proof(params, pubkeys, witness)
    second = zkexcl.build_exclusion_proof(params, pubkeys, witness)
    assert set(first.values.transported()).isdisjoint(second.values.transported())


@pytest.mark.slow
def test_proof_size_with_2048_bit_group(pubkeys, excluded_case):
    _, _, witness = excluded_case
    params = setup_params()
    proof = zkexcl.build_exclusion_proof(params, pubkeys, witness)
    assert zkexcl.verify_exclusion_proof(params, pubkeys, proof) == (True, None)
    report = zkexcl.proof_size_report(proof)

    # entero = 4 bytes de longitud + a lo sumo 256 (mod p) o 32 (mod q); sección = 5 de cabecera
    group_int, scalar_int = 4 + 256, 4 + 32
    eq_bytes = group_int + 2 * scalar_int
    bit_bytes = 2 * group_int + 4 * scalar_int
    range_bytes = 6 + RANGE_WIDTH * (group_int + bit_bytes) + eq_bytes
    assert report['binding'] == 5 + 4 + 32
    assert report['eq'] <= 5 + eq_bytes
    assert report['commitments'] <= 5 + 2 + 9 * group_int + scalar_int
    assert 2 * range_bytes - 1000 < report['ranges'] - 5 <= 2 * range_bytes

    # Las dos pruebas de rango de 64 bits son casi toda la prueba y el total
    # queda por debajo de la mitad de la cifra de referencia
    assert report['ranges'] > 0.85 * report['total']
    assert report['total'] < bench.REFERENCE['proof_bytes'] // 2
    assert report['total'] > 0.35 * bench.REFERENCE['proof_bytes']


@pytest.mark.slow
def test_every_gap_of_logs_up_to_64_entries_is_provable(params, make_log):
    log = make_log()
    dropped = []
    for k in range(64):
        log.submit(f"cert-{k}".encode(), 10 * k + 10)
        if k < 63:
            bundle, _, _ = log.submit(f"omitida-{k}".encode(), 10 * k + 15, drop=True)
            dropped.append(bundle)
    entries = log.entries_snapshot()
    pubkeys = log.public_keys()

    for n in range(1, len(entries) + 1):
        for gap, sct in enumerate(dropped):
            witness = zkexcl.find_witness(entries[:n], sct)
            if gap < n - 1:
                assert (witness.x[0].index, witness.z[0].index) == (gap, gap + 1)
            else:
                assert witness is None

    for sct in dropped:
        proof = zkexcl.build_exclusion_proof(params, pubkeys, zkexcl.find_witness(entries, sct))
        assert zkexcl.verify_exclusion_proof(params, pubkeys, proof) == (True, None)


@pytest.mark.slow
def test_single_byte_mutations_never_verify(params, pubkeys, honest_proof, rng):
    data = honest_proof.encode()
    reasons = set()
    for _ in range(1000):
        mutated = bytearray(data)
        mutated[rng.randrange(len(data))] ^= rng.randrange(1, 256)
        accepted, reason = zkexcl.verify_proof_bytes(params, pubkeys, bytes(mutated))
        assert not accepted
        reasons.add(reason)
    assert VerifyReason.MALFORMED in reasons
    assert len(reasons) >= 4
