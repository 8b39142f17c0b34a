import hashlib
import itertools
import threading

import pytest

import ctlog
import merkle
from conftest import fill_log
from errors import EntryNotFoundError, LogError, OrderingError, ParameterError
from log_journal import LogJournal


def test_submit_assigns_consecutive_indices_and_signs_entries(make_log, pubkeys):
    log = make_log()
    fill_log(log, [10, 20, 30])
    assert log.tree_size == 3
    for entry, sigs in log.entries_snapshot():
        assert ctlog.verify_entry_signatures(pubkeys, entry, sigs)
    assert [entry.index for entry, _ in log.entries_snapshot()] == [0, 1, 2]


def test_sct_verifies_and_detects_tampering(make_log, pubkeys):
    log = make_log()
    bundle, _, _ = log.submit(b'cert', 100)
    assert log.verify_sct(bundle)
    assert ctlog.verify_sct(pubkeys, bundle)
    forged = ctlog.SctBundle(bundle.data, 101, bundle.frontend_id, bundle.sigma_th, bundle.sigma_h,
                             bundle.signature)
    assert not ctlog.verify_sct(pubkeys, forged)
    assert ctlog.SctBundle.from_b64(bundle.to_b64()) == bundle


def test_timestamps_must_increase(make_log):
    log = make_log()
    log.submit(b'a', 100)
    with pytest.raises(OrderingError):
        log.submit(b'b', 100)
    with pytest.raises(OrderingError):
        log.submit(b'b', 50)


def test_clock_is_forced_forward(make_log):
    log = make_log(clock=lambda: 5)
    _, first, _ = log.submit(b'a')
    _, second, _ = log.submit(b'b')
    assert (first.timestamp, second.timestamp) == (5, 6)


def test_dropped_entry_gets_sct_but_no_index(make_log):
    log = make_log()
    bundles = fill_log(log, [10, 20, 30], drop_at=20)
    assert log.tree_size == 2
    assert log.timestamps() == [10, 30]
    assert log.verify_sct(bundles[20])
    assert log.last_timestamp == 30


def test_dropped_timestamp_cannot_be_reused(make_log):
    log = make_log()
    log.submit(b'a', 10, drop=True)
    with pytest.raises(OrderingError):
        log.submit(b'b', 10)


@pytest.mark.parametrize('mode', ctlog.SIGNING_MODES)
def test_signed_values_per_mode(mode, make_log, pubkeys):
    log = make_log(mode)
    bundle, entry, sigs = log.submit(b'x', 7)
    h = entry.hash_scalar()
    expected = 7 + h if mode == 'sum' else (7 << 160) + h
    assert ctlog.signed_value(mode, 7, h) == expected
    assert ctlog.verify_entry_signatures(pubkeys, entry, sigs, mode)
    assert ctlog.verify_sct(pubkeys, bundle, mode)
    other = 'concat' if mode == 'sum' else 'sum'
    assert not ctlog.verify_entry_signatures(pubkeys, entry, sigs, other)


def test_signed_value_rejects_wide_hash_and_unknown_mode():
    with pytest.raises(ParameterError):
        ctlog.signed_value('sum', 1, 1 << 160)
    with pytest.raises(ParameterError):
        ctlog.signed_value('xor', 1, 1)


def test_hash_entry_is_truncated_sha256():
    digest = hashlib.sha256(b'cert').digest()
    assert ctlog.hash_entry(b'cert') == int.from_bytes(digest[:20], 'big')
    assert ctlog.hash_entry(b'cert', 64) == int.from_bytes(digest[:8], 'big')
    assert ctlog.hash_entry(b'cert') != ctlog.hash_entry(b'cert2')


def test_new_log_checks_message_space(log_keys):
    log = ctlog.new_log(ctlog.LogConfig(signing_mode='concat'), log_keys, clock=lambda: 0)
    assert log.tree_size == 0
    with pytest.raises(ParameterError):
        ctlog.new_log(ctlog.LogConfig(signing_mode='concat', hash_width=200), log_keys)


def test_tampered_index_signature_is_reported(make_log, pubkeys):
    log = make_log()
    fill_log(log, [1, 2])
    (e0, s0), (e1, s1) = log.entries_snapshot()
    swapped = ctlog.EntrySignatures(s0.sigma_h, s0.sigma_t, s1.sigma_i)
    assert ctlog.entry_signature_failures(pubkeys, e0, swapped) == ['sigma_i']


def test_tree_head_and_inclusion(make_log, pubkeys):
    log = make_log(clock=lambda: 1000)
    fill_log(log, [10, 20, 30, 40, 50])
    sth = log.tree_head()
    assert sth.verify(pubkeys)
    assert sth.tree_size == 5
    assert sth.root_hash == merkle.root([entry.leaf_input() for entry, _ in log.entries_snapshot()])
    entry, _ = log.get_entry_bundle(3)
    assert ctlog.verify_inclusion(sth, entry.leaf_input(), 3, log.prove_inclusion(3))
    assert log.find_by_leaf_hash(merkle.leaf_hash(entry.leaf_input())) == 3
    assert ctlog.SignedTreeHead.from_dict(sth.to_dict()) == sth
    assert ctlog.SignedTreeHead.decode(sth.encode()) == sth


def test_missing_entries(make_log):
    log = make_log()
    fill_log(log, [1])
    with pytest.raises(EntryNotFoundError):
        log.get_entry_bundle(1)
    with pytest.raises(IndexError):
        log.prove_inclusion(0, tree_size=2)


def test_well_formedness_report():
    entries = [ctlog.LogEntry(b'', 0, 10), ctlog.LogEntry(b'', 1, 20), ctlog.LogEntry(b'', 3, 15)]
    report = ctlog.check_well_formed(entries)
    assert {v.kind for v in report.violations} == {'index-gap', 'timestamp-order'}
    assert not report.clean
    assert ctlog.check_well_formed(entries[:2]).clean
    shifted = ctlog.check_well_formed([ctlog.LogEntry(b'', 1, 1)])
    assert [v.kind for v in shifted.violations] == ['index-start']


def test_signature_growth(make_log):
    log = make_log()
    bundle, _, sigs = log.submit(b'x', 1)
    assert ctlog.entry_signature_growth(sigs) == sum(len(s.encode())
                                                     for s in (sigs.sigma_h, sigs.sigma_t, sigs.sigma_i))
    with_hash = ctlog.sct_signature_growth(bundle, include_hash_signature=True)
    assert with_hash == ctlog.sct_signature_growth(bundle) + len(bundle.sigma_h.encode())


def test_config_validation():
    with pytest.raises(ParameterError):
        ctlog.LogConfig(frontend_id=1 << 16)
    with pytest.raises(ParameterError):
        ctlog.LogConfig(signing_mode='xor')
    config = ctlog.LogConfig(mmd_ms=5, signing_mode='concat')
    assert ctlog.LogConfig.from_dict(config.to_dict()) == config


def test_keys_must_be_distinct(log_keys):
    with pytest.raises(ParameterError):
        ctlog.LogKeys(log_keys.hash_key, log_keys.hash_key, log_keys.index_key, log_keys.sct_key)


def test_keys_round_trip(log_keys, pubkeys):
    restored = ctlog.LogKeys.from_dict(log_keys.to_dict())
    assert restored.public() == pubkeys
    assert ctlog.LogPublicKeys.from_dict(pubkeys.to_dict()) == pubkeys


def test_journal_replay_restores_entries_and_sth(make_log, tmp_path):
    path = tmp_path / 'log' / 'journal.bin'
    log = make_log(journal=LogJournal(str(path)), clock=lambda: 500)
    fill_log(log, [10, 20, 30], drop_at=20)
    sth = log.tree_head()

    reopened = make_log(journal=LogJournal(str(path)))
    assert reopened.timestamps() == [10, 30]
    assert reopened.latest_sth == sth
    assert reopened.tree_head().root_hash == sth.root_hash


def test_journal_ignores_truncated_tail(make_log, tmp_path):
    path = tmp_path / 'journal.bin'
    log = make_log(journal=LogJournal(str(path)))
    fill_log(log, [10, 20])
    with open(path, 'ab') as fh:
        fh.write(b'E\x00\x00\x01\x00abc')
    assert make_log(journal=LogJournal(str(path))).tree_size == 2


def test_journal_with_out_of_order_entry_is_rejected(make_log, tmp_path):
    path = tmp_path / 'journal.bin'
    journal = LogJournal(str(path))
    log = make_log(journal=journal)
    _, entry, sigs = log.submit(b'a', 10)
    journal.append_entry(entry, sigs)
    with pytest.raises(LogError):
        make_log(journal=LogJournal(str(path)))


def test_repeated_tree_head_reads_do_not_grow_the_journal(make_log, tmp_path):
    path = tmp_path / 'journal.bin'
    log = make_log(journal=LogJournal(str(path)), clock=lambda: 500)
    fill_log(log, [10, 20])
    first = log.tree_head()
    size_after_first = path.stat().st_size
    for _ in range(200):
        assert log.tree_head() is first
    assert path.stat().st_size == size_after_first

    log.submit(b'c', 30)
    grown = log.tree_head()
    assert grown.tree_size == 3
    assert path.stat().st_size > size_after_first


def test_tree_head_is_refreshed_once_per_mmd(make_log):
    now = [1000]
    log = make_log(clock=lambda: now[0], mmd_ms=100)
    log.submit(b'a', 10)
    first = log.tree_head()
    now[0] = 1099
    assert log.tree_head() is first
    now[0] = 1100
    refreshed = log.tree_head()
    assert refreshed.timestamp == 1100 and refreshed.tree_size == first.tree_size


class FailingJournal(LogJournal):
    def append_entry(self, entry, sigs):
        raise OSError("disco lleno")


def test_entry_is_not_stored_when_the_journal_fails(make_log, tmp_path):
    log = make_log(journal=FailingJournal(str(tmp_path / 'journal.bin')))
    with pytest.raises(OSError):
        log.submit(b'a', 10)
    assert log.tree_size == 0
    assert log.last_timestamp == -1
    with pytest.raises(EntryNotFoundError):
        log.get_entry_bundle(0)


def test_readers_never_see_a_half_stored_entry(make_log):
    log = make_log()
    failures = []
    done = threading.Event()

    def reader():
        while not done.is_set():
            size = log.tree_size
            if size:
                try:
                    entry, sigs = log.get_entry_bundle(size - 1)
                    assert entry.index == size - 1 and sigs is not None
                    log.prove_inclusion(size - 1)
                except Exception as e:
                    failures.append(e)

    thread = threading.Thread(target=reader)
    thread.start()
    try:
        fill_log(log, range(1, 31))
    finally:
        done.set()
        thread.join()
    assert failures == []


def test_random_submissions_only_ever_append(make_log, tmp_path, rng):
    path = tmp_path / 'journal.bin'
    log = make_log(journal=LogJournal(str(path)))
    snapshots, roots = [], []
    t = 0
    for k in range(40):
        t += rng.randint(1, 50)
        log.submit(f"cert-{k}".encode(), t, drop=rng.random() < 0.25)
        snapshots.append(log.entries_snapshot())
        roots.append(log.tree_head().root_hash)

    final = log.entries_snapshot()
    for snapshot, root in zip(snapshots, roots):
        assert final[:len(snapshot)] == snapshot
        assert merkle.root([entry.leaf_input() for entry, _ in snapshot]) == root

    reopened = make_log(journal=LogJournal(str(path)))
    assert reopened.entries_snapshot() == final
    assert reopened.tree_head().root_hash == roots[-1]


def _well_formed_by_brute_force(entries):
    if entries and entries[0].index != 0:
        return False
    return all(b.index == a.index + 1 and b.timestamp > a.timestamp for a, b in zip(entries, entries[1:]))


@pytest.mark.slow
@pytest.mark.parametrize('n', range(0, 7))
def test_well_formedness_matches_brute_force(n):
    # pasos de índice 0, 1 o 2 y de timestamp -1, 0 o 1
    for index_steps in itertools.product((0, 1, 2), repeat=n):
        indices = list(itertools.accumulate(index_steps))
        for time_steps in itertools.product((-1, 0, 1), repeat=n):
            stamps = list(itertools.accumulate(time_steps, initial=10))[1:]
            entries = [ctlog.LogEntry(b'', i, t) for i, t in zip(indices, stamps)]
            assert ctlog.check_well_formed(entries).clean == _well_formed_by_brute_force(entries)
