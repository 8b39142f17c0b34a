import base64
import random

import httpx
import pytest

import ctlog
import merkle
import privdom
import zkexcl
from app import create_app, serve
from errors import ParameterError, RefusedError, ServiceError, UnavailableError
from logsvc_client import (CTLogClient, RemoteLogWriter, binary_search_neighbors, exclusion_witness,
                           fetch_neighbors, monitor_sweep, query_budget)
from logsvc_routes import ServerMode, neighborhood

TIMESTAMPS = [100, 200, 300, 400, 500, 600, 700, 800, 900]


@pytest.fixture
def connect(make_log):
    """Devuelve (log, app, client) para un log nuevo servido con `mode`."""
    clients = []

    def factory(mode='honest'):
        log = make_log()
        app = create_app(log, ServerMode.parse(mode))
        client = CTLogClient('http://testserver', transport=httpx.WSGITransport(app=app))
        clients.append(client)
        return log, app, client

    yield factory
    for client in clients:
        client.close()


def _submit_all(client, timestamps):
    return {t: client.add_entry(f"cert-{t}".encode(), t)[1] for t in timestamps}


# ====================
# Vecindario por timestamp
# ====================

def test_neighborhood_example():
    stamps = [100, 200, 300, 400]
    assert [stamps[p] for p in neighborhood(stamps, 250, 2)] == [200, 300]
    assert [stamps[p] for p in neighborhood(stamps, 300, 3)] == [300, 400]
    assert neighborhood(stamps, 50, 2) == [0]
    assert neighborhood(stamps, 500, 4) == [2, 3]


def test_neighborhood_matches_brute_force():
    rng = random.Random(11)
    for _ in range(300):
        stamps = sorted(rng.sample(range(1, 200), rng.randint(0, 12)))
        t = rng.randint(0, 210)
        count = rng.randint(1, 6)
        below = [i for i, s in enumerate(stamps) if s <= t][-(count // 2):] if count // 2 else []
        above = [i for i, s in enumerate(stamps) if s > t][:count - count // 2]
        assert neighborhood(stamps, t, count) == below + above


# ====================
# Endpoints
# ====================

def test_add_entry_and_sth(connect, pubkeys):
    log, _, client = connect()
    bundles = _submit_all(client, TIMESTAMPS[:3])
    assert all(log.verify_sct(b) for b in bundles.values())
    sth = client.get_sth()
    assert sth.tree_size == 3
    assert sth.verify(pubkeys)
    remote_keys, mode, width, mmd = client.get_public_keys()
    assert (remote_keys, mode, width, mmd) == (pubkeys, 'sum', 160, 0)


def test_add_entry_rejects_old_timestamp(connect):
    _, _, client = connect()
    client.add_entry(b'a', 10)
    with pytest.raises(ServiceError) as info:
        client.add_entry(b'b', 5)
    assert info.value.status_code == 400


def test_get_entries_is_inclusive(connect, pubkeys):
    log, _, client = connect()
    _submit_all(client, TIMESTAMPS[:5])
    fetched = client.get_entries(1, 3)
    assert [entry.index for entry, _, _ in fetched] == [1, 2, 3]
    for entry, sigs, leaf in fetched:
        assert leaf == entry.leaf_input()
        assert ctlog.verify_entry_signatures(pubkeys, entry, sigs)
    assert client.get_entries(10, 12) == []


def test_bad_requests(connect):
    _, app, _ = connect()
    http = app.test_client()
    assert http.get('/ct/v1/get-entries?start=3&end=1').status_code == 400
    assert http.get('/ct/v1/get-entries?start=x&end=1').status_code == 400
    assert http.get('/ct/v1/get-entries-around-timestamp?timestamp=5&count=0').status_code == 400
    assert http.post('/ct/v1/add-entry', json={}).status_code == 400
    assert http.post('/ct/v1/add-entry', json={'data': '***'}).status_code == 400
    response = http.get('/ct/v1/no-existe')
    assert response.status_code == 404
    assert response.get_json() == {'success': False, 'error': 'Ruta no encontrada'}
    assert http.get('/health').get_json()['tree_size'] == 0


def test_proof_by_hash(connect):
    log, _, client = connect()
    _submit_all(client, TIMESTAMPS[:6])
    sth = client.get_sth()
    entry, _ = log.get_entry_bundle(4)
    index, path = client.get_proof_by_hash(merkle.leaf_hash(entry.leaf_input()), sth.tree_size)
    assert index == 4
    assert ctlog.verify_inclusion(sth, entry.leaf_input(), index, path)
    with pytest.raises(UnavailableError):
        client.get_proof_by_hash(bytes(32), sth.tree_size)


def test_entries_around_timestamp(connect, pubkeys):
    _, _, client = connect()
    _submit_all(client, TIMESTAMPS)
    records = client.get_entries_around_timestamp(450, 4)
    assert [entry.timestamp for entry, _ in records] == [300, 400, 500, 600]
    assert all(ctlog.verify_entry_signatures(pubkeys, entry, sigs) for entry, sigs in records)


def test_server_modes_parse():
    assert ServerMode.parse('omit-entry:5') == ServerMode('omit-entry', 5)
    assert str(ServerMode.parse('dummy-sandwich:2')) == 'dummy-sandwich:2'
    assert ServerMode.parse(None).kind == 'honest'
    with pytest.raises(ParameterError):
        ServerMode.parse('omit-entry')
    with pytest.raises(ParameterError):
        ServerMode.parse('lie')


# ====================
# Auditor
# ====================

def test_fetch_neighbors_from_cooperative_log(connect):
    _, _, client = connect()
    _submit_all(client, TIMESTAMPS)
    x, z = fetch_neighbors(client, 450)
    assert (x[0].timestamp, z[0].timestamp) == (400, 500)
    assert client.requests_by_endpoint['get-entries'] == 0


def test_refusing_log_falls_back_to_binary_search(connect):
    _, app, client = connect('refuse-timestamp-queries')
    _submit_all(client, TIMESTAMPS)
    assert app.test_client().get('/ct/v1/get-entries-around-timestamp?timestamp=450').status_code == 403
    with pytest.raises(RefusedError):
        client.get_entries_around_timestamp(450)

    for t_y in (150, 450, 850):
        client.requests_by_endpoint.clear()
        x, z = fetch_neighbors(client, t_y)
        assert x[0].timestamp < t_y < z[0].timestamp
        assert z[0].index == x[0].index + 1
        assert client.requests_by_endpoint['get-entries'] <= query_budget(len(TIMESTAMPS))


def test_binary_search_out_of_range(connect):
    _, _, client = connect()
    _submit_all(client, TIMESTAMPS)
    with pytest.raises(UnavailableError):
        binary_search_neighbors(client, 50)
    with pytest.raises(UnavailableError):
        binary_search_neighbors(client, 950)


def test_omitted_entry_yields_a_verifying_proof(connect, params, pubkeys):
    _, _, client = connect('omit-entry:3')
    bundles = _submit_all(client, TIMESTAMPS)
    assert client.get_sth().tree_size == len(TIMESTAMPS) - 1

    witness = exclusion_witness(client, bundles[400])
    assert (witness.x[0].timestamp, witness.z[0].timestamp) == (300, 500)
    assert witness.sth is not None and witness.mmd_ms == 0
    proof = zkexcl.build_exclusion_proof(params, pubkeys, witness)
    assert zkexcl.verify_exclusion_proof(params, pubkeys, proof) == (True, None)


@pytest.mark.parametrize('mode', ['honest', 'refuse-timestamp-queries'])
def test_included_sct_has_no_exclusion_witness(connect, mode):
    _, _, client = connect(mode)
    bundles = _submit_all(client, TIMESTAMPS)
    with pytest.raises(UnavailableError):
        exclusion_witness(client, bundles[400])


def test_dummy_sandwich_hides_the_neighbors(connect):
    _, _, client = connect('dummy-sandwich:2')
    _submit_all(client, [100, 200])
    _, sct = client.add_entry(b'victima', 300)
    _submit_all(client, [400, 500])
    assert client.get_sth().tree_size == 6
    with pytest.raises(UnavailableError):
        fetch_neighbors(client, sct.timestamp)


# ====================
# Monitor
# ====================

def test_sweep_of_an_honest_log_is_clean(connect):
    _, _, client = connect()
    _submit_all(client, TIMESTAMPS)
    report = monitor_sweep(client, batch=4)
    assert report.clean
    assert report.checked == len(TIMESTAMPS)
    assert report.root_matches is True
    assert report.to_dict()['clean'] is True


def test_sweep_flags_withheld_dummy_entries(connect):
    _, _, client = connect('dummy-sandwich:2')
    _submit_all(client, [100, 200, 300, 400, 500])
    report = monitor_sweep(client)
    assert report.unavailable == [2, 3]
    assert report.root_matches is None
    assert not report.clean
    assert not any(v.kind == 'index-gap' for v in report.violations)


def test_sweep_flags_tampered_index_signature(connect):
    log, _, client = connect()
    _submit_all(client, TIMESTAMPS[:4])
    sigs_1, sigs_2 = log._signatures[1], log._signatures[2]
    log._signatures[1] = ctlog.EntrySignatures(sigs_1.sigma_h, sigs_1.sigma_t, sigs_2.sigma_i)
    report = monitor_sweep(client)
    assert [(v.kind, v.index, v.detail) for v in report.violations] == [('signature', 1, 'sigma_i')]
    assert report.root_matches is True


# ====================
# Cliente contra el servidor real
# ====================

def test_private_subdomain_through_the_service(make_log, params, pubkeys):
    log = make_log()
    with serve(log, port=0) as running:
        with CTLogClient(running.url) as client:
            binding = privdom.commit_subdomain(params, 'example.com', 'secret')
            cert, bundle = privdom.issue_private_cert(RemoteLogWriter(client), params, binding, t=42)
            assert privdom.visitor_verify(params, pubkeys, cert, bundle)
            fetched = client.get_entries(0, 0)
            assert privdom.monitor_count([entry for entry, _, _ in fetched], 'example.com') == 1
            assert client.request_count == 2
    assert log.tree_size == 1


def test_unreachable_service():
    with CTLogClient('http://127.0.0.1:9', timeout=0.5) as client:
        with pytest.raises(ServiceError):
            client.get_sth()


def test_entries_are_base64_in_json(connect):
    _, app, client = connect()
    client.add_entry(b'\x00\xff', 1)
    record = app.test_client().get('/ct/v1/get-entries?start=0&end=0').get_json()['entries'][0]
    assert base64.b64decode(record['sct']['data']) == b'\x00\xff'
    assert set(record['signatures']) == {'sigma_h', 'sigma_t', 'sigma_i'}


@pytest.mark.slow
def test_binary_search_budget_on_a_large_log(connect):
    _, _, client = connect('refuse-timestamp-queries')
    size = 1000
    for i in range(size):
        client.add_entry(b'e%d' % i, 10 * (i + 1))
    rng = random.Random(5)
    for _ in range(20):
        t_y = 10 * rng.randint(1, size - 1) + rng.randint(1, 9)
        client.requests_by_endpoint.clear()
        x, z = fetch_neighbors(client, t_y, size)
        assert x[0].timestamp < t_y < z[0].timestamp
        assert client.requests_by_endpoint['get-entries'] <= query_budget(size)


def test_every_record_type_survives_the_json_wire(connect, pubkeys):
    log, _, client = connect()
    bundles = _submit_all(client, TIMESTAMPS[:4])
    for bundle in bundles.values():
        assert ctlog.verify_sct(pubkeys, bundle)
        assert ctlog.SctBundle.from_b64(bundle.to_b64()) == bundle
    snapshot = log.entries_snapshot()

    assert [(entry, sigs) for entry, sigs, _ in client.get_entries(0, 3)] == snapshot
    assert client.get_entries_around_timestamp(250, 2) == snapshot[1:3]
    assert client.get_sth() == log.tree_head()
    assert client.get_public_keys()[0] == log.public_keys()
    entry, _ = snapshot[2]
    index, path = client.get_proof_by_hash(merkle.leaf_hash(entry.leaf_input()), 4)
    assert (index, path) == (2, log.prove_inclusion(2))


@pytest.mark.slow
def test_honest_log_never_yields_an_exclusion_witness(connect):
    _, _, client = connect()
    rng = random.Random(64)
    bundles, t = [], 0
    for _ in range(64):
        t += rng.randint(1, 1000)
        bundles.append(client.add_entry(f"cert-{t}".encode(), t)[1])
        for bundle in bundles:
            with pytest.raises(UnavailableError):
                exclusion_witness(client, bundle)
