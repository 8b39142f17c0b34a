import dataclasses

import pytest

import privdom
from commitments import commit
from errors import CommitmentError, LabelError


@pytest.fixture
def issued(params, make_log):
    log = make_log()
    log.submit(b'otro certificado', 1)
    binding = privdom.commit_subdomain(params, 'Example.com.', 'Secret')
    cert, bundle = privdom.issue_private_cert(log, params, binding, b'campos', t=10)
    return log, binding, cert, bundle


def test_names_are_normalized():
    assert privdom.normalize_domain('Example.COM.') == 'example.com'
    assert privdom.normalize_label(' Secret ') == 'secret'
    assert privdom.hash_label('SECRET') == privdom.hash_label('secret')
    assert privdom.hash_label('secret') < (1 << 160)


@pytest.mark.parametrize('bad', ['', 'con espacio', '-guion', 'a' * 64, 'ñandú', 'a..b'])
def test_invalid_labels(bad):
    with pytest.raises(LabelError):
        privdom.normalize_label(bad)


def test_log_never_sees_the_label(issued):
    log, binding, _, bundle = issued
    for entry, _ in log.entries_snapshot():
        assert b'secret' not in entry.data
    payload = privdom.decode_precert_payload(bundle.data)
    assert payload.domain == 'example.com'
    assert payload.commitment == binding.commitment
    assert payload.cert_fields == b'campos'
    assert binding.fqdn == 'secret.example.com'


def test_visitor_accepts_the_issued_certificate(params, pubkeys, issued):
    _, _, cert, bundle = issued
    assert privdom.visitor_verify(params, pubkeys, cert, bundle)
    restored = privdom.PrivateCertificate.from_json(cert.to_json())
    assert restored == cert
    assert privdom.visitor_verify(params, pubkeys, restored, restored.sct)


def test_visitor_rejects_mismatches(params, pubkeys, issued):
    _, _, cert, bundle = issued
    other_label = privdom.PrivateCertificate(cert.domain, 'admin', cert.randomness, bundle)
    other_domain = privdom.PrivateCertificate('example.org', cert.redacted_label, cert.randomness, bundle)
    other_r = privdom.PrivateCertificate(cert.domain, cert.redacted_label, (cert.randomness + 1) % params.q,
                                         bundle)
    for forged in (other_label, other_domain, other_r):
        assert not privdom.visitor_verify(params, pubkeys, forged, bundle)


def test_certificates_cannot_be_cross_paired(params, pubkeys, make_log):
    log = make_log()
    first = privdom.commit_subdomain(params, 'example.com', 'uno')
    second = privdom.commit_subdomain(params, 'example.com', 'dos')
    cert_1, bundle_1 = privdom.issue_private_cert(log, params, first, t=1)
    cert_2, bundle_2 = privdom.issue_private_cert(log, params, second, t=2)
    assert privdom.visitor_verify(params, pubkeys, cert_2, bundle_2)
    assert not privdom.visitor_verify(params, pubkeys, cert_1, bundle_2)
    assert not privdom.visitor_verify(params, pubkeys, cert_2, bundle_1)


def test_ordinary_sct_is_not_a_private_certificate(params, pubkeys, make_log):
    log = make_log()
    bundle, _, _ = log.submit(b'certificado normal', 1)
    cert = privdom.PrivateCertificate('example.com', 'secret', 1, bundle)
    assert not privdom.visitor_verify(params, pubkeys, cert, bundle)


def test_ca_rejects_bad_commitment(params, make_log):
    binding = privdom.commit_subdomain(params, 'example.com', 'secret')
    wrong = privdom.SubdomainBinding(binding.domain, binding.label,
                                     commit(params, privdom.hash_label('otra'), binding.randomness),
                                     binding.randomness)
    assert privdom.ca_validate_request(params, binding)
    assert not privdom.ca_validate_request(params, wrong)
    log = make_log()
    with pytest.raises(CommitmentError):
        privdom.issue_private_cert(log, params, wrong)
    assert log.tree_size == 0


def test_commitments_to_the_same_label_differ(params):
    first = privdom.commit_subdomain(params, 'example.com', 'secret')
    second = privdom.commit_subdomain(params, 'example.com', 'secret')
    assert first.commitment != second.commitment


def test_small_dictionary_does_not_open_the_commitment(params, issued):
    # Sin r, probar etiquetas candidatas con r = 0 no abre C_d
    _, binding, _, _ = issued
    for guess in ('www', 'mail', 'admin', 'secret', 'dev', 'api'):
        assert commit(params, privdom.hash_label(guess), 0) != binding.commitment


def test_monitor_counts_private_subdomains(params, make_log):
    log = make_log()
    for t, (domain, label) in enumerate([('example.com', 'a'), ('example.com', 'b'), ('example.org', 'c')],
                                        start=1):
        privdom.issue_private_cert(log, params, privdom.commit_subdomain(params, domain, label), t=t)
    log.submit(b'no es un precertificado', 10)
    entries = log.entries_snapshot()
    assert privdom.monitor_count(entries, 'example.com') == 2
    assert privdom.monitor_count([entry for entry, _ in entries], 'EXAMPLE.org') == 1
    assert privdom.monitor_audit(entries, 'example.com', 2).ok
    audit = privdom.monitor_audit(entries, 'example.com', 1)
    assert not audit.ok and audit.observed == 2


@pytest.mark.slow
def test_large_dictionary_without_randomness(params):
    binding = privdom.commit_subdomain(params, 'example.com', 'intranet-2024')
    guesses = [f"{word}{n}" for word in ('intranet-', 'vpn-', 'dev-', 'staging-') for n in range(2000, 2100)]
    for r in range(3):
        for guess in guesses:
            assert commit(params, privdom.hash_label(guess), r) != binding.commitment


def test_random_labels_are_hidden_and_bound(params, rng):
    labels = [f"host-{k}-{rng.getrandbits(32):08x}" for k in range(40)]
    seen = set()
    for k, label in enumerate(labels):
        binding = privdom.commit_subdomain(params, 'example.com', label)
        assert binding.commitment.value not in seen
        seen.add(binding.commitment.value)
        assert label.encode() not in privdom.encode_precert_payload('example.com', binding.commitment)
        assert privdom.ca_validate_request(params, binding)

        other = labels[(k + 1) % len(labels)]
        assert not privdom.ca_validate_request(params, dataclasses.replace(binding, label=other))
        shifted = (binding.randomness + rng.randrange(1, params.q)) % params.q
        assert not privdom.ca_validate_request(params, dataclasses.replace(binding, randomness=shifted))
