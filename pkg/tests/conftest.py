import random

import pytest

import zkexcl
from commitments import params_from_group, setup_params
from ctlog import Log, LogConfig, LogKeys, new_log

TEST_LABEL = b'ctzk-tests'


@pytest.fixture(scope='session')
def toy_group():
    """Grupo de orden 11 dentro de Z_23^*: commit(3, 5) = 6."""
    return params_from_group(23, 11, 4, label=b'toy', h=9, enforce_floor=False)


@pytest.fixture(scope='session')
def params():
    return setup_params((512, 256), TEST_LABEL)


@pytest.fixture(scope='session')
def log_keys():
    return LogKeys.generate(512, toy=True)


@pytest.fixture(scope='session')
def pubkeys(log_keys):
    return log_keys.public()


@pytest.fixture
def make_log(log_keys):
    def factory(mode='sum', clock=None, journal=None, mmd_ms=0):
        config = LogConfig(mmd_ms=mmd_ms, signing_mode=mode)
        return new_log(config, log_keys, clock=clock or (lambda: 0), journal=journal)
    return factory


def fill_log(log, timestamps, drop_at=None):
    """
    Añade una entrada por timestamp; si drop_at coincide con un timestamp,
    ese SCT se emite sin añadirse. Devuelve los SCTs emitidos por T.
    """
    bundles = {}
    for i, t in enumerate(timestamps):
        bundle, _, _ = log.submit(f"cert-{i}".encode(), t, drop=(t == drop_at))
        bundles[t] = bundle
    return bundles


@pytest.fixture(scope='session')
def excluded_case(log_keys):
    """
    Log en modo 'sum' con T = 1000..9000 en el que el SCT con T = 5000 se
    emitió y no se incluyó. Devuelve (log, sct descartado, testigo).
    """
    log = Log(LogConfig(mmd_ms=0), log_keys, clock=lambda: 0)
    bundles = fill_log(log, [1000 * k for k in range(1, 10)], drop_at=5000)
    sct = bundles[5000]
    return log, sct, zkexcl.find_witness(log.entries_snapshot(), sct)


@pytest.fixture(scope='session')
def honest_proof(params, excluded_case):
    log, _, witness = excluded_case
    return zkexcl.build_exclusion_proof(params, log.public_keys(), witness)


@pytest.fixture
def rng():
    return random.Random(20240601)
