"""
Cliente del log CT para auditores y monitores.

El auditor pide los vecinos de un timestamp para construir una prueba de
exclusión; si el log se niega, hace búsqueda binaria con get-entries por
índice, la misma petición que usa un monitor en su barrido, de modo que el
log no puede distinguir a uno del otro.
"""
import base64
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import List, Optional

import httpx

import ctlog
import merkle
import zkexcl
from errors import RefusedError, ServiceError, UnavailableError

logger = logging.getLogger(__name__)

SWEEP_BATCH = 256


def parse_record(record):
    """(LogEntry, EntrySignatures) desde un registro JSON del servicio."""
    sct = record['sct']
    entry = ctlog.LogEntry(base64.b64decode(sct['data']), int(record['index']), int(sct['timestamp']))
    return entry, ctlog.EntrySignatures.from_dict(record['signatures'])


class CTLogClient:
    """
    Cliente httpx del servicio. Cuenta las peticiones totales y por endpoint.
    """

    def __init__(self, base_url, timeout=30.0, transport=None):
        self.base_url = base_url.rstrip('/')
        self._http = httpx.Client(base_url=self.base_url, timeout=timeout, transport=transport)
        self.requests_by_endpoint = Counter()

    @property
    def request_count(self):
        return sum(self.requests_by_endpoint.values())

    def close(self):
        self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _request(self, method, endpoint, **kwargs):
        self.requests_by_endpoint[endpoint] += 1
        try:
            response = self._http.request(method, f'/ct/v1/{endpoint}', **kwargs)
        except httpx.HTTPError as e:
            raise ServiceError(f"No se pudo contactar con el log en {self.base_url}: {e}") from e
        if response.status_code == 403:
            raise RefusedError(f"El log rechaza {endpoint}", response.status_code)
        if response.status_code == 404:
            raise UnavailableError(f"El log no entrega {endpoint}", response.status_code)
        if response.status_code >= 400:
            try:
                detail = response.json().get('error', response.text)
            except ValueError:
                detail = response.text
            raise ServiceError(f"{endpoint}: {detail}", response.status_code)
        return response.json()

    def add_entry(self, data, timestamp=None):
        """Devuelve (índice, SctBundle)."""
        body = {'data': base64.b64encode(data).decode('ascii')}
        if timestamp is not None:
            body['timestamp'] = timestamp
        result = self._request('POST', 'add-entry', json=body)
        return int(result['index']), ctlog.SctBundle.from_b64(result['sct'])

    def get_sth(self):
        return ctlog.SignedTreeHead.from_dict(self._request('GET', 'get-sth'))

    def get_public_keys(self):
        """Devuelve (LogPublicKeys, signing_mode, hash_width, mmd_ms)."""
        result = self._request('GET', 'get-public-keys')
        return (ctlog.LogPublicKeys.from_dict(result['public_keys']), result['signing_mode'],
                int(result['hash_width']), int(result['mmd_ms']))

    def get_entries(self, start, end):
        """Entradas [start, end] con sus firmas; el log puede devolver menos."""
        result = self._request('GET', 'get-entries', params={'start': start, 'end': end})
        entries = []
        for record in result['entries']:
            entry, sigs = parse_record(record)
            leaf = base64.b64decode(record.get('leaf_input', ''))
            entries.append((entry, sigs, leaf))
        return entries

    def get_proof_by_hash(self, leaf_hash, tree_size):
        """Devuelve (índice de la hoja, camino de auditoría)."""
        result = self._request('GET', 'get-proof-by-hash', params={
            'hash': base64.b64encode(leaf_hash).decode('ascii'), 'tree_size': tree_size})
        return int(result['leaf_index']), [base64.b64decode(node) for node in result['audit_path']]

    def get_entries_around_timestamp(self, timestamp, count=2):
        result = self._request('GET', 'get-entries-around-timestamp',
                               params={'timestamp': timestamp, 'count': count})
        return [parse_record(record) for record in result['entries']]


class RemoteLogWriter:
    """
    Adaptador con la misma firma de submit que ctlog.Log, para emitir
    subdominios privados o familias contra un log remoto.
    """

    def __init__(self, client):
        self.client = client

    def submit(self, data, t=None):
        index, bundle = self.client.add_entry(data, t)
        return bundle, ctlog.LogEntry(bytes(data), index, bundle.timestamp), None


# ====================
# Auditor: vecinos de un timestamp
# ====================

def _straddling_pair(pairs, t_y):
    for x, z in zip(pairs, pairs[1:]):
        if x[0].timestamp < t_y < z[0].timestamp and z[0].index == x[0].index + 1:
            return x, z
    return None


def _entry_at(client, index):
    fetched = client.get_entries(index, index)
    if not fetched or fetched[0][0].index != index:
        raise UnavailableError(f"El log no entrega la entrada {index}")
    return fetched[0]


def binary_search_neighbors(client, t_y, tree_size=None):
    """
    Búsqueda binaria con get-entries de una sola entrada: el menor índice j
    con T_j > t_y, y después el par (j-1, j) en una petición.
    """
    if tree_size is None:
        tree_size = client.get_sth().tree_size
    lo, hi = 0, tree_size
    while lo < hi:
        mid = (lo + hi) // 2
        entry, _, _ = _entry_at(client, mid)
        if entry.timestamp > t_y:
            hi = mid
        else:
            lo = mid + 1
    if lo == 0 or lo == tree_size:
        raise UnavailableError(f"T={t_y} queda fuera del rango de timestamps del log")
    pair = [(entry, sigs) for entry, sigs, _ in client.get_entries(lo - 1, lo)]
    found = _straddling_pair(pair, t_y)
    if found is None:
        raise UnavailableError(f"El log no tiene entradas adyacentes alrededor de T={t_y}")
    return found


def fetch_neighbors(client, t_y, tree_size=None):
    """
    Par adyacente (x, z) con T_x < t_y < T_z, cada uno (LogEntry, EntrySignatures).

    Raises:
        UnavailableError: si no hay par (t_y fuera de rango, SCT incluido o
            entradas que el log no entrega)
        ServiceError: si el log no responde
    """
    try:
        records = client.get_entries_around_timestamp(t_y, 2)
    except RefusedError:
        logger.warning("⚠️ El log rechaza las consultas por timestamp: búsqueda binaria por índice")
        return binary_search_neighbors(client, t_y, tree_size)
    found = _straddling_pair(records, t_y)
    if found is None:
        raise UnavailableError(f"El log no devuelve un par adyacente alrededor de T={t_y}")
    return found


def query_budget(tree_size):
    """Peticiones get-entries que puede costar la búsqueda binaria."""
    return math.ceil(math.log2(max(tree_size, 2))) + 3


def exclusion_witness(client, sct, enforce_mmd=True):
    """
    Testigo para una prueba de exclusión a partir del log remoto. Con
    enforce_mmd se adjunta el STH actual para que el prover exija que el MMD
    del SCT haya vencido.
    """
    sth = client.get_sth()
    x, z = fetch_neighbors(client, sct.timestamp, sth.tree_size)
    if not enforce_mmd:
        return zkexcl.ProverWitness(sct, x, z)
    _, _, _, mmd_ms = client.get_public_keys()
    return zkexcl.ProverWitness(sct, x, z, sth, mmd_ms)


# ====================
# Monitor: barrido completo
# ====================

@dataclass
class SweepReport:
    tree_size: int = 0
    checked: int = 0
    sth_valid: bool = True
    root_matches: Optional[bool] = None
    unavailable: List[int] = field(default_factory=list)
    violations: List[ctlog.Violation] = field(default_factory=list)

    @property
    def clean(self):
        return self.sth_valid and self.root_matches is not False and not self.unavailable \
            and not self.violations

    def to_dict(self):
        return {
            'tree_size': self.tree_size,
            'checked': self.checked,
            'sth_valid': self.sth_valid,
            'root_matches': self.root_matches,
            'unavailable': self.unavailable,
            'violations': [{'kind': v.kind, 'index': v.index, 'detail': v.detail} for v in self.violations],
            'clean': self.clean,
        }


def monitor_sweep(client, pubkeys=None, mode=None, width=None, batch=SWEEP_BATCH):
    """
    Descarga las entradas 0..size-1, comprueba buena formación, firmas
    laterales, hojas y raíz. Los hallazgos forman parte del informe.
    """
    if pubkeys is None or mode is None or width is None:
        remote_keys, remote_mode, remote_width, _ = client.get_public_keys()
        pubkeys = pubkeys or remote_keys
        mode = mode or remote_mode
        width = width or remote_width
    sth = client.get_sth()
    report = SweepReport(tree_size=sth.tree_size, sth_valid=sth.verify(pubkeys))
    if not report.sth_valid:
        report.violations.append(ctlog.Violation('sth-signature', sth.tree_size, "firma del STH inválida"))

    fetched = {}
    for start in range(0, sth.tree_size, batch):
        end = min(start + batch, sth.tree_size) - 1
        for entry, sigs, leaf in client.get_entries(start, end):
            if start <= entry.index <= end:
                fetched[entry.index] = (entry, sigs, leaf)
    report.unavailable = [i for i in range(sth.tree_size) if i not in fetched]

    ordered = [fetched[i] for i in sorted(fetched)]
    report.checked = len(ordered)
    report.violations.extend(
        v for v in ctlog.check_well_formed(entry for entry, _, _ in ordered).violations
        if v.kind != 'index-gap' or not report.unavailable)
    for entry, sigs, leaf in ordered:
        failures = ctlog.entry_signature_failures(pubkeys, entry, sigs, mode, width)
        if failures:
            report.violations.append(ctlog.Violation('signature', entry.index, ', '.join(failures)))
        if leaf and leaf != entry.leaf_input():
            report.violations.append(ctlog.Violation('leaf-input', entry.index, "leaf_input no coincide"))

    if not report.unavailable:
        report.root_matches = merkle.root([entry.leaf_input() for entry, _, _ in ordered]) == sth.root_hash
        if not report.root_matches:
            report.violations.append(ctlog.Violation('root', sth.tree_size, "la raíz no coincide con el STH"))

    if report.clean:
        logger.info(f"✅ Barrido limpio: {report.checked} entradas")
    else:
        logger.warning(f"⚠️ Barrido con hallazgos: {len(report.unavailable)} entradas no disponibles, "
                       f"{len(report.violations)} violaciones")
    return report
