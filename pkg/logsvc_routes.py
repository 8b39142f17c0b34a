"""
Rutas HTTP del log CT.

Endpoints RFC6962 (add-entry, get-sth, get-entries, get-proof-by-hash) más
el endpoint nuevo get-entries-around-timestamp, que devuelve las entradas
vecinas de un timestamp con sus firmas laterales para construir pruebas de
exclusión. También se publica get-public-keys para distribuir k_H, k_T, k_I
y k_S.

El servidor puede comportarse mal a propósito (ServerMode) para ejercitar
al auditor y al monitor:
    honest                     responde a todo
    omit-entry(k)              emite el SCT del envío k y no lo añade
    refuse-timestamp-queries   responde 403 al endpoint de timestamps
    dummy-sandwich(k)          omite el envío k, lo rodea de dos entradas
                               de relleno y se niega a servirlas
"""
import base64
import bisect
import logging
import threading
from dataclasses import dataclass
from typing import Optional

from flask import Blueprint, current_app, jsonify, request

from errors import EntryNotFoundError, ParameterError

logger = logging.getLogger(__name__)

SERVER_MODES = ('honest', 'omit-entry', 'refuse-timestamp-queries', 'dummy-sandwich')
MAX_ENTRIES_PER_REQUEST = 1000
MAX_NEIGHBORS = 64
EXTENSION_KEY = 'ctzk_log_service'
DUMMY_DATA = b'\x00dummy'


@dataclass(frozen=True)
class ServerMode:
    kind: str = 'honest'
    k: Optional[int] = None

    def __post_init__(self):
        if self.kind not in SERVER_MODES:
            raise ParameterError(f"Modo de servidor desconocido: {self.kind}")
        needs_k = self.kind in ('omit-entry', 'dummy-sandwich')
        if needs_k and (self.k is None or self.k < 0):
            raise ParameterError(f"El modo {self.kind} necesita un envío k ≥ 0")

    @classmethod
    def parse(cls, text):
        """'honest', 'refuse-timestamp-queries', 'omit-entry:5', 'dummy-sandwich:5'."""
        kind, _, k = (text or 'honest').partition(':')
        return cls(kind, int(k) if k else None)

    def __str__(self):
        return self.kind if self.k is None else f"{self.kind}:{self.k}"


class LogService:
    """Estado del servidor: el log, el modo y lo que el modo esconde."""

    def __init__(self, log, mode=None):
        self.log = log
        self.mode = mode or ServerMode()
        self.submissions = 0
        self.withheld = set()
        self.omitted = []
        self._lock = threading.Lock()

    def add_entry(self, data, timestamp=None):
        with self._lock:
            number = self.submissions
            self.submissions += 1
            if self.mode.kind == 'omit-entry' and number == self.mode.k:
                bundle, entry, _ = self.log.submit(data, timestamp, drop=True)
                self.omitted.append(bundle.timestamp)
                return bundle, entry
            if self.mode.kind == 'dummy-sandwich' and number == self.mode.k:
                return self._sandwich(data, timestamp)
            bundle, entry, _ = self.log.submit(data, timestamp)
            return bundle, entry

    def _sandwich(self, data, timestamp):
        t = timestamp if timestamp is not None else max(self.log.clock(), self.log.last_timestamp + 2)
        _, before, _ = self.log.submit(DUMMY_DATA, t - 1)
        bundle, entry, _ = self.log.submit(data, t, drop=True)
        _, after, _ = self.log.submit(DUMMY_DATA, t + 1)
        self.withheld.update((before.index, after.index))
        self.omitted.append(t)
        logger.warning(f"⚠️ Envío con T={t} omitido entre las entradas de relleno "
                       f"{before.index} y {after.index}")
        return bundle, entry

    def visible(self, index):
        return index not in self.withheld


def get_service():
    return current_app.extensions[EXTENSION_KEY]


def _b64(data):
    return base64.b64encode(data).decode('ascii')


def entry_record(entry, sigs, include_leaf=False):
    """Registro de una entrada: índice, (data, T) y las tres firmas laterales."""
    record = {
        'index': entry.index,
        'sct': {'timestamp': entry.timestamp, 'data': _b64(entry.data)},
        'signatures': sigs.to_dict(),
    }
    if include_leaf:
        record['leaf_input'] = _b64(entry.leaf_input())
    return record


def neighborhood(timestamps, t, count):
    """
    Posiciones de la respuesta: los ⌊count/2⌋ mayores timestamps ≤ t y los
    count − ⌊count/2⌋ menores > t. Si un lado no tiene bastantes entradas
    se devuelven menos.
    """
    below = count // 2
    above = count - below
    pos = bisect.bisect_right(timestamps, t)
    return list(range(max(0, pos - below), min(len(timestamps), pos + above)))


def _int_arg(name, default=None):
    raw = request.args.get(name)
    if raw is None:
        if default is None:
            raise ValueError(f"Falta el parámetro '{name}'")
        return default
    return int(raw)


def _bad_request(message):
    return jsonify({'success': False, 'error': message}), 400


logsvc_bp = Blueprint('logsvc', __name__, url_prefix='/ct/v1')


@logsvc_bp.route('/add-entry', methods=['POST'])
def add_entry():
    """
    Registra datos opacos y devuelve el SCT.

    POST /ct/v1/add-entry  {"data": base64, "timestamp": int opcional}
    """
    try:
        body = request.get_json(silent=True) or {}
        if 'data' not in body:
            return _bad_request("Falta 'data'")
        data = base64.b64decode(body['data'], validate=True)
        timestamp = body.get('timestamp')
        bundle, entry = get_service().add_entry(data, None if timestamp is None else int(timestamp))
        return jsonify({'success': True, 'index': entry.index, 'sct': bundle.to_b64()})
    except (ValueError, TypeError) as e:
        # LogError y OrderingError derivan de ValueError
        logger.warning(f"❌ add-entry rechazado: {e}")
        return _bad_request(str(e))
    except Exception as e:
        logger.error(f"Error en add-entry: {e}", exc_info=True)
        return jsonify({'success': False, 'error': 'Error interno'}), 500


@logsvc_bp.route('/get-sth', methods=['GET'])
def get_sth():
    """
    Cabeza de árbol firmada.

    GET /ct/v1/get-sth
    """
    sth = get_service().log.tree_head()
    return jsonify(sth.to_dict())


@logsvc_bp.route('/get-public-keys', methods=['GET'])
def get_public_keys():
    """
    Claves públicas k_H, k_T, k_I (CL) y k_S (Ed25519) del log.

    GET /ct/v1/get-public-keys
    """
    service = get_service()
    return jsonify({'public_keys': service.log.public_keys().to_dict(),
                    'signing_mode': service.log.mode,
                    'hash_width': service.log.config.hash_width,
                    'mmd_ms': service.log.config.mmd_ms})


@logsvc_bp.route('/get-entries', methods=['GET'])
def get_entries():
    """
    Entradas del rango [start, end], ambos incluidos como en RFC6962.

    GET /ct/v1/get-entries?start=&end=
    """
    try:
        start, end = _int_arg('start'), _int_arg('end')
    except ValueError as e:
        return _bad_request(str(e))
    if start < 0 or end < start:
        return _bad_request("Rango inválido")
    service = get_service()
    end = min(end, start + MAX_ENTRIES_PER_REQUEST - 1)
    records = [entry_record(entry, sigs, include_leaf=True)
               for entry, sigs in service.log.entries_snapshot(start, end + 1)
               if service.visible(entry.index)]
    return jsonify({'entries': records})


@logsvc_bp.route('/get-proof-by-hash', methods=['GET'])
def get_proof_by_hash():
    """
    Camino de auditoría de la hoja con ese hash.

    GET /ct/v1/get-proof-by-hash?hash=<base64>&tree_size=
    """
    try:
        leaf_hash = base64.b64decode(request.args.get('hash', ''), validate=True)
        service = get_service()
        tree_size = _int_arg('tree_size', service.log.tree_size)
    except ValueError as e:
        return _bad_request(str(e))
    index = service.log.find_by_leaf_hash(leaf_hash)
    if index is None or index >= tree_size or not service.visible(index):
        return jsonify({'success': False, 'error': 'Hoja no encontrada'}), 404
    try:
        path = service.log.prove_inclusion(index, tree_size)
    except EntryNotFoundError as e:
        return _bad_request(str(e))
    return jsonify({'leaf_index': index, 'audit_path': [_b64(node) for node in path]})


@logsvc_bp.route('/get-entries-around-timestamp', methods=['GET'])
def get_entries_around_timestamp():
    """
    Entradas vecinas de un timestamp, con σ_H, σ_I y σ_T.

    GET /ct/v1/get-entries-around-timestamp?timestamp=&count=
    """
    service = get_service()
    if service.mode.kind == 'refuse-timestamp-queries':
        logger.info("Consulta por timestamp rechazada (modo no cooperativo)")
        return jsonify({'success': False, 'error': 'refused'}), 403
    try:
        t, count = _int_arg('timestamp'), _int_arg('count', 2)
    except ValueError as e:
        return _bad_request(str(e))
    if not 1 <= count <= MAX_NEIGHBORS:
        return _bad_request(f"count debe estar entre 1 y {MAX_NEIGHBORS}")
    snapshot = service.log.entries_snapshot()
    positions = neighborhood([entry.timestamp for entry, _ in snapshot], t, count)
    records = [entry_record(*snapshot[p]) for p in positions if service.visible(snapshot[p][0].index)]
    return jsonify({'entries': records})

