"""
Familias de certificados de vida corta.

Un dominio con certificados diarios no añade una entrada al log por día:
agrupa n certificados diarios en un árbol de Merkle y registra una sola
entrada marcada con la raíz y el periodo completo. El navegador recibe el
certificado del día y su camino hasta la raíz registrada.

Carga de la entrada en el log (big-endian):
    versión (1) ‖ marca de familia (1) ‖ raíz (32) ‖ inicio ms (8) ‖ fin ms (8)
"""
import base64
import hashlib
import logging
import struct
from dataclasses import dataclass
from datetime import date, datetime, timezone
from typing import Tuple

import merkle
from errors import FamilyError, WireFormatError

logger = logging.getLogger(__name__)

FAMILY_VERSION = 1
FAMILY_FLAG = 1
DAY_MS = 24 * 60 * 60 * 1000
_PAYLOAD = struct.Struct('!BB32sQQ')
_DAILY_HEADER = struct.Struct('!B32sIQQI')


def day_start_ms(day):
    """
    Medianoche UTC de `day` en ms; acepta date, datetime o ms ya calculados.

    Raises:
        FamilyError: si los ms no caen en una medianoche UTC
    """
    if isinstance(day, int):
        if day < 0 or day % DAY_MS:
            raise FamilyError(f"{day} ms no es una medianoche UTC")
        return day
    if isinstance(day, datetime):
        day = day.astimezone(timezone.utc).date()
    if isinstance(day, date):
        midnight = datetime(day.year, day.month, day.day, tzinfo=timezone.utc)
        return int(midnight.timestamp()) * 1000
    raise FamilyError(f"Día de inicio no reconocido: {day!r}")


@dataclass(frozen=True)
class DailyCertificate:
    family_id: bytes
    day_index: int
    not_before: int
    not_after: int
    base_fields: bytes = b''

    def serialize(self):
        return _DAILY_HEADER.pack(FAMILY_VERSION, self.family_id, self.day_index,
                                  self.not_before, self.not_after, len(self.base_fields)) + self.base_fields

    @classmethod
    def deserialize(cls, data):
        if len(data) < _DAILY_HEADER.size:
            raise WireFormatError("Certificado diario truncado")
        version, family_id, day_index, nb, na, length = _DAILY_HEADER.unpack_from(data)
        fields = data[_DAILY_HEADER.size:]
        if version != FAMILY_VERSION or len(fields) != length:
            raise WireFormatError("Certificado diario malformado")
        return cls(family_id, day_index, nb, na, fields)

    def valid_at(self, now):
        """La ventana es [not_before, not_after)."""
        return self.not_before <= now < self.not_after


@dataclass(frozen=True)
class FamilyLogPayload:
    root: bytes
    start: int
    end: int
    flag: int = FAMILY_FLAG

    def encode(self):
        return _PAYLOAD.pack(FAMILY_VERSION, self.flag, self.root, self.start, self.end)

    def size(self, window_ms=DAY_MS):
        return (self.end - self.start) // window_ms


@dataclass(frozen=True)
class CertFamily:
    base_fields: bytes
    start: int
    window_ms: int
    certificates: Tuple[DailyCertificate, ...]
    root: bytes

    def __len__(self):
        return len(self.certificates)

    @property
    def end(self):
        return self.start + len(self.certificates) * self.window_ms

    def leaves(self):
        return [cert.serialize() for cert in self.certificates]

    def to_dict(self):
        return {'base_fields': base64.b64encode(self.base_fields).decode('ascii'), 'start': self.start,
                'n_days': len(self.certificates), 'window_ms': self.window_ms, 'root': self.root.hex()}

    @classmethod
    def from_dict(cls, data):
        """Reconstruye la familia y comprueba que la raíz coincide."""
        family = build_family(base64.b64decode(data['base_fields']), int(data['start']),
                              int(data['n_days']), int(data.get('window_ms', DAY_MS)))
        if 'root' in data and family.root.hex() != data['root']:
            raise FamilyError("La raíz guardada no coincide con la familia reconstruida")
        return family


def _family_id(base_fields, start, n_days, window_ms):
    return hashlib.sha256(struct.pack('!QIQ', start, n_days, window_ms) + base_fields).digest()


def build_family(base_fields, start_day, n_days, window_ms=DAY_MS):
    """
    n certificados diarios consecutivos y la raíz de su árbol.

    Raises:
        FamilyError: si n_days < 1 o la ventana no es positiva
    """
    if n_days < 1:
        raise FamilyError("Una familia necesita al menos un certificado")
    if window_ms < 1:
        raise FamilyError("La ventana de validez debe ser positiva")
    base_fields = bytes(base_fields)
    start = day_start_ms(start_day)
    family_id = _family_id(base_fields, start, n_days, window_ms)
    certificates = tuple(
        DailyCertificate(family_id, i, start + i * window_ms, start + (i + 1) * window_ms, base_fields)
        for i in range(n_days)
    )
    root = merkle.root([cert.serialize() for cert in certificates])
    logger.info(f"🗓️ Familia de {n_days} certificados desde {start} ms, raíz {root.hex()[:16]}…")
    return CertFamily(base_fields, start, window_ms, certificates, root)


def family_log_payload(family):
    return FamilyLogPayload(family.root, family.start, family.end)


def decode_family_payload(data):
    if len(data) != _PAYLOAD.size:
        raise WireFormatError(f"Carga de familia de {len(data)} bytes (se esperaban {_PAYLOAD.size})")
    version, flag, root, start, end = _PAYLOAD.unpack(data)
    if version != FAMILY_VERSION or flag != FAMILY_FLAG:
        raise WireFormatError("La entrada no está marcada como familia de vida corta")
    if end <= start:
        raise WireFormatError("Periodo de familia vacío")
    return FamilyLogPayload(root, start, end, flag)


def is_family_payload(data):
    """Comprobación de la marca, la que usan los monitores al recorrer el log."""
    try:
        decode_family_payload(bytes(data))
    except WireFormatError:
        return False
    return True


def submit_family(log, family, t=None):
    """Una sola entrada en el log por familia, sea cual sea n."""
    bundle, entry, _ = log.submit(family_log_payload(family).encode(), t)
    logger.info(f"Familia de {len(family)} días registrada en la entrada {entry.index}")
    return bundle, entry


def prove_member(family, day_index):
    """
    Camino de Merkle del certificado `day_index` hasta la raíz.

    Raises:
        FamilyError: si el índice no pertenece a la familia
    """
    if not 0 <= day_index < len(family):
        raise FamilyError(f"Día {day_index} fuera de una familia de {len(family)}")
    hashes = [merkle.leaf_hash(leaf) for leaf in family.leaves()]
    return merkle.audit_path(hashes, day_index)


def verify_member(payload, daily_cert, path, now, window_ms=DAY_MS):
    """
    Acepta si el camino lleva del certificado a la raíz registrada y `now`
    cae dentro de la ventana diaria del certificado.
    """
    if isinstance(payload, (bytes, bytearray)):
        try:
            payload = decode_family_payload(bytes(payload))
        except WireFormatError:
            return False
    if payload.flag != FAMILY_FLAG:
        return False
    if not payload.start <= daily_cert.not_before < daily_cert.not_after <= payload.end:
        return False
    if daily_cert.not_after - daily_cert.not_before != window_ms:
        return False
    if daily_cert.not_before != payload.start + daily_cert.day_index * window_ms:
        return False
    if not daily_cert.valid_at(now):
        return False
    size = payload.size(window_ms)
    leaf = merkle.leaf_hash(daily_cert.serialize())
    return merkle.verify_path(leaf, daily_cert.day_index, size, list(path), payload.root)
