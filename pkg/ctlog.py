"""
Log de Certificate Transparency modificado.

Además de la lista de entradas y el árbol de Merkle, el log mantiene tres
listas laterales de firmas CL por entrada e = (data, I, T):

    σ_H = Sign_kH(H(e))      σ_T = Sign_kT(T + H(e))      σ_I = Sign_kI(I + H(e))

Cada SCT (data, T) lleva como extensiones σ_{T+H(s)} y σ_{H(s)}, y la firma
k_S del SCT cubre ambas. Con estas firmas un prover puede demostrar en
conocimiento cero que un SCT no fue incluido (ver zkexcl).

En modo 'concat' las sumas se sustituyen por la concatenación
v·2^W + H (W = ancho del hash), que es la variante Π′.
"""
import base64
import hashlib
import logging
import struct
import threading
import time
from dataclasses import dataclass, field
from typing import List, Optional

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey, Ed25519PublicKey

import clsig
import merkle
from commitments import HASH_WIDTH
from errors import EntryNotFoundError, LogError, OrderingError, ParameterError
from wire import KIND_ENTRY_SIGNATURES, KIND_SCT_BUNDLE, WireReader, WireWriter

logger = logging.getLogger(__name__)

ENTRY_VERSION = 1
SIGNING_MODES = ('sum', 'concat')
DEFAULT_MMD_MS = 24 * 60 * 60 * 1000
MAX_U64 = (1 << 64) - 1


def hash_entry(data, width=HASH_WIDTH):
    """SHA-256 truncado a los primeros `width` bits, como entero big-endian."""
    digest = int.from_bytes(hashlib.sha256(data).digest(), 'big')
    return digest >> (256 - width)


def signed_value(mode, value, h, width=HASH_WIDTH):
    """
    Mensaje CL para v y H: v + H en modo 'sum', v·2^W + H en modo 'concat'.

    Ambos son sumas sobre los enteros, sin reducción modular.
    """
    if not 0 <= h < (1 << width):
        raise ParameterError(f"Hash fuera de {width} bits")
    if mode == 'sum':
        return value + h
    if mode == 'concat':
        return (value << width) + h
    raise ParameterError(f"Modo de firma desconocido: {mode}")


def _now_ms():
    return int(time.time() * 1000)


# ====================
# Tipos del log
# ====================

@dataclass(frozen=True)
class LogEntry:
    data: bytes
    index: int
    timestamp: int

    def serialize(self):
        """Serialización canónica de (m, i, t): entrada de H(e)."""
        return struct.pack('!BQQI', ENTRY_VERSION, self.index, self.timestamp, len(self.data)) + self.data

    def leaf_input(self):
        """Hoja RFC6962: la posición I la da el árbol, no se incluye."""
        return struct.pack('!BQI', ENTRY_VERSION, self.timestamp, len(self.data)) + self.data

    def hash_scalar(self, width=HASH_WIDTH):
        return hash_entry(self.serialize(), width)

    def to_dict(self):
        return {'index': self.index, 'timestamp': self.timestamp,
                'data': base64.b64encode(self.data).decode('ascii')}

    @classmethod
    def from_dict(cls, data):
        return cls(base64.b64decode(data['data']), int(data['index']), int(data['timestamp']))


@dataclass(frozen=True)
class EntrySignatures:
    sigma_h: clsig.CLSignature
    sigma_t: clsig.CLSignature
    sigma_i: clsig.CLSignature

    def encode(self):
        writer = WireWriter(KIND_ENTRY_SIGNATURES)
        for sig in (self.sigma_h, self.sigma_t, self.sigma_i):
            sig.write_to(writer)
        return writer.getvalue()

    @classmethod
    def decode(cls, data):
        reader = WireReader(data, KIND_ENTRY_SIGNATURES)
        sigs = cls(*(clsig.CLSignature.read_from(reader) for _ in range(3)))
        reader.expect_end()
        return sigs

    def to_dict(self):
        return {name: base64.b64encode(getattr(self, name).encode()).decode('ascii')
                for name in ('sigma_h', 'sigma_i', 'sigma_t')}

    @classmethod
    def from_dict(cls, data):
        return cls(*(clsig.CLSignature.decode(base64.b64decode(data[name]))
                     for name in ('sigma_h', 'sigma_t', 'sigma_i')))


@dataclass(frozen=True)
class SctBundle:
    """SCT (data, T) con su frontend_id, las firmas de extensión y la firma k_S."""
    data: bytes
    timestamp: int
    frontend_id: int
    sigma_th: clsig.CLSignature
    sigma_h: clsig.CLSignature
    signature: bytes

    def core_bytes(self):
        return struct.pack('!BQHI', ENTRY_VERSION, self.timestamp, self.frontend_id, len(self.data)) + self.data

    def hash_scalar(self, width=HASH_WIDTH):
        return hash_entry(self.core_bytes(), width)

    @property
    def ordering_key(self):
        return self.timestamp, self.frontend_id

    def signed_bytes(self):
        return sct_signed_bytes(self.core_bytes(), self.sigma_th, self.sigma_h)

    def encode(self):
        writer = WireWriter(KIND_SCT_BUNDLE)
        writer.write_u64(self.timestamp).write_u16(self.frontend_id).write_bytes(self.data)
        self.sigma_th.write_to(writer)
        self.sigma_h.write_to(writer)
        writer.write_bytes(self.signature)
        return writer.getvalue()

    @classmethod
    def decode(cls, data):
        reader = WireReader(data, KIND_SCT_BUNDLE)
        timestamp = reader.read_u64()
        frontend_id = reader.read_u16()
        payload = reader.read_bytes()
        sigma_th = clsig.CLSignature.read_from(reader)
        sigma_h = clsig.CLSignature.read_from(reader)
        signature = reader.read_bytes()
        reader.expect_end()
        return cls(payload, timestamp, frontend_id, sigma_th, sigma_h, signature)

    def to_b64(self):
        return base64.b64encode(self.encode()).decode('ascii')

    @classmethod
    def from_b64(cls, text):
        return cls.decode(base64.b64decode(text))


def sct_signed_bytes(core, sigma_th, sigma_h):
    writer = WireWriter()
    writer.write_bytes(core).write_bytes(sigma_th.encode()).write_bytes(sigma_h.encode())
    return writer.getvalue()


@dataclass(frozen=True)
class CLKeyPair:
    public: clsig.CLPublicKey
    secret: clsig.CLSecretKey

    @classmethod
    def generate(cls, modulus_bits, toy=False):
        return cls(*clsig.keygen(modulus_bits, toy=toy))

    def sign(self, m):
        return clsig.sign(self.secret, self.public, m)

    def to_dict(self):
        return {'public': self.public.to_dict(), 'secret': self.secret.to_dict()}

    @classmethod
    def from_dict(cls, data):
        return cls(clsig.CLPublicKey.from_dict(data['public']), clsig.CLSecretKey.from_dict(data['secret']))


@dataclass(frozen=True)
class LogPublicKeys:
    """Lo que el log publica para verificar SCTs, STHs y pruebas de exclusión."""
    hash_key: clsig.CLPublicKey
    timestamp_key: clsig.CLPublicKey
    index_key: clsig.CLPublicKey
    sct_key: bytes

    def verify_sct_signature(self, signature, message):
        try:
            Ed25519PublicKey.from_public_bytes(self.sct_key).verify(signature, message)
            return True
        except (InvalidSignature, ValueError):
            return False

    def to_dict(self):
        return {'hash_key': self.hash_key.to_dict(), 'timestamp_key': self.timestamp_key.to_dict(),
                'index_key': self.index_key.to_dict(), 'sct_key': self.sct_key.hex()}

    @classmethod
    def from_dict(cls, data):
        return cls(clsig.CLPublicKey.from_dict(data['hash_key']),
                   clsig.CLPublicKey.from_dict(data['timestamp_key']),
                   clsig.CLPublicKey.from_dict(data['index_key']),
                   bytes.fromhex(data['sct_key']))


@dataclass(frozen=True)
class LogKeys:
    """k_H, k_T, k_I (CL) y k_S (Ed25519)."""
    hash_key: CLKeyPair
    timestamp_key: CLKeyPair
    index_key: CLKeyPair
    sct_key: Ed25519PrivateKey

    def __post_init__(self):
        moduli = {self.hash_key.public.n, self.timestamp_key.public.n, self.index_key.public.n}
        if len(moduli) != 3:
            raise ParameterError("k_H, k_T y k_I deben ser claves distintas")

    @classmethod
    def generate(cls, modulus_bits=clsig.PRODUCTION_MODULUS_BITS, toy=False):
        logger.info(f"🔑 Generando claves del log ({modulus_bits} bits)")
        return cls(CLKeyPair.generate(modulus_bits, toy), CLKeyPair.generate(modulus_bits, toy),
                   CLKeyPair.generate(modulus_bits, toy), Ed25519PrivateKey.generate())

    def public(self):
        raw = self.sct_key.public_key().public_bytes(
            encoding=serialization.Encoding.Raw,
            format=serialization.PublicFormat.Raw,
        )
        return LogPublicKeys(self.hash_key.public, self.timestamp_key.public, self.index_key.public, raw)

    def to_dict(self):
        raw = self.sct_key.private_bytes(
            encoding=serialization.Encoding.Raw,
            format=serialization.PrivateFormat.Raw,
            encryption_algorithm=serialization.NoEncryption(),
        )
        return {'hash_key': self.hash_key.to_dict(), 'timestamp_key': self.timestamp_key.to_dict(),
                'index_key': self.index_key.to_dict(), 'sct_key': raw.hex()}

    @classmethod
    def from_dict(cls, data):
        return cls(CLKeyPair.from_dict(data['hash_key']), CLKeyPair.from_dict(data['timestamp_key']),
                   CLKeyPair.from_dict(data['index_key']),
                   Ed25519PrivateKey.from_private_bytes(bytes.fromhex(data['sct_key'])))


@dataclass(frozen=True)
class LogConfig:
    mmd_ms: int = DEFAULT_MMD_MS
    frontend_id: int = 0
    security_parameter: int = 128
    hash_width: int = HASH_WIDTH
    signing_mode: str = 'sum'

    def __post_init__(self):
        if not 0 <= self.frontend_id < (1 << 16):
            raise ParameterError("frontend_id debe caber en 16 bits")
        if self.signing_mode not in SIGNING_MODES:
            raise ParameterError(f"Modo de firma desconocido: {self.signing_mode}")
        if self.mmd_ms < 0:
            raise ParameterError("El MMD no puede ser negativo")

    def to_dict(self):
        return {'mmd_ms': self.mmd_ms, 'frontend_id': self.frontend_id,
                'security_parameter': self.security_parameter, 'hash_width': self.hash_width,
                'signing_mode': self.signing_mode}

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


@dataclass(frozen=True)
class SignedTreeHead:
    tree_size: int
    root_hash: bytes
    timestamp: int
    signature: bytes

    def signed_bytes(self):
        return tree_head_bytes(self.tree_size, self.timestamp, self.root_hash)

    def verify(self, pubkeys):
        return pubkeys.verify_sct_signature(self.signature, self.signed_bytes())

    def encode(self):
        writer = WireWriter()
        writer.write_u64(self.tree_size).write_u64(self.timestamp)
        writer.write_bytes(self.root_hash).write_bytes(self.signature)
        return writer.getvalue()

    @classmethod
    def decode(cls, data):
        reader = WireReader(data)
        size, timestamp = reader.read_u64(), reader.read_u64()
        root_hash, signature = reader.read_bytes(), reader.read_bytes()
        reader.expect_end()
        return cls(size, root_hash, timestamp, signature)

    def to_dict(self):
        return {
            'tree_size': self.tree_size,
            'timestamp': self.timestamp,
            'sha256_root_hash': base64.b64encode(self.root_hash).decode('ascii'),
            'tree_head_signature': base64.b64encode(self.signature).decode('ascii'),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(int(data['tree_size']), base64.b64decode(data['sha256_root_hash']),
                   int(data['timestamp']), base64.b64decode(data['tree_head_signature']))


def tree_head_bytes(tree_size, timestamp, root_hash):
    return struct.pack('!BQQ', ENTRY_VERSION, tree_size, timestamp) + root_hash


# ====================
# Buena formación
# ====================

@dataclass(frozen=True)
class Violation:
    kind: str
    index: int
    detail: str


@dataclass
class WellFormedReport:
    checked: int = 0
    violations: List[Violation] = field(default_factory=list)

    @property
    def clean(self):
        return not self.violations


def check_well_formed(entries):
    """
    Revisa que los índices empiecen en 0 y crezcan de uno en uno, y que los
    timestamps sean estrictamente crecientes con el índice.
    """
    entries = list(entries)
    report = WellFormedReport(checked=len(entries))
    if entries and entries[0].index != 0:
        report.violations.append(Violation('index-start', 0, f"el primer índice es {entries[0].index}"))
    for position in range(1, len(entries)):
        prev, cur = entries[position - 1], entries[position]
        if cur.index != prev.index + 1:
            report.violations.append(
                Violation('index-gap', position, f"{prev.index} seguido de {cur.index}"))
        if cur.timestamp <= prev.timestamp:
            report.violations.append(
                Violation('timestamp-order', position, f"T={cur.timestamp} tras T={prev.timestamp}"))
    return report


def entry_signature_failures(pubkeys, entry, sigs, mode='sum', width=HASH_WIDTH):
    """Nombres de las firmas laterales que no verifican para la entrada."""
    h = entry.hash_scalar(width)
    checks = (
        ('sigma_h', pubkeys.hash_key, h, sigs.sigma_h),
        ('sigma_t', pubkeys.timestamp_key, signed_value(mode, entry.timestamp, h, width), sigs.sigma_t),
        ('sigma_i', pubkeys.index_key, signed_value(mode, entry.index, h, width), sigs.sigma_i),
    )
    return [name for name, pk, m, sig in checks if not clsig.verify(pk, m, sig)]


def verify_entry_signatures(pubkeys, entry, sigs, mode='sum', width=HASH_WIDTH):
    return not entry_signature_failures(pubkeys, entry, sigs, mode, width)


def verify_sct(pubkeys, bundle, mode='sum', width=HASH_WIDTH):
    """Firma k_S sobre el SCT y las dos firmas de extensión."""
    if not pubkeys.verify_sct_signature(bundle.signature, bundle.signed_bytes()):
        return False
    h = bundle.hash_scalar(width)
    return (clsig.verify(pubkeys.timestamp_key, signed_value(mode, bundle.timestamp, h, width), bundle.sigma_th)
            and clsig.verify(pubkeys.hash_key, h, bundle.sigma_h))


def verify_inclusion(sth, leaf_bytes, index, path):
    return merkle.verify_path(merkle.leaf_hash(leaf_bytes), index, sth.tree_size, path, sth.root_hash)


def entry_signature_growth(sigs):
    """Bytes que añaden las tres firmas laterales a una entrada."""
    return sum(len(sig.encode()) for sig in (sigs.sigma_h, sigs.sigma_t, sigs.sigma_i))


def sct_signature_growth(bundle, include_hash_signature=False):
    """Bytes que añade σ_{T+H(s)} al SCT (y σ_{H(s)} si se pide)."""
    growth = len(bundle.sigma_th.encode())
    if include_hash_signature:
        growth += len(bundle.sigma_h.encode())
    return growth


# ====================
# Log
# ====================

def new_log(config, keys, clock=None, journal=None):
    """
    Log vacío (o reconstruido desde el journal) tras comprobar que las claves
    CL admiten el mayor valor firmado en el modo configurado.

    Raises:
        ParameterError: si T+H o T·2^W+H no caben en el espacio de mensajes
    """
    largest = signed_value(config.signing_mode, (1 << 64) - 1, (1 << config.hash_width) - 1,
                           config.hash_width)
    for pair in (keys.hash_key, keys.timestamp_key, keys.index_key):
        if largest.bit_length() > pair.public.message_bits:
            raise ParameterError(f"Las claves firman mensajes de {pair.public.message_bits} bits; "
                                 f"el modo '{config.signing_mode}' necesita {largest.bit_length()}")
    return Log(config, keys, clock=clock, journal=journal)


class Log:
    """
    Log append-only con un único escritor.

    Las lecturas trabajan sobre instantáneas (tuplas) de las listas, de modo
    que varios lectores concurrentes ven siempre un prefijo consistente.
    """

    def __init__(self, config, keys, clock=None, journal=None):
        self.config = config
        self.keys = keys
        self.clock = clock or _now_ms
        self.journal = journal
        self._lock = threading.Lock()
        self._entries = []
        self._signatures = []
        self._hash_log = []
        self._tree = merkle.MerkleTree()
        self._by_leaf_hash = {}
        self._last_timestamp = -1
        self._latest_sth = None
        self._pubkeys = keys.public()
        if journal is not None:
            self._replay(journal)
        logger.info(f"📜 Log listo: {len(self._entries)} entradas, modo '{config.signing_mode}', "
                    f"frontend {config.frontend_id}")

    def _replay(self, journal):
        for kind, record in journal.replay():
            if kind == 'entry':
                entry, sigs = record
                if entry.index != len(self._entries) or entry.timestamp <= self._last_timestamp:
                    raise LogError(f"Journal corrupto en la entrada {entry.index}")
                self._store(entry, sigs)
            elif kind == 'sth':
                self._latest_sth = record

    @property
    def mode(self):
        return self.config.signing_mode

    @property
    def tree_size(self):
        return len(self._entries)

    @property
    def latest_sth(self):
        return self._latest_sth

    @property
    def last_timestamp(self):
        """Último T emitido, incluidos los SCTs de entradas descartadas."""
        return self._last_timestamp

    def public_keys(self):
        return self._pubkeys

    def _hash(self, data):
        return hash_entry(data, self.config.hash_width)

    def _signed(self, value, h):
        return signed_value(self.mode, value, h, self.config.hash_width)

    def _store(self, entry, sigs):
        # _entries se publica al final: quien ve el índice i ve también sus firmas y su hoja
        self._signatures.append(sigs)
        self._hash_log.append(entry.hash_scalar(self.config.hash_width))
        leaf = entry.leaf_input()
        self._tree.append(leaf)
        self._by_leaf_hash.setdefault(merkle.leaf_hash(leaf), entry.index)
        self._last_timestamp = entry.timestamp
        self._entries.append(entry)

    def _issue_sct(self, data, t):
        core = struct.pack('!BQHI', ENTRY_VERSION, t, self.config.frontend_id, len(data)) + data
        h_s = self._hash(core)
        sigma_th = self.keys.timestamp_key.sign(self._signed(t, h_s))
        sigma_h = self.keys.hash_key.sign(h_s)
        signature = self.keys.sct_key.sign(sct_signed_bytes(core, sigma_th, sigma_h))
        return SctBundle(data, t, self.config.frontend_id, sigma_th, sigma_h, signature)

    def _sign_entry(self, entry):
        h = entry.hash_scalar(self.config.hash_width)
        return EntrySignatures(
            sigma_h=self.keys.hash_key.sign(h),
            sigma_t=self.keys.timestamp_key.sign(self._signed(entry.timestamp, h)),
            sigma_i=self.keys.index_key.sign(self._signed(entry.index, h)),
        )

    def submit(self, data, t=None, drop=False):
        """
        Añade (data, I, t) al log y emite su SCT.

        Args:
            data: bytes opacos del certificado
            t: timestamp en ms; si falta se toma del reloj (forzado a crecer)
            drop: emite SCT y firmas pero NO añade la entrada (operador que
                  omite entradas; lo usan el juego y el modo omit-entry)

        Returns:
            tuple: (SctBundle, LogEntry, EntrySignatures)

        Raises:
            OrderingError: si t no supera al último timestamp emitido
        """
        data = bytes(data)
        with self._lock:
            if t is None:
                t = max(self.clock(), self._last_timestamp + 1)
            if not 0 <= t <= MAX_U64:
                raise OrderingError(f"Timestamp fuera de 64 bits: {t}")
            if t <= self._last_timestamp:
                raise OrderingError(f"Timestamp {t} no supera al último ({self._last_timestamp})")
            bundle = self._issue_sct(data, t)
            entry = LogEntry(data, len(self._entries), t)
            sigs = self._sign_entry(entry)
            if drop:
                self._last_timestamp = t
                logger.warning(f"⚠️ Entrada con T={t} emitida y NO añadida al log")
                return bundle, entry, sigs
            if self.journal is not None:
                self.journal.append_entry(entry, sigs)
            self._store(entry, sigs)
        logger.debug(f"Entrada {entry.index} añadida (T={t})")
        return bundle, entry, sigs

    def get_entry_bundle(self, index):
        entries, signatures = self._entries, self._signatures
        if not 0 <= index < len(entries):
            raise EntryNotFoundError(f"No existe la entrada {index} (tamaño {len(entries)})")
        return entries[index], signatures[index]

    def entries_snapshot(self, start=0, end=None):
        """Lista de (LogEntry, EntrySignatures) del rango [start, end)."""
        size = len(self._entries)
        end = size if end is None else min(end, size)
        return list(zip(self._entries[start:end], self._signatures[start:end]))

    def hash_log(self):
        return tuple(self._hash_log)

    def timestamps(self):
        return [entry.timestamp for entry in self._entries]

    def _sth_is_current(self, sth, now):
        if sth is None or sth.tree_size != len(self._entries):
            return False
        mmd = self.config.mmd_ms
        return mmd == 0 or now - sth.timestamp < mmd

    def tree_head(self):
        """
        STH del tamaño actual. Se reutiliza el último mientras el árbol no
        crezca y no tenga un MMD de antigüedad; solo los STH nuevos se firman
        y van al journal.
        """
        with self._lock:
            now = self.clock()
            if self._sth_is_current(self._latest_sth, now):
                return self._latest_sth
            size = len(self._entries)
            root_hash = self._tree.root(size)
            last = self._entries[-1].timestamp if size else 0
            timestamp = max(now, last)
            signature = self.keys.sct_key.sign(tree_head_bytes(size, timestamp, root_hash))
            sth = SignedTreeHead(size, root_hash, timestamp, signature)
            self._latest_sth = sth
            if self.journal is not None:
                self.journal.append_sth(sth)
        return sth

    def prove_inclusion(self, index, tree_size=None):
        size = self.tree_size if tree_size is None else tree_size
        if not 0 <= index < size or size > self.tree_size:
            raise EntryNotFoundError(f"No hay camino para la hoja {index} en un árbol de {size}")
        return self._tree.path(index, size)

    def find_by_leaf_hash(self, leaf_hash) -> Optional[int]:
        return self._by_leaf_hash.get(leaf_hash)

    def verify_sct(self, bundle):
        return verify_sct(self._pubkeys, bundle, self.mode, self.config.hash_width)
