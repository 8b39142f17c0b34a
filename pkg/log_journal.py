"""
Persistencia append-only del log.

Cada registro es: tipo (1 byte, 'E' entrada o 'S' STH) ‖ longitud (4 bytes) ‖
contenido. Al abrir el log se reproduce el journal completo; un registro
truncado al final (corte de luz a mitad de escritura) se descarta con aviso.
"""
import logging
import os
import struct
import threading

from ctlog import EntrySignatures, LogEntry, SignedTreeHead
from errors import WireFormatError
from wire import WireReader, WireWriter

logger = logging.getLogger(__name__)

RECORD_ENTRY = b'E'
RECORD_STH = b'S'


class LogJournal:
    def __init__(self, path):
        self.path = path
        self._lock = threading.Lock()
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)

    def _append(self, tag, payload):
        with self._lock, open(self.path, 'ab') as fh:
            fh.write(tag + struct.pack('!I', len(payload)) + payload)
            fh.flush()
            os.fsync(fh.fileno())

    def append_entry(self, entry, sigs):
        writer = WireWriter()
        writer.write_u64(entry.index).write_u64(entry.timestamp)
        writer.write_bytes(entry.data).write_bytes(sigs.encode())
        self._append(RECORD_ENTRY, writer.getvalue())

    def append_sth(self, sth):
        self._append(RECORD_STH, sth.encode())

    def replay(self):
        """Genera ('entry', (LogEntry, EntrySignatures)) y ('sth', SignedTreeHead)."""
        if not os.path.exists(self.path):
            return
        with open(self.path, 'rb') as fh:
            raw = fh.read()
        pos = 0
        while pos < len(raw):
            if pos + 5 > len(raw):
                logger.warning(f"Journal {self.path}: cabecera truncada en el byte {pos}, se ignora")
                return
            tag = raw[pos:pos + 1]
            (length,) = struct.unpack('!I', raw[pos + 1:pos + 5])
            payload = raw[pos + 5:pos + 5 + length]
            if len(payload) != length:
                logger.warning(f"Journal {self.path}: registro truncado en el byte {pos}, se ignora")
                return
            pos += 5 + length
            if tag == RECORD_ENTRY:
                reader = WireReader(payload)
                index, timestamp = reader.read_u64(), reader.read_u64()
                data = reader.read_bytes()
                sigs = EntrySignatures.decode(reader.read_bytes())
                reader.expect_end()
                yield 'entry', (LogEntry(data, index, timestamp), sigs)
            elif tag == RECORD_STH:
                yield 'sth', SignedTreeHead.decode(payload)
            else:
                raise WireFormatError(f"Tipo de registro desconocido en el journal: {tag!r}")
