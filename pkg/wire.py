"""
Framing binario común a compromisos, firmas y pruebas.

Formato:
    versión (1 byte) ‖ tipo (1 byte) ‖ campos

Cada entero va como longitud big-endian de 4 bytes seguida de su magnitud
big-endian. Las secciones llevan una etiqueta de 1 byte y la longitud total
de su contenido (4 bytes), lo que permite medir cada parte de una prueba.
Detalle completo en FORMATO_BINARIO.md.
"""
import struct

from errors import WireFormatError
from numtheory import int_to_bytes

WIRE_VERSION = 1

# Tope de magnitud de un entero: 16384 bits, holgado para módulos CL de 8192
MAX_INT_BYTES = 2048

# Tipos de objeto
KIND_COMMITMENT = 0x01
KIND_EQ_PROOF = 0x02
KIND_RANGE_PROOF = 0x03
KIND_CL_SIGNATURE = 0x04
KIND_SIG_POK = 0x05
KIND_EXCLUSION_PROOF = 0x06
KIND_ACTIONABLE_PROOF = 0x07
KIND_EXCLUSION_PROOF_V2 = 0x08
KIND_ENTRY_SIGNATURES = 0x09
KIND_SCT_BUNDLE = 0x0A
KIND_BIT_PROOF = 0x0B
KIND_PRIVATE_PRECERT = 0x0C

# Etiquetas de sección en las pruebas de exclusión
SECTION_COMMITMENTS = 0x10
SECTION_POKS = 0x20
SECTION_EQ = 0x30
SECTION_RANGES = 0x40
SECTION_BINDING = 0x50


class WireWriter:
    def __init__(self, kind=None):
        self._buf = bytearray()
        self._open_sections = []
        if kind is not None:
            self._buf += bytes([WIRE_VERSION, kind])

    def write_u8(self, value):
        self._buf += struct.pack('!B', value)
        return self

    def write_u16(self, value):
        self._buf += struct.pack('!H', value)
        return self

    def write_u64(self, value):
        self._buf += struct.pack('!Q', value)
        return self

    def write_bytes(self, data):
        self._buf += struct.pack('!I', len(data)) + data
        return self

    def write_int(self, value):
        if value < 0:
            raise WireFormatError(f"Entero negativo no serializable: {value}")
        return self.write_bytes(int_to_bytes(value))

    def write_ints(self, values):
        self.write_u16(len(values))
        for value in values:
            self.write_int(value)
        return self

    def write_raw(self, data):
        self._buf += data
        return self

    def begin_section(self, tag):
        self._buf += struct.pack('!B', tag)
        self._open_sections.append(len(self._buf))
        self._buf += b'\x00\x00\x00\x00'
        return self

    def end_section(self):
        start = self._open_sections.pop()
        length = len(self._buf) - start - 4
        self._buf[start:start + 4] = struct.pack('!I', length)
        return self

    def getvalue(self):
        if self._open_sections:
            raise WireFormatError("Sección sin cerrar")
        return bytes(self._buf)


class WireReader:
    def __init__(self, data, kind=None):
        self._data = bytes(data)
        self._pos = 0
        if kind is not None:
            version = self.read_u8()
            if version != WIRE_VERSION:
                raise WireFormatError(f"Versión de formato no soportada: {version}")
            found = self.read_u8()
            if found != kind:
                raise WireFormatError(f"Tipo de objeto inesperado: {found:#04x} (se esperaba {kind:#04x})")

    def _take(self, n):
        if n < 0 or self._pos + n > len(self._data):
            raise WireFormatError("Datos truncados")
        chunk = self._data[self._pos:self._pos + n]
        self._pos += n
        return chunk

    def read_u8(self):
        return struct.unpack('!B', self._take(1))[0]

    def read_u16(self):
        return struct.unpack('!H', self._take(2))[0]

    def read_u64(self):
        return struct.unpack('!Q', self._take(8))[0]

    def read_bytes(self):
        (length,) = struct.unpack('!I', self._take(4))
        return self._take(length)

    def read_int(self):
        (length,) = struct.unpack('!I', self._take(4))
        if length == 0:
            raise WireFormatError("Entero vacío")
        if length > MAX_INT_BYTES:
            raise WireFormatError(f"Entero de {length} bytes (máximo {MAX_INT_BYTES})")
        return int.from_bytes(self._take(length), 'big')

    def read_ints(self):
        count = self.read_u16()
        return [self.read_int() for _ in range(count)]

    def read_section(self, tag):
        found = self.read_u8()
        if found != tag:
            raise WireFormatError(f"Sección inesperada: {found:#04x} (se esperaba {tag:#04x})")
        (length,) = struct.unpack('!I', self._take(4))
        return WireReader(self._take(length))

    def read_remaining(self):
        return self._take(len(self._data) - self._pos)

    def expect_end(self):
        if self._pos != len(self._data):
            raise WireFormatError(f"{len(self._data) - self._pos} bytes sobrantes")


def section_sizes(data, kind):
    """Devuelve {etiqueta: bytes} de las secciones de un objeto serializado."""
    reader = WireReader(data, kind)
    sizes = {}
    while reader._pos < len(reader._data):
        tag = reader.read_u8()
        (length,) = struct.unpack('!I', reader._take(4))
        reader._take(length)
        sizes[tag] = length + 5
    return sizes
