"""
Árbol de Merkle según RFC6962 (y la verificación de caminos de RFC9162).

    hoja:  SHA-256(0x00 ‖ datos)
    nodo:  SHA-256(0x01 ‖ izq ‖ der)
    vacío: SHA-256("")

Con n > 1 hojas el árbol se parte en k (la mayor potencia de 2 menor que n)
hojas a la izquierda y el resto a la derecha. Lo usan el log y las familias
de certificados de corta duración.
"""
import hashlib

LEAF_PREFIX = b'\x00'
NODE_PREFIX = b'\x01'


def leaf_hash(data):
    return hashlib.sha256(LEAF_PREFIX + data).digest()


def node_hash(left, right):
    return hashlib.sha256(NODE_PREFIX + left + right).digest()


def empty_root():
    return hashlib.sha256(b'').digest()


def _split(n):
    k = 1
    while k << 1 < n:
        k <<= 1
    return k


def root_from_hashes(hashes):
    """Raíz sobre hashes de hoja ya calculados."""
    n = len(hashes)
    if n == 0:
        return empty_root()
    if n == 1:
        return hashes[0]
    k = _split(n)
    return node_hash(root_from_hashes(hashes[:k]), root_from_hashes(hashes[k:]))


def root(leaves):
    return root_from_hashes([leaf_hash(leaf) for leaf in leaves])


def audit_path(hashes, index):
    """
    Camino de auditoría PATH(m, D[n]) para la hoja `index`.

    Raises:
        IndexError: si index está fuera del árbol
    """
    n = len(hashes)
    if not 0 <= index < n:
        raise IndexError(f"Hoja {index} fuera de un árbol de {n} hojas")
    if n == 1:
        return []
    k = _split(n)
    if index < k:
        return audit_path(hashes[:k], index) + [root_from_hashes(hashes[k:])]
    return audit_path(hashes[k:], index - k) + [root_from_hashes(hashes[:k])]


def root_from_path(leaf, index, size, path):
    """Recalcula la raíz desde un hash de hoja; None si el camino no encaja."""
    if not 0 <= index < size:
        return None
    fn, sn = index, size - 1
    r = leaf
    for p in path:
        if sn == 0:
            return None
        if fn & 1 or fn == sn:
            r = node_hash(p, r)
            while not fn & 1 and fn != 0:
                fn >>= 1
                sn >>= 1
        else:
            r = node_hash(r, p)
        fn >>= 1
        sn >>= 1
    if sn != 0:
        return None
    return r


def verify_path(leaf, index, size, path, expected_root):
    return root_from_path(leaf, index, size, path) == expected_root


class MerkleTree:
    """Árbol incremental: guarda los hashes de hoja y recalcula bajo demanda."""

    def __init__(self, leaves=()):
        self._hashes = [leaf_hash(leaf) for leaf in leaves]

    def __len__(self):
        return len(self._hashes)

    def append(self, leaf):
        self._hashes.append(leaf_hash(leaf))
        return len(self._hashes) - 1

    def leaf_hashes(self, size=None):
        return list(self._hashes[:len(self._hashes) if size is None else size])

    def root(self, size=None):
        return root_from_hashes(self.leaf_hashes(size))

    def path(self, index, size=None):
        return audit_path(self.leaf_hashes(size), index)
