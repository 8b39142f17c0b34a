"""
Subdominios privados.

El dueño de secret.example.com no quiere que "secret" aparezca en los logs
públicos. En lugar de la etiqueta, el precertificado y el SCT llevan
(D, C_d) con C_d = commit(hash_label(d), r). El certificado final lleva d y
r, de modo que un visitante que ya conoce el nombre puede abrir C_d; los
monitores solo pueden contar cuántos subdominios privados tiene D.

Flujo:
    dueño    → commit_subdomain()       → (d, D, C_d, r) al CA
    CA       → ca_validate_request()    → comprueba C_d
    CA + log → issue_private_cert()     → entrada con (D, C_d), SCT, certificado
    visitante→ visitor_verify()
    monitor  → monitor_count() / monitor_audit()
"""
import base64
import json
import logging
import re
from dataclasses import dataclass

from commitments import Commitment, commit, random_scalar, verify_opening
from ctlog import HASH_WIDTH, SctBundle, hash_entry, verify_sct
from errors import CommitmentError, LabelError, WireFormatError
from wire import KIND_PRIVATE_PRECERT, WireReader, WireWriter

logger = logging.getLogger(__name__)

_LABEL_RE = re.compile(r'^[a-z0-9]([a-z0-9-]{0,61}[a-z0-9])?$')


def _normalize(name, what):
    if not isinstance(name, str):
        raise LabelError(f"{what} debe ser texto")
    name = name.strip().lower().rstrip('.')
    if not name:
        raise LabelError(f"{what} vacío")
    for label in name.split('.'):
        if not _LABEL_RE.match(label):
            raise LabelError(f"Etiqueta DNS inválida en {what}: {label!r}")
    return name


def normalize_domain(domain):
    return _normalize(domain, 'dominio')


def normalize_label(label):
    """Una o varias etiquetas a la izquierda del dominio, en minúsculas."""
    return _normalize(label, 'subdominio')


def hash_label(label, width=HASH_WIDTH):
    """Escalar de 160 bits de la etiqueta normalizada: es lo que se compromete."""
    return hash_entry(normalize_label(label).encode('ascii'), width)


@dataclass(frozen=True)
class SubdomainBinding:
    domain: str
    label: str
    commitment: Commitment
    randomness: int

    @property
    def fqdn(self):
        return f"{self.label}.{self.domain}"


@dataclass(frozen=True)
class RedactedPrecert:
    """(D, C_d) más los campos opacos del certificado; sin d ni r."""
    domain: str
    commitment: Commitment
    cert_fields: bytes = b''

    def encode(self):
        writer = WireWriter(KIND_PRIVATE_PRECERT)
        writer.write_bytes(self.domain.encode('ascii'))
        writer.write_int(self.commitment.value)
        writer.write_bytes(self.cert_fields)
        return writer.getvalue()

    @classmethod
    def decode(cls, data):
        reader = WireReader(data, KIND_PRIVATE_PRECERT)
        try:
            domain = reader.read_bytes().decode('ascii')
        except UnicodeDecodeError as exc:
            raise WireFormatError("Dominio no ASCII en el precertificado") from exc
        commitment = Commitment(reader.read_int())
        fields = reader.read_bytes()
        reader.expect_end()
        return cls(domain, commitment, fields)


def encode_precert_payload(domain, commitment, cert_fields=b''):
    return RedactedPrecert(normalize_domain(domain), commitment, cert_fields).encode()


def decode_precert_payload(data):
    return RedactedPrecert.decode(data)


@dataclass(frozen=True)
class PrivateCertificate:
    """Sustituto de un certificado X.509: lleva d, r y el SCT."""
    domain: str
    redacted_label: str
    randomness: int
    sct: SctBundle
    cert_fields: bytes = b''

    def to_json(self):
        r_bytes = self.randomness.to_bytes(max(1, (self.randomness.bit_length() + 7) // 8), 'big')
        return json.dumps({
            'domain': self.domain,
            'redacted_label': self.redacted_label,
            'randomness': base64.b64encode(r_bytes).decode('ascii'),
            'sct': self.sct.to_b64(),
            'cert_fields': base64.b64encode(self.cert_fields).decode('ascii'),
        }, indent=2)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        return cls(
            domain=data['domain'],
            redacted_label=data['redacted_label'],
            randomness=int.from_bytes(base64.b64decode(data['randomness']), 'big'),
            sct=SctBundle.from_b64(data['sct']),
            cert_fields=base64.b64decode(data.get('cert_fields', '')),
        )


def commit_subdomain(params, domain, label):
    """
    Compromiso a la etiqueta privada con aleatoriedad nueva.

    Raises:
        LabelError: si D o d no son etiquetas DNS válidas
    """
    domain = normalize_domain(domain)
    label = normalize_label(label)
    r = random_scalar(params)
    return SubdomainBinding(domain, label, commit(params, hash_label(label), r), r)


def ca_validate_request(params, binding):
    """El CA comprueba que C_d abre a (hash_label(d), r)."""
    try:
        m = hash_label(binding.label)
    except LabelError:
        return False
    return verify_opening(params, binding.commitment, m, binding.randomness)


def issue_private_cert(log, params, binding, cert_fields=b'', t=None):
    """
    Registra (D, C_d) en el log y emite el certificado con (d, r).

    Returns:
        tuple: (PrivateCertificate, SctBundle)

    Raises:
        CommitmentError: si el CA rechaza el compromiso
    """
    if not ca_validate_request(params, binding):
        logger.warning(f"CA rechaza el compromiso para *.{binding.domain}")
        raise CommitmentError("El compromiso al subdominio no es correcto")
    payload = encode_precert_payload(binding.domain, binding.commitment, cert_fields)
    bundle, entry, _ = log.submit(payload, t)
    logger.info(f"🔒 Subdominio privado de {binding.domain} registrado en la entrada {entry.index}")
    cert = PrivateCertificate(binding.domain, binding.label, binding.randomness, bundle, cert_fields)
    return cert, bundle


def visitor_verify(params, pubkeys, certificate, sct_bundle, mode='sum'):
    """
    El navegador comprueba la firma del SCT, que D coincide y que el C_d del
    SCT abre a la etiqueta y aleatoriedad del certificado.
    """
    if not verify_sct(pubkeys, sct_bundle, mode):
        return False
    try:
        payload = decode_precert_payload(sct_bundle.data)
        domain = normalize_domain(certificate.domain)
        m = hash_label(certificate.redacted_label)
    except (WireFormatError, LabelError):
        return False
    if payload.domain != domain:
        return False
    return verify_opening(params, payload.commitment, m, certificate.randomness)


def _entry_data(item):
    entry = item[0] if isinstance(item, tuple) else item
    return entry.data


def monitor_count(entries, domain):
    """Número de entradas con subdominio privado bajo D."""
    domain = normalize_domain(domain)
    count = 0
    for item in entries:
        try:
            payload = decode_precert_payload(_entry_data(item))
        except WireFormatError:
            continue
        if payload.domain == domain:
            count += 1
    return count


@dataclass(frozen=True)
class MonitorAudit:
    domain: str
    expected: int
    observed: int

    @property
    def ok(self):
        return self.expected == self.observed


def monitor_audit(entries, domain, expected):
    """Compara el recuento del log con el esperado (que llega por otro canal)."""
    audit = MonitorAudit(normalize_domain(domain), expected, monitor_count(entries, domain))
    if not audit.ok:
        logger.warning(f"⚠️ {audit.domain}: {audit.observed} subdominios privados en el log, "
                       f"se esperaban {audit.expected}")
    return audit
