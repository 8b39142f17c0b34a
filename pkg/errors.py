"""
Jerarquía de excepciones del proyecto.

Los errores de entrada derivan de ValueError para que el código que ya captura
ValueError siga funcionando. Un "reject" de verificación nunca es una excepción:
las funciones verify_* devuelven bool o una tupla (aceptado, motivo).
"""


class CTZKError(Exception):
    """Error base de la librería."""


class ParameterError(CTZKError, ValueError):
    """Parámetros de grupo o de clave inválidos."""


class CommitmentError(CTZKError, ValueError):
    """Mensaje o aleatoriedad fuera de rango, o prueba imposible de construir."""


class SignatureError(CTZKError, ValueError):
    """Firma CL o Ed25519 inválida, o mensaje fuera del intervalo firmable."""


class LogError(CTZKError, ValueError):
    """Error genérico del log CT."""


class OrderingError(LogError):
    """Timestamp no creciente en un envío al log."""


class EntryNotFoundError(LogError, IndexError):
    """Índice fuera del tamaño del árbol."""


class ProofError(CTZKError, ValueError):
    """El testigo no cumple las precondiciones de la prueba de exclusión."""


class WireFormatError(CTZKError, ValueError):
    """Serialización binaria malformada."""


class LabelError(CTZKError, ValueError):
    """Etiqueta DNS inválida."""


class FamilyError(CTZKError, ValueError):
    """Familia de certificados de vida corta inválida."""


class ServiceError(CTZKError):
    """Error al hablar con un log remoto."""

    def __init__(self, message, status_code=None):
        super().__init__(message)
        self.status_code = status_code


class RefusedError(ServiceError):
    """El log se niega explícitamente a responder (modo no cooperativo)."""


class UnavailableError(ServiceError):
    """El log no entrega una entrada que debería existir."""
