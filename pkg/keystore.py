"""
Ficheros JSON de parámetros y claves.

    params  → CommitParams (p, q, g, h en hexadecimal)
    keys    → {"config": LogConfig, "keys": LogKeys}   (privado, solo el log)
    pubkeys → {"config": LogConfig, "public_keys": LogPublicKeys}
"""
import json
import logging
import os

from commitments import CommitParams
from ctlog import LogConfig, LogKeys, LogPublicKeys, new_log
from errors import ParameterError
from log_journal import LogJournal

logger = logging.getLogger(__name__)


def _write_json(path, payload, private=False):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as fh:
        json.dump(payload, fh, indent=2)
    if private:
        try:
            os.chmod(path, 0o600)
        except OSError:
            logger.warning(f"No se pudieron restringir los permisos de {path}")


def _read_json(path):
    with open(path, 'r', encoding='utf-8') as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as e:
            raise ParameterError(f"{path} no es JSON válido: {e}") from e


def save_params(path, params):
    _write_json(path, params.to_dict())


def load_params(path):
    try:
        return CommitParams.from_dict(_read_json(path))
    except (KeyError, ValueError) as e:
        raise ParameterError(f"Parámetros inválidos en {path}: {e}") from e


def save_log_keys(path, keys, config):
    _write_json(path, {'config': config.to_dict(), 'keys': keys.to_dict()}, private=True)
    logger.info(f"🔑 Claves del log guardadas en {path}")


def load_log_keys(path):
    """Devuelve (LogKeys, LogConfig)."""
    data = _read_json(path)
    try:
        return LogKeys.from_dict(data['keys']), LogConfig.from_dict(data['config'])
    except (KeyError, TypeError, ValueError) as e:
        raise ParameterError(f"Claves inválidas en {path}: {e}") from e


def save_public_keys(path, pubkeys, config):
    _write_json(path, {'config': config.to_dict(), 'public_keys': pubkeys.to_dict()})


def load_public_keys(path):
    """
    Devuelve (LogPublicKeys, LogConfig). Acepta también un fichero de claves
    privadas, del que solo se toma la parte pública.
    """
    data = _read_json(path)
    try:
        config = LogConfig.from_dict(data['config'])
        if 'public_keys' in data:
            return LogPublicKeys.from_dict(data['public_keys']), config
        return LogKeys.from_dict(data['keys']).public(), config
    except (KeyError, TypeError, ValueError) as e:
        raise ParameterError(f"Claves públicas inválidas en {path}: {e}") from e


def open_log(keys_path, journal_path=None, clock=None):
    """Log con las claves del fichero, reconstruido desde el journal si se da."""
    keys, config = load_log_keys(keys_path)
    journal = LogJournal(journal_path) if journal_path else None
    return new_log(config, keys, clock=clock, journal=journal)
