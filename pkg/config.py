"""
Configuración por entorno.

Se lee .env (si existe) y después las variables del proceso. Los flags de la
CLI tienen prioridad sobre estos valores (ver cli.build_cli_config).
"""
import os
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Optional

from dotenv import load_dotenv

from ctlog import DEFAULT_MMD_MS

DEFAULT_PORT = 6962
OUTPUT_FORMATS = ('human', 'json')


def _env_bool(name, default=False):
    raw = os.getenv(name)
    if raw is None:
        return default
    return raw.strip().lower() in ('1', 'true', 'yes', 'si', 'sí')


def _env_int(name, default):
    raw = os.getenv(name)
    if raw is None or raw.strip() == '':
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{name} debe ser un entero (valor actual: {raw!r})")


@dataclass(frozen=True)
class Settings:
    keys_path: str = 'ctzk_keys.json'
    params_path: str = 'ctzk_params.json'
    journal_path: Optional[str] = None
    log_url: str = f'http://127.0.0.1:{DEFAULT_PORT}'
    output: str = 'human'
    port: int = DEFAULT_PORT
    mmd_ms: int = DEFAULT_MMD_MS
    frontend_id: int = 0
    toy_keys: bool = False
    log_file: Optional[str] = None
    server_mode: str = 'honest'
    host: str = '127.0.0.1'

    def __post_init__(self):
        if self.output not in OUTPUT_FORMATS:
            raise ValueError(f"CTZK_OUTPUT debe ser uno de {OUTPUT_FORMATS}")

    def override(self, **changes):
        """Copia con los valores no nulos de `changes` (flags de la CLI)."""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def load_settings(env_file='.env'):
    load_dotenv(env_file)
    return Settings(
        keys_path=os.getenv('CTZK_KEYS_PATH', 'ctzk_keys.json'),
        params_path=os.getenv('CTZK_PARAMS_PATH', 'ctzk_params.json'),
        journal_path=os.getenv('CTZK_JOURNAL_PATH') or None,
        log_url=os.getenv('CTZK_LOG_URL', f'http://127.0.0.1:{DEFAULT_PORT}'),
        output=os.getenv('CTZK_OUTPUT', 'human'),
        port=_env_int('PORT', DEFAULT_PORT),
        mmd_ms=_env_int('CTZK_MMD_MS', DEFAULT_MMD_MS),
        frontend_id=_env_int('CTZK_FRONTEND_ID', 0),
        toy_keys=_env_bool('CTZK_TOY_KEYS'),
        log_file=os.getenv('CTZK_LOG_FILE') or None,
        server_mode=os.getenv('CTZK_SERVER_MODE', 'honest'),
        host=os.getenv('HOST', '127.0.0.1'),
    )


@lru_cache(maxsize=1)
def get_settings():
    return load_settings()
