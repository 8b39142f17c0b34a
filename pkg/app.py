import logging
import threading
from dataclasses import dataclass

from flask import Flask, jsonify
from werkzeug.serving import make_server

from config import get_settings
from keystore import open_log
from logsvc_routes import EXTENSION_KEY, LogService, ServerMode, logsvc_bp

logger = logging.getLogger(__name__)


def configure_logging(level=logging.INFO, log_file=None):
    """
    Logging del proceso: consola siempre, fichero solo si se pide y se puede
    escribir.
    """
    # Desactivar logs de httpx, httpcore y werkzeug
    logging.getLogger('httpcore').setLevel(logging.WARNING)
    logging.getLogger('httpx').setLevel(logging.WARNING)
    logging.getLogger('werkzeug').setLevel(logging.WARNING)

    handlers = [logging.StreamHandler()]
    if log_file:
        try:
            handlers.append(logging.FileHandler(log_file, encoding='utf-8'))
        except (OSError, PermissionError):
            # Ignorar si no se puede crear el archivo
            pass

    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )


def create_app(log, mode=None):
    """Aplicación Flask que sirve `log` con el comportamiento `mode`."""
    app = Flask(__name__)
    app.config['JSONIFY_PRETTYPRINT_REGULAR'] = False
    app.json.sort_keys = False
    app.extensions[EXTENSION_KEY] = LogService(log, mode or ServerMode())

    # ====================
    # Configuración de Blueprints
    # ====================
    app.register_blueprint(logsvc_bp)

    @app.route('/health', methods=['GET'])
    def health():
        """
        Estado del servicio.

        GET /health
        """
        service = app.extensions[EXTENSION_KEY]
        return jsonify({'success': True, 'tree_size': service.log.tree_size, 'mode': str(service.mode)})

    @app.errorhandler(404)
    def not_found(_):
        return jsonify({'success': False, 'error': 'Ruta no encontrada'}), 404

    return app


def list_routes(app):
    """Rutas registradas con sus métodos HTTP, para el log de arranque."""
    routes = []
    for rule in app.url_map.iter_rules():
        if rule.endpoint == 'static':
            continue
        methods = sorted(m for m in rule.methods if m not in ('OPTIONS', 'HEAD'))
        routes.append(f"{'/'.join(methods):<5} {rule}")
    return sorted(routes, key=lambda line: line.split()[-1])


@dataclass
class RunningService:
    url: str
    port: int
    app: Flask
    server: object
    thread: threading.Thread = None

    @property
    def service(self):
        return self.app.extensions[EXTENSION_KEY]

    def shutdown(self):
        self.server.shutdown()
        self.server.server_close()
        if self.thread is not None:
            self.thread.join(timeout=5)
        logger.info(f"Servicio en {self.url} detenido")

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.shutdown()


def serve(log, mode=None, port=0, background=True, host='127.0.0.1'):
    """
    Arranca el servicio. Con port=0 el sistema elige un puerto libre.

    Raises:
        OSError: si el puerto está ocupado
    """
    app = create_app(log, mode)
    server = make_server(host, port, app, threaded=True)
    url = f"http://{host}:{server.server_port}"
    running = RunningService(url, server.server_port, app, server)

    logger.info("=" * 70)
    logger.info(f"  📜 Log CT en {url} (modo {running.service.mode}, {log.tree_size} entradas)")
    for line in list_routes(app):
        logger.info(f"    • {line}")
    logger.info("=" * 70)

    if background:
        running.thread = threading.Thread(target=server.serve_forever, name='ctzk-log', daemon=True)
        running.thread.start()
    else:
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            logger.info("Interrumpido por el usuario")
        finally:
            server.server_close()
    return running


def main():
    settings = get_settings()
    configure_logging(log_file=settings.log_file)
    log = open_log(settings.keys_path, settings.journal_path)
    serve(log, ServerMode.parse(settings.server_mode), settings.port,
          background=False, host=settings.host)


if __name__ == '__main__':
    main()
