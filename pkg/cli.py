"""
Línea de comandos.

    log init | submit | serve | sweep
    proof build | verify | inspect      (--variant pi | pi-prime | actionable)
    game run --strategy S
    subdomain issue | verify | count
    shortlived build | prove | verify
    bench

Códigos de salida: 0 correcto, 1 rechazo de verificación, 2 uso, 3 E/S o red.
"""
import argparse
import base64
import json
import logging
import random
import sys
import time
from datetime import date

import bench
import privdom
import proofexcl_game
import shortlived
import zkexcl
from app import configure_logging, serve
from commitments import DEFAULT_BIT_LENGTHS, setup_params
from config import get_settings
from ctlog import LogConfig, LogKeys, SctBundle
from errors import CTZKError, ProofError, ServiceError, UnavailableError
from keystore import load_params, load_public_keys, open_log, save_log_keys, save_params, save_public_keys
from logsvc_client import CTLogClient, RemoteLogWriter, exclusion_witness, monitor_sweep
from logsvc_routes import ServerMode

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_REJECT = 1
EXIT_USAGE = 2
EXIT_IO = 3


class UsageError(CTZKError, ValueError):
    """Combinación de opciones inválida."""


def build_cli_config(args):
    """Settings del entorno con los flags de la línea de comandos encima."""
    return get_settings().override(
        keys_path=args.keys, params_path=args.params, journal_path=args.journal,
        log_url=args.url, output=args.output,
    )


def _emit(cfg, text, data):
    if cfg.output == 'json':
        print(json.dumps(data, indent=2, default=str))
    else:
        print(text)


def _read_text(path):
    with open(path, 'r', encoding='utf-8') as fh:
        return fh.read().strip()


def _write_text(path, text):
    with open(path, 'w', encoding='utf-8') as fh:
        fh.write(text + '\n')


def _client(cfg):
    return CTLogClient(cfg.log_url)


def _writer(cfg):
    """Log local (si hay journal) o log remoto en cfg.log_url."""
    if cfg.journal_path:
        return open_log(cfg.keys_path, cfg.journal_path)
    return RemoteLogWriter(_client(cfg))


def _entries(cfg):
    if cfg.journal_path:
        return open_log(cfg.keys_path, cfg.journal_path).entries_snapshot()
    with _client(cfg) as client:
        size = client.get_sth().tree_size
        entries = []
        for start in range(0, size, 256):
            entries.extend((entry, sigs) for entry, sigs, _ in client.get_entries(start, min(start + 256, size) - 1))
        return entries


def _pubkeys(cfg, path=None):
    return load_public_keys(path or cfg.keys_path)


# ====================
# log
# ====================

def cmd_log_init(cfg, args):
    toy = args.toy or cfg.toy_keys
    params = setup_params(bench.TOY_BIT_LENGTHS if toy else DEFAULT_BIT_LENGTHS)
    config = LogConfig(mmd_ms=cfg.mmd_ms, frontend_id=cfg.frontend_id, signing_mode=args.mode)
    keys = LogKeys.generate(512 if toy else 2048, toy=toy)
    save_params(cfg.params_path, params)
    save_log_keys(cfg.keys_path, keys, config)
    pub_path = args.pubkeys or cfg.keys_path.replace('.json', '') + '.pub.json'
    save_public_keys(pub_path, keys.public(), config)
    _emit(cfg, f"🔑 Parámetros en {cfg.params_path}, claves en {cfg.keys_path}, públicas en {pub_path}",
          {'params': cfg.params_path, 'keys': cfg.keys_path, 'public_keys': pub_path, 'toy': toy,
           'signing_mode': args.mode})
    return EXIT_OK


def cmd_log_submit(cfg, args):
    if (args.data is None) == (args.file is None):
        raise UsageError("Indica exactamente uno de --data o --file")
    if args.data is not None:
        data = args.data.encode('utf-8')
    else:
        with open(args.file, 'rb') as fh:
            data = fh.read()
    bundle, entry, _ = _writer(cfg).submit(data, args.timestamp)
    if args.out:
        _write_text(args.out, bundle.to_b64())
    _emit(cfg, f"📜 Entrada {entry.index}, T={bundle.timestamp}\n{bundle.to_b64()}",
          {'index': entry.index, 'timestamp': bundle.timestamp, 'sct': bundle.to_b64()})
    return EXIT_OK


def cmd_log_serve(cfg, args):
    log = open_log(cfg.keys_path, cfg.journal_path)
    serve(log, ServerMode.parse(args.mode or cfg.server_mode), args.port if args.port is not None else cfg.port,
          background=False, host=cfg.host)
    return EXIT_OK


def cmd_log_sweep(cfg, args):
    pubkeys = mode = width = None
    if args.pubkeys:
        pubkeys, config = load_public_keys(args.pubkeys)
        mode, width = config.signing_mode, config.hash_width
    with _client(cfg) as client:
        report = monitor_sweep(client, pubkeys, mode, width)
    lines = [f"Entradas revisadas: {report.checked}/{report.tree_size}",
             f"No disponibles: {report.unavailable or 'ninguna'}"]
    lines += [f"  {v.kind} en {v.index}: {v.detail}" for v in report.violations]
    lines.append("✅ Log limpio" if report.clean else "❌ Hallazgos en el log")
    _emit(cfg, "\n".join(lines), report.to_dict())
    return EXIT_OK if report.clean else EXIT_REJECT


# ====================
# proof
# ====================

def cmd_proof_build(cfg, args):
    params = load_params(cfg.params_path)
    sct = SctBundle.from_b64(_read_text(args.sct))
    if cfg.journal_path:
        log = open_log(cfg.keys_path, cfg.journal_path)
        pubkeys = log.public_keys()
        sth = None if args.no_mmd else log.tree_head()
        mmd = None if args.no_mmd else log.config.mmd_ms
        witness = zkexcl.find_witness(log.entries_snapshot(), sct, sth, mmd)
    else:
        with _client(cfg) as client:
            pubkeys = _pubkeys(cfg, args.pubkeys)[0] if args.pubkeys else client.get_public_keys()[0]
            try:
                witness = exclusion_witness(client, sct, enforce_mmd=not args.no_mmd)
            except UnavailableError as e:
                logger.warning(f"⚠️ Sin vecinos para T={sct.timestamp}: {e}")
                witness = None
    if witness is None:
        _emit(cfg, "❌ No hay par adyacente que rodee al SCT: no se puede probar la exclusión",
              {'built': False, 'reason': 'no-witness'})
        return EXIT_REJECT
    try:
        proof = zkexcl.build_exclusion_proof(params, pubkeys, witness, args.variant)
    except ProofError as e:
        _emit(cfg, f"❌ {e}", {'built': False, 'reason': str(e)})
        return EXIT_REJECT
    data = proof.encode()
    with open(args.out, 'wb') as fh:
        fh.write(data)
    _emit(cfg, f"✅ Prueba '{args.variant}' de {len(data)} bytes en {args.out}",
          {'built': True, 'variant': args.variant, 'bytes': len(data), 'out': args.out})
    return EXIT_OK


def cmd_proof_verify(cfg, args):
    params = load_params(cfg.params_path)
    pubkeys, _ = _pubkeys(cfg, args.pubkeys)
    with open(args.proof, 'rb') as fh:
        data = fh.read()
    try:
        variant = args.variant or zkexcl.variant_of(data)
        proof = zkexcl.ExclusionProof.decode(data, variant)
    except CTZKError as e:
        _emit(cfg, f"❌ Rechazada: malformed ({e})", {'accepted': False, 'reason': 'malformed'})
        return EXIT_REJECT
    accepted, reason = zkexcl.verify_exclusion_proof(params, pubkeys, proof)
    result = {'accepted': accepted, 'variant': variant, 'reason': None if reason is None else reason.value}
    if accepted and variant == 'actionable':
        result['revealed_hash'] = hex(proof.revealed_hash)
    text = (f"✅ Prueba '{variant}' aceptada" if accepted else f"❌ Rechazada: {reason.value}")
    if 'revealed_hash' in result:
        text += f"\nH(y) revelado: {result['revealed_hash']}"
    _emit(cfg, text, result)
    return EXIT_OK if accepted else EXIT_REJECT


def cmd_proof_inspect(cfg, args):
    with open(args.proof, 'rb') as fh:
        data = fh.read()
    variant = zkexcl.variant_of(data)
    report = zkexcl.proof_size_report(zkexcl.ExclusionProof.decode(data, variant))
    lines = [f"Variante: {variant}"] + [f"  {name:<12} {size:>8} bytes" for name, size in report.items()]
    _emit(cfg, "\n".join(lines), {'variant': variant, 'sections': report})
    return EXIT_OK


# ====================
# game
# ====================

def cmd_game_run(cfg, args):
    rng = random.Random(args.seed) if args.seed is not None else None
    transcript = proofexcl_game.play_proofexcl_game(args.strategy, args.security_parameter, rng=rng)
    reason = None if transcript.reason is None else transcript.reason.value
    _emit(cfg, f"🎲 {args.strategy}: b={transcript.bit}" + (f" ({reason})" if reason else ""),
          {'strategy': args.strategy, 'bit': transcript.bit, 'reason': reason,
           'rounds': transcript.security_parameter, 'timestamp_range': transcript.timestamp_range})
    return EXIT_OK


# ====================
# subdomain
# ====================

def cmd_subdomain_issue(cfg, args):
    params = load_params(cfg.params_path)
    binding = privdom.commit_subdomain(params, args.domain, args.label)
    cert, _ = privdom.issue_private_cert(_writer(cfg), params, binding, (args.fields or '').encode('utf-8'))
    _write_text(args.out, cert.to_json())
    _emit(cfg, f"🔒 Certificado de {binding.fqdn} en {args.out} (el log solo ve *.{binding.domain})",
          {'domain': binding.domain, 'out': args.out, 'timestamp': cert.sct.timestamp})
    return EXIT_OK


def cmd_subdomain_verify(cfg, args):
    params = load_params(cfg.params_path)
    pubkeys, config = _pubkeys(cfg, args.pubkeys)
    cert = privdom.PrivateCertificate.from_json(_read_text(args.certificate))
    accepted = privdom.visitor_verify(params, pubkeys, cert, cert.sct, config.signing_mode)
    _emit(cfg, "✅ Certificado válido" if accepted else "❌ Certificado rechazado", {'accepted': accepted})
    return EXIT_OK if accepted else EXIT_REJECT


def cmd_subdomain_count(cfg, args):
    entries = _entries(cfg)
    if args.expected is None:
        count = privdom.monitor_count(entries, args.domain)
        _emit(cfg, f"{args.domain}: {count} subdominios privados", {'domain': args.domain, 'count': count})
        return EXIT_OK
    audit = privdom.monitor_audit(entries, args.domain, args.expected)
    _emit(cfg, f"{audit.domain}: {audit.observed} en el log, {audit.expected} esperados",
          {'domain': audit.domain, 'observed': audit.observed, 'expected': audit.expected, 'ok': audit.ok})
    return EXIT_OK if audit.ok else EXIT_REJECT


# ====================
# shortlived
# ====================

def _parse_start(text):
    try:
        return int(text)
    except ValueError:
        return date.fromisoformat(text)


def cmd_shortlived_build(cfg, args):
    family = shortlived.build_family((args.fields or '').encode('utf-8'), _parse_start(args.start), args.days,
                                     args.window_ms)
    data = family.to_dict()
    text = f"🗓️ Familia de {len(family)} certificados, raíz {family.root.hex()}"
    if args.submit:
        bundle, entry = shortlived.submit_family(_writer(cfg), family)
        data['sct'] = bundle.to_b64()
        data['index'] = entry.index
        text += f"\nRegistrada en la entrada {entry.index}"
    _write_text(args.out, json.dumps(data, indent=2))
    _emit(cfg, text, data)
    return EXIT_OK


def cmd_shortlived_prove(cfg, args):
    family = shortlived.CertFamily.from_dict(json.loads(_read_text(args.family)))
    path = shortlived.prove_member(family, args.day)
    member = {
        'payload': base64.b64encode(shortlived.family_log_payload(family).encode()).decode('ascii'),
        'certificate': base64.b64encode(family.certificates[args.day].serialize()).decode('ascii'),
        'path': [node.hex() for node in path],
        'window_ms': family.window_ms,
    }
    _write_text(args.out, json.dumps(member, indent=2))
    _emit(cfg, f"Camino del día {args.day} ({len(path)} nodos) en {args.out}", member)
    return EXIT_OK


def cmd_shortlived_verify(cfg, args):
    member = json.loads(_read_text(args.member))
    cert = shortlived.DailyCertificate.deserialize(base64.b64decode(member['certificate']))
    now = args.now if args.now is not None else int(time.time() * 1000)
    accepted = shortlived.verify_member(base64.b64decode(member['payload']), cert,
                                        [bytes.fromhex(node) for node in member['path']], now,
                                        int(member.get('window_ms', shortlived.DAY_MS)))
    _emit(cfg, "✅ Certificado diario válido" if accepted else "❌ Certificado diario rechazado",
          {'accepted': accepted, 'day': cert.day_index, 'now': now})
    return EXIT_OK if accepted else EXIT_REJECT


# ====================
# bench
# ====================

def cmd_bench(cfg, args):
    result = bench.run_benchmark(args.runs, toy=args.toy or cfg.toy_keys, variant=args.variant)
    _emit(cfg, bench.format_report(result),
          {**result.summary(), 'table': result.table.reset_index().to_dict(orient='records')})
    return EXIT_OK


# ====================
# Parser
# ====================

def build_parser():
    parser = argparse.ArgumentParser(prog='ctzk', description="Log CT con pruebas de exclusión en conocimiento "
                                                              "cero, subdominios privados y certificados de vida corta")
    parser.add_argument('--keys', help="fichero de claves del log (CTZK_KEYS_PATH)")
    parser.add_argument('--params', help="fichero de parámetros Pedersen (CTZK_PARAMS_PATH)")
    parser.add_argument('--journal', help="journal del log local (CTZK_JOURNAL_PATH)")
    parser.add_argument('--url', help="URL del log remoto (CTZK_LOG_URL)")
    parser.add_argument('--output', choices=('human', 'json'), help="formato de salida (CTZK_OUTPUT)")
    parser.add_argument('-v', '--verbose', action='store_true', help="logs de nivel INFO")
    groups = parser.add_subparsers(dest='group', required=True)

    log_p = groups.add_parser('log', help="operar el log").add_subparsers(dest='action', required=True)
    p = log_p.add_parser('init', help="generar parámetros y claves")
    p.add_argument('--toy', action='store_true', help="tamaños de juguete (solo pruebas)")
    p.add_argument('--mode', choices=('sum', 'concat'), default='sum', help="sum = Π, concat = Π′")
    p.add_argument('--pubkeys', help="dónde escribir las claves públicas")
    p.set_defaults(handler=cmd_log_init)
    p = log_p.add_parser('submit', help="añadir una entrada")
    p.add_argument('--data')
    p.add_argument('--file')
    p.add_argument('--timestamp', type=int)
    p.add_argument('--out', help="guardar el SCT (base64)")
    p.set_defaults(handler=cmd_log_submit)
    p = log_p.add_parser('serve', help="servir el log por HTTP")
    p.add_argument('--port', type=int)
    p.add_argument('--mode', help="honest | omit-entry:K | refuse-timestamp-queries | dummy-sandwich:K")
    p.set_defaults(handler=cmd_log_serve)
    p = log_p.add_parser('sweep', help="barrido de monitor")
    p.add_argument('--pubkeys')
    p.set_defaults(handler=cmd_log_sweep)

    proof_p = groups.add_parser('proof', help="pruebas de exclusión").add_subparsers(dest='action', required=True)
    p = proof_p.add_parser('build')
    p.add_argument('--sct', required=True, help="SCT en base64")
    p.add_argument('--variant', choices=tuple(zkexcl.VARIANTS), default='pi')
    p.add_argument('--out', required=True)
    p.add_argument('--pubkeys')
    p.add_argument('--no-mmd', action='store_true', help="no exigir que el MMD haya vencido")
    p.set_defaults(handler=cmd_proof_build)
    p = proof_p.add_parser('verify')
    p.add_argument('proof')
    p.add_argument('--variant', choices=tuple(zkexcl.VARIANTS))
    p.add_argument('--pubkeys')
    p.set_defaults(handler=cmd_proof_verify)
    p = proof_p.add_parser('inspect')
    p.add_argument('proof')
    p.set_defaults(handler=cmd_proof_inspect)

    game_p = groups.add_parser('game', help="juego de solidez").add_subparsers(dest='action', required=True)
    p = game_p.add_parser('run')
    p.add_argument('--strategy', choices=proofexcl_game.STRATEGIES, required=True)
    p.add_argument('--lambda', dest='security_parameter', type=int, default=8)
    p.add_argument('--seed', type=int)
    p.set_defaults(handler=cmd_game_run)

    sub_p = groups.add_parser('subdomain', help="subdominios privados").add_subparsers(dest='action', required=True)
    p = sub_p.add_parser('issue')
    p.add_argument('--domain', required=True)
    p.add_argument('--label', required=True)
    p.add_argument('--fields')
    p.add_argument('--out', required=True)
    p.set_defaults(handler=cmd_subdomain_issue)
    p = sub_p.add_parser('verify')
    p.add_argument('certificate')
    p.add_argument('--pubkeys')
    p.set_defaults(handler=cmd_subdomain_verify)
    p = sub_p.add_parser('count')
    p.add_argument('--domain', required=True)
    p.add_argument('--expected', type=int)
    p.set_defaults(handler=cmd_subdomain_count)

    sl_p = groups.add_parser('shortlived', help="familias de vida corta").add_subparsers(dest='action', required=True)
    p = sl_p.add_parser('build')
    p.add_argument('--fields')
    p.add_argument('--start', required=True, help="AAAA-MM-DD o ms")
    p.add_argument('--days', type=int, required=True)
    p.add_argument('--window-ms', type=int, default=shortlived.DAY_MS)
    p.add_argument('--submit', action='store_true', help="registrar la familia en el log")
    p.add_argument('--out', required=True)
    p.set_defaults(handler=cmd_shortlived_build)
    p = sl_p.add_parser('prove')
    p.add_argument('family')
    p.add_argument('--day', type=int, required=True)
    p.add_argument('--out', required=True)
    p.set_defaults(handler=cmd_shortlived_prove)
    p = sl_p.add_parser('verify')
    p.add_argument('member')
    p.add_argument('--now', type=int, help="instante en ms (por defecto, ahora)")
    p.set_defaults(handler=cmd_shortlived_verify)

    p = groups.add_parser('bench', help="tiempos y tamaños de las pruebas")
    p.add_argument('--runs', type=int, default=bench.DEFAULT_RUNS)
    p.add_argument('--toy', action='store_true')
    p.add_argument('--variant', choices=tuple(zkexcl.VARIANTS), default='pi')
    p.set_defaults(handler=cmd_bench)
    return parser


def dispatch(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    try:
        cfg = build_cli_config(args)
        configure_logging(logging.INFO if args.verbose else logging.WARNING, cfg.log_file)
        return args.handler(cfg, args)
    except ServiceError as e:
        logger.error(f"❌ Error de red: {e}")
        print(f"Error de red: {e}", file=sys.stderr)
        return EXIT_IO
    except OSError as e:
        print(f"Error de E/S: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(dispatch())


if __name__ == '__main__':
    main()
