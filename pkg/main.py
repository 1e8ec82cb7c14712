#!/usr/bin/env python3
import argparse
import sys
import logging
from pathlib import Path
from typing import List, Optional

from config.constants import (
    EXIT_ERROR,
    EXIT_OK,
    EXIT_REJECTED,
    GROUND_TRUTH_MATRIX,
    PHR_LISTEN_HOST,
    PHR_LISTEN_PORT,
    PHR_POLICY,
    PHR_SERVER_MODE,
    PHR_SERVICE_KEY,
)
from attack_forge import CERTIFICATE_KINDS, CHALLENGE_KINDS, AttackKind, AttackVariant, forge, forge_all
from cli import audit, render_checklist
from fastxpath import generate_for
from metrics import MatrixEvaluator
from output_generator import JSONGenerator, YAMLGenerator
from phr_harness import (
    AuthenticationService,
    PhrClient,
    Rejection,
    ServerMode,
    build_fixture_set,
    build_token_request,
    new_challenge_value,
    run_fixture_matrix,
    simulate_session,
    verify_assertion,
)
from xml_core import QName, parse, pretty_print, resolve_id, serialize
from xmldsig import (
    generate_identity,
    load_certificate,
    load_policy,
    load_signing_key,
    save_identity,
    sign,
    sign_with_id_references,
    verify_hardened,
    verify_naive,
)


class CliParser(argparse.ArgumentParser):
    """Usage errors exit 1, like every other operational failure."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def setup_logging(verbose: bool = False) -> logging.Logger:
    """Set up logging configuration."""
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(
        level=level,
        format='%(message)s'
    )
    return logging.getLogger(__name__)


def _add_policy(parser, trust: bool = True):
    parser.add_argument('--policy', type=str, default=PHR_POLICY,
                        help=f'Policy name or YAML path (default: {PHR_POLICY})')
    if trust:
        parser.add_argument('--trust', action='append', default=[], metavar='SHA256',
                            help='Trusted certificate fingerprint (repeatable)')
        parser.add_argument('--trust-cert', action='append', default=[], metavar='PEM',
                            help='Trusted certificate file (repeatable)')


def _add_report(parser):
    parser.add_argument('--report', choices=['text', 'json'], default='text',
                        help='Output format (default: text)')


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(
        description='XML Signature wrapping toolkit: sign, verify, forge attacks, and run the PHR login harness'
    )
    parser.add_argument('--verbose', action='store_true', help='Enable verbose output')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('keygen', help='Create a test identity (RSA key + self-signed certificate)')
    p.add_argument('--cn', required=True, help='Certificate common name')
    p.add_argument('--out', required=True, help='PEM bundle to write (key followed by certificate)')
    p.add_argument('--cert-out', help='Also write the certificate alone to this file')

    p = sub.add_parser('request', help='Write an unsigned LoginCreateToken request')
    p.add_argument('--challenge', help='Challenge to carry (generated when omitted)')
    p.add_argument('--out', required=True)

    p = sub.add_parser('sign', help='Sign a document with prefix-free FastXPath references')
    p.add_argument('--in', dest='input', required=True)
    p.add_argument('--key', required=True, help='PEM bundle of the signer')
    p.add_argument('--id-references', action='store_true',
                   help='Sign the Body with an URI="#id" reference instead (produces attack fixtures)')
    p.add_argument('--out', required=True)
    _add_policy(p, trust=False)

    p = sub.add_parser('verify', help='Verify a signed document')
    p.add_argument('--in', dest='input', required=True)
    p.add_argument('--unsafe-naive', action='store_true',
                   help='Use the deliberately vulnerable verifier (attack demonstrations only)')
    _add_policy(p)
    _add_report(p)

    p = sub.add_parser('attack', help='Forge signature wrapping attacks from a signed document')
    p.add_argument('--in', dest='input', required=True)
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument('--variant', help='Attack kind')
    which.add_argument('--all', action='store_true', help='Forge the four PHR attacks and the prefix probe')
    p.add_argument('--challenge', help='Fresh challenge to inject (generated when omitted)')
    p.add_argument('--cert', help='Certificate (PEM or DER) to inject (a new identity when omitted)')
    p.add_argument('--placement', default='two-security-headers',
                   help='Sibling certificate placement (two-security-headers, same-security, second-header)')
    p.add_argument('--wrap-placement', choices=['wrapper', 'sibling-container'], default='wrapper',
                   help='Where generic-wrap leaves the signed target')
    p.add_argument('--wrapper', default='Wrapper', help='Wrapper element name, "{uri}local" for a namespace')
    p.add_argument('--target-id', help='ID of the target element for generic-wrap and optional-element-erase')
    p.add_argument('--out', help='Output file (with --variant)')
    p.add_argument('--out-dir', help='Output directory (with --all)')

    p = sub.add_parser('simulate', help='Run the PHR authentication service')
    p.add_argument('--mode', choices=['naive', 'hardened'], default=PHR_SERVER_MODE)
    p.add_argument('--listen', help='Serve over HTTP on host:port instead of running in-process')
    p.add_argument('--service-key', default=PHR_SERVICE_KEY, help='PEM bundle of the service identity')
    _add_policy(p)
    _add_report(p)

    p = sub.add_parser('client', help='Log in against a running service')
    p.add_argument('--server', required=True, help='Base URL, e.g. http://127.0.0.1:8000')
    p.add_argument('--key', required=True, help='PEM bundle of the client')
    p.add_argument('--service-cert', help='Verify the returned assertion against this certificate')
    _add_policy(p, trust=False)
    _add_report(p)

    p = sub.add_parser('matrix', help='Run the differential attack matrix')
    p.add_argument('--out', help='Write the matrix report as JSON')
    p.add_argument('--summary', help='Also write a YAML summary')
    p.add_argument('--ground-truth', default=str(GROUND_TRUTH_MATRIX))
    p.add_argument('--policy', type=str, default=PHR_POLICY)

    p = sub.add_parser('xpath-gen', help='Print the prefix-free FastXPath selecting an element')
    p.add_argument('--in', dest='input', required=True)
    p.add_argument('--id', required=True, help='ID value of the target element')
    p.add_argument('--disambiguator', help='Attribute for sibling predicates, "{uri}local" or "local"')

    p = sub.add_parser('audit', help='Run every verification stage and print a checklist')
    p.add_argument('--in', dest='input', required=True)
    _add_policy(p)
    _add_report(p)

    p = sub.add_parser('pretty', help='Pretty-print a document (never feed the result to a verifier)')
    p.add_argument('--in', dest='input', required=True)
    return parser


def _qname(text: str) -> QName:
    if text.startswith('{') and '}' in text:
        uri, local = text[1:].split('}', 1)
        return QName(local, uri)
    return QName(text)


def _read_doc(path: str):
    return parse(Path(path).read_bytes())


def _trusted_policy(args, logger):
    policy = load_policy(args.policy, trust_certs=args.trust_cert, trust_fingerprints=args.trust)
    if not policy.trust_anchors:
        logger.error("No trust anchors: pass --trust, --trust-cert or list them in the policy")
        return None
    return policy


def _print_json(data) -> None:
    print(JSONGenerator().generate(data))


def cmd_keygen(args, logger) -> int:
    identity = generate_identity(args.cn)
    save_identity(identity, args.out)
    if args.cert_out:
        Path(args.cert_out).write_bytes(identity.certificate.to_pem())
    logger.info(f"Wrote identity CN={args.cn} to {args.out}")
    logger.info(f"Fingerprint: {identity.certificate.fingerprint}")
    return EXIT_OK


def cmd_request(args, logger) -> int:
    Path(args.out).write_bytes(serialize(build_token_request(args.challenge or new_challenge_value())))
    logger.info(f"Request written to: {args.out}")
    return EXIT_OK


def cmd_sign(args, logger) -> int:
    key = load_signing_key(args.key)
    if args.id_references:
        logger.warning("Signing with ID references: the result is wrappable and only fit for attack fixtures")
        signed = sign_with_id_references(_read_doc(args.input), key)
    else:
        signed = sign(_read_doc(args.input), load_policy(args.policy), key)
    Path(args.out).write_bytes(serialize(signed))
    logger.info(f"Signed document written to: {args.out}")
    return EXIT_OK


def cmd_verify(args, logger) -> int:
    policy = _trusted_policy(args, logger)
    if policy is None:
        return EXIT_ERROR
    doc = _read_doc(args.input)
    if args.unsafe_naive:
        logger.warning("UNSAFE: naive verifier selected; its verdict is not a security decision")
        report = verify_naive(doc, policy.trust_anchors)
    else:
        report = verify_hardened(doc, policy)

    if args.report == 'json':
        _print_json(report.to_dict())
    elif report.accepted:
        signer = report.signer_certificate.subject_fields
        print(f"ACCEPTED ({report.verifier}) signer CN={signer.common_name}")
        for location in report.verified_locations:
            print(f"  verified {location.path}")
    else:
        print(f"REJECTED ({report.verifier}) at {report.failure.stage.value}: {report.failure.reason}")
    return EXIT_OK if report.accepted else EXIT_REJECTED


def cmd_attack(args, logger) -> int:

    doc = _read_doc(args.input)
    challenge = args.challenge or new_challenge_value()
    if args.cert:
        injected = load_certificate(args.cert).der
    else:
        injected = generate_identity("Attacker").certificate.der
        logger.info("Injecting a newly generated certificate CN=Attacker")
    wrapper = _qname(args.wrapper)

    if args.all:
        if not args.out_dir:
            logger.error("--all needs --out-dir")
            return EXIT_ERROR
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        entries = []
        for variant, forged in forge_all(doc, challenge, injected, wrapper):
            target = out_dir / f"{variant.label}.xml"
            target.write_bytes(serialize(forged))
            entries.append({"label": variant.label, "kind": variant.kind.value,
                            "file": target.name, "description": variant.describe()})
            logger.info(f"Wrote {target}")
        manifest = {"source": str(args.input), "wrapper": wrapper.clark, "attacks": entries}
        path = YAMLGenerator().save(manifest, out_dir / "manifest.yaml")
        logger.info(f"Manifest written to: {path}")
        return EXIT_OK

    if not args.out:
        logger.error("--variant needs --out")
        return EXIT_ERROR
    kind = AttackKind(args.variant)
    if kind in CHALLENGE_KINDS:
        payload = challenge
    elif kind in CERTIFICATE_KINDS:
        payload = injected
    else:
        payload = args.challenge
    target = resolve_id(doc, args.target_id) if args.target_id else None
    variant = AttackVariant(kind, payload, wrapper=wrapper, target=target, placement=args.placement,
                           wrap_placement=args.wrap_placement)
    Path(args.out).write_bytes(serialize(forge(doc, variant)))
    logger.info(f"Forged {variant.label} written to: {args.out}")
    return EXIT_OK


def _build_service(args, policy):
    mode = ServerMode.hardened(policy) if args.mode == 'hardened' else ServerMode.naive(policy.trust_anchors)
    key = load_signing_key(args.service_key) if args.service_key else None
    return AuthenticationService(mode, service_key=key)


def cmd_simulate(args, logger) -> int:

    if args.listen:
        import uvicorn
        from app import create_app
        policy = _trusted_policy(args, logger)
        if policy is None:
            return EXIT_ERROR
        host, _, port = args.listen.rpartition(':')
        uvicorn.run(create_app(_build_service(args, policy)), host=host or PHR_LISTEN_HOST,
                    port=int(port or PHR_LISTEN_PORT))
        return EXIT_OK

    client = generate_identity("TestPatient")
    attacker = generate_identity("Attacker")
    policy = load_policy(args.policy, trust_certs=args.trust_cert, trust_fingerprints=args.trust)
    policy = policy.with_trust([client.certificate.fingerprint])
    outcomes = simulate_session(_build_service(args, policy), client, attacker, policy)
    if args.report == 'json':
        _print_json({"mode": args.mode, "outcomes": [o.as_dict() for o in outcomes]})
    else:
        for outcome in outcomes:
            result = f"assertion for CN={outcome.subject}" if outcome.accepted else f"rejected: {outcome.reason}"
            print(f"{outcome.request:<30} {result}")
    return EXIT_OK


def cmd_client(args, logger) -> int:
    service_cert = load_certificate(args.service_cert) if args.service_cert else None
    with PhrClient(args.server, load_signing_key(args.key), load_policy(args.policy)) as client:
        try:
            assertion = client.login(service_cert)
        except Rejection as e:
            logger.error(f"Login rejected: {e}")
            return EXIT_REJECTED
    if args.report == 'json' and service_cert is not None:
        _print_json(verify_assertion(assertion, service_cert).as_dict())
    else:
        print(pretty_print(assertion))
    return EXIT_OK


def cmd_matrix(args, logger) -> int:

    report = run_fixture_matrix(build_fixture_set(args.policy))
    if args.out:
        JSONGenerator().save(report.to_dict(), args.out)
        logger.info(f"Matrix report written to: {args.out}")
    if args.summary:
        summary = {mode: {doc: (cell.stage or cell.verdict) for doc, cell in report.row(mode).items()}
                   for mode in ("naive", "hardened")}
        YAMLGenerator().save(summary, args.summary, raw=True)

    evaluator = MatrixEvaluator(args.ground_truth, report)
    msg, acc = evaluator.accuracy()
    probe_msg, probe_acc = evaluator.accuracy("probes")
    print("--- Attack Matrix ---")
    print(msg)
    print(f"Accuracy: {acc:.2%}")
    print("--- Probes ---")
    print(probe_msg)
    print(f"Accuracy: {probe_acc:.2%}")
    return EXIT_OK if acc == 1 and probe_acc == 1 else EXIT_REJECTED


def cmd_xpath_gen(args, logger) -> int:
    doc = _read_doc(args.input)
    disambiguator = _qname(args.disambiguator) if args.disambiguator else None
    print(generate_for(doc, resolve_id(doc, args.id), disambiguator).to_text())
    return EXIT_OK


def cmd_audit(args, logger) -> int:
    policy = _trusted_policy(args, logger)
    if policy is None:
        return EXIT_ERROR
    result = audit(args.input, policy)
    if args.report == 'json':
        _print_json(result.to_dict())
    else:
        print(render_checklist(result))
    return EXIT_OK if result.accepted else EXIT_REJECTED


def cmd_pretty(args, logger) -> int:
    print(pretty_print(_read_doc(args.input)))
    return EXIT_OK


COMMANDS = {
    'keygen': cmd_keygen,
    'request': cmd_request,
    'sign': cmd_sign,
    'verify': cmd_verify,
    'attack': cmd_attack,
    'simulate': cmd_simulate,
    'client': cmd_client,
    'matrix': cmd_matrix,
    'xpath-gen': cmd_xpath_gen,
    'audit': cmd_audit,
    'pretty': cmd_pretty,
}


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_ERROR
    logger = setup_logging(verbose=args.verbose)

    try:
        return COMMANDS[args.command](args, logger)
    except Exception as e:
        logger.error(f"{args.command} failed: {e}")
        if args.verbose:
            logger.exception("Detailed error information:")
        return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
