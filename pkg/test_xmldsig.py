import random
import string

import pytest

from attack_forge import AttackKind, AttackVariant, forge
from config.constants import SIG_RSA_SHA256, SOAP12_NS, WSU_NS, WST_NS
from phr_harness import build_token_request, challenge_in
from xml_core import (
    QName,
    XmlAttribute,
    append_child,
    detach,
    insert_after,
    parse,
    remove_node,
    serialize,
    text_node,
    update_node,
)
from xmldsig import (
    Certificate,
    FailureCode,
    NotAccepted,
    PolicyLoadError,
    PolicyViolation,
    Stage,
    ensure_security_token,
    extract_signer_identity,
    load_certificate,
    load_policy,
    load_signing_key,
    save_identity,
    sign,
    sign_with_id_references,
    verify_hardened,
    verify_naive,
)
from xmldsig.layout import (
    BINARY_SECURITY_TOKEN,
    BODY,
    CHALLENGE,
    HEADER,
    REFERENCE,
    SIGNATURE,
    SIGNATURE_VALUE,
    URI,
    WSSE_REFERENCE,
    WSU_ID,
)

TEXT_ALPHABET = string.ascii_letters + string.digits + " &<>\"'-_.é"


def challenge_path(doc):
    body = doc.child_paths(doc.root_path, BODY)[0]
    return doc.child_paths(body, CHALLENGE)[0]


def set_challenge(doc, value):
    return update_node(doc, challenge_path(doc), lambda n: n.with_children([text_node(value)]))


def test_signed_request_verifies(client_key, policy):
    signed = sign(build_token_request("abc123"), policy, client_key)
    report = verify_hardened(signed, policy)
    assert report.accepted, report.failure
    assert report.verifier == "hardened"
    assert report.stage_reached is Stage.CRYPTO
    assert extract_signer_identity(report).common_name == "TestPatient"
    assert {loc.path.name for loc in report.verified_locations} == {BODY, BINARY_SECURITY_TOKEN}
    body = next(loc for loc in report.verified_locations if loc.path.name == BODY)
    assert body.path.depth == 2
    assert all(result.passed for result in report.stage_results)


def test_signed_request_uses_prefix_free_references(client_key, policy):
    signed = sign(build_token_request("abc123"), policy, client_key)
    references = signed.paths_named(REFERENCE)
    assert len(references) == 2
    assert all(signed.node_at(r).get(URI) == "" for r in references)
    text = serialize(signed)
    assert b'local-name()="Body"' in text
    body = signed.node_at(signed.child_paths(signed.root_path, BODY)[0])
    assert body.attributes == ()


def test_signed_request_survives_serialization(client_key, policy):
    signed = sign(build_token_request("abc123"), policy, client_key)
    assert verify_hardened(parse(serialize(signed)), policy).accepted


def test_random_messages_round_trip(client_key, policy):
    rng = random.Random(1234)
    for i in range(100):
        value = "".join(rng.choice(TEXT_ALPHABET) for _ in range(rng.randint(1, 40)))
        prefixes = {f"s{rng.randint(0, 9)}": SOAP12_NS, f"t{rng.randint(0, 9)}": WST_NS} if i % 2 else None
        signed = sign(build_token_request(value, prefixes), policy, client_key)
        wire = parse(serialize(signed))
        hardened = verify_hardened(wire, policy)
        assert hardened.accepted, (value, hardened.failure)
        assert challenge_in(wire, wire.child_paths(wire.root_path, BODY)[0]) == value.strip()
        assert verify_naive(wire, policy.trust_anchors).accepted


def test_any_change_to_the_challenge_breaks_the_digest(fixtures):
    rng = random.Random(42)
    original = fixtures.signed_challenge
    mutations = 0
    for _ in range(500):
        chars = list(original)
        position = rng.randrange(len(chars))
        chars[position] = rng.choice([c for c in string.ascii_letters + string.digits if c != chars[position]])
        mutated = set_challenge(fixtures.benign, "".join(chars))
        report = verify_hardened(mutated, fixtures.policy)
        assert not report.accepted
        assert report.failure.stage is Stage.CRYPTO
        assert report.failure.code is FailureCode.DIGEST_MISMATCH
        mutations += 1
    assert mutations == 500


def flip_one(value: str, rng: random.Random) -> str:
    chars = list(value)
    position = rng.randrange(len(chars))
    chars[position] = rng.choice([c for c in string.ascii_letters + string.digits if c != chars[position]])
    return "".join(chars)


def test_any_change_to_the_signed_token_is_rejected(fixtures):
    rng = random.Random(43)
    doc = fixtures.benign
    [token_path] = doc.paths_named(BINARY_SECURITY_TOKEN)
    token = doc.node_at(token_path)
    for _ in range(100):
        value = flip_one(token.text_content(), rng)
        mutated = update_node(doc, token_path, lambda n, v=value: n.with_children([text_node(v)]))
        assert not verify_hardened(mutated, fixtures.policy).accepted
    assert token.attributes
    for attr in token.attributes:
        for _ in range(20):
            changed = [
                XmlAttribute(a.name, flip_one(a.value, rng), a.prefix) if a.name == attr.name else a
                for a in token.attributes
            ]
            mutated = update_node(doc, token_path, lambda n, c=tuple(changed): n.with_attributes(c))
            assert not verify_hardened(mutated, fixtures.policy).accepted, attr.name


def test_any_attribute_added_to_the_signed_body_is_rejected(fixtures):
    rng = random.Random(44)
    doc = fixtures.benign
    body = doc.child_paths(doc.root_path, BODY)[0]
    for _ in range(50):
        name = "".join(rng.choice(string.ascii_lowercase) for _ in range(rng.randint(1, 8)))
        value = "".join(rng.choice(TEXT_ALPHABET) for _ in range(rng.randint(0, 12)))
        mutated = update_node(doc, body, lambda n, a=XmlAttribute(QName(name), value): n.with_attributes([a]))
        assert not verify_hardened(mutated, fixtures.policy).accepted, name
        rewired = parse(serialize(mutated))
        assert not verify_hardened(rewired, fixtures.policy).accepted, name


def test_untrusted_certificate(fixtures, attacker_key):
    signed_by_attacker = sign(build_token_request("abc"), fixtures.policy, attacker_key)
    report = verify_hardened(signed_by_attacker, fixtures.policy)
    assert report.failure.stage is Stage.CRYPTO
    assert report.failure.code is FailureCode.UNTRUSTED_CERTIFICATE


def test_no_trust_anchors_rejects_everything(fixtures):
    untrusting = load_policy("phr")
    report = verify_hardened(fixtures.benign, untrusting)
    assert report.failure.code is FailureCode.UNTRUSTED_CERTIFICATE


def test_tampered_signature_value(fixtures):
    doc = fixtures.benign
    value_path = doc.paths_named(SIGNATURE_VALUE)[0]
    original = doc.node_at(value_path).text_content()
    flipped = ("B" if original[0] == "A" else "A") + original[1:]
    tampered = update_node(doc, value_path, lambda n: n.with_children([text_node(flipped)]))
    report = verify_hardened(tampered, fixtures.policy)
    assert report.failure.stage is Stage.CRYPTO
    assert report.failure.code is FailureCode.SIGNATURE_INVALID


def test_algorithm_must_match_policy(fixtures):
    report = verify_hardened(fixtures.benign, fixtures.policy.with_sig_alg(SIG_RSA_SHA256))
    assert report.failure.code is FailureCode.ALGORITHM_MISMATCH


def test_pkcs1_policy_round_trip(client_key, policy):
    pkcs1 = policy.with_sig_alg(SIG_RSA_SHA256)
    assert verify_hardened(sign(build_token_request("abc"), pkcs1, client_key), pkcs1).accepted


def test_id_references_fail_the_reference_check(fixtures):
    report = verify_hardened(fixtures.captured, fixtures.policy)
    assert report.failure.stage is Stage.REFERENCE_CHECK
    assert report.failure.code is FailureCode.REFERENCE_SCHEME
    assert report.failure.reason.startswith("non-FastXPath referencing scheme URI='#")


def test_naive_verifier_accepts_id_references(fixtures):
    report = verify_naive(fixtures.captured, fixtures.policy.trust_anchors)
    assert report.accepted
    assert report.verifier == "naive"
    assert report.verified_locations[0].reference.startswith("#")


def test_missing_signature(fixtures):
    report = verify_hardened(build_token_request("abc"), fixtures.policy)
    assert report.failure.stage is Stage.SIGNATURE_PRESENCE
    assert report.failure.code is FailureCode.SIGNATURE_MISSING
    assert verify_naive(build_token_request("abc"), fixtures.policy.trust_anchors).failure.code is FailureCode.SIGNATURE_MISSING


def test_second_signature_is_malformed(fixtures):
    doc = fixtures.benign
    signature = doc.paths_named(SIGNATURE)[0]
    doubled = insert_after(doc, signature, doc.node_at(signature))
    report = verify_hardened(doubled, fixtures.policy)
    assert report.failure.stage is Stage.SIGNATURE_PRESENCE
    assert report.failure.code is FailureCode.SIGNATURE_MALFORMED


def test_signature_outside_security_is_malformed(fixtures):
    doc = fixtures.benign
    signature = doc.paths_named(SIGNATURE)[0]
    header = doc.child_paths(doc.root_path, HEADER)[0]
    moved = append_child(remove_node(doc, signature), header, detach(doc, signature))
    report = verify_hardened(moved, fixtures.policy)
    assert report.failure.stage is Stage.SIGNATURE_PRESENCE


def test_token_outside_security_is_a_key_resolution_failure(fixtures):
    # Point the SecurityTokenReference at an ID carried by the Body instead of the token
    doc = fixtures.benign
    body = doc.child_paths(doc.root_path, BODY)[0]
    doc = update_node(doc, body, lambda n: n.with_attributes(
        list(n.attributes) + [XmlAttribute(WSU_ID, "elsewhere", "wsu")]
    ).with_namespace_decls(list(n.namespace_decls) + [("wsu", WSU_ID.namespace_uri)]))
    str_ref = doc.paths_named(WSSE_REFERENCE)[0]
    doc = update_node(doc, str_ref, lambda n: n.with_attributes(
        [a if a.name != URI else XmlAttribute(URI, "#elsewhere") for a in n.attributes]
    ))
    report = verify_hardened(doc, fixtures.policy)
    assert report.failure.stage is Stage.REFERENCE_CHECK
    assert report.failure.code is FailureCode.KEY_RESOLUTION


def test_prefix_redefinition_does_not_change_the_verdict(fixtures):
    probe = forge(fixtures.benign, AttackVariant(AttackKind.PREFIX_REDEFINITION))
    assert verify_hardened(probe, fixtures.policy).accepted


def test_sign_refuses_nonconforming_documents(client_key, policy):
    doc = build_token_request("abc")
    body = doc.child_paths(doc.root_path, BODY)[0]
    with pytest.raises(PolicyViolation):
        sign(insert_after(doc, body, doc.node_at(body)), policy, client_key)
    with pytest.raises(PolicyViolation):
        sign(parse(b"<NotAnEnvelope/>"), policy, client_key)


def test_sign_refuses_a_second_signature(fixtures):
    with pytest.raises(PolicyViolation):
        sign(fixtures.benign, fixtures.policy, fixtures.client)


def test_sign_reuses_a_matching_token(client_key, attacker_key, policy):
    doc, _, _ = ensure_security_token(build_token_request("abc"), client_key.certificate)
    signed = sign(doc, policy, client_key)
    assert len(signed.paths_named(BINARY_SECURITY_TOKEN)) == 1
    assert verify_hardened(signed, policy).accepted
    with pytest.raises(PolicyViolation):
        sign(doc, policy, attacker_key)


def test_rejected_reports_carry_no_identity(fixtures):
    report = verify_hardened(fixtures.captured, fixtures.policy)
    with pytest.raises(NotAccepted):
        extract_signer_identity(report)
    as_dict = report.to_dict()
    assert as_dict["verdict"] == "rejected"
    assert as_dict["failure_stage"] == "reference-check"
    assert as_dict["signer_common_name"] is None
    assert [r["stage"] for r in as_dict["stage_results"]] == [
        "structure", "signature-presence", "instructions", "reference-check", "crypto"
    ]


def test_report_dict_of_an_accepted_request(fixtures):
    as_dict = verify_hardened(fixtures.benign, fixtures.policy).to_dict()
    assert as_dict["verdict"] == "accepted"
    assert as_dict["signer_common_name"] == "TestPatient"
    assert as_dict["signer_fingerprint"] == fixtures.client.certificate.fingerprint
    assert len(as_dict["verified_locations"]) == 2


def test_identity_files_round_trip(tmp_path, client_key):
    path = save_identity(client_key, tmp_path / "keys" / "client.pem")
    loaded = load_signing_key(path)
    assert loaded.certificate == client_key.certificate
    cert_path = tmp_path / "client.crt"
    cert_path.write_bytes(client_key.certificate.to_pem())
    assert load_certificate(cert_path).fingerprint == client_key.certificate.fingerprint
    assert load_certificate(client_key.certificate.der) == client_key.certificate
    assert Certificate.from_base64(client_key.certificate.base64) == client_key.certificate


def test_policy_trust_from_certificate_files(tmp_path, client_key):
    cert_path = tmp_path / "client.crt"
    cert_path.write_bytes(client_key.certificate.to_pem())
    policy = load_policy("phr", trust_certs=[cert_path])
    assert policy.trust_anchors == (client_key.certificate.fingerprint,)
    assert policy.with_trust([client_key.certificate.fingerprint.upper()]).trust_anchors == policy.trust_anchors


def test_policy_load_errors(tmp_path):
    with pytest.raises(PolicyLoadError):
        load_policy("no-such-policy")
    bad = tmp_path / "bad.yaml"
    bad.write_text("name: bad\nprofile: soap12-hardened-phr\nreferences:\n  - //Body\n", encoding="utf-8")
    with pytest.raises(PolicyLoadError):
        load_policy(bad)
    empty = tmp_path / "empty.yaml"
    empty.write_text("name: empty\nprofile: soap12-hardened-phr\nreferences: []\n", encoding="utf-8")
    with pytest.raises(PolicyLoadError):
        load_policy(empty)


def test_policy_ships_the_expected_references():
    policy = load_policy("phr")
    names = [expr.steps[-1].name for expr in policy.expected_references]
    assert names == [BODY, BINARY_SECURITY_TOKEN]


def body_with(doc, decls, attributes):
    body = doc.child_paths(doc.root_path, BODY)[0]
    return update_node(
        doc,
        body,
        lambda n: n.with_namespace_decls(list(n.namespace_decls) + decls).with_attributes(
            list(n.attributes) + attributes
        ),
    )


def test_id_is_added_without_rebinding_a_local_wsu_prefix(client_key, policy):
    other = QName("flag", "urn:other")
    doc = body_with(build_token_request("abc"), [("wsu", "urn:other")], [XmlAttribute(other, "1", "wsu")])
    signed = sign_with_id_references(doc, client_key)
    body = signed.node_at(signed.child_paths(signed.root_path, BODY)[0])
    assert ("wsu", "urn:other") in body.namespace_decls
    assert ("wsu1", WSU_NS) in body.namespace_decls
    assert body.get(other) == "1"
    assert body.get(WSU_ID) is not None
    assert verify_naive(parse(serialize(signed)), policy.trust_anchors).accepted


def test_id_reuses_a_prefix_already_bound_to_wsu(client_key):
    doc = body_with(build_token_request("abc"), [("u", WSU_NS)], [])
    signed = sign_with_id_references(doc, client_key)
    body = signed.node_at(signed.child_paths(signed.root_path, BODY)[0])
    assert body.namespace_decls.count(("u", WSU_NS)) == 1
    assert [a.prefix for a in body.attributes if a.name == WSU_ID] == ["u"]
