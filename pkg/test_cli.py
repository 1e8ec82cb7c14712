import json

import pytest
import yaml

from main import main
from xml_core import parse, serialize
from xmldsig.layout import BODY


@pytest.fixture(scope="module")
def identities(tmp_path_factory):
    root = tmp_path_factory.mktemp("identities")
    for name in ("client", "attacker"):
        assert main(["keygen", "--cn", name.title(), "--out", str(root / f"{name}.pem"),
                     "--cert-out", str(root / f"{name}.crt")]) == 0
    return root


@pytest.fixture
def signed(tmp_path, identities):
    request = tmp_path / "request.xml"
    assert main(["request", "--challenge", "abc123", "--out", str(request)]) == 0
    out = tmp_path / "signed.xml"
    assert main(["sign", "--in", str(request), "--key", str(identities / "client.pem"), "--out", str(out)]) == 0
    return out


def trust(identities):
    return ["--trust-cert", str(identities / "client.crt")]


def test_verify_accepts_a_signed_request(signed, identities, capsys):
    assert main(["verify", "--in", str(signed)] + trust(identities)) == 0
    out = capsys.readouterr().out
    assert out.startswith("ACCEPTED (hardened) signer CN=Client")


def test_verify_json_report(signed, identities, capsys):
    assert main(["verify", "--in", str(signed), "--report", "json"] + trust(identities)) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["verdict"] == "accepted"


def test_verify_without_trust_is_an_error(signed):
    assert main(["verify", "--in", str(signed)]) == 1


def test_untrusted_signer_is_rejected(signed, identities):
    assert main(["verify", "--in", str(signed), "--trust-cert", str(identities / "attacker.crt")]) == 2


def test_attacks_from_the_command_line(tmp_path, identities, capsys):
    request = tmp_path / "request.xml"
    captured = tmp_path / "captured.xml"
    main(["request", "--challenge", "abc123", "--out", str(request)])
    assert main(["sign", "--in", str(request), "--key", str(identities / "client.pem"),
                 "--id-references", "--out", str(captured)]) == 0
    assert main(["verify", "--in", str(captured)] + trust(identities)) == 2
    assert main(["verify", "--in", str(captured), "--unsafe-naive"] + trust(identities)) == 0

    out_dir = tmp_path / "attacks"
    assert main(["attack", "--in", str(captured), "--all", "--challenge", "fresh",
                 "--cert", str(identities / "attacker.crt"), "--out-dir", str(out_dir)]) == 0
    manifest = yaml.safe_load((out_dir / "manifest.yaml").read_text(encoding="utf-8"))
    assert list(manifest) == ["source", "wrapper", "attacks"]
    labels = [entry["label"] for entry in manifest["attacks"]]
    assert len(labels) == 5
    for label in labels:
        forged = str(out_dir / f"{label}.xml")
        assert main(["verify", "--in", forged] + trust(identities)) == 2
        assert main(["verify", "--in", forged, "--unsafe-naive"] + trust(identities)) == 0

    single = tmp_path / "svc.xml"
    assert main(["attack", "--in", str(captured), "--variant", "sibling-value-challenge",
                 "--challenge", "fresh", "--cert", str(identities / "attacker.crt"), "--out", str(single)]) == 0
    capsys.readouterr()
    assert main(["audit", "--in", str(single)] + trust(identities)) == 2
    assert "[FAIL] structure" in capsys.readouterr().out


def test_attack_argument_errors(signed, identities):
    cert = ["--cert", str(identities / "attacker.crt")]
    assert main(["attack", "--in", str(signed), "--all"] + cert) == 1
    assert main(["attack", "--in", str(signed), "--variant", "sibling-value-challenge"] + cert) == 1
    assert main(["attack", "--in", str(signed), "--variant", "bogus", "--out", "x.xml"] + cert) == 1


def test_xpath_gen_and_pretty(tmp_path, capsys):
    doc = tmp_path / "doc.xml"
    doc.write_bytes(
        b'<r xmlns:wsu="http://docs.oasis-open.org/wss/2004/01/oasis-200401-wss-wssecurity-utility-1.0.xsd">'
        b'<b wsu:Id="one"/><b wsu:Id="two"/></r>'
    )
    assert main(["xpath-gen", "--in", str(doc), "--id", "two"]) == 0
    expr = capsys.readouterr().out.strip()
    assert expr.startswith('/*[local-name()="r" and namespace-uri()=""]')
    assert '"two"' in expr

    assert main(["pretty", "--in", str(doc)]) == 0
    assert "\n  <b" in capsys.readouterr().out
    assert main(["xpath-gen", "--in", str(doc), "--id", "missing"]) == 1


def test_matrix_command(tmp_path, capsys):
    out = tmp_path / "matrix.json"
    summary = tmp_path / "summary.yaml"
    assert main(["matrix", "--out", str(out), "--summary", str(summary)]) == 0
    assert "Accuracy: 100.00%" in capsys.readouterr().out
    assert len(json.loads(out.read_text(encoding="utf-8"))["cells"]) == 10
    assert yaml.safe_load(summary.read_text(encoding="utf-8"))["hardened"]["sibling-value-challenge"] == "structure"


def test_simulate_in_process(capsys):
    assert main(["simulate", "--mode", "naive", "--report", "json"]) == 0
    outcomes = json.loads(capsys.readouterr().out)["outcomes"]
    assert [o["accepted"] for o in outcomes if o["request"].endswith("certificate")] == [True, True]


@pytest.mark.parametrize("argv", [
    [],
    ["verify"],
    ["verify", "--in", "x.xml", "--bogus"],
    ["no-such-command"],
])
def test_usage_errors(argv):
    assert main(argv) == 1


def test_missing_input_file(identities, tmp_path):
    assert main(["verify", "--in", str(tmp_path / "absent.xml")] + trust(identities)) == 1


def test_help_exits_cleanly():
    assert main(["--help"]) == 0


def test_signed_output_parses(signed):
    assert parse(signed.read_bytes()).root.name.local_name == "Envelope"


def test_generic_wrap_into_a_sibling_body(tmp_path, identities, data_message):
    source = tmp_path / "data.xml"
    source.write_bytes(serialize(data_message))
    out = tmp_path / "second-body.xml"
    assert main(["attack", "--in", str(source), "--variant", "generic-wrap", "--target-id", "original",
                 "--wrap-placement", "sibling-container", "--challenge", "transfer 9999 EUR",
                 "--cert", str(identities / "attacker.crt"), "--out", str(out)]) == 0
    forged = parse(out.read_bytes())
    bodies = forged.child_paths(forged.root_path, BODY)
    assert [forged.node_at(b).text_content() for b in bodies] == ["transfer 9999 EUR", "transfer 10 EUR"]
