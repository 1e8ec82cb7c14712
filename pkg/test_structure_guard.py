import pytest

from config.constants import PHR_PROFILE_NAME
from phr_harness import build_token_request
from structure_guard import (
    ChildAllowance,
    InstructionKind,
    ProfileParseError,
    StructureRule,
    StructureRuleSet,
    UnknownProfile,
    ValidationInstruction,
    apply_instructions,
    load_profile,
    parse_profile,
    save_profile,
    validate_structure,
)
from xml_core import QName, insert_after, parse

SOAP = "http://www.w3.org/2003/05/soap-envelope"
WSSE = "http://docs.oasis-open.org/wss/2004/01/oasis-200401-wss-wssecurity-secext-1.0.xsd"
HEADER = QName("Header", SOAP)
BODY = QName("Body", SOAP)
SECURITY = QName("Security", WSSE)


@pytest.fixture(scope="module")
def phr_profile():
    return load_profile(PHR_PROFILE_NAME)


def envelope(header: str = "<s:Header/>", body: str = "<s:Body><t:Challenge>c</t:Challenge></s:Body>") -> bytes:
    return (
        f'<s:Envelope xmlns:s="{SOAP}" xmlns:w="{WSSE}" '
        f'xmlns:t="http://docs.oasis-open.org/ws-sx/ws-trust/200512">{header}{body}</s:Envelope>'
    ).encode("utf-8")


def test_token_request_conforms(phr_profile):
    assert validate_structure(build_token_request("abc"), phr_profile.rules) == []


def test_second_body_exceeds_cardinality(phr_profile):
    doc = build_token_request("abc")
    body = doc.child_paths(doc.root_path, BODY)[0]
    doc = insert_after(doc, body, doc.node_at(body))
    violations = validate_structure(doc, phr_profile.rules)
    assert len(violations) == 1
    assert violations[0].rule_id == "rule:Envelope"
    assert "max_occurs=1" in violations[0].reason
    assert violations[0].path.index == 2


def test_unlisted_child_of_closed_rule(phr_profile):
    doc = parse(envelope(header="<s:Header/><x/>"))
    violations = validate_structure(doc, phr_profile.rules)
    assert [v.reason for v in violations] == ["x is not allowed here"]


def test_open_rule_accepts_unknown_children(phr_profile):
    doc = parse(envelope(header="<s:Header><w:Security/><Wrapper/></s:Header>"))
    assert validate_structure(doc, phr_profile.rules) == []


def test_closed_rule_enforces_order(phr_profile):
    doc = parse(envelope(header="", body="<s:Body><t:Challenge>c</t:Challenge></s:Body><s:Header/>"))
    reasons = [v.reason for v in validate_structure(doc, phr_profile.rules)]
    assert any("out of order" in r for r in reasons)


def test_missing_required_child(phr_profile):
    doc = parse(envelope(body="<s:Body/>"))
    reasons = [v.reason for v in validate_structure(doc, phr_profile.rules)]
    assert any("min_occurs=1" in r for r in reasons)


def test_character_data_in_closed_rule(phr_profile):
    doc = parse(envelope(body="<s:Body>loose<t:Challenge>c</t:Challenge></s:Body>"))
    reasons = [v.reason for v in validate_structure(doc, phr_profile.rules)]
    assert reasons == ["unexpected character data"]


def test_wrong_root(phr_profile):
    violations = validate_structure(parse(b"<Envelope/>"), phr_profile.rules)
    assert violations[0].rule_id == "root"


def test_instructions_count_per_scope(phr_profile):
    one_each = "<s:Header><w:Security><w:BinarySecurityToken>a</w:BinarySecurityToken></w:Security></s:Header>"
    assert apply_instructions(parse(envelope(header=one_each)), phr_profile.instructions) == []

    two_security = (
        "<s:Header><w:Security><w:BinarySecurityToken>a</w:BinarySecurityToken></w:Security>"
        "<w:Security><w:BinarySecurityToken>b</w:BinarySecurityToken></w:Security></s:Header>"
    )
    violations = apply_instructions(parse(envelope(header=two_security)), phr_profile.instructions)
    assert [v.rule_id for v in violations] == ["single-security"]


def test_exactly_one_token_per_security(phr_profile):
    two_tokens = (
        "<s:Header><w:Security><w:BinarySecurityToken>a</w:BinarySecurityToken>"
        "<w:BinarySecurityToken>b</w:BinarySecurityToken></w:Security></s:Header>"
    )
    violations = apply_instructions(parse(envelope(header=two_tokens)), phr_profile.instructions)
    assert [v.rule_id for v in violations] == ["single-token"]
    empty = apply_instructions(parse(envelope(header="<s:Header><w:Security/></s:Header>")), phr_profile.instructions)
    assert [v.rule_id for v in empty] == ["single-token"]


def test_forbid_instruction():
    forbid = ValidationInstruction("no-x", InstructionKind.FORBID, QName("x"), QName("r"))
    assert apply_instructions(parse(b"<r><a><x/></a></r>"), [forbid])[0].reason == "x is forbidden under r"
    assert apply_instructions(parse(b"<r><a/></r>"), [forbid]) == []


def test_instruction_arguments_are_checked():
    with pytest.raises(ValueError):
        ValidationInstruction("bad", InstructionKind.MAX_COUNT, QName("x"), QName("r"))
    with pytest.raises(ValueError):
        ValidationInstruction("bad", InstructionKind.EXACTLY_ONE, QName("x"), QName("r"), n=1)
    with pytest.raises(ValueError):
        ValidationInstruction("two words", InstructionKind.FORBID, QName("x"), QName("r"))


def test_max_occurs_lookup(phr_profile):
    rules = phr_profile.rules
    assert rules.max_occurs(QName("Envelope", SOAP), HEADER) == 1
    assert rules.max_occurs(HEADER, SECURITY) is None
    assert rules.max_occurs(QName("Envelope", SOAP), QName("Other")) == 0
    assert rules.max_occurs(HEADER, QName("Wrapper")) is None
    assert rules.max_occurs(QName("Unknown"), QName("Other")) is None


def test_profile_text_round_trip(phr_profile):
    text = save_profile(phr_profile.rules, phr_profile.instructions)
    assert parse_profile(text) == phr_profile


def test_profile_from_file(tmp_path):
    path = tmp_path / "tiny.profile"
    path.write_text("profile tiny\nroot |r\nrule |r : |a 0..2\nrule |a : none open\n", encoding="utf-8")
    profile = load_profile(path)
    assert profile.rules.root == QName("r")
    assert profile.rules.rule_for(QName("a")).open
    assert validate_structure(parse(b"<r><a><z/></a><a/></r>"), profile.rules) == []
    assert len(validate_structure(parse(b"<r><a/><a/><a/></r>"), profile.rules)) == 1


@pytest.mark.parametrize("text,line", [
    ("rule |r : |a 0..1\n", 0),
    ("profile p\nbogus line\n", 2),
    ("profile p\nrule |r : |a 2..1\n", 2),
    ("profile p\nrule |r : |a many\n", 2),
    ("profile p\nrule r : |a 0..1\n", 2),
    ("profile p\ninstr x unknown |a scope=|r\n", 2),
    ("profile p\ninstr x max-count |a scope=|r\n", 2),
    ("profile p\nrule |r : |a 0..1\nrule |r : |a 0..1\n", 0),
])
def test_profile_errors_name_the_line(text, line):
    with pytest.raises(ProfileParseError) as info:
        parse_profile(text)
    assert info.value.line == line


def test_unknown_profile_name():
    with pytest.raises(UnknownProfile):
        load_profile("no-such-profile")


def test_rule_objects_validate_themselves():
    with pytest.raises(ValueError):
        ChildAllowance(QName("a"), 2, 1)
    with pytest.raises(ValueError):
        StructureRule(QName("r"), (ChildAllowance(QName("a")), ChildAllowance(QName("a"))))
    with pytest.raises(ValueError):
        StructureRuleSet("s", (StructureRule(QName("r")), StructureRule(QName("r"))))


def test_empty_closed_rule_rejects_any_child():
    rules = StructureRuleSet("s", (StructureRule(QName("leaf")),))
    doc = parse(b"<r><leaf><x/></leaf></r>")
    assert [v.reason for v in validate_structure(doc, rules)] == ["x is not allowed here"]
    assert validate_structure(parse(b"<r><leaf/></r>"), rules) == []
