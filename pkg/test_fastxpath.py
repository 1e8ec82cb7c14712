import random

import pytest
from lxml import etree

from attack_forge import AttackKind, AttackVariant, WrapPlacement, forge
from fastxpath import (
    AmbiguityUnresolvable,
    FastXPathExpr,
    FastXPathStep,
    SubsetViolation,
    evaluate,
    expressions_equal,
    generate_for,
    parse_fastxpath,
)
from xml_core import NodePath, QName, parse, rebind_prefixes, serialize
from xmldsig.layout import BODY

NAMESPACES = ["", "urn:a", "urn:b"]
LOCAL_NAMES = ["A", "B", "C", "Body"]
WSU = "http://docs.oasis-open.org/wss/2004/01/oasis-200401-wss-wssecurity-utility-1.0.xsd"


def lxml_path(el) -> NodePath:
    steps = []
    while el is not None:
        parent = el.getparent()
        index = 0 if parent is None else [c for c in parent if isinstance(c.tag, str)].index(el)
        name = etree.QName(el)
        steps.append((index, QName(name.localname, name.namespace or "")))
        el = parent
    return NodePath(tuple(reversed(steps)))


def random_element(rng: random.Random, depth: int, counter: list):
    uri = rng.choice(NAMESPACES)
    local = rng.choice(LOCAL_NAMES)
    tag = f"{{{uri}}}{local}" if uri else local
    el = etree.Element(tag, nsmap={"a": "urn:a", "b": "urn:b", "wsu": WSU})
    if rng.random() < 0.4:
        el.set("k", rng.choice(["1", "2", "x"]))
    if rng.random() < 0.3:
        counter[0] += 1
        el.set(f"{{{WSU}}}Id", f"id-{counter[0]}")
    if depth < 4:
        for _ in range(rng.randint(0, 3)):
            el.append(random_element(rng, depth + 1, counter))
    return el


def random_step(rng: random.Random, el=None) -> FastXPathStep:
    if el is not None and rng.random() < 0.8:
        name = etree.QName(el)
        local, uri = name.localname, name.namespace or ""
    else:
        local, uri = rng.choice(LOCAL_NAMES), rng.choice(NAMESPACES)
    predicates = []
    if rng.random() < 0.25:
        predicates.append((QName("k"), rng.choice(["1", "2", "x"])))
    if rng.random() < 0.1:
        value = el.get(f"{{{WSU}}}Id") if el is not None and el.get(f"{{{WSU}}}Id") else "id-1"
        predicates.append((QName("Id", WSU), value))
    return FastXPathStep(local, uri, tuple(predicates))


def random_expression(rng: random.Random, root) -> FastXPathExpr:
    # Walk down the real tree most of the time so that many expressions select something
    steps = []
    el = root
    for _ in range(rng.randint(1, 4)):
        steps.append(random_step(rng, el))
        children = [c for c in el] if el is not None else []
        el = rng.choice(children) if children else None
    return FastXPathExpr(tuple(steps))


def test_evaluation_matches_lxml_on_random_documents():
    rng = random.Random(20240607)
    checked = 0
    selected = 0
    for _ in range(200):
        root = random_element(rng, 0, [0])
        data = etree.tostring(root)
        doc = parse(data)
        tree = etree.fromstring(data)
        for _ in range(6):
            expr = random_expression(rng, tree)
            expected = [lxml_path(el) for el in tree.getroottree().xpath(expr.to_text())]
            assert evaluate(expr, doc) == expected, expr.to_text()
            checked += 1
            selected += bool(expected)
    assert checked >= 1000
    assert selected > 100


def test_text_form_parses_back():
    rng = random.Random(7)
    for _ in range(200):
        root = random_element(rng, 0, [0])
        expr = random_expression(rng, root)
        parsed = parse_fastxpath(expr.to_text())
        assert expressions_equal(parsed, expr)
        assert parsed == expr


def test_whitespace_is_ignored():
    text = '/*[local-name()="Envelope" and namespace-uri()="urn:s"]/*[local-name()="Body" and namespace-uri()="urn:s"]'
    spaced = text.replace("/*", "\n  /*").replace(" and ", "   and\n ")
    assert parse_fastxpath(spaced) == parse_fastxpath(text)
    assert parse_fastxpath(spaced).source_text == spaced


def test_single_quotes_are_accepted():
    expr = parse_fastxpath("/*[local-name()='a' and namespace-uri()='' and @k='v']")
    assert expr.steps == (FastXPathStep("a", "", ((QName("k"), "v"),)),)


@pytest.mark.parametrize("text", [
    "",
    '//*[local-name()="a" and namespace-uri()=""]',
    '/*[local-name()="a" and namespace-uri()=""]/..',
    "/soap:Envelope",
    "/Envelope",
    '*[local-name()="a" and namespace-uri()=""]',
    '/*[local-name()="a"]',
    '/*[local-name()="a" and namespace-uri()="" or @k="1"]',
    '/*[contains(local-name(), "a") and namespace-uri()=""]',
    '/*[local-name()="a" and namespace-uri()="" and @w:k="1"]',
    '/*[local-name()="a" and namespace-uri()="" and local-name()="b"]',
    '/*[local-name()="a" and namespace-uri()=""',
    '/*[local-name()="a and namespace-uri()=""]',
    '/*[local-name()="p:a" and namespace-uri()=""]',
    '/*[1]',
])
def test_outside_the_subset_is_rejected(text):
    with pytest.raises(SubsetViolation):
        parse_fastxpath(text)


def test_generated_expressions_single_out_their_target():
    rng = random.Random(99)
    generated = 0
    for _ in range(100):
        doc = parse(etree.tostring(random_element(rng, 0, [0])))
        for path, _ in doc.iter_elements():
            try:
                expr = generate_for(doc, path)
            except AmbiguityUnresolvable:
                continue
            assert evaluate(expr, doc) == [path]
            assert parse_fastxpath(expr.to_text()) == expr
            generated += 1
    assert generated > 100


def test_generator_uses_ids_to_separate_siblings():
    doc = parse(
        f'<r xmlns:wsu="{WSU}"><b wsu:Id="one"/><b wsu:Id="two"/></r>'.encode("utf-8")
    )
    target = doc.root_path.child(1, QName("b"))
    expr = generate_for(doc, target)
    assert expr.steps[-1].attr_predicates == ((QName("Id", WSU), "two"),)
    assert evaluate(expr, doc) == [target]


def test_generator_fails_on_indistinguishable_siblings():
    doc = parse(b"<r><b/><b/></r>")
    with pytest.raises(AmbiguityUnresolvable):
        generate_for(doc, doc.root_path.child(0, QName("b")))


def test_generator_honours_explicit_disambiguator():
    doc = parse(b'<r><b k="1"/><b k="2"/></r>')
    expr = generate_for(doc, doc.root_path.child(0, QName("b")), QName("k"))
    assert "@k=\"1\"" in expr.to_text()


def test_prefixes_play_no_part():
    one = parse(b'<x:r xmlns:x="urn:a"><x:b/></x:r>')
    two = parse(b'<y:r xmlns:y="urn:a"><b xmlns="urn:a"/></y:r>')
    expr = parse_fastxpath(
        '/*[local-name()="r" and namespace-uri()="urn:a"]/*[local-name()="b" and namespace-uri()="urn:a"]'
    )
    assert len(evaluate(expr, one)) == 1
    assert len(evaluate(expr, two)) == 1


def test_source_text_is_not_part_of_equality():
    step = FastXPathStep("a", "")
    assert FastXPathExpr((step,), "one") == FastXPathExpr((step,), "two")


def test_prefix_rebinding_leaves_results_unchanged():
    rng = random.Random(20240607)
    renamed_any = 0
    for _ in range(200):
        root = random_element(rng, 0, [0])
        doc = parse(etree.tostring(root))
        renamed = rebind_prefixes(doc, lambda prefix: f"x{prefix}")
        renamed_any += serialize(renamed) != serialize(doc)
        for _ in range(6):
            expr = random_expression(rng, root)
            assert evaluate(expr, renamed) == evaluate(expr, doc), expr.to_text()
    assert renamed_any > 100


def test_generated_reference_for_a_signed_body_element(data_message, data_expression):
    [body] = data_message.child_paths(data_message.root_path, BODY)
    target = data_message.child_paths(body)[0]
    expr = generate_for(data_message, target)
    assert expr.to_text() == data_expression
    assert expressions_equal(expr, parse_fastxpath(data_expression))
    assert evaluate(parse_fastxpath(data_expression), data_message) == [target]


def test_second_body_makes_the_reference_ambiguous(data_message, data_expression):
    [body] = data_message.child_paths(data_message.root_path, BODY)
    target = data_message.child_paths(body)[0]
    wrapped = forge(data_message, AttackVariant(AttackKind.GENERIC_WRAP, "transfer 9999 EUR", target=target,
                                                wrap_placement=WrapPlacement.SIBLING_CONTAINER))
    matches = evaluate(parse_fastxpath(data_expression), wrapped)
    assert len(matches) == 2
    assert [wrapped.node_at(path).text_content() for path in matches] == ["transfer 9999 EUR", "transfer 10 EUR"]

    pinned = parse_fastxpath(data_expression[:-1] + ' and @id="original"]')
    [signed] = evaluate(pinned, wrapped)
    assert signed == matches[1]
