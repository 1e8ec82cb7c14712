import pytest
import yaml
from lxml import etree

from config.constants import GROUND_TRUTH_C14N, XML_NS
from xml_core import (
    CanonicalizationError,
    NodePath,
    QName,
    XmlAttribute,
    canonicalize,
    canonicalize_node,
    element,
    parse,
    serialize,
    text_node,
)

# Each input marks the canonicalized subtree with t="1"; the .c14n file next
# to it holds the expected octets.
VECTORS = sorted(path.stem for path in GROUND_TRUTH_C14N.glob("*.xml"))
INCLUSIVE_PREFIXES = yaml.safe_load((GROUND_TRUTH_C14N / "inclusive_prefixes.yaml").read_text(encoding="utf-8"))


def load_vector(name: str):
    data = (GROUND_TRUTH_C14N / f"{name}.xml").read_bytes()
    expected = (GROUND_TRUTH_C14N / f"{name}.c14n").read_bytes()
    return data, expected, tuple(INCLUSIVE_PREFIXES.get(name, ()))


def lxml_path(el) -> NodePath:
    steps = []
    while el is not None:
        parent = el.getparent()
        index = 0 if parent is None else [c for c in parent if isinstance(c.tag, str)].index(el)
        name = etree.QName(el)
        steps.append((index, QName(name.localname, name.namespace or "")))
        el = parent
    return NodePath(tuple(reversed(steps)))


def marked(doc) -> NodePath:
    [path] = [path for path, node in doc.iter_elements() if node.get("t") == "1"]
    return path


def test_vector_set_is_complete():
    assert len(VECTORS) >= 20
    assert set(INCLUSIVE_PREFIXES) <= set(VECTORS)


@pytest.mark.parametrize("name", VECTORS)
def test_frozen_vectors(name):
    data, expected, prefixes = load_vector(name)
    doc = parse(data)
    assert canonicalize(doc, marked(doc), prefixes) == expected


@pytest.mark.parametrize("name", VECTORS)
def test_frozen_vectors_agree_with_lxml(name):
    data, expected, prefixes = load_vector(name)
    target = etree.fromstring(data).xpath("//*[@t]")[0]
    produced = etree.tostring(
        target,
        method="c14n",
        exclusive=True,
        with_comments=False,
        inclusive_ns_prefixes=list(prefixes) or None,
    )
    assert produced == expected


def test_signed_message_parts_match_lxml(fixtures):
    data = serialize(fixtures.benign)
    tree = etree.fromstring(data)
    for el in tree.iter():
        if not isinstance(el.tag, str):
            continue
        expected = etree.tostring(el, method="c14n", exclusive=True, with_comments=False)
        assert canonicalize(fixtures.benign, lxml_path(el)) == expected


def test_prefix_rename_changes_canonical_form():
    a = parse(b'<x:a xmlns:x="urn:x"/>')
    b = parse(b'<y:a xmlns:y="urn:x"/>')
    assert canonicalize(a, a.root_path) != canonicalize(b, b.root_path)


def test_unused_declaration_is_dropped():
    doc = parse(b'<a xmlns:x="urn:x"><b/></a>')
    assert canonicalize(doc, doc.root_path) == b"<a><b></b></a>"


def test_unbound_prefix_is_an_error():
    node = element(QName("a", "urn:x"), prefix="x")
    with pytest.raises(CanonicalizationError):
        canonicalize_node(node)


def test_xml_prefix_is_bound_for_detached_nodes():
    node = element(
        QName("a"),
        attributes=[XmlAttribute(QName("lang", XML_NS), "de", "xml")],
        children=[text_node("Hallo")],
    )
    assert canonicalize_node(node) == b'<a xml:lang="de">Hallo</a>'
    assert canonicalize_node(node, {"x": "urn:x"}) == b'<a xml:lang="de">Hallo</a>'
