from xml_core.errors import (
    AmbiguityError,
    CanonicalizationError,
    PathResolutionError,
    UnsupportedConstruct,
    WellFormednessError,
    XmlCoreError,
)
from xml_core.model import (
    NodeKind,
    NodePath,
    QName,
    XmlAttribute,
    XmlDocument,
    XmlNode,
    comment_node,
    element,
    first_id_match,
    resolve_id,
    text_node,
)
from xml_core.parser import parse
from xml_core.serializer import pretty_print, serialize, serialize_node
from xml_core.c14n import canonicalize, canonicalize_node
from xml_core.edit import (
    append_child,
    detach,
    insert_after,
    insert_child,
    make_self_contained,
    rebind_prefixes,
    remove_node,
    replace_node,
    update_node,
)

__all__ = [
    "AmbiguityError",
    "CanonicalizationError",
    "PathResolutionError",
    "UnsupportedConstruct",
    "WellFormednessError",
    "XmlCoreError",
    "NodeKind",
    "NodePath",
    "QName",
    "XmlAttribute",
    "XmlDocument",
    "XmlNode",
    "comment_node",
    "element",
    "first_id_match",
    "resolve_id",
    "text_node",
    "parse",
    "pretty_print",
    "serialize",
    "serialize_node",
    "canonicalize",
    "canonicalize_node",
    "append_child",
    "detach",
    "insert_after",
    "insert_child",
    "make_self_contained",
    "rebind_prefixes",
    "remove_node",
    "replace_node",
    "update_node",
]
