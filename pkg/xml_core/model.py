"""
Namespace-aware, immutable XML document model.

Nodes are frozen dataclasses; every change produces a new tree (see
``xml_core.edit``). Elements keep their lexical prefix and their own namespace
declarations so that serialization and exclusive canonicalization see exactly
what was parsed.
"""
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from config.constants import DEFAULT_ID_ATTRIBUTES, XML_NS
from xml_core.errors import AmbiguityError, PathResolutionError


@dataclass(frozen=True)
class QName:
    """Expanded name: local name plus namespace URI (never a prefix)."""
    local_name: str
    namespace_uri: str = ""

    def __post_init__(self):
        if not self.local_name:
            raise ValueError("QName local_name must not be empty")
        if ":" in self.local_name:
            raise ValueError(f"QName local_name must not contain a colon: {self.local_name!r}")

    @property
    def clark(self) -> str:
        if self.namespace_uri:
            return f"{{{self.namespace_uri}}}{self.local_name}"
        return self.local_name

    @property
    def sort_key(self) -> Tuple[str, str]:
        return (self.namespace_uri, self.local_name)

    @classmethod
    def from_clark(cls, text: str) -> "QName":
        if text.startswith("{"):
            uri, _, local = text[1:].partition("}")
            return cls(local, uri)
        return cls(text)

    def __str__(self) -> str:
        return self.clark


@dataclass(frozen=True)
class XmlAttribute:
    name: QName
    value: str
    prefix: Optional[str] = None


class NodeKind(str, Enum):
    ELEMENT = "element"
    TEXT = "text"
    COMMENT = "comment"


@dataclass(frozen=True)
class XmlNode:
    kind: NodeKind
    name: Optional[QName] = None
    prefix: Optional[str] = None
    attributes: Tuple[XmlAttribute, ...] = ()
    namespace_decls: Tuple[Tuple[str, str], ...] = ()
    children: Tuple["XmlNode", ...] = ()
    text: str = ""

    def __post_init__(self):
        if self.kind is NodeKind.ELEMENT:
            if self.name is None:
                raise ValueError("element nodes need a name")
            names = [a.name for a in self.attributes]
            if len(set(names)) != len(names):
                raise ValueError(f"duplicate attribute on element {self.name}")
            declared = [p for p, _ in self.namespace_decls]
            if len(set(declared)) != len(declared):
                raise ValueError(f"duplicate namespace declaration on element {self.name}")

    @property
    def is_element(self) -> bool:
        return self.kind is NodeKind.ELEMENT

    def element_children(self) -> Tuple["XmlNode", ...]:
        return tuple(c for c in self.children if c.kind is NodeKind.ELEMENT)

    def get(self, name: Union[QName, str], default: Optional[str] = None) -> Optional[str]:
        if isinstance(name, str):
            name = QName(name)
        for attr in self.attributes:
            if attr.name == name:
                return attr.value
        return default

    def text_content(self) -> str:
        if self.kind is NodeKind.TEXT:
            return self.text
        if self.kind is NodeKind.COMMENT:
            return ""
        return "".join(c.text_content() for c in self.children)

    def with_children(self, children: Iterable["XmlNode"]) -> "XmlNode":
        return replace(self, children=tuple(children))

    def with_attributes(self, attributes: Iterable[XmlAttribute]) -> "XmlNode":
        return replace(self, attributes=tuple(attributes))

    def without_attributes(self, names: Iterable[QName]) -> "XmlNode":
        drop = set(names)
        return replace(self, attributes=tuple(a for a in self.attributes if a.name not in drop))

    def with_namespace_decls(self, decls: Iterable[Tuple[str, str]]) -> "XmlNode":
        return replace(self, namespace_decls=tuple(decls))

    def iter_descendants(self) -> Iterator["XmlNode"]:
        """Element descendants in document order, self excluded."""
        for child in self.element_children():
            yield child
            yield from child.iter_descendants()


def element(
    name: QName,
    prefix: Optional[str] = None,
    attributes: Sequence[XmlAttribute] = (),
    namespace_decls: Sequence[Tuple[str, str]] = (),
    children: Sequence[XmlNode] = (),
) -> XmlNode:
    return XmlNode(
        kind=NodeKind.ELEMENT,
        name=name,
        prefix=prefix,
        attributes=tuple(attributes),
        namespace_decls=tuple(namespace_decls),
        children=tuple(children),
    )


def text_node(value: str) -> XmlNode:
    return XmlNode(kind=NodeKind.TEXT, text=value)


def comment_node(value: str) -> XmlNode:
    return XmlNode(kind=NodeKind.COMMENT, text=value)


@dataclass(frozen=True)
class NodePath:
    """Address of an element: (index among element children, name) per level."""
    steps: Tuple[Tuple[int, QName], ...]

    def __post_init__(self):
        if not self.steps:
            raise ValueError("NodePath needs at least the root step")

    @classmethod
    def root(cls, name: QName) -> "NodePath":
        return cls(((0, name),))

    def child(self, index: int, name: QName) -> "NodePath":
        return NodePath(self.steps + ((index, name),))

    @property
    def parent(self) -> Optional["NodePath"]:
        if len(self.steps) == 1:
            return None
        return NodePath(self.steps[:-1])

    @property
    def name(self) -> QName:
        return self.steps[-1][1]

    @property
    def index(self) -> int:
        return self.steps[-1][0]

    @property
    def depth(self) -> int:
        return len(self.steps)

    def is_ancestor_of(self, other: "NodePath") -> bool:
        return len(self.steps) < len(other.steps) and other.steps[: len(self.steps)] == self.steps

    def contains(self, other: "NodePath") -> bool:
        return self == other or self.is_ancestor_of(other)

    def as_list(self) -> List[List[Union[int, str]]]:
        return [[index, name.namespace_uri, name.local_name] for index, name in self.steps]

    @classmethod
    def from_list(cls, steps: Sequence[Sequence[Union[int, str]]]) -> "NodePath":
        return cls(tuple((int(i), QName(str(local), str(uri))) for i, uri, local in steps))

    def __str__(self) -> str:
        return "".join(f"/{name.local_name}[{index}]" for index, name in self.steps)


def _build_id_index(root: XmlNode, id_attributes: Tuple[QName, ...]) -> Dict[str, Tuple[NodePath, ...]]:
    index: Dict[str, List[NodePath]] = {}
    registered = set(id_attributes)
    for path, node in _walk(root, NodePath.root(root.name)):
        for attr in node.attributes:
            if attr.name in registered:
                index.setdefault(attr.value, []).append(path)
    return {value: tuple(paths) for value, paths in index.items()}


def _walk(node: XmlNode, path: NodePath) -> Iterator[Tuple[NodePath, XmlNode]]:
    yield path, node
    for i, child in enumerate(node.element_children()):
        yield from _walk(child, path.child(i, child.name))


DEFAULT_ID_QNAMES: Tuple[QName, ...] = tuple(QName(local, uri) for uri, local in DEFAULT_ID_ATTRIBUTES)


@dataclass(frozen=True)
class XmlDocument:
    root: XmlNode
    id_attributes: Tuple[QName, ...] = DEFAULT_ID_QNAMES
    id_index: Mapping[str, Tuple[NodePath, ...]] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if not self.root.is_element:
            raise ValueError("document root must be an element")
        object.__setattr__(self, "id_index", _build_id_index(self.root, tuple(self.id_attributes)))

    @property
    def root_path(self) -> NodePath:
        return NodePath.root(self.root.name)

    @property
    def duplicate_ids(self) -> Dict[str, Tuple[NodePath, ...]]:
        return {value: paths for value, paths in self.id_index.items() if len(paths) > 1}

    def iter_elements(self) -> Iterator[Tuple[NodePath, XmlNode]]:
        """All elements with their paths, in document order."""
        return _walk(self.root, self.root_path)

    def find(self, path: NodePath) -> Optional[XmlNode]:
        index, name = path.steps[0]
        if index != 0 or name != self.root.name:
            return None
        node = self.root
        for index, name in path.steps[1:]:
            children = node.element_children()
            if index < 0 or index >= len(children) or children[index].name != name:
                return None
            node = children[index]
        return node

    def node_at(self, path: NodePath) -> XmlNode:
        node = self.find(path)
        if node is None:
            raise PathResolutionError(f"path {path} does not resolve")
        return node

    def paths_named(self, name: QName) -> List[NodePath]:
        return [path for path, node in self.iter_elements() if node.name == name]

    def child_paths(self, path: NodePath, name: Optional[QName] = None) -> List[NodePath]:
        node = self.node_at(path)
        return [
            path.child(i, child.name)
            for i, child in enumerate(node.element_children())
            if name is None or child.name == name
        ]

    def in_scope_namespaces(self, path: Optional[NodePath]) -> Dict[str, str]:
        """Prefix → URI bindings in scope on the addressed element ('' is the default)."""
        scope: Dict[str, str] = {"xml": XML_NS}
        if path is None:
            return scope
        node = self.node_at(path)
        chain = [self.node_at(NodePath(path.steps[:i])) for i in range(1, len(path.steps))]
        for ancestor in chain + [node]:
            for prefix, uri in ancestor.namespace_decls:
                scope.pop(prefix, None)
                scope[prefix] = uri
        return scope


def resolve_id(doc: XmlDocument, id_value: str) -> NodePath:
    """Return the unique element carrying the ID; AmbiguityError on zero or several."""
    matches = doc.id_index.get(id_value, ())
    if len(matches) != 1:
        raise AmbiguityError(id_value, matches)
    return matches[0]


def first_id_match(doc: XmlDocument, id_value: str) -> Optional[NodePath]:
    """First element in document order carrying the ID, as a careless resolver would pick."""
    matches = doc.id_index.get(id_value, ())
    return matches[0] if matches else None
