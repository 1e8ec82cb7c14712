"""
Line-oriented profile files.

    profile <name>
    root <uri>|<local>
    rule <parent-uri>|<parent-local> : <child-uri>|<child-local> <min>..<max|*> [open]
    rule <parent-uri>|<parent-local> : none [open]
    instr <id> <kind> <uri>|<local> scope=<uri>|<local> [n=<int>] [-- <description>]

One ``rule`` line per allowed child; lines for the same parent form one rule,
in order. A rule is open when any of its lines carries ``open``. Blank lines
and lines starting with ``#`` are ignored; any other directive is an error.
An empty namespace URI is written as nothing before the bar (``|Wrapper``).
"""
import logging
import re
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

from config.constants import PROFILE_DIR, PROFILE_SUFFIX
from structure_guard.errors import ProfileParseError, UnknownProfile
from structure_guard.instructions import InstructionKind, ValidationInstruction
from structure_guard.rules import ChildAllowance, StructureRule, StructureRuleSet
from xml_core import QName

logger = logging.getLogger(__name__)

_OCCURS = re.compile(r"^(\d+)\.\.(\d+|\*)$")


class Profile(NamedTuple):
    rules: StructureRuleSet
    instructions: List[ValidationInstruction]


def _qname(token: str, source: str, line: int) -> QName:
    uri, bar, local = token.rpartition("|")
    if not bar:
        raise ProfileParseError(f"expected <uri>|<local>, found {token!r}", source, line)
    try:
        return QName(local, uri)
    except ValueError as e:
        raise ProfileParseError(str(e), source, line) from e


def _format_qname(name: QName) -> str:
    return f"{name.namespace_uri}|{name.local_name}"


def parse_profile(text: str, source: str = "<string>") -> Profile:
    """Parse profile text; raises ProfileParseError with the offending line."""
    name: Optional[str] = None
    root: Optional[QName] = None
    order: List[QName] = []
    children: Dict[QName, List[ChildAllowance]] = {}
    open_contexts = set()
    instructions: List[ValidationInstruction] = []

    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        directive, _, rest = line.partition(" ")
        rest = rest.strip()

        if directive == "profile":
            if name is not None:
                raise ProfileParseError("profile name given twice", source, number)
            if not rest or " " in rest:
                raise ProfileParseError("profile needs a single name token", source, number)
            name = rest

        elif directive == "root":
            if root is not None:
                raise ProfileParseError("root given twice", source, number)
            root = _qname(rest, source, number)

        elif directive == "rule":
            parent_text, colon, child_text = rest.partition(" : ")
            if not colon:
                raise ProfileParseError("rule needs '<parent> : <child> <occurs>'", source, number)
            context = _qname(parent_text.strip(), source, number)
            tokens = child_text.split()
            is_open = bool(tokens) and tokens[-1] == "open"
            if is_open:
                tokens = tokens[:-1]
            if context not in children:
                order.append(context)
                children[context] = []
            if is_open:
                open_contexts.add(context)
            if tokens == ["none"]:
                continue
            if len(tokens) != 2:
                raise ProfileParseError("rule child needs '<uri>|<local> <min>..<max>'", source, number)
            child = _qname(tokens[0], source, number)
            match = _OCCURS.match(tokens[1])
            if not match:
                raise ProfileParseError(f"bad occurrence range {tokens[1]!r}", source, number)
            upper = None if match.group(2) == "*" else int(match.group(2))
            try:
                children[context].append(ChildAllowance(child, int(match.group(1)), upper))
            except ValueError as e:
                raise ProfileParseError(str(e), source, number) from e

        elif directive == "instr":
            body, _, description = rest.partition(" -- ")
            tokens = body.split()
            if len(tokens) < 4:
                raise ProfileParseError("instr needs '<id> <kind> <target> scope=<scope>'", source, number)
            instr_id, kind_text, target_text, scope_text = tokens[:4]
            try:
                kind = InstructionKind(kind_text)
            except ValueError:
                raise ProfileParseError(f"unknown instruction kind {kind_text!r}", source, number)
            if not scope_text.startswith("scope="):
                raise ProfileParseError("instr scope must be written scope=<uri>|<local>", source, number)
            n = None
            for extra in tokens[4:]:
                if extra.startswith("n=") and extra[2:].isdigit() and n is None:
                    n = int(extra[2:])
                else:
                    raise ProfileParseError(f"unexpected instr argument {extra!r}", source, number)
            try:
                instructions.append(
                    ValidationInstruction(
                        id=instr_id,
                        kind=kind,
                        target=_qname(target_text, source, number),
                        scope=_qname(scope_text[len("scope="):], source, number),
                        n=n,
                        description=description.strip(),
                    )
                )
            except ValueError as e:
                raise ProfileParseError(str(e), source, number) from e

        else:
            raise ProfileParseError(f"unknown directive {directive!r}", source, number)

    if name is None:
        raise ProfileParseError("missing 'profile <name>' line", source)
    ids = [i.id for i in instructions]
    if len(set(ids)) != len(ids):
        raise ProfileParseError("instruction ids must be unique", source)
    try:
        rule_set = StructureRuleSet(
            name=name,
            rules=tuple(
                StructureRule(context, tuple(children[context]), context in open_contexts) for context in order
            ),
            root=root,
        )
    except ValueError as e:
        raise ProfileParseError(str(e), source) from e
    return Profile(rule_set, instructions)


def save_profile(rules: StructureRuleSet, instructions: Sequence[ValidationInstruction]) -> str:
    """Canonical profile text; parse_profile(save_profile(...)) restores the same objects."""
    lines = [f"profile {rules.name}"]
    if rules.root is not None:
        lines.append(f"root {_format_qname(rules.root)}")
    for rule in rules.rules:
        flag = " open" if rule.open else ""
        parent = _format_qname(rule.context)
        if not rule.allowed_children:
            lines.append(f"rule {parent} : none{flag}")
        for allowance in rule.allowed_children:
            lines.append(f"rule {parent} : {_format_qname(allowance.name)} {allowance.occurs_text}{flag}")
    for instruction in instructions:
        parts = [
            "instr",
            instruction.id,
            instruction.kind.value,
            _format_qname(instruction.target),
            f"scope={_format_qname(instruction.scope)}",
        ]
        if instruction.n is not None:
            parts.append(f"n={instruction.n}")
        line = " ".join(parts)
        if instruction.description:
            line += f" -- {instruction.description}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def _looks_like_path(name_or_file: str) -> bool:
    return name_or_file.endswith(PROFILE_SUFFIX) or "/" in name_or_file or "\\" in name_or_file


def load_profile(name_or_file: Union[str, Path]) -> Profile:
    """
    Load a shipped profile by name or parse a profile file.

    Raises:
        UnknownProfile: the name matches no file under config/profiles
        ProfileParseError: the file is missing or malformed
    """
    if isinstance(name_or_file, Path) or _looks_like_path(str(name_or_file)):
        path = Path(name_or_file)
    else:
        path = PROFILE_DIR / f"{name_or_file}{PROFILE_SUFFIX}"
        if not path.is_file():
            raise UnknownProfile(f"no profile named {name_or_file!r} in {PROFILE_DIR}")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ProfileParseError(f"cannot read profile: {e}", str(path)) from e
    profile = parse_profile(text, str(path))
    logger.debug("Loaded profile %s: %d rules, %d instructions", profile.rules.name,
                 len(profile.rules.rules), len(profile.instructions))
    return profile
