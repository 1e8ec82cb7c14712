import re
from collections import namedtuple
from typing import List

Token = namedtuple("Token", ["kind", "value", "offset"])

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
    |(?P<string>"[^"]*"|'[^']*')
    |(?P<dslash>//)
    |(?P<dotdot>\.\.)
    |(?P<punct>[/\[\]()=@*])
    |(?P<name>[A-Za-z_][A-Za-z0-9_.\-]*)
    |(?P<other>.)
    """,
    re.VERBOSE | re.DOTALL,
)


def tokenize(text: str) -> List[Token]:
    """Split expression text into tokens; string tokens carry their unquoted value."""
    tokens = []
    for match in _TOKEN.finditer(text):
        kind = match.lastgroup
        if kind == "ws":
            continue
        value = match.group(kind)
        if kind == "string":
            value = value[1:-1]
        tokens.append(Token(kind, value, match.start()))
    return tokens
