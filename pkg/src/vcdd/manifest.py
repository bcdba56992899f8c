"""Plain-text run manifests.

One ``key=value`` pair per line after a comment header.  Keys are CLI flag
names without the leading dashes; booleans are ``true``/``false``, lists are
comma-separated and unset optional values are written as ``none``.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

HEADER = "# vcdd run manifest"
FORMAT = 1


def render(command: str, items: dict) -> str:
    lines = [HEADER, f"format={FORMAT}", f"command={command}"]
    for key, value in items.items():
        lines.append(f"{key}={encode(value)}")
    return "\n".join(lines) + "\n"


def encode(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(encode(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    text = str(value)
    if "\n" in text:
        raise ValueError(f"value {text!r} cannot be stored in a manifest")
    return text


def parse(text: str) -> tuple[str, dict[str, str]]:
    """Return ``(command, raw string values)``."""
    items: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"manifest line {lineno} has no '='")
        if key in items:
            raise ValueError(f"manifest key {key!r} repeated on line {lineno}")
        items[key] = value
    if items.pop("format", None) != str(FORMAT):
        raise ValueError(f"manifest format must be {FORMAT}")
    command = items.pop("command", None)
    if not command:
        raise ValueError("manifest has no command")
    return command, items


def read(path) -> tuple[str, dict[str, str]]:
    return parse(Path(path).read_text(encoding="utf-8"))


def digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]
