"""Built-in datasets and the plain-text numeric reader."""

from __future__ import annotations

import re
from pathlib import Path

from .symmetry import Sample

# Darwin's maize: cross- minus self-fertilised height, eighths of an inch, 15 pairs
DARWIN_MAIZE = (49, 23, 56, -67, 28, 24, 8, 41, 75, 16, 14, 60, 6, 29, -48)

BUILTINS = {"darwin-maize": DARWIN_MAIZE}


class InputError(ValueError):
    pass


def parse_text(text: str) -> Sample:
    """Numbers separated by newlines, commas or whitespace; ``#`` starts a comment."""
    values = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0]
        for token in re.split(r"[,\s]+", line.strip()):
            if not token:
                continue
            # accept the unicode minus sign that word processors like to insert
            try:
                x = float(token.replace("−", "-"))
            except ValueError:
                raise InputError(f"line {lineno}: cannot parse {token!r} as a number") from None
            if x == 0:
                raise InputError(
                    f"line {lineno}: zero observation; the symmetry tests need every value to "
                    "carry a sign (drop zero differences before testing)"
                )
            values.append(x)
    if not values:
        raise InputError("input holds no observations")
    try:
        return Sample(values)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def ingest(source: str) -> Sample:
    """Load a sample from a file path, or a builtin id such as ``darwin-maize``."""
    path = Path(source)
    if path.is_file():
        try:
            text = path.read_text(encoding="utf-8")
        except UnicodeDecodeError as exc:
            raise InputError(f"{source}: not valid UTF-8 ({exc})") from None
        return parse_text(text)
    if source in BUILTINS:
        return Sample(BUILTINS[source])
    raise InputError(f"{source!r} is neither a readable file nor a builtin dataset "
                     f"({', '.join(sorted(BUILTINS))})")
