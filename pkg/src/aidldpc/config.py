"""Flat ``key = value`` configuration files.

``#`` starts a comment. Output files written by the CLI begin with a header
of ``#@ key = value`` lines; :func:`read_kv_file` on such a file returns that
header, so a result file can be fed back as ``--config`` to rerun it.
"""

from __future__ import annotations

from pathlib import Path

HEADER_PREFIX = "#@ "


class ConfigError(ValueError):
    def __init__(self, message, path=None, line=None):
        where = f"{path}:{line}: " if path is not None and line is not None else ""
        super().__init__(where + message)
        self.path = path
        self.line = line


def parse_kv(text: str, path=None) -> dict[str, str]:
    lines = text.splitlines()
    if lines and lines[0].startswith(HEADER_PREFIX):
        return _parse_header(lines, path)
    out = {}
    for no, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", path, no)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError("empty key", path, no)
        out[key] = value
    return out


def _parse_header(lines, path):
    out = {}
    for no, raw in enumerate(lines, start=1):
        if not raw.startswith(HEADER_PREFIX):
            break
        body = raw[len(HEADER_PREFIX):]
        if "=" not in body:
            raise ConfigError(f"malformed header line {raw!r}", path, no)
        key, value = (part.strip() for part in body.split("=", 1))
        out[key] = value
    return out


def read_kv_file(path) -> dict[str, str]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_kv(text, path)


def format_header(values: dict) -> str:
    return "".join(f"{HEADER_PREFIX}{k} = {v}\n" for k, v in values.items())


def format_real(x: float) -> str:
    """Shortest text that round-trips to the same double (at most 17 significant digits)."""
    return repr(float(x))
