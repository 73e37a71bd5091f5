"""Line-oriented config grammar.

Sections are headed by ``[section.name]``, entries are ``key = value`` and
``#`` starts a comment. Keys are case-sensitive. Parsing is delegated to
:mod:`configparser`; its syntax errors are re-raised as :class:`ConfigError`
carrying the offending line number.
"""

import configparser
from pathlib import Path

from .errors import ConfigError, DuplicateKeyError


def _parser():
    cp = configparser.ConfigParser(
        delimiters=("=",),
        comment_prefixes=("#",),
        inline_comment_prefixes=("#",),
        strict=True,
        interpolation=None,
        empty_lines_in_values=False,
        default_section="__defaults__",
    )
    cp.optionxform = str
    return cp


def parse_config(text, source="<string>"):
    """Parse config text into ``{section: {key: value}}``, preserving order."""
    cp = _parser()
    try:
        cp.read_string(text, source=str(source))
    except configparser.DuplicateOptionError as exc:
        raise DuplicateKeyError(
            f"duplicate key in section [{exc.section}] of {source}",
            key=exc.option, lineno=exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise DuplicateKeyError(
            f"duplicate section [{exc.section}] in {source}",
            lineno=exc.lineno) from None
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(
            f"entry before any [section] header in {source}",
            lineno=exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigError(
            f"cannot parse {line.strip()!r} in {source}", lineno=lineno) from None
    return {name: dict(cp.items(name, raw=True)) for name in cp.sections()}


def read_config(path):
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text(encoding="utf-8"), source=path)


def parse_float(value, key):
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"expected a number, got {value!r}", key=key) from None


def parse_floats(value, key, n=None):
    items = [v.strip() for v in str(value).split(",") if v.strip()]
    out = [parse_float(v, key) for v in items]
    if n is not None and len(out) != n:
        raise ConfigError(f"expected {n} comma-separated numbers, got {value!r}", key=key)
    return out


def format_float(x):
    # repr round-trips exactly
    return repr(float(x))
