"""Line-based configuration files.

The format is deliberately small: ``key = value`` pairs, optional
``[section]`` headers grouping keys by subcommand, blank lines and
``#`` comments.  Keys may use ``-`` or ``_`` interchangeably.  Values
stay strings here; the consumer converts them with the same parsers it
uses for command-line flags.
"""

from __future__ import annotations


class ConfigError(Exception):
    """A configuration file problem, with a human-readable location."""


def parse_config(path):
    """Parse a config file into ``{section: {key: raw_value}}``.

    Keys before any section header land in section ``"global"``.
    """
    sections: dict[str, dict[str, str]] = {}
    current = "global"
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[") and line.endswith("]"):
                current = line[1:-1].strip()
                if not current:
                    raise ConfigError(f"{path}:{lineno}: empty section name")
                continue
            key, sep, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if not sep or not key:
                raise ConfigError(
                    f"{path}:{lineno}: expected 'key = value', got {line!r}"
                )
            sections.setdefault(current, {})[key] = value.strip()
    return sections


def lookup(config, section, key):
    """Section value with fallback to the global section; None if absent."""
    if key in config.get(section, {}):
        return config[section][key]
    return config.get("global", {}).get(key)
