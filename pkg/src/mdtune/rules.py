"""Access to the shipped default fuzzy rule set."""

from __future__ import annotations

from importlib import resources


def default_rules_text() -> str:
    return (resources.files("mdtune") / "data" / "default_rules.txt"
            ).read_text(encoding="utf-8")


def default_rule_base(space=None):
    from .fuzzy import parse_rule_file
    return parse_rule_file(default_rules_text(), space)
