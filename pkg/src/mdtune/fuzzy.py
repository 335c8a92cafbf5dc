"""Mamdani fuzzy inference with a line-oriented rule-file language, and
the expert selection strategy built on it.

Terms are triangular or trapezoidal; AND/OR/NOT are min/max/complement;
defuzzification is centre-of-gravity on a fixed evaluation grid. Each
configuration gets a Suitability output variable on [0,1] with the fixed
terms Bad/Okay/Good, and rules vote on it.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .configuration import enumerate_configurations
from .livestats import FEATURE_NAMES
from .tuning import Strategy, TuningError

COG_GRID_POINTS = 10001
SUITABILITY_THRESHOLD = 0.5


class RuleFileError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class FuzzyTerm:
    """Piecewise-linear membership with support [a, d] and plateau [b, c]
    (triangles have b == c)."""

    name: str
    a: float
    b: float
    c: float
    d: float

    @classmethod
    def triangular(cls, name, a, b, c):
        if not a <= b <= c:
            raise ValueError(f"term {name}: need a <= b <= c")
        return cls(name, float(a), float(b), float(b), float(c))

    @classmethod
    def trapezoidal(cls, name, a, b, c, d):
        if not a <= b <= c <= d:
            raise ValueError(f"term {name}: need a <= b <= c <= d")
        return cls(name, float(a), float(b), float(c), float(d))

    def membership(self, x: float) -> float:
        if self.b <= x <= self.c:
            return 1.0
        if self.a < x < self.b:
            return (x - self.a) / (self.b - self.a)
        if self.c < x < self.d:
            return (self.d - x) / (self.d - self.c)
        return 0.0

    def membership_array(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros_like(x)
        out[(self.b <= x) & (x <= self.c)] = 1.0
        rise = (self.a < x) & (x < self.b)
        if rise.any():
            out[rise] = (x[rise] - self.a) / (self.b - self.a)
        fall = (self.c < x) & (x < self.d)
        if fall.any():
            out[fall] = (self.d - x[fall]) / (self.d - self.c)
        return out


class LinguisticVariable:
    def __init__(self, name: str, lo: float, hi: float):
        if not lo < hi:
            raise ValueError(f"variable {name}: empty universe")
        self.name = name
        self.lo = float(lo)
        self.hi = float(hi)
        self.terms: dict[str, FuzzyTerm] = {}

    def add_term(self, term: FuzzyTerm):
        self.terms[term.name] = term

    def membership(self, term_name: str, x: float) -> float:
        x = min(max(float(x), self.lo), self.hi)
        return self.terms[term_name].membership(x)


def membership(variable: LinguisticVariable, term_name: str,
               x: float) -> float:
    return variable.membership(term_name, x)


# -- antecedent expression tree ---------------------------------------------

class Atom:
    def __init__(self, variable: LinguisticVariable, term_name: str):
        self.variable = variable
        self.term_name = term_name

    def evaluate(self, inputs: dict) -> float:
        if self.variable.name not in inputs:
            raise KeyError(f"no input value for variable "
                           f"{self.variable.name!r}")
        return self.variable.membership(self.term_name,
                                        inputs[self.variable.name])


class And:
    def __init__(self, left, right):
        self.left, self.right = left, right

    def evaluate(self, inputs):
        return min(self.left.evaluate(inputs), self.right.evaluate(inputs))


class Or:
    def __init__(self, left, right):
        self.left, self.right = left, right

    def evaluate(self, inputs):
        return max(self.left.evaluate(inputs), self.right.evaluate(inputs))


class Not:
    def __init__(self, operand):
        self.operand = operand

    def evaluate(self, inputs):
        return 1.0 - self.operand.evaluate(inputs)


@dataclass
class FuzzyRule:
    antecedent: object
    configuration_id: str
    consequent_term: str


def evaluate_rule(rule: FuzzyRule, inputs: dict) -> float:
    return rule.antecedent.evaluate(inputs)


def make_suitability_variable() -> LinguisticVariable:
    var = LinguisticVariable("Suitability", 0.0, 1.0)
    var.add_term(FuzzyTerm.triangular("Bad", 0.0, 0.0, 0.5))
    var.add_term(FuzzyTerm.triangular("Okay", 0.0, 0.5, 1.0))
    var.add_term(FuzzyTerm.triangular("Good", 0.5, 1.0, 1.0))
    return var


def infer_and_defuzzify(rules, inputs: dict,
                        output_var: LinguisticVariable | None = None,
                        grid_points: int = COG_GRID_POINTS) -> float:
    """Mamdani inference over one rule group: clip each consequent term at
    its rule activation, combine by pointwise max, take the centre of
    gravity. All-zero activation returns the universe midpoint."""
    if not rules:
        raise ValueError("rule group is empty")
    if output_var is None:
        output_var = make_suitability_variable()
    mid = 0.5 * (output_var.lo + output_var.hi)
    xs = np.linspace(output_var.lo, output_var.hi, grid_points)
    agg = np.zeros(grid_points)
    any_active = False
    for rule in rules:
        act = evaluate_rule(rule, inputs)
        if act <= 0.0:
            continue
        any_active = True
        term = output_var.terms[rule.consequent_term]
        np.maximum(agg, np.minimum(act, term.membership_array(xs)), out=agg)
    if not any_active:
        return mid
    # trapezoid weights (half at the ends) for O(h^2) accuracy; centred
    # accumulation keeps symmetric aggregates exactly on the midpoint
    # instead of a float residual away from it
    agg[0] *= 0.5
    agg[-1] *= 0.5
    offset = math.fsum(((xs - mid) * agg).tolist())
    weight = math.fsum(agg.tolist())
    if weight == 0.0:
        return mid
    return mid + offset / weight


# -- rule file --------------------------------------------------------------

class RuleBase:
    def __init__(self):
        self.variables: dict[str, LinguisticVariable] = {}
        self.rules: list[FuzzyRule] = []
        self.rules_by_config: dict[str, list[FuzzyRule]] = {}
        self.output_var = make_suitability_variable()

    def add_rule(self, rule: FuzzyRule):
        self.rules.append(rule)
        self.rules_by_config.setdefault(rule.configuration_id, []).append(rule)

    def __len__(self):
        return len(self.rules)


_CONSEQUENT_RE = re.compile(
    r'^"([^"]+)"\s*\.\s*Suitability\s*==\s*(\w+)$')


def _tokenize_expr(text: str) -> list[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


class _ExprParser:
    """Recursive descent over `v == t`, and/or/not, parentheses;
    precedence not > and > or."""

    def __init__(self, tokens, variables, line_no):
        self.tokens = tokens
        self.pos = 0
        self.variables = variables
        self.line_no = line_no

    def fail(self, message):
        raise RuleFileError(self.line_no, message)

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        if tok is None:
            self.fail("unexpected end of expression")
        self.pos += 1
        return tok

    def parse(self):
        expr = self.parse_or()
        if self.peek() is not None:
            self.fail(f"unexpected token {self.peek()!r}")
        return expr

    def parse_or(self):
        left = self.parse_and()
        while self.peek() == "or":
            self.take()
            left = Or(left, self.parse_and())
        return left

    def parse_and(self):
        left = self.parse_unary()
        while self.peek() == "and":
            self.take()
            left = And(left, self.parse_unary())
        return left

    def parse_unary(self):
        if self.peek() == "not":
            self.take()
            return Not(self.parse_unary())
        return self.parse_primary()

    def parse_primary(self):
        tok = self.take()
        if tok == "(":
            expr = self.parse_or()
            if self.take() != ")":
                self.fail("expected ')'")
            return expr
        var = self.variables.get(tok)
        if var is None:
            self.fail(f"unknown variable {tok!r}")
        if self.take() != "==":
            self.fail(f"expected '==' after variable {tok!r}")
        term = self.take()
        if term not in var.terms:
            self.fail(f"unknown term {term!r} of variable {tok!r}")
        return Atom(var, term)


def parse_rule_file(text: str, space=None) -> RuleBase:
    """Parse the rule language::

        var <name> <min> <max>
        term <var>.<name> tri <a> <b> <c>
        term <var>.<name> trap <a> <b> <c> <d>
        rule if <expr> then "<configString>".Suitability == <Bad|Okay|Good>

    Variables must be live-statistics feature names; configuration strings
    must exist in the enumerated space. '#' starts a comment.
    """
    if space is None:
        space = enumerate_configurations()
    known_configs = {c.id for c in space}
    base = RuleBase()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.partition("#")[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "var":
            parts = rest.split()
            if len(parts) != 3:
                raise RuleFileError(line_no, "expected: var <name> <min> <max>")
            name = parts[0]
            if name not in FEATURE_NAMES:
                raise RuleFileError(
                    line_no, f"{name!r} is not a live-statistics feature")
            if name in base.variables:
                raise RuleFileError(line_no, f"variable {name!r} redeclared")
            try:
                lo, hi = float(parts[1]), float(parts[2])
                base.variables[name] = LinguisticVariable(name, lo, hi)
            except ValueError as exc:
                raise RuleFileError(line_no, str(exc)) from None
        elif head == "term":
            parts = rest.split()
            if len(parts) < 2 or "." not in parts[0]:
                raise RuleFileError(
                    line_no, "expected: term <var>.<name> tri|trap <points>")
            var_name, _, term_name = parts[0].partition(".")
            var = base.variables.get(var_name)
            if var is None:
                raise RuleFileError(line_no,
                                    f"unknown variable {var_name!r}")
            shape, *points = parts[1:]
            try:
                values = [float(p) for p in points]
                if shape == "tri" and len(values) == 3:
                    var.add_term(FuzzyTerm.triangular(term_name, *values))
                elif shape == "trap" and len(values) == 4:
                    var.add_term(FuzzyTerm.trapezoidal(term_name, *values))
                else:
                    raise RuleFileError(
                        line_no, f"expected 'tri a b c' or 'trap a b c d', "
                                 f"got {shape!r} with {len(values)} points")
            except RuleFileError:
                raise
            except ValueError as exc:
                raise RuleFileError(line_no, str(exc)) from None
        elif head == "rule":
            if not rest.startswith("if "):
                raise RuleFileError(line_no, "expected: rule if <expr> then …")
            body = rest[3:]
            cond_text, sep, then_text = body.partition(" then ")
            if not sep:
                raise RuleFileError(line_no, "missing 'then'")
            m = _CONSEQUENT_RE.match(then_text.strip())
            if not m:
                raise RuleFileError(
                    line_no, 'expected: "<configString>".Suitability == <term>')
            config_id, suit_term = m.group(1), m.group(2)
            if config_id not in known_configs:
                raise RuleFileError(
                    line_no, f"unknown configuration {config_id!r}")
            if suit_term not in base.output_var.terms:
                raise RuleFileError(
                    line_no, f"unknown suitability term {suit_term!r} "
                             f"(use Bad, Okay or Good)")
            expr = _ExprParser(_tokenize_expr(cond_text), base.variables,
                               line_no).parse()
            base.add_rule(FuzzyRule(expr, config_id, suit_term))
        else:
            raise RuleFileError(
                line_no, f"unknown directive {head!r} "
                         f"(expected var, term or rule)")
    return base


def expert_candidates(stats, rule_base: RuleBase, space,
                      threshold: float = SUITABILITY_THRESHOLD,
                      grid_points: int = COG_GRID_POINTS):
    """Configurations whose crisp suitability reaches the threshold; if
    none do, the single best one. Configurations without rules never
    qualify; an empty rule base falls back to the full space."""
    if not rule_base.rules:
        return list(space)
    inputs = dict(zip(FEATURE_NAMES, stats.feature_vector().tolist()))
    suitability = {}
    for config in space:
        rules = rule_base.rules_by_config.get(config.id)
        if rules:
            suitability[config.id] = infer_and_defuzzify(
                rules, inputs, rule_base.output_var, grid_points)
    chosen = [c for c in space
              if c.id in suitability and suitability[c.id] >= threshold]
    if not chosen:
        best = max(suitability.values())
        chosen = [next(c for c in space
                       if suitability.get(c.id) == best)]
    return chosen


class ExpertStrategy(Strategy):
    """Trials only the configurations the rule base considers suited."""

    name = "expert"

    def __init__(self, rule_base: RuleBase,
                 threshold: float = SUITABILITY_THRESHOLD):
        self.rule_base = rule_base
        self.threshold = threshold

    def candidates(self, space, phase, states, stats, controller):
        if stats is None:
            raise TuningError(
                "expert strategy needs live statistics each phase")
        return expert_candidates(stats, self.rule_base, space,
                                 self.threshold)
