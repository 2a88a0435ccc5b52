"""Parser and evaluator for boolean formulas over named variables.

Used for feature-model validity constraints, transition guards, basic-event
annotations, and modal queries.  Formulas are plain nested tuples:
("const", bool), ("var", name), ("not", x), ("and", a, b), ("or", a, b),
("xor", a, b), ("implies", a, b), ("iff", a, b).
"""

from __future__ import annotations

import re

from .errors import ModelError

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op><->|<=>|->|=>|&&|\|\||[()!~&|^])"
    r"|(?P<num>[01]))"
)

_KEYWORDS = {"and": "&", "or": "|", "not": "!", "xor": "^", "true": "1", "false": "0"}


def _tokenize(text: str) -> list[str]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            rest = text[pos:].strip()
            if not rest:
                break
            raise ModelError(f"cannot tokenize formula at: {rest!r}")
        pos = match.end()
        tok = match.group("ident") or match.group("op") or match.group("num")
        tok = _KEYWORDS.get(tok, tok)
        tok = {"&&": "&", "||": "|", "<=>": "<->", "=>": "->"}.get(tok, tok)
        tokens.append(tok)
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def expect(self, tok):
        got = self.take()
        if got != tok:
            raise ModelError(f"expected {tok!r} in formula, got {got!r}")

    # precedence (loosest first): <-> , -> , | , ^ , & , ! , atom
    def parse(self):
        expr = self.iff()
        if self.peek() is not None:
            raise ModelError(f"trailing tokens in formula: {self.peek()!r}")
        return expr

    def iff(self):
        left = self.implies()
        while self.peek() == "<->":
            self.take()
            left = ("iff", left, self.implies())
        return left

    def implies(self):
        left = self.disj()
        if self.peek() == "->":
            self.take()
            return ("implies", left, self.implies())
        return left

    def disj(self):
        left = self.xor()
        while self.peek() == "|":
            self.take()
            left = ("or", left, self.xor())
        return left

    def xor(self):
        left = self.conj()
        while self.peek() == "^":
            self.take()
            left = ("xor", left, self.conj())
        return left

    def conj(self):
        left = self.negation()
        while self.peek() == "&":
            self.take()
            left = ("and", left, self.negation())
        return left

    def negation(self):
        if self.peek() in ("!", "~"):
            self.take()
            return ("not", self.negation())
        return self.atom()

    def atom(self):
        tok = self.take()
        if tok == "(":
            inner = self.iff()
            self.expect(")")
            return inner
        if tok == "1":
            return ("const", True)
        if tok == "0":
            return ("const", False)
        if tok is None:
            raise ModelError("formula ended unexpectedly")
        if not tok[0].isalpha() and tok[0] != "_":
            raise ModelError(f"unexpected token {tok!r} in formula")
        return ("var", tok)


def parse_formula(text: str):
    tokens = _tokenize(text)
    if not tokens:
        raise ModelError("empty formula")
    return _Parser(tokens).parse()


def formula_vars(ast) -> frozenset[str]:
    kind = ast[0]
    if kind == "var":
        return frozenset((ast[1],))
    if kind == "const":
        return frozenset()
    return frozenset().union(*(formula_vars(sub) for sub in ast[1:]))


def eval_formula(ast, true_vars) -> bool:
    kind = ast[0]
    if kind == "const":
        return ast[1]
    if kind == "var":
        return ast[1] in true_vars
    if kind == "not":
        return not eval_formula(ast[1], true_vars)
    a = eval_formula(ast[1], true_vars)
    b = eval_formula(ast[2], true_vars)
    if kind == "and":
        return a and b
    if kind == "or":
        return a or b
    if kind == "xor":
        return a != b
    if kind == "implies":
        return (not a) or b
    if kind == "iff":
        return a == b
    raise ModelError(f"unknown formula node {kind!r}")


def formula_to_bdd(ast, manager) -> int:
    kind = ast[0]
    if kind == "const":
        return manager.TRUE if ast[1] else manager.FALSE
    if kind == "var":
        return manager.var(ast[1])
    if kind == "not":
        return manager.lnot(formula_to_bdd(ast[1], manager))
    a = formula_to_bdd(ast[1], manager)
    b = formula_to_bdd(ast[2], manager)
    if kind == "and":
        return manager.land(a, b)
    if kind == "or":
        return manager.lor(a, b)
    if kind == "xor":
        return manager.lor(manager.ldiff(a, b), manager.ldiff(b, a))
    if kind == "implies":
        return manager.lor(manager.lnot(a), b)
    if kind == "iff":
        return manager.lnot(manager.lor(manager.ldiff(a, b), manager.ldiff(b, a)))
    raise ModelError(f"unknown formula node {kind!r}")
