"""SELECT queries over basic graph patterns.

The grammar is exactly what the knowledge-base queries need: a PREFIX
prologue, ``SELECT [DISTINCT] (?var+ | *)`` and a WHERE block of triple
patterns joined on shared variables. Evaluation is a pure function of
(graph, query); ``brute_force_evaluate`` is the independent oracle that
enumerates every term assignment instead of joining.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from typing import Optional, Union

from .errors import TaxoscopeError
from .rdf import Graph, Iri, Literal, Term, Triple, term_key
from .turtle import PN_LOCAL, PN_PREFIX, RDF_TYPE, _unescape_string


class QueryError(TaxoscopeError):
    code = "query-error"


class QuerySyntaxError(QueryError):
    code = "query-syntax"

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UnknownPrefixError(QuerySyntaxError):
    code = "unknown-prefix"

    def __init__(self, prefix: str, line: int, column: int):
        QueryError.__init__(self, f"unknown prefix {prefix!r} (line {line}, column {column})")
        self.prefix = prefix
        self.line = line
        self.column = column


class ProjectionError(QueryError):
    code = "projection-error"


class EnumerationLimitError(QueryError):
    code = "enumeration-limit"


@dataclass(frozen=True)
class Var:
    name: str


PatternTerm = Union[Var, Iri, Literal]


@dataclass(frozen=True)
class TriplePattern:
    subject: PatternTerm
    predicate: PatternTerm
    object: PatternTerm

    def variables(self) -> list:
        return [t.name for t in (self.subject, self.predicate, self.object) if isinstance(t, Var)]


@dataclass(frozen=True)
class QueryAst:
    prefixes: tuple  # ((name, namespace), ...)
    distinct: bool
    projection: Optional[tuple]  # None means SELECT *
    patterns: tuple

    def pattern_variables(self) -> list:
        """Variables in order of first occurrence across the pattern list."""
        seen = []
        for p in self.patterns:
            for v in p.variables():
                if v not in seen:
                    seen.append(v)
        return seen


@dataclass(frozen=True)
class SolutionTable:
    header: tuple
    rows: tuple  # tuples of Terms aligned with header

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header)
        for row in self.rows:
            writer.writerow([t.value if isinstance(t, Iri) else t.lexical for t in row])
        return buf.getvalue()

    def to_json_obj(self) -> dict:
        def cell(t: Term):
            if isinstance(t, Iri):
                return {"type": "iri", "value": t.value}
            out = {"type": "literal", "value": t.lexical}
            if t.language:
                out["language"] = t.language
            if t.datatype:
                out["datatype"] = t.datatype.value
            return out

        return {"columns": list(self.header),
                "rows": [[cell(t) for t in row] for row in self.rows]}


_Q_TOKEN_RE = re.compile(
    r"""
      (?P<ws>[ \t\r\n]+)
    | (?P<comment>\#[^\n]*)
    | (?P<iriref><[^<>"{}|^`\\\x00-\x20]*>)
    | (?P<string>"(?:[^"\\\n]|\\.)*")
    | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
    | (?P<kw>(?i:PREFIX|SELECT|DISTINCT|WHERE)\b)
    | (?P<pname>(?:%(prefix)s)?:(?:%(local)s)?)
    | (?P<a_kw>a(?=[ \t\r\n?<#]))
    | (?P<punct>[.{}*])
    """ % {"prefix": PN_PREFIX, "local": PN_LOCAL},
    re.VERBOSE,
)


class _Tok:
    __slots__ = ("kind", "text", "line", "column")

    def __init__(self, kind, text, line, column):
        self.kind = kind
        self.text = text
        self.line = line
        self.column = column


def _lex_query(text: str):
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _Q_TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        tok = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(_Tok(kind, tok, line, col))
        if "\n" in tok:
            line += tok.count("\n")
            line_start = pos + tok.rindex("\n") + 1
        pos = m.end()
    tokens.append(_Tok("eof", "", line, len(text) - line_start + 1))
    return tokens


class _QueryParser:
    def __init__(self, text: str):
        self.tokens = _lex_query(text)
        self.i = 0
        self.prefixes: dict = {}

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        raise QuerySyntaxError(message, tok.line, tok.column)

    def expect_kw(self, word):
        tok = self.next()
        if tok.kind != "kw" or tok.text.upper() != word:
            self.error(f"expected {word}, found {tok.text!r}", tok)
        return tok

    def parse(self) -> QueryAst:
        while self.peek().kind == "kw" and self.peek().text.upper() == "PREFIX":
            self.next()
            name_tok = self.next()
            if name_tok.kind != "pname" or not name_tok.text.endswith(":"):
                self.error("expected a prefix name ending in ':'", name_tok)
            iri_tok = self.next()
            if iri_tok.kind != "iriref":
                self.error("expected a namespace IRI", iri_tok)
            self.prefixes[name_tok.text[:-1]] = iri_tok.text[1:-1]

        self.expect_kw("SELECT")
        distinct = False
        if self.peek().kind == "kw" and self.peek().text.upper() == "DISTINCT":
            self.next()
            distinct = True

        projection: Optional[list] = None
        if self.peek().kind == "punct" and self.peek().text == "*":
            self.next()
        else:
            projection = []
            while self.peek().kind == "var":
                projection.append(self.next().text[1:])
            if not projection:
                self.error("expected '*' or at least one ?variable")

        self.expect_kw("WHERE")
        tok = self.next()
        if tok.kind != "punct" or tok.text != "{":
            self.error("expected '{'", tok)

        patterns = []
        while not (self.peek().kind == "punct" and self.peek().text == "}"):
            if self.peek().kind == "eof":
                self.error("unterminated WHERE block")
            patterns.append(self._pattern())
            if self.peek().kind == "punct" and self.peek().text == ".":
                self.next()
        self.next()  # }
        tok = self.peek()
        if tok.kind != "eof":
            self.error(f"unexpected trailing input {tok.text!r}", tok)
        if not patterns:
            self.error("WHERE block holds no triple pattern")

        ast = QueryAst(tuple(sorted(self.prefixes.items())), distinct,
                       tuple(projection) if projection is not None else None,
                       tuple(patterns))
        if projection is not None:
            in_patterns = set(ast.pattern_variables())
            for v in projection:
                if v not in in_patterns:
                    raise ProjectionError(f"projected variable ?{v} occurs in no pattern")
        return ast

    def _term(self, allow_literal: bool, allow_a: bool = False) -> PatternTerm:
        tok = self.next()
        if tok.kind == "var":
            return Var(tok.text[1:])
        if tok.kind == "iriref":
            try:
                return Iri(_unescape_string(tok.text[1:-1], tok.line, tok.column))
            except TaxoscopeError:
                self.error(f"invalid IRI {tok.text}", tok)
        if tok.kind == "pname":
            prefix, _, local = tok.text.partition(":")
            if prefix not in self.prefixes:
                raise UnknownPrefixError(prefix, tok.line, tok.column)
            return Iri(self.prefixes[prefix] + local)
        if tok.kind == "a_kw" and allow_a:
            return RDF_TYPE
        if tok.kind == "string" and allow_literal:
            lexical = _unescape_string(tok.text[1:-1], tok.line, tok.column)
            return Literal(lexical)
        self.error(f"expected a term, found {tok.text!r}", tok)

    def _pattern(self) -> TriplePattern:
        s = self._term(allow_literal=False)
        p = self._term(allow_literal=False, allow_a=True)
        o = self._term(allow_literal=True)
        return TriplePattern(s, p, o)


def parse_query(text: str) -> QueryAst:
    """Parse a SELECT query; see the module docstring for the grammar."""
    return _QueryParser(text).parse()


def _row_key(row) -> tuple:
    return tuple(term_key(t) for t in row)


def _project(ast: QueryAst, bindings: list) -> SolutionTable:
    header = tuple(ast.projection) if ast.projection is not None else tuple(ast.pattern_variables())
    rows = [tuple(b[v] for v in header) for b in bindings]
    if ast.distinct:
        rows = list(dict.fromkeys(rows))
    rows.sort(key=_row_key)
    return SolutionTable(header, tuple(rows))


def evaluate(graph: Graph, ast: QueryAst) -> SolutionTable:
    """Natural join of the pattern solutions, projected and sorted.

    Bag semantics before DISTINCT: projection may repeat rows when the
    dropped variables distinguish them.
    """
    bindings = [{}]
    for pattern in ast.patterns:
        extended = []
        for binding in bindings:
            parts = []
            for term in (pattern.subject, pattern.predicate, pattern.object):
                if isinstance(term, Var):
                    parts.append(binding.get(term.name))
                else:
                    parts.append(term)
            s, p, o = parts
            matches = graph.match(
                s if isinstance(s, Iri) else None,
                p if isinstance(p, Iri) else None,
                o if isinstance(o, (Iri, Literal)) else None,
            )
            # graph.match only indexes exact terms; when a slot held a
            # literal from a previous binding it was passed through, so
            # the filter below is only needed for repeated variables
            # inside one pattern.
            for triple in matches:
                new = dict(binding)
                ok = True
                for term, value in ((pattern.subject, triple.subject),
                                    (pattern.predicate, triple.predicate),
                                    (pattern.object, triple.object)):
                    if isinstance(term, Var):
                        bound = new.get(term.name)
                        if bound is None:
                            new[term.name] = value
                        elif bound != value:
                            ok = False
                            break
                if ok:
                    extended.append(new)
        bindings = extended
        if not bindings:
            break
    return _project(ast, bindings)


BRUTE_FORCE_LIMIT = 10_000


def brute_force_evaluate(graph: Graph, ast: QueryAst) -> SolutionTable:
    """Test oracle: try every assignment of graph terms to variables."""
    variables = ast.pattern_variables()
    terms = sorted(graph.terms(), key=term_key)
    total = len(terms) ** len(variables) if variables else 1
    if total > BRUTE_FORCE_LIMIT:
        raise EnumerationLimitError(
            f"{total} candidate assignments exceed the enumeration bound of {BRUTE_FORCE_LIMIT}")

    import itertools

    bindings = []
    for combo in itertools.product(terms, repeat=len(variables)):
        assignment = dict(zip(variables, combo))

        def resolve(term):
            return assignment[term.name] if isinstance(term, Var) else term

        ok = True
        for pattern in ast.patterns:
            s, p, o = (resolve(pattern.subject), resolve(pattern.predicate),
                       resolve(pattern.object))
            if not isinstance(s, Iri) or not isinstance(p, Iri):
                ok = False
                break
            if Triple(s, p, o) not in graph:
                ok = False
                break
        if ok:
            bindings.append(assignment)
    return _project(ast, bindings)
