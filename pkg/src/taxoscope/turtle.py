"""Turtle subset parser and deterministic serializer.

Supported: ``@prefix`` directives, prefixed names, absolute IRIs in angle
brackets, ``a`` for ``rdf:type``, plain / typed / language-tagged string
literals, ``;`` and ``,`` abbreviations, ``#`` comments. Blank nodes,
collections and numeric shorthand are rejected: the ontologies in scope
only need named classes, individuals and annotation values, and the
restriction keeps graph equality decidable by set comparison.
"""

from __future__ import annotations

import re
from typing import Optional

from .errors import TaxoscopeError
from .ns import RDF
from .rdf import Graph, Iri, Literal, Term, Triple


class TurtleSyntaxError(TaxoscopeError):
    code = "turtle-syntax"

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UndeclaredPrefixError(TurtleSyntaxError):
    code = "undeclared-prefix"

    def __init__(self, prefix: str, line: int, column: int):
        TaxoscopeError.__init__(
            self, f"undeclared prefix {prefix!r} (line {line}, column {column})")
        self.prefix = prefix
        self.line = line
        self.column = column


RDF_TYPE = Iri(RDF + "type")

# Local part of a prefixed name: may start with a letter, digit or '_',
# may contain '-' and internal dots, must not end with a dot (the dot
# terminates the statement instead).
PN_LOCAL = r"[A-Za-z0-9_](?:[A-Za-z0-9_.\-]*[A-Za-z0-9_\-])?"
PN_PREFIX = r"[A-Za-z][A-Za-z0-9_\-]*"

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>[ \t\r\n]+)
    | (?P<comment>\#[^\n]*)
    | (?P<iriref><[^<>"{}|^`\\\x00-\x20]*>)
    | (?P<string>"(?:[^"\\\n]|\\.)*")
    | (?P<prefix_kw>@prefix\b)
    | (?P<langtag>@[A-Za-z]+(?:-[A-Za-z0-9]+)*)
    | (?P<dtype>\^\^)
    | (?P<pname>(?:%(prefix)s)?:(?:%(local)s)?)
    | (?P<a_kw>a(?=[ \t\r\n<#]))
    | (?P<punct>[.;,])
    | (?P<reject>[\[\]()]|_:)
    """ % {"prefix": PN_PREFIX, "local": PN_LOCAL},
    re.VERBOSE,
)

_ESCAPES = {"t": "\t", "n": "\n", "r": "\r", '"': '"', "\\": "\\", "b": "\b", "f": "\f", "'": "'"}


def _unescape_string(raw: str, line: int, col: int) -> str:
    out = []
    i = 0
    while i < len(raw):
        c = raw[i]
        if c != "\\":
            out.append(c)
            i += 1
            continue
        if i + 1 >= len(raw):
            raise TurtleSyntaxError("dangling escape in string", line, col)
        e = raw[i + 1]
        if e in _ESCAPES:
            out.append(_ESCAPES[e])
            i += 2
        elif e == "u" or e == "U":
            width = 4 if e == "u" else 8
            hexdigits = raw[i + 2:i + 2 + width]
            if len(hexdigits) != width:
                raise TurtleSyntaxError("truncated \\%s escape" % e, line, col)
            try:
                out.append(chr(int(hexdigits, 16)))
            except ValueError:
                raise TurtleSyntaxError("bad \\%s escape" % e, line, col) from None
            i += 2 + width
        else:
            raise TurtleSyntaxError(f"unknown escape \\{e}", line, col)
    return "".join(out)


class _Token:
    __slots__ = ("kind", "text", "line", "column")

    def __init__(self, kind, text, line, column):
        self.kind = kind
        self.text = text
        self.line = line
        self.column = column


def _lex(text: str):
    tokens = []
    pos = 0
    line = 1
    line_start = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise TurtleSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        tok = m.group()
        if kind == "reject":
            raise TurtleSyntaxError(
                f"{tok!r} is not supported (blank nodes and collections are out of scope)",
                line, col)
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, tok, line, col))
        newlines = tok.count("\n")
        if newlines:
            line += newlines
            line_start = pos + tok.rindex("\n") + 1
        pos = m.end()
    tokens.append(_Token("eof", "", line, n - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _lex(text)
        self.i = 0
        self.prefixes: dict = {}
        self.triples: list = []

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok: Optional[_Token] = None):
        tok = tok or self.peek()
        raise TurtleSyntaxError(message, tok.line, tok.column)

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.next()
        if tok.kind != kind:
            self.error(f"expected {what}, found {tok.text!r}", tok)
        return tok

    def parse(self) -> Graph:
        while self.peek().kind != "eof":
            if self.peek().kind == "prefix_kw":
                self._prefix_directive()
            else:
                self._triples_block()
        return Graph(self.triples, self.prefixes)

    def _prefix_directive(self):
        self.next()  # @prefix
        name_tok = self.expect("pname", "a prefix name")
        if not name_tok.text.endswith(":"):
            self.error("prefix declaration must end with ':'", name_tok)
        name = name_tok.text[:-1]
        iri_tok = self.expect("iriref", "a namespace IRI")
        self.expect("punct", "'.'")
        self.prefixes[name] = self._iri_value(iri_tok)

    def _iri_value(self, tok: _Token) -> str:
        return _unescape_string(tok.text[1:-1], tok.line, tok.column)

    def _resolve_pname(self, tok: _Token) -> Iri:
        prefix, _, local = tok.text.partition(":")
        if prefix not in self.prefixes:
            raise UndeclaredPrefixError(prefix, tok.line, tok.column)
        try:
            return Iri(self.prefixes[prefix] + local)
        except TaxoscopeError:
            self.error(f"prefixed name expands to an invalid IRI: {tok.text!r}", tok)

    def _term_iri(self, what: str) -> Iri:
        tok = self.next()
        if tok.kind == "iriref":
            value = self._iri_value(tok)
            try:
                return Iri(value)
            except TaxoscopeError:
                self.error(f"invalid IRI <{value}>", tok)
        if tok.kind == "pname":
            return self._resolve_pname(tok)
        self.error(f"expected {what}, found {tok.text!r}", tok)

    def _object(self) -> Term:
        tok = self.peek()
        if tok.kind == "string":
            self.next()
            lexical = _unescape_string(tok.text[1:-1], tok.line, tok.column)
            nxt = self.peek()
            if nxt.kind == "langtag":
                self.next()
                return Literal(lexical, language=nxt.text[1:])
            if nxt.kind == "dtype":
                self.next()
                return Literal(lexical, datatype=self._term_iri("a datatype IRI"))
            return Literal(lexical)
        if tok.kind in ("iriref", "pname"):
            return self._term_iri("an object")
        self.error(f"expected an object term, found {tok.text!r}", tok)

    def _verb(self) -> Iri:
        if self.peek().kind == "a_kw":
            self.next()
            return RDF_TYPE
        return self._term_iri("a predicate")

    def _triples_block(self):
        subject = self._term_iri("a subject")
        while True:
            predicate = self._verb()
            while True:
                obj = self._object()
                self.triples.append(Triple(subject, predicate, obj))
                if self.peek().kind == "punct" and self.peek().text == ",":
                    self.next()
                    continue
                break
            tok = self.expect("punct", "'.', ';' or ','")
            if tok.text == ".":
                return
            if tok.text == ";":
                # allow a trailing ';' before the closing '.'
                if self.peek().kind == "punct" and self.peek().text == ".":
                    self.next()
                    return
                continue
            self.error("expected '.' or ';'", tok)


def parse_turtle(text: str) -> Graph:
    """Parse a Turtle document into a Graph."""
    return _Parser(text).parse()


_SAFE_LOCAL_RE = re.compile(r"^%s$" % PN_LOCAL)
_SAFE_PREFIX_RE = re.compile(r"^%s$" % PN_PREFIX)

_LITERAL_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def _escape_literal(s: str) -> str:
    out = []
    for c in s:
        if c in _LITERAL_ESCAPES:
            out.append(_LITERAL_ESCAPES[c])
        elif ord(c) < 0x20:
            out.append("\\u%04X" % ord(c))
        else:
            out.append(c)
    return "".join(out)


def _render_iri(iri: Iri, namespaces: list) -> str:
    # longest declared namespace wins; fall back to an absolute IRIREF
    for ns, prefix in namespaces:
        if iri.value.startswith(ns):
            local = iri.value[len(ns):]
            if local == "" or _SAFE_LOCAL_RE.match(local):
                return f"{prefix}:{local}"
    return f"<{iri.value}>"


def _render_term(term: Term, namespaces: list) -> str:
    if isinstance(term, Iri):
        return _render_iri(term, namespaces)
    lit = f'"{_escape_literal(term.lexical)}"'
    if term.language:
        return f"{lit}@{term.language}"
    if term.datatype:
        return f"{lit}^^{_render_iri(term.datatype, namespaces)}"
    return lit


def serialize_turtle(graph: Graph) -> str:
    """Deterministic Turtle serialization.

    Triples are sorted by (subject, predicate, object) on absolute IRIs,
    one statement per line; prefix directives are sorted by prefix name.
    The output re-parses to a graph equal to the input.
    """
    prefixes = {p: ns for p, ns in graph.prefixes.items() if _SAFE_PREFIX_RE.match(p)}
    # longest namespace first so the most specific prefix is chosen;
    # ties broken by prefix name for byte stability
    namespaces = sorted(((ns, p) for p, ns in prefixes.items()),
                        key=lambda x: (-len(x[0]), x[1]))
    lines = [f"@prefix {p}: <{ns}> ." for p, ns in sorted(prefixes.items())]
    if lines:
        lines.append("")
    for t in graph.sorted_triples():
        s = _render_iri(t.subject, namespaces)
        p = "a" if t.predicate == RDF_TYPE else _render_iri(t.predicate, namespaces)
        o = _render_term(t.object, namespaces)
        lines.append(f"{s} {p} {o} .")
    return "\n".join(lines) + "\n" if lines else ""


