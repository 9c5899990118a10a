"""Parser for the SPARQL fragment found in Wikidata KBQA datasets.

Supported: ``SELECT [DISTINCT] (* | ?v ...) [WHERE] { ... }`` and
``ASK [WHERE] { ... }`` whose group is a dot-separated list of triple
patterns. Terms are variables, ``wd:``/``wdt:`` prefixed ids, or full
Wikidata IRIs. ``FILTER`` clauses are cut out verbatim and never
interpreted. Everything else is rejected with the offending byte span.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union


class ParseError(ValueError):
    """Query text outside the supported fragment.

    ``span`` is the half-open UTF-8 byte range of the offending construct.
    """

    def __init__(self, message: str, span: Tuple[int, int]):
        self.span = span
        super().__init__(f"{message} at bytes {span[0]}-{span[1]}")


class UnsupportedConstructError(ParseError):
    def __init__(self, construct: str, span: Tuple[int, int]):
        self.construct = construct
        super().__init__(f"unsupported construct: {construct}", span)


@dataclass(frozen=True)
class Variable:
    name: str

    def __str__(self):
        return "?" + self.name


@dataclass(frozen=True)
class Iri:
    id: str

    def __str__(self):
        return self.id


Term = Union[Variable, Iri]


@dataclass(frozen=True)
class TriplePattern:
    subject: Term
    predicate: Term
    object: Term

    def __iter__(self):
        return iter((self.subject, self.predicate, self.object))

    def variables(self) -> List[str]:
        return [t.name for t in self if isinstance(t, Variable)]


STAR = "*"


@dataclass(frozen=True)
class Select:
    distinct: bool = False
    projection: Union[str, Tuple[str, ...]] = STAR

    @property
    def is_star(self) -> bool:
        return self.projection == STAR


@dataclass(frozen=True)
class Ask:
    pass


QueryForm = Union[Select, Ask]


@dataclass(frozen=True)
class ParsedQuery:
    form: QueryForm
    patterns: Tuple[TriplePattern, ...]
    raw_filters: Tuple[str, ...] = field(default=())

    @property
    def stripped_filter_count(self) -> int:
        return len(self.raw_filters)

    @property
    def is_ask(self) -> bool:
        return isinstance(self.form, Ask)


VAR_NAME = re.compile(r"[A-Za-z0-9_]+")
LOCAL_ID = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_-]*")
PREFIXES = ("wd", "wdt")
WIKIDATA_IRI = re.compile(
    r"https?://www\.wikidata\.org/(?:entity|prop/direct)/([A-Za-z0-9_][A-Za-z0-9_-]*)"
)

_UNSUPPORTED_KEYWORDS = {
    "OPTIONAL", "UNION", "MINUS", "BIND", "VALUES", "SERVICE", "GRAPH",
    "SELECT", "CONSTRUCT", "DESCRIBE", "LIMIT", "OFFSET", "ORDER", "GROUP",
    "HAVING", "FROM", "PREFIX", "BASE", "REDUCED", "EXISTS", "NOT",
}
_PATH_CHARS = set("/|^+*")
_IRI = re.compile(r"<[^<>\s]*>")

_TOKEN = re.compile(
    r"""
    (?P<var>[?$][A-Za-z0-9_]*)
  | (?P<iri><[^<>\s]*>)
  | (?P<pname>[A-Za-z_][\w-]*:[\w-]*|:[\w-]*)
  | (?P<word>[A-Za-z_]\w*)
  | (?P<number>[+-]?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<string>"(?:[^"\\\n]|\\.)*"|'(?:[^'\\\n]|\\.)*')
  | (?P<punct>[{}().,;*/|^+!=<>\[\]@&-])
    """,
    re.VERBOSE,
)


@dataclass
class _Token:
    kind: str
    text: str
    start: int
    end: int

    @property
    def upper(self):
        return self.text.upper()


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self._peeked: Optional[_Token] = None

    def byte_span(self, start: int, end: int) -> Tuple[int, int]:
        b0 = len(self.text[:start].encode("utf-8"))
        return b0, b0 + len(self.text[start:end].encode("utf-8"))

    def _skip_space(self):
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            if ch.isspace():
                self.pos += 1
            elif ch == "#":
                nl = text.find("\n", self.pos)
                self.pos = len(text) if nl < 0 else nl + 1
            else:
                break

    def peek(self) -> Optional[_Token]:
        if self._peeked is None:
            self._peeked = self._scan()
        return self._peeked

    def next(self) -> Optional[_Token]:
        tok = self.peek()
        self._peeked = None
        return tok

    def _scan(self) -> Optional[_Token]:
        self._skip_space()
        if self.pos >= len(self.text):
            return None
        m = _TOKEN.match(self.text, self.pos)
        if m is None:
            raise ParseError(f"unexpected character {self.text[self.pos]!r}",
                             self.byte_span(self.pos, self.pos + 1))
        self.pos = m.end()
        return _Token(m.lastgroup, m.group(), m.start(), m.end())

    def capture_filter(self, keyword: _Token) -> str:
        """Consume a FILTER body up to its matching close bracket."""
        assert self._peeked is None
        text = self.text
        i = self.pos
        closers = {"(": ")", "{": "}"}
        stack: List[str] = []
        while i < len(text):
            ch = text[i]
            if ch in "\"'":
                j = i + 1
                while j < len(text) and text[j] != ch:
                    j += 2 if text[j] == "\\" else 1
                i = j + 1
                continue
            if ch == "<" and stack:
                # IRI inside the filter; a bare '<' comparison has no matching '>'
                m = _IRI.match(text, i)
                if m:
                    i = m.end()
                    continue
            if ch in closers:
                stack.append(closers[ch])
            elif ch in ")}":
                if not stack or stack[-1] != ch:
                    break
                stack.pop()
                if not stack:
                    self.pos = i + 1
                    return text[keyword.start:self.pos]
            elif not stack and ch in ".}":
                break
            i += 1
        raise ParseError("unbalanced FILTER clause", self.byte_span(keyword.start, i))


def _describe(tok: _Token) -> str:
    if tok.kind == "punct" and tok.text in _PATH_CHARS:
        return "property path"
    if tok.kind in ("number", "string"):
        return "literal"
    if tok.kind == "punct" and tok.text == "[":
        return "blank node"
    if tok.kind == "punct" and tok.text in ";,":
        return "predicate-object list"
    if tok.kind == "word" and tok.text == "a":
        return "rdf:type shorthand"
    if tok.kind == "word" and tok.upper in _UNSUPPORTED_KEYWORDS:
        return tok.upper
    if tok.kind == "word" and tok.text.lower() in ("true", "false"):
        return "literal"
    return f"token {tok.text!r}"


class _Parser:
    def __init__(self, text: str):
        self.lex = _Lexer(text)

    def error(self, tok: Optional[_Token], message: str) -> ParseError:
        if tok is None:
            n = len(self.lex.text)
            return ParseError(message + " (unexpected end of query)", self.lex.byte_span(n, n))
        return ParseError(message, self.lex.byte_span(tok.start, tok.end))

    def unsupported(self, tok: _Token) -> UnsupportedConstructError:
        return UnsupportedConstructError(_describe(tok), self.lex.byte_span(tok.start, tok.end))

    def is_keyword(self, tok: Optional[_Token], *words: str) -> bool:
        return tok is not None and tok.kind == "word" and tok.upper in words

    def parse(self) -> ParsedQuery:
        form = self.parse_form()
        patterns, filters = self.parse_group()
        tail = self.lex.next()
        if tail is not None:
            if tail.kind == "word" and tail.upper in _UNSUPPORTED_KEYWORDS:
                raise self.unsupported(tail)
            raise self.error(tail, f"unexpected {tail.text!r} after WHERE clause")
        if isinstance(form, Select) and not form.is_star:
            bound = set(collect_variables_of(patterns))
            for name in form.projection:
                if name not in bound:
                    raise ParseError(f"projected variable ?{name} does not occur in WHERE",
                                     (0, len(self.lex.text.encode("utf-8"))))
        return ParsedQuery(form, tuple(patterns), tuple(filters))

    def parse_form(self) -> QueryForm:
        tok = self.lex.next()
        if self.is_keyword(tok, "ASK"):
            form: QueryForm = Ask()
        elif self.is_keyword(tok, "SELECT"):
            distinct = False
            if self.is_keyword(self.lex.peek(), "DISTINCT"):
                self.lex.next()
                distinct = True
            projection = self.parse_projection()
            form = Select(distinct, projection)
        elif tok is not None and tok.kind == "word" and tok.upper in _UNSUPPORTED_KEYWORDS:
            raise self.unsupported(tok)
        else:
            raise self.error(tok, "expected SELECT or ASK")
        if self.is_keyword(self.lex.peek(), "WHERE"):
            self.lex.next()
        return form

    def parse_projection(self):
        tok = self.lex.peek()
        if tok is not None and tok.kind == "punct" and tok.text == "*":
            self.lex.next()
            return STAR
        names: List[str] = []
        while True:
            tok = self.lex.peek()
            if tok is None or tok.kind != "var":
                break
            self.lex.next()
            name = self.var_name(tok)
            if name in names:
                raise self.error(tok, f"duplicate projected variable ?{name}")
            names.append(name)
        if not names:
            tok = self.lex.peek()
            if tok is not None and tok.kind == "punct" and tok.text == "(":
                raise UnsupportedConstructError("projection expression",
                                                self.lex.byte_span(tok.start, tok.end))
            raise self.error(tok, "expected '*' or projected variables")
        return tuple(names)

    def var_name(self, tok: _Token) -> str:
        name = tok.text[1:]
        if not VAR_NAME.fullmatch(name):
            raise self.error(tok, "malformed variable")
        return name

    def parse_group(self):
        tok = self.lex.next()
        if tok is None or tok.text != "{":
            raise self.error(tok, "expected '{'")
        patterns: List[TriplePattern] = []
        filters: List[str] = []
        need_dot = False  # a pattern was just read and no separator seen yet
        last_dot = False  # previous item was a '.'
        while True:
            tok = self.lex.peek()
            if tok is None:
                raise self.error(tok, "expected '}'")
            if tok.text == "}":
                self.lex.next()
                break
            if tok.text == ".":
                if last_dot or (not patterns and not filters):
                    raise self.error(tok, "unexpected '.'")
                self.lex.next()
                need_dot = False
                last_dot = True
                continue
            last_dot = False
            if self.is_keyword(tok, "FILTER"):
                self.lex.next()
                filters.append(self.lex.capture_filter(tok))
                need_dot = False
                continue
            if tok.text == "{":
                raise UnsupportedConstructError("nested group or subquery",
                                                self.lex.byte_span(tok.start, tok.end))
            if tok.kind == "word" and tok.upper in _UNSUPPORTED_KEYWORDS:
                raise self.unsupported(tok)
            if need_dot:
                if tok.kind == "punct" and tok.text in ";,":
                    raise self.unsupported(tok)
                raise self.error(tok, "expected '.' between triple patterns")
            patterns.append(self.parse_pattern())
            need_dot = True
        if not patterns:
            raise self.error(tok, "empty WHERE clause")
        return patterns, filters

    def parse_pattern(self) -> TriplePattern:
        s = self.parse_term()
        p = self.parse_term()
        nxt = self.lex.peek()
        if nxt is not None and nxt.kind == "punct" and nxt.text in _PATH_CHARS:
            raise self.unsupported(nxt)
        o = self.parse_term()
        return TriplePattern(s, p, o)

    def parse_term(self) -> Term:
        tok = self.lex.next()
        if tok is None:
            raise self.error(tok, "expected a term")
        if tok.kind == "var":
            return Variable(self.var_name(tok))
        if tok.kind == "pname":
            prefix, _, local = tok.text.partition(":")
            if prefix not in PREFIXES:
                raise UnsupportedConstructError(f"prefix {prefix or '(default)'}:",
                                                self.lex.byte_span(tok.start, tok.end))
            if not LOCAL_ID.fullmatch(local):
                raise self.error(tok, "malformed identifier")
            return Iri(local)
        if tok.kind == "iri":
            m = WIKIDATA_IRI.fullmatch(tok.text[1:-1])
            if not m:
                raise UnsupportedConstructError("IRI outside the Wikidata entity namespaces",
                                                self.lex.byte_span(tok.start, tok.end))
            return Iri(m.group(1))
        raise self.unsupported(tok)


def parse_query(text: str) -> ParsedQuery:
    return _Parser(text).parse()


def collect_variables_of(patterns) -> List[str]:
    seen: List[str] = []
    for pattern in patterns:
        for name in pattern.variables():
            if name not in seen:
                seen.append(name)
    return seen


def collect_variables(query: ParsedQuery) -> List[str]:
    """Distinct variable names in first-occurrence order over the patterns."""
    return collect_variables_of(query.patterns)


def _render_term(term: Term, position: int) -> str:
    if isinstance(term, Variable):
        return "?" + term.name
    return ("wdt:" if position == 1 else "wd:") + term.id


def render_query(query: ParsedQuery) -> str:
    if isinstance(query.form, Ask):
        head = "ASK WHERE {"
    else:
        proj = "*" if query.form.is_star else " ".join("?" + v for v in query.form.projection)
        head = "SELECT " + ("DISTINCT " if query.form.distinct else "") + proj + " WHERE {"
    lines = [head]
    for pattern in query.patterns:
        lines.append("  " + " ".join(_render_term(t, i) for i, t in enumerate(pattern)) + " .")
    for raw in query.raw_filters:
        lines.append("  " + raw)
    lines.append("}")
    return "\n".join(lines)
