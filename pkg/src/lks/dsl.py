"""A small text notation for link systems.

::

    # a two-step chain
    var x:2
    box V[;x] dense [3/5, 2/5]
    box T[x2;y] stoch [[1/2, 1/4], [1/2, 3/4]]
    link V.x = T.x2
    query marginal T.y

Inside a box header the names before ``;`` are inputs and the names after
it are outputs. A box variable ``x`` of box ``T`` is referred to as ``T.x``.
``var x:2`` gives every box variable named ``x`` the range 2, and
``var T.x:2`` gives it to that one variable only. Ranges omitted from the
declarations are inferred from the body where possible.

Two-variable matrix bodies (``stoch``, ``unitary``, ``matrix``) have the
second variable as row index and the first as column index.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from . import linalg as la
from .errors import LinkError, ParseError, SemanticError
from .link import (
    Box,
    LinkSystem,
    Projection,
    apply_links,
    born,
    link_state,
    system_link_state,
    variable_state,
)
from .process import (
    MAX_CASES,
    ONE,
    ZERO,
    TRUE,
    And,
    Is,
    Not,
    Or,
    Process,
    Same,
    Variable,
    marginal,
    weight_of,
)

KEYWORDS = {"var", "box", "link", "query"}
BODIES = ("dense", "white", "sharp", "stoch", "unitary", "matrix")
QUERIES = ("marginal", "state", "born", "prob")


# ---------------------------------------------------------------------------
# tokens
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, INT, SYM, EOF
    text: str
    line: int
    col: int


_TOKEN = re.compile(r"(?P<ws>[ \t\r\f\v]+)|(?P<nl>\n)|(?P<comment>#[^\n]*)"
                    r"|(?P<IDENT>[A-Za-z_][A-Za-z0-9_']*)|(?P<INT>[0-9]+)"
                    r"|(?P<SYM>!=|[\[\];,:=./\-()|&!])")


def tokenize(text: str) -> list[Token]:
    out, line, start, pos = [], 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind in ("IDENT", "INT", "SYM"):
            out.append(Token(kind, m.group(), line, pos - start + 1))
        pos = m.end()
    out.append(Token("EOF", "", line, pos - start + 1))
    return out


# ---------------------------------------------------------------------------
# document
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VarDecl:
    name: str
    size: int
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BoxDecl:
    name: str
    inputs: tuple
    outputs: tuple
    kind: str
    data: Any = None
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    @property
    def variables(self) -> tuple:
        return self.inputs + self.outputs


@dataclass(frozen=True)
class LinkDecl:
    first: str
    second: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Query:
    """``kind`` is one of marginal, state, born, prob.

    ``args``: marginal -> tuple of names; state -> (x, y); born ->
    (bits, x, y); prob -> event tree.
    """

    kind: str
    args: tuple
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    def text(self) -> str:
        return format_query(self)


@dataclass(frozen=True)
class SystemDocument:
    variables: tuple = ()
    boxes: tuple = ()
    links: tuple = ()
    queries: tuple = ()


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, expected, message=None):
        t = self.tok
        found = "end of input" if t.kind == "EOF" else repr(t.text)
        raise ParseError(message or f"unexpected {found}", t.line, t.col, expected)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("SYM", "IDENT") and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error([repr(text)])
        return self.advance()

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "EOF":
            self.i += 1
        return t

    def ident(self) -> Token:
        if self.tok.kind != "IDENT":
            self.error(["identifier"])
        return self.advance()

    def integer(self) -> int:
        if self.tok.kind != "INT":
            self.error(["integer"])
        t = self.advance()
        try:
            return int(t.text)
        except ValueError:
            raise ParseError("integer literal too long", t.line, t.col) from None

    def qid(self) -> str:
        a = self.ident().text
        self.expect(".")
        return f"{a}.{self.ident().text}"

    def name(self) -> str:
        """IDENT or QID."""
        a = self.ident().text
        if self.at("."):
            self.advance()
            return f"{a}.{self.ident().text}"
        return a

    def rational(self) -> Fraction:
        sign = 1
        if self.at("-"):
            self.advance()
            sign = -1
        num = self.integer()
        den = 1
        if self.at("/"):
            self.advance()
            t = self.tok
            den = self.integer()
            if den == 0:
                raise ParseError("zero denominator", t.line, t.col)
        return sign * Fraction(num, den)

    def seq(self, item, opener="[", closer="]", allow_empty=False) -> list:
        self.expect(opener)
        items = []
        if allow_empty and self.at(closer):
            self.advance()
            return items
        items.append(item())
        while self.at(","):
            self.advance()
            items.append(item())
        self.expect(closer)
        return items

    def rows(self) -> tuple:
        return tuple(tuple(r) for r in self.seq(lambda: self.seq(self.rational)))

    # -- statements --------------------------------------------------------
    def document(self) -> SystemDocument:
        vars_, boxes, links, queries = [], [], [], []
        while self.tok.kind != "EOF":
            t = self.tok
            if self.at("var"):
                self.advance()
                name = self.name()
                self.expect(":")
                vars_.append(VarDecl(name, self.integer(), t.line, t.col))
            elif self.at("box"):
                self.advance()
                boxes.append(self.box(t))
            elif self.at("link"):
                self.advance()
                a = self.qid()
                self.expect("=")
                links.append(LinkDecl(a, self.qid(), t.line, t.col))
            elif self.at("query"):
                self.advance()
                queries.append(self.query(t))
            else:
                self.error(sorted(repr(k) for k in KEYWORDS))
        return SystemDocument(tuple(vars_), tuple(boxes), tuple(links), tuple(queries))

    def idlist(self, closer) -> tuple:
        names = []
        if self.tok.kind == "IDENT":
            names.append(self.ident().text)
            while self.at(","):
                self.advance()
                names.append(self.ident().text)
        elif not self.at(closer):
            self.error(["identifier", repr(closer)])
        return tuple(names)

    def box(self, start: Token) -> BoxDecl:
        name = self.ident().text
        self.expect("[")
        ins = self.idlist(";")
        self.expect(";")
        outs = self.idlist("]")
        self.expect("]")
        t = self.tok
        if t.kind != "IDENT" or t.text not in BODIES:
            self.error([repr(b) for b in BODIES])
        kind = self.advance().text
        if kind == "dense":
            data = tuple(self.seq(self.rational))
        elif kind == "white":
            data = None
        elif kind == "sharp":
            self.expect("(")
            data = self.integer()
            self.expect(")")
        else:
            data = self.rows()
        return BoxDecl(name, ins, outs, kind, data, start.line, start.col)

    def query(self, start: Token) -> Query:
        t = self.tok
        if t.kind != "IDENT" or t.text not in QUERIES:
            self.error([repr(q) for q in QUERIES])
        kind = self.advance().text
        if kind == "marginal":
            names = [self.qid()]
            while self.at(","):
                self.advance()
                names.append(self.qid())
            args = tuple(names)
        elif kind == "state":
            a = self.qid()
            self.expect("=")
            args = (a, self.qid())
        elif kind == "born":
            bits = tuple(self.seq(self.integer))
            a = self.qid()
            self.expect("=")
            args = (bits, a, self.qid())
        else:
            args = (self.event(),)
        return Query(kind, args, start.line, start.col)

    # -- events ------------------------------------------------------------
    def event(self):
        parts = [self.conj()]
        while self.at("|"):
            self.advance()
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else ("or", tuple(parts))

    def conj(self):
        parts = [self.unary()]
        while self.at("&"):
            self.advance()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else ("and", tuple(parts))

    def unary(self):
        if self.at("!"):
            self.advance()
            return ("not", self.unary())
        if self.at("("):
            self.advance()
            e = self.event()
            self.expect(")")
            return e
        if self.tok.kind != "IDENT":
            self.error(["'!'", "'('", "'true'", "identifier"])
        if self.at("true") and self.tokens[self.i + 1].text != ".":
            self.advance()
            return ("true",)
        a = self.qid()
        if not (self.at("=") or self.at("!=")):
            self.error(["'='", "'!='"])
        neg = self.advance().text == "!="
        if self.tok.kind == "INT":
            atom = ("is", a, self.integer())
        elif self.tok.kind == "IDENT":
            atom = ("same", a, self.qid())
        else:
            self.error(["integer", "identifier"])
        return ("not", atom) if neg else atom


def parse(text: str) -> SystemDocument:
    """Syntax only; see :func:`build` for semantic checks."""
    p = Parser(text)
    return p.document()


def parse_query(text: str) -> Query:
    p = Parser(text)
    start = p.tok
    q = p.query(start)
    if p.tok.kind != "EOF":
        p.error(["end of input"])
    return q


# ---------------------------------------------------------------------------
# semantics
# ---------------------------------------------------------------------------


def _fail(message, decl=None):
    raise SemanticError(message, getattr(decl, "line", 0), getattr(decl, "col", 0))


def _ranges(doc: SystemDocument) -> tuple[dict, dict]:
    local, qualified = {}, {}
    for d in doc.variables:
        table = qualified if "." in d.name else local
        if d.name in table:
            _fail(f"variable {d.name} declared twice", d)
        if not 1 <= d.size <= MAX_CASES:
            _fail(f"range of {d.name} must be between 1 and {MAX_CASES}", d)
        table[d.name] = d.size
    return local, qualified


def _box_process(b: BoxDecl, local: dict, qualified: dict) -> Process:
    names = b.variables
    if len(set(names)) != len(names):
        _fail(f"box {b.name} repeats a variable", b)
    declared = [qualified.get(f"{b.name}.{n}", local.get(n)) for n in names]
    full = [f"{b.name}.{n}" for n in names]

    if b.kind in ("stoch", "unitary", "matrix"):
        if len(names) != 2:
            _fail(f"a {b.kind} body needs exactly two variables, box {b.name} has {len(names)}", b)
        m = b.data
        if any(len(r) != len(m[0]) for r in m):
            _fail(f"ragged matrix in box {b.name}", b)
        sizes = [len(m[0]), len(m)]
        for n, d, s in zip(names, declared, sizes):
            if d is not None and d != s:
                _fail(f"{b.name}.{n} is declared with range {d} but the matrix gives {s}", b)
        if b.kind == "stoch":
            if any(x < 0 for r in m for x in r) or any(c != 1 for c in la.column_sums(m)):
                _fail(f"box {b.name}: stoch matrix must be nonnegative with column sums 1", b)
        if b.kind == "unitary":
            if len(m) != len(m[0]) or la.matmul(m, la.transpose(m)) != la.identity(len(m)):
                raise SemanticError(f"NotUnitary: box {b.name} matrix times its transpose is not the identity",
                                    b.line, b.col)
        weights = [m[j][i] for i in range(sizes[0]) for j in range(sizes[1])]
        return _make(full, sizes, weights, b)

    if b.kind == "dense":
        weights = b.data
        unknown = [i for i, d in enumerate(declared) if d is None]
        known = int(np.prod([d for d in declared if d is not None], dtype=object))
        if len(unknown) > 1:
            _fail(f"box {b.name}: declare the ranges of {[names[i] for i in unknown]}", b)
        if unknown:
            if len(weights) % known:
                _fail(f"box {b.name}: {len(weights)} weights do not fit the declared ranges", b)
            declared[unknown[0]] = len(weights) // known
        if int(np.prod(declared, dtype=object)) != len(weights):
            _fail(f"box {b.name} needs {int(np.prod(declared, dtype=object))} weights, got {len(weights)}", b)
        return _make(full, declared, weights, b)

    missing = [n for n, d in zip(names, declared) if d is None]
    if missing:
        _fail(f"box {b.name}: declare the ranges of {missing}", b)
    cases = int(np.prod(declared, dtype=object))
    if cases > MAX_CASES:
        _fail(f"box {b.name} has {cases} cases, above the limit {MAX_CASES}", b)
    if b.kind == "white":
        return _make(full, declared, [ONE] * cases, b)
    # sharp
    if len(names) != 1:
        _fail(f"a sharp body needs exactly one variable, box {b.name} has {len(names)}", b)
    if not 0 <= b.data < declared[0]:
        _fail(f"sharp value {b.data} outside the range of {full[0]}", b)
    return _make(full, declared, [ONE if i == b.data else ZERO for i in range(declared[0])], b)


def _make(names, sizes, weights, decl) -> Process:
    cases = int(np.prod(sizes, dtype=object))
    if cases > MAX_CASES:
        _fail(f"box {decl.name} has {cases} cases, above the limit {MAX_CASES}", decl)
    arr = np.empty(cases, dtype=object)
    arr[:] = list(weights)
    return Process([Variable(n, s) for n, s in zip(names, sizes)], arr.reshape(tuple(sizes)))


def build(doc: SystemDocument) -> LinkSystem:
    """Turn a parsed document into a validated link system (boxes sorted by name)."""
    local, qualified = _ranges(doc)
    seen, boxes = set(), []
    for b in doc.boxes:
        if b.name in seen:
            _fail(f"box {b.name} declared twice", b)
        seen.add(b.name)
        boxes.append(Box(b.name, _box_process(b, local, qualified), n_inputs=len(b.inputs)))
    owned = {f"{b.name}.{n}" for b in doc.boxes for n in b.variables}
    for d in doc.variables:
        if "." in d.name and d.name not in owned:
            _fail(f"declared variable {d.name} belongs to no box", d)
    for l in doc.links:
        for n in (l.first, l.second):
            if n not in owned:
                _fail(f"undeclared variable {n}", l)
    boxes.sort(key=lambda b: b.name)
    system = LinkSystem(boxes, [(l.first, l.second) for l in doc.links],
                        meta={"queries": doc.queries})
    try:
        system.validate()
    except LinkError as e:
        bad = next((l for l in doc.links if l.first in str(e) or l.second in str(e)), None)
        _fail(str(e), bad)
    return system


def parse_system(text: str) -> LinkSystem:
    return build(parse(text))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _fmt_event(e, parent=None) -> str:
    kind = e[0]
    if kind == "true":
        return "true"
    if kind == "is":
        return f"{e[1]} = {e[2]}"
    if kind == "same":
        return f"{e[1]} = {e[2]}"
    if kind == "not":
        inner = e[1]
        if inner[0] in ("is", "same"):
            return f"{inner[1]} != {inner[2]}"
        return "!" + _fmt_event(inner, "not")
    sep = " | " if kind == "or" else " & "
    text = sep.join(_fmt_event(p, kind) for p in e[1])
    # keep nested groups and weaker operators parenthesized so the tree survives a round trip
    if parent is not None and (parent == kind or parent == "not" or (parent == "and" and kind == "or")):
        return f"({text})"
    return text


def format_query(q: Query) -> str:
    if q.kind == "marginal":
        return "marginal " + ", ".join(q.args)
    if q.kind == "state":
        return f"state {q.args[0]} = {q.args[1]}"
    if q.kind == "born":
        bits = ", ".join(str(b) for b in q.args[0])
        return f"born [{bits}] {q.args[1]} = {q.args[2]}"
    return "prob " + _fmt_event(q.args[0])


def _local(box: Box, name: str) -> str:
    prefix = box.name + "."
    if not name.startswith(prefix):
        raise ValueError(f"variable {name} of box {box.name} lacks the box prefix")
    return name[len(prefix):]


def _body(p: Process) -> str:
    table = p.table
    if all(x == 1 for x in table):
        return "white"
    if len(p.variables) == 1 and sorted(table) == [ZERO] * (len(table) - 1) + [ONE]:
        return f"sharp({table.index(ONE)})"
    if len(p.variables) == 2:
        a, b = p.shape
        rows = ["[" + ", ".join(str(p.weights[i, j]) for i in range(a)) + "]" for j in range(b)]
        return "matrix [" + ", ".join(rows) + "]"
    return "dense [" + ", ".join(str(x) for x in table) + "]"


def serialize(obj) -> str:
    """Canonical text: qualified ranges, then boxes, links (all sorted), then queries in order."""
    if isinstance(obj, SystemDocument):
        system, queries = build(obj), obj.queries
    else:
        system, queries = obj, obj.meta.get("queries", ())
    lines = []
    decls = sorted((v.name, v.size) for b in system.boxes for v in b.process.variables)
    lines += [f"var {n}:{s}" for n, s in decls]
    for b in sorted(system.boxes, key=lambda b: b.name):
        names = [_local(b, n) for n in b.process.names]
        ins, outs = names[:b.n_inputs], names[b.n_inputs:]
        lines.append(f"box {b.name}[{', '.join(ins)}; {', '.join(outs)}] {_body(b.process)}")
    lines += [f"link {l.first} = {l.second}" for l in sorted(system.links, key=lambda l: (l.first, l.second))]
    lines += ["query " + format_query(q) for q in queries]
    return "\n".join(lines) + ("\n" if lines else "")


def structure(system: LinkSystem) -> tuple:
    """Comparable summary of a system, including its queries."""
    boxes = sorted((b.name, b.n_inputs, b.process.variables, b.process.table) for b in system.boxes)
    links = sorted((l.first, l.second) for l in system.links)
    return boxes, links, tuple(system.meta.get("queries", ()))


def roundtrip(text: str) -> tuple[str, bool]:
    """Serialize a parsed document and check that reparsing gives the same system."""
    system = parse_system(text)
    out = serialize(system)
    again = parse_system(out)
    return out, structure(again) == structure(system) and serialize(again) == out


# ---------------------------------------------------------------------------
# queries
# ---------------------------------------------------------------------------


class Evaluator:
    """Evaluates queries against the process of a link system."""

    def __init__(self, system: LinkSystem):
        self.system = system
        try:
            self.process = apply_links(system)
        except LinkError as e:
            raise SemanticError(str(e)) from e
        self.alias = {l.second: l.first for l in system.links}

    def resolve(self, name: str, q: Query) -> str:
        n = self.alias.get(name, name)
        if n not in self.process.names:
            _fail(f"unknown variable {name}", q)
        return n

    def _event(self, e, q):
        kind = e[0]
        if kind == "true":
            return TRUE
        if kind == "is":
            var = self.resolve(e[1], q)
            if not 0 <= e[2] < self.process.size(var):
                _fail(f"value {e[2]} outside the range of {e[1]}", q)
            return Is(var, e[2])
        if kind == "same":
            a, b = self.resolve(e[1], q), self.resolve(e[2], q)
            if self.process.size(a) != self.process.size(b):
                _fail(f"{e[1]} and {e[2]} have different ranges", q)
            return Same(a, b)
        if kind == "not":
            return Not(self._event(e[1], q))
        parts = [self._event(p, q) for p in e[1]]
        return And(*parts) if kind == "and" else Or(*parts)

    def _state(self, a, b, q):
        for k, l in enumerate(self.system.links):
            if (l.first, l.second) == (a, b):
                return system_link_state(self.system, k)
            if (l.first, l.second) == (b, a):
                return system_link_state(self.system, k).transpose()
        x, y = self.resolve(a, q), self.resolve(b, q)
        if self.process.size(x) != self.process.size(y):
            _fail(f"{a} and {b} have different ranges", q)
        return variable_state(self.process, x) if x == y else link_state(self.process, x, y)

    def evaluate(self, q: Query) -> dict:
        w = self.process
        total = w.total
        flags = []
        if any(x < 0 for x in w.weights.flat):
            flags.append("negative-weights")
        out = {"query": format_query(q), "value": None, "total": str(total), "flags": flags}
        try:
            if q.kind == "marginal":
                names = [self.resolve(n, q) for n in q.args]
                if len(set(names)) != len(names):
                    _fail("a variable appears twice in the marginal", q)
                m = marginal(w, names)
                out["variables"] = list(q.args)
                out["shape"] = list(m.shape)
                out["value"] = [str(x) for x in m.table]
            elif q.kind == "state":
                s = self._state(q.args[0], q.args[1], q)
                out["value"] = la.format_matrix(s.matrix)
                out["trace"] = str(s.trace)
            elif q.kind == "born":
                bits, a, b = q.args
                s = self._state(a, b, q)
                if any(x not in (0, 1) for x in bits) or len(bits) != s.dim:
                    _fail(f"projection must be {s.dim} bits of 0 or 1", q)
                out["trace"] = str(s.trace)
                if s.trace == 0:
                    flags.append("null-normalizer")
                else:
                    out["value"] = str(born(Projection(bits), s))
            else:
                ev = self._event(q.args[0], q)
                if total == 0:
                    flags.append("null-normalizer")
                else:
                    out["value"] = str(weight_of(w, ev) / total)
        except SemanticError:
            raise
        except LinkError as e:
            _fail(str(e), q)
        return out


def evaluate(system: LinkSystem, query) -> dict:
    q = parse_query(query) if isinstance(query, str) else query
    return Evaluator(system).evaluate(q)


def evaluate_document(text: str) -> list[dict]:
    system = parse_system(text)
    ev = Evaluator(system)
    return [ev.evaluate(q) for q in system.meta.get("queries", ())]
