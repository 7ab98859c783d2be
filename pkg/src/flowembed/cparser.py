"""Parse a single C function snippet into a concrete syntax tree.

Inputs are function-level fragments, often not valid translation units
(missing headers, unknown typedefs), so the parser recovers at statement
granularity: anything it cannot parse becomes an ``error`` node holding the
raw tokens, and extraction downstream keeps going. Node kind names follow
the conventional C grammar production names (``function_definition``,
``init_declarator``, ``call_expression``, ...), so tooling written against
those names keeps working.

Every non-whitespace token of the input, comments and preprocessor
directives included, appears as exactly one leaf, and leaf spans are byte
offsets into the UTF-8 encoding of the source.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field

from .errors import EmptySource, ParseRejected

PRIMITIVE_TYPES = {
    "void", "char", "short", "int", "long", "float", "double",
    "signed", "unsigned", "_Bool", "_Complex", "bool",
}
TYPE_QUALIFIERS = {"const", "volatile", "restrict", "_Atomic"}
STORAGE_CLASSES = {"static", "extern", "register", "auto", "typedef", "inline", "_Noreturn"}
STRUCT_KEYWORDS = {"struct", "union", "enum"}
KEYWORDS = (
    PRIMITIVE_TYPES | TYPE_QUALIFIERS | STORAGE_CLASSES | STRUCT_KEYWORDS
    | {
        "break", "case", "continue", "default", "do", "else", "for", "goto",
        "if", "return", "sizeof", "switch", "while",
        "true", "false", "NULL", "nullptr",
    }
)

ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%=", "<<=", ">>=", "&=", "|=", "^="}
BINARY_PRECEDENCE = {
    "||": 1, "&&": 2, "|": 3, "^": 4, "&": 5,
    "==": 6, "!=": 6, "<": 7, ">": 7, "<=": 7, ">=": 7,
    "<<": 8, ">>": 8, "+": 9, "-": 9, "*": 10, "/": 10, "%": 10,
}

LITERAL_KINDS = {"number_literal", "string_literal", "char_literal", "null", "true", "false"}
TRIVIA_KINDS = {"comment", "preproc_directive"}

_PUNCTUATION = sorted(
    [
        ">>=", "<<=", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==",
        "!=", "&&", "||", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
        "+", "-", "*", "/", "%", "&", "|", "^", "!", "~", "<", ">", "=",
        "?", ":", ";", ",", ".", "(", ")", "{", "}", "[", "]",
    ],
    key=len,
    reverse=True,
)

_TOKEN_RE = re.compile(
    r"""
      (?P<comment>//[^\n]*|/\*(?:[^*]|\*(?!/))*(?:\*/|\Z))
    | (?P<string>[LuU]?(?:8)?"(?:\\.|[^"\\\n])*(?:"|\Z))
    | (?P<char>[LuU]?'(?:\\.|[^'\\\n])*(?:'|\Z))
    | (?P<number>(?:0[xX][0-9a-fA-F]*(?:\.[0-9a-fA-F]*)?(?:[pP][+-]?\d+)?
                  |(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)[uUlLfF]*)
    | (?P<identifier>[A-Za-z_][A-Za-z_0-9]*)
    | (?P<punct>%s)
    """ % "|".join(re.escape(p) for p in _PUNCTUATION),
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str
    text: str
    start_byte: int
    end_byte: int

    @property
    def is_trivia(self):
        return self.kind in TRIVIA_KINDS


@dataclass(eq=True)
class SyntaxNode:
    """One node of the concrete tree; leaves carry their source text."""

    kind: str
    start_byte: int
    end_byte: int
    children: list["SyntaxNode"] = field(default_factory=list)
    text: str | None = None

    @property
    def span(self):
        return (self.start_byte, self.end_byte)

    @property
    def is_leaf(self):
        return not self.children

    @property
    def is_error(self):
        return self.kind == "error"

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()

    def leaves(self):
        if self.is_leaf:
            yield self
        else:
            for child in self.children:
                yield from child.leaves()

    def child_by_kind(self, kind):
        for child in self.children:
            if child.kind == kind:
                return child
        return None

    def children_by_kind(self, kind):
        return [c for c in self.children if c.kind == kind]

    def sexp(self):
        if self.is_leaf:
            if self.kind == self.text:
                return '"%s"' % self.text
            return "(%s %r)" % (self.kind, self.text)
        return "(%s %s)" % (self.kind, " ".join(c.sexp() for c in self.children))

    def __repr__(self):
        if self.is_leaf:
            return f"SyntaxNode({self.kind!r}, {self.text!r})"
        return f"SyntaxNode({self.kind!r}, {len(self.children)} children)"


@dataclass
class SyntaxTree:
    root: SyntaxNode
    code: str
    error_count: int = 0
    first_error_span: tuple[int, int] | None = None

    @property
    def has_errors(self):
        return self.error_count > 0

    def walk(self):
        return self.root.walk()

    def leaves(self):
        return self.root.leaves()

    def sexp(self):
        return self.root.sexp()


@dataclass
class SourceFunction:
    """One function-level sample: stable id, source text, optional 0/1 label."""

    id: str
    code: str
    label: int | None = None

    def __post_init__(self):
        if self.label is not None and self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")


def tokenize(code: str) -> list[Token]:
    """Lex C source into tokens with byte spans; never raises."""
    byte_off = [0] * (len(code) + 1)
    pos = 0
    for i, ch in enumerate(code):
        byte_off[i] = pos
        pos += len(ch.encode("utf-8"))
    byte_off[len(code)] = pos

    tokens = []
    i = 0
    n = len(code)
    line_start = True
    while i < n:
        c = code[i]
        if c in " \t\r\f\v":
            i += 1
            continue
        if c == "\n":
            line_start = True
            i += 1
            continue
        if c == "#" and line_start:
            j = i
            while j < n and code[j] != "\n":
                if code[j] == "\\" and j + 1 < n and code[j + 1] == "\n":
                    j += 2
                    continue
                j += 1
            tokens.append(Token("preproc_directive", code[i:j], byte_off[i], byte_off[j]))
            i = j
            continue
        m = _TOKEN_RE.match(code, i)
        if m is None:
            tokens.append(Token("unknown_token", c, byte_off[i], byte_off[i + 1]))
            i += 1
            line_start = False
            continue
        text = m.group(0)
        group = m.lastgroup
        if group == "comment":
            kind = "comment"
        elif group == "string":
            kind = "string_literal"
        elif group == "char":
            kind = "char_literal"
        elif group == "number":
            kind = "number_literal"
        elif group == "identifier":
            if text in PRIMITIVE_TYPES:
                kind = "primitive_type"
            elif text in ("NULL", "nullptr"):
                kind = "null"
            elif text in ("true", "false"):
                kind = text
            elif text in KEYWORDS:
                kind = text
            else:
                kind = "identifier"
        else:
            kind = text
        tokens.append(Token(kind, text, byte_off[i], byte_off[m.end()]))
        i = m.end()
        line_start = False
    return tokens


class _ParseFailure(Exception):
    pass


class _Parser:
    """Recursive-descent C parser with statement-level error recovery."""

    def __init__(self, tokens):
        self.tokens = [t for t in tokens if not t.is_trivia]
        self.pos = 0
        self.typedef_names: set[str] = set()

    # -- token access ------------------------------------------------------

    def peek(self, ahead=0):
        p = self.pos + ahead
        return self.tokens[p] if p < len(self.tokens) else None

    def at(self, *kinds):
        tok = self.peek()
        return tok is not None and tok.kind in kinds

    def at_end(self):
        return self.pos >= len(self.tokens)

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return SyntaxNode(tok.kind, tok.start_byte, tok.end_byte, text=tok.text)

    def expect(self, kind):
        if not self.at(kind):
            got = self.peek()
            raise _ParseFailure(f"expected {kind!r}, got {got.kind if got else 'EOF'!r}")
        return self.advance()

    @staticmethod
    def make(kind, children):
        children = [c for c in children if c is not None]
        if not children:
            return SyntaxNode(kind, 0, 0)
        return SyntaxNode(kind, children[0].start_byte, children[-1].end_byte, children)

    # -- error recovery ----------------------------------------------------

    def error_node(self, start_pos):
        """Consume through the next ';' at original nesting (or stop before '}')."""
        self.pos = start_pos
        leaves = []
        depth = 0
        while not self.at_end():
            tok = self.peek()
            if tok.kind == "}" and depth == 0 and leaves:
                break
            leaves.append(self.advance())
            if tok.kind in "([{":
                depth += 1
            elif tok.kind in ")]}":
                depth -= 1
            if tok.kind == ";" and depth <= 0:
                break
        if not leaves:
            leaves.append(self.advance())
        return self.make("error", leaves)

    # -- type detection ----------------------------------------------------

    def token_starts_type(self, tok):
        if tok is None:
            return False
        return (
            tok.kind == "primitive_type"
            or tok.text in TYPE_QUALIFIERS
            or tok.text in STORAGE_CLASSES
            or tok.text in STRUCT_KEYWORDS
            or (tok.kind == "identifier" and tok.text in self.typedef_names)
        )

    def looks_like_declaration(self):
        """Heuristic for statements led by an unknown identifier.

        ``size_t n`` and ``FILE *fp = ...`` read as declarations; anything
        else identifier-led reads as an expression statement.
        """
        if not self.at("identifier"):
            return False
        k = 1
        while True:
            tok = self.peek(k)
            if tok is None:
                return False
            if tok.kind == "*":
                k += 1
                continue
            break
        tok = self.peek(k)
        if tok is None or tok.kind != "identifier":
            return False
        if k == 1:  # "ident ident" with no stars
            return True
        after = self.peek(k + 1)
        return after is not None and after.kind in {"=", ";", ",", "[", ")", "("}

    # -- top level ---------------------------------------------------------

    def parse_translation_unit(self, code_len):
        children = []
        while not self.at_end():
            start = self.pos
            try:
                children.append(self.parse_external_item())
            except _ParseFailure:
                children.append(self.error_node(start))
        root = SyntaxNode("translation_unit", 0, code_len, children)
        return root

    def parse_external_item(self):
        if self.at(";"):
            return self.make("expression_statement", [self.advance()])
        tok = self.peek()
        if self.token_starts_type(tok) or self.looks_like_declaration():
            return self.parse_declaration_or_function()
        # tolerate bare statements in snippets
        return self.parse_statement()

    def parse_declaration_or_function(self):
        specifiers, is_typedef = self.parse_specifiers()
        if self.at(";"):  # e.g. "struct S { ... };"
            return self.make("declaration", specifiers + [self.advance()])
        declarator = self.parse_declarator()
        if self.at("{") and self._contains_function_declarator(declarator):
            body = self.parse_compound_statement()
            return self.make("function_definition", specifiers + [declarator, body])
        return self.finish_declaration(specifiers, declarator, is_typedef)

    @staticmethod
    def _contains_function_declarator(node):
        cur = node
        while cur is not None:
            if cur.kind == "function_declarator":
                return True
            cur = cur.children[-1] if cur.children else None
        return False

    # -- declarations ------------------------------------------------------

    def parse_specifiers(self):
        """Collect type specifiers; returns (nodes, is_typedef)."""
        nodes = []
        is_typedef = False
        saw_type = False
        primitives = []
        while True:
            tok = self.peek()
            if tok is None:
                break
            if tok.text in STORAGE_CLASSES:
                is_typedef = is_typedef or tok.text == "typedef"
                nodes.append(self.advance())
                continue
            if tok.text in TYPE_QUALIFIERS:
                nodes.append(self.advance())
                continue
            if tok.kind == "primitive_type":
                primitives.append(self.advance())
                saw_type = True
                continue
            if tok.text in STRUCT_KEYWORDS:
                if primitives:
                    break
                nodes.append(self.parse_struct_specifier())
                saw_type = True
                continue
            if tok.kind == "identifier" and not saw_type:
                nxt = self.peek(1)
                if nxt is not None and (nxt.kind in ("identifier", "*") or nxt.text in TYPE_QUALIFIERS):
                    leaf = self.advance()
                    leaf.kind = "type_identifier"
                    nodes.append(leaf)
                    saw_type = True
                    continue
            break
        if len(primitives) > 1:
            nodes.append(self.make("sized_type_specifier", primitives))
        elif primitives:
            nodes.extend(primitives)
        if not nodes:
            raise _ParseFailure("expected type specifier")
        return nodes, is_typedef

    def parse_struct_specifier(self):
        kw = self.advance()
        kind = {"struct": "struct_specifier", "union": "union_specifier", "enum": "enum_specifier"}[kw.text]
        children = [kw]
        if self.at("identifier"):
            tag = self.advance()
            tag.kind = "type_identifier"
            children.append(tag)
        if self.at("{"):
            children.append(self.parse_struct_body(enum=kind == "enum_specifier"))
        return self.make(kind, children)

    def parse_struct_body(self, enum=False):
        children = [self.expect("{")]
        while not self.at_end() and not self.at("}"):
            start = self.pos
            try:
                if enum:
                    children.append(self.parse_enumerator())
                else:
                    children.append(self.parse_field_declaration())
            except _ParseFailure:
                children.append(self.error_node(start))
        if self.at("}"):
            children.append(self.advance())
        kind = "enumerator_list" if enum else "field_declaration_list"
        return self.make(kind, children)

    def parse_enumerator(self):
        name = self.expect("identifier")
        children = [name]
        if self.at("="):
            children.append(self.advance())
            children.append(self.parse_assignment_expression())
        if self.at(","):
            children.append(self.advance())
        return self.make("enumerator", children)

    def parse_field_declaration(self):
        specifiers, _ = self.parse_specifiers()
        children = list(specifiers)
        if not self.at(";"):
            while True:
                decl = self.parse_declarator()
                self._relabel_field(decl)
                children.append(decl)
                if self.at(":"):  # bitfield width
                    children.append(self.advance())
                    children.append(self.parse_conditional_expression())
                if self.at(","):
                    children.append(self.advance())
                    continue
                break
        children.append(self.expect(";"))
        return self.make("field_declaration", children)

    @staticmethod
    def _relabel_field(decl):
        for leaf in decl.leaves():
            if leaf.kind == "identifier":
                leaf.kind = "field_identifier"

    def parse_declarator(self):
        if self.at("*"):
            star = self.advance()
            quals = []
            while self.peek() is not None and self.peek().text in TYPE_QUALIFIERS:
                quals.append(self.advance())
            inner = self.parse_declarator()
            return self.make("pointer_declarator", [star] + quals + [inner])
        return self.parse_direct_declarator()

    def parse_direct_declarator(self):
        if self.at("("):
            open_paren = self.advance()
            inner = self.parse_declarator()
            close = self.expect(")")
            node = self.make("parenthesized_declarator", [open_paren, inner, close])
        elif self.at("identifier"):
            node = self.advance()
        else:
            raise _ParseFailure("expected declarator")
        while True:
            if self.at("["):
                children = [node, self.advance()]
                if not self.at("]"):
                    children.append(self.parse_expression(allow_comma=False))
                children.append(self.expect("]"))
                node = self.make("array_declarator", children)
            elif self.at("("):
                params = self.parse_parameter_list()
                node = self.make("function_declarator", [node, params])
            else:
                return node

    def parse_parameter_list(self):
        children = [self.expect("(")]
        if self.at(")"):
            children.append(self.advance())
            return self.make("parameter_list", children)
        while True:
            if self.at("..."):
                children.append(self.advance())
            else:
                children.append(self.parse_parameter_declaration())
            if self.at(","):
                children.append(self.advance())
                continue
            break
        children.append(self.expect(")"))
        return self.make("parameter_list", children)

    def parse_parameter_declaration(self):
        tok = self.peek()
        if tok is not None and tok.kind == "identifier" and not self.token_starts_type(tok):
            nxt = self.peek(1)
            if nxt is not None and nxt.kind in (",", ")"):
                # K&R-style or unknown-typedef lone identifier: treat as a type
                leaf = self.advance()
                leaf.kind = "type_identifier"
                return self.make("parameter_declaration", [leaf])
        specifiers, _ = self.parse_specifiers()
        children = list(specifiers)
        if not self.at(",", ")"):
            children.append(self.parse_declarator_or_abstract())
        return self.make("parameter_declaration", children)

    def parse_declarator_or_abstract(self):
        if self.at("*"):
            star = self.advance()
            quals = []
            while self.peek() is not None and self.peek().text in TYPE_QUALIFIERS:
                quals.append(self.advance())
            if self.at(",", ")"):
                return self.make("abstract_pointer_declarator", [star] + quals)
            inner = self.parse_declarator_or_abstract()
            kind = "pointer_declarator" if any(l.kind == "identifier" for l in inner.leaves()) \
                else "abstract_pointer_declarator"
            return self.make(kind, [star] + quals + [inner])
        if self.at("["):
            children = [self.advance()]
            if not self.at("]"):
                children.append(self.parse_expression(allow_comma=False))
            children.append(self.expect("]"))
            return self.make("abstract_array_declarator", children)
        return self.parse_direct_declarator()

    def finish_declaration(self, specifiers, first_declarator, is_typedef):
        children = list(specifiers)
        declarator = first_declarator
        while True:
            if self.at("="):
                eq = self.advance()
                value = self.parse_initializer()
                declarator = self.make("init_declarator", [declarator, eq, value])
            children.append(declarator)
            if is_typedef:
                for leaf in declarator.leaves():
                    if leaf.kind == "identifier":
                        self.typedef_names.add(leaf.text)
            if self.at(","):
                children.append(self.advance())
                declarator = self.parse_declarator()
                continue
            break
        children.append(self.expect(";"))
        return self.make("declaration", children)

    def parse_declaration(self):
        specifiers, is_typedef = self.parse_specifiers()
        if self.at(";"):
            return self.make("declaration", specifiers + [self.advance()])
        declarator = self.parse_declarator()
        return self.finish_declaration(specifiers, declarator, is_typedef)

    def parse_initializer(self):
        if self.at("{"):
            children = [self.advance()]
            while not self.at_end() and not self.at("}"):
                children.append(self.parse_initializer())
                if self.at(","):
                    children.append(self.advance())
            children.append(self.expect("}"))
            return self.make("initializer_list", children)
        return self.parse_assignment_expression()

    # -- statements --------------------------------------------------------

    def parse_compound_statement(self):
        children = [self.expect("{")]
        while not self.at_end() and not self.at("}"):
            start = self.pos
            try:
                children.append(self.parse_block_item())
            except _ParseFailure:
                children.append(self.error_node(start))
        if self.at("}"):
            children.append(self.advance())
        return self.make("compound_statement", children)

    def parse_block_item(self):
        tok = self.peek()
        if self.token_starts_type(tok) or self.looks_like_declaration():
            return self.parse_declaration()
        return self.parse_statement()

    def parse_statement(self):
        tok = self.peek()
        if tok is None:
            raise _ParseFailure("unexpected EOF")
        kind = tok.kind
        if kind == "{":
            return self.parse_compound_statement()
        if kind == "if":
            return self.parse_if_statement()
        if kind == "while":
            kw = self.advance()
            cond = self.parse_parenthesized_expression()
            body = self.parse_statement()
            return self.make("while_statement", [kw, cond, body])
        if kind == "do":
            kw = self.advance()
            body = self.parse_statement()
            wh = self.expect("while")
            cond = self.parse_parenthesized_expression()
            semi = self.expect(";")
            return self.make("do_statement", [kw, body, wh, cond, semi])
        if kind == "for":
            return self.parse_for_statement()
        if kind == "switch":
            kw = self.advance()
            cond = self.parse_parenthesized_expression()
            body = self.parse_compound_statement()
            return self.make("switch_statement", [kw, cond, body])
        if kind == "case":
            kw = self.advance()
            value = self.parse_conditional_expression()
            colon = self.expect(":")
            children = [kw, value, colon]
            children.extend(self._case_body())
            return self.make("case_statement", children)
        if kind == "default":
            kw = self.advance()
            colon = self.expect(":")
            children = [kw, colon]
            children.extend(self._case_body())
            return self.make("case_statement", children)
        if kind == "return":
            kw = self.advance()
            children = [kw]
            if not self.at(";"):
                children.append(self.parse_expression())
            children.append(self.expect(";"))
            return self.make("return_statement", children)
        if kind == "break":
            return self.make("break_statement", [self.advance(), self.expect(";")])
        if kind == "continue":
            return self.make("continue_statement", [self.advance(), self.expect(";")])
        if kind == "goto":
            kw = self.advance()
            label = self.expect("identifier")
            label.kind = "statement_identifier"
            return self.make("goto_statement", [kw, label, self.expect(";")])
        if kind == ";":
            return self.make("expression_statement", [self.advance()])
        if kind == "identifier":
            nxt = self.peek(1)
            if nxt is not None and nxt.kind == ":":
                label = self.advance()
                label.kind = "statement_identifier"
                colon = self.advance()
                stmt = self.parse_statement() if not self.at("}") and not self.at_end() else None
                return self.make("labeled_statement", [label, colon, stmt])
        expr = self.parse_expression()
        semi = self.expect(";")
        return self.make("expression_statement", [expr, semi])

    def _case_body(self):
        body = []
        while not self.at_end() and not self.at("case", "default", "}"):
            start = self.pos
            try:
                body.append(self.parse_block_item())
            except _ParseFailure:
                body.append(self.error_node(start))
        return body

    def parse_if_statement(self):
        kw = self.advance()
        cond = self.parse_parenthesized_expression()
        then = self.parse_statement()
        children = [kw, cond, then]
        if self.at("else"):
            els = self.advance()
            alt = self.parse_statement()
            children.append(self.make("else_clause", [els, alt]))
        return self.make("if_statement", children)

    def parse_for_statement(self):
        kw = self.advance()
        children = [kw, self.expect("(")]
        tok = self.peek()
        if self.at(";"):
            children.append(self.advance())
        elif self.token_starts_type(tok) or self.looks_like_declaration():
            children.append(self.parse_declaration())
        else:
            children.append(self.parse_expression())
            children.append(self.expect(";"))
        if not self.at(";"):
            children.append(self.parse_expression())
        children.append(self.expect(";"))
        if not self.at(")"):
            children.append(self.parse_expression())
        children.append(self.expect(")"))
        children.append(self.parse_statement())
        return self.make("for_statement", children)

    def parse_parenthesized_expression(self):
        open_paren = self.expect("(")
        expr = self.parse_expression()
        close = self.expect(")")
        return self.make("parenthesized_expression", [open_paren, expr, close])

    # -- expressions -------------------------------------------------------

    def parse_expression(self, allow_comma=True):
        expr = self.parse_assignment_expression()
        if allow_comma and self.at(","):
            children = [expr]
            while self.at(","):
                children.append(self.advance())
                children.append(self.parse_assignment_expression())
            return self.make("comma_expression", children)
        return expr

    def parse_assignment_expression(self):
        left = self.parse_conditional_expression()
        tok = self.peek()
        if tok is not None and tok.kind in ASSIGN_OPS:
            op = self.advance()
            right = self.parse_assignment_expression()
            return self.make("assignment_expression", [left, op, right])
        return left

    def parse_conditional_expression(self):
        cond = self.parse_binary_expression(1)
        if self.at("?"):
            q = self.advance()
            then = self.parse_expression(allow_comma=False)
            colon = self.expect(":")
            els = self.parse_assignment_expression()
            return self.make("conditional_expression", [cond, q, then, colon, els])
        return cond

    def parse_binary_expression(self, min_prec):
        left = self.parse_unary_expression()
        while True:
            tok = self.peek()
            if tok is None:
                return left
            prec = BINARY_PRECEDENCE.get(tok.kind)
            if prec is None or prec < min_prec:
                return left
            op = self.advance()
            right = self.parse_binary_expression(prec + 1)
            left = self.make("binary_expression", [left, op, right])

    def parse_unary_expression(self):
        tok = self.peek()
        if tok is None:
            raise _ParseFailure("unexpected EOF in expression")
        if tok.kind in ("++", "--"):
            op = self.advance()
            operand = self.parse_unary_expression()
            return self.make("update_expression", [op, operand])
        if tok.kind in ("!", "~", "+", "-"):
            op = self.advance()
            operand = self.parse_unary_expression()
            return self.make("unary_expression", [op, operand])
        if tok.kind in ("*", "&"):
            op = self.advance()
            operand = self.parse_unary_expression()
            return self.make("pointer_expression", [op, operand])
        if tok.kind == "sizeof":
            kw = self.advance()
            if self.at("(") and self.token_starts_type(self.peek(1)):
                open_paren = self.advance()
                type_desc = self.parse_type_descriptor()
                close = self.expect(")")
                return self.make("sizeof_expression", [kw, open_paren, type_desc, close])
            operand = self.parse_unary_expression()
            return self.make("sizeof_expression", [kw, operand])
        if tok.kind == "(" and self._is_cast():
            open_paren = self.advance()
            type_desc = self.parse_type_descriptor()
            close = self.expect(")")
            operand = self.parse_unary_expression()
            return self.make("cast_expression", [open_paren, type_desc, close, operand])
        return self.parse_postfix_expression()

    def _is_cast(self):
        nxt = self.peek(1)
        if nxt is None:
            return False
        if nxt.kind == "primitive_type" or nxt.text in TYPE_QUALIFIERS | STRUCT_KEYWORDS:
            return True
        if nxt.kind == "identifier" and nxt.text in self.typedef_names:
            return True
        if nxt.kind != "identifier":
            return False
        # "(name)" casts only when the parens hold a bare type-ish shape and
        # the next token clearly starts an operand, e.g. "(foo_t)x".
        k = 2
        while True:
            tok = self.peek(k)
            if tok is None:
                return False
            if tok.kind == "*" or tok.text in TYPE_QUALIFIERS:
                k += 1
                continue
            break
        if self.peek(k) is None or self.peek(k).kind != ")":
            return False
        after = self.peek(k + 1)
        if after is None:
            return False
        return after.kind in {"identifier", "number_literal", "string_literal",
                              "char_literal", "null", "true", "false", "(", "!", "~", "sizeof"}

    def parse_type_descriptor(self):
        specifiers, _ = self.parse_specifiers()
        children = list(specifiers)
        while self.at("*"):
            children.append(self.advance())
        while self.at("["):
            children.append(self.advance())
            if not self.at("]"):
                children.append(self.parse_expression(allow_comma=False))
            children.append(self.expect("]"))
        return self.make("type_descriptor", children)

    def parse_postfix_expression(self):
        node = self.parse_primary_expression()
        while True:
            if self.at("("):
                args = self.parse_argument_list()
                node = self.make("call_expression", [node, args])
            elif self.at("["):
                children = [node, self.advance(), self.parse_expression(), self.expect("]")]
                node = self.make("subscript_expression", children)
            elif self.at(".", "->"):
                op = self.advance()
                name = self.expect("identifier")
                name.kind = "field_identifier"
                node = self.make("field_expression", [node, op, name])
            elif self.at("++", "--"):
                node = self.make("update_expression", [node, self.advance()])
            else:
                return node

    def parse_argument_list(self):
        children = [self.expect("(")]
        if self.at(")"):
            children.append(self.advance())
            return self.make("argument_list", children)
        while True:
            children.append(self.parse_assignment_expression())
            if self.at(","):
                children.append(self.advance())
                continue
            break
        children.append(self.expect(")"))
        return self.make("argument_list", children)

    def parse_primary_expression(self):
        tok = self.peek()
        if tok is None:
            raise _ParseFailure("unexpected EOF in expression")
        if tok.kind in ("identifier", "number_literal", "string_literal",
                        "char_literal", "null", "true", "false"):
            node = self.advance()
            # adjacent string literal concatenation
            if node.kind == "string_literal" and self.at("string_literal"):
                parts = [node]
                while self.at("string_literal"):
                    parts.append(self.advance())
                return self.make("concatenated_string", parts)
            return node
        if tok.kind == "(":
            return self.parse_parenthesized_expression()
        if tok.kind == "{":
            return self.parse_initializer()
        if tok.kind == "primitive_type":
            # lone type name in expression position (macro residue); leaf it
            return self.advance()
        raise _ParseFailure(f"unexpected token {tok.kind!r}")


def _attach_trivia(root, trivia_leaves):
    """Insert comment/preproc leaves into the deepest containing node."""
    for leaf in trivia_leaves:
        node = root
        while True:
            placed = False
            for child in node.children:
                if child.children and child.start_byte <= leaf.start_byte and leaf.end_byte <= child.end_byte:
                    node = child
                    placed = True
                    break
            if not placed:
                break
        idx = 0
        for idx, child in enumerate(node.children):
            if child.start_byte >= leaf.end_byte:
                break
        else:
            idx = len(node.children)
        node.children.insert(idx, leaf)


def parse_function(source: SourceFunction | str, strict: bool = False) -> SyntaxTree:
    """Parse one C function snippet into a SyntaxTree.

    With strict=False (the default) grammar errors become ``error`` nodes and
    the tree is still returned; with strict=True the first error raises
    ParseRejected carrying its byte span.
    """
    code = source.code if isinstance(source, SourceFunction) else source
    if not code.strip():
        raise EmptySource("source code is empty")
    if sys.getrecursionlimit() < 10000:
        sys.setrecursionlimit(10000)

    tokens = tokenize(code)
    trivia = [t for t in tokens if t.is_trivia]
    parser = _Parser(tokens)
    root = parser.parse_translation_unit(len(code.encode("utf-8")))
    trivia_leaves = [SyntaxNode(t.kind, t.start_byte, t.end_byte, text=t.text) for t in trivia]
    _attach_trivia(root, trivia_leaves)

    error_spans = [n.span for n in root.walk() if n.is_error]
    tree = SyntaxTree(
        root=root,
        code=code,
        error_count=len(error_spans),
        first_error_span=min(error_spans) if error_spans else None,
    )
    if strict and tree.has_errors:
        raise ParseRejected("grammar error in source", tree.first_error_span)
    return tree


def leaf_tokens(tree: SyntaxTree) -> list[tuple[int, SyntaxNode]]:
    """Leaves in span order, comments and preprocessor lines excluded."""
    out = []
    for leaf in tree.leaves():
        if leaf.kind in TRIVIA_KINDS:
            continue
        out.append((len(out), leaf))
    return out
