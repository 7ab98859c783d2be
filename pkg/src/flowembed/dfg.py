"""Extract the data flow graph of one C function from its syntax tree.

Nodes are variable occurrences plus the constants consumed by definitions;
a directed edge (i, j) states that the value of occurrence j originates
from occurrence i. The extraction is a single forward pass in token order
with union semantics across branches: after an ``if``, definitions from
both arms reach later uses. A definition produced by an initializer or an
assignment is anchored at the first free leaf slot after its right-hand
side, so every edge points forward in ``token_index`` (modulo explicitly
flagged loop back-bindings).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .cparser import (
    LITERAL_KINDS,
    STORAGE_CLASSES,
    SyntaxNode,
    SyntaxTree,
    leaf_tokens,
)
from .errors import ContractViolation, UnsupportedFormat

_DECLARATOR_KINDS = {
    "init_declarator", "pointer_declarator", "array_declarator",
    "function_declarator", "parenthesized_declarator", "identifier",
}

UNKNOWN_TYPE = "unknown"


@dataclass
class DfgNode:
    node_id: int
    name: str
    token_index: int
    node_kind: str  # "variable" | "constant"
    type_feature: str


@dataclass
class DataFlowGraph:
    function_id: str
    nodes: list[DfgNode]
    edges: set[tuple[int, int]]
    back_edges: set[tuple[int, int]] = field(default_factory=set)

    @property
    def n(self):
        return len(self.nodes)

    def validate(self):
        ids = [node.node_id for node in self.nodes]
        if ids != list(range(len(ids))):
            raise ContractViolation("node ids must be dense and ordered")
        positions = [node.token_index for node in self.nodes]
        if len(set(positions)) != len(positions):
            raise ContractViolation("token_index must be unique per node")
        if positions != sorted(positions):
            raise ContractViolation("nodes must be ordered by token_index")
        for src, dst in self.edges:
            if not (0 <= src < len(ids)) or not (0 <= dst < len(ids)):
                raise ContractViolation(f"edge ({src},{dst}) references missing node")
            if src == dst:
                raise ContractViolation("self-edges are not allowed")
            if (src, dst) not in self.back_edges and positions[src] >= positions[dst]:
                raise ContractViolation(f"edge ({src},{dst}) is not forward in token order")
        return self


def collect_type_bindings(tree: SyntaxTree) -> dict[str, str]:
    """Map each declared identifier to its normalized declared type text.

    Covers parameter lists and local declarations; pointer declarators add
    a star suffix ("char *"); later re-declarations overwrite earlier ones.
    """
    bindings: dict[str, str] = {}
    for node in tree.walk():
        if node.kind == "declaration":
            if any(c.is_leaf and c.text == "typedef" for c in node.children):
                continue
            specs, declarators = _split_declaration(node)
            base = _type_text(specs)
            for decl in declarators:
                _bind_declarator(decl, base, bindings)
        elif node.kind == "parameter_declaration":
            specs = [c for c in node.children if c.kind not in _DECLARATOR_KINDS
                     and not c.kind.startswith("abstract_")]
            declarators = [c for c in node.children if c.kind in _DECLARATOR_KINDS]
            base = _type_text(specs)
            for decl in declarators:
                _bind_declarator(decl, base, bindings)
    return bindings


def _split_declaration(node):
    specs, declarators = [], []
    for child in node.children:
        if child.kind in _DECLARATOR_KINDS:
            declarators.append(child)
        elif child.kind not in (",", ";"):
            specs.append(child)
    return specs, declarators


def _type_text(specs):
    parts = []
    for s in specs:
        if s.is_leaf:
            if s.text in STORAGE_CLASSES:
                continue
            parts.append(s.text)
        elif s.kind == "sized_type_specifier":
            parts.extend(leaf.text for leaf in s.leaves())
        elif s.kind in ("struct_specifier", "union_specifier", "enum_specifier"):
            tag = s.child_by_kind("type_identifier")
            parts.append(s.children[0].text + (" " + tag.text if tag is not None else ""))
    return " ".join(parts)


def _bind_declarator(decl, base, bindings):
    name_leaf, stars, is_function = _declarator_identifier(decl)
    if name_leaf is None or is_function or not base:
        return
    bindings[name_leaf.text] = base + (" " + "*" * stars if stars else "")


def _declarator_identifier(decl):
    """Descend to the declared identifier; returns (leaf, star_count, is_function)."""
    stars = 0
    node = decl
    while node is not None:
        if node.kind == "identifier":
            return node, stars, False
        if node.kind == "init_declarator":
            node = node.children[0]
        elif node.kind == "pointer_declarator":
            stars += 1
            node = node.children[-1]
        elif node.kind == "parenthesized_declarator":
            node = node.children[1]
        elif node.kind == "array_declarator":
            node = node.children[0]
        elif node.kind == "function_declarator":
            inner = node.children[0]
            if inner.kind == "identifier":
                return inner, stars, True
            node = inner
        else:
            return None, stars, False
    return None, stars, False


class _Builder:
    def __init__(self, tree, bindings, loop_back_edges):
        self.bindings = bindings
        self.loop_back_edges = loop_back_edges
        self.leaf_index = {id(leaf): i for i, (_, leaf) in enumerate(leaf_tokens(tree))}
        self.reserved = {
            i for i, (_, leaf) in enumerate(leaf_tokens(tree))
            if leaf.kind == "identifier" or leaf.kind in LITERAL_KINDS
        }
        self.taken: set[int] = set()
        self.names: list[str] = []
        self.positions: list[int] = []
        self.kinds: list[str] = []
        self.types: list[str] = []
        self.edges: set[tuple[int, int]] = set()
        self.back_edges: set[tuple[int, int]] = set()
        self.env: dict[str, frozenset[int]] = {}
        self.use_logs: list[list[tuple[int, str, frozenset[int]]]] = []

    # -- node construction ---------------------------------------------

    def _new_node(self, name, position, kind, type_feature):
        idx = len(self.names)
        self.names.append(name)
        self.positions.append(position)
        self.kinds.append(kind)
        self.types.append(type_feature)
        self.taken.add(position)
        return idx

    def _anchor_after(self, position):
        p = position + 1
        while p in self.taken or p in self.reserved:
            p += 1
        return p

    def _last_leaf_index(self, node):
        last = None
        for leaf in node.leaves():
            if id(leaf) in self.leaf_index:
                last = leaf
        return self.leaf_index[id(last)]

    def add_use(self, leaf):
        name = leaf.text
        idx = self._new_node(name, self.leaf_index[id(leaf)], "variable",
                             self.bindings.get(name, UNKNOWN_TYPE))
        reaching = self.env.get(name, frozenset())
        for d in reaching:
            self.edges.add((d, idx))
        for log in self.use_logs:
            log.append((idx, name, reaching))
        return idx

    def add_constant(self, node):
        if node.kind == "concatenated_string":
            leaf = node.children[0]
            kind_tag = "string_literal"
        else:
            leaf = node
            kind_tag = node.kind
        text = node.text if node.is_leaf else "".join(l.text for l in node.leaves())
        return self._new_node(text, self.leaf_index[id(leaf)], "constant", kind_tag)

    def add_definition(self, leaf, sources, anchor, extra_prev=False):
        name = leaf.text
        if extra_prev:
            sources = list(sources) + list(self.env.get(name, frozenset()))
        idx = self._new_node(name, anchor, "variable",
                             self.bindings.get(name, UNKNOWN_TYPE))
        for s in sources:
            self.edges.add((s, idx))
        self.env[name] = frozenset([idx])
        return idx

    # -- environments ----------------------------------------------------

    def _snapshot(self):
        return dict(self.env)

    @staticmethod
    def _merge(envs):
        merged: dict[str, frozenset[int]] = {}
        for env in envs:
            for name, defs in env.items():
                merged[name] = merged.get(name, frozenset()) | defs
        return merged

    # -- expression walk ---------------------------------------------------

    def walk_expr(self, node, consume):
        """Returns occurrence node ids this expression contributes upward."""
        if node.is_leaf:
            if node.kind == "identifier":
                return [self.add_use(node)]
            if node.kind in LITERAL_KINDS and consume:
                return [self.add_constant(node)]
            return []
        kind = node.kind
        if kind == "concatenated_string":
            return [self.add_constant(node)] if consume else []
        if kind == "assignment_expression":
            return self.walk_assignment(node)
        if kind == "update_expression":
            return self.walk_update(node)
        if kind == "call_expression":
            return self.walk_call(node, consume)
        if kind == "field_expression":
            return self.walk_expr(node.children[0], consume)
        if kind == "cast_expression":
            return self.walk_expr(node.children[-1], consume)
        sources = []
        for child in node.children:
            sources.extend(self.walk_expr(child, consume))
        return sources

    def walk_assignment(self, node):
        lhs, op = node.children[0], node.children[1]
        rhs = node.children[2]
        sources = self.walk_expr(rhs, consume=True)
        base = self._lvalue_base(lhs)
        if base is None:
            return sources
        anchor = self._anchor_after(self._last_leaf_index(rhs))
        return [self.add_definition(base, sources, anchor, extra_prev=op.text != "=")]

    def walk_update(self, node):
        operand = node.children[-1] if node.children[0].is_leaf and \
            node.children[0].kind in ("++", "--") else node.children[0]
        base = self._lvalue_base(operand)
        if base is None:
            return self.walk_expr(operand, consume=False)
        anchor = self._anchor_after(self._last_leaf_index(node))
        return [self.add_definition(base, [], anchor, extra_prev=True)]

    def walk_call(self, node, consume):
        callee, args = node.children[0], node.children[-1]
        if callee.kind != "identifier":
            self.walk_expr(callee, consume=False)
        sources = []
        for arg in args.children:
            if arg.is_leaf and arg.kind in ("(", ")", ","):
                continue
            sources.extend(self.walk_expr(arg, consume))
        return sources

    def _lvalue_base(self, node):
        """Base identifier leaf of an lvalue; index/field parts walk as uses."""
        while True:
            if node.is_leaf:
                return node if node.kind == "identifier" else None
            kind = node.kind
            if kind == "subscript_expression":
                for child in node.children[1:]:
                    if not (child.is_leaf and child.kind in ("[", "]")):
                        self.walk_expr(child, consume=False)
                node = node.children[0]
            elif kind == "field_expression":
                node = node.children[0]
            elif kind == "pointer_expression":
                node = node.children[-1]
            elif kind == "parenthesized_expression":
                node = node.children[1]
            elif kind == "cast_expression":
                node = node.children[-1]
            else:
                self.walk_expr(node, consume=False)
                return None

    # -- statement walk ------------------------------------------------

    def walk_statement(self, node):
        kind = node.kind
        if kind == "declaration":
            self.walk_declaration(node)
        elif kind == "expression_statement":
            for child in node.children:
                if not (child.is_leaf and child.kind == ";"):
                    self.walk_expr(child, consume=False)
        elif kind == "if_statement":
            self.walk_if(node)
        elif kind == "while_statement":
            self.walk_while(node)
        elif kind == "do_statement":
            self.walk_do(node)
        elif kind == "for_statement":
            self.walk_for(node)
        elif kind == "switch_statement":
            self.walk_switch(node)
        elif kind == "return_statement":
            for child in node.children[1:]:
                if not (child.is_leaf and child.kind == ";"):
                    self.walk_expr(child, consume=False)
        elif kind in ("compound_statement", "labeled_statement", "case_statement",
                      "translation_unit", "else_clause"):
            for child in node.children:
                if not child.is_leaf:
                    self.walk_statement(child)
        elif kind == "function_definition":
            self.walk_function(node)
        elif kind == "error":
            pass  # unparsed region: contributes nothing
        elif not node.is_leaf:
            for child in node.children:
                if not child.is_leaf:
                    self.walk_statement(child)

    def walk_function(self, node):
        declarator = node.child_by_kind("function_declarator")
        if declarator is None:
            for child in node.children:
                d = child.child_by_kind("function_declarator") if not child.is_leaf else None
                if d is not None:
                    declarator = d
                    break
        if declarator is not None:
            params = declarator.child_by_kind("parameter_list")
            if params is not None:
                for param in params.children_by_kind("parameter_declaration"):
                    self.walk_parameter(param)
        body = node.child_by_kind("compound_statement")
        if body is not None:
            self.walk_statement(body)

    def walk_parameter(self, param):
        for decl in param.children:
            if decl.kind in _DECLARATOR_KINDS:
                leaf, _, is_function = _declarator_identifier(decl)
                if leaf is not None and not is_function:
                    self.add_definition(leaf, [], self.leaf_index[id(leaf)])
                self._walk_array_sizes(decl)

    def walk_declaration(self, node):
        if any(c.is_leaf and c.text == "typedef" for c in node.children):
            return
        _, declarators = _split_declaration(node)
        for decl in declarators:
            if decl.kind == "init_declarator":
                inner, value = decl.children[0], decl.children[-1]
                self._walk_array_sizes(inner)
                sources = self.walk_expr(value, consume=True)
                leaf, _, is_function = _declarator_identifier(inner)
                if leaf is not None and not is_function:
                    anchor = self._anchor_after(self._last_leaf_index(value))
                    self.add_definition(leaf, sources, anchor)
            else:
                self._walk_array_sizes(decl)
                leaf, _, is_function = _declarator_identifier(decl)
                if leaf is not None and not is_function:
                    self.add_definition(leaf, [], self.leaf_index[id(leaf)])

    def _walk_array_sizes(self, decl):
        for node in decl.walk():
            if node.kind == "array_declarator":
                for child in node.children[1:]:
                    if not (child.is_leaf and child.kind in ("[", "]")):
                        self.walk_expr(child, consume=False)

    def walk_if(self, node):
        cond = node.child_by_kind("parenthesized_expression")
        if cond is not None:
            self.walk_expr(cond, consume=False)
        base = self._snapshot()
        then = next((c for c in node.children
                     if not c.is_leaf and c.kind not in ("parenthesized_expression", "else_clause")),
                    None)
        else_clause = node.child_by_kind("else_clause")
        envs = []
        if then is not None:
            self.env = dict(base)
            self.walk_statement(then)
            envs.append(self.env)
        if else_clause is not None:
            self.env = dict(base)
            self.walk_statement(else_clause)
            envs.append(self.env)
        else:
            envs.append(base)
        self.env = self._merge(envs)

    def _loop_region(self, walk_body):
        """Walk a loop body on a branch env; handles optional back-bindings."""
        base = self._snapshot()
        log: list[tuple[int, str, frozenset[int]]] = []
        if self.loop_back_edges:
            self.use_logs.append(log)
        self.env = dict(base)
        walk_body()
        body_env = self.env
        if self.loop_back_edges:
            self.use_logs.pop()
            for use_idx, name, seen in log:
                for d in body_env.get(name, frozenset()) - seen - {use_idx}:
                    self.edges.add((d, use_idx))
                    self.back_edges.add((d, use_idx))
        self.env = self._merge([base, body_env])

    def walk_while(self, node):
        def body():
            cond = node.child_by_kind("parenthesized_expression")
            if cond is not None:
                self.walk_expr(cond, consume=False)
            stmt = next((c for c in node.children
                         if not c.is_leaf and c.kind != "parenthesized_expression"), None)
            if stmt is not None:
                self.walk_statement(stmt)
        self._loop_region(body)

    def walk_do(self, node):
        def body():
            stmt = next((c for c in node.children
                         if not c.is_leaf and c.kind != "parenthesized_expression"), None)
            if stmt is not None:
                self.walk_statement(stmt)
            cond = node.child_by_kind("parenthesized_expression")
            if cond is not None:
                self.walk_expr(cond, consume=False)
        self._loop_region(body)

    def walk_for(self, node):
        # children: for ( init... ; cond? ; update? ) body — the init may be a
        # declaration that already consumed its ';'
        inner = node.children[2:-1]  # between '(' and body
        body_stmt = node.children[-1]
        clauses: list[list[SyntaxNode]] = [[], [], []]
        clause = 0
        for child in inner:
            if child.is_leaf and child.kind == ";":
                clause += 1
                continue
            if child.is_leaf and child.kind == ")":
                continue
            if child.kind == "declaration" and clause == 0:
                clauses[0].append(child)
                continue
            if clause < 3:
                clauses[clause].append(child)
        for item in clauses[0]:
            if item.kind == "declaration":
                self.walk_declaration(item)
            else:
                self.walk_expr(item, consume=False)

        def body():
            for item in clauses[1]:
                self.walk_expr(item, consume=False)
            for item in clauses[2]:
                self.walk_expr(item, consume=False)
            self.walk_statement(body_stmt)
        self._loop_region(body)

    def walk_switch(self, node):
        cond = node.child_by_kind("parenthesized_expression")
        if cond is not None:
            self.walk_expr(cond, consume=False)
        body = node.child_by_kind("compound_statement")
        if body is None:
            return
        base = self._snapshot()
        envs = [base]
        for child in body.children:
            if child.kind == "case_statement":
                self.env = dict(base)
                self.walk_statement(child)
                envs.append(self.env)
            elif not child.is_leaf:
                self.env = dict(base)
                self.walk_statement(child)
                envs.append(self.env)
        self.env = self._merge(envs)

    # -- assembly --------------------------------------------------------

    def finish(self, function_id):
        order = sorted(range(len(self.names)), key=lambda i: self.positions[i])
        remap = {old: new for new, old in enumerate(order)}
        nodes = [
            DfgNode(
                node_id=new,
                name=self.names[old],
                token_index=self.positions[old],
                node_kind=self.kinds[old],
                type_feature=self.types[old],
            )
            for new, old in enumerate(order)
        ]
        edges = {(remap[s], remap[d]) for s, d in self.edges}
        back = {(remap[s], remap[d]) for s, d in self.back_edges}
        return DataFlowGraph(function_id, nodes, edges, back).validate()


def build_dfg(tree: SyntaxTree, bindings: dict[str, str] | None = None,
              function_id: str = "", loop_back_edges: bool = False) -> DataFlowGraph:
    """Extract the data flow graph from a parsed function."""
    if bindings is None:
        bindings = collect_type_bindings(tree)
    builder = _Builder(tree, bindings, loop_back_edges)
    builder.walk_statement(tree.root)
    return builder.finish(function_id)


def export_graph(dfg: DataFlowGraph, format: str = "json") -> str:
    """Render a graph as byte-stable JSON or as DOT for inspection."""
    if format == "json":
        payload = {
            "function_id": dfg.function_id,
            "nodes": [
                {
                    "id": n.node_id,
                    "name": n.name,
                    "token_index": n.token_index,
                    "kind": n.node_kind,
                    "type": n.type_feature,
                }
                for n in dfg.nodes
            ],
            "edges": [list(e) for e in sorted(dfg.edges)],
        }
        return json.dumps(payload, separators=(",", ":"))
    if format == "dot":
        lines = [f'digraph "{dfg.function_id or "dfg"}" {{']
        for n in dfg.nodes:
            label = f"{n.name}@{n.token_index} : {n.type_feature}".replace('"', '\\"')
            lines.append(f'  n{n.node_id} [label="{label}"];')
        for src, dst in sorted(dfg.edges):
            style = " [style=dashed]" if (src, dst) in dfg.back_edges else ""
            lines.append(f"  n{src} -> n{dst}{style};")
        lines.append("}")
        return "\n".join(lines)
    raise UnsupportedFormat(f"unknown export format {format!r}")


def parse_graph_json(text: str) -> DataFlowGraph:
    """Inverse of export_graph(..., "json")."""
    payload = json.loads(text)
    nodes = [
        DfgNode(d["id"], d["name"], d["token_index"], d["kind"], d["type"])
        for d in payload["nodes"]
    ]
    edges = {(int(s), int(d)) for s, d in payload["edges"]}
    return DataFlowGraph(payload["function_id"], nodes, edges).validate()
