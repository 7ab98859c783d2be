"""Hand-derived node/edge sets for the extraction oracle corpus.

Each case was worked out on paper by applying the comes-from rules to the
snippet: nodes are listed in graph order as (name, kind, type); edges are
(src, dst) pairs over those positions. The test asserts exact equality.
"""

ORACLE_CASES = [
    # 1. declaration with initializer: all RHS occurrences feed the new def
    (
        "decl_init_binary",
        "int a = b + c;",
        [("b", "variable", "unknown"), ("c", "variable", "unknown"),
         ("a", "variable", "int")],
        {(0, 2), (1, 2)},
    ),
    # 2. bare declaration: one node, no flow
    (
        "decl_bare",
        "int x;",
        [("x", "variable", "int")],
        set(),
    ),
    # 3. parameters and locals bind their declared types
    (
        "param_and_local",
        "int f(float x){int y;}",
        [("x", "variable", "float"), ("y", "variable", "int")],
        set(),
    ),
    # 4. null-pointer flow: constant source -> def -> use path
    (
        "null_flow",
        'int use(){ char* str1 = NULL; printf("%s", str1); return 0; }',
        [("NULL", "constant", "null"), ("str1", "variable", "char *"),
         ("str1", "variable", "char *")],
        {(0, 1), (1, 2)},
    ),
    # 5. call arguments flow into the assigned variable; callee is not a node
    (
        "call_args",
        "void g(int a, int b){ int y = f(a,b); }",
        [("a", "variable", "int"), ("b", "variable", "int"),
         ("a", "variable", "int"), ("b", "variable", "int"),
         ("y", "variable", "int")],
        {(0, 2), (1, 3), (2, 4), (3, 4)},
    ),
    # 6. branch union: both the pre-branch and in-branch defs reach the use
    (
        "if_union",
        "void h(int c){ int x = 1; if (c) x = 2; int y = x; }",
        [("c", "variable", "int"), ("1", "constant", "number_literal"),
         ("x", "variable", "int"), ("c", "variable", "int"),
         ("2", "constant", "number_literal"), ("x", "variable", "int"),
         ("x", "variable", "int"), ("y", "variable", "int")],
        {(0, 3), (1, 2), (2, 6), (4, 5), (5, 6), (6, 7)},
    ),
    # 7. compound assignment adds the previous-definition edge
    (
        "compound_assign",
        "void f(int a){ int x = 1; x += a; }",
        [("a", "variable", "int"), ("1", "constant", "number_literal"),
         ("x", "variable", "int"), ("a", "variable", "int"),
         ("x", "variable", "int")],
        {(1, 2), (0, 3), (3, 4), (2, 4)},
    ),
    # 8. two uses of one variable are two occurrence nodes
    (
        "double_use",
        "void f(){ int x = 1; int y = x + x; }",
        [("1", "constant", "number_literal"), ("x", "variable", "int"),
         ("x", "variable", "int"), ("x", "variable", "int"),
         ("y", "variable", "int")],
        {(0, 1), (1, 2), (1, 3), (2, 4), (3, 4)},
    ),
    # 9. if/else: both arm defs kill the bare decl; use sees the two arms
    (
        "if_else_union",
        "void f(int c){ int x; if (c) x = 1; else x = 2; int y = x; }",
        [("c", "variable", "int"), ("x", "variable", "int"),
         ("c", "variable", "int"), ("1", "constant", "number_literal"),
         ("x", "variable", "int"), ("2", "constant", "number_literal"),
         ("x", "variable", "int"), ("x", "variable", "int"),
         ("y", "variable", "int")],
        {(0, 2), (3, 4), (5, 6), (4, 7), (6, 7), (7, 8)},
    ),
    # 10. while loop: body may run zero times, so both defs reach the exit use
    (
        "while_union",
        "void f(int n){ while (n > 0) { n = n - 1; } int y = n; }",
        [("n", "variable", "int"), ("n", "variable", "int"),
         ("n", "variable", "int"), ("1", "constant", "number_literal"),
         ("n", "variable", "int"), ("n", "variable", "int"),
         ("y", "variable", "int")],
        {(0, 1), (0, 2), (2, 4), (3, 4), (0, 5), (4, 5), (5, 6)},
    ),
    # 11. for loop walked in token order: init, cond, update, body
    (
        "for_loop",
        "void f(int n){ int s = 0; for (int i = 0; i < n; i++) { s += i; } }",
        [("n", "variable", "int"), ("0", "constant", "number_literal"),
         ("s", "variable", "int"), ("0", "constant", "number_literal"),
         ("i", "variable", "int"), ("i", "variable", "int"),
         ("n", "variable", "int"), ("i", "variable", "int"),
         ("i", "variable", "int"), ("s", "variable", "int")],
        {(0, 6), (1, 2), (2, 9), (3, 4), (4, 5), (4, 7), (7, 8), (8, 9)},
    ),
    # 12. subscript write: index is a use, base is the defined variable,
    # and the array size expression creates no node
    (
        "subscript_def",
        "void f(int i){ int a[10]; a[i] = 5; }",
        [("i", "variable", "int"), ("a", "variable", "int"),
         ("i", "variable", "int"), ("5", "constant", "number_literal"),
         ("a", "variable", "int")],
        {(0, 2), (3, 4)},
    ),
    # 13. field write: the base identifier is the variable
    (
        "field_def",
        "void f(struct s *p, int v){ p->x = v; }",
        [("p", "variable", "struct s *"), ("v", "variable", "int"),
         ("v", "variable", "int"), ("p", "variable", "struct s *")],
        {(1, 2), (2, 3)},
    ),
    # 14. chained declarators evaluate left to right
    (
        "chained_decl",
        "void f(){ int a = 1, b = a; }",
        [("1", "constant", "number_literal"), ("a", "variable", "int"),
         ("a", "variable", "int"), ("b", "variable", "int")],
        {(0, 1), (1, 2), (2, 3)},
    ),
    # 15. cast and callee name are transparent
    (
        "cast_call",
        "void f(int x){ int y = (int)g(x); }",
        [("x", "variable", "int"), ("x", "variable", "int"),
         ("y", "variable", "int")],
        {(0, 1), (1, 2)},
    ),
    # 16. conditional expression: all three arms feed the target
    (
        "conditional",
        "void f(int c, int a, int b){ int m = c ? a : b; }",
        [("c", "variable", "int"), ("a", "variable", "int"),
         ("b", "variable", "int"), ("c", "variable", "int"),
         ("a", "variable", "int"), ("b", "variable", "int"),
         ("m", "variable", "int")],
        {(0, 3), (1, 4), (2, 5), (3, 6), (4, 6), (5, 6)},
    ),
    # 17. unary minus and parentheses are transparent
    (
        "unary_paren",
        "void f(int a){ int y = -(a); }",
        [("a", "variable", "int"), ("a", "variable", "int"),
         ("y", "variable", "int")],
        {(0, 1), (1, 2)},
    ),
    # 18. string-literal source: same shape as the null flow, different tag
    (
        "string_flow",
        'void f(){ char *s = "ok"; puts(s); }',
        [('"ok"', "constant", "string_literal"), ("s", "variable", "char *"),
         ("s", "variable", "char *")],
        {(0, 1), (1, 2)},
    ),
    # 19. reassignment kills the null source: no NULL-to-use path
    (
        "null_killed",
        "void f(int n){ char *s = NULL; s = name(n); puts(s); }",
        [("n", "variable", "int"), ("NULL", "constant", "null"),
         ("s", "variable", "char *"), ("n", "variable", "int"),
         ("s", "variable", "char *"), ("s", "variable", "char *")],
        {(1, 2), (0, 3), (3, 4), (4, 5)},
    ),
    # 20. update expression: one new version fed by the previous one
    (
        "update_standalone",
        "void f(int i){ i++; int y = i; }",
        [("i", "variable", "int"), ("i", "variable", "int"),
         ("i", "variable", "int"), ("y", "variable", "int")],
        {(0, 1), (1, 2), (2, 3)},
    ),
    # 21. switch: entry def and every case def reach the use after it
    (
        "switch_union",
        "void f(int c){ int x = 0; switch (c) { case 1: x = 1; break; "
        "default: x = 2; } int y = x; }",
        [("c", "variable", "int"), ("0", "constant", "number_literal"),
         ("x", "variable", "int"), ("c", "variable", "int"),
         ("1", "constant", "number_literal"), ("x", "variable", "int"),
         ("2", "constant", "number_literal"), ("x", "variable", "int"),
         ("x", "variable", "int"), ("y", "variable", "int")],
        {(0, 3), (1, 2), (4, 5), (6, 7), (2, 8), (5, 8), (7, 8), (8, 9)},
    ),
    # 22. bare call consumes no literals and defines nothing
    (
        "bare_call",
        "void f(int a){ log_value(a, 5); }",
        [("a", "variable", "int"), ("a", "variable", "int")],
        {(0, 1)},
    ),
    # 23. initializer list: every element feeds the array variable
    (
        "initializer_list",
        "void f(int k){ int a[3] = {1, 2, k}; }",
        [("k", "variable", "int"), ("1", "constant", "number_literal"),
         ("2", "constant", "number_literal"), ("k", "variable", "int"),
         ("a", "variable", "int")],
        {(0, 3), (1, 4), (2, 4), (3, 4)},
    ),
    # 24. pointer dereference on the left: base identifier is defined
    (
        "deref_def",
        "void f(int *p, int v){ *p = v; }",
        [("p", "variable", "int *"), ("v", "variable", "int"),
         ("v", "variable", "int"), ("p", "variable", "int *")],
        {(1, 2), (2, 3)},
    ),
]

# alpha-renamed twin of the for_loop case: identical structure, other names
ALPHA_PAIR = (
    "void f(int n){ int s = 0; for (int i = 0; i < n; i++) { s += i; } }",
    "void f(int count){ int total = 0; for (int idx = 0; idx < count; idx++) "
    "{ total += idx; } }",
)
