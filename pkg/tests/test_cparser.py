import re

import pytest

from flowembed.cparser import (
    SourceFunction,
    leaf_tokens,
    parse_function,
    tokenize,
)
from flowembed.errors import EmptySource, ParseRejected

FIG5_SNIPPET = """
int use_after_null() {
    char* str1 = NULL;   /* data flow A */
    char* str2 = "ok";
    printf("%s", str1);
    printf("%s", str2);
    return 0;
}
"""


def test_minimal_function_shape():
    tree = parse_function("int main(){return 0;}")
    funcs = [n for n in tree.walk() if n.kind == "function_definition"]
    assert len(funcs) == 1
    params = [n for n in funcs[0].walk() if n.kind == "parameter_declaration"]
    assert params == []
    assert not tree.has_errors


def test_empty_input_rejected():
    with pytest.raises(EmptySource):
        parse_function("")
    with pytest.raises(EmptySource):
        parse_function("   \n\t ")


def test_leaf_sequence_matches_hand_tokenization():
    tree = parse_function("int f(int a){return a;}")
    texts = [leaf.text for _, leaf in leaf_tokens(tree)]
    assert texts == ["int", "f", "(", "int", "a", ")", "{", "return", "a", ";", "}"]


def test_leaf_token_indices_dense_and_ordered():
    tree = parse_function("int a;")
    pairs = leaf_tokens(tree)
    assert [i for i, _ in pairs] == [0, 1, 2]
    spans = [leaf.span for _, leaf in pairs]
    assert spans == sorted(spans)


def test_fig5_has_repeated_identifier_leaves():
    tree = parse_function(FIG5_SNIPPET)
    str1_leaves = [l for _, l in leaf_tokens(tree)
                   if l.kind == "identifier" and l.text == "str1"]
    assert len(str1_leaves) == 2


def test_comments_excluded_from_leaf_tokens_but_kept_in_tree():
    tree = parse_function("int a; // trailing\n/* block */ int b;")
    kinds = {leaf.kind for _, leaf in leaf_tokens(tree)}
    assert "comment" not in kinds
    all_kinds = [l.kind for l in tree.leaves()]
    assert all_kinds.count("comment") == 2


def test_reparse_is_structurally_identical():
    code = FIG5_SNIPPET
    assert parse_function(code).root == parse_function(code).root


def test_every_identifier_occurrence_has_one_leaf():
    code = "int f(int alpha){ int beta = alpha + alpha; return beta; }"
    tree = parse_function(code)
    source_occurrences = [(m.start(), m.group()) for m in
                          re.finditer(r"[A-Za-z_][A-Za-z_0-9]*", code)]
    keywords = {"int", "return"}
    expected = [(pos, name) for pos, name in source_occurrences
                if name not in keywords]
    leaves = [(l.start_byte, l.text) for _, l in leaf_tokens(tree)
              if l.kind == "identifier"]
    assert leaves == expected


def test_leaves_reconstruct_source_bytes():
    code = FIG5_SNIPPET
    tree = parse_function(code)
    data = code.encode("utf-8")
    rebuilt = bytearray(len(data))
    cursor = 0
    for leaf in tree.leaves():
        rebuilt[cursor:leaf.start_byte] = data[cursor:leaf.start_byte]
        rebuilt[leaf.start_byte:leaf.end_byte] = leaf.text.encode("utf-8")
        cursor = leaf.end_byte
    rebuilt[cursor:] = data[cursor:]
    assert bytes(rebuilt) == data


def test_spans_nest_within_parents():
    tree = parse_function(FIG5_SNIPPET)
    for node in tree.walk():
        assert node.start_byte <= node.end_byte
        for child in node.children:
            assert node.start_byte <= child.start_byte
            assert child.end_byte <= node.end_byte


def test_error_recovery_marks_nodes():
    tree = parse_function("int f(){ int x = ; return x; }")
    assert tree.has_errors
    assert tree.first_error_span is not None
    # the good statement after the broken one still parses
    returns = [n for n in tree.walk() if n.kind == "return_statement"]
    assert len(returns) == 1


def test_strict_mode_rejects_errors():
    with pytest.raises(ParseRejected) as info:
        parse_function("int f(){ int x = ; }", strict=True)
    assert isinstance(info.value.span, tuple)


def test_unparseable_soup_still_returns_a_tree():
    tree = parse_function("}}} ??? int")
    assert tree.has_errors
    assert list(tree.leaves())


def test_source_function_label_validation():
    with pytest.raises(ValueError):
        SourceFunction(id="x", code="int a;", label=2)
    assert SourceFunction(id="x", code="int a;", label=1).label == 1


def test_tokenizer_handles_literals_and_operators():
    toks = tokenize('x >>= 0x1F; s = "a\\"b"; c = \'\\n\'; f += 1.5e-3;')
    kinds = [t.kind for t in toks]
    assert ">>=" in kinds
    assert "string_literal" in kinds
    assert "char_literal" in kinds
    assert kinds.count("number_literal") == 2


def test_preprocessor_lines_are_trivia():
    tree = parse_function("#include <stdio.h>\nint a;\n#define X 1\n")
    assert not tree.has_errors
    kinds = [l.kind for l in tree.leaves()]
    assert kinds.count("preproc_directive") == 2
    assert all(l.kind != "preproc_directive" for _, l in leaf_tokens(tree))


def test_typedef_name_then_declaration():
    tree = parse_function("typedef unsigned long word_t; void f(){ word_t w = 3; }")
    assert not tree.has_errors
    decls = [n for n in tree.walk() if n.kind == "declaration"]
    assert len(decls) == 2


def test_realistic_function_parses_clean():
    code = """
    static int copy_bytes(char *dst, const char *src, size_t n) {
        size_t i;
        for (i = 0; i < n; i++) {
            dst[i] = src[i];
            if (src[i] == '\\0')
                break;
        }
        while (i < n)
            dst[i++] = 0;
        switch (n % 3) {
        case 0: return 0;
        default: return (int)i;
        }
    }
    """
    tree = parse_function(code)
    assert not tree.has_errors
