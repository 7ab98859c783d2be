/** Lightweight C-ish code tokenizer for sentence-vector pooling. */

const TOKEN_RE =
  /\/\/[^\n]*|\/\*[\s\S]*?\*\/|[A-Za-z_][A-Za-z_0-9]*|0[xX][0-9a-fA-F]+|\d+\.?\d*(?:[eE][+-]?\d+)?|"(?:\\.|[^"\\])*"|'(?:\\.|[^'\\])*'|>>=|<<=|->|\+\+|--|<<|>>|<=|>=|==|!=|&&|\|\||[-+*/%&|^!~<>=?:;,.(){}[\]]/g;

export function tokenizeCode(code: string): string[] {
  const tokens: string[] = [];
  for (const match of code.matchAll(TOKEN_RE)) {
    const text = match[0];
    if (text.startsWith("//") || text.startsWith("/*")) continue;
    tokens.push(text);
  }
  return tokens;
}
