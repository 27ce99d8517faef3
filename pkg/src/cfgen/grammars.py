"""Built-in grammars and the grammar AST wire format.

The JSON grammar mirrors the familiar railroad definition rule for rule,
including its quirks: characters span U+0020 through U+FFFF (so lone
surrogates are representable via escapes but excluded as raw scalars), and
whitespace is defined by right recursion. The bracket grammar generates the
balanced-parentheses language, mermaid a small flowchart subset, and
function_call a C-style call whose arguments are JSON values.
"""

from __future__ import annotations

import json as _json

from .charset import CharSet
from .symbols import (
    CharClass,
    Choice,
    Empty,
    Grammar,
    GrammarError,
    GrammarSymbol,
    Join,
    NonTerminal,
    Repeat,
    SamplerRequest,
    Sequence,
    Terminal,
    accept,
    optional,
    repeat,
    select,
)


def brackets_grammar() -> Grammar:
    """Balanced parentheses; the empty string is a member."""
    top = NonTerminal("top")
    pairs = NonTerminal("pairs")
    pair = NonTerminal("pair")
    top.define(lambda: pairs)
    pairs.define(lambda: optional(pair, pairs))
    pair.define(lambda: ("(", pairs, ")"))
    return Grammar(top)


def json_grammar() -> Grammar:
    """Full JSON: objects, arrays, strings with escapes, numbers, literals."""
    names = (
        "json element value object members member array elements string "
        "characters character escape hex digit onenine number integer digits "
        "fraction exponent sign ws boolean null"
    ).split()
    n = {name: NonTerminal(name) for name in names}

    n["json"].define(lambda: n["element"])
    n["value"].define(
        lambda: select(
            n["object"], n["array"], n["string"], n["number"],
            n["boolean"], n["null"],
        )
    )
    n["boolean"].define(lambda: select("true", "false"))
    n["null"].define(lambda: Terminal("null"))
    n["object"].define(
        lambda: select(("{", n["ws"], "}"), ("{", n["members"], "}"))
    )
    n["members"].define(
        lambda: select(n["member"], (n["member"], ",", n["members"]))
    )
    n["member"].define(
        lambda: (n["ws"], n["string"], n["ws"], ":", n["element"])
    )
    n["array"].define(
        lambda: select(("[", n["ws"], "]"), ("[", n["elements"], "]"))
    )
    n["elements"].define(
        lambda: select(n["element"], (n["element"], ",", n["elements"]))
    )
    n["element"].define(lambda: (n["ws"], n["value"], n["ws"]))
    n["string"].define(lambda: ('"', n["characters"], '"'))
    n["characters"].define(
        lambda: select("", (n["character"], n["characters"]))
    )
    n["character"].define(
        lambda: select(
            accept((0x20, 0xFFFF), excluded=('"', "\\")),
            ("\\", n["escape"]),
        )
    )
    n["escape"].define(
        lambda: select(
            '"', "\\", "/", "b", "f", "n", "r", "t",
            ("u", repeat(n["hex"], 4)),
        )
    )
    n["hex"].define(
        lambda: select(n["digit"], accept(("A", "F")), accept(("a", "f")))
    )
    n["digit"].define(lambda: select("0", n["onenine"]))
    n["onenine"].define(lambda: accept(("1", "9")))
    n["number"].define(
        lambda: (n["integer"], n["fraction"], n["exponent"])
    )
    n["integer"].define(
        lambda: select(
            n["digit"],
            (n["onenine"], n["digits"]),
            ("-", n["digit"]),
            ("-", n["onenine"], n["digits"]),
        )
    )
    n["digits"].define(lambda: select(n["digit"], (n["digit"], n["digits"])))
    n["fraction"].define(lambda: optional(".", n["digits"]))
    n["exponent"].define(
        lambda: select("", ("E", n["sign"], n["digits"]), ("e", n["sign"], n["digits"]))
    )
    n["sign"].define(lambda: select("", "+", "-"))
    n["ws"].define(
        lambda: select(
            "", (" ", n["ws"]), ("\n", n["ws"]),
            ("\r", n["ws"]), ("\t", n["ws"]),
        )
    )
    return Grammar(n["json"])


def mermaid_flowchart_grammar(*, min_rules: int = 10, max_rules: int = 20) -> Grammar:
    """Tiny flowchart subset: a header line plus 10 to 20 edge lines."""
    if not 1 <= min_rules <= max_rules:
        raise GrammarError("line count bounds must satisfy 1 <= min <= max")
    chart = NonTerminal("chart")
    line = NonTerminal("line")
    node = NonTerminal("node")
    chart.define(
        lambda: Sequence((
            Terminal("flowchart "),
            select("TD", "LR"),
            Terminal("\n"),
            Join("\n", Repeat(line, (min_rules, max_rules))),
        ))
    )
    line.define(lambda: ("    ", node, " --> ", node))
    node.define(lambda: accept(("1", "9")))
    return Grammar(chart)


def function_call_grammar() -> Grammar:
    """identifier(arg, arg, ...) where each argument is a JSON value."""
    jg = json_grammar()
    call = NonTerminal("call")
    ident = NonTerminal("ident")
    ident_rest = NonTerminal("ident_rest")
    args = NonTerminal("args")
    arg = NonTerminal("arg")
    first = accept(("A", "Z"), ("a", "z"), ("_", "_"))
    subsequent = accept(("A", "Z"), ("a", "z"), ("0", "9"), ("_", "_"))
    call.define(lambda: (ident, "(", optional(args), ")"))
    ident.define(lambda: (first, ident_rest))
    ident_rest.define(lambda: optional(subsequent, ident_rest))
    args.define(lambda: select(arg, (arg, ", ", args)))
    arg.define(lambda: jg.rule("value"))
    return Grammar(call)


_BUILTIN = {
    "brackets": brackets_grammar,
    "json": json_grammar,
    "mermaid": mermaid_flowchart_grammar,
    "function_call": function_call_grammar,
}


def builtin_names() -> tuple:
    return tuple(sorted(_BUILTIN))


def load_builtin(name: str, **params) -> Grammar:
    try:
        factory = _BUILTIN[name]
    except KeyError:
        raise GrammarError(f"unknown grammar '{name}'") from None
    return factory(**params)


# -- AST wire format ------------------------------------------------------
#
# Schema: { "start": name, "rules": { name: node } } with tagged nodes
#   {"t":"term","v":s} {"t":"class","ranges":[[lo,hi]...],"excl":[scalars]}
#   {"t":"ref","name":s} {"t":"seq","items":[...]} {"t":"choice","items":[...]}
#   {"t":"repeat","item":n,"min":i,"max":i} {"t":"join","sep":n,"items":n}
#   {"t":"empty"}

def dump_grammar_ast(grammar: Grammar) -> dict:
    """Serialize a grammar to the portable AST document."""
    rules = {}
    for name, nt in grammar.rules.items():
        rules[name] = _dump_node(nt.resolve())
    return {"start": grammar.start.name, "rules": rules}


def _dump_node(symbol: GrammarSymbol) -> dict:
    if isinstance(symbol, Terminal):
        return {"t": "term", "v": symbol.text}
    if isinstance(symbol, CharClass):
        # exclusions are resolved into the ranges at construction, so the
        # dumped form always carries an empty excl list
        return {"t": "class", "ranges": symbol.chars.to_pairs(), "excl": []}
    if isinstance(symbol, NonTerminal):
        return {"t": "ref", "name": symbol.name}
    if isinstance(symbol, Sequence):
        return {"t": "seq", "items": [_dump_node(s) for s in symbol.items]}
    if isinstance(symbol, Choice):
        return {"t": "choice", "items": [_dump_node(s) for s in symbol.branches]}
    if isinstance(symbol, Repeat):
        return {
            "t": "repeat", "item": _dump_node(symbol.item),
            "min": symbol.lo, "max": symbol.hi,
        }
    if isinstance(symbol, Join):
        return {
            "t": "join", "sep": _dump_node(symbol.sep),
            "items": _dump_node(symbol.items),
        }
    if isinstance(symbol, Empty):
        return {"t": "empty"}
    if isinstance(symbol, SamplerRequest):
        raise GrammarError("sampler request nodes have no wire representation")
    raise GrammarError(f"unserializable node {symbol!r}")


def load_grammar_ast(doc: dict) -> Grammar:
    """Build a grammar from the portable AST document."""
    if not isinstance(doc, dict):
        raise GrammarError("grammar document must be an object")
    start = doc.get("start")
    rules = doc.get("rules")
    if not isinstance(start, str) or not isinstance(rules, dict) or not rules:
        raise GrammarError("grammar document needs 'start' and 'rules'")
    if start not in rules:
        raise GrammarError(f"start rule '{start}' is not defined")
    table = {name: NonTerminal(name) for name in rules}

    def build(node) -> GrammarSymbol:
        if not isinstance(node, dict) or "t" not in node:
            raise GrammarError(f"bad grammar node: {node!r}")
        tag = node["t"]
        try:
            if tag == "term":
                return Terminal(node["v"])
            if tag == "class":
                return CharClass(
                    [(lo, hi) for lo, hi in node["ranges"]],
                    node.get("excl", ()),
                )
            if tag == "ref":
                name = node["name"]
                if name not in table:
                    raise GrammarError(
                        f"reference to undefined rule '{name}'"
                    )
                return table[name]
            if tag == "seq":
                return Sequence(tuple(build(s) for s in node["items"]))
            if tag == "choice":
                return Choice(tuple(build(s) for s in node["items"]))
            if tag == "repeat":
                return Repeat(build(node["item"]), (node["min"], node["max"]))
            if tag == "join":
                return Join(build(node["sep"]), build(node["items"]))
            if tag == "empty":
                return Empty()
        except KeyError as missing:
            raise GrammarError(
                f"node tagged {tag!r} is missing field {missing}"
            ) from None
        raise GrammarError(f"unknown node tag {tag!r}")

    for name, body in rules.items():
        table[name].define(build(body))
    return Grammar(table[start])


def dumps_grammar(grammar: Grammar, **kw) -> str:
    return _json.dumps(dump_grammar_ast(grammar), **kw)


def loads_grammar(text: str) -> Grammar:
    return load_grammar_ast(_json.loads(text))
