"""Grammar-guided generation and validation for character-level CFGs."""

from __future__ import annotations

from .analysis import FirstInfo, LeftRecursionError, first_set, productive_rules, recursive_rules, symbol_first
from .charset import CharSet
from .errors import (
    BackendError,
    BadAnswerError,
    BudgetExhaustedError,
    DeadSessionError,
    DepthExhaustedError,
    EngineError,
    KernelInvariantError,
    ThreadCapError,
    VocabError,
)
from .experiments import (
    BRACKET_PROMPTS,
    ExperimentReport,
    bracket_depth,
    json_fuzz,
    sampling_ratio,
)
from .flatten import (
    BranchOption,
    BranchRequest,
    CountRequest,
    ScalarRequest,
    flatten,
    flatten_text,
)
from .grammars import (
    brackets_grammar,
    builtin_names,
    dump_grammar_ast,
    dumps_grammar,
    function_call_grammar,
    json_grammar,
    load_builtin,
    load_grammar_ast,
    loads_grammar,
    mermaid_flowchart_grammar,
)
from .sampling import (
    AdversarialChooser,
    DecayPolicy,
    GenerationResult,
    MoveOption,
    MoveRequest,
    RandomChooser,
    SamplerStats,
    ScriptedChooser,
    constrained_generate,
    generate_corpus,
    mock_backend,
    remote_backend,
    sampler_call_ratio,
    temperature_scale,
)
from .session import Eof, Error, Expect, Session, is_member, is_prefix, kernel_backend
from .tokens import (
    DecodeResult,
    MaskStats,
    Vocab,
    apply_mask,
    decode_loop,
    dump_vocab,
    load_vocab,
    make_vocab,
    parse_vocab,
    token_mask,
    token_trie,
)
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

__version__ = "0.1.0"

__all__ = [
    "AdversarialChooser",
    "BRACKET_PROMPTS",
    "BackendError",
    "BadAnswerError",
    "BranchOption",
    "BranchRequest",
    "BudgetExhaustedError",
    "CharClass",
    "CharSet",
    "Choice",
    "CountRequest",
    "DeadSessionError",
    "DecayPolicy",
    "DecodeResult",
    "DepthExhaustedError",
    "Empty",
    "EngineError",
    "Eof",
    "Error",
    "Expect",
    "ExperimentReport",
    "FirstInfo",
    "GenerationResult",
    "Grammar",
    "GrammarError",
    "GrammarSymbol",
    "Join",
    "KernelInvariantError",
    "LeftRecursionError",
    "MaskStats",
    "MoveOption",
    "MoveRequest",
    "NonTerminal",
    "RandomChooser",
    "Repeat",
    "SamplerRequest",
    "SamplerStats",
    "ScalarRequest",
    "ScriptedChooser",
    "Sequence",
    "Session",
    "Terminal",
    "ThreadCapError",
    "Vocab",
    "VocabError",
    "accept",
    "apply_mask",
    "bracket_depth",
    "brackets_grammar",
    "builtin_names",
    "constrained_generate",
    "decode_loop",
    "dump_grammar_ast",
    "dump_vocab",
    "dumps_grammar",
    "first_set",
    "flatten",
    "flatten_text",
    "function_call_grammar",
    "generate_corpus",
    "is_member",
    "is_prefix",
    "json_fuzz",
    "json_grammar",
    "kernel_backend",
    "load_builtin",
    "load_grammar_ast",
    "load_vocab",
    "loads_grammar",
    "make_vocab",
    "mermaid_flowchart_grammar",
    "mock_backend",
    "optional",
    "parse_vocab",
    "productive_rules",
    "recursive_rules",
    "remote_backend",
    "repeat",
    "sampler_call_ratio",
    "sampling_ratio",
    "select",
    "symbol_first",
    "temperature_scale",
    "token_mask",
    "token_trie",
]
