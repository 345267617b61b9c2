"""miniproof: contract verification for a small class-based language.

Programs carry require/ensure/invariant/modify annotations; the pipeline
turns them into proof obligations via weakest preconditions, discharges
the obligations by bounded exhaustive search over finite domains, and can
also run programs under a contract-monitoring interpreter, including
replaying verification counterexamples as concrete executions.
"""

from .parser import parse
from .analyzer import analyze, CheckedProgram, default_model_queries
from .pretty import program_text, expr_text
from .vcgen import VerifyOptions, Obligation, generate_obligations
from .discharge import (
    Report,
    ReportRow,
    verify_program,
    render_text,
    render_json,
    summary_line,
)
from .runtime import (
    Interpreter,
    Trace,
    parse_scenario,
    run_scenario,
    replay_counterexample,
    trace_text,
    trace_json,
)
from .corpus import CorpusEntry, load_builtin, export_entry, names as corpus_names
from .errors import (
    ParseError,
    SemanticError,
    ContractViolation,
    VoidCall,
    VoidDereference,
    StepBudgetExceeded,
    UnsupportedInContract,
    ReplayImpossible,
    UnknownCorpusEntry,
)

__all__ = [
    "parse",
    "analyze",
    "CheckedProgram",
    "default_model_queries",
    "program_text",
    "expr_text",
    "VerifyOptions",
    "Obligation",
    "generate_obligations",
    "Report",
    "ReportRow",
    "verify_program",
    "render_text",
    "render_json",
    "summary_line",
    "Interpreter",
    "Trace",
    "parse_scenario",
    "run_scenario",
    "replay_counterexample",
    "trace_text",
    "trace_json",
    "CorpusEntry",
    "load_builtin",
    "export_entry",
    "corpus_names",
    "ParseError",
    "SemanticError",
    "ContractViolation",
    "VoidCall",
    "VoidDereference",
    "StepBudgetExceeded",
    "UnsupportedInContract",
    "ReplayImpossible",
    "UnknownCorpusEntry",
]
