"""Spatial configuration queries over probabilistic symbol heatmaps."""

from pathlib import Path

from ._core import (
    Bundle,
    FormatError,
    IoError,
    OracleLimitError,
    Query,
    ValidationError,
    compile_query,
    default_prelude,
    evaluate,
    gen_dataset,
    gen_scene,
    infer,
    load_query,
    read_bundle,
    read_heatmap,
    roc_auc,
    score,
    validate_program,
    write_bundle,
    write_heatmap,
)

QUERY_DIR = Path(__file__).resolve().parent / "queries"


def shipped_query(name: str) -> Query:
    """Load one of the bundled query files, e.g. "leaking_pipe"."""
    path = QUERY_DIR / (name if name.endswith(".sl") else name + ".sl")
    return load_query(str(path))


__all__ = [
    "Bundle",
    "FormatError",
    "IoError",
    "OracleLimitError",
    "QUERY_DIR",
    "Query",
    "ValidationError",
    "compile_query",
    "default_prelude",
    "evaluate",
    "gen_dataset",
    "gen_scene",
    "infer",
    "load_query",
    "read_bundle",
    "read_heatmap",
    "roc_auc",
    "score",
    "shipped_query",
    "validate_program",
    "write_bundle",
    "write_heatmap",
]
