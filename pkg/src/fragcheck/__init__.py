"""Bounded model checking of CTL* properties over data-aware process fragments.

Typical use::

    from fragcheck import bundled_spec, check
    spec = bundled_spec("purchase")
    report = check(spec, spec.database, "~(E F db.status.final = true)", depth=10)
"""

__version__ = "0.1.0"

from .checker import Report, check, prepare_query, verify
from .jsonmodel import check_type, parse_type_defs, type_errors
from .process import Instance, Specification, symbolic_instance
from .prover import ProverConfig, SatQuery, SatVerdict, axioms_for, check_sat, tptp_emit
from .semantics import eval_query, simulate
from .specfile import SpecLoadError, bundled_spec, load_spec
from .tableau import Context, TableauResult, initial_node, saturate

__all__ = [
    "Context",
    "Instance",
    "ProverConfig",
    "Report",
    "SatQuery",
    "SatVerdict",
    "SpecLoadError",
    "Specification",
    "TableauResult",
    "axioms_for",
    "bundled_spec",
    "check",
    "check_sat",
    "check_type",
    "eval_query",
    "initial_node",
    "load_spec",
    "parse_type_defs",
    "prepare_query",
    "saturate",
    "simulate",
    "symbolic_instance",
    "tptp_emit",
    "type_errors",
    "verify",
]
