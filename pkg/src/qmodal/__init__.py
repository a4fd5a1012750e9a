"""qmodal: decision procedures for quantum modal logic.

Parse formulas and sequents, model-check them over finite quantum modal
structures, collapse structures by truth-agreement, search for sequent
derivations by forward saturation, and decide sequents by interleaving proof
search with bounded countermodel search.
"""

from .formula import (
    And,
    Atom,
    Box,
    Formula,
    Not,
    ParseError,
    Sequent,
    admissible_closure,
    atoms_of,
    enumerate_formula,
    parse,
    parse_sequent,
    render,
    render_sequent,
    size,
    subformulas,
)
from .structure import (
    MalformedModelError,
    QuantumModalStructure,
    Violation,
    canonical_encoding,
    closed_sets,
    count_structures,
    dump_model,
    enumerate_structures,
    load_model,
    model_to_dict,
    model_to_dot,
    ortho_closure,
    ortho_complement,
    validate,
)
from .semantics import (
    evaluate,
    find_failing_world,
    holds_at,
    holds_in,
    sat_set,
)
from .filtration import (
    Collapse,
    CollapseReport,
    NotAdmissibleError,
    collapse,
    truth_profiles,
    verify_collapse,
)
from .calculus import (
    DerivableSet,
    DerivationNode,
    RuleInstance,
    UniverseError,
    check_derivation,
    check_rule_application,
    derivation_to_text,
    extract_derivation,
    parse_derivation,
    rule_conclusions,
    saturate,
    universe_at_stage,
)
from .decision import (
    Budgets,
    CountermodelWitness,
    NonTheorem,
    Report,
    Theorem,
    Unknown,
    Verdict,
    decide,
    fmp_bound,
    prove,
    refute,
    refute_literal,
)

__version__ = "0.1.0"
