"""Query-by-example for positive LTL fragments over timestamped data."""

from .core import (
    DataInstance,
    ExampleSet,
    LassoModel,
    Query,
    QueryClass,
    classify,
    eval_data,
    eval_lasso,
    parse_query,
    temporal_depth,
)
from .horn import HornOntology, Inconsistent, canonical_model, certain_answer, load_ontology
from .prior import PriorOntology, load_prior_ontology, prior_consistent, prior_entails
from .qbe import Problem, Verdict, decide, minimize_witness, verify_witness

__version__ = "0.1.0"

__all__ = [
    "DataInstance",
    "ExampleSet",
    "LassoModel",
    "Query",
    "QueryClass",
    "classify",
    "eval_data",
    "eval_lasso",
    "parse_query",
    "temporal_depth",
    "HornOntology",
    "Inconsistent",
    "canonical_model",
    "certain_answer",
    "load_ontology",
    "PriorOntology",
    "load_prior_ontology",
    "prior_consistent",
    "prior_entails",
    "Problem",
    "Verdict",
    "decide",
    "minimize_witness",
    "verify_witness",
]
