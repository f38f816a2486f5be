"""semlift: lift relational clinical data into RDF and reason over it.

Two formalization steps: a schema-level ontology generated straight from a
relational manifest (tables as classes, columns as properties, rows as
instances), then N3 forward rules that restate the schema-level triples in
a shared clinical vocabulary and derive new facts from them.  On top of
that sit per-patient record assembly, population aggregation, summary
views, and a scaling benchmark.
"""

from .builtins import BuiltinTable, BuiltinTypeError, DEFAULT_BUILTINS
from .isomorphism import assert_isomorphic, isomorphic
from .kb import (
    ASSETS,
    age_reference,
    assets_fingerprint,
    bmi_reference,
    gate_reference,
    load_asset,
    load_rules,
    load_vocabulary,
    validate_assets,
)
from .n3 import Document, N3ParseError, UnsupportedN3Feature, load_n3, parse_n3, serialize_n3
from .pipeline import (
    CacheMissing,
    EhrRecord,
    PatientNotFound,
    Pipeline,
    PipelineConfig,
    PipelineError,
    load_config,
)
from .query import (
    ConstructQuery,
    QueryCompileError,
    QueryParseError,
    SelectQuery,
    UnsupportedQueryFeature,
    compile_to_sql,
    dump_rdb_to_rdf,
    execute_construct,
    execute_select,
    load_query,
    naive_match,
    parse_query,
    run_construct,
)
from .reasoner import (
    Derivation,
    LimitExceeded,
    Limits,
    RuleValidationError,
    StrictBuiltinError,
    forward_chain,
    replay_derivations,
    validate_rules,
    write_trace,
)
from .schema import (
    ManifestError,
    SchemaManifest,
    generate_ddo,
    load_manifest,
    manifest_from_dict,
    mint_instance_iri,
)
from .synthetic import GeneratorConfig, build_sqlite, seed_databases
from .terms import (
    BlankNode,
    Formula,
    Graph,
    GraphTerm,
    Iri,
    ListTerm,
    Literal,
    Rule,
    Triple,
    Variable,
    merge_graphs,
)

__version__ = "0.1.0"

__all__ = [
    "ASSETS",
    "BlankNode",
    "BuiltinTable",
    "BuiltinTypeError",
    "CacheMissing",
    "ConstructQuery",
    "DEFAULT_BUILTINS",
    "Derivation",
    "Document",
    "EhrRecord",
    "Formula",
    "GeneratorConfig",
    "Graph",
    "GraphTerm",
    "Iri",
    "LimitExceeded",
    "Limits",
    "ListTerm",
    "Literal",
    "ManifestError",
    "N3ParseError",
    "PatientNotFound",
    "Pipeline",
    "PipelineConfig",
    "PipelineError",
    "QueryCompileError",
    "QueryParseError",
    "Rule",
    "RuleValidationError",
    "SchemaManifest",
    "SelectQuery",
    "StrictBuiltinError",
    "Triple",
    "UnsupportedN3Feature",
    "UnsupportedQueryFeature",
    "Variable",
    "age_reference",
    "assert_isomorphic",
    "assets_fingerprint",
    "bmi_reference",
    "build_sqlite",
    "compile_to_sql",
    "dump_rdb_to_rdf",
    "execute_construct",
    "execute_select",
    "forward_chain",
    "gate_reference",
    "generate_ddo",
    "isomorphic",
    "load_asset",
    "load_config",
    "load_manifest",
    "load_n3",
    "load_query",
    "load_rules",
    "load_vocabulary",
    "manifest_from_dict",
    "merge_graphs",
    "mint_instance_iri",
    "naive_match",
    "parse_n3",
    "parse_query",
    "replay_derivations",
    "run_construct",
    "seed_databases",
    "serialize_n3",
    "validate_assets",
    "validate_rules",
    "write_trace",
]
