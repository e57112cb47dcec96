"""Time-consistent reconciliation of event-labeled gene trees with species trees."""
from .auxgraph import AuxGraph, CycleWitness, build_aux_graph, topological_order
from .errors import (
    InputError,
    InternalInvariantError,
    ParseError,
    PreconditionError,
    SizeCapError,
    TcReconError,
    UnsupportedShapeError,
)
from .reconciliation import (
    ReconciliationMap,
    build_initial_map,
    compute_lca_sigma,
    from_dtl,
    to_dtl,
    validate_dtl,
    validate_reconciliation,
)
from .scenario import (
    Event,
    GeneTree,
    SpeciesTree,
    TransferForest,
    Violation,
    augment_species_tree,
    check_observability,
    remove_transfer_edges,
    sigma_hat,
)
from .scenario_io import ScenarioDocument, parse_scenario, read_scenario, serialize_scenario, write_scenario
from .simulate import ScenarioParams, random_scenario
from .timing import (
    Construction,
    TimeAssignment,
    check_C,
    check_D,
    check_T,
    check_time_map,
    construct_time_consistent,
    exists_time_consistent,
    extend_time_map,
    is_time_consistent,
)
from .trees import (
    AncestorIndex,
    Edge,
    Relation,
    RootedTree,
    TreeElement,
    Vertex,
    build_ancestor_index,
    compare_elements,
    lca,
    leaf_set,
)

__version__ = "0.1.0"
