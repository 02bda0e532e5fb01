"""Finite signed-weight processes, links between their variables, and the chain
and measurement calculus built on them. Everything is exact rational arithmetic."""

from .errors import *  # noqa: F401,F403
from .process import (
    Always,
    And,
    In,
    Is,
    Not,
    Or,
    Process,
    Same,
    TRUE,
    Variable,
    betweenness,
    condition,
    distribution,
    drop,
    is_independent,
    make_process,
    marginal,
    markov_check,
    order_property,
    point_process,
    prime_factorize,
    probability,
    product,
    product_all,
    separates,
    weight_of,
    white,
)
from .link import (
    Box,
    Cut,
    Link,
    LinkState,
    LinkSystem,
    Projection,
    apply_links,
    born,
    causal_cut,
    classify_state,
    equivalent_cut,
    link,
    link_state,
    system_link_state,
    variable_state,
)
from .chain import (
    PreparedChain,
    Transformation,
    causal_link_chain,
    chain_process,
    chain_system,
    differential_generator,
    double_boundary_chain,
    dynamical_relation_holds,
    evolve_state,
    inverse_chain,
    inverse_generator,
    markov_chain,
    product_by_link,
    quantum_prepared_chain,
    transformation_product,
)
from .measurement import (
    LabObjectView,
    Probe,
    ProbePlan,
    check_lab_object,
    double_measurement,
    probe,
    projection_update,
    record_distribution,
    selection,
    switch_matrix,
)
from .complexprob import (
    CoinProcess,
    ComplexWeight,
    boost_by_link,
    boost_compose,
    complex_product,
    complex_to_joint,
    joint_to_complex,
)
from .dsl import parse, parse_system, serialize

__version__ = "0.1.0"
