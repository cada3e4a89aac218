"""Simulating hidden-variable dynamics for quantum circuits.

A dynamics rule turns a state ``rho`` and unitary ``U`` into a column-stochastic
transition matrix for the computational-basis value.  Chaining those over a
circuit sequence gives a Markov chain of classical histories, which the
sampler draws from reproducibly.
"""
from .algorithms import (
    DistributionPair,
    HashFunction,
    build_collision_sequence,
    build_search_sequence,
    collision_decide,
    event_e_probability,
    generate_pair,
    search_decide,
    search_scaling_bench,
    statistical_difference,
)
from .blocks import BlockPartition, minimal_blocks
from .checks import check_commutativity, check_locality, check_robustness_probe, check_symmetry
from .dynamics import (
    DynamicsKind,
    DynamicsParams,
    check_marginalization,
    dd_transition,
    pd_transition,
    sd_transition,
    transition,
)
from .history import (
    CircuitSequence,
    History,
    HistoryBatch,
    compile_sequence,
    exact_history_law,
    markov_property_check,
    sample_batch,
    sample_history,
)
from .scaling import (
    InfeasibleTargets,
    MarginalTargets,
    NonConvergence,
    column_stochasticize,
    flow_condition_check,
    rc_scale,
)
from .state import (
    Circuit,
    CircuitError,
    DenseUnitary,
    Hadamard,
    HadamardLayer,
    Permutation,
    PhaseFlip,
    PureState,
    XorOracle,
    born_distribution,
    circuit_unitary,
    grover_circuit,
)

__version__ = "0.1.0"
