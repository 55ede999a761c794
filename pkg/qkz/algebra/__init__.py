"""
Quantum-group objects for the qKZ checks
========================================

- tensorspace: tensor-product spaces, local operators and matrix-free application
- rmatrix: constant and spectral R-matrices, Boltzmann weights
- monodromy: plain, doubled and shifted monodromies, Markov trace, exchange relations
- qfunctions: q-Pochhammer products and the scalar solutions psi, tau
- bethe: U_q[sl(2)] Bethe vectors as lattice sums
- symmetry: generators from the monodromy limits, weights, highest-weight residuals
- nested: U_q[sl(n)] nested Bethe vectors
"""

from .tensorspace import LocalOperator, SpaceShape, StateVector, apply_local, materialize
from .rmatrix import QParams, boltzmann, r_constant, r_spectral, ybe_residual
from .monodromy import (
    BlockOperator,
    MonodromySpec,
    commutation_residuals,
    doubled_monodromy,
    exchange_residual,
    monodromy_T,
    q_trace,
    shifted_monodromy,
    vacuum_actions,
)
from .qfunctions import TruncationPolicy, bethe_weight, g_scalar, psi, qpochhammer, tau
from .bethe import (
    BetheResult,
    BetheSpec,
    anchor_parameter,
    anchored_spec,
    bethe_term,
    bethe_vector,
    difference_report,
    difference_residual,
    unwanted_telescoping,
)
from .symmetry import Generators, Weight, generators, highest_weight_residual, weight_of
from .nested import (
    NestedSpec,
    anchored_nested_spec,
    nested_bethe_vector,
    nested_difference_report,
    nested_difference_residual,
    nested_weight_of,
)

__all__ = [
    "LocalOperator",
    "SpaceShape",
    "StateVector",
    "apply_local",
    "materialize",
    "QParams",
    "boltzmann",
    "r_constant",
    "r_spectral",
    "ybe_residual",
    "BlockOperator",
    "MonodromySpec",
    "commutation_residuals",
    "doubled_monodromy",
    "exchange_residual",
    "monodromy_T",
    "q_trace",
    "shifted_monodromy",
    "vacuum_actions",
    "TruncationPolicy",
    "bethe_weight",
    "g_scalar",
    "psi",
    "qpochhammer",
    "tau",
    "BetheResult",
    "BetheSpec",
    "anchor_parameter",
    "anchored_spec",
    "bethe_term",
    "bethe_vector",
    "difference_report",
    "difference_residual",
    "unwanted_telescoping",
    "Generators",
    "Weight",
    "generators",
    "highest_weight_residual",
    "weight_of",
    "NestedSpec",
    "anchored_nested_spec",
    "nested_bethe_vector",
    "nested_difference_report",
    "nested_difference_residual",
    "nested_weight_of",
]
