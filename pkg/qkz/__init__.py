"""
qkz - numerical verification of quantum-group difference equations.

Builds R-matrices, doubled and shifted monodromy matrices, Markov-trace shift
operators and Bethe ansatz vectors for U_q[sl(2)] and nested U_q[sl(n)], and
checks the identities relating them at desk scale.
"""

__version__ = "0.4.0"
__author__ = "SL-MAR"
