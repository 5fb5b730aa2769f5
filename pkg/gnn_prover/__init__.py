"""
An instantiation-based prover for clausal first-order logic with
equality, whose enumerative instantiation can be guided by a graph
neural network trained on the prover's own e-matching proofs.

"""

VERSION = (0, 1, 0)
__version__ = '.'.join(str(part) for part in VERSION)
