"""Tamedlib provides structure-preserving explicit Euler schemes for stochastic differential equations.

The subpackages follow the life of an experiment:

* `core`: SDE models, Lyapunov functions, and the diffusion operators L and L^h
* `scheme`: one-step maps (standard, balanced, projected, composed, truncated-noise)
* `taming`: taming functions, projection exponents, step-size thresholds, and hypothesis checks
* `montecarlo`: reproducible random streams, ensembles, and coarse/fine coupling
* `analysis`: estimators that turn ensembles into verdicts
* `cli`: the configuration-driven experiment runner

This namespace is intentionally bare: import from the subpackages.

"""

__version__ = "0.1.0"
