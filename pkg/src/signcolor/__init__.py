"""Stabilizer-circuit simulation with sign-color syndrome decoding.

Subpackages cover the packed tableau (tableau), the color algebra (colors),
stochastic circuit geometry (circuits), entanglement probes (entanglement),
the known/unknown-location decoders (decoders), the analytic randomization
model (stochastic), finite-size-scaling collapse (collapse) and the
experiment CLI (cli).
"""

__version__ = "0.1.0"
