"""Simulation and verification toolkit for the 1-d Coulomb spacing chain.

Layers, bottom to top:

* :mod:`coulomb_chain.energy` - chain/ring energies, gradients, banded Hessians
* :mod:`coulomb_chain.circulant` - exact and asymptotic tridiagonal
  Toeplitz/circulant algebra (determinants, inverse rows)
* :mod:`coulomb_chain.theory` - closed-form predictions (decay ratio delta,
  covariance law, calibration constants)
* :mod:`coulomb_chain.minimize` - Newton minimization of the tilted chain
  energy, boundary-layer analysis, multiplier calibration
* :mod:`coulomb_chain.sampler` - Metropolis Monte Carlo for the four
  ensembles (chain/ring, constrained/tilted)
* :mod:`coulomb_chain.estimate` - lag covariances with batch-means errors,
  scaling fits, sign patterns, normality checks
* :mod:`coulomb_chain.cli` - the `coulomb-chain` command-line front end
"""

from coulomb_chain.energy import ModelParams, SpacingConfig

__version__ = "0.1.0"

__all__ = ["ModelParams", "SpacingConfig", "__version__"]
