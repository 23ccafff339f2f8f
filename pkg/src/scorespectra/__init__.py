"""Numerical laboratory for diffusion-score spectra on linear-manifold Gaussian data.

The package covers four layers:

* :mod:`scorespectra.linear_model` -- block-diagonal Gaussian data model,
  sampling, moments, and the Gaussian posterior used everywhere else.
* :mod:`scorespectra.score_engine` -- exact, empirical (softmax-weighted),
  active-sample, and file-backed score oracles behind one contract.
* :mod:`scorespectra.condensation` -- positional random-energy quantities:
  moment generating function, condensation times, participation ratio,
  effective sample counts.
* :mod:`scorespectra.spectral` -- probe-based and analytic singular-value
  spectra of score Jacobians, gap profiles, intrinsic-dimension detection.

:mod:`scorespectra.harness` wires these into config-driven, reproducible
experiments with CSV outputs; :mod:`scorespectra.cli` exposes them as
subcommands.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .linear_model import Dataset, ManifoldSpec, sample_dataset

__all__ = ["Dataset", "ManifoldSpec", "sample_dataset", "__version__"]
