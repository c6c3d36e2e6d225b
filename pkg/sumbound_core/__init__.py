"""
sumbound_core
=============
Core package for sumbound v1.0.

Who this is for
---------------
Numerical analysts and students who want to see, on real data, how far the
classical worst-case bound for sequential floating-point summation sits above
the error that actually happens, and how much closer the probabilistic
(Azuma and martingale) bounds get.

Every module focuses on a single responsibility:

- ``precision``   target formats and correctly rounded addition
- ``oracle``      exact reference computations
- ``trace``       sequential summation with per-step rounding errors
- ``bounds``      O(1)-per-element accumulators and the three bounds
- ``experiments`` seeded data, sweeps, Monte-Carlo failure rates
- ``validation``  the oracle suite behind ``sumbound validate``
- ``io`` / ``report``  files, summaries and plots

Conventions
-----------
- Indices are 0-based in code. Wherever a docstring says "step k" it means
  the 1-based step of the summation (step 1 is ``z_hat_1 = x_1``).
- Exact quantities are ``fractions.Fraction``; high-precision reals are
  ``mpmath.mpf``.

Example
-------
>>> import sumbound_core as sb
>>> sb.__version__
'1.0.0'
"""

# Import only the light-weight version string here to avoid heavy imports.
from .version import __version__

__all__ = ["__version__"]
