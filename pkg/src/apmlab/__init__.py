"""apmlab: a numeric laboratory for moments of primes in arithmetic progressions.

The package has three layers:

1. exact arithmetic: per-prime local factors (fractions), Euler products with
   controlled tails, Dirichlet-series factorizations checked coefficientwise;
2. analytic numerics: a vectorized zeta evaluator, contour (vertical-line)
   integrals with adaptive panels and tail bounds, residue bookkeeping;
3. empirical sums: sieved prime tables, progression error terms E_x(q, a),
   second/third moment summaries, and lattice-point sums with multiplicative
   weights.

The `verify` module ties the layers together: identities that should hold
exactly are checked in rational arithmetic, and asymptotic statements are
turned into measured growth exponents fitted against pinned targets.
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
