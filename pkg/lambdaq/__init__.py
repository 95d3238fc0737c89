"""Lambda quantiles: hybrid Newton-bisection solver, interval isolation, empirical estimates and portfolio descent."""

__version__ = "0.1.0"
