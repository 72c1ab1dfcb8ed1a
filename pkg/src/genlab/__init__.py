"""genlab: a simulation lab for two-player generation games on
separable metric instance spaces."""

__version__ = "0.1.0"
