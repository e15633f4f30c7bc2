"""Restricted Monte Carlo Laboratory.

Runs adaptive algorithms that spend information calls and restricted random
calls under exact cost accounting, turns them into deterministic decision
trees by truncation and conditional expectation, and checks the resulting
lower bounds on concrete grid and integration problems.
"""

__version__ = "1.0.0"
