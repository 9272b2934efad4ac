"""Class-number statistics over positive discriminants with small
fundamental unit: enumeration, dual class-number computation, the random
Euler-product model, and desk-scale verification of the associated moment,
tail, and counting asymptotics."""

__version__ = "0.1.0"
