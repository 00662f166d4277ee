"""hybridqed - driven cavity, mechanical resonator and qubit simulations."""

__version__ = "0.1.0"
