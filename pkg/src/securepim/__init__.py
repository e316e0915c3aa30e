"""Secure outsourcing of ML kernels to a simulated processing-in-memory
device: additive sharing over Z_{2^32}, counter-mode OTPs, linear-modular-
hashing verification, and garbled-circuit offload of activations."""

__version__ = "0.1.0"
