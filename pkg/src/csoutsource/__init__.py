"""Privacy-assured outsourcing of compressed-sensing reconstruction.

Sensor side (:mod:`.encoder`) samples, compresses, encrypts and hashes a
signal in one linear projection; the cloud (:mod:`.solver`) recovers the
still-encrypted sparse coefficients; the user (:mod:`.decoder`) passes an
access check, verifies integrity with a sign-bit MAC and decrypts.
"""
from .decoder import AccessDecision, IntegrityReport, check_access, recover, verify_integrity
from .encoder import (AccessPassword, MacCode, MeasurementPackage, acquire,
                      gen_access_password, gen_mac)
from .keymat import KeyedMatrices, SecretKeys, SystemParams
from .kernels import BACKEND
from .solver import ReconstructionResult, SolverConfig, SsrTask, bpdn, empirical_rip_check, omp
from .transform import coherence, desparsify, sparsify

__version__ = "0.1.0"

__all__ = [
    "AccessDecision", "AccessPassword", "BACKEND", "IntegrityReport", "KeyedMatrices",
    "MacCode", "MeasurementPackage", "ReconstructionResult", "SecretKeys", "SolverConfig",
    "SsrTask", "SystemParams", "acquire", "bpdn", "check_access", "coherence",
    "desparsify", "empirical_rip_check", "gen_access_password", "gen_mac", "omp",
    "recover", "sparsify", "verify_integrity",
]
