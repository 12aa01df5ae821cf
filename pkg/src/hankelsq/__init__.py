"""Integrable kernels and squares of Hankel operators."""

from .hankelop import (
    hs_norm,
    nystrom_kernel,
    nystrom_rule,
    nystrom_symbol,
    symbol_square,
    sym_eigs,
)
from .kernelzoo import KernelSpec, kernel_dsum, kernel_value, make_kernel
from .omega import HankelSymbol, OmegaSystem, validate_system
from .quadrature import QuadratureRule, UnachievableTolerance, plan_rule
from .verify import run_suite, verify_identity

__version__ = "0.1.0"

__all__ = [
    "HankelSymbol",
    "KernelSpec",
    "OmegaSystem",
    "QuadratureRule",
    "UnachievableTolerance",
    "hs_norm",
    "kernel_dsum",
    "kernel_value",
    "make_kernel",
    "nystrom_kernel",
    "nystrom_rule",
    "nystrom_symbol",
    "plan_rule",
    "run_suite",
    "symbol_square",
    "sym_eigs",
    "validate_system",
    "verify_identity",
]
