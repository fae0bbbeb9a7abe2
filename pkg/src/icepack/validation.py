"""Input validation helpers shared by the estimator, pipeline and CLI."""

from __future__ import annotations

import os

from .ir import LogicalCircuit, parse_qasm


def check_circuit(X) -> LogicalCircuit:
    """Coerce a LogicalCircuit, QASM text or QASM file path into a LogicalCircuit."""
    if isinstance(X, LogicalCircuit):
        return X
    if isinstance(X, os.PathLike):
        with open(X) as f:
            return parse_qasm(f.read())
    if isinstance(X, str):
        if "OPENQASM" not in X and os.path.exists(X):
            with open(X) as f:
                return parse_qasm(f.read())
        return parse_qasm(X)
    raise TypeError(f"expected a LogicalCircuit, QASM text or path, got {type(X).__name__}")


def check_passes(passes) -> tuple[str, ...]:
    from .compiler import ALL_PASSES

    if passes is None:
        return ALL_PASSES
    if isinstance(passes, str):
        passes = [p.strip() for p in passes.split(",") if p.strip()]
    bad = [p for p in passes if p not in ALL_PASSES]
    if bad:
        raise ValueError(f"unknown passes {bad}; choose from {list(ALL_PASSES)}")
    return tuple(p for p in ALL_PASSES if p in passes)


def check_target_args(n: int, patches=None, density=None) -> int:
    """Patch count from either an explicit count or a qubits-per-patch density."""
    import math

    from .pack import check_target, patches_for_density

    if patches is not None and density is not None:
        raise ValueError("give either patches or density, not both")
    if patches is None:
        patches = math.ceil(n / 2) if density is None else patches_for_density(n, density)
    check_target(n, int(patches))
    return int(patches)
