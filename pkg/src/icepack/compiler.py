"""The compilation pipeline and its scikit-learn style estimator."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .hcommute import commute_hadamards
from .ir import LogicalCircuit, cancel_adjacent, depth, push_swaps_right
from .merge import apply_merges
from .pack import (BiasWeights, Packing, ScoreMatrix, default_grid, grid_align, greedy_pack,
                   naive_packing, score_matrix)
from .sim.noise import NoiseModel
from .translate import PhysicalCircuit, resource_report, translate
from .validation import check_circuit, check_passes, check_target_args

ALL_PASSES = ("cancel", "hcommute", "merge", "pack", "grid")


@dataclass
class CompileResult:
    logical: LogicalCircuit          # after the logical passes, before merging
    merged: LogicalCircuit           # after the merge rewrite
    packing: Packing
    physical: PhysicalCircuit
    scores: ScoreMatrix | None = None
    pass_log: list[dict] = field(default_factory=list)

    def report(self) -> dict:
        return {"resources": resource_report(self.physical).to_dict(),
                "packing": self.packing.to_dict(),
                "grid": [list(g) for g in self.packing.grid] if self.packing.grid else None,
                "pass_log": self.pass_log}


def _log(log, name, c, t0, **extra):
    log.append({"pass": name, "gates": len(c.gates), "depth": depth(c),
                "seconds": round(time.perf_counter() - t0, 6), **extra})


def preprocess(c: LogicalCircuit, passes=ALL_PASSES, log=None) -> LogicalCircuit:
    """Logical-level passes: cancel, commute Hadamards, cancel again."""
    log = [] if log is None else log
    if "cancel" in passes:
        t0 = time.perf_counter()
        c = cancel_adjacent(c)
        _log(log, "cancel", c, t0)
    if "hcommute" in passes:
        t0 = time.perf_counter()
        c = commute_hadamards(c)
        _log(log, "hcommute", c, t0)
        if "cancel" in passes:
            t0 = time.perf_counter()
            c = cancel_adjacent(c)
            _log(log, "cancel", c, t0)
    if {"pack", "merge"} & set(passes):
        # packing and merging reason about fixed qubit locations
        c = push_swaps_right(c)
    return c


def choose_packing(c: LogicalCircuit, N: int, passes=ALL_PASSES, noise=None, bias=None,
                   order=None, log=None) -> tuple[Packing, ScoreMatrix | None]:
    log = [] if log is None else log
    scores = None
    t0 = time.perf_counter()
    if "pack" in passes:
        scores = score_matrix(c, noise, bias)
        _log(log, "score", c, t0)
        t0 = time.perf_counter()
        packing = greedy_pack(scores, N)
        _log(log, "pack", c, t0, patches=packing.n_patches)
    else:
        packing = naive_packing(c.num_qubits, N, order)
    t0 = time.perf_counter()
    packing = grid_align(packing, c) if "grid" in passes else default_grid(packing)
    if "grid" in passes:
        _log(log, "grid", c, t0)
    return packing, scores


def compile_circuit(c, *, patches: int | None = None, density: float | None = None,
                    passes=ALL_PASSES, noise: NoiseModel | None = None,
                    bias: BiasWeights | None = None, order=None,
                    packing: Packing | None = None) -> CompileResult:
    """Run the full pipeline.  With no passes this is the naive baseline."""
    c = check_circuit(c)
    passes = check_passes(passes)
    log: list[dict] = []
    pre = preprocess(c, passes, log)
    if packing is None:
        N = check_target_args(c.num_qubits, patches, density)
        packing, scores = choose_packing(pre, N, passes, noise, bias, order, log)
    else:
        scores = None
        if packing.grid is None:
            packing = default_grid(packing)
    merged = pre
    if "merge" in passes:
        t0 = time.perf_counter()
        merged = apply_merges(pre, packing)
        _log(log, "merge", merged, t0)
    t0 = time.perf_counter()
    phys = translate(merged, packing, source=c)
    r = resource_report(phys)
    log.append({"pass": "translate", "n1q": r.n1q, "n2q": r.n2q, "depth": r.depth,
                "seconds": round(time.perf_counter() - t0, 6)})
    return CompileResult(pre, merged, packing, phys, scores, log)


def naive_baseline(c, order=None) -> CompileResult:
    """Identity (or given) order, full density, no passes."""
    return compile_circuit(c, passes=(), order=order)


class IcebergCompiler(TransformerMixin, BaseEstimator):
    """Compile logical circuits onto Iceberg patches.

    ``fit`` chooses the packing and grid for a circuit; ``transform`` emits
    the physical circuit for circuits on the same number of qubits.
    """

    def __init__(self, patches=None, density=None, passes="cancel,hcommute,merge,pack,grid",
                 alpha=1.0, beta=1.0, gamma=0.2, delta=-0.1, p1=1e-3, p2=5e-3):
        self.patches = patches
        self.density = density
        self.passes = passes
        self.alpha = alpha
        self.beta = beta
        self.gamma = gamma
        self.delta = delta
        self.p1 = p1
        self.p2 = p2

    def _bias(self):
        return BiasWeights(self.alpha, self.beta, self.gamma, self.delta)

    def _noise(self):
        return NoiseModel(p1=self.p1, p2=self.p2)

    def fit(self, X, y=None):
        c = check_circuit(X)
        passes = check_passes(self.passes)
        N = check_target_args(c.num_qubits, self.patches, self.density)
        log: list[dict] = []
        pre = preprocess(c, passes, log)
        self.packing_, self.scores_ = choose_packing(pre, N, passes, self._noise(),
                                                     self._bias(), None, log)
        self.n_qubits_ = c.num_qubits
        self.pass_log_ = log
        return self

    def transform(self, X) -> PhysicalCircuit:
        check_is_fitted(self, "packing_")
        c = check_circuit(X)
        if c.num_qubits != self.n_qubits_:
            raise ValueError(f"fitted for {self.n_qubits_} qubits, got {c.num_qubits}")
        res = compile_circuit(c, passes=check_passes(self.passes), packing=self.packing_)
        self.result_ = res
        return res.physical
