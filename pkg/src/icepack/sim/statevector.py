"""Dense state-vector simulation used as the ground-truth oracle."""

from __future__ import annotations

import numpy as np

MAX_QUBITS = 14
MAX_UNITARY_QUBITS = 7


class TooLarge(ValueError):
    pass


_S2 = 1 / np.sqrt(2)
_FIXED = {
    "I": np.eye(2, dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _S2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
    "S": np.diag([1, 1j]),
    "SDG": np.diag([1, -1j]),
    "SX": 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]),
    "SXDG": 0.5 * np.array([[1 - 1j, 1 + 1j], [1 + 1j, 1 - 1j]]),
    "SY": 0.5 * (1 + 1j) * np.array([[1, -1], [1, 1]]),
    "SYDG": 0.5 * (1 - 1j) * np.array([[1, 1], [-1, 1]]),
}


def _rx(t):
    c, s = np.cos(t / 2), np.sin(t / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def _rz(t):
    return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])


def _two(name):
    cx = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
    if name == "CX":
        return cx
    if name == "CZ":
        return np.diag([1, 1, 1, -1]).astype(complex)
    if name == "SWAP":
        return np.eye(4, dtype=complex)[[0, 2, 1, 3]]
    if name == "XCX":
        h = np.kron(_FIXED["H"], np.eye(2))
        return h @ cx @ h
    raise KeyError(name)


def gate_matrix(name: str, angle: float | None = None) -> np.ndarray:
    name = name.upper()
    if name == "RX":
        return _rx(angle)
    if name == "RZ":
        return _rz(angle)
    if name in _FIXED:
        return _FIXED[name]
    return _two(name)


def _as_ops(ops):
    """Accept IR gates or (name, qubits[, angle]) tuples."""
    for op in ops:
        if hasattr(op, "parts"):
            for g in op.parts():
                yield g.kind.name, g.qubits, g.angle
        elif hasattr(op, "name"):
            yield op.name, op.qubits, getattr(op, "angle", None)
        else:
            name, qs, *rest = op
            yield name, tuple(qs), (rest[0] if rest else None)


class Statevector:
    """State on ``n`` qubits; qubit 0 is the most significant index bit."""

    def __init__(self, n: int, data: np.ndarray | None = None):
        if n > MAX_QUBITS:
            raise TooLarge(f"{n} qubits exceeds the dense limit of {MAX_QUBITS}")
        self.n = n
        if data is None:
            data = np.zeros(2**n, dtype=complex)
            data[0] = 1
        self.data = np.asarray(data, dtype=complex).reshape((2,) * n) if n else np.asarray(data, dtype=complex)

    @classmethod
    def basis(cls, n: int, bits) -> "Statevector":
        v = np.zeros(2**n, dtype=complex)
        v[int("".join(str(int(b)) for b in bits), 2) if n else 0] = 1
        return cls(n, v)

    def vector(self) -> np.ndarray:
        return self.data.reshape(-1)

    def apply_matrix(self, m: np.ndarray, qubits) -> "Statevector":
        qubits = list(qubits)
        k = len(qubits)
        t = m.reshape((2,) * (2 * k))
        out = np.tensordot(t, self.data, axes=(list(range(k, 2 * k)), qubits))
        self.data = np.moveaxis(out, list(range(k)), qubits)
        return self

    def apply(self, ops) -> "Statevector":
        for name, qs, angle in _as_ops(ops):
            if name.upper() in ("R", "M", "MR", "TICK"):
                raise ValueError(f"non-unitary instruction {name}")
            self.apply_matrix(gate_matrix(name, angle), qs)
        return self

    def probabilities(self) -> np.ndarray:
        return np.abs(self.vector()) ** 2

    def expectation(self, pauli: str) -> float:
        """Expectation of a Pauli string such as 'XXXX' (one letter per qubit)."""
        other = Statevector(self.n, self.vector().copy())
        for q, p in enumerate(pauli):
            if p != "I":
                other.apply_matrix(_FIXED[p], [q])
        return float(np.real(np.vdot(self.vector(), other.vector())))


def exact_statevector(ops, n: int, initial=None) -> np.ndarray:
    sv = Statevector(n, initial)
    sv.apply(ops)
    return sv.vector()


def unitary(ops, n: int) -> np.ndarray:
    if n > MAX_UNITARY_QUBITS:
        raise TooLarge(f"unitary extraction limited to {MAX_UNITARY_QUBITS} qubits")
    cols = []
    ops = list(_as_ops(ops))
    for i in range(2**n):
        v = np.zeros(2**n, dtype=complex)
        v[i] = 1
        cols.append(exact_statevector(ops, n, v))
    return np.array(cols).T


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-10) -> bool:
    a = np.asarray(a).reshape(-1)
    b = np.asarray(b).reshape(-1)
    k = np.argmax(np.abs(b))
    if abs(b[k]) < atol:
        return bool(np.allclose(a, b, atol=atol))
    ph = a[k] / b[k]
    if abs(abs(ph) - 1) > 1e-8:
        return False
    return bool(np.allclose(a, ph * b, atol=atol))
