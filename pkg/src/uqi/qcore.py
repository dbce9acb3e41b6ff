"""Dense complex linear algebra on a labeled multi-qubit register.

Everything in this package runs through the primitives defined here:
tensor products, embedding of small operators onto a labeled register,
partial trace, partial transpose, Pauli-basis decomposition and Hermitian
eigenvalues.  Matrices are plain complex numpy arrays; states are wrapped
in :class:`DensityMatrix`, which validates physicality on construction.

Conventions:

* wire order is ``(s1, i1, i2, s2)`` by default, leftmost label is the
  most significant tensor factor;
* basis encoding ``|0> = (1, 0)^T``, ``|1> = (0, 1)^T``;
* matrices are dense (the register never exceeds four wires here).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

# Tolerances: algebraic identities at 1e-12, PSD slack at 1e-10 to absorb
# accumulated rounding from the eigensolver.
ATOL = 1e-12
PSD_SLACK = 1e-10

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
PAULI_LETTERS = "IXYZ"

DEFAULT_WIRES = ("s1", "i1", "i2", "s2")

_AXIS_LETTERS = "abcdefghijklmnopqrstuvwx"


def as_complex_matrix(m) -> np.ndarray:
    """Coerce to a 2-D complex array and reject empty or non-finite input."""
    out = np.asarray(m, dtype=complex)
    if out.ndim != 2 or out.shape[0] == 0 or out.shape[1] == 0:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ValueError("matrix contains non-finite entries")
    return out


@dataclass(frozen=True)
class Register:
    """Ordered collection of uniquely labeled wires."""

    wires: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "wires", tuple(self.wires))
        if len(self.wires) == 0:
            raise ValueError("register needs at least one wire")
        if len(set(self.wires)) != len(self.wires):
            raise ValueError(f"duplicate wire labels in {self.wires}")

    @property
    def n(self) -> int:
        return len(self.wires)

    @property
    def dim(self) -> int:
        return 2 ** self.n

    def index(self, wire: str) -> int:
        try:
            return self.wires.index(wire)
        except ValueError:
            raise ValueError(f"unknown wire label {wire!r}; register has {self.wires}") from None

    def positions(self, wires) -> list[int]:
        wires = list(wires)
        if len(set(wires)) != len(wires):
            raise ValueError(f"duplicate wire labels in {wires}")
        return [self.index(w) for w in wires]


DEFAULT_REGISTER = Register(DEFAULT_WIRES)


def kron(a, b) -> np.ndarray:
    """Tensor product of two matrices, left factor most significant."""
    return np.kron(as_complex_matrix(a), as_complex_matrix(b))


def basis_ket(bits: str) -> np.ndarray:
    """Computational basis vector from a bit string, e.g. ``"0011"``."""
    ket = np.zeros(2 ** len(bits), dtype=complex)
    ket[int(bits, 2)] = 1.0
    return ket


def embed(op, targets, reg: Register) -> np.ndarray:
    """Lift ``op`` acting on ``targets`` to the full register.

    The result acts as ``op`` on the target wires (in the order given, the
    first tensor factor of ``op`` addressing ``targets[0]``) and as the
    identity elsewhere.  Non-adjacent and permuted targets are handled by
    transposing tensor legs.
    """
    op = as_complex_matrix(op)
    targets = list(targets)
    idx = reg.positions(targets)
    k = len(idx)
    if op.shape != (2 ** k, 2 ** k):
        raise ValueError(
            f"operator shape {op.shape} does not match {k} target wire(s)"
        )
    n = reg.n
    rest = [i for i in range(n) if i not in idx]
    full = np.kron(op, np.eye(2 ** len(rest), dtype=complex))
    # current leg order is targets + rest; sort legs back into register order
    cur = idx + rest
    perm = list(np.argsort(cur))
    t = full.reshape((2,) * (2 * n))
    t = t.transpose(perm + [n + p for p in perm])
    return np.ascontiguousarray(t.reshape(reg.dim, reg.dim))


@dataclass(frozen=True)
class DensityMatrix:
    """Positive, unit-trace operator on a labeled register.

    Construction validates Hermiticity (1e-12), unit trace (1e-12) and
    positivity (eigenvalues above -1e-10), so any state produced by the
    pipeline is physical by the time it is observable.  Instances are
    immutable; the underlying array is frozen.
    """

    mat: np.ndarray
    register: Register

    def __post_init__(self):
        m = as_complex_matrix(self.mat).copy()
        if m.shape != (self.register.dim, self.register.dim):
            raise ValueError(
                f"state shape {m.shape} does not match register dimension {self.register.dim}"
            )
        if np.max(np.abs(m - m.conj().T)) > ATOL:
            raise ValueError("density matrix is not Hermitian within 1e-12")
        tr = np.trace(m)
        if abs(tr - 1.0) > ATOL:
            raise ValueError(f"density matrix trace {tr} is not 1 within 1e-12")
        if np.linalg.eigvalsh(m).min() < -PSD_SLACK:
            raise ValueError("density matrix has an eigenvalue below -1e-10")
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    @classmethod
    def from_ket(cls, ket, register: Register) -> "DensityMatrix":
        """Pure state from an amplitude vector (normalized here)."""
        v = np.asarray(ket, dtype=complex).reshape(-1)
        nrm = np.linalg.norm(v)
        if nrm < 1e-12:
            raise ValueError("cannot normalize a zero ket")
        v = v / nrm
        return cls(np.outer(v, v.conj()), register)

    @property
    def n(self) -> int:
        return self.register.n

    def purity(self) -> float:
        return float(np.trace(self.mat @ self.mat).real)

    def expectation(self, observable) -> complex:
        """``Tr[O rho]`` for a full-register operator ``O``."""
        return complex(np.trace(as_complex_matrix(observable) @ self.mat))

    def reordered(self, new_wires) -> np.ndarray:
        """Matrix of the same state with wires permuted into ``new_wires``."""
        perm = self.register.positions(new_wires)
        if len(perm) != self.n:
            raise ValueError("wire permutation must mention every wire exactly once")
        n = self.n
        t = self.mat.reshape((2,) * (2 * n))
        t = t.transpose(perm + [n + p for p in perm])
        return np.ascontiguousarray(t.reshape(self.register.dim, self.register.dim))


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduced state on the ``keep`` wires (in the order given).

    Discarded wires are contracted; the trace is preserved.
    """
    keep = list(keep)
    if not keep:
        raise ValueError("keep set must be nonempty")
    idx = rho.register.positions(keep)
    n = rho.n
    row = list(_AXIS_LETTERS[:n])
    col = []
    nxt = n
    for i in range(n):
        if i in idx:
            col.append(_AXIS_LETTERS[nxt])
            nxt += 1
        else:
            col.append(row[i])  # repeated letter contracts the discarded wire
    out = "".join(row[i] for i in idx) + "".join(col[i] for i in idx)
    sub = "".join(row) + "".join(col) + "->" + out
    t = rho.mat.reshape((2,) * (2 * n))
    d = 2 ** len(keep)
    red = np.einsum(sub, t).reshape(d, d)
    return DensityMatrix(red, Register(tuple(keep)))


def partial_transpose(rho: DensityMatrix, subsystem) -> np.ndarray:
    """Transpose the given wires only; returns a plain (Hermitian) matrix.

    The result is generally not positive, which is the point: negativity
    of the partial transpose certifies entanglement across the cut.
    """
    subsystem = list(subsystem)
    idx = rho.register.positions(subsystem)
    n = rho.n
    if not 0 < len(idx) < n:
        raise ValueError("subsystem must be a proper nonempty subset of the register")
    axes = list(range(2 * n))
    for i in idx:
        axes[i], axes[n + i] = axes[n + i], axes[i]
    t = rho.mat.reshape((2,) * (2 * n)).transpose(axes)
    return np.ascontiguousarray(t.reshape(rho.register.dim, rho.register.dim))


@dataclass(frozen=True)
class PauliString:
    """One term of a Pauli-basis expansion: a letter per wire and a weight."""

    letters: tuple[str, ...]
    coefficient: complex

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(self.letters))
        for c in self.letters:
            if c not in PAULI:
                raise ValueError(f"invalid Pauli letter {c!r}")

    @property
    def label(self) -> str:
        return "".join(self.letters)

    def matrix(self) -> np.ndarray:
        out = np.array([[1.0 + 0j]])
        for c in self.letters:
            out = np.kron(out, PAULI[c])
        return self.coefficient * out


def _pauli_iter(n: int):
    for letters in itertools.product(PAULI_LETTERS, repeat=n):
        mat = np.array([[1.0 + 0j]])
        for c in letters:
            mat = np.kron(mat, PAULI[c])
        yield letters, mat


def pauli_decompose(m, reg: Register) -> list[PauliString]:
    """Expand a square matrix over Pauli strings of the register.

    Coefficients are ``c_P = Tr[P m] / 2^n``; terms below 1e-14 in
    magnitude are dropped.  ``pauli_reconstruct`` inverts the expansion.
    """
    m = as_complex_matrix(m)
    if m.shape != (reg.dim, reg.dim):
        raise ValueError(f"matrix shape {m.shape} does not match register dimension {reg.dim}")
    terms = []
    scale = 1.0 / reg.dim
    for letters, pmat in _pauli_iter(reg.n):
        c = np.einsum("ij,ji->", pmat, m) * scale
        if abs(c) > 1e-14:
            terms.append(PauliString(letters, complex(c)))
    return terms


def pauli_reconstruct(terms) -> np.ndarray:
    """Sum a list of :class:`PauliString` back into a dense matrix."""
    terms = list(terms)
    if not terms:
        raise ValueError("nothing to reconstruct from an empty term list")
    out = terms[0].matrix()
    for t in terms[1:]:
        out = out + t.matrix()
    return out


def hermitian_eigenvalues(m) -> np.ndarray:
    """Ascending real spectrum of a Hermitian matrix.

    Raises if the input deviates from Hermiticity by more than 1e-10.
    """
    m = as_complex_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError("eigenvalues require a square matrix")
    if np.max(np.abs(m - m.conj().T)) > 1e-10:
        raise ValueError("matrix is not Hermitian within 1e-10")
    return np.linalg.eigvalsh(m)
