"""Quantum operations: the object channel, its chi form, and the mode mixer.

The semi-transparent object is an amplitude-damping channel with a
transmission phase.  With ``k = T e^{i gamma}`` its Kraus operators are::

    K0 = [[1, 0],      K1 = [[0, sqrt(1 - T^2)],
          [0, k]]            [0, 0           ]]

and the resulting action on a single-qubit state is entrywise::

    rho00 -> rho00 + (1 - T^2) rho11      rho01 -> T e^{-i gamma} rho01
    rho11 -> T^2 rho11                    rho10 -> T e^{+i gamma} rho10

The mode mixer is the renormalizing (hence nonlinear) operation that makes
the two idler wires indistinguishable: both ``|01>`` and ``|10>`` are sent
to a fixed state ``|Xi>``, the rest of the two-wire space is untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .qcore import (
    ATOL,
    PAULI,
    PSD_SLACK,
    DensityMatrix,
    as_complex_matrix,
    embed,
)

_PAULI_SEQ = (PAULI["I"], PAULI["X"], PAULI["Y"], PAULI["Z"])


def normalize_angle(theta: float) -> float:
    """Fold an angle into (-pi, pi]."""
    out = (float(theta) + np.pi) % (2 * np.pi) - np.pi
    if out == -np.pi:
        out = np.pi
    return out


@dataclass(frozen=True)
class ObjectParams:
    """Transmission amplitude ``t`` in [0, 1] and phase ``gamma`` in radians."""

    t: float
    gamma: float = 0.0

    def __post_init__(self):
        t = float(self.t)
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"transmission must lie in [0, 1], got {t}")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "gamma", normalize_angle(self.gamma))


@dataclass(frozen=True)
class KrausChannel:
    """Completely positive trace-preserving map as a list of Kraus operators.

    Trace preservation (``sum K^† K = I`` within 1e-12) is enforced at
    construction; complete positivity is automatic in this form and can be
    re-checked explicitly through :func:`choi_psd_check`.
    """

    kraus_ops: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(as_complex_matrix(k).copy() for k in self.kraus_ops)
        if not ops:
            raise ValueError("channel needs at least one Kraus operator")
        d = ops[0].shape[0]
        for k in ops:
            if k.shape != (d, d):
                raise ValueError("all Kraus operators must share one square shape")
        total = sum(k.conj().T @ k for k in ops)
        if np.max(np.abs(total - np.eye(d))) > ATOL:
            raise ValueError("Kraus operators violate the trace-preserving condition")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "kraus_ops", ops)

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].shape[0]

    def apply(self, mat) -> np.ndarray:
        """Channel action on a bare matrix of the channel's own dimension."""
        mat = as_complex_matrix(mat)
        if mat.shape != (self.dim, self.dim):
            raise ValueError(f"input shape {mat.shape} does not match channel dimension {self.dim}")
        out = np.zeros_like(mat)
        for k in self.kraus_ops:
            out += k @ mat @ k.conj().T
        return out

    def tensor(self, other: "KrausChannel") -> "KrausChannel":
        """Parallel composition ``E (x) F`` (Kraus products)."""
        return KrausChannel(tuple(np.kron(a, b) for a in self.kraus_ops for b in other.kraus_ops))


def identity_channel(dim: int = 2) -> KrausChannel:
    return KrausChannel((np.eye(dim, dtype=complex),))


def object_channel(params: ObjectParams) -> KrausChannel:
    """Amplitude-damping-with-phase channel of a semi-transparent object."""
    k = params.t * np.exp(1j * params.gamma)
    k0 = np.array([[1.0, 0.0], [0.0, k]], dtype=complex)
    k1 = np.array([[0.0, np.sqrt(1.0 - params.t ** 2)], [0.0, 0.0]], dtype=complex)
    return KrausChannel((k0, k1))


def apply_channel(rho: DensityMatrix, ch: KrausChannel, targets) -> DensityMatrix:
    """Apply a channel to a subset of wires, identity elsewhere."""
    targets = list(targets)
    if ch.dim != 2 ** len(targets):
        raise ValueError(
            f"channel dimension {ch.dim} does not match {len(targets)} target wire(s)"
        )
    out = np.zeros_like(rho.mat)
    for k in ch.kraus_ops:
        ke = embed(k, targets, rho.register)
        out += ke @ rho.mat @ ke.conj().T
    return DensityMatrix(out, rho.register)


@dataclass(frozen=True)
class ChiMatrix:
    """Process matrix in the normalized Pauli basis ``sigma_alpha / sqrt(2)``.

    Defined by the round-trip identity
    ``E[rho] = (1/2) sum_{ab} chi_ab sigma_a rho sigma_b``; the identity
    channel therefore has the single entry ``chi_00 = 2``.
    """

    entries: np.ndarray

    def __post_init__(self):
        m = as_complex_matrix(self.entries).copy()
        if m.shape != (4, 4):
            raise ValueError(f"chi matrix must be 4x4, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > ATOL:
            raise ValueError("chi matrix is not Hermitian")
        if np.linalg.eigvalsh(m).min() < -PSD_SLACK:
            raise ValueError("chi matrix is not positive semidefinite within 1e-10")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    def apply(self, mat) -> np.ndarray:
        """Reconstruct the channel action from chi (the round trip)."""
        mat = as_complex_matrix(mat)
        out = np.zeros((2, 2), dtype=complex)
        for a in range(4):
            for b in range(4):
                c = self.entries[a, b]
                if c != 0:
                    out += 0.5 * c * _PAULI_SEQ[a] @ mat @ _PAULI_SEQ[b]
        return out


def chi_matrix(ch: KrausChannel) -> ChiMatrix:
    """Chi representation of a single-qubit channel.

    Each Kraus operator is expanded as ``K_l = sum_a a_la sigma_a/sqrt(2)``
    and ``chi_ab = sum_l a_la a*_lb``.
    """
    if ch.dim != 2:
        raise ValueError("chi matrix is defined here for single-qubit channels only")
    coeffs = np.array(
        [[np.trace(s @ k) / np.sqrt(2) for s in _PAULI_SEQ] for k in ch.kraus_ops]
    )
    return ChiMatrix(coeffs.T @ coeffs.conj())


def choi_matrix(channel, dim: int | None = None) -> np.ndarray:
    """Choi matrix from an unnormalized maximally entangled pair.

    ``channel`` is a :class:`KrausChannel` or any callable acting on a
    ``dim x dim`` matrix (callables let non-CP maps, e.g. transposition,
    be probed too).  Layout: ``sum_ij |i><j| (x) E[|i><j|]``.
    """
    if isinstance(channel, KrausChannel):
        fn, d = channel.apply, channel.dim
    else:
        if dim is None:
            raise ValueError("dim is required when passing a bare callable")
        fn, d = channel, dim
    out = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[i, j] = 1.0
            out += np.kron(unit, as_complex_matrix(fn(unit)))
    return out


def choi_psd_check(channel, dim: int | None = None) -> tuple[bool, float]:
    """Complete-positivity test: Choi positivity within the 1e-10 slack.

    Returns ``(is_psd, min_eigenvalue)``.
    """
    c = choi_matrix(channel, dim)
    c = (c + c.conj().T) / 2  # symmetrize rounding noise before eigvalsh
    min_eig = float(np.linalg.eigvalsh(c).min())
    return min_eig >= -PSD_SLACK, min_eig


def default_xi() -> np.ndarray:
    """The mixer target state ``|Xi> = |-> (x) |+>`` on the two idler wires."""
    minus = np.array([1.0, -1.0], dtype=complex) / np.sqrt(2)
    plus = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)
    return np.kron(minus, plus)


@dataclass(frozen=True)
class ModeMixer:
    """Two-wire operator sending both ``|01>`` and ``|10>`` to ``|Xi>``.

    ``rest`` selects what happens on span{|00>, |11>}: ``"identity"``
    keeps those states untouched (the convention consistent with the rest
    of the pipeline), ``"coherent"`` uses the rank-one alternative
    ``(|00> + |11>)(<00| + <11|)``, kept only for comparison experiments.
    """

    xi: np.ndarray
    rest: str = "identity"
    op: np.ndarray = field(init=False)

    def __post_init__(self):
        v = np.asarray(self.xi, dtype=complex).reshape(-1)
        if v.shape != (4,):
            raise ValueError("xi must be a 4-component vector on the two idler wires")
        if abs(np.linalg.norm(v) - 1.0) > ATOL:
            raise ValueError("xi must be a unit vector")
        if self.rest not in ("identity", "coherent"):
            raise ValueError(f"rest must be 'identity' or 'coherent', got {self.rest!r}")
        v = v.copy()
        v.setflags(write=False)
        e = np.eye(4, dtype=complex)
        m = np.outer(v, e[1] + e[2])
        if self.rest == "identity":
            m += np.outer(e[0], e[0]) + np.outer(e[3], e[3])
        else:
            m += np.outer(e[0] + e[3], e[0] + e[3])
        m.setflags(write=False)
        object.__setattr__(self, "xi", v)
        object.__setattr__(self, "op", m)


def mode_mixer(xi=None, rest: str = "identity") -> ModeMixer:
    """Build a mode mixer; defaults to the ``|Xi> = |-+>`` target state."""
    return ModeMixer(default_xi() if xi is None else xi, rest)


def apply_mode_mixer(rho: DensityMatrix, mm: ModeMixer, targets) -> DensityMatrix:
    """Renormalizing mixer action ``rho -> M rho M^† / Tr[M rho M^†]``.

    Raises when the normalization vanishes, i.e. the state has no overlap
    with the mixer's support.  Nonlinear by construction.
    """
    targets = list(targets)
    if len(targets) != 2:
        raise ValueError("the mode mixer acts on exactly two wires")
    m = embed(mm.op, targets, rho.register)
    num = m @ rho.mat @ m.conj().T
    norm = float(np.trace(num).real)
    if norm <= 1e-14:
        raise ValueError("mode mixer normalization vanished: state has no support on the mixer")
    return DensityMatrix(num / norm, rho.register)
