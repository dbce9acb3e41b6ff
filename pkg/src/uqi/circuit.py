"""The full imaging pipeline on the four-wire register.

Stages, in order: probe preparation (optionally degraded to a Werner
state), the object channel on ``i1``, the mode mixer on ``(i1, i2)``,
discarding of both idler wires, and Bell or phase-shifted measurements on
the signal wires.  For the Bell probe the surviving signal state is::

    Upsilon = 1/2 ( |10><10| + T e^{i gamma} |10><01|
                  + T e^{-i gamma} |01><10| + |01><01| )

and the detector statistics follow ``P_{h/g} = (1 -/+ T cos(gamma+phi))/2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import (
    ModeMixer,
    ObjectParams,
    apply_channel,
    apply_mode_mixer,
    object_channel,
)
from .gates import apply_unitary, cnot, hadamard, phase_shifter
from .qcore import (
    ATOL,
    DEFAULT_REGISTER,
    DensityMatrix,
    Register,
    basis_ket,
    kron,
    partial_trace,
)

SIGNAL_REGISTER = Register(("s1", "s2"))

# the encoded two-qubit subspace: |0bar> = |00>, |1bar> = |11> on each
# (signal, idler) pair, written in the (s1, i1, i2, s2) wire order
ENCODED_BASIS = ("0000", "0011", "1100", "1111")


@dataclass(frozen=True)
class ProbeState:
    rho: DensityMatrix
    kind: str
    xi: float | None = None


@dataclass(frozen=True)
class SignalState:
    """Reduced state on (s1, s2) after the idlers are discarded."""

    rho: DensityMatrix


@dataclass(frozen=True)
class PipelineStages:
    """Intermediate states exposed for introspection."""

    post_object: DensityMatrix
    post_mixer: DensityMatrix | None
    signal: SignalState


def prepare_probe() -> ProbeState:
    """Run the preparation chain: H on i2, then three CNOTs.

    The first CNOT fires on control ``|0>`` (together with the Hadamard it
    plays the beam splitter); the other two model the photon-pair sources.
    The result is ``(|1100> + |0011>)/sqrt(2)``.
    """
    rho = DensityMatrix.from_ket(basis_ket("0000"), DEFAULT_REGISTER)
    rho = apply_unitary(rho, hadamard(), ["i2"])
    rho = apply_unitary(rho, cnot(control_value=0), ["i2", "i1"])
    rho = apply_unitary(rho, cnot(control_value=1), ["i1", "s1"])
    rho = apply_unitary(rho, cnot(control_value=1), ["i2", "s2"])
    return ProbeState(rho, "bell")


def probe_ket() -> np.ndarray:
    """Amplitude vector of the ideal probe, ``(|1100> + |0011>)/sqrt(2)``."""
    return (basis_ket("1100") + basis_ket("0011")) / np.sqrt(2)


def prepare_werner(xi: float) -> ProbeState:
    """Mix the probe with the maximally mixed state of the encoded subspace.

    ``W = (xi/4) * P_encoded + (1 - xi) * |probe><probe|`` where
    ``P_encoded`` projects on span{|0000>, |0011>, |1100>, |1111>}.  The
    state is entangled across (s1,i1)|(i2,s2) exactly for ``xi < 2/3``.
    """
    xi = float(xi)
    if not 0.0 <= xi <= 1.0:
        raise ValueError(f"xi must lie in [0, 1], got {xi}")
    probe = prepare_probe().rho
    mat = (1.0 - xi) * probe.mat.copy()
    for bits in ENCODED_BASIS:
        i = int(bits, 2)
        mat[i, i] += xi / 4.0
    return ProbeState(DensityMatrix(mat, DEFAULT_REGISTER), "werner", xi=xi)


def run_pipeline(probe: ProbeState, obj: ObjectParams, mm: ModeMixer | None) -> SignalState:
    """Object on i1, mixer on (i1, i2), then discard the idlers.

    Passing ``mm=None`` skips the mixing step entirely, which destroys the
    interference: without indistinguishability the detectors see 1/2 each.
    """
    return pipeline_stages(probe, obj, mm).signal


def pipeline_stages(probe: ProbeState, obj: ObjectParams, mm: ModeMixer | None) -> PipelineStages:
    post_object = apply_channel(probe.rho, object_channel(obj), ["i1"])
    post_mixer = None
    rho = post_object
    if mm is not None:
        post_mixer = apply_mode_mixer(post_object, mm, ["i1", "i2"])
        rho = post_mixer
    signal = SignalState(partial_trace(rho, ["s1", "s2"]))
    return PipelineStages(post_object, post_mixer, signal)


_BELL_KETS = {
    "phi+": ("00", "11", +1),
    "phi-": ("00", "11", -1),
    "psi+": ("01", "10", +1),
    "psi-": ("01", "10", -1),
}


def bell_ket(label: str) -> np.ndarray:
    """Two-qubit Bell state by label: phi+/phi-/psi+/psi-."""
    try:
        a, b, sign = _BELL_KETS[label.lower()]
    except KeyError:
        raise ValueError(f"unknown Bell label {label!r}") from None
    return (basis_ket(a) + sign * basis_ket(b)) / np.sqrt(2)


@dataclass(frozen=True)
class MeasurementPair:
    """Detector observables on (s1, s2) for one phase-shifter setting.

    ``m_h + m_g`` is always the projector on the one-photon subspace,
    ``(II - ZZ)/2``; at ``phi = 0`` the pair reduces to the Bell
    projectors ``|psi-><psi-|`` and ``|psi+><psi+|``.
    """

    phi: float
    m_h: np.ndarray
    m_g: np.ndarray


def measurement_pair(phi: float = 0.0) -> MeasurementPair:
    """Bell projectors conjugated by the phase shifter on the second wire.

    This is the observable pair whose statistics sweep as
    ``cos(gamma + phi)`` when the phase runs.
    """
    phi = float(phi)
    u = kron(np.eye(2), phase_shifter(phi).matrix)
    obs = []
    for label in ("psi-", "psi+"):
        ket = bell_ket(label)
        proj = np.outer(ket, ket.conj())
        obs.append(u @ proj @ u.conj().T)
    m_h, m_g = obs
    m_h.setflags(write=False)
    m_g.setflags(write=False)
    return MeasurementPair(phi, m_h, m_g)


def detection_probabilities(sig: SignalState, mp: MeasurementPair) -> tuple[float, float]:
    """``(P_h, P_g) = (Tr[m_h rho], Tr[m_g rho])``.

    For the Bell probe the two always sum to one; degraded probes leak
    weight outside the one-photon subspace and the sum drops below one
    (the missing weight is the no-click probability).
    """
    p_h = float(np.trace(mp.m_h @ sig.rho.mat).real)
    p_g = float(np.trace(mp.m_g @ sig.rho.mat).real)
    return p_h, p_g


def sample_detections(p_h: float, shots: int, seed: int) -> tuple[int, int]:
    """Binomial click counts for a two-detector Bernoulli trial.

    Deterministic for a fixed seed.  Use this for the Bell probe, where
    one of the two detectors always fires.
    """
    p_h = float(p_h)
    if not -ATOL <= p_h <= 1.0 + ATOL:
        raise ValueError(f"probability must lie in [0, 1], got {p_h}")
    p_h = min(max(p_h, 0.0), 1.0)
    shots = int(shots)
    if shots < 1:
        raise ValueError("shots must be at least 1")
    rng = np.random.default_rng(seed)
    n_h = int(rng.binomial(shots, p_h))
    return n_h, shots - n_h


def sample_detections_with_miss(
    p_h: float, p_g: float, shots: int, seed: int
) -> tuple[int, int, int]:
    """Trinomial counts ``(n_h, n_g, n_none)`` when ``p_h + p_g < 1``.

    Needed for Werner probes, where the detector pair does not resolve the
    identity on the support and some runs produce no click at all.
    """
    p_h, p_g = float(p_h), float(p_g)
    for p in (p_h, p_g):
        if not -ATOL <= p <= 1.0 + ATOL:
            raise ValueError(f"probability must lie in [0, 1], got {p}")
    p_h = min(max(p_h, 0.0), 1.0)
    p_g = min(max(p_g, 0.0), 1.0)
    if p_h + p_g > 1.0 + ATOL:
        raise ValueError("p_h + p_g exceeds 1")
    p_none = max(1.0 - p_h - p_g, 0.0)
    shots = int(shots)
    if shots < 1:
        raise ValueError("shots must be at least 1")
    rng = np.random.default_rng(seed)
    total = np.array([p_h, p_g, p_none])
    n = rng.multinomial(shots, total / total.sum())
    return int(n[0]), int(n[1]), int(n[2])
