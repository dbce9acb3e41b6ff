import numpy as np

from uqi.qcore import DEFAULT_REGISTER, DensityMatrix, Register


def random_density_matrix(rng, register: Register) -> DensityMatrix:
    d = register.dim
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real, register)


def random_hermitian(rng, dim: int) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (g + g.conj().T) / 2


def random_unitary(rng, dim: int) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def angle_diff(a: float, b: float) -> float:
    """Signed angular difference folded into (-pi, pi]."""
    return (a - b + np.pi) % (2 * np.pi) - np.pi


def four_wire_register() -> Register:
    return DEFAULT_REGISTER
