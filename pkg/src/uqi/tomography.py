"""Process-identification layer: operator Schmidt, the ancilla linear
relation, phase-sweep estimation of the object parameters, visibility,
and two-dimensional image scans.

The probe state, written across the (idlers)|(signals) cut as
``rho_in = sum_l r_l A_l (x) B_l`` with orthonormal operator families,
turns the discarded-system experiment into a set of linear readouts:
measuring ``B_l`` on the surviving signals yields
``<B_l^†> = r_l Tr[F o E[A_l]]`` for any channel ``E`` on the idler side
followed by a known operation ``F``.  Sweeping the measurement phase then
inverts the two object parameters from the sinusoid
``P_h(phi) = (1 - T cos(gamma + phi)) / 2``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channels import KrausChannel, ModeMixer, ObjectParams, mode_mixer, normalize_angle
from .circuit import (
    detection_probabilities,
    measurement_pair,
    prepare_probe,
    run_pipeline,
)
from .qcore import DensityMatrix

THREADS_ENV = "UQI_THREADS"

# singular values closer than this (relative) are treated as one
# degenerate group when fixing the Hermitian gauge
_GROUP_RTOL = 1e-10
_RANK_RTOL = 1e-12


@dataclass(frozen=True)
class SchmidtData:
    """Operator-Schmidt triple ``{r_l, A_l, B_l}`` of a bipartite state.

    Coefficients are the (nonnegative) singular values of the reshuffled
    state; sign freedom is folded into the operators, which are gauged to
    be Hermitian whenever the input admits it (``hermitian`` records the
    outcome per term).  Both families are orthonormal under
    ``Tr[A A'^†] = delta``.
    """

    r: np.ndarray
    a_ops: tuple[np.ndarray, ...]
    b_ops: tuple[np.ndarray, ...]
    dim_a: int
    dim_b: int
    hermitian: tuple[bool, ...]

    @property
    def rank(self) -> int:
        return len(self.r)

    def reconstruct(self) -> np.ndarray:
        """``sum_l r_l A_l (x) B_l`` on the (A wires, B wires) ordering."""
        out = np.zeros((self.dim_a * self.dim_b,) * 2, dtype=complex)
        for r, a, b in zip(self.r, self.a_ops, self.b_ops):
            out += r * np.kron(a, b)
        return out


def _hermitian_basis(cols: list[np.ndarray], k: int) -> list[np.ndarray] | None:
    """Orthonormal Hermitian basis of span(cols), or None if there is none.

    Real-linear Gram-Schmidt over the Hermitian parts; two projection
    passes keep the basis orthogonal to machine precision.
    """
    cands = []
    for a in cols:
        cands.append((a + a.conj().T) / 2)
        cands.append(1j * (a - a.conj().T) / 2)
    basis: list[np.ndarray] = []
    for c in cands:
        for _ in range(2):
            for b in basis:
                c = c - np.trace(b.conj().T @ c).real * b
        nrm = np.sqrt(np.trace(c.conj().T @ c).real)
        if nrm > 1e-8:
            basis.append(c / nrm)
        if len(basis) == k:
            return basis
    return None


def operator_schmidt(rho: DensityMatrix, bipartition) -> SchmidtData:
    """Operator-Schmidt decomposition across a bipartition of the register.

    ``bipartition`` is a pair of wire collections that together cover the
    register exactly.  Works by singular-value factorization of the
    reshuffled state matrix; degenerate singular values are re-gauged as a
    block so the returned operators stay Hermitian for Hermitian input.
    """
    wires_a, wires_b = (list(w) for w in bipartition)
    all_wires = wires_a + wires_b
    if sorted(all_wires) != sorted(rho.register.wires) or len(set(all_wires)) != len(all_wires):
        raise ValueError("bipartition must split the register into two disjoint parts")
    if not wires_a or not wires_b:
        raise ValueError("both sides of the bipartition must be nonempty")

    da, db = 2 ** len(wires_a), 2 ** len(wires_b)
    mat = rho.reordered(all_wires)
    # reshuffle (a b, a' b') -> (a a', b b') so that factors separate
    resh = mat.reshape(da, db, da, db).transpose(0, 2, 1, 3).reshape(da * da, db * db)
    u, sv, vh = np.linalg.svd(resh)
    cutoff = _RANK_RTOL * max(1.0, float(sv[0]) if sv.size else 0.0)
    rank = int(np.sum(sv > cutoff))

    groups = []
    start = 0
    for i in range(1, rank + 1):
        if i == rank or sv[i - 1] - sv[i] > _GROUP_RTOL * max(1.0, float(sv[0])):
            groups.append((start, i))
            start = i

    r_out: list[float] = []
    a_out: list[np.ndarray] = []
    b_out: list[np.ndarray] = []
    herm: list[bool] = []
    for lo, hi in groups:
        cols = [u[:, i].reshape(da, da) for i in range(lo, hi)]
        basis = _hermitian_basis(cols, hi - lo)
        gauged = basis is not None
        if not gauged:
            basis = cols
        for a in basis:
            w = resh.conj().T @ a.reshape(da * da)
            r = float(np.linalg.norm(w))
            b = (w / r).conj().reshape(db, db)
            r_out.append(r)
            a_out.append(a)
            b_out.append(b)
            herm.append(
                gauged
                and bool(np.max(np.abs(a - a.conj().T)) < 1e-10)
                and bool(np.max(np.abs(b - b.conj().T)) < 1e-10)
            )
    return SchmidtData(
        r=np.array(r_out),
        a_ops=tuple(a_out),
        b_ops=tuple(b_out),
        dim_a=da,
        dim_b=db,
        hermitian=tuple(herm),
    )


def aapt_predict(sd: SchmidtData, ch: KrausChannel, post: ModeMixer | None = None):
    """Ancilla-side expectations ``<B_l^†> = r_l Tr[F o E[A_l]]``.

    ``ch`` must act on the full first (system) block of the bipartition.
    When ``post`` is the mode mixer the projection is applied without the
    renormalization, i.e. the numbers refer to the unnormalized projected
    state; the mixer's scalar normalization cannot be pushed through a
    term-by-term linear relation.
    """
    if ch.dim != sd.dim_a:
        raise ValueError(
            f"channel dimension {ch.dim} does not match the system block dimension {sd.dim_a}"
        )
    if post is not None and sd.dim_a != 4:
        raise ValueError("the mode mixer post-operation needs a two-wire system block")
    out = np.empty(sd.rank, dtype=complex)
    for i, (r, a) in enumerate(zip(sd.r, sd.a_ops)):
        x = ch.apply(a)
        if post is not None:
            x = post.op @ x @ post.op.conj().T
        out[i] = r * np.trace(x)
    return out


@dataclass(frozen=True)
class ObjectEstimate:
    """Recovered object parameters with optional shot-noise uncertainty.

    ``gamma_hat`` is reported in (-pi, pi] with the nonnegative-amplitude
    branch enforced; when the amplitude is consistent with zero the
    ``degenerate`` flag is set and ``gamma_hat`` is NaN (the phase of a
    vanishing sinusoid carries no information).
    """

    t_hat: float
    gamma_hat: float
    stderr_t: float | None = None
    stderr_gamma: float | None = None
    method: str = "least-squares"
    degenerate: bool = False


def _finalize_estimate(c, s, cov, method, shots) -> ObjectEstimate:
    t_hat = float(np.hypot(c, s))
    stderr_t = stderr_gamma = None
    if shots:
        jt = np.array([c, s]) / t_hat if t_hat > 1e-15 else np.array([1.0, 0.0])
        stderr_t = float(np.sqrt(max(jt @ cov @ jt, 0.0)))
        degenerate = t_hat < 3.0 * stderr_t
        if not degenerate:
            jg = np.array([-s, c]) / t_hat ** 2
            stderr_gamma = float(np.sqrt(max(jg @ cov @ jg, 0.0)))
    else:
        degenerate = t_hat < 1e-9
    gamma_hat = normalize_angle(float(np.arctan2(s, c))) if not degenerate else float("nan")
    return ObjectEstimate(
        t_hat=t_hat,
        gamma_hat=gamma_hat,
        stderr_t=stderr_t,
        stderr_gamma=stderr_gamma,
        method=method,
        degenerate=degenerate,
    )


def estimate_object(probabilities, method: str = "least-squares", shots: int | None = None) -> ObjectEstimate:
    """Invert a phase sweep ``[(phi, P_h), ...]`` into ``(T, gamma)``.

    The sinusoid ``P_h = 1/2 - (c cos(phi) - s sin(phi))/2`` is linear in
    ``c = T cos(gamma)`` and ``s = T sin(gamma)``:

    * ``two-point`` solves the 2x2 system from the first two points (the
      default sweep {0, pi/2} gives ``c = 1 - 2 P(0)``,
      ``s = 2 P(pi/2) - 1``);
    * ``least-squares`` fits offset and both quadratures over the sweep.

    A single phase setting determines only ``T cos(gamma + phi)`` and is
    rejected: both methods require genuinely distinct phases.  With
    ``shots`` given, binomial uncertainty is propagated into standard
    errors and the degeneracy test becomes ``t_hat < 3 stderr_t``.
    """
    pts = [(float(p), float(v)) for p, v in probabilities]
    if method == "two-point":
        if len(pts) < 2:
            raise ValueError("two-point inversion needs at least two phase points")
        (p1, y1), (p2, y2) = pts[0], pts[1]
        if abs(normalize_angle(p1 - p2)) < 1e-12:
            raise ValueError("duplicate phase values: cannot invert a single setting")
        det = np.sin(p1 - p2)
        if abs(det) < 1e-12:
            raise ValueError("phase points pi apart are degenerate for the two-point inversion")
        # y_i = 1 - 2 P_i = c cos(phi_i) - s sin(phi_i)
        a = np.array([[np.cos(p1), -np.sin(p1)], [np.cos(p2), -np.sin(p2)]])
        y = np.array([1 - 2 * y1, 1 - 2 * y2])
        ainv = np.linalg.inv(a)
        c, s = ainv @ y
        cov = None
        if shots:
            var_y = 4.0 * np.array([max(y1 * (1 - y1), 1e-12), max(y2 * (1 - y2), 1e-12)]) / shots
            cov = ainv @ np.diag(var_y) @ ainv.T
        return _finalize_estimate(c, s, cov, "two-point", shots)

    if method == "least-squares":
        if len(pts) < 3:
            raise ValueError("least-squares inversion needs at least three phase points")
        phis = np.array([p for p, _ in pts])
        ps = np.array([v for _, v in pts])
        if len(np.unique(np.round(phis, 12))) < 2:
            raise ValueError("duplicate phase values: cannot invert a single setting")
        design = np.column_stack([np.ones_like(phis), np.cos(phis), np.sin(phis)])
        coef, *_ = np.linalg.lstsq(design, ps, rcond=None)
        _, u, v = coef
        c, s = -2.0 * u, 2.0 * v
        cov = None
        if shots:
            var_p = np.clip(ps * (1.0 - ps), 1e-12, None) / shots
            gram_inv = np.linalg.inv(design.T @ design)
            cov_coef = gram_inv @ design.T @ np.diag(var_p) @ design @ gram_inv
            # (c, s) = (-2u, 2v)
            cov = np.array(
                [
                    [4 * cov_coef[1, 1], -4 * cov_coef[1, 2]],
                    [-4 * cov_coef[1, 2], 4 * cov_coef[2, 2]],
                ]
            )
        return _finalize_estimate(c, s, cov, "least-squares", shots)

    raise ValueError(f"unknown method {method!r}; use 'two-point' or 'least-squares'")


def visibility(p_series) -> float:
    """Fringe visibility ``(P_max - P_min) / (P_max + P_min)``."""
    ps = np.asarray(list(p_series), dtype=float)
    if ps.size == 0:
        raise ValueError("visibility needs a nonempty series")
    if np.any(ps < 0):
        raise ValueError("probabilities must be nonnegative")
    hi, lo = float(ps.max()), float(ps.min())
    if hi + lo == 0.0:
        raise ValueError("visibility is undefined for an all-zero series")
    return (hi - lo) / (hi + lo)


@dataclass(frozen=True)
class ImageMaps:
    """Ground-truth transmission and phase grids of the scanned object."""

    t_map: np.ndarray
    gamma_map: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t_map, dtype=float)
        g = np.asarray(self.gamma_map, dtype=float)
        if t.ndim != 2 or g.ndim != 2:
            raise ValueError("maps must be two-dimensional grids")
        if t.shape != g.shape:
            raise ValueError(f"map shapes differ: {t.shape} vs {g.shape}")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(g))):
            raise ValueError("maps contain non-finite values")
        if np.any(t < 0) or np.any(t > 1):
            raise ValueError("transmission map values must lie in [0, 1]")
        t = t.copy()
        g = g.copy()
        t.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "t_map", t)
        object.__setattr__(self, "gamma_map", g)

    @property
    def height(self) -> int:
        return self.t_map.shape[0]

    @property
    def width(self) -> int:
        return self.t_map.shape[1]


@dataclass(frozen=True)
class ScanResult:
    """Per-pixel estimates; failed pixels carry NaN and an error message."""

    t_hat: np.ndarray
    gamma_hat: np.ndarray
    stderr_t: np.ndarray
    stderr_gamma: np.ndarray
    degenerate: np.ndarray
    errors: tuple[tuple[int, int, str], ...]

    @property
    def ok(self) -> bool:
        return not self.errors


def _scan_pixel(probe, mm, pairs, t, gamma, shots, seed, row, col, method):
    obj = ObjectParams(t, gamma)
    sig = run_pipeline(probe, obj, mm)
    points = []
    if shots:
        rng = np.random.default_rng([seed, row, col])
    for mp in pairs:
        p_h, _ = detection_probabilities(sig, mp)
        if shots:
            p_h = float(rng.binomial(shots, min(max(p_h, 0.0), 1.0))) / shots
        points.append((mp.phi, p_h))
    if method == "auto":
        method = "two-point" if len(points) == 2 else "least-squares"
    return estimate_object(points, method=method, shots=shots)


def scan_workers(max_workers: int | None = None) -> int:
    """Worker count for the image scan: argument, then the UQI_THREADS
    environment variable, then available parallelism."""
    if max_workers is not None:
        return max(1, int(max_workers))
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def image_scan(
    maps: ImageMaps,
    phi_sweep,
    shots: int = 0,
    seed: int = 0,
    method: str = "auto",
    max_workers: int | None = None,
) -> ScanResult:
    """Run the full pipeline and estimator independently for every pixel.

    Analytic mode (``shots=0``) inverts exact probabilities; shot mode
    draws per-pixel binomial counts from streams derived from the root
    seed, so results do not depend on scheduling.  Pixel failures are
    recorded without aborting the scan.  Output grids match the input
    shape and are ordered by pixel index regardless of execution order.
    """
    phis = [float(p) for p in phi_sweep]
    if not phis:
        raise ValueError("phase sweep must be nonempty")
    shots = int(shots) if shots else 0
    probe = prepare_probe()
    mm = mode_mixer()
    pairs = [measurement_pair(p) for p in phis]

    h, w = maps.height, maps.width
    t_hat = np.full((h, w), np.nan)
    gamma_hat = np.full((h, w), np.nan)
    stderr_t = np.full((h, w), np.nan)
    stderr_gamma = np.full((h, w), np.nan)
    degenerate = np.zeros((h, w), dtype=bool)
    errors: list[tuple[int, int, str]] = []

    def work(pix):
        row, col = pix
        try:
            est = _scan_pixel(
                probe, mm, pairs,
                maps.t_map[row, col], maps.gamma_map[row, col],
                shots, seed, row, col, method,
            )
            return row, col, est, None
        except Exception as exc:  # recorded per pixel, scan continues
            return row, col, None, str(exc)

    pixels = [(r, c) for r in range(h) for c in range(w)]
    workers = scan_workers(max_workers)
    if workers > 1 and len(pixels) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, pixels))
    else:
        results = [work(p) for p in pixels]

    for row, col, est, err in results:
        if err is not None:
            errors.append((row, col, err))
            continue
        t_hat[row, col] = est.t_hat
        gamma_hat[row, col] = est.gamma_hat
        if est.stderr_t is not None:
            stderr_t[row, col] = est.stderr_t
        if est.stderr_gamma is not None:
            stderr_gamma[row, col] = est.stderr_gamma
        degenerate[row, col] = est.degenerate

    return ScanResult(
        t_hat=t_hat,
        gamma_hat=gamma_hat,
        stderr_t=stderr_t,
        stderr_gamma=stderr_gamma,
        degenerate=degenerate,
        errors=tuple(errors),
    )
