"""Command-line interface: experiment drivers with CSV/JSON output.

Subcommands
-----------
probe          dump the prepared probe state (16x16 density matrix)
chi            dump the object channel's chi matrix for given (T, gamma)
probabilities  detector probabilities over a (T, gamma, phi) grid
sweep          phase sweep at fixed (T, gamma) plus recovered estimate
werner         Werner-probe experiment: modulation, visibility, PPT
image          reconstruct (T, gamma) maps pixel by pixel
schmidt        operator-Schmidt data of the probe across idlers|signals

All randomness is seeded (default seed 42, fixed, never time-based);
identical configuration and seed give byte-identical output.  Angles are
radians unless ``--degrees`` is given, which converts inputs only.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .channels import ObjectParams, chi_matrix, mode_mixer, normalize_angle, object_channel
from .circuit import (
    detection_probabilities,
    measurement_pair,
    prepare_probe,
    prepare_werner,
    run_pipeline,
)
from .qcore import hermitian_eigenvalues, partial_transpose
from .tomography import ImageMaps, estimate_object, image_scan, operator_schmidt, visibility

DEFAULT_SEED = 42
_DEG = np.pi / 180.0


class ConfigError(Exception):
    """Invalid configuration; the process exits with status 2."""


def _float_list(text: str, name: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise ConfigError(f"could not parse {name} list {text!r}") from None
    if not values:
        raise ConfigError(f"{name} list is empty")
    return values


def _resolve_phis(args) -> list[float]:
    if getattr(args, "phi", None) is not None and getattr(args, "phi_points", None) is not None:
        raise ConfigError("give either --phi or --phi-points, not both")
    if getattr(args, "phi", None) is not None:
        phis = _float_list(args.phi, "phi")
        if args.degrees:
            phis = [p * _DEG for p in phis]
        return phis
    n = args.phi_points if getattr(args, "phi_points", None) is not None else args.default_phi_points
    if n < 1:
        raise ConfigError("phi point count must be at least 1")
    return [2.0 * np.pi * k / n for k in range(n)]


def _round15(x: float) -> float:
    return float(f"{x:.15g}")


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(float(v))  # shortest round-trip form, also for numpy scalars
    return str(v)


def _write_output(columns, records, config, args) -> None:
    seed = getattr(args, "seed", None)
    if args.format == "json":
        doc = {
            "config": config,
            "results": [dict(zip(columns, rec)) for rec in records],
            "metadata": {"version": __version__, "seed": seed},
        }
        text = json.dumps(doc, indent=2) + "\n"
    else:
        buf = []
        buf.append(",".join(columns))
        for rec in records:
            buf.append(",".join(_csv_cell(v) for v in rec))
        text = "\n".join(buf) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _matrix_records(mat) -> list[tuple]:
    recs = []
    for i in range(mat.shape[0]):
        for j in range(mat.shape[1]):
            recs.append((i, j, _round15(mat[i, j].real), _round15(mat[i, j].imag)))
    return recs


def cmd_probe(args) -> int:
    rho = prepare_probe().rho
    config = {"command": "probe", "format": args.format}
    _write_output(("row", "col", "re", "im"), _matrix_records(rho.mat), config, args)
    return 0


def _object_params(args) -> ObjectParams:
    gamma = args.gamma * _DEG if args.degrees else args.gamma
    try:
        return ObjectParams(args.T, gamma)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cmd_chi(args) -> int:
    params = _object_params(args)
    chi = chi_matrix(object_channel(params))
    config = {
        "command": "chi",
        "t": params.t,
        "gamma": params.gamma,
        "format": args.format,
    }
    _write_output(("row", "col", "re", "im"), _matrix_records(chi.entries), config, args)
    return 0


def cmd_schmidt(args) -> int:
    sd = operator_schmidt(prepare_probe().rho, (("i1", "i2"), ("s1", "s2")))
    recs: list[tuple] = []
    for ell, (r, herm) in enumerate(zip(sd.r, sd.hermitian)):
        recs.append((ell, "coeff", None, None, _round15(float(r)), 0.0, herm))
    for ell, ops in ((0, sd.a_ops), (1, sd.b_ops)):
        kind = "a_op" if ell == 0 else "b_op"
        for term, op in enumerate(ops):
            for i in range(op.shape[0]):
                for j in range(op.shape[1]):
                    recs.append(
                        (term, kind, i, j, _round15(op[i, j].real), _round15(op[i, j].imag), None)
                    )
    config = {"command": "schmidt", "bipartition": [["i1", "i2"], ["s1", "s2"]], "format": args.format}
    _write_output(("term", "kind", "row", "col", "re", "im", "hermitian"), recs, config, args)
    return 0


def cmd_probabilities(args) -> int:
    ts = _float_list(args.T, "T")
    gammas = _float_list(args.gamma, "gamma")
    if args.degrees:
        gammas = [g * _DEG for g in gammas]
    phis = _resolve_phis(args)
    if args.shots < 0:
        raise ConfigError("shots must be nonnegative")
    probe = prepare_probe()
    mm = mode_mixer()
    pairs = {p: measurement_pair(p) for p in phis}
    recs = []
    idx = 0
    for t in ts:
        for g in gammas:
            sig = run_pipeline(probe, ObjectParams(t, g), mm)
            for p in phis:
                p_h, p_g = detection_probabilities(sig, pairs[p])
                if args.shots:
                    rng = np.random.default_rng([args.seed, idx])
                    n_h = int(rng.binomial(args.shots, min(max(p_h, 0.0), 1.0)))
                    p_h = n_h / args.shots
                    p_g = 1.0 - p_h
                recs.append((t, g, p, p_h, p_g))
                idx += 1
    config = {
        "command": "probabilities",
        "t": ts,
        "gamma": gammas,
        "phi": phis,
        "shots": args.shots,
        "seed": args.seed,
        "format": args.format,
    }
    _write_output(("t", "gamma", "phi", "p_h", "p_g"), recs, config, args)
    return 0


_SWEEP_COLUMNS = (
    "record", "phi", "p_h", "p_g",
    "t_hat", "gamma_hat", "stderr_t", "stderr_gamma", "method", "degenerate",
)


def cmd_sweep(args) -> int:
    params = _object_params(args)
    phis = _resolve_phis(args)
    if len(phis) < 2:
        raise ConfigError("a sweep needs at least two phase points")
    if args.shots < 0:
        raise ConfigError("shots must be nonnegative")
    method = args.method
    if method == "auto":
        method = "two-point" if len(phis) == 2 else "least-squares"
    sig = run_pipeline(prepare_probe(), params, mode_mixer())
    points = []
    recs = []
    for i, p in enumerate(phis):
        p_h, p_g = detection_probabilities(sig, measurement_pair(p))
        if args.shots:
            rng = np.random.default_rng([args.seed, i])
            n_h = int(rng.binomial(args.shots, min(max(p_h, 0.0), 1.0)))
            p_h = n_h / args.shots
            p_g = 1.0 - p_h
        points.append((p, p_h))
        recs.append(("sample", p, p_h, p_g, None, None, None, None, None, None))
    try:
        est = estimate_object(points, method=method, shots=args.shots or None)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    recs.append(
        (
            "estimate", None, None, None,
            est.t_hat,
            None if np.isnan(est.gamma_hat) else est.gamma_hat,
            est.stderr_t, est.stderr_gamma, est.method, est.degenerate,
        )
    )
    config = {
        "command": "sweep",
        "t": params.t,
        "gamma": params.gamma,
        "phi": phis,
        "shots": args.shots,
        "seed": args.seed,
        "method": method,
        "format": args.format,
    }
    _write_output(_SWEEP_COLUMNS, recs, config, args)
    return 0


_WERNER_GAMMA_POINTS = 24


def cmd_werner(args) -> int:
    xis = _float_list(args.xi, "xi")
    for xi in xis:
        if not 0.0 <= xi <= 1.0:
            raise ConfigError(f"xi must lie in [0, 1], got {xi}")
    t = args.T
    if not 0.0 <= t <= 1.0:
        raise ConfigError(f"T must lie in [0, 1], got {t}")
    gammas = np.array([2.0 * np.pi * k / _WERNER_GAMMA_POINTS for k in range(_WERNER_GAMMA_POINTS)])
    mm = mode_mixer()
    mp0 = measurement_pair(0.0)
    design = np.column_stack([np.ones_like(gammas), np.cos(gammas)])
    recs = []
    for xi in xis:
        probe = prepare_werner(xi)
        ph = np.empty(len(gammas))
        pg = np.empty(len(gammas))
        for i, g in enumerate(gammas):
            sig = run_pipeline(probe, ObjectParams(t, g), mm)
            ph[i], pg[i] = detection_probabilities(sig, mp0)
        coef, *_ = np.linalg.lstsq(design, ph, rcond=None)
        offset_raw, half_amp = float(coef[0]), float(coef[1])
        amplitude = 2.0 * abs(half_amp)
        clicks = ph + pg
        cond = ph / clicks
        coef_c, *_ = np.linalg.lstsq(design, cond, rcond=None)
        pt = partial_transpose(probe.rho, ["s1", "i1"])
        ppt_min = float(hermitian_eigenvalues(pt)[0])
        recs.append(
            (
                xi,
                amplitude,
                offset_raw,
                float(coef_c[0]),
                float(np.mean(1.0 - clicks)),
                visibility(ph),
                visibility(cond),
                ppt_min,
            )
        )
    config = {"command": "werner", "xi": xis, "t": t, "gamma_points": _WERNER_GAMMA_POINTS, "format": args.format}
    _write_output(
        (
            "xi", "modulation_amplitude", "offset_raw", "offset_conditioned",
            "no_click", "visibility_raw", "visibility_conditioned", "ppt_min_eigenvalue",
        ),
        recs,
        config,
        args,
    )
    return 0


def _load_map(path: str, name: str) -> np.ndarray:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            grid = np.loadtxt(fh, delimiter=",", ndmin=2)
    except OSError:
        raise
    except ValueError as exc:
        raise ConfigError(f"could not parse {name} map {path!r}: {exc}") from None
    return grid


def cmd_image(args) -> int:
    t_map = _load_map(args.t_map, "transmission")
    gamma_map = _load_map(args.gamma_map, "phase")
    if args.degrees:
        gamma_map = gamma_map * _DEG
    try:
        maps = ImageMaps(t_map, gamma_map)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    phis = _resolve_phis(args)
    if len(phis) < 2:
        raise ConfigError("image reconstruction needs at least two phase points")
    if args.shots < 0:
        raise ConfigError("shots must be nonnegative")
    scan = image_scan(maps, phis, shots=args.shots, seed=args.seed, method=args.method)
    failed = {(r, c): msg for r, c, msg in scan.errors}
    recs = []
    for r in range(maps.height):
        for c in range(maps.width):
            if (r, c) in failed:
                recs.append((r, c, None, None, None, None, None, None, None, failed[(r, c)]))
                continue
            t_hat = float(scan.t_hat[r, c])
            g_hat = scan.gamma_hat[r, c]
            deg = bool(scan.degenerate[r, c])
            t_err = t_hat - float(maps.t_map[r, c])
            g_err = None if np.isnan(g_hat) else normalize_angle(float(g_hat) - float(maps.gamma_map[r, c]))
            recs.append(
                (
                    r, c, t_hat,
                    None if np.isnan(g_hat) else float(g_hat),
                    None if np.isnan(scan.stderr_t[r, c]) else float(scan.stderr_t[r, c]),
                    None if np.isnan(scan.stderr_gamma[r, c]) else float(scan.stderr_gamma[r, c]),
                    deg, t_err, g_err, "",
                )
            )
    config = {
        "command": "image",
        "t_map": args.t_map,
        "gamma_map": args.gamma_map,
        "phi": phis,
        "shots": args.shots,
        "seed": args.seed,
        "method": args.method,
        "format": args.format,
    }
    _write_output(
        (
            "row", "col", "t_hat", "gamma_hat", "stderr_t", "stderr_gamma",
            "degenerate", "t_error", "gamma_error", "status",
        ),
        recs,
        config,
        args,
    )
    return 0 if scan.ok else 1


def _add_output_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="output format")


def _add_angle_option(p: argparse.ArgumentParser) -> None:
    p.add_argument("--degrees", action="store_true", help="interpret input angles as degrees")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uqi",
        description="Density-matrix simulator for imaging with undetected photons.",
    )
    parser.add_argument("--version", action="version", version=f"uqi {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("probe", help="dump the prepared probe density matrix")
    _add_output_options(p)
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("chi", help="dump the object channel's chi matrix")
    p.add_argument("--T", type=float, required=True, help="transmission amplitude in [0, 1]")
    p.add_argument("--gamma", type=float, default=0.0, help="transmission phase")
    _add_angle_option(p)
    _add_output_options(p)
    p.set_defaults(func=cmd_chi)

    p = sub.add_parser("schmidt", help="operator-Schmidt data of the probe")
    _add_output_options(p)
    p.set_defaults(func=cmd_schmidt)

    p = sub.add_parser("probabilities", help="detector probabilities over a parameter grid")
    p.add_argument("--T", required=True, help="comma list of transmission amplitudes")
    p.add_argument("--gamma", default="0", help="comma list of transmission phases")
    p.add_argument("--phi", default=None, help="comma list of measurement phases")
    p.add_argument("--phi-points", type=int, default=None, help="number of uniform phases in [0, 2pi)")
    p.add_argument("--shots", type=int, default=0, help="shots per grid point (0 = analytic)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="root random seed")
    _add_angle_option(p)
    _add_output_options(p)
    p.set_defaults(func=cmd_probabilities, default_phi_points=1)

    p = sub.add_parser("sweep", help="phase sweep and object-parameter recovery")
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--phi", default=None, help="comma list of measurement phases")
    p.add_argument("--phi-points", type=int, default=None, help="number of uniform phases in [0, 2pi)")
    p.add_argument("--shots", type=int, default=0, help="shots per phase point (0 = analytic)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--method", choices=("auto", "two-point", "least-squares"), default="auto")
    _add_angle_option(p)
    _add_output_options(p)
    p.set_defaults(func=cmd_sweep, default_phi_points=12)

    p = sub.add_parser("werner", help="Werner-probe modulation, visibility and PPT scan")
    p.add_argument("--xi", default="0,0.25,0.5,0.6666666666666666,0.75,0.9,1", help="comma list of mixing weights")
    p.add_argument("--T", type=float, default=1.0, help="object transmission used for the scan")
    _add_output_options(p)
    p.set_defaults(func=cmd_werner)

    p = sub.add_parser("image", help="per-pixel reconstruction of (T, gamma) maps")
    p.add_argument("--t-map", required=True, help="headerless CSV grid of transmissions in [0, 1]")
    p.add_argument("--gamma-map", required=True, help="headerless CSV grid of phases (radians)")
    p.add_argument("--phi", default=None, help="comma list of measurement phases")
    p.add_argument("--phi-points", type=int, default=None, help="number of uniform phases in [0, 2pi)")
    p.add_argument("--shots", type=int, default=0, help="shots per phase point (0 = analytic)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--method", choices=("auto", "two-point", "least-squares"), default="auto")
    _add_angle_option(p)
    _add_output_options(p)
    p.set_defaults(func=cmd_image, default_phi_points=8)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"uqi: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"uqi: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"uqi: {exc}", file=sys.stderr)
        return 3


def entry() -> None:
    raise SystemExit(main(sys.argv[1:]))


if __name__ == "__main__":
    entry()
