"""Command-line entry point: per-surface verification suites and sweeps.

Subcommands:
  catalog    list the surface catalog (optionally as JSON)
  check      run the full identity/inequality suite for one surface
  lemma34    random sweep of the symmetric-matrix trace bound
  variation  first-variation oracle with seeded random variations

Exit codes: 0 all checks pass, 1 some check failed, 2 unknown surface or
invalid dimensions, 3 resolution or step out of range, 4 unwritable output.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import geometry, immersion, inequalities, operators, variational
from .errors import CompactnessRequiredError, HypothesisViolationError
from .quadrature import build_grid
from .report import CheckReport, RunReport

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_BAD_SURFACE = 2
EXIT_BAD_RESOLUTION = 3
EXIT_BAD_OUTPUT = 4

RESOLUTION_RANGE = (8, 4096)

DEFAULT_TOLERANCES = {
    "constraint": 1e-10,
    "t_split": 1e-10,
    "frame_orthonormality": 1e-10,
    "sigma_weingarten": 1e-9,
    "trace_identities": 1e-9,
    "gauss": 1e-8,
    "codazzi": 1e-7,
    "dt_structure": 1e-7,
    "k_consistency": 1e-8,
    "gauss_bonnet": 1e-5,
    "el_residual": 1e-6,
    "huisken": 1e-6,
    "simons": 1e-4,
    "lemma1": 1e-5,
    "cor1": 1e-5,
    "main_inequality": 1e-5,
    "guo_yin": 1e-5,
    "prop3": 1e-6,
    "variation": 1e-4,
    "lemma34": 1e-12,
}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


def parse_grid(text: str) -> tuple[int, int]:
    try:
        parts = [int(p) for p in text.lower().split("x")]
    except ValueError:
        raise CliError(f"cannot parse grid specification {text!r}", EXIT_BAD_RESOLUTION)
    if len(parts) != 2:
        raise CliError("grid must be NUxNV", EXIT_BAD_RESOLUTION)
    for r in parts:
        if not RESOLUTION_RANGE[0] <= r <= RESOLUTION_RANGE[1]:
            raise CliError(
                f"resolution {r} outside [{RESOLUTION_RANGE[0]}, {RESOLUTION_RANGE[1]}]",
                EXIT_BAD_RESOLUTION,
            )
    return tuple(parts)


def load_config_file(path: str) -> dict:
    """Flat key=value configuration; later command-line flags override."""
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise CliError(f"bad config line: {line!r}", EXIT_BAD_SURFACE)
                key, _, val = line.partition("=")
                values[key.strip()] = val.strip()
    except OSError as exc:
        raise CliError(f"cannot read config file: {exc}", EXIT_BAD_SURFACE)
    return values


def build_surface(args) -> immersion.Immersion:
    name = args.surface
    if name not in immersion.CATALOG:
        raise CliError(
            f"unknown surface {name!r}; see the catalog subcommand", EXIT_BAD_SURFACE
        )
    params = {}
    try:
        if name == "slice_sphere":
            params = {"n": int(args.n), "t0": args.t0}
        elif name in ("clifford_torus", "veronese"):
            params = {"t0": args.t0}
        elif name == "small_sphere":
            if args.rho is None:
                raise ValueError("small_sphere needs --rho")
            params = {"rho": args.rho, "t0": args.t0}
        elif name == "graph_torus":
            if args.eps is None:
                raise ValueError("graph_torus needs --eps")
            params = {"eps": args.eps}
        elif name == "cylinder_patch":
            if args.r is None:
                raise ValueError("cylinder_patch needs --r")
            params = {"r": args.r}
        return immersion.catalog(name, **params)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_BAD_SURFACE)


def resolve_tolerances(overrides: list[str] | None) -> dict:
    tols = dict(DEFAULT_TOLERANCES)
    for item in overrides or []:
        if "=" not in item:
            raise CliError(f"--tol expects NAME=VALUE, got {item!r}", EXIT_BAD_SURFACE)
        name, _, val = item.partition("=")
        try:
            value = float(val)
        except ValueError:
            raise CliError(f"bad tolerance value in {item!r}", EXIT_BAD_SURFACE)
        if value <= 0:
            raise CliError("tolerances must be positive", EXIT_BAD_SURFACE)
        tols[name.strip()] = value
    return tols


def write_report(report: RunReport, out: str | None, fmt: str) -> None:
    text = report.to_json() if fmt == "json" else report.to_csv()
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text)
    except OSError as exc:
        raise CliError(f"cannot write report: {exc}", EXIT_BAD_OUTPUT)


# ---------------------------------------------------------------------------
# The per-surface suite
# ---------------------------------------------------------------------------


def run_check_suite(imm, resolution, seed, tols) -> RunReport:
    grid = build_grid(imm.domain, resolution)
    ws = operators.get_workspace(imm, grid)
    geo = ws.geo
    report = RunReport(
        config={
            "command": "check",
            "surface": imm.name,
            "params": imm.params,
            "grid": list(resolution),
            "seed": seed,
            "tolerances": {k: tols[k] for k in sorted(tols)},
        }
    )

    def identity(name, value, tol, notes=""):
        report.add(CheckReport(
            name=name, kind="identity", lhs=value, rhs=0.0, residual=value,
            tolerance=tol, passed=abs(value) <= tol, notes=notes,
        ))

    # constraint and splitting identities
    sphere_norm = np.linalg.norm(geo.jets[0][..., :-1], axis=-1)
    identity("constraint", float(np.abs(sphere_norm - 1.0).max()), tols["constraint"])
    identity("t_split", float(np.abs(geo.T_sq + geo.N_sq - 1.0).max()), tols["t_split"])

    frames = np.concatenate([geo.tangent_frame, geo.normal_frame], axis=1)
    gram = np.einsum("nad,nbd->nab", frames, frames, optimize=True)
    eye = np.eye(gram.shape[1])
    frame_dev = float(np.abs(gram - eye).max())
    con_dev = float(np.abs(np.einsum("nad,nd->na", frames, geo.nu, optimize=True)).max())
    identity("frame_orthonormality", max(frame_dev, con_dev), tols["frame_orthonormality"])

    recon = np.einsum("npab,npd->nabd", geo.weingarten, geo.normal_frame, optimize=True)
    identity(
        "sigma_weingarten",
        float(np.abs(recon - geo.sigma_frame).max()),
        tols["sigma_weingarten"],
        notes="sigma reconstructed from Weingarten coefficients and the normal frame",
    )

    m = imm.param_dim
    tr_phi = float(np.abs(np.einsum("npaa->np", geo.phi_alpha)).max())
    phi_identity = float(np.abs(geo.phi_sq - (geo.sigma_sq - m * geo.H**2)).max())
    tr_ah = float(np.abs(m * geo.H**2 - np.einsum("naa->n", geo.A_h)).max())
    identity("trace_identities", max(tr_phi, phi_identity, tr_ah), tols["trace_identities"])

    identity("gauss", float(geometry.gauss_residual_batch(geo).max()), tols["gauss"])
    identity("codazzi", float(geometry.codazzi_residual_batch(geo).max()), tols["codazzi"])
    identity("dt_structure", float(geometry.dt_compatibility_residual_batch(geo).max()),
             tols["dt_structure"])
    identity("k_consistency", float(np.abs(geo.K - geo.K_brioschi).max()),
             tols["k_consistency"])

    def skipped(name, kind):
        report.add(CheckReport(
            name=name, kind=kind, lhs=0.0, rhs=0.0, residual=0.0,
            tolerance=0.0, passed=True, notes="skipped: non-compact",
        ))

    rng = np.random.default_rng(seed)

    if imm.compact:
        gb = inequalities.gauss_bonnet(imm, grid, tol=tols["gauss_bonnet"])
        report.add(CheckReport(
            name="gauss_bonnet", kind="identity", lhs=gb.lhs, rhs=gb.rhs,
            residual=gb.slack, tolerance=gb.tolerance,
            passed=abs(gb.slack) <= gb.tolerance * (1.0 + abs(gb.rhs)),
        ))
    else:
        skipped("gauss_bonnet", "identity")

    _, el_max = variational.el_residual(imm, grid)
    cert_threshold = 1e-6 * (1.0 + float(geo.sigma_sq.max()))
    certified = el_max <= cert_threshold
    if imm.claims("stationary"):
        identity("el_residual", el_max, tols["el_residual"],
                 notes="surface is a claimed stationary point")
    else:
        report.add(CheckReport(
            name="el_residual", kind="identity", lhs=el_max, rhs=0.0,
            residual=el_max, tolerance=cert_threshold, passed=True,
            notes="not a claimed stationary point; value recorded",
        ))

    slack, min_slack = variational.huisken_check(imm, grid)
    report.add(CheckReport(
        name="huisken", kind="inequality", lhs=-min_slack, rhs=0.0,
        residual=min_slack, tolerance=tols["huisken"],
        passed=min_slack >= -tols["huisken"],
    ))

    _, simons_max = variational.simons_residual(imm, grid)
    identity("simons", simons_max, tols["simons"])

    if imm.compact:
        worst_l1 = 0.0
        worst_c1 = 0.0
        for _ in range(20):
            f = operators.random_scalar_field(imm, grid, rng)
            xi = operators.random_normal_field(imm, grid, rng)
            worst_l1 = max(worst_l1, operators.lemma1_residual(imm, grid, f, xi))
            worst_c1 = max(worst_c1, operators.cor1_residual(imm, grid, xi))
        identity("lemma1", worst_l1, tols["lemma1"], notes="20 seeded (f, xi) pairs")
        identity("cor1", worst_c1, tols["cor1"], notes="20 seeded xi fields")
    else:
        skipped("lemma1", "identity")
        skipped("cor1", "identity")

    if imm.compact:
        main = inequalities.main_inequality(imm, grid, tol=tols["main_inequality"])
        report.add(CheckReport(
            name="main_inequality", kind="inequality", lhs=main.lhs, rhs=main.rhs,
            residual=main.slack, tolerance=main.tolerance, passed=main.holds,
            notes=(f"equality={main.equality}; certified={main.stationarity_certified}"
                   + (f"; {main.notes}" if main.notes else "")),
        ))

        t_max = float(np.sqrt(geo.T_sq.max()))
        if t_max <= inequalities.SLICE_T_TOL:
            n_eff = max(3, imm.sphere_dim)
            gy = inequalities.guo_yin_inequality(imm, grid, n_eff, tol=tols["guo_yin"])
            report.add(CheckReport(
                name=gy.name, kind="inequality", lhs=gy.lhs, rhs=gy.rhs,
                residual=gy.slack, tolerance=gy.tolerance, passed=gy.holds,
                notes=f"equality={gy.equality}",
            ))
        else:
            report.add(CheckReport(
                name="guo_yin", kind="inequality", lhs=0.0, rhs=0.0, residual=0.0,
                tolerance=0.0, passed=True,
                notes=f"skipped: not contained in a slice (max |T| = {t_max:.3e})",
            ))

        if certified:
            p3 = inequalities.prop3_inequality(imm, grid, tol=tols["prop3"])
            report.add(CheckReport(
                name="prop3", kind="inequality", lhs=p3.lhs, rhs=p3.rhs,
                residual=p3.slack, tolerance=p3.tolerance, passed=p3.holds,
                notes=p3.notes,
            ))
        else:
            report.add(CheckReport(
                name="prop3", kind="inequality", lhs=0.0, rhs=0.0, residual=0.0,
                tolerance=0.0, passed=True,
                notes=f"skipped: stationarity not certified (max |E| = {el_max:.3e})",
            ))

        audit = inequalities.equality_case_audit(imm, grid)
        report.add(CheckReport(
            name="equality_case_audit", kind="equality-case",
            lhs=audit.gap_integral, rhs=0.0, residual=audit.gap_integral,
            tolerance=0.0, passed=True,
            notes=json.dumps(audit.as_dict(), sort_keys=True),
        ))
    else:
        skipped("main_inequality", "inequality")
        skipped("guo_yin", "inequality")
        skipped("prop3", "inequality")
        skipped("equality_case_audit", "equality-case")

    return report


def run_lemma34(trials, p, m, seed, tols) -> RunReport:
    if p < 2 or m < 1 or trials < 1:
        raise CliError("lemma34 needs trials >= 1, p >= 2, m >= 1", EXIT_BAD_SURFACE)
    report = RunReport(config={
        "command": "lemma34", "trials": trials, "p": p, "m": m, "seed": seed,
        "tolerances": {"lemma34": tols["lemma34"]},
    })
    min_slack, worst = variational.matrix_lemma_sweep(trials, p, m, seed)
    report.add(CheckReport(
        name="lemma34_sweep", kind="inequality", lhs=-min_slack, rhs=0.0,
        residual=min_slack, tolerance=tols["lemma34"],
        passed=min_slack >= -tols["lemma34"],
        notes=f"min slack over {trials} seeded families at {worst}",
    ))
    b1 = np.diag([1.0, -1.0])
    b2 = np.array([[0.0, 1.0], [1.0, 0.0]])
    lhs, rhs, slack = variational.matrix_lemma_check([b1, b2])
    report.add(CheckReport(
        name="lemma34_extremal", kind="equality-case", lhs=lhs, rhs=rhs,
        residual=slack, tolerance=tols["lemma34"],
        passed=abs(lhs - 24.0) <= tols["lemma34"] and abs(slack) <= tols["lemma34"],
        notes="regression pair diag(1,-1), antidiag(1,1)",
    ))
    return report


def run_variation(imm, resolution, seed, delta, tols) -> RunReport:
    if not imm.compact:
        raise CliError("first-variation checks need a compact surface", EXIT_BAD_SURFACE)
    lo, hi = variational.FD_DELTA_RANGE
    if not lo <= delta <= hi:
        raise CliError(f"step {delta} outside [{lo}, {hi}]", EXIT_BAD_RESOLUTION)
    grid = build_grid(imm.domain, resolution)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(10):
        var = variational.random_variation(imm, grid, rng)
        _, _, res = variational.first_variation_check(imm, grid, var, delta=delta)
        worst = max(worst, res)
    report = RunReport(config={
        "command": "variation", "surface": imm.name, "params": imm.params,
        "grid": list(resolution), "seed": seed, "delta": delta,
        "tolerances": {"variation": tols["variation"]},
    })
    report.add(CheckReport(
        name="first_variation", kind="identity", lhs=worst, rhs=0.0,
        residual=worst, tolerance=tols["variation"],
        passed=worst <= tols["variation"], notes="max over 10 seeded variations",
    ))
    return report


# ---------------------------------------------------------------------------
# Argument parsing and dispatch
# ---------------------------------------------------------------------------


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sphereline",
        description="Verification suite for surfaces immersed in the sphere-line product",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    cat = sub.add_parser("catalog", help="list the surface catalog")
    cat.add_argument("--machine", action="store_true", help="emit a JSON array")

    def common(p):
        p.add_argument("--surface", required=True)
        p.add_argument("--n", type=int, default=2, help="sphere dimension (slice_sphere)")
        p.add_argument("--t0", type=float, default=0.0)
        p.add_argument("--rho", type=float, default=None)
        p.add_argument("--eps", type=float, default=None)
        p.add_argument("--r", type=float, default=None)
        p.add_argument("--grid", default=None, help="resolution NUxNV")
        p.add_argument("--fd-step", type=float, default=None)
        p.add_argument("--seed", type=int, default=12345)
        p.add_argument("--tol", action="append", default=None, metavar="NAME=VALUE")
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--config", default=None)

    chk = sub.add_parser("check", help="run the full verification suite")
    common(chk)

    lem = sub.add_parser("lemma34", help="random sweep of the matrix trace bound")
    lem.add_argument("--trials", type=int, default=100000)
    lem.add_argument("--p", type=int, default=4)
    lem.add_argument("--m", type=int, default=3)
    lem.add_argument("--seed", type=int, default=12345)
    lem.add_argument("--tol", action="append", default=None, metavar="NAME=VALUE")
    lem.add_argument("--out", default=None)
    lem.add_argument("--format", choices=("json", "csv"), default="json")

    var = sub.add_parser("variation", help="first-variation finite-difference oracle")
    common(var)
    var.add_argument("--delta", type=float, default=1e-3)

    return parser


def apply_config_file(args) -> None:
    if getattr(args, "config", None) is None:
        return
    values = load_config_file(args.config)
    casts = {"n": int, "seed": int, "t0": float, "rho": float, "eps": float,
             "r": float, "delta": float, "fd_step": float}
    for key, raw in values.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            continue
        current = getattr(args, attr)
        default = _parser_default(attr)
        if current != default:
            continue  # explicit flag wins over the file
        if attr == "tol":
            setattr(args, attr, raw.split())
        elif attr in casts:
            setattr(args, attr, casts[attr](raw))
        else:
            setattr(args, attr, raw)


_DEFAULTS_CACHE: dict = {}


def _parser_default(attr: str):
    if not _DEFAULTS_CACHE:
        parser = make_parser()
        ns = parser.parse_args(["check", "--surface", "clifford_torus"])
        for k, v in vars(ns).items():
            _DEFAULTS_CACHE[k] = v
        _DEFAULTS_CACHE["surface"] = None
    return _DEFAULTS_CACHE.get(attr)


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "catalog":
            entries = immersion.catalog_entries()
            if args.machine:
                print(json.dumps(entries, indent=2))
            else:
                for e in entries:
                    props = " ".join(e["properties"]) or "-"
                    chi = e["chi"] if e["chi"] is not None else "n/a"
                    print(f"{e['name']:16s} chi={chi!s:4s} sphere_dim={e['sphere_dim']} "
                          f"compact={e['compact']} {props}")
            return EXIT_PASS

        tols = resolve_tolerances(getattr(args, "tol", None))

        if args.command == "lemma34":
            report = run_lemma34(args.trials, args.p, args.m, args.seed, tols)
        else:
            apply_config_file(args)
            imm = build_surface(args)
            resolution = (
                parse_grid(args.grid) if args.grid else imm.default_resolution
            )
            for r in resolution:
                if not RESOLUTION_RANGE[0] <= r <= RESOLUTION_RANGE[1]:
                    raise CliError("default resolution outside range", EXIT_BAD_RESOLUTION)
            if args.command == "check":
                report = run_check_suite(imm, resolution, args.seed, tols)
            else:
                report = run_variation(imm, resolution, args.seed, args.delta, tols)

        write_report(report, args.out, args.format)
        return EXIT_PASS if report.passed else EXIT_FAIL
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (CompactnessRequiredError, HypothesisViolationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_SURFACE


if __name__ == "__main__":
    sys.exit(main())
