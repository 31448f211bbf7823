"""Command-line front end: parse definition files, dispatch verifications and
demos, and emit deterministic JSON/CSV reports.

Subcommands: verify-structure, reeb, legendrian, hddw, ideal-gas, bjorken.
Exit codes: 0 all checks pass, 1 any check fails, 2 usage/parse error,
3 a zero test came back inconclusive (and nothing failed outright).
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .config import RunConfig, default_seed
from .errors import (
    KontactError,
    ParseError,
    SampleDomainEmpty,
    SingularSystem,
    ZeroTestInconclusive,
)
from .expr import parse_expr
from .fileio import (
    BuiltinStructure,
    load_kfunction_file,
    load_section_file,
    load_structure_file,
    resolve_structure,
)
from .hddw import (
    KContactHamiltonianSystem,
    expected_nullspace_dim,
    section_residual,
    solve_hddw_at_point,
)
from .idealgas import run_isentropic
from .kcontact import (
    canonical_structure,
    check_polarization,
    check_reeb_commutation,
    compute_reeb,
    verify_kcontact,
)
from .legendrian import build_parametrization, check_compatibility, verify_isotropic
from .zerotest import sample_points
from .bjorken import DEFAULT_T_PROFILE, full_pgt_demo

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass
class Check:
    name: str
    verdict: str
    max_residual: float | None = None
    detail: dict | None = None

    def to_dict(self) -> dict:
        out = {"name": self.name, "verdict": self.verdict,
               "max_residual": self.max_residual}
        if self.detail is not None:
            out["detail"] = self.detail
        return out


def _config_from_args(args) -> RunConfig:
    seed = args.seed if args.seed is not None else default_seed()
    return RunConfig(seed=seed, n_sample_points=args.samples,
                     atol=args.atol, rtol=args.rtol)


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--json", dest="json_path", metavar="PATH",
                   help="write the report as JSON")
    p.add_argument("--seed", type=int, default=None,
                   help="sampling seed (default: KONTACT_SEED or 42)")
    p.add_argument("--samples", type=int, default=64,
                   help="sample points per zero test")
    p.add_argument("--atol", type=float, default=1e-10)
    p.add_argument("--rtol", type=float, default=1e-9)
    p.add_argument("--no-timestamp", action="store_true",
                   help="omit wall time from the report (byte-stable output)")


def _emit(command: str, config: RunConfig, checks: list[Check], args,
          started: float) -> int:
    report = {
        "command": command,
        "config": {
            "seed": config.seed,
            "n_sample_points": config.n_sample_points,
            "atol": config.atol,
            "rtol": config.rtol,
            "rank_threshold": config.rank_threshold,
        },
        "checks": [c.to_dict() for c in checks],
        "verdict": (FAIL if any(c.verdict == FAIL for c in checks)
                    else INCONCLUSIVE if any(c.verdict == INCONCLUSIVE for c in checks)
                    else PASS),
    }
    if not args.no_timestamp:
        report["wall_time_s"] = round(time.perf_counter() - started, 3)
    text = json.dumps(report, sort_keys=True, indent=2)
    if args.json_path:
        with open(args.json_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    for c in checks:
        line = f"{c.name}: {c.verdict}"
        if c.max_residual is not None:
            line += f" (max residual {c.max_residual:.3e})"
        print(line)
    print(f"verdict: {report['verdict']}")
    if report["verdict"] == FAIL:
        return 1
    if report["verdict"] == INCONCLUSIVE:
        return 3
    return 0


def _resolve(args):
    if getattr(args, "builtin", None):
        return resolve_structure(args.builtin)
    if getattr(args, "path", None):
        structure, _meta = load_structure_file(args.path)
        return BuiltinStructure(str(args.path), structure)
    raise ParseError("give a definition file path or --builtin NAME")


def _verdict(ok: bool) -> str:
    return PASS if ok else FAIL


# ---------------------------------------------------------------------------
# subcommands

def cmd_verify_structure(args) -> int:
    started = time.perf_counter()
    config = _config_from_args(args)
    holder = _resolve(args)
    s = holder.structure
    checks: list[Check] = []
    report = verify_kcontact(s, n_points=args.points, config=config)
    checks.append(Check("corank_condition", _verdict(report.cond1),
                        detail={"k": report.k, "dim": report.dim,
                                "rank_table": report.to_dict()["points"]}))
    checks.append(Check("reeb_rank_condition", _verdict(report.cond2)))
    checks.append(Check("trivial_intersection", _verdict(report.cond3)))
    frame = None
    try:
        frame = compute_reeb(s, config)
        checks.append(Check("reeb_frame", PASS, detail={
            "components": [[str(c) for c in R.components] for R in frame]}))
    except ZeroTestInconclusive as err:
        checks.append(Check("reeb_frame", INCONCLUSIVE, detail={"error": str(err)}))
    except SingularSystem as err:
        checks.append(Check("reeb_frame", FAIL, detail={"error": str(err)}))
    if frame is not None:
        checks.append(Check("reeb_commutation",
                            _verdict(check_reeb_commutation(frame, config=config))))
    if holder.polarization is not None:
        ok = check_polarization(s, holder.polarization, n_points=min(args.points, 10),
                                config=config)
        checks.append(Check("polarization", _verdict(ok),
                            detail={"n_fields": len(holder.polarization)}))
    return _emit("verify-structure", config, checks, args, started)


def cmd_reeb(args) -> int:
    started = time.perf_counter()
    config = _config_from_args(args)
    holder = _resolve(args)
    checks: list[Check] = []
    try:
        frame = compute_reeb(holder.structure, config)
    except ZeroTestInconclusive as err:
        checks.append(Check("reeb_frame", INCONCLUSIVE, detail={"error": str(err)}))
        return _emit("reeb", config, checks, args, started)
    except SingularSystem as err:
        checks.append(Check("reeb_frame", FAIL, detail={"error": str(err)}))
        return _emit("reeb", config, checks, args, started)
    checks.append(Check("reeb_frame", PASS, detail={
        "components": [[str(c) for c in R.components] for R in frame]}))
    checks.append(Check("reeb_commutation",
                        _verdict(check_reeb_commutation(frame, config=config))))
    return _emit("reeb", config, checks, args, started)


def cmd_legendrian(args) -> int:
    started = time.perf_counter()
    config = _config_from_args(args)
    kf = load_kfunction_file(args.path)
    checks: list[Check] = []
    compat = check_compatibility(kf, config)
    checks.append(Check("compatibility", _verdict(compat.compatible),
                        detail={"syntactic_linear_form": compat.syntactic_linear_form}))
    if not compat.compatible:
        return _emit("legendrian", config, checks, args, started)
    L = build_parametrization(kf, config)
    admissible = sorted({kf.n + (kf.k - 1) * n1 for n1 in range(kf.n + 1)})
    checks.append(Check("dimension", _verdict(L.dim in admissible),
                        detail={"dim_L": L.dim, "admissible": admissible}))
    s = canonical_structure(kf.n, kf.k)
    checks.append(Check("isotropy", _verdict(verify_isotropic(L, s, config))))
    return _emit("legendrian", config, checks, args, started)


def cmd_hddw(args) -> int:
    started = time.perf_counter()
    config = _config_from_args(args)
    H_text = args.H
    if args.system:
        raw = json.load(open(args.system, "r", encoding="utf-8"))
        args.builtin = None
        ref = raw.get("structure", "")
        if isinstance(ref, str) and not ref.endswith(".json"):
            args.builtin = ref
        else:
            args.path = ref
        H_text = raw.get("H", H_text)
    holder = _resolve(args)
    s = holder.structure
    H = parse_expr(H_text)
    sys_ = KContactHamiltonianSystem(s, H, reeb=holder.reeb, config=config)
    checks: list[Check] = []
    expected = expected_nullspace_dim(s.k, s.dim)

    if args.t_end is not None:
        from .hddw import integrate_contact_flow

        if args.x0 is None:
            raise ParseError("flow integration needs --x0 with coordinate values")
        x0 = {k: float(v) for k, v in json.loads(args.x0).items()}
        missing = set(s.chart.coords) - set(x0)
        if missing:
            raise ParseError(f"--x0 misses coordinates {sorted(missing)}")
        traj = integrate_contact_flow(sys_, x0, args.t_end, args.dt, config)
        if args.csv:
            with open(args.csv, "w", encoding="utf-8") as fh:
                traj.to_csv(fh)
        checks.append(Check("flow_integrated", PASS,
                            detail={"steps": len(traj.states) - 1, "dt": args.dt}))
        return _emit("hddw", config, checks, args, started)

    rng = random.Random(config.seed)
    if args.point == "random":
        points = sample_points(s.chart.coords, s.chart.domain(), args.n_points,
                               rng, config.max_sample_retries)
    else:
        raw = json.loads(args.point)
        points = [{k: float(v) for k, v in raw.items()}]
    dims = set()
    max_res = 0.0
    for p in points:
        sol = solve_hddw_at_point(sys_, p, config)
        dims.add(sol.nullspace_dim)
        max_res = max(max_res, sol.residual_norm)
    checks.append(Check("nullspace_dimension", _verdict(dims == {expected}),
                        max_residual=max_res,
                        detail={"observed": sorted(dims), "expected": expected,
                                "formula": "(k-1)(dim-k) + k^2 - 1",
                                "k": s.k, "dim": s.dim,
                                "n_points": len(points)}))
    if args.section:
        sect = load_section_file(args.section, s.chart, s.k)
        rep = section_residual(sys_, sect, config)
        checks.append(Check("section_residual", _verdict(rep.all_zero),
                            max_residual=rep.max_abs))
        if getattr(holder, "name", "").startswith("hydro"):
            from .hydro import equilibrium_conditions_residual

            eq = equilibrium_conditions_residual(sect, s.k, config)
            checks.append(Check(
                "equilibrium_families",
                _verdict(eq.all_pass and eq.agrees_with_hddw),
                detail=eq.to_dict()))
    return _emit("hddw", config, checks, args, started)


def cmd_ideal_gas(args) -> int:
    started = time.perf_counter()
    config = _config_from_args(args)
    cv = Fraction(args.cv)
    traj = run_isentropic(cv=cv, S0=args.s0, V0=args.v0, N0=args.n0,
                          t_end=args.t_end, dt=args.dt, config=config)
    S = traj.column("S")
    N = traj.column("N")
    V = traj.column("V")
    times = traj.times
    s_drift = max(abs(v - S[0]) for v in S) / max(1.0, abs(S[0]))
    n_drift = max(abs(v - N[0]) for v in N) / max(1.0, abs(N[0]))
    v_err = max(abs(v - V[0] * np.exp(t)) / (V[0] * np.exp(t))
                for v, t in zip(V, times))
    checks = [
        Check("entropy_constant", _verdict(s_drift <= args.tol), max_residual=s_drift),
        Check("particle_number_constant", _verdict(n_drift <= args.tol),
              max_residual=n_drift),
        Check("volume_exponential", _verdict(v_err <= args.tol), max_residual=v_err,
              detail={"closed_form": "V(t) = V0 exp(t)"}),
    ]
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            traj.to_csv(fh)
    return _emit("ideal-gas", config, checks, args, started)


def cmd_bjorken(args) -> int:
    started = time.perf_counter()
    config = _config_from_args(args)
    rep = full_pgt_demo(gamma=args.gamma, I=args.I,
                        temperature_profile=args.T_profile, config=config)
    checks = [Check(name, _verdict(ok)) for name, ok in rep["checks"].items()]
    checks.append(Check("all_identities", _verdict(rep["all_pass"]),
                        max_residual=rep["max_residual"],
                        detail={"gamma": rep["gamma"], "I": rep["I"],
                                "T_profile": rep["T_profile"]}))
    return _emit("bjorken", config, checks, args, started)


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="kontact",
        description="Verification engine for k-contact structures, Legendrian "
                    "submanifolds, field-equation solution spaces, and the "
                    "hydrodynamic/boost-invariant examples.")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-structure", help="check the defining conditions")
    p.add_argument("path", nargs="?", help="structure definition file")
    p.add_argument("--builtin", help="canonical:n,k | hydroK | thermo")
    p.add_argument("--points", type=int, default=20,
                   help="number of verification points")
    _add_common(p)
    p.set_defaults(fn=cmd_verify_structure)

    p = sub.add_parser("reeb", help="solve for the Reeb frame")
    p.add_argument("path", nargs="?")
    p.add_argument("--builtin")
    _add_common(p)
    p.set_defaults(fn=cmd_reeb)

    p = sub.add_parser("legendrian", help="build and verify a parametrization")
    p.add_argument("path", help="k-function definition file")
    _add_common(p)
    p.set_defaults(fn=cmd_legendrian)

    p = sub.add_parser("hddw", help="solve the field equations at points")
    p.add_argument("path", nargs="?", help="structure definition file")
    p.add_argument("--builtin")
    p.add_argument("--system", help="system file: {structure reference, H}")
    p.add_argument("--H", default="0", help="Hamiltonian expression")
    p.add_argument("--point", default="random",
                   help="'random' or a JSON object of coordinate values")
    p.add_argument("--n-points", type=int, default=1)
    p.add_argument("--section", help="section file to test for the PDE residual")
    p.add_argument("--t-end", type=float, default=None,
                   help="integrate the k=1 flow up to this time")
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--x0", help="initial point as a JSON object")
    p.add_argument("--csv", help="write the trajectory as CSV")
    _add_common(p)
    p.set_defaults(fn=cmd_hddw)

    p = sub.add_parser("ideal-gas", help="integrate an isentropic process")
    p.add_argument("--cv", default="3/2", help="specific heat (rational)")
    p.add_argument("--t-end", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--s0", type=float, default=1.0)
    p.add_argument("--v0", type=float, default=1.0)
    p.add_argument("--n0", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--csv", help="write the trajectory as CSV")
    _add_common(p)
    p.set_defaults(fn=cmd_ideal_gas)

    p = sub.add_parser("bjorken", help="boost-invariant expansion identities")
    p.add_argument("--gamma", default="gamma",
                   help="transformation constant (symbolic by default)")
    p.add_argument("--I", default="T^3", help="temperature scalar I(T)")
    p.add_argument("--T-profile", dest="T_profile", default=DEFAULT_T_PROFILE,
                   help="temperature profile in tau")
    _add_common(p)
    p.set_defaults(fn=cmd_bjorken)
    return top


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return 2 if err.code not in (0, None) else 0
    try:
        return args.fn(args)
    except ParseError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except ZeroTestInconclusive as err:
        print(f"inconclusive: {err}", file=sys.stderr)
        return 3
    except (SampleDomainEmpty, KontactError) as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
