"""Command line entry point: ``toric-crn {compile,simulate,mle,verify,siphons}``.

Exit status is 0 on success, 1 when a simulation or verification does not
pass, and 2 on bad input.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .crn import siphon_report
from .dynamics import SimOptions, perturb_rates
from .exceptions import ToricCRNError
from .formats import apply_rate_overrides, emit_crn, parse_crn, parse_matrix_file
from .inference import DataVector, fit_mle, verify_equivalence
from .pipeline import compile_model, result_from_state, simulate_mld, simulate_mle

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with floats written at 17 significant digits, keys in insertion order."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        if all(isinstance(v, (int, float, np.floating, np.integer)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return '"NaN"'
        if math.isinf(v):
            return '"Infinity"' if v > 0 else '"-Infinity"'
        return format(v, ".17g")
    if obj is None:
        return "null"
    return json.dumps(str(obj))


@dataclass
class RunConfig:
    subcommand: str
    matrix: Path
    data: DataVector | None = None
    theta0: object = "zero"
    rates: Path | None = None
    delta: float | None = None
    seed: int = 0
    network: str = "mle"
    tol: float = 1e-5
    out: Path | None = None
    fmt: str = "json"
    options: SimOptions = field(default_factory=SimOptions)


def parse_vector(text: str) -> np.ndarray:
    try:
        vals = [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise ToricCRNError(f"cannot parse vector {text!r}") from None
    if not vals:
        raise ToricCRNError("empty vector")
    return np.array(vals)


def parse_data(text: str) -> DataVector:
    """Counts (``"3,1,0"``) or frequencies summing to one (``"0.75,0.25,0"``)."""
    if Path(text).is_file():
        text = Path(text).read_text().replace("\n", ",")
    return DataVector(parse_vector(text))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="toric-crn", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(sp, data=True):
        sp.add_argument("--matrix", required=True, type=Path, help="design matrix file")
        if data:
            sp.add_argument("--data", required=True, help='counts like "3,1,0", or a file')
        sp.add_argument("--out", type=Path, help="directory for output files")
        sp.add_argument("--format", dest="fmt", choices=("json", "text"), default="json")

    def sim(sp):
        sp.add_argument("--theta0", default="zero", help='"zero" or a comma separated vector')
        sp.add_argument("--rates", type=Path, help="CRN file whose rates override the compiled ones")
        sp.add_argument("--delta", type=float, help="perturb every rate uniformly within +-delta")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tmax", type=float, default=SimOptions.t_max)
        sp.add_argument("--rtol", type=float, default=SimOptions.rel_tol)
        sp.add_argument("--atol", type=float, default=SimOptions.abs_tol)
        sp.add_argument("--eqtol", type=float, default=SimOptions.equilibrium_tol)

    common(sub.add_parser("compile", help="emit CRN text for both networks"), data=False)
    s = sub.add_parser("simulate", help="integrate a network from the data")
    common(s)
    sim(s)
    s.add_argument("--network", choices=("mle", "mld"), default="mle")
    common(sub.add_parser("mle", help="maximum likelihood by convex optimization"))
    v = sub.add_parser("verify", help="simulate and compare with the oracle")
    common(v)
    sim(v)
    v.add_argument("--tol", type=float, default=1e-5)
    s = sub.add_parser("siphons", help="minimal siphons and criticality")
    common(s, data=False)
    s.add_argument("--network", choices=("mle", "mld"), default="mld")
    return p


def config_from_args(args) -> RunConfig:
    cfg = RunConfig(args.subcommand, args.matrix, out=args.out, fmt=args.fmt)
    if getattr(args, "data", None) is not None:
        cfg.data = parse_data(args.data)
    if hasattr(args, "theta0"):
        cfg.theta0 = "zero" if args.theta0 == "zero" else parse_vector(args.theta0)
        cfg.rates = args.rates
        cfg.delta = args.delta
        cfg.seed = args.seed
        cfg.options = SimOptions(rel_tol=args.rtol, abs_tol=args.atol,
                                 equilibrium_tol=args.eqtol, t_max=args.tmax)
    cfg.network = getattr(args, "network", cfg.network)
    cfg.tol = getattr(args, "tol", cfg.tol)
    return cfg


def _prepare_network(cfg: RunConfig, net):
    if cfg.rates is not None:
        net = apply_rate_overrides(net, parse_crn(cfg.rates.read_text()))
    if cfg.delta is not None:
        net, _ = perturb_rates(net, cfg.delta, cfg.seed)
    return net


def _write(out: Path | None, name: str, text: str):
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)


def _text_report(d: dict, prefix: str = "") -> str:
    lines = []
    for k, v in d.items():
        if isinstance(v, dict):
            lines.append(_text_report(v, f"{prefix}{k}."))
        elif isinstance(v, (list, tuple)) and v and isinstance(v[0], dict):
            for i, item in enumerate(v):
                lines.append(_text_report(item, f"{prefix}{k}[{i}]."))
        elif isinstance(v, (list, tuple)) and all(isinstance(x, str) for x in v):
            lines.append(f"{prefix}{k}: {' '.join(v)}")
        else:
            lines.append(f"{prefix}{k}: {dumps(v) if not isinstance(v, str) else v}")
    return "\n".join(lines)


def run_pipeline(cfg: RunConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    A = parse_matrix_file(cfg.matrix)
    if cfg.data is not None and len(cfg.data) != A.n:
        raise ToricCRNError(f"data vector has {len(cfg.data)} entries, the matrix has {A.n} columns")
    model = compile_model(A)

    if cfg.subcommand == "compile":
        mld_txt = emit_crn(model.mld, header=f"distribution network, {A.m}x{A.n} design matrix")
        mle_txt = (emit_crn(model.mle, header="estimator network; T<i> is the i-th parameter")
                   if model.mle is not None else None)
        _write(cfg.out, "mld.crn", mld_txt)
        if mle_txt is not None:
            _write(cfg.out, "mle.crn", mle_txt)
        if cfg.fmt == "json":
            report = {"kernel_basis": [list(b) for b in model.B.vectors],
                      "independent_columns": [j + 1 for j in model.Bp],
                      "mld": mld_txt, "mle": mle_txt}
            stdout.write(dumps(report) + "\n")
        else:
            stdout.write(mld_txt + ("\n" + mle_txt if mle_txt else ""))
        return EXIT_OK

    if cfg.subcommand == "siphons":
        net = model.mld if cfg.network == "mld" else model.mle
        if net is None:
            raise ToricCRNError(model.mle_error)
        sis = siphon_report(net)
        report = {"network": cfg.network,
                  "siphons": [{"members": s.names(net), "critical": s.critical} for s in sis]}
        _emit(cfg, stdout, "siphons.json", report)
        return EXIT_OK

    if cfg.subcommand == "mle":
        res = fit_mle(A, cfg.data, model.B, model.Bp)
        _emit(cfg, stdout, "mle.json", res.to_dict())
        return EXIT_OK

    if cfg.subcommand == "simulate":
        if cfg.network == "mld":
            traj = simulate_mld(model, cfg.data, cfg.options, _prepare_network(cfg, model.mld))
        else:
            if model.mle is None:
                raise ToricCRNError(model.mle_error)
            traj = simulate_mle(model, cfg.data, cfg.options, cfg.theta0, _prepare_network(cfg, model.mle))
        res = result_from_state(model, cfg.data, traj.final)
        report = {"status": traj.status.value, "t_final": float(traj.times[-1]), "steps": traj.steps,
                  "species": list(traj.species), "equilibrium": list(traj.final)}
        report.update(res.to_dict())
        if cfg.network == "mld":
            report.pop("theta_hat")
        _write(cfg.out, "trajectory.csv", traj.to_csv())
        _emit(cfg, stdout, "equilibrium.json", report)
        return EXIT_OK if traj.converged else EXIT_FAIL

    if cfg.subcommand == "verify":
        traj = simulate_mld(model, cfg.data, cfg.options, _prepare_network(cfg, model.mld))
        oracle = fit_mle(A, cfg.data, model.B, model.Bp)
        rep = verify_equivalence(A, cfg.data, traj.final, oracle.p_hat, B=model.B, tol=cfg.tol)
        report = {"status": traj.status.value, "simulated_p": list(traj.final),
                  "oracle_p": list(oracle.p_hat)}
        report.update(rep.to_dict())
        _emit(cfg, stdout, "verify.json", report)
        return EXIT_OK if rep.passed and traj.converged else EXIT_FAIL

    raise ToricCRNError(f"unknown subcommand {cfg.subcommand!r}")


def _emit(cfg: RunConfig, stdout, name: str, report: dict):
    text = dumps(report) + "\n"
    _write(cfg.out, name, text)
    stdout.write(text if cfg.fmt == "json" else _text_report(report) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return run_pipeline(config_from_args(args))
    except (ToricCRNError, OSError, TypeError) as exc:
        if args.fmt == "json":
            sys.stdout.write(dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}) + "\n")
        else:
            print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
