"""Command-line front end.

``polyszego run CONFIG.json`` is the canonical interface; every subcommand
builds the same kind of config from flags and goes through the same runner.

Exit codes: 0 success, 2 invalid input, 3 numerical failure (a JSON sidecar
with ``"status": "failed"`` is still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import mpmath as mp

from . import experiments as ex
from ._numbers import to_mpc, to_pair
from .cmv import sum_rule_check
from .errors import PolySzegoError, ValidationError
from .measures import measure_from_json, moments, weight_from_json
from .quadrature import QuadratureSpec
from .szego_core import VerblunskySeq, verblunsky_from_measure
from .szego_functions import kernel_data

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3
PRECISION_ENV = "POLYSZEGO_PRECISION_BITS"

COMMON_KEYS = {"experiment", "quadrature", "output"}
EXPERIMENT_KEYS = {
    "sumrule": {"alphas", "weight"},
    "moments": {"measure", "n"},
    "inverse": {"measure", "n"},
    "extremal": {"measure", "n_list", "alphas"},
    "asym_pointwise": {"measure", "weight", "n_list", "z_grid", "alphas"},
    "asym_l2": {"measure", "weight", "n_list", "alphas", "arc", "grid_size", "radial_offset"},
    "growth": {"measure", "weight", "n_list", "alphas", "eps", "radii", "n_angles"},
    "waveop": {"measure", "weight", "n_list", "alphas", "m_exponent", "grid_size"},
    "sandwich": {"measure", "weight", "g_family"},
    "precision_scaling": {"n_list", "precisions", "seed", "max_abs"},
}
REQUIRED = {
    "sumrule": {"alphas", "weight"},
    "moments": {"measure", "n"},
    "inverse": {"measure", "n"},
    "extremal": {"measure", "n_list"},
    "asym_pointwise": {"measure", "n_list", "z_grid"},
    "asym_l2": {"measure", "n_list"},
    "growth": {"measure", "n_list", "eps"},
    "waveop": {"measure", "n_list"},
    "sandwich": {"measure", "weight", "g_family"},
    "precision_scaling": {"n_list", "precisions"},
}


# ---------------------------------------------------------------------------
# Parsing helpers
# ---------------------------------------------------------------------------


def parse_int_list(text):
    """``"1..8"``, ``"8..256*2"`` (geometric), ``"1,2,5"`` or a list."""
    if isinstance(text, list):
        return [int(x) for x in text]
    text = str(text).strip()
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            step_mul = None
            if "*" in hi:
                hi, step_mul = hi.split("*")
            lo, hi = int(lo), int(hi)
            if step_mul:
                k, mul = lo, int(step_mul)
                if mul < 2 or lo < 1:
                    raise ValidationError(f"bad geometric range {part!r}", field="n_list")
                while k <= hi:
                    out.append(k)
                    k *= mul
            else:
                out.extend(range(lo, hi + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise ValidationError("empty integer list", field="n_list")
    return out


def parse_complex_list(text):
    if isinstance(text, list):
        return [to_pair(x) for x in text]
    return [to_pair(x) for x in str(text).replace(";", ",").split(",") if x.strip()]


def parse_measure(text):
    """Shorthand: ``lebesgue``, ``bs:0.5,0.3j``, ``psexp:zeta,s[,c]``."""
    text = text.strip()
    name, _, args = text.partition(":")
    name = name.lower()
    if name in ("lebesgue", "leb"):
        return {"type": "lebesgue", "params": {}}
    if name in ("bs", "bernstein_szego"):
        return {"type": "bernstein_szego", "params": {"alphas": parse_complex_list(args)}}
    if name in ("psexp", "ps_exponential"):
        vals = [x.strip() for x in args.split(",") if x.strip()]
        if len(vals) not in (2, 3):
            raise ValidationError("psexp needs zeta,s[,c]", field="measure")
        params = {"zeta": to_pair(vals[0]), "s": float(vals[1])}
        if len(vals) == 3:
            params["c"] = float(vals[2])
        return {"type": "ps_exponential", "params": params}
    raise ValidationError(f"unknown measure shorthand {text!r}", field="measure")


def parse_atoms(text):
    """``"-1:0.1;1j:0.05"`` -> ``[[[re, im], mass], ...]``."""
    out = []
    for part in text.split(";"):
        if part.strip():
            pos, _, mass = part.partition(":")
            out.append([to_pair(pos), float(mass)])
    return out


# ---------------------------------------------------------------------------
# Config validation and execution
# ---------------------------------------------------------------------------


def default_precision():
    env = os.environ.get(PRECISION_ENV)
    if env is None:
        return 128
    try:
        return int(env)
    except ValueError as exc:
        raise ValidationError(f"{PRECISION_ENV} must be an integer", field=PRECISION_ENV) from exc


def validate_config(cfg):
    """Schema check; returns the resolved config (defaults filled in)."""
    if not isinstance(cfg, dict):
        raise ValidationError("config must be a JSON object", field="config")
    name = cfg.get("experiment")
    if name not in EXPERIMENT_KEYS:
        raise ValidationError(f"unknown experiment {name!r}", field="experiment")
    allowed = COMMON_KEYS | EXPERIMENT_KEYS[name]
    unknown = set(cfg) - allowed
    if unknown:
        raise ValidationError(f"unknown config keys {sorted(unknown)}", field=sorted(unknown)[0])
    missing = REQUIRED[name] - set(cfg)
    if missing:
        raise ValidationError(f"missing config keys {sorted(missing)}", field=sorted(missing)[0])
    resolved = json.loads(json.dumps(cfg))
    quad = dict(resolved.get("quadrature", {}))
    quad.setdefault("precision_bits", default_precision())
    spec = QuadratureSpec.from_dict(quad)
    resolved["quadrature"] = spec.to_dict()
    out = resolved.get("output", {})
    if not isinstance(out, dict) or set(out) - {"csv", "json"}:
        raise ValidationError("output must be an object with 'csv'/'json' paths", field="output")
    for key in ("n_list",):
        if key in resolved:
            resolved[key] = parse_int_list(resolved[key])
    if "measure" in resolved:
        m = resolved["measure"]
        if isinstance(m, str):
            resolved["measure"] = m = parse_measure(m)
        if m.get("type") == "ps_exponential":
            _check_psexp(m)
        else:
            with mp.workprec(spec.precision_bits):
                measure_from_json(m, spec)
    if "weight" in resolved:
        w = resolved["weight"]
        if isinstance(w, list):
            resolved["weight"] = w = {"roots": w}
        weight_from_json(w)
    if "alphas" in resolved:
        VerblunskySeq(resolved["alphas"])
    if "z_grid" in resolved:
        for z in resolved["z_grid"]:
            if not abs(to_mpc(z)) < 1:
                raise ValidationError("z_grid points must lie in the open disk", field="z_grid")
    return resolved, spec


def _check_psexp(m):
    # validate parameters without paying for the normalization integral
    params = dict(m.get("params", {}))
    params.pop("atoms", None)
    unknown = set(params) - {"zeta", "s", "c"}
    if unknown:
        raise ValidationError(f"unknown parameters {sorted(unknown)}", field="measure.params")
    for key in ("zeta", "s"):
        if key not in params:
            raise ValidationError(f"missing parameter {key!r}", field=f"measure.params.{key}")
    zeta = to_mpc(params["zeta"])
    if abs(abs(zeta) - 1) > 1e-12:
        raise ValidationError("zeta must lie on the unit circle", field="measure.params.zeta")
    if not 0 < float(params["s"]) < 3:
        raise ValidationError("s must lie in (0, 3)", field="measure.params.s")
    if float(params.get("c", 1)) <= 0:
        raise ValidationError("c must be positive", field="measure.params.c")


def _table_from_rows(header, rows, meta):
    return {"header": header, "rows": rows, "metadata": meta}


def execute(cfg, spec):
    """Run a validated config; returns ``(csv_text, payload_dict)``."""
    name = cfg["experiment"]
    measure = None
    if "measure" in cfg:
        measure = measure_from_json(cfg["measure"], spec)
    weight = weight_from_json(cfg["weight"]) if "weight" in cfg else None
    data = kernel_data(weight) if weight is not None else kernel_data([])
    alphas = VerblunskySeq(cfg["alphas"]) if "alphas" in cfg else None

    with mp.workprec(spec.precision_bits):
        if name == "sumrule":
            rep = sum_rule_check(weight, alphas, spec)
            header = ["lhs", "rhs", "abs_diff", "stabilized_M"]
            row = [rep.lhs, rep.rhs, rep.abs_diff, rep.stabilized_M]
            text = _csv([header, [_fmt(v, spec) for v in row]])
            return text, {"result": {k: float(v) for k, v in zip(header, row)}}
        if name == "moments":
            c = moments(measure, int(cfg["n"]), spec)
            rows = [[k, _fmt(mp.re(v), spec), _fmt(mp.im(v), spec)] for k, v in enumerate(c)]
            return _csv([["k", "re", "im"]] + rows), {"result": [to_pair(v) for v in c]}
        if name == "inverse":
            a = verblunsky_from_measure(measure, int(cfg["n"]), spec)
            rows = [[k, _fmt(mp.re(v), spec), _fmt(mp.im(v), spec)] for k, v in enumerate(a)]
            return _csv([["k", "re", "im"]] + rows), {"result": a.to_json()}
        if name == "sandwich":
            rep = ex.variational_sandwich(measure, weight, cfg["g_family"], spec)
            rows = [["g", "lambda", "norm2"]]
            for i, cnd in enumerate(rep.candidates):
                rows.append([i, _fmt(cnd["lambda"], spec), _fmt(cnd["norm2"], spec)])
            head = f"# lower={_fmt(rep.lower, spec)} upper={_fmt(rep.upper, spec)}\n"
            return head + _csv(rows), {"result": rep.to_json()}
        if name == "extremal":
            table = ex.szego_distance_experiment(measure, cfg["n_list"], spec, alphas)
        elif name == "asym_pointwise":
            table = ex.asym_pointwise(measure, alphas, data, cfg["z_grid"], cfg["n_list"], spec)
        elif name == "asym_l2":
            table = ex.asym_l2(measure, alphas, data, cfg["n_list"], spec,
                               grid_size=int(cfg.get("grid_size", 2**16)), arc=cfg.get("arc"),
                               radial_offset=float(cfg.get("radial_offset", 0.0)))
        elif name == "growth":
            table = ex.growth_bound_probe(measure, alphas, data, float(cfg["eps"]), cfg["n_list"],
                                          spec, radii=tuple(cfg.get("radii", (0.9, 0.99, 0.999))),
                                          n_angles=int(cfg.get("n_angles", 32)))
        elif name == "waveop":
            table = ex.wave_operator_probe(measure, alphas, data, int(cfg.get("m_exponent", 0)),
                                           cfg["n_list"], spec,
                                           grid_size=int(cfg.get("grid_size", 2**14)))
        elif name == "precision_scaling":
            table = ex.precision_scaling_experiment(cfg["n_list"], cfg["precisions"],
                                                    seed=int(cfg.get("seed", 0)),
                                                    max_abs=float(cfg.get("max_abs", 0.5)),
                                                    spec=spec)
        else:  # pragma: no cover - guarded by validate_config
            raise ValidationError(f"unknown experiment {name!r}")
    table.metadata.setdefault("precision_bits", spec.precision_bits)
    return table.to_csv(), {"result": table.to_json()}


def _fmt(v, spec):
    if isinstance(v, int):
        return str(v)
    return ex.format_number(v, spec.precision_bits)


def _csv(rows):
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _write_outputs(cfg, csv_text, payload, stdout):
    out = cfg.get("output", {})
    csv_path = out.get("csv")
    json_path = out.get("json") or (str(Path(csv_path).with_suffix(".json")) if csv_path else None)
    if csv_text is not None:
        if csv_path:
            Path(csv_path).parent.mkdir(parents=True, exist_ok=True)
            Path(csv_path).write_text(csv_text)
        else:
            stdout.write(csv_text)
    if json_path:
        Path(json_path).parent.mkdir(parents=True, exist_ok=True)
        Path(json_path).write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")


def run_config(cfg, stdout=None, stderr=None):
    """Validate and run a config dict; returns the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        resolved, spec = validate_config(cfg)
    except (ValidationError, ValueError, TypeError, KeyError) as exc:
        field = getattr(exc, "field", None)
        stderr.write(f"error: invalid config{f' ({field})' if field else ''}: {exc}\n")
        return EXIT_INVALID
    base = {"config": resolved, "config_hash": ex.config_hash(resolved)}
    try:
        csv_text, payload = execute(resolved, spec)
    except ValidationError as exc:
        field = getattr(exc, "field", None)
        stderr.write(f"error: invalid input{f' ({field})' if field else ''}: {exc}\n")
        return EXIT_INVALID
    except PolySzegoError as exc:
        stderr.write(f"error: numerical failure: {exc}\n")
        failed = dict(base, status="failed", error=f"{type(exc).__name__}: {exc}")
        estimate = getattr(exc, "estimate", None)
        if estimate is not None:
            failed["partial"] = str(estimate)
        partial = getattr(exc, "partial", None)
        if partial is not None:
            failed["partial"] = str(partial)
        _write_outputs(resolved, "# FAILED\n", failed, stdout)
        return EXIT_NUMERIC
    payload = dict(base, status="ok", **payload)
    _write_outputs(resolved, csv_text, payload, stdout)
    return EXIT_OK


def run(config_path, stdout=None, stderr=None):
    """Load a JSON config file and run it."""
    stderr = stderr or sys.stderr
    try:
        cfg = json.loads(Path(config_path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        stderr.write(f"error: cannot read config: {exc}\n")
        return EXIT_INVALID
    return run_config(cfg, stdout, stderr)


# ---------------------------------------------------------------------------
# argparse
# ---------------------------------------------------------------------------


def _add_common(p):
    p.add_argument("--precision", type=int, help="working precision in bits")
    p.add_argument("--out", help="CSV output path (JSON sidecar next to it)")
    p.add_argument("--dump-config", action="store_true",
                   help="print the config the flags resolve to and exit")


def _add_measure(p, required=True):
    p.add_argument("--measure", required=required,
                   help="lebesgue | bs:a0,a1,... | psexp:zeta,s[,c]")
    p.add_argument("--atoms", help="point masses 'pos:mass;pos:mass'")


def build_parser():
    parser = argparse.ArgumentParser(prog="polyszego", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a JSON experiment config")
    p.add_argument("config")

    p = sub.add_parser("sumrule", help="check the finite-rank sum rule")
    p.add_argument("--alphas", required=True, help="comma-separated complex coefficients")
    p.add_argument("--roots", default="", help="comma-separated unimodular roots of p")
    _add_common(p)

    p = sub.add_parser("moments", help="trigonometric moments of a measure")
    _add_measure(p)
    p.add_argument("--n", type=int, required=True)
    _add_common(p)

    p = sub.add_parser("extremal", help="1/K_n(0,0) against exp of the log-integral")
    _add_measure(p)
    p.add_argument("--n", required=True, help="n list, e.g. 1..8 or 8..256*2")
    _add_common(p)

    p = sub.add_parser("asymptotics", help="modified asymptotics (pointwise, L2, growth)")
    _add_measure(p)
    p.add_argument("--roots", default="1")
    p.add_argument("--n", required=True)
    p.add_argument("--mode", choices=["pointwise", "l2", "growth"], default="pointwise")
    p.add_argument("--z", default="0.5j", help="points for pointwise mode")
    p.add_argument("--arc", help="theta_a,theta_b for the arc-restricted L2 metric")
    p.add_argument("--eps", type=float, default=0.3)
    _add_common(p)

    p = sub.add_parser("waveop", help="wave-operator function-model residual")
    _add_measure(p)
    p.add_argument("--roots", default="1")
    p.add_argument("--n", required=True)
    p.add_argument("--m", type=int, default=0)
    _add_common(p)

    p = sub.add_parser("sandwich", help="variational lower/upper bounds")
    _add_measure(p)
    p.add_argument("--roots", default="1")
    p.add_argument("--degree", type=int, action="append",
                   help="outer-truncation degree (repeatable)")
    p.add_argument("--coeffs", action="append", help="explicit candidate coefficients")
    p.add_argument("--clip", type=float)
    _add_common(p)
    return parser


def _measure_from_args(args):
    m = parse_measure(args.measure)
    if getattr(args, "atoms", None):
        m["params"]["atoms"] = parse_atoms(args.atoms)
    return m


def config_from_args(args):
    cmd = args.command
    if cmd == "sumrule":
        cfg = {"experiment": "sumrule", "alphas": parse_complex_list(args.alphas),
               "weight": {"roots": parse_complex_list(args.roots)}}
    elif cmd == "moments":
        cfg = {"experiment": "moments", "measure": _measure_from_args(args), "n": args.n}
    elif cmd == "extremal":
        cfg = {"experiment": "extremal", "measure": _measure_from_args(args),
               "n_list": parse_int_list(args.n)}
    elif cmd == "asymptotics":
        cfg = {"measure": _measure_from_args(args), "weight": {"roots": parse_complex_list(args.roots)},
               "n_list": parse_int_list(args.n)}
        if args.mode == "pointwise":
            cfg.update(experiment="asym_pointwise", z_grid=parse_complex_list(args.z))
        elif args.mode == "l2":
            cfg.update(experiment="asym_l2")
            if args.arc:
                cfg["arc"] = [float(x) for x in args.arc.split(",")]
        else:
            cfg.update(experiment="growth", eps=args.eps)
    elif cmd == "waveop":
        cfg = {"experiment": "waveop", "measure": _measure_from_args(args),
               "weight": {"roots": parse_complex_list(args.roots)},
               "n_list": parse_int_list(args.n), "m_exponent": args.m}
    elif cmd == "sandwich":
        fam = [{"kind": "outer_truncation", "degree": d, **({"clip": args.clip} if args.clip else {})}
               for d in (args.degree or [])]
        fam += [{"kind": "coefficients", "coeffs": parse_complex_list(c)} for c in (args.coeffs or [])]
        if not fam:
            fam = [{"kind": "coefficients", "coeffs": [[1.0, 0.0]]}]
        cfg = {"experiment": "sandwich", "measure": _measure_from_args(args),
               "weight": {"roots": parse_complex_list(args.roots)}, "g_family": fam}
    else:  # pragma: no cover
        raise ValidationError(f"unknown command {cmd}")
    if args.precision:
        cfg["quadrature"] = {"precision_bits": args.precision}
    if args.out:
        cfg["output"] = {"csv": args.out}
    return cfg


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "run":
        return run(args.config)
    try:
        cfg = config_from_args(args)
    except (ValidationError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID
    if args.dump_config:
        sys.stdout.write(json.dumps(cfg, indent=2, sort_keys=True) + "\n")
        return EXIT_OK
    return run_config(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
