"""Command line front end: config files in, JSON reports and CSV trajectories out.

Exit codes: 0 success, 1 computation or validation failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .connection import (TOL_RES, TOL_SEP, ConnectionConfig, DarbouxState, DeformationVector, PoleStructure,
                         check_state, validate)
from .deformation import build_A_companion, build_A_tilde, deformation_coefficients
from .flow import NodeCollisionError, integrate_flow
from .lax import (build_L_c, build_L_check, build_L_companion, build_L_tilde, classical_spectral_curve,
                  solve_isospectral_H)
from .presets import PARAMS, PRESET_IDS, painleve_preset, preset_config_at
from .rational import RationalFunction
from .times import dual_derivative_coefficients, forward_time_map, inverse_time_map
from . import verify

SCHEMA_VERSION = 1


class ConfigSchemaError(ValueError):
    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


class UsageError(ValueError):
    pass


# -- complex <-> JSON ---------------------------------------------------------------------

def enc(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def enc_array(a) -> list:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return enc(a)
    return [enc_array(v) for v in a]


def dec(v, ptr: str) -> complex:
    if isinstance(v, bool):
        raise ConfigSchemaError(ptr, "expected a number or [re, im]")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) and not isinstance(x, bool)
                                                    for x in v):
        return complex(v[0], v[1])
    raise ConfigSchemaError(ptr, "expected a number or [re, im]")


def _get(doc: dict, key: str, ptr: str, kind=None):
    if not isinstance(doc, dict):
        raise ConfigSchemaError(ptr, "expected an object")
    if key not in doc:
        raise ConfigSchemaError(f"{ptr}/{key}", "missing required field")
    v = doc[key]
    if kind is not None and not isinstance(v, kind):
        name = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise ConfigSchemaError(f"{ptr}/{key}", f"expected {name}")
    return v


def _dec_list(v, ptr: str, length: int | None = None) -> np.ndarray:
    if not isinstance(v, list):
        raise ConfigSchemaError(ptr, "expected a list")
    if length is not None and len(v) != length:
        raise ConfigSchemaError(ptr, f"expected {length} entries, got {len(v)}")
    return np.array([dec(x, f"{ptr}/{i}") for i, x in enumerate(v)], dtype=complex)


def _dec_sheets(v, ptr: str, length: int) -> np.ndarray:
    if not isinstance(v, list):
        raise ConfigSchemaError(ptr, "expected [sheet1, sheet2]")
    if len(v) != 2:
        missing = "sheet-2" if len(v) == 1 else "sheet"
        raise ConfigSchemaError(ptr if len(v) > 2 else f"{ptr}/{len(v)}",
                                f"expected two sheets of times, {missing} times missing" if len(v) < 2
                                else "expected exactly two sheets")
    return np.stack([_dec_list(v[i], f"{ptr}/{i}", length) for i in range(2)])


# -- config documents ---------------------------------------------------------------------

@dataclass
class ParsedConfig:
    config: ConnectionConfig
    state: DarbouxState | None = None
    alpha: DeformationVector | None = None
    preset: dict | None = None


def parse_document(doc, tol_sep: float = TOL_SEP, tol_res: float = TOL_RES) -> ParsedConfig:
    """Schema-check and build the config; validation failures raise ValueError with their names."""
    if not isinstance(doc, dict):
        raise ConfigSchemaError("", "expected a JSON object")
    schema = _get(doc, "schema", "", int)
    if schema != SCHEMA_VERSION:
        raise ConfigSchemaError("/schema", f"unsupported schema version {schema}")
    sdoc = _get(doc, "structure", "", dict)
    r_inf = _get(sdoc, "r_inf", "/structure", int)
    poles = _get(sdoc, "poles", "/structure", list)
    X, r = [], []
    for i, pole in enumerate(poles):
        ptr = f"/structure/poles/{i}"
        X.append(dec(_get(pole, "x", ptr), f"{ptr}/x"))
        rs = _get(pole, "r", ptr, int)
        if rs < 1:
            raise ConfigSchemaError(f"{ptr}/r", "pole order must be positive")
        r.append(rs)
    if r_inf < 1:
        raise ConfigSchemaError("/structure/r_inf", "pole order must be positive")
    st = PoleStructure(r_inf, tuple(r), tuple(X))
    tdoc = _get(doc, "times", "", dict)
    t_inf = _dec_sheets(_get(tdoc, "inf", "/times"), "/times/inf", r_inf)
    tX_doc = _get(tdoc, "X", "/times", list) if st.n or "X" in tdoc else []
    if len(tX_doc) != st.n:
        raise ConfigSchemaError("/times/X", f"expected {st.n} pole blocks, got {len(tX_doc)}")
    t_X = tuple(_dec_sheets(b, f"/times/X/{s}", rs) for s, (b, rs) in enumerate(zip(tX_doc, r)))
    hbar = dec(doc.get("hbar", 1.0), "/hbar")
    cfg = ConnectionConfig(st, t_inf, t_X, hbar)
    rep = validate(cfg, tol_sep=tol_sep, tol_res=tol_res)
    if not rep.ok:
        raise ValueError("validation failed: " + ", ".join(rep.failures))
    state = None
    if "state" in doc:
        sd = _get(doc, "state", "", dict)
        q = _dec_list(_get(sd, "q", "/state"), "/state/q", cfg.g)
        p = _dec_list(_get(sd, "p", "/state"), "/state/p", cfg.g)
        state = DarbouxState(q, p)
        probs = check_state(cfg, state, tol_sep)
        if probs:
            raise ValueError("invalid state: " + ", ".join(probs))
    alpha = None
    if "deformation" in doc:
        dd = _get(doc, "deformation", "", dict)
        a_inf = _dec_sheets(dd.get("inf", [[0] * r_inf] * 2), "/deformation/inf", r_inf)
        aX = dd.get("X", [[[0] * rs] * 2 for rs in r])
        if not isinstance(aX, list) or len(aX) != st.n:
            raise ConfigSchemaError("/deformation/X", f"expected {st.n} pole blocks")
        a_X = tuple(_dec_sheets(b, f"/deformation/X/{s}", rs) for s, (b, rs) in enumerate(zip(aX, r)))
        a_pos = _dec_list(dd.get("pos", [0] * st.n), "/deformation/pos", st.n)
        alpha = DeformationVector(a_inf, a_X, a_pos)
    preset = doc.get("preset")
    if preset is not None:
        if not isinstance(preset, dict) or preset.get("id") not in PRESET_IDS:
            raise ConfigSchemaError("/preset/id", f"expected one of {', '.join(PRESET_IDS)}")
    return ParsedConfig(cfg, state, alpha, preset)


def parse_config(path: str, tol_sep: float = TOL_SEP, tol_res: float = TOL_RES) -> ParsedConfig:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigSchemaError("", f"not valid JSON ({exc.msg} at line {exc.lineno})") from exc
    return parse_document(doc, tol_sep, tol_res)


def config_document(config: ConnectionConfig, state: DarbouxState | None = None,
                    alpha: DeformationVector | None = None, preset: dict | None = None) -> dict:
    doc = {
        "schema": SCHEMA_VERSION,
        "structure": {"r_inf": config.r_inf,
                      "poles": [{"x": enc(x), "r": rs} for x, rs in zip(config.X, config.r)]},
        "times": {"inf": enc_array(config.t_inf), "X": [enc_array(t) for t in config.t_X]},
        "hbar": enc(config.hbar),
    }
    if state is not None:
        doc["state"] = {"q": enc_array(state.q), "p": enc_array(state.p)}
    if alpha is not None:
        doc["deformation"] = {"inf": enc_array(alpha.a_inf), "X": [enc_array(a) for a in alpha.a_X],
                              "pos": enc_array(alpha.a_pos)}
    if preset is not None:
        doc["preset"] = preset
    return doc


def rational_document(f: RationalFunction) -> dict:
    return {"poly": enc_array(f.poly),
            "poles": [{"x": enc(c), "coeffs": enc_array(a)} for c, a in sorted(f.parts.items(),
                                                                                  key=lambda kv: (kv[0].real, kv[0].imag))]}


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False)


# -- argument helpers -----------------------------------------------------------------------

def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def parse_complex_list(text: str) -> list:
    return [parse_complex(t) for t in text.split(",") if t.strip()]


def parse_span(text: str):
    vals = parse_complex_list(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError("span must be 'start,end'")
    return vals


def parse_grid(text: str) -> np.ndarray:
    parts = text.split(",")
    try:
        if len(parts) == 3:
            x0, x1, nx = float(parts[0]), float(parts[1]), int(parts[2])
            return np.linspace(x0, x1, nx).astype(complex)
        if len(parts) == 6:
            x0, x1, nx, y0, y1, ny = (float(parts[0]), float(parts[1]), int(parts[2]),
                                      float(parts[3]), float(parts[4]), int(parts[5]))
            xs, ys = np.linspace(x0, x1, nx), np.linspace(y0, y1, ny)
            return (xs[None, :] + 1j * ys[:, None]).ravel()
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from exc
    raise argparse.ArgumentTypeError("grid is 'x0,x1,nx' or 'x0,x1,nx,y0,y1,ny'")


def default_seed() -> int:
    v = os.environ.get("ISOMONO_SEED")
    if v is None:
        return 0
    try:
        return int(v)
    except ValueError:
        raise UsageError(f"ISOMONO_SEED must be an integer, got {v!r}")


# -- commands -------------------------------------------------------------------------------

PRESET_DEFAULTS = {
    "P2": (1.0, [0.3 + 0.7j], [0.2]),
    "P3": (1.0, [0.3 + 0.7j], [0.2]),
    "P4": (1.0, [0.3 + 0.7j], [0.2]),
    "P4_JM": (1.0, [0.3 + 0.7j], [0.2]),
    "P5": (0.5, [0.3 + 0.7j], [0.2]),
    "P6": (0.5 + 0.5j, [0.3 + 0.7j], [0.2]),
    "P2H2": ((0.5, 0.2), [0.3 + 0.7j, -0.4 + 0.9j], [0.2, -0.1]),
}


# order-1 poles need distinct sheet exponents, so unset parameters must not be 0
PARAM_DEFAULTS = {"theta": 0.25, "theta_inf": 0.35, "theta1": 0.2, "theta2": 0.3, "theta3": 0.15}


def cmd_preset(args) -> int:
    pid = args.id
    params = {}
    for name in PARAMS[pid]:
        v = getattr(args, name)
        params[name] = complex(v if v is not None else PARAM_DEFAULTS[name])
    t_def, q_def, p_def = PRESET_DEFAULTS[pid]
    if pid == "P2H2":
        t = tuple(args.t) if args.t is not None else t_def
        if len(t) != 2:
            raise UsageError("P2H2 takes --t tau1,tau2")
    else:
        t = args.t[0] if args.t is not None else t_def
        if args.t is not None and len(args.t) != 1:
            raise UsageError(f"{pid} takes a single --t value")
    q = args.q if args.q is not None else q_def
    p = args.p if args.p is not None else p_def
    cfg, al, st = painleve_preset(pid, params, t, q, p, args.hbar, args.flow)
    meta = {"id": pid, "params": {k: enc(v) for k, v in params.items()},
            "t": enc_array(np.atleast_1d(np.asarray(t, dtype=complex))), "flow": args.flow}
    _emit(args, dumps(config_document(cfg, st, al, meta)) + "\n")
    return 0


def _emit(args, text: str):
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(args) -> ParsedConfig:
    return parse_config(args.config, args.tol_sep, args.tol_res)


def _require_state(pc: ParsedConfig) -> DarbouxState:
    if pc.state is None:
        raise ConfigSchemaError("/state", "missing required field for this command")
    return pc.state


def _matrix_values(L, lam):
    out = []
    for z in lam:
        try:
            v = L.evaluate(z) if hasattr(L, "evaluate") else L(z)
            out.append(enc_array(v) if np.all(np.isfinite(v)) else None)
        except (ValueError, ZeroDivisionError, FloatingPointError):
            out.append(None)
    return out


def cmd_build(args) -> int:
    pc = _load(args)
    cfg, st = pc.config, _require_state(pc)
    lam = args.grid if args.lam is None else np.asarray(args.lam, dtype=complex)
    H = solve_isospectral_H(cfg, st)
    res = {"schema": SCHEMA_VERSION, "lambda": enc_array(lam), "genus": cfg.g,
           "hamiltonians": {"inf": enc_array(H.H_inf), "X": [enc_array(h) for h in H.H_X]}}
    with np.errstate(all="ignore"):
        res["L"] = _matrix_values(build_L_companion(cfg, st, H), lam)
        res["L_check"] = _matrix_values(build_L_check(cfg, st, H), lam)
        res["L_tilde"] = _matrix_values(build_L_tilde(cfg, st, H), lam)
        res["L_c"] = _matrix_values(build_L_c(cfg, st, H), lam)
        if pc.alpha is not None:
            co = deformation_coefficients(cfg, st, pc.alpha)
            res["A"] = _matrix_values(build_A_companion(cfg, st, co, H), lam)
            res["A_tilde"] = _matrix_values(build_A_tilde(cfg, st, co, H, pc.alpha), lam)
    _emit(args, dumps(res) + "\n")
    return 0


def _flow_callables(pc: ParsedConfig, time_name: str | None):
    cfg = pc.config
    if pc.preset is not None and time_name is None:
        meta = pc.preset
        params = {k: dec(v, f"/preset/params/{k}") for k, v in meta.get("params", {}).items()}
        flow = int(meta.get("flow", 1))
        other = 0j
        if meta["id"] == "P2H2":
            tt = meta.get("t", [[0, 0], [0, 0]])
            other = dec(tt[1] if flow == 1 else tt[0], "/preset/t")
        return preset_config_at(meta["id"], params, cfg.hbar, flow, other)
    chart = forward_time_map(cfg)
    names = chart.iso_names()
    if not names:
        raise UsageError("this configuration has no isomonodromic time")
    name = names[0] if time_name is None else time_name
    if name not in names:
        raise UsageError(f"unknown isomonodromic time {name!r}; available: {', '.join(names)}")
    idx = names.index(name)
    base = chart.iso_times()

    def chart_at(tau):
        v = base.copy()
        v[idx] = tau
        return chart.with_iso_times(v)

    def config_at(tau):
        return inverse_time_map(chart_at(tau))

    def direction(tau):
        return dual_derivative_coefficients(chart_at(tau), name)
    return config_at, direction


def cmd_evolve(args) -> int:
    pc = _load(args)
    st = _require_state(pc)
    config_at, direction = _flow_callables(pc, args.time)
    try:
        traj = integrate_flow(config_at, direction, st, args.span, step=args.step, method=args.method,
                              tol_sep=args.tol_sep, raise_on_collision=False)
    except NodeCollisionError as exc:  # pragma: no cover - raise_on_collision is off
        traj = exc.trajectory
    _emit(args, traj.to_csv())
    if traj.stopped:
        sys.stderr.write(f"integration stopped: {traj.stopped}\n")
        return 1
    return 0


def cmd_spectral(args) -> int:
    pc = _load(args)
    cfg, st = pc.config, _require_state(pc)
    P1, P2 = classical_spectral_curve(cfg, st)
    res = {"schema": SCHEMA_VERSION, "curve": "y^2 - P1(lam) y + P2(lam) = 0",
           "P1": rational_document(P1), "P2": rational_document(P2)}
    _emit(args, dumps(res) + "\n")
    return 0


def _config_report(pc: ParsedConfig, seed: int, tol, fd_eps) -> verify.SuiteReport:
    cfg, st = pc.config, _require_state(pc)
    rep = verify.ConfigReport(0, verify.chart_case(cfg.structure), cfg.r_inf, cfg.r, cfg.g)
    rng = np.random.default_rng(seed)
    try:
        lam = verify.sample_lambdas(rng, cfg, st, 10)
        ck = rep.checks
        if pc.alpha is not None:
            ck += verify.check_zero_curvature(cfg, st, pc.alpha, lam, fd_eps, tol)
            ck += verify.check_hamiltonianity(cfg, st, pc.alpha, fd_eps, tol)
        ck += verify.check_trivial_identities(cfg, st, fd_eps, tol, tol)
        ck += verify.check_monodromy_sum(cfg, st, lambdas=lam[:5], tol=tol)
        ck += verify.check_time_chart(cfg, tol, tol, fd_eps)
        ck += verify.check_det_V(cfg, st, tol)
        if verify.is_canonical(cfg):
            ck += verify.check_residue_crosscheck(cfg, st, tol)
            ck += verify.check_reduction(cfg, st, tol)
    except Exception as exc:
        rep.error = f"{type(exc).__name__}: {exc}"
    return verify.SuiteReport(seed, [rep])


def cmd_check(args) -> int:
    seed = default_seed() if args.seed is None else args.seed
    if args.config:
        rep = _config_report(_load(args), seed, args.tol, args.fd_eps)
    else:
        checks = verify.ALL_CHECKS if args.checks is None else tuple(args.checks.split(","))
        unknown = [c for c in checks if c not in verify.ALL_CHECKS]
        if unknown:
            raise UsageError(f"unknown checks {unknown}; available: {', '.join(verify.ALL_CHECKS)}")
        rep = verify.run_suite(seed, args.cases, checks=checks, tol=args.tol, fd_eps=args.fd_eps,
                               workers=args.workers)
    _emit(args, rep.to_json() + "\n")
    return 0 if rep.passed else 1


# -- parser -----------------------------------------------------------------------------------

def _positive_float(text):
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError("must be a positive number")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="isomono",
                                 description="Isomonodromic Lax pairs, Hamiltonians and flows for rank-2 connections.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-sep", type=_positive_float, default=TOL_SEP,
                        help="minimal separation of poles and nodes")
    common.add_argument("--tol-res", type=_positive_float, default=TOL_RES,
                        help="tolerance on the sum of residues")
    common.add_argument("--fd-eps", type=_positive_float, default=verify.FD_EPS,
                        help="finite-difference step of the checks")
    common.add_argument("--out", help="write to this file instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", parents=[common], help="evaluate the Lax matrices on a lambda grid")
    b.add_argument("--config", required=True)
    b.add_argument("--grid", type=parse_grid, default=parse_grid("-2,2,5,-2,2,5"),
                   help="x0,x1,nx[,y0,y1,ny]")
    b.add_argument("--lambda", dest="lam", type=parse_complex_list, help="explicit comma separated points")
    b.set_defaults(func=cmd_build)

    e = sub.add_parser("evolve", parents=[common], help="integrate along an isomonodromic time, CSV out")
    e.add_argument("--config", required=True)
    e.add_argument("--span", type=parse_span, required=True, help="start,end of the time")
    e.add_argument("--step", type=_positive_float, default=1e-3)
    e.add_argument("--method", choices=("rk4", "rk45"), default="rk4")
    e.add_argument("--time", help="isomonodromic time name (default: preset time or the first one)")
    e.set_defaults(func=cmd_evolve)

    c = sub.add_parser("check", parents=[common], help="run the verification suite, JSON report")
    c.add_argument("--seed", type=int, default=None, help="default: $ISOMONO_SEED or 0")
    c.add_argument("--cases", type=int, default=20)
    c.add_argument("--config", help="check this configuration instead of random ones")
    c.add_argument("--tol", type=_positive_float, default=None, help="override every tolerance")
    c.add_argument("--checks", default=None, help="comma separated subset of " + ",".join(verify.ALL_CHECKS))
    c.add_argument("--workers", type=int, default=1)
    c.set_defaults(func=cmd_check)

    p = sub.add_parser("preset", parents=[common], help="emit a ready config file")
    p.add_argument("id", choices=PRESET_IDS)
    for name in ("theta", "theta_inf", "theta1", "theta2", "theta3"):
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=parse_complex, default=None,
                       help=f"default {PARAM_DEFAULTS[name]}")
    p.add_argument("--t", type=parse_complex_list, default=None, help="isomonodromic time (P2H2: tau1,tau2)")
    p.add_argument("--q", type=parse_complex_list, default=None)
    p.add_argument("--p", type=parse_complex_list, default=None)
    p.add_argument("--hbar", type=parse_complex, default=1.0)
    p.add_argument("--flow", type=int, choices=(1, 2), default=1)
    p.set_defaults(func=cmd_preset)

    s = sub.add_parser("spectral", parents=[common], help="classical spectral curve coefficients")
    s.add_argument("--config", required=True)
    s.set_defaults(func=cmd_spectral)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 2
    except FileNotFoundError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 2
    except ConfigSchemaError as exc:
        sys.stderr.write(f"schema error at {exc}\n")
        return 1
    except Exception as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
