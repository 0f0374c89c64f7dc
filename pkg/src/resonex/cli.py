"""Command-line front end.

``resonex <subcommand> --config <path> [--out <dir>] [--threads <n>] [--seed <u64>]``

Every run reads one JSON config, validates it against a versioned schema
(unknown keys are rejected) and writes CSV tables and a JSON summary into
the output directory. Exit codes: 0 success, 2 config error, 3 solver
failure; errors are reported as one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import contextlib
import hashlib
import json
import logging
import math
import sys
import time
from importlib import resources
from pathlib import Path
from typing import Any, Callable

import jsonschema
import numpy as np

from . import __version__
from .bie import (
    FieldPointError,
    NystromGrid,
    ScatteringSolveError,
    assemble,
    assemble_derivative,
    assemble_perturbation,
    evaluate_field,
)
from .epfinder import (
    EPContext,
    coalescence_objective,
    degeneracy_ratio,
    encircle,
    epsilon_sweep,
    jordan_solvability,
    nelder_mead,
)
from .geometry import Domain, GeometryError, grid_domain
from .linalg import null_vectors
from .nep import ContourSpec, SSParams, refine, resonances
from .specfun import BranchCutError

__all__ = ["main", "load_config", "ConfigError", "SCHEMA", "COMMANDS", "preset_path"]

log = logging.getLogger("resonex")

SCHEMA_VERSION = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3


class ConfigError(ValueError):
    """The config file is unreadable, fails the schema or describes an invalid geometry."""


# -- schema ------------------------------------------------------------------

_complex = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_point = _complex
_pos = {"type": "number", "exclusiveMinimum": 0}


def _obj(props: dict, required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


_contour = _obj(
    {"center": _complex, "radius": _pos, "nodes": {"type": "integer", "minimum": 8, "multipleOf": 2}},
    ["center", "radius"],
)
_grid = _obj(
    {
        "columns": {"type": "integer", "minimum": 1},
        "rows": {"type": "integer", "minimum": 1},
        "radii": {"type": "array", "items": _pos, "minItems": 2, "maxItems": 2},
        "pitch": {"type": "array", "items": _pos, "minItems": 2, "maxItems": 2},
    },
    ["columns", "radii"],
)
_curve = _obj(
    {
        "kind": {"enum": ["circle", "ellipse"]},
        "center": _point,
        "radius": _pos,
        "radii": {"type": "array", "items": _pos, "minItems": 2, "maxItems": 2},
        "phase": {"type": "number"},
    },
    ["center"],
)
_domain = {
    "oneOf": [
        _obj({"grid": _grid}, ["grid"]),
        _obj({"curves": {"type": "array", "items": _curve, "minItems": 1}}, ["curves"]),
    ]
}
_ss = _obj({
    "probe_rank": {"type": "integer", "minimum": 1},
    "moment_span": {"type": "integer", "minimum": 1},
    "svd_cutoff": _pos,
    "residual_tol": _pos,
    "dedup_tol": _pos,
    "refine": {"type": "boolean"},
    "cluster_gap": _pos,
})
_eps_range = _obj(
    {"min": _pos, "max": _pos, "count": {"type": "integer", "minimum": 2}},
    ["min", "max", "count"],
)

SCHEMA: dict = _obj(
    {
        "schema_version": {"const": SCHEMA_VERSION},
        "description": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "domain": _domain,
        "N": {"type": "integer", "minimum": 4},
        "contour": _contour,
        "ss": _ss,
        "parity": {"enum": [1, -1]},
        "ep_search": _obj({
            "start": {"type": "array", "items": _pos, "minItems": 2, "maxItems": 2},
            "steps": {"type": "array", "items": _pos, "minItems": 2, "maxItems": 2},
            "max_evals": {"type": "integer", "minimum": 1},
            "fatol": {"type": "number", "minimum": 0},
            "xatol": {"type": "number", "minimum": 0},
            "diagnose": {"type": "boolean"},
        }, ["start"]),
        "jordan": _obj({
            "points": {"type": "array", "minItems": 1, "items": _obj(
                {"label": {"type": "string"}, "k": _complex, "refine": {"type": "boolean"}},
                ["k"])},
            "null_tol": _pos,
        }, ["points"]),
        "sweep": _obj({
            "k0": _complex,
            "eps": _eps_range,
            "mode": {"enum": ["pair", "shift"]},
            "fit_min": {"type": "number", "minimum": 0},
            "contour": _contour,
        }, ["k0", "eps"]),
        "encircle": _obj({
            "k0": _complex,
            "radius": _pos,
            "steps": {"type": "integer", "minimum": 16},
            "count": {"type": "integer", "minimum": 1},
            "orientation": {"enum": [1, -1]},
            "contour": _contour,
        }, ["k0", "radius"]),
        "field": _obj({
            "k0": _complex,
            "x": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
            "y": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
            "nx": {"type": "integer", "minimum": 2},
            "ny": {"type": "integer", "minimum": 2},
            "normalize_at": _point,
            "min_distance": {"type": "number", "minimum": 0},
        }, ["k0"]),
        "mech": _obj({
            "chain": _obj({k: _pos for k in ("m", "M", "g", "G", "mu", "gamma")},
                          ["m", "M", "g", "G", "mu", "gamma"]),
            "beta_samples": {"type": "integer", "minimum": 2},
            "J": {"type": "integer", "minimum": 2},
            "hausdorff_tol": _pos,
        }),
    },
    ["schema_version"],
)

# blocks each subcommand needs besides the top level
_NEEDS = {
    "resonances": ("domain", "N", "contour"),
    "ep-search": ("domain", "N", "contour", "ep_search"),
    "sweep": ("domain", "N", "contour", "sweep"),
    "encircle": ("domain", "N", "contour", "encircle"),
    "jordan": ("domain", "N", "jordan"),
    "field": ("domain", "N", "field"),
    "mech": ("mech",),
    "selftest": (),
}


def load_config(source) -> dict:
    """Read and validate a config from a path or an already parsed dict."""
    if isinstance(source, dict):
        cfg = source
    else:
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        try:
            cfg = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from exc
    return cfg


def _require(cfg: dict, command: str):
    missing = [k for k in _NEEDS[command] if k not in cfg]
    if missing:
        raise ConfigError(f"subcommand {command!r} needs config keys {missing}")


def preset_path(name: str) -> Path:
    """Path of a shipped preset (``name`` with or without ``.json``)."""
    if not name.endswith(".json"):
        name += ".json"
    return Path(str(resources.files("resonex") / "presets" / name))


# -- config to objects -------------------------------------------------------

def _c(pair) -> complex:
    return complex(pair[0], pair[1])


def build_domain(spec: dict, radii=None) -> Domain:
    if "grid" in spec:
        g = spec["grid"]
        r1, r2 = radii if radii is not None else g["radii"]
        px, py = g.get("pitch", [1.0, 1.0])
        return grid_domain(g["columns"], g.get("rows", 2), r1, r2, px, py)
    return Domain.from_dict(spec)


def build_contour(spec: dict) -> ContourSpec:
    return ContourSpec(_c(spec["center"]), float(spec["radius"]), int(spec.get("nodes", 64)))


def build_ss(cfg: dict) -> SSParams:
    return SSParams(seed=int(cfg["seed"]), **cfg.get("ss", {}))


def build_grid(cfg: dict, radii=None) -> NystromGrid:
    return NystromGrid(build_domain(cfg["domain"], radii), int(cfg["N"]))


# -- output ------------------------------------------------------------------

def config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.16e}"


class Output:
    """Writes CSV tables and the JSON summary of one run."""

    def __init__(self, directory: Path, cfg: dict):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.stamp = f"# resonex {__version__} config-sha256={config_hash(cfg)}"
        self.files: list[str] = []

    def csv(self, name: str, header: list[str], rows) -> Path:
        path = self.dir / name
        lines = [self.stamp, ",".join(header)]
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        path.write_text("\n".join(lines) + "\n")
        self.files.append(str(path))
        return path

    def json(self, name: str, data: dict) -> Path:
        path = self.dir / name
        body = {"resonex_version": __version__, "config_sha256": self.stamp.rsplit("=", 1)[1]}
        body.update(data)
        path.write_text(json.dumps(_jsonable(body), indent=2, sort_keys=True) + "\n")
        self.files.append(str(path))
        return path


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [_jsonable(x.real), _jsonable(x.imag)]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


# -- subcommands -------------------------------------------------------------

def cmd_resonances(cfg: dict, out: Output) -> dict:
    grid = build_grid(cfg)
    spec = resonances(grid, build_contour(cfg["contour"]), build_ss(cfg), parity=cfg.get("parity"))
    rows = [(e.k.real, e.k.imag, e.residual, e.multiplicity) for e in spec]
    out.csv("resonances.csv", ["re", "im", "residual", "multiplicity"], rows)
    summary = {"count": spec.count, "hankel_rank": spec.hankel_rank,
               "resonances": [e.k for e in spec]}
    out.json("resonances.json", summary)
    return summary


def _pair_nearest(entries, target=None):
    """The two entries closest to each other (or to ``target``)."""
    ks = np.array([e.k for e in entries])
    if target is not None:
        idx = np.argsort(np.abs(ks - target))[:2]
        return [entries[i] for i in sorted(idx)]
    D = np.abs(ks[:, None] - ks[None, :]) + np.diag(np.full(ks.size, np.inf))
    i, j = np.unravel_index(np.argmin(D), D.shape)
    return [entries[min(i, j)], entries[max(i, j)]]


def cmd_ep_search(cfg: dict, out: Output) -> dict:
    if "grid" not in cfg["domain"]:
        raise ConfigError("ep-search needs a grid domain (radii are the search variables)")
    g = cfg["domain"]["grid"]
    ep = cfg["ep_search"]
    contour = build_contour(cfg["contour"])
    params = build_ss(cfg)
    pitch = g.get("pitch", [1.0, 1.0])
    ctx = EPContext(g["columns"], contour, int(cfg["N"]), g.get("rows", 2), pitch[0], pitch[1],
                    params=SSParams(**{**params.__dict__, "refine": False}),
                    parity=cfg.get("parity"))
    res = nelder_mead(
        lambda x: coalescence_objective(x[0], x[1], ctx),
        ep["start"],
        steps=ep.get("steps"),
        max_evals=int(ep.get("max_evals", 500)),
        fatol=float(ep.get("fatol", 1e-7)),
        xatol=float(ep.get("xatol", 1e-12)),
    )
    rows = [(i + 1, x[0], x[1], v) for i, (x, v) in enumerate(res.history)]
    out.csv("ep_iterations.csv", ["eval", "R1", "R2", "objective"], rows)

    R1, R2 = (float(v) for v in res.x)
    report: dict[str, Any] = {
        "R1": R1, "R2": R2, "objective": res.fun, "evaluations": res.nfev,
        "converged": res.converged, "budget_exhausted": res.budget_exhausted,
        "k1": None, "k2": None, "distance": None, "degeneracy_ratio": None,
    }
    grid = ctx.grid(R1, R2)
    spec = resonances(grid, contour, ctx.params, parity=ctx.parity)
    if len(spec.entries) >= 2 and spec.count >= 2:
        e1, e2 = _pair_nearest(spec.entries)
        report.update(k1=e1.k, k2=e2.k, distance=abs(e1.k - e2.k),
                      degeneracy_ratio=degeneracy_ratio(e1.vector, e2.vector, grid.weights))
        if ep.get("diagnose", False):
            k0 = 0.5 * (e1.k + e2.k)
            jr = jordan_solvability(k0, grid, null_tol=1e-6)
            report["jordan"] = {"k0": k0, "derivative_ratio": jr.derivative_ratio,
                                "functional": jr.functional}
    elif spec.count == 1:
        # both eigenvalues merged within the dedup tolerance
        e = spec.entries[0]
        report.update(k1=e.k, k2=e.k, distance=0.0)
    out.json("ep_report.json", report)
    return report


def cmd_jordan(cfg: dict, out: Output) -> dict:
    grid = build_grid(cfg)
    jc = cfg["jordan"]
    null_tol = float(jc.get("null_tol", 1e-6))
    results, rows = [], []
    for i, p in enumerate(jc["points"]):
        k = _c(p["k"])
        if p.get("refine", False):
            rr = refine(k, lambda z: assemble(z, grid), lambda z: assemble_derivative(z, grid))
            if not rr.converged:
                raise ArithmeticError(f"Newton refinement from {k} did not converge")
            k = rr.k
        A = assemble(k, grid)
        psi0 = null_vectors(A, "right", 1)[:, 0]
        jr = jordan_solvability(k, grid, psi0, null_tol=null_tol, A=A)
        label = p.get("label", f"k{i}")
        results.append({"label": label, "k": k, "derivative_ratio": jr.derivative_ratio,
                        "functional": jr.functional, "adjoint_alignment": jr.adjoint_alignment,
                        "adjoint_gap": jr.adjoint_gap})
        rows.append((i, k.real, k.imag, jr.derivative_ratio, jr.functional, jr.adjoint_alignment))
    out.csv("jordan.csv", ["index", "re", "im", "derivative_ratio", "functional", "adjoint_alignment"],
            rows)
    summary = {"points": results}
    out.json("jordan.json", summary)
    return summary


def _perturbed(cfg: dict, block: dict):
    grid = build_grid(cfg)
    B = assemble_perturbation(grid)
    contour = build_contour(block.get("contour", cfg["contour"]))
    params = build_ss(cfg)

    def values(eps):
        return resonances(grid, contour, params, perturbation=B, eps=eps,
                          with_vectors=False, parity=cfg.get("parity")).values

    return values, params


def cmd_sweep(cfg: dict, out: Output) -> dict:
    sw = cfg["sweep"]
    values, params = _perturbed(cfg, sw)
    r = sw["eps"]
    eps = np.logspace(math.log10(r["min"]), math.log10(r["max"]), int(r["count"]))
    mode = sw.get("mode", "pair")
    k0 = _c(sw["k0"])
    fit_min = float(sw.get("fit_min", 10 * params.dedup_tol))
    res = epsilon_sweep(values, k0, eps, mode=mode, min_eps=fit_min)
    rows = []
    for e, vals, d in zip(res.eps, res.values, res.distance):
        v = list(vals) + [complex("nan")] * (2 - len(vals))
        rows.append((e, d, v[0].real, v[0].imag, v[1].real, v[1].imag))
    out.csv("sweep.csv", ["eps", "distance", "k1_re", "k1_im", "k2_re", "k2_im"], rows)
    summary = {"mode": mode, "k0": k0, "slope": res.slope, "stderr": res.stderr,
               "fit_min": fit_min, "dropped": res.dropped}
    out.json("sweep.json", summary)
    return summary


def cmd_encircle(cfg: dict, out: Output) -> dict:
    ec = cfg["encircle"]
    values, _ = _perturbed(cfg, ec)
    count = int(ec.get("count", 2))
    loop = encircle(values, _c(ec["k0"]), float(ec["radius"]), int(ec.get("steps", 64)),
                    count=count, orientation=int(ec.get("orientation", 1)))
    header = ["step", "theta"] + [f"k{i + 1}_{p}" for i in range(count) for p in ("re", "im")]
    rows = []
    for s, (th, ks) in enumerate(zip(loop.theta, loop.trajectories)):
        rows.append([s, th] + [x for k in ks for x in (k.real, k.imag)])
    out.csv("encircle.csv", header, rows)
    summary = {"permutation": loop.permutation, "cycles": loop.cycles,
               "is_identity": loop.is_identity, "swaps": len(loop.swaps)}
    out.json("encircle.json", summary)
    return summary


def cmd_field(cfg: dict, out: Output) -> dict:
    fc = cfg["field"]
    grid = build_grid(cfg)
    k0 = _c(fc["k0"])
    A = assemble(k0, grid)
    phi, sv = null_vectors(A, "right", 1, return_values=True)
    phi = phi[:, 0]
    x0, x1 = fc.get("x", [-2.0, 21.0])
    y0, y1 = fc.get("y", [-3.0, 3.0])
    xs = np.linspace(x0, x1, int(fc.get("nx", 200)))
    ys = np.linspace(y0, y1, int(fc.get("ny", 60)))
    X, Y = np.meshgrid(xs, ys)
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    md = fc.get("min_distance")
    u, valid = evaluate_field(k0, phi, grid, pts, min_distance=md, mask=True)
    ref = np.asarray(fc.get("normalize_at", [9.5, 0.0]), float)
    u_ref = evaluate_field(k0, phi, grid, ref[None, :], min_distance=md)[0]
    if u_ref == 0 or not np.isfinite(u_ref):
        raise ScatteringSolveError(f"field vanishes at the normalization point {ref.tolist()}")
    u = np.where(valid, u / u_ref, 0.0)
    rows = [(p[0], p[1], z.real, z.imag, abs(z), bool(v)) for p, z, v in zip(pts, u, valid)]
    out.csv("field.csv", ["x", "y", "re", "im", "abs", "valid"], rows)
    u_check = evaluate_field(k0, phi, grid, ref[None, :], min_distance=md)[0] / u_ref
    summary = {"k0": k0, "points": len(pts), "valid": int(valid.sum()),
               "all_finite": bool(np.all(np.isfinite(u))),
               "normalization_point": ref, "normalized_value": u_check,
               "null_singular_value": sv[0]}
    out.json("field.json", summary)
    return summary


def cmd_mech(cfg: dict, out: Output) -> dict:
    from .mech import (FIG5_BETA, FIG5_PARAMS, ChainParams, bloch_band, bloch_T,
                       finite_chain, hausdorff, jordan_structure)

    mc = cfg["mech"]
    p = ChainParams(**mc["chain"]) if "chain" in mc else FIG5_PARAMS
    betas = np.linspace(-np.pi, np.pi, int(mc.get("beta_samples", 4001)))
    band = bloch_band(p, betas)
    out.csv("band.csv", ["beta"] + [f"l{i + 1}_{q}" for i in range(4) for q in ("re", "im")],
            [[b] + [x for lam in row for x in (lam.real, lam.imag)] for b, row in zip(betas, band)])
    J = int(mc.get("J", 80))
    vals = np.linalg.eigvals(finite_chain(J, p))
    vals = vals[np.lexsort((vals.imag, vals.real))]
    out.csv("chain.csv", ["re", "im"], [(v.real, v.imag) for v in vals])
    tol = float(mc.get("hausdorff_tol", 0.1))
    flat = band.ravel()
    d_h = hausdorff(vals, flat)
    one_sided = float(np.abs(vals[:, None] - flat[None, :]).min(axis=1).max())
    summary: dict[str, Any] = {
        "J": J, "hausdorff": d_h, "hausdorff_tol": tol, "hausdorff_pass": d_h <= tol,
        "max_eigenvalue_to_band": one_sided,
    }
    if "chain" not in mc:
        js = jordan_structure(bloch_T(FIG5_BETA, p), cluster_tol=1e-6, rank_tol=1e-7)
        summary["bloch_defective"] = [
            {"eigenvalue": e.eigenvalue, "geometric": e.geometric, "algebraic": e.algebraic}
            for e in js
        ]
    out.json("mech.json", summary)
    return summary


def cmd_selftest(cfg: dict, out: Output) -> dict:
    from . import selftest

    results = selftest.run()
    out.csv("selftest.csv", ["check", "passed", "seconds"],
            [(i, r["passed"], r["seconds"]) for i, r in enumerate(results)])
    summary = {"checks": results, "passed": all(r["passed"] for r in results)}
    out.json("selftest.json", summary)
    if not summary["passed"]:
        failed = [r["name"] for r in results if not r["passed"]]
        raise SelftestFailure(f"selftest checks failed: {failed}")
    return summary


class SelftestFailure(ArithmeticError):
    pass


COMMANDS: dict[str, Callable[[dict, Output], dict]] = {
    "resonances": cmd_resonances,
    "ep-search": cmd_ep_search,
    "sweep": cmd_sweep,
    "encircle": cmd_encircle,
    "jordan": cmd_jordan,
    "field": cmd_field,
    "mech": cmd_mech,
    "selftest": cmd_selftest,
}

_SOLVER_ERRORS = (ArithmeticError, FieldPointError, ScatteringSolveError, BranchCutError,
                  np.linalg.LinAlgError)


# -- entry point -------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="resonex", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"resonex {__version__}")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="JSON config file, or preset:<name> for a shipped preset")
    ap.add_argument("--out", default=".", help="output directory (default: current)")
    ap.add_argument("--threads", type=int, default=None, help="cap on BLAS/LAPACK worker threads")
    ap.add_argument("--seed", type=int, default=None, help="override the config seed")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def _fail(kind: str, code: int, exc: BaseException) -> int:
    sys.stderr.write(json.dumps({"error": kind, "type": type(exc).__name__,
                                 "message": str(exc)}) + "\n")
    return code


def run(command: str, cfg: dict, out_dir, seed: int | None = None) -> dict:
    """Validate ``cfg`` and run ``command``; the programmatic twin of :func:`main`."""
    cfg = load_config(cfg)
    cfg = dict(cfg)
    if seed is not None:
        if not 0 <= seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        cfg["seed"] = seed
    cfg.setdefault("seed", 42)
    _require(cfg, command)
    out = Output(Path(out_dir), cfg)
    return COMMANDS[command](cfg, out)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config is None:
            if args.command != "selftest":
                raise ConfigError("--config is required")
            cfg: Any = {"schema_version": SCHEMA_VERSION}
        elif args.config.startswith("preset:"):
            cfg = load_config(preset_path(args.config[len("preset:"):]))
        else:
            cfg = load_config(args.config)
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be positive")
    except ConfigError as exc:
        return _fail("config", EXIT_CONFIG, exc)

    limiter = contextlib.nullcontext()
    if args.threads is not None:
        from threadpoolctl import threadpool_limits

        limiter = threadpool_limits(limits=args.threads)
    t0 = time.perf_counter()
    try:
        with limiter:
            summary = run(args.command, cfg, args.out, args.seed)
    except (ConfigError, GeometryError) as exc:
        return _fail("config", EXIT_CONFIG, exc)
    except _SOLVER_ERRORS as exc:
        return _fail("solver", EXIT_SOLVER, exc)
    log.info("%s finished in %.1f s", args.command, time.perf_counter() - t0)
    print(json.dumps(_jsonable(summary), sort_keys=True))
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
