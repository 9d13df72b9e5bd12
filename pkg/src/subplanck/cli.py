"""Command-line entry point: wigner, sensitivity, scaling and validate.

Exit codes: 0 success, 1 usage or configuration error, 2 validation breach.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import warnings
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__

STATE_KINDS = ["reference", "coherent", "cat_h", "cat_v", "compass", "mixture"]
ROUTES = ["exact_gram", "paper_approx", "oracle_trace"]

_k = {"type": "number", "exclusiveMinimum": 0}
_zeta0 = {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}
_common = {
    "kind": {"enum": STATE_KINDS},
    "k": _k,
    "q": {"type": "integer", "minimum": 0},
    "zeta0": _zeta0,
    "res": {"type": "integer", "minimum": 2, "maximum": 4096},
    "extent": {"type": "number", "exclusiveMinimum": 0},
    "hw": {"type": "boolean"},
    "x0": {"type": "number", "exclusiveMinimum": 0},
    "out": {"type": "string", "minLength": 1},
    "name": {"type": ["string", "null"]},
    "png": {"type": "boolean"},
}

SCHEMAS = {
    "wigner": {
        "type": "object",
        "properties": dict(_common, normalize={"type": "boolean"}, imag={"type": "boolean"}),
        "additionalProperties": False,
    },
    "sensitivity": {
        "type": "object",
        "properties": dict(
            _common,
            route={"enum": ROUTES},
            reading={"enum": ["printed", "normalized"]},
            threshold={"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            directions={"type": "integer", "minimum": 1},
        ),
        "additionalProperties": False,
    },
    "scaling": {
        "type": "object",
        "properties": {
            "feature": {"type": "string"},
            "kset": {"type": "array", "items": _k, "minItems": 5},
            "out": _common["out"],
            "name": _common["name"],
        },
        "additionalProperties": False,
    },
    "validate": {
        "type": "object",
        "properties": {
            "k": {"type": "array", "items": _k, "minItems": 1},
            "quick": {"type": "boolean"},
            "out": _common["out"],
            "name": _common["name"],
        },
        "additionalProperties": False,
    },
}

DEFAULTS = {
    "wigner": {
        "kind": "compass", "k": 10.0, "q": None, "zeta0": 0.8, "res": 256, "extent": None, "hw": False,
        "x0": 4.0, "out": "out", "name": None, "png": True, "normalize": False, "imag": False,
    },
    "sensitivity": {
        "kind": "cat_h", "k": 14.0, "q": None, "zeta0": 0.8, "res": 128, "extent": None, "hw": False,
        "x0": 4.0, "out": "out", "name": None, "png": True, "route": "exact_gram", "reading": "normalized",
        "threshold": 1e-3, "directions": 16,
    },
    "scaling": {"feature": "lobe", "kset": [6, 10, 14, 20, 28, 40], "out": "out", "name": None},
    "validate": {"k": [1, 2, 6, 10, 14], "quick": False, "out": "out", "name": None},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _number_list(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    return [int(v) if v.is_integer() else v for v in vals]


def _flag(p, name, help):
    p.add_argument(f"--{name}", dest=name, action=argparse.BooleanOptionalAction, default=None, help=help)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="subplanck", description="SU(1,1) sub-Planck structure: Wigner maps, sensitivity, scaling, validation.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def state_opts(p):
        p.add_argument("--config", help="JSON file with option values; explicit flags take precedence")
        p.add_argument("--kind", choices=STATE_KINDS)
        p.add_argument("--k", type=float, help="Bargmann index")
        p.add_argument("--q", type=int, help="two-mode photon-number difference; sets k = (q+1)/2")
        p.add_argument("--zeta0", type=float, help="superposition center modulus")
        p.add_argument("--res", type=int, help="grid points per side")
        p.add_argument("--extent", type=float, help="half-width of the square grid")
        _flag(p, "hw", "use the Heisenberg-Weyl compass baseline")
        p.add_argument("--x0", type=float, help="Heisenberg-Weyl compass separation")
        p.add_argument("--out", help="output directory")
        p.add_argument("--name", help="file stem for the outputs")
        _flag(p, "png", "write the PNG heatmap")

    p = sub.add_parser("wigner", help="Wigner function on a grid")
    state_opts(p)
    _flag(p, "normalize", "divide by the value at the origin")
    _flag(p, "imag", "also export the imaginary part")

    p = sub.add_parser("sensitivity", help="displacement fidelity map")
    state_opts(p)
    p.add_argument("--route", choices=ROUTES)
    p.add_argument("--reading", choices=["printed", "normalized"], help="large-k closed-form reading (paper_approx route)")
    p.add_argument("--threshold", type=float)
    p.add_argument("--directions", type=int)

    p = sub.add_parser("scaling", help="log-log scaling fit of a feature extent")
    p.add_argument("--config")
    p.add_argument("--feature")
    p.add_argument("--kset", type=_number_list)
    p.add_argument("--out")
    p.add_argument("--name")

    p = sub.add_parser("validate", help="closed-form versus oracle suite")
    p.add_argument("--config")
    p.add_argument("--k", type=_number_list, help="comma-separated k values")
    _flag(p, "quick", "coarser grids")
    p.add_argument("--out")
    p.add_argument("--name")
    return ap


def _error_path(err: jsonschema.ValidationError) -> str:
    return "/".join(str(x) for x in err.absolute_path) or "<root>"


def validate_config(command: str, cfg: dict) -> None:
    v = jsonschema.Draft202012Validator(SCHEMAS[command])
    errs = sorted(v.iter_errors(cfg), key=lambda e: list(map(str, e.absolute_path)))
    if errs:
        raise UsageError("; ".join(f"config field '{_error_path(e)}': {e.message}" for e in errs))


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults, then the JSON config file, then explicit flags."""
    cmd = args.command
    file_cfg = {}
    if getattr(args, "config", None):
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read config {args.config}: {e}")
        if not isinstance(file_cfg, dict):
            raise UsageError("config field '<root>': must be a JSON object")
        if cmd == "validate" and isinstance(file_cfg.get("k"), (int, float)):
            file_cfg["k"] = [file_cfg["k"]]
        validate_config(cmd, {k: v for k, v in file_cfg.items() if v is not None})
    cli = {k: v for k, v in vars(args).items() if k not in ("command", "config") and v is not None}
    cfg = dict(DEFAULTS[cmd])
    cfg.update(file_cfg)
    cfg.update(cli)
    if cmd in ("wigner", "sensitivity"):
        if cfg.get("q") is not None:
            if "k" in cli or "k" in file_cfg:
                raise UsageError("give either k or q, not both")
            cfg["k"] = (cfg["q"] + 1) / 2
        if cfg["extent"] is None:
            if cmd == "wigner":
                cfg["extent"] = cfg["x0"] + 3.0 if cfg["hw"] else 0.95
            else:
                cfg["extent"] = 2.0 if cfg["hw"] else 0.2
    validate_config(cmd, {k: v for k, v in cfg.items() if v is not None})
    return cfg


# --- output helpers ------------------------------------------------------------


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, (complex, np.complexfloating)):
        return [_jsonable(o.real), _jsonable(o.imag)]
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, (float, np.floating)):
        o = float(o)
        return o if math.isfinite(o) else None
    if isinstance(o, np.ndarray):
        return _jsonable(o.tolist())
    return o


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n")


def write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    data = np.column_stack(columns)
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header=",".join(header), comments="")


def grid_columns(coords, values, mask):
    x, p = np.meshgrid(coords, coords)
    return x[mask], p[mask], values[mask]


def write_heatmap(path: Path, coords, values, title: str, unit_disk: bool, diverging: bool = True, marks=()) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    e = float(coords[-1] + (coords[1] - coords[0]) / 2)
    vals = np.ma.masked_invalid(np.asarray(values, dtype=float))
    fig, ax = plt.subplots(figsize=(5.5, 4.6), dpi=120)
    if diverging:
        vmax = float(np.abs(vals).max()) or 1.0
        cmap = plt.get_cmap("RdBu_r").copy()
        im = ax.imshow(vals, origin="lower", extent=[-e, e, -e, e], cmap=cmap, vmin=-vmax, vmax=vmax, interpolation="nearest")
    else:
        cmap = plt.get_cmap("viridis").copy()
        im = ax.imshow(vals, origin="lower", extent=[-e, e, -e, e], cmap=cmap, vmin=0.0, vmax=1.0, interpolation="nearest")
    cmap.set_bad("0.85")
    if unit_disk:
        t = np.linspace(0, 2 * np.pi, 721)
        ax.plot(np.cos(t), np.sin(t), color="k", lw=0.8)
        ax.set_xlim(-e, e)
        ax.set_ylim(-e, e)
    for x, y in marks:
        ax.plot([x], [y], "r+", ms=9)
    ax.set_xlabel("x")
    ax.set_ylabel("p")
    ax.set_title(title, fontsize=9)
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out: Path, stem: str, command: str, cfg: dict, files: list[Path], extra: dict | None = None) -> Path:
    import scipy

    m = {
        "command": command,
        "config": cfg,
        "version": __version__,
        "environment": {"numpy": np.__version__, "scipy": scipy.__version__},
        "outputs": {f.name: _sha256(f) for f in files if f.suffix != ".png"},
        "figures": sorted(f.name for f in files if f.suffix == ".png"),
    }
    if extra:
        m.update(extra)
    path = out / f"{stem}.manifest.json"
    write_json(path, m)
    return path


def _outdir(cfg) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _hw_grid(res, extent):
    c = -extent + (np.arange(res) + 0.5) * (2 * extent / res)
    x, p = np.meshgrid(c, c)
    return c, x, p


# --- commands ------------------------------------------------------------------


def cmd_wigner(cfg: dict) -> int:
    from .states import build
    from .wigner import wigner_of_state

    out = _outdir(cfg)
    files = []
    extra = {}
    if cfg["hw"]:
        from .hw_baseline import HwCompassParams, hw_wigner_compass

        params = HwCompassParams(cfg["x0"])
        coords, x, p = _hw_grid(cfg["res"], cfg["extent"])
        vals = hw_wigner_compass(params, x, p)
        if cfg["normalize"]:
            vals = vals / float(hw_wigner_compass(params, 0.0, 0.0))
        mask = np.ones(vals.shape, dtype=bool)
        stem = cfg["name"] or f"wigner_hw_x0{cfg['x0']:g}"
        title = f"Heisenberg-Weyl compass, x0 = {cfg['x0']:g}"
        cols = list(grid_columns(coords, vals, mask))
        header = ["x", "p", "w"]
        unit_disk = False
    else:
        state = build(cfg["kind"], cfg["k"], cfg["zeta0"])
        with warnings.catch_warnings(record=True):
            warnings.simplefilter("always")
            grid = wigner_of_state(state, cfg["res"], cfg["extent"], cfg["normalize"])
        vals, mask, coords = grid.values, grid.mask, grid.coords
        stem = cfg["name"] or f"wigner_{cfg['kind']}_k{cfg['k']:g}"
        title = f"{cfg['kind']}, k = {cfg['k']:g}, zeta0 = {cfg['zeta0']:g}"
        x, p, w = grid_columns(coords, vals, mask)
        cols = [x, p, w.real]
        header = ["x", "p", "w"]
        if cfg["imag"]:
            cols.append(w.imag)
            header.append("w_im")
        extra = {
            "state": grid.metadata["state"],
            "w_origin": grid.metadata["w_origin"],
            "normalization": grid.metadata["normalization"],
            "max_abs_imag": grid.max_imag(),
            "warnings": grid.metadata["warnings"],
        }
        unit_disk = True
    csv_path = out / f"{stem}.csv"
    write_csv(csv_path, header, cols)
    files.append(csv_path)
    if cfg["png"]:
        png = out / f"{stem}.png"
        write_heatmap(png, coords, np.where(mask, np.real(vals), np.nan), title, unit_disk)
        files.append(png)
    man = write_manifest(out, stem, "wigner", cfg, files, extra)
    print(f"wrote {', '.join(str(f) for f in files + [man])}")
    return 0


def _sensitivity_summary(state, cfg) -> dict:
    from .sensitivity import direction_sweep, fidelity_roots_cat, isotropy_ratio, predicted_zero_cat
    from .states import build

    sweep = direction_sweep(state, cfg["directions"], threshold=cfg["threshold"])
    summary = {
        "route": cfg["route"],
        "threshold": cfg["threshold"],
        "detection": [{"direction": d.direction, "radius": d.radius} for d in sweep],
        "isotropy_ratio": isotropy_ratio(sweep),
    }
    if cfg["kind"] in ("cat_h", "cat_v"):
        # the vertical cat is the horizontal one rotated by a quarter turn
        roots = fidelity_roots_cat(build("cat_h", cfg["k"], cfg["zeta0"]), d_max=min(0.5, cfg["extent"] * math.sqrt(2)))
        pred = []
        for m in range(len(roots)):
            try:
                pred.append(abs(predicted_zero_cat(cfg["k"], cfg["zeta0"], m)[0]))
            except ValueError:
                pred.append(None)
        summary["roots"] = {
            "axis": "p" if cfg["kind"] == "cat_h" else "x",
            "exact": roots,
            "closed_form": pred,
        }
    return summary


def cmd_sensitivity(cfg: dict) -> int:
    from .sensitivity import fidelity_map
    from .states import build

    out = _outdir(cfg)
    files = []
    marks = []
    if cfg["hw"]:
        from .hw_baseline import HwCompassParams, hw_fidelity_exact, hw_threshold_ratio, hw_zero_lines

        params = HwCompassParams(cfg["x0"])
        coords, x, p = _hw_grid(cfg["res"], cfg["extent"])
        vals = hw_fidelity_exact(params, x + 1j * p)
        mask = np.ones(vals.shape, dtype=bool)
        stem = cfg["name"] or f"sensitivity_hw_x0{cfg['x0']:g}"
        title = f"Heisenberg-Weyl compass fidelity, x0 = {cfg['x0']:g}"
        summary = {
            "route": "exact_gram",
            "threshold_ratio": hw_threshold_ratio(params, cfg["threshold"], cfg["directions"], exact=True),
            "zero_line_m0": hw_zero_lines(params, 0),
        }
    else:
        state = build(cfg["kind"], cfg["k"], cfg["zeta0"])
        fm = fidelity_map(state, cfg["res"], cfg["extent"], cfg["route"], cfg["reading"])
        coords, vals, mask = fm.coords, fm.values, fm.mask
        stem = cfg["name"] or f"sensitivity_{cfg['kind']}_k{cfg['k']:g}"
        title = f"fidelity, {cfg['kind']}, k = {cfg['k']:g}, route {cfg['route']}"
        summary = _sensitivity_summary(state, cfg)
        if "roots" in summary:
            for r in summary["roots"]["closed_form"]:
                if r is not None and r < cfg["extent"]:
                    pts = [(0, r), (0, -r)] if cfg["kind"] == "cat_h" else [(r, 0), (-r, 0)]
                    marks.extend(pts)
    csv_path = out / f"{stem}.csv"
    write_csv(csv_path, ["dx", "dp", "f"], list(grid_columns(coords, np.real(vals), mask)))
    summ_path = out / f"{stem}.summary.json"
    write_json(summ_path, summary)
    files += [csv_path, summ_path]
    if cfg["png"]:
        png = out / f"{stem}.png"
        write_heatmap(png, coords, np.where(mask, np.real(vals), np.nan), title, unit_disk=False, diverging=False, marks=marks)
        files.append(png)
    man = write_manifest(out, stem, "sensitivity", cfg, files)
    print(f"wrote {', '.join(str(f) for f in files + [man])}")
    return 0


def cmd_scaling(cfg: dict) -> int:
    from .analysis import FEATURES, TARGETS, scaling_study

    if cfg["feature"] not in FEATURES:
        raise UsageError(f"config field 'feature': {cfg['feature']!r} is not one of {sorted(FEATURES)}")
    out = _outdir(cfg)
    fit = scaling_study(cfg["feature"], tuple(cfg["kset"]))
    target, tol = TARGETS[cfg["feature"]]
    res = dict(fit.to_dict(), feature=cfg["feature"], target_exponent=target, tolerance=tol,
               within_target=abs(fit.exponent - target) <= tol)
    stem = cfg["name"] or f"scaling_{cfg['feature']}"
    path = out / f"{stem}.json"
    write_json(path, res)
    man = write_manifest(out, stem, "scaling", cfg, [path])
    print(f"{cfg['feature']}: exponent {fit.exponent:.5f} (target {target} +- {tol}), r^2 {fit.r_squared:.6f}")
    print(f"wrote {path}, {man}")
    return 0


def cmd_validate(cfg: dict) -> int:
    from .validation import run

    out = _outdir(cfg)
    report = run(tuple(cfg["k"]), cfg["quick"], log=print)
    stem = cfg["name"] or "validate"
    path = out / f"{stem}.json"
    # timings vary run to run; keep them out of the byte-stable report
    stable = dict(report, checks=[{k: v for k, v in c.items() if k != "seconds"} for c in report["checks"]])
    stable.pop("seconds")
    write_json(path, stable)
    man = write_manifest(out, stem, "validate", cfg, [path])
    print(f"{'PASSED' if report['passed'] else 'FAILED'} in {report['seconds']:.1f} s; wrote {path}, {man}")
    return 0 if report["passed"] else 2


COMMANDS = {"wigner": cmd_wigner, "sensitivity": cmd_sensitivity, "scaling": cmd_scaling, "validate": cmd_validate}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
