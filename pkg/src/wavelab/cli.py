"""Command-line driver: ``wavelab <subcommand> [options]``.

Every run writes into ``--out-dir`` and finishes with ``manifest.json``
(config hash, library versions, produced files with checksums, image scales).
Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 capacity.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import platform
import sys
from pathlib import Path

import numpy as np
import scipy
import scipy.fft

from . import __version__, checks, dynamics, evolution, lagrangian, oscillatory, resolvent
from .errors import ConfigError, WaveLabError
from .operator import load_model
from .spectral_core import GridField, TorusGrid, make_bump, write_field

SUBCOMMANDS = ("evolve", "resolvent", "dynamics", "lagrangian", "oscillatory", "verify")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default="out", help="output directory (created if missing)")
    common.add_argument("--config", help="JSON file whose keys override command-line options")
    common.add_argument("--force", action="store_true", help="allow overwriting existing artifacts")
    common.add_argument("--threads", type=int, default=None, help="FFT worker threads (fallback: WAVE_LAB_THREADS)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized checks")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--model", default="p1", help="built-in name (p1, p2, free) or JSON model file")

    forcing = argparse.ArgumentParser(add_help=False)
    forcing.add_argument("--n", type=int, default=128, help="grid size")
    forcing.add_argument("--bump-center", type=_floats, default=[-np.pi / 2, 0.0])
    forcing.add_argument("--bump-sigma", type=float, default=0.5)

    p = argparse.ArgumentParser(prog="wavelab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"wavelab {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True)

    e = sub.add_parser("evolve", parents=[common, model, forcing], help="RK4 evolution with norm series, snapshots and images")
    e.add_argument("--t-final", type=float, default=50.0)
    e.add_argument("--dt", type=float, default=0.01)
    e.add_argument("--snapshots", type=_floats, default=[0.0, 10.0, 25.0, 50.0])
    e.add_argument("--norms", type=_floats, default=[-0.75, 0.0, 0.25])
    e.add_argument("--norm-every", type=float, default=1.0)

    r = sub.add_parser("resolvent", parents=[common, model, forcing], help="limiting-absorption study")
    r.add_argument("--omega", type=float, default=0.0)
    r.add_argument("--eps", type=_floats, default=[0.2, 0.1, 0.05, 0.025])
    r.add_argument("--side", choices=["PLUS", "MINUS"], default="PLUS")
    r.add_argument("--method", choices=["auto", "dense", "iterative"], default="auto")
    r.add_argument("--preconditioner", choices=["none", "diagonal"], default="none")

    d = sub.add_parser("dynamics", parents=[common, model], help="limit cycles and Floquet multipliers")
    d.add_argument("--omega", type=_floats, default=[0.0])

    lg = sub.add_parser("lagrangian", parents=[common, model], help="Lagrangian slice, Phi and phase-derivative check")
    lg.add_argument("--omega", type=float, default=0.0)
    lg.add_argument("--sign", choices=["PLUS", "MINUS"], default="PLUS")

    o = sub.add_parser("oscillatory", parents=[common], help="stationary-phase table and L(h) scaling")
    o.add_argument("--osc-model", default=None, help='JSON file {"c": "builtin:p1" | [coeffs], "symbol_order", "phi_delta"}')
    o.add_argument("--xi", type=_floats, default=[8, 16, 32, 64, 128, 256])
    o.add_argument("--h-exponents", type=_floats, default=[4, 14], help="h = 2^-k for k in [lo, hi]")

    v = sub.add_parser("verify", parents=[common], help="acceptance checks")
    v.add_argument("--suite", choices=["fast", "full"], default="fast")
    v.add_argument("--n-small", type=int, default=16)
    return p


def apply_config_file(args: argparse.Namespace, parser: argparse.ArgumentParser) -> dict:
    """Merge ``--config`` JSON into the namespace; returns the effective config dict."""
    if args.config:
        path = Path(args.config)
        try:
            data = json.loads(path.read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file {path} not found") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        for key, val in data.items():
            dest = key.replace("-", "_")
            if not hasattr(args, dest) or dest in ("config", "subcommand"):
                raise ConfigError(f"{path}: unknown option {key!r} for {args.subcommand}")
            setattr(args, dest, val)
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("config", "force", "threads", "out_dir")}
    return cfg


class Outputs:
    """Tracks artifacts written in one run and refuses silent overwrites."""

    def __init__(self, out_dir: Path, force: bool):
        self.dir = out_dir
        self.force = force
        self.files: list[Path] = []
        self.images: dict[str, dict] = {}
        out_dir.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        p = self.dir / name
        if p.exists() and not self.force:
            raise ConfigError(f"{p} exists; pass --force to overwrite")
        self.files.append(p)
        return p

    def json(self, name: str, data) -> Path:
        p = self.path(name)
        p.write_text(json.dumps(checks._jsonable(data), indent=2, sort_keys=True) + "\n")
        return p

    def manifest(self, cfg: dict) -> Path:
        canon = json.dumps(checks._jsonable(cfg), sort_keys=True, separators=(",", ":"))
        files = []
        for f in self.files:
            files.append({"path": f.relative_to(self.dir).as_posix(), "sha256": hashlib.sha256(f.read_bytes()).hexdigest()})
        data = {
            "config": cfg,
            "config_hash": hashlib.sha256(canon.encode()).hexdigest(),
            "versions": {"wavelab": __version__, "numpy": np.__version__, "scipy": scipy.__version__, "python": platform.python_version()},
            "files": files,
            "images": self.images,
        }
        p = self.dir / "manifest.json"
        if p.exists() and not self.force:
            raise ConfigError(f"{p} exists; pass --force to overwrite")
        p.write_text(json.dumps(checks._jsonable(data), indent=2, sort_keys=True) + "\n")
        return p


def write_pgm(values: np.ndarray, path: Path) -> float:
    """8-bit binary PGM of a real array, linear and symmetric about 0; returns the scale.

    Pixel = round(127.5 (1 + v / scale)) with scale = max |v|; rows run
    from high x2 (top) to low x2, columns along x1.
    """
    v = np.asarray(values, dtype=float)
    scale = float(np.abs(v).max())
    norm = v / scale if scale > 0 else np.zeros_like(v)
    img = np.clip(np.round(127.5 * (1.0 + norm)), 0, 255).astype(np.uint8)
    img = img.T[::-1]  # array axis 0 is x1; images want x1 horizontal
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode())
        fh.write(img.tobytes())
    return scale


def read_pgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    parts = raw.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    w, h = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w)


def _forcing(args) -> GridField:
    return make_bump(TorusGrid(int(args.n)), tuple(args.bump_center), float(args.bump_sigma))


def run_evolve(args, out: Outputs) -> int:
    model = load_model(args.model)
    cfg = evolution.EvolutionConfig(
        t_final=float(args.t_final), dt=float(args.dt), snapshot_times=list(args.snapshots),
        norm_exponents=list(args.norms), norm_every=float(args.norm_every),
    )
    tr = evolution.evolve_rk4(model, _forcing(args), cfg)
    tr.write_csv(out.path("norms.csv"))
    for t, fld in tr.snapshots:
        write_field(fld, out.path(f"u_t{t:08.3f}.zfld"))
        name = f"re_u_t{t:08.3f}.pgm"
        scale = write_pgm(fld.phys.real, out.path(name))
        out.images[name] = {"quantity": "Re u", "t": t, "scale": scale, "mapping": "pixel = round(127.5 * (1 + v / scale))"}
    return 0


def run_resolvent(args, out: Outputs) -> int:
    model = load_model(args.model)
    q = resolvent.ResolventQuery(f=_forcing(args), eps_list=list(args.eps), omega=float(args.omega),
                                 side=args.side, method=args.method, preconditioner=args.preconditioner)
    st = resolvent.lap_study(model, q)
    resolvent.write_norm_table(st, out.path("resolvent_norms.csv"))
    out.json("resolvent_report.json", st.report())
    for e, u in st.fields:
        write_field(u, out.path(f"u_eps{e:.6g}.zfld"))
    if q.omega == 0.0 and q.side == "PLUS":
        write_field(-st.limit, out.path("u_infinity.zfld"))
    return 0


def run_dynamics(args, out: Outputs) -> int:
    model = load_model(args.model)
    reports = []
    for w in args.omega:
        cyc = dynamics.find_limit_cycles(model, float(w))
        reports.append(dynamics.cycle_report(model, float(w), cyc))
    out.json("cycles.json", {"model": model.name, "slices": reports})
    return 0


def run_lagrangian(args, out: Outputs) -> int:
    model = load_model(args.model)
    sl = lagrangian.build_slice(model, float(args.omega), args.sign)
    for c in sl.components:
        lagrangian.phase_derivative_check(model, sl.omega, c)
    out.json("slice.json", {"model": model.name, **sl.report()})
    return 0


def run_oscillatory(args, out: Outputs) -> int:
    models = {}
    if args.osc_model:
        models["custom"] = oscillatory.load_oscillatory_model(args.osc_model)
    else:
        models["attracting"] = oscillatory.linear_model(*checks.ATTRACTING)
        models["repelling"] = oscillatory.linear_model(*checks.REPELLING)
    report = {}
    for name, m in models.items():
        res = oscillatory.stationary_phase_compare(m, tuple(args.xi))
        path = out.path(f"stationary_phase_{name}.csv")
        with open(path, "w") as fh:
            fh.write("xi,t,re_J,im_J,abs_err,scaled_err,abs_J_xi2\n")
            for r in res["rows"]:
                fh.write(",".join(f"{v:.17g}" for v in (r["xi"], r["t"], r["J"].real, r["J"].imag, r["abs_err"], r["scaled_err"], r["abs_J_xi2"])) + "\n")
        report[name] = {k: v for k, v in res.items() if k != "rows"}
    lo, hi = (int(v) for v in args.h_exponents)
    hs = [2.0**-k for k in range(lo, hi + 1)]
    rows = {"odd": oscillatory.log_scaling_L(checks.zero_G, checks.odd_alpha, hs),
            "even": oscillatory.log_scaling_L(checks.zero_G, checks.even_alpha, hs)}
    path = out.path("L_scaling.csv")
    with open(path, "w") as fh:
        fh.write("h,odd_re_L,odd_im_L,odd_ratio,even_re_L,even_im_L,even_ratio\n")
        for a, b in zip(rows["odd"], rows["even"]):
            fh.write(",".join(f"{v:.17g}" for v in (a["h"], a["L"].real, a["L"].imag, a["ratio"], b["L"].real, b["L"].imag, b["ratio"])) + "\n")
    report["L_scaling"] = oscillatory.log_verdicts(rows["odd"], rows["even"])
    out.json("oscillatory_report.json", report)
    return 0


def run_verify(args, out: Outputs) -> int:
    if args.suite == "fast":
        results = checks.fast_suite(n_small=int(args.n_small), seed=int(args.seed))
    else:
        results = checks.full_suite(seed=int(args.seed))
    for c in results:
        print(c.line())
    failed = [c for c in results if not c.passed]
    out.json("verify_report.json", {
        "suite": args.suite,
        "checks": [c.as_dict() for c in results],
        "verdict": "PASS" if not failed else "FAIL",
    })
    return 3 if failed else 0


RUNNERS = {
    "evolve": run_evolve,
    "resolvent": run_resolvent,
    "dynamics": run_dynamics,
    "lagrangian": run_lagrangian,
    "oscillatory": run_oscillatory,
    "verify": run_verify,
}


def _threads(args) -> int:
    if args.threads is not None:
        return int(args.threads)
    env = os.environ.get("WAVE_LAB_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"WAVE_LAB_THREADS must be an integer, got {env!r}") from None
    return 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out_dir = Path(args.out_dir)
    try:
        cfg = apply_config_file(args, parser)
        out = Outputs(out_dir, bool(args.force))
        with scipy.fft.set_workers(_threads(args)):
            status = RUNNERS[args.subcommand](args, out)
        out.manifest(cfg)
        return status
    except WaveLabError as exc:
        print(f"wavelab: {type(exc).__name__}: {exc}", file=sys.stderr)
        if exc.exit_code == 3:
            diag = {"error": type(exc).__name__, "message": str(exc)}
            for attr in ("history", "step"):
                if getattr(exc, attr, None) is not None:
                    diag[attr] = getattr(exc, attr)
            out_dir.mkdir(parents=True, exist_ok=True)
            (out_dir / "failure.json").write_text(json.dumps(checks._jsonable(diag), indent=2, sort_keys=True) + "\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
