"""Command-line driver.

Subcommands: solve, converge, spd-check, tau-sweep, counts, export.
Exit codes: 0 success, 1 solver or assembly failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import io as hio
from .global_assembly import ProblemData, assemble_global, discretize, flux_recovery
from .mesh import Mesh, MeshError, builtin_mesh, format_mesh, load_mesh
from .sbp1d import minimum_intervals
from .solve import SOLVER_PATHS, FactorizationError, solve_system, trace_schur_matrix, volume_schur_matrix
from . import verify

log = logging.getLogger("hybrid_sbp")

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    """Invalid command-line configuration; the message names the field."""


@dataclass
class RunConfig:
    command: str
    mesh: str = "builtin:two-block"
    order: int = 2
    N: int | None = None
    tau_scale: float = 1.0
    path: str = "all"
    seed: int = 0
    samples: int = 100
    out: str | None = None
    threads: int | None = None
    levels: int = 3
    N0: int = 17
    config: str = "all"
    problem: str = "auto"
    variant: str = "continuous"
    figures: bool = False
    what: str = "all"
    numerical_metrics: bool = False

    @property
    def p(self) -> int:
        return self.order // 2

    def validate(self) -> None:
        if self.order not in (2, 4, 6):
            raise ConfigError(f"--order: must be 2, 4 or 6, got {self.order}")
        if self.N is not None and self.N < minimum_intervals(self.p):
            raise ConfigError(f"--N: order {self.order} needs N >= {minimum_intervals(self.p)}, got {self.N}")
        if not self.tau_scale >= 1.0:
            raise ConfigError(f"--tau-scale: must be >= 1, got {self.tau_scale}")
        if self.path not in SOLVER_PATHS + ("all",):
            raise ConfigError(f"--path: must be one of {SOLVER_PATHS + ('all',)}, got {self.path!r}")
        if self.samples < 1:
            raise ConfigError(f"--samples: must be positive, got {self.samples}")
        if self.levels < 1:
            raise ConfigError(f"--levels: must be positive, got {self.levels}")
        if self.N0 < minimum_intervals(self.p):
            raise ConfigError(f"--N0: order {self.order} needs N >= {minimum_intervals(self.p)}, got {self.N0}")
        if self.threads is not None and self.threads < 1:
            raise ConfigError(f"--threads: must be positive, got {self.threads}")
        if self.problem not in ("auto", "mms", "linear", "constant"):
            raise ConfigError(f"--problem: unknown problem {self.problem!r}")
        if self.variant not in ("continuous", "shifted"):
            raise ConfigError(f"--variant: unknown variant {self.variant!r}")
        if self.figures and not self.out:
            raise ConfigError("--figures: requires --out so images have a place to go")


def _load(name: str) -> Mesh:
    try:
        if name.startswith("builtin:") or name in ("single", "two-block", "disk56"):
            return builtin_mesh(name)
        p = Path(name)
        if not p.exists():
            raise ConfigError(f"--mesh: file {name!r} does not exist")
        return load_mesh(p)
    except MeshError as exc:
        raise ConfigError(f"--mesh: {exc}") from exc


@contextmanager
def _executor(threads):
    n = threads or os.cpu_count() or 1
    if n <= 1:
        yield None
    else:
        with ThreadPoolExecutor(max_workers=n) as ex:
            yield ex


def _emit(cfg: RunConfig, name: str, rows, columns=None):
    text = hio.csv_text(rows, columns)
    if cfg.out:
        path = Path(cfg.out) / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        print(f"wrote {path}", file=sys.stderr)
    else:
        sys.stdout.write(text)


def _figure(cfg: RunConfig, fn, *args):
    if not cfg.figures:
        return
    if not cfg.out:
        raise ConfigError("--figures: requires --out so images have a place to go")
    path = fn(*args)
    print(f"wrote {path}", file=sys.stderr)


# ---------------------------------------------------------------------------


def _linear_problem(a=1.0, bx=2.0, cy=-3.0) -> tuple[ProblemData, callable]:
    def u(b, x, y):
        return a + bx * x + cy * y

    data = ProblemData(
        forcing=lambda b, x, y: np.zeros_like(x),
        dirichlet=u,
        neumann=lambda b, x, y, nx, ny: bx * nx + cy * ny,
        jump=lambda f, x, y: np.zeros_like(x),
    )
    return data, u


def cmd_solve(cfg: RunConfig) -> int:
    mesh = _load(cfg.mesh)
    N = cfg.N if cfg.N is not None else max(17, minimum_intervals(cfg.p))
    problem = cfg.problem
    if problem == "auto":
        problem = "mms" if mesh.name == "disk56" else "linear"
    exact, grad = None, None
    if problem == "mms":
        prob = verify.mms_problem(mesh, cfg.variant)
        data, exact, grad = prob.data(mesh), prob.u, prob.grad
    elif problem == "linear":
        data, exact = _linear_problem()
        grad = lambda b, x, y: (np.full_like(x, 2.0), np.full_like(x, -3.0))  # noqa: E731
    else:
        data, exact = _linear_problem(1.0, 0.0, 0.0)
        grad = lambda b, x, y: (np.zeros_like(x), np.zeros_like(x))  # noqa: E731
    paths = SOLVER_PATHS if cfg.path == "all" else (cfg.path,)
    with _executor(cfg.threads) as ex:
        disc = discretize(mesh, cfg.p, N, cfg.tau_scale, numerical_metrics=cfg.numerical_metrics, executor=ex)
        sysm = assemble_global(disc, data)
        sols = {pth: solve_system(sysm, pth, executor=ex) for pth in paths}
    rows = []
    ref = sols[paths[0]].u
    for pth, sol in sols.items():
        sigma = flux_recovery(sysm, sol.u, sol.lam, data)
        rows.append(
            {
                "path": pth,
                "order": cfg.order,
                "N": N,
                "n_volume": sysm.n_volume,
                "n_trace": sysm.n_trace,
                "volume_error": verify.volume_error(sysm, sol.u, exact),
                "max_error": float(np.abs(sol.u - np.concatenate([np.ravel(exact(b, g.metrics.x, g.metrics.y)) for b, g in enumerate(disc.geometry)])).max()),
                "interface_error": verify.interface_error(sysm, sigma, grad) if mesh.n_interfaces else 0.0,
                "flux_antisymmetry": verify.flux_antisymmetry(sysm, sigma) if mesh.n_interfaces else 0.0,
                "relative_difference": float(np.abs(sol.u - ref).max() / max(np.abs(ref).max(), 1e-300)),
            }
        )
    _emit(cfg, "solve.csv", rows)
    if len(paths) > 1:
        agree = max(r["relative_difference"] for r in rows)
        print(f"three-path agreement: max relative difference {agree:.3e}", file=sys.stderr)
    if cfg.figures:
        from . import report

        _figure(cfg, report.mesh_figure, mesh, Path(cfg.out) / f"mesh_{mesh.name}.png")
    return EXIT_OK


def cmd_converge(cfg: RunConfig) -> int:
    mesh = _load(cfg.mesh)
    path = "trace" if cfg.path == "all" else cfg.path
    rows = []
    with _executor(cfg.threads) as ex:
        for r in verify.convergence_study(mesh, cfg.p, cfg.levels, cfg.N0, cfg.variant, path, executor=ex):
            rows.append(asdict(r))
            print(f"order {r.order} N {r.N}: volume {r.volume_error:.3e} interface {r.interface_error:.3e}", file=sys.stderr)
    cols = ["order", "N", "volume_error", "volume_rate", "interface_error", "interface_rate", "flux_antisymmetry"]
    _emit(cfg, f"convergence_order{cfg.order}.csv", rows, cols)
    if cfg.figures:
        from . import report

        _figure(cfg, report.convergence_figure, rows, Path(cfg.out) / f"convergence_order{cfg.order}.png")
    return EXIT_OK


def cmd_spd_check(cfg: RunConfig) -> int:
    configs = ["all-dirichlet", "one-dirichlet", "all-neumann", "two-block"] if cfg.config == "all" else [cfg.config]
    for c in configs:
        if c not in verify.BC_CONFIGS and c != "two-block":
            raise ConfigError(f"--config: unknown configuration {c!r}")
    rows = []
    summary = []
    for c in configs:
        rule = "3p-1" if c == "two-block" else "3p+2"
        literal, N = verify.spd_grid_size(cfg.p, rule)
        if cfg.N is not None:
            N = cfg.N
        elif N != literal:
            print(f"note: N = {rule} = {literal} is below the order-{cfg.order} minimum; using N = {N}", file=sys.stderr)
        if c == "two-block":
            res = verify.global_spd_suite(cfg.p, N, cfg.samples, cfg.seed, cfg.tau_scale)
            for r in res:
                rows.append({"config": c, "order": cfg.order, "N": N, **r})
            ok = all(min(r["monolithic"], r["trace"], r["volume"]) > 0 for r in res)
            summary.append(f"{c}: {'positive definite' if ok else 'NOT positive definite'} in {sum(min(r['monolithic'], r['trace'], r['volume']) > 0 for r in res)}/{len(res)} samples")
        else:
            res = verify.local_spd_suite(cfg.p, N, c, cfg.samples, cfg.seed, cfg.tau_scale)
            for r in res:
                rows.append({"config": c, "order": cfg.order, "N": N, "monolithic": r["lambda_min"], **r})
            if c == "all-neumann":
                ok = all(r["relative"] < 1e-12 for r in res)
                summary.append(f"{c}: singular (expected) in {sum(r['relative'] < 1e-12 for r in res)}/{len(res)} samples")
            else:
                ok = all(r["lambda_min"] > 0 for r in res)
                summary.append(f"{c}: positive definite in {sum(r['lambda_min'] > 0 for r in res)}/{len(res)} samples")
        if not ok:
            log.warning("positivity check failed for %s", c)
    cols = ["config", "order", "N", "sample", "monolithic", "trace", "volume", "lambda_min", "relative", "ones_correlation"]
    _emit(cfg, f"spd_order{cfg.order}.csv", rows, cols)
    for s in summary:
        print(s, file=sys.stderr)
    if cfg.figures:
        from . import report

        for c in configs:
            sub = [r for r in rows if r["config"] == c]
            columns = ("monolithic", "trace", "volume") if c == "two-block" else ("lambda_min",)
            _figure(cfg, report.spd_figure, sub, Path(cfg.out) / f"spd_order{cfg.order}_{c}.png", columns)
    failed = [s for s in summary if "NOT" in s]
    return EXIT_FAILURE if failed else EXIT_OK


def cmd_tau_sweep(cfg: RunConfig) -> int:
    N = cfg.N if cfg.N is not None else verify.spd_grid_size(cfg.p, "3p+2")[1]
    res = verify.tau_sweep(cfg.p, N, seed=cfg.seed)
    rows = [{"order": cfg.order, "N": N, **r} for r in res]
    _emit(cfg, f"tau_sweep_order{cfg.order}.csv", rows)
    top = [r for r in res if r["tau_scale"] >= 2.0**6]
    slope = verify.loglog_slope([r["tau_scale"] for r in top], [r["lambda_max"] for r in top])
    print(f"lambda_max log-log slope over tau_s >= 64: {slope:.4f}", file=sys.stderr)
    if cfg.figures:
        from . import report

        _figure(cfg, report.tau_sweep_figure, rows, Path(cfg.out) / f"tau_sweep_order{cfg.order}.png")
    return EXIT_OK


def cmd_counts(cfg: RunConfig) -> int:
    mesh = _load(cfg.mesh)
    Ns = [cfg.N0 * 2**k for k in range(cfg.levels)]
    _emit(cfg, "counts.csv", verify.point_counts(mesh, Ns))
    if cfg.figures:
        from . import report

        _figure(cfg, report.mesh_figure, mesh, Path(cfg.out) / f"mesh_{mesh.name}.png")
    return EXIT_OK


def cmd_export(cfg: RunConfig) -> int:
    if not cfg.out:
        raise ConfigError("--out: export needs an output directory")
    mesh = _load(cfg.mesh)
    N = cfg.N if cfg.N is not None else max(17, minimum_intervals(cfg.p))
    out = Path(cfg.out)
    with _executor(cfg.threads) as ex:
        disc = discretize(mesh, cfg.p, N, cfg.tau_scale, numerical_metrics=cfg.numerical_metrics, executor=ex)
        sysm = assemble_global(disc)
        mats = {
            "monolithic": lambda: sysm.monolithic(),
            "M": lambda: sysm.M,
            "F": lambda: sysm.F,
            "D": lambda: np.asarray(sysm.D)[:, None],
            "block": lambda: disc.locals[0].M,
            "trace": lambda: trace_schur_matrix(sysm, ex),
            "volume": lambda: volume_schur_matrix(sysm),
        }
        wanted = list(mats) if cfg.what == "all" else cfg.what.split(",")
        for w in wanted:
            if w not in mats:
                raise ConfigError(f"--what: unknown matrix {w!r}; choose from {sorted(mats)}")
        (out / "mesh.txt").parent.mkdir(parents=True, exist_ok=True)
        (out / "mesh.txt").write_text(format_mesh(mesh))
        for w in wanted:
            A = mats[w]()
            hio.write_matrix_market(out / f"{w}.mtx", A)
            if w != "D":
                hio.write_sparsity(out / f"{w}_sparsity.csv", A)
            if cfg.figures and w != "D":
                from . import report

                report.sparsity_figure(A, out / f"{w}_sparsity.png", title=w)
            print(f"wrote {out / (w + '.mtx')}", file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "converge": cmd_converge,
    "spd-check": cmd_spd_check,
    "tau-sweep": cmd_tau_sweep,
    "counts": cmd_counts,
    "export": cmd_export,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hybrid-sbp", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, mesh_default="builtin:two-block"):
        p.add_argument("--mesh", default=mesh_default, help="builtin:single, builtin:two-block, builtin:disk56 or a mesh file")
        p.add_argument("--order", type=int, default=2, help="interior order 2p (2, 4 or 6)")
        p.add_argument("--N", type=int, default=None, help="grid intervals per block direction")
        p.add_argument("--tau-scale", type=float, default=1.0)
        p.add_argument("--out", default=None, help="output directory (CSV goes to stdout when omitted)")
        p.add_argument("--threads", type=int, default=None, help="worker threads (default: available cores)")
        p.add_argument("--figures", action="store_true", help="also render PNG figures into --out")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("solve", help="one solve with error report")
    common(p)
    p.add_argument("--path", default="all", help="monolithic, trace, volume or all")
    p.add_argument("--problem", default="auto", help="auto, mms, linear or constant")
    p.add_argument("--variant", default="continuous", help="manufactured solution variant")
    p.add_argument("--numerical-metrics", action="store_true")

    p = sub.add_parser("converge", help="manufactured-solution sweep over N = N0 * 2^k")
    common(p, "builtin:disk56")
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--N0", type=int, default=17)
    p.add_argument("--path", default="trace")
    p.add_argument("--variant", default="continuous")

    p = sub.add_parser("spd-check", help="randomized positivity suites")
    common(p)
    p.add_argument("--config", default="all", help="all-dirichlet, one-dirichlet, all-neumann, two-block or all")
    p.add_argument("--samples", type=int, default=100)

    p = sub.add_parser("tau-sweep", help="extreme eigenvalues versus penalty scale")
    common(p)

    p = sub.add_parser("counts", help="volume and trace point counts")
    common(p, "builtin:disk56")
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--N0", type=int, default=17)

    p = sub.add_parser("export", help="matrices in Matrix Market form plus sparsity pairs")
    common(p)
    p.add_argument("--what", default="all", help="comma list of monolithic,M,F,D,block,trace,volume")
    p.add_argument("--numerical-metrics", action="store_true")
    return ap


def _provenance(exc: BaseException) -> str:
    mod = "hybrid_sbp"
    for frame in traceback.extract_tb(exc.__traceback__):
        name = Path(frame.filename).stem
        if "hybrid_sbp" in frame.filename:
            mod = f"hybrid_sbp.{name}"
    return mod


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    fields = {k.replace("-", "_"): v for k, v in vars(args).items() if k != "verbose"}
    cfg = RunConfig(**{k: v for k, v in fields.items() if k in RunConfig.__dataclass_fields__})
    try:
        cfg.validate()
        return COMMANDS[cfg.command](cfg)
    except (ConfigError, MeshError) as exc:
        print(f"error [{_provenance(exc)}]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FactorizationError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"error [{_provenance(exc)}]: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except ValueError as exc:
        print(f"error [{_provenance(exc)}]: {exc}", file=sys.stderr)
        return EXIT_FAILURE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
