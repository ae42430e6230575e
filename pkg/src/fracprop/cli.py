"""Command-line driver: every experiment as a subcommand writing a table.

Output schemas (CSV columns, in order):

    ml-eval                  alpha,t,omega,re,im,modulus,method,err_est
    bound-sweep              alpha,omega_max,sup_modulus,argmax_omega
    propagate (default)      t,index,re,im
    propagate --trace-norm   t,norm
    propagate --alpha-sweep  alpha,error,status
    propagate --certify      phase,h,residual,rate
    propagate --adjoint-check  t,adjoint_defect,gram_defect
    semigroup-check          h,defect,ratio

Every output starts with ``#`` lines holding the package version and the
full run configuration as JSON; :meth:`RunConfig.from_output` reads it back.
Floats are written with ``repr`` so identical configs give identical bytes.
Exit codes: 0 success, 1 invalid configuration, 2 numerical failure,
3 I/O failure.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import click
import numpy as np

from fracprop import __version__
from fracprop.errors import ConfigError, FracpropError, NumericalError
from fracprop.fracops import SampledPath, TimeGrid, semigroup_defect, startup_skip
from fracprop.mlf import RayPoint, ml_ray_value, ml_sup_sweep_detail
from fracprop.propagator import (
    SolutionFamily,
    adjoint_propagate,
    alpha_sweep,
    gram_multiplier,
    norm_trace,
    propagate,
    residual_certify,
)
from fracprop.spectral import HermitianModel, PeriodicGrid, apply_spectral, decompose

CLI_TOL = 1e-10
MODES = ("state", "trace-norm", "alpha-sweep", "certify", "adjoint-check")
SEMIGROUP_PATHS = ("one", "linear", "sin")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3


# {{{ run configuration


@dataclass(frozen=True)
class RunConfig:
    command: str
    alpha: tuple[float, ...] = ()
    t: tuple[float, ...] = ()
    omega: tuple[float, ...] = ()
    omega_max: float | None = None
    n: int | None = None
    compare: bool = True
    matrix: str | None = None
    grid: str | None = None
    state: str | None = None
    mode: str = "state"
    h: float | None = None
    t_end: float | None = None
    beta: float | None = None
    path: str | None = None
    tol: float = CLI_TOL
    format: str = "csv"

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunConfig:
        data = dict(data)
        for key in ("alpha", "t", "omega"):
            data[key] = tuple(float(x) for x in data.get(key, ()))
        return cls(**data)

    @classmethod
    def from_output(cls, text: str) -> RunConfig:
        """Recover the configuration from a CSV header or a JSON document."""
        stripped = text.lstrip()
        if stripped.startswith("{"):
            return cls.from_dict(json.loads(stripped)["config"])
        for line in text.splitlines():
            if line.startswith("# config: "):
                return cls.from_dict(json.loads(line[len("# config: "):]))
        raise ValueError("no configuration header found")

    def validate(self) -> None:
        check = _VALIDATORS.get(self.command)
        if check is None:
            raise ConfigError("command", f"unknown subcommand {self.command!r}")
        _check_positive("tol", self.tol)
        if self.tol >= 1.0:
            raise ConfigError("tol", f"must be below 1, got {self.tol!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError("format", f"must be csv or json, got {self.format!r}")
        check(self)


def _check_positive(field: str, x: float | None) -> None:
    if x is None or not (math.isfinite(x) and x > 0.0):
        raise ConfigError(field, f"must be finite and positive, got {x!r}")


def _check_alphas(alphas: Sequence[float]) -> None:
    if not alphas:
        raise ConfigError("alpha", "at least one value is required")
    for a in alphas:
        if not (0.0 < a <= 1.0):
            raise ConfigError("alpha", f"must lie in (0, 1], got {a!r}")


def _check_times(field: str, ts: Sequence[float]) -> None:
    if not ts:
        raise ConfigError(field, "at least one value is required")
    for t in ts:
        if not (math.isfinite(t) and t >= 0.0):
            raise ConfigError(field, f"must be finite and >= 0, got {t!r}")


def _validate_ml_eval(cfg: RunConfig) -> None:
    _check_alphas(cfg.alpha)
    _check_times("t", cfg.t)
    _check_times("omega", cfg.omega)


def _validate_bound_sweep(cfg: RunConfig) -> None:
    _check_alphas(cfg.alpha)
    _check_positive("omega_max", cfg.omega_max)
    if cfg.omega_max <= 1e-4:
        raise ConfigError("omega_max", f"must exceed 1e-4, got {cfg.omega_max!r}")
    if cfg.n is None or cfg.n < 2:
        raise ConfigError("n", f"must be at least 2, got {cfg.n!r}")


def _validate_propagate(cfg: RunConfig) -> None:
    if cfg.mode not in MODES:
        raise ConfigError("mode", f"must be one of {', '.join(MODES)}, got {cfg.mode!r}")
    if (cfg.matrix is None) == (cfg.grid is None):
        raise ConfigError("matrix", "give exactly one of --matrix and --grid")
    _check_alphas(cfg.alpha)
    if cfg.mode != "alpha-sweep" and len(cfg.alpha) != 1:
        raise ConfigError("alpha", "a single value is required outside --alpha-sweep")
    if cfg.mode == "certify":
        _check_positive("h", cfg.h)
        _check_positive("t_end", cfg.t_end)
        if round(cfg.t_end / cfg.h) + 1 < 100:
            raise ConfigError("h", f"t_end / h must give at least 100 nodes, got h={cfg.h!r}")
    else:
        _check_times("t", cfg.t)
        if cfg.mode == "trace-norm" and list(cfg.t) != sorted(cfg.t):
            raise ConfigError("t", "times must be ascending for --trace-norm")
        if cfg.mode == "alpha-sweep" and len(cfg.t) != 1:
            raise ConfigError("t", "--alpha-sweep takes a single time")
    if cfg.state is None:
        raise ConfigError("state", "an initial state is required")


def _validate_semigroup(cfg: RunConfig) -> None:
    if len(cfg.alpha) != 1:
        raise ConfigError("alpha", "a single value is required")
    _check_positive("alpha", cfg.alpha[0])
    _check_positive("beta", cfg.beta)
    _check_positive("h", cfg.h)
    _check_positive("t_end", cfg.t_end)
    if round(cfg.t_end / cfg.h) + 1 < 4:
        raise ConfigError("h", f"t_end / h must give at least 4 nodes, got h={cfg.h!r}")
    if cfg.path not in SEMIGROUP_PATHS:
        raise ConfigError("path", f"must be one of {', '.join(SEMIGROUP_PATHS)}, got {cfg.path!r}")


_VALIDATORS = {
    "ml-eval": _validate_ml_eval,
    "bound-sweep": _validate_bound_sweep,
    "propagate": _validate_propagate,
    "semigroup-check": _validate_semigroup,
}


# }}}


# {{{ model and state sources


def _parse_complex(token: str, field: str) -> complex:
    try:
        return complex(token)
    except ValueError:
        raise ConfigError(field, f"cannot parse {token!r} as a complex number") from None


def _split_source(spec: str, field: str) -> tuple[str, str]:
    kind, sep, rest = spec.partition(":")
    if not sep:
        raise ConfigError(field, f"expected KIND:VALUE, got {spec!r}")
    return kind, rest


def read_matrix_file(path: str | Path) -> np.ndarray:
    """First line ``n``, then ``n`` lines of ``n`` tokens like ``1+2j``."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ConfigError("matrix", f"{path} is empty")
    try:
        n = int(lines[0])
    except ValueError:
        raise ConfigError("matrix", f"first line of {path} must be the dimension") from None
    rows = [ln.split() for ln in lines[1:]]
    if n < 1 or len(rows) != n or any(len(r) != n for r in rows):
        raise ConfigError("matrix", f"{path} does not hold an {n} x {n} matrix")
    return np.array([[_parse_complex(tok, "matrix") for tok in r] for r in rows])


def load_model(cfg: RunConfig):
    if cfg.grid is not None:
        parts = cfg.grid.split(",")
        if len(parts) != 2:
            raise ConfigError("grid", f"expected N,L, got {cfg.grid!r}")
        try:
            return PeriodicGrid(int(parts[0]), float(parts[1]))
        except ValueError as exc:
            raise ConfigError("grid", str(exc)) from None

    kind, rest = _split_source(cfg.matrix, "matrix")
    if kind == "diag":
        try:
            values = [float(x) for x in rest.split(",")]
        except ValueError:
            raise ConfigError("matrix", f"bad diagonal list {rest!r}") from None
        entries = np.diag(np.asarray(values, dtype=complex))
    elif kind == "file":
        entries = read_matrix_file(rest)
    else:
        raise ConfigError("matrix", f"unknown matrix source {kind!r}")
    try:
        return decompose(HermitianModel(entries))
    except (FracpropError, ValueError) as exc:
        raise ConfigError("matrix", str(exc)) from None


def load_state(cfg: RunConfig, model) -> np.ndarray:
    kind, rest = _split_source(cfg.state, "state")
    dim = model.dim
    if kind == "basis":
        try:
            i = int(rest)
        except ValueError:
            raise ConfigError("state", f"bad basis index {rest!r}") from None
        if not 0 <= i < dim:
            raise ConfigError("state", f"basis index {i} out of range for dimension {dim}")
        u = np.zeros(dim, dtype=complex)
        u[i] = 1.0
        return u
    if kind == "gaussian":
        if not isinstance(model, PeriodicGrid):
            raise ConfigError("state", "gaussian presets need a --grid model")
        try:
            c, w = (float(x) for x in rest.split(","))
        except ValueError:
            raise ConfigError("state", f"expected gaussian:CENTER,WIDTH, got {cfg.state!r}") from None
        _check_positive("state", w)
        x = model.points
        return np.exp(-((x - c) ** 2) / (2.0 * w * w)).astype(complex)
    if kind == "file":
        tokens = Path(rest).read_text().split()
        u = np.array([_parse_complex(tok, "state") for tok in tokens])
        if u.size != dim:
            raise ConfigError("state", f"{rest} holds {u.size} entries, model has dimension {dim}")
        return u
    raise ConfigError("state", f"unknown state source {kind!r}")


# }}}


# {{{ commands


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list[tuple]
    notes: tuple[str, ...] = ()


def cmd_ml_eval(cfg: RunConfig) -> Table:
    rows = []
    for a in cfg.alpha:
        for t in cfg.t:
            for w in cfg.omega:
                try:
                    val = ml_ray_value(RayPoint(a, t, w), cfg.tol)
                except NumericalError as exc:
                    raise type(exc)(f"alpha={a!r} t={t!r} omega={w!r}: {exc}") from exc
                z = val.value
                rows.append((a, t, w, z.real, z.imag, abs(z), val.method.value, val.err_est))
    return Table(("alpha", "t", "omega", "re", "im", "modulus", "method", "err_est"), rows)


def cmd_bound_sweep(cfg: RunConfig) -> Table:
    maxima = [cfg.omega_max, 2.0 * cfg.omega_max] if cfg.compare else [cfg.omega_max]
    rows = []
    for wmax in maxima:
        for a in cfg.alpha:
            try:
                sup, arg = ml_sup_sweep_detail(a, wmax, cfg.n, cfg.tol)
            except NumericalError as exc:
                raise type(exc)(f"alpha={a!r} omega_max={wmax!r}: {exc}") from exc
            rows.append((a, wmax, sup, arg))
    return Table(("alpha", "omega_max", "sup_modulus", "argmax_omega"), rows)


def _probe_vector(dim: int) -> np.ndarray:
    return np.full(dim, 1.0 / math.sqrt(dim), dtype=complex)


def cmd_propagate(cfg: RunConfig) -> Table:
    model = load_model(cfg)
    u0 = load_state(cfg, model)

    if cfg.mode == "alpha-sweep":
        points = alpha_sweep(model, cfg.alpha, cfg.t[0], u0, cfg.tol)
        rows = [(p.alpha, p.error, p.failure or "ok") for p in points]
        return Table(("alpha", "error", "status"), rows)

    family = SolutionFamily(model, cfg.alpha[0], cfg.tol)

    if cfg.mode == "trace-norm":
        ts = sorted({0.0, *cfg.t})
        return Table(("t", "norm"), list(norm_trace(family, u0, ts)))

    if cfg.mode == "certify":
        rows = []
        prev = None
        for h in (cfg.h, cfg.h / 2.0):
            r = residual_certify(family, TimeGrid.covering(cfg.t_end, h), u0)
            rate = math.log2(prev / r) if prev is not None else math.nan
            rows.append(("-i", h, r, rate))
            prev = r
        control = residual_certify(family, TimeGrid.covering(cfg.t_end, cfg.h), u0, phase_sign=1)
        rows.append(("+i", cfg.h, control, math.nan))
        n = TimeGrid.covering(cfg.t_end, cfg.h).n
        note = f"startup exclusion: first {startup_skip(n)} of {n} nodes at h={cfg.h!r}"
        return Table(("phase", "h", "residual", "rate"), rows, (note,))

    if cfg.mode == "adjoint-check":
        phi = _probe_vector(model.dim)
        rows = []
        for t in cfg.t:
            fwd = propagate(family, t, u0).values
            adj = adjoint_propagate(family, t, phi).values
            inner = abs(np.vdot(phi, fwd) - np.vdot(adj, u0))
            gram_u = apply_spectral(model, gram_multiplier(family, t), u0).values
            uu = adjoint_propagate(family, t, fwd).values
            vv = propagate(family, t, adjoint_propagate(family, t, u0)).values
            gram = max(np.linalg.norm(uu - gram_u), np.linalg.norm(vv - gram_u))
            rows.append((t, float(inner), float(gram)))
        return Table(("t", "adjoint_defect", "gram_defect"), rows)

    rows = []
    for t in cfg.t:
        u = propagate(family, t, u0).values
        rows.extend((t, i, v.real, v.imag) for i, v in enumerate(u))
    return Table(("t", "index", "re", "im"), rows)


def _semigroup_path(name: str):
    if name == "one":
        return lambda t: np.ones_like(t)
    if name == "linear":
        return lambda t: t
    return np.sin


def cmd_semigroup_check(cfg: RunConfig) -> Table:
    f = _semigroup_path(cfg.path)
    rows = []
    prev = None
    for h in (cfg.h, cfg.h / 2.0):
        u = SampledPath.from_function(TimeGrid.covering(cfg.t_end, h), f)
        d = semigroup_defect(cfg.alpha[0], cfg.beta, u)
        ratio = prev / d if prev is not None and d > 0.0 else math.nan
        rows.append((h, d, ratio))
        prev = d
    return Table(("h", "defect", "ratio"), rows)


_COMMANDS = {
    "ml-eval": cmd_ml_eval,
    "bound-sweep": cmd_bound_sweep,
    "propagate": cmd_propagate,
    "semigroup-check": cmd_semigroup_check,
}


def run_config(cfg: RunConfig) -> Table:
    cfg.validate()
    return _COMMANDS[cfg.command](cfg)


# }}}


# {{{ rendering


def _cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x) + 0.0)
    return str(x)


def _json_cell(x):
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x) + 0.0
        return x if math.isfinite(x) else None
    return x


def render(cfg: RunConfig, table: Table) -> str:
    if cfg.format == "json":
        doc = {
            "version": __version__,
            "config": dataclasses.asdict(cfg),
            "notes": list(table.notes),
            "columns": list(table.columns),
            "rows": [[_json_cell(x) for x in row] for row in table.rows],
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    lines = [f"# fracprop {__version__}", f"# config: {cfg.to_json()}"]
    lines.extend(f"# {note}" for note in table.notes)
    lines.append(",".join(table.columns))
    lines.extend(",".join(_cell(x) for x in row) for row in table.rows)
    return "\n".join(lines) + "\n"


def write_atomic(path: str | Path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def emit(cfg: RunConfig, table: Table, out: str | None) -> None:
    text = render(cfg, table)
    if out is None:
        click.echo(text, nl=False)
    else:
        write_atomic(out, text)


# }}}


# {{{ click interface


class FloatList(click.ParamType):
    name = "float-list"

    def convert(self, value, param, ctx):
        if isinstance(value, tuple):
            return value
        try:
            return tuple(float(x) for x in str(value).split(","))
        except ValueError:
            self.fail(f"{value!r} is not a comma-separated list of numbers", param, ctx)


FLOATS = FloatList()


def _common(fn):
    fn = click.option("--tol", type=float, default=CLI_TOL, show_default=True,
                      help="Target accuracy of Mittag-Leffler evaluations.")(fn)
    fn = click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
                      show_default=True)(fn)
    fn = click.option("--out", type=click.Path(dir_okay=False), default=None,
                      help="Output file (default: stdout).")(fn)
    return fn


def _run(cfg: RunConfig, out: str | None) -> None:
    emit(cfg, run_config(cfg), out)


@click.group()
@click.version_option(__version__, prog_name="fracprop")
def cli() -> None:
    """Time-fractional Schrodinger propagation experiments."""


@cli.command("ml-eval")
@click.option("--alpha", type=FLOATS, required=True, help="Comma-separated orders in (0, 1].")
@click.option("--t", "t", type=FLOATS, required=True, help="Comma-separated times.")
@click.option("--omega", type=FLOATS, required=True, help="Comma-separated spectral values.")
@_common
def ml_eval_cmd(alpha, t, omega, tol, fmt, out):
    """Evaluate E_alpha((-i t)^alpha omega) on a product grid."""
    _run(RunConfig("ml-eval", alpha=alpha, t=t, omega=omega, tol=tol, format=fmt), out)


@cli.command("bound-sweep")
@click.option("--alpha", type=FLOATS, default="0.3,0.5,0.7,0.9", show_default=True)
@click.option("--omega-max", type=float, default=1e6, show_default=True)
@click.option("--n", "n", type=int, default=10000, show_default=True,
              help="Sweep points (omega = 0 plus log-spaced).")
@click.option("--compare/--no-compare", default=True, show_default=True,
              help="Append rows for a doubled omega_max.")
@_common
def bound_sweep_cmd(alpha, omega_max, n, compare, tol, fmt, out):
    """Sup of |E_alpha((-i)^alpha omega)| over omega in [0, omega_max]."""
    cfg = RunConfig("bound-sweep", alpha=alpha, omega_max=omega_max, n=n, compare=compare,
                    tol=tol, format=fmt)
    _run(cfg, out)


@cli.command("propagate")
@click.option("--alpha", type=float, default=None, help="Order in (0, 1].")
@click.option("--alpha-sweep", type=FLOATS, default=None,
              help="Compare several orders against exp(-itA).")
@click.option("--matrix", default=None, help="diag:a1,a2,... or file:PATH.")
@click.option("--grid", default=None, help="N,L: periodic grid on [-L/2, L/2).")
@click.option("--state", default=None,
              help="basis:I, gaussian:CENTER,WIDTH or file:PATH "
                   "(default basis:0 for matrices, gaussian:0,1 for grids).")
@click.option("--t", "t", type=FLOATS, default="1", show_default=True)
@click.option("--trace-norm", is_flag=True, help="Report (t, norm) rows, t = 0 included.")
@click.option("--certify", is_flag=True, help="Residual certificate on [0, --t-end].")
@click.option("--adjoint-check", is_flag=True, help="Adjoint and gram identities.")
@click.option("--h", type=float, default=1e-3, show_default=True)
@click.option("--t-end", type=float, default=1.0, show_default=True)
@_common
def propagate_cmd(alpha, alpha_sweep, matrix, grid, state, t, trace_norm, certify,
                  adjoint_check, h, t_end, tol, fmt, out):
    """Apply U_alpha(t) to an initial state."""
    flags = [m for m, on in (("trace-norm", trace_norm), ("alpha-sweep", alpha_sweep is not None),
                             ("certify", certify), ("adjoint-check", adjoint_check)) if on]
    if len(flags) > 1:
        raise ConfigError("mode", f"choose one mode, got {', '.join(flags)}")
    mode = flags[0] if flags else "state"
    if mode == "alpha-sweep":
        if alpha is not None:
            raise ConfigError("alpha", "--alpha and --alpha-sweep are exclusive")
        alphas = alpha_sweep
    elif alpha is None:
        raise ConfigError("alpha", "--alpha is required")
    else:
        alphas = (alpha,)
    if state is None:
        state = "gaussian:0,1" if grid is not None else "basis:0"
    certify_mode = mode == "certify"
    cfg = RunConfig(
        "propagate", alpha=alphas, t=() if certify_mode else t, matrix=matrix, grid=grid,
        state=state, mode=mode, h=h if certify_mode else None,
        t_end=t_end if certify_mode else None, tol=tol, format=fmt,
    )
    _run(cfg, out)


@cli.command("semigroup-check")
@click.option("--alpha", type=float, default=0.5, show_default=True)
@click.option("--beta", type=float, default=0.5, show_default=True)
@click.option("--h", type=float, default=1e-3, show_default=True)
@click.option("--t-end", type=float, default=1.0, show_default=True)
@click.option("--path", type=click.Choice(SEMIGROUP_PATHS), default="one", show_default=True,
              help="Test function: 1, t or sin t.")
@_common
def semigroup_check_cmd(alpha, beta, h, t_end, path, tol, fmt, out):
    """Defect of J^(alpha+beta) = J^alpha J^beta at h and h/2."""
    cfg = RunConfig("semigroup-check", alpha=(alpha,), beta=beta, h=h, t_end=t_end, path=path,
                    tol=tol, format=fmt)
    _run(cfg, out)


def main(argv: Sequence[str] | None = None) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    try:
        rv = cli.main(args=list(argv) if argv is not None else None, prog_name="fracprop",
                      standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_CONFIG
    except click.ClickException as exc:
        exc.show()
        return EXIT_CONFIG
    except NumericalError as exc:
        click.echo(f"numerical failure: {type(exc).__name__}: {exc}", err=True)
        return EXIT_NUMERICAL
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        return EXIT_CONFIG
    except OSError as exc:
        click.echo(f"I/O error: {exc}", err=True)
        return EXIT_IO
    except (FracpropError, ValueError) as exc:
        click.echo(f"config error: {type(exc).__name__}: {exc}", err=True)
        return EXIT_CONFIG
    return rv if isinstance(rv, int) else EXIT_OK


def run() -> None:
    sys.exit(main())


# }}}
