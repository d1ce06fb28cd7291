"""Batch command-line front end.

Every subcommand takes ``key=value`` settings, optionally read from a flat
config file (``--config``) and overridden on the command line. Results are
CSV (17 significant digits, LF line endings) or JSON model files; without
``output=`` the CSV goes to standard output.

Exit codes: 0 success, 1 configuration/input error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import sys
from pathlib import Path
from typing import Callable

import numpy as np

from . import fractional, green, mr, series, sigmoid
from .kernels import KernelError, KernelSpec, SPEC_KEYS
from .pointcloud import FormatError, PointCloud, read_pointcloud, read_table, write_csv, write_pointcloud


class ConfigError(ValueError):
    pass


NUMERIC_ERRORS = (series.SingularEvaluationError, np.linalg.LinAlgError, green.DegenerateBoundaryError,
                  FloatingPointError, ZeroDivisionError, OverflowError)


class Settings:
    """Typed access to ``key=value`` pairs; unknown keys are reported."""

    def __init__(self, values: dict[str, str], seed: int):
        self.values = dict(values)
        self.seed = seed

    def has(self, key: str) -> bool:
        return key in self.values

    def raw(self, key: str, default=None, required: bool = False):
        if key in self.values:
            return self.values[key]
        if required:
            raise ConfigError(f"missing required setting '{key}'")
        return default

    def str(self, key, default=None, required=False):
        return self.raw(key, default, required)

    def float(self, key, default=None, required=False):
        v = self.raw(key, default, required)
        try:
            return None if v is None else float(v)
        except ValueError:
            raise ConfigError(f"setting '{key}' must be a number, got {v!r}") from None

    def int(self, key, default=None, required=False):
        v = self.raw(key, default, required)
        try:
            return None if v is None else int(v)
        except ValueError:
            raise ConfigError(f"setting '{key}' must be an integer, got {v!r}") from None

    def bool(self, key, default=False):
        v = self.raw(key, None)
        if v is None:
            return default
        if v.lower() in ("1", "true", "yes", "on"):
            return True
        if v.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"setting '{key}' must be true/false, got {v!r}")

    def floats(self, key, default=None, required=False, sep=","):
        v = self.raw(key, default, required)
        if v is None or isinstance(v, tuple):
            return v
        try:
            return tuple(float(x) for x in v.split(sep) if x.strip())
        except ValueError:
            raise ConfigError(f"setting '{key}' must be a {sep!r}-separated list of numbers") from None

    def kernel_spec(self) -> KernelSpec:
        cfg = {k: self.values[k] for k in SPEC_KEYS if k in self.values}
        try:
            return KernelSpec.from_config(cfg)
        except (KernelError, ValueError) as exc:
            raise ConfigError(f"bad kernel spec: {exc}") from None

    def check_known(self, allowed: set[str]):
        extra = sorted(set(self.values) - allowed)
        if extra:
            raise ConfigError(f"unknown setting(s): {', '.join(extra)}")


def parse_pairs(tokens: list[str]) -> dict[str, str]:
    out = {}
    for tok in tokens:
        key, sep, value = tok.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"expected key=value, got {tok!r}")
        out[key.strip()] = value.strip()
    return out


def read_config_file(path: str) -> dict[str, str]:
    pairs = []
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            pairs.append(line)
    return parse_pairs(pairs)


def emit(text: str, path: str | None, stdout) -> None:
    if path is None:
        stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def linspace(st: Settings, lo: str, hi: str, steps: str, defaults=(None, None, None)) -> np.ndarray:
    a = st.float(lo, defaults[0], required=defaults[0] is None)
    b = st.float(hi, defaults[1], required=defaults[1] is None)
    n = st.int(steps, defaults[2], required=defaults[2] is None)
    if n < 1:
        raise ConfigError(f"'{steps}' must be at least 1")
    return np.linspace(a, b, n)


def pick_centers(st: Settings, points: PointCloud) -> PointCloud:
    """``centers=`` is a CSV path, ``random:K`` (seeded subset of the
    input points) or absent (all input points)."""
    spec = st.str("centers")
    if spec is None:
        return PointCloud(points.coords, t=points.t)
    if spec.startswith("random:"):
        try:
            k = int(spec.split(":", 1)[1])
        except ValueError:
            raise ConfigError("centers=random:K needs an integer K") from None
        if not 1 <= k <= len(points):
            raise ConfigError(f"cannot pick {k} centers from {len(points)} points")
        idx = np.sort(np.random.default_rng(st.seed).choice(len(points), k, replace=False))
        sub = points.subset(idx)
        return PointCloud(sub.coords, t=sub.t)
    return read_pointcloud(spec, require_values=False)


# ---------------------------------------------------------------------------
# subcommands


def cmd_kernel_table(st: Settings, stdout) -> None:
    spec = st.kernel_spec()
    r = linspace(st, "rmin", "rmax", "steps")
    if np.any(r < 0):
        raise ConfigError("radii must be non-negative")
    t = st.float("t", 1.0)
    try:
        val = spec.radial(r)
    except KernelError:
        dim = int(round(spec.n))
        x = np.zeros((r.size, dim))
        x[:, 0] = r
        tx = np.full(r.size, t) if spec.needs_time else None
        tc = np.zeros(1) if spec.needs_time else None
        val = spec.evaluate(x, np.zeros((1, dim)), tx, tc)
        val = type(val)(np.asarray(val.re)[:, 0], np.asarray(val.im)[:, 0], np.asarray(val.singular)[:, 0])
    re = np.broadcast_to(val.re, r.shape)
    im = np.broadcast_to(val.im, r.shape)
    sing = np.broadcast_to(val.singular, r.shape)
    rows = [(float(a), float(b), float(c), int(d)) for a, b, c, d in zip(r, re, im, sing)]
    emit(write_csv(None, ["r", "re", "im", "singular"], rows), st.str("output"), stdout)


def _report_csv(report: series.FitReport) -> str:
    return write_csv(None, ["residual_rms", "condition_estimate", "regularization", "n_thresholded"],
                     [(report.residual_rms, report.condition_estimate, report.regularization,
                       report.n_thresholded)])


def cmd_fit(st: Settings, stdout) -> None:
    points = read_pointcloud(st.str("input", required=True))
    spec = st.kernel_spec()
    centers = pick_centers(st, points)
    reg = st.float("reg", 0.0)
    threshold = st.float("threshold", 0.0)
    model_path = st.str("model", required=True)
    model = series.fit(points, centers, spec, reg, threshold)
    model.save(model_path)
    emit(_report_csv(model.fit_report), st.str("output"), stdout)


def cmd_predict(st: Settings, stdout) -> None:
    try:
        model = series.SeriesModel.load(st.str("model", required=True))
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot load model: {exc}") from None
    points = read_pointcloud(st.str("input", required=True), require_values=False)
    values = model.evaluate(points)
    header = [f"x{i}" for i in range(1, points.dim + 1)]
    cols = [points.coords[:, i] for i in range(points.dim)]
    if points.t is not None:
        header.append("t")
        cols.append(points.t)
    header.append("value")
    cols.append(values)
    if points.values is not None:
        header += ["f", "residual"]
        cols += [points.values, values - points.values]
    rows = [tuple(float(c[i]) for c in cols) for i in range(len(points))]
    emit(write_csv(None, header, rows), st.str("output"), stdout)


def _shape(st: Settings):
    kind = st.str("shape", "circle").lower()
    if kind == "circle":
        c = st.floats("center", (0.0, 0.0))
        if len(c) != 2:
            raise ConfigError("center must be cx,cy")
        return green.Circle(tuple(c), st.float("radius", 1.0))
    if kind == "polygon":
        text = st.str("vertices", required=True)
        try:
            verts = tuple(tuple(float(x) for x in p.split(",")) for p in text.split(";"))
        except ValueError:
            raise ConfigError("vertices must look like x,y;x,y;...") from None
        if any(len(v) != 2 for v in verts):
            raise ConfigError("vertices must look like x,y;x,y;...")
        return green.Polygon(verts)
    raise ConfigError(f"unknown shape {kind!r} (circle or polygon)")


def cmd_bvp_harmonic(st: Settings, stdout) -> None:
    try:
        mesh = green.discretize_boundary(_shape(st), st.int("N", required=True))
    except green.DegenerateBoundaryError as exc:
        raise ConfigError(str(exc)) from None
    g = green.read_boundary_csv(st.str("boundary", required=True), mesh)
    rule = st.str("rule", "analytic")
    if rule not in ("analytic", "gauss4"):
        raise ConfigError("rule must be analytic or gauss4")
    model = green.solve_dirichlet(mesh, g, rule)
    if st.has("model"):
        model.save(st.str("model"))
    probes_path = st.str("probes")
    if probes_path is None:
        rows = [(j, float(m[0]), float(m[1]), float(d), float(q))
                for j, (m, d, q) in enumerate(zip(mesh.midpoints, model.dirichlet, model.neumann))]
        text = write_csv(None, ["elem_index", "mid_x", "mid_y", "g", "q"], rows)
    else:
        probes = read_pointcloud(probes_path, require_values=False)
        if probes.dim != 2:
            raise ConfigError("probe points must be 2-D")
        try:
            values = green.eval_interior(model, probes.coords)
        except green.OutsideDomainError as exc:
            raise ConfigError(str(exc)) from None
        text = write_pointcloud(None, PointCloud(probes.coords, values))
    emit(text, st.str("output"), stdout)


def cmd_mr_decompose(st: Settings, stdout) -> None:
    points = read_pointcloud(st.str("input", required=True))
    family = st.str("family", "LAPLACE_3D" if points.dim == 3 else "LAPLACE_2D").upper()
    try:
        family = mr.LadderFamily(family)
    except ValueError:
        raise ConfigError(f"unknown ladder family {family!r}") from None
    centers = pick_centers(st, points)
    ladder = mr.mr_decompose(points, family, centers, st.int("M_max", 3), st.float("tol", 0.0),
                             regularization=st.float("reg", 0.0), threshold=st.float("threshold", 0.0))
    emit(ladder.write_report(None), st.str("output"), stdout)


def cmd_transform(st: Settings, stdout, stderr) -> None:
    samples = read_pointcloud(st.str("input", required=True))
    try:
        analysis = series.Analysis(st.str("analysis", "KERNEL").upper())
        quad = series.Quadrature(st.str("quadrature", "MIDPOINT").upper())
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    params = linspace(st, "pmin", "pmax", "psteps")
    if st.has("translates"):
        xi = read_pointcloud(st.str("translates"), require_values=False).coords
    else:
        xi = np.zeros((1, samples.dim))
    grid = series.TransformGrid(params, xi, quad)
    spec = st.kernel_spec() if analysis is series.Analysis.KERNEL else None
    result = series.forward_transform(
        samples, grid, analysis, spec, st.str("parameter", "scale"),
        reciprocal=st.str("analysis_kernel", "plain") == "reciprocal",
        exclude_singular=st.bool("exclude_singular"), power=st.float("power", 1.0),
        constant=st.float("constant", 1.0))
    for w in result.warnings:
        stderr.write(f"warning: {w}\n")
    vals = np.asarray(result.values)
    header = ["parameter", "weight", "translate"] + [f"xi{i}" for i in range(1, xi.shape[1] + 1)] + ["re", "im"]
    rows = []
    for ip, p in enumerate(grid.parameter_samples):
        for j in range(xi.shape[0]):
            z = complex(vals[ip, j])
            rows.append((float(p), float(grid.parameter_weights[ip]), j, *map(float, xi[j]), z.real, z.imag))
    emit(write_csv(None, header, rows), st.str("output"), stdout)


def cmd_frac(st: Settings, stdout) -> None:
    header, data = read_table(st.str("input", required=True))
    if header != ["p"]:
        raise ConfigError("frac input must have the single column 'p'")
    op = fractional.build_discrete_laplacian(st.int("dim", 1), st.int("n", required=True),
                                             st.float("h", 1.0))
    p = data[:, 0]
    if p.size != op.size:
        raise ConfigError(f"input has {p.size} values, grid has {op.size}")
    out = fractional.apply_fractional_laplacian(op, st.float("y", required=True), p)
    rows = [(i, float(a), float(b)) for i, (a, b) in enumerate(zip(p, out))]
    emit(write_csv(None, ["index", "p", "value"], rows), st.str("output"), stdout)


def cmd_powerlaw_fit(st: Settings, stdout, stderr) -> None:
    header, data = read_table(st.str("input", required=True))
    if header != ["omega", "alpha"]:
        raise ConfigError("power-law input must have columns omega,alpha")
    res = fractional.fit_power_law(data[:, 0], data[:, 1])
    if res.out_of_range:
        stderr.write(f"warning: fitted exponent y={res.y:.10g} lies outside [0, 2]\n")
    text = write_csv(None, ["alpha0", "y", "rms_log_residual", "out_of_range"],
                     [(res.alpha0, res.y, res.rms_log_residual, int(res.out_of_range))])
    path = st.str("output")
    emit(text, path, stdout)
    if path is not None:
        stdout.write(f"alpha0={res.alpha0:.10f} y={res.y:.10f}\n")


def cmd_sigmoid_table(st: Settings, stdout) -> None:
    try:
        spec = sigmoid.SigmoidSpec(st.str("family", "LOGISTIC").upper(), st.float("n", 1.0),
                                   st.float("s", 1.0), st.floats("w"), st.float("D", 1.0),
                                   st.float("alpha", 1.0))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    A = linspace(st, "amin", "amax", "steps", (0.1, 10.0, 100))
    vals = sigmoid.sigmoid(spec, A, projection=st.float("projection", 0.0), dt=st.float("dt", 1.0))
    rows = [(float(a), float(v)) for a, v in zip(A, np.broadcast_to(vals, A.shape))]
    emit(write_csv(None, ["A", "sigma"], rows), st.str("output"), stdout)


def cmd_plot(st: Settings, stdout) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    header, data = read_table(st.str("input", required=True))
    xcol = st.str("x", header[0])
    ycols = st.str("y", header[1] if len(header) > 1 else header[0]).split(",")
    for c in [xcol, *ycols]:
        if c not in header:
            raise ConfigError(f"column {c!r} not in {header}")
    style = st.str("style", "line")
    if style not in ("line", "scatter"):
        raise ConfigError("style must be line or scatter")
    out = st.str("output", required=True)
    plt.rcParams["svg.hashsalt"] = "dfwkit"
    fig, ax = plt.subplots(figsize=(6, 4))
    x = data[:, header.index(xcol)]
    for c in ycols:
        y = data[:, header.index(c)]
        if style == "line":
            ax.plot(x, y, label=c)
        else:
            ax.scatter(x, y, s=8, label=c)
    ax.set_xlabel(xcol)
    if st.has("title"):
        ax.set_title(st.str("title"))
    if len(ycols) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)


COMMANDS: dict[str, tuple[Callable, str]] = {
    "kernel-table": (cmd_kernel_table, "tabulate a kernel over a radius grid"),
    "fit": (cmd_fit, "fit a kernel series to a point cloud"),
    "predict": (cmd_predict, "evaluate a saved series model"),
    "bvp-harmonic": (cmd_bvp_harmonic, "solve an interior Dirichlet Laplace problem"),
    "mr-decompose": (cmd_mr_decompose, "stagewise high-order Laplace decomposition"),
    "transform": (cmd_transform, "forward kernel transform of gridded samples"),
    "frac": (cmd_frac, "apply a fractional power of the discrete Laplacian"),
    "powerlaw-fit": (cmd_powerlaw_fit, "fit alpha = alpha0 omega^y"),
    "sigmoid-table": (cmd_sigmoid_table, "tabulate a kernel sigmoid"),
    "plot": (cmd_plot, "render a CSV column plot as SVG"),
}

_NEEDS_STDERR = {"transform", "powerlaw-fit"}

ALLOWED_KEYS: dict[str, set[str]] = {
    "kernel-table": SPEC_KEYS | {"rmin", "rmax", "steps", "t", "output"},
    "fit": SPEC_KEYS | {"input", "centers", "reg", "threshold", "model", "output"},
    "predict": {"model", "input", "output"},
    "bvp-harmonic": {"shape", "center", "radius", "vertices", "N", "boundary", "rule", "model",
                     "probes", "output"},
    "mr-decompose": {"input", "family", "centers", "M_max", "tol", "reg", "threshold", "output"},
    "transform": SPEC_KEYS | {"input", "analysis", "quadrature", "pmin", "pmax", "psteps", "translates",
                              "parameter", "analysis_kernel", "exclude_singular", "power", "constant",
                              "output"},
    "frac": {"input", "dim", "n", "h", "y", "output"},
    "powerlaw-fit": {"input", "output"},
    "sigmoid-table": {"family", "n", "s", "w", "D", "alpha", "amin", "amax", "steps", "projection", "dt",
                      "output"},
    "plot": {"input", "x", "y", "style", "title", "output"},
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dfwkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("settings", nargs="*", metavar="key=value")
        p.add_argument("--config", help="flat key=value file; command-line settings win")
        p.add_argument("--seed", type=int, default=0, help="seed for random center selection")
    return parser


def main(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        values = read_config_file(args.config) if args.config else {}
        values.update(parse_pairs(args.settings))
        st = Settings(values, args.seed)
        st.check_known(ALLOWED_KEYS[args.command])
        func = COMMANDS[args.command][0]
        buf = io.StringIO()
        if args.command in _NEEDS_STDERR:
            func(st, buf, stderr)
        else:
            func(st, buf)
    except NUMERIC_ERRORS as exc:
        stderr.write(f"dfwkit {args.command}: numerical failure: {exc}\n")
        return 2
    except (ConfigError, FormatError, KernelError, ValueError, KeyError, OSError) as exc:
        stderr.write(f"dfwkit {args.command}: error: {exc}\n")
        return 1
    stdout.write(buf.getvalue())
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
