"""Finite-difference operators and test functions shared by the tests."""

import numpy as np


def d2(f, r, h):
    """Fourth-order central second derivative."""
    return (-f(r + 2 * h) + 16 * f(r + h) - 30 * f(r) + 16 * f(r - h) - f(r - 2 * h)) / (12 * h * h)


def d1(f, r, h):
    return (-f(r + 2 * h) + 8 * f(r + h) - 8 * f(r - h) + f(r - 2 * h)) / (12 * h)


def radial_laplacian(f, r, n, h=1e-3):
    """``u'' + (n - 1) u' / r`` for a radial function of ``r``."""
    return d2(f, r, h) + (n - 1.0) / r * d1(f, r, h)


def cartesian_laplacian(f, x, h=1e-3):
    """Laplacian of ``f`` (callable on (N, d) arrays) at points ``x``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    out = np.zeros(x.shape[0])
    for k in range(x.shape[1]):
        e = np.zeros(x.shape[1])
        e[k] = 1.0
        out += d2(lambda s: f(x + s[:, None] * e), np.zeros(x.shape[0]), h)
    return out


def gradient(f, x, h=1e-3):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    cols = []
    for k in range(x.shape[1]):
        e = np.zeros(x.shape[1])
        e[k] = 1.0
        cols.append(d1(lambda s: f(x + s[:, None] * e), np.zeros(x.shape[0]), h))
    return np.column_stack(cols)


def franke(x, y):
    return (0.75 * np.exp(-((9 * x - 2) ** 2 + (9 * y - 2) ** 2) / 4)
            + 0.75 * np.exp(-(9 * x + 1) ** 2 / 49 - (9 * y + 1) / 10)
            + 0.5 * np.exp(-((9 * x - 7) ** 2 + (9 * y - 3) ** 2) / 4)
            - 0.2 * np.exp(-(9 * x - 4) ** 2 - (9 * y - 7) ** 2))


def disk_points(rng, count, radius=1.0):
    th = rng.uniform(0, 2 * np.pi, count)
    rr = radius * np.sqrt(rng.uniform(0, 1, count))
    return np.column_stack([rr * np.cos(th), rr * np.sin(th)])


def square_grid(h, half_width=1.0, dim=2):
    ax = np.arange(-half_width, half_width + h / 2, h)
    mesh = np.meshgrid(*([ax] * dim), indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


# ---------------------------------------------------------------------------
# operator residual cases: name -> callable(r) returning (residual, u)

RADII = (0.5, 1.0, 1.7)
H = 1e-3


def _radial_case(kernel, n, shift):
    """Residual of ``lap u + shift * u`` for a radial kernel."""
    def run(r):
        u = kernel(np.array(r))
        return radial_laplacian(kernel, r, n, H) + shift * u, u
    return run


def _cartesian_case(kernel, direction, op):
    direction = np.asarray(direction, dtype=float) / np.linalg.norm(direction)

    def run(r):
        x = (r * direction)[None, :]
        return op(kernel, x)[0], kernel(x)[0]
    return run


def operator_cases():
    from dfwkit import kernels as K
    from dfwkit.geometry import AnisotropyMatrix

    cases = {}
    for n in (1, 2, 3, 4, 2.5):
        cases[f"laplace n={n}"] = _radial_case(lambda r, n=n: K.eval_laplace(n, 0, r).re, n, 0.0)
    mu = 1.3
    for n in (1, 2, 3):
        for kind in ("FUNDAMENTAL", "GENERAL"):
            cases[f"mod-helmholtz {kind.lower()} n={n}"] = _radial_case(
                lambda r, n=n, kind=kind: K.eval_mod_helmholtz(n, mu, r, kind).re, n, -mu * mu)
    cases["mod-helmholtz scaled n=2"] = _radial_case(
        lambda r: K.eval_mod_helmholtz(2, mu, r, "FUNDAMENTAL", "SCALED").re, 2, -mu * mu)
    lam = 2.0
    for n in (2, 3):
        cases[f"helmholtz general n={n}"] = _radial_case(
            lambda r, n=n: K.eval_helmholtz(n, 0, lam, r, "GENERAL").re, n, lam * lam)
        cases[f"helmholtz fundamental re n={n}"] = _radial_case(
            lambda r, n=n: K.eval_helmholtz(n, 0, lam, r, "FUNDAMENTAL").re, n, lam * lam)
        cases[f"helmholtz fundamental im n={n}"] = _radial_case(
            lambda r, n=n: K.eval_helmholtz(n, 0, lam, r, "FUNDAMENTAL").im, n, lam * lam)
        cases[f"hartley n={n}"] = _radial_case(lambda r, n=n: K.eval_hartley_basis(n, lam, r).re, n, lam * lam)

    kappa = 0.7
    for n in (1, 2, 3):
        def heat_case(r, n=n):
            tau = 1.0
            u = lambda rr, tt: K.eval_heat(n, kappa, rr, tt).re
            ut = d1(lambda tt: u(r, tt), np.array(tau), H)
            lap = radial_laplacian(lambda rr: u(rr, tau), r, n, H)
            return ut - kappa * lap, u(r, tau)
        cases[f"heat n={n}"] = heat_case

    D, k = 0.8, 0.5
    for v in ((1.0, -0.5), (0.3, 0.2, -0.7)):
        d = len(v)
        vv = np.array(v)
        spec_f = lambda x, vv=vv: K.eval_conv_diff(len(vv), D, vv, k, x, np.zeros(len(vv)), "FUNDAMENTAL").re
        spec_g = lambda x, vv=vv: K.eval_conv_diff(len(vv), D, vv, k, x, np.zeros(len(vv)), "GENERAL").re
        op = lambda f, x, vv=vv: D * cartesian_laplacian(f, x, H) + gradient(f, x, H) @ vv - k * f(x)
        cases[f"conv-diff fundamental n={d}"] = _cartesian_case(spec_f, np.linspace(1, 2, d), op)
        cases[f"conv-diff general n={d}"] = _cartesian_case(spec_g, np.linspace(1, 2, d), op)

    for variant in ("GAUSSIAN", "EXPONENTIAL"):
        f = lambda x, variant=variant: K.eval_translate_harmonic(variant, 0.8, x[:, 0], x[:, 1], 0.1, -0.2).re
        cases[f"translate-harmonic {variant.lower()}"] = _cartesian_case(
            f, (0.6, 0.8), lambda f, x: cartesian_laplacian(f, x, H))

    kap = AnisotropyMatrix(np.diag([2.0, 0.5]))
    weights = np.diag(kap.kappa)

    def aniso_lap(f, x):
        out = 0.0
        for i, w in enumerate(weights):
            e = np.zeros(2)
            e[i] = 1.0
            out = out + w * d2(lambda s: f(x + s[:, None] * e), np.zeros(x.shape[0]), H)
        return out

    g_lap = lambda x: K.eval_geodesic("GEODESIC_LAPLACE", 2, kap, x, np.zeros(2)).re
    g_helm = lambda x: K.eval_geodesic("GEODESIC_HELMHOLTZ", 2, kap, x, np.zeros(2), lam=lam).re
    cases["geodesic laplace n=2"] = _cartesian_case(g_lap, (1.0, 0.4), aniso_lap)
    cases["geodesic helmholtz n=2"] = _cartesian_case(
        g_helm, (1.0, 0.4), lambda f, x: aniso_lap(f, x) + lam * lam * f(x))
    return cases


def residual_ok(residual, u):
    return abs(residual) < 1e-5 * max(1.0, abs(u))


LADDER_RADII = (0.5, 1.7, 2.3)


def laplace_ladder_errors():
    """Relative error of ``lap u_m = u_{m-1}`` for n in {2, 3}, m = 1..4."""
    from dfwkit.kernels import eval_laplace

    out = {}
    for n in (2, 3):
        for m in range(1, 5):
            for r in LADDER_RADII:
                lap = radial_laplacian(lambda rr: eval_laplace(n, m, rr).re, r, n, H)
                prev = float(eval_laplace(n, m - 1, r).re)
                out[(n, m, r)] = abs(lap - prev) / abs(prev)
    return out


HELMHOLTZ_RADII = (0.3, 0.7, 1.1, 1.5)


def helmholtz_ladder_ratios(lam=1.0):
    """``(lap + lam^2) u_m / u_{m-1}`` for n in {2, 3}, m in {1, 2}."""
    from dfwkit.kernels import eval_helmholtz

    out = {}
    for n in (2, 3):
        for m in (1, 2):
            vals = []
            for r in HELMHOLTZ_RADII:
                u = lambda rr: eval_helmholtz(n, m, lam, rr).re
                lhs = radial_laplacian(u, r, n, H) + lam * lam * float(u(np.array(r)))
                vals.append(lhs / float(eval_helmholtz(n, m - 1, lam, r).re))
            out[(n, m)] = np.array(vals)
    return out


# ---------------------------------------------------------------------------
# series scenarios


def franke_holdout_rms(sizes=(25, 50, 100), reg=1e-10):
    """Held-out RMS of Poisson (s = 0.5) fits to Franke's function.

    Centers are the first ``k`` training points; each fit uses at least 50
    training points.
    """
    from dfwkit.kernels import KernelSpec
    from dfwkit.pointcloud import PointCloud
    from dfwkit.series import fit, rms

    rng = np.random.default_rng(1)
    X = rng.uniform(0, 1, (100, 2))
    f = franke(*X.T)
    T = rng.uniform(0, 1, (200, 2))
    spec = KernelSpec("POISSON", n=2, scale=0.5)
    out = []
    for k in sizes:
        n_train = max(k, 50)
        model = fit(PointCloud(X[:n_train], f[:n_train]), X[:k], spec, reg)
        out.append(rms(model.evaluate(T) - franke(*T.T)))
    return out


def tensor_grid(h, half_width=1.0):
    ax = np.arange(-half_width, half_width + h / 2, h)
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    return np.column_stack([X.ravel(), Y.ravel()])


GAUSS_CENTER = np.array([0.1, -0.05])
GAUSS_TRANSLATES = np.array([[0.6, 0.2], [0.0, 0.0], [-0.4, 0.5]])


def narrow_gaussian_error(h, sigma=0.02):
    """Max relative error of the Poisson transform of a narrow unit-mass
    Gaussian against the kernel centred at the Gaussian's peak."""
    from dfwkit.kernels import KernelSpec
    from dfwkit.pointcloud import PointCloud
    from dfwkit.series import TransformGrid, forward_transform

    spec = KernelSpec("POISSON", n=2, scale=1.0)
    P = tensor_grid(h)
    f = np.exp(-((P - GAUSS_CENTER) ** 2).sum(1) / (2 * sigma ** 2)) / (2 * np.pi * sigma ** 2)
    grid = TransformGrid([0.5, 1.0, 2.0], GAUSS_TRANSLATES)
    res = forward_transform(PointCloud(P, f), grid, "KERNEL", spec)
    exact = np.array([spec.replace(scale=s).evaluate(GAUSS_TRANSLATES, GAUSS_CENTER[None]).re[:, 0]
                      for s in grid.parameter_samples])
    return float(np.max(np.abs(res.values / exact - 1)))


def stieltjes_unit_interval(N=1000):
    """Stieltjes transform of f = 1 on [0, 1] at t = 1 (exact value ln 2)."""
    from dfwkit.pointcloud import PointCloud
    from dfwkit.series import TransformGrid, forward_transform

    x = (np.arange(N) + 0.5) / N
    res = forward_transform(PointCloud(x[:, None], np.ones(N)), TransformGrid([1.0], [[0.0]]), "STIELTJES")
    return float(res.values[0, 0])


def translation_covariance_gap(shift_cells=(3, -2), h=0.05):
    """Max difference between W[f](xi) and W[f shifted by k h](xi + k h)."""
    from dfwkit.kernels import KernelSpec
    from dfwkit.pointcloud import PointCloud
    from dfwkit.series import TransformGrid, forward_transform

    P = tensor_grid(h)
    bump = lambda c: np.exp(-((P - c) ** 2).sum(1) / 0.02)
    shift = np.array(shift_cells) * h
    c0 = np.array([-0.2, 0.1])
    spec = KernelSpec("POISSON", n=2, scale=0.5)
    xi = np.array([[0.1, 0.1], [-0.3, 0.25]])
    a = forward_transform(PointCloud(P, bump(c0)), TransformGrid([0.5, 1.0], xi), "KERNEL", spec)
    b = forward_transform(PointCloud(P, bump(c0 + shift)), TransformGrid([0.5, 1.0], xi + shift), "KERNEL", spec)
    return float(np.max(np.abs(a.values - b.values)) / np.max(np.abs(a.values)))


# ---------------------------------------------------------------------------
# boundary element scenario


def green_probes(count=20, seed=0):
    rng = np.random.default_rng(seed)
    r = np.sqrt(rng.uniform(0, 0.5, count))
    th = rng.uniform(0, 2 * np.pi, count)
    return np.column_stack([r * np.cos(th), r * np.sin(th)])


def green_disk_errors(N, rule="analytic"):
    """Unit disk, N elements: (max probe error for x^2 - y^2, error of the
    centre value against the boundary mean, max probe error for x)."""
    import warnings

    from dfwkit.green import Circle, NearBoundaryWarning, discretize_boundary, eval_interior, solve_dirichlet

    mesh = discretize_boundary(Circle((0.0, 0.0), 1.0), N)
    mx, my = mesh.midpoints.T
    P = green_probes()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearBoundaryWarning)
        quad = solve_dirichlet(mesh, mx ** 2 - my ** 2, rule)
        err_quad = np.max(np.abs(eval_interior(quad, P) - (P[:, 0] ** 2 - P[:, 1] ** 2)))
        centre = float(eval_interior(quad, [[0.0, 0.0]])[0])
        mean = float(quad.dirichlet @ mesh.lengths / mesh.perimeter)
        lin = solve_dirichlet(mesh, mx, rule)
        err_lin = np.max(np.abs(eval_interior(lin, P) - P[:, 0]))
    return float(err_quad), abs(centre - mean), float(err_lin)


# ---------------------------------------------------------------------------
# multi-resolution scenarios


def mr_norm_squared_3d():
    """``|x|^2`` at 40 points in 3-D, 40 centers: (ladder, oracle rms, rms f)."""
    from dfwkit.mr import mr_decompose
    from dfwkit.pointcloud import PointCloud
    from dfwkit.series import rms

    rng = np.random.default_rng(0)
    X = rng.uniform(-1, 1, (40, 3))
    C = rng.uniform(-1.2, 1.2, (40, 3))
    f = (X ** 2).sum(1)
    ladder = mr_decompose(PointCloud(X, f), "LAPLACE_3D", C, 3, 1e-6 * rms(f))
    return ladder, _stacked_oracle(X, f, C, [s.m for s in ladder.stages], 3), rms(f)


def mr_least_squares_3d():
    """80 points, 20 centers, ``|x|^2 + sin x1``: (ladder, oracle rms, rms f)."""
    from dfwkit.mr import mr_decompose
    from dfwkit.pointcloud import PointCloud
    from dfwkit.series import rms

    rng = np.random.default_rng(7)
    X = rng.uniform(-1, 1, (80, 3))
    C = rng.uniform(-1, 1, (20, 3))
    f = (X ** 2).sum(1) + np.sin(X[:, 0])
    ladder = mr_decompose(PointCloud(X, f), "LAPLACE_3D", C, 3, 0.0)
    return ladder, _stacked_oracle(X, f, C, [s.m for s in ladder.stages], 3), rms(f)


def _stacked_oracle(X, f, C, orders, dim):
    """Minimum residual over the stacked dictionary of the stages used."""
    from dfwkit.kernels import Family, KernelSpec
    from dfwkit.series import assemble, rms

    if not orders:
        return rms(f)
    A = np.hstack([assemble(X, C, KernelSpec(Family.LAPLACE, n=dim, m=m)) for m in orders])
    beta, *_ = np.linalg.lstsq(A, f, rcond=None)
    return rms(A @ beta - f)


# ---------------------------------------------------------------------------
# command-line scenario


def write_cli_inputs(root):
    """Write a small set of input files for every subcommand into ``root``."""
    from dfwkit.green import Circle, discretize_boundary, write_boundary_csv
    from dfwkit.pointcloud import PointCloud, write_csv, write_pointcloud

    rng = np.random.default_rng(0)
    X = rng.uniform(0, 1, (30, 2))
    write_pointcloud(root / "points.csv", PointCloud(X, franke(*X.T)))
    write_pointcloud(root / "query.csv", PointCloud(rng.uniform(0, 1, (5, 2))))
    X3 = rng.uniform(-1, 1, (20, 3))
    write_pointcloud(root / "points3.csv", PointCloud(X3, (X3 ** 2).sum(1)))
    mesh = discretize_boundary(Circle(), 32)
    write_boundary_csv(root / "boundary.csv", mesh, mesh.midpoints[:, 0] ** 2 - mesh.midpoints[:, 1] ** 2)
    write_pointcloud(root / "probes.csv", PointCloud(green_probes(5) * 0.8))
    G = tensor_grid(0.25)
    write_pointcloud(root / "grid.csv", PointCloud(G, np.exp(-(G ** 2).sum(1))))
    write_csv(root / "p.csv", ["p"], [(float(v),) for v in np.sin(np.arange(1, 6))])
    w = np.linspace(1, 10, 20)
    write_csv(root / "alpha.csv", ["omega", "alpha"], [(float(a), float(b)) for a, b in zip(w, 0.5 * w ** 1.3)])


def cli_runs(root):
    """``(name, argv, output files)`` exercising every subcommand in ``root``."""
    d = lambda name: str(root / name)
    return [
        ("kernel-table", ["kernel-table", "family=HELMHOLTZ", "kind=FUNDAMENTAL", "n=2", "scale=1.5",
                          "rmin=0", "rmax=3", "steps=13"], []),
        ("fit", ["fit", f"input={d('points.csv')}", "family=POISSON", "n=2", "scale=0.5",
                 "centers=random:12", "reg=1e-10", f"model={d('model.json')}"], ["model.json"]),
        ("predict", ["predict", f"model={d('model.json')}", f"input={d('query.csv')}"], []),
        ("bvp-harmonic", ["bvp-harmonic", "shape=circle", "N=32", f"boundary={d('boundary.csv')}",
                          f"probes={d('probes.csv')}", f"model={d('harmonic.json')}"], ["harmonic.json"]),
        ("mr-decompose", ["mr-decompose", f"input={d('points3.csv')}", "M_max=3", "tol=1e-9",
                          "centers=random:10"], []),
        ("transform", ["transform", f"input={d('grid.csv')}", "family=POISSON", "n=2", "pmin=0.5",
                       "pmax=1.5", "psteps=3"], []),
        ("frac", ["frac", f"input={d('p.csv')}", "dim=1", "n=5", "h=0.2", "y=0.8"], []),
        ("powerlaw-fit", ["powerlaw-fit", f"input={d('alpha.csv')}", f"output={d('alpha_fit.csv')}"],
         ["alpha_fit.csv"]),
        ("sigmoid-table", ["sigmoid-table", "family=MODHELM_FUND", "n=3", "s=1.0", "steps=7"], []),
        ("plot", ["plot", f"input={d('alpha.csv')}", "x=omega", "y=alpha", f"output={d('plot.svg')}"],
         ["plot.svg"]),
    ]


def run_cli(argv):
    import io

    from dfwkit.cli import main

    out, err = io.StringIO(), io.StringIO()
    code = main(argv, out, err)
    return code, out.getvalue(), err.getvalue()


def cli_determinism(tmp_root):
    """Run every subcommand in two fresh directories; map name -> identical?"""
    results = {}
    dirs = [tmp_root / "a", tmp_root / "b"]
    runs = []
    for root in dirs:
        root.mkdir()
        write_cli_inputs(root)
        runs.append(cli_runs(root))
    for (name, argv_a, files), (_, argv_b, _) in zip(*runs):
        code_a, out_a, _ = run_cli(argv_a)
        code_b, out_b, _ = run_cli(argv_b)
        same = code_a == code_b == 0 and out_a.encode() == out_b.encode()
        for f in files:
            same = same and (dirs[0] / f).read_bytes() == (dirs[1] / f).read_bytes()
        results[name] = same
    return results
