"""Figure-level experiments driven by a :class:`~subrad.config.RunConfig`.

Each experiment writes CSV tables into the output directory and returns a
manifest describing them; the manifest is written last, as
``manifest.json``. Rates and energies are in units of gamma_0 and
wavenumbers in units of pi/d; column names carry the units.
"""

from __future__ import annotations

import logging
import math
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__, analysis, bloch, dispersion, waveguide
from .config import RunConfig
from .io import sha256_file, write_csv, write_json
from .linalg import eigendecompose

log = logging.getLogger(__name__)

FIT_HEADER = ("alpha", "prefactor", "r_squared", "N_min", "N_max", "n_samples", "oscillating")


def _fit_row(fit: analysis.PowerLawFit):
    return (fit.alpha, fit.prefactor, fit.r_squared, *fit.window, fit.n_samples, fit.oscillating)


def resolve_k0d(value) -> float:
    return dispersion.find_k4() if value == "k4" else math.pi * value


class Run:
    """Collects output files, stage timings and a summary for one experiment."""

    def __init__(self, config: RunConfig, out_dir, jobs: int = 1):
        self.config = config
        self.out = Path(out_dir)
        self.jobs = max(1, int(jobs))
        self.files: list[Path] = []
        self.stages: dict[str, float] = {}
        self.summary: dict = {}
        self.truncated = False

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        log.info("stage %s started", name)
        yield
        self.stages[name] = time.perf_counter() - t0
        log.info("stage %s finished in %.2fs", name, self.stages[name])

    def csv(self, name: str, header, rows):
        self.files.append(write_csv(self.out / name, header, rows))

    def manifest(self) -> dict:
        return {
            "artifact": "subrad",
            "version": __version__,
            "experiment": self.config.experiment,
            "config": self.config.to_dict(),
            "stages_seconds": self.stages,
            "files": [
                {"name": p.name, "sha256": sha256_file(p), "bytes": p.stat().st_size}
                for p in self.files
            ],
            "truncated": self.truncated,
            "summary": self.summary,
        }


def _dispersion(run: Run):
    cfg = run.config
    k0d = resolve_k0d(cfg.get("model", "k0d_pi"))
    with run.stage("dispersion"):
        curve = dispersion.dispersion_curve(k0d, cfg.get("grid", "n_points"))
        edge = dispersion.band_edge_expansion(k0d)
    run.csv(
        "dispersion.csv",
        ("k[pi/d]", "omega[gamma0]", "gamma[gamma0]"),
        zip(curve.k / math.pi, curve.omega, curve.gamma),
    )
    run.csv(
        "band_edge.csv",
        ("k0d[pi/d]", "s", "a_s", "a2", "a4", "degenerate"),
        [(k0d / math.pi, edge.s, edge.a_s, edge.a2, edge.a4, edge.degenerate)],
    )
    run.summary.update(s=edge.s, a2=edge.a2, a4=edge.a4, skipped=len(curve.skipped))


def _k4(run: Run):
    with run.stage("k4"):
        k4 = dispersion.find_k4()
        a4 = dispersion.a4_coefficient(k4)
    run.csv("k4.csv", ("k4[pi/d]", "a4"), [(k4 / math.pi, a4)])
    run.summary.update(k4_pi=k4 / math.pi, a4=a4)


def _series_fit(run, series, window, prefix):
    try:
        fit = analysis.fit_power_law(series, window=tuple(window))
    except ValueError as exc:
        log.warning("%s no fit (%s)", prefix or "series:", exc)
        return None
    run.summary[f"{prefix}alpha"] = fit.alpha
    run.summary[f"{prefix}r_squared"] = fit.r_squared
    run.summary[f"{prefix}oscillating"] = fit.oscillating
    return fit


def _scaling(run: Run):
    cfg = run.config
    k0d = resolve_k0d(cfg.get("model", "k0d_pi"))
    with run.stage("sweep"):
        series = analysis.scaling_sweep(
            analysis.regular_family(k0d),
            cfg.get("sweep", "N_list"),
            budget=cfg.get("sweep", "budget"),
            jobs=run.jobs,
        )["global"]
    run.truncated = series.truncated
    run.csv("scaling.csv", analysis.SERIES_HEADER, series.rows())
    fit = _series_fit(run, series, cfg.get("fit", "window"), "")
    run.csv("fit.csv", FIT_HEADER, [_fit_row(fit)] if fit else [])
    run.summary["k0d_pi"] = k0d / math.pi
    run.summary["seconds_per_N"] = {str(s.N): s.seconds for s in series.samples}


def _infidelity(run: Run):
    cfg = run.config
    k0d = resolve_k0d(cfg.get("model", "k0d_pi"))
    ref = cfg.get("model", "reference")
    with run.stage("infidelity"):
        samples = analysis.infidelity_series(k0d, cfg.get("sweep", "N_list"), ref, jobs=run.jobs)
    run.csv(
        "infidelity.csv",
        ("N", "infidelity", "ambiguous", "reference_index"),
        [(s.N, s.infidelity, s.ambiguous, s.reference_index) for s in samples],
    )
    N = [s.N for s in samples]
    val = [s.infidelity for s in samples]
    try:
        fit = analysis.fit_power_law(N, val, window=tuple(cfg.get("fit", "window")))
        run.summary.update(slope=-fit.alpha, r_squared=fit.r_squared)
        rows = [_fit_row(fit)]
    except ValueError as exc:
        log.warning("infidelity: no fit (%s)", exc)
        rows = []
    run.csv("fit.csv", FIT_HEADER, rows)
    run.summary["ambiguous"] = [s.N for s in samples if s.ambiguous]


def _dimer(run: Run):
    cfg = run.config
    k0d = math.pi * cfg.get("model", "k0d_pi")
    modes = cfg.get("fit", "window_modes")
    series_rows, fit_rows = [], []
    for d1 in cfg.get("model", "d1_over_d"):
        with run.stage(f"sweep d1/d={d1}"):
            result = analysis.scaling_sweep(
                analysis.dimer_family(k0d, d1, modes),
                cfg.get("sweep", "N_list"),
                budget=cfg.get("sweep", "budget"),
                jobs=run.jobs,
            )
        for band, series in result.items():
            run.truncated |= series.truncated
            series_rows += [(d1, band, *row) for row in series.rows()]
            fit = _series_fit(run, series, cfg.get("fit", "window"), f"d1={d1}:{band}:")
            if fit:
                fit_rows.append((d1, band, *_fit_row(fit)))
    run.csv("dimer_scaling.csv", ("d1_over_d", "band", *analysis.SERIES_HEADER), series_rows)
    run.csv("dimer_fits.csv", ("d1_over_d", "band", *FIT_HEADER), fit_rows)

    scan_d1 = cfg.get("scan", "d1_over_d")
    if scan_d1 is not None:
        n = cfg.get("scan", "n_cells")
        with run.stage("gap scan"):
            rows = [dimer_gap_point(k0d, d1, n, modes) for d1 in scan_d1]
        run.csv(
            "dimer_scan.csv",
            ("d1_over_d", "n_cells", "gap[gamma0]", "gamma_min[gamma0]", "gamma_upper[gamma0]", "gamma_lower[gamma0]"),
            rows,
        )


def dimer_gap_point(k0d: float, d1: float, n_cells: int, window_modes: float = 1.0):
    """Band gap and subradiant rates near ``k = pi/d`` for one dimerization.

    The gap is the finite-size separation between the lowest upper-band and
    the highest lower-band state inside the window.
    """
    family = analysis.dimer_family(k0d, d1, window_modes)
    spec = eigendecompose(family.build(n_cells).matrix)
    ks, _ = analysis.dominant_wavenumbers(spec.vectors, 2)
    half = window_modes * math.pi / n_cells
    near = np.abs(np.angle(np.exp(1j * (ks - math.pi)))) <= half + 1e-12
    split = family.selectors["upper"].band_split
    e = spec.values.real
    up, lo = near & (e > split), near & (e <= split)
    gap = float(e[up].min() - e[lo].max()) if up.any() and lo.any() else float("nan")
    g_up = analysis.most_subradiant(spec, family.selectors["upper"], 2).gamma
    g_lo = analysis.most_subradiant(spec, family.selectors["lower"], 2).gamma
    return (d1, n_cells, gap, min(g_up, g_lo), g_up, g_lo)


def _waveguide(run: Run):
    cfg = run.config
    k0d1 = math.pi * cfg.get("model", "k0d1_pi")
    k0d2 = math.pi * cfg.get("model", "k0d2_pi")
    base = waveguide.WaveguideDimerSpec(1, k0d1, k0d2)
    kind = waveguide.classify_critical(base)
    run.summary["critical"] = kind.value

    with run.stage("bands"):
        ks = np.linspace(-math.pi, math.pi, 401)
        rows = []
        for k in ks:
            try:
                b = waveguide.dispersion_pm(float(k), base)
            except ValueError:
                continue
            rows.append((k / math.pi, b.omega_plus, b.omega_minus, b.phi_k))
    run.csv("waveguide_bands.csv", ("k[pi/d]", "omega_plus[gamma0]", "omega_minus[gamma0]", "phi_k"), rows)

    with run.stage("sweep"):
        result = analysis.scaling_sweep(
            analysis.waveguide_family(k0d1, k0d2, cfg.get("fit", "window_modes")),
            cfg.get("sweep", "N_list"),
            budget=cfg.get("sweep", "budget"),
            jobs=run.jobs,
        )
    closed = kind is waveguide.CriticalKind.K_ZERO and 0 < base.s1 < 1
    rows, fits = [], []
    for band, series in result.items():
        run.truncated |= series.truncated
        for s in series.samples:
            if closed:
                spec = base.with_cells(s.N)
                pub = waveguide.critical_decay_closed_form(spec)
                quant = waveguide.critical_decay_quantized(spec)
                g_pub = pub.gamma_plus if band == "upper" else pub.gamma_minus
                g_q = quant.gamma_plus if band == "upper" else quant.gamma_minus
            else:
                g_pub = g_q = float("nan")
            rows.append((band, s.N, s.gamma_min, s.gamma_min * s.N, g_pub, g_q, s.k_dominant / math.pi))
        fit = _series_fit(run, series, cfg.get("fit", "window"), f"{band}:")
        if fit:
            fits.append((band, *_fit_row(fit)))
    run.csv(
        "waveguide_critical.csv",
        ("band", "N", "gamma_min[gamma0]", "gamma_times_N", "gamma_published[gamma0]", "gamma_quantized[gamma0]", "k_dominant[pi/d]"),
        rows,
    )
    run.csv("waveguide_fits.csv", ("band", *FIT_HEADER), fits)


def _toy(run: Run):
    cfg = run.config
    h1, h2 = cfg.get("model", "h1"), cfg.get("model", "h2")
    n = cfg.get("model", "n_sites")
    count = cfg.get("solver", "count")
    spec = bloch.BandedHamiltonianSpec.hermitian(n, [h1, h2])
    edge = -2 * h1 + 2 * h2
    regime = bloch.toy_regime(h1, h2)
    with run.stage("dense"):
        ev = np.linalg.eigvalsh(spec.dense())
        dense = list(ev[np.argsort(np.abs(ev - edge))][:count])
    with run.stage("bloch"):
        sols = bloch.solve_eigen_near(spec, edge, count, z_ex=-1.0)
    try:
        ref = [m.energy for m in bloch.toy_h2_rates_reference(regime, n, h1, h2, count)]
    except ValueError as exc:
        log.warning("toy: no asymptotic reference (%s)", exc)
        ref = [float("nan")] * count
    # all three lists are ordered by distance from the band edge
    dense = sorted(dense, key=lambda e: abs(e - edge))
    sols = sorted(sols, key=lambda s: abs(s.E - edge))
    rows = [
        (i + 1, dense[i] - edge, sols[i].E - edge, ref[i] - edge, sols[i].residual)
        for i in range(min(count, len(sols)))
    ]
    run.csv(
        "toy.csv",
        ("rank", "dense_offset", "bloch_offset", "reference_offset", "bloch_residual"),
        rows,
    )
    run.summary.update(regime=regime.value, band_edge=edge)


RUNNERS = {
    "dispersion": _dispersion,
    "k4": _k4,
    "scaling": _scaling,
    "infidelity": _infidelity,
    "dimer": _dimer,
    "waveguide": _waveguide,
    "toy": _toy,
}


def run(config: RunConfig, out_dir, jobs: int = 1) -> dict:
    """Execute ``config`` and write its CSVs plus ``manifest.json`` into ``out_dir``."""
    r = Run(config, out_dir, jobs)
    RUNNERS[config.experiment](r)
    manifest = r.manifest()
    write_json(r.out / "manifest.json", manifest)
    return manifest
