"""Experiment drivers shared by the command line, the scripts and the tests.

Every task draws from ``RngStream(seed, task_index)``, so results do not
depend on how tasks are scheduled across threads.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .channel import choi_from_kraus, load_channel, save_channel, validate_cptp
from .classical import (
    column_covariance_stats,
    decohere_interpolate,
    random_stochastic,
    stinespring_column_covariances,
    stochastic_from_choi,
)
from .ensembles import RngStream, dirichlet
from .samplers import EnsembleSpec, sample, sample_kraus_batch, sample_lebesgue, sample_stinespring_batch
from .spectral import (
    choi_superop_eigenvalues,
    coherence_measures,
    empirical_moments,
    exponent_fit,
    fraction_in_disk,
    invariant_state,
    purity_unitarity_batch,
    purity_unitarity_oracle,
    stochastic_spectrum,
    summarize_spectrum,
    superop_spectrum,
    trace_product_oracle,
    write_spectrum_csv,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "RunManifest",
    "expand_grid",
    "load_config",
    "run_tasks",
    "write_table",
    "decohered_spectrum",
    "decoherence_scan",
    "invariant_study",
    "verify_suite",
    "cmd_sample",
    "cmd_verify",
    "cmd_decoherence_scan",
    "cmd_invariant",
    "cmd_simplex",
    "cmd_spectrum",
]


class ConfigError(ValueError):
    def __init__(self, path, message):
        super().__init__(f"config field '{path}': {message}")
        self.path = path


# configuration -----------------------------------------------------------------


def expand_grid(value, path="grid"):
    """A list, a scalar, or a ``{start, stop, step}`` mapping with inclusive stop."""
    if value is None:
        return []
    if isinstance(value, dict):
        try:
            start, stop, step = float(value["start"]), float(value["stop"]), float(value["step"])
        except KeyError as exc:
            raise ConfigError(path, f"range needs start, stop and step (missing {exc})") from None
        if step <= 0:
            raise ConfigError(path, "step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        if n < 1:
            raise ConfigError(path, "empty range")
        vals = [round(start + k * step, 12) for k in range(n)]
        if all(float(v).is_integer() for v in vals) and all(
            float(x).is_integer() for x in (start, step)
        ):
            return [int(v) for v in vals]
        return vals
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


@dataclass
class ExperimentConfig:
    """Parsed experiment configuration.

    Grids (``d``, ``b``, ``beta``, ``s``) accept lists or ``{start, stop, step}``.
    """

    seed: int = 0
    samples: int = 1
    ensemble: EnsembleSpec | None = None
    d: list = field(default_factory=list)
    b: list = field(default_factory=list)
    beta: list = field(default_factory=list)
    s: list = field(default_factory=list)
    M: int | None = None
    probes: int = 10
    checks: list = field(default_factory=list)
    analysis: dict = field(default_factory=dict)
    out: str = "runs"
    raw: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_dict(cls, data):
        data = dict(data or {})
        known = {"seed", "samples", "ensemble", "d", "b", "beta", "s", "M", "probes", "checks", "analysis", "out"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown field")
        cfg = cls(raw=data)
        cfg.seed = _int_field(data, "seed", 0, minimum=0)
        cfg.samples = _int_field(data, "samples", 1, minimum=1)
        cfg.probes = _int_field(data, "probes", 10, minimum=1)
        if data.get("M") is not None:
            cfg.M = _int_field(data, "M", None, minimum=1)
        if data.get("ensemble") is not None:
            ens = data["ensemble"]
            if not isinstance(ens, dict) or "kind" not in ens:
                raise ConfigError("ensemble", "must be a mapping with a 'kind'")
            try:
                cfg.ensemble = EnsembleSpec.from_dict(ens)
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError("ensemble", str(exc)) from None
        cfg.d = [int(x) for x in expand_grid(data.get("d"), "d")]
        if any(x < 2 for x in cfg.d):
            raise ConfigError("d", "dimensions must be at least 2")
        cfg.b = [float(x) for x in expand_grid(data.get("b"), "b")]
        if any(not 0 <= x <= 1 for x in cfg.b):
            raise ConfigError("b", "decoherence parameters must lie in [0, 1]")
        cfg.beta = [float(x) for x in expand_grid(data.get("beta"), "beta")]
        if any(x < 0 for x in cfg.beta):
            raise ConfigError("beta", "must be non-negative")
        cfg.s = [float(x) for x in expand_grid(data.get("s"), "s")]
        if any(x <= 0 for x in cfg.s):
            raise ConfigError("s", "Dirichlet parameters must be positive")
        checks = data.get("checks") or []
        if not isinstance(checks, list):
            raise ConfigError("checks", "must be a list")
        cfg.checks = checks
        analysis = data.get("analysis") or {}
        if not isinstance(analysis, dict):
            raise ConfigError("analysis", "must be a mapping")
        cfg.analysis = analysis
        cfg.out = str(data.get("out", "runs"))
        return cfg


def _int_field(data, key, default, minimum=None):
    if key not in data or data[key] is None:
        return default
    v = data[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
        raise ConfigError(key, f"expected an integer, got {v!r}")
    v = int(v)
    if minimum is not None and v < minimum:
        raise ConfigError(key, f"must be at least {minimum}")
    return v


def load_config(path=None, overrides=None):
    data = {}
    if path is not None:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
        if not isinstance(data, dict):
            raise ConfigError("<root>", "config must be a mapping")
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return ExperimentConfig.from_dict(data)


# execution and output -------------------------------------------------------


def run_tasks(fn, tasks, threads=1):
    """Map ``fn`` over ``tasks``; results come back in task order."""
    tasks = list(tasks)
    if threads is None or threads <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks))


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return v


def write_table(out_dir, name, columns, rows, fmt="csv"):
    """Write rows as ``name.csv`` (header plus rows) or ``name.json`` (list of records)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        path = out_dir / f"{name}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(columns)
            for r in rows:
                w.writerow([_fmt(x) for x in r])
    elif fmt == "json":
        path = out_dir / f"{name}.json"
        recs = [{c: _jsonable(x) for c, x in zip(columns, r)} for r in rows]
        path.write_text(json.dumps(recs, indent=1) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return path


def _jsonable(x):
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int
    task_streams: str
    code_version: str = __version__
    wall_clock_seconds: float = 0.0
    outputs: list = field(default_factory=list)

    def add(self, path):
        self.outputs.append({"path": Path(path).name, "sha256": sha256_file(path)})

    def write(self, out_dir):
        return _write_json(Path(out_dir) / "manifest.json", asdict(self))


def _histogram(values, analysis):
    bins = analysis.get("bins", "fd")
    counts, edges = np.histogram(np.asarray(values, dtype=float), bins=bins)
    return counts, edges


def _maybe_svg(out_dir, name, kind, data, analysis):
    """Optional static figure; skipped silently when matplotlib is missing."""
    if not analysis.get("svg"):
        return None
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return None
    fig, ax = plt.subplots(figsize=(4, 4))
    if kind == "scatter":
        z = np.asarray(data)
        ax.scatter(z.real, z.imag, s=2)
        ax.set_aspect("equal")
    else:
        counts, edges = data
        ax.stairs(counts, edges)
    path = Path(out_dir) / f"{name}.svg"
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


# reusable computations ------------------------------------------------------------


def decohered_spectrum(J, d, b):
    """Superoperator eigenvalues of ``J_b``; at b = 0 only the stochastic block is diagonalized."""
    if b == 0:
        T = stochastic_from_choi(J, d, d)
        ev = np.linalg.eigvals(T)
        return np.concatenate([ev, np.zeros(d * d - d, dtype=complex)])
    return choi_superop_eigenvalues(decohere_interpolate(J, b), d)


def _lebesgue_choi(d, stream):
    K = sample_kraus_batch(d, d, d * d, None, stream)
    return choi_from_kraus(K)


def decoherence_scan(d_grid, b_grid, n, seed, threads=1, radius_fn=None):
    """Bulk radius and in-disk fraction of decohered Lebesgue channels.

    For each d and sample, one channel is drawn and reused across the b grid.
    ``radius_fn(d)`` sets the disk radius for the fraction (default ``d^-1.5``).

    Returns
    -------
    list of dict with keys d, b, sample, bulk_radius, fraction_in_disk
    """
    radius_fn = radius_fn or (lambda d: d**-1.5)
    tasks = [(d, i, k) for k, (d, i) in enumerate((d, i) for d in d_grid for i in range(n))]

    def work(task):
        d, i, k = task
        J = _lebesgue_choi(d, RngStream(seed, k))
        out = []
        for b in b_grid:
            s = summarize_spectrum(decohered_spectrum(J, d, b))
            out.append(
                {"d": d, "b": b, "sample": i, "bulk_radius": s.bulk_radius,
                 "fraction_in_disk": fraction_in_disk(s, radius_fn(d))}
            )
        return out

    return [row for rows in run_tasks(work, tasks, threads) for row in rows]


def aggregate_scan(rows):
    """Mean bulk radius and in-disk fraction per (d, b)."""
    groups = {}
    for r in rows:
        groups.setdefault((r["d"], r["b"]), []).append(r)
    out = []
    for (d, b), rs in sorted(groups.items()):
        out.append({
            "d": d, "b": b,
            "bulk_radius": float(np.mean([r["bulk_radius"] for r in rs])),
            "fraction_in_disk": float(np.mean([r["fraction_in_disk"] for r in rs])),
            "n": len(rs),
        })
    return out


def invariant_study(d_grid, n, seed, threads=1, spec=None, method="auto"):
    """Invariant states of random channels.

    Returns a list of dicts with d, sample, trace_distance, residual and the
    eigenvalues of ``d^2 (rho - I/d)``.
    """
    tasks = [(d, i, k) for k, (d, i) in enumerate((d, i) for d in d_grid for i in range(n))]

    def work(task):
        d, i, k = task
        stream = RngStream(seed, k)
        ch = sample_lebesgue(d, rng=stream) if spec is None else sample(_with_dim(spec, d), stream)
        res = invariant_state(ch, method=method)
        ev = np.linalg.eigvalsh(d * d * (res.state - np.eye(d) / d))
        return {"d": d, "sample": i, "trace_distance": res.distance_to_mixed,
                "residual": res.residual, "eigenvalues": ev}

    return run_tasks(work, tasks, threads)


def _with_dim(spec, d):
    return EnsembleSpec(spec.kind, d, None if spec.d_out is None else d, spec.M, dict(spec.params))


# verification suite ------------------------------------------------------------

DEFAULT_CHECKS = [
    {"name": "purity", "d": 2, "samples": 10_000, "probes": 10},
    {"name": "covariance", "d": 2, "M": 2, "samples": 100_000},
    {"name": "trace-product", "d": 2, "M": 3, "pairs": 5, "samples": 10_000},
    {"name": "coherence", "d": 32, "samples": 200},
]


def _check(name, observed, expected, sigma, verdict, rule):
    return {"name": name, "observed": float(observed), "expected": float(expected),
            "sigma": float(sigma), "rule": rule, "verdict": "pass" if verdict else "fail"}


def _sigma_check(name, obs, exp, se, k=3.0):
    return _check(name, obs, exp, se, abs(obs - exp) <= k * se, f"|obs-exp| <= {k:g} sigma")


def _rel_check(name, obs, exp, se, rel):
    return _check(name, obs, exp, se, abs(obs - exp) <= rel * abs(exp), f"relative error <= {rel:g}")


def verify_suite(checks, seed, threads=1):
    """Closed-form versus Monte Carlo comparisons; each entry reports observed, expected, sigma, verdict."""
    report = []
    for ci, chk in enumerate(checks or DEFAULT_CHECKS):
        name = chk.get("name")
        stream = RngStream(seed, ci)
        gen = stream.generator()
        if name == "purity":
            d, n, probes = chk.get("d", 2), chk.get("samples", 10_000), chk.get("probes", 10)
            K = sample_kraus_batch(d, d, d * d, n, gen)
            p, u = purity_unitarity_batch(K, probes, gen)
            ep, eu = purity_unitarity_oracle(d, d * d)
            se = lambda x: x.std(ddof=1) / np.sqrt(x.size)
            report.append(_sigma_check(f"purity(d={d})", p.mean(), ep, se(p)))
            report.append(_sigma_check(f"unitarity(d={d})", u.mean(), eu, se(u)))
        elif name == "covariance":
            d, M, n = chk.get("d", 2), chk.get("M", 2), chk.get("samples", 100_000)
            V = sample_stinespring_batch(d, d, M, n, gen)
            T = (np.abs(V.reshape(n, d, M, d)) ** 2).sum(axis=2)
            rep = column_covariance_stats(T)
            same, cross = stinespring_column_covariances(d, M)
            report.append(_sigma_check(f"cov-same-row(d={d},M={M})", rep.same_row, same, rep.same_row_se))
            report.append(_sigma_check(f"cov-cross(d={d},M={M})", rep.cross, cross, rep.cross_se))
            U = random_stochastic(d, d, "uniform", rng=gen, size=n)
            urep = column_covariance_stats(U)
            report.append(_sigma_check(f"cov-uniform(d={d})", urep.cross, 0.0, urep.cross_se))
        elif name == "trace-product":
            d, M, n, pairs = chk.get("d", 2), chk.get("M", 3), chk.get("samples", 10_000), chk.get("pairs", 5)
            V = sample_stinespring_batch(d, d, M, n, gen)
            K = V.reshape(n, d, M, d).transpose(0, 2, 1, 3)
            for j in range(pairs):
                A, B = (_random_hermitian(d, gen) for _ in range(2))
                PA = np.einsum("nkai,ij,nkbj->nab", K, A, K.conj(), optimize=True)
                PB = np.einsum("nkai,ij,nkbj->nab", K, B, K.conj(), optimize=True)
                vals = np.einsum("nab,nba->n", PA, PB).real
                exp = trace_product_oracle(A, B, d, d, M)
                report.append(_sigma_check(f"trace-product#{j}", vals.mean(), exp, vals.std(ddof=1) / np.sqrt(n)))
        elif name == "coherence":
            d, n = chk.get("d", 32), chk.get("samples", 200)
            rel = chk.get("rel_tol", 0.05)

            def work(k, d=d):
                J = _lebesgue_choi(d, RngStream(seed, 1000 * (ci + 1) + k))
                return coherence_measures(J)

            vals = np.array(run_tasks(work, range(n), threads))
            se = vals.std(axis=0, ddof=1) / np.sqrt(n)
            report.append(_rel_check(f"coherence-C2(d={d})", vals[:, 0].mean(), 1.0, se[0], rel))
            report.append(_rel_check(f"coherence-C1/d^2(d={d})", vals[:, 1].mean() / d**2,
                                     np.sqrt(np.pi) / 2, se[1] / d**2, rel))
            report.append(_rel_check(f"coherence-Ce/d(d={d})", vals[:, 2].mean() / d, 0.5, se[2] / d, rel))
        else:
            raise ConfigError(f"checks[{ci}].name", f"unknown check {name!r}")
    return report


def _random_hermitian(d, gen):
    X = gen.standard_normal((d, d)) + 1j * gen.standard_normal((d, d))
    return (X + X.conj().T) / 2


# commands -------------------------------------------------------------------------


def _manifest(command, cfg, seed):
    return RunManifest(command=command, config=cfg.raw, seed=seed,
                       task_streams="RngStream(seed, task_index) with tasks enumerated in grid order")


def cmd_sample(cfg, out, threads=1, fmt="csv"):
    """Draw ``cfg.samples`` channels from ``cfg.ensemble`` and save them as QCHN1 files."""
    if cfg.ensemble is None:
        raise ConfigError("ensemble", "required for sampling")
    t0 = time.perf_counter()
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    man = _manifest("sample", cfg, cfg.seed)

    def work(i):
        ch = sample(cfg.ensemble, RngStream(cfg.seed, i))
        path = out / f"channel_{i:05d}.qchn"
        kind = "kraus" if ch.has("kraus") else "choi"
        save_channel(path, ch, kind)
        return path

    paths = run_tasks(work, range(cfg.samples), threads)
    rows = []
    for i, p in enumerate(paths):
        rep = validate_cptp(load_channel(p).choi, cfg.ensemble.d_in, cfg.ensemble.dim_out)
        rows.append([i, p.name, rep.min_eigenvalue, rep.tp_defect, rep.unital_defect])
        man.add(p)
    man.add(write_table(out, "channels", ["sample_index", "file", "min_eigenvalue", "tp_defect", "unital_defect"], rows, fmt))
    man.wall_clock_seconds = time.perf_counter() - t0
    man.write(out)
    return paths


def cmd_verify(cfg, out, threads=1, fmt="csv"):
    """Run the verification suite; returns the report list (all pass iff every verdict is 'pass')."""
    t0 = time.perf_counter()
    report = verify_suite(cfg.checks, cfg.seed, threads)
    man = _manifest("verify", cfg, cfg.seed)
    man.add(_write_json(Path(out) / "verify.json", report))
    man.wall_clock_seconds = time.perf_counter() - t0
    man.write(out)
    return report


def cmd_decoherence_scan(cfg, out, threads=1, fmt="csv"):
    """Per-(d, b) bulk radius and in-disk fraction, exponent fits per b, and a beta = b sqrt(d) table."""
    t0 = time.perf_counter()
    d_grid = cfg.d or [10, 16, 24, 32, 40]
    b_grid = sorted(set(cfg.b or [round(0.05 * k, 2) for k in range(21)]))
    if cfg.beta:
        # add the b values needed for the collapse table
        extra = {round(beta / math.sqrt(d), 12) for d in d_grid for beta in cfg.beta if beta / math.sqrt(d) <= 1}
        b_grid = sorted(set(b_grid) | extra)
    rows = aggregate_scan(decoherence_scan(d_grid, b_grid, cfg.samples, cfg.seed, threads))
    man = _manifest("decoherence-scan", cfg, cfg.seed)
    man.add(write_table(out, "scan", ["d", "b", "bulk_radius", "fraction_in_disk"],
                        [[r["d"], r["b"], r["bulk_radius"], r["fraction_in_disk"]] for r in rows], fmt))
    fits = []
    for b in b_grid:
        pairs = [(r["d"], r["bulk_radius"]) for r in rows if r["b"] == b]
        if len({p[0] for p in pairs}) >= 3 and all(p[1] > 0 for p in pairs):
            alpha, se = exponent_fit(pairs)
            fits.append([b, alpha, se])
    man.add(write_table(out, "alpha_fit", ["b", "alpha", "stderr"], fits, fmt))
    if cfg.beta:
        coll = []
        for beta in cfg.beta:
            for d in d_grid:
                b = round(beta / math.sqrt(d), 12)
                match = [r for r in rows if r["d"] == d and r["b"] == b]
                if match:
                    coll.append([beta, d, b, match[0]["fraction_in_disk"]])
        man.add(write_table(out, "beta_collapse", ["beta", "d", "b", "fraction_in_disk"], coll, fmt))
    man.wall_clock_seconds = time.perf_counter() - t0
    man.write(out)
    return rows, fits


def cmd_invariant(cfg, out, threads=1, fmt="csv"):
    """Invariant-state distances and the pooled spectrum of ``d^2 (rho - I/d)``."""
    t0 = time.perf_counter()
    d_grid = cfg.d or [10, 20, 40]
    results = invariant_study(d_grid, cfg.samples, cfg.seed, threads, spec=cfg.ensemble)
    man = _manifest("invariant", cfg, cfg.seed)
    man.add(write_table(out, "invariant", ["d", "sample", "trace_distance", "residual"],
                        [[r["d"], r["sample"], r["trace_distance"], r["residual"]] for r in results], fmt))
    summary = {}
    hist_rows = []
    for d in d_grid:
        rs = [r for r in results if r["d"] == d]
        pooled = np.concatenate([r["eigenvalues"] for r in rs])
        m2, m4 = empirical_moments(pooled, (2, 4))
        summary[str(d)] = {
            "median_trace_distance": float(np.median([r["trace_distance"] for r in rs])),
            "max_residual": float(max(r["residual"] for r in rs)),
            "m2": m2, "m4": m4, "m4_over_m2sq": m4 / m2**2 if m2 > 0 else None,
        }
        counts, edges = _histogram(pooled, cfg.analysis)
        hist_rows += [[d, edges[j], edges[j + 1], int(counts[j])] for j in range(counts.size)]
        svg = _maybe_svg(out, f"invariant_hist_d{d}", "hist", (counts, edges), cfg.analysis)
        if svg:
            man.add(svg)
    man.add(write_table(out, "invariant_histogram", ["d", "left", "right", "count"], hist_rows, fmt))
    man.add(_write_json(Path(out) / "invariant_summary.json", summary))
    man.wall_clock_seconds = time.perf_counter() - t0
    man.write(out)
    return results, summary


def cmd_simplex(cfg, out, threads=1, fmt="csv"):
    """Dirichlet samples on the simplex and spectra of classical and quantum random maps."""
    t0 = time.perf_counter()
    d = (cfg.d or [3])[0]
    s_grid = cfg.s or [1.0, 9.0]
    n = cfg.samples
    man = _manifest("simplex", cfg, cfg.seed)
    rows = []
    for j, s in enumerate(s_grid):
        P = dirichlet(d, s, rng=RngStream(cfg.seed, j), size=n)
        rows += [[s, i] + list(P[i]) for i in range(n)]
    man.add(write_table(out, "dirichlet_samples", ["s", "sample"] + [f"p{k}" for k in range(d)], rows, fmt))

    n_maps = int(cfg.analysis.get("maps", min(n, 2000)))
    offset = len(s_grid)

    def classical(task):
        j, s, i = task
        T = random_stochastic(d, d, "dirichlet", s=s, rng=RngStream(cfg.seed, offset + j * n_maps + i))
        return stochastic_spectrum(T).bulk

    def quantum(i):
        ch = sample_lebesgue(d, rng=RngStream(cfg.seed, offset + len(s_grid) * n_maps + i))
        return superop_spectrum(ch).bulk

    spec_rows = []
    for j, s in enumerate(s_grid):
        bulks = run_tasks(classical, [(j, s, i) for i in range(n_maps)], threads)
        spec_rows += [[f"dirichlet-{s:g}", i, z.real, z.imag] for i, b in enumerate(bulks) for z in b]
    qb = run_tasks(quantum, range(n_maps), threads)
    spec_rows += [["lebesgue", i, z.real, z.imag] for i, b in enumerate(qb) for z in b]
    man.add(write_table(out, "simplex_spectra", ["ensemble", "sample_index", "re", "im"], spec_rows, fmt))
    radii = {"r1": 1 / math.sqrt(d), "r_c": 1 / (d * math.sqrt(d)), "r_q": 1 / d}
    man.add(_write_json(Path(out) / "reference_radii.json", radii))
    man.wall_clock_seconds = time.perf_counter() - t0
    man.write(out)
    return rows, spec_rows, radii


def cmd_spectrum(cfg, out, threads=1, fmt="csv"):
    """Superoperator spectra of sampled channels with per-sample summaries."""
    if cfg.ensemble is None:
        raise ConfigError("ensemble", "required for spectra")
    t0 = time.perf_counter()
    Path(out).mkdir(parents=True, exist_ok=True)

    def work(i):
        return superop_spectrum(sample(cfg.ensemble, RngStream(cfg.seed, i)))

    sums = run_tasks(work, range(cfg.samples), threads)
    man = _manifest("spectrum", cfg, cfg.seed)
    if fmt == "csv":
        path = Path(out) / "spectrum.csv"
        write_spectrum_csv(path, [s.eigenvalues for s in sums])
        man.add(path)
    else:
        rows = [[i, z.real, z.imag] for i, s in enumerate(sums) for z in s.eigenvalues]
        man.add(write_table(out, "spectrum", ["sample_index", "re", "im"], rows, fmt))
    man.add(_write_json(Path(out) / "summary.json", [dict(sample_index=i, **s.as_dict()) for i, s in enumerate(sums)]))
    svg = _maybe_svg(out, "spectrum", "scatter", np.concatenate([s.eigenvalues for s in sums]), cfg.analysis)
    if svg:
        man.add(svg)
    man.wall_clock_seconds = time.perf_counter() - t0
    man.write(out)
    return sums
