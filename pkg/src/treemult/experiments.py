"""Monte Carlo harness: sample trees, aggregate multiplicities, report bound coverage.

The library reports; judging coverage thresholds is left to callers and tests.
Output files (CSV or JSON) are a pure function of the configuration, so
reruns are byte-identical.  Wall-clock time is returned on the result object
but never written into them.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .multiplicity import (free_orbit_classes, identical_classes, max_leaf_degree,
                           rooted_orbit_classes)
from .offspring import (bound_constants, exact_forms, gamma_constant, parse_family,
                        renyi_entropy)
from .oracle import conditioned_law
from .sampler import (InfeasibleSize, RandomSource, check_feasible, kesten_depth, label_key,
                      sample_conditioned, sample_kesten_truncated)
from .tree import to_free

TABLE1_FAMILIES = ("full-binary", "t-ary:3", "cayley", "catalan", "binomial:3", "motzkin",
                   "geometric-half")
NA = "n/a"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    families: List[str]
    sizes: List[int]
    trials: int = 100
    seed: int = 0
    epsilon: float = 0.5
    kesten_depth: Optional[int] = None  # None: ceil(n^(1/3)) + 1
    output: Optional[str] = None
    format: str = "csv"
    workers: int = 1

    def validate(self) -> None:
        if not self.families:
            raise ConfigError("families: at least one family is required")
        if not self.sizes:
            raise ConfigError("sizes: at least one size is required")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not 0 < self.epsilon < 1:
            raise ConfigError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.kesten_depth is not None and self.kesten_depth < 0:
            raise ConfigError("kesten_depth must be >= 0")
        for fam in self.families:
            d = parse_family(fam)
            for n in self.sizes:
                if n < 2:
                    raise ConfigError(f"sizes must be >= 2 (log n must be positive), got {n}")
                try:
                    check_feasible(d, n)
                except InfeasibleSize as exc:
                    raise InfeasibleSize(f"family {fam}: {exc}") from None

    def digest(self) -> str:
        """Hash of everything that determines the numbers (not output path or workers)."""
        payload = {k: v for k, v in asdict(self).items() if k not in ("output", "workers")}
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        """Parse flat ``key = value`` lines; lists are comma separated."""
        raw: Dict[str, str] = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            raw[key] = value
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        try:
            kwargs = {
                "families": [s.strip() for s in raw.get("families", "").split(",") if s.strip()],
                "sizes": [int(float(s)) for s in raw.get("sizes", "").split(",") if s.strip()],
            }
            if "trials" in raw:
                kwargs["trials"] = int(raw["trials"])
            if "seed" in raw:
                kwargs["seed"] = int(raw["seed"], 0)
            if "epsilon" in raw:
                kwargs["epsilon"] = float(raw["epsilon"])
            if raw.get("kesten_depth", "cuberoot") not in ("", "cuberoot"):
                kwargs["kesten_depth"] = int(raw["kesten_depth"])
            if "workers" in raw:
                kwargs["workers"] = int(raw["workers"])
        except ValueError as exc:
            raise ConfigError(f"bad value: {exc}") from None
        if raw.get("output"):
            kwargs["output"] = raw["output"]
        if raw.get("format"):
            kwargs["format"] = raw["format"]
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


# -- trials -------------------------------------------------------------------


def trial_source(seed: int, family: str, n: int, trial: int) -> RandomSource:
    return RandomSource(seed).derive(label_key(family, n, trial))


def _one_trial(args: Tuple[str, int, int, int]) -> Tuple[int, int, int, int]:
    family, n, seed, trial = args
    d = parse_family(family)
    t = sample_conditioned(d, n, trial_source(seed, family, n, trial))
    s = identical_classes(t).max_size()
    m = rooted_orbit_classes(t).max_size()
    mf = free_orbit_classes(to_free(t)).max_size()
    leaf, _ = max_leaf_degree(t)
    return s, m, mf, leaf


def _map(fn, jobs: Sequence, workers: int) -> List:
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def _summary(prefix: str, values: np.ndarray) -> Dict[str, float]:
    q10, q50, q90 = np.quantile(values, [0.1, 0.5, 0.9])
    return {
        f"{prefix}_mean": float(values.mean()),
        f"{prefix}_min": int(values.min()),
        f"{prefix}_q10": float(q10),
        f"{prefix}_median": float(q50),
        f"{prefix}_q90": float(q90),
        f"{prefix}_max": int(values.max()),
    }


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: List[Dict[str, object]]
    runtime_seconds: float = 0.0
    group_seconds: Dict[str, float] = field(default_factory=dict)

    @property
    def columns(self) -> List[str]:
        return list(self.rows[0]) if self.rows else list(EXPERIMENT_COLUMNS)

    def row(self, family: str, n: int) -> Dict[str, object]:
        for r in self.rows:
            if r["family"] == family and r["n"] == n:
                return r
        raise KeyError((family, n))


EXPERIMENT_COLUMNS = (
    ["config_hash", "family", "n", "trials", "epsilon", "lower_coeff", "upper_coeff"]
    + [f"{s}_{a}" for s in ("S", "M", "M_F", "L")
       for a in ("mean", "min", "q10", "median", "q90", "max")]
    + ["S_lower_ratio_mean", "S_upper_ratio_mean", "frac_lower", "frac_upper", "frac_band"]
)


def _aggregate(cfg: ExperimentConfig, family: str, n: int, samples: np.ndarray) -> Dict[str, object]:
    d = parse_family(family)
    lower_coeff, upper_coeff = bound_constants(d)
    log_n = math.log2(n)
    s = samples[:, 0]
    row: Dict[str, object] = {
        "config_hash": cfg.digest(),
        "family": family,
        "n": n,
        "trials": len(samples),
        "epsilon": cfg.epsilon,
        "lower_coeff": lower_coeff,
        "upper_coeff": upper_coeff if upper_coeff is not None else NA,
    }
    for j, name in enumerate(("S", "M", "M_F", "L")):
        row.update(_summary(name, samples[:, j]))
    gamma = gamma_constant(d)
    row["S_lower_ratio_mean"] = float(np.mean(s * math.log2(1 / gamma) / log_n))
    lower_ok = s >= (1 - cfg.epsilon) * lower_coeff * log_n
    row["frac_lower"] = float(lower_ok.mean())
    if upper_coeff is None:
        row["S_upper_ratio_mean"] = NA
        row["frac_upper"] = NA
        row["frac_band"] = NA
    else:
        row["S_upper_ratio_mean"] = float(np.mean(s * renyi_entropy(d, 2) / (2 * log_n)))
        upper_ok = s <= (1 + cfg.epsilon) * upper_coeff * log_n
        row["frac_upper"] = float(upper_ok.mean())
        row["frac_band"] = float((lower_ok & upper_ok).mean())
    return row


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    cfg.validate()
    start = time.perf_counter()
    rows = []
    timings = {}
    for family in sorted(cfg.families):
        for n in sorted(cfg.sizes):
            t0 = time.perf_counter()
            jobs = [(family, n, cfg.seed, i) for i in range(cfg.trials)]
            samples = np.array(_map(_one_trial, jobs, cfg.workers), dtype=np.int64)
            rows.append(_aggregate(cfg, family, n, samples))
            timings[f"{family}:{n}"] = time.perf_counter() - t0
    result = ExperimentResult(cfg, rows, time.perf_counter() - start, timings)
    if cfg.output:
        write_result(result, cfg.output, cfg.format)
    return result


# -- output --------------------------------------------------------------------


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows: Sequence[Dict[str, object]], columns: Optional[Sequence[str]] = None) -> str:
    columns = list(columns or (rows[0].keys() if rows else []))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r[c]) for c in columns])
    return buf.getvalue()


def rows_to_json(rows: Sequence[Dict[str, object]], **meta) -> str:
    return json.dumps({**meta, "rows": list(rows)}, indent=2, ensure_ascii=False) + "\n"


def render(result: ExperimentResult, fmt: str = "csv") -> str:
    if fmt == "csv":
        return rows_to_csv(result.rows, EXPERIMENT_COLUMNS)
    return rows_to_json(result.rows, config=asdict(result.config), config_hash=result.config.digest())


def write_result(result: ExperimentResult, path, fmt: str = "csv") -> None:
    Path(path).write_text(render(result, fmt), encoding="utf-8")


# -- constants table ---------------------------------------------------------------


def table1(families: Iterable[str] = TABLE1_FAMILIES) -> List[Dict[str, object]]:
    rows = []
    for fam in families:
        d = parse_family(fam)
        gamma = gamma_constant(d)
        h2 = renyi_entropy(d, 2)
        lower, upper = bound_constants(d)
        g_s, h_s, lo_s, up_s = exact_forms(d)
        rows.append({
            "family": fam,
            "gamma": gamma,
            "gamma_exact": g_s,
            "H2": h2,
            "H2_exact": h_s,
            "lower_coeff": lower,
            "lower_bound": lo_s,
            "upper_coeff": upper if upper is not None else "—",
            "upper_bound": up_s,
        })
    return rows


def constants(family: str) -> Dict[str, object]:
    d = parse_family(family)
    row = table1([family])[0]
    row.update({"span": d.span, "mean": d.mean, "variance": d.variance,
                "finite_two_exp": d.finite_two_exp})
    return row


def format_table(rows: Sequence[Dict[str, object]], columns: Sequence[str]) -> str:
    cells = [[c for c in columns]]
    for r in rows:
        cells.append([f"{r[c]:.10g}" if isinstance(r[c], float) else str(r[c]) for c in columns])
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
    lines = ["  ".join(x.ljust(w) for x, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


# -- maximal leaf-degree ----------------------------------------------------------------


def _leafdeg_trial(args) -> Tuple[int, int]:
    family, n, seed, trial, depth = args
    d = parse_family(family)
    t = sample_conditioned(d, n, trial_source(seed, family, n, trial))
    leaf, _ = max_leaf_degree(t)
    k = sample_kesten_truncated(d, depth, trial_source(seed, "kesten:" + family, n, trial))
    spine = k.spine_leaf_degrees()
    return leaf, max(spine) if spine else 0


def leaf_degree_experiment(family: str, sizes: Sequence[int], trials: int, depth_rule="cuberoot",
                           seed: int = 0, workers: int = 1) -> List[Dict[str, object]]:
    """Observational rows of L_n / ln n and the spine leaf-degree of Kesten truncations."""
    d = parse_family(family)
    rows = []
    for n in sorted(sizes):
        check_feasible(d, n)
        depth = kesten_depth(n) if depth_rule == "cuberoot" else int(depth_rule)
        jobs = [(family, n, seed, i, depth) for i in range(trials)]
        out = np.array(_map(_leafdeg_trial, jobs, workers), dtype=np.int64).reshape(-1, 2)
        ln_n = math.log(n) if n > 1 else math.nan
        rows.append({
            "family": d.name,
            "n": n,
            "trials": trials,
            "kesten_depth": depth,
            "L_mean": float(out[:, 0].mean()),
            "L_max": int(out[:, 0].max()),
            "L_over_ln_n_mean": float(out[:, 0].mean() / ln_n),
            "spine_L_mean": float(out[:, 1].mean()),
            "spine_L_max": int(out[:, 1].max()),
            "spine_L_over_ln_n_mean": float(out[:, 1].mean() / ln_n),
        })
    return rows


# -- sampler law check ----------------------------------------------------------------


def sampler_law(family: str, n: int, samples: int, seed: int, method: str = "counts"
                ) -> Tuple[List[Dict[str, object]], float]:
    """Empirical versus exact conditioned law over every shape of size n.

    Returns per-shape rows and the total-variation distance.
    """
    d = parse_family(family)
    exact = conditioned_law(d, n)
    counts = {t: 0 for t in exact}
    src = RandomSource(seed)
    for i in range(samples):
        t = sample_conditioned(d, n, src.derive(i), method=method)
        counts[t] += 1
    rows = []
    tv = 0.0
    for t in sorted(exact, key=lambda t: t.degrees):
        emp = counts[t] / samples
        tv += abs(emp - exact[t])
        rows.append({"family": d.name, "n": n, "degrees": " ".join(map(str, t.degrees)),
                     "exact": exact[t], "count": counts[t], "empirical": emp})
    return rows, tv / 2
