"""Config-driven experiment runners and CSV/JSON report emission."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Optional

from . import bounds, casestudy, sdpi
from .errors import ConfigError, DomainError

KINDS = ("table1", "add_layer_sweep", "split_layer_sweep", "bound_profile", "sdpi_table", "bound")
SEEDED_KINDS = ("table1", "bound_profile")
EVALUATORS = ("contraction", "gibbs", "gibbs_worst_case", "discrete_latent", "miub",
              "finite_param", "kl_vs_wasserstein")


@dataclass
class ExperimentConfig:
    kind: str
    # network / sweep
    dims: Optional[list] = None
    regularization: dict = field(default_factory=lambda: {"type": "dropout", "delta": 0.5})
    B: int = 2
    label_count: int = 2
    d_range: Optional[list] = None
    # case study
    n: int = 100
    mu0: list = field(default_factory=lambda: [0.5, 0.0])
    sigma0: float = 1.0
    depth: int = 10
    funnel_fraction: float = 0.2
    funnel_index: int = 5
    l_primes: list = field(default_factory=lambda: [3, 5, 7])
    scale_mode: str = "uniform"
    datasets: int = 100
    stacks_per_dataset: int = 100
    # closed-form evaluators
    evaluator: Optional[str] = None
    params: dict = field(default_factory=dict)
    seed: Optional[int] = None
    format: str = "csv"

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        for key in data:
            if key not in names:
                raise ConfigError(key, "unknown config field")
        if "kind" not in data:
            raise ConfigError("kind", "missing")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigError("kind", f"must be one of {', '.join(KINDS)}")
        if self.format not in ("csv", "json"):
            raise ConfigError("format", "must be csv or json")
        if self.kind in SEEDED_KINDS:
            if self.seed is None:
                raise ConfigError("seed", f"required for {self.kind}")
            if not isinstance(self.seed, int) or not 0 <= self.seed < 2 ** 64:
                raise ConfigError("seed", "must be an unsigned 64-bit integer")
        _check_int(self, "B", 1)
        _check_int(self, "label_count", 1)
        if self.dims is not None:
            if (not isinstance(self.dims, (list, tuple)) or len(self.dims) < 2
                    or not all(isinstance(d, int) and not isinstance(d, bool) and d >= 1 for d in self.dims)):
                raise ConfigError("dims", "must be a list of at least two positive integers")
        if self.kind == "sdpi_table" and self.dims is None:
            raise ConfigError("dims", "required for sdpi_table")
        if self.kind in ("add_layer_sweep", "split_layer_sweep", "sdpi_table"):
            _regularization_builder(self.regularization)
        if self.d_range is not None:
            if (not isinstance(self.d_range, (list, tuple)) or len(self.d_range) != 2
                    or not all(isinstance(d, int) and d >= 1 for d in self.d_range)
                    or self.d_range[0] > self.d_range[1]):
                raise ConfigError("d_range", "must be [lo, hi] with 1 <= lo <= hi")
        if self.kind in ("table1", "bound_profile"):
            if not isinstance(self.mu0, (list, tuple)) or len(self.mu0) != 2:
                raise ConfigError("mu0", "rotation stacks need a 2-dimensional mean")
            if not (isinstance(self.sigma0, (int, float)) and self.sigma0 > 0):
                raise ConfigError("sigma0", "must be positive")
            _check_int(self, "n", 2)
            _check_int(self, "depth", 2)
            _check_int(self, "datasets", 2 if self.kind == "bound_profile" else 1)
            _check_int(self, "stacks_per_dataset", 1)
            if not (isinstance(self.funnel_fraction, (int, float)) and 0 < self.funnel_fraction <= 1):
                raise ConfigError("funnel_fraction", "must lie in (0, 1]")
            if self.scale_mode not in ("uniform", "equal"):
                raise ConfigError("scale_mode", "must be uniform or equal")
            indices = self.l_primes if self.kind == "table1" else [self.funnel_index]
            name = "l_primes" if self.kind == "table1" else "funnel_index"
            if not isinstance(indices, (list, tuple)) or not indices:
                raise ConfigError(name, "must be a non-empty list")
            for lp in indices:
                if not isinstance(lp, int) or not 1 <= lp <= self.depth - 1:
                    raise ConfigError(name, f"entries must lie in [1, {self.depth - 1}]")
        if self.kind == "bound":
            if self.evaluator not in EVALUATORS:
                raise ConfigError("evaluator", f"must be one of {', '.join(EVALUATORS)}")
            if not isinstance(self.params, dict):
                raise ConfigError("params", "must be an object")


def _check_int(cfg, name, lo):
    v = getattr(cfg, name)
    if not isinstance(v, int) or isinstance(v, bool) or v < lo:
        raise ConfigError(name, f"must be an integer >= {lo}")


def _regularization_builder(reg):
    """Map a descriptor to a function dims -> NetworkSpec."""
    if not isinstance(reg, dict) or "type" not in reg:
        raise ConfigError("regularization", "must be an object with a 'type'")
    kind = reg["type"]
    try:
        if kind == "dropout":
            delta = float(reg.get("delta", 0.5))
            sdpi.Dropout(delta, 1)
            return lambda dims, K=2: sdpi.NetworkSpec.with_dropout(dims, delta, K)
        if kind == "dropconnect":
            delta = float(reg.get("delta", 0.5))
            sdpi.Dropout(delta, 1)
            return lambda dims, K=2: sdpi.NetworkSpec.with_dropconnect(dims, delta, K)
        if kind == "noise":
            eps = float(reg.get("eps", 1.0))
            act_sup = float(reg.get("act_sup", 1.0))
            sdpi.GaussianNoise(eps, act_sup, 1)
            return lambda dims, K=2: sdpi.NetworkSpec.with_noise(dims, eps, act_sup, K)
        if kind == "none":
            return lambda dims, K=2: sdpi.NetworkSpec(tuple(dims), K)
    except (DomainError, TypeError, ValueError) as exc:
        raise ConfigError("regularization", str(exc)) from None
    raise ConfigError("regularization", f"unknown type {kind!r}")


# -- Reports ----------------------------------------------------------------

@dataclass
class ExperimentReport:
    """Rows sharing one ordered header."""

    columns: list
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, **row):
        if list(row) != self.columns:
            raise ValueError(f"row keys {list(row)} do not match header {self.columns}")
        self.rows.append({k: _plain(v) for k, v in row.items()})


def _plain(v):
    if isinstance(v, bool) or isinstance(v, str) or v is None:
        return v
    if isinstance(v, int) or (hasattr(v, "dtype") and v.dtype.kind in "iu"):
        return int(v)
    return float(v)


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".17g")
    return "" if v is None else str(v)


def render(report: ExperimentReport, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(report.columns)
        for row in report.rows:
            writer.writerow([_fmt(row[c]) for c in report.columns])
        return buf.getvalue()
    if fmt == "json":
        return json.dumps(report.rows, indent=2, allow_nan=False) + "\n"
    raise ConfigError("format", "must be csv or json")


def emit(report: ExperimentReport, fmt: str = "csv", path=None) -> None:
    """Write ``report`` as CSV or JSON to ``path`` (stdout when None)."""
    text = render(report, fmt)
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# -- Runners ----------------------------------------------------------------

def _mixture(cfg):
    return casestudy.GaussianMixtureSpec(tuple(cfg.mu0), float(cfg.sigma0), cfg.n)


def run_table1(cfg: ExperimentConfig) -> ExperimentReport:
    if cfg.kind != "table1":
        raise ConfigError("kind", "run_table1 needs kind = table1")
    spec = _mixture(cfg)
    L = cfg.depth
    columns = ["l_prime", "l_star", "weighted_l_star", "tail_violation_rate"] + [f"mean_l{l}" for l in range(L + 1)]
    report = ExperimentReport(columns, metadata={"seed": cfg.seed})
    for lp in cfg.l_primes:
        rcfg = casestudy.RotationStackConfig(L, lp, float(cfg.funnel_fraction), cfg.scale_mode)
        res = casestudy.funnel_layer(spec, rcfg, cfg.datasets, cfg.stacks_per_dataset, cfg.seed)
        report.add(l_prime=lp, l_star=res.index, weighted_l_star=res.weighted_index,
                   tail_violation_rate=res.tail_violation_rate,
                   **{f"mean_l{l}": m for l, m in enumerate(res.sample_means)})
    return report


def sweep_bound(eta_product: float, mi_ub: float, label_count: int) -> float:
    """sqrt(eta * H(W)-bound + log K), the per-sample bound without the sigma sqrt(2) factor."""
    return math.sqrt(eta_product * mi_ub + math.log(label_count))


def _sweep_point(builder, dims, B, K):
    eta = sdpi.network_eta_product(builder(dims, K))
    mi = bounds.finite_param_mi_ub(bounds.FiniteParamSpec(dims, B))
    return eta, mi, sweep_bound(eta, mi, K)


def run_depth_sweep(cfg: ExperimentConfig) -> ExperimentReport:
    """Add-a-layer or split-a-layer comparison against a 2-layer baseline."""
    if cfg.kind not in ("add_layer_sweep", "split_layer_sweep"):
        raise ConfigError("kind", "run_depth_sweep needs add_layer_sweep or split_layer_sweep")
    if cfg.B < 2:
        raise ConfigError("B", "must be >= 2")
    builder = _regularization_builder(cfg.regularization)
    K = cfg.label_count
    if cfg.kind == "add_layer_sweep":
        base = list(cfg.dims or [10, 20, 2])
        if len(base) != 3:
            raise ConfigError("dims", "add-layer baseline must have three widths")
        lo, hi = cfg.d_range or [1, 30]
        candidates = [(d, [base[0], d, base[1], base[2]]) for d in range(lo, hi + 1)]
        col = "d_star"
    else:
        base = list(cfg.dims or [10, 30, 2])
        if len(base) != 3 or base[1] < 2:
            raise ConfigError("dims", "split baseline must have three widths with a hidden width >= 2")
        lo, hi = cfg.d_range or [1, base[1] - 1]
        if hi > base[1] - 1:
            raise ConfigError("d_range", f"upper end must be <= {base[1] - 1}")
        candidates = [(d, [base[0], d, base[1] - d, base[2]]) for d in range(lo, hi + 1)]
        col = "d"
    try:
        b_eta, b_mi, b_bound = _sweep_point(builder, base, cfg.B, K)
        report = ExperimentReport(
            [col, "eta_product", "mi_ub", "bound", "baseline_eta_product", "baseline_mi_ub", "baseline_bound"],
            metadata={"regularization": cfg.regularization, "B": cfg.B, "baseline_dims": base})
        for d, dims in candidates:
            eta, mi, bd = _sweep_point(builder, dims, cfg.B, K)
            report.add(**{col: d}, eta_product=eta, mi_ub=mi, bound=bd,
                       baseline_eta_product=b_eta, baseline_mi_ub=b_mi, baseline_bound=b_bound)
    except DomainError as exc:
        raise ConfigError("regularization", str(exc)) from None
    return report


def run_sdpi_table(cfg: ExperimentConfig) -> ExperimentReport:
    builder = _regularization_builder(cfg.regularization)
    try:
        spec = builder(cfg.dims, cfg.label_count)
    except DomainError as exc:
        raise ConfigError("regularization", str(exc)) from None
    report = ExperimentReport(["layer", "kind", "width", "eta", "tightness", "cumulative_product"])
    prod = 1.0
    for c in sdpi.site_coefficients(spec):
        prod *= c.value
        report.add(layer=c.layer, kind=c.kind, width=c.width, eta=c.value,
                   tightness=c.tightness, cumulative_product=prod)
    return report


def run_bound_profile(cfg: ExperimentConfig) -> ExperimentReport:
    spec = _mixture(cfg)
    rcfg = casestudy.RotationStackConfig(cfg.depth, cfg.funnel_index, float(cfg.funnel_fraction), cfg.scale_mode)
    rep = casestudy.gen_bound_report(spec, rcfg, cfg.datasets, cfg.stacks_per_dataset, cfg.seed)
    report = ExperimentReport(
        ["layer", "mean_rank", "kl_bound", "wasserstein_bound", "gen_error", "gen_error_se"],
        metadata={"seed": cfg.seed, "kl_argmin": rep.kl.argmin, "wasserstein_argmin": rep.wasserstein.argmin})
    for l, (kl, w) in enumerate(zip(rep.kl.values, rep.wasserstein.values)):
        report.add(layer=l, mean_rank=rep.kl.metadata["mean_ranks"][l], kl_bound=kl,
                   wasserstein_bound=w, gen_error=rep.gen_error.estimate,
                   gen_error_se=rep.gen_error.std_error)
    return report


def _param(params, name, cast=float, default=None):
    if name not in params:
        if default is not None:
            return default
        raise ConfigError(f"params.{name}", "missing")
    try:
        return cast(params[name])
    except (TypeError, ValueError):
        raise ConfigError(f"params.{name}", f"cannot be read as {cast.__name__}") from None


def run_bound(cfg: ExperimentConfig) -> ExperimentReport:
    """Evaluate one closed-form bound; returns a single (evaluator, value) row."""
    p, ev = cfg.params, cfg.evaluator
    try:
        if ev == "contraction":
            mi = bounds.MutualInfoInputs(_param(p, "mi_x_given_y", list), _param(p, "mi_y", list),
                                         _param(p, "sigma"), cfg.label_count)
            value = bounds.contraction_bound(mi, _param(p, "eta_product"))
        elif ev == "gibbs":
            value = bounds.gibbs_bound(bounds.GibbsSpec(
                _param(p, "alpha"), _param(p, "gamma"), _param(p, "n", int), _param(p, "eta_product")))
        elif ev == "gibbs_worst_case":
            value = bounds.gibbs_bound_worst_case(_param(p, "alpha"), _param(p, "n", int),
                                                  _param(p, "eta_product"))
        elif ev == "discrete_latent":
            value = bounds.discrete_latent_bound(bounds.DiscreteLatentSpec(
                _param(p, "sigma"), cfg.label_count, _param(p, "t_bar"), _param(p, "latent_size", int)))
        elif ev == "miub":
            value = bounds.miub_dropout(bounds.MiubInputs(_param(p, "i_k", list)), _param(p, "delta0"))
        elif ev == "finite_param":
            value = bounds.finite_param_mi_ub(bounds.FiniteParamSpec(cfg.dims or _param(p, "dims", list), cfg.B))
        else:
            value = bounds.kl_vs_wasserstein_flag(_param(p, "rho0"), cfg.label_count,
                                                  _param(p, "loss_range_A")).value
    except DomainError as exc:
        raise ConfigError("params", str(exc)) from None
    report = ExperimentReport(["evaluator", "value"])
    report.add(evaluator=ev, value=value)
    return report


RUNNERS = {
    "table1": run_table1,
    "add_layer_sweep": run_depth_sweep,
    "split_layer_sweep": run_depth_sweep,
    "bound_profile": run_bound_profile,
    "sdpi_table": run_sdpi_table,
    "bound": run_bound,
}


def run(cfg: ExperimentConfig) -> ExperimentReport:
    cfg.validate()
    return RUNNERS[cfg.kind](cfg)
