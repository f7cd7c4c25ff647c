"""
Experiment drivers: channel ensembles, rate-region sweeps, SDR quality
ratios, max-min SNR sweeps and the literal-channel table case.

Every random draw is a function of ``(seed, channel index)`` only, so runs
are reproducible and any subset of channels can be regenerated. Output
files start with ``#`` comment lines echoing the config, library version,
seeds and units, followed by plain CSV.
"""

import csv
import io as _io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .baselines import GridSpec, grid_oracle, maxmin_point, tdma_maxmin
from .joint import joint_pareto_point
from .pareto import RateProfile
from .rates import LN2, rate_pair
from .separate import improper_pareto_point, proper_point
from .signal_model import SisoIcInstance, complex_to_real

log = logging.getLogger(__name__)

WMMSE_SUM_BITS = 4.6775
TABLE_PROFILE = (2.8673 / 4.6775, 1.0 - 2.8673 / 4.6775)


class ConfigError(ValueError):
    """Invalid experiment configuration (exit code 2)."""


class SolverFailures(RuntimeError):
    """Too many per-instance solver failures (exit code 3)."""


# --------------------------------------------------------------------------
# channels
# --------------------------------------------------------------------------

def _polar(mag, phase):
    return np.asarray(mag) * np.exp(1j * np.asarray(phase))


LITERAL_CHANNELS = {
    "H1": _polar([[2.0310, 1.4766], [0.7280, 0.9935]], [[-0.6858, 2.6452], [1.9726, -0.6676]]),
    "H2": _polar([[4.0, 0.90], [0.80, 1.50]], [[1.7730, 1.6744], [0.6249, 2.1057]]),
    "table": np.array([[2.7388 - 0.2498j, 0.9956 + 1.8047j],
                       [0.6680 - 1.6470j, 0.4760 + 1.2706j]]),
}


def snr_to_power(snr_db):
    """Per-user power ``P`` for ``sigma2 = 1``."""
    return float(10.0 ** (snr_db / 10.0))


def literal_channel(name, snr_db=0.0, sigma2=1.0):
    if name not in LITERAL_CHANNELS:
        raise ConfigError(f"unknown channel {name!r}; choose from {sorted(LITERAL_CHANNELS)}")
    P = snr_to_power(snr_db) * sigma2
    return SisoIcInstance(LITERAL_CHANNELS[name], sigma2, (P, P))


def channel_rng(seed, index, stream=0):
    """Generator for draw ``stream`` of channel ``index`` under ``seed``."""
    return np.random.default_rng([int(seed), int(index), int(stream)])


def gen_channel(seed, index, var_direct=1.0, var_cross=1.0, P=1.0, sigma2=1.0):
    if var_direct < 0 or var_cross < 0:
        raise ConfigError("variances must be nonnegative")
    rng = channel_rng(seed, index)
    z = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / np.sqrt(2.0)
    std = np.sqrt(np.array([[var_direct, var_cross], [var_cross, var_direct]]))
    return SisoIcInstance(z * std, sigma2, (P, P))


def gen_channels(seed, count, var_direct=1.0, var_cross=1.0, P=1.0, sigma2=1.0):
    """``count`` CSCG channels; entry variances ``var_direct`` (diagonal) and ``var_cross``."""
    return [gen_channel(seed, i, var_direct, var_cross, P, sigma2) for i in range(count)]


# --------------------------------------------------------------------------
# config
# --------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    """Settings shared by all experiments; unknown keys are rejected."""

    kind: str = "region"
    channel: str = "H1"
    channel_file: str = ""
    seed: int = 0
    count: int = 100
    var_direct: float = 1.0
    var_cross: float = 1.0
    snr_db: list = field(default_factory=lambda: [0.0])
    n_alpha: int = 99
    methods: list = field(default_factory=lambda: ["proper", "separate", "joint", "oracle"])
    L: int = 1000
    tol: float = 1e-4
    grid: list = field(default_factory=lambda: [21, 11, 72, 3])
    units: str = "bits"
    out: str = ""
    workers: int = 1
    failure_threshold: float = 0.1

    def validate(self):
        if self.units not in ("bits", "nats"):
            raise ConfigError("units must be 'bits' or 'nats'")
        if self.count < 0 or self.n_alpha < 1 or self.L < 1:
            raise ConfigError("count, n_alpha and L must be positive")
        if self.tol <= 0:
            raise ConfigError("tol must be positive")
        if len(self.grid) != 4:
            raise ConfigError("grid is [n_power, n_mag, n_theta, refine]")
        try:
            GridSpec(*map(int, self.grid))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        bad = set(self.methods) - {"proper", "separate", "joint", "oracle", "tdma"}
        if bad:
            raise ConfigError(f"unknown methods {sorted(bad)}")
        if self.var_direct < 0 or self.var_cross < 0:
            raise ConfigError("variances must be nonnegative")
        if not 0 <= self.failure_threshold <= 1:
            raise ConfigError("failure_threshold must be in [0, 1]")
        return self

    @property
    def grid_spec(self):
        return GridSpec(*map(int, self.grid))

    @classmethod
    def from_dict(cls, d):
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        cfg = cls(**d)
        if isinstance(cfg.snr_db, (int, float)):
            cfg.snr_db = [float(cfg.snr_db)]
        return cfg.validate()

    @classmethod
    def load(cls, path, **overrides):
        try:
            with open(path, encoding="utf-8") as fh:
                d = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        d.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(d)


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

SCHEMAS = {
    "region": ["alpha1", "alpha2", "method", "R1", "R2", "sum", "profile_value", "R_sdr", "status"],
    "ratio": ["index", "oracle_R", "joint_R", "R_sdr", "ratio", "status"],
    "maxmin": ["snr_db", "method", "mean_minrate", "n_ok", "n_failed"],
    "maxmin-detail": ["snr_db", "index", "method", "minrate", "status"],
    "channels": ["index", "h11", "h12", "h21", "h22"],
}


def schema_text():
    lines = ["CSV files begin with '#' lines: config (JSON), version, seeds, units.",
             "Rates are in the units named in the header; R_sdr is blank for other methods."]
    for name, cols in SCHEMAS.items():
        lines.append(f"{name}: " + ",".join(cols))
    return "\n".join(lines)


def _header(cfg, extra=None):
    meta = {"version": __version__, "units": cfg.units, "seed": cfg.seed}
    meta.update(extra or {})
    return [f"# config: {json.dumps(asdict(cfg), sort_keys=True)}",
            f"# meta: {json.dumps(meta, sort_keys=True)}"]


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return "" if np.isnan(v) else repr(float(v))
    return v


def write_csv(path, header_lines, columns, rows):
    """Write (or return, when ``path`` is empty) header comments plus CSV."""
    buf = _io.StringIO()
    for line in header_lines:
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c, "")) for c in columns])
    text = buf.getvalue()
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def _scale(cfg):
    return 1.0 / LN2 if cfg.units == "bits" else 1.0


def _check_failures(n_fail, n_total, cfg):
    if n_total and n_fail / n_total > cfg.failure_threshold:
        raise SolverFailures(f"{n_fail} of {n_total} solver runs failed")


def _map(fn, items, workers):
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


# --------------------------------------------------------------------------
# experiments
# --------------------------------------------------------------------------

def _instances(cfg, P):
    if cfg.channel_file:
        from .io import load_channels
        try:
            chans = load_channels(cfg.channel_file)
        except (OSError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        return [c.with_power((P, P), 1.0) for c in chans]
    return gen_channels(cfg.seed, cfg.count, cfg.var_direct, cfg.var_cross, P)


def _solve(method, inst, alpha, cfg, index=0):
    if method == "proper":
        return proper_point(inst, alpha)
    if method == "separate":
        return improper_pareto_point(inst, alpha, tol=cfg.tol)
    if method == "joint":
        return joint_pareto_point(inst, alpha, L=cfg.L, seed=[cfg.seed, index, 1], tol=cfg.tol)
    if method == "oracle":
        return grid_oracle(inst, alpha, cfg.grid_spec)
    raise ConfigError(f"method {method!r} does not take a rate profile")


def _region_task(args):
    cfg, inst, a1, method = args
    alpha = RateProfile.from_first(a1)
    s = _scale(cfg)
    row = {"alpha1": alpha.alpha1, "alpha2": alpha.alpha2, "method": method}
    try:
        pt = _solve(method, inst, alpha, cfg)
        row.update(R1=pt.rates[0] * s, R2=pt.rates[1] * s, sum=sum(pt.rates) * s,
                   profile_value=pt.R * s, R_sdr=pt.diagnostics.get("R_sdr", np.nan) * s,
                   status="ok")
    except Exception as exc:  # recorded per row, run continues
        log.error("region %s at alpha1=%.4f failed: %s", method, a1, exc)
        row.update(R1=np.nan, R2=np.nan, sum=np.nan, profile_value=np.nan, R_sdr=np.nan,
                   status=f"error: {exc}")
    return row


def run_region(cfg):
    """Pareto-boundary sweep over ``n_alpha`` interior profiles for a literal channel.

    Returns ``(rows, csv_text)``.
    """
    snr = float(cfg.snr_db[0])
    inst = literal_channel(cfg.channel, snr)
    alphas = np.arange(1, cfg.n_alpha + 1) / (cfg.n_alpha + 1)
    methods = [m for m in cfg.methods if m != "tdma"]
    tasks = [(cfg, inst, float(a), m) for a in alphas for m in methods]
    rows = _map(_region_task, tasks, cfg.workers)
    n_fail = sum(r["status"] != "ok" for r in rows)
    text = write_csv(cfg.out, _header(cfg, {"snr_db": snr, "channel": cfg.channel}),
                     SCHEMAS["region"], rows)
    _check_failures(n_fail, len(rows), cfg)
    return rows, text


def _ratio_task(args):
    cfg, i, inst = args
    s = _scale(cfg)
    try:
        o = grid_oracle(inst, (0.5, 0.5), cfg.grid_spec)
        j = joint_pareto_point(inst, (0.5, 0.5), L=cfg.L, seed=[cfg.seed, i, 1], tol=cfg.tol)
        ratio = o.R / j.R if j.R > 0 else np.nan
        return {"index": i, "oracle_R": o.R * s, "joint_R": j.R * s,
                "R_sdr": j.diagnostics["R_sdr"] * s, "ratio": ratio, "status": "ok"}
    except Exception as exc:
        log.error("ratio channel %d failed: %s", i, exc)
        return {"index": i, "oracle_R": np.nan, "joint_R": np.nan, "R_sdr": np.nan,
                "ratio": np.nan, "status": f"error: {exc}"}


def run_ratio(cfg):
    """Oracle-to-SDR ratio on a random ensemble at ``alpha = (1/2, 1/2)``.

    Returns ``(rows, summary, csv_text)``; failed channels are kept as
    rows with an error status and excluded from the summary.
    """
    snr = float(cfg.snr_db[0])
    insts = _instances(cfg, snr_to_power(snr))
    rows = _map(_ratio_task, [(cfg, i, inst) for i, inst in enumerate(insts)], cfg.workers)
    ok = np.array([r["ratio"] for r in rows if r["status"] == "ok" and np.isfinite(r["ratio"])])
    n_fail = len(rows) - ok.size
    summary = {"count": len(rows), "ok": int(ok.size), "failed": int(n_fail)}
    if ok.size:
        summary.update(mean=float(ok.mean()), min=float(ok.min()), max=float(ok.max()),
                       p05=float(np.percentile(ok, 5)), p50=float(np.percentile(ok, 50)),
                       p95=float(np.percentile(ok, 95)))
    text = write_csv(cfg.out, _header(cfg, {"snr_db": snr, "summary": summary}),
                     SCHEMAS["ratio"], rows)
    _check_failures(n_fail, len(rows), cfg)
    return rows, summary, text


def _maxmin_task(args):
    cfg, snr, i, inst, method = args
    try:
        if method == "tdma":
            v = tdma_maxmin(inst)
        elif method == "oracle":
            v = min(maxmin_point(inst, "oracle", spec=cfg.grid_spec).rates)
        elif method == "joint":
            v = min(maxmin_point(inst, "joint", L=cfg.L, seed=[cfg.seed, i, 1], tol=cfg.tol).rates)
        elif method == "separate":
            v = min(maxmin_point(inst, "separate", tol=cfg.tol).rates)
        else:
            v = min(maxmin_point(inst, "proper").rates)
        return {"snr_db": snr, "index": i, "method": method, "minrate": v * _scale(cfg), "status": "ok"}
    except Exception as exc:
        log.error("maxmin %s channel %d at %.1f dB failed: %s", method, i, snr, exc)
        return {"snr_db": snr, "index": i, "method": method, "minrate": np.nan, "status": f"error: {exc}"}


def run_maxmin(cfg, detail_path=""):
    """Average max-min rate per SNR and method on a random ensemble.

    Returns ``(summary_rows, detail_rows, csv_text)``.
    """
    tasks = []
    for snr in cfg.snr_db:
        insts = _instances(cfg, snr_to_power(snr))
        for i, inst in enumerate(insts):
            for m in cfg.methods:
                tasks.append((cfg, float(snr), i, inst, m))
    detail = _map(_maxmin_task, tasks, cfg.workers)
    summary = []
    for snr in cfg.snr_db:
        for m in cfg.methods:
            vals = [d["minrate"] for d in detail
                    if d["snr_db"] == float(snr) and d["method"] == m and d["status"] == "ok"]
            n_all = sum(1 for d in detail if d["snr_db"] == float(snr) and d["method"] == m)
            summary.append({"snr_db": float(snr), "method": m,
                            "mean_minrate": float(np.mean(vals)) if vals else np.nan,
                            "n_ok": len(vals), "n_failed": n_all - len(vals)})
    hdr = _header(cfg)
    text = write_csv(cfg.out, hdr, SCHEMAS["maxmin"], summary)
    if detail_path:
        write_csv(detail_path, hdr, SCHEMAS["maxmin-detail"], detail)
    n_fail = sum(d["status"] != "ok" for d in detail)
    _check_failures(n_fail, len(detail), cfg)
    return summary, detail, text


def _strategy_report(inst, pt, units):
    s = 1.0 / LN2 if units == "bits" else 1.0
    users = []
    for st in pt.strategies:
        Q = complex_to_real(st)
        users.append({"C": st.C, "Ct": {"re": st.Ct.real, "im": st.Ct.imag},
                      "Ct_abs": abs(st.Ct), "Ct_arg": float(np.angle(st.Ct)),
                      "Q": Q.tolist()})
    rates = rate_pair(inst, pt.strategies)
    return {"rates": [r * s for r in rates], "sum": sum(rates) * s,
            "improvement_pct": (sum(rates) * s / WMMSE_SUM_BITS - 1) * 100 if units == "bits" else None,
            "users": users}


def run_table_case(cfg):
    """Separate and joint points on the literal table channel (``P = 10``, ``sigma2 = 1``)."""
    inst = literal_channel("table", 10.0)
    alpha = RateProfile(*TABLE_PROFILE)
    report = {"version": __version__, "config": asdict(cfg), "units": cfg.units,
              "channel": "table", "alpha": list(TABLE_PROFILE), "wmmse_sum_bits": WMMSE_SUM_BITS}
    sep = improper_pareto_point(inst, alpha, tol=cfg.tol)
    report["separate"] = _strategy_report(inst, sep, cfg.units)
    report["separate"]["proper_value"] = sep.diagnostics["r_star"] * _scale(cfg)
    if "joint" in cfg.methods:
        jt = joint_pareto_point(inst, alpha, L=cfg.L, seed=[cfg.seed, 0, 1], tol=cfg.tol)
        report["joint"] = _strategy_report(inst, jt, cfg.units)
        report["joint"]["R_sdr"] = jt.diagnostics["R_sdr"] * _scale(cfg)
        report["checks"] = {"joint_ge_separate_minus_0.01":
                            bool(report["joint"]["sum"] >= report["separate"]["sum"] - 0.01)}
    text = json.dumps(report, indent=1, default=float)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return report, text
