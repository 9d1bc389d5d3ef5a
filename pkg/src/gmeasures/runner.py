"""Dispatch of one experiment config to the library and result emission.

``result.json`` and the CSV payloads depend only on the config.  Wall-clock
timings and the package version go to ``diagnostics.json``.
"""

from __future__ import annotations

import copy
import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import criteria as C
from . import measure as M
from . import montecarlo as MC
from . import treebuilder as TB
from .config import ExperimentConfig, parse_config
from .core import coerce_past
from .errors import GMeasureError, NotApplicable, ResourceCapError, ValidationError
from .models import model_from_descriptor
from .models.spinflip import SpinFlipFactor, spin_flip_image, sturmian_spins

SCHEMA = "gmeasures.result/v1"


@dataclass
class ResultBundle:
    schema: str
    config: dict
    result: dict
    tables: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"schema": self.schema, "config": self.config, "result": self.result,
                "tables": sorted(self.tables)}

    def result_json(self) -> str:
        return json.dumps(_clean(self.to_dict()), sort_keys=True, indent=2) + "\n"

    def write(self, out_dir) -> list:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = [out / "result.json"]
        written[0].write_text(self.result_json())
        for name, text in sorted(self.tables.items()):
            path = out / name
            path.write_text(text)
            written.append(path)
        diag = out / "diagnostics.json"
        diag.write_text(json.dumps(_clean(self.diagnostics), sort_keys=True, indent=2) + "\n")
        written.append(diag)
        return [str(p) for p in written]


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _csv(header, rows) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for row in rows:
        wr.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


# -- operations -------------------------------------------------------------------

def _model(cfg: ExperimentConfig):
    model = model_from_descriptor(cfg.model)
    model.enumeration_cap = max(model.enumeration_cap, cfg.caps.enumeration_depth)
    return model


def _past(cfg: ExperimentConfig, model, text: str | None = None):
    return coerce_past(cfg.past if text is None else text, model.alphabet)


def _op_criteria(cfg, p):
    model = _model(cfg)
    checks = p.checks or ["growth", "pressure", "corollary5", "v_free", "renewal_V", "sr_sandwich"]
    reports, tables = [], {}
    for name in checks:
        try:
            if name == "growth":
                rep = C.growth_report(model, p.N)
            elif name == "pressure":
                rep = C.pressure_report(model, p.N)
            elif name == "corollary5":
                rep = C.corollary5_check(model, p.N)
            elif name == "v_free":
                v = model.alphabet.parse_word(p.v) if p.v else (model.alphabet.size - 1,) * 2
                rep = C.v_free_check(model, v, min(p.N, len(v) + 4))
            elif name == "renewal_V":
                rep = C.v_of_q_report(model)
            else:
                rep = C.sr_sandwich(model)
        except NotApplicable as exc:
            reports.append({"criterion": name, "verdict": "not-applicable", "reason": str(exc)})
            continue
        except ResourceCapError as exc:
            reports.append({"criterion": name, "verdict": C.INCONCLUSIVE, "reason": str(exc)})
            continue
        d = rep.to_dict()
        d.pop("series")
        reports.append(d)
        if rep.series:
            tables[f"criteria_{name}.csv"] = rep.series_csv()
    return {"model": model.descriptor(), "reports": reports}, tables


def _op_sample(cfg, p):
    model = _model(cfg)
    traj = MC.sample(model, _past(cfg, model), p.T, cfg.seed, p.stream)
    glyphs = model.alphabet.glyphs
    table = _csv(["t", "symbol"], ((t, glyphs[a]) for t, a in enumerate(traj.symbols)))
    freq = {g: float(np.mean(traj.symbols == i)) if p.T else None for i, g in enumerate(glyphs)}
    return {"T": p.T, "stream": p.stream, "frequencies": freq}, {"trajectory.csv": table}


def _op_marginal(cfg, p):
    model = _model(cfg)
    past = _past(cfg, model)
    w = model.alphabet.parse_word(p.word)
    if p.method == "exact":
        vals = M.marginal_series(model, past, p.I, w, cfg.caps.max_exact_states)
        table = _csv(["i", "value"], zip(range(p.I + 1), vals))
        summary = {"last": float(vals[-1])}
    else:
        if len(w) != 1:
            raise ValidationError("Monte Carlo marginals are implemented for single symbols")
        est = MC.empirical_marginal_series(model, past, p.I, p.reps, cfg.seed, w[0])
        table = _csv(["i", "value", "half_width"], zip(range(p.I + 1), est.values, est.half_width))
        summary = {"last": float(est.values[-1]), "reps": p.reps}
    return {"word": p.word, "method": p.method, "I": p.I, **summary}, {"marginals.csv": table}


def _op_couple(cfg, p):
    upper = _model(cfg)
    lower = model_from_descriptor(p.lower_model)
    pu, pl = _past(cfg, upper), _past(cfg, lower, p.lower_past)
    runs, first = [], None
    for s in range(cfg.seed, cfg.seed + p.seeds):
        c = MC.ordered_coupling(upper, lower, pu, pl, p.T, s)
        first = first or c
        ref_u = MC.sample(upper, pu, p.T, s, stream=1).symbols
        ref_l = MC.sample(lower, pl, p.T, s, stream=1).symbols
        pv = (MC.chi_square_same_law(c.upper, ref_u), MC.chi_square_same_law(c.lower, ref_l))
        runs.append({"seed": s, "dominated": c.dominated, "steps": c.checked_steps,
                     "chi2_p_upper": pv[0], "chi2_p_lower": pv[1]})
    table = _csv(["t", "upper", "lower"], zip(range(p.T), first.upper, first.lower))
    return {"runs": runs, "all_dominated": all(r["dominated"] for r in runs)}, {"coupling.csv": table}


def _op_beta(cfg, p):
    model = _model(cfg)
    past = _past(cfg, model)
    rows = []
    for n in p.gaps:
        est = MC.beta_window_estimate(model, past, n, p.w, p.burn, p.reps, cfg.seed, p.exact,
                                      cfg.caps.max_exact_states)
        rows.append(est.to_dict())
    table = _csv(["n", "estimate", "half_width"], ((r["n"], r["estimate"], r["half_width"]) for r in rows))
    return {"estimates": rows}, {"beta.csv": table}


def _op_overflow(cfg, p):
    model = _model(cfg)
    res = MC.overflow_count(model, _past(cfg, model), p.T, cfg.seed)
    table = _csv(["n", "overflow"], ((n + 1, int(v)) for n, v in enumerate(res.indicators)))
    return {"T": p.T, "count": res.count}, {"overflow.csv": table}


def _op_tree(cfg, p):
    f = TB.GrowthRule.from_descriptor(p.f) if p.f else None
    if p.construction == "tree2":
        if p.breakpoints is None and f is None:
            bt = TB.figure2_tree()
        else:
            bt = TB.build_tree2(p.N, f, p.breakpoints, p.adjust)
    elif p.breakpoints is not None:
        bt = TB.BuiltTree("tree1", tuple(p.breakpoints), f, p.adjust)
    elif f is None:
        raise ValidationError("tree1 needs breakpoints or a growth rule")
    else:
        bt = TB.build_tree1(f, p.N, p.adjust)
    check = TB.growth_crosscheck(bt, p.N)
    tables = {"d_table.csv": _csv(["n", "d"], zip(check.n, check.closed_form))}
    if p.words:
        rows = [(n, "".join(str(a) for a in w)) for n in range(min(p.N, 12) + 1) for w in bt.prefixes(n)]
        tables["words.csv"] = _csv(["n", "word"], rows)
    return {"tree": bt.descriptor(), "crosscheck": check.verdict, "d": check.closed_form}, tables


def _op_cesaro(cfg, p):
    model = _model(cfg)
    past = _past(cfg, model)
    if p.method == "exact":
        table = M.cesaro_table(model, past, p.k, p.n, cfg.caps.max_exact_states)
    else:
        table = M.cesaro_table_mc(model, past, p.k, p.n, p.reps, cfg.seed)
    out = {"k": p.k, "n": p.n, "method": p.method, "total": table.total()}
    if p.method == "exact" and model.inf_g() > 0:
        out["sandwich"] = M.sandwich_check(model, table).to_dict()
    return out, {"cesaro.csv": table.to_csv()}


def _op_summability(cfg, p):
    rows = []
    for a in p.alphas:
        for d in p.deltas:
            r = C.summability_classifier(a, d, p.c1, p.I)
            rows.append(r.to_dict())
    table = _csv(["alpha", "delta", "summable", "decay_exponent", "trend_agrees", "partial_sum_I"],
                 ((r["alpha"], r["delta"], r["summable"], r["decay_exponent"], r["trend_agrees"],
                   r["partial_sums"][-1]) for r in rows))
    return {"grid": rows}, {"summability.csv": table}


def _op_spinflip(cfg, p):
    model = model_from_descriptor(cfg.model) if cfg.model else SpinFlipFactor(0.3)
    if not isinstance(model, SpinFlipFactor):
        raise ValidationError("spinflip-conditional needs a spinflip model")
    x = sturmian_spins(p.density, p.window + 1)
    y = spin_flip_image(x)
    ratio = model.factor_conditional(y, 1)
    closed = model.conditional_closed_form(y)
    return {"eps": model.eps, "density": p.density, "window": p.window,
            "preimage": model.alphabet.format_word(x), "image": model.alphabet.format_word(y),
            "conditional_plus": ratio, "closed_form": closed}, {}


OPS = {
    "criteria": _op_criteria,
    "sample": _op_sample,
    "marginal-series": _op_marginal,
    "couple": _op_couple,
    "beta": _op_beta,
    "overflow": _op_overflow,
    "appendix-tree": _op_tree,
    "cesaro": _op_cesaro,
    "summability": _op_summability,
    "spinflip-conditional": _op_spinflip,
}


def run(config) -> ResultBundle:
    """Validate ``config`` (dict or ExperimentConfig) and execute it."""
    cfg = config if isinstance(config, ExperimentConfig) else parse_config(config)
    params = cfg.typed_params()
    t0 = time.perf_counter()
    result, tables = OPS[cfg.operation](cfg, params)
    elapsed = time.perf_counter() - t0
    from . import __version__
    diag = {"wall_seconds": elapsed, "started_unix": time.time() - elapsed, "version": __version__,
            "caps": cfg.caps.model_dump()}
    return ResultBundle(SCHEMA, cfg.model_dump(mode="json"), _clean(result), tables, diag)


# -- presets -----------------------------------------------------------------------

PRESETS = {
    "renewal-case1": {
        "tag": "renewal/finite-mean",
        "description": "constant q = 0.4: exact marginals equal 1/m(q) = 0.4 from a past ending in 1",
        "config": {"operation": "marginal-series", "past": "(0)1", "params": {"I": 50},
                   "model": {"family": "renewal", "q": {"kind": "constant", "value": 0.4}, "q_inf": 0.4}},
    },
    "renewal-case2": {
        "tag": "renewal/infinite-mean-continuous",
        "description": "harmonic q with q_inf = 0: V(q) diverges, the all-zero Dirac mass is stationary",
        "config": {"operation": "criteria", "params": {"checks": ["renewal_V", "sr_sandwich", "pressure"], "N": 12},
                   "model": {"family": "renewal", "q": {"kind": "harmonic", "scale": 1.0}, "q_inf": 0.0}},
    },
    "renewal-case3": {
        "tag": "renewal/infinite-mean-discontinuous",
        "description": "harmonic q with q_inf = 0.5: exact marginals decay along the shifts",
        "config": {"operation": "marginal-series", "past": "(0)1", "params": {"I": 2000},
                   "model": {"family": "renewal", "q": {"kind": "harmonic", "scale": 1.0}, "q_inf": 0.5}},
    },
    "trunk-corollary5": {
        "tag": "examples/trunk-tree",
        "description": "trunk tree: |tau^n| <= n against the growth threshold 1/(1 - eps)",
        "config": {"operation": "criteria", "params": {"checks": ["growth", "corollary5", "v_free"], "N": 64},
                   "caps": {"enumeration_depth": 64},
                   "model": {"family": "trunk", "eps": 0.2}},
    },
    "berger-density": {
        "tag": "examples/berger",
        "description": "density-switching chain: a density-1 past produces 1-frequency 0.3",
        "config": {"operation": "sample", "past": "(1)", "params": {"T": 100000},
                   "model": {"family": "berger", "p_high": 0.7, "p_low": 0.3, "threshold": 0.5}},
    },
    "spinflip-claim": {
        "tag": "examples/spin-flip",
        "description": "spin-flip factor: conditional probability near 1 - eps after a generic past",
        "config": {"operation": "spinflip-conditional", "params": {"density": 0.3, "window": 50},
                   "model": {"family": "spinflip", "eps": 0.3}},
    },
    "appendix-figure2": {
        "tag": "trees/countable-construction",
        "description": "countable construction with n = (0, 2, 4, 7): d(0..7) = 1, 2, 4, 6, 10, 14, 22, 38",
        "config": {"operation": "appendix-tree",
                   "params": {"construction": "tree2", "breakpoints": [0, 2, 4, 7], "N": 12, "words": True}},
    },
    "generalized-renewal-grid": {
        "tag": "examples/generalized-renewal",
        "description": "summability verdict delta + 1 < alpha on the alpha x delta grid",
        "config": {"operation": "summability", "params": {}},
    },
}


def list_experiments() -> list:
    return [{"name": k, "tag": v["tag"], "operation": v["config"]["operation"],
             "description": v["description"]} for k, v in PRESETS.items()]


def preset_config(name: str) -> dict:
    if name not in PRESETS:
        raise ValidationError(f"unknown preset {name!r}; known: {sorted(PRESETS)}")
    cfg = copy.deepcopy(PRESETS[name]["config"])
    cfg["tag"] = PRESETS[name]["tag"]
    return cfg


__all__ = ["GMeasureError", "PRESETS", "ResultBundle", "SCHEMA", "list_experiments", "preset_config", "run"]
