"""Experiment configuration: a single YAML document with five sections.

Schema (defaults in parentheses)::

    problem:
      name: least_squares          # stock synthetic instance, OR
      csv: data.csv                # dense CSV, rows = samples, last col = label
      model: logistic_l1           #   (required with csv)
      generator: {model: ..., n: ..., d: ..., noise: 0.0, seed: 0}
      params: {n: ..., d: ..., lam: ..., nu: ..., width: ..., seed: ...}
    schedule:
      family: Constant             # + the family's own knobs (eta1, eta_max, ...)
      horizon: 1000
    optimizer:
      method: SGD                  # or Momentum (needs beta)
      batch_size: 1
      master_seed: 0
      x1: 1.0                      # scalar fill or explicit vector
      beta: null
      oracle: minibatch            # minibatch | additive | full
      sigma2: 0.0                  # additive-oracle variance
      override_cap: false
    noise:                         # envelope assumed by audits and bounds
      mode: fixed                  # fixed | estimate (fit from minibatch probes)
      rho: 0.0
      sigma2: 0.0                  #   (fixed mode; additive oracle uses optimizer.sigma2)
      probes: 32                   #   (estimate mode)
      reps: 200
    bound:
      formula: auto                # auto | theorem1 | theorem5 | appendixD | momentum
    certify:
      shells: 40
      samples: 256
      rng_seed: 0
      theta1: null                 # certificate overrides for what-if checks
      theta2: null
    seeds: [0, 1]                  # seed indices, or {count: N} for 0..N-1
    outputs: out
    checks: [no_divergence, bound] # subset of no_divergence|bound|proxy|lyapunov

Parsing normalizes the document (fills defaults, coerces scalars), so
``parse(serialize(parse(text)))`` is the identity on the normalized form.
"""

from __future__ import annotations

import copy
import os
from dataclasses import dataclass

import yaml

__all__ = ["ConfigError", "ExperimentConfig", "CHECK_NAMES", "BOUND_FORMULAS"]

CHECK_NAMES = ("no_divergence", "bound", "proxy", "lyapunov")
BOUND_FORMULAS = ("auto", "theorem1", "theorem5", "appendixD", "momentum")
PROBLEM_NAMES = (
    "least_squares",
    "phase_retrieval",
    "heavy_tail_mle",
    "blake_zisserman",
    "l2_logistic",
    "logistic_l1",
    "two_layer_nn_relu",
    "two_layer_nn_sigmoid",
)
_SCHEDULE_KEYS = (
    "family",
    "horizon",
    "eta1",
    "r_exponent",
    "eta_max",
    "eta_min",
    "nu",
    "alpha",
    "stage_lengths",
    "inner_mode",
    "s_max",
)


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _num(section: dict, key: str, default=None, kind=float):
    v = section.get(key, default)
    if v is None:
        return None
    try:
        return kind(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be numeric, got {v!r}") from None


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """Normalized experiment description; ``data`` is the canonical dict."""

    data: dict

    # -- construction ------------------------------------------------------

    @classmethod
    def from_file(cls, path: str) -> "ExperimentConfig":
        _require(os.path.exists(path), f"config file not found: {path}")
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read(), base_dir=os.path.dirname(os.path.abspath(path)))

    @classmethod
    def from_text(cls, text: str, base_dir: str | None = None) -> "ExperimentConfig":
        try:
            raw = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise ConfigError(f"config is not valid YAML: {e}") from None
        _require(isinstance(raw, dict), "config must be a mapping")
        return cls.from_dict(raw, base_dir=base_dir)

    @classmethod
    def from_dict(cls, raw: dict, base_dir: str | None = None) -> "ExperimentConfig":
        return cls(data=_normalize(copy.deepcopy(raw), base_dir))

    # -- round-trip --------------------------------------------------------

    def to_dict(self) -> dict:
        return copy.deepcopy(self.data)

    def to_text(self) -> str:
        return yaml.safe_dump(self.data, sort_keys=True, default_flow_style=False)

    def with_updates(self, **sections) -> "ExperimentConfig":
        """New config with whole sections replaced (re-validated)."""
        d = self.to_dict()
        d.update(sections)
        return ExperimentConfig.from_dict(d)

    def with_leaf(self, dot_path: str, value) -> "ExperimentConfig":
        """New config with one dotted leaf replaced (re-validated)."""
        d = self.to_dict()
        node = d
        parts = dot_path.split(".")
        for p in parts[:-1]:
            _require(isinstance(node, dict) and p in node, f"no config section {p!r}")
            node = node[p]
        _require(isinstance(node, dict) and parts[-1] in node, f"no config leaf {dot_path!r}")
        node[parts[-1]] = value
        return ExperimentConfig.from_dict(d)

    def numeric_leaf(self, dot_path: str) -> float:
        node = self.data
        for p in dot_path.split("."):
            _require(isinstance(node, dict) and p in node, f"no config leaf {dot_path!r}")
            node = node[p]
        _require(isinstance(node, (int, float)) and not isinstance(node, bool),
                 f"config leaf {dot_path!r} is not numeric")
        return float(node)

    # -- accessors ----------------------------------------------------------

    @property
    def problem(self) -> dict:
        return self.data["problem"]

    @property
    def schedule(self) -> dict:
        return self.data["schedule"]

    @property
    def optimizer(self) -> dict:
        return self.data["optimizer"]

    @property
    def noise(self) -> dict:
        return self.data["noise"]

    @property
    def bound(self) -> dict:
        return self.data["bound"]

    @property
    def certify(self) -> dict:
        return self.data["certify"]

    @property
    def seed_indices(self) -> list[int]:
        return list(self.data["seeds"])

    @property
    def out_dir(self) -> str:
        return self.data["outputs"]

    @property
    def checks(self) -> list[str]:
        return list(self.data["checks"])


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------


def _normalize(raw: dict, base_dir: str | None) -> dict:
    for key in raw:
        _require(
            key in ("problem", "schedule", "optimizer", "noise", "bound",
                    "certify", "seeds", "outputs", "checks"),
            f"unknown config section {key!r}",
        )
    out = {
        "problem": _norm_problem(raw.get("problem"), base_dir),
        "schedule": _norm_schedule(raw.get("schedule")),
        "optimizer": _norm_optimizer(raw.get("optimizer")),
        "noise": _norm_noise(raw.get("noise")),
        "bound": _norm_bound(raw.get("bound")),
        "certify": _norm_certify(raw.get("certify")),
        "seeds": _norm_seeds(raw.get("seeds")),
        "outputs": str(raw.get("outputs", "out")),
        "checks": _norm_checks(raw.get("checks")),
    }
    _require(
        out["optimizer"]["oracle"] == "additive" or out["optimizer"]["sigma2"] == 0.0,
        "optimizer.sigma2 applies to the additive oracle only",
    )
    if out["optimizer"]["method"] != "Momentum":
        _require(
            not any(c in ("lyapunov",) for c in out["checks"]),
            "the lyapunov check needs method Momentum",
        )
    return out


def _norm_problem(sec, base_dir) -> dict:
    _require(isinstance(sec, dict), "config needs a problem section")
    forms = [k for k in ("name", "csv", "generator") if k in sec]
    _require(len(forms) == 1, "problem needs exactly one of name / csv / generator")
    params = sec.get("params", {}) or {}
    _require(isinstance(params, dict), "problem.params must be a mapping")
    out = {"params": {k: params[k] for k in sorted(params)}}
    if "name" in sec:
        _require(sec["name"] in PROBLEM_NAMES, f"unknown problem {sec['name']!r}")
        out["name"] = sec["name"]
    elif "csv" in sec:
        path = str(sec["csv"])
        if base_dir is not None and not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        _require(os.path.exists(path), f"dataset not found: {path}")
        model = sec.get("model")
        _require(model in PROBLEM_NAMES, f"csv form needs model, one of {PROBLEM_NAMES}")
        out["csv"] = path
        out["model"] = model
    else:
        gen = sec["generator"]
        _require(isinstance(gen, dict), "problem.generator must be a mapping")
        model = gen.get("model")
        _require(model in PROBLEM_NAMES, f"generator needs model, one of {PROBLEM_NAMES}")
        out["generator"] = {
            "model": model,
            "n": _num(gen, "n", 40, int),
            "d": _num(gen, "d", 5, int),
            "noise": _num(gen, "noise", 0.0),
            "seed": _num(gen, "seed", 0, int),
        }
        _require(out["generator"]["n"] >= 2, "generator.n must be at least 2")
        _require(out["generator"]["d"] >= 1, "generator.d must be at least 1")
        _require(out["generator"]["noise"] >= 0.0, "generator.noise must be >= 0")
    return out


def _norm_schedule(sec) -> dict:
    _require(isinstance(sec, dict), "config needs a schedule section")
    _require("family" in sec, "schedule needs a family")
    _require("horizon" in sec, "schedule needs a horizon")
    out = {}
    for k in sec:
        _require(k in _SCHEDULE_KEYS, f"unknown schedule key {k!r}")
    for k in _SCHEDULE_KEYS:
        if k not in sec or sec[k] is None:
            continue
        if k == "family" or k == "inner_mode":
            out[k] = str(sec[k])
        elif k == "horizon":
            out[k] = _num(sec, k, kind=int)
        elif k == "stage_lengths":
            v = sec[k]
            _require(isinstance(v, (list, tuple)), "stage_lengths must be a list")
            out[k] = [int(x) for x in v]
        else:
            out[k] = _num(sec, k)
    return out


def _norm_optimizer(sec) -> dict:
    _require(isinstance(sec, dict), "config needs an optimizer section")
    method = sec.get("method", "SGD")
    _require(method in ("SGD", "Momentum"), f"unknown method {method!r}")
    x1 = sec.get("x1", 1.0)
    if isinstance(x1, (list, tuple)):
        x1 = [float(v) for v in x1]
    else:
        x1 = _num({"x1": x1}, "x1")
    out = {
        "method": method,
        "batch_size": _num(sec, "batch_size", 1, int),
        "master_seed": _num(sec, "master_seed", 0, int),
        "x1": x1,
        "beta": _num(sec, "beta", None),
        "oracle": str(sec.get("oracle", "minibatch")),
        "sigma2": _num(sec, "sigma2", 0.0),
        "override_cap": bool(sec.get("override_cap", False)),
    }
    _require(out["oracle"] in ("minibatch", "additive", "full"),
             f"unknown oracle {out['oracle']!r}")
    if method == "Momentum":
        _require(out["beta"] is not None and 0.0 < out["beta"] < 1.0,
                 "Momentum needs beta in (0, 1)")
    else:
        _require(out["beta"] is None, "beta applies to Momentum only")
    return out


def _norm_noise(sec) -> dict:
    sec = sec or {}
    _require(isinstance(sec, dict), "noise must be a mapping")
    mode = str(sec.get("mode", "fixed"))
    _require(mode in ("fixed", "estimate"), f"unknown noise mode {mode!r}")
    out = {
        "mode": mode,
        "rho": _num(sec, "rho", 0.0),
        "sigma2": _num(sec, "sigma2", 0.0),
        "probes": _num(sec, "probes", 32, int),
        "reps": _num(sec, "reps", 200, int),
    }
    _require(out["rho"] >= 0.0 and out["sigma2"] >= 0.0, "noise envelope must be >= 0")
    return out


def _norm_bound(sec) -> dict:
    sec = sec or {}
    _require(isinstance(sec, dict), "bound must be a mapping")
    formula = str(sec.get("formula", "auto"))
    _require(formula in BOUND_FORMULAS, f"unknown bound formula {formula!r}")
    slack = _num(sec, "slack", 0.0)
    _require(slack >= 0.0, "bound.slack must be >= 0")
    return {"formula": formula, "slack": slack}


def _norm_certify(sec) -> dict:
    sec = sec or {}
    _require(isinstance(sec, dict), "certify must be a mapping")
    return {
        "shells": _num(sec, "shells", 40, int),
        "samples": _num(sec, "samples", 256, int),
        "rng_seed": _num(sec, "rng_seed", 0, int),
        "theta1": _num(sec, "theta1", None),
        "theta2": _num(sec, "theta2", None),
    }


def _norm_seeds(sec) -> list[int]:
    if sec is None:
        return [0, 1]
    if isinstance(sec, dict):
        count = _num(sec, "count", None, int)
        _require(count is not None and count >= 2, "seeds.count must be >= 2")
        return list(range(count))
    _require(isinstance(sec, (list, tuple)), "seeds must be a list or {count: N}")
    out = [int(v) for v in sec]
    _require(len(out) >= 2, "at least 2 seed indices are required")
    _require(all(v >= 0 for v in out), "seed indices must be >= 0")
    return out


def _norm_checks(sec) -> list[str]:
    if sec is None:
        return ["no_divergence"]
    _require(isinstance(sec, (list, tuple)), "checks must be a list")
    out = [str(c) for c in sec]
    for c in out:
        _require(c in CHECK_NAMES, f"unknown check {c!r}; valid: {CHECK_NAMES}")
    return out
