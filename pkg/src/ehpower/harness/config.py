"""Experiment configuration: JSON documents with a ``schema_version`` field."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

from ..controller import GradientBaseline, GreedyBaseline, LearningController
from ..core import ParameterError, derive_algorithm_params, derive_params
from ..environment import (ConstantEnergy, Environment, MarkovChannel, TableEnergy,
                           TruncatedRayleighChannel, UniformEnergy)

SCHEMA_VERSION = 1
CONTROLLER_KINDS = ("alg1", "baseline1", "baseline2")


class ConfigError(ParameterError):
    pass


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def _num(v) -> float:
    """JSON number, or a fraction string such as ``"14/15"``."""
    return float(Fraction(v)) if isinstance(v, str) else float(v)


def build_energy(spec: dict):
    kind = spec.get("kind")
    if kind == "uniform":
        return UniformEnergy(float(spec.get("low", 0.0)), float(spec["high"]))
    if kind == "constant":
        return ConstantEnergy(float(spec["value"]))
    if kind == "table":
        return TableEnergy(tuple(spec["values"]), tuple(spec["probs"]))
    raise ConfigError(f"unknown energy kind {kind!r}")


def build_channel(spec: dict):
    kind = spec.get("kind")
    if kind == "iid_truncated_rayleigh":
        return TruncatedRayleighChannel(
            sigma=tuple(float(x) for x in spec["sigma"]),
            low=float(spec.get("low", 0.0)),
            high=float(spec.get("high", 4.0)),
            mode=spec.get("mode", "condition"),
        )
    if kind == "markov_chain":
        return MarkovChannel(
            states=tuple(tuple(_num(v) for v in row) for row in spec["states"]),
            transition=tuple(tuple(_num(v) for v in row) for row in spec["transition"]),
            initial_state=spec.get("initial_state"),
        )
    raise ConfigError(f"unknown channel kind {kind!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description; ``raw`` keeps the source document."""

    raw: dict

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = copy.deepcopy(doc)
        _require(doc.get("schema_version") == SCHEMA_VERSION,
                 f"unsupported schema_version {doc.get('schema_version')!r}")
        for key in ("name", "master_seed", "replications", "horizon", "problem",
                    "environment", "controller", "battery"):
            _require(key in doc, f"config is missing {key!r}")
        _require(int(doc["replications"]) >= 1, "replications must be >= 1")
        _require(int(doc["horizon"]) >= 1, "horizon must be >= 1")
        ctrl = doc["controller"]
        _require(ctrl.get("kind") in CONTROLLER_KINDS,
                 f"controller kind must be one of {CONTROLLER_KINDS}")
        bat = doc["battery"]
        _require(bat.get("mode") in ("theorem3", "fixed"), "battery mode must be theorem3 or fixed")
        if bat["mode"] == "theorem3":
            _require(ctrl["kind"] == "alg1", "theorem3 battery sizing requires the alg1 controller")
        else:
            _require(float(bat["capacity"]) > 0, "battery capacity must be positive")
            init = float(bat.get("initial", 0.0))
            _require(0 <= init <= float(bat["capacity"]), "initial battery level outside [0, capacity]")
        _require(doc.get("scale_down_mode", "issued") in ("issued", "applied"),
                 "scale_down_mode must be 'issued' or 'applied'")
        cfg = cls(doc)
        cfg.environment()  # surface process errors early
        cfg.problem_params()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    # -- accessors ---------------------------------------------------------
    @property
    def name(self) -> str:
        return str(self.raw["name"])

    @property
    def master_seed(self) -> int:
        return int(self.raw["master_seed"])

    @property
    def replications(self) -> int:
        return int(self.raw["replications"])

    @property
    def horizon(self) -> int:
        return int(self.raw["horizon"])

    @property
    def controller_kind(self) -> str:
        return self.raw["controller"]["kind"]

    @property
    def delay(self) -> int:
        return int(self.raw["controller"].get("t0", 1))

    @property
    def v_param(self) -> float:
        return float(self.raw["controller"].get("V", 1.0))

    @property
    def scale_down_mode(self) -> str:
        return self.raw.get("scale_down_mode", "issued")

    @property
    def battery_mode(self) -> str:
        return self.raw["battery"]["mode"]

    @property
    def outputs(self) -> dict:
        return self.raw.get("outputs") or {}

    @property
    def stride(self) -> int:
        s = self.outputs.get("stride")
        if s:
            return int(s)
        return 1 if self.horizon <= 10_000 else 10

    def environment(self) -> Environment:
        env = self.raw["environment"]
        return Environment(build_energy(env["energy"]), build_channel(env["channel"]))

    def problem_params(self):
        env = self.environment()
        prob = self.raw["problem"]
        d = prob.get("d_per_coord")
        support = d if d is not None else env.channel.support_max()
        e_max = float(prob.get("e_max", env.energy.e_max))
        return derive_params(env.n, float(prob["p_max"]), e_max, support)

    def algorithm_params(self):
        return derive_algorithm_params(self.problem_params(), self.v_param, self.delay)

    def battery(self) -> tuple[float, float]:
        """``(capacity, initial level)``."""
        bat = self.raw["battery"]
        if bat["mode"] == "theorem3":
            cap = self.algorithm_params().recommended_capacity
            return cap, cap
        return float(bat["capacity"]), float(bat.get("initial", 0.0))

    def controller(self):
        ctrl = self.raw["controller"]
        pp = self.problem_params()
        if ctrl["kind"] == "alg1":
            return LearningController(pp, self.algorithm_params(), q_feed=self.scale_down_mode)
        if ctrl["kind"] == "baseline1":
            gamma = ctrl.get("gamma")
            return GradientBaseline(pp, float(gamma) if gamma is not None else 1.0 / self.v_param)
        return GreedyBaseline(pp)

    def with_overrides(self, overrides: dict) -> "ExperimentConfig":
        doc = copy.deepcopy(self.raw)
        apply_overrides(doc, overrides)
        return ExperimentConfig.from_dict(doc)


def apply_overrides(doc: dict, overrides: dict) -> dict:
    """Set dotted keys (``"controller.V": 5``) or replace whole sections."""
    for key, value in overrides.items():
        node = doc
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = copy.deepcopy(value)
    return doc


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("ehpower") / "configs" / name))


def load_bundled(name: str) -> dict:
    with open(bundled_path(name)) as fh:
        return json.load(fh)
