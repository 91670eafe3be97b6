"""Run configuration: INI-style parsing, validation, and round-trip emit.

A run file is flat sections of ``key = value`` pairs::

    [model]
    n_modes = 32
    kappa = 0.0

    [damping]
    variant = k1
    gamma = 1.0
    q = 1.0

    [experiment]
    id = exp_k1_decay

Unknown sections or keys are rejected; every module-level precondition is
re-validated at parse time with the failed invariant named.  Omitted keys
take the documented defaults (length pi, quadrature 8 n_modes, zero source,
zero forcing).
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfigurationError
from .integrate import IntegratorConfig
from .laws import (
    DoublePower,
    Forcing,
    K1Monomial,
    K2Constant,
    K2ExpDecay,
    K2Rational,
    K3Rational,
    K3ShiftedExp,
    ZeroSource,
)
from .spectral import build_model

__all__ = ["RunConfig", "parse_config", "emit_config"]

DAMPING_VARIANTS = (
    "k1",
    "k2_constant",
    "k2_exp_decay",
    "k2_rational",
    "k3_rational",
    "k3_shifted_exp",
)
SOURCE_VARIANTS = ("zero", "double_power")

# Experiment ids and the extra keys each accepts (with defaults).
EXPERIMENT_OPTIONS = {
    "simulate": {"energy2": 1.0, "decay": 2.0},
    "exp_k1_decay": {
        "energy2": 1.0,
        "decay": 2.0,
        "fit_lo": 0.0,
        "fit_hi": 0.0,
        "slack": 0.02,
        "rate_tol": 0.15,
    },
    "exp_k2_exponential": {
        "energy2": 1.0,
        "decay": 2.0,
        "fit_lo": 0.0,
        "fit_hi": 0.0,
        "r2_min": 0.999,
    },
    "exp_k3_ball": {
        "n_inside": 10,
        "n_outside": 10,
        "outside_lo": 2.0,
        "outside_hi": 8.0,
        "horizon_outside": 1000.0,
        "decay": 2.0,
    },
    "exp_two_trajectory": {"energy2": 1.0, "decay": 2.0, "p_exponent": 2.0},
    "exp_lambda_lipschitz": {
        "lambda0": 0.5,
        "t_probe": 10.0,
        "grid_step": 0.1,
        "energy2": 1.0,
        "decay": 2.0,
    },
    "exp_decomposition": {
        "s": 1.0,
        "probe_modes": "4,8,16,32",
        "probe_eps": 1e-3,
        "energy2": 1.0,
        "decay": 2.0,
    },
    "exp_entropy": {"n_points": 10000},
    "nakao_suite": {"trials": 1000},
    "haraux_suite": {"trials": 100000},
    "stationary": {"n_starts": 20, "start_scale": 1.0, "tol": 1e-8},
}


@dataclass(frozen=True)
class ModelConfig:
    n_modes: int = 16
    length: float = math.pi
    kappa: float = 0.0
    quad_points: int | None = None


@dataclass(frozen=True)
class DampingConfig:
    variant: str = "k1"
    gamma: float = 1.0
    q: float | None = 1.0


@dataclass(frozen=True)
class SourceConfig:
    variant: str = "zero"
    delta: float | None = None
    r: float | None = None
    sigma: float | None = None


@dataclass(frozen=True)
class ForcingConfig:
    lam: float = 0.0
    h: str = "zero"


@dataclass(frozen=True)
class RunConfig:
    model: ModelConfig = ModelConfig()
    damping: DampingConfig = DampingConfig()
    source: SourceConfig = SourceConfig()
    forcing: ForcingConfig = ForcingConfig()
    integrator: IntegratorConfig = IntegratorConfig(dt=1e-3, horizon=10.0)
    experiment_id: str = "simulate"
    options: dict = field(default_factory=dict)
    seed: int = 0
    output_dir: str = "runs"

    def __eq__(self, other):
        if not isinstance(other, RunConfig):
            return NotImplemented
        return (
            self.model == other.model
            and self.damping == other.damping
            and self.source == other.source
            and self.forcing == other.forcing
            and self.integrator == other.integrator
            and self.experiment_id == other.experiment_id
            and self.options == other.options
            and self.seed == other.seed
            and self.output_dir == other.output_dir
        )


def _typed(section, key, raw, kind):
    try:
        if kind is int:
            v = int(raw)
        elif kind is float:
            v = float(raw)
        else:
            v = raw
    except ValueError:
        raise InvalidConfigurationError(
            f"[{section}] {key} = {raw!r}: expected {kind.__name__}"
        ) from None
    return v


def _consume(parser, section, known):
    """Pull a section dict, rejecting unknown keys."""
    if not parser.has_section(section):
        return {}
    got = dict(parser.items(section))
    for key in got:
        if key not in known:
            raise InvalidConfigurationError(
                f"[{section}] unknown key {key!r} (allowed: {sorted(known)})"
            )
    return got


def parse_config(text):
    """Parse and validate a run file; returns a :class:`RunConfig`.

    Syntax errors carry the offending line number; semantic violations name
    the invariant that failed.
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise InvalidConfigurationError(f"config syntax error: {exc}") from None

    known_sections = {
        "model",
        "damping",
        "source",
        "forcing",
        "integrator",
        "experiment",
        "run",
    }
    for sec in parser.sections():
        if sec not in known_sections:
            raise InvalidConfigurationError(
                f"unknown section [{sec}] (allowed: {sorted(known_sections)})"
            )

    m = _consume(parser, "model", {"n_modes", "length", "kappa", "quad_points"})
    n_modes = _typed("model", "n_modes", m.get("n_modes", "16"), int)
    model = ModelConfig(
        n_modes=n_modes,
        length=_typed("model", "length", m.get("length", repr(math.pi)), float),
        kappa=_typed("model", "kappa", m.get("kappa", "0.0"), float),
        quad_points=(
            _typed("model", "quad_points", m["quad_points"], int)
            if "quad_points" in m
            else None
        ),
    )

    d = _consume(parser, "damping", {"variant", "gamma", "q"})
    variant = d.get("variant", "k1")
    if variant not in DAMPING_VARIANTS:
        raise InvalidConfigurationError(
            f"[damping] variant = {variant!r} (allowed: {DAMPING_VARIANTS})"
        )
    q_val = _typed("damping", "q", d["q"], float) if "q" in d else None
    if variant == "k1":
        q_val = 1.0 if q_val is None else q_val
        if q_val < 0.5:
            raise InvalidConfigurationError(
                f"[damping] q = {q_val}: q >= 1/2 required for the monomial law"
            )
    elif q_val is not None:
        raise InvalidConfigurationError("[damping] q only applies to variant k1")
    gamma = _typed("damping", "gamma", d.get("gamma", "1.0"), float)
    if gamma <= 0.0:
        raise InvalidConfigurationError(f"[damping] gamma = {gamma}: gamma > 0 required")
    damping = DampingConfig(variant=variant, gamma=gamma, q=q_val)

    s = _consume(parser, "source", {"variant", "delta", "r", "sigma"})
    s_variant = s.get("variant", "zero")
    if s_variant not in SOURCE_VARIANTS:
        raise InvalidConfigurationError(
            f"[source] variant = {s_variant!r} (allowed: {SOURCE_VARIANTS})"
        )
    if s_variant == "zero":
        if any(k in s for k in ("delta", "r", "sigma")):
            raise InvalidConfigurationError(
                "[source] delta/r/sigma only apply to variant double_power"
            )
        source = SourceConfig()
    else:
        if "delta" not in s or "r" not in s:
            raise InvalidConfigurationError(
                "[source] double_power requires delta and r"
            )
        delta = _typed("source", "delta", s["delta"], float)
        r_val = _typed("source", "r", s["r"], float)
        sig = _typed("source", "sigma", s.get("sigma", "0.0"), float)
        if not 0.0 < r_val < delta:
            raise InvalidConfigurationError(
                f"[source] need 0 < r < delta, got r={r_val}, delta={delta}"
            )
        if sig < 0.0:
            raise InvalidConfigurationError(f"[source] sigma = {sig}: sigma >= 0 required")
        source = SourceConfig(variant="double_power", delta=delta, r=r_val, sigma=sig)

    f = _consume(parser, "forcing", {"lambda", "h"})
    lam = _typed("forcing", "lambda", f.get("lambda", "0.0"), float)
    if not 0.0 <= lam <= 1.0:
        raise InvalidConfigurationError(
            f"[forcing] lambda = {lam}: lambda in [0, 1] required"
        )
    h_spec = f.get("h", "zero").strip()
    _validate_h_spec(h_spec, model.n_modes)
    forcing = ForcingConfig(lam=lam, h=h_spec)

    i = _consume(
        parser, "integrator", {"dt", "scheme", "horizon", "sample_stride", "alpha"}
    )
    try:
        integrator = IntegratorConfig(
            dt=_typed("integrator", "dt", i.get("dt", "1e-3"), float),
            horizon=_typed("integrator", "horizon", i.get("horizon", "10.0"), float),
            scheme=i.get("scheme", "strang"),
            alpha=_typed("integrator", "alpha", i.get("alpha", "1.0"), float),
            sample_stride=_typed(
                "integrator", "sample_stride", i.get("sample_stride", "1"), int
            ),
        )
    except InvalidConfigurationError as exc:
        raise InvalidConfigurationError(f"[integrator] {exc}") from None

    e = dict(parser.items("experiment")) if parser.has_section("experiment") else {}
    exp_id = e.pop("id", "simulate")
    if exp_id not in EXPERIMENT_OPTIONS:
        raise InvalidConfigurationError(
            f"[experiment] id = {exp_id!r} (allowed: {sorted(EXPERIMENT_OPTIONS)})"
        )
    defaults = EXPERIMENT_OPTIONS[exp_id]
    options = {}
    for key, raw in e.items():
        if key not in defaults:
            raise InvalidConfigurationError(
                f"[experiment] unknown key {key!r} for {exp_id} "
                f"(allowed: {sorted(defaults)})"
            )
        options[key] = _typed("experiment", key, raw, type(defaults[key]))
    for key, val in defaults.items():
        options.setdefault(key, val)

    r = _consume(parser, "run", {"seed", "output_dir"})
    seed = _typed("run", "seed", r.get("seed", "0"), int)
    if not 0 <= seed < 2**64:
        raise InvalidConfigurationError(f"[run] seed = {seed}: 64-bit value required")
    output_dir = r.get("output_dir", "runs")

    # Model-level invariants are re-checked by actually building the model.
    build_model(model.n_modes, model.length, model.kappa, model.quad_points)

    return RunConfig(
        model=model,
        damping=damping,
        source=source,
        forcing=forcing,
        integrator=integrator,
        experiment_id=exp_id,
        options=options,
        seed=seed,
        output_dir=output_dir,
    )


def _validate_h_spec(spec, n_modes):
    if spec == "zero":
        return
    if spec.startswith("mode:"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise InvalidConfigurationError(
                f"[forcing] h = {spec!r}: expected mode:<j>:<amplitude>"
            )
        try:
            j = int(parts[1])
            float(parts[2])
        except ValueError:
            raise InvalidConfigurationError(
                f"[forcing] h = {spec!r}: expected mode:<j>:<amplitude>"
            ) from None
        if not 1 <= j <= n_modes:
            raise InvalidConfigurationError(
                f"[forcing] h mode {j} outside 1..{n_modes}"
            )
        return
    try:
        vals = [float(x) for x in spec.split(",")]
    except ValueError:
        raise InvalidConfigurationError(
            f"[forcing] h = {spec!r}: expected 'zero', 'mode:j:amp', or a comma list"
        ) from None
    if len(vals) != n_modes:
        raise InvalidConfigurationError(
            f"[forcing] h list has {len(vals)} entries, model has {n_modes} modes"
        )


def build_objects(cfg):
    """Instantiate (model, damping, source, forcing) from a RunConfig."""
    mc = cfg.model
    model = build_model(mc.n_modes, mc.length, mc.kappa, mc.quad_points)

    dc = cfg.damping
    if dc.variant == "k1":
        damping = K1Monomial(dc.gamma, dc.q)
    elif dc.variant == "k2_constant":
        damping = K2Constant(dc.gamma)
    elif dc.variant == "k2_exp_decay":
        damping = K2ExpDecay(dc.gamma)
    elif dc.variant == "k2_rational":
        damping = K2Rational(dc.gamma)
    elif dc.variant == "k3_rational":
        damping = K3Rational(dc.gamma)
    else:
        damping = K3ShiftedExp(dc.gamma)

    sc = cfg.source
    if sc.variant == "zero":
        source = ZeroSource()
    else:
        source = DoublePower(delta=sc.delta, r=sc.r, sigma_c=sc.sigma)

    forcing = _build_forcing(cfg.forcing, model.n_modes)
    return model, damping, source, forcing


def _build_forcing(fc, n_modes):
    if fc.h == "zero":
        return Forcing(fc.lam, np.zeros(n_modes))
    if fc.h.startswith("mode:"):
        _, j, amp = fc.h.split(":")
        return Forcing.single_mode(n_modes, int(j), float(amp), fc.lam)
    vals = np.array([float(x) for x in fc.h.split(",")])
    return Forcing(fc.lam, vals)


def emit_config(cfg):
    """Serialize a RunConfig back to run-file text; parse(emit(c)) == c."""
    parser = configparser.ConfigParser(interpolation=None)
    parser["model"] = {
        "n_modes": str(cfg.model.n_modes),
        "length": repr(cfg.model.length),
        "kappa": repr(cfg.model.kappa),
    }
    if cfg.model.quad_points is not None:
        parser["model"]["quad_points"] = str(cfg.model.quad_points)
    parser["damping"] = {
        "variant": cfg.damping.variant,
        "gamma": repr(cfg.damping.gamma),
    }
    if cfg.damping.q is not None:
        parser["damping"]["q"] = repr(cfg.damping.q)
    parser["source"] = {"variant": cfg.source.variant}
    if cfg.source.variant == "double_power":
        parser["source"]["delta"] = repr(cfg.source.delta)
        parser["source"]["r"] = repr(cfg.source.r)
        parser["source"]["sigma"] = repr(cfg.source.sigma)
    parser["forcing"] = {"lambda": repr(cfg.forcing.lam), "h": cfg.forcing.h}
    parser["integrator"] = {
        "dt": repr(cfg.integrator.dt),
        "horizon": repr(cfg.integrator.horizon),
        "scheme": cfg.integrator.scheme,
        "alpha": repr(cfg.integrator.alpha),
        "sample_stride": str(cfg.integrator.sample_stride),
    }
    parser["experiment"] = {"id": cfg.experiment_id}
    for key in sorted(cfg.options):
        val = cfg.options[key]
        parser["experiment"][key] = repr(val) if isinstance(val, float) else str(val)
    parser["run"] = {"seed": str(cfg.seed), "output_dir": cfg.output_dir}
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()
