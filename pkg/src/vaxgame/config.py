"""Plain-text experiment configuration.

One experiment per file, INI-style section blocks:

    [experiment]
    id = fig1-left-fc
    layers = closed_form, ode, monte_carlo
    theta0 = 0.1
    psi0 = 0.01
    output_dir = out

    [params]
    lambda = 8.549
    r = 1.188
    nu = 0.904
    b = 0.322
    d = 0.1
    d_e = 0

    [policy]
    family = FC
    beta = 0.5

    [costs]          ; optional, needed by the ess layer
    c_v1 = 2.88
    c_v2 = 0.65
    c_v2_bar = 1.91
    c_I1 = 4.32/r    ; recovery-scaled form is accepted
    c_I2 = 0

    [sweep]          ; optional
    variable = beta
    values = 0.5:4.0:0.25      ; start:stop:step, or a comma list

    [mc]             ; optional overrides
    n0 = 40000
    max_steps = 2000000
    replications = 3
    seed = 20260809

Grid syntax: ``a:b:step`` expands to a, a+step, ... up to b inclusive
(within rounding); a comma list is taken verbatim.
"""

from __future__ import annotations

import configparser
from pathlib import Path
from typing import Optional

from .errors import ConfigError
from .ess import CostParams
from .harness import Experiment, Layer, McSettings, OdeSettings, SweepSpec
from .params import ModelParams
from .policy import Family, Policy

_PARAM_KEYS = ("lambda", "r", "nu", "b", "d", "d_e")
_SWEEP_VARIABLES = ("beta", "lambda", "nu", "r", "b", "d", "d_e", "gamma")


def _parse_float(section, key, raw: str) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r} is not a number") from exc


def parse_grid(raw: str) -> list[float]:
    raw = raw.strip()
    if ":" in raw:
        parts = raw.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid {raw!r} must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ConfigError(f"grid {raw!r} must increase")
        values = []
        k = 0
        while True:
            v = start + k * step
            if v > stop + 1e-12 * max(1.0, abs(stop)):
                break
            values.append(v)
            k += 1
        return values
    try:
        return [float(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"could not parse grid {raw!r}") from exc


def _parse_policy(section: dict[str, str]) -> Policy:
    family_raw = section.get("family")
    if family_raw is None:
        raise ConfigError("[policy] family is required")
    try:
        family = Family(family_raw.strip().upper())
    except ValueError as exc:
        raise ConfigError(f"unknown policy family {family_raw!r}") from exc
    beta = _parse_float("policy", "beta", section.get("beta", "0"))
    if family is Family.STATIC:
        return Policy(Family.STATIC, static_q=_parse_float("policy", "q", section.get("q", "0")))
    if family is Family.VFC2:
        if "gamma" not in section:
            raise ConfigError("[policy] VFC2 requires an explicit gamma")
        gamma = _parse_float("policy", "gamma", section["gamma"])
        theta_variant = section.get("theta_variant", "false").strip().lower() in ("1", "true", "yes")
        return Policy(Family.VFC2, beta=beta, gamma=gamma, theta_variant=theta_variant)
    if family is Family.MUTANT:
        base_raw = section.get("base")
        if base_raw is None:
            raise ConfigError("[policy] MUTANT requires base=FC|FR|VFC1|VFC2|STATIC")
        base = _parse_policy(
            {
                "family": base_raw,
                "beta": section.get("beta", "0"),
                "gamma": section.get("gamma", "0"),
                "q": section.get("q", "0"),
            }
        )
        return Policy(
            Family.MUTANT,
            mutant_base=base,
            mutant_p=_parse_float("policy", "p", section.get("p", "0")),
            mutant_eps=_parse_float("policy", "eps", section.get("eps", "0")),
        )
    return Policy(family, beta=beta)


def _parse_costs(section: dict[str, str], params: ModelParams) -> CostParams:
    def cost(key: str, default: Optional[str] = None) -> float:
        raw = section.get(key, default)
        if raw is None:
            raise ConfigError(f"[costs] {key} is required")
        raw = raw.strip()
        if raw.endswith("/r"):  # recovery-scaled cost, e.g. 4.32/r
            return _parse_float("costs", key, raw[:-2]) / params.r
        return _parse_float("costs", key, raw)

    return CostParams(
        c_v1=cost("c_v1"),
        c_v2=cost("c_v2"),
        c_v2_bar=cost("c_v2_bar"),
        c_I1=cost("c_I1"),
        c_I2=cost("c_I2", "0"),
    )


def load_experiment(path) -> Experiment:
    """Parse a config file into an Experiment; raise ConfigError on problems."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str  # keep keys case-sensitive
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc

    if "params" not in parser:
        raise ConfigError("[params] section is required")
    raw_params = dict(parser["params"])
    missing = [k for k in _PARAM_KEYS if k not in raw_params]
    if missing:
        raise ConfigError(f"[params] missing keys: {', '.join(missing)}")
    unknown = [k for k in raw_params if k not in _PARAM_KEYS]
    if unknown:
        raise ConfigError(f"[params] unknown keys: {', '.join(unknown)}")
    params = ModelParams(
        lam=_parse_float("params", "lambda", raw_params["lambda"]),
        r=_parse_float("params", "r", raw_params["r"]),
        nu=_parse_float("params", "nu", raw_params["nu"]),
        b=_parse_float("params", "b", raw_params["b"]),
        d=_parse_float("params", "d", raw_params["d"]),
        d_e=_parse_float("params", "d_e", raw_params["d_e"]),
    )

    if "policy" not in parser:
        raise ConfigError("[policy] section is required")
    policy = _parse_policy(dict(parser["policy"]))

    exp_section = dict(parser["experiment"]) if "experiment" in parser else {}
    exp_id = exp_section.get("id", path.stem)
    layer_raw = exp_section.get("layers", "closed_form")
    layers = set()
    for token in layer_raw.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            layers.add(Layer(token.lower()))
        except ValueError as exc:
            raise ConfigError(f"unknown layer {token!r}") from exc

    costs = None
    if "costs" in parser:
        costs = _parse_costs(dict(parser["costs"]), params)
    if Layer.ESS in layers and costs is None:
        raise ConfigError("the ess layer requires a [costs] section")

    sweep = None
    if "sweep" in parser:
        sw = dict(parser["sweep"])
        variable = sw.get("variable", "").strip()
        if variable not in _SWEEP_VARIABLES:
            raise ConfigError(
                f"sweep variable must be one of {_SWEEP_VARIABLES}, got {variable!r}"
            )
        if "values" not in sw:
            raise ConfigError("[sweep] values is required")
        sweep = SweepSpec(variable=variable, values=tuple(parse_grid(sw["values"])))

    mc = McSettings()
    if "mc" in parser:
        s = dict(parser["mc"])
        mc = McSettings(
            n0=int(s.get("n0", mc.n0)),
            max_steps=int(s["max_steps"]) if "max_steps" in s else None,
            replications=int(s.get("replications", mc.replications)),
            seed=int(s.get("seed", mc.seed)),
            stride=int(s.get("stride", mc.stride)),
            tail_fraction=float(s.get("tail_fraction", mc.tail_fraction)),
        )

    ode = OdeSettings()
    if "ode" in parser:
        s = dict(parser["ode"])
        ode = OdeSettings(
            horizon=float(s.get("horizon", ode.horizon)),
            rtol=float(s.get("rtol", ode.rtol)),
            atol=float(s.get("atol", ode.atol)),
            eta0=float(s.get("eta0", ode.eta0)),
        )

    return Experiment(
        id=exp_id,
        params=params,
        policy=policy,
        costs=costs,
        sweep=sweep,
        layers=frozenset(layers),
        mc=mc,
        ode=ode,
        theta0=float(exp_section.get("theta0", 0.1)),
        psi0=float(exp_section.get("psi0", 0.01)),
        output_dir=Path(exp_section.get("output_dir", "out")),
    )
