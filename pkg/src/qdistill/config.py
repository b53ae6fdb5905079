"""Experiment configuration files.

Configurations are TOML with four tables. Unknown keys anywhere are rejected.

.. code-block:: toml

    [model]
    omega_tau = 0.7853981633974483   # ωτ
    g_tilde = 5.0                    # sqrt(m/ħω) g
    cavity = "coherent"              # or "number1"
    alpha_mod = 1.0                  # coherent only
    gamma = 3.141592653589793        # coherent only

    [state]
    p0 = 0.1
    x0 = 0.0
    dp0 = 0.2
    dx0 = 5.0
    pi0 = 0.7071067811865476

    [sweep]
    n_values = {start = 1, stop = 50, step = 1}   # stop inclusive; or a list
    reference_n = 10                              # optional, used by `peak`
    outputs = ["P_exact", "Pi_exact"]             # optional subset of columns

    [tolerances]                                  # optional
    abs_tol = 1e-12
    rel_tol = 1e-10
"""

import math
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from . import quadrature
from .cavity import Coherent, GaussianParticleState, ModelParams, NumberOne
from .errors import ConfigError, StroboscopicDecoupling

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

COLUMNS = ("N", "P_exact", "Pi_exact", "P_asym", "Pi_asym", "Delta_N", "P_closed", "Pi_closed")

_SECTIONS = {"model", "state", "sweep", "tolerances"}
_STATE_KEYS = ("p0", "x0", "dp0", "dx0", "pi0")


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelParams
    state: GaussianParticleState
    n_values: tuple
    outputs: tuple = COLUMNS
    reference_n: int = 10
    abs_tol: float = quadrature.ABS_TOL
    rel_tol: float = quadrature.REL_TOL


def bundled_config(name):
    """Path of a configuration shipped with the package (``"fig1"``, ``"fig2"``)."""
    return Path(str(resources.files("qdistill") / "configs" / f"{name}.config"))


def _table(doc, name, required=True):
    if name not in doc:
        if required:
            raise ConfigError(name, "missing table")
        return {}
    value = doc[name]
    if not isinstance(value, dict):
        raise ConfigError(name, "must be a table")
    return value


def _reject_unknown(table, prefix, allowed):
    for key in table:
        if key not in allowed:
            raise ConfigError(f"{prefix}.{key}", "unknown key")


def _number(table, prefix, key, default=None):
    if key not in table:
        if default is None:
            raise ConfigError(f"{prefix}.{key}", "missing")
        return default
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{prefix}.{key}", f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{prefix}.{key}", "must be finite")
    return value


def _integer(value, key):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(key, f"expected an integer, got {value!r}")
    return value


def _parse_model(table):
    cavity = table.get("cavity")
    if cavity == "coherent":
        _reject_unknown(table, "model", {"omega_tau", "g_tilde", "cavity", "alpha_mod", "gamma"})
        alpha_mod = _number(table, "model", "alpha_mod")
        if alpha_mod < 0:
            raise ConfigError("model.alpha_mod", "must be >= 0")
        choice = Coherent(alpha_mod, _number(table, "model", "gamma"))
    elif cavity == "number1":
        _reject_unknown(table, "model", {"omega_tau", "g_tilde", "cavity"})
        choice = NumberOne()
    else:
        raise ConfigError("model.cavity", f'expected "coherent" or "number1", got {cavity!r}')
    omega_tau = _number(table, "model", "omega_tau")
    if omega_tau <= 0:
        raise ConfigError("model.omega_tau", "must be positive")
    try:
        return ModelParams(omega_tau, _number(table, "model", "g_tilde"), choice)
    except StroboscopicDecoupling:
        raise
    except ValueError as exc:
        raise ConfigError("model", str(exc)) from None


def _parse_n_values(value):
    key = "sweep.n_values"
    if isinstance(value, list):
        n_values = tuple(_integer(v, key) for v in value)
    elif isinstance(value, dict):
        for k in value:
            if k not in ("start", "stop", "step"):
                raise ConfigError(f"{key}.{k}", "unknown key")
        if "start" not in value or "stop" not in value:
            raise ConfigError(key, "range needs start and stop")
        start = _integer(value["start"], f"{key}.start")
        stop = _integer(value["stop"], f"{key}.stop")
        step = _integer(value.get("step", 1), f"{key}.step")
        if step <= 0:
            raise ConfigError(f"{key}.step", "must be positive")
        n_values = tuple(range(start, stop + 1, step))
    else:
        raise ConfigError(key, "expected a list or a {start, stop, step} table")
    if not n_values:
        raise ConfigError(key, "must be non-empty")
    if n_values[0] < 0:
        raise ConfigError(key, "values must be >= 0")
    if any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise ConfigError(key, "values must be strictly increasing")
    return n_values


def parse_config(doc):
    """Build an :class:`ExperimentConfig` from a parsed TOML document."""
    for key in doc:
        if key not in _SECTIONS:
            raise ConfigError(key, "unknown table")

    model = _parse_model(_table(doc, "model"))

    state_table = _table(doc, "state")
    _reject_unknown(state_table, "state", set(_STATE_KEYS))
    state = GaussianParticleState(*(_number(state_table, "state", k) for k in _STATE_KEYS))

    sweep = _table(doc, "sweep")
    _reject_unknown(sweep, "sweep", {"n_values", "reference_n", "outputs"})
    if "n_values" not in sweep:
        raise ConfigError("sweep.n_values", "missing")
    n_values = _parse_n_values(sweep["n_values"])
    reference_n = _integer(sweep.get("reference_n", 10), "sweep.reference_n")
    if reference_n < 1:
        raise ConfigError("sweep.reference_n", "must be >= 1")
    outputs = sweep.get("outputs", list(COLUMNS))
    if not isinstance(outputs, list) or not outputs:
        raise ConfigError("sweep.outputs", "expected a non-empty list of column names")
    for name in outputs:
        if name not in COLUMNS:
            raise ConfigError("sweep.outputs", f"unknown column {name!r}")
    # column order is fixed regardless of the order requested
    outputs = tuple(c for c in COLUMNS if c in outputs)

    tol = _table(doc, "tolerances", required=False)
    _reject_unknown(tol, "tolerances", {"abs_tol", "rel_tol"})
    abs_tol = _number(tol, "tolerances", "abs_tol", quadrature.ABS_TOL)
    rel_tol = _number(tol, "tolerances", "rel_tol", quadrature.REL_TOL)
    for key, value in (("abs_tol", abs_tol), ("rel_tol", rel_tol)):
        if value <= 0:
            raise ConfigError(f"tolerances.{key}", "must be positive")

    return ExperimentConfig(model, state, n_values, outputs, reference_n, abs_tol, rel_tol)


def loads(text):
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("<file>", f"not valid TOML: {exc}") from None
    return parse_config(doc)


def load_config(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    return loads(text)


def _toml_value(value):
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    return str(value)


def dumps(config):
    """Serialise the effective configuration; ``loads(dumps(c)) == c``."""
    model = config.model
    lines = ["[model]",
             f"omega_tau = {_toml_value(model.omega_tau)}",
             f"g_tilde = {_toml_value(model.g_tilde)}"]
    if isinstance(model.cavity, Coherent):
        lines += ['cavity = "coherent"',
                  f"alpha_mod = {_toml_value(model.cavity.alpha_mod)}",
                  f"gamma = {_toml_value(model.cavity.gamma)}"]
    else:
        lines.append('cavity = "number1"')
    lines += ["", "[state]"]
    lines += [f"{k} = {_toml_value(float(getattr(config.state, k)))}" for k in _STATE_KEYS]
    lines += ["", "[sweep]",
              f"n_values = {_toml_value(list(config.n_values))}",
              f"reference_n = {config.reference_n}",
              f"outputs = {_toml_value(list(config.outputs))}",
              "", "[tolerances]",
              f"abs_tol = {_toml_value(config.abs_tol)}",
              f"rel_tol = {_toml_value(config.rel_tol)}"]
    return "\n".join(lines) + "\n"

