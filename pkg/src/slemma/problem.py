"""Problem files: JSON with n, p and p+1 function entries.

    {
      "n": 2,
      "p": 1,
      "functions": [
        {"quadratic": {"Q": [4.0, 0.0, 0.0, -2.0], "c": [0.0, 0.0], "d": 0.0}},
        {"expr": "x1 + x2"},
        {"linear": {"a": [1.0, 1.0], "b": 0.0}}
      ],
      "config": {"R": 10.0, "N": 4096, "seed": 1, "tol": 1e-9, "eta": 1e-3}
    }

Entry 0 is f0, the rest are constraints.  Q is row-major with n*n entries;
a linear entry means <a, x> - b.  Parsing is strict: unknown keys are
rejected and all dimensions are checked.  `config` is optional and
overrides the classifier defaults.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import expr as expr_mod
from .errors import DimensionMismatch, SlemmaError
from .farkas import make_linear_system
from .quadratic import QuadraticFunction
from .systems import FunctionSystem

_TOP_KEYS = {"n", "p", "functions", "config"}
_CONFIG_KEYS = {"R", "N", "seed", "tol", "eta"}
_QUAD_KEYS = {"Q", "c", "d"}
_LINEAR_KEYS = {"a", "b"}


class ParseError(SlemmaError):
    """Malformed problem file; the message names the offending field."""


@dataclass
class ProblemFile:
    n: int
    p: int
    entries: list
    config: dict = field(default_factory=dict)
    path: str | None = None

    def system(self):
        """FunctionSystem with linear entries encoded as Q = 0 quadratics."""
        funcs = [_entry_to_function(e, self.n) for e in self.entries]
        return FunctionSystem(n=self.n, f0=funcs[0],
                              constraints=tuple(funcs[1:]))

    @property
    def all_linear(self):
        return all("linear" in e for e in self.entries)

    def linear_data(self):
        if not self.all_linear:
            raise ParseError(
                "this problem mixes entry kinds; the linear alternatives "
                "need every entry to be linear")
        a0 = np.asarray(self.entries[0]["linear"]["a"], dtype=float)
        b0 = float(self.entries[0]["linear"]["b"])
        rows = np.array([e["linear"]["a"] for e in self.entries[1:]],
                        dtype=float).reshape(self.p, self.n)
        offs = np.array([e["linear"]["b"] for e in self.entries[1:]],
                        dtype=float)
        return make_linear_system(a0, b0, rows, offs)


def _require_keys(obj, allowed, required, where):
    unknown = set(obj) - allowed
    if unknown:
        raise ParseError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ParseError(f"{where}: missing keys {sorted(missing)}")


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _vector(value, n, where):
    if not isinstance(value, list) or len(value) != n:
        raise ParseError(f"{where}: expected a list of {n} numbers")
    return np.array([_number(v, where) for v in value])


def _validate_entry(entry, n, index):
    where = f"functions[{index}]"
    if not isinstance(entry, dict) or len(entry) != 1:
        raise ParseError(
            f"{where}: each entry is one of 'quadratic', 'expr', 'linear'")
    kind = next(iter(entry))
    body = entry[kind]
    if kind == "quadratic":
        _require_keys(body, _QUAD_KEYS, _QUAD_KEYS, where)
        _vector(body["Q"], n * n, f"{where}.Q")
        _vector(body["c"], n, f"{where}.c")
        _number(body["d"], f"{where}.d")
    elif kind == "expr":
        if not isinstance(body, str):
            raise ParseError(f"{where}: 'expr' must be a string")
        try:
            expr_mod.parse(body, n)
        except (expr_mod.ExprSyntaxError, expr_mod.UnknownIdentifier,
                expr_mod.IndexOutOfRange) as exc:
            raise ParseError(f"{where}: {exc}") from exc
    elif kind == "linear":
        _require_keys(body, _LINEAR_KEYS, _LINEAR_KEYS, where)
        _vector(body["a"], n, f"{where}.a")
        _number(body["b"], f"{where}.b")
    else:
        raise ParseError(f"{where}: unknown function kind '{kind}'")


def _entry_to_function(entry, n):
    kind = next(iter(entry))
    body = entry[kind]
    if kind == "quadratic":
        Q = np.asarray(body["Q"], dtype=float).reshape(n, n)
        try:
            return QuadraticFunction(Q, np.asarray(body["c"], float),
                                     float(body["d"]))
        except DimensionMismatch as exc:
            raise ParseError(str(exc)) from exc
    if kind == "expr":
        return expr_mod.parse(body, n)
    a = np.asarray(body["a"], dtype=float)
    q = np.zeros((n, n))
    return QuadraticFunction(q, a, -float(body["b"]))


def load_problem(path):
    """Strict load; raises ParseError with the offending field."""
    try:
        with open(path, encoding="utf-8") as handle:
            raw = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: "
                         f"{exc.msg}") from exc
    return parse_problem(raw, path=str(path))


def parse_problem(raw, path=None):
    if not isinstance(raw, dict):
        raise ParseError("top level must be an object")
    _require_keys(raw, _TOP_KEYS, {"n", "p", "functions"}, "top level")
    n = raw["n"]
    p = raw["p"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParseError(f"n must be a positive integer, got {n!r}")
    if not isinstance(p, int) or isinstance(p, bool) or p < 0:
        raise ParseError(f"p must be a nonnegative integer, got {p!r}")
    functions = raw["functions"]
    if not isinstance(functions, list) or len(functions) != p + 1:
        raise ParseError(
            f"functions must list exactly p+1 = {p + 1} entries "
            f"(f0 first, then the constraints)")
    for idx, entry in enumerate(functions):
        _validate_entry(entry, n, idx)
    config = raw.get("config", {})
    if not isinstance(config, dict):
        raise ParseError("config must be an object")
    _require_keys(config, _CONFIG_KEYS, set(), "config")
    if "N" in config and (not isinstance(config["N"], int)
                          or isinstance(config["N"], bool) or config["N"] < 1):
        raise ParseError("config.N must be a positive integer")
    if "seed" in config and (not isinstance(config["seed"], int)
                             or isinstance(config["seed"], bool)):
        raise ParseError("config.seed must be an integer")
    for key in ("R", "tol", "eta"):
        if key in config:
            _number(config[key], f"config.{key}")
    return ProblemFile(n=n, p=p, entries=functions, config=dict(config),
                       path=path)
