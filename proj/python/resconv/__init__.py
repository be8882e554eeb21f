"""Block-sparse ReLU networks compiled into residual CNNs."""

import json

from ._core import (
    Cnn,
    Compiled,
    DomainError,
    Fnn,
    NumericError,
    SchemaError,
    ShapeError,
    barron_fnn,
    compile,
    function_names,
    holder_cnn,
    lambda1,
    lambda2,
    mult_network_eval,
    random_fnn,
    rate_balance,
)
from . import _core


def complexity(arch_json, eps):
    return json.loads(_core.complexity(arch_json, eps))


def lipschitz_check(net, eps, trials=50, probes=200, seed=0):
    return json.loads(_core.lipschitz_check(net, eps, trials, probes, seed))


def approx_rate(kind, fn, D, beta, Ms, grid=101):
    return json.loads(_core.approx_rate(kind, fn, D, beta, list(Ms), grid))


__all__ = [
    "Cnn",
    "Compiled",
    "DomainError",
    "Fnn",
    "NumericError",
    "SchemaError",
    "ShapeError",
    "approx_rate",
    "barron_fnn",
    "compile",
    "complexity",
    "function_names",
    "holder_cnn",
    "lambda1",
    "lambda2",
    "lipschitz_check",
    "mult_network_eval",
    "random_fnn",
    "rate_balance",
]
