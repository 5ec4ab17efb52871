"""Reference term lists for the published r = 1 systems.

Coefficients are stored as arithmetic expressions in the model parameters
(``"-lambda0"``, ``"eps * gamma0"``) so a fixture stays valid under
parameter overrides.  Expressions are evaluated by a small AST walker that
only admits numbers, parameter names and ``+ - * / **``.
"""
from __future__ import annotations

import ast
import json
import operator
from importlib import resources

from .galerkin import GalerkinSystem, diff_term_lists

GOLDEN_FILES = {
    "duffing_unforced": "duffing_unforced_r1.json",
    "duffing_forced": "duffing_forced_r1.json",
    "duffing_uncertain_ic": "duffing_uncertain_ic_r1.json",
    "twotime_full": "twotime_full_r1.json",
    "twotime_averaged": "twotime_averaged_r1.json",
}

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNOPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}


def safe_eval(expr, params: dict) -> float:
    """Evaluate an arithmetic expression over ``params``; anything else raises ValueError."""
    if isinstance(expr, (int, float)):
        return float(expr)

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id not in params:
                raise ValueError(f"unknown parameter {node.id!r} in {expr!r}")
            return float(params[node.id])
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](walk(node.operand))
        raise ValueError(f"unsupported syntax in {expr!r}")

    try:
        tree = ast.parse(str(expr), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse {expr!r}") from exc
    return walk(tree)


class GoldenMismatch(ValueError):
    """The golden fixture does not apply to the requested system."""


def load_golden(model_name: str) -> dict:
    if model_name not in GOLDEN_FILES:
        raise KeyError(f"no golden term list for {model_name!r}")
    path = resources.files(__package__).joinpath("golden_terms").joinpath(GOLDEN_FILES[model_name])
    text = path.read_text()
    return json.loads(text)


def resolve(doc: dict, params: dict) -> dict:
    """Numeric term document from a fixture and concrete parameter values."""
    return {
        "terms": [
            {
                "target": t["target"],
                "coeff": safe_eval(t["coeff"], params),
                "factors": list(t["factors"]),
                "forcing": t.get("forcing", "none"),
                "omega": safe_eval(t.get("omega", 0), params),
            }
            for t in doc["terms"]
        ]
    }


def check_against_golden(system: GalerkinSystem, model_name: str, params: dict,
                         tol: float = 1e-12) -> list[str]:
    """Term-level diff of ``system`` against its fixture; empty when they agree.

    Raises GoldenMismatch when the fixture was written for a different basis,
    order or fixed parameter value.
    """
    doc = load_golden(model_name)
    if system.order != doc["order"] or system.family.kind != doc["family"]:
        raise GoldenMismatch(f"fixture covers {doc['family']} order {doc['order']}, "
                             f"got {system.family.kind} order {system.order}")
    for key, value in doc.get("fixed", {}).items():
        if params.get(key) != value:
            raise GoldenMismatch(f"fixture assumes {key} = {value}, got {params.get(key)}")
    return diff_term_lists(system.to_dict(), resolve(doc, params), tol)
