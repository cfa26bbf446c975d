"""Scenario files: a flat ``key = value`` text format.

Grammar (UTF-8, one entry per line)::

    # comment
    key = value

Values are plain strings, numbers, comma-separated lists, or catalog
expressions such as ``Product(Sphere(2), Sphere(2))``,
``ConstantAt(0, 0, 1)`` or ``Compose(ForwardKinematics(1, 1), ProjectionFirst)``.
Expressions are parsed with :mod:`ast` and only catalog names, numbers and
``pi`` are accepted; nothing is executed.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path as FsPath
from typing import Optional

import numpy as np

from ..errors import ConfigurationError
from ..manifold import Circle, Euclidean, ManifoldSpec, Product, RealProjective, Sphere, Torus
from ..planner import (
    MapSpec, compose, constant_map, forward_kinematics, identity_map, product_projection,
    projection_first, projection_second, translation_map,
)

RECIPES = ("MorseBott", "CutLocus", "Direct", "Workmap", "Fibration", "CutDetect", "WeakCategory")

KEYS = {
    "name", "description", "recipe", "manifold", "f", "g", "navigation", "level_pieces",
    "submanifold", "pieces_on_N", "pieces_on_cut", "tube_radius", "pieces", "links",
    "fiber", "degrees", "expected", "kmax", "grid_resolution", "hausdorff_tol", "attempt",
    "reference", "seed", "samples", "continuity_samples", "flow_samples", "out",
}

DEFAULT_SAMPLES = 10_000
DEFAULT_CONTINUITY = 500
DEFAULT_FLOW = 1000


@dataclass(frozen=True)
class Expr:
    name: str
    args: tuple = ()

    def __str__(self):
        if not self.args:
            return self.name
        return f"{self.name}(" + ", ".join(str(a) if isinstance(a, Expr) else repr(a) for a in self.args) + ")"


def _eval_node(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return node.value
    if isinstance(node, ast.Name):
        if node.id == "pi":
            return math.pi
        return Expr(node.id)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_node(node.operand)
        if isinstance(v, Expr):
            raise ConfigurationError("sign applied to a non-number")
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div)):
        a, b = _eval_node(node.left), _eval_node(node.right)
        if isinstance(a, Expr) or isinstance(b, Expr):
            raise ConfigurationError("arithmetic on a non-number")
        op = node.op
        if isinstance(op, ast.Add):
            return a + b
        if isinstance(op, ast.Sub):
            return a - b
        if isinstance(op, ast.Mult):
            return a * b
        return a / b
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
        return Expr(node.func.id, tuple(_eval_node(a) for a in node.args))
    if isinstance(node, ast.Tuple):
        return tuple(_eval_node(e) for e in node.elts)
    raise ConfigurationError(f"unsupported expression element {ast.dump(node)[:60]}")


def parse_expr(text: str):
    """Parse a catalog expression, a number, or a comma-separated tuple."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ConfigurationError(f"cannot parse {text!r}: {exc.msg}") from None
    return _eval_node(tree.body)


def parse_list(text: str):
    v = parse_expr(text)
    return list(v) if isinstance(v, tuple) else [v]


def _numbers(args, what):
    if any(isinstance(a, Expr) for a in args):
        raise ConfigurationError(f"{what} expects numbers")
    return [float(a) for a in args]


def build_manifold(e) -> ManifoldSpec:
    if not isinstance(e, Expr):
        raise ConfigurationError(f"expected a manifold expression, got {e!r}")
    name, args = e.name, e.args
    if name == "Circle" and not args:
        return Circle()
    if name in ("Sphere", "Torus", "RealProjective", "Euclidean") and len(args) == 1:
        n = args[0]
        if isinstance(n, Expr) or int(n) != n:
            raise ConfigurationError(f"{name} needs an integer dimension")
        return {"Sphere": Sphere, "Torus": Torus, "RealProjective": RealProjective,
                "Euclidean": Euclidean}[name](int(n))
    if name == "Product" and len(args) >= 2:
        return Product(*[build_manifold(a) for a in args])
    raise ConfigurationError(f"unknown manifold kind {str(e)!r}")


def build_map(e, M: ManifoldSpec) -> MapSpec:
    if not isinstance(e, Expr):
        raise ConfigurationError(f"expected a map expression, got {e!r}")
    name, args = e.name, e.args
    if name == "Identity":
        return identity_map(M)
    if name == "ProjectionFirst":
        return projection_first(M)
    if name == "ProjectionSecond":
        return projection_second(M)
    if name == "ConstantAt":
        return constant_map(M, M, _numbers(args, name))
    if name == "Translation":
        return translation_map(M, _numbers(args, name))
    if name == "ProductProjection" and len(args) == 1:
        return product_projection(M, int(args[0]))
    if name == "ForwardKinematics" and len(args) == 2:
        l1, l2 = _numbers(args, name)
        return forward_kinematics(l1, l2, M)
    if name == "Compose" and len(args) == 2:
        inner = build_map(args[1], M)
        outer = build_map(args[0], inner.target)
        return compose(outer, inner)
    raise ConfigurationError(f"unknown map kind {str(e)!r}")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    recipe: str
    entries: dict
    manifold: Optional[ManifoldSpec] = None
    f: Optional[MapSpec] = None
    g: Optional[MapSpec] = None
    seed: int = 0
    samples: int = DEFAULT_SAMPLES
    continuity_samples: int = DEFAULT_CONTINUITY
    flow_samples: int = DEFAULT_FLOW
    out: Optional[str] = None
    source: str = ""

    def get(self, key, default=None):
        return self.entries.get(key, default)

    def expr(self, key, default=None):
        v = self.entries.get(key)
        return default if v is None else parse_expr(v)

    def number(self, key, default=None):
        v = self.entries.get(key)
        if v is None:
            return default
        x = parse_expr(v)
        if isinstance(x, (Expr, tuple)):
            raise ConfigurationError(f"{key} must be a number")
        return float(x)

    def with_overrides(self, seed=None, samples=None, out=None) -> "ScenarioConfig":
        from dataclasses import replace
        kw = {}
        if seed is not None:
            kw["seed"] = int(seed)
        if samples is not None:
            if samples < 1:
                raise ConfigurationError("--samples must be positive")
            kw["samples"] = int(samples)
        if out is not None:
            kw["out"] = str(out)
        return replace(self, **kw)

    def echo(self) -> dict:
        d = dict(self.entries)
        d["seed"] = str(self.seed)
        d["samples"] = str(self.samples)
        d["continuity_samples"] = str(self.continuity_samples)
        d["flow_samples"] = str(self.flow_samples)
        d.pop("out", None)
        return d


def parse_config_text(text: str, source: str = "<string>") -> ScenarioConfig:
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigurationError(f"{source}:{lineno}: unknown key {key!r}")
        if key in entries:
            raise ConfigurationError(f"{source}:{lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigurationError(f"{source}:{lineno}: empty value for {key!r}")
        entries[key] = value
    for key in ("name", "recipe"):
        if key not in entries:
            raise ConfigurationError(f"{source}: missing required key {key!r}")
    recipe = entries["recipe"]
    if recipe not in RECIPES:
        raise ConfigurationError(f"{source}: unknown recipe {recipe!r}")

    M = build_manifold(parse_expr(entries["manifold"])) if "manifold" in entries else None
    f = g = None
    if "f" in entries or "g" in entries:
        if M is None:
            raise ConfigurationError(f"{source}: maps need a declared manifold")
        if "f" not in entries or "g" not in entries:
            raise ConfigurationError(f"{source}: both f and g are required")
        f = build_map(parse_expr(entries["f"]), M)
        g = build_map(parse_expr(entries["g"]), M)
        if f.source != g.source or f.target != g.target:
            raise ConfigurationError(f"{source}: f and g must share source and target")

    def integer(key, default):
        if key not in entries:
            return default
        v = parse_expr(entries[key])
        if isinstance(v, (Expr, tuple)) or int(v) != v or v < 0:
            raise ConfigurationError(f"{source}: {key} must be a non-negative integer")
        return int(v)

    return ScenarioConfig(
        name=entries["name"], recipe=recipe, entries=entries, manifold=M, f=f, g=g,
        seed=integer("seed", 0), samples=integer("samples", DEFAULT_SAMPLES),
        continuity_samples=integer("continuity_samples", DEFAULT_CONTINUITY),
        flow_samples=integer("flow_samples", DEFAULT_FLOW),
        out=entries.get("out"), source=source,
    )


def bundled_names() -> list[str]:
    root = resources.files("homdist.scenarios") / "configs"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def bundled_text(name: str) -> str:
    root = resources.files("homdist.scenarios") / "configs"
    p = root / f"{name}.cfg"
    if not p.is_file():
        raise ConfigurationError(f"no bundled scenario named {name!r}")
    return p.read_text(encoding="utf-8")


def load_config(ref) -> ScenarioConfig:
    """Load from a file path, or by bundled scenario name."""
    p = FsPath(ref)
    if p.is_file():
        return parse_config_text(p.read_text(encoding="utf-8"), str(p))
    if str(ref) in bundled_names():
        return parse_config_text(bundled_text(str(ref)), f"bundled:{ref}")
    raise ConfigurationError(f"no scenario file or bundled scenario {str(ref)!r}")


def parse_points(text: str, dim: int):
    """``(a, b, c), (d, e, f)`` or a single tuple -> ``(k, dim)`` array."""
    v = parse_expr(text)
    if isinstance(v, tuple) and v and not isinstance(v[0], tuple):
        v = (v,)
    arr = np.array([[float(c) for c in p] for p in v])
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise ConfigurationError(f"expected points with {dim} coordinates")
    return arr
