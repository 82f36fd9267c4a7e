"""
JSON scenario files for the command-line tool.

A scenario has three blocks, all optional except ``arrays``::

    {
      "geometry": {"wavelength": 0.004, "distance": 90.0, "aperture_t": 0.6,
                   "aperture_r": 0.6, "theta_t": 0, "theta_r": 0, "phi_r": 0},
      "arrays": {
        "transmit": {"ula": 24},
        "receive": {"groupwise": {"M": 24, "K": 3, "centers": "fekete",
                                  "delta": 0.0}}
      },
      "analysis": {"gamma_db": -10, "K": 2, "tau": 0.3,
                   "snr_grid_db": [0, 10, 20], "tau_grid": "0.01:4:0.01"}
    }

Array specs are ``{"ula": M}``, ``{"explicit": [alpha, ...]}`` or
``{"groupwise": {...}}`` whose ``centers`` is ``"fekete"``,
``{"pat": theta}`` or a list.  A groupwise block takes either the
normalized ``delta`` or a physical ``spacing`` in metres (which needs the
geometry block).  ``arrays.both`` sets the two sides at once.  Without
``analysis.tau``, ``tau`` is derived from the geometry.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .channel import ula_layout
from .errors import InfeasibleDeploymentError, NulaError, ScenarioError
from .geometry import ArrayLayout, LinkGeometry, compute_tau
from .pat import (GroupwiseDeployment, groupwise_deploy, groupwise_fekete_deploy,
                  normalized_spacing, pat_points)

_GEOMETRY_KEYS = ("wavelength", "distance", "aperture_t", "aperture_r",
                  "theta_t", "theta_r", "phi_r")
_REQUIRED_GEOMETRY = _GEOMETRY_KEYS[:4]


@dataclass
class ArraySpec:
    """A parsed array description with the layout it produces."""

    kind: str
    layout: ArrayLayout
    deployment: Optional[GroupwiseDeployment] = None

    @property
    def size(self) -> int:
        return len(self.layout)


@dataclass
class Scenario:
    geometry: Optional[LinkGeometry]
    transmit: ArraySpec
    receive: ArraySpec
    gamma_db: Optional[float] = None
    K: Optional[int] = None
    tau: Optional[float] = None
    snr_grid_db: list = field(default_factory=list)
    tau_grid: Optional[np.ndarray] = None
    digest: str = ""

    def resolved_tau(self) -> float:
        """``analysis.tau`` if given, otherwise the geometry's ``|tau|``."""
        if self.tau is not None:
            return self.tau
        if self.geometry is None:
            raise ScenarioError("needs either analysis.tau or a geometry block", "analysis.tau")
        return abs(compute_tau(self.geometry))


class _Locator:
    """Maps key paths to approximate line numbers in the source text."""

    def __init__(self, text):
        self.lines = text.splitlines()

    def line(self, path):
        start = 0
        found = None
        for part in path.split("."):
            pat = re.compile(r'"' + re.escape(part) + r'"\s*:')
            for i in range(start, len(self.lines)):
                if pat.search(self.lines[i]):
                    found = start = i
                    break
            else:
                return found + 1 if found is not None else None
        return found + 1 if found is not None else None

    def error(self, path, message):
        return ScenarioError(message, path, self.line(path))


def _number(loc, obj, key, path, default=None, required=False):
    if key not in obj:
        if required:
            raise loc.error(path, "missing required field")
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise loc.error(path + "." + key if path else key, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise loc.error(path + "." + key if path else key, "must be finite")
    return float(value)


def _integer(loc, value, path):
    if isinstance(value, bool) or not isinstance(value, int):
        raise loc.error(path, f"expected an integer, got {value!r}")
    return value


def parse_tau_grid(text: str) -> np.ndarray:
    """``"lo:hi:step"`` to the grid ``lo, lo+step, ..., <= hi``."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"tau grid must look like lo:hi:step, got {text!r}")
    lo, hi, step = (float(p) for p in parts)
    if not (step > 0 and hi >= lo and lo > 0):
        raise ValueError(f"tau grid needs 0 < lo <= hi and step > 0, got {text!r}")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def _geometry(loc, block):
    if not isinstance(block, dict):
        raise loc.error("geometry", "expected an object")
    for key in block:
        if key not in _GEOMETRY_KEYS:
            raise loc.error("geometry." + key, "unknown field")
    values = {k: _number(loc, block, k, "geometry", 0.0, k in _REQUIRED_GEOMETRY)
              for k in _GEOMETRY_KEYS}
    try:
        return LinkGeometry(**values)
    except NulaError as exc:
        raise loc.error("geometry", str(exc)) from None


def _array(loc, spec, path, geometry, aperture):
    if not isinstance(spec, dict) or len(spec) != 1:
        raise loc.error(path, "expected exactly one of 'ula', 'explicit', 'groupwise'")
    kind, body = next(iter(spec.items()))
    try:
        if kind == "ula":
            return ArraySpec("ula", ula_layout(_integer(loc, body, path + ".ula")))
        if kind == "explicit":
            if not isinstance(body, list) or not body:
                raise loc.error(path + ".explicit", "expected a non-empty list of positions")
            return ArraySpec("explicit", ArrayLayout(sorted(float(v) for v in body)))
        if kind == "groupwise":
            return _groupwise(loc, body, path + ".groupwise", geometry, aperture)
    except ScenarioError:
        raise
    except InfeasibleDeploymentError as exc:
        raise InfeasibleDeploymentError(f"{path}.{kind}: {exc}") from None
    except (NulaError, TypeError, ValueError) as exc:
        raise loc.error(path + "." + kind, str(exc)) from None
    raise loc.error(path + "." + kind, "unknown array kind")


def _groupwise(loc, body, path, geometry, aperture):
    if not isinstance(body, dict):
        raise loc.error(path, "expected an object")
    for key in body:
        if key not in ("M", "K", "centers", "delta", "spacing"):
            raise loc.error(path + "." + key, "unknown field")
    for key in ("M", "K"):
        if key not in body:
            raise loc.error(path + "." + key, "missing required field")
    M = _integer(loc, body["M"], path + ".M")
    K = _integer(loc, body["K"], path + ".K")
    if "delta" in body and "spacing" in body:
        raise loc.error(path + ".spacing", "give either delta or spacing, not both")
    delta = _number(loc, body, "delta", path, 0.0)
    if "spacing" in body:
        if geometry is None:
            raise loc.error(path + ".spacing", "a physical spacing needs the geometry block")
        delta = normalized_spacing(_number(loc, body, "spacing", path), aperture(geometry))
    centers = body.get("centers", "fekete")
    if centers == "fekete":
        return ArraySpec("groupwise", *_deploy(groupwise_fekete_deploy(M, K, delta)))
    if isinstance(centers, dict) and set(centers) == {"pat"}:
        theta = _number(loc, centers, "pat", path + ".centers", required=True)
        return ArraySpec("groupwise", *_deploy(groupwise_deploy(M, K, pat_points(K, theta), delta)))
    if isinstance(centers, list):
        return ArraySpec("groupwise", *_deploy(groupwise_deploy(M, K, centers, delta)))
    raise loc.error(path + ".centers", "expected 'fekete', {\"pat\": theta} or a list")


def _deploy(dep):
    return dep.alphas, dep


def _analysis(loc, block):
    if not isinstance(block, dict):
        raise loc.error("analysis", "expected an object")
    allowed = ("gamma_db", "K", "tau", "snr_grid_db", "tau_grid")
    for key in block:
        if key not in allowed:
            raise loc.error("analysis." + key, "unknown field")
    out = {"gamma_db": _number(loc, block, "gamma_db", "analysis")}
    if "K" in block:
        out["K"] = _integer(loc, block["K"], "analysis.K")
        if out["K"] < 1:
            raise loc.error("analysis.K", "must be at least 1")
    tau = _number(loc, block, "tau", "analysis")
    if tau is not None and tau < 0:
        raise loc.error("analysis.tau", "must be non-negative")
    out["tau"] = tau
    grid = block.get("snr_grid_db", [])
    if not isinstance(grid, list) or any(isinstance(v, bool) or not isinstance(v, (int, float))
                                         for v in grid):
        raise loc.error("analysis.snr_grid_db", "expected a list of numbers")
    out["snr_grid_db"] = [float(v) for v in grid]
    if "tau_grid" in block:
        value = block["tau_grid"]
        try:
            if isinstance(value, str):
                out["tau_grid"] = parse_tau_grid(value)
            elif isinstance(value, list) and value:
                arr = np.asarray(value, dtype=float)
                if np.any(arr <= 0) or np.any(np.diff(arr) <= 0):
                    raise ValueError("tau grid must be positive and strictly increasing")
                out["tau_grid"] = arr
            else:
                raise ValueError("expected 'lo:hi:step' or a list")
        except (TypeError, ValueError) as exc:
            raise loc.error("analysis.tau_grid", str(exc)) from None
    return out


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a scenario document.

    Raises
    ------
    ScenarioError
        With the offending key path and an approximate line number.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(exc.msg, None, exc.lineno) from None
    loc = _Locator(text)
    if not isinstance(doc, dict):
        raise ScenarioError("top level must be an object", None, 1)
    for key in doc:
        if key not in ("geometry", "arrays", "analysis"):
            raise loc.error(key, "unknown block")
    geometry = _geometry(loc, doc["geometry"]) if "geometry" in doc else None

    arrays = doc.get("arrays")
    if not isinstance(arrays, dict):
        raise loc.error("arrays", "missing or not an object")
    for key in arrays:
        if key not in ("transmit", "receive", "both"):
            raise loc.error("arrays." + key, "unknown side")
    if "both" in arrays:
        if "transmit" in arrays or "receive" in arrays:
            raise loc.error("arrays.both", "cannot be combined with transmit/receive")
        tx = _array(loc, arrays["both"], "arrays.both", geometry, lambda g: g.aperture_t)
        rx = _array(loc, arrays["both"], "arrays.both", geometry, lambda g: g.aperture_r)
    else:
        for side in ("transmit", "receive"):
            if side not in arrays:
                raise loc.error("arrays." + side, "missing required field")
        tx = _array(loc, arrays["transmit"], "arrays.transmit", geometry, lambda g: g.aperture_t)
        rx = _array(loc, arrays["receive"], "arrays.receive", geometry, lambda g: g.aperture_r)

    analysis = _analysis(loc, doc.get("analysis", {}))
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return Scenario(geometry, tx, rx, digest=digest, **analysis)


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc.strerror}", None, None) from None
    return parse_scenario(text)
