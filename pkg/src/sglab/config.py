"""Experiment configuration files (TOML).

Example::

    mode = "synthetic"          # or "continuation", "analyze-snapshot"
    seed = 0

    [grid]
    n_r = 256
    n_theta = 256

    [coefficients]
    h1 = "const:1"
    h2 = "const:1"
    one_signed = true

    [[family.bubbles]]
    center = [0.0, 0.0]
    lam = 200.0
    sign = 1

    [thresholds]
    c1_threshold = 3.0
"""

from __future__ import annotations

import re
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .fields import CoefficientError, CoefficientPair, preset
from .liouville import BubbleSpec, SyntheticFamily

MODES = ("synthetic", "continuation", "analyze-snapshot")


class ConfigError(ValueError):
    """Invalid configuration; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: Optional[int] = None, source: str = "<config>"):
        self.line = line
        where = f"{source}:{line}: " if line else f"{source}: "
        super().__init__(where + message)


@dataclass(frozen=True)
class Thresholds:
    c1_threshold: float = 3.0
    threshold_N: float = 5.0
    ratio_tau: float = 3.0
    gap_factor: float = 10.0
    m_max: int = 50


@dataclass(frozen=True)
class ContinuationSpec:
    path: Tuple[Tuple[float, float], ...]
    H1: str = "const:1"
    H2: str = "const:1"
    tol: float = 1e-6
    max_iters: int = 30
    blowup_threshold: float = 12.0


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    grid: Tuple[int, int]
    h1: str = "const:1"
    h2: str = "const:1"
    one_signed: bool = False
    bound_C: float = 2.0
    family: Optional[SyntheticFamily] = None
    continuation: Optional[ContinuationSpec] = None
    thresholds: Thresholds = field(default_factory=Thresholds)
    output_dir: Optional[str] = None
    seed: int = 0
    probes: int = 32
    snapshot: Optional[str] = None
    source: str = "<config>"

    def pair(self) -> CoefficientPair:
        return CoefficientPair(self.h1, self.h2, self.bound_C, self.one_signed)

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        d["grid"] = list(self.grid)
        if self.family is not None:
            d["family"] = {
                "background": self.family.background,
                "bubbles": [
                    {"center": list(b.center), "lam": b.lam, "sign": b.sign, "h_value": b.h_value}
                    for b in self.family.bubbles
                ],
            }
        if self.continuation is not None:
            d["continuation"]["path"] = [list(p) for p in self.continuation.path]
        return d


def _key_line(text: str, table: Optional[str], key: str) -> Optional[int]:
    """Line of ``key = ...`` inside ``[table]`` (top level when ``None``)."""
    current: Optional[str] = None
    pat = re.compile(rf"^\s*{re.escape(key)}\s*=")
    for n, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if s.startswith("["):
            current = s.strip("[]").strip()
            continue
        if current == table and pat.match(line):
            return n
    return None


def _table_line(text: str, table: str) -> Optional[int]:
    for n, line in enumerate(text.splitlines(), 1):
        if line.strip().strip("[]").strip() == table and line.strip().startswith("["):
            return n
    return None


class _Reader:
    def __init__(self, data: dict, text: str, source: str):
        self.data, self.text, self.source = data, text, source

    def fail(self, msg: str, table: Optional[str] = None, key: Optional[str] = None):
        line = None
        if key is not None:
            line = _key_line(self.text, table, key)
        if line is None and table is not None:
            line = _table_line(self.text, table)
        raise ConfigError(msg, line, self.source)

    def table(self, name: str) -> dict:
        t = self.data.get(name, {})
        if not isinstance(t, dict):
            self.fail(f"'{name}' must be a table", None, name)
        return t

    def number(self, t: dict, table: Optional[str], key: str, default, kind=float, positive=True):
        if key not in t:
            return default
        v = t[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or (kind is int and not isinstance(v, int)):
            self.fail(f"'{key}' must be {'an integer' if kind is int else 'a number'}, got {v!r}", table, key)
        if positive and not v > 0:
            self.fail(f"'{key}' must be positive, got {v!r}", table, key)
        return kind(v)

    def string(self, t: dict, table: Optional[str], key: str, default: str) -> str:
        v = t.get(key, default)
        if not isinstance(v, str):
            self.fail(f"'{key}' must be a string, got {v!r}", table, key)
        return v


def _check_preset(r: _Reader, t: dict, table: str, key: str, default: str) -> str:
    spec = r.string(t, table, key, default)
    try:
        preset(spec)
    except CoefficientError as exc:
        r.fail(str(exc), table, key)
    return spec


def _path(r: _Reader, t: dict) -> Tuple[Tuple[float, float], ...]:
    if "path" in t:
        raw = t["path"]
        if not isinstance(raw, list) or not all(
            isinstance(p, list) and len(p) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in p)
            for p in raw
        ):
            r.fail("'path' must be a list of [rho1, rho2] pairs", "continuation", "path")
        pts = tuple((float(a), float(b)) for a, b in raw)
    elif "rho1_stop" in t:
        start = r.number(t, "continuation", "rho1_start", 0.0, positive=False)
        stop = r.number(t, "continuation", "rho1_stop", None, positive=False)
        step = r.number(t, "continuation", "rho1_step", 0.5)
        rho2 = r.number(t, "continuation", "rho2", 0.0, positive=False)
        n = int(round((stop - start) / step))
        if n < 0 or abs(start + n * step - stop) > 1e-9 * max(1.0, abs(stop)):
            r.fail("rho1_stop - rho1_start must be a non-negative multiple of rho1_step", "continuation", "rho1_stop")
        pts = tuple((start + k * step, rho2) for k in range(n + 1))
    else:
        r.fail("continuation needs 'path' or 'rho1_stop'", "continuation")
    if not pts:
        r.fail("continuation path is empty", "continuation", "path")
    if any(a < 0 or b < 0 for a, b in pts):
        r.fail("path entries must be non-negative", "continuation", "path")
    return pts


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"syntax error: {exc}", int(m.group(1)) if m else None, source) from None
    r = _Reader(data, text, source)
    known = {"mode", "seed", "output_dir", "probes", "snapshot", "grid", "coefficients", "family", "continuation", "thresholds"}
    for k in data:
        if k not in known:
            r.fail(f"unknown key '{k}'", None, k)
    mode = data.get("mode")
    if mode not in MODES:
        r.fail(f"'mode' must be one of {', '.join(MODES)}, got {mode!r}", None, "mode")

    gt = r.table("grid")
    if mode != "analyze-snapshot" and not gt:
        r.fail("missing [grid] table")
    n_r = r.number(gt, "grid", "n_r", 128, int)
    n_t = r.number(gt, "grid", "n_theta", 128, int)
    if n_r < 8 or n_t < 8 or n_t % 2:
        r.fail(f"grid needs n_r >= 8 and even n_theta >= 8, got ({n_r}, {n_t})", "grid", "n_theta" if n_t % 2 else "n_r")

    ct = r.table("coefficients")
    h1 = _check_preset(r, ct, "coefficients", "h1", "const:1")
    h2 = _check_preset(r, ct, "coefficients", "h2", "const:1")
    one_signed = ct.get("one_signed", False)
    if not isinstance(one_signed, bool):
        r.fail("'one_signed' must be true or false", "coefficients", "one_signed")
    bound_C = r.number(ct, "coefficients", "bound_C", 2.0)
    if bound_C < 1:
        r.fail("'bound_C' must be >= 1", "coefficients", "bound_C")

    tt = r.table("thresholds")
    th = Thresholds(
        c1_threshold=r.number(tt, "thresholds", "c1_threshold", 3.0),
        threshold_N=r.number(tt, "thresholds", "threshold_N", 5.0),
        ratio_tau=r.number(tt, "thresholds", "ratio_tau", 3.0),
        gap_factor=r.number(tt, "thresholds", "gap_factor", 10.0),
        m_max=r.number(tt, "thresholds", "m_max", 50, int),
    )
    if th.ratio_tau <= 1:
        r.fail("'ratio_tau' must exceed 1", "thresholds", "ratio_tau")
    if th.gap_factor <= 1:
        r.fail("'gap_factor' must exceed 1", "thresholds", "gap_factor")

    family = None
    cont = None
    if mode == "synthetic":
        if "continuation" in data:
            r.fail("[continuation] is not allowed in synthetic mode", "continuation")
        ft = r.table("family")
        bubbles = ft.get("bubbles")
        if not isinstance(bubbles, list):
            r.fail("synthetic mode needs [[family.bubbles]] entries", "family")
        specs = []
        for b in bubbles:
            try:
                specs.append(BubbleSpec(tuple(b["center"]), float(b["lam"]), int(b.get("sign", 1)), float(b.get("h_value", 1.0))))
            except (KeyError, TypeError, ValueError) as exc:
                r.fail(f"bad bubble entry {b!r}: {exc}", "family.bubbles")
        background = r.number(ft, "family", "background", 0.0, positive=False)
        family = SyntheticFamily(tuple(specs), background)
    elif mode == "continuation":
        if "family" in data:
            r.fail("[family] is not allowed in continuation mode", "family")
        kt = r.table("continuation")
        if not kt:
            r.fail("continuation mode needs a [continuation] table")
        cont = ContinuationSpec(
            path=_path(r, kt),
            H1=_check_preset(r, kt, "continuation", "H1", "const:1"),
            H2=_check_preset(r, kt, "continuation", "H2", "const:1"),
            tol=r.number(kt, "continuation", "tol", 1e-6),
            max_iters=r.number(kt, "continuation", "max_iters", 30, int),
            blowup_threshold=r.number(kt, "continuation", "blowup_threshold", 12.0),
        )
    else:
        for k in ("family", "continuation"):
            if k in data:
                r.fail(f"[{k}] is not allowed in analyze-snapshot mode", k)

    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        r.fail("'seed' must be a non-negative integer", None, "seed")
    out = data.get("output_dir")
    if out is not None and not isinstance(out, str):
        r.fail("'output_dir' must be a string", None, "output_dir")
    probes = r.number(data, None, "probes", 32, int)
    snapshot = data.get("snapshot")
    if snapshot is not None and (mode != "analyze-snapshot" or not isinstance(snapshot, str)):
        r.fail("'snapshot' must be a path string and is only allowed in analyze-snapshot mode", None, "snapshot")
    return ExperimentConfig(
        mode=mode, grid=(n_r, n_t), h1=h1, h2=h2, one_signed=one_signed, bound_C=bound_C,
        family=family, continuation=cont, thresholds=th, output_dir=out, seed=seed, probes=probes, snapshot=snapshot, source=source,
    )


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", None, str(p)) from None
    return parse_config(text, str(p))
