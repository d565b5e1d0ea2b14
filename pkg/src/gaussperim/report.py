"""CSV, JSON and SVG artifacts.

JSON files carry a ``payload`` (the results), its SHA-256 over canonical JSON,
and a ``meta`` block with the timestamp, which is excluded from the hash.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import jsonschema

from . import __version__


def canonical(payload) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=True).encode()


def payload_hash(payload) -> str:
    return hashlib.sha256(canonical(payload)).hexdigest()


def load_schema(name: str) -> dict:
    text = resources.files("gaussperim").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def envelope(kind: str, payload: dict, timestamp: bool = True) -> dict:
    meta = {"version": __version__}
    if timestamp:
        meta["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return {"kind": kind, "payload": payload, "payload_sha256": payload_hash(payload), "meta": meta}


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def write_json(path, kind: str, payload: dict, timestamp: bool = True) -> dict:
    """Validate against the shipped schema and write; returns the document."""
    doc = envelope(kind, _clean(payload), timestamp)
    jsonschema.validate(doc, load_schema(kind))
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return doc


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


# ---------------------------------------------------------------- SVG

W, H, PAD = 480, 320, 50


def _svg(body: list[str], title: str) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
            f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">')
    frame = (f'<rect x="{PAD}" y="{PAD / 2}" width="{W - 1.5 * PAD}" height="{H - 1.5 * PAD}" '
             'fill="none" stroke="#444"/>')
    t = f'<text x="{W / 2}" y="14" text-anchor="middle">{title}</text>'
    return "\n".join([head, t, frame, *body, "</svg>"]) + "\n"


def _scale(lo, hi, a, b):
    if hi == lo:
        hi = lo + 1.0
    return lambda v: a + (v - lo) * (b - a) / (hi - lo)


def sweep_svg(path, s_values, scaled, target, limit) -> None:
    """Scaled energy against ``1 - s`` on a log axis, with the target line."""
    xs = [math.log10(1.0 - s) for s in s_values]
    ys = list(scaled) + [target, limit]
    fx = _scale(min(xs) - 0.1, max(xs) + 0.1, PAD, W - PAD / 2)
    fy = _scale(min(ys) * 0.95, max(ys) * 1.05, H - PAD, PAD / 2)
    pts = " ".join(f"{fx(x):.2f},{fy(y):.2f}" for x, y in zip(xs, scaled))
    body = [f'<polyline points="{pts}" fill="none" stroke="#1f77b4"/>']
    body += [f'<circle cx="{fx(x):.2f}" cy="{fy(y):.2f}" r="3" fill="#1f77b4"/>'
             for x, y in zip(xs, scaled)]
    body.append(f'<line x1="{PAD}" x2="{W - PAD / 2}" y1="{fy(target):.2f}" y2="{fy(target):.2f}" '
                'stroke="#d62728" stroke-dasharray="4 3"/>')
    body.append(f'<text x="{W - PAD}" y="{fy(target) - 4:.2f}" text-anchor="end" fill="#d62728">'
                f'target {target:.6g}</text>')
    body.append(f'<text x="{W / 2}" y="{H - 12}" text-anchor="middle">log10(1 - s)</text>')
    body.append(f'<text x="12" y="{H / 2}" transform="rotate(-90 12 {H / 2})" '
                'text-anchor="middle">(1 - s) J</text>')
    Path(path).write_text(_svg(body, f"scaled energy, extrapolated limit {limit:.6g}"))


def dichotomy_svg(path, a_values, deviation, noise_floor) -> None:
    """Bars of log10 deviation against a, with the 3x and 10x noise-floor band."""
    floor = max(noise_floor, 1e-300)
    logs = [math.log10(max(d, 1e-300)) for d in deviation]
    lo = min(min(logs), math.log10(floor)) - 1.0
    hi = max(max(logs), math.log10(10 * floor)) + 0.5
    fy = _scale(lo, hi, H - PAD, PAD / 2)
    k = len(a_values)
    bw = (W - 1.5 * PAD) / max(k, 1)
    body = [f'<rect x="{PAD}" y="{fy(math.log10(10 * floor)):.2f}" width="{W - 1.5 * PAD}" '
            f'height="{fy(math.log10(3 * floor)) - fy(math.log10(10 * floor)):.2f}" '
            'fill="#ffdd99" opacity="0.6"/>']
    for i, (a, v) in enumerate(zip(a_values, logs)):
        x = PAD + i * bw + 0.15 * bw
        body.append(f'<rect x="{x:.2f}" y="{fy(v):.2f}" width="{0.7 * bw:.2f}" '
                    f'height="{H - PAD - fy(v):.2f}" fill="#2ca02c"/>')
        body.append(f'<text x="{x + 0.35 * bw:.2f}" y="{H - PAD + 14}" '
                    f'text-anchor="middle">{a:g}</text>')
    body.append(f'<text x="{W / 2}" y="{H - 12}" text-anchor="middle">a</text>')
    body.append(f'<text x="12" y="{H / 2}" transform="rotate(-90 12 {H / 2})" '
                'text-anchor="middle">log10 deviation</text>')
    Path(path).write_text(_svg(body, "multiplier deviation (band: 3x to 10x noise floor)"))
