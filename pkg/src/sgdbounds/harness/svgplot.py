"""Minimal deterministic SVG line charts (no external resources).

Byte-reproducible by construction: fixed canvas, fixed decimal formatting,
stride-based downsampling to at most ``MAX_POINTS`` vertices per series.
The y axis is log10 with decade gridlines; non-positive values are clamped
to ``Y_FLOOR``.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["line_chart", "MAX_POINTS"]

MAX_POINTS = 1024
Y_FLOOR = 1e-16

_W, _H = 720.0, 440.0
_ML, _MR, _MT, _MB = 72.0, 24.0, 40.0, 52.0
_PW, _PH = _W - _ML - _MR, _H - _MT - _MB

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _downsample(ks: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if ks.size <= MAX_POINTS:
        return ks, ys
    stride = int(math.ceil(ks.size / MAX_POINTS))
    sel = np.arange(0, ks.size, stride)
    if sel[-1] != ks.size - 1:
        sel = np.append(sel, ks.size - 1)
    return ks[sel], ys[sel]


def line_chart(
    ks,
    series: list[tuple[str, np.ndarray]],
    hline: tuple[str, float] | None = None,
    title: str = "",
    ylabel: str = "",
    xlabel: str = "k",
) -> str:
    """Render one or more (label, values) series over iterate numbers ``ks``."""
    ks = np.asarray(ks, dtype=np.float64)
    clean: list[tuple[str, np.ndarray, np.ndarray]] = []
    lo, hi = math.inf, -math.inf
    for label, ys in series:
        ys = np.asarray(ys, dtype=np.float64)
        mask = np.isfinite(ys)
        if not mask.any():
            continue
        kk, yy = _downsample(ks[mask], np.maximum(ys[mask], Y_FLOOR))
        clean.append((label, kk, yy))
        lo = min(lo, float(np.min(yy)))
        hi = max(hi, float(np.max(yy)))
    if hline is not None and math.isfinite(hline[1]) and hline[1] > 0:
        lo = min(lo, hline[1])
        hi = max(hi, hline[1])
    if not math.isfinite(lo):
        lo, hi = 1e-2, 1.0
    llo = math.floor(math.log10(max(lo, Y_FLOOR)))
    lhi = math.ceil(math.log10(max(hi, lo * 1.0000001, Y_FLOOR)))
    if lhi <= llo:
        lhi = llo + 1
    kmin, kmax = float(np.min(ks)), float(np.max(ks))
    if kmax <= kmin:
        kmax = kmin + 1.0

    def sx(k: float) -> float:
        return _ML + (k - kmin) / (kmax - kmin) * _PW

    def sy(v: float) -> float:
        t = (math.log10(max(v, Y_FLOOR)) - llo) / (lhi - llo)
        return _MT + (1.0 - t) * _PH

    parts: list[str] = []
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{int(_W)}" height="{int(_H)}" '
        f'viewBox="0 0 {int(_W)} {int(_H)}">'
    )
    parts.append(f'<rect x="0" y="0" width="{int(_W)}" height="{int(_H)}" fill="#ffffff"/>')
    if title:
        parts.append(
            f'<text x="{_fmt(_W / 2)}" y="24" font-family="monospace" font-size="14" '
            f'text-anchor="middle">{escape(title)}</text>'
        )

    # gridlines + y decade labels
    n_decades = lhi - llo
    label_step = max(1, int(math.ceil(n_decades / 8)))
    for e in range(llo, lhi + 1):
        y = sy(10.0**e)
        parts.append(
            f'<line x1="{_fmt(_ML)}" y1="{_fmt(y)}" x2="{_fmt(_ML + _PW)}" y2="{_fmt(y)}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        if (e - llo) % label_step == 0:
            parts.append(
                f'<text x="{_fmt(_ML - 6)}" y="{_fmt(y + 4)}" font-family="monospace" '
                f'font-size="11" text-anchor="end">1e{e}</text>'
            )
    # x ticks: 5 evenly spaced
    for i in range(5):
        k = kmin + (kmax - kmin) * i / 4
        x = sx(k)
        parts.append(
            f'<line x1="{_fmt(x)}" y1="{_fmt(_MT + _PH)}" x2="{_fmt(x)}" '
            f'y2="{_fmt(_MT + _PH + 5)}" stroke="#000000" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_fmt(x)}" y="{_fmt(_MT + _PH + 18)}" font-family="monospace" '
            f'font-size="11" text-anchor="middle">{int(round(k))}</text>'
        )
    # axes
    parts.append(
        f'<line x1="{_fmt(_ML)}" y1="{_fmt(_MT)}" x2="{_fmt(_ML)}" y2="{_fmt(_MT + _PH)}" '
        f'stroke="#000000" stroke-width="1"/>'
    )
    parts.append(
        f'<line x1="{_fmt(_ML)}" y1="{_fmt(_MT + _PH)}" x2="{_fmt(_ML + _PW)}" '
        f'y2="{_fmt(_MT + _PH)}" stroke="#000000" stroke-width="1"/>'
    )
    parts.append(
        f'<text x="{_fmt(_ML + _PW / 2)}" y="{_fmt(_H - 12)}" font-family="monospace" '
        f'font-size="12" text-anchor="middle">{escape(xlabel)}</text>'
    )
    if ylabel:
        parts.append(
            f'<text x="16" y="{_fmt(_MT + _PH / 2)}" font-family="monospace" font-size="12" '
            f'text-anchor="middle" transform="rotate(-90 16 {_fmt(_MT + _PH / 2)})">'
            f"{escape(ylabel)}</text>"
        )

    # series
    for i, (label, kk, yy) in enumerate(clean):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{_fmt(sx(k))},{_fmt(sy(v))}" for k, v in zip(kk, yy))
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>'
        )
        parts.append(
            f'<text x="{_fmt(_ML + 8)}" y="{_fmt(_MT + 16 + 16 * i)}" font-family="monospace" '
            f'font-size="11" fill="{color}">{escape(label)}</text>'
        )

    # horizontal rule
    if hline is not None and math.isfinite(hline[1]) and hline[1] > 0:
        y = sy(hline[1])
        parts.append(
            f'<line x1="{_fmt(_ML)}" y1="{_fmt(y)}" x2="{_fmt(_ML + _PW)}" y2="{_fmt(y)}" '
            f'stroke="#000000" stroke-width="1.5" stroke-dasharray="6,4"/>'
        )
        parts.append(
            f'<text x="{_fmt(_ML + _PW - 4)}" y="{_fmt(y - 5)}" font-family="monospace" '
            f'font-size="11" text-anchor="end">{escape(hline[0])}</text>'
        )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
