"""Report emission: JSON with full-precision floats, CSV dumps, figures.

The JSON emitter formats every float with 17 significant digits so that
values round-trip exactly through the decimal representation; the stock
json module offers no hook for that, hence the small custom serializer.
Figures render through the Agg backend and are written next to the
delimited output.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .mesh import ScalarField, field_to_csv

__all__ = [
    "dumps_json",
    "write_json",
    "write_trace_csv",
    "write_solution_csv",
    "solution_figure",
    "trace_figure",
]

_FMT = "%.17g"


def _emit(obj, out: list, indent: int) -> None:
    pad = "  " * indent
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        out.append(_FMT % x if math.isfinite(x) else "null")
    elif isinstance(obj, str):
        import json as _json

        out.append(_json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = list(obj.items())
        for i, (k, v) in enumerate(items):
            import json as _json

            out.append("  " * (indent + 1) + _json.dumps(str(k)) + ": ")
            _emit(v, out, indent + 1)
            out.append(",\n" if i + 1 < len(items) else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj.tolist() if isinstance(obj, np.ndarray) else obj)
        if not seq:
            out.append("[]")
            return
        out.append("[\n")
        for i, v in enumerate(seq):
            out.append("  " * (indent + 1))
            _emit(v, out, indent + 1)
            out.append(",\n" if i + 1 < len(seq) else "\n")
        out.append(pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_json(obj) -> str:
    out: list[str] = []
    _emit(obj, out, 0)
    out.append("\n")
    return "".join(out)


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_json(obj))
    return path


def write_trace_csv(path, trace) -> Path:
    """Continuation stages as (n, q_n, sup_v, lambda_q) rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["n", "q", "sup_v", "lambda_q"])
        for s in trace.stages:
            wr.writerow([s.n, _FMT % s.q, _FMT % s.sup_v, _FMT % s.lambda_q])
    return path


def write_solution_csv(path, solution: ScalarField, sub: ScalarField | None = None,
                       sup: ScalarField | None = None) -> Path:
    """Node rows: coordinates, solution, and the sandwich envelopes if given."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if sub is None and sup is None:
        field_to_csv(solution, path)
        return path
    dom = solution.domain
    coords = dom.coords()
    if dom.kind == "rectangle":
        names = ["x", "y"]
        cols = [c.ravel() for c in coords]
    else:
        names = ["r" if dom.kind == "ball" else "x"]
        cols = [coords[0].ravel()]
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(names + ["sub", "value", "super"])
        sv = solution.values.ravel()
        lo = sub.values.ravel() if sub is not None else np.full_like(sv, np.nan)
        hi = sup.values.ravel() if sup is not None else np.full_like(sv, np.nan)
        for i in range(sv.size):
            wr.writerow([_FMT % c[i] for c in cols] + [_FMT % lo[i], _FMT % sv[i], _FMT % hi[i]])
    return path


def solution_figure(path, solution: ScalarField, sub: ScalarField | None = None,
                    sup: ScalarField | None = None, title: str = "") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    dom = solution.domain
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if dom.kind == "rectangle":
        im = ax.imshow(
            solution.values.T,
            origin="lower",
            extent=(0.0, dom.extents[0], 0.0, dom.extents[1]),
            aspect="equal",
        )
        fig.colorbar(im, ax=ax, label="u")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
    else:
        x = dom.axes[0]
        if sub is not None:
            ax.plot(x, sub.values, "--", color="tab:green", label="sub-solution")
        ax.plot(x, solution.values, color="tab:blue", label="solution")
        if sup is not None:
            ax.plot(x, sup.values, "--", color="tab:red", label="super-solution")
        ax.set_xlabel("r" if dom.kind == "ball" else "x")
        ax.set_ylabel("u")
        ax.legend(frameon=False)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def trace_figure(path, trace, title: str = "") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    ns = [s.n for s in trace.stages]
    lams = [s.lambda_q for s in trace.stages]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(ns, lams, "o-", color="tab:blue", label="lambda_q")
    ax.axhline(trace.lambda_upper, color="tab:red", ls="--", lw=1, label="lambda_1")
    ax.axhline(trace.lambda_lower, color="tab:green", ls="--", lw=1, label="alpha - beta mu^b")
    if math.isfinite(trace.lambda_beta):
        ax.axhline(trace.lambda_beta, color="tab:gray", ls=":", lw=1, label="extrapolated limit")
    ax.set_xlabel("stage n")
    ax.set_ylabel("lambda_q")
    ax.legend(frameon=False, fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
