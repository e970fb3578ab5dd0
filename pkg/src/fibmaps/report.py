"""Deterministic tables, JSON reports and matplotlib figures, written atomically."""

from __future__ import annotations

import csv
import io
import json
import os
import platform
import tempfile
from pathlib import Path

import gmpy2
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from . import __version__  # noqa: E402

# fixed ids and no timestamps keep SVG/PNG output reproducible
plt.rcParams.update({"svg.hashsalt": "fibmaps", "svg.fonttype": "none", "path.simplify": False})

_UMASK = os.umask(0)
os.umask(_UMASK)


def fmt_num(x) -> str:
    """Shortest round-trip text for floats, 25 significant digits for multi-precision reals."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if type(x).__name__ == "mpfr":
        return format(x, ".25g")
    return repr(float(x))


def atomic_write_bytes(path: Path, data: bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        # mkstemp creates 0600; give the file the usual umask-derived mode
        os.chmod(tmp, 0o666 & ~_UMASK)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def atomic_write_text(path: Path, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def write_csv(path: Path, header: list[str], rows) -> Path:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_num(v) if not isinstance(v, str) else v for v in row])
    return atomic_write_text(path, buf.getvalue())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if type(obj).__name__ == "mpfr":
        return fmt_num(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def write_json(path: Path, obj) -> Path:
    text = json.dumps(_jsonable(obj), indent=2, ensure_ascii=False)
    return atomic_write_text(path, text + "\n")


def save_figure(fig, path_stem: Path) -> list[Path]:
    """Write ``<stem>.svg`` and ``<stem>.png`` and close the figure."""
    out = []
    for ext in ("svg", "png"):
        buf = io.BytesIO()
        meta = {"Date": None} if ext == "svg" else {"Software": None}
        fig.savefig(buf, format=ext, metadata=meta, dpi=150)
        out.append(atomic_write_bytes(Path(f"{path_stem}.{ext}"), buf.getvalue()))
    plt.close(fig)
    return out


def write_manifest(out_dir: Path, command: str, config: dict, outputs: list, timings: dict) -> Path:
    """Config, library versions and timings; excluded from byte-identity checks."""
    versions = {
        "fibmaps": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "gmpy2": gmpy2.version(),
        "matplotlib": matplotlib.__version__,
    }
    names = sorted(str(Path(p).name) for p in outputs)
    return write_json(Path(out_dir) / "manifest.json",
                      {"command": command, "config": config, "versions": versions,
                       "outputs": names, "timings_s": {k: round(v, 3) for k, v in timings.items()}})


# ------------------------------------------------------------------ figures

def plot_scaling(table, path_stem: Path) -> list[Path]:
    ns = np.array([r.n for r in table.rows])
    mus = np.array([r.mu for r in table.rows])
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(ns, np.log2(mus), "o", ms=4, label=r"$\log_2 \mu_n$")
    lo, hi = table.fit_range
    xs = np.array([lo, hi], float)
    ax.plot(xs, table.slope * xs + table.intercept, "-", lw=1,
            label=f"fit slope {table.slope:.4f}")
    ax.set_xlabel("n")
    ax.set_ylabel(r"$\log_2 \mu_n$")
    ax.legend(frameon=False)
    fig.tight_layout()
    return save_figure(fig, path_stem)


def plot_thurston(run, path_stem: Path) -> list[Path]:
    ks = np.arange(len(run.gammas))
    d = np.array([abs(float(g + 1)) for g in run.gammas])
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.semilogy(ks[d > 0], d[d > 0], ".-", lw=1)
    ax.set_xlabel("k")
    ax.set_ylabel(r"$|\gamma_k + 1|$")
    fig.tight_layout()
    return save_figure(fig, path_stem)


def plot_figure1(pieces, julia: np.ndarray, a: float, path_stem: Path) -> list[Path]:
    """Rescaled pieces overlaid on the Julia point cloud, view box [-a-0.2, a+0.2]^2."""
    fig, ax = plt.subplots(figsize=(6, 6))
    # the point cloud is embedded as an image, piece boundaries stay vector paths
    ax.plot(julia.real, julia.imag, ".", ms=0.6, mew=0, color="0.35", rasterized=True)
    cmap = plt.get_cmap("viridis")
    for i, (level, poly) in enumerate(pieces):
        z = np.append(poly.points, poly.points[:1])
        ax.plot(z.real, z.imag, lw=0.8, color=cmap(i / max(1, len(pieces) - 1)), label=f"n={level}")
    r = a + 0.2
    ax.set_xlim(-r, r)
    ax.set_ylim(-r, r)
    ax.set_aspect("equal")
    ax.legend(frameon=False, fontsize=7, loc="upper right")
    fig.tight_layout()
    return save_figure(fig, path_stem)


def plot_conjugacy(report, path_stem: Path) -> list[Path]:
    xs = np.array([float(p[1]) for p in report.pairs])
    ys = np.array([float(p[2]) for p in report.pairs])
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(9, 3.8))
    a1.plot(xs, ys, ".", ms=3)
    a1.set_xlabel("x")
    a1.set_ylabel(r"$\tilde x$")
    if report.qs:
        s, m = zip(*report.qs)
        a2.semilogx(s, m, "o-", ms=4)
    a2.set_xlabel("scale")
    a2.set_ylabel("max qs ratio")
    fig.tight_layout()
    return save_figure(fig, path_stem)
