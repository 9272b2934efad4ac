"""Turn pellclass CSVs into the two standard figures.

charfreq kind: three solid empirical curves (chi = +1 green, -1 red, 0 blue)
with the model probabilities dotted, over the prime axis.  tail kind: one
curve of the empirical proportion against tau.

The SVG writer is hand-rolled so output is a pure function of the CSV bytes:
fixed viewport, fixed style table, fixed float formatting, no timestamps or
generator metadata.  PNG output is optional and delegates to matplotlib when
asked for (not byte-stable, SVG is the contract).
"""

from __future__ import annotations

import csv
import json
import sys

KINDS = {
    "charfreq": ["p", "freq_plus", "freq_minus", "freq_zero", "a_p", "b_p", "c_p"],
    "tail": ["tau", "empirical", "model"],
}

GREEN, RED, BLUE = "#2ca02c", "#d62728", "#1f77b4"

W, H = 720.0, 480.0
ML, MR, MT, MB = 64.0, 20.0, 36.0, 48.0   # margins: left right top bottom


class SchemaError(ValueError):
    pass


def read_rows(path: str, kind: str):
    if kind not in KINDS:
        raise SchemaError(f"unknown figure kind {kind!r}")
    want = KINDS[kind]
    with open(path, newline="") as fh:
        first = fh.readline()
        if not first.startswith("#"):
            header_line = first
            meta = {}
        else:
            meta = json.loads(first[1:].strip() or "{}")
            header_line = fh.readline()
        names = header_line.strip().split(",") if header_line.strip() else []
        if names != want:
            raise SchemaError(f"{path}: columns {names} do not match {want}")
        rows = [dict(zip(names, map(float, rec)))
                for rec in csv.reader(fh) if rec]
    return meta, rows


def _f(v: float) -> str:
    return format(v, ".2f")


class Svg:
    def __init__(self, title: str):
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{int(W)}" '
            f'height="{int(H)}" viewBox="0 0 {int(W)} {int(H)}">',
            f'<rect width="{int(W)}" height="{int(H)}" fill="white"/>',
        ]
        if title:
            self.text(W / 2, MT - 14, title, anchor="middle", size=14)

    def line(self, x1, y1, x2, y2, color="#000000", width=1.0, dash=None):
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
            f'stroke="{color}" stroke-width="{_f(width)}"{d}/>'
        )

    def polyline(self, pts, color, width=1.5, dash=None):
        if not pts:
            return
        d = f' stroke-dasharray="{dash}"' if dash else ""
        body = " ".join(f"{_f(x)},{_f(y)}" for x, y in pts)
        self.parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="{_f(width)}"'
            f'{d} points="{body}"/>'
        )

    def text(self, x, y, s, anchor="start", size=11, color="#000000"):
        self.parts.append(
            f'<text x="{_f(x)}" y="{_f(y)}" font-family="sans-serif" '
            f'font-size="{size}" fill="{color}" text-anchor="{anchor}">{s}</text>'
        )

    def tostring(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _ticks(lo: float, hi: float, n: int = 6):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** int(f"{raw:e}".split("e")[1])
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = step * int(lo / step + (0 if lo % step == 0 else 1))
    out = []
    v = first
    while v <= hi + 1e-9 * step:
        out.append(round(v, 10))
        v += step
    return out


class Axes:
    def __init__(self, svg: Svg, xlo, xhi, ylo, yhi, xlabel, ylabel):
        self.svg = svg
        self.xlo, self.xhi = xlo, max(xhi, xlo + 1e-9)
        self.ylo, self.yhi = ylo, max(yhi, ylo + 1e-9)
        svg.line(ML, H - MB, W - MR, H - MB)
        svg.line(ML, MT, ML, H - MB)
        for t in _ticks(self.xlo, self.xhi):
            x = self.px(t)
            svg.line(x, H - MB, x, H - MB + 4)
            svg.text(x, H - MB + 18, f"{t:g}", anchor="middle")
        for t in _ticks(self.ylo, self.yhi):
            y = self.py(t)
            svg.line(ML - 4, y, ML, y)
            svg.text(ML - 8, y + 4, f"{t:g}", anchor="end")
        svg.text((ML + W - MR) / 2, H - 12, xlabel, anchor="middle", size=12)
        svg.text(14, MT - 10, ylabel, anchor="start", size=12)

    def px(self, v):
        return ML + (v - self.xlo) / (self.xhi - self.xlo) * (W - ML - MR)

    def py(self, v):
        return H - MB - (v - self.ylo) / (self.yhi - self.ylo) * (H - MT - MB)

    def curve(self, rows, xk, yk, color, dash=None):
        pts = [(self.px(r[xk]), self.py(r[yk])) for r in rows]
        self.svg.polyline(pts, color, dash=dash)


def render_charfreq(rows, title: str) -> str:
    svg = Svg(title)
    xhi = max((r["p"] for r in rows), default=1.0)
    ax = Axes(svg, 0.0, xhi, 0.0, 1.0, "p", "frequency")
    for key, model_key, color in (
        ("freq_plus", "a_p", GREEN),
        ("freq_minus", "b_p", RED),
        ("freq_zero", "c_p", BLUE),
    ):
        ax.curve(rows, "p", key, color)
        ax.curve(rows, "p", model_key, color, dash="2,3")
    lx = W - MR - 150
    for i, (lbl, color) in enumerate(
        (("chi = +1", GREEN), ("chi = -1", RED), ("chi = 0", BLUE))
    ):
        y = MT + 14 + 16 * i
        svg.line(lx, y - 4, lx + 24, y - 4, color=color, width=2.0)
        svg.text(lx + 30, y, lbl)
    return svg.tostring()


def render_tail(rows, title: str) -> str:
    svg = Svg(title)
    xlo = min((r["tau"] for r in rows), default=0.0)
    xhi = max((r["tau"] for r in rows), default=1.0)
    ax = Axes(svg, xlo, xhi, 0.0, 1.0, "tau", "proportion")
    ax.curve(rows, "tau", "empirical", BLUE)
    return svg.tostring()


def render(kind: str, in_csv: str, out_path: str, title: str = "") -> None:
    _, rows = read_rows(in_csv, kind)
    text = render_charfreq(rows, title) if kind == "charfreq" else render_tail(rows, title)
    if out_path.endswith(".png"):
        _write_png(kind, rows, out_path, title)
        return
    with open(out_path, "w", newline="\n") as fh:
        fh.write(text)


def _write_png(kind, rows, out_path, title):
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as e:
        raise SchemaError(f"PNG output needs matplotlib: {e}")
    fig, ax = plt.subplots(figsize=(7.2, 4.8))
    if kind == "charfreq":
        for key, mkey, color in (("freq_plus", "a_p", GREEN),
                                 ("freq_minus", "b_p", RED),
                                 ("freq_zero", "c_p", BLUE)):
            ax.plot([r["p"] for r in rows], [r[key] for r in rows], color=color)
            ax.plot([r["p"] for r in rows], [r[mkey] for r in rows],
                    color=color, linestyle=":")
        ax.set_xlabel("p")
        ax.set_ylabel("frequency")
    else:
        ax.plot([r["tau"] for r in rows], [r["empirical"] for r in rows], color=BLUE)
        ax.set_xlabel("tau")
        ax.set_ylabel("proportion")
    ax.set_ylim(0, 1)
    if title:
        ax.set_title(title)
    fig.savefig(out_path)
    plt.close(fig)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    title = ""
    if "--title" in argv:
        i = argv.index("--title")
        title = argv[i + 1]
        del argv[i : i + 2]
    if len(argv) != 3:
        print("usage: figrender <charfreq|tail> <in.csv> <out.svg> [--title T]",
              file=sys.stderr)
        return 2
    kind, in_csv, out_path = argv
    try:
        render(kind, in_csv, out_path, title)
    except (OSError, SchemaError, ValueError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
