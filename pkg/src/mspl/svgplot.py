"""Tiny dependency-free SVG plots for the report emitters."""

import math

W, H = 640, 440
ML, MR, MT, MB = 70, 20, 30, 50
COLORS = ["#1f6feb", "#d73a49", "#22863a", "#b08800"]


def _ticks(lo, hi, log):
    if log:
        lo_e = math.floor(math.log10(lo))
        hi_e = math.ceil(math.log10(hi))
        return [10.0**e for e in range(lo_e, hi_e + 1)]
    span = hi - lo
    step = 10.0 ** math.floor(math.log10(span / 4 if span > 0 else 1.0))
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= 6:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    out = []
    v = first
    while v <= hi + 1e-12 * abs(step):
        out.append(v)
        v += step
    return out


def _fmt_tick(v):
    if v == 0:
        return "0"
    e = math.log10(abs(v))
    if -3 <= e < 5 and abs(v - round(v, 6)) < 1e-12 * abs(v):
        return f"{v:g}"
    return f"{v:.0e}"


class _Canvas:
    def __init__(self, xlo, xhi, ylo, yhi, logx, logy):
        self.logx, self.logy = logx, logy
        self.xlo = math.log10(xlo) if logx else xlo
        self.xhi = math.log10(xhi) if logx else xhi
        self.ylo = math.log10(ylo) if logy else ylo
        self.yhi = math.log10(yhi) if logy else yhi
        if self.xhi == self.xlo:
            self.xhi += 1.0
        if self.yhi == self.ylo:
            self.yhi += 1.0
        self.parts = []

    def px(self, x):
        x = math.log10(x) if self.logx else x
        return ML + (x - self.xlo) / (self.xhi - self.xlo) * (W - ML - MR)

    def py(self, y):
        y = math.log10(y) if self.logy else y
        return H - MB - (y - self.ylo) / (self.yhi - self.ylo) * (H - MT - MB)

    def add(self, s):
        self.parts.append(s)

    def render(self, title, xlabel, ylabel, path):
        head = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
            f'viewBox="0 0 {W} {H}" font-family="monospace" font-size="12">\n'
            f'<rect width="{W}" height="{H}" fill="white"/>\n'
            f'<rect x="{ML}" y="{MT}" width="{W - ML - MR}" height="{H - MT - MB}" '
            'fill="none" stroke="#24292e"/>\n'
            f'<text x="{W / 2:.0f}" y="18" text-anchor="middle">{title}</text>\n'
            f'<text x="{(ML + W - MR) / 2:.0f}" y="{H - 12}" text-anchor="middle">{xlabel}</text>\n'
            f'<text x="16" y="{(MT + H - MB) / 2:.0f}" text-anchor="middle" '
            f'transform="rotate(-90 16 {(MT + H - MB) / 2:.0f})">{ylabel}</text>\n'
        )
        with open(path, "w") as fh:
            fh.write(head + "".join(self.parts) + "</svg>\n")

    def axes(self):
        for v in _ticks(10.0**self.xlo if self.logx else self.xlo,
                        10.0**self.xhi if self.logx else self.xhi, self.logx):
            x = self.px(v)
            if ML - 0.5 <= x <= W - MR + 0.5:
                self.add(
                    f'<line x1="{x:.1f}" y1="{H - MB}" x2="{x:.1f}" y2="{H - MB + 5}" stroke="#24292e"/>\n'
                    f'<text x="{x:.1f}" y="{H - MB + 18}" text-anchor="middle">{_fmt_tick(v)}</text>\n'
                )
        for v in _ticks(10.0**self.ylo if self.logy else self.ylo,
                        10.0**self.yhi if self.logy else self.yhi, self.logy):
            y = self.py(v)
            if MT - 0.5 <= y <= H - MB + 0.5:
                self.add(
                    f'<line x1="{ML - 5}" y1="{y:.1f}" x2="{ML}" y2="{y:.1f}" stroke="#24292e"/>\n'
                    f'<text x="{ML - 8}" y="{y + 4:.1f}" text-anchor="end">{_fmt_tick(v)}</text>\n'
                )

    def series(self, xs, ys, color, line=True):
        pts = " ".join(f"{self.px(x):.1f},{self.py(y):.1f}" for x, y in zip(xs, ys))
        if line and len(xs) > 1:
            self.add(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>\n')
        for x, y in zip(xs, ys):
            self.add(f'<circle cx="{self.px(x):.1f}" cy="{self.py(y):.1f}" r="3" fill="{color}"/>\n')


def loglog_sweep_plot(path, report):
    """Energy vs eps per model, with the fitted power law overlaid."""
    models = sorted({r["model"] for r in report.rows})
    xs = [r["eps"] for r in report.rows]
    ys = [r["energy_total"] for r in report.rows]
    cv = _Canvas(min(xs) * 0.7, max(xs) * 1.4, min(ys) * 0.7, max(ys) * 1.4, True, True)
    cv.axes()
    for i, m in enumerate(models):
        sub = sorted((r["eps"], r["energy_total"]) for r in report.rows if r["model"] == m)
        cv.series([p[0] for p in sub], [p[1] for p in sub], COLORS[i % len(COLORS)], line=False)
        fit = report.fits.get(m)
        if fit is not None:
            ex = [min(xs), max(xs)]
            ey = [math.exp(fit.intercept + fit.slope * math.log(x)) for x in ex]
            cv.series(ex, ey, COLORS[i % len(COLORS)])
            cv.add(
                f'<text x="{W - MR - 6}" y="{MT + 16 + 14 * i}" text-anchor="end" '
                f'fill="{COLORS[i % len(COLORS)]}">{m}: slope {fit.slope:.4f}</text>\n'
            )
    cv.render("energy scaling", "eps", "min energy", path)


def ratio_plot(path, xs, ys, title, xlabel, ylabel, logx=False, marker_x=None):
    if not xs:
        xs, ys = [1.0], [1.0]
    pad = 0.15 * (max(ys) - min(ys) or 1.0)
    cv = _Canvas(
        min(xs) * (0.7 if logx else 1.0) or 1e-6,
        max(xs) * (1.4 if logx else 1.0),
        min(ys) - pad,
        max(ys) + pad,
        logx,
        False,
    )
    cv.axes()
    if marker_x is not None and min(xs) < marker_x < max(xs):
        x = cv.px(marker_x)
        cv.add(
            f'<line x1="{x:.1f}" y1="{MT}" x2="{x:.1f}" y2="{H - MB}" '
            'stroke="#6a737d" stroke-dasharray="4 3"/>\n'
        )
    cv.series(xs, ys, COLORS[0])
    cv.render(title, xlabel, ylabel, path)
