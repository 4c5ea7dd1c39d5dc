"""Tiny dependency-free SVG emitters for report plots."""


def _header(width, height):
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}">\n'
            f'<rect width="{width}" height="{height}" fill="white"/>\n')


def write_bar_chart(path, bars, reference_line=None, title="",
                    width=480, height=320):
    """bars: [(label, value)]; reference_line: (label, value) horizontal rule."""
    top, bottom, left = 40, 40, 60
    plot_h = height - top - bottom
    vmax = max([v for _, v in bars] + ([reference_line[1]] if reference_line else [0.0]))
    vmax = vmax or 1.0
    bw = (width - left - 20) / max(1, len(bars))
    parts = [_header(width, height)]
    if title:
        parts.append(f'<text x="{width/2}" y="20" text-anchor="middle" '
                     f'font-size="14">{title}</text>\n')
    for i, (label, value) in enumerate(bars):
        h = plot_h * value / vmax
        x = left + i * bw + bw * 0.15
        y = top + plot_h - h
        parts.append(f'<rect x="{x:.1f}" y="{y:.1f}" width="{bw * 0.7:.1f}" '
                     f'height="{h:.1f}" fill="#4878a8"/>\n')
        parts.append(f'<text x="{x + bw * 0.35:.1f}" y="{height - 20}" '
                     f'text-anchor="middle" font-size="11">{label}</text>\n')
        parts.append(f'<text x="{x + bw * 0.35:.1f}" y="{y - 4:.1f}" '
                     f'text-anchor="middle" font-size="11">{value:.3g}</text>\n')
    if reference_line is not None:
        label, value = reference_line
        y = top + plot_h * (1 - value / vmax)
        parts.append(f'<line x1="{left}" y1="{y:.1f}" x2="{width - 20}" '
                     f'y2="{y:.1f}" stroke="#c04040" stroke-dasharray="6 3"/>\n')
        parts.append(f'<text x="{width - 22}" y="{y - 5:.1f}" text-anchor="end" '
                     f'font-size="11" fill="#c04040">{label}</text>\n')
    parts.append('<line x1="%d" y1="%d" x2="%d" y2="%d" stroke="black"/>\n'
                 % (left, top + plot_h, width - 20, top + plot_h))
    parts.append("</svg>\n")
    with open(path, "w") as fh:
        fh.write("".join(parts))
    return path


def write_scatter(path, points, title="", x_label="", y_label="",
                  width=480, height=320):
    """points: [(x, y, label)]; axes autoscale with a small margin."""
    top, bottom, left = 40, 50, 60
    plot_w, plot_h = width - left - 30, height - top - bottom
    xs = [p[0] for p in points] or [0.0, 1.0]
    ys = [p[1] for p in points] or [0.0, 1.0]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    x_pad = (x_hi - x_lo or 1.0) * 0.1
    y_pad = (y_hi - y_lo or 1.0) * 0.1
    x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    def sx(x):
        return left + plot_w * (x - x_lo) / (x_hi - x_lo)

    def sy(y):
        return top + plot_h * (1 - (y - y_lo) / (y_hi - y_lo))

    parts = [_header(width, height)]
    if title:
        parts.append(f'<text x="{width/2}" y="20" text-anchor="middle" '
                     f'font-size="14">{title}</text>\n')
    parts.append(f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" '
                 f'y2="{top + plot_h}" stroke="black"/>\n')
    parts.append(f'<line x1="{left}" y1="{top}" x2="{left}" '
                 f'y2="{top + plot_h}" stroke="black"/>\n')
    parts.append(f'<text x="{left + plot_w / 2}" y="{height - 12}" '
                 f'text-anchor="middle" font-size="12">{x_label}</text>\n')
    parts.append(f'<text x="16" y="{top + plot_h / 2}" font-size="12" '
                 f'transform="rotate(-90 16 {top + plot_h / 2})" '
                 f'text-anchor="middle">{y_label}</text>\n')
    for x, y, label in points:
        parts.append(f'<circle cx="{sx(x):.1f}" cy="{sy(y):.1f}" r="5" '
                     f'fill="#4878a8"/>\n')
        parts.append(f'<text x="{sx(x) + 8:.1f}" y="{sy(y) - 6:.1f}" '
                     f'font-size="11">{label}</text>\n')
    parts.append("</svg>\n")
    with open(path, "w") as fh:
        fh.write("".join(parts))
    return path
