"""Tabular and SVG reporting over aggregated results.

A report row is one (language, corpus version, comparison) triple with its
ensemble means.  The same rows render as TSV, as a Markdown table, and as a
self-contained grouped bar chart (mean test statistic per comparison,
grouped by language, raw and lemmatized side by side).  All renderers are
deterministic: identical inputs give byte-identical output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable
from xml.sax.saxutils import escape, quoteattr

from .errors import DataError
from .weat import AggregateResult

TABLE_COLUMNS = ("language", "version", "spec", "m.t.s.", "m.e.s.", "m.p.v.", "n_runs")

_VERSION_RANK = {"raw": 0, "lemmatized": 1}

# tableau10: stable, readable on white
_PALETTE = (
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
)


@dataclass(frozen=True)
class ReportRow:
    language: str
    corpus_version: str
    spec: str
    mean_statistic: float
    mean_effect_size: float
    mean_p_value: float
    n_runs: int

    def __post_init__(self):
        if self.n_runs < 1:
            raise DataError(f"row {self.key()} has n_runs < 1")

    def key(self) -> tuple[str, str, str]:
        return (self.language, self.corpus_version, self.spec)

    def to_dict(self) -> dict:
        return {
            "language": self.language,
            "corpus_version": self.corpus_version,
            "spec": self.spec,
            "mean_statistic": self.mean_statistic,
            "mean_effect_size": self.mean_effect_size,
            "mean_p_value": self.mean_p_value,
            "n_runs": self.n_runs,
        }


def _sort_key(row: ReportRow):
    return (
        row.language,
        row.spec,
        _VERSION_RANK.get(row.corpus_version, len(_VERSION_RANK)),
        row.corpus_version,
    )


@dataclass
class RunReport:
    """All rows of one report plus toolkit version and a config echo."""

    rows: list[ReportRow]
    toolkit_version: str = ""
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rows = sorted(self.rows, key=_sort_key)
        seen = set()
        for row in self.rows:
            if row.key() in seen:
                raise DataError(
                    "duplicate report row for (language, version, spec) = "
                    f"{row.key()}"
                )
            seen.add(row.key())

    def to_dict(self) -> dict:
        return {
            "rows": [r.to_dict() for r in self.rows],
            "toolkit_version": self.toolkit_version,
            "config": dict(self.config),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2) + "\n"


def build_report(
    aggregates: Iterable[AggregateResult | dict],
    toolkit_version: str = "",
    config: dict | None = None,
) -> RunReport:
    """One row per aggregate; language and corpus version come from the
    aggregated runs' embedding metadata, which must agree within each
    aggregate."""
    rows = []
    for agg in aggregates:
        if isinstance(agg, dict):
            agg = AggregateResult.from_dict(agg)
        metas = [(r.embedding_meta.language, r.embedding_meta.corpus_version)
                 for r in agg.per_run]
        if len(set(metas)) != 1:
            raise DataError(
                f"aggregate {agg.labels.name!r} mixes languages or corpus versions: "
                f"{sorted(set(metas))}"
            )
        language, version = metas[0]
        rows.append(ReportRow(
            language=language or "unknown",
            corpus_version=version or "unknown",
            spec=agg.labels.name,
            mean_statistic=agg.mean_statistic,
            mean_effect_size=agg.mean_effect_size,
            mean_p_value=agg.mean_p_value,
            n_runs=agg.n_runs,
        ))
    if not rows:
        raise DataError("no aggregate results to report")
    return RunReport(rows=rows, toolkit_version=toolkit_version, config=config or {})


def _cells(row: ReportRow) -> list[str]:
    return [
        row.language,
        row.corpus_version,
        row.spec,
        f"{row.mean_statistic:.3f}",
        f"{row.mean_effect_size:.3f}",
        f"{row.mean_p_value:.3f}",
        str(row.n_runs),
    ]


def render_tsv(report: RunReport) -> str:
    lines = ["\t".join(TABLE_COLUMNS)]
    lines.extend("\t".join(_cells(row)) for row in report.rows)
    return "\n".join(lines) + "\n"


def render_markdown(report: RunReport) -> str:
    lines = [
        "| " + " | ".join(TABLE_COLUMNS) + " |",
        "|" + "|".join(" --- " for _ in TABLE_COLUMNS) + "|",
    ]
    lines.extend("| " + " | ".join(_cells(row)) + " |" for row in report.rows)
    return "\n".join(lines) + "\n"


def render_svg(report: RunReport) -> str:
    """Grouped bar chart of the mean test statistic.

    One group per language; within a group one bar per (spec, version) slot,
    slots fixed across groups so languages align.  Bars grow from a zero
    baseline, downward for negative values, height proportional to |value|.
    Every bar carries data-key and data-value attributes for machine checks.
    """
    rows = report.rows
    languages = sorted({r.language for r in rows})
    slots = sorted(
        {(r.spec, r.corpus_version) for r in rows},
        key=lambda sv: (sv[0], _VERSION_RANK.get(sv[1], len(_VERSION_RANK)), sv[1]),
    )
    specs = sorted({r.spec for r in rows})
    by_key = {r.key(): r for r in rows}

    bar_w = 18.0
    bar_gap = 3.0
    group_pad = 26.0
    group_w = len(slots) * bar_w + (len(slots) - 1) * bar_gap + group_pad
    margin_l, margin_r, margin_t, margin_b = 64.0, 30.0, 46.0, 56.0
    plot_h = 240.0
    legend_h = 18.0 * len(slots) + 10.0
    plot_w = len(languages) * group_w
    width = margin_l + plot_w + margin_r
    height = margin_t + plot_h + margin_b + legend_h

    values = [r.mean_statistic for r in rows]
    vmin = min(0.0, min(values))
    vmax = max(0.0, max(values))
    if vmax == vmin:
        vmax = vmin + 1.0
    span = vmax - vmin
    vmax += 0.06 * span
    if vmin < 0.0:
        vmin -= 0.06 * span
    scale = plot_h / (vmax - vmin)

    def y_of(v: float) -> float:
        return margin_t + (vmax - v) * scale

    y_zero = y_of(0.0)

    out = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}" '
        f'font-family="sans-serif">'
    )
    out.append(f'<rect x="0" y="0" width="{width:.0f}" height="{height:.0f}" fill="white"/>')
    out.append(
        f'<text x="{margin_l:.1f}" y="24" font-size="15" fill="#222">'
        "Mean WEAT test statistic by language and comparison</text>"
    )

    # horizontal grid and axis labels
    for i in range(5):
        v = vmin + (vmax - vmin) * i / 4
        y = y_of(v)
        out.append(
            f'<line x1="{margin_l:.1f}" y1="{y:.4f}" x2="{margin_l + plot_w:.1f}" '
            f'y2="{y:.4f}" stroke="#ddd" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{margin_l - 8:.1f}" y="{y + 4:.4f}" font-size="11" '
            f'fill="#444" text-anchor="end">{v:.2f}</text>'
        )
    # zero baseline on top of the grid
    out.append(
        f'<line x1="{margin_l:.1f}" y1="{y_zero:.4f}" x2="{margin_l + plot_w:.1f}" '
        f'y2="{y_zero:.4f}" stroke="#444" stroke-width="1"/>'
    )

    spec_color = {s: _PALETTE[i % len(_PALETTE)] for i, s in enumerate(specs)}

    def slot_fill(spec: str, version: str) -> tuple[str, str]:
        opacity = "1.0" if _VERSION_RANK.get(version, 2) == 0 else "0.45"
        return spec_color[spec], opacity

    for gi, lang in enumerate(languages):
        gx = margin_l + gi * group_w + group_pad / 2
        for si, (spec, version) in enumerate(slots):
            row = by_key.get((lang, version, spec))
            if row is None:
                continue
            v = row.mean_statistic
            x = gx + si * (bar_w + bar_gap)
            bar_h = abs(v) * scale
            y_top = y_zero - bar_h if v >= 0 else y_zero
            color, opacity = slot_fill(spec, version)
            key = f"{lang}/{version}/{spec}"
            out.append(
                f'<rect x="{x:.4f}" y="{y_top:.4f}" width="{bar_w:.1f}" '
                f'height="{bar_h:.4f}" fill="{color}" fill-opacity="{opacity}" '
                f"data-key={quoteattr(key)} data-value={quoteattr(repr(v))}/>"
            )
        label_x = gx + (len(slots) * bar_w + (len(slots) - 1) * bar_gap) / 2
        out.append(
            f'<text x="{label_x:.4f}" y="{margin_t + plot_h + 20:.1f}" font-size="13" '
            f'fill="#222" text-anchor="middle">{escape(lang)}</text>'
        )

    # legend: one swatch per (spec, version) slot
    legend_y = margin_t + plot_h + margin_b
    for si, (spec, version) in enumerate(slots):
        color, opacity = slot_fill(spec, version)
        y = legend_y + si * 18.0
        out.append(
            f'<rect x="{margin_l:.1f}" y="{y:.1f}" width="12" height="12" '
            f'fill="{color}" fill-opacity="{opacity}"/>'
        )
        out.append(
            f'<text x="{margin_l + 18:.1f}" y="{y + 10:.1f}" font-size="11" '
            f'fill="#333">{escape(f"{spec} ({version})")}</text>'
        )

    out.append("</svg>")
    return "\n".join(out) + "\n"
