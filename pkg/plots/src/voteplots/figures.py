"""Deterministic figure rendering from votemetrics CSV files.

Three figure kinds cover the reporting needs: per-rule score boxplots (optionally
faceted by candidate count, seat count, year, or alpha), sigma_iia vs sigma_u
scatterplots, and bootstrap confidence-interval panels.  Rendering is a pure
function of the CSV bytes: fixed rule order, fixed y-range (default [0.4, 1.0]
with clipped points annotated), no timestamps, so identical inputs give
identical image files.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import pandas as pd

__all__ = ["FigureSpec", "SchemaError", "render"]

RULE_ORDER = ("borda", "3-approval", "2-approval", "plurality", "stv",
              "optimal-u")
METRICS = ("sigma_iia", "sigma_u")
KINDS = ("boxplot", "scatter", "ci_panel")


class SchemaError(ValueError):
    """The input CSV is missing a column the figure needs."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    input: Path
    output: Path
    facets: tuple[str, ...] = ()
    y_range: tuple[float, float] = (0.4, 1.0)
    metrics: tuple[str, ...] = METRICS

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}")


def rule_sort_key(rule: str) -> tuple[int, str]:
    base = "stv" if rule.startswith("stv") else rule
    try:
        return (RULE_ORDER.index(base), rule)
    except ValueError:
        return (len(RULE_ORDER), rule)


def _load(spec: FigureSpec, required: tuple[str, ...]) -> pd.DataFrame:
    frame = pd.read_csv(spec.input, comment="#")
    if frame.empty:
        raise SchemaError(f"{spec.input}: no data rows")
    for column in required:
        if column not in frame.columns:
            raise SchemaError(f"{spec.input}: missing column {column!r}")
    if "year" in spec.facets and "year" not in frame.columns:
        if "election_id" not in frame.columns:
            raise SchemaError(f"{spec.input}: missing column 'election_id' "
                              "(needed to derive 'year')")
        frame["year"] = frame["election_id"].map(_year_of)
    for facet in spec.facets:
        if facet not in frame.columns:
            raise SchemaError(f"{spec.input}: missing column {facet!r}")
    return frame


def _year_of(election_id: str):
    match = re.search(r"(\d{4})$", str(election_id))
    return int(match.group(1)) if match else -1


def _facet_groups(frame: pd.DataFrame, facets: tuple[str, ...]):
    if not facets:
        return [("all", frame)]
    grouped = frame.groupby(list(facets), sort=True)
    out = []
    for key, group in grouped:
        if not isinstance(key, tuple):
            key = (key,)
        label = ", ".join(f"{f}={v}" for f, v in zip(facets, key))
        out.append((label, group))
    return out


def _clip_annotate(ax, values, lo: float, hi: float) -> None:
    below = int((values < lo).sum())
    above = int((values > hi).sum())
    notes = []
    if below:
        notes.append(f"{below} below")
    if above:
        notes.append(f"{above} above")
    if notes:
        ax.annotate("clipped: " + ", ".join(notes), xy=(0.99, 0.02),
                    xycoords="axes fraction", ha="right", fontsize=7,
                    color="dimgray")


def _render_boxplot(spec: FigureSpec, frame: pd.DataFrame, fig) -> None:
    groups = _facet_groups(frame, spec.facets)
    lo, hi = spec.y_range
    nrows, ncols = len(spec.metrics), len(groups)
    axes = fig.subplots(nrows, ncols, squeeze=False, sharey=True)
    for row, metric in enumerate(spec.metrics):
        for col, (label, group) in enumerate(groups):
            ax = axes[row][col]
            rules = sorted(group["rule"].unique(), key=rule_sort_key)
            data = [group.loc[group["rule"] == rule, metric]
                    .clip(lo, hi).to_numpy() for rule in rules]
            ax.boxplot(data, tick_labels=rules)
            ax.set_ylim(lo, hi)
            ax.tick_params(axis="x", rotation=45, labelsize=7)
            if col == 0:
                ax.set_ylabel(metric)
            if row == 0:
                ax.set_title(label, fontsize=9)
            _clip_annotate(ax, group[metric], lo, hi)


def _render_scatter(spec: FigureSpec, frame: pd.DataFrame, fig) -> None:
    groups = _facet_groups(frame, spec.facets)
    lo, hi = spec.y_range
    axes = fig.subplots(1, len(groups), squeeze=False, sharey=True)[0]
    for ax, (label, group) in zip(axes, groups):
        rules = sorted(group["rule"].unique(), key=rule_sort_key)
        for rule in rules:
            sub = group[group["rule"] == rule]
            ax.scatter(sub["sigma_iia"].clip(lo, hi),
                       sub["sigma_u"].clip(lo, hi),
                       s=8, alpha=0.5, label=rule)
        ax.set_xlim(lo, hi)
        ax.set_ylim(lo, hi)
        ax.set_xlabel("sigma_iia")
        ax.set_title(label, fontsize=9)
        _clip_annotate(ax, pd.concat([group["sigma_iia"], group["sigma_u"]]),
                       lo, hi)
    axes[0].set_ylabel("sigma_u")
    axes[-1].legend(fontsize=7, loc="lower left")


def _render_ci_panel(spec: FigureSpec, frame: pd.DataFrame, fig) -> None:
    metrics = [m for m in spec.metrics if m in set(frame["metric"])]
    if not metrics:
        raise SchemaError(f"{spec.input}: no rows for metrics {spec.metrics}")
    groups = _facet_groups(frame, spec.facets)
    lo, hi = spec.y_range
    axes = fig.subplots(len(metrics), len(groups), squeeze=False, sharey=True)
    for row, metric in enumerate(metrics):
        for col, (label, group) in enumerate(groups):
            ax = axes[row][col]
            sub = group[group["metric"] == metric]
            agg = sub.groupby("rule")[["mean", "lo", "hi"]].mean()
            rules = sorted(agg.index, key=rule_sort_key)
            xs = range(len(rules))
            means = agg.loc[rules, "mean"].clip(lo, hi)
            err_lo = (agg.loc[rules, "mean"] - agg.loc[rules, "lo"]).clip(lower=0)
            err_hi = (agg.loc[rules, "hi"] - agg.loc[rules, "mean"]).clip(lower=0)
            ax.errorbar(xs, means, yerr=[err_lo, err_hi], fmt="o",
                        capsize=3, markersize=4)
            ax.set_xticks(list(xs))
            ax.set_xticklabels(rules, rotation=45, fontsize=7)
            ax.set_ylim(lo, hi)
            if col == 0:
                ax.set_ylabel(metric)
            if row == 0:
                ax.set_title(label, fontsize=9)


REQUIRED = {
    "boxplot": ("rule",),
    "scatter": ("rule", "sigma_iia", "sigma_u"),
    "ci_panel": ("rule", "metric", "mean", "lo", "hi"),
}


def render(spec: FigureSpec) -> Path:
    """Render one figure; returns the output path."""
    required = REQUIRED[spec.kind]
    if spec.kind == "boxplot":
        required = required + tuple(m for m in spec.metrics)
    frame = _load(spec, required)
    n_groups = max(1, len(_facet_groups(frame, spec.facets)))
    width = max(6.0, 2.6 * n_groups)
    fig = plt.figure(figsize=(width, 6.0), dpi=120)
    try:
        if spec.kind == "boxplot":
            _render_boxplot(spec, frame, fig)
        elif spec.kind == "scatter":
            _render_scatter(spec, frame, fig)
        else:
            _render_ci_panel(spec, frame, fig)
        fig.tight_layout()
        spec.output.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(spec.output, metadata={"Software": "voteplots"})
    finally:
        plt.close(fig)
    return spec.output
