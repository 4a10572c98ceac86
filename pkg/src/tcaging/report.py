"""Run the full aging analysis and write the report bundle."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, dataclass, field

from . import curves, lifespan, regfit, smoothing
from .ceo import CeoDataset, filter_allfail_sessions, format_timestamp
from .svgplot import PlotStyle, emit_svg

SCHEMA_VERSION = "1"
FORMATS = ("csv", "json", "svg")


@dataclass(frozen=True)
class RunConfig:
    grace_days: int = lifespan.DEFAULT_GRACE_DAYS
    min_support: int = curves.DEFAULT_MIN_SUPPORT
    filter_allfail: bool = True
    min_session_size: int = 2
    span: float = 0.15
    confidence: float = 0.95
    smooth_degree: int = 1
    degrees: tuple[int, ...] = (1, 2)
    exponential: bool = False
    grid_max: int = regfit.DEFAULT_GRID_MAX
    p_threshold: float = regfit.DEFAULT_P_THRESHOLD
    yearly_mode: str = "pooled"
    bin_width: int = 30
    percent: bool = False
    formats: tuple[str, ...] = FORMATS

    def smooth_config(self) -> smoothing.SmoothConfig:
        return smoothing.SmoothConfig(self.span, self.smooth_degree, self.confidence)

    def families(self) -> list:
        return list(self.degrees) + (["exponential"] if self.exponential else [])

    def as_dict(self) -> dict:
        d = asdict(self)
        d["degrees"] = list(self.degrees)
        d["formats"] = list(self.formats)
        return d


@dataclass
class ReportBundle:
    report: dict
    dataset: CeoDataset
    spans: list
    activation: curves.RateSeries
    hazard: curves.RateSeries
    activation_smooth: smoothing.SmoothedCurve
    hazard_smooth: smoothing.SmoothedCurve
    growth: list
    histogram: dict
    models: list = field(default_factory=list)


def json_safe(obj):
    """Replace non-finite floats (e.g. t-values of exact fits) with None."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_safe(v) for v in obj]
    return obj


def _series_summary(series: curves.RateSeries) -> dict:
    return {
        "points": len(series),
        "supported_points": len(series.supported()),
        "min_support": series.min_support,
    }


def _smooth_summary(curve: smoothing.SmoothedCurve) -> dict:
    return {
        "span": curve.config.span,
        "degree": curve.config.degree,
        "confidence": curve.config.confidence,
        "window_points": curve.window,
        "residual_sigma": curve.sigma,
        "band": smoothing.BAND_NOTE,
    }


def analyze(dataset: CeoDataset, config: RunConfig = RunConfig()) -> ReportBundle:
    removed = 0
    if config.filter_allfail:
        dataset, removed = filter_allfail_sessions(dataset, config.min_session_size)
    spans = lifespan.determine_death(dataset, config.grace_days)
    summary = lifespan.aliveness_summary(spans)
    histogram = lifespan.age_distribution(spans, config.bin_width)
    growth = lifespan.growth_curve(spans)

    activation = curves.activation_series(dataset, spans, config.min_support)
    hazard = curves.hazard_series(dataset, spans, config.min_support)
    act_smooth = smoothing.smooth(activation, config.smooth_config())
    haz_smooth = smoothing.smooth(hazard, config.smooth_config())
    models = regfit.fit_report(hazard, config.families(), config.grid_max, config.p_threshold)
    yearly = curves.yearly_failure_rates(dataset, spans, config.yearly_mode, config.min_support)

    report = {
        "schema_version": SCHEMA_VERSION,
        "config": config.as_dict(),
        "dataset": {
            "test_cases": len(dataset.creations),
            "executions": len(dataset.executions),
            "t1": format_timestamp(dataset.t1),
            "tM": format_timestamp(dataset.tM),
            "rejected_before_creation": dataset.rejected_before_creation,
            "duplicates_removed": dataset.duplicates_removed,
            "allfail_sessions_removed": removed,
        },
        "aliveness": summary.as_dict(),
        "yearly_failure_rates": {
            "mode": config.yearly_mode,
            "rates": [{"year": y, "rate": r} for y, r in yearly],
        },
        "series": {"activation": _series_summary(activation), "hazard": _series_summary(hazard)},
        "smoothing": {"activation": _smooth_summary(act_smooth), "hazard": _smooth_summary(haz_smooth)},
        "models": [m.as_dict(config.percent) for m in models],
    }
    report = json_safe(report)
    return ReportBundle(report, dataset, spans, activation, hazard, act_smooth, haz_smooth, growth, histogram, models)


def _write_pairs(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_bundle(bundle: ReportBundle, out_dir, formats=FORMATS) -> list[str]:
    """Write the requested formats into ``out_dir``; returns the file names."""
    os.makedirs(out_dir, exist_ok=True)
    written = []

    def target(name):
        written.append(name)
        return os.path.join(out_dir, name)

    if "csv" in formats:
        for name, series in (("activation", bundle.activation), ("hazard", bundle.hazard)):
            with open(target(f"{name}.csv"), "w", newline="", encoding="utf-8") as fh:
                curves.write_series_csv(series, fh)
        for name, curve in (("activation", bundle.activation_smooth), ("hazard", bundle.hazard_smooth)):
            with open(target(f"{name}_smooth.csv"), "w", newline="", encoding="utf-8") as fh:
                smoothing.write_smooth_csv(curve, fh)
        _write_pairs(target("growth.csv"), ["day", "count"], bundle.growth)
        _write_pairs(target("age_histogram.csv"), ["day", "count"], sorted(bundle.histogram.items()))
    if "svg" in formats:
        plots = (
            ("activation", bundle.activation, bundle.activation_smooth, "activation rate"),
            ("hazard", bundle.hazard, bundle.hazard_smooth, "failure rate"),
        )
        for name, series, curve, label in plots:
            style = PlotStyle(title=f"{label} by test case age", y_label=label)
            with open(target(f"{name}.svg"), "w", encoding="utf-8") as fh:
                fh.write(emit_svg(series, curve, style))
    if "json" in formats:
        with open(target("report.json"), "w", encoding="utf-8") as fh:
            json.dump(bundle.report, fh, indent=2, sort_keys=True, allow_nan=False)
            fh.write("\n")
    return written
