"""Bundled figure experiments: one CSV and one SVG per figure."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .config import ExperimentConfig, apply_overrides, load_bundled
from .runner import CSV_HEADER, ExperimentResult, hindsight_reference, oracle_for_config, run_experiment
from .svg import result_chart

FIGURE_IDS = tuple(range(1, 9))


@dataclass
class FigureOutput:
    figure_id: int
    labels: list
    results: list
    reference: tuple[str, float]
    csv_path: Path | None = None
    svg_path: Path | None = None

    def result(self, label: str) -> ExperimentResult:
        return self.results[self.labels.index(label)]


def figure_spec(figure_id: int) -> dict:
    figs = load_bundled("figures.json")["figures"]
    key = str(figure_id)
    if key not in figs:
        raise KeyError(f"unknown figure id {figure_id}; expected one of 1..8")
    spec = dict(figs[key])
    if "like" in spec:
        spec = {**figs[spec["like"]], **{k: v for k, v in spec.items() if k != "like"}}
    return spec


def figure_configs(figure_id: int, overrides: dict | None = None):
    """``(labels, configs, reference_kind, title)`` for a bundled figure."""
    spec = figure_spec(figure_id)
    base = load_bundled(spec["base"])
    apply_overrides(base, spec.get("common", {}))
    apply_overrides(base, overrides or {})
    labels, cfgs = [], []
    for curve in spec["curves"]:
        doc = ExperimentConfig.from_dict(base).with_overrides(curve["set"]).raw
        doc["name"] = f"fig{figure_id}_{curve['label']}"
        labels.append(curve["label"])
        cfgs.append(ExperimentConfig.from_dict(doc))
    return labels, cfgs, spec["reference"], spec["title"]


def run_figure_suite(figure_id: int, outdir=None, overrides: dict | None = None,
                     oracle_samples: int = 1_000_000) -> FigureOutput:
    """Run every curve of a figure; write ``fig<id>.csv``/``fig<id>.svg`` into ``outdir``.

    The reference line is the oracle bound for i.i.d. figures and the mean
    hindsight best-fixed utility for the Markov ones.
    """
    labels, cfgs, ref_kind, title = figure_configs(figure_id, overrides)
    if ref_kind == "u_star":
        ref = ("U*", oracle_for_config(cfgs[0], oracle_samples)[1])
    else:
        ref = ("hindsight best fixed", hindsight_reference(cfgs[0])[0])
    results = [run_experiment(cfg, u_star=ref[1]) for cfg in cfgs]
    out = FigureOutput(figure_id, labels, results, ref)
    if outdir is not None:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        out.csv_path = outdir / f"fig{figure_id}.csv"
        out.svg_path = outdir / f"fig{figure_id}.svg"
        with open(out.csv_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("curve",) + CSV_HEADER)
            for label, res in zip(labels, results):
                for r in res.rows():
                    w.writerow([label, r.slot, repr(r.mean_avg_utility), repr(r.stderr),
                                repr(r.mean_Q), repr(r.mean_E), r.violations, r.scaled_count])
        out.svg_path.write_text(result_chart(results, labels, title=title, reference=ref))
    return out
