"""Experiment runner and reporting surface.

Subcommands:

* ``run``  - execute experiment 1 (linear gradients, linear retina, SVD
  analysis) or experiment 2 (tanh edges, quadratic retina, curvilinear
  projection analysis) and write CSV / JSON / SVG artifacts.
* ``plot`` - re-emit the SVG plots from a saved report directory.

Every stochastic stage draws from a stream derived from (master seed,
purpose tag, input index), so output bytes depend only on the config and
serial/parallel execution produce identical artifacts.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from ._kernels import active_backend
from .cca import (
    CcaConfig,
    NonlinearVerdict,
    change_direction_from_projection,
    characterize_nonlinear,
)
from .characterize import (
    Characterization,
    PatchMap,
    VERDICT_EDGE,
    VERDICT_NO_INVARIANCE,
    VERDICT_UNIFORM,
    build_topological_map,
)
from .env import (
    DOMAIN_HALF_WIDTH,
    VisualInput,
    input_from_json,
    input_to_json,
    sample_linear_ensemble,
    sample_tanh_ensemble,
)
from .errors import (
    DegenerateDirectionError,
    EmptyMapError,
    InvalidConfigError,
    SmcError,
)
from .explore import collect_variations, sample_motors
from .plots import emit_plots
from .seeding import substream
from .sensor import Retina, build_retina
from .svd_analysis import (
    LinearVerdict,
    characterize_linear,
    motor_direction,
    svd_of_batch,
)

FORMAT_TAG = "smc-invariants v1"
_SPECTRUM_LEN = 10


@dataclass(frozen=True)
class RunConfig:
    """Everything a run depends on; defaults follow the reference setup."""

    experiment: int = 1
    n_inputs: int = 2000
    k_motors: int = 1000
    n_cells: int = 25
    sensor_diameter: float = 4.0
    exploration_diameter: float = 6.0
    master_seed: int = 0
    tau_rel: float | None = None
    tau_abs: float | None = None
    cca: CcaConfig = field(default_factory=CcaConfig)
    output_dir: str = "out"
    jobs: int = 1
    fresh_retina_per_input: bool = False
    plot_samples: int = 3
    map_u_bins: int = 10
    map_angle_bins: int = 10

    def __post_init__(self):
        if self.experiment not in (1, 2):
            raise InvalidConfigError("experiment must be 1 or 2")
        for name in ("n_inputs", "k_motors", "n_cells", "jobs", "map_u_bins", "map_angle_bins"):
            if getattr(self, name) < 1:
                raise InvalidConfigError(f"{name} must be >= 1")
        if self.plot_samples < 0:
            raise InvalidConfigError("plot_samples must be >= 0")
        for name in ("sensor_diameter", "exploration_diameter"):
            if getattr(self, name) <= 0.0:
                raise InvalidConfigError(f"{name} must be > 0")
        reach = (self.sensor_diameter + self.exploration_diameter) / 2.0
        if reach > DOMAIN_HALF_WIDTH:
            raise InvalidConfigError(
                "sensor_diameter/2 + exploration_diameter/2 exceeds the "
                f"domain half-width {DOMAIN_HALF_WIDTH:g}"
            )

    def to_json(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = v.to_json() if f.name == "cca" else v
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        kwargs = {}
        for key, value in obj.items():
            if key not in known:
                raise InvalidConfigError(f"unknown config field: {key}")
            kwargs[key] = CcaConfig.from_json(value) if key == "cca" else value
        return cls(**kwargs)


@dataclass
class RunReport:
    """In-memory result of a run (or of loading a saved run directory)."""

    config: RunConfig
    retina: Retina | None
    inputs: list[VisualInput]
    characterizations: list[Characterization]
    spectra: list[np.ndarray]
    z1_angles: list[float | None]
    patch_map: PatchMap | None
    timing: dict[str, float] = field(default_factory=dict)


def _characterize_one(
    config: RunConfig, retina: Retina, inp: VisualInput, input_id: int
):
    """Characterize one input with its private random stream."""
    rng = substream(config.master_seed, "input", input_id)
    motors = sample_motors(config.k_motors, rng)
    batch = collect_variations(retina, inp, motors)
    analysis = svd_of_batch(batch, config.tau_rel, config.tau_abs)
    spectrum = np.asarray(analysis.singular_values[:_SPECTRUM_LEN])

    if config.experiment == 1:
        verdict = characterize_linear(batch, analysis=analysis)
        if verdict.significant_count == 0:
            label = VERDICT_UNIFORM
        elif verdict.significant_count == 1 and verdict.invariant_angle is not None:
            label = VERDICT_EDGE
        else:
            label = VERDICT_NO_INVARIANCE
        char = Characterization(
            input_id=input_id,
            regime="linear",
            uniformity=verdict.uniformity,
            edgeness_sigma=verdict.edgeness_sigma,
            p_star=None,
            invariant_angle=verdict.invariant_angle,
            verdict=label,
            detail=verdict,
        )
        z1 = None
        if analysis.significant_count >= 1:
            try:
                z1 = motor_direction(batch, analysis, 1).angle
            except DegenerateDirectionError:
                z1 = None
    else:
        verdict = characterize_nonlinear(
            batch, config.cca, rng, config.tau_rel, config.tau_abs
        )
        if verdict.p_star is None:
            label = VERDICT_UNIFORM
        elif verdict.p_star == 1 and verdict.invariant_angle is not None:
            label = VERDICT_EDGE
        else:
            label = VERDICT_NO_INVARIANCE
        char = Characterization(
            input_id=input_id,
            regime="nonlinear",
            uniformity=verdict.uniformity,
            edgeness_sigma=None,
            p_star=verdict.p_star,
            invariant_angle=verdict.invariant_angle,
            verdict=label,
            detail=verdict,
        )
        z1 = None
        if verdict.projection is not None:
            try:
                z1 = change_direction_from_projection(batch, verdict.projection).angle
            except DegenerateDirectionError:
                z1 = None
    return char, spectrum, z1


def run_experiment(config: RunConfig) -> RunReport:
    """Run one experiment end to end and write all artifacts.

    Builds the retina (linear mode for experiment 1, quadratic for 2),
    samples the input ensemble, characterizes every input in the matching
    regime, assembles the patch map, and writes CSVs, the manifest, the
    patch-map JSON, and the SVG plots to config.output_dir.
    """
    t_start = time.perf_counter()
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    mode = "linear" if config.experiment == 1 else "quadratic"
    shared_retina = None
    if not config.fresh_retina_per_input:
        shared_retina = build_retina(
            config.n_cells,
            config.sensor_diameter,
            mode,
            substream(config.master_seed, "retina"),
        )

    sampler = sample_linear_ensemble if config.experiment == 1 else sample_tanh_ensemble
    inputs = sampler(config.n_inputs, substream(config.master_seed, "ensemble"))

    def job(i: int):
        retina = shared_retina
        if retina is None:
            retina = build_retina(
                config.n_cells,
                config.sensor_diameter,
                mode,
                substream(config.master_seed, "retina", i),
            )
        return _characterize_one(config, retina, inputs[i], i)

    t_chars = time.perf_counter()
    if config.jobs == 1:
        results = [job(i) for i in range(config.n_inputs)]
    else:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(job, range(config.n_inputs)))
    characterizations = [r[0] for r in results]
    spectra = [r[1] for r in results]
    z1_angles = [r[2] for r in results]
    timing = {"characterize_s": time.perf_counter() - t_chars}

    try:
        patch_map = build_topological_map(
            characterizations, config.map_u_bins, config.map_angle_bins
        )
    except EmptyMapError:
        patch_map = None

    report = RunReport(
        config=config,
        retina=shared_retina,
        inputs=inputs,
        characterizations=characterizations,
        spectra=spectra,
        z1_angles=z1_angles,
        patch_map=patch_map,
        timing=timing,
    )
    _write_report(report, out_dir)
    emit_plots(report, out_dir)
    report.timing["total_s"] = time.perf_counter() - t_start
    return report


def _fmt_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _write_report(report: RunReport, out_dir: Path) -> None:
    config = report.config
    lines = [f"# {FORMAT_TAG}"]
    if config.experiment == 1:
        lines.append("input_id,sigma1,sigma2,significant_count,invariant_angle_rad")
        for char in report.characterizations:
            det = char.detail
            lines.append(
                ",".join(
                    [
                        str(char.input_id),
                        _fmt_cell(det.uniformity),
                        _fmt_cell(det.edgeness_sigma),
                        str(det.significant_count),
                        _fmt_cell(det.invariant_angle),
                    ]
                )
            )
    else:
        err_cols = [f"err{p}" for p in config.cca.p_list]
        lines.append("input_id," + ",".join(err_cols) + ",p_star,invariant_angle_rad")
        for char in report.characterizations:
            det = char.detail
            errs = dict(det.err_curve)
            row = [str(char.input_id)]
            row += [_fmt_cell(errs.get(p)) for p in config.cca.p_list]
            row.append(_fmt_cell(det.p_star))
            row.append(_fmt_cell(det.invariant_angle))
            lines.append(",".join(row))
    (out_dir / "characterizations.csv").write_text("\n".join(lines) + "\n")

    n_sigma = max((len(s) for s in report.spectra), default=0)
    lines = [f"# {FORMAT_TAG}"]
    lines.append(
        "input_id,angle_z1_rad," + ",".join(f"sigma_{j + 1}" for j in range(n_sigma))
    )
    for char, spectrum, z1 in zip(
        report.characterizations, report.spectra, report.z1_angles
    ):
        row = [str(char.input_id), _fmt_cell(z1)]
        row += [_fmt_cell(v) for v in spectrum]
        row += [""] * (n_sigma - len(spectrum))
        lines.append(",".join(row))
    (out_dir / "spectra.csv").write_text("\n".join(lines) + "\n")

    if report.patch_map is not None:
        map_json = report.patch_map.to_json()
    else:
        map_json = {"u_edges": [], "angle_edges": [], "cells": []}
    (out_dir / "patch_map.json").write_text(
        json.dumps(map_json, indent=2, sort_keys=True) + "\n"
    )

    manifest = {
        "format": FORMAT_TAG,
        "package_version": __version__,
        "backend": active_backend(),
        "config": config.to_json(),
        "retina": None if report.retina is None else report.retina.to_json(),
        "inputs": [input_to_json(inp) for inp in report.inputs],
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )


def _parse_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    lines = path.read_text().splitlines()
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]


def load_report(report_dir) -> RunReport:
    """Rebuild a RunReport from a saved run directory (for plotting)."""
    report_dir = Path(report_dir)
    manifest = json.loads((report_dir / "manifest.json").read_text())
    config = RunConfig.from_json(manifest["config"])
    retina = None
    if manifest.get("retina") is not None:
        retina = Retina.from_json(manifest["retina"])
    inputs = [input_from_json(obj) for obj in manifest["inputs"]]

    header, rows = _parse_csv(report_dir / "characterizations.csv")
    characterizations = []
    for row in rows:
        rec = dict(zip(header, row))
        input_id = int(rec["input_id"])
        angle = float(rec["invariant_angle_rad"]) if rec["invariant_angle_rad"] else None
        if config.experiment == 1:
            det = LinearVerdict(
                uniformity=float(rec["sigma1"]),
                edgeness_sigma=float(rec["sigma2"]),
                invariant_angle=angle,
                significant_count=int(rec["significant_count"]),
            )
            if det.significant_count == 0:
                label = VERDICT_UNIFORM
            elif det.significant_count == 1 and angle is not None:
                label = VERDICT_EDGE
            else:
                label = VERDICT_NO_INVARIANCE
            characterizations.append(
                Characterization(
                    input_id=input_id,
                    regime="linear",
                    uniformity=det.uniformity,
                    edgeness_sigma=det.edgeness_sigma,
                    p_star=None,
                    invariant_angle=angle,
                    verdict=label,
                    detail=det,
                )
            )
        else:
            curve = tuple(
                (p, float(rec[f"err{p}"])) for p in config.cca.p_list if rec[f"err{p}"]
            )
            p_star = int(rec["p_star"]) if rec["p_star"] else None
            det = NonlinearVerdict(
                uniformity=float(rec["err0"]),
                p_star=p_star,
                invariant_angle=angle,
                err_curve=curve,
            )
            if p_star is None:
                label = VERDICT_UNIFORM
            elif p_star == 1 and angle is not None:
                label = VERDICT_EDGE
            else:
                label = VERDICT_NO_INVARIANCE
            characterizations.append(
                Characterization(
                    input_id=input_id,
                    regime="nonlinear",
                    uniformity=det.uniformity,
                    edgeness_sigma=None,
                    p_star=p_star,
                    invariant_angle=angle,
                    verdict=label,
                    detail=det,
                )
            )

    header, rows = _parse_csv(report_dir / "spectra.csv")
    spectra, z1_angles = [], []
    for row in rows:
        rec = dict(zip(header, row))
        z1_angles.append(float(rec["angle_z1_rad"]) if rec["angle_z1_rad"] else None)
        values = [float(v) for k, v in rec.items() if k.startswith("sigma_") and v]
        spectra.append(np.asarray(values))

    map_json = json.loads((report_dir / "patch_map.json").read_text())
    patch_map = PatchMap.from_json(map_json) if map_json["cells"] else None

    return RunReport(
        config=config,
        retina=retina,
        inputs=inputs,
        characterizations=characterizations,
        spectra=spectra,
        z1_angles=z1_angles,
        patch_map=patch_map,
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smc-invariants",
        description="Characterize visual inputs from sensorimotor exploration",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run experiment 1 or 2")
    run_p.add_argument("--experiment", type=int, choices=(1, 2))
    run_p.add_argument("--n-inputs", type=int, dest="n_inputs")
    run_p.add_argument("--k", type=int, dest="k_motors")
    run_p.add_argument("--seed", type=int, dest="master_seed")
    run_p.add_argument("--out", dest="output_dir")
    run_p.add_argument("--config", dest="config_file", help="JSON config file")
    run_p.add_argument("--jobs", type=int, dest="jobs")
    run_p.add_argument(
        "--fresh-retina-per-input",
        action="store_true",
        default=None,
        dest="fresh_retina_per_input",
    )
    run_p.add_argument("--plot-samples", type=int, dest="plot_samples")

    plot_p = sub.add_parser("plot", help="re-emit SVG plots from a saved run")
    plot_p.add_argument("--report", required=True, help="run output directory")
    plot_p.add_argument("--out", help="plot output directory (default: report dir)")
    return parser


_RUN_OVERRIDES = (
    "experiment",
    "n_inputs",
    "k_motors",
    "master_seed",
    "output_dir",
    "jobs",
    "fresh_retina_per_input",
    "plot_samples",
)


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.config_file:
        try:
            obj = json.loads(Path(args.config_file).read_text())
        except json.JSONDecodeError as exc:
            raise InvalidConfigError(f"config file is not valid JSON: {exc}") from exc
        config = RunConfig.from_json(obj)
    else:
        config = RunConfig()
    overrides = {
        name: getattr(args, name)
        for name in _RUN_OVERRIDES
        if getattr(args, name) is not None
    }
    return replace(config, **overrides) if overrides else config


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = _config_from_args(args)
            report = run_experiment(config)
            n_edges = sum(
                1 for c in report.characterizations if c.verdict == VERDICT_EDGE
            )
            print(
                f"experiment {config.experiment}: characterized "
                f"{len(report.characterizations)} inputs "
                f"({n_edges} edges) in {report.timing['total_s']:.2f}s "
                f"[backend={active_backend()}] -> {config.output_dir}"
            )
        elif args.command == "plot":
            report = load_report(args.report)
            paths = emit_plots(report, args.out or args.report)
            print(f"wrote {len(paths)} SVG files -> {args.out or args.report}")
    except InvalidConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3
    except SmcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
