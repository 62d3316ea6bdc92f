"""Command-line front end: config parsing, experiment presets, file emission.

Subcommands:
    run         one experiment from a JSON config
    preset      a named bundle of experiments sharing one CSV
    complexity  the per-instant operation-count table at a given (M, J, L)
    topology    the communication graph of a config or preset, as an edge list

Exit status is 0 on success, 2 for configuration problems (bad JSON,
unknown keys, out-of-range values, unknown preset), 3 for runtime
failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import re
import sys
from pathlib import Path

from .diffusion import Protocol, to_edge_list
from .engines import Engine, EngineParams
from .penalties import PenaltyParams
from .simulator import (
    ComplexityInputs,
    ComplexityMethod,
    ExperimentConfig,
    MsdTrace,
    SparsitySpec,
    TopologySpec,
    complexity_eval,
    run_experiment,
)

__all__ = [
    "ConfigError",
    "parse_config",
    "preset_configs",
    "run_preset",
    "emit_complexity_table",
    "write_traces_csv",
    "main",
]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

PRESET_NAMES = ("fig2-cta", "fig3-atc", "fig4-compare")

_MSD_DEFINITION = (
    "10*log10((1/N) * sum_k ||w0 - w_k||^2), averaged over runs in the linear domain"
)
_SNR_DEFINITION = "10*log10(||w0||^2 * input_variance / noise_variance)"


class ConfigError(ValueError):
    """Invalid configuration: bad syntax, unknown key, or out-of-range value."""


# ---------------------------------------------------------------------------
# config parsing


def _require_mapping(value, key: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{key} must be an object, got {type(value).__name__}")
    return value


def _take(data: dict, known: dict, prefix: str = ""):
    """Split data into known fields, rejecting anything unrecognized."""
    out = {}
    for key, value in data.items():
        dotted = f"{prefix}{key}"
        if key not in known:
            raise ConfigError(f"unknown key: {dotted}")
        out[known[key] or key] = value
    return out


def _build(section: str, factory, kwargs: dict):
    try:
        return factory(**kwargs)
    except (ValueError, TypeError) as exc:
        prefix = f"{section}: " if section else ""
        raise ConfigError(f"{prefix}{exc}") from exc


def parse_config(text: str) -> ExperimentConfig:
    """Parse a JSON experiment description into a validated config.

    Unknown keys are rejected by their dotted path; range violations
    surface the offending field in the message.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    data = _require_mapping(data, "config")

    top = _take(
        data,
        {
            "engine": None,
            "protocol": None,
            "nodes": None,
            "taps": None,
            "iterations": None,
            "runs": None,
            "snr_db": None,
            "input_variance": None,
            "seed": None,
            "label": None,
            "sparsity": None,
            "topology": None,
            "engine_params": None,
        },
    )
    if "engine" not in top:
        raise ConfigError("missing required key: engine")
    if "protocol" not in top:
        raise ConfigError("missing required key: protocol")

    kwargs = dict(top)

    if "sparsity" in kwargs:
        section = _require_mapping(kwargs.pop("sparsity"), "sparsity")
        fields = _take(section, {"kind": None, "active_taps": None}, "sparsity.")
        kwargs["sparsity"] = _build("sparsity", SparsitySpec, fields)

    if "topology" in kwargs:
        section = _require_mapping(kwargs.pop("topology"), "topology")
        fields = _take(
            section, {"extra_edges": None, "seed": None, "combiner": None}, "topology."
        )
        kwargs["topology"] = _build("topology", TopologySpec, fields)

    if "engine_params" in kwargs:
        section = _require_mapping(kwargs.pop("engine_params"), "engine_params")
        fields = _take(
            section,
            {
                "forgetting": None,
                "step_scale": None,
                "max_cg_iters": None,
                "cg_tol": None,
                "diag_load": None,
                "lms_step": None,
                "penalty": None,
            },
            "engine_params.",
        )
        if "penalty" in fields:
            sub = _require_mapping(fields.pop("penalty"), "engine_params.penalty")
            pfields = _take(
                sub,
                {"kind": None, "weight": None, "shape": None, "printed_form": None},
                "engine_params.penalty.",
            )
            fields["penalty"] = _build("engine_params.penalty", PenaltyParams, pfields)
        kwargs["params"] = _build("engine_params", EngineParams, fields)

    for key in ("engine", "protocol"):
        try:
            kwargs[key] = (Engine if key == "engine" else Protocol)(str(kwargs[key]).lower())
        except ValueError as exc:
            raise ConfigError(f"{key}: {kwargs[key]!r} is not a recognized {key}") from exc

    return _build("", ExperimentConfig, kwargs)


def _apply_overrides(config: ExperimentConfig, args) -> ExperimentConfig:
    updates = {}
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "runs", None) is not None:
        updates["runs"] = args.runs
    if getattr(args, "iterations", None) is not None:
        updates["iterations"] = args.iterations
    if not updates:
        return config
    try:
        return dataclasses.replace(config, **updates)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# presets


def preset_configs(name: str, seed: int = 0, runs: int = 20, iterations: int = 1000):
    """Experiment bundle for one named comparison, on a 2-sparse system."""
    if name not in PRESET_NAMES:
        raise ConfigError(
            f"unknown preset: {name!r} (choose from {', '.join(PRESET_NAMES)})"
        )
    common = dict(
        nodes=20,
        taps=10,
        iterations=iterations,
        runs=runs,
        snr_db=30.0,
        seed=seed,
        sparsity=SparsitySpec(kind="sparse", active_taps=2),
    )

    def entry(engine, protocol, penalty_kind="none"):
        return ExperimentConfig(
            engine=engine,
            protocol=protocol,
            params=EngineParams(penalty=PenaltyParams(kind=penalty_kind)),
            **common,
        )

    if name in ("fig2-cta", "fig3-atc"):
        protocol = "cta" if name == "fig2-cta" else "atc"
        return [
            entry("cg", protocol),
            entry("cg", protocol, "za"),
            entry("cg", protocol, "rza"),
            entry("mcg", protocol),
            entry("mcg", protocol, "za"),
            entry("mcg", protocol, "rza"),
        ]
    return [
        entry("cg", "cta", "rza"),
        entry("cg", "atc", "rza"),
        entry("mcg", "cta", "rza"),
        entry("mcg", "atc", "rza"),
        entry("lms", "atc"),
        entry("rls", "atc"),
    ]


def run_preset(name: str, out_dir=None, seed: int = 0, runs: int = 20, iterations: int = 1000):
    """Execute a preset's experiments.

    Returns (traces, paths); paths is empty unless out_dir is given, in
    which case the CSV, metadata, and edge-list files are written there.
    """
    configs = preset_configs(name, seed, runs, iterations)
    traces = [run_experiment(c) for c in configs]
    paths = []
    if out_dir is not None:
        paths = _write_outputs(Path(out_dir), name, configs, traces)
    return traces, paths


# ---------------------------------------------------------------------------
# file emission


def write_traces_csv(path, traces: list[MsdTrace]) -> None:
    """`iter,<labels>` header, one row per instant, 6-decimal dB cells."""
    if not traces:
        raise ValueError("no traces to write")
    lengths = {t.values.shape[0] for t in traces}
    if len(lengths) != 1:
        raise ValueError(f"traces differ in length: {sorted(lengths)}")
    (n,) = lengths
    lines = ["iter," + ",".join(t.label for t in traces)]
    for i in range(n):
        lines.append(f"{i}," + ",".join(f"{t.values[i]:.6f}" for t in traces))
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def _metadata_lines(configs: list[ExperimentConfig], name: str) -> list[str]:
    first = configs[0]
    lines = [
        f"name={name}",
        f"nodes={first.nodes}",
        f"taps={first.taps}",
        f"iterations={first.iterations}",
        f"runs={first.runs}",
        f"snr_db={first.snr_db:g}",
        f"input_variance={first.input_variance:g}",
        f"seed={first.seed}",
        f"sparsity={first.sparsity.kind.value}",
        f"active_taps={first.sparsity.active_taps}",
        f"combiner={first.topology.combiner}",
        f"msd_definition={_MSD_DEFINITION}",
        f"snr_definition={_SNR_DEFINITION}",
    ]
    for idx, config in enumerate(configs, start=1):
        label = config.resolved_label()
        p = config.params
        lines.append(f"column.{idx}.label={label}")
        lines.append(f"column.{idx}.engine={config.engine.value}")
        lines.append(f"column.{idx}.protocol={config.protocol.value}")
        lines.append(f"column.{idx}.penalty={p.penalty.kind.value}")
        if p.penalty.active:
            lines.append(f"column.{idx}.penalty_weight={p.penalty.weight:g}")
            lines.append(f"column.{idx}.penalty_shape={p.penalty.shape:g}")
        if config.engine in (Engine.CG, Engine.MCG):
            lines.append(f"column.{idx}.forgetting={p.forgetting:g}")
        if config.engine is Engine.CG:
            lines.append(f"column.{idx}.max_cg_iters={p.max_cg_iters}")
            lines.append(f"column.{idx}.cg_tol={p.cg_tol:g}")
        if config.engine is Engine.MCG:
            lines.append(f"column.{idx}.step_scale={p.step_scale:g}")
        if config.engine is Engine.LMS:
            lines.append(f"column.{idx}.lms_step={p.lms_step:g}")
        if config.engine is Engine.RLS:
            lines.append(f"column.{idx}.forgetting={p.forgetting:g}")
        if config.engine in (Engine.CG, Engine.MCG, Engine.RLS):
            lines.append(f"column.{idx}.diag_load={p.diag_load:g}")
    return lines


def _write_outputs(out_dir: Path, stem: str, configs, traces) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{stem}.csv"
    write_traces_csv(csv_path, traces)
    meta_path = out_dir / f"{stem}.meta.txt"
    meta_path.write_text("\n".join(_metadata_lines(configs, stem)) + "\n", newline="\n")
    edges_path = out_dir / f"{stem}.edges.txt"
    edges_path.write_text(to_edge_list(configs[0].build_topology()) + "\n", newline="\n")
    return [csv_path, meta_path, edges_path]


def emit_complexity_table(inputs: ComplexityInputs) -> str:
    """All twelve methods' exact (additions, multiplications) at one size."""
    rows = [("method", "additions", "multiplications")]
    for method in ComplexityMethod:
        cost = complexity_eval(method, inputs)
        rows.append((method.value, str(cost.additions), str(cost.multiplications)))
    widths = [max(len(r[c]) for r in rows) for c in range(3)]
    out = []
    for i, row in enumerate(rows):
        out.append(
            row[0].ljust(widths[0])
            + "  "
            + row[1].rjust(widths[1])
            + "  "
            + row[2].rjust(widths[2])
        )
        if i == 0:
            out.append("-" * (sum(widths) + 4))
    header = f"per-instant operation counts at M={inputs.taps}, J={inputs.inner_iters}, L={inputs.nodes}"
    return header + "\n" + "\n".join(out)


# ---------------------------------------------------------------------------
# argument handling


def _parse_complexity_arg(text: str) -> ComplexityInputs:
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError(f"--complexity expects M,J,L, got {text!r}")
    try:
        m, j, l = (int(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"--complexity expects integers, got {text!r}") from exc
    return _build("complexity", ComplexityInputs, dict(taps=m, inner_iters=j, nodes=l))


def _sanitize(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", label).strip("_").lower() or "experiment"


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diffcg",
        description="Distributed parameter estimation with diffusion CG adaptive networks.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_overrides(p):
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        p.add_argument("--runs", type=int, default=None, help="run-count override")
        p.add_argument("--iterations", type=int, default=None, help="iteration override")

    run_p = sub.add_parser("run", help="run one experiment from a config file")
    run_p.add_argument("--config", help="path to a JSON experiment config")
    add_overrides(run_p)

    preset_p = sub.add_parser("preset", help="run a named preset")
    preset_p.add_argument("--preset", choices=PRESET_NAMES, help="named experiment bundle")
    add_overrides(preset_p)

    cx_p = sub.add_parser("complexity", help="print the operation-count table")
    cx_p.add_argument("--complexity", required=True, metavar="M,J,L")
    cx_p.add_argument("--out", default=None, help="also write the table to this directory")

    topo_p = sub.add_parser("topology", help="write the communication graph edge list")
    topo_p.add_argument("--config", help="path to a JSON experiment config")
    topo_p.add_argument("--preset", choices=PRESET_NAMES, help="named experiment bundle")
    add_overrides(topo_p)
    return parser


def _load_config_arg(args) -> ExperimentConfig:
    if not getattr(args, "config", None):
        raise ConfigError("a --config path is required")
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    return _apply_overrides(parse_config(text), args)


def _cmd_run(args) -> int:
    config = _load_config_arg(args)
    trace = run_experiment(config)
    stem = _sanitize(config.resolved_label())
    paths = _write_outputs(Path(args.out), stem, [config], [trace])
    print("\n".join(f"wrote {p}" for p in paths))
    return EXIT_OK


def _cmd_preset(args) -> int:
    if not getattr(args, "preset", None):
        raise ConfigError("a --preset name is required")
    seed = args.seed if args.seed is not None else 0
    runs = args.runs if args.runs is not None else 20
    iterations = args.iterations if args.iterations is not None else 1000
    _, paths = run_preset(
        args.preset, out_dir=args.out, seed=seed, runs=runs, iterations=iterations
    )
    print("\n".join(f"wrote {p}" for p in paths))
    return EXIT_OK


def _cmd_complexity(args) -> int:
    inputs = _parse_complexity_arg(args.complexity)
    table = emit_complexity_table(inputs)
    print(table)
    if args.out is not None:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / "complexity.txt"
        path.write_text(table + "\n", newline="\n")
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_topology(args) -> int:
    if getattr(args, "preset", None):
        seed = args.seed if args.seed is not None else 0
        configs = preset_configs(args.preset, seed=seed)
        config, stem = configs[0], args.preset
    else:
        config = _load_config_arg(args)
        stem = _sanitize(config.resolved_label())
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{stem}.edges.txt"
    path.write_text(to_edge_list(config.build_topology()) + "\n", newline="\n")
    print(f"wrote {path}")
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "preset": _cmd_preset,
    "complexity": _cmd_complexity,
    "topology": _cmd_topology,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _COMMANDS[args.subcommand](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - boundary between library and shell
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
