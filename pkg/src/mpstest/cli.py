"""Command-line entry point: ``mpstest --experiment <name> [options]``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .experiments import EXPERIMENTS, ExperimentConfig, ExperimentResult, run_experiment

LIST_KEYS = ("n", "d", "r", "m", "delta", "theta", "grid")


def parse_grid(text: str) -> list[float]:
    """Comma list ``0.1,0.5`` or inclusive linspace ``start:stop:count``."""
    text = text.strip()
    if ":" in text:
        start, stop, count = text.split(":")
        return [float(x) for x in np.linspace(float(start), float(stop), int(count))]
    return [float(x) for x in text.split(",") if x.strip()]


def _parse_list(key: str, text: str):
    values = parse_grid(text)
    if key in ("n", "d", "r", "m"):
        ints = [int(v) for v in values]
        if any(i != v for i, v in zip(ints, values)):
            raise ValueError(f"--{key} expects integers, got {text!r}")
        values = ints
    return values[0] if len(values) == 1 and key != "grid" else values


def read_config(path: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mpstest", description="Run a named MPS-testing experiment.")
    p.add_argument("--experiment", choices=sorted(EXPERIMENTS))
    p.add_argument("--config", help="key = value file mirroring the flags")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.add_argument("--format", choices=["json", "csv"])
    p.add_argument("--workers", type=int)
    for key in LIST_KEYS:
        p.add_argument(f"--{key}", help="value, comma list, or start:stop:count")
    p.add_argument("--spectrum", help="rank_demo: comma-separated eigenvalues")
    p.add_argument("--samples", type=int)
    p.add_argument("--pad", type=int, help="product_demo: extra product qubits")
    return p


def make_config(args: argparse.Namespace) -> ExperimentConfig:
    merged: dict[str, object] = read_config(args.config) if args.config else {}
    for key, value in vars(args).items():
        if key != "config" and value is not None:
            merged[key] = value
    if "experiment" not in merged:
        raise ValueError("--experiment is required (on the command line or in --config)")
    params = {}
    for key in LIST_KEYS:
        if key in merged:
            params[key] = _parse_list(key, str(merged[key]))
    for key, cast in (("samples", int), ("pad", int)):
        if key in merged:
            params[key] = cast(merged[key])
    if "spectrum" in merged:
        params["spectrum"] = str(merged["spectrum"])
    fmt = str(merged.get("format", "json"))
    if fmt not in ("json", "csv"):
        raise ValueError(f"unknown format {fmt!r}")
    return ExperimentConfig(
        experiment=str(merged["experiment"]),
        params=params,
        seed=int(merged.get("seed", 0)),
        out=merged.get("out"),
        format=fmt,
        workers=int(merged.get("workers", 1)),
    )


def _plain(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_json(result: ExperimentResult) -> str:
    return json.dumps(result.to_dict(), indent=2, sort_keys=True, default=_plain)


def to_csv(result: ExperimentResult) -> str:
    columns: list[str] = []
    for rec in result.records:
        for key in rec:
            if key not in columns:
                columns.append(key)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in result.records:
        row = []
        for key in columns:
            value = rec.get(key, "")
            if isinstance(value, (list, dict)):
                value = json.dumps(value, sort_keys=True, default=_plain)
            elif isinstance(value, np.generic):
                value = value.item()
            row.append(value)
        writer.writerow(row)
    return buf.getvalue()


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
        result = run_experiment(cfg)
    except ValueError as exc:
        parser.error(str(exc))
    text = to_json(result) if cfg.format == "json" else to_csv(result)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    failures = result.failures()
    for v in failures:
        print(f"FAILED {v.check} (record {v.record}): value={v.value!r} bound={v.bound!r}",
              file=sys.stderr)
    return 0 if not failures else 1


if __name__ == "__main__":
    sys.exit(main())
