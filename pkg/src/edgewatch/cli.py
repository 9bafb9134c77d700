"""Command-line entry points: serve, replay, bench, gen-fixture."""

from __future__ import annotations

import json
from pathlib import Path

import click

from .runtime.scenarios import SCENARIOS, generate
from .runtime.sources import open_source, write_replay
from .service.config import build_pipeline_config, build_vlm_config, load_config


@click.group()
def main():
    """Skeleton and semantic video-risk monitor."""


@main.command()
@click.option("--host", default=None, help="Bind address (default from config).")
@click.option("--port", default=None, type=int, help="Bind port (default from config).")
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON config file; env vars still win per knob.")
def serve(host, port, config_path):
    """Run the dual-backend service."""
    import uvicorn

    from .service.app import create_app

    cfg = load_config(config_path)
    app = create_app(cfg)
    uvicorn.run(
        app,
        host=host or cfg.service["host"],
        port=port or cfg.service["port"],
        log_level="info",
    )


def _run_headless(descriptor: str, backend: str, paced: bool,
                  alert_dir: str | None, config_path: str | None):
    from .runtime.pipeline import run_pipeline
    from .vlm.loop import run_vlm_session

    cfg = load_config(config_path)
    source = open_source(descriptor)
    if backend == "skel":
        knobs = dict(cfg.skel)
        knobs["paced"] = paced
        return run_pipeline(source, build_pipeline_config(knobs, alert_dir=alert_dir))
    return run_vlm_session(
        source, build_vlm_config(cfg.vlm),
        paced=paced, alert_dir=alert_dir,
    )


def _maybe_report(report_dir, snapshot, title):
    if not report_dir:
        return
    from .report import write_report

    for path in write_report(report_dir, snapshot, title):
        click.echo(f"report: {path}")


@main.command()
@click.argument("source")
@click.option("--backend", type=click.Choice(["skel", "vlm"]), default="skel",
              show_default=True)
@click.option("--paced/--unpaced", default=False, show_default=True,
              help="Pace frames to the recording's native rate.")
@click.option("--alert-dir", type=click.Path(file_okay=False), default=None,
              help="Where alert clips land (default: temp dir).")
@click.option("--report-dir", type=click.Path(file_okay=False), default=None,
              help="Write metrics.csv and summary figures here.")
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
def replay(source, backend, paced, alert_dir, report_dir, config_path):
    """Run a recorded or synthetic SOURCE headless; print the session report."""
    report = _run_headless(source, backend, paced, alert_dir, config_path)
    click.echo(json.dumps(report.core(), indent=2))
    _maybe_report(report_dir, report.snapshot, f"replay {source}")


@main.command()
@click.argument("scenario", type=click.Choice(sorted(SCENARIOS)))
@click.option("--seed", default=7, show_default=True, type=int)
@click.option("--frames", default=None, type=int,
              help="Override the scenario's frame count.")
@click.option("--report-dir", type=click.Path(file_okay=False), default=None,
              help="Write metrics.csv and summary figures here.")
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
def bench(scenario, seed, frames, report_dir, config_path):
    """Unpaced throughput run over a synthetic scenario; print the snapshot."""
    descriptor = f"scenario:{scenario}?seed={seed}"
    if frames is not None:
        descriptor += f"&frames={frames}"
    report = _run_headless(descriptor, "skel", False, None, config_path)
    click.echo(json.dumps(report.snapshot.as_dict(), indent=2))
    _maybe_report(report_dir, report.snapshot, f"bench {scenario}")


@main.command("gen-fixture")
@click.argument("scenario", type=click.Choice(sorted(SCENARIOS)))
@click.option("--seed", default=7, show_default=True, type=int)
@click.option("--frames", default=None, type=int)
@click.option("--mode", default=None, help="Scenario-specific variant knob.")
@click.option("--gap", default=None, type=int, help="Occlusion gap length in frames.")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def gen_fixture(scenario, seed, frames, mode, gap, out):
    """Write a deterministic pose-replay JSONL for a synthetic scenario."""
    params = {}
    if frames is not None:
        params["frames"] = frames
    if mode is not None:
        params["mode"] = mode
    if gap is not None:
        params["gap"] = gap
    records = generate(scenario, seed=seed, **params)
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    write_replay(out, records)
    click.echo(f"wrote {len(records)} frames to {out}")


if __name__ == "__main__":
    main()
