"""Command-line front end: scenario runs, trajectory export, benchmarks,
and the live steering service."""

from __future__ import annotations

import math
import statistics
import sys
import time

import click

from .body import scale_body
from .config import DEFAULTS, check_bounds, load_overrides, make_config
from .control import dlqr_gain, error_model
from .dynamics import WalkingDynamics
from .errors import StridesimError
from .frames import frame_record, parse_scenario, write_csv, write_jsonl
from .gait import solve_periodic_gait
from .sim import ParamEvent, Walker, run_frames

EXIT_USAGE = 2
EXIT_INFEASIBLE = 3


def _build_walker(params, method, overrides):
    body = scale_body(params["mass"], params["height"],
                      proportions=overrides.get("anthropometry") or None)
    cfg = make_config(speed=params["speed"], freq=params["freq"],
                      ds_ratio=params["ds_ratio"], slope=params["slope"],
                      torso=params["torso"], clearance=params["clearance"],
                      drag=params["drag"])
    control = overrides.get("control", {})
    return Walker(body, cfg, method=method,
                  state_weight=control.get("state_weight", 1.0),
                  input_weight=control.get("input_weight", 1e-5))


def _bench(walker, frames, fps):
    """Median per-frame (propagate + project + convert) cost and solve time."""
    solve_periodic_gait(WalkingDynamics(walker.body, walker.config))   # warm caches
    times = []
    for k in range(7):
        cfg = make_config(speed=walker.config.speed,
                          freq=1.0 / walker.config.step_time * (1.0 + 1e-6 * (k + 1)),
                          ds_ratio=walker.config.ds_time / walker.config.step_time)
        t0 = time.perf_counter()
        dyn = WalkingDynamics(walker.body, cfg)
        solve_periodic_gait(dyn)
        times.append((time.perf_counter() - t0) * 1e3)
    solve_ms = statistics.median(times)

    dyn = WalkingDynamics(walker.body, walker.config)
    t0 = time.perf_counter()
    em = error_model(dyn)
    dlqr_gain(em)
    gain_ms = (time.perf_counter() - t0) * 1e3

    from .kinematics import convert

    dt = 1.0 / fps
    core = []
    full = []
    for k in range(1, frames + 1):
        tic = time.perf_counter_ns()
        walker.advance(k * dt)                       # closed-form propagation
        walker.control_sample()                      # time projection
        convert(walker.q, min(walker.phase_t, walker.config.step_time),
                walker._cfg_side[walker.d], walker.body)
        mid = time.perf_counter_ns()
        walker.sample_frame()                        # world frame + diagnostics
        core.append((mid - tic) / 1e3)
        full.append((time.perf_counter_ns() - tic) / 1e3)
    return {
        "frames": frames,
        "gait_solve_ms": solve_ms,
        "controller_ms": gain_ms,
        "core_us_median": statistics.median(core),
        "core_us_p90": statistics.quantiles(core, n=10)[-1],
        "core_us_mean": statistics.fmean(core),
        "frame_us_median": statistics.median(full),
        "frame_us_mean": statistics.fmean(full),
        "frames_per_second": 1e6 / statistics.fmean(full),
    }


@click.command(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--height", default=DEFAULTS["height"], show_default=True, help="body height [m]")
@click.option("--mass", default=DEFAULTS["mass"], show_default=True, help="body mass [kg]")
@click.option("--speed", default=DEFAULTS["speed"], show_default=True, help="walking speed [m/s], negative walks backward")
@click.option("--freq", default=DEFAULTS["freq"], show_default=True, help="step frequency [steps/s]")
@click.option("--ds-ratio", default=DEFAULTS["ds_ratio"], show_default=True, help="double-support fraction of the step")
@click.option("--slope", default=0.0, show_default=True, help="terrain inclination [deg]")
@click.option("--torso", default=0.0, show_default=True, help="torso bend [deg]")
@click.option("--clearance", default=DEFAULTS["clearance"], show_default=True, help="swing-toe lift [fraction of leg]")
@click.option("--drag", default=0.0, show_default=True, help="constant sagittal force on the torso [N]")
@click.option("--duration", default=10.0, show_default=True, help="simulated time [s]")
@click.option("--fps", default=DEFAULTS["fps"], show_default=True, help="display frames per second")
@click.option("--push", "pushes", multiple=True, metavar="T,FX,FY,DUR",
              help="push window: start [s], force [N, N], duration [s] (repeatable)")
@click.option("--scenario", type=click.Path(exists=True, dir_okay=False),
              help="JSONL scenario script of push / set_param ops")
@click.option("--format", "fmt", type=click.Choice(["csv", "jsonl"]), default="csv",
              show_default=True, help="output format")
@click.option("--out", type=click.Path(dir_okay=False, writable=True),
              help="output file (default: stdout)")
@click.option("--method", type=click.Choice(["adaptive", "fixed"]), default="adaptive",
              show_default=True, help="pelvis-height construction")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="INI file overriding [anthropometry] and [control] entries")
@click.option("--serve", is_flag=True, help="run the live steering service instead of exporting")
@click.option("--port", default=8787, show_default=True, help="service port")
@click.option("--bench", is_flag=True, help="run the timing benchmark instead of exporting")
@click.option("--bench-frames", default=20000, show_default=True, help="frames timed by --bench")
def main(height, mass, speed, freq, ds_ratio, slope, torso, clearance, drag,
         duration, fps, pushes, scenario, fmt, out, method, config_path,
         serve, port, bench, bench_frames):
    """Generate human-like walking trajectories in closed form.

    By default simulates --duration seconds at --fps and writes one frame
    record per display frame.  Exit codes: 0 ok, 2 usage, 3 infeasible
    parameters.
    """
    if serve and bench:
        raise click.UsageError("choose one of --serve / --bench")
    params = {"height": height, "mass": mass, "speed": speed, "freq": freq,
              "ds_ratio": ds_ratio, "slope": math.radians(slope),
              "torso": math.radians(torso), "clearance": clearance, "drag": drag}
    overrides = load_overrides(config_path) if config_path else {}
    try:
        for name in ("height", "mass", "speed", "freq", "ds_ratio", "slope",
                     "torso", "clearance", "drag"):
            check_bounds(name, params[name])
        check_bounds("fps", fps)
        walker = _build_walker(params, method, overrides)
    except StridesimError as exc:
        click.echo(f"infeasible parameters: {exc}", err=True)
        sys.exit(EXIT_INFEASIBLE)

    if serve:
        from .service import serve_forever
        serve_forever(walker_factory=lambda: _build_walker(params, method, overrides),
                      port=port, fps=fps)
        return

    if bench:
        report = _bench(walker, bench_frames, fps)
        for key, val in report.items():
            click.echo(f"{key}: {val:.3f}" if isinstance(val, float) else f"{key}: {val}")
        return

    push_events = []
    param_events = []
    for spec_str in pushes:
        parts = spec_str.split(",")
        if len(parts) != 4:
            raise click.UsageError(f"--push wants T,FX,FY,DUR (got {spec_str!r})")
        at, fx, fy, dur = (float(p) for p in parts)
        push_events.append((at, fx, fy, dur))
    if scenario:
        with open(scenario) as fh:
            sp, se = parse_scenario(fh)
        push_events.extend(sp)
        param_events.extend(ParamEvent(at=at, changes=ch) for at, ch in se)

    try:
        for at, fx, fy, dur in push_events:
            walker.apply_push(fx, fy, start=at, duration=dur)
        records = (frame_record(f)
                   for f in run_frames(walker, duration, fps, param_events))
        writer = write_csv if fmt == "csv" else write_jsonl
        if out:
            with open(out, "w") as fh:
                writer(records, fh)
        else:
            writer(records, sys.stdout)
    except StridesimError as exc:
        click.echo(f"infeasible parameters: {exc}", err=True)
        sys.exit(EXIT_INFEASIBLE)


if __name__ == "__main__":
    main()
