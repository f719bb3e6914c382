"""Command-line entry point: ``dwellcert {certify,simulate,verify,dwell,oracle,sweep} --config PATH``.

Exit codes: 0 success/pass, 1 check failed, 2 bad config or input, 3 unwritable output.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

import numpy as np

from . import plotting
from .config import RunConfig, load_config
from .errors import ConfigError, DwellCertError
from .jsonio import dumps17
from .neuron import OFF, ON, certify, square_wave_signal
from .nonlinear import affine_as_nonlinear, nl_dwell_time, nl_enclosing_level
from .oracle import boundary_max, fd_decay_check
from .planar_affine import (
    SublevelSet,
    dwell_time,
    dwell_time_weak,
    enclosing_level,
    lyapunov,
    lyapunov_residual,
    same_weights,
)
from .sim import Trajectory, simulate, verify_trapping, write_atomic

log = logging.getLogger("dwellcert")

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_OUTPUT = 0, 1, 2, 3


class OutputError(Exception):
    pass


def _emit(obj) -> None:
    sys.stdout.write(dumps17(obj) + "\n")


def _error(exc) -> None:
    # diagnostics go straight to stderr so they survive any logging setup
    sys.stderr.write(f"dwellcert: error: {exc}\n")


def _write(path, text: str) -> None:
    try:
        write_atomic(path, text)
    except OSError as exc:
        raise OutputError(f"{path}: {exc.strerror or exc}") from None


def _transitions(cfg: RunConfig) -> list[tuple[str, str]]:
    """Distinct ordered mode pairs met along the signal, or every ordered pair without one."""
    if cfg.signal is None:
        ids = list(cfg.modes)
        return [(a, b) for a in ids for b in ids if a != b]
    order = [cfg.start_mode()] + [mid for _, mid in cfg.signal.switches]
    seen = []
    for a, b in zip(order[:-1], order[1:]):
        if a != b and (a, b) not in seen:
            seen.append((a, b))
    return seen


def _run_simulation(cfg: RunConfig, reset=True):
    return simulate(cfg.modes, cfg.require_signal(), cfg.x0, cfg.dt, cfg.reset if reset else None)


# --------------------------------------------------------------------------
# verbs
# --------------------------------------------------------------------------


def cmd_certify(args) -> int:
    cfg = load_config(args.config)
    p = cfg.require_neuron()
    if cfg.periodic is None:
        raise ConfigError("signal.periodic: certify needs the on/off durations T_I and T_0")
    cert = certify(p, cfg.k, cfg.x0)
    _emit(cert.to_dict())
    return EXIT_OK if cert.passed else EXIT_FAIL


def _level_sets(cfg: RunConfig):
    if cfg.neuron is not None:
        V_off, V_on = lyapunov(cfg.modes[OFF]), lyapunov(cfg.modes[ON])
        return plotting.neuron_level_sets(V_off, V_on, cfg.k, enclosing_level(V_off, V_on, cfg.k))
    out = [(f"N_{mid}^k", SublevelSet(lyapunov(m), cfg.k), "core") for mid, m in cfg.modes.items()]
    for a, b in _transitions(cfg):
        V_a, V_b = lyapunov(cfg.modes[a]), lyapunov(cfg.modes[b])
        out.append((f"N_{b}^k_i ({a}->{b})", SublevelSet(V_b, enclosing_level(V_a, V_b, cfg.k)), "tube"))
    return out


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    traj = _run_simulation(cfg)
    text = traj.to_csv()
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    if args.svg:
        try:
            plotting.phase_portrait(args.svg, traj, _level_sets(cfg), v_th=cfg.v_th)
        except OSError as exc:
            raise OutputError(f"{args.svg}: {exc.strerror or exc}") from None
    if args.out:
        _emit({
            "samples": len(traj),
            "switches": len(traj.switches),
            "resets": len(traj.resets),
            "max_x1": float(traj.x[:, 0].max()),
        })
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    if not args.traj:
        raise ConfigError("--traj: a trajectory CSV is required")
    try:
        with open(args.traj) as fh:
            traj = Trajectory.from_csv(fh)
    except OSError as exc:
        raise ConfigError(f"{args.traj}: {exc.strerror or exc}") from None
    except ValueError as exc:
        raise ConfigError(f"{args.traj}: {exc}") from None
    if traj.resets:
        raise ConfigError(f"{args.traj}: trajectory contains resets; simulate without a reset rule")
    report = verify_trapping(traj, cfg.modes, cfg.k, cfg.start_mode())
    _emit(report.to_dict())
    return EXIT_OK if report.overall else EXIT_FAIL


def dwell_table(cfg: RunConfig) -> list[dict]:
    rows = []
    for a, b in _transitions(cfg):
        m_a, m_b = cfg.modes[a], cfg.modes[b]
        V_a, V_b = lyapunov(m_a), lyapunov(m_b)
        k_i = enclosing_level(V_a, V_b, cfg.k)
        s_a, s_b = affine_as_nonlinear(m_a), affine_as_nonlinear(m_b)
        k_ring = nl_enclosing_level(s_a, s_b, cfg.k)
        rows.append({
            "from": a,
            "to": b,
            "shared_weights": same_weights(V_a, V_b),
            "k_i": k_i,
            # key names are part of the documented output format
            "tau_theorem2": dwell_time(V_b.eps, cfg.k, k_i),
            "tau_remark5": dwell_time_weak(m_b, V_a.center, V_b.center, cfg.k),
            "k_i_ring": k_ring,
            "tau_theorem4": nl_dwell_time(s_b, cfg.k, k_ring),
        })
    return rows


def cmd_dwell(args) -> int:
    cfg = load_config(args.config)
    _emit({"k": cfg.k, "transitions": dwell_table(cfg)})
    return EXIT_OK


def cmd_oracle(args) -> int:
    cfg = load_config(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    n = args.samples
    if n < 16:
        raise ConfigError(f"--samples: must be at least 16, got {n}")
    ok = True
    modes_out = []
    for mid, m in cfg.modes.items():
        res = float(np.abs(lyapunov_residual(m)).max())
        dc = fd_decay_check(m, max(100, n // 4), seed)
        good = res <= 1e-12 and dc.worst <= 1e-9 and dc.witness <= 1e-6
        ok &= good
        modes_out.append({"id": mid, "lyapunov_residual": res, "decay_worst": dc.worst,
                          "decay_witness": dc.witness, "pass": good})
    trans_out = []
    for a, b in _transitions(cfg):
        V_a, V_b = lyapunov(cfg.modes[a]), lyapunov(cfg.modes[b])
        k_i = enclosing_level(V_a, V_b, cfg.k)
        sampled = boundary_max(V_a, cfg.k, V_b, n)
        good = sampled <= k_i * (1.0 + 1e-12)
        ok &= good
        trans_out.append({"from": a, "to": b, "k_i": k_i, "boundary_max": sampled,
                          "rel_gap": (k_i - sampled) / k_i, "pass": good})
    _emit({"seed": seed, "samples": n, "modes": modes_out, "transitions": trans_out, "overall": ok})
    return EXIT_OK if ok else EXIT_FAIL


SWEEP_COLUMNS = ["T", "k", "tau_d", "k_bar", "v_bound", "dwell_ok", "trap_ok", "switch_V_max", "max_v"]


def sweep_rows(cfg: RunConfig) -> list[dict]:
    p = cfg.require_neuron()
    if not cfg.sweep:
        raise ConfigError("sweep: this command needs a sweep block")
    rows = []
    for T in cfg.sweep["T"]:
        pT = dataclasses.replace(p, T_I=T, T_0=T)
        sub = dataclasses.replace(cfg, neuron=pT)
        sub.signal = square_wave_signal(pT, cfg.sweep["periods"])
        traj = _run_simulation(sub, reset=False)
        for k in cfg.sweep["k"]:
            cert = certify(pT, k, cfg.x0)
            rep = verify_trapping(traj, cfg.modes, k, OFF)
            rows.append({
                "T": T, "k": k, "tau_d": cert.tau_d, "k_bar": cert.k_bar, "v_bound": cert.v_bound,
                "dwell_ok": cert.dwell_ok, "trap_ok": rep.overall,
                "switch_V_max": max(c.V for c in rep.switch_checks[1:]),
                "max_v": float(traj.x[:, 0].max()),
            })
    return rows


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    rows = sweep_rows(cfg)
    lines = [",".join(SWEEP_COLUMNS)]
    for r in rows:
        lines.append(",".join(
            str(r[c]).lower() if isinstance(r[c], bool) else format(r[c], ".17g") for c in SWEEP_COLUMNS
        ))
    text = "\n".join(lines) + "\n"
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    if args.svg:
        try:
            plotting.sweep_figure(args.svg, rows)
        except OSError as exc:
            raise OutputError(f"{args.svg}: {exc.strerror or exc}") from None
    return EXIT_OK


COMMANDS = {
    "certify": cmd_certify,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "dwell": cmd_dwell,
    "oracle": cmd_oracle,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dwellcert", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON run configuration")
        sp.add_argument("--out", help="output file (CSV); standard output when omitted")
        sp.add_argument("--svg", help="write an SVG figure to this path")
        sp.add_argument("--samples", type=int, default=4096, help="boundary samples (oracle)")
        sp.add_argument("--seed", type=int, default=None, help="random seed (oracle)")
        if name == "verify":
            sp.add_argument("--traj", required=True, help="trajectory CSV from 'simulate'")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    log.debug("%s: config %s", args.command, args.config)
    try:
        return COMMANDS[args.command](args)
    except OutputError as exc:
        _error(exc)
        return EXIT_OUTPUT
    except (DwellCertError, ValueError) as exc:
        _error(exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
