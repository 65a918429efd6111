"""Command-line entry point: ``donorreg <command> [--config FILE] [--out DIR]``.

Exit status is 0 on success, 2 for configuration or usage errors and 3 for
numerical failures (unresolvable labels, eigensolver or step-control
failure) and I/O errors while writing results.
"""
import argparse
import os
import sys
import warnings

import numpy as np

from .config import ConfigError, dump_config, load_config
from .csvio import write_csv
from .eigensolver import (AmbiguousLabeling, EigensolverError, NearDegeneracyWarning,
                          eigensystem, exact_eigensystem, perturbative_eigensystem)
from .gates import compile_gate
from .protocols import (entanglement_gates, full_sequence, initialization_gates,
                        random_initial, run_protocol, sweep)
from .relaxation import StepTooCoarse, ensemble_fraction, integrate_trajectory
from .spin_model import SIGMA, TWO_PI, validate_params

__all__ = ["main", "run_command", "COMMANDS"]

COMMANDS = ("eigen", "compile", "protocol", "sweep-j", "sweep-db", "relax", "validate")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _parser():
    ap = _Parser(prog="donorreg", description="Two-donor spin register simulator")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="key = value config file (defaults if omitted)")
    ap.add_argument("--out", default=".", help="output directory (default: current)")
    return ap


def _hz(x):
    return x / TWO_PI


def _eigen(cfg, out):
    p = cfg.params()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearDegeneracyWarning)
        e0 = perturbative_eigensystem(p, 0)
        e2 = perturbative_eigensystem(p, 2)
    ex = exact_eigensystem(p)
    rows = [(n, float(SIGMA[n]), _hz(e0.energies[n]), _hz(e2.energies[n]), _hz(ex.energies[n]),
             _hz(ex.energies[n] - e0.energies[n]), _hz(ex.energies[n] - e2.energies[n]))
            for n in range(16)]
    return [write_csv(rows, "eigen", os.path.join(out, "eigen.csv"))]


def _carriers(cfg, p, sim):
    if cfg.energy_source == cfg.sim_source:
        return sim
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearDegeneracyWarning)
        return eigensystem(p, cfg.energy_source)


def _compile_rows(cfg, p):
    sim = eigensystem(p, cfg.sim_source)
    carriers = _carriers(cfg, p, sim)
    ks = cfg.ks()
    rows = []
    for item in initialization_gates() + entanglement_gates():
        if item is None:
            continue
        g, kname = item
        cp = compile_gate(g, carriers, getattr(ks, kname), p)
        rows.append((g.name, g.context_text, _hz(cp.pulse.nu), _hz(cp.detuning), cp.K,
                     cp.pulse.amplitude, _hz(cp.rabi), cp.pulse.duration, cp.eps_e, cp.eps_n,
                     cp.sqrt_Pe))
    return rows


def _compile(cfg, out):
    return [write_csv(_compile_rows(cfg, cfg.params()), "compile",
                      os.path.join(out, "compile.csv"))]


def _protocol(cfg, out):
    p = cfg.params()
    sim = eigensystem(p, cfg.sim_source)
    steps = full_sequence(p, _carriers(cfg, p, sim), cfg.ks())
    if cfg.protocol_initial == "random":
        init = random_initial(cfg.seed)
    else:
        init = np.zeros(16, dtype=complex)
        init[int(cfg.protocol_initial)] = 1.0
    res = run_protocol(init, steps, p, sim)
    schema = ("step", "label") + tuple(f"pop_{i}" for i in range(16))
    rows = [(k, label, *pops) for k, (label, pops) in enumerate(res.trace)]
    a = write_csv(rows, schema, os.path.join(out, "protocol.csv"))
    summary = [(res.P, abs(res.C[0]) ** 2, abs(res.C[15]) ** 2, res.theta, res.total_time,
                res.norm)]
    b = write_csv(summary, "protocol_summary", os.path.join(out, "protocol_summary.csv"))
    print(f"P = {res.P:.6f}  |C0|^2 = {abs(res.C[0]) ** 2:.6f}  |C15|^2 = {abs(res.C[15]) ** 2:.6f}")
    return [a, b]


def _sweep(cfg, out, axis):
    p = cfg.params()
    if axis == "J":
        grid, name = cfg.sweep_j_grid(), "sweep_j.csv"
    else:
        p = p.replace(J=TWO_PI * cfg.sweep_db_J_MHz * 1e6)
        grid, name = cfg.sweep_db_grid(), "sweep_db.csv"
    pts = sweep(axis, grid, cfg.realizations, cfg.seed, p, cfg.energy_source, cfg.sim_source,
                cfg.ks(), cfg.workers)
    rows = [(s.axis_value, s.mean_P, s.std_P, s.n_realizations, s.n_ambiguous_points) for s in pts]
    return [write_csv(rows, "sweep", os.path.join(out, name))]


def _relax(cfg, out):
    p = cfg.params()
    sc = cfg.relaxation_scenario()
    tr = integrate_trajectory(sc, step=cfg.relax_step_ns * 1e-9, n_samples=cfg.relax_samples)
    eta, b0_min = ensemble_fraction(p, sc.B0)
    rows = [(t, *v) for t, v in zip(tr.t, tr.I)]
    a = write_csv(rows, "trajectory", os.path.join(out, "relax_trajectory.csv"))
    summary = [(tr.xi, tr.delta_Iz, tr.flipped, eta, b0_min, tr.Iz_final, tr.step, tr.norm_drift)]
    b = write_csv(summary, "relax_summary", os.path.join(out, "relax_summary.csv"))
    return [a, b]


def _validate(cfg, out):
    p = cfg.params()
    sim = eigensystem(p, cfg.sim_source)
    # amplitude of the nuclear CN at the configured K_n
    g, _ = initialization_gates()[1]
    cp = compile_gate(g, _carriers(cfg, p, sim), cfg.K_n, p)
    reports = validate_params(p, cp.pulse.amplitude, temperature=cfg.temperature_K,
                              T2=cfg.T2_ms * 1e-3, Bx=cfg.relax_Bx_gauss * 1e-4,
                              B0=cfg.relax_B0_T, tau_cn=cp.pulse.duration)
    rows = [(r.number, r.description, r.ratio, r.threshold, r.passed) for r in reports]
    for r in reports:
        print(f"condition {r.number}: {'pass' if r.passed else 'FAIL'} ratio={r.ratio:.4g} ({r.description})")
    return [write_csv(rows, "validate", os.path.join(out, "validate.csv"))]


_HANDLERS = {
    "eigen": _eigen,
    "compile": _compile,
    "protocol": _protocol,
    "sweep-j": lambda c, o: _sweep(c, o, "J"),
    "sweep-db": lambda c, o: _sweep(c, o, "deltaB"),
    "relax": _relax,
    "validate": _validate,
}


def run_command(argv):
    """Run one command; returns the exit status."""
    try:
        args = _parser().parse_args(argv)
        cfg = load_config(args.config)
        cfg.params()
    except (_UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    header = "".join(f"# {line}\n" for line in dump_config(cfg).splitlines())
    print(f"# donorreg {args.command}\n{header}", end="")
    try:
        os.makedirs(args.out, exist_ok=True)
        written = _HANDLERS[args.command](cfg, args.out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AmbiguousLabeling, EigensolverError, StepTooCoarse, OSError,
            FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def main(argv=None):
    sys.exit(run_command(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":  # pragma: no cover
    main()
