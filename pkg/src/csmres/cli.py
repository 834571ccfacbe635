"""Command-line front end: scans, sweeps and structured output.

Subcommands
-----------
one-particle   eigenvalues of the one-particle H_theta at a fixed angle
theta-scan     trajectory scan over a theta window plus resonance summary
two-particle   one interacting resonance at fixed theta (continuation in g)
sweep          resonance and entropies over a grid of g values
tg             infinite-repulsion reference values

All numerical work is deterministic, so rerunning a command with the same
configuration reproduces its output byte for byte.  Exit codes: 0 success,
2 configuration error, 3 no resonance found, 4 numerical diagnostic failure
(with --strict, any diagnostic flag escalates to 4).
"""

import argparse
import json
import math
import os
import sys

from concurrent.futures import ThreadPoolExecutor
from dataclasses         import dataclass, replace

import numpy as np

from .basis     import BasisSpec
from .operators import (DiagnosticError, ModelParams, build_one_particle,
                        build_two_particle, cached_two_particle_parts,
                        pair_indices)
from .schmidt   import coefficient_matrix, complex_entropies, takagi_symmetric
from .spectral  import (NoResonanceError, eigendecompose, find_resonance,
                        stabilized_resonances, theta_scan)
from .tonks     import tg_reference

__all__ = ["RunConfig", "SweepRecord", "resonance_sweep", "run", "main"]

CSV_HEAD = "g,theta_opt,E_rez,Gamma,S_re,S_im,Slin_re,Slin_im"


@dataclass(frozen=True)
class RunConfig:
    """Parsed command-line configuration for one invocation."""

    command: str
    basis: int = 90
    quad: int = 400
    potential: str = "open"
    fmt: str = "csv"
    output: str | None = None
    jobs: int = 0                      # 0 -> available parallelism
    strict: bool = False
    lambda_head: int = 8
    max_dim: int = 8192
    theta: float = 0.2
    theta_min: float = 0.05
    theta_max: float = 0.35
    theta_step: float = 0.01
    threshold: float = 0.02
    g: float = 0.0
    g_min: float = 0.0
    g_max: float = 45.0
    g_steps: int = 10
    g_list: tuple = ()
    ramp_step: float = 5.0
    restabilize: bool = False
    outer: int = 600
    box: float | None = None

    def __post_init__(self):
        if self.basis < 2:
            raise ValueError("basis must be >= 2")
        if self.quad < 2:
            raise ValueError("quad must be >= 2")
        if self.theta_step <= 0 or self.theta_max <= self.theta_min:
            raise ValueError("empty theta window")
        if self.g_steps < 1:
            raise ValueError("g-steps must be >= 1")
        if self.lambda_head < 0:
            raise ValueError("lambda-head must be >= 0")
        if self.fmt not in ("csv", "json"):
            raise ValueError(f"unknown format {self.fmt!r}")

    @property
    def spec(self) -> BasisSpec:
        return BasisSpec(n_orbitals=self.basis, quad_nodes=self.quad)

    @property
    def thetas(self) -> np.ndarray:
        n = int(round((self.theta_max - self.theta_min) / self.theta_step)) + 1
        return self.theta_min + self.theta_step * np.arange(n)

    @property
    def n_jobs(self) -> int:
        return self.jobs if self.jobs > 0 else (os.cpu_count() or 1)


@dataclass(frozen=True)
class SweepRecord:
    """One resonance analysis at a coupling g."""

    g: float
    theta_opt: float
    E_rez: float
    Gamma: float
    S: complex
    S_lin: complex
    lambdas: tuple = ()
    flags: tuple = ()


def _seed_W0(cfg):
    """Lowest stabilized one-particle eigenvalue, used to seed g=0 matching."""
    scan = theta_scan(cfg.spec, ModelParams(theta=cfg.theta, potential=cfg.potential),
                      cfg.thetas)
    return find_resonance(scan, threshold=cfg.threshold)


def _record_from_vector(g, theta, w, vec, index_map, head):
    """Entropy analysis of one matched eigenvector into a SweepRecord."""
    flags = []
    cn = vec @ vec
    if abs(cn) < 1e-6:
        # self-orthogonal state: entropies undefined, report NaN rather than guess
        nan = complex(float("nan"), float("nan"))
        return SweepRecord(g=g, theta_opt=theta, E_rez=float(w.real),
                           Gamma=float(-2.0 * w.imag), S=nan, S_lin=nan,
                           lambdas=(), flags=("self-orthogonal",))
    r = vec / np.sqrt(cn)
    e = coefficient_matrix(r, index_map=index_map)
    spectrum = takagi_symmetric(e)
    ent = complex_entropies(spectrum)
    flags.extend(spectrum.flags)
    flags.extend(ent.flags)
    if w.imag > 0:
        flags.append("negative-width")
    return SweepRecord(g=g, theta_opt=theta, E_rez=float(w.real),
                       Gamma=float(-2.0 * w.imag), S=ent.vn, S_lin=ent.lin,
                       lambdas=tuple(complex(x) for x in spectrum.lam[:head]),
                       flags=tuple(flags))


def resonance_sweep(cfg, g_values):
    """Two-particle resonance records over ascending g values at fixed theta.

    The one-body and interaction blocks are built once; each g point is one
    dense diagonalization (dispatched to a thread pool of cfg.n_jobs workers,
    LAPACK releases the GIL).  The resonance is followed through the sweep by
    continuation: the g=0 state is matched to twice the stabilized
    one-particle eigenvalue, every later point to the eigenvector of largest
    Hermitian overlap with the previous one; records are emitted in input
    order.  With cfg.restabilize, each record is re-evaluated at the angle a
    per-g theta scan finds most stationary (the continuation chain itself
    stays at the fixed angle).

    Returns
    -------
    list of SweepRecord
    """
    g_values = [float(g) for g in g_values]
    if any(b <= a for a, b in zip(g_values, g_values[1:])):
        raise ValueError("g values must be strictly increasing")
    spec = cfg.spec
    params = ModelParams(theta=cfg.theta, g=0.0, potential=cfg.potential)
    seed = _seed_W0(cfg)
    one_body, interaction = cached_two_particle_parts(spec, params,
                                                      max_dim=cfg.max_dim)
    phase = np.exp(-1j * cfg.theta)
    imap = np.column_stack(pair_indices(spec.n_orbitals))

    def solve(g):
        m = one_body if g == 0.0 else one_body + (g * phase) * interaction
        return np.linalg.eig(m)

    def solutions(ex):
        # sliding window keeps at most n_jobs+1 eigenvector matrices alive
        pending = []
        it = iter(g_values)
        for g in it:
            pending.append((g, ex.submit(solve, g)))
            if len(pending) > cfg.n_jobs:
                break
        while pending:
            g, fut = pending.pop(0)
            yield g, fut.result()
            for nxt in it:
                pending.append((nxt, ex.submit(solve, nxt)))
                break

    records = []
    prev = None
    with ThreadPoolExecutor(max_workers=cfg.n_jobs) as ex:
        for g, (ev, vecs) in solutions(ex):
            extra = []
            if prev is None:
                k = int(np.argmin(np.abs(ev - 2.0 * seed.value)))
                d = np.sort(np.abs(ev - 2.0 * seed.value))
                if d.size > 1 and d[1] < 3.0 * d[0]:
                    extra.append("ambiguous-matching")
            else:
                ov = np.abs(prev.conj() @ vecs)
                k = int(np.argmax(ov))
                if ov[k] ** 2 < 0.5:
                    extra.append("weak-continuation")
            prev = vecs[:, k].copy()
            w, vec = complex(ev[k]), vecs[:, k]
            theta_rec = cfg.theta
            if cfg.restabilize:
                w, vec, theta_rec, st = _restabilized(cfg, g, w)
                extra.extend(st.flags)
            rec = _record_from_vector(g, theta_rec, w, vec, imap, cfg.lambda_head)
            records.append(replace(rec, flags=rec.flags + tuple(extra)))
            del vecs
    return records


def _restabilized(cfg, g, w_fixed):
    """Per-g theta scan of the pair operator; state nearest w_fixed."""
    spec = cfg.spec
    params = ModelParams(theta=cfg.theta, g=g, potential=cfg.potential)
    lo = max(0.01, cfg.theta - 0.05)
    hi = min(cfg.theta + 0.05, math.pi / 4 - 0.01)
    thetas = np.linspace(lo, hi, 11)
    scan = theta_scan(spec, params, thetas,
                      builder=lambda s, p: build_two_particle(s, p, max_dim=cfg.max_dim))
    state = find_resonance(scan, selection=w_fixed, threshold=cfg.threshold)
    return state.value, state.eigenpair.right, state.theta, state


# ---------------------------------------------------------------- formatting

def _f6(x):
    """6 significant digits, without float noise."""
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return f"{x:.6g}"


def _pair(z):
    return [float(np.real(z)), float(np.imag(z))]


def _config_echo(cfg):
    keys = ("command", "basis", "quad", "potential", "theta", "threshold")
    d = {k: getattr(cfg, k) for k in keys}
    if cfg.command == "sweep":
        d["restabilize"] = cfg.restabilize
    if cfg.command in ("theta-scan", "tg"):
        d.update(theta_min=cfg.theta_min, theta_max=cfg.theta_max,
                 theta_step=cfg.theta_step)
        d.pop("theta")
    return d


def _records_csv(cfg, records):
    head = max((len(r.lambdas) for r in records), default=0)
    lines = [f"# csmres {cfg.command}"]
    for k, v in _config_echo(cfg).items():
        lines.append(f"# {k} = {v}")
    cols = CSV_HEAD + "".join(f",lambda{k}_re,lambda{k}_im" for k in range(head))
    lines.append(cols)
    for r in records:
        if r.flags:
            lines.append(f"# flags g={_f6(r.g)}: {','.join(r.flags)}")
        vals = [r.g, r.theta_opt, r.E_rez, r.Gamma,
                r.S.real, r.S.imag, r.S_lin.real, r.S_lin.imag]
        lam = list(r.lambdas) + [0j] * (head - len(r.lambdas))
        for z in lam:
            vals += [z.real, z.imag]
        lines.append(",".join(_f6(float(v)) for v in vals))
    return "\n".join(lines) + "\n"


def _record_json(r):
    return {
        "g": r.g if math.isfinite(r.g) else "inf",
        "theta_opt": r.theta_opt,
        "E_rez": r.E_rez,
        "Gamma": r.Gamma,
        "S": _pair(r.S),
        "S_lin": _pair(r.S_lin),
        "lambda": [_pair(z) for z in r.lambdas],
        "flags": list(r.flags),
    }


def _dump_json(payload):
    return json.dumps(payload, indent=1, sort_keys=True) + "\n"


def _emit(cfg, text):
    if cfg.output and cfg.output != "-":
        with open(cfg.output, "w") as f:
            f.write(text)
        print(f"wrote {cfg.output}", file=sys.stderr)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands

def _run_one_particle(cfg):
    op = build_one_particle(cfg.spec, ModelParams(theta=cfg.theta,
                                                  potential=cfg.potential))
    pairs = eigendecompose(op)
    flags = tuple(f for p in pairs for f in p.flags)
    if cfg.fmt == "json":
        payload = {"command": cfg.command, "config": _config_echo(cfg),
                   "eigenvalues": [_pair(p.value) for p in pairs],
                   "flags": sorted(set(flags))}
        _emit(cfg, _dump_json(payload))
    else:
        lines = [f"# csmres {cfg.command}"]
        lines += [f"# {k} = {v}" for k, v in _config_echo(cfg).items()]
        lines.append("index,W_re,W_im")
        lines += [f"{k},{_f6(p.value.real)},{_f6(p.value.imag)}"
                  for k, p in enumerate(pairs)]
        _emit(cfg, "\n".join(lines) + "\n")
    return flags


def _run_theta_scan(cfg):
    scan = theta_scan(cfg.spec, ModelParams(theta=float(cfg.thetas[0]),
                                            potential=cfg.potential), cfg.thetas)
    states = stabilized_resonances(scan, threshold=cfg.threshold)
    if not states:
        raise NoResonanceError("no stabilized trajectory in the scan window")
    flags = tuple(f for s in states for f in s.flags)
    if cfg.fmt == "json":
        payload = {
            "command": cfg.command, "config": _config_echo(cfg),
            "thetas": [float(t) for t in scan.thetas],
            "trajectories": [[_pair(w) for w in row] for row in scan.values],
            "resonances": [{"theta_opt": s.theta, "E_rez": s.energy,
                            "Gamma": s.width, "W": _pair(s.value),
                            "stability": s.stability, "flags": list(s.flags)}
                           for s in states],
        }
        _emit(cfg, _dump_json(payload))
    else:
        lines = [f"# csmres {cfg.command}"]
        lines += [f"# {k} = {v}" for k, v in _config_echo(cfg).items()]
        lines.append("trajectory,theta_opt,E_rez,Gamma,stability,W_re,W_im")
        for k, s in enumerate(states):
            lines.append(",".join([str(k)] + [_f6(v) for v in
                         (s.theta, s.energy, s.width, s.stability,
                          s.value.real, s.value.imag)]))
        _emit(cfg, "\n".join(lines) + "\n")
    return flags


def _run_two_particle(cfg):
    n_ramp = max(1, math.ceil(cfg.g / cfg.ramp_step)) if cfg.g > 0 else 0
    gs = [cfg.g * k / n_ramp for k in range(n_ramp + 1)] if n_ramp else [0.0]
    records = resonance_sweep(cfg, gs)
    records = records[-1:]
    return _finish_records(cfg, records)


def _run_sweep(cfg):
    if cfg.g_list:
        gs = list(cfg.g_list)
    else:
        gs = list(np.linspace(cfg.g_min, cfg.g_max, cfg.g_steps))
    records = resonance_sweep(cfg, gs)
    return _finish_records(cfg, records)


def _finish_records(cfg, records):
    if cfg.fmt == "json":
        payload = {"command": cfg.command, "config": _config_echo(cfg),
                   "records": [_record_json(r) for r in records]}
        _emit(cfg, _dump_json(payload))
    else:
        _emit(cfg, _records_csv(cfg, records))
    return tuple(f for r in records for f in r.flags)


def _run_tg(cfg):
    ref = tg_reference(cfg.spec, thetas=cfg.thetas, threshold=cfg.threshold,
                       n_outer=cfg.outer, box=cfg.box, potential=cfg.potential)
    rec = SweepRecord(g=math.inf, theta_opt=ref.theta, E_rez=ref.energy,
                      Gamma=ref.width, S=ref.entropy.vn, S_lin=ref.entropy.lin,
                      lambdas=tuple(complex(z) for z in ref.spectrum.lam[:cfg.lambda_head]),
                      flags=ref.flags)
    if cfg.fmt == "json":
        payload = {"command": cfg.command, "config": _config_echo(cfg),
                   "records": [_record_json(rec)],
                   "W_TG": _pair(ref.W),
                   "trace_defect": ref.matrix.trace_defect,
                   "dual_defect": ref.matrix.dual_defect,
                   "recon_defect": ref.spectrum.recon_defect}
        _emit(cfg, _dump_json(payload))
    else:
        _emit(cfg, _records_csv(cfg, [rec]))
    return rec.flags


_COMMANDS = {
    "one-particle": _run_one_particle,
    "theta-scan":   _run_theta_scan,
    "two-particle": _run_two_particle,
    "sweep":        _run_sweep,
    "tg":           _run_tg,
}


def run(cfg):
    """Execute one configuration; returns the process exit code."""
    try:
        flags = _COMMANDS[cfg.command](cfg)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NoResonanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except DiagnosticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    if flags:
        print(f"diagnostics: {', '.join(sorted(set(flags)))}", file=sys.stderr)
        if cfg.strict:
            return 4
    return 0


def _parser():
    p = argparse.ArgumentParser(prog="csmres",
                                description="complex-scaling resonances and "
                                            "complex entanglement entropies")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, theta_default=True):
        sp.add_argument("--basis", type=int, default=90)
        sp.add_argument("--quad", type=int, default=400)
        sp.add_argument("--potential", default="open")
        sp.add_argument("--format", dest="fmt", choices=("csv", "json"),
                        default="csv")
        sp.add_argument("--output", "-o", default=None)
        sp.add_argument("--jobs", type=int, default=0)
        sp.add_argument("--strict", action="store_true")
        sp.add_argument("--lambda-head", type=int, default=8)
        sp.add_argument("--max-dim", type=int, default=8192)
        sp.add_argument("--threshold", type=float, default=0.02)
        if theta_default:
            sp.add_argument("--theta", type=float, default=0.2)

    def window(sp):
        sp.add_argument("--theta-min", type=float, default=0.05)
        sp.add_argument("--theta-max", type=float, default=0.35)
        sp.add_argument("--theta-step", type=float, default=0.01)

    sp = sub.add_parser("one-particle", help="fixed-angle one-particle spectrum")
    common(sp)

    sp = sub.add_parser("theta-scan", help="trajectory scan over a theta window")
    common(sp, theta_default=False)
    window(sp)

    sp = sub.add_parser("two-particle", help="interacting resonance at one g")
    common(sp)
    window(sp)
    sp.add_argument("--g", type=float, required=True)
    sp.add_argument("--ramp-step", type=float, default=5.0)
    sp.add_argument("--restabilize", action="store_true")

    sp = sub.add_parser("sweep", help="resonance and entropies over g values")
    common(sp)
    window(sp)
    sp.add_argument("--g-min", type=float, default=0.0)
    sp.add_argument("--g-max", type=float, default=45.0)
    sp.add_argument("--g-steps", type=int, default=10)
    sp.add_argument("--g-list", default=None,
                    help="comma-separated g values, overrides min/max/steps")
    sp.add_argument("--restabilize", action="store_true")

    sp = sub.add_parser("tg", help="infinite-repulsion reference")
    common(sp, theta_default=False)
    window(sp)
    sp.add_argument("--outer", type=int, default=600)
    sp.add_argument("--box", type=float, default=None)
    return p


def main(argv=None):
    ns = _parser().parse_args(argv)
    d = vars(ns)
    if d.get("g_list"):
        d["g_list"] = tuple(float(x) for x in d["g_list"].split(","))
    elif "g_list" in d:
        d["g_list"] = ()
    d.setdefault("theta", 0.2)
    try:
        cfg = RunConfig(**d)
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
