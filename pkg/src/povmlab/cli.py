"""Command-line front end.

Verbs: sample-haar, evolve, equivalence, phase-space, transition, verify-protocols.
Settings come from defaults, then an optional ``--config`` file, then flags.
The config file is INI-style with a single ``[run]`` section of ``key = value``
lines using the same names as the flags (``dim``, ``s``, ``gamma``, ``rounds``,
``seed``, ``samples``, ``shots``, ``resolution``, ``steps``, ``state``, ``out``,
``dims``, ``s_values``).

Exit codes: 0 success, 2 configuration error, 3 numerical-guard violation.
"""
import argparse
import configparser
import dataclasses
import hashlib
import io as _io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from . import io as fio
from .channels import (
    ChannelSpec,
    depolarize,
    equivalence_time,
    integrate_master_equation,
    iterate_channel,
)
from .circuits import MAX_SWAP_DIM, protocol_batch
from .coherent import sample_haar, sample_haar_angles
from .errors import InvalidStateError, NumericalGuardError
from .linalg import basis_projector, maximally_mixed, trace_distance
from .phase_space import SliceSpec, SWParams, classification_table, grid_w, w_min_physical
from .sun_algebra import generator_basis

EXIT_CONFIG = 2
EXIT_GUARD = 3
EQUIVALENCE_TOL = 1e-12
RK_TOL = 1e-8
# offsets the shot-noise streams away from the Haar-sampling streams of the same seed
SHOT_SEED_OFFSET = 0x9E3779B97F4A7C15


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    dim: int = 2
    s: float = 0.0
    gamma: float = 1.0
    rounds: int = 1
    seed: int = None
    samples: int = 1000
    shots: int = 0
    resolution: int = 64
    steps: int = 10_000
    state: str = "ground"
    out: str = None
    dims: str = "2-20"
    s_values: str = None

    def validate(self):
        if self.dim < 2:
            raise ConfigError("dim must be >= 2")
        for name in ("samples", "resolution", "steps"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.rounds < 0 or self.shots < 0:
            raise ConfigError("rounds and shots must be non-negative")
        if not self.gamma > 0:
            raise ConfigError("gamma must be positive")
        if self.seed is not None and not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        return self

    def require_seed(self):
        if self.seed is None:
            raise ConfigError("this command needs an explicit --seed")
        return self.seed


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
_TYPES = {"dim": int, "rounds": int, "seed": int, "samples": int, "shots": int,
          "resolution": int, "steps": int, "s": float, "gamma": float}


def _coerce(key, value):
    if key not in _FIELDS:
        raise ConfigError(f"unknown config key {key!r}")
    if value is None or value == "":
        return None
    try:
        return _TYPES.get(key, str)(value)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc


def serialize_config(cfg):
    parser = configparser.ConfigParser(interpolation=None)
    parser["run"] = {k: "" if v is None else (repr(v) if isinstance(v, float) else str(v))
                     for k, v in sorted(dataclasses.asdict(cfg).items())}
    buf = _io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def parse_config(text):
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    if parser.sections() not in ([], ["run"]):
        raise ConfigError("config file must contain only a [run] section")
    values = {k: _coerce(k, v) for k, v in parser["run"].items()} if parser.has_section("run") else {}
    return RunConfig(**{k: v for k, v in values.items() if v is not None})


def config_hash(cfg):
    # the output location does not change results
    text = serialize_config(dataclasses.replace(cfg, out=None))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def provenance(cfg, command):
    return [f"povmlab {__version__}", f"command={command}",
            f"config_sha256={config_hash(cfg)}", f"seed={cfg.seed}"]


def initial_state(cfg):
    n = cfg.dim
    if cfg.state == "ground":
        return basis_projector(n, 0)
    if cfg.state == "mixed":
        return maximally_mixed(n)
    if cfg.state == "min-negativity":
        # |1> spans part of the lowest eigenspace of the kernel at the ground point, for every s
        return basis_projector(n, 1)
    path = Path(cfg.state)
    if not path.exists():
        raise ConfigError(f"unknown state {cfg.state!r}: not a named state or an existing file")
    try:
        rho = fio.read_density(path)
    except (InvalidStateError, json.JSONDecodeError) as exc:
        raise ConfigError(f"invalid state file {path}: {exc}") from exc
    if rho.shape[0] != n:
        raise ConfigError(f"state file has dimension {rho.shape[0]}, config has {n}")
    return rho


def parse_dims(text):
    out = []
    for part in str(text).split(","):
        lo, _, hi = part.partition("-")
        out.extend(range(int(lo), int(hi or lo) + 1))
    if not out or min(out) < 2 or max(out) > 64:
        raise ConfigError("dims must lie in 2..64")
    return out


def parse_s_values(text, default):
    if text is None:
        return [default]
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        k = int(round((stop - start) / step))
        return [round(start + i * step, 10) for i in range(k + 1)]
    return [float(x) for x in text.split(",")]


def _emit(cfg, text):
    if cfg.out is None:
        sys.stdout.write(text)
        return
    Path(cfg.out).write_text(text)


def _json(obj):
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def cmd_sample_haar(cfg):
    seed = cfg.require_seed()
    theta, phi = sample_haar_angles(cfg.dim, cfg.samples, seed)
    _emit(cfg, fio.angles_to_csv(theta, phi, provenance(cfg, "sample-haar")))
    for j in range(1, cfg.dim):
        k = cfg.dim - j
        print(f"theta_{j}: mean cos = {np.cos(theta[:, j - 1]).mean():+.5f} "
              f"(Haar {(1 - k) / (1 + k):+.5f})", file=sys.stderr)
    return 0


def cmd_evolve(cfg):
    rho0 = initial_state(cfg)
    mixed = maximally_mixed(cfg.dim)
    rounds = []
    for n in range(cfg.rounds + 1):
        rho = iterate_channel(rho0, n)
        rounds.append({"n": n, "state": fio.density_to_dict(rho),
                       "trace_distance_to_mixed": trace_distance(rho, mixed)})
    _emit(cfg, _json({"provenance": provenance(cfg, "evolve"), "dim": cfg.dim, "rounds": rounds}))
    return 0


def cmd_equivalence(cfg, rk=False):
    rho0 = initial_state(cfg)
    spec = ChannelSpec(cfg.dim, cfg.gamma)
    rows, worst = [], 0.0
    for n in range(cfg.rounds + 1):
        t = equivalence_time(n, spec)
        d = trace_distance(iterate_channel(rho0, n), depolarize(rho0, spec, t))
        worst = max(worst, d)
        rows.append({"n": n, "t": t, "trace_distance": d})
    report = {"provenance": provenance(cfg, "equivalence"), "max_trace_distance": worst,
              "rounds": rows, "tolerance": EQUIVALENCE_TOL}
    ok = worst <= EQUIVALENCE_TOL
    if rk:
        t = equivalence_time(cfg.rounds, spec)
        rho_rk = integrate_master_equation(rho0, spec, t, cfg.steps, generator_basis(cfg.dim))
        d_rk = trace_distance(rho_rk, depolarize(rho0, spec, t))
        report["rk"] = {"t": t, "steps": cfg.steps, "trace_distance": d_rk, "tolerance": RK_TOL}
        ok = ok and d_rk <= RK_TOL
    _emit(cfg, _json(report))
    if not ok:
        print("equivalence check exceeded tolerance", file=sys.stderr)
        return EXIT_GUARD
    return 0


def cmd_phase_space(cfg):
    rho0 = initial_state(cfg)
    params = SWParams(cfg.dim, cfg.s)
    if cfg.resolution < 8:
        raise ConfigError("resolution must be >= 8")
    out = Path(cfg.out) if cfg.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    floor = w_min_physical(params) - 1e-10
    status = 0
    for n in range(cfg.rounds + 1):
        grid = grid_w(iterate_channel(rho0, n), params, SliceSpec(cfg.dim), cfg.resolution)
        if out:
            (out / f"grid_n{n}.csv").write_text(
                fio.grid_to_csv(grid, provenance(cfg, "phase-space") + [f"round={n}"]))
        print(f"n={n} min W = {grid.minimum:.17g}")
        if grid.minimum < floor:
            status = EXIT_GUARD
    return status


def cmd_transition(cfg):
    records = classification_table(parse_dims(cfg.dims), parse_s_values(cfg.s_values, cfg.s))
    _emit(cfg, fio.classification_to_csv(records, provenance(cfg, "transition")))
    return 0


def cmd_verify_protocols(cfg):
    seed = cfg.require_seed()
    if cfg.dim > min(16, MAX_SWAP_DIM):
        raise ConfigError("verify-protocols is limited to N <= 16")
    rho = initial_state(cfg)
    omegas = sample_haar(cfg.dim, cfg.samples, seed)
    shot_seed = (seed + SHOT_SEED_OFFSET) % 2**64
    rows = protocol_batch(rho, omegas, cfg.shots, shot_seed if cfg.shots else None)
    _emit(cfg, fio.protocol_rows_to_csv(rows, provenance(cfg, "verify-protocols")))
    worst = max(r.delta for r in rows)
    bad_shots = 0
    if cfg.shots:
        bad_shots = sum(abs(r.empirical - r.exact) > 5 / np.sqrt(cfg.shots) for r in rows)
    print(f"max |direct - swap| = {worst:.3g}; shot estimates outside 5/sqrt(shots): {bad_shots}",
          file=sys.stderr)
    return EXIT_GUARD if worst > 1e-12 or bad_shots else 0


COMMANDS = {
    "sample-haar": cmd_sample_haar,
    "evolve": cmd_evolve,
    "equivalence": cmd_equivalence,
    "phase-space": cmd_phase_space,
    "transition": cmd_transition,
    "verify-protocols": cmd_verify_protocols,
}


def build_parser():
    p = argparse.ArgumentParser(prog="povmlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path)
        sp.add_argument("--dim", type=int)
        sp.add_argument("--s", type=float)
        sp.add_argument("--gamma", type=float)
        sp.add_argument("--rounds", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--samples", type=int)
        sp.add_argument("--shots", type=int)
        sp.add_argument("--resolution", type=int)
        sp.add_argument("--steps", type=int)
        sp.add_argument("--state")
        sp.add_argument("--out")
        if name == "transition":
            sp.add_argument("--dims", help="e.g. 2-20 or 2,3,5")
            sp.add_argument("--s-values", dest="s_values", help="comma list or start:stop:step")
        if name == "equivalence":
            sp.add_argument("--rk", action="store_true", help="also cross-check with RK4")
    return p


def resolve_config(args):
    cfg = RunConfig()
    if args.config is not None:
        try:
            cfg = parse_config(args.config.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    overrides = {k: v for k, v in vars(args).items() if k in _FIELDS and v is not None}
    return dataclasses.replace(cfg, **overrides).validate()


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        fn = COMMANDS[args.command]
        if args.command == "equivalence":
            return fn(cfg, rk=args.rk)
        return fn(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalGuardError as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_GUARD


if __name__ == "__main__":
    sys.exit(main())
