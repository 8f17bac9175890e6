"""Coupling sweeps, boundary detection, and the command line front end.

A sweep walks one coupling over a grid and records the half-partition
entanglement entropy at each point. Chain sweeps run the momentum-shifted
symmetry-enforced circuit (exact statevector, shot sampling, or a noisy
density-matrix backend); the shift defaults to the special value pi/N where
the doubled grid folds onto the integer momenta and the entropy step at the
phase boundary is sharpest. Honeycomb sweeps evaluate the exact correlators
on an lx x ly torus instead, since a single-row circuit cannot reach the
two-dimensional transition.

A phase diagram repeats the sweep across rows of a second coupling and
compares each detected boundary against the coupling where the Bloch gap
closes. All tabular output is CSV tagged with a format header; plots are an
optional SVG rendering of a CSV file.
"""

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, replace

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

import numpy as np

from .ff_oracle import (
    JumpReport,
    bdg_ground_correlations,
    detect_jump,
    exact_diagonalization,
    exact_entanglement,
    exact_majorana_matrix,
)
from .gs_circuits import make_plan, prepare_ground_state, symmetry_enforced_circuit
from .kitaev_models import ModelParams, bloch, momentum_grid
from .observables import (
    DEFAULT_SHOTS,
    MeasureSettings,
    correlation_matrix,
    entanglement,
)
from .sv_core import InvariantViolation, NoiseModel, run, run_density

CSV_TAG = "# braidkit-csv-v1"
SWEEP_COLUMNS = ("lattice", "n_cells", "lx", "ly", "jx", "jy", "jz", "dk", "entropy")
SPECTRUM_COLUMNS = SWEEP_COLUMNS[:-1] + ("lam",)
DIAGRAM_COLUMNS = (
    "lattice",
    "row_coupling",
    "row_value",
    "swept",
    "boundary",
    "magnitude",
    "found",
    "gap_closure",
)
BACKENDS = ("exact", "shots", "noisy")
COUPLINGS = ("jx", "jy", "jz")


class ConfigError(ValueError):
    """Raised when a sweep configuration fails validation."""


@dataclass(frozen=True)
class SweepConfig:
    """Validated sweep settings; build one with load_config."""

    lattice: str = "chain"
    sites: int = 4
    lx: int = 64
    ly: int = 64
    jx: float = 0.0
    jy: float = 0.0
    jz: float = 1.0
    coupling: str = "jx"
    start: float = 0.0
    stop: float = 2.0
    step: float = 0.1
    dk: float | None = None
    shift_points: int = 32
    backend: str = "exact"
    shots: int = DEFAULT_SHOTS
    seed: int = 0
    subsystem: int | None = None
    depol2: float = 0.01
    readout_flip: float = 0.02
    flag_ratio: float = 3.0
    row_coupling: str = "jz"
    rows: tuple = ()

    def grid(self) -> list:
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [round(self.start + i * self.step, 12) for i in range(n)]

    def base_params(self) -> ModelParams:
        if self.lattice == "chain":
            return ModelParams("chain", jx=self.jx, jy=0.0, jz=self.jz, n_sites=self.sites)
        return ModelParams("honeycomb", jx=self.jx, jy=self.jy, jz=self.jz, lx=self.lx, ly=self.ly)


def _field(data, section, key, kinds, default, check=None, why=""):
    table = data.get(section, {})
    if not isinstance(table, dict):
        raise ConfigError(f"{section}: expected a table")
    if key not in table:
        if default is _REQUIRED:
            raise ConfigError(f"{section}.{key}: required field is missing")
        return default
    val = table[key]
    if isinstance(val, bool) or not isinstance(val, kinds):
        names = "/".join(k.__name__ for k in kinds)
        raise ConfigError(f"{section}.{key}: expected {names}, got {type(val).__name__}")
    if check is not None and not check(val):
        raise ConfigError(f"{section}.{key}: {why}, got {val!r}")
    return val


_REQUIRED = object()
_NUM = (int, float)


def config_from_dict(data: dict) -> SweepConfig:
    """Validate a parsed config mapping; every complaint names its field."""
    known = {"model", "sweep", "shift", "measure", "detect", "diagram"}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown config section {sorted(extra)[0]!r}")

    lattice = _field(
        data, "model", "lattice", (str,), _REQUIRED,
        lambda v: v in ("chain", "honeycomb"), "must be 'chain' or 'honeycomb'",
    )
    if lattice == "chain":
        sites = _field(
            data, "model", "sites", (int,), 4,
            lambda v: v >= 2 and v % 2 == 0, "must be an even site count >= 2",
        )
        cells = sites // 2
        if cells & (cells - 1):
            raise ConfigError(
                f"model.sites: chain circuits need a power-of-two cell count, got {cells} cells"
            )
        lx = ly = 0
    else:
        sites = 0
        lx = _field(data, "model", "lx", (int,), 64, lambda v: v >= 2, "must be >= 2")
        ly = _field(data, "model", "ly", (int,), 64, lambda v: v >= 2, "must be >= 2")

    jx = float(_field(data, "model", "jx", _NUM, 0.0))
    jy = float(_field(data, "model", "jy", _NUM, 0.0))
    jz = float(_field(data, "model", "jz", _NUM, 1.0))

    allowed = ("jx", "jz") if lattice == "chain" else COUPLINGS
    coupling = _field(
        data, "sweep", "coupling", (str,), _REQUIRED,
        lambda v: v in allowed, f"must be one of {allowed}",
    )
    start = float(_field(data, "sweep", "start", _NUM, _REQUIRED))
    stop = float(_field(data, "sweep", "stop", _NUM, _REQUIRED))
    step = float(_field(data, "sweep", "step", _NUM, _REQUIRED, lambda v: v > 0, "must be positive"))
    if stop < start:
        raise ConfigError(f"sweep.stop: must be >= sweep.start, got {stop} < {start}")

    dk_raw = _field(
        data, "shift", "dk", (str, int, float), "special",
        lambda v: v == "special" if isinstance(v, str) else True,
        "must be 'special' or a number",
    )
    dk = None if dk_raw == "special" else float(dk_raw)
    shift_points = _field(
        data, "shift", "points", (int,), 32, lambda v: v >= 2, "must be >= 2"
    )

    backend = _field(
        data, "measure", "backend", (str,), "exact",
        lambda v: v in BACKENDS, f"must be one of {BACKENDS}",
    )
    shots = _field(data, "measure", "shots", (int,), DEFAULT_SHOTS, lambda v: v >= 1, "must be >= 1")
    seed = _field(data, "measure", "seed", (int,), 0)
    half = (sites // 4 if lattice == "chain" else lx // 2) or 1
    subsystem = _field(
        data, "measure", "subsystem", (int,), half, lambda v: v >= 1, "must be >= 1"
    )
    limit = (sites // 2 if lattice == "chain" else lx)
    if subsystem > limit:
        raise ConfigError(
            f"measure.subsystem: at most {limit} for this model, got {subsystem}"
        )
    depol2 = float(_field(
        data, "measure", "depol2", _NUM, 0.01,
        lambda v: 0.0 <= v <= 1.0, "must lie in [0, 1]",
    ))
    readout_flip = float(_field(
        data, "measure", "readout_flip", _NUM, 0.02,
        lambda v: 0.0 <= v <= 1.0, "must lie in [0, 1]",
    ))
    if lattice == "honeycomb" and backend != "exact":
        raise ConfigError(
            "measure.backend: honeycomb sweeps run on the exact correlator path; "
            f"only 'exact' is supported, got {backend!r}"
        )

    flag_ratio = float(_field(
        data, "detect", "flag_ratio", _NUM, 3.0, lambda v: v > 0, "must be positive"
    ))

    row_coupling = _field(
        data, "diagram", "row_coupling", (str,), "jz" if coupling != "jz" else "jx",
        lambda v: v in allowed, f"must be one of {allowed}",
    )
    if row_coupling == coupling:
        raise ConfigError(
            f"diagram.row_coupling: must differ from sweep.coupling {coupling!r}"
        )
    rows_raw = _field(data, "diagram", "rows", (list,), [])
    rows = []
    for i, v in enumerate(rows_raw):
        if isinstance(v, bool) or not isinstance(v, _NUM):
            raise ConfigError(f"diagram.rows[{i}]: expected a number, got {type(v).__name__}")
        rows.append(float(v))

    return SweepConfig(
        lattice=lattice, sites=sites, lx=lx, ly=ly, jx=jx, jy=jy, jz=jz,
        coupling=coupling, start=start, stop=stop, step=step,
        dk=dk, shift_points=shift_points,
        backend=backend, shots=shots, seed=seed, subsystem=subsystem,
        depol2=depol2, readout_flip=readout_flip, flag_ratio=flag_ratio,
        row_coupling=row_coupling, rows=tuple(rows),
    )


def load_config(path: str) -> SweepConfig:
    """Read a TOML (or .json) sweep configuration file."""
    try:
        if str(path).endswith(".json"):
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        else:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a table")
    return config_from_dict(data)


def _point_seeds(seed: int, count: int) -> list:
    seq = np.random.SeedSequence(seed).generate_state(max(count, 1), dtype=np.uint64)
    return [int(s) for s in seq]


def _chain_point(config: SweepConfig, params: ModelParams, dk: float, point_seed: int):
    plan = make_plan(params, dk=dk, enforce_ph=True)
    circuit = symmetry_enforced_circuit(plan)
    noise = None
    if config.backend == "noisy":
        noise = NoiseModel(depol2=config.depol2, readout_flip=config.readout_flip)
        state = run_density(circuit, noise=noise)
    else:
        state = run(circuit)
    settings = None
    clamp = None
    if config.backend != "exact":
        settings = MeasureSettings("shots", config.shots, noise, point_seed)
        clamp = 5.0 / math.sqrt(config.shots)
    sub = list(plan.measured_wires[: config.subsystem])
    corr = correlation_matrix(state, sub, basis="mode", settings=settings)
    return entanglement(corr, clamp=clamp)


def run_sweep(config: SweepConfig) -> list:
    """Entropy along the coupling grid; one CSV-ready row dict per point."""
    values = config.grid()
    base = config.base_params()
    seeds = _point_seeds(config.seed, len(values))
    rows = []
    for i, value in enumerate(values):
        params = replace(base, **{config.coupling: value})
        if config.lattice == "chain":
            dk = math.pi / params.n_cells if config.dk is None else config.dk
            result = _chain_point(config, params, dk, seeds[i])
        else:
            dk = 0.0 if config.dk is None else config.dk
            result = exact_entanglement(
                params, None, config.subsystem, dk=(dk, 0.0) if dk else None
            )
        rows.append(
            {
                "lattice": params.lattice,
                "n_cells": params.n_cells,
                "lx": params.lx,
                "ly": params.ly,
                "jx": params.jx,
                "jy": params.jy,
                "jz": params.jz,
                "dk": dk,
                "entropy": result.entropy,
            }
        )
    return rows


def detect_boundary(rows, coupling: str, flag_ratio: float = 3.0) -> JumpReport:
    """Largest adjacent entropy step along a sweep table."""
    xs = [row[coupling] for row in rows]
    ys = [row["entropy"] for row in rows]
    return detect_jump(xs, ys, flag_ratio=flag_ratio)


def spectrum_sweep(config: SweepConfig) -> list:
    """Entanglement spectrum of the shifted circuit over a full shift period.

    The shift grid covers [0, 2pi) uniformly; each row carries one
    correlation-matrix eigenvalue. Chain only.
    """
    if config.lattice != "chain":
        raise ConfigError("model.lattice: spectrum sweeps cover the chain only")
    params = config.base_params()
    params = replace(params, **{config.coupling: round(config.start, 12)})
    shifts = [2.0 * math.pi * j / config.shift_points for j in range(config.shift_points)]
    seeds = _point_seeds(config.seed, len(shifts))
    rows = []
    for i, dk in enumerate(shifts):
        result = _chain_point(config, params, dk, seeds[i])
        for lam in result.spectrum:
            rows.append(
                {
                    "lattice": params.lattice,
                    "n_cells": params.n_cells,
                    "lx": params.lx,
                    "ly": params.ly,
                    "jx": params.jx,
                    "jy": params.jy,
                    "jz": params.jz,
                    "dk": dk,
                    "lam": float(lam),
                }
            )
    return rows


def gap_closure(base: ModelParams, coupling: str, values) -> float:
    """First grid value where the Bloch gap closes; nan when it never does.

    A boundary crossing inverts the band at a momentum where the pairing
    component can also vanish, so the gap only needs sampling at the sin k = 0
    points. There the gap is |const +/- coupling|, hence a closure inside the
    grid pulls some sample below half a grid spacing.
    """
    values = np.asarray(values, dtype=float)
    if base.lattice == "chain":
        kk = np.array([0.0, math.pi])
    else:
        axis = (0.0, math.pi)
        kk = np.array([(a, b) for a in axis for b in axis])
    gaps = np.array([
        float(bloch(replace(base, **{coupling: float(v)}), kk).energy.min())
        for v in values
    ])
    spacing = float(values[1] - values[0]) if len(values) > 1 else 0.0
    tol = 0.5001 * spacing + 1e-12
    hits = np.flatnonzero(gaps <= tol)
    if hits.size == 0:
        return float("nan")
    return float(values[hits[0]])


def phase_diagram(config: SweepConfig) -> dict:
    """Per-row sweeps, detected boundaries, and the gap-closure reference."""
    if not config.rows:
        raise ConfigError("diagram.rows: at least one row value is required")
    table = []
    sweeps = []
    for row_value in config.rows:
        row_config = replace(config, **{config.row_coupling: row_value})
        rows = run_sweep(row_config)
        report = detect_boundary(rows, config.coupling, config.flag_ratio)
        closure = gap_closure(
            row_config.base_params(), config.coupling,
            np.linspace(config.start, config.stop, 2001),
        )
        table.append(
            {
                "lattice": config.lattice,
                "row_coupling": config.row_coupling,
                "row_value": row_value,
                "swept": config.coupling,
                "boundary": report.location if report.found else float("nan"),
                "magnitude": report.magnitude,
                "found": int(report.found),
                "gap_closure": closure,
            }
        )
        sweeps.extend(rows)
    return {"rows": table, "sweeps": sweeps}


def _format_cell(value) -> str:
    if isinstance(value, float):
        return f"{value + 0.0:.12g}"
    return str(value)


def rows_to_csv(rows, columns) -> str:
    """Serialize row dicts under the tagged CSV header."""
    out = io.StringIO()
    out.write(CSV_TAG + "\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format_cell(row[c]) for c in columns])
    return out.getvalue()


def read_csv(path: str):
    """Read a tagged CSV back into column names plus row dicts."""
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().strip()
        if first != CSV_TAG:
            raise ConfigError(f"{path}: missing {CSV_TAG} header")
        reader = csv.DictReader(fh)
        rows = [dict(r) for r in reader]
        return reader.fieldnames, rows


def _write_output(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    print(f"wrote {out}")


def _plot(path: str, out: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    columns, rows = read_csv(path)
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    if "lam" in columns:
        xs = [float(r["dk"]) for r in rows]
        ys = [float(r["lam"]) for r in rows]
        ax.plot(xs, ys, ".", ms=4)
        ax.set_xlabel("dk")
        ax.set_ylabel("correlation spectrum")
    elif "boundary" in columns:
        xs = [float(r["row_value"]) for r in rows]
        det = [float(r["boundary"]) for r in rows]
        ref = [float(r["gap_closure"]) for r in rows]
        ax.plot(xs, det, "o", label="detected")
        ax.plot(xs, ref, "-", label="gap closure")
        ax.set_xlabel(rows[0]["row_coupling"] if rows else "row")
        ax.set_ylabel(rows[0]["swept"] if rows else "boundary")
        ax.legend(frameon=False)
    elif "entropy" in columns:
        swept = None
        for c in COUPLINGS:
            if len({r[c] for r in rows}) > 1:
                swept = c
        swept = swept or "jx"
        xs = [float(r[swept]) for r in rows]
        ys = [float(r["entropy"]) for r in rows]
        ax.plot(xs, ys, "o-", ms=3)
        ax.set_xlabel(swept)
        ax.set_ylabel("entropy")
    else:
        raise ConfigError(f"{path}: no plottable column found")
    fig.tight_layout()
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    print(f"wrote {out}")


def _verify_lines() -> list:
    """Oracle-equivalence checks; (label, deviation, bound) triples."""
    from .ff_oracle import exact_correlators
    from .kitaev_models import spin_hamiltonian

    checks = []

    for sites, jx in ((4, 0.5), (4, 1.5), (8, 1.0)):
        params = ModelParams("chain", jx=jx, jz=1.0, n_sites=sites)
        plan = make_plan(params)
        state = run(prepare_ground_state(plan))
        ham = spin_hamiltonian(params)
        energy = float(np.real(np.vdot(state.amps, ham @ state.amps)))
        exact = exact_diagonalization(params)[0]
        checks.append((f"chain prep energy sites={sites} jx={jx}", abs(energy - exact), 1e-9))

    params = ModelParams("honeycomb", jx=0.3, jy=0.7, jz=1.0, lx=4, ly=1)
    plan = make_plan(params)
    state = run(prepare_ground_state(plan))
    ham = spin_hamiltonian(params)
    energy = float(np.real(np.vdot(state.amps, ham @ state.amps)))
    exact = exact_diagonalization(params)[0]
    checks.append(("honeycomb prep energy 4x1", abs(energy - exact), 1e-9))

    for jx, dk in ((0.5, 0.4), (1.5, math.pi / 2)):
        params = ModelParams("chain", jx=jx, jz=1.0, n_sites=4)
        plan = make_plan(params, dk=dk, enforce_ph=True)
        state = run(symmetry_enforced_circuit(plan))
        corr = correlation_matrix(state, list(plan.measured_wires), basis="mode")
        grid = momentum_grid(params, dk)
        ref = exact_majorana_matrix(params, grid, range(1, params.n_cells + 1))
        checks.append(
            (f"shifted circuit correlators jx={jx} dk={dk:.3f}",
             float(np.max(np.abs(corr - ref))), 1e-8)
        )

    params = ModelParams("chain", jx=0.8, jz=1.0, n_sites=8)
    grid = momentum_grid(params, 0.0)
    ref = exact_majorana_matrix(params, grid, range(1, 5))
    doubled = exact_majorana_matrix(params, np.concatenate([grid, grid]), range(1, 5))
    checks.append(
        ("doubled-grid correlator normalization",
         float(np.max(np.abs(doubled - ref))), 1e-12)
    )
    brute = bdg_ground_correlations(params)
    ex = exact_correlators(params, grid)
    cells = params.n_cells
    n, m = np.meshgrid(np.arange(cells), np.arange(cells), indexing="ij")
    checks.append(
        ("brute-force vacuum pair amplitude",
         float(np.max(np.abs(brute["fdag_fdag"] - ex.fdag_fdag(n, m)))), 1e-10)
    )
    checks.append(
        ("brute-force vacuum occupation",
         float(np.max(np.abs(brute["fdag_f"] - ex.fdag_f(n, m)))), 1e-10)
    )
    return checks


def _cmd_sweep(args) -> int:
    config = _config_with_overrides(args)
    rows = run_sweep(config)
    report = detect_boundary(rows, config.coupling, config.flag_ratio)
    _write_output(rows_to_csv(rows, SWEEP_COLUMNS), args.out)
    if report.found:
        print(f"boundary {config.coupling}={report.location:.6g} step {report.magnitude:.6g}")
    else:
        print(f"no boundary flagged (max step {report.magnitude:.6g})")
    return 0


def _cmd_diagram(args) -> int:
    config = _config_with_overrides(args)
    result = phase_diagram(config)
    _write_output(rows_to_csv(result["rows"], DIAGRAM_COLUMNS), args.out)
    return 0


def _cmd_spectrum(args) -> int:
    config = _config_with_overrides(args)
    rows = spectrum_sweep(config)
    _write_output(rows_to_csv(rows, SPECTRUM_COLUMNS), args.out)
    return 0


def _cmd_verify(args) -> int:
    failures = 0
    for label, dev, bound in _verify_lines():
        ok = dev <= bound
        failures += 0 if ok else 1
        print(f"{'PASS' if ok else 'FAIL'} {label}: dev={dev:.3e} bound={bound:g}")
    if failures:
        raise InvariantViolation(f"{failures} oracle-equivalence check(s) failed")
    print("all oracle-equivalence checks passed")
    return 0


def _cmd_plot(args) -> int:
    _plot(args.csv, args.out or "plot.svg")
    return 0


def _config_with_overrides(args) -> SweepConfig:
    config = load_config(args.config)
    fields = {}
    if args.backend is not None:
        if args.backend not in BACKENDS:
            raise ConfigError(f"--backend: must be one of {BACKENDS}, got {args.backend!r}")
        if config.lattice == "honeycomb" and args.backend != "exact":
            raise ConfigError("--backend: honeycomb sweeps support 'exact' only")
        fields["backend"] = args.backend
    if args.shots is not None:
        if args.shots < 1:
            raise ConfigError(f"--shots: must be >= 1, got {args.shots}")
        fields["shots"] = args.shots
    if args.seed is not None:
        fields["seed"] = args.seed
    return replace(config, **fields) if fields else config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="braidkit",
        description="entanglement sweeps for Kitaev-type spin models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        if config_required:
            p.add_argument("--config", required=True, help="TOML or JSON sweep config")
        p.add_argument("--backend", choices=BACKENDS, default=None)
        p.add_argument("--shots", type=int, default=None, help="samples per expectation (default 8196)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output path ('-' for stdout)")

    common(sub.add_parser("sweep", help="entropy along one coupling grid"))
    common(sub.add_parser("diagram", help="boundary per row of a second coupling"))
    common(sub.add_parser("spectrum", help="correlation spectrum over the shift period"))
    sub.add_parser("verify", help="run the oracle-equivalence checks")
    plot = sub.add_parser("plot", help="render a tagged CSV as SVG")
    plot.add_argument("--csv", required=True, help="CSV produced by sweep/diagram/spectrum")
    plot.add_argument("--out", default=None, help="SVG output path")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "sweep": _cmd_sweep,
        "diagram": _cmd_diagram,
        "spectrum": _cmd_spectrum,
        "verify": _cmd_verify,
        "plot": _cmd_plot,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
