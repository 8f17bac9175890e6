"""Sweep configuration, boundary scans, and the command line front end."""

import copy
import json
import math
import textwrap

import numpy as np
import pytest

from braidkit.kitaev_models import ModelParams
from braidkit.phase_scan import (
    CSV_TAG,
    DIAGRAM_COLUMNS,
    SPECTRUM_COLUMNS,
    SWEEP_COLUMNS,
    ConfigError,
    SweepConfig,
    config_from_dict,
    detect_boundary,
    gap_closure,
    load_config,
    main,
    phase_diagram,
    read_csv,
    rows_to_csv,
    run_sweep,
    spectrum_sweep,
)
from braidkit.sv_core import InvariantViolation

_DROP = object()

CHAIN_BASE = {
    "model": {"lattice": "chain", "sites": 4, "jz": 1.0},
    "sweep": {"coupling": "jx", "start": 0.0, "stop": 2.0, "step": 0.1},
}
HONEY_BASE = {
    "model": {"lattice": "honeycomb", "lx": 8, "ly": 8, "jx": 0.1, "jz": 1.0},
    "sweep": {"coupling": "jy", "start": 0.5, "stop": 1.5, "step": 0.5},
}


def make_data(base, **sections):
    data = copy.deepcopy(base)
    for name, table in sections.items():
        if table is None:
            data.pop(name, None)
            continue
        data.setdefault(name, {})
        for key, val in table.items():
            if val is _DROP:
                data[name].pop(key, None)
            else:
                data[name][key] = val
    return data


def test_grid_hits_both_endpoints():
    grid = SweepConfig(start=0.0, stop=2.0, step=0.1).grid()
    assert len(grid) == 21
    assert grid[0] == 0.0 and grid[-1] == 2.0
    assert grid[3] == 0.3  # rounded, no 0.30000000000000004 artifacts
    assert SweepConfig(start=0.0, stop=0.25, step=0.1).grid() == [0.0, 0.1, 0.2]


def test_config_defaults():
    cfg = config_from_dict(copy.deepcopy(CHAIN_BASE))
    assert cfg.dk is None and cfg.backend == "exact"
    assert cfg.subsystem == 1 and cfg.shots == 8196
    assert cfg.row_coupling == "jz" and cfg.rows == ()
    assert cfg.base_params() == ModelParams("chain", jx=0.0, jy=0.0, jz=1.0, n_sites=4)
    honey = config_from_dict(copy.deepcopy(HONEY_BASE))
    assert honey.subsystem == 4 and honey.lx == 8 and honey.ly == 8


def test_config_errors_name_their_field():
    cases = [
        (make_data(CHAIN_BASE, bogus={}), "unknown config section"),
        (make_data(CHAIN_BASE, model={"lattice": _DROP}), "model.lattice: required"),
        (make_data(CHAIN_BASE, model={"lattice": "square"}), "'chain' or 'honeycomb'"),
        (make_data(CHAIN_BASE, model={"sites": 5}), "even site count"),
        (make_data(CHAIN_BASE, model={"sites": 6}), "power-of-two"),
        (make_data(CHAIN_BASE, model={"jx": True}), "model.jx: expected"),
        (make_data(CHAIN_BASE, sweep={"coupling": "jy"}), "sweep.coupling"),
        (make_data(CHAIN_BASE, sweep={"coupling": _DROP}), "sweep.coupling: required"),
        (make_data(CHAIN_BASE, sweep={"step": 0}), "sweep.step: must be positive"),
        (make_data(CHAIN_BASE, sweep={"stop": -1.0}), "sweep.stop"),
        (make_data(CHAIN_BASE, shift={"dk": "weird"}), "shift.dk"),
        (make_data(CHAIN_BASE, measure={"backend": "guess"}), "measure.backend"),
        (make_data(CHAIN_BASE, measure={"shots": 0}), "must be >= 1"),
        (make_data(CHAIN_BASE, measure={"subsystem": 3}), "at most 2"),
        (make_data(CHAIN_BASE, measure={"depol2": 1.5}), "must lie in [0, 1]"),
        (make_data(CHAIN_BASE, detect={"flag_ratio": -1.0}), "detect.flag_ratio"),
        (make_data(CHAIN_BASE, diagram={"row_coupling": "jx"}), "must differ"),
        (make_data(CHAIN_BASE, diagram={"rows": [0.5, True]}), "diagram.rows[1]"),
        (make_data(HONEY_BASE, model={"lx": 1}), "model.lx"),
        (make_data(HONEY_BASE, measure={"backend": "shots"}), "measure.backend"),
    ]
    for data, fragment in cases:
        with pytest.raises(ConfigError) as err:
            config_from_dict(data)
        assert fragment in str(err.value), f"{fragment!r} not in {err.value}"


def test_load_config_reads_toml_and_json(tmp_path):
    toml_path = tmp_path / "sweep.toml"
    toml_path.write_text(textwrap.dedent("""
        [model]
        lattice = "chain"
        sites = 4
        jz = 1.0

        [sweep]
        coupling = "jx"
        start = 0.0
        stop = 1.0
        step = 0.5

        [shift]
        dk = 0.3
    """))
    cfg = load_config(str(toml_path))
    assert cfg.dk == 0.3 and cfg.grid() == [0.0, 0.5, 1.0]

    json_path = tmp_path / "sweep.json"
    data = make_data(CHAIN_BASE, shift={"dk": "special"})
    json_path.write_text(json.dumps(data))
    assert load_config(str(json_path)).dk is None


def test_load_config_failure_modes(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(str(tmp_path / "missing.toml"))
    bad = tmp_path / "bad.toml"
    bad.write_text("= nope\n")
    with pytest.raises(ConfigError, match="cannot parse"):
        load_config(str(bad))
    arr = tmp_path / "arr.json"
    arr.write_text("[1, 2]")
    with pytest.raises(ConfigError, match="root must be a table"):
        load_config(str(arr))


def test_chain_sweep_locates_the_boundary():
    cfg = config_from_dict(copy.deepcopy(CHAIN_BASE))
    rows = run_sweep(cfg)
    assert len(rows) == 21
    assert rows[0]["dk"] == pytest.approx(math.pi / 2.0)
    report = detect_boundary(rows, "jx", cfg.flag_ratio)
    assert report.found
    assert report.location == pytest.approx(1.05, abs=1e-12)
    assert report.magnitude == pytest.approx(math.log(2.0), abs=1e-9)


def test_sampled_sweep_is_seed_deterministic():
    data = make_data(
        CHAIN_BASE,
        sweep={"start": 0.5, "stop": 1.5, "step": 0.5},
        measure={"backend": "shots", "shots": 2048, "seed": 5},
    )
    cfg = config_from_dict(data)
    text1 = rows_to_csv(run_sweep(cfg), SWEEP_COLUMNS)
    text2 = rows_to_csv(run_sweep(cfg), SWEEP_COLUMNS)
    assert text1 == text2
    other = config_from_dict(make_data(data, measure={"seed": 6}))
    assert rows_to_csv(run_sweep(other), SWEEP_COLUMNS) != text1


def test_noisy_sweep_keeps_boundary_but_shrinks_step():
    data = make_data(
        CHAIN_BASE,
        measure={"backend": "noisy", "shots": 8196, "seed": 7,
                 "depol2": 0.01, "readout_flip": 0.02},
    )
    rows = run_sweep(config_from_dict(data))
    report = detect_boundary(rows, "jx")
    assert report.found
    assert report.location == pytest.approx(1.05, abs=1e-12)
    assert 0.2 < report.magnitude < math.log(2.0) - 0.05
    assert all(0.0 <= r["entropy"] <= math.log(2.0) + 1e-9 for r in rows)


def test_honeycomb_sweep_uses_exact_correlators():
    rows = run_sweep(config_from_dict(copy.deepcopy(HONEY_BASE)))
    assert len(rows) == 3
    assert rows[0]["lattice"] == "honeycomb" and rows[0]["lx"] == 8
    assert rows[0]["n_cells"] == 64 and rows[0]["dk"] == 0.0
    assert all(np.isfinite(r["entropy"]) and r["entropy"] >= 0.0 for r in rows)


def test_spectrum_sweep_special_point_and_gapped_floor():
    data = make_data(CHAIN_BASE, sweep={"start": 1.5, "stop": 1.5, "step": 0.1})
    rows = spectrum_sweep(config_from_dict(data))
    assert len(rows) == 64  # 32 shifts, two eigenvalues per shift
    special = [r["lam"] for r in rows if r["dk"] == pytest.approx(math.pi / 2.0)]
    assert len(special) == 2
    assert all(abs(lam - 0.5) <= 1e-8 for lam in special)

    data = make_data(CHAIN_BASE, sweep={"start": 0.5, "stop": 0.5, "step": 0.1})
    rows = spectrum_sweep(config_from_dict(data))
    assert min(abs(r["lam"] - 0.5) for r in rows) >= 0.05


def test_spectrum_sweep_rejects_honeycomb():
    with pytest.raises(ConfigError, match="chain only"):
        spectrum_sweep(config_from_dict(copy.deepcopy(HONEY_BASE)))


def test_gap_closure_reference_values():
    chain = ModelParams("chain", jx=0.0, jz=1.0, n_sites=4)
    assert gap_closure(chain, "jx", np.linspace(0.0, 2.0, 21)) == pytest.approx(1.0)
    honey = ModelParams("honeycomb", jx=0.1, jy=0.0, jz=1.0, lx=8, ly=8)
    closure = gap_closure(honey, "jy", np.linspace(0.4, 1.4, 21))
    assert closure == pytest.approx(0.9, abs=1e-9)
    assert math.isnan(gap_closure(honey, "jy", np.linspace(0.0, 0.5, 11)))


def test_phase_diagram_matches_gap_closure():
    data = make_data(
        CHAIN_BASE,
        sweep={"start": 0.5, "stop": 1.5, "step": 0.1},
        diagram={"row_coupling": "jz", "rows": [1.0]},
    )
    result = phase_diagram(config_from_dict(data))
    assert len(result["sweeps"]) == 11
    row = result["rows"][0]
    assert row["found"] == 1
    assert row["boundary"] == pytest.approx(1.05, abs=1e-12)
    assert row["magnitude"] == pytest.approx(math.log(2.0), abs=1e-9)
    assert row["gap_closure"] == pytest.approx(1.0)
    with pytest.raises(ConfigError, match="diagram.rows"):
        phase_diagram(config_from_dict(copy.deepcopy(CHAIN_BASE)))


def test_csv_round_trip_and_tag(tmp_path):
    data = make_data(CHAIN_BASE, sweep={"start": 0.5, "stop": 1.5, "step": 0.5})
    rows = run_sweep(config_from_dict(data))
    text = rows_to_csv(rows, SWEEP_COLUMNS)
    assert text.startswith(CSV_TAG + "\n")
    path = tmp_path / "sweep.csv"
    path.write_text(text)
    fieldnames, back = read_csv(str(path))
    assert tuple(fieldnames) == SWEEP_COLUMNS
    assert len(back) == len(rows)
    for row, orig in zip(back, rows):
        assert float(row["entropy"]) == pytest.approx(orig["entropy"], abs=1e-9)
        assert row["lattice"] == "chain"

    untagged = tmp_path / "plain.csv"
    untagged.write_text("a,b\n1,2\n")
    with pytest.raises(ConfigError, match="missing"):
        read_csv(str(untagged))


def test_csv_normalizes_negative_zero():
    text = rows_to_csv([{"a": -0.0}], ("a",))
    assert text.splitlines()[-1] == "0"


def write_cli_config(tmp_path):
    path = tmp_path / "cli.toml"
    path.write_text(textwrap.dedent("""
        [model]
        lattice = "chain"
        sites = 4
        jz = 1.0

        [sweep]
        coupling = "jx"
        start = 0.5
        stop = 1.5
        step = 0.5
    """))
    return str(path)


def test_cli_sweep_writes_tagged_csv(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code = main(["sweep", "--config", write_cli_config(tmp_path), "--out", str(out)])
    assert code == 0
    assert out.read_text().startswith(CSV_TAG)
    assert f"wrote {out}" in capsys.readouterr().out


def test_cli_diagram_writes_boundary_table(tmp_path):
    cfg = tmp_path / "diagram.toml"
    cfg.write_text(textwrap.dedent("""
        [model]
        lattice = "chain"
        sites = 4
        jz = 1.0

        [sweep]
        coupling = "jx"
        start = 0.5
        stop = 1.5
        step = 0.1

        [diagram]
        row_coupling = "jz"
        rows = [1.0]
    """))
    out = tmp_path / "diagram.csv"
    assert main(["diagram", "--config", str(cfg), "--out", str(out)]) == 0
    fieldnames, rows = read_csv(str(out))
    assert tuple(fieldnames) == DIAGRAM_COLUMNS
    assert float(rows[0]["boundary"]) == pytest.approx(1.05, abs=1e-9)


def test_cli_rejects_bad_config(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[model]\nlattice = 'pyrochlore'\n")
    assert main(["sweep", "--config", str(bad)]) == 2
    assert "config error" in capsys.readouterr().err


def test_cli_rejects_bad_overrides(tmp_path, capsys):
    cfg = write_cli_config(tmp_path)
    assert main(["sweep", "--config", cfg, "--shots", "0"]) == 2
    capsys.readouterr()


def test_cli_reports_invariant_violation(tmp_path, capsys, monkeypatch):
    def boom(config):
        raise InvariantViolation("forced failure")

    monkeypatch.setattr("braidkit.phase_scan.run_sweep", boom)
    assert main(["sweep", "--config", write_cli_config(tmp_path)]) == 3
    assert "invariant violation" in capsys.readouterr().err


def test_cli_plot_renders_svg(tmp_path, capsys):
    csv_path = tmp_path / "sweep.csv"
    code = main(["sweep", "--config", write_cli_config(tmp_path), "--out", str(csv_path)])
    assert code == 0
    svg_path = tmp_path / "sweep.svg"
    assert main(["plot", "--csv", str(csv_path), "--out", str(svg_path)]) == 0
    assert "<svg" in svg_path.read_text()
    capsys.readouterr()


def test_cli_verify_passes(capsys):
    assert main(["verify"]) == 0
    out = capsys.readouterr().out
    assert "all oracle-equivalence checks passed" in out
    assert out.count("PASS") == 9
