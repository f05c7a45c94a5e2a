import numpy as np
import pytest

from periodet.cli import (
    ConfigError,
    DEFAULT_THRESHOLD_GRID,
    REPRODUCE_FIGURES,
    REPRODUCE_TABLES,
    bundled_config,
    main,
    parse_config,
)

MINIMAL = """\
period = 2
rho = 0.01
pre_means = 0.0, 0.0
post_means = 2.0, 1.0
false_alarm_penalties = 20, 5
delay_penalties = 10, 1
"""


# ── config parsing ─────────────────────────────────────────────────────


def test_parse_minimal_config_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.period == 2
    assert cfg.grid_points == 100
    assert cfg.paths == 10_000
    assert cfg.horizon == 5000
    assert cfg.pre_vars == (1.0, 1.0)
    scenario = cfg.scenario()
    assert scenario.period == 2
    assert cfg.cost_spec().false_alarm == (20.0, 5.0)


def test_parse_config_reports_field_and_line():
    bad = MINIMAL.replace("false_alarm_penalties = 20, 5", "false_alarm_penalties = 20")
    with pytest.raises(ConfigError) as err:
        parse_config(bad, source="exp.cfg")
    msg = str(err.value)
    assert "false_alarm_penalties" in msg
    assert "exp.cfg:5" in msg


@pytest.mark.parametrize(
    "mutation,fragment",
    [
        (("rho = 0.01", "rho = 2.0"), "rho"),
        (("period = 2", "period = 2\nunknown_knob = 3"), "unknown field"),
        (("period = 2", "period = 2\nperiod = 2"), "duplicate"),
        (("rho = 0.01", "rho = abc"), "bad value"),
        (("period = 2\n", ""), "missing required"),
        (("rho = 0.01", "rho 0.01"), "expected 'key = value'"),
    ],
)
def test_parse_config_rejects(mutation, fragment):
    old, new = mutation
    with pytest.raises(ConfigError, match=fragment):
        parse_config(MINIMAL.replace(old, new))


def test_bundled_configs_all_parse():
    for table in REPRODUCE_TABLES.values():
        for row in table:
            cfg = bundled_config(row.config)
            assert cfg.period in (2, 4)
    for name in REPRODUCE_FIGURES.values():
        bundled_config(name)


# ── subcommands ────────────────────────────────────────────────────────


@pytest.fixture()
def config_file(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text(MINIMAL + "paths = 400\nseed = 3\n")
    return path


def test_cmd_solve_writes_artifacts(tmp_path, config_file, capsys):
    out_dir = tmp_path / "out"
    assert main(["solve", "--config", str(config_file), "--out-dir", str(out_dir)]) == 0
    captured = capsys.readouterr().out
    assert "value at p=0: 4.9485" in captured
    assert "0.6061" in captured
    for suffix in ("curves", "history", "thresholds"):
        assert (out_dir / f"exp_{suffix}.csv").exists()
    header = (out_dir / "exp_curves.csv").read_text().splitlines()[0]
    assert header == "p,stage_0_cost,stage_1_cost,stop_cost_0,stop_cost_1"


def test_cmd_solve_nonconvergence_exit_code(tmp_path, config_file):
    text = config_file.read_text() + "tolerance = 1e-15\nmax_cycles = 2\n"
    path = config_file.parent / "slow.cfg"
    path.write_text(text)
    assert main(["solve", "--config", str(path), "--out-dir", str(config_file.parent)]) == 3


def test_cmd_simulate_identical_bytes_for_same_seed(tmp_path, config_file):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        code = main([
            "simulate", "--config", str(config_file), "--out-dir", str(out),
            "--policy", "single:0.4",
        ])
        assert code == 0
    assert (out1 / "exp_simulate.csv").read_bytes() == (out2 / "exp_simulate.csv").read_bytes()


def test_cmd_simulate_single_threshold_never_beats_solver_policy(tmp_path, config_file, capsys):
    def cost_of(policy):
        assert main([
            "simulate", "--config", str(config_file), "--out-dir", str(tmp_path / "o"),
            "--policy", policy, "--paths", "4000",
        ]) == 0
        out = capsys.readouterr().out
        return float(out.split("bayes cost: ")[1].split(" ")[0])

    assert cost_of("single:0.99") >= cost_of("optimal") - 0.3


def test_cmd_sweep(tmp_path, config_file, capsys):
    code = main([
        "sweep", "--config", str(config_file), "--out-dir", str(tmp_path),
        "--thresholds", "0.0,0.5",
    ])
    assert code == 0
    rows = (tmp_path / "exp_sweep.csv").read_text().splitlines()
    assert rows[0] == "threshold,cost,std_error,censored_fraction"
    assert len(rows) == 3
    assert "best single threshold" in capsys.readouterr().out


def test_cmd_tradeoff_columns_and_trace(tmp_path, config_file):
    code = main([
        "tradeoff", "--config", str(config_file), "--out-dir", str(tmp_path),
        "--alpha", "0.01", "--paths", "500",
    ])
    assert code == 0
    rows = (tmp_path / "exp_tradeoff.csv").read_text().splitlines()
    assert rows[0] == (
        "alpha,log_alpha_magnitude,add_sim,conditional_add_sim,"
        "pfa_sim,pfa_posterior,add_analytic"
    )
    assert len(rows) == 2
    trace = (tmp_path / "exp_trace.csv").read_text().splitlines()
    assert trace[0] == "n,p,change_active"
    body = np.array([row.split(",") for row in trace[1:]], dtype=float)
    assert np.all((body[:, 1] >= 0.0) & (body[:, 1] <= 1.0))
    assert set(body[:, 2]) <= {0.0, 1.0}
    # change marker is monotone: once active it stays active
    assert np.all(np.diff(body[:, 2]) >= 0)


def test_cmd_tradeoff_single_alpha_single_row(tmp_path, config_file):
    main([
        "tradeoff", "--config", str(config_file), "--out-dir", str(tmp_path),
        "--alpha", "0.05", "--paths", "200",
    ])
    assert len((tmp_path / "exp_tradeoff.csv").read_text().splitlines()) == 2


def test_cmd_reproduce_figure_small(tmp_path, capsys):
    code = main(["reproduce", "fig1", "--out-dir", str(tmp_path), "--paths", "500"])
    assert code == 0
    assert (tmp_path / "fig1_curves.csv").exists()
    assert (tmp_path / "fig1_sweep.csv").exists()
    assert "value at p=0" in capsys.readouterr().out


def test_cmd_mdp_solve_zero_costs(tmp_path, capsys):
    instance = tmp_path / "zero.mdp"
    instance.write_text(
        "states 2\nactions 1\nperiod 1\ndiscount 0.9\n"
        "kernel 0 0 0 0.5 0.5\nkernel 0 1 0 0.5 0.5\n"
        "cost 0 0 0 0.0\ncost 0 1 0 0.0\n"
    )
    assert main(["mdp-solve", str(instance), "--out-dir", str(tmp_path)]) == 0
    values = (tmp_path / "zero_values.csv").read_text().splitlines()
    assert values[1] == "0,0,0.0"
    assert values[2] == "0,1,0.0"


def test_cmd_mdp_solve_bundled_instance_matches_oracle(tmp_path):
    from importlib import resources

    from periodet import finite_horizon_oracle, load_instance, value_iterate

    src = resources.files("periodet.configs").joinpath("instance_three_state_t2.mdp")
    instance = tmp_path / "bundled.mdp"
    instance.write_text(src.read_text())
    assert main(["mdp-solve", str(instance), "--out-dir", str(tmp_path)]) == 0
    mdp = load_instance(instance)
    values = value_iterate(mdp, tol=1e-10)
    horizon = 300
    lower = finite_horizon_oracle(mdp, horizon)
    tail = mdp.discount**horizon * mdp.costs.max() / (1 - mdp.discount)
    slack = 1e-10 / (1 - mdp.discount)
    assert np.all(values.values[0] >= lower - slack)
    assert np.all(values.values[0] <= lower + tail + slack)


# ── exit codes ─────────────────────────────────────────────────────────


def test_exit_code_parse_failure(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("period = 2\n")  # missing required fields
    assert main(["solve", "--config", str(bad), "--out-dir", str(tmp_path)]) == 2
    assert "error:" in capsys.readouterr().err


def test_exit_code_instance_parse_failure(tmp_path, capsys):
    bad = tmp_path / "bad.mdp"
    bad.write_text("nonsense 1 2 3\n")
    assert main(["mdp-solve", str(bad), "--out-dir", str(tmp_path)]) == 2
    assert "line 1" in capsys.readouterr().err


def test_exit_code_runtime_failure(tmp_path, capsys):
    degenerate = tmp_path / "degenerate.cfg"
    degenerate.write_text(
        "period = 1\nrho = 0.01\npre_means = 0.0\npost_means = 0.0\n"
        "false_alarm_penalties = 5\ndelay_penalties = 1\npaths = 10\n"
    )
    code = main(["tradeoff", "--config", str(degenerate), "--out-dir", str(tmp_path)])
    assert code == 1
    assert "zero divergence" in capsys.readouterr().err


def test_default_threshold_grid_is_sorted_and_in_range():
    grid = np.asarray(DEFAULT_THRESHOLD_GRID)
    assert np.all(np.diff(grid) > 0)
    assert grid[0] > 0.0 and grid[-1] < 1.0
