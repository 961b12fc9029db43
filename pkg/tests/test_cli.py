"""CLI: config parsing, command outputs, determinism, exit codes."""

import csv
import io

import numpy as np
import pytest

from heatmpo.cli import ConfigError, main, parse_config_text

TINY_RUN = """
alpha = 0.1
omega_c = 5
temperature = 5
omega0 = 0
omega_tunnel = 1
initial = up
delta = 0.05
n_steps = 8        # short smoke run
depth = 4
p = 60
"""


def read_csv(path):
    meta, rows = [], []
    with open(path, encoding="utf-8") as fh:
        header = None
        for line in fh:
            if line.startswith("#"):
                meta.append(line.rstrip("\n"))
            elif header is None:
                header = line.strip().split(",")
            else:
                rows.append(line.strip().split(","))
    return meta, header, rows


class TestConfigParsing:
    def test_basic_and_comments(self):
        cfg = parse_config_text("alpha = 0.2 # inline\n# full line\nn_steps = 7\n")
        assert cfg == {"alpha": 0.2, "n_steps": 7}

    def test_unknown_keys_listed_exhaustively(self):
        with pytest.raises(ConfigError) as err:
            parse_config_text("alfa = 1\nn_stepz = 2\nalpha = 0.1\n")
        assert "alfa" in str(err.value) and "n_stepz" in str(err.value)

    def test_lists_only_on_sweep_keys(self):
        cfg = parse_config_text("alpha = 0.1, 0.2\n")
        assert cfg["alpha"] == [0.1, 0.2]
        with pytest.raises(ConfigError):
            parse_config_text("n_steps = 5, 6\n")

    def test_infinite_p(self):
        assert parse_config_text("p = inf\n")["p"] == float("inf")

    def test_malformed(self):
        with pytest.raises(ConfigError):
            parse_config_text("alpha 0.1\n")
        with pytest.raises(ConfigError):
            parse_config_text("alpha = zero\n")
        with pytest.raises(ConfigError):
            parse_config_text("alpha = 1\nalpha = 2\n")


def run_cli(tmp_path, command, config_text, name="out.csv", workers=1):
    cfg = tmp_path / "job.cfg"
    cfg.write_text(config_text, encoding="utf-8")
    out = tmp_path / name
    code = main([command, "--config", str(cfg), "--out", str(out),
                 "--workers", str(workers)])
    return code, out


class TestCommands:
    def test_heat_output(self, tmp_path):
        code, out = run_cli(tmp_path, "heat", TINY_RUN)
        assert code == 0
        meta, header, rows = read_csv(out)
        assert header[:5] == ["t", "chi_re", "chi_im", "mean_q", "var_q"]
        assert len(rows) == 9
        assert any("engine_version" in m for m in meta)
        assert any("alpha = 0.1" in m for m in meta)
        # t = 0 row is exact
        assert float(rows[0][1]) == 1.0 and float(rows[0][3]) == 0.0

    def test_dynamics_includes_markov_columns(self, tmp_path):
        code, out = run_cli(tmp_path, "dynamics", TINY_RUN)
        assert code == 0
        _, header, rows = read_csv(out)
        assert "s_x_markov" in header
        s_x = [float(r[header.index("s_x")]) for r in rows]
        assert abs(s_x[0] - 0.0) < 1e-12

    def test_dynamics_biased_omits_markov(self, tmp_path):
        cfg = TINY_RUN.replace("omega0 = 0", "omega0 = 1")
        code, out = run_cli(tmp_path, "dynamics", cfg)
        assert code == 0
        meta, header, _ = read_csv(out)
        assert "s_x_markov" not in header
        assert any("omitted" in m for m in meta)

    def test_oracle_ibm(self, tmp_path):
        code, out = run_cli(tmp_path, "oracle-ibm", TINY_RUN)
        assert code == 0
        _, header, rows = read_csv(out)
        mean = [float(r[header.index("mean_q")]) for r in rows]
        assert mean == sorted(mean)  # monotone mean heat

    def test_variational_sweep(self, tmp_path):
        cfg = "alpha = 0.1, 0.5\ntemperature = 0.1\nomega_tunnel = 1\n"
        code, out = run_cli(tmp_path, "variational", cfg)
        assert code == 0
        _, header, rows = read_csv(out)
        assert len(rows) == 2
        col = header.index("omega_renorm")
        assert float(rows[0][col]) > float(rows[1][col])

    def test_sweep_row_count_and_determinism(self, tmp_path):
        cfg = (TINY_RUN.replace("alpha = 0.1", "alpha = 0.05, 0.1")
               .replace("temperature = 5", "temperature = 2, 5"))
        code, out1 = run_cli(tmp_path, "sweep", cfg, name="s1.csv")
        assert code == 0
        _, _, rows1 = read_csv(out1)
        assert len(rows1) == 4  # cross product, no silent drops
        code, out2 = run_cli(tmp_path, "sweep", cfg, name="s2.csv", workers=2)
        assert code == 0
        _, _, rows2 = read_csv(out2)
        assert rows1 == rows2  # identical across worker counts

    def test_converge_table(self, tmp_path):
        cfg = """
alpha = 0.1
temperature = 1
omega_tunnel = 0
omega0 = 1
delta = 0.05
depth = 10, 20
p = 60
u = 0.01
t_pad = 0.5
axis = depth
"""
        code, out = run_cli(tmp_path, "converge", cfg)
        assert code == 0
        _, header, rows = read_csv(out)
        errs = [float(r[header.index("rel_err_mean")]) for r in rows]
        assert errs[0] > errs[1]

    def test_compare_against_dense(self, tmp_path):
        cfg = TINY_RUN.replace("p = 60", "p = inf") + "oracle = quapi\nu = 0.05\n"
        code, out = run_cli(tmp_path, "compare", cfg)
        assert code == 0
        _, header, rows = read_csv(out)
        max_err = max(float(r[header.index("abs_err")]) for r in rows)
        assert max_err < 1e-10

    def test_exit_code_config_error(self, tmp_path):
        code, _ = run_cli(tmp_path, "heat", "bogus_key = 1\n")
        assert code == 2
        code, _ = run_cli(tmp_path, "frobnicate", TINY_RUN)
        assert code == 2

    def test_exit_code_partial_sweep(self, tmp_path):
        # second temperature is invalid -> one failing row, exit 4
        cfg = TINY_RUN.replace("temperature = 5", "temperature = 5, -1")
        code, out = run_cli(tmp_path, "sweep", cfg)
        assert code == 4
        _, header, rows = read_csv(out)
        assert len(rows) == 2
        statuses = [r[-1] for r in rows]
        assert any(s == "ok" for s in statuses)
        assert any(s.startswith("error") for s in statuses)
