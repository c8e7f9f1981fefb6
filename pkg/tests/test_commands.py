import unittest
from unittest.mock import patch

import numpy as np
import pytest

from gldpc.main import main
from gldpc.services.channel_service import L_MAX
from gldpc.storage.files import read_plan, write_llr
from gldpc.utils.config_utils import load_config, parse_config_text
from gldpc.utils.exceptions import (
    EXIT_INCOMPATIBLE, EXIT_IO, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, InvalidParameterError
)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_construct_writes_code_files(tmp_path, capsys):
    code, out, _ = run(capsys, "construct", "--n", "49", "--mu", "1.0", "--out-dir", str(tmp_path))
    assert code == EXIT_OK
    assert "design rate     0.143" in out
    for name in ("code.alist", "code.plan", "code.component", "rate.txt"):
        assert (tmp_path / name).exists()
    assert (tmp_path / "code.plan").read_text().startswith("gldpc-plan v1")
    plan, component = read_plan(tmp_path / "code.plan")
    assert plan.zeta == tuple(range(14))
    assert plan.zeta_prime == ()
    assert component == "hamming74"


def test_construct_full_length(tmp_path, capsys):
    code, out, _ = run(capsys, "construct", "--gamma", "2", "--p", "7", "--n", "469",
                       "--mu", "1.0", "--component", "hamming74", "--out-dir", str(tmp_path))
    assert code == EXIT_OK
    assert "design rate     0.143" in out
    code, out, _ = run(capsys, "construct", "--n", "469", "--mu", "0", "--out-dir", str(tmp_path))
    assert "design rate     0.714" in out
    assert "structural" in out


def test_construct_infeasible_length(tmp_path, capsys):
    code, _, err = run(capsys, "construct", "--n", "468", "--out-dir", str(tmp_path))
    assert code == EXIT_VALIDATION
    assert "not divisible" in err


def test_train_with_zero_size_is_a_usage_error(tmp_path, capsys):
    code, _, _ = run(capsys, "train", "--size", "0", "--out-dir", str(tmp_path))
    assert code == EXIT_USAGE


def test_train_per_snr_writes_one_table_per_point(tmp_path, capsys):
    code, out, _ = run(capsys, "--seed", "3", "train", "--mode", "per-snr", "--size", "2",
                       "--ell-max", "5", "--snr-grid", "1,2.5", "--out-dir", str(tmp_path))
    assert code == EXIT_OK
    assert sorted(p.name for p in tmp_path.glob("*.gqt")) == [
        "qtable-snr-1.gqt", "qtable-snr-2.5.gqt"]


def test_report_on_empty_directory(tmp_path, capsys):
    code, _, err = run(capsys, "report", "--input", str(tmp_path))
    assert code == EXIT_IO
    assert "no runs found" in err


def test_missing_subcommand_exits_with_usage():
    with pytest.raises(SystemExit) as exc_info:
        main([])
    assert exc_info.value.code == EXIT_USAGE


class TestDecodeCommand(unittest.TestCase):

    @pytest.fixture(autouse=True)
    def _fixtures(self, tmp_path, capsys):
        self.tmp_path = tmp_path
        self.capsys = capsys

    def decode(self, *extra):
        code = main(["decode", "--llr", str(self.frame), "--out-dir", str(self.tmp_path),
                     *extra])
        return code, self.capsys.readouterr().out

    def test_noiseless_frame_converges_at_once(self):
        self.frame = write_llr(self.tmp_path / "frame.txt", np.full(49, L_MAX))
        for schedule in ("flooding", "random"):
            code, out = self.decode("--schedule", schedule)
            self.assertEqual(code, EXIT_OK)
            self.assertIn("converged:  yes", out)
            self.assertIn("iterations: 1", out)

    def test_trace_is_reproducible(self):
        llr = np.random.default_rng(0).normal(1.0, 2.0, size=49)
        self.frame = write_llr(self.tmp_path / "frame.txt", llr)
        _, first = self.decode("--schedule", "random", "--seed", "4", "--i-max", "5")
        _, second = self.decode("--schedule", "random", "--seed", "4", "--i-max", "5")
        self.assertEqual(first, second)
        trace = [line for line in first.splitlines() if line.startswith("trace:")]
        self.assertLessEqual(len(trace[0].split()) - 1, 5 * 14)

    def test_wrong_length_frame(self):
        self.frame = write_llr(self.tmp_path / "frame.txt", np.ones(48))
        code, _ = self.decode()
        self.assertEqual(code, EXIT_INCOMPATIBLE)

    def test_missing_policy(self):
        self.frame = write_llr(self.tmp_path / "frame.txt", np.ones(49))
        code, _ = self.decode("--schedule", "rl-mixed")
        self.assertEqual(code, EXIT_INCOMPATIBLE)


def test_sweep_flags_override_config_file(tmp_path, capsys):
    config = tmp_path / "exp.cfg"
    config.write_text("# desk run\nn = 49\nmu = 0.5\nsnr_grid = 1, 2\nmax_frames = 10\n"
                      "min_frame_errors = 1\n")
    with patch("gldpc.commands.sweep_commands.compare_schedulers") as mock_compare:
        mock_compare.return_value.curves = []
        code = main(["--config", str(config), "sweep", "--mu", "1.0", "--out-dir",
                     str(tmp_path)])
    assert code == EXIT_OK
    cfg = mock_compare.call_args[0][0]
    assert cfg.mu == 1.0
    assert cfg.snr_grid == (1.0, 2.0)
    assert cfg.max_frames == 10
    assert cfg.output_dir == str(tmp_path)


def test_sweep_writes_one_row_per_schedule_and_point(tmp_path, capsys):
    code = main(["sweep", "--snr-grid", "1,2,3", "--schedules", "flooding,random",
                 "--max-frames", "4", "--min-frame-errors", "1", "--i-max", "5",
                 "--out-dir", str(tmp_path)])
    assert code == EXIT_OK
    assert len((tmp_path / "fer.csv").read_text().splitlines()) == 1 + 3 * 2
    code, out, _ = run(capsys, "report", "--input", str(tmp_path))
    assert code == EXIT_OK
    assert "flooding" in out and "random" in out
    assert (tmp_path / "report.txt").exists()


def test_unknown_config_key_is_rejected(tmp_path, capsys):
    config = tmp_path / "exp.cfg"
    config.write_text("n = 49\nwidth = 3\n")
    code, _, err = run(capsys, "--config", str(config), "construct")
    assert code == EXIT_VALIDATION
    assert "width" in err


class TestConfigParsing(unittest.TestCase):

    def test_parse_lists_and_comments(self):
        values = parse_config_text("snr_grid = 1, 2, 4.5  # dB\nschedules=flooding\n\n"
                                   "min-frame-errors = 7\n")
        self.assertEqual(values, {"snr_grid": ["1", "2", "4.5"], "schedules": ["flooding"],
                                  "min_frame_errors": "7"})

    def test_parse_errors(self):
        with self.assertRaises(InvalidParameterError):
            parse_config_text("n 49\n")
        with self.assertRaises(InvalidParameterError):
            parse_config_text("n = 49\nn = 50\n")

    @patch.dict("os.environ", {"GLDPC_OUTPUT_DIR": "/tmp/gldpc-env"})
    def test_environment_supplies_output_dir(self):
        self.assertEqual(load_config().output_dir, "/tmp/gldpc-env")
        self.assertEqual(load_config(overrides={"output_dir": "x"}).output_dir, "x")

    def test_stopping_rule_validation(self):
        with self.assertRaises(InvalidParameterError):
            load_config(overrides={"min_frame_errors": 10, "max_frames": 5})
