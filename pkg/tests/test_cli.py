"""CLI tests."""

from pathlib import Path

from click.testing import CliRunner

from lade_lab.cli import cli


def _set_args(overrides: list[str]) -> list[str]:
    args: list[str] = []
    for item in overrides:
        args.extend(["--set", item])
    return args


def test_cli_version() -> None:
    """Test --version flag."""
    runner = CliRunner()
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert "lade-lab" in result.output
    assert "0.1.0" in result.output


def test_cli_help() -> None:
    """Test --help lists every command."""
    runner = CliRunner()
    result = runner.invoke(cli, ["--help"])
    assert result.exit_code == 0
    for command in ("gen-data", "train", "evaluate", "calibrate", "sweep", "status"):
        assert command in result.output


def test_pipeline_commands(tmp_root: Path, tiny_overrides: list[str]) -> None:
    """Test gen-data, train, evaluate, calibrate and status on one directory."""
    runner = CliRunner()
    out = str(tmp_root / "exp")

    result = runner.invoke(cli, ["gen-data", "--out", out, *_set_args(tiny_overrides)])
    assert result.exit_code == 0, result.output
    assert "Data generated" in result.output
    assert (tmp_root / "exp" / "config.toml").exists()

    # later commands pick up the config written by gen-data
    result = runner.invoke(cli, ["train", "--out", out])
    assert result.exit_code == 0, result.output
    assert "Training complete" in result.output

    result = runner.invoke(cli, ["evaluate", "--out", out])
    assert result.exit_code == 0, result.output
    assert (tmp_root / "exp" / "evaluation.csv").exists()
    assert (tmp_root / "exp" / "record.json").exists()

    result = runner.invoke(cli, ["calibrate", "--out", out])
    assert result.exit_code == 0, result.output
    assert (tmp_root / "exp" / "calibration" / "calibration_scalars.csv").exists()

    result = runner.invoke(cli, ["status", "--out", out])
    assert result.exit_code == 0, result.output
    assert "evaluated" in result.output


def test_config_file_option(tmp_root: Path) -> None:
    """Test --config reads a dotted-key file."""
    config = tmp_root / "tiny.toml"
    config.write_text(
        "world.C = 3\nworld.dim = 2\ntrain_profile.n_max = 20\ntrain_profile.mu = 5.0\n"
        "test.n_per_class = 10\ntest.mus = [2.0]\n",
        encoding="utf-8",
    )
    runner = CliRunner()
    result = runner.invoke(cli, ["gen-data", "--config", str(config), "--out", str(tmp_root / "exp")])
    assert result.exit_code == 0, result.output
    assert (tmp_root / "exp" / "data" / "test_backward_2.csv").exists()


def test_sweep_command(tmp_root: Path, tiny_overrides: list[str]) -> None:
    """Test sweep writes its table and reruns without retraining."""
    runner = CliRunner()
    args = ["sweep", "--axis", "alpha", "--out", str(tmp_root), *_set_args(tiny_overrides)]
    result = runner.invoke(cli, args)
    assert result.exit_code == 0, result.output
    assert (tmp_root / "sweep_alpha.csv").exists()
    records = (tmp_root / "results.jsonl").read_text(encoding="utf-8").splitlines()
    assert records[0].startswith("# config_hash=")
    assert len(records) == 1 + 2
    assert "Selected by validation" in result.output

    result = runner.invoke(cli, args)
    assert result.exit_code == 0, result.output
    assert (tmp_root / "results.jsonl").read_text(encoding="utf-8").splitlines() == records


def test_unknown_key_exits_with_config_error(tmp_root: Path) -> None:
    """Test an unknown config key exits with code 2."""
    runner = CliRunner()
    result = runner.invoke(cli, ["gen-data", "--out", str(tmp_root), "--set", "world.colour=3"])
    assert result.exit_code == 2
    assert "Error" in result.output


def test_missing_data_exits_with_io_error(tmp_root: Path) -> None:
    """Test training without generated data exits with code 4."""
    runner = CliRunner()
    result = runner.invoke(cli, ["train", "--out", str(tmp_root / "empty")])
    assert result.exit_code == 4
    assert "train.csv" in result.output


def test_invalid_axis_is_usage_error(tmp_root: Path) -> None:
    """Test an unknown sweep axis is rejected by the parser."""
    runner = CliRunner()
    result = runner.invoke(cli, ["sweep", "--axis", "dropout", "--out", str(tmp_root)])
    assert result.exit_code == 2


def test_corrupt_table_exits_with_io_error(tmp_root: Path, tiny_overrides: list[str]) -> None:
    """Test a training table emptied after gen-data exits with code 4."""
    runner = CliRunner()
    out = tmp_root / "exp"
    result = runner.invoke(cli, ["gen-data", "--out", str(out), *_set_args(tiny_overrides)])
    assert result.exit_code == 0, result.output
    train_csv = out / "data" / "train.csv"
    train_csv.write_text(train_csv.read_text(encoding="utf-8").split("\n", 1)[0] + "\n", encoding="utf-8")

    result = runner.invoke(cli, ["train", "--out", str(out)])
    assert result.exit_code == 4
    assert "train.csv" in result.output
