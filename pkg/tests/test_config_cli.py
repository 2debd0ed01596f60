import csv
import io
import json

import pytest
from click.testing import CliRunner

from quasilab.cli import main
from quasilab.config import RunConfig, load_config, parse_config_text
from quasilab.errors import ConfigError


def run(*args):
    return CliRunner().invoke(main, list(args))


def csv_body(text):
    return list(csv.reader(line for line in io.StringIO(text) if not line.startswith("#")))


def test_parse_config():
    vals = parse_config_text("# comment\npreset = twisted_koch\nwalks = 10_000\nscales = 0.1, 0.01\nseed = 4\n")
    assert vals == {"preset": "twisted_koch", "walks": 10000, "scales": (0.1, 0.01), "seed": 4}


@pytest.mark.parametrize("text,needle", [
    ("walks = 10\nbogus = 3\n", "line 2, field 'bogus'"),
    ("seed = 1\nseed = 2\n", "line 2, field 'seed'"),
    ("eta = wide\n", "line 1, field 'eta'"),
    ("just words\n", "line 1"),
])
def test_config_errors_name_line_and_field(text, needle):
    with pytest.raises(ConfigError) as e:
        parse_config_text(text)
    assert needle in str(e.value)


def test_seed_required_for_mc():
    with pytest.raises(ConfigError, match="seed"):
        RunConfig(command="pack").validate()
    RunConfig(command="words").validate()
    with pytest.raises(ConfigError, match="seed"):
        RunConfig(command="words", weights="mc").validate()
    with pytest.raises(ConfigError, match="eta"):
        RunConfig(command="words", eta=0.0).validate()


def test_overrides_beat_file(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("walks = 500\nseed = 3\n")
    cfg = load_config(str(p), walks=900, seed=None)
    assert cfg.walks == 900 and cfg.seed == 3


def test_cli_missing_seed_exit_1():
    r = run("pack", "--walks", "1000", "--delta", "0.05")
    assert r.exit_code == 1
    assert "seed" in r.output


def test_cli_config_error_exit_1(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("seed = 1\nwalkz = 3\n")
    r = run("measure", "--config", str(p))
    assert r.exit_code == 1
    assert "line 2, field 'walkz'" in r.output


def test_cli_words_surrogate():
    r = run("words", "--delta", repr(3.0 ** -2), "--delta", repr(3.0 ** -3), "--delta", repr(3.0 ** -4),
            "--alpha", "1.2618595071429148", "--eta", "0.05", "--gamma", "0.0")
    assert r.exit_code == 0, r.output
    lines = r.output.splitlines()
    assert lines[0].startswith("# quasilab")
    rows = csv_body(r.output)
    assert rows[0] == ["scale", "count", "value", "exponent"]
    # only words with angle sum 0 pass the narrow rotation window: 6, 20, 70 at lengths 2, 3, 4
    assert [int(x[1]) for x in rows[1:]] == [6, 20, 70]


def test_cli_measure_byte_identical(tmp_path):
    args = ["measure", "--gen", "3", "--walks", "2000", "--seed", "7", "--depth", "1"]
    a, b = run(*args), run(*args, "--threads", "1")
    assert a.exit_code == 0, a.output
    assert a.output == b.output
    out = tmp_path / "m.json"
    r = run(*args, "--format", "json", "-o", str(out))
    assert r.exit_code == 0
    body = json.loads(out.read_text())
    assert body["config"]["seed"] == 7
    assert "version" in body


def test_cli_verify_pass_and_fail():
    ok = run("verify", "propagation", "--surrogate")
    assert ok.exit_code == 0, ok.output
    # too few walks: no triple meets the error filter, which is reported as a failure
    bad = run("verify", "carleson", "--walks", "2000", "--seed", "1", "--gen", "6")
    assert bad.exit_code == 2


def test_cli_verify_deterministic():
    args = ["verify", "reflection", "--walks", "20000", "--seed", "1", "--gen", "4", "--preset", "twisted_koch",
            "--delta", repr(1 / 9), "--gamma", "0.0", "--signs", "b-"]
    a, b = run(*args), run(*args)
    assert a.exit_code in (0, 2)
    assert a.output == b.output


def test_cli_unknown_word_is_error():
    r = run("rotate", "--atlas", "disk", "--word", "1.2")
    assert r.exit_code == 1
