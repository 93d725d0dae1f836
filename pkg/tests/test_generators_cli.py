import csv
import io

import pytest

from clique_strings import cli
from clique_strings import generators as gen
from clique_strings.cli import ExperimentSpec


def test_generators_are_deterministic():
    a = gen.gen_strings(16, 5, 200, "near-duplicate")
    b = gen.gen_strings(16, 5, 200, "near-duplicate")
    assert a == b
    assert gen.gen_strings(16, 6, 200, "near-duplicate") != a
    assert gen.gen_objects(16, 5, 300, 0.5).objects == gen.gen_objects(16, 5, 300, 0.5).objects
    assert gen.gen_pm(16, 5, 128, "planted") == gen.gen_pm(16, 5, 128, "planted")


def test_sizes_and_budget():
    assert gen.budget(16, 1.0) == 8 * 16 * 16
    assert gen.budget(16, 1 / 16) == 128
    with pytest.raises(ValueError):
        gen.budget(16, 0)
    inp = gen.gen_strings(16, 1, 300, "uniform")
    assert sum(map(len, inp.strings)) == 300
    assert max(map(len, inp.strings)) == 16
    objs = gen.gen_objects(16, 1, 300, 0.5)
    assert sum(len(o) for node in objs.objects for o in node) == 300
    assert max(len(o) for node in objs.objects for o in node) <= 4
    case = gen.gen_pm(16, 1, 128, "long")
    assert 16 < len(case.P) <= len(case.T) and len(case.P) + len(case.T) == 128
    with pytest.raises(ValueError):
        gen.gen_pm(16, 1, 20, "long")


def test_periodic_generators_report_their_period():
    for seed in range(10):
        inp = gen.gen_sa_string(16, seed, 100, "periodic")
        S = inp.strings[0]
        p = inp.period
        assert all(S[i] == S[i + p] for i in range(len(S) - p))
        assert gen.period_of(S) == p
        case = gen.gen_pm(16, seed, 128, "periodic")
        assert gen.period_of(case.P) == case.period


def test_planted_offsets_are_occurrences():
    case = gen.gen_pm(16, 3, 256, "planted")
    m = len(case.P)
    assert case.plants
    assert all(case.T[i:i + m] == case.P for i in case.plants)


def test_experiment_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec("sa", 12)
    with pytest.raises(ValueError):
        ExperimentSpec("sa", 2048)
    with pytest.raises(ValueError):
        ExperimentSpec("sort", 16)
    with pytest.raises(ValueError):
        ExperimentSpec("sa", 16, density=1.5)
    with pytest.raises(ValueError):
        ExperimentSpec("sa", 16, seed=-1)


@pytest.mark.parametrize("problem", cli.PROBLEMS)
def test_emitted_inputs_are_byte_identical(problem, tmp_path):
    spec = ExperimentSpec(problem, 16, seed=9)
    cli.emit_input(spec, tmp_path / "a")
    cli.emit_input(spec, tmp_path / "b")
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()


@pytest.mark.parametrize("problem", cli.PROBLEMS)
def test_file_round_trip_reproduces_the_run(problem, tmp_path):
    spec = ExperimentSpec(problem, 16, seed=4, verify=True)
    cli.emit_input(spec, tmp_path / "in")
    direct = cli.run(spec)
    from_file = cli.run(ExperimentSpec(problem, 16, seed=4, verify=True,
                                       input_path=str(tmp_path / "in")))
    assert direct.verified and from_file.verified
    if problem in ("strsort", "pm", "sa"):
        assert direct.rounds_charged == from_file.rounds_charged


def test_bad_input_files(tmp_path):
    bad = tmp_path / "bad"
    bad.write_bytes(b"ab\n\ncd\n")
    with pytest.raises(ValueError):
        cli.read_strings(bad)
    bad.write_bytes(b"\x01\x00\x00")
    with pytest.raises(ValueError):
        cli.read_objects(bad)
    bad.write_bytes(b"ab\n")
    with pytest.raises(ValueError):
        cli.read_pm(bad)


def test_sweep_csv_rows():
    template = ExperimentSpec("strsort", 16, verify=True)
    reports = cli.sweep(template, ["strsort", "pm"], [16, 32, 64], [0, 1, 2, 3, 4])
    buf = io.StringIO()
    cli.write_csv(reports, buf)
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert tuple(rows[0]) == cli.CSV_FIELDS
    assert len(rows) == 31
    assert all(r[8] == "true" for r in rows[1:])
    assert [(r[0], r[1], r[2]) for r in rows[1:6]] == [("strsort", "16", str(s))
                                                        for s in range(5)]


def test_main_exit_codes(tmp_path, capsys):
    assert cli.main(["--problem", "pm", "--n", "16", "--verify"]) == cli.EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[0] == ",".join(cli.CSV_FIELDS) and len(out) == 2
    assert cli.main(["--problem", "pm", "--n", "15"]) == cli.EXIT_VERIFY
    assert cli.main(["--problem", "sa", "--input", str(tmp_path / "missing")]) == cli.EXIT_IO
    # a full-capacity instance breaks a load cap and is reported as a ledger error
    assert cli.main(["--problem", "strsort", "--n", "16", "--density", "1"]) == cli.EXIT_LEDGER


def test_failed_verification_prints_a_diff(monkeypatch, capsys):
    monkeypatch.setattr(cli, "naive_string_sort", lambda strings: [0] * len(strings))
    assert cli.main(["--problem", "strsort", "--n", "16", "--verify"]) == cli.EXIT_VERIFY
    err = capsys.readouterr().err
    assert "strsort n=16 seed=0: index" in err
    assert cli.main(["--problem", "strsort", "--n", "16"]) == cli.EXIT_OK


def test_csv_file_appends_one_header(tmp_path, capsys):
    path = tmp_path / "runs.csv"
    for seed in ("1", "2"):
        assert cli.main(["--problem", "objsort", "--n", "16", "--seed", seed,
                         "--csv", str(path)]) == cli.EXIT_OK
    lines = path.read_text().splitlines()
    assert len(lines) == 3 and lines[0].startswith("problem,")


def test_load_factor_from_environment(monkeypatch):
    monkeypatch.setenv(cli.CL_ENV, "16")
    assert cli.load_factor() == 16
    wide = cli.run(ExperimentSpec("strsort", 16, seed=1, verify=True))
    assert wide.verified
    monkeypatch.setenv(cli.CL_ENV, "0")
    with pytest.raises(ValueError):
        cli.load_factor()


def test_reports_are_deterministic():
    spec = ExperimentSpec("sa", 32, seed=7, verify=True)
    a, b = cli.run(spec).row(), cli.run(spec).row()
    a.pop("wall_ms")
    b.pop("wall_ms")
    assert a == b
