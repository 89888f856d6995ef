import csv
import subprocess
import sys

import pytest

from resoscan import cli, synth
from resoscan.domain import (ResultRow, Classification, read_labels, read_particles,
                             read_results_csv, validate_ephemeris, validate_particle,
                             write_ephemeris, write_labels, write_particles, write_results_csv)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("corpus")
    rc = cli.main(["generate", "--rejectable", "6", "--resonant", "6", "--nonresonant", "4",
                   "--steps", "512", "--pmax", "10", "--seed", "4", "--out", str(d)])
    assert rc == 0
    return d


def test_generate_trivial(tmp_path):
    assert cli.main(["generate", "--rejectable", "1", "--resonant", "0", "--nonresonant", "0",
                     "--steps", "2", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "particles.jsonl").read_text().count("\n") == 1
    assert len(read_particles(tmp_path / "particles.jsonl")) == 1
    assert read_labels(tmp_path / "labels.csv") == {"synth-0001": "rejected"}


@pytest.mark.parametrize("preset, total, steps", [("small82", 82, 9629), ("long100", 100, 50000)])
def test_generate_preset_shape(tmp_path, monkeypatch, preset, total, steps):
    seen = {}

    def fake(spec, config=None):
        seen["spec"] = spec
        eph = synth.gen_ephemeris(2, 0)
        return synth.Corpus([], eph, [], {})

    monkeypatch.setattr(synth, "gen_corpus", fake)
    assert cli.main(["generate", "--preset", preset, "--out", str(tmp_path)]) == 0
    assert seen["spec"].total == total and seen["spec"].n_steps == steps


def test_analyze_matches_labels(corpus_dir, tmp_path):
    out = tmp_path / "r.csv"
    assert cli.main(["analyze", "--input", str(corpus_dir), "--pmax", "10", "--out", str(out)]) == 0
    labels = read_labels(corpus_dir / "labels.csv")
    rows = read_results_csv(out)
    assert len(rows) == 16
    assert all(labels[r.id] == r.label for r in rows)


def _classification_columns(path):
    return [row[:10] for row in _rows(path)]


def test_analyze_modes_identical_and_repeatable(corpus_dir, tmp_path):
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    base = ["analyze", "--input", str(corpus_dir), "--pmax", "10"]
    assert cli.main(base + ["--mode", "serial", "--out", str(a)]) == 0
    assert cli.main(base + ["--mode", "wavefront", "--workers", "8", "--out", str(b)]) == 0
    assert cli.main(base + ["--mode", "particles_dynamic", "--workers", "2", "--depth", "4",
                            "--out", str(c)]) == 0
    assert _classification_columns(a) == _classification_columns(b) == _classification_columns(c)


def test_analyze_rejectable_only(tmp_path):
    d = tmp_path / "c"
    assert cli.main(["generate", "--rejectable", "5", "--steps", "64", "--out", str(d)]) == 0
    out = tmp_path / "r.csv"
    assert cli.main(["analyze", "--input", str(d), "--out", str(out)]) == 0
    assert {r.label for r in read_results_csv(out)} == {"rejected"}


def test_analyze_particle_error_exit_3(tmp_path):
    eph = validate_ephemeris([0.0, 1.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0])
    good = validate_particle("ok", [0.0, 1.0], [40.0, 60.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0])
    bad = validate_particle("bad", [0.0, 1.0], [40.0, 40.0], [0.0, 180.0], [0.0, 0.0], [0.0, 0.0])
    write_particles(tmp_path / "particles.jsonl", [good, bad])
    write_ephemeris(tmp_path / "ephemeris.json", eph)
    out = tmp_path / "r.csv"
    assert cli.main(["analyze", "--input", str(tmp_path), "--pmax", "3", "--out", str(out)]) == 3
    assert [r.label for r in read_results_csv(out)] == ["rejected", "error"]


def test_exit_codes_io_and_usage(tmp_path):
    assert cli.main(["analyze", "--input", str(tmp_path / "none"), "--out",
                     str(tmp_path / "r.csv")]) == 1
    assert cli.main(["analyze", "--input", str(tmp_path)]) == 2
    assert cli.main(["generate", "--steps", "0", "--out", str(tmp_path)]) == 2
    assert cli.main(["bench", "--input", str(tmp_path), "--modes", "turbo",
                     "--out", str(tmp_path)]) == 2
    assert cli.main(["frobnicate"]) == 2
    (tmp_path / "particles.jsonl").write_text("{oops\n")
    (tmp_path / "ephemeris.json").write_text("{}")
    assert cli.main(["analyze", "--input", str(tmp_path), "--out", str(tmp_path / "r.csv")]) == 1
    assert cli.main(["hist", "--input", str(tmp_path / "missing.csv"),
                     "--out", str(tmp_path / "h.csv")]) == 1


FLAGS = {
    "generate": ["--rejectable", "--resonant", "--nonresonant", "--steps", "--pmax", "--seed",
                 "--out", "--preset"],
    "analyze": ["--input", "--out", "--mode", "--workers", "--depth", "--pmax", "--gap-deg",
                "--windows", "--consistency"],
    "bench": ["--input", "--out", "--modes", "--workers-list", "--depth-list", "--repeats",
              "--pmax", "--gap-deg", "--windows", "--consistency"],
    "hist": ["--input", "--out"],
}


@pytest.mark.parametrize("command", sorted(FLAGS))
def test_help_documents_flags(command, capsys):
    assert cli.main([command, "--help"]) == 0
    text = capsys.readouterr().out
    for flag in FLAGS[command]:
        assert flag in text


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "resoscan", "--help"], capture_output=True,
                         text=True)
    assert res.returncode == 0
    for command in FLAGS:
        assert command in res.stdout


def test_bench_outputs(corpus_dir, tmp_path):
    out = tmp_path / "b"
    assert cli.main(["bench", "--input", str(corpus_dir), "--pmax", "10",
                     "--modes", "serial,wavefront,particles_static",
                     "--workers-list", "1,2", "--depth-list", "1,2", "--out", str(out)]) == 0
    bench = _rows(out / "bench.csv")
    assert bench[0] == cli.BENCH_HEADER
    # serial once, wavefront 2 workers x 2 depths, static 2 worker counts
    assert len(bench) - 1 == 16 * (1 + 4 + 2)
    labels = read_labels(corpus_dir / "labels.csv")
    for row in bench[1:]:
        assert row[4] == labels[row[0]]
        assert int(row[5]) >= 0 and int(row[6]) >= 0
        if row[1] != "wavefront":
            assert row[3] == "0"
    speed = _rows(out / "speedup.csv")
    assert speed[0] == cli.SPEEDUP_HEADER
    keys = {(r[0], r[1], r[2]) for r in speed[1:]}
    assert ("wavefront", "2", "1") in keys and ("serial", "1", "0") in keys
    for r in speed[1:]:
        if r[1] == "1":
            assert float(r[4]) == 1.0
    assert _rows(out / "busy.csv")[0] == cli.BUSY_HEADER


def test_bench_self_baseline(corpus_dir, tmp_path):
    out = tmp_path / "b"
    assert cli.main(["bench", "--input", str(corpus_dir), "--pmax", "10", "--modes", "wavefront",
                     "--workers-list", "1", "--depth-list", "2", "--repeats", "3",
                     "--out", str(out)]) == 0
    [header, row] = _rows(out / "speedup.csv")
    assert row[:3] == ["wavefront", "1", "2"] and float(row[4]) == 1.0


def test_hist_examples(tmp_path):
    res = tmp_path / "r.csv"
    write_results_csv(res, [ResultRow(f"x{i}", Classification.rejected(), 4500) for i in range(5)])
    assert cli.main(["hist", "--input", str(res), "--out", str(tmp_path / "h.csv")]) == 0
    assert _rows(tmp_path / "h.csv") == [cli.HIST_HEADER, ["1000", "10000", "5"]]
    write_results_csv(res, [])
    assert cli.main(["hist", "--input", str(res), "--out", str(tmp_path / "h.csv")]) == 0
    assert _rows(tmp_path / "h.csv") == [cli.HIST_HEADER]
    res.write_text("")
    assert cli.main(["hist", "--input", str(res), "--out", str(tmp_path / "h.csv")]) == 0
    assert _rows(tmp_path / "h.csv") == [cli.HIST_HEADER]


def test_hist_reads_bench_csv(corpus_dir, tmp_path):
    out = tmp_path / "b"
    assert cli.main(["bench", "--input", str(corpus_dir), "--pmax", "10", "--modes", "serial",
                     "--out", str(out)]) == 0
    assert cli.main(["hist", "--input", str(out / "bench.csv"),
                     "--out", str(tmp_path / "h.csv")]) == 0
    rows = _rows(tmp_path / "h.csv")[1:]
    assert sum(int(r[2]) for r in rows) == 16


def test_decade_histogram():
    assert cli.decade_histogram([]) == []
    assert cli.decade_histogram([0, 1, 9, 10, 999]) == [
        (0, 1, 1), (1, 10, 2), (10, 100, 1), (100, 1000, 1)]
    with pytest.raises(ValueError):
        cli.decade_histogram([-1])
