import csv
import io
import os

import pytest

from tickjoin.cli import CSV_COLUMNS, TIMING_COLUMNS, main

TINY_DATASET = """tickjoin-v1 3 1 100.0
O 1 20.0 20.0
O 2 4.0 4.0
O 3 5.0 5.0
Q 1 18.0 18.0 19.0 19.0
Q 2 0.0 0.0 1.0 1.0
Q 3 3.0 3.0 7.0 7.0
"""

TINY_ORACLE_GOLDEN = """# tick 0
1:
2:
3: 2,3
"""


def gen_args(path, **over):
    args = {
        "--dist": "uniform",
        "--objects": "150",
        "--ticks": "3",
        "--region": "1000",
        "--query-side": "40:80",
        "--seed": "7",
    }
    args.update(over)
    flat = ["generate"]
    for k, v in args.items():
        flat += [k, v]
    return flat + ["-o", str(path)]


def rows_without_timing(csv_path):
    with open(csv_path) as fp:
        rows = list(csv.DictReader(fp))
    return [{k: v for k, v in row.items() if k not in TIMING_COLUMNS} for row in rows]


def test_generate_writes_dataset(tmp_path, capsys):
    out = tmp_path / "u.wl"
    assert main(gen_args(out)) == 0
    text = out.read_text()
    assert text.startswith("tickjoin-v1 150 3 ")
    assert text.count("\n") == 1 + 3 * 150 + 3 * 150  # header + objects + queries
    assert "wrote" in capsys.readouterr().out


def test_generate_missing_objects_exits_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["generate", "--dist", "uniform", "-o", str(tmp_path / "x.wl")])
    assert exc.value.code == 2


def test_generate_bad_config_exits_2(tmp_path):
    rc = main(gen_args(tmp_path / "x.wl", **{"--query-side": "5000"}))
    assert rc == 2


def test_generate_unwritable_path_exits_3(tmp_path):
    rc = main(gen_args(tmp_path / "nope" / "x.wl"))
    assert rc == 3


def test_run_verify_and_row_count(tmp_path):
    data = tmp_path / "u.wl"
    main(gen_args(data))
    out = tmp_path / "r.csv"
    rc = main(["run", "--method", "quad", "--th-quad", "64", "--verify", "--csv", str(out), str(data)])
    assert rc == 0
    with open(out) as fp:
        rows = list(csv.DictReader(fp))
    assert len(rows) == 3
    assert list(rows[0]) == CSV_COLUMNS
    assert all(r["method"] == "quad" for r in rows)


def test_run_is_deterministic_modulo_timing(tmp_path):
    data = tmp_path / "u.wl"
    main(gen_args(data))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(["run", "--method", "ug", "--split-factor", "16", "--csv", str(out), str(data)]) == 0
    assert rows_without_timing(a) == rows_without_timing(b)


def test_run_study_s1_emits_both_methods(tmp_path, capsys):
    data = tmp_path / "u.wl"
    main(gen_args(data))
    out = tmp_path / "s1.csv"
    assert main(["run", "--study", "s1", "--split-factor", "16", "--csv", str(out), str(data)]) == 0
    rows = rows_without_timing(out)
    assert {r["method"] for r in rows} == {"ug", "ug_baseline"}
    assert len(rows) == 6
    err = capsys.readouterr().err
    assert "study s1" in err


def test_run_sweep_reports_choice(tmp_path, capsys):
    data = tmp_path / "u.wl"
    main(gen_args(data))
    rc = main(["run", "--method", "ug", "--sweep", "8:24:8", "--csv", str(tmp_path / "x.csv"), str(data)])
    assert rc == 0
    assert "swept split factor" in capsys.readouterr().err


def test_run_missing_dataset_exits_3(tmp_path):
    assert main(["run", str(tmp_path / "absent.wl")]) == 3


def test_run_bad_qos_exits_2(tmp_path):
    data = tmp_path / "u.wl"
    main(gen_args(data))
    assert main(["run", "--qos", "nonsense", str(data)]) == 2


def test_run_verification_failure_exits_1(tmp_path, monkeypatch, capsys):
    data = tmp_path / "u.wl"
    main(gen_args(data, **{"--ticks": "1", "--objects": "50"}))

    import tickjoin.engine as engine_mod
    from tickjoin.decode import ResultSet

    monkeypatch.setattr(engine_mod, "brute_force_join", lambda batch: ResultSet({-1: [0]}))
    rc = main(["run", "--method", "quad", "--verify", "--csv", str(tmp_path / "v.csv"), str(data)])
    assert rc == 1
    assert "verification FAILED" in capsys.readouterr().err


def test_run_echoes_manifest(tmp_path, capsys):
    data = tmp_path / "u.wl"
    main(gen_args(data, **{"--ticks": "1", "--objects": "50"}))
    assert main(["run", "--method", "quad", "--csv", str(tmp_path / "m.csv"), str(data)]) == 0
    assert "manifest: dataset=" in capsys.readouterr().err


def test_oracle_golden_output(tmp_path, capsys):
    data = tmp_path / "tiny.wl"
    data.write_text(TINY_DATASET)
    assert main(["oracle", str(data)]) == 0
    assert capsys.readouterr().out == TINY_ORACLE_GOLDEN


def test_oracle_file_output_byte_stable(tmp_path):
    data = tmp_path / "u.wl"
    main(gen_args(data))
    f1, f2 = tmp_path / "o1.txt", tmp_path / "o2.txt"
    main(["oracle", str(data), "-o", str(f1)])
    main(["oracle", str(data), "-o", str(f2)])
    assert f1.read_bytes() == f2.read_bytes()


@pytest.mark.parametrize("study,expected_rows", [
    ("s2", 4), ("s3", 4), ("s4", 2), ("s5", 8), ("s6", 4), ("s7", 4), ("s8", 2),
])
def test_remaining_studies_run(tmp_path, study, expected_rows):
    data = tmp_path / "u.wl"
    main(gen_args(data, **{"--ticks": "2", "--objects": "80"}))
    out = tmp_path / f"{study}.csv"
    argv = ["run", "--study", study, "--th-quad", "32", "--csv", str(out), str(data)]
    if study in ("s4", "s6", "s7"):
        argv += ["--sweep", "4:16:4"]
    assert main(argv) == 0
    assert len(rows_without_timing(out)) == expected_rows


def test_workers_env_variable_is_default(tmp_path, monkeypatch):
    data = tmp_path / "u.wl"
    main(gen_args(data, **{"--ticks": "1", "--objects": "60"}))
    monkeypatch.setenv("TICKJOIN_WORKERS", "4")
    out = tmp_path / "w.csv"
    assert main(["run", "--method", "quad", "--verify", "--csv", str(out), str(data)]) == 0
    monkeypatch.setenv("TICKJOIN_WORKERS", "not-a-number")
    assert main(["run", "--method", "quad", "--csv", str(out), str(data)]) == 0


def test_qos_column_populated(tmp_path):
    data = tmp_path / "u.wl"
    main(gen_args(data))
    out = tmp_path / "q.csv"
    assert main(["run", "--method", "quad", "--qos", "0.001,3600", "--csv", str(out), str(data)]) == 0
    rows = rows_without_timing(out)
    assert all(r["qos_pass"] == "1" for r in rows)
