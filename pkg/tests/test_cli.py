import pytest

from csit_sharing import cli
from csit_sharing.experiments.eq3_table import bits_table, ratio_table
from csit_sharing.experiments.feasibility import feasibility_table


def _write(tmp_path, text):
    path = tmp_path / "scenario.cfg"
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_bits_table_values():
    table = bits_table((0.5, 1.0), 20.0, 3)
    assert [row[2] for row in table.rows] == [14, 4, 0, 0, 20, 20, 20, 20]


def test_ratio_table_stays_near_a_tenth():
    table = ratio_table(15, 0.5, (20.0, 40.0, 60.0))
    ratios = [row[3] for row in table.rows]
    assert all(0.08 <= ratio <= 0.12 for ratio in ratios)
    assert table.rows[0][1:3] == (322, 3150)


def test_feasibility_table_rows(symmetric3):
    table = feasibility_table(symmetric3)
    assert table.rows[0] == ("{1,2,3}", 6, 6, "yes", "yes")
    assert ("{1,2}", 2, 4, "yes", "no") in table.rows


def test_eq3_table_command(capsys):
    assert cli.main(["eq3-table"]) == 0
    out = capsys.readouterr().out
    assert "Distance-based bits at 20 dB" in out
    assert "Total bits, K=15, gamma=0.5" in out


def test_eq3_table_written_per_report(tmp_path, capsys):
    target = tmp_path / "eq3.csv"
    assert cli.main(["eq3-table", "--out", str(target)]) == 0
    first = tmp_path / "eq3-distance-based-bits-at-20-db.csv"
    assert first.read_text(encoding="utf-8").splitlines()[:2] == ["gamma,distance,bits", "0.5,0,14"]
    assert (tmp_path / "eq3-total-bits-k-15-gamma-0-5.csv").exists()
    assert f"Results written to {first}" in capsys.readouterr().out


def test_unknown_setting_exits_with_config_error(tmp_path, capsys):
    assert cli.main(["eq3-table", "--config", _write(tmp_path, "bogus = 1\n")]) == 1
    assert "Unknown setting 'bogus'" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert cli.main(["feasibility", "--config", str(tmp_path / "nope.cfg")]) == 1


def test_invalid_worker_count():
    assert cli.main(["eq3-table", "--workers", "0"]) == 1


def test_feasibility_command(capsys):
    assert cli.main(["feasibility"]) == 0
    out = capsys.readouterr().out
    assert "IA-driven CSIT allocation" in out
    assert "Allocation entries" in out


def test_feasibility_of_improper_network(tmp_path, capsys):
    assert cli.main(["feasibility", "--config", _write(tmp_path, "antennas.n_tx = 1\nantennas.n_rx = 1\n")]) == 0
    out = capsys.readouterr().out
    assert "Feasibility" in out
    assert "IA-driven CSIT allocation" not in out


def test_diagram_without_graphviz(monkeypatch, tmp_path, capsys):
    monkeypatch.setattr(cli, "generate_allocation_diagram", lambda alloc, path: None)
    assert cli.main(["feasibility", "--diagram", str(tmp_path / "alloc.png")]) == 0
    assert "graphviz is not installed; diagram was not generated." in capsys.readouterr().out


def test_seed_flag_only_for_random_experiments():
    assert cli.parse_args(["wyner-rate", "--seed", "3"]).seed == 3
    with pytest.raises(SystemExit):
        cli.parse_args(["eq3-table", "--seed", "3"])


def test_apzf_rate_is_reproducible_across_workers(tmp_path):
    config = _write(tmp_path, "draws = 3\nsnr_db = 20, 30\n")
    assert cli.main(["apzf-rate", "--config", config, "--seed", "5", "--out", str(tmp_path / "a.csv")]) == 0
    assert (
        cli.main(["apzf-rate", "--config", config, "--seed", "5", "--workers", "2", "--out", str(tmp_path / "b.csv")])
        == 0
    )
    for label in ("conventional-zf", "active-passive-zf", "zf-with-perfect-csit"):
        first = (tmp_path / f"a-{label}.csv").read_bytes()
        assert first == (tmp_path / f"b-{label}.csv").read_bytes()
        assert len(first.decode("utf-8").splitlines()) == 3


def test_ia_alloc_command(tmp_path, capsys):
    config = _write(tmp_path, "draws = 5\nantennas.totals = 12, 13\n")
    assert cli.main(["ia-alloc", "--config", config]) == 0
    assert "complete_scalars_mean" in capsys.readouterr().out


def test_wyner_rate_command(tmp_path, capsys):
    config = _write(tmp_path, "users = 6\ndraws = 2\nsnr_db = 20, 30\n")
    assert cli.main(["wyner-rate", "--config", config]) == 0
    out = capsys.readouterr().out
    for policy in ("distance-based", "uniform", "clustered", "conventional"):
        assert policy in out
