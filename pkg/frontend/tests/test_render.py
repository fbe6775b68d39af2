import shutil
import subprocess
import sys

import pytest

from cfplots.cli import main
from cfplots.render import FigureSpec, SchemaError, parse_table, render, spec_for

GAIN_CSV = """\
# cfmimo=0.1.0
# experiment=channel-gain-cdf
# seed=7
experiment,param_set_id,x,value,stderr
channel-gain-cdf,N=1,1e-06,0.0,
channel-gain-cdf,N=1,0.001,0.4,
channel-gain-cdf,N=1,1.0,1.0,
channel-gain-cdf,N=100,1e-06,0.1,
channel-gain-cdf,N=100,0.001,0.7,
channel-gain-cdf,N=100,1.0,1.0,
"""

METRIC_CSV = """\
# experiment=hardening-cdf
experiment,param_set_id,x,value,stderr
hardening-cdf,only,1e-06,0.0,
hardening-cdf,only,0.01,0.5,
hardening-cdf,only,1.0,1.0,
"""

ERRBAR_CSV = """\
# experiment=moments-check
experiment,param_set_id,x,value,stderr
moments-check,mean_Y1,0.0067,0.0066,0.0002
moments-check,var_Y1,0.0086,0.0081,0.0009
"""


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_parse_table_series_and_metadata(tmp_path):
    table = parse_table(write(tmp_path, "fig2.csv", GAIN_CSV))
    assert table.experiment == "channel-gain-cdf"
    assert table.metadata["seed"] == "7"
    assert sorted(table.series) == ["N=1", "N=100"]
    assert table.series["N=1"].value == [0.0, 0.4, 1.0]
    assert all(e is None for e in table.series["N=1"].stderr)


def test_render_gain_figure_db_axis(tmp_path):
    path = write(tmp_path, "fig2.csv", GAIN_CSV)
    out = render(FigureSpec("fig2", path, tmp_path / "fig2.pdf"))
    assert out.exists() and out.stat().st_size > 1000
    assert out.read_bytes()[:5] == b"%PDF-"


def test_render_metric_figure_log_axis(tmp_path):
    path = write(tmp_path, "fig5.csv", METRIC_CSV)
    out = render(FigureSpec("fig5", path, tmp_path / "fig5.svg"))
    text = out.read_text()
    assert "<svg" in text


def test_render_error_bars_only_when_present(tmp_path):
    path = write(tmp_path, "moments.csv", ERRBAR_CSV)
    out = render(FigureSpec("moments", path, tmp_path / "moments.pdf"))
    assert out.exists()


def test_schema_errors_carry_row_numbers(tmp_path):
    missing_col = "experiment,param_set_id,x,value,stderr\nhardening-cdf,a,1.0,0.5\n"
    with pytest.raises(SchemaError) as exc:
        parse_table(write(tmp_path, "bad1.csv", missing_col))
    assert exc.value.row == 2
    bad_header = "experiment,param_set,x,value,stderr\n"
    with pytest.raises(SchemaError) as exc:
        parse_table(write(tmp_path, "bad2.csv", bad_header))
    assert exc.value.row == 1
    bad_value = "experiment,param_set_id,x,value,stderr\nhardening-cdf,a,1.0,zero,\n"
    with pytest.raises(SchemaError, match="bad3.csv:2"):
        parse_table(write(tmp_path, "bad3.csv", bad_value))
    with pytest.raises(SchemaError):
        parse_table(write(tmp_path, "empty.csv", "# only=comments\n"))


def test_cli_render_and_missing_input(tmp_path, capsys):
    write(tmp_path, "fig5.csv", METRIC_CSV)
    code = main(["render", "--fig", "fig5", "--in", str(tmp_path), "--out", str(tmp_path / "img")])
    assert code == 0
    assert (tmp_path / "img" / "fig5.pdf").exists()
    assert main(["render", "--fig", "figX", "--in", str(tmp_path), "--out", str(tmp_path)]) == 1
    assert "figX" in capsys.readouterr().err


@pytest.mark.skipif(shutil.which("cfmimo") is None, reason="primary CLI not installed")
def test_end_to_end_against_primary_cli(tmp_path):
    # consume the primary package only through its public CLI + CSV contract
    subprocess.run(
        ["cfmimo", "reproduce", "fig4", "--trials", "32", "--seed", "5", "--out", str(tmp_path)],
        check=True,
        capture_output=True,
    )
    code = main(["render", "--fig", "fig4", "--in", str(tmp_path), "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "fig4.pdf").exists()
