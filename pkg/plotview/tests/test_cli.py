import math

import pytest

from plotview.cli import main


def io_csv(tmp_path):
    lines = ["ratio,zeta,N,flux_scaled"]
    for i in range(4):
        lines.append(f"0.9,{math.pi},{0.5 + 0.1 * i},{0.01 * i}")
    path = tmp_path / "io.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


def test_renders_and_reports_path(tmp_path, capsys):
    out = tmp_path / "fig.png"
    assert main(["io", str(io_csv(tmp_path)), "-o", str(out)]) == 0
    assert out.exists()
    assert str(out) in capsys.readouterr().out


def test_header_mismatch_exits_2_with_named_column(tmp_path, capsys):
    path = io_csv(tmp_path)
    path.write_text(path.read_text().replace("flux_scaled", "flux"))
    out = tmp_path / "fig.png"
    assert main(["io", str(path), "-o", str(out)]) == 2
    err = capsys.readouterr().err
    assert "'flux_scaled'" in err and "column 4" in err
    assert not out.exists()


def test_missing_file_exits_2(tmp_path, capsys):
    assert main(["scanZ", str(tmp_path / "gone.csv"), "-o", str(tmp_path / "f.png")]) == 2
    assert "file not found" in capsys.readouterr().err


def test_output_flag_required(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["io", str(io_csv(tmp_path))])
    assert exc.value.code == 2


def test_unknown_kind_rejected_by_parser(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["hist", str(io_csv(tmp_path)), "-o", str(tmp_path / "f.png")])
    assert exc.value.code == 2


def test_version_flag():
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
