import numpy as np
import pytest
import yaml

from shortpkt.cli import main
from shortpkt.harness import read_csv


def test_run_echoes_random_seed(capsys):
    assert main(["run", "--max-packets", "50", "--gamma", "9.54"]) == 0
    out = capsys.readouterr()
    assert out.err.startswith("seed: ") and "PER=" in out.out


def test_run_with_seed_is_quiet_and_repeatable(capsys):
    args = ["run", "--max-packets", "200", "--gamma", "9.54", "--snr", "6", "--seed", "3"]
    main(args)
    first = capsys.readouterr()
    main(args)
    second = capsys.readouterr()
    assert first.err == "" and first.out.split("(")[0] == second.out.split("(")[0]


def test_sweep_uses_outdir(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("SHORTPKT_OUTDIR", str(tmp_path / "out"))
    cfg = tmp_path / "tiny.yaml"
    cfg.write_text(yaml.safe_dump({"codes": ["CC(1/2)"], "interleavers": ["none", "qpp"],
                                   "gamma_db": [9.54], "max_packets": 100, "seed": 4}))
    assert main(["sweep", str(cfg), "--plot"]) == 0
    rows = read_csv(tmp_path / "out" / "tiny.csv")
    assert len(rows) == 2 and rows[0]["seed"] == "4"
    assert (tmp_path / "out" / "tiny.svg").exists()


def test_calibrate(capsys):
    assert main(["calibrate", "--gamma", "20", "--freq", "700e3", "--frames", "50", "--seed", "1"]) == 0
    out = capsys.readouterr().out
    assert "measured 20.000000..20.000000 dB" in out and "74.8 us" in out


def test_export_waveform(tmp_path):
    assert main(["export-waveform", "--gamma", "9.54", "--seed", "2", "--out", str(tmp_path)]) == 0
    frame = np.fromfile(tmp_path / "frame.iq", dtype="<f4")
    imp = np.fromfile(tmp_path / "impulses.iq", dtype="<f4")
    assert len(frame) == len(imp) == 2 * 11 * 34
    assert (tmp_path / "received.iq.txt").exists()


def test_errors_exit_nonzero(capsys):
    assert main(["run", "--code", "uncoded", "--seed", "1"]) == 2
    assert "error:" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["bogus"])
