import subprocess
import sys

import numpy as np
import pytest

from aidldpc.cli import main, parse_float_list, parse_int_list
from aidldpc.config import ConfigError, parse_kv
from aidldpc.energy import EnergyParams
from aidldpc.montecarlo import StopRule
from aidldpc.sweep import COLUMNS, SweepError, SweepSpec, format_csv, read_sweep_csv, run_sweep

SMALL = dict(code="gallager:96,3,6,1", stop=StopRule(50, 40_000))


def test_noiseless_sweep_has_zero_errors():
    rows = run_sweep(SweepSpec("ber_vs_snr", (2.0,), (1,), noiseless=True, **SMALL))
    assert len(rows) == 1
    assert rows[0].bit_errors == 0 and rows[0].ber == 0.0 and rows[0].frames > 0


def test_row_invariants():
    rows = run_sweep(SweepSpec("ber_vs_iterations", (1.5,), (1, 2, 5, 10), **SMALL))
    assert [r.l_cap for r in rows] == [1, 2, 5, 10]
    for r in rows:
        assert r.ber == r.bit_errors / r.bits and r.fer == r.frame_errors / r.frames
        assert 1 <= r.avg_iterations_used <= r.l_cap
        assert r.es_n0_db < 1.5
    p = [r.p_total_w for r in rows]
    assert p == sorted(p)


def test_thread_count_does_not_change_totals():
    one = run_sweep(SweepSpec("ber_vs_snr", (1.0, 2.0), (3, 8), threads=1, **SMALL))
    eight = run_sweep(SweepSpec("ber_vs_snr", (1.0, 2.0), (3, 8), threads=8, **SMALL))
    assert [r.values() for r in one] == [r.values() for r in eight]


def test_spec_validation():
    with pytest.raises(SweepError):
        SweepSpec("fig7", (1.0,), (5,))
    with pytest.raises(SweepError):
        SweepSpec("ber_vs_snr", (), (5,))
    with pytest.raises(SweepError):
        SweepSpec("ber_vs_iterations", (1.0, 2.0), (5,))
    with pytest.raises(SweepError):
        SweepSpec("ber_vs_snr", (1.0,), (0,))


def test_csv_layout_frozen():
    spec = SweepSpec("ber_vs_snr", (2.0,), (5,), **SMALL)
    text = format_csv(spec, run_sweep(spec))
    lines = text.splitlines()
    head = [ln for ln in lines if ln.startswith("#@ ")]
    assert lines[len(head)] == ",".join(COLUMNS)
    assert COLUMNS == ("snr_db", "es_n0_db", "l_cap", "frames", "bits", "bit_errors", "frame_errors",
                       "ber", "fer", "avg_iterations_used", "p_total_w")
    keys = parse_kv(text)
    for k in ("seed", "code", "version", "mode", "snr_db", "l_values", "threads", "ptr_w", "nf_linear", "rc"):
        assert k in keys


def test_point_list_parsing():
    assert parse_float_list("0:1:0.25") == (0.0, 0.25, 0.5, 0.75, 1.0)
    assert parse_float_list("1.5, 2") == (1.5, 2.0)
    assert parse_int_list("1:4") == (1, 2, 3, 4)
    assert parse_int_list("5") == (5,)
    with pytest.raises(ConfigError):
        parse_float_list("0:1:0")


def test_config_parsing_errors(tmp_path):
    assert parse_kv("a = 1  # note\n\n b=2") == {"a": "1", "b": "2"}
    with pytest.raises(ConfigError, match=":2:"):
        parse_kv("a = 1\nbroken\n", path="f.cfg")


# ---------------------------------------------------------------- CLI

def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


SWEEP_ARGS = ("sweep", "--mode", "ber_vs_snr", "--snr_db", "1,2", "--l_values", "2,5",
              "--code", "gallager:96,3,6,1", "--min_errors", "30", "--max_bits", "20000")


def test_cli_sweep_byte_identical_reruns(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_cli(capsys, *SWEEP_ARGS, "--out", str(a))[0] == 0
    assert run_cli(capsys, *SWEEP_ARGS, "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.with_suffix(".gp").exists()


def test_cli_rerun_from_header_reproduces_file(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_cli(capsys, *SWEEP_ARGS, "--seed", "4", "--out", str(a))
    assert run_cli(capsys, "sweep", "--config", str(a), "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    rows = read_sweep_csv(b)
    assert [r["l_cap"] for r in rows] == [2, 5, 2, 5]


def test_cli_seed_changes_output(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_cli(capsys, *SWEEP_ARGS, "--seed", "1", "--out", str(a))
    run_cli(capsys, *SWEEP_ARGS, "--seed", "2", "--out", str(b))
    assert a.read_text() != b.read_text()


def test_cli_decode_strong_llrs(tmp_path, capsys):
    f = tmp_path / "llr.txt"
    f.write_text("20 20 20 20\n20 20 20 20\n")
    code, out, _ = run_cli(capsys, "decode", str(f))
    assert code == 0
    assert "bits = 00000000" in out and "converged = true" in out


def test_cli_decode_bad_file(tmp_path, capsys):
    f = tmp_path / "llr.txt"
    f.write_text("1.0 2.0\nabc\n")
    code, _, err = run_cli(capsys, "decode", str(f))
    assert code == 2 and ":2:" in err
    f.write_text("1 2 3\n")
    assert run_cli(capsys, "decode", str(f))[0] == 2
    assert run_cli(capsys, "decode", str(tmp_path / "missing"))[0] == 2


def test_cli_energy_decode_term(capsys):
    code, out, _ = run_cli(capsys, "energy", "--energy", "configs/wban.energy", "--l", "50", "--rc", "0.75")
    assert code == 0
    values = parse_kv(out)
    assert float(values["decode_power_w"]) == pytest.approx(0.1, rel=1e-12)
    assert int(values["m_nodes"]) == 8


def test_cli_calibrate_hopeless_snr(capsys):
    code, out, err = run_cli(capsys, "calibrate", "--snr_db", "-5", "--l_max", "5",
                             "--min_errors", "50", "--max_bits", "5000")
    assert code == 3
    assert "l_star = none" in out and "not reached" in err


def test_cli_calibrate_writes_profile(tmp_path, capsys):
    path = tmp_path / "p.aid"
    code, _, _ = run_cli(capsys, "calibrate", "--code", "gallager:96,3,6,1", "--snr_db", "6",
                         "--target_ber", "0.01", "--l_max", "10", "--min_errors", "20",
                         "--max_bits", "20000", "--out", str(path))
    assert code == 0
    from aidldpc.aid import read_profile
    assert read_profile(path).l_star is not None


def test_cli_encode_and_make_code(capsys):
    code, out, _ = run_cli(capsys, "encode", "10110")
    assert code == 0 and len(out.strip()) == 8
    assert run_cli(capsys, "encode", "10a10")[0] == 1
    assert run_cli(capsys, "encode", "1011")[0] == 2
    code, out, _ = run_cli(capsys, "make-code")
    assert code == 0 and out.splitlines()[0] == "8 4"


def test_cli_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--mode", "nope"])
    assert exc.value.code == 1
    assert run_cli(capsys, "sweep", "--code", "hamming:7")[0] == 2


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "aidldpc.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "aidldpc" in res.stdout
