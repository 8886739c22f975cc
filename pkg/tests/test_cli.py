import socket
import subprocess
import sys

import pytest
from fastapi.testclient import TestClient

from flowscope.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main
from flowscope.service import create_app


def run_cli(*argv):
    proc = subprocess.run(
        [sys.executable, "-m", "flowscope.cli", *argv],
        capture_output=True,
        timeout=120,
    )
    return proc


def test_main_entry_matches_subprocess(tmp_path, capsys):
    out = tmp_path / "a.csv"
    code = main(["gen", "--scenario", "mysql-3306", "--out", str(out)])
    assert code == EXIT_OK
    assert "wrote" in capsys.readouterr().err
    assert out.read_text().startswith("ts,sip,dip,sport,dport,syn,synack,label\n")


class TestGen:
    def test_deterministic_across_runs(self, tmp_path):
        a = run_cli("gen", "--scenario", "block-scan", "--out", "-")
        b = run_cli("gen", "--scenario", "block-scan", "--out", "-")
        assert a.returncode == EXIT_OK
        assert a.stdout == b.stdout
        assert b"wrote" in a.stderr

    def test_seed_override_changes_rows(self, tmp_path):
        a = run_cli("gen", "--scenario", "block-scan", "--out", "-")
        b = run_cli("gen", "--scenario", "block-scan", "--seed", "7", "--out", "-")
        assert a.stdout != b.stdout

    def test_unknown_scenario_is_data_error(self):
        proc = run_cli("gen", "--scenario", "wiggle", "--out", "-")
        assert proc.returncode == EXIT_DATA
        assert b"wiggle" in proc.stderr
        assert b"block-scan" in proc.stderr

    def test_spec_file_round_trip(self, tmp_path):
        import json

        from flowscope.scenario import preset, spec_to_dict

        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps(spec_to_dict(preset("block-scan"))))
        from_file = run_cli("gen", "--spec-file", str(spec_path), "--out", "-")
        from_preset = run_cli("gen", "--scenario", "block-scan", "--out", "-")
        assert from_file.returncode == EXIT_OK
        assert from_file.stdout == from_preset.stdout

    def test_scenario_and_spec_file_conflict(self, tmp_path):
        proc = run_cli("gen", "--scenario", "block-scan",
                       "--spec-file", "x.json", "--out", "-")
        assert proc.returncode == EXIT_USAGE


@pytest.fixture(scope="module")
def csv_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "flows.csv"
    proc = run_cli("gen", "--scenario", "mysql-3306", "--out", str(path))
    assert proc.returncode == EXIT_OK
    return path


class TestRender:
    def test_repeat_renders_identical(self, csv_path, tmp_path):
        args = ("render", "--input", str(csv_path), "--width", "320",
                "--height", "120", "--out", "-")
        a = run_cli(*args)
        b = run_cli(*args)
        assert a.returncode == EXIT_OK
        assert a.stdout.startswith(b"P5\n320 120\n255\n")
        assert a.stdout == b.stdout
        assert b"norm_used=" in a.stderr and b"level=" in a.stderr

    def test_bytes_match_service(self, csv_path):
        proc = run_cli("render", "--input", str(csv_path), "--width", "320",
                       "--height", "120", "--out", "-")
        with TestClient(create_app()) as client:
            ds = client.post(
                "/datasets", json={"csv_text": csv_path.read_text()}
            ).json()
            resp = client.get(f"/datasets/{ds['id']}/raster",
                              params={"width": 320, "height": 120})
        assert proc.stdout == resp.content

    def test_empty_csv_renders_black(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("ts,sip,dip,sport,dport,syn,synack\n")
        proc = run_cli("render", "--input", str(path), "--width", "8",
                       "--height", "4", "--out", "-")
        assert proc.returncode == EXIT_OK
        assert proc.stdout == b"P5\n8 4\n255\n" + b"\x00" * 32

    def test_bad_schema_is_usage_error(self, csv_path):
        proc = run_cli("render", "--input", str(csv_path),
                       "--schema", "sport-dport", "--out", "-")
        assert proc.returncode == EXIT_USAGE

    def test_missing_input_is_data_error(self, tmp_path):
        proc = run_cli("render", "--input", str(tmp_path / "absent.csv"),
                       "--out", "-")
        assert proc.returncode == EXIT_DATA

    def test_malformed_csv_is_data_error(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("ts,sip,dip,sport,dport,syn,synack\njunk\n")
        proc = run_cli("render", "--input", str(path), "--out", "-")
        assert proc.returncode == EXIT_DATA
        assert b"line 2" in proc.stderr


class TestDetect:
    def test_flood_keys_at_high_threshold(self, tmp_path):
        path = tmp_path / "flood.csv"
        run_cli("gen", "--scenario", "rotating-sip-flood", "--out", str(path))
        proc = run_cli("detect", "--input", str(path),
                       "--schema", "dip-dport", "--threshold", "1000")
        assert proc.returncode == EXIT_OK
        lines = [l for l in proc.stdout.decode().splitlines() if l]
        keys = {line.split("\t")[0] for line in lines}
        assert keys == {"10.2.1.1->80", "10.2.1.2->25",
                        "10.2.1.3->443", "10.2.1.4->110"}
        for line in lines:
            key, peak, t_of_max = line.split("\t")
            assert int(peak) > 1000
            assert int(t_of_max) % 60 == 0
        assert b"4 streams above threshold" in proc.stderr

    def test_empty_report_above_peak(self, tmp_path):
        path = tmp_path / "quiet.csv"
        run_cli("gen", "--scenario", "mysql-3306", "--out", str(path))
        proc = run_cli("detect", "--input", str(path), "--threshold", "100000")
        assert proc.returncode == EXIT_OK
        assert proc.stdout == b""


class TestCorr:
    def test_writes_ppm(self, tmp_path):
        path = tmp_path / "flows.csv"
        run_cli("gen", "--scenario", "mysql-3306", "--out", str(path))
        out = tmp_path / "m.ppm"
        proc = run_cli("corr", "--input", str(path), "--size", "32",
                       "--out", str(out))
        assert proc.returncode == EXIT_OK
        assert out.read_bytes().startswith(b"P6\n32 32\n255\n")

    def test_too_few_streams_is_data_error(self, tmp_path):
        path = tmp_path / "one.csv"
        path.write_text(
            "ts,sip,dip,sport,dport,syn,synack\n"
            + "".join("%d,1.2.3.4,10.0.0.1,7,80,2,0\n" % (i * 60) for i in range(5))
        )
        proc = run_cli("corr", "--input", str(path), "--out", "-")
        assert proc.returncode == EXIT_DATA


class TestServe:
    def test_port_conflict_is_data_error(self):
        blocker = socket.socket()
        try:
            blocker.bind(("127.0.0.1", 0))
            port = blocker.getsockname()[1]
            proc = run_cli("serve", "--port", str(port))
            assert proc.returncode == EXIT_DATA
        finally:
            blocker.close()

    def test_serves_health_over_http(self):
        import json
        import time
        import urllib.request

        with socket.socket() as probe:
            probe.bind(("127.0.0.1", 0))
            port = probe.getsockname()[1]
        server = subprocess.Popen(
            [sys.executable, "-m", "flowscope.cli", "serve",
             "--port", str(port)],
            stdout=subprocess.DEVNULL,
            stderr=subprocess.DEVNULL,
        )
        try:
            deadline = time.monotonic() + 30
            body = None
            while time.monotonic() < deadline:
                try:
                    with urllib.request.urlopen(
                        f"http://127.0.0.1:{port}/health", timeout=2
                    ) as resp:
                        body = json.load(resp)
                    break
                except OSError:
                    time.sleep(0.2)
            assert body is not None, "service never came up"
            assert body["status"] == "ok"
        finally:
            server.terminate()
            server.wait(timeout=10)
