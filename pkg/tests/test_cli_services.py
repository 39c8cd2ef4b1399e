"""Wiring tests for the blocking service subcommands: each one must come up,
announce its URL, and answer on its protocol."""

import json
import subprocess
import sys
import time

import pytest
import requests

from mcms import cli


def start(args):
    proc = subprocess.Popen([sys.executable, "-m", "mcms.cli", *args],
                            stdout=subprocess.PIPE, stderr=subprocess.STDOUT,
                            text=True)
    line = proc.stdout.readline().strip()
    return proc, line


def wait_http(url, tries=40):
    for _ in range(tries):
        try:
            return requests.get(url, timeout=1.0)
        except requests.RequestException:
            time.sleep(0.05)
    raise AssertionError(f"no answer from {url}")


def test_serve_central_announces_and_answers(tmp_path):
    config = tmp_path / "node.json"
    config.write_text(json.dumps({"role": "central", "listen": "127.0.0.1:0",
                                  "store_dir": str(tmp_path / "store")}))
    proc, line = start(["serve", "central", "--config", str(config)])
    try:
        assert line.startswith("serving central on http://")
        url = line.split(" on ", 1)[1]
        health = wait_http(url + "/v1/health").json()
        assert health == {"role": "central", "seq": 0, "held_count": 0}
    finally:
        proc.terminate()
        proc.wait(timeout=10)


def test_studio_announces_and_answers(tmp_path):
    project = tmp_path / "proj"
    assert cli.main(["new", str(project)]) == 0
    proc, line = start(["studio", str(project), "--listen", "127.0.0.1:0"])
    try:
        assert line.startswith("studio on http://")
        url = line.split(" on ", 1)[1]
        doc = wait_http(url + "/api/project").json()
        assert doc["revision"] == 1
        assert doc["project"]["app_id"] == "proj"
    finally:
        proc.terminate()
        proc.wait(timeout=10)


def test_serve_role_mismatch_is_validation_error(tmp_path, capsys):
    config = tmp_path / "node.json"
    config.write_text(json.dumps({"role": "kiosk", "listen": "127.0.0.1:0",
                                  "store_dir": str(tmp_path / "store")}))
    assert cli.main(["serve", "central", "--config", str(config)]) == cli.EXIT_VALIDATION


def test_sync_requires_upstream(tmp_path):
    config = tmp_path / "node.json"
    config.write_text(json.dumps({"role": "sub", "store_dir": str(tmp_path / "s")}))
    assert cli.main(["sync", "--config", str(config), "--once"]) == cli.EXIT_VALIDATION


def test_bad_listen_spec(tmp_path):
    project = tmp_path / "proj"
    assert cli.main(["new", str(project)]) == 0
    assert cli.main(["studio", str(project), "--listen", "8080"]) == cli.EXIT_VALIDATION


@pytest.mark.parametrize("missing", ["role", "store_dir"])
def test_config_missing_keys(tmp_path, missing):
    doc = {"role": "central", "store_dir": str(tmp_path / "s"), "listen": "127.0.0.1:0"}
    doc.pop(missing)
    config = tmp_path / "node.json"
    config.write_text(json.dumps(doc))
    assert cli.main(["serve", "central", "--config", str(config)]) == cli.EXIT_VALIDATION
