import io
import json

import pytest

from mcms import bundle as bc
from mcms import cli, manifest, repl
from mcms.distribution import Node
from mcms.service import NodeService

from conftest import sheet_text


def run(*argv):
    return cli.main(list(argv))


@pytest.fixture
def scaffold(tmp_path):
    d = tmp_path / "guide-app"
    assert run("new", str(d)) == 0
    return d


class TestScaffold:
    def test_new_then_validate(self, scaffold, capsys):
        assert run("validate", str(scaffold)) == 0
        assert "ok" in capsys.readouterr().out

    def test_new_refuses_overwrite(self, scaffold):
        assert run("new", str(scaffold)) == cli.EXIT_VALIDATION

    def test_app_id_from_directory(self, scaffold):
        assert manifest.load_project(scaffold).app_id == "guide-app"


class TestCompileInspect:
    def test_compile_then_inspect(self, scaffold, tmp_path, capsys):
        out = tmp_path / "out.amb"
        assert run("compile", str(scaffold), "-o", str(out)) == 0
        capsys.readouterr()
        assert run("inspect", str(out)) == 0
        text = capsys.readouterr().out
        assert "PAGES" in text and "checksum: ok" in text

    def test_compile_deterministic(self, scaffold, tmp_path, capsys):
        out1, out2 = tmp_path / "a.amb", tmp_path / "b.amb"
        run("compile", str(scaffold), "-o", str(out1))
        run("compile", str(scaffold), "-o", str(out2))
        assert out1.read_bytes() == out2.read_bytes()

    def test_compile_picks_up_glyph_sheet(self, scaffold, tmp_path):
        (scaffold / "glyphs.txt").write_bytes(sheet_text(
            "lineheight 8",
            "glyph U+0057 form=isolated width=2 height=1 advance=3 bearing=0 bits=c0",
        ))
        out = tmp_path / "with_font.amb"
        run("compile", str(scaffold), "-o", str(out))
        assert bc.parse(out.read_bytes()).atlas is not None

    def test_validation_failure_exit_2(self, scaffold, capsys):
        doc = json.loads((scaffold / "project.json").read_text())
        doc["pages"] = []
        (scaffold / "project.json").write_text(json.dumps(doc))
        assert run("validate", str(scaffold)) == cli.EXIT_VALIDATION
        assert "NoPages" in capsys.readouterr().out

    def test_missing_input_exit_3(self, tmp_path):
        assert run("inspect", str(tmp_path / "ghost.amb")) == cli.EXIT_IO

    def test_json_error_channel(self, tmp_path, capsys):
        assert run("--json", "inspect", str(tmp_path / "ghost.amb")) == cli.EXIT_IO
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "IOError"


class TestSearchCli:
    def test_search_output(self, scaffold, tmp_path, capsys):
        out = tmp_path / "o.amb"
        run("compile", str(scaffold), "-o", str(out))
        capsys.readouterr()
        assert run("search", str(out), "welcome") == 0
        # the term hits both the page title and the text body
        assert capsys.readouterr().out == "page=1 score=2 title=Welcome\n"

    def test_no_hits(self, scaffold, tmp_path, capsys):
        out = tmp_path / "o.amb"
        run("compile", str(scaffold), "-o", str(out))
        capsys.readouterr()
        assert run("search", str(out), "zzzqqq") == 0
        assert capsys.readouterr().out == "no hits\n"

    def test_empty_query_exit_2(self, scaffold, tmp_path):
        out = tmp_path / "o.amb"
        run("compile", str(scaffold), "-o", str(out))
        assert run("search", str(out), "!!!") == cli.EXIT_VALIDATION


GOLDEN_SCRIPT = """\
ls
enter 0
view
search lion
jump 1
back
share 0 555
enter 99
quit
ls
"""

GOLDEN_OUTPUT = """\
[0] Animals
[1] Plants
at 1 "Animals"
text: Lions live in prides. lion lion
image asset={digest12} mime=image/png caption=A lion
phone: +15551234567
page=1 score=3 title=Animals
page=2 score=1 title=Plants
at 1 "Animals"
at root
error: AtRootMenu
error: IndexOutOfRange
"""


class TestRepl:
    def test_golden_session(self, simple_project, asset_dir):
        import hashlib
        data = bc.compile(simple_project)
        digest12 = hashlib.sha256((asset_dir / "pic0.png").read_bytes()).hexdigest()[:12]
        stdout = io.StringIO()
        code = repl.run_repl(data, stdin=io.StringIO(GOLDEN_SCRIPT), stdout=stdout)
        assert code == 0
        assert stdout.getvalue() == GOLDEN_OUTPUT.format(digest12=digest12)

    def test_eof_terminates(self, simple_project):
        stdout = io.StringIO()
        assert repl.run_repl(bc.compile(simple_project),
                             stdin=io.StringIO("ls\n"), stdout=stdout) == 0


class TestUsage:
    def test_no_command(self):
        with pytest.raises(SystemExit) as exc:
            cli.main([])
        assert exc.value.code == cli.EXIT_USAGE

    def test_unknown_command(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["warp"])
        assert exc.value.code == cli.EXIT_USAGE

    def test_missing_required_flag(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["compile", "somewhere"])
        assert exc.value.code == cli.EXIT_USAGE


class TestPublishAndSync:
    @pytest.fixture
    def central_svc(self, tmp_path, asset_dir):
        svc = NodeService(Node("c", "central", tmp_path / "c")).start()
        yield svc
        svc.stop()

    def test_publish_and_stale_version(self, scaffold, tmp_path, central_svc, capsys):
        out = tmp_path / "o.amb"
        run("compile", str(scaffold), "-o", str(out))
        code = run("publish", str(out), "--to", central_svc.url,
                   "--app-id", "guide-app", "--version", "1", "--category", "education")
        assert code == 0
        assert "published guide-app v1 seq=1" in capsys.readouterr().out
        # stale re-publish maps the remote refusal to exit 4 + JSON on stderr
        code = run("--json", "publish", str(out), "--to", central_svc.url,
                   "--app-id", "guide-app", "--version", "1", "--category", "education")
        assert code == cli.EXIT_REMOTE
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "VersionNotIncreased"

    def test_sync_once_cli(self, scaffold, tmp_path, central_svc, capsys):
        out = tmp_path / "o.amb"
        run("compile", str(scaffold), "-o", str(out))
        run("publish", str(out), "--to", central_svc.url,
            "--app-id", "guide-app", "--version", "1", "--category", "education")
        config = tmp_path / "node.json"
        config.write_text(json.dumps({
            "role": "sub", "store_dir": str(tmp_path / "sub"),
            "upstream_url": central_svc.url, "categories": ["education"],
        }))
        capsys.readouterr()
        assert run("sync", "--config", str(config), "--once") == 0
        assert "downloaded=1 skipped=0 failed=0" in capsys.readouterr().out

    def test_unreachable_central_exit_4(self, scaffold, tmp_path):
        out = tmp_path / "o.amb"
        run("compile", str(scaffold), "-o", str(out))
        assert run("publish", str(out), "--to", "http://127.0.0.1:9",
                   "--app-id", "guide-app", "--version", "1",
                   "--category", "education") == cli.EXIT_REMOTE


class TestSimulateCli:
    def test_sweep_with_figures_and_report(self, tmp_path, capsys):
        scenario = tmp_path / "scenario.json"
        scenario.write_text(json.dumps({
            "seed": 11, "duration_s": 1200.0, "open_hours_per_day": 24.0,
            "arrival_rate_per_s": 0.8, "dwell_mean_s": 30.0, "scan_period_s": 10.0,
            "slots": 3, "service_time_mean_s": 40.0, "service_time_sigma": 0.3,
            "p_reject": 0.5, "p_fail_given_accept": 0.2,
        }))
        out = tmp_path / "stats.csv"
        latest = tmp_path / "latest.json"
        code = run("simulate", "--scenario", str(scenario), "--seeds", "4",
                   "--out", str(out), "--json-report", str(latest))
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "seed,attempts,successes,failures,rejections,unique_devices,mean_in_range"
        assert len(lines) == 5
        assert [int(ln.split(",")[0]) for ln in lines[1:]] == [11, 12, 13, 14]
        assert (tmp_path / "stats_outcomes.png").is_file()
        assert (tmp_path / "stats_attempts.png").is_file()
        assert json.loads(latest.read_text())["seed"] == 14

    def test_no_figures_flag(self, tmp_path):
        scenario = tmp_path / "s.json"
        scenario.write_text(json.dumps({"duration_s": 300.0, "arrival_rate_per_s": 0.2}))
        out = tmp_path / "s.csv"
        assert run("simulate", "--scenario", str(scenario), "--out", str(out),
                   "--no-figures") == 0
        assert out.is_file()
        assert not list(tmp_path.glob("*.png"))

    def test_manual_trace_scenario(self, tmp_path, capsys):
        scenario = tmp_path / "m.json"
        scenario.write_text(json.dumps({
            "duration_s": 500.0, "mode": "manual_trace",
            "requests": [[1.0, "a"], [2.0, "a"], [3.0, "b"]],
        }))
        assert run("simulate", "--scenario", str(scenario)) == 0
        out = capsys.readouterr().out
        assert "mean attempts=3.0" in out
        assert "rejections=0.0" in out

    def test_bad_scenario_exit_2(self, tmp_path):
        scenario = tmp_path / "bad.json"
        scenario.write_text('{"unknown_knob": 1}')
        assert run("simulate", "--scenario", str(scenario)) == cli.EXIT_VALIDATION
