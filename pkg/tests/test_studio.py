import pytest
import requests

from mcms import cli, manifest
from mcms.distribution import Node
from mcms.service import NodeService
from mcms.studio import StudioServer

from conftest import sheet_text

FARSI_TITLE = "کتاب"


@pytest.fixture
def project_dir(tmp_path):
    d = tmp_path / "studio-proj"
    assert cli.main(["new", str(d)]) == 0
    return d


@pytest.fixture
def studio(project_dir):
    server = StudioServer(project_dir).start()
    yield server
    server.stop()


def get(studio, path):
    return requests.get(studio.url + path)


def revision(studio):
    return get(studio, "/api/project").json()["revision"]


def mutate(studio, method, path, body=None, rev=None, **kw):
    headers = {"If-Match": str(rev if rev is not None else revision(studio))}
    return requests.request(method, studio.url + path, json=body, headers=headers, **kw)


class TestProjectDocument:
    def test_get_project(self, studio):
        doc = get(studio, "/api/project").json()
        assert doc["revision"] == 1
        assert doc["project"]["app_id"] == "studio-proj"

    def test_patch_title(self, studio):
        r = mutate(studio, "PATCH", "/api/project", {"title": "City Guide"})
        assert r.status_code == 200 and r.json()["revision"] == 2
        assert get(studio, "/api/project").json()["project"]["title"] == "City Guide"

    def test_stale_revision_409(self, studio):
        rev = revision(studio)
        first = mutate(studio, "PATCH", "/api/project", {"title": "A"}, rev=rev)
        second = mutate(studio, "PATCH", "/api/project", {"title": "B"}, rev=rev)
        assert {first.status_code, second.status_code} == {200, 409}
        conflicted = first if first.status_code == 409 else second
        assert conflicted.json()["error"] == "RevisionMismatch"
        assert conflicted.json()["revision"] == rev + 1

    def test_missing_if_match_409(self, studio):
        r = requests.patch(studio.url + "/api/project", json={"title": "x"})
        assert r.status_code == 409

    def test_invalid_patch_rejected_and_unchanged(self, studio):
        before = get(studio, "/api/project").json()
        r = mutate(studio, "PATCH", "/api/project",
                   {"theme": {"fg_color": "red", "bg_color": "#FFFFFF",
                              "highlight_color": "#CC6600",
                              "background_image": None, "background_music": None}})
        assert r.status_code == 422
        assert any(e["code"] == "BadColor" for e in r.json()["errors"])
        assert get(studio, "/api/project").json() == before

    def test_unknown_patch_field_400(self, studio):
        assert mutate(studio, "PATCH", "/api/project", {"mascot": "cat"}).status_code == 400


class TestPageOps:
    def test_add_rename_move_reorder_delete(self, studio):
        r = mutate(studio, "POST", "/api/pages",
                   {"parent_id": 0, "title": "Places", "position": 1})
        assert r.status_code == 200
        new_id = r.json()["id"]
        assert new_id == 2

        r = mutate(studio, "POST", "/api/pages",
                   {"parent_id": new_id, "title": "Bazaar", "position": 0})
        child_id = r.json()["id"]

        r = mutate(studio, "PATCH", f"/api/pages/{child_id}", {"title": "Old Bazaar"})
        assert r.status_code == 200

        r = mutate(studio, "PUT", f"/api/pages/{child_id}/contents", {"contents": [
            {"type": "text", "body": "spices"},
            {"type": "text", "body": "carpets"},
            {"type": "phone", "digits": "+98831234"},
        ]})
        assert r.status_code == 200

        r = mutate(studio, "POST", f"/api/pages/{child_id}/reorder", {"from": 2, "to": 0})
        assert r.status_code == 200

        r = mutate(studio, "POST", f"/api/pages/{child_id}/move",
                   {"new_parent_id": 0, "position": 0})
        assert r.status_code == 200

        doc = get(studio, "/api/project").json()["project"]
        assert [p["title"] for p in doc["pages"]] == ["Old Bazaar", "Welcome", "Places"]
        assert [c["type"] for c in doc["pages"][0]["contents"]] == ["phone", "text", "text"]

        r = mutate(studio, "DELETE", f"/api/pages/{child_id}")
        assert r.status_code == 200
        doc = get(studio, "/api/project").json()["project"]
        assert [p["title"] for p in doc["pages"]] == ["Welcome", "Places"]

    def test_cycle_rejected(self, studio):
        child = mutate(studio, "POST", "/api/pages",
                       {"parent_id": 1, "title": "c", "position": 0}).json()["id"]
        r = mutate(studio, "POST", "/api/pages/1/move",
                   {"new_parent_id": child, "position": 0})
        assert r.status_code == 422
        assert r.json()["errors"][0]["code"] == "CycleWouldForm"

    def test_delete_last_root_refused(self, studio):
        r = mutate(studio, "DELETE", "/api/pages/1")
        assert r.status_code == 422
        assert r.json()["errors"][0]["code"] == "NoPages"

    def test_revision_increments_by_exactly_one(self, studio):
        rev = revision(studio)
        for i in range(3):
            r = mutate(studio, "POST", "/api/pages",
                       {"parent_id": 0, "title": f"p{i}", "position": 0})
            assert r.json()["revision"] == rev + i + 1

    def test_mutation_log_replays_to_same_document(self, studio, project_dir, tmp_path):
        mutate(studio, "PATCH", "/api/project", {"title": "Replayed"})
        mutate(studio, "POST", "/api/pages", {"parent_id": 0, "title": "A", "position": 1})
        mutate(studio, "POST", "/api/pages", {"parent_id": 2, "title": "B", "position": 0})
        mutate(studio, "POST", "/api/pages/3/move", {"new_parent_id": 0, "position": 0})
        final = (project_dir / "project.json").read_text()

        replay_dir = tmp_path / "replay" / "studio-proj"
        assert cli.main(["new", str(replay_dir)]) == 0
        from mcms import model, studio as studio_mod
        session = studio_mod.StudioSession(replay_dir)
        for entry in studio.session.mutation_log:
            params = entry["params"]
            if entry["op"] == "patch_project":
                doc = manifest.project_to_json(session.project)
                doc.update(params)
                session.apply(session.revision, entry["op"], params,
                              lambda p, d=doc: (manifest.project_from_json(d, p.asset_dir), None))
            elif entry["op"] == "add_page":
                session.apply(session.revision, entry["op"], params,
                              lambda p: model.add_page(p, params["parent_id"],
                                                       params["title"], params["position"]))
            elif entry["op"] == "move_page":
                session.apply(session.revision, entry["op"], params,
                              lambda p: (model.move_page(p, params["page_id"],
                                                         params["new_parent_id"],
                                                         params["position"]), None))
        assert (replay_dir / "project.json").read_text() == final


class TestAssetsAndPreview:
    def test_upload_then_reference_then_preview(self, studio):
        r = requests.post(studio.url + "/api/assets", data=b"\x89PNG fake",
                          headers={"X-Filename": "logo.png"})
        assert r.status_code == 201
        assert r.json()["asset"] == {"path": "logo.png", "mime": "image/png"}

        for bad in ("../escape.png", "a/b.png", ".hidden", ""):
            r = requests.post(studio.url + "/api/assets", data=b"x",
                              headers={"X-Filename": bad} if bad else {})
            assert r.status_code == 400, bad

        r = mutate(studio, "PUT", "/api/pages/1/contents", {"contents": [
            {"type": "text", "body": "hello"},
            {"type": "image", "path": "logo.png", "mime": "image/png", "caption": "logo"},
        ]})
        assert r.status_code == 200

        r = requests.post(studio.url + "/api/preview")
        assert r.status_code == 200
        doc = r.json()
        page = doc["render_tree"]["pages"][0]
        assert page["items"][1]["type"] == "image"
        assert doc["digest"]

    def test_preview_stable_without_edits(self, studio):
        a = requests.post(studio.url + "/api/preview").json()["digest"]
        b = requests.post(studio.url + "/api/preview").json()["digest"]
        assert a == b

    def test_preview_digest_equals_cli_compile(self, studio, project_dir, tmp_path):
        import hashlib
        (project_dir / "glyphs.txt").write_bytes(sheet_text(
            "lineheight 8",
            "glyph U+0057 form=isolated width=2 height=1 advance=3 bearing=0 bits=c0",
            "glyph U+FFFD form=isolated width=2 height=1 advance=3 bearing=0 bits=c0",
        ))
        api_digest = requests.post(studio.url + "/api/preview").json()["digest"]
        out = tmp_path / "cli.amb"
        assert cli.main(["compile", str(project_dir), "-o", str(out)]) == 0
        assert hashlib.sha256(out.read_bytes()).hexdigest() == api_digest

    def test_mutation_to_invalid_state_refused(self, studio):
        r = mutate(studio, "PUT", "/api/pages/1/contents", {"contents": [
            {"type": "image", "path": "missing.png", "mime": "image/png", "caption": ""},
        ]})
        assert r.status_code == 422
        assert any(e["code"] == "MissingAsset" for e in r.json()["errors"])

    def test_invalid_project_preview_422(self, studio, project_dir):
        # reference an uploaded asset, then lose the file out from under the
        # project: the next preview reports the dangling reference
        requests.post(studio.url + "/api/assets", data=b"img",
                      headers={"X-Filename": "gone.png"})
        r = mutate(studio, "PUT", "/api/pages/1/contents", {"contents": [
            {"type": "image", "path": "gone.png", "mime": "image/png", "caption": ""},
        ]})
        assert r.status_code == 200
        (project_dir / "assets" / "gone.png").unlink()
        r = requests.post(studio.url + "/api/preview")
        assert r.status_code == 422
        assert any(e["code"] == "MissingAsset" for e in r.json()["errors"])

    def test_farsi_title_boxes_rtl(self, studio, project_dir):
        from mcms import textkit
        sheet = sheet_text(
            "lineheight 9",
            "glyph U+FFFD form=isolated width=4 height=6 advance=7 bearing=0 bits=" + "00" * 6,
            *(f"glyph U+{ord(c):04X} form=isolated width=4 height=6 advance=5 "
              f"bearing=0 bits={'00' * 6}" for c in dict.fromkeys(FARSI_TITLE)),
        )
        (project_dir / "glyphs.txt").write_bytes(sheet)
        mutate(studio, "PATCH", "/api/pages/1", {"title": FARSI_TITLE})
        tree = requests.post(studio.url + "/api/preview").json()["render_tree"]
        page = tree["pages"][0]
        assert page["direction"] == "rtl"
        expected = textkit.shape_line(FARSI_TITLE, manifest.load_atlas(project_dir), "rtl")
        assert [g["codepoint"] for g in page["title_line"]["glyphs"]] == \
            [g.codepoint for g in expected.glyphs]


class TestFleetAndSim:
    def test_fleet_mixed_health(self, project_dir, tmp_path, asset_dir):
        node = Node("c", "central", tmp_path / "c")
        svc = NodeService(node).start()
        server = StudioServer(project_dir,
                              fleet_urls=[svc.url, "http://127.0.0.1:9"]).start()
        try:
            nodes = get(server, "/api/fleet").json()["nodes"]
            assert nodes[0]["ok"] is True and nodes[0]["role"] == "central"
            assert nodes[1]["ok"] is False
        finally:
            server.stop()
            svc.stop()

    def test_sim_latest_lifecycle(self, project_dir):
        server = StudioServer(project_dir).start()
        try:
            assert get(server, "/api/sim/latest").status_code == 404
            (project_dir / "sim_latest.json").write_text('{"seed": 1, "attempts": 5}')
            doc = get(server, "/api/sim/latest").json()
            assert doc["attempts"] == 5
        finally:
            server.stop()

    def test_publish_through_studio(self, project_dir, tmp_path):
        central = NodeService(Node("c", "central", tmp_path / "c")).start()
        server = StudioServer(project_dir).start()
        try:
            r = requests.post(server.url + "/api/publish", json={"url": central.url})
            assert r.status_code == 201
            release = r.json()["release"]
            assert release["app_id"] == "studio-proj" and release["published_seq"] == 1
            health = requests.get(central.url + "/v1/health").json()
            assert health["seq"] == 1
            # a second publish without a version bump is an upstream refusal
            r = requests.post(server.url + "/api/publish", json={"url": central.url})
            assert r.status_code == 502
        finally:
            server.stop()
            central.stop()

    def test_publish_unreachable_502(self, studio):
        r = requests.post(studio.url + "/api/publish",
                          json={"url": "http://127.0.0.1:9"})
        assert r.status_code == 502


class TestConsoleAssets:
    def test_serves_static_files(self, project_dir, tmp_path):
        console = tmp_path / "dist"
        console.mkdir()
        (console / "index.html").write_text("<html><body>console</body></html>")
        (console / "app.js").write_text("console.log('hi')")
        server = StudioServer(project_dir, console_dir=console).start()
        try:
            r = requests.get(server.url + "/")
            assert r.status_code == 200 and "console" in r.text
            assert "text/html" in r.headers["Content-Type"]
            r = requests.get(server.url + "/app.js")
            assert r.status_code == 200
            assert requests.get(server.url + "/../secret").status_code == 404
        finally:
            server.stop()

    def test_404_without_console(self, studio):
        assert get(studio, "/nothing.html").status_code == 404
