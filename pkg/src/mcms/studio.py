"""Authoring API behind the operator console: one project directory, one
writer queue, optimistic concurrency by revision number.

Every mutating request carries ``If-Match: <revision>``; a stale revision
gets 409 and the caller re-fetches. Mutations that would leave the project
invalid are rejected with the validation report and change nothing. Preview
compiles the real bundle and returns shaped glyph boxes, so the console
never re-implements layout.
"""

from __future__ import annotations

import json
import mimetypes
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional
from urllib.parse import urlparse

import requests

from . import bundle as bundlemod
from . import manifest, model, textkit
from .distribution import UpstreamUnreachable
from .errors import McmsError
from .service import publish_bundle


class StudioSession:
    """The mutable hub: project document, revision counter, preview digest."""

    def __init__(self, project_dir: Path):
        self.project_dir = Path(project_dir)
        self.project = manifest.load_project(self.project_dir)
        self.revision = 1
        self.preview_digest: Optional[str] = None
        self.lock = threading.Lock()
        self.mutation_log: list = []

    def apply(self, expected_revision: int, op_name: str, params: dict, fn):
        """Run one mutation under the writer lock.

        ``fn`` maps the current project to the updated one; the result must
        validate or the mutation is rejected and nothing changes.
        """
        with self.lock:
            if expected_revision != self.revision:
                raise RevisionMismatch(self.revision)
            updated, result = fn(self.project)
            report = model.validate_project(updated)
            if not report.ok:
                raise model.InvalidProject(report)
            manifest.save_project(updated, self.project_dir)
            self.project = updated
            self.revision += 1
            self.mutation_log.append({"op": op_name, "params": params})
            return result


class RevisionMismatch(McmsError):
    code = "RevisionMismatch"

    def __init__(self, current: int):
        super().__init__(str(current))
        self.current = current


def _shaped_json(line: textkit.ShapedLine, atlas: textkit.GlyphSheet) -> dict:
    glyphs = []
    for g in line.glyphs:
        glyph = atlas.lookup(g.codepoint, g.form)
        glyphs.append({
            "codepoint": g.codepoint,
            "form": g.form.name.lower(),
            "x": g.x_offset,
            "width": glyph.width if glyph else 0,
            "height": glyph.height if glyph else 0,
            "bearing": glyph.bearing if glyph else 0,
        })
    return {"glyphs": glyphs, "total_advance": line.total_advance}


def _shape_text(text: str, atlas: Optional[textkit.GlyphSheet]):
    if atlas is None:
        return None
    lines = []
    for raw in text.split("\n"):
        shaped = textkit.shape_line(raw, atlas, textkit.detect_base_direction(raw))
        lines.append(_shaped_json(shaped, atlas))
    return lines


def render_tree(compiled: bundlemod.Bundle) -> dict:
    """Layout boxes for the console preview, straight from a compiled bundle."""
    atlas = compiled.atlas
    pages = []
    for page in compiled.pages:
        items = []
        for item in page.items:
            if isinstance(item, bundlemod.TextItem):
                items.append({"type": "text", "body": item.body,
                              "lines": _shape_text(item.body, atlas)})
            elif isinstance(item, bundlemod.MediaItem):
                asset = compiled.assets[item.asset_index]
                items.append({"type": item.kind, "digest": asset.digest.hex(),
                              "mime": asset.mime, "caption": item.caption})
            elif isinstance(item, bundlemod.MapPointItem):
                items.append({"type": "map_point", "lat": item.lat, "lon": item.lon,
                              "label": item.label})
            elif isinstance(item, bundlemod.PhoneItem):
                items.append({"type": "phone", "digits": item.digits})
            elif isinstance(item, bundlemod.EmailItem):
                items.append({"type": "email", "address": item.address})
            elif isinstance(item, bundlemod.LinkItem):
                items.append({"type": "web_link", "url": item.url, "label": item.label})
        title_lines = _shape_text(page.title, atlas)
        pages.append({
            "id": page.id,
            "parent_id": page.parent_id,
            "title": page.title,
            "title_line": title_lines[0] if title_lines else None,
            "direction": textkit.detect_base_direction(page.title),
            "items": items,
        })
    return {
        "line_height": atlas.line_height if atlas else None,
        "theme": compiled.meta["theme"],
        "pages": pages,
    }


_PAGE_ROUTE = re.compile(r"^/api/pages/(\d+)(?:/(move|reorder|contents))?$")


class _StudioHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    session: StudioSession = None
    fleet_urls: tuple = ()
    sim_report_path: Path = None
    console_dir: Optional[Path] = None
    token: Optional[str] = None

    def log_message(self, *args):
        pass

    # -- plumbing ----------------------------------------------------------

    def _send(self, status: int, doc) -> None:
        data = json.dumps(doc).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _send_bytes(self, status: int, data: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _body_json(self) -> dict:
        length = int(self.headers.get("Content-Length", "0"))
        raw = self.rfile.read(length)
        if not raw:
            return {}
        try:
            doc = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise McmsError(f"request body is not JSON: {e}")
        if not isinstance(doc, dict):
            raise McmsError("request body must be a JSON object")
        return doc

    def _expected_revision(self) -> int:
        value = self.headers.get("If-Match")
        if value is None:
            raise RevisionMismatch(self.session.revision)
        try:
            return int(value.strip().strip('"'))
        except ValueError:
            raise RevisionMismatch(self.session.revision) from None

    def _send_issues(self, report: model.ValidationReport) -> None:
        self._send(422, {"errors": [
            {"code": i.code.value, "page_id": i.page_id, "detail": i.detail}
            for i in report.errors]})

    def _mutate(self, op_name: str, params: dict, fn, extra=None) -> None:
        try:
            result = self.session.apply(self._expected_revision(), op_name, params, fn)
        except RevisionMismatch as e:
            return self._send(409, {"error": e.code, "revision": e.current})
        except model.InvalidProject as e:
            return self._send_issues(e.report)
        except model.ModelError as e:
            return self._send(422, {"errors": [{"code": e.code, "page_id": None,
                                                "detail": e.detail}]})
        doc = {"revision": self.session.revision}
        if extra is not None:
            doc.update(extra(result))
        self._send(200, doc)

    # -- read side -----------------------------------------------------------

    def do_GET(self):
        path = urlparse(self.path).path
        if path == "/api/project":
            with self.session.lock:
                doc = {"revision": self.session.revision,
                       "project": manifest.project_to_json(self.session.project),
                       "preview_digest": self.session.preview_digest}
            return self._send(200, doc)
        if path == "/api/fleet":
            return self._send(200, {"nodes": self._fleet()})
        if path == "/api/sim/latest":
            if self.sim_report_path and self.sim_report_path.is_file():
                data = self.sim_report_path.read_bytes()
                return self._send_bytes(200, data, "application/json")
            return self._send(404, {"error": "NoReport", "detail": "no simulation report yet"})
        return self._serve_console(path)

    def _fleet(self) -> list:
        nodes = []
        for url in self.fleet_urls:
            entry = {"url": url, "ok": False}
            try:
                headers = {"Authorization": f"Bearer {self.token}"} if self.token else {}
                r = requests.get(url.rstrip("/") + "/v1/health", timeout=2.0, headers=headers)
                if r.status_code == 200:
                    entry.update(r.json())
                    entry["ok"] = True
            except requests.RequestException:
                pass
            nodes.append(entry)
        return nodes

    def _serve_console(self, path: str):
        if self.console_dir is None:
            return self._send(404, {"error": "UnknownPath", "detail": path})
        rel = path.lstrip("/") or "index.html"
        target = (self.console_dir / rel).resolve()
        if not str(target).startswith(str(self.console_dir.resolve())) or not target.is_file():
            return self._send(404, {"error": "UnknownPath", "detail": path})
        ctype = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        return self._send_bytes(200, target.read_bytes(), ctype)

    # -- write side ----------------------------------------------------------

    def do_PATCH(self):
        path = urlparse(self.path).path
        try:
            body = self._body_json()
        except McmsError as e:
            return self._send(400, {"error": "BadRequest", "detail": str(e)})
        if path == "/api/project":
            return self._patch_project(body)
        m = _PAGE_ROUTE.match(path)
        if m and m.group(2) is None:
            page_id = int(m.group(1))
            title = body.get("title")
            if not isinstance(title, str):
                return self._send(400, {"error": "BadRequest", "detail": "title must be a string"})
            return self._mutate("rename_page", {"page_id": page_id, "title": title},
                                lambda p: (model.rename_page(p, page_id, title), None))
        return self._send(404, {"error": "UnknownPath", "detail": path})

    _META_FIELDS = {"app_id", "version", "title", "languages", "category", "theme"}

    def _patch_project(self, body: dict):
        unknown = set(body) - self._META_FIELDS
        if unknown:
            return self._send(400, {"error": "BadRequest",
                                    "detail": f"unknown fields: {', '.join(sorted(unknown))}"})

        def fn(project):
            doc = manifest.project_to_json(project)
            doc.update(body)
            try:
                return manifest.project_from_json(doc, project.asset_dir), None
            except (manifest.ManifestSyntax, manifest.ManifestUnknownField) as e:
                raise model.InvalidProject(model.ValidationReport(errors=[
                    model.Issue(model.IssueCode.BAD_FIELD, None, str(e))])) from None

        return self._mutate("patch_project", body, fn)

    def do_POST(self):
        path = urlparse(self.path).path
        if path == "/api/assets":
            return self._post_asset()
        if path == "/api/preview":
            return self._post_preview()
        if path == "/api/publish":
            return self._post_publish()
        try:
            body = self._body_json()
        except McmsError as e:
            return self._send(400, {"error": "BadRequest", "detail": str(e)})
        if path == "/api/pages":
            parent = body.get("parent_id") or model.ROOT
            title = body.get("title", "")
            position = body.get("position", 0)
            if (not isinstance(parent, int) or isinstance(parent, bool)
                    or not isinstance(position, int) or isinstance(position, bool)
                    or not isinstance(title, str)):
                return self._send(400, {"error": "BadRequest",
                                        "detail": "parent_id/position integers, title string"})
            return self._mutate(
                "add_page", {"parent_id": parent, "title": title, "position": position},
                lambda p: model.add_page(p, parent, title, position),
                extra=lambda new_id: {"id": new_id})
        m = _PAGE_ROUTE.match(path)
        if m:
            page_id = int(m.group(1))
            action = m.group(2)

            def want_int(key, default=0):
                value = body.get(key, default)
                if not isinstance(value, int) or isinstance(value, bool):
                    raise ValueError(key)
                return value

            try:
                if action == "move":
                    new_parent = want_int("new_parent_id") or model.ROOT
                    position = want_int("position")
                    return self._mutate(
                        "move_page", {"page_id": page_id, "new_parent_id": new_parent,
                                      "position": position},
                        lambda p: (model.move_page(p, page_id, new_parent, position), None))
                if action == "reorder":
                    frm = want_int("from")
                    to = want_int("to")
                    return self._mutate(
                        "reorder_content", {"page_id": page_id, "from": frm, "to": to},
                        lambda p: (model.reorder_page_content(p, page_id, frm, to), None))
            except ValueError as e:
                return self._send(400, {"error": "BadRequest",
                                        "detail": f"{e} must be an integer"})
        return self._send(404, {"error": "UnknownPath", "detail": path})

    def do_PUT(self):
        path = urlparse(self.path).path
        m = _PAGE_ROUTE.match(path)
        if m and m.group(2) == "contents":
            try:
                body = self._body_json()
            except McmsError as e:
                return self._send(400, {"error": "BadRequest", "detail": str(e)})
            page_id = int(m.group(1))
            items_doc = body.get("contents")
            if not isinstance(items_doc, list):
                return self._send(400, {"error": "BadRequest",
                                        "detail": "contents must be an array"})
            try:
                items = [manifest._item(doc, f"contents[{i}]")
                         for i, doc in enumerate(items_doc)]
            except (manifest.ManifestSyntax, manifest.ManifestUnknownField) as e:
                return self._send(400, {"error": "BadRequest", "detail": str(e)})
            return self._mutate(
                "set_page_contents", {"page_id": page_id, "contents": items_doc},
                lambda p: (model.set_page_contents(p, page_id, items), None))
        return self._send(404, {"error": "UnknownPath", "detail": path})

    def do_DELETE(self):
        path = urlparse(self.path).path
        m = _PAGE_ROUTE.match(path)
        if m and m.group(2) is None:
            page_id = int(m.group(1))
            return self._mutate("delete_page", {"page_id": page_id},
                                lambda p: (model.delete_page(p, page_id), None))
        return self._send(404, {"error": "UnknownPath", "detail": path})

    def _post_asset(self):
        filename = self.headers.get("X-Filename")
        if not filename or "/" in filename or "\\" in filename or filename.startswith("."):
            return self._send(400, {"error": "BadRequest",
                                    "detail": "X-Filename header with a plain file name required"})
        length = int(self.headers.get("Content-Length", "0"))
        data = self.rfile.read(length)
        with self.session.lock:
            asset_dir = self.session.project.asset_dir
            asset_dir.mkdir(parents=True, exist_ok=True)
            (asset_dir / filename).write_bytes(data)
            mime = (self.headers.get("X-Mime")
                    or mimetypes.guess_type(filename)[0]
                    or "application/octet-stream")
            revision = self.session.revision
        return self._send(201, {"asset": {"path": filename, "mime": mime},
                                "revision": revision})

    def _compile_current(self):
        with self.session.lock:
            project = self.session.project
            atlas = manifest.load_atlas(self.session.project_dir)
            data = bundlemod.compile(project, atlas)
            compiled = bundlemod.parse(data)
            digest = bundlemod.digest_of(data).hex()
            self.session.preview_digest = digest
        return data, compiled, digest

    def _post_preview(self):
        try:
            _, compiled, digest = self._compile_current()
            tree = render_tree(compiled)
        except model.InvalidProject as e:
            return self._send_issues(e.report)
        except (bundlemod.BundleError, textkit.TextKitError) as e:
            return self._send(422, {"errors": [{"code": e.code, "page_id": None,
                                                "detail": e.detail}]})
        return self._send(200, {"digest": digest, "render_tree": tree})

    def _post_publish(self):
        try:
            body = self._body_json()
        except McmsError as e:
            return self._send(400, {"error": "BadRequest", "detail": str(e)})
        url = body.get("url")
        if not url:
            return self._send(400, {"error": "BadRequest", "detail": "url required"})
        try:
            data, compiled, _ = self._compile_current()
        except model.InvalidProject as e:
            return self._send_issues(e.report)
        app_id = body.get("app_id", compiled.app_id)
        version = body.get("version", compiled.version)
        category = body.get("category", compiled.category)
        try:
            release = publish_bundle(url, app_id, version, category, data, token=self.token)
        except UpstreamUnreachable as e:
            return self._send(502, {"error": e.code, "detail": e.detail})
        except McmsError as e:
            return self._send(502, {"error": e.code, "detail": e.detail})
        return self._send(201, {"release": release.to_json()})


class StudioServer:
    def __init__(self, project_dir: Path, host: str = "127.0.0.1", port: int = 0,
                 fleet_urls=(), sim_report_path: Optional[Path] = None,
                 console_dir: Optional[Path] = None, token: Optional[str] = None):
        project_dir = Path(project_dir)
        session = StudioSession(project_dir)
        if sim_report_path is None:
            sim_report_path = project_dir / "sim_latest.json"
        handler = type("Handler", (_StudioHandler,), {
            "session": session,
            "fleet_urls": tuple(fleet_urls),
            "sim_report_path": Path(sim_report_path),
            "console_dir": Path(console_dir) if console_dir else None,
            "token": token,
        })
        self.session = session
        self.httpd = ThreadingHTTPServer((host, port), handler)
        self._thread: Optional[threading.Thread] = None

    @property
    def url(self) -> str:
        host, port = self.httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "StudioServer":
        self._thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()
        if self._thread is not None:
            self._thread.join()

    def serve_forever(self) -> None:
        self.httpd.serve_forever()
