"""HTTP/1.1 + JSON wire protocol spoken between tiers (and by the operator
when publishing): the same surface serves central → sub-server and
sub-server → kiosk. A shared bearer token (MCMS_TOKEN) optionally guards
every endpoint.
"""

from __future__ import annotations

import json
import threading
from email.parser import BytesParser
from email.policy import default as _email_policy
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional
from urllib.parse import parse_qs, urlparse

import requests

from .distribution import (DigestMismatch, MalformedBundle, Node, Release,
                           StorageFailure, UnknownApp, UpstreamUnreachable,
                           VersionNotIncreased)

_ERROR_STATUS = {
    "VersionNotIncreased": 409,
    "MalformedBundle": 422,
    "UnknownApp": 404,
    "DigestMismatch": 502,
    "StorageFailure": 500,
}


def _parse_multipart(content_type: str, body: bytes) -> dict:
    """Form fields and file parts of a multipart/form-data body."""
    message = BytesParser(policy=_email_policy).parsebytes(
        f"Content-Type: {content_type}\r\n\r\n".encode("ascii") + body)
    fields: dict = {}
    if not message.is_multipart():
        return fields
    for part in message.iter_parts():
        name = part.get_param("name", header="content-disposition")
        if name is None:
            continue
        payload = part.get_payload(decode=True)
        if part.get_filename() is not None:
            fields[name] = payload
        else:
            fields[name] = payload.decode("utf-8")
    return fields


class _NodeHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    node: Node = None
    token: Optional[str] = None

    def log_message(self, *args):  # tests and services stay quiet
        pass

    def _send_json(self, status: int, doc) -> None:
        data = json.dumps(doc).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _send_error_json(self, status: int, code: str, detail: str = "") -> None:
        self._send_json(status, {"error": code, "detail": detail})

    def _authorized(self) -> bool:
        if self.token is None:
            return True
        return self.headers.get("Authorization") == f"Bearer {self.token}"

    def _body(self) -> bytes:
        length = int(self.headers.get("Content-Length", "0"))
        return self.rfile.read(length)

    def do_GET(self):
        if not self._authorized():
            return self._send_error_json(401, "Unauthorized")
        url = urlparse(self.path)
        try:
            if url.path == "/v1/health":
                return self._send_json(200, self.node.health())
            if url.path == "/v1/catalog":
                query = parse_qs(url.query)
                categories = None
                if "categories" in query:
                    categories = [c for c in query["categories"][0].split(",") if c]
                since = int(query.get("since", ["0"])[0])
                releases = self.node.catalog_since(categories, since)
                return self._send_json(200, [r.to_json() for r in releases])
            if url.path.startswith("/v1/bundles/"):
                hexdigest = url.path.rsplit("/", 1)[1]
                try:
                    digest = bytes.fromhex(hexdigest)
                except ValueError:
                    return self._send_error_json(404, "UnknownBlob", hexdigest)
                if len(digest) != 32 or not self.node.store.has(digest):
                    return self._send_error_json(404, "UnknownBlob", hexdigest)
                data = self.node.get_blob(digest)
                self.send_response(200)
                self.send_header("Content-Type", "application/octet-stream")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)
                return
            if url.path == "/v1/menu":
                if self.node.role != "kiosk":
                    return self._send_error_json(404, "NotAKiosk", self.node.role)
                return self._send_json(200, [e.to_json() for e in self.node.menu()])
            return self._send_error_json(404, "UnknownPath", url.path)
        except (DigestMismatch, StorageFailure, UnknownApp) as e:
            return self._send_error_json(_ERROR_STATUS[e.code], e.code, e.detail)

    def do_POST(self):
        if not self._authorized():
            return self._send_error_json(401, "Unauthorized")
        url = urlparse(self.path)
        if url.path != "/v1/releases":
            return self._send_error_json(404, "UnknownPath", url.path)
        if self.node.role != "central":
            return self._send_error_json(405, "NotCentral",
                                         "publishes go to the central node")
        content_type = self.headers.get("Content-Type", "")
        body = self._body()
        if content_type.startswith("multipart/form-data"):
            fields = _parse_multipart(content_type, body)
        else:
            # raw bundle bytes with metadata in the query string
            fields = {k: v[0] for k, v in parse_qs(url.query).items()}
            fields["bundle"] = body
        try:
            app_id = fields["app_id"]
            version = int(fields["version"])
            category = fields["category"]
            data = fields["bundle"]
        except (KeyError, ValueError) as e:
            return self._send_error_json(422, "MalformedBundle", f"missing field: {e}")
        try:
            release = self.node.publish(app_id, version, category, data)
        except (VersionNotIncreased, MalformedBundle, StorageFailure) as e:
            return self._send_error_json(_ERROR_STATUS[e.code], e.code, e.detail)
        return self._send_json(201, release.to_json())


class NodeService:
    """A node bound to a listening socket; start()/stop() for embedding in
    tests, serve_forever() for the CLI."""

    def __init__(self, node: Node, host: str = "127.0.0.1", port: int = 0,
                 token: Optional[str] = None):
        handler = type("Handler", (_NodeHandler,), {"node": node, "token": token})
        self.httpd = ThreadingHTTPServer((host, port), handler)
        self.node = node
        self._thread: Optional[threading.Thread] = None

    @property
    def url(self) -> str:
        host, port = self.httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "NodeService":
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


class HttpUpstream:
    """Upstream accessor over the wire protocol; raises UpstreamUnreachable
    for transport trouble so sync keeps its partial progress."""

    def __init__(self, base_url: str, token: Optional[str] = None, timeout: float = 30.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.headers = {"Authorization": f"Bearer {token}"} if token else {}

    def _get(self, path: str, params=None) -> requests.Response:
        try:
            return requests.get(self.base_url + path, params=params,
                                headers=self.headers, timeout=self.timeout)
        except requests.RequestException as e:
            raise UpstreamUnreachable(str(e)) from None

    def fetch_catalog(self, categories, since_seq: int) -> list:
        params = {"since": str(since_seq)}
        if categories is not None:
            params["categories"] = ",".join(sorted(categories))
        r = self._get("/v1/catalog", params=params)
        if r.status_code != 200:
            raise UpstreamUnreachable(f"catalog: HTTP {r.status_code}")
        return [Release.from_json(doc) for doc in r.json()]

    def fetch_blob(self, digest: bytes) -> bytes:
        r = self._get(f"/v1/bundles/{digest.hex()}")
        if r.status_code == 404:
            raise StorageFailure(f"upstream has no blob {digest.hex()}")
        if r.status_code != 200:
            raise UpstreamUnreachable(f"blob: HTTP {r.status_code}")
        return r.content

    def health(self) -> dict:
        r = self._get("/v1/health")
        if r.status_code != 200:
            raise UpstreamUnreachable(f"health: HTTP {r.status_code}")
        return r.json()


def publish_bundle(base_url: str, app_id: str, version: int, category: str,
                   data: bytes, token: Optional[str] = None) -> Release:
    """Operator-side publish to a central node."""
    headers = {"Authorization": f"Bearer {token}"} if token else {}
    try:
        r = requests.post(
            base_url.rstrip("/") + "/v1/releases",
            data={"app_id": app_id, "version": str(version), "category": category},
            files={"bundle": ("bundle.amb", data, "application/octet-stream")},
            headers=headers, timeout=60.0)
    except requests.RequestException as e:
        raise UpstreamUnreachable(str(e)) from None
    if r.status_code == 201:
        return Release.from_json(r.json())
    try:
        doc = r.json()
    except ValueError:
        doc = {}
    code = doc.get("error", "")
    detail = doc.get("detail", f"HTTP {r.status_code}")
    if code == "VersionNotIncreased":
        raise VersionNotIncreased(detail)
    if code == "MalformedBundle":
        raise MalformedBundle(detail)
    raise UpstreamUnreachable(f"{code or 'publish failed'}: {detail}")
