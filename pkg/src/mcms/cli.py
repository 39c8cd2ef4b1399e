"""Operator and admin command line.

Exit codes: 0 success, 1 usage, 2 validation, 3 I/O, 4 remote/protocol.
With --json, failures are also written to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import re
import sys
import tempfile
import time
from pathlib import Path

from . import bundle as bundlemod
from . import distribution, manifest, model, report, repl, service, sim, studio, textkit
from .errors import McmsError

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_IO, EXIT_REMOTE = 0, 1, 2, 3, 4

_REMOTE_ERRORS = (distribution.UpstreamUnreachable, distribution.VersionNotIncreased,
                  distribution.MalformedBundle, distribution.DigestMismatch)
_IO_ERRORS = (distribution.StorageFailure, bundlemod.AssetReadFailure)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _fail(e: Exception, as_json: bool) -> int:
    if isinstance(e, McmsError):
        code, detail = e.code, e.detail
    elif isinstance(e, OSError):
        code, detail = "IOError", str(e)
    else:
        code, detail = type(e).__name__, str(e)
    if as_json:
        sys.stderr.write(json.dumps({"error": code, "detail": detail}) + "\n")
    else:
        sys.stderr.write(f"error: {code}" + (f": {detail}" if detail else "") + "\n")
    if isinstance(e, _REMOTE_ERRORS):
        return EXIT_REMOTE
    if isinstance(e, _IO_ERRORS) or isinstance(e, OSError):
        return EXIT_IO
    return EXIT_VALIDATION


def _atomic_write(path: Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    with os.fdopen(fd, "wb") as f:
        f.write(data)
    os.replace(tmp, path)


def _default_listen() -> str:
    return os.environ.get("MCMS_LISTEN", "127.0.0.1:0")


def _split_listen(value: str):
    host, _, port = value.rpartition(":")
    if not host:
        raise McmsError(f"listen must be HOST:PORT, got {value!r}")
    return host, int(port)


def _token():
    return os.environ.get("MCMS_TOKEN") or None


# -- commands ---------------------------------------------------------------

def cmd_new(args) -> int:
    directory = Path(args.directory)
    if (directory / manifest.MANIFEST_NAME).exists():
        raise McmsError(f"{directory} already holds a project")
    app_id = re.sub(r"[^a-z0-9-]", "-", directory.resolve().name.lower()).strip("-") or "new-app"
    project = model.Project(
        app_id=app_id[:64],
        version=1,
        title="New Application",
        languages=["en"],
        category="education",
        theme=model.Theme(),
        root_pages=[model.PageNode(id=1, title="Welcome",
                                   contents=[model.Text("Welcome!")])],
        asset_dir=directory / manifest.ASSET_DIR_NAME,
    )
    manifest.save_project(project, directory)
    print(f"scaffolded {directory / manifest.MANIFEST_NAME}")
    return EXIT_OK


def cmd_validate(args) -> int:
    project = manifest.load_project(args.directory)
    vr = model.validate_project(project)
    for issue in vr.errors:
        print(f"error {issue}")
    for issue in vr.warnings:
        print(f"warning {issue}")
    try:
        manifest.load_atlas(args.directory)
    except McmsError as e:
        print(f"error {e}")
        return EXIT_VALIDATION
    if not vr.ok:
        return EXIT_VALIDATION
    print("ok")
    return EXIT_OK


def _load_atlas_for(args, directory: Path):
    if getattr(args, "glyphs", None):
        return textkit.build_atlas(Path(args.glyphs).read_bytes())
    return manifest.load_atlas(directory)


def cmd_compile(args) -> int:
    directory = Path(args.directory)
    project = manifest.load_project(directory)
    atlas = _load_atlas_for(args, directory)
    data = bundlemod.compile(project, atlas)
    _atomic_write(Path(args.output), data)
    digest = bundlemod.digest_of(data).hex()
    print(f"wrote {args.output} ({len(data)} bytes) digest={digest}")
    return EXIT_OK


def cmd_inspect(args) -> int:
    print(bundlemod.inspect(Path(args.bundle).read_bytes()))
    return EXIT_OK


def cmd_search(args) -> int:
    parsed = bundlemod.parse(Path(args.bundle).read_bytes())
    hits = bundlemod.search(parsed, args.query)
    if not hits:
        print("no hits")
    for page_id, score in hits:
        title = parsed.page_by_id(page_id).title
        print(f"page={page_id} score={score} title={title}")
    return EXIT_OK


def cmd_nav(args) -> int:
    return repl.run_repl(Path(args.bundle).read_bytes())


def _load_node_config(path: str) -> dict:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    for key in ("role", "store_dir"):
        if key not in doc:
            raise McmsError(f"node config missing {key!r}")
    return doc


_ROLE_ALIASES = {"sub": "subserver"}


def cmd_serve(args) -> int:
    role = _ROLE_ALIASES.get(args.role, args.role)
    config = _load_node_config(args.config)
    if _ROLE_ALIASES.get(config["role"], config["role"]) != role:
        raise McmsError(f"config role {config['role']!r} does not match {args.role!r}")
    node = distribution.Node(
        node_id=config.get("node_id", role),
        role=role,
        store_dir=Path(config["store_dir"]),
        categories=config.get("categories"),
    )
    host, port = _split_listen(config.get("listen") or _default_listen())
    svc = service.NodeService(node, host=host, port=port, token=_token())
    print(f"serving {args.role} on {svc.url}", flush=True)
    try:
        svc.serve_forever()
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def cmd_publish(args) -> int:
    data = Path(args.bundle).read_bytes()
    release = service.publish_bundle(args.to, args.app_id, args.version,
                                     args.category, data, token=_token())
    if args.json:
        print(json.dumps(release.to_json()))
    else:
        print(f"published {release.app_id} v{release.version} "
              f"seq={release.published_seq} digest={release.digest.hex()[:12]}")
    return EXIT_OK


def cmd_sync(args) -> int:
    config = _load_node_config(args.config)
    upstream_url = config.get("upstream_url")
    if not upstream_url:
        raise McmsError("node config missing 'upstream_url'")
    role = _ROLE_ALIASES.get(config["role"], config["role"])
    node = distribution.Node(
        node_id=config.get("node_id", role),
        role=role,
        store_dir=Path(config["store_dir"]),
        categories=config.get("categories"),
    )
    upstream = service.HttpUpstream(upstream_url, token=_token())
    while True:
        result = node.sync_once(upstream)
        print(f"downloaded={result.downloaded} skipped={result.skipped} "
              f"failed={result.failed}", flush=True)
        if args.once:
            return EXIT_OK
        time.sleep(args.interval)


def cmd_simulate(args) -> int:
    if args.scenario:
        config, mode, requests = sim.load_scenario(Path(args.scenario).read_bytes())
    else:
        config, mode, requests = sim.exhibition_preset(), "auto", []
    if args.mode:
        mode = args.mode

    stats_list = []
    base = config.seed
    for i in range(args.seeds):
        run_config = dataclasses.replace(config, seed=base + i)
        stats = sim.run_sim(run_config, mode=mode, requests=requests)
        stats_list.append(stats)

    if args.out:
        out = Path(args.out)
        report.write_sweep_csv(stats_list, out)
        written = [str(out)]
        if not args.no_figures:
            stem = out.with_suffix("")
            written += [str(p) for p in report.render_figures(stats_list, stem)]
        print("wrote " + ", ".join(written))
    if args.json_report:
        _atomic_write(Path(args.json_report), report.emit_report(stats_list[-1], "json"))

    n = len(stats_list)

    def mean(values):
        return sum(values) / n

    print(f"seeds={n} mean attempts={mean([s.attempts for s in stats_list]):.1f} "
          f"successes={mean([s.successes for s in stats_list]):.1f} "
          f"failures={mean([s.failures for s in stats_list]):.1f} "
          f"rejections={mean([s.rejections for s in stats_list]):.1f} "
          f"in_range={mean([s.mean_concurrent_in_range for s in stats_list]):.1f}")
    return EXIT_OK


def cmd_studio(args) -> int:
    host, port = _split_listen(args.listen)
    fleet = [u for u in (args.fleet or "").split(",") if u]
    server = studio.StudioServer(
        Path(args.directory), host=host, port=port,
        fleet_urls=fleet,
        sim_report_path=Path(args.sim_report) if args.sim_report else None,
        console_dir=Path(args.console) if args.console else None,
        token=_token(),
    )
    print(f"studio on {server.url}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="mcms", description=__doc__)
    parser.add_argument("--json", action="store_true",
                        help="machine-readable errors on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("new", help="scaffold a project directory")
    p.add_argument("directory")
    p.set_defaults(fn=cmd_new)

    p = sub.add_parser("validate", help="check a project directory")
    p.add_argument("directory")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("compile", help="compile a project into a bundle")
    p.add_argument("directory")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--glyphs", help="glyph sheet overriding the project's glyphs.txt")
    p.set_defaults(fn=cmd_compile)

    p = sub.add_parser("inspect", help="summarize a bundle file")
    p.add_argument("bundle")
    p.set_defaults(fn=cmd_inspect)

    p = sub.add_parser("search", help="query a bundle's index")
    p.add_argument("bundle")
    p.add_argument("query")
    p.set_defaults(fn=cmd_search)

    p = sub.add_parser("nav", help="interactive navigation shell")
    p.add_argument("bundle")
    p.set_defaults(fn=cmd_nav)

    p = sub.add_parser("serve", help="run a distribution node")
    p.add_argument("role", choices=("central", "sub", "kiosk"))
    p.add_argument("--config", required=True)
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("publish", help="upload a bundle to a central node")
    p.add_argument("bundle")
    p.add_argument("--to", required=True, help="central node URL")
    p.add_argument("--app-id", required=True)
    p.add_argument("--version", required=True, type=int)
    p.add_argument("--category", required=True)
    p.set_defaults(fn=cmd_publish)

    p = sub.add_parser("sync", help="pull releases from the configured upstream")
    p.add_argument("--config", required=True)
    p.add_argument("--once", action="store_true")
    p.add_argument("--interval", type=float, default=30.0)
    p.set_defaults(fn=cmd_sync)

    p = sub.add_parser("simulate", help="run broadcast scenarios")
    p.add_argument("--scenario", help="scenario JSON (defaults to the exhibition preset)")
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--out", help="sweep CSV path; figures land beside it")
    p.add_argument("--json-report", help="write the last run as a JSON report")
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--mode", choices=("auto", "manual_trace"))
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("studio", help="authoring API + console assets")
    p.add_argument("directory")
    p.add_argument("--listen", default=_default_listen())
    p.add_argument("--fleet", help="comma-separated node URLs for the dashboard")
    p.add_argument("--sim-report", help="JSON report served at /api/sim/latest")
    p.add_argument("--console", help="directory of built console assets")
    p.set_defaults(fn=cmd_studio)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (McmsError, OSError) as e:
        return _fail(e, args.json)


if __name__ == "__main__":
    sys.exit(main())
