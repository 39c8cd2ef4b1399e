"""Line-oriented navigation shell over a bundle, with output stable enough
for golden tests. Commands: ls, enter N, back, view, search Q, jump ID,
share N TARGET, quit.
"""

from __future__ import annotations

import sys

from . import runtime
from .errors import McmsError


def _location(session: runtime.NavSession) -> str:
    if session.current is None:
        return "at root"
    page = session.bundle.page_by_id(session.current)
    return f'at {page.id} "{page.title}"'


def _view_lines(session: runtime.NavSession) -> list:
    lines = []
    for item in session.view_contents():
        if isinstance(item, runtime.RenderedText):
            lines.append(f"text: {item.body}")
        elif isinstance(item, runtime.RenderedMedia):
            lines.append(f"{item.kind} asset={item.digest[:12]} mime={item.mime} "
                         f"caption={item.caption}")
        else:
            lines.append(f"{item.kind}: {item.text}")
    return lines or ["(empty page)"]


def run_repl(bundle_bytes: bytes, stdin=None, stdout=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    session = runtime.open_bundle(bundle_bytes)

    def emit(text: str) -> None:
        stdout.write(text + "\n")

    for raw in stdin:
        parts = raw.strip().split(None, 2)
        if not parts:
            continue
        cmd = parts[0]
        try:
            if cmd == "quit":
                break
            elif cmd == "ls":
                titles = session.listing()
                if not titles:
                    emit("(no subpages)")
                for i, title in enumerate(titles):
                    emit(f"[{i}] {title}")
            elif cmd == "enter":
                session.enter(int(parts[1]))
                emit(_location(session))
            elif cmd == "back":
                session.back()
                emit(_location(session))
            elif cmd == "view":
                for line in _view_lines(session):
                    emit(line)
            elif cmd == "search":
                query = raw.strip().split(None, 1)[1] if len(parts) > 1 else ""
                hits = session.search(query)
                if not hits:
                    emit("no hits")
                for page_id, score in hits:
                    title = session.bundle.page_by_id(page_id).title
                    emit(f"page={page_id} score={score} title={title}")
            elif cmd == "jump":
                session.jump_to(int(parts[1]))
                emit(_location(session))
            elif cmd == "share":
                event = session.share_content(int(parts[1]), parts[2])
                emit(f"{event.kind} to {event.target}: {event.payload}")
            else:
                emit(f"error: UnknownCommand {cmd}")
        except (IndexError, ValueError):
            emit(f"error: BadArguments {cmd}")
        except McmsError as e:
            emit(f"error: {e.code}")
    return 0
