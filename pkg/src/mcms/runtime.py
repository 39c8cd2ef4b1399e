"""Headless engine: open a bundle, walk its page tree, search, and emit
share events. This is the program end-users would hold after receiving the
file; it never mutates the bundle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from . import bundle as bundlemod
from . import textkit
from .bundle import (Bundle, LinkItem, MapPointItem, MediaItem,
                     PhoneItem, EmailItem, TextItem)
from .errors import McmsError
from .model import IndexOutOfRange
from .textkit import ShapedLine


class RuntimeError_(McmsError):
    pass


class UnknownPage(RuntimeError_):
    code = "UnknownPage"


class AtRootMenu(RuntimeError_):
    code = "AtRootMenu"


@dataclass(frozen=True)
class ShareEvent:
    kind: str  # "sms" | "mms"
    payload: str  # text body, or asset digest hex for mms
    target: str


@dataclass(frozen=True)
class RenderedText:
    body: str
    shaped: Optional[ShapedLine]


@dataclass(frozen=True)
class RenderedMedia:
    kind: str
    digest: str
    mime: str
    caption: str


@dataclass(frozen=True)
class RenderedNote:
    kind: str  # "map_point" | "phone" | "email" | "web_link"
    text: str


def item_as_text(item) -> str:
    """Textual rendering used for sharing non-media items over sms."""
    if isinstance(item, TextItem):
        return item.body
    if isinstance(item, MapPointItem):
        coords = f"{item.lat},{item.lon}"
        return f"{item.label}: {coords}" if item.label else coords
    if isinstance(item, PhoneItem):
        return item.digits
    if isinstance(item, EmailItem):
        return item.address
    if isinstance(item, LinkItem):
        return f"{item.label}: {item.url}" if item.label else item.url
    raise TypeError(type(item).__name__)


_base_direction = textkit.detect_base_direction


class NavSession:
    """Navigation state over one immutable bundle.

    The trail is always the root-to-current path; an empty trail means the
    session sits at the root menu listing the top-level pages.
    """

    def __init__(self, bundle: Bundle, share_sink: Optional[Callable[[ShareEvent], None]] = None):
        self.bundle = bundle
        self.trail: list = []
        self.share_sink = share_sink
        self._children: dict = {None: []}
        self._parent: dict = {}
        for page in bundle.pages:
            self._children.setdefault(page.id, [])
            self._children.setdefault(page.parent_id, []).append(page.id)
            self._parent[page.id] = page.parent_id

    @property
    def current(self) -> Optional[int]:
        """Current page id, or None at the root menu."""
        return self.trail[-1] if self.trail else None

    def _current_children(self) -> list:
        return self._children[self.current]

    def listing(self) -> list:
        """Titles of the current node's children, in authored order."""
        return [self.bundle.page_by_id(pid).title for pid in self._current_children()]

    def enter(self, child_index: int) -> "NavSession":
        children = self._current_children()
        if not 0 <= child_index < len(children):
            raise IndexOutOfRange(f"child {child_index} of {len(children)}")
        self.trail.append(children[child_index])
        return self

    def back(self) -> "NavSession":
        if self.trail:
            self.trail.pop()
        return self

    def _current_page(self):
        if self.current is None:
            raise AtRootMenu()
        return self.bundle.page_by_id(self.current)

    def view_contents(self) -> list:
        """Current page items in authored order, text shaped when an atlas
        ships with the bundle."""
        page = self._current_page()
        atlas = self.bundle.atlas
        rendered = []
        for item in page.items:
            if isinstance(item, TextItem):
                shaped = None
                if atlas is not None:
                    shaped = textkit.shape_line(item.body, atlas, _base_direction(item.body))
                rendered.append(RenderedText(item.body, shaped))
            elif isinstance(item, MediaItem):
                asset = self.bundle.assets[item.asset_index]
                rendered.append(RenderedMedia(item.kind, asset.digest.hex(),
                                              asset.mime, item.caption))
            elif isinstance(item, MapPointItem):
                rendered.append(RenderedNote("map_point", item_as_text(item)))
            elif isinstance(item, PhoneItem):
                rendered.append(RenderedNote("phone", item_as_text(item)))
            elif isinstance(item, EmailItem):
                rendered.append(RenderedNote("email", item_as_text(item)))
            elif isinstance(item, LinkItem):
                rendered.append(RenderedNote("web_link", item_as_text(item)))
        return rendered

    def search(self, query: str) -> list:
        return bundlemod.search(self.bundle, query)

    def jump_to(self, page_id: int) -> "NavSession":
        """Set the current page and rebuild the trail as the root-to-page path."""
        if self.bundle.page_by_id(page_id) is None:
            raise UnknownPage(str(page_id))
        path = []
        cursor: Optional[int] = page_id
        while cursor is not None:
            path.append(cursor)
            cursor = self._parent[cursor]
        self.trail = list(reversed(path))
        return self

    def share_content(self, item_index: int, target: str) -> ShareEvent:
        """Share one item of the current page: media goes out as an mms
        carrying the asset digest, everything else as sms text."""
        page = self._current_page()
        if not 0 <= item_index < len(page.items):
            raise IndexOutOfRange(f"item {item_index} of {len(page.items)}")
        item = page.items[item_index]
        if isinstance(item, MediaItem):
            digest = self.bundle.assets[item.asset_index].digest.hex()
            event = ShareEvent("mms", digest, target)
        else:
            event = ShareEvent("sms", item_as_text(item), target)
        if self.share_sink is not None:
            self.share_sink(event)
        return event


def open_bundle(data: bytes, share_sink: Optional[Callable[[ShareEvent], None]] = None) -> NavSession:
    """Parse bundle bytes and start a session at the root menu."""
    return NavSession(bundlemod.parse(data), share_sink=share_sink)
