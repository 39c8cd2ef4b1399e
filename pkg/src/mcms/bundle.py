"""Binary bundle codec: the deterministic compiler from a validated project
to a single self-contained artifact, and its exact inverse parser.

Layout (all integers little-endian):
  magic "AMB1" | format_version u16 | flags u16 | section_count u16
  section table: {section_id u8, offset u64, length u64} in id order
  sections in id order: META(1) PAGES(2) ASSETS(3) INDEX(4) FONT(5)
  trailer: CRC32C u32 over all preceding bytes

Compilation is a pure function of the project document and the atlas bytes:
no timestamps, no hash-order leaks. Assets are deduplicated by SHA-256
digest, which is also the distribution tier's addressing key.
"""

from __future__ import annotations

import hashlib
import json
import struct
from collections import Counter
from dataclasses import dataclass
from typing import Optional

from . import model, textkit
from .errors import McmsError
from .model import Project
from .textkit import Form, GlyphSheet, Glyph, Joining

MAGIC = b"AMB1"
FORMAT_VERSION = 1
FLAG_FONT = 0x0001
FLAG_INDEX = 0x0002

SEC_META, SEC_PAGES, SEC_ASSETS, SEC_INDEX, SEC_FONT = 1, 2, 3, 4, 5
SECTION_NAMES = {SEC_META: "META", SEC_PAGES: "PAGES", SEC_ASSETS: "ASSETS",
                 SEC_INDEX: "INDEX", SEC_FONT: "FONT"}

_ROOT_PARENT = 0xFFFFFFFF
MAX_BUNDLE_BYTES = 0xFFFFFFFF

_ITEM_TEXT = 1
_MEDIA_KINDS = {"image": 2, "audio": 3, "video": 4, "animation": 5}
_MEDIA_BY_TYPE = {v: k for k, v in _MEDIA_KINDS.items()}
_ITEM_MAP, _ITEM_PHONE, _ITEM_EMAIL, _ITEM_LINK = 6, 7, 8, 9

_MODEL_MEDIA = {model.Image: "image", model.Audio: "audio",
                model.Video: "video", model.Animation: "animation"}


class BundleError(McmsError):
    pass


class BadMagic(BundleError):
    code = "BadMagic"


class UnsupportedVersion(BundleError):
    code = "UnsupportedVersion"


class ChecksumMismatch(BundleError):
    code = "ChecksumMismatch"


class TruncatedSection(BundleError):
    code = "TruncatedSection"


class MalformedSection(BundleError):
    code = "MalformedSection"

    def __init__(self, section_id: int, detail: str = ""):
        name = SECTION_NAMES.get(section_id, str(section_id))
        super().__init__(f"{name}: {detail}" if detail else name)
        self.section_id = section_id


class AssetReadFailure(BundleError):
    code = "AssetReadFailure"


class BundleTooLarge(BundleError):
    code = "BundleTooLarge"


class EmptyQuery(BundleError):
    code = "EmptyQuery"


# CRC32C (Castagnoli), reflected polynomial 0x82F63B78. Pinned by the
# RFC 3720 vector: crc32c(b"123456789") == 0xE3069283.
def _make_crc_table():
    table = []
    for i in range(256):
        c = i
        for _ in range(8):
            c = (c >> 1) ^ 0x82F63B78 if c & 1 else c >> 1
        table.append(c)
    return tuple(table)


_CRC_TABLE = _make_crc_table()


def crc32c(data: bytes, crc: int = 0) -> int:
    table = _CRC_TABLE
    crc ^= 0xFFFFFFFF
    for b in data:
        crc = table[(crc ^ b) & 0xFF] ^ (crc >> 8)
    return crc ^ 0xFFFFFFFF


@dataclass(frozen=True)
class TextItem:
    body: str


@dataclass(frozen=True)
class MediaItem:
    kind: str  # image | audio | video | animation
    asset_index: int
    caption: str


@dataclass(frozen=True)
class MapPointItem:
    lat: float
    lon: float
    label: str


@dataclass(frozen=True)
class PhoneItem:
    digits: str


@dataclass(frozen=True)
class EmailItem:
    address: str


@dataclass(frozen=True)
class LinkItem:
    url: str
    label: str


@dataclass(frozen=True)
class BundlePage:
    id: int
    parent_id: Optional[int]  # None for root pages
    title: str
    items: tuple


@dataclass(frozen=True)
class AssetBlob:
    digest: bytes
    mime: str
    data: bytes


@dataclass(frozen=True)
class Bundle:
    meta: dict
    pages: tuple  # BundlePage in pre-order
    assets: tuple  # AssetBlob sorted by digest
    index: dict  # term -> tuple of (page_id, tf) sorted by page_id
    atlas: Optional[GlyphSheet]

    @property
    def app_id(self) -> str:
        return self.meta["app_id"]

    @property
    def version(self) -> int:
        return self.meta["version"]

    @property
    def title(self) -> str:
        return self.meta["title"]

    @property
    def category(self) -> str:
        return self.meta["category"]

    def page_by_id(self, page_id: int) -> Optional[BundlePage]:
        for page in self.pages:
            if page.id == page_id:
                return page
        return None

    def preorder_index(self, page_id: int) -> int:
        for i, page in enumerate(self.pages):
            if page.id == page_id:
                return i
        raise KeyError(page_id)


def digest_of(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def _asset_ref_json(digests_by_path, ref) -> Optional[dict]:
    if ref is None:
        return None
    return {"digest": digests_by_path[ref.relative_path].hex(), "mime": ref.mime}


def _searchable_text(item) -> str:
    if isinstance(item, TextItem):
        return item.body
    if isinstance(item, MediaItem):
        return item.caption
    if isinstance(item, (MapPointItem, LinkItem)):
        return item.label
    return ""


def build_bundle(project: Project, atlas: Optional[GlyphSheet] = None) -> Bundle:
    """The canonical in-memory form of a compiled project."""
    flat = model.flatten_pages(project)  # raises InvalidProject

    # Gather asset bytes: content items in pre-order, then theme references.
    refs = []
    for fp in flat:
        for item in fp.page.contents:
            if isinstance(item, model.MEDIA_TYPES):
                refs.append(item.asset)
    for ref in (project.theme.background_image, project.theme.background_music):
        if ref is not None:
            refs.append(ref)

    blobs: dict = {}  # digest -> AssetBlob
    digests_by_path: dict = {}
    for ref in refs:
        if ref.relative_path in digests_by_path:
            continue
        path = project.asset_dir / ref.relative_path
        try:
            data = path.read_bytes()
        except OSError as e:
            raise AssetReadFailure(f"{ref.relative_path}: {e}") from None
        digest = digest_of(data)
        digests_by_path[ref.relative_path] = digest
        if digest not in blobs:
            blobs[digest] = AssetBlob(digest=digest, mime=ref.mime, data=data)
    assets = tuple(sorted(blobs.values(), key=lambda a: a.digest))
    index_by_digest = {a.digest: i for i, a in enumerate(assets)}

    theme = project.theme
    meta = {
        "app_id": project.app_id,
        "version": project.version,
        "title": project.title,
        "languages": list(project.languages),
        "category": project.category,
        "theme": {
            "fg_color": theme.fg_color,
            "bg_color": theme.bg_color,
            "highlight_color": theme.highlight_color,
            "background_image": _asset_ref_json(digests_by_path, theme.background_image),
            "background_music": _asset_ref_json(digests_by_path, theme.background_music),
        },
    }

    pages = []
    for fp in flat:
        items = []
        for item in fp.page.contents:
            if isinstance(item, model.Text):
                items.append(TextItem(item.body))
            elif isinstance(item, model.MEDIA_TYPES):
                kind = _MODEL_MEDIA[type(item)]
                idx = index_by_digest[digests_by_path[item.asset.relative_path]]
                items.append(MediaItem(kind, idx, item.caption))
            elif isinstance(item, model.MapPoint):
                items.append(MapPointItem(float(item.lat), float(item.lon), item.label))
            elif isinstance(item, model.PhoneNumber):
                items.append(PhoneItem(item.digits))
            elif isinstance(item, model.Email):
                items.append(EmailItem(item.address))
            elif isinstance(item, model.WebLink):
                items.append(LinkItem(item.url, item.label))
            else:
                raise TypeError(f"unknown content item {type(item).__name__}")
        parent = None if fp.parent_id == model.ROOT else fp.parent_id
        pages.append(BundlePage(id=fp.page.id, parent_id=parent,
                                title=fp.page.title, items=tuple(items)))

    index: dict = {}
    for page in pages:
        counts = Counter(textkit.tokenize(page.title))
        for item in page.items:
            counts.update(textkit.tokenize(_searchable_text(item)))
        for term, tf in counts.items():
            index.setdefault(term, []).append((page.id, tf))
    frozen_index = {term: tuple(sorted(postings)) for term, postings in index.items()}

    return Bundle(meta=meta, pages=tuple(pages), assets=assets,
                  index=frozen_index, atlas=atlas)


class _Writer:
    def __init__(self):
        self.parts = []

    def u8(self, v): self.parts.append(struct.pack("<B", v))
    def i8(self, v): self.parts.append(struct.pack("<b", v))
    def u16(self, v): self.parts.append(struct.pack("<H", v))
    def u32(self, v): self.parts.append(struct.pack("<I", v))
    def u64(self, v): self.parts.append(struct.pack("<Q", v))
    def f64(self, v): self.parts.append(struct.pack("<d", v))
    def raw(self, b): self.parts.append(b)

    def str16(self, s: str):
        data = s.encode("utf-8")
        if len(data) > 0xFFFF:
            raise BundleTooLarge(f"string field of {len(data)} bytes exceeds u16 length")
        self.u16(len(data))
        self.raw(data)

    def str32(self, s: str):
        data = s.encode("utf-8")
        self.u32(len(data))
        self.raw(data)

    def getvalue(self) -> bytes:
        return b"".join(self.parts)


def _encode_meta(meta: dict) -> bytes:
    return json.dumps(meta, sort_keys=True, ensure_ascii=False,
                      separators=(",", ":")).encode("utf-8")


def _encode_pages(pages) -> bytes:
    w = _Writer()
    w.u32(len(pages))
    for page in pages:
        w.u32(page.id)
        w.u32(_ROOT_PARENT if page.parent_id is None else page.parent_id)
        w.str16(page.title)
        w.u16(len(page.items))
        for item in page.items:
            if isinstance(item, TextItem):
                w.u8(_ITEM_TEXT)
                w.str32(item.body)
            elif isinstance(item, MediaItem):
                w.u8(_MEDIA_KINDS[item.kind])
                w.u32(item.asset_index)
                w.str16(item.caption)
            elif isinstance(item, MapPointItem):
                w.u8(_ITEM_MAP)
                w.f64(item.lat)
                w.f64(item.lon)
                w.str16(item.label)
            elif isinstance(item, PhoneItem):
                w.u8(_ITEM_PHONE)
                w.str16(item.digits)
            elif isinstance(item, EmailItem):
                w.u8(_ITEM_EMAIL)
                w.str16(item.address)
            elif isinstance(item, LinkItem):
                w.u8(_ITEM_LINK)
                w.str16(item.url)
                w.str16(item.label)
            else:
                raise TypeError(f"unknown bundle item {type(item).__name__}")
    return w.getvalue()


def _encode_assets(assets) -> bytes:
    w = _Writer()
    w.u32(len(assets))
    for asset in assets:
        w.raw(asset.digest)
        w.str16(asset.mime)
        w.u64(len(asset.data))
        w.raw(asset.data)
    return w.getvalue()


def _encode_index(index: dict) -> bytes:
    w = _Writer()
    # UTF-8 byte order equals code point order, so plain str sort is bytewise.
    terms = sorted(index)
    w.u32(len(terms))
    for term in terms:
        w.str16(term)
        postings = index[term]
        w.u32(len(postings))
        for page_id, tf in postings:
            w.u32(page_id)
            w.u32(tf)
    return w.getvalue()


def _encode_font(atlas: GlyphSheet) -> bytes:
    w = _Writer()
    w.u16(atlas.line_height)
    joins = sorted(atlas.joining.items())
    w.u32(len(joins))
    for cp, cls in joins:
        w.u32(cp)
        w.u8(int(cls))
    glyphs = sorted(atlas.glyphs.values(), key=lambda g: (g.codepoint, int(g.form)))
    w.u32(len(glyphs))
    for g in glyphs:
        w.u32(g.codepoint)
        w.u8(int(g.form))
        w.u8(g.width)
        w.u8(g.height)
        w.u8(g.advance)
        w.i8(g.bearing)
        w.raw(g.bitmap)
    return w.getvalue()


def encode(bundle: Bundle) -> bytes:
    """Serialize; equal bundles give identical bytes."""
    sections = [
        (SEC_META, _encode_meta(bundle.meta)),
        (SEC_PAGES, _encode_pages(bundle.pages)),
        (SEC_ASSETS, _encode_assets(bundle.assets)),
        (SEC_INDEX, _encode_index(bundle.index)),
    ]
    flags = FLAG_INDEX
    if bundle.atlas is not None:
        sections.append((SEC_FONT, _encode_font(bundle.atlas)))
        flags |= FLAG_FONT

    header = _Writer()
    header.raw(MAGIC)
    header.u16(FORMAT_VERSION)
    header.u16(flags)
    header.u16(len(sections))
    offset = 10 + 17 * len(sections)
    for sec_id, body in sections:
        header.u8(sec_id)
        header.u64(offset)
        header.u64(len(body))
        offset += len(body)
    payload = header.getvalue() + b"".join(body for _, body in sections)
    total = len(payload) + 4
    if total > MAX_BUNDLE_BYTES:
        raise BundleTooLarge(f"{total} bytes")
    return payload + struct.pack("<I", crc32c(payload))


def compile(project: Project, atlas: Optional[GlyphSheet] = None) -> bytes:
    """Validate, build and serialize in one step."""
    return encode(build_bundle(project, atlas))


class _Reader:
    def __init__(self, data: bytes, section_id: int, base: int = 0):
        self.data = data
        self.pos = base
        self.end = len(data)
        self.section_id = section_id

    def _take(self, n: int) -> bytes:
        if self.pos + n > self.end:
            raise MalformedSection(self.section_id, "ran past section end")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u8(self): return self._take(1)[0]
    def i8(self): return struct.unpack("<b", self._take(1))[0]
    def u16(self): return struct.unpack("<H", self._take(2))[0]
    def u32(self): return struct.unpack("<I", self._take(4))[0]
    def u64(self): return struct.unpack("<Q", self._take(8))[0]
    def f64(self): return struct.unpack("<d", self._take(8))[0]

    def utf8(self, n: int) -> str:
        try:
            return self._take(n).decode("utf-8")
        except UnicodeDecodeError:
            raise MalformedSection(self.section_id, "invalid UTF-8") from None

    def str16(self) -> str:
        return self.utf8(self.u16())

    def str32(self) -> str:
        return self.utf8(self.u32())

    def done(self) -> bool:
        return self.pos == self.end


def _read_table(data: bytes):
    """Section table; callers have already checked magic and length."""
    version, flags, count = struct.unpack_from("<HHH", data, 4)
    table = []
    pos = 10
    if len(data) < pos + 17 * count:
        raise TruncatedSection("section table")
    for _ in range(count):
        sec_id = data[pos]
        offset, length = struct.unpack_from("<QQ", data, pos + 1)
        table.append((sec_id, offset, length))
        pos += 17
    return version, flags, table


def _section_bytes(data: bytes, table, sec_id: int) -> Optional[bytes]:
    for sid, offset, length in table:
        if sid == sec_id:
            if offset + length > len(data) - 4:
                raise TruncatedSection(SECTION_NAMES.get(sec_id, str(sec_id)))
            return data[offset:offset + length]
    return None


def _parse_pages(body: bytes) -> tuple:
    r = _Reader(body, SEC_PAGES)
    pages = []
    for _ in range(r.u32()):
        page_id = r.u32()
        parent_raw = r.u32()
        title = r.str16()
        items = []
        for _ in range(r.u16()):
            t = r.u8()
            if t == _ITEM_TEXT:
                items.append(TextItem(r.str32()))
            elif t in _MEDIA_BY_TYPE:
                idx = r.u32()
                items.append(MediaItem(_MEDIA_BY_TYPE[t], idx, r.str16()))
            elif t == _ITEM_MAP:
                items.append(MapPointItem(r.f64(), r.f64(), r.str16()))
            elif t == _ITEM_PHONE:
                items.append(PhoneItem(r.str16()))
            elif t == _ITEM_EMAIL:
                items.append(EmailItem(r.str16()))
            elif t == _ITEM_LINK:
                url = r.str16()
                items.append(LinkItem(url, r.str16()))
            else:
                raise MalformedSection(SEC_PAGES, f"unknown item type {t}")
        parent = None if parent_raw == _ROOT_PARENT else parent_raw
        pages.append(BundlePage(id=page_id, parent_id=parent, title=title, items=tuple(items)))
    if not r.done():
        raise MalformedSection(SEC_PAGES, "trailing bytes")
    return tuple(pages)


def _parse_assets(body: bytes) -> tuple:
    r = _Reader(body, SEC_ASSETS)
    assets = []
    last_digest = None
    for _ in range(r.u32()):
        digest = bytes(r._take(32))
        if last_digest is not None and digest <= last_digest:
            raise MalformedSection(SEC_ASSETS, "digests not strictly ascending")
        last_digest = digest
        mime = r.str16()
        blob = bytes(r._take(r.u64()))
        if digest_of(blob) != digest:
            raise MalformedSection(SEC_ASSETS, "stored digest does not match blob")
        assets.append(AssetBlob(digest=digest, mime=mime, data=blob))
    if not r.done():
        raise MalformedSection(SEC_ASSETS, "trailing bytes")
    return tuple(assets)


def _parse_index(body: bytes) -> dict:
    r = _Reader(body, SEC_INDEX)
    index = {}
    last_term = None
    for _ in range(r.u32()):
        term = r.str16()
        if last_term is not None and term <= last_term:
            raise MalformedSection(SEC_INDEX, "terms not strictly ascending")
        last_term = term
        postings = []
        last_page = -1
        for _ in range(r.u32()):
            page_id = r.u32()
            tf = r.u32()
            if page_id <= last_page:
                raise MalformedSection(SEC_INDEX, "postings not ascending")
            if tf < 1:
                raise MalformedSection(SEC_INDEX, "zero term frequency")
            last_page = page_id
            postings.append((page_id, tf))
        index[term] = tuple(postings)
    if not r.done():
        raise MalformedSection(SEC_INDEX, "trailing bytes")
    return index


def _parse_font(body: bytes) -> GlyphSheet:
    r = _Reader(body, SEC_FONT)
    line_height = r.u16()
    joining = {}
    for _ in range(r.u32()):
        cp = r.u32()
        cls = r.u8()
        if cls > 2:
            raise MalformedSection(SEC_FONT, f"bad joining class {cls}")
        joining[cp] = Joining(cls)
    glyphs = {}
    for _ in range(r.u32()):
        cp = r.u32()
        form_raw = r.u8()
        if form_raw > 3:
            raise MalformedSection(SEC_FONT, f"bad form {form_raw}")
        form = Form(form_raw)
        width = r.u8()
        height = r.u8()
        advance = r.u8()
        bearing = r.i8()
        bitmap = bytes(r._take(((width + 7) // 8) * height))
        if (cp, form) in glyphs:
            raise MalformedSection(SEC_FONT, f"duplicate glyph U+{cp:04X}")
        glyphs[(cp, form)] = Glyph(cp, form, width, height, advance, bearing, bitmap)
    if not r.done():
        raise MalformedSection(SEC_FONT, "trailing bytes")
    return GlyphSheet(line_height=line_height, glyphs=glyphs, joining=joining)


_META_KEYS = {"app_id", "version", "title", "languages", "category", "theme"}


def _parse_meta(body: bytes) -> dict:
    try:
        meta = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise MalformedSection(SEC_META, str(e)) from None
    if not isinstance(meta, dict) or set(meta) != _META_KEYS:
        raise MalformedSection(SEC_META, "unexpected meta fields")
    return meta


def parse(data: bytes) -> Bundle:
    """Exact inverse of encode(); verifies magic, checksum and section table.

    The checksum is checked before any field past the magic is interpreted,
    so corruption anywhere in the body surfaces as ChecksumMismatch rather
    than a downstream decode error.
    """
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagic("not a bundle")
    if len(data) < 14:
        raise TruncatedSection("trailer")
    stored = struct.unpack_from("<I", data, len(data) - 4)[0]
    if crc32c(data[:-4]) != stored:
        raise ChecksumMismatch(f"stored {stored:08x}")
    version, flags, table = _read_table(data)
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(str(version))

    ids = [sid for sid, _, _ in table]
    if ids != sorted(ids) or len(set(ids)) != len(ids):
        raise MalformedSection(ids[0] if ids else 0, "section table not in id order")
    required = [SEC_META, SEC_PAGES, SEC_ASSETS, SEC_INDEX]
    for sec_id in required:
        if sec_id not in ids:
            raise MalformedSection(sec_id, "section missing")
    if (SEC_FONT in ids) != bool(flags & FLAG_FONT):
        raise MalformedSection(SEC_FONT, "font flag disagrees with section table")
    if not flags & FLAG_INDEX:
        raise MalformedSection(SEC_INDEX, "index flag unset")

    meta = _parse_meta(_section_bytes(data, table, SEC_META))
    pages = _parse_pages(_section_bytes(data, table, SEC_PAGES))
    assets = _parse_assets(_section_bytes(data, table, SEC_ASSETS))
    index = _parse_index(_section_bytes(data, table, SEC_INDEX))
    font_body = _section_bytes(data, table, SEC_FONT)
    atlas = _parse_font(font_body) if font_body is not None else None

    page_ids = {p.id for p in pages}
    for page in pages:
        for item in page.items:
            if isinstance(item, MediaItem) and item.asset_index >= len(assets):
                raise MalformedSection(SEC_PAGES, f"asset index {item.asset_index} out of range")
    for term, postings in index.items():
        for page_id, _ in postings:
            if page_id not in page_ids:
                raise MalformedSection(SEC_INDEX, f"posting for unknown page {page_id}")

    return Bundle(meta=meta, pages=pages, assets=assets, index=index, atlas=atlas)


def search(bundle: Bundle, query: str) -> list:
    """OR-combined term-frequency ranking over the inverted index.

    Ties break toward the page that appears first in pre-order.
    """
    terms = textkit.tokenize(query)
    if not terms:
        raise EmptyQuery(repr(query))
    scores: dict = {}
    for term in terms:
        for page_id, tf in bundle.index.get(term, ()):
            scores[page_id] = scores.get(page_id, 0) + tf
    order = {page.id: i for i, page in enumerate(bundle.pages)}
    return sorted(scores.items(), key=lambda kv: (-kv[1], order[kv[0]]))


def inspect(data: bytes) -> str:
    """Human-readable summary; tolerates everything except a bad magic."""
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagic("not a bundle")
    if len(data) < 10:
        return "checksum: FAILED\ntruncated header"
    try:
        version, flags, table = _read_table(data)
    except TruncatedSection:
        version, flags, _ = struct.unpack_from("<HHH", data, 4)
        table = []

    lines = [f"format version {version}"]
    crc_ok = False
    if len(data) >= 14:
        stored = struct.unpack_from("<I", data, len(data) - 4)[0]
        crc_ok = crc32c(data[:-4]) == stored
    lines.append(f"checksum: {'ok' if crc_ok else 'FAILED'}")
    lines.append(f"sections: {len(table)}")
    for sec_id, offset, length in table:
        name = SECTION_NAMES.get(sec_id, f"#{sec_id}")
        lines.append(f"  {name} offset={offset} length={length}")

    def body(sec_id):
        try:
            return _section_bytes(data, table, sec_id)
        except BundleError:
            return None

    meta_body = body(SEC_META)
    if meta_body is not None:
        try:
            meta = _parse_meta(meta_body)
            lines.append(f"app: {meta['app_id']} v{meta['version']} "
                         f"({meta['category']}) \"{meta['title']}\"")
        except BundleError:
            lines.append("app: <unreadable META>")
    pages_body = body(SEC_PAGES)
    if pages_body is not None and len(pages_body) >= 4:
        lines.append(f"pages: {struct.unpack_from('<I', pages_body, 0)[0]}")
    assets_body = body(SEC_ASSETS)
    if assets_body is not None and len(assets_body) >= 4:
        lines.append(f"assets: {struct.unpack_from('<I', assets_body, 0)[0]}")
    index_body = body(SEC_INDEX)
    if index_body is not None and len(index_body) >= 4:
        lines.append(f"terms: {struct.unpack_from('<I', index_body, 0)[0]}")
    if any(sid == SEC_FONT for sid, _, _ in table):
        font_body = body(SEC_FONT)
        if font_body is not None and len(font_body) >= 2:
            lines.append(f"font: line height {struct.unpack_from('<H', font_body, 0)[0]}px")
        else:
            lines.append("font: <unreadable FONT>")
    else:
        lines.append("font: absent")
    return "\n".join(lines)
