"""Authoring model: a project is a tree of pages carrying ordered multimedia
content, a theme, and references into an asset directory.

Edit operations treat values as immutable and return updated copies; a single
project document is meant to have one writer at a time (the studio server
enforces that with its revision check).
"""

from __future__ import annotations

import copy
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator, Optional, Union

from .errors import McmsError

# Parent sentinel for pages attached directly under the project root.
ROOT = 0

MAX_TREE_DEPTH = 64
MAX_TITLE_CHARS = 256
MAX_PAGE_ID = 0xFFFFFFFE  # wire parent field reserves 0xFFFFFFFF for root

_APP_ID_RE = re.compile(r"^[a-z0-9-]{1,64}$")
_COLOR_RE = re.compile(r"^#[0-9A-Fa-f]{6}$")
_PHONE_RE = re.compile(r"^\+?[0-9]{3,15}$")
_LANG_RE = re.compile(r"^[A-Za-z]{1,8}(-[A-Za-z0-9]{1,8})*$")


class ModelError(McmsError):
    pass


class UnknownParent(ModelError):
    code = "UnknownParent"


class UnknownPage(ModelError):
    code = "UnknownPage"


class PositionOutOfRange(ModelError):
    code = "PositionOutOfRange"


class CycleWouldForm(ModelError):
    code = "CycleWouldForm"


class IndexOutOfRange(ModelError):
    code = "IndexOutOfRange"


class InvalidProject(ModelError):
    code = "InvalidProject"

    def __init__(self, report: "ValidationReport"):
        super().__init__("; ".join(str(e) for e in report.errors))
        self.report = report


@dataclass(frozen=True)
class AssetRef:
    relative_path: str
    mime: str


@dataclass(frozen=True)
class Text:
    body: str


@dataclass(frozen=True)
class Image:
    asset: AssetRef
    caption: str = ""


@dataclass(frozen=True)
class Audio:
    asset: AssetRef
    caption: str = ""


@dataclass(frozen=True)
class Video:
    asset: AssetRef
    caption: str = ""


@dataclass(frozen=True)
class Animation:
    asset: AssetRef
    caption: str = ""


@dataclass(frozen=True)
class MapPoint:
    lat: float
    lon: float
    label: str = ""


@dataclass(frozen=True)
class PhoneNumber:
    digits: str


@dataclass(frozen=True)
class Email:
    address: str


@dataclass(frozen=True)
class WebLink:
    url: str
    label: str = ""


ContentItem = Union[Text, Image, Audio, Video, Animation, MapPoint, PhoneNumber, Email, WebLink]

MEDIA_TYPES = (Image, Audio, Video, Animation)


@dataclass(frozen=True)
class Theme:
    fg_color: str = "#000000"
    bg_color: str = "#FFFFFF"
    highlight_color: str = "#CC6600"
    background_image: Optional[AssetRef] = None
    background_music: Optional[AssetRef] = None


@dataclass
class PageNode:
    id: int
    title: str
    contents: list = field(default_factory=list)
    children: list = field(default_factory=list)


@dataclass
class Project:
    app_id: str
    version: int
    title: str
    languages: list
    category: str
    theme: Theme
    root_pages: list
    asset_dir: Path


class IssueCode(str, Enum):
    NO_PAGES = "NoPages"
    DUPLICATE_PAGE_ID = "DuplicatePageId"
    BAD_PAGE_ID = "BadPageId"
    DEPTH_EXCEEDED = "DepthExceeded"
    BAD_TITLE = "BadTitle"
    BAD_APP_ID = "BadAppId"
    BAD_VERSION = "BadVersion"
    NO_LANGUAGES = "NoLanguages"
    BAD_LANGUAGE = "BadLanguage"
    BAD_COLOR = "BadColor"
    MISSING_ASSET = "MissingAsset"
    UNSAFE_ASSET_PATH = "UnsafeAssetPath"
    BAD_MAP_POINT = "BadMapPoint"
    BAD_PHONE = "BadPhone"
    BAD_EMAIL = "BadEmail"
    BAD_URL = "BadUrl"
    BAD_FIELD = "BadField"
    EMPTY_PAGE = "EmptyPage"


@dataclass(frozen=True)
class Issue:
    code: IssueCode
    page_id: Optional[int] = None
    detail: str = ""

    def __str__(self) -> str:
        where = f" page={self.page_id}" if self.page_id is not None else ""
        return f"{self.code.value}{where}: {self.detail}" if self.detail else f"{self.code.value}{where}"


@dataclass
class ValidationReport:
    errors: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


@dataclass(frozen=True)
class FlatPage:
    page: PageNode
    parent_id: int  # ROOT for top-level pages
    preorder_index: int


def iter_pages(project: Project) -> Iterator[tuple[PageNode, int, int]]:
    """Yield (page, parent_id, depth) in depth-first pre-order."""

    def walk(pages, parent_id, depth):
        for page in pages:
            yield page, parent_id, depth
            yield from walk(page.children, page.id, depth + 1)

    yield from walk(project.root_pages, ROOT, 1)


def find_page(project: Project, page_id: int) -> Optional[PageNode]:
    for page, _, _ in iter_pages(project):
        if page.id == page_id:
            return page
    return None


def _subtree_ids(page: PageNode) -> set:
    ids = {page.id}
    for child in page.children:
        ids |= _subtree_ids(child)
    return ids


def _asset_path_unsafe(ref: AssetRef) -> bool:
    p = ref.relative_path
    if not p or p.startswith(("/", "\\")) or re.match(r"^[A-Za-z]:", p):
        return True
    return ".." in Path(p).parts


def _check_asset(ref: AssetRef, asset_dir: Path, page_id, report: ValidationReport) -> None:
    if _asset_path_unsafe(ref):
        report.errors.append(Issue(IssueCode.UNSAFE_ASSET_PATH, page_id, ref.relative_path))
        return
    if not (asset_dir / ref.relative_path).is_file():
        report.errors.append(Issue(IssueCode.MISSING_ASSET, page_id, ref.relative_path))


def _check_item(item: ContentItem, asset_dir: Path, page_id: int, report: ValidationReport) -> None:
    if isinstance(item, MEDIA_TYPES):
        _check_asset(item.asset, asset_dir, page_id, report)
    elif isinstance(item, MapPoint):
        if not (-90.0 <= item.lat <= 90.0 and -180.0 <= item.lon <= 180.0):
            report.errors.append(Issue(IssueCode.BAD_MAP_POINT, page_id, f"{item.lat},{item.lon}"))
    elif isinstance(item, PhoneNumber):
        if not _PHONE_RE.match(item.digits):
            report.errors.append(Issue(IssueCode.BAD_PHONE, page_id, item.digits))
    elif isinstance(item, Email):
        if item.address.count("@") != 1 or item.address.startswith("@") or item.address.endswith("@"):
            report.errors.append(Issue(IssueCode.BAD_EMAIL, page_id, item.address))
    elif isinstance(item, WebLink):
        if not re.match(r"^https?://", item.url):
            report.errors.append(Issue(IssueCode.BAD_URL, page_id, item.url))


def validate_project(project: Project) -> ValidationReport:
    """Check every project invariant and return the full list of violations.

    Violations are report entries, never exceptions; an empty ``errors`` list
    means the project is compilable.
    """
    report = ValidationReport()

    if not _APP_ID_RE.match(project.app_id):
        report.errors.append(Issue(IssueCode.BAD_APP_ID, None, project.app_id))
    if not isinstance(project.version, int) or project.version < 1:
        report.errors.append(Issue(IssueCode.BAD_VERSION, None, str(project.version)))
    if not project.languages:
        report.errors.append(Issue(IssueCode.NO_LANGUAGES))
    for tag in project.languages:
        if not isinstance(tag, str) or not _LANG_RE.match(tag):
            report.errors.append(Issue(IssueCode.BAD_LANGUAGE, None, repr(tag)))

    for name in ("fg_color", "bg_color", "highlight_color"):
        value = getattr(project.theme, name)
        if not isinstance(value, str) or not _COLOR_RE.match(value):
            report.errors.append(Issue(IssueCode.BAD_COLOR, None, f"{name}={value!r}"))
    for ref in (project.theme.background_image, project.theme.background_music):
        if ref is not None:
            _check_asset(ref, project.asset_dir, None, report)

    if not project.root_pages:
        report.errors.append(Issue(IssueCode.NO_PAGES))

    seen_ids = set()
    for page, _, depth in iter_pages(project):
        if not isinstance(page.id, int) or not 1 <= page.id <= MAX_PAGE_ID:
            report.errors.append(Issue(IssueCode.BAD_PAGE_ID, None, str(page.id)))
            continue
        if page.id in seen_ids:
            report.errors.append(Issue(IssueCode.DUPLICATE_PAGE_ID, page.id))
        seen_ids.add(page.id)
        if depth > MAX_TREE_DEPTH:
            report.errors.append(Issue(IssueCode.DEPTH_EXCEEDED, page.id, f"depth {depth}"))
        if not page.title or len(page.title) > MAX_TITLE_CHARS:
            report.errors.append(Issue(IssueCode.BAD_TITLE, page.id, f"{len(page.title)} chars"))
        if not page.contents and not page.children:
            report.warnings.append(Issue(IssueCode.EMPTY_PAGE, page.id))
        for item in page.contents:
            _check_item(item, project.asset_dir, page.id, report)

    return report


def add_page(project: Project, parent_id: int, title: str, position: int) -> tuple[Project, int]:
    """Insert a new page under ``parent_id`` (or ROOT) at ``position``.

    Returns the updated project and the fresh page id (max existing id + 1).
    """
    project = copy.deepcopy(project)
    if parent_id == ROOT:
        siblings = project.root_pages
    else:
        parent = find_page(project, parent_id)
        if parent is None:
            raise UnknownParent(str(parent_id))
        siblings = parent.children
    if not 0 <= position <= len(siblings):
        raise PositionOutOfRange(f"position {position} of {len(siblings)}")
    new_id = max((p.id for p, _, _ in iter_pages(project)), default=0) + 1
    siblings.insert(position, PageNode(id=new_id, title=title))
    return project, new_id


def move_page(project: Project, page_id: int, new_parent_id: int, position: int) -> Project:
    """Reattach the subtree rooted at ``page_id`` under ``new_parent_id``.

    ``position`` counts siblings after the page has been detached.
    """
    project = copy.deepcopy(project)
    page = find_page(project, page_id)
    if page is None:
        raise UnknownPage(str(page_id))
    if new_parent_id != ROOT:
        if new_parent_id in _subtree_ids(page):
            raise CycleWouldForm(f"{new_parent_id} is {page_id} or its descendant")
        if find_page(project, new_parent_id) is None:
            raise UnknownPage(str(new_parent_id))

    def detach(pages: list) -> bool:
        for i, p in enumerate(pages):
            if p.id == page_id:
                del pages[i]
                return True
            if detach(p.children):
                return True
        return False

    detach(project.root_pages)
    siblings = project.root_pages if new_parent_id == ROOT else find_page(project, new_parent_id).children
    if not 0 <= position <= len(siblings):
        raise PositionOutOfRange(f"position {position} of {len(siblings)}")
    siblings.insert(position, page)
    return project


def delete_page(project: Project, page_id: int) -> Project:
    """Remove a page and its whole subtree. Refuses to drop the last root page."""
    project = copy.deepcopy(project)
    if len(project.root_pages) == 1 and project.root_pages[0].id == page_id:
        raise InvalidProject(ValidationReport(errors=[Issue(IssueCode.NO_PAGES, page_id, "last root page")]))

    def remove(pages: list) -> bool:
        for i, p in enumerate(pages):
            if p.id == page_id:
                del pages[i]
                return True
            if remove(p.children):
                return True
        return False

    if not remove(project.root_pages):
        raise UnknownPage(str(page_id))
    return project


def rename_page(project: Project, page_id: int, title: str) -> Project:
    project = copy.deepcopy(project)
    page = find_page(project, page_id)
    if page is None:
        raise UnknownPage(str(page_id))
    page.title = title
    return project


def reorder_content(page: PageNode, from_index: int, to_index: int) -> PageNode:
    """Move one content item; the relative order of everything else is kept."""
    n = len(page.contents)
    if not (0 <= from_index < n and 0 <= to_index < n):
        raise IndexOutOfRange(f"from={from_index} to={to_index} of {n}")
    contents = list(page.contents)
    item = contents.pop(from_index)
    contents.insert(to_index, item)
    return replace_page_contents(page, contents)


def replace_page_contents(page: PageNode, contents: list) -> PageNode:
    return PageNode(id=page.id, title=page.title, contents=list(contents),
                    children=copy.deepcopy(page.children))


def set_page_contents(project: Project, page_id: int, contents: list) -> Project:
    project = copy.deepcopy(project)
    page = find_page(project, page_id)
    if page is None:
        raise UnknownPage(str(page_id))
    page.contents = list(contents)
    return project


def reorder_page_content(project: Project, page_id: int, from_index: int, to_index: int) -> Project:
    project = copy.deepcopy(project)
    page = find_page(project, page_id)
    if page is None:
        raise UnknownPage(str(page_id))
    reordered = reorder_content(page, from_index, to_index)
    page.contents = reordered.contents
    return project


def flatten_pages(project: Project) -> list:
    """Pages in depth-first pre-order, the canonical serialization order."""
    report = validate_project(project)
    if not report.ok:
        raise InvalidProject(report)
    return [FlatPage(page, parent_id, i)
            for i, (page, parent_id, _) in enumerate(iter_pages(project))]
