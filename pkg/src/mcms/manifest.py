"""Project manifests on disk: a directory holding ``project.json``, an
``assets/`` tree, and an optional ``glyphs.txt`` atlas.

Parsing is strict: unknown JSON fields are rejected so that console and CLI
round trips stay lossless, and saving is write-temp-then-rename so a crash
never leaves a half-written manifest.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Optional

from . import model, textkit
from .errors import McmsError

MANIFEST_NAME = "project.json"
ASSET_DIR_NAME = "assets"
GLYPHS_NAME = "glyphs.txt"


class ManifestSyntax(McmsError):
    code = "ManifestSyntax"


class ManifestUnknownField(McmsError):
    code = "ManifestUnknownField"


_ITEM_TYPES = {
    "text": {"body"},
    "image": {"path", "mime", "caption"},
    "audio": {"path", "mime", "caption"},
    "video": {"path", "mime", "caption"},
    "animation": {"path", "mime", "caption"},
    "map_point": {"lat", "lon", "label"},
    "phone": {"digits"},
    "email": {"address"},
    "web_link": {"url", "label"},
}

_MEDIA_CLASSES = {"image": model.Image, "audio": model.Audio,
                  "video": model.Video, "animation": model.Animation}


def _expect_keys(doc: dict, keys: set, where: str) -> None:
    unknown = set(doc) - keys
    if unknown:
        raise ManifestUnknownField(f"{where}: {', '.join(sorted(unknown))}")
    missing = keys - set(doc)
    if missing:
        raise ManifestSyntax(f"{where}: missing {', '.join(sorted(missing))}")


def _expect(cond: bool, where: str, what: str) -> None:
    if not cond:
        raise ManifestSyntax(f"{where}: {what}")


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _str_field(doc: dict, key: str, where: str) -> str:
    _expect(isinstance(doc[key], str), where, f"{key} must be a string")
    return doc[key]


def _asset_ref(doc, where: str) -> Optional[model.AssetRef]:
    if doc is None:
        return None
    _expect(isinstance(doc, dict), where, "must be an object or null")
    _expect_keys(doc, {"path", "mime"}, where)
    return model.AssetRef(_str_field(doc, "path", where), _str_field(doc, "mime", where))


def _item(doc, where: str):
    _expect(isinstance(doc, dict), where, "item must be an object")
    _expect("type" in doc, where, "item missing type")
    kind = doc["type"]
    if kind not in _ITEM_TYPES:
        raise ManifestSyntax(f"{where}: unknown item type {kind!r}")
    _expect_keys(doc, _ITEM_TYPES[kind] | {"type"}, where)
    if kind == "text":
        return model.Text(_str_field(doc, "body", where))
    if kind in _MEDIA_CLASSES:
        ref = model.AssetRef(_str_field(doc, "path", where), _str_field(doc, "mime", where))
        return _MEDIA_CLASSES[kind](ref, _str_field(doc, "caption", where))
    if kind == "map_point":
        _expect(_is_num(doc["lat"]) and _is_num(doc["lon"]), where, "lat/lon must be numbers")
        return model.MapPoint(float(doc["lat"]), float(doc["lon"]),
                              _str_field(doc, "label", where))
    if kind == "phone":
        return model.PhoneNumber(_str_field(doc, "digits", where))
    if kind == "email":
        return model.Email(_str_field(doc, "address", where))
    return model.WebLink(_str_field(doc, "url", where), _str_field(doc, "label", where))


def _page(doc, where: str) -> model.PageNode:
    _expect(isinstance(doc, dict), where, "page must be an object")
    _expect_keys(doc, {"id", "title", "contents", "children"}, where)
    _expect(_is_int(doc["id"]), where, "id must be an integer")
    _expect(isinstance(doc["contents"], list), where, "contents must be an array")
    _expect(isinstance(doc["children"], list), where, "children must be an array")
    return model.PageNode(
        id=doc["id"],
        title=_str_field(doc, "title", where),
        contents=[_item(item, f"{where}/contents[{i}]") for i, item in enumerate(doc["contents"])],
        children=[_page(child, f"{where}/children[{i}]") for i, child in enumerate(doc["children"])],
    )


def project_from_json(doc, asset_dir: Path) -> model.Project:
    _expect(isinstance(doc, dict), "$", "manifest must be an object")
    _expect_keys(doc, {"app_id", "version", "title", "languages", "category",
                       "theme", "pages"}, "$")
    _expect(_is_int(doc["version"]), "$", "version must be an integer")
    _expect(isinstance(doc["languages"], list), "$", "languages must be an array")
    _expect(isinstance(doc["pages"], list), "$", "pages must be an array")
    theme_doc = doc["theme"]
    _expect(isinstance(theme_doc, dict), "$/theme", "theme must be an object")
    _expect_keys(theme_doc, {"fg_color", "bg_color", "highlight_color",
                             "background_image", "background_music"}, "$/theme")
    theme = model.Theme(
        fg_color=_str_field(theme_doc, "fg_color", "$/theme"),
        bg_color=_str_field(theme_doc, "bg_color", "$/theme"),
        highlight_color=_str_field(theme_doc, "highlight_color", "$/theme"),
        background_image=_asset_ref(theme_doc["background_image"], "$/theme/background_image"),
        background_music=_asset_ref(theme_doc["background_music"], "$/theme/background_music"),
    )
    return model.Project(
        app_id=_str_field(doc, "app_id", "$"),
        version=doc["version"],
        title=_str_field(doc, "title", "$"),
        languages=list(doc["languages"]),
        category=_str_field(doc, "category", "$"),
        theme=theme,
        root_pages=[_page(p, f"$/pages[{i}]") for i, p in enumerate(doc["pages"])],
        asset_dir=Path(asset_dir),
    )


def _item_json(item) -> dict:
    if isinstance(item, model.Text):
        return {"type": "text", "body": item.body}
    for kind, cls in _MEDIA_CLASSES.items():
        if isinstance(item, cls):
            return {"type": kind, "path": item.asset.relative_path,
                    "mime": item.asset.mime, "caption": item.caption}
    if isinstance(item, model.MapPoint):
        return {"type": "map_point", "lat": item.lat, "lon": item.lon, "label": item.label}
    if isinstance(item, model.PhoneNumber):
        return {"type": "phone", "digits": item.digits}
    if isinstance(item, model.Email):
        return {"type": "email", "address": item.address}
    if isinstance(item, model.WebLink):
        return {"type": "web_link", "url": item.url, "label": item.label}
    raise TypeError(type(item).__name__)


def _page_json(page: model.PageNode) -> dict:
    return {
        "id": page.id,
        "title": page.title,
        "contents": [_item_json(i) for i in page.contents],
        "children": [_page_json(c) for c in page.children],
    }


def _ref_json(ref: Optional[model.AssetRef]):
    return None if ref is None else {"path": ref.relative_path, "mime": ref.mime}


def project_to_json(project: model.Project) -> dict:
    return {
        "app_id": project.app_id,
        "version": project.version,
        "title": project.title,
        "languages": list(project.languages),
        "category": project.category,
        "theme": {
            "fg_color": project.theme.fg_color,
            "bg_color": project.theme.bg_color,
            "highlight_color": project.theme.highlight_color,
            "background_image": _ref_json(project.theme.background_image),
            "background_music": _ref_json(project.theme.background_music),
        },
        "pages": [_page_json(p) for p in project.root_pages],
    }


def load_project(directory: Path) -> model.Project:
    directory = Path(directory)
    path = directory / MANIFEST_NAME
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ManifestSyntax(f"{path}: {e}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ManifestSyntax(f"line {e.lineno} col {e.colno}: {e.msg}") from None
    return project_from_json(doc, directory / ASSET_DIR_NAME)


def save_project(project: model.Project, directory: Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / ASSET_DIR_NAME).mkdir(exist_ok=True)
    doc = project_to_json(project)
    data = json.dumps(doc, ensure_ascii=False, indent=2) + "\n"
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8") as f:
        f.write(data)
    os.replace(tmp, directory / MANIFEST_NAME)


def load_atlas(directory: Path) -> Optional[textkit.GlyphSheet]:
    """The project's glyph sheet, when one ships alongside the manifest."""
    path = Path(directory) / GLYPHS_NAME
    if not path.is_file():
        return None
    return textkit.build_atlas(path.read_bytes())
