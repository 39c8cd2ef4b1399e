import random
from pathlib import Path

import pytest

from mcms import textkit
from mcms.model import (Animation, AssetRef, Audio, Email, Image, MapPoint,
                        PageNode, PhoneNumber, Project, Text, Theme, Video, WebLink)

# Mixed word pool: plain English, Farsi, and the Arabic-kaf/yeh spellings
# that normalization folds onto the Farsi ones.
WORDS = [
    "lion", "river", "market", "travel", "music", "history", "guide",
    "کتاب", "كتاب", "آموزش", "شهر", "موسیقی", "تاریخ", "سلام", "فرهنگ",
    "کیوسک", "كيوسك", "nature2", "x1",
]

ASSET_POOL = [
    ("pic0.png", b"\x89PNG-alpha-payload", "image/png"),
    ("pic1.png", b"\x89PNG-beta-payload", "image/png"),
    ("pic2.png", b"\x89PNG-alpha-payload", "image/png"),  # duplicate bytes of pic0
    ("clip0.mp3", b"ID3-audio-bytes-aaaa", "audio/mpeg"),
    ("clip1.mp4", b"ftyp-video-bytes-bbb", "video/mp4"),
    ("anim0.gif", b"GIF89a-frames", "image/gif"),
]


def write_asset_pool(asset_dir: Path):
    asset_dir.mkdir(parents=True, exist_ok=True)
    for name, data, _ in ASSET_POOL:
        (asset_dir / name).write_bytes(data)


def words(rng: random.Random, n_lo=1, n_hi=6) -> str:
    return " ".join(rng.choice(WORDS) for _ in range(rng.randint(n_lo, n_hi)))


def random_item(rng: random.Random):
    kind = rng.randrange(9)
    if kind == 0:
        return Text(words(rng, 1, 10))
    if kind in (1, 2, 3, 4):
        name, _, mime = rng.choice(ASSET_POOL)
        ref = AssetRef(name, mime)
        cls = (Image, Audio, Video, Animation)[kind - 1]
        return cls(ref, caption=words(rng, 0, 3))
    if kind == 5:
        return MapPoint(round(rng.uniform(-90, 90), 4), round(rng.uniform(-180, 180), 4),
                        label=words(rng, 0, 2))
    if kind == 6:
        return PhoneNumber("+" + "".join(rng.choice("0123456789") for _ in range(rng.randint(3, 15))))
    if kind == 7:
        return Email(f"user{rng.randrange(100)}@example.org")
    return WebLink(f"https://example.org/{rng.randrange(1000)}", label=words(rng, 0, 2))


def random_project(rng: random.Random, asset_dir: Path, max_pages=20,
                   app_id="random-app", version=1) -> Project:
    """A valid project with a random tree shape and every content variant in
    play. The asset pool must already exist at asset_dir."""
    n_pages = rng.randint(1, max_pages)
    pages = {}
    roots = []
    for page_id in range(1, n_pages + 1):
        page = PageNode(
            id=page_id,
            title=words(rng, 1, 4),
            contents=[random_item(rng) for _ in range(rng.randint(0, 5))],
        )
        pages[page_id] = page
        if page_id == 1 or rng.random() < 0.25:
            roots.append(page)
        else:
            pages[rng.randint(1, page_id - 1)].children.append(page)

    theme = Theme(
        fg_color="#102030",
        bg_color="#FFFFF0",
        highlight_color="#CC3300",
        background_image=AssetRef("pic1.png", "image/png") if rng.random() < 0.5 else None,
        background_music=AssetRef("clip0.mp3", "audio/mpeg") if rng.random() < 0.3 else None,
    )
    return Project(
        app_id=app_id,
        version=version,
        title=words(rng, 1, 3),
        languages=["en", "fa"],
        category=rng.choice(["education", "commerce", "culture"]),
        theme=theme,
        root_pages=roots,
        asset_dir=Path(asset_dir),
    )


@pytest.fixture
def asset_dir(tmp_path):
    d = tmp_path / "assets"
    write_asset_pool(d)
    return d


@pytest.fixture
def simple_project(asset_dir):
    """Two roots, one nested child, a bit of every content type."""
    return Project(
        app_id="demo-app",
        version=1,
        title="Demo",
        languages=["en", "fa"],
        category="education",
        theme=Theme(),
        root_pages=[
            PageNode(1, "Animals", contents=[
                Text("Lions live in prides. lion lion"),
                Image(AssetRef("pic0.png", "image/png"), caption="A lion"),
                PhoneNumber("+15551234567"),
            ], children=[
                PageNode(3, "Birds", contents=[Text("Falcons dive fast.")]),
            ]),
            PageNode(2, "Plants", contents=[
                Text("Ferns like shade. lion"),
                MapPoint(34.3142, 47.065, label="garden"),
                Email("who@example.org"),
                WebLink("https://example.org/plants", label="more"),
                Audio(AssetRef("clip0.mp3", "audio/mpeg"), caption="birdsong"),
                Video(AssetRef("clip1.mp4", "video/mp4"), caption="tour"),
                Animation(AssetRef("anim0.gif", "image/gif"), caption="sprout"),
            ]),
        ],
        asset_dir=asset_dir,
    )


def sheet_text(*lines) -> bytes:
    return ("\n".join(lines) + "\n").encode("utf-8")


def atlas_for(chars: str, joining=None, line_height=12) -> textkit.GlyphSheet:
    """Fabricate an atlas covering every form of the given characters plus
    the replacement glyph; advances vary per codepoint so order mistakes
    change the offsets."""
    glyphs = {}
    for ch in dict.fromkeys(chars):
        cp = ord(ch)
        advance = 4 + (cp % 5)
        for form in textkit.Form:
            glyphs[(cp, form)] = textkit.Glyph(cp, form, width=5, height=7,
                                               advance=advance, bearing=0,
                                               bitmap=bytes(7))
    glyphs[(0xFFFD, textkit.Form.ISOLATED)] = textkit.Glyph(
        0xFFFD, textkit.Form.ISOLATED, width=5, height=7, advance=9, bearing=0,
        bitmap=bytes(7))
    return textkit.GlyphSheet(line_height=line_height, glyphs=glyphs,
                              joining=dict(joining or {}))
