"""Text machinery: search normalization/tokenization and the bitmap font
framework (glyph sheets, Arabic-script joining forms, right-to-left line
shaping).

The shaping here is deliberately small: maximal right-to-left runs are
reversed into visual order and joining forms come from a four-form neighbor
rule. Full bidi embedding levels, ligatures and kerning are out of scope.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from enum import IntEnum
from typing import Mapping, Optional, Sequence

from .errors import McmsError

REPLACEMENT = 0xFFFD

# Persian search unification: Arabic yeh/kaf fold to their Farsi twins,
# tatweel and the harakat marks vanish.
_FOLD_TABLE = {0x064A: 0x06CC, 0x0643: 0x06A9, 0x0640: None}
_FOLD_TABLE.update({cp: None for cp in range(0x064B, 0x0660)})

# Blocks treated as right-to-left by the simplified run classifier.
_RTL_RANGES = (
    (0x0590, 0x05FF),  # Hebrew
    (0x0600, 0x06FF),  # Arabic
    (0x0750, 0x077F),  # Arabic Supplement
    (0x08A0, 0x08FF),  # Arabic Extended-A
    (0xFB1D, 0xFB4F),  # Hebrew presentation forms
    (0xFB50, 0xFDFF),  # Arabic presentation forms A
    (0xFE70, 0xFEFF),  # Arabic presentation forms B
)


class TextKitError(McmsError):
    pass


class GlyphSyntaxError(TextKitError):
    code = "SyntaxError"

    def __init__(self, line: int, detail: str):
        super().__init__(f"line {line}: {detail}")
        self.line = line


class DuplicateGlyph(TextKitError):
    code = "DuplicateGlyph"


class MissingIsolatedForm(TextKitError):
    code = "MissingIsolatedForm"


class MissingGlyph(TextKitError):
    code = "MissingGlyph"


class Form(IntEnum):
    ISOLATED = 0
    INITIAL = 1
    MEDIAL = 2
    FINAL = 3


class Joining(IntEnum):
    DUAL = 0
    RIGHT = 1
    NONE = 2


_FORM_NAMES = {f.name.lower(): f for f in Form}
_JOIN_NAMES = {"dual": Joining.DUAL, "right": Joining.RIGHT, "none": Joining.NONE}


@dataclass(frozen=True)
class Glyph:
    codepoint: int
    form: Form
    width: int
    height: int
    advance: int
    bearing: int
    bitmap: bytes  # rows top-to-bottom, each padded to ceil(width/8) bytes

    @property
    def row_bytes(self) -> int:
        return (self.width + 7) // 8


@dataclass(frozen=True)
class GlyphSheet:
    line_height: int
    glyphs: dict  # (codepoint, Form) -> Glyph
    joining: dict  # codepoint -> Joining

    def lookup(self, codepoint: int, form: Form) -> Optional[Glyph]:
        return self.glyphs.get((codepoint, form))


@dataclass(frozen=True)
class ShapedGlyph:
    codepoint: int
    form: Form
    x_offset: int


@dataclass(frozen=True)
class ShapedLine:
    glyphs: tuple
    total_advance: int


def normalize_text(s: str) -> str:
    """NFC + case folding + Persian unification, the one normal form every
    indexed term and every query goes through."""
    s = unicodedata.normalize("NFC", s)
    s = s.casefold()
    s = s.translate(_FOLD_TABLE)
    return unicodedata.normalize("NFC", s)


def _is_separator(ch: str) -> bool:
    return ch.isspace() or unicodedata.category(ch).startswith("P")


def tokenize(s: str) -> list:
    """Normalized terms split on Unicode whitespace and punctuation."""
    terms = []
    current = []
    for ch in normalize_text(s):
        if _is_separator(ch):
            if current:
                terms.append("".join(current))
                current = []
        else:
            current.append(ch)
    if current:
        terms.append("".join(current))
    return terms


def _parse_codepoint(token: str, line_no: int) -> int:
    if not token.upper().startswith("U+"):
        raise GlyphSyntaxError(line_no, f"expected U+XXXX, got {token!r}")
    try:
        cp = int(token[2:], 16)
    except ValueError:
        raise GlyphSyntaxError(line_no, f"bad codepoint {token!r}") from None
    if not 0 <= cp <= 0x10FFFF:
        raise GlyphSyntaxError(line_no, f"codepoint out of range {token!r}")
    return cp


def _parse_kv(token: str, key: str, line_no: int) -> str:
    prefix = key + "="
    if not token.startswith(prefix):
        raise GlyphSyntaxError(line_no, f"expected {key}=..., got {token!r}")
    return token[len(prefix):]


def _parse_int(text: str, lo: int, hi: int, what: str, line_no: int) -> int:
    try:
        value = int(text)
    except ValueError:
        raise GlyphSyntaxError(line_no, f"bad {what} {text!r}") from None
    if not lo <= value <= hi:
        raise GlyphSyntaxError(line_no, f"{what} {value} outside [{lo}, {hi}]")
    return value


def build_atlas(sheet_file: bytes) -> GlyphSheet:
    """Parse a ``glyphs.txt`` sheet into an atlas.

    Grammar, one directive per line (``#`` starts a comment):
      lineheight <px>
      join U+XXXX dual|right|none
      glyph U+XXXX form=<f> width=W height=H advance=A bearing=B bits=<hex>
    """
    try:
        text = sheet_file.decode("utf-8")
    except UnicodeDecodeError as e:
        raise GlyphSyntaxError(0, f"not UTF-8: {e}") from None

    line_height = None
    glyphs: dict = {}
    joining: dict = {}

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        keyword = tokens[0]
        if keyword == "lineheight":
            if len(tokens) != 2:
                raise GlyphSyntaxError(line_no, "lineheight takes one value")
            if line_height is not None:
                raise GlyphSyntaxError(line_no, "duplicate lineheight")
            line_height = _parse_int(tokens[1], 1, 0xFFFF, "lineheight", line_no)
        elif keyword == "join":
            if len(tokens) != 3:
                raise GlyphSyntaxError(line_no, "join takes codepoint and class")
            cp = _parse_codepoint(tokens[1], line_no)
            if tokens[2] not in _JOIN_NAMES:
                raise GlyphSyntaxError(line_no, f"bad joining class {tokens[2]!r}")
            joining[cp] = _JOIN_NAMES[tokens[2]]
        elif keyword == "glyph":
            if len(tokens) != 8:
                raise GlyphSyntaxError(line_no, "glyph takes codepoint and 6 fields")
            cp = _parse_codepoint(tokens[1], line_no)
            form_name = _parse_kv(tokens[2], "form", line_no)
            if form_name not in _FORM_NAMES:
                raise GlyphSyntaxError(line_no, f"bad form {form_name!r}")
            form = _FORM_NAMES[form_name]
            width = _parse_int(_parse_kv(tokens[3], "width", line_no), 1, 32, "width", line_no)
            height = _parse_int(_parse_kv(tokens[4], "height", line_no), 1, 32, "height", line_no)
            advance = _parse_int(_parse_kv(tokens[5], "advance", line_no), 0, 255, "advance", line_no)
            bearing = _parse_int(_parse_kv(tokens[6], "bearing", line_no), -128, 127, "bearing", line_no)
            hexbits = _parse_kv(tokens[7], "bits", line_no)
            expected = ((width + 7) // 8) * height
            try:
                bitmap = bytes.fromhex(hexbits)
            except ValueError:
                raise GlyphSyntaxError(line_no, "bits is not hex") from None
            if len(bitmap) != expected:
                raise GlyphSyntaxError(
                    line_no, f"bits is {len(bitmap)} bytes, expected {expected}")
            if (cp, form) in glyphs:
                raise DuplicateGlyph(f"U+{cp:04X} {form.name.lower()}")
            glyphs[(cp, form)] = Glyph(cp, form, width, height, advance, bearing, bitmap)
        else:
            raise GlyphSyntaxError(line_no, f"unknown directive {keyword!r}")

    if line_height is None:
        raise GlyphSyntaxError(0, "missing lineheight directive")
    for cp in {cp for cp, _ in glyphs}:
        if (cp, Form.ISOLATED) not in glyphs:
            raise MissingIsolatedForm(f"U+{cp:04X}")
    return GlyphSheet(line_height=line_height, glyphs=glyphs, joining=joining)


def select_joining_forms(codepoints: Sequence[int], joining: Mapping[int, Joining]) -> list:
    """Pick isolated/initial/medial/final per position from neighbor classes.

    A char joins toward the next char iff it is dual and the next is dual or
    right-joining; it joins toward the previous char iff that one is dual.
    """
    def cls(cp: int) -> Joining:
        return joining.get(cp, Joining.NONE)

    forms = []
    n = len(codepoints)
    for i, cp in enumerate(codepoints):
        joins_next = (
            cls(cp) is Joining.DUAL
            and i + 1 < n
            and cls(codepoints[i + 1]) in (Joining.DUAL, Joining.RIGHT)
        )
        joins_prev = i > 0 and cls(codepoints[i - 1]) is Joining.DUAL
        if joins_next and joins_prev:
            forms.append(Form.MEDIAL)
        elif joins_next:
            forms.append(Form.INITIAL)
        elif joins_prev:
            forms.append(Form.FINAL)
        else:
            forms.append(Form.ISOLATED)
    return forms


def is_rtl_codepoint(cp: int) -> bool:
    return any(lo <= cp <= hi for lo, hi in _RTL_RANGES)


def detect_base_direction(s: str) -> str:
    """Direction of the first strong character; ltr when there is none."""
    for ch in s:
        if is_rtl_codepoint(ord(ch)):
            return "rtl"
        if unicodedata.category(ch)[0] in ("L", "N"):
            return "ltr"
    return "ltr"


def _direction(ch: str) -> str:
    cp = ord(ch)
    if is_rtl_codepoint(cp):
        return "rtl"
    if unicodedata.category(ch)[0] in ("L", "N"):
        return "ltr"
    return "neutral"


def _split_runs(s: str, base_direction: str) -> list:
    """Maximal directional runs of character indices; neutrals attach to the
    run before them, or to an implied base-direction run at the start."""
    runs = []
    for i, ch in enumerate(s):
        d = _direction(ch)
        if d == "neutral":
            d = runs[-1][0] if runs else base_direction
        if runs and runs[-1][0] == d:
            runs[-1][1].append(i)
        else:
            runs.append((d, [i]))
    return runs


def shape_line(s: str, atlas: GlyphSheet, base_direction: str = "ltr") -> ShapedLine:
    """Lay out one line of text against a glyph atlas.

    Joining forms are chosen in logical order, then each right-to-left run is
    reversed; x offsets accumulate advances over the visual sequence.
    """
    if base_direction not in ("ltr", "rtl"):
        raise ValueError(f"bad base_direction {base_direction!r}")
    codepoints = [ord(ch) for ch in s]
    forms = select_joining_forms(codepoints, atlas.joining)

    visual: list = []
    for direction, indices in _split_runs(s, base_direction):
        visual.extend(reversed(indices) if direction == "rtl" else indices)

    shaped = []
    x = 0
    for i in visual:
        glyph = atlas.lookup(codepoints[i], forms[i])
        if glyph is None:
            glyph = atlas.lookup(REPLACEMENT, Form.ISOLATED)
        if glyph is None:
            raise MissingGlyph(f"U+{codepoints[i]:04X} {forms[i].name.lower()}")
        shaped.append(ShapedGlyph(glyph.codepoint, glyph.form, x))
        x += glyph.advance
    return ShapedLine(glyphs=tuple(shaped), total_advance=x)
