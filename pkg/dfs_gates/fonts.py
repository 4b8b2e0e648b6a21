"""Unicode font for the PDF report: Greek symbols need more than the core PDF fonts."""
from __future__ import annotations

import io
import logging
from pathlib import Path
from typing import Optional

import requests
from fontTools.ttLib import TTFont

log = logging.getLogger(__name__)

FONT_DIR = Path(__file__).resolve().parent / "fonts_cache"
FONT_PATH = FONT_DIR / "UnicodeSans.ttf"
# tried in order; all three ship the Greek block
FONT_SOURCES = (
    ("Noto Sans", "https://github.com/google/fonts/raw/main/ofl/notosans/NotoSans-Regular.ttf"),
    ("DejaVu Sans", "https://github.com/dejavu-fonts/dejavu-fonts/raw/master/ttf/DejaVuSans.ttf"),
    ("Source Sans 3",
     "https://github.com/adobe-fonts/source-sans/raw/release/TTF/SourceSans3-Regular.ttf"),
)
SFNT_TAGS = (b"\x00\x01\x00\x00", b"true", b"typ1", b"OTTO")
FETCH_TIMEOUT_S = 20
# symbols the PDF report prints
REQUIRED_GLYPHS = "θπαγΓσ"


def missing_glyphs(font: TTFont, chars: str = REQUIRED_GLYPHS) -> str:
    cmap = font.getBestCmap() or {}
    return "".join(ch for ch in chars if ord(ch) not in cmap)


def _valid_ttf_bytes(data: bytes) -> bool:
    if data[:4] not in SFNT_TAGS:
        return False
    return not missing_glyphs(TTFont(io.BytesIO(data)))


def _cached_font() -> Optional[str]:
    if not FONT_PATH.exists():
        return None
    try:
        gaps = missing_glyphs(TTFont(str(FONT_PATH)))
    except Exception as e:
        log.debug("cached font unreadable (%s), refetching", e)
        return None
    if gaps:
        log.debug("cached font lacks %r, refetching", gaps)
        return None
    return str(FONT_PATH)


def ensure_unicode_font() -> str:
    """Path to a cached TrueType font with Greek coverage, downloading one if needed."""
    cached = _cached_font()
    if cached:
        return cached

    FONT_DIR.mkdir(parents=True, exist_ok=True)
    last = None
    for name, url in FONT_SOURCES:
        try:
            resp = requests.get(url, timeout=FETCH_TIMEOUT_S)
            resp.raise_for_status()
            if not _valid_ttf_bytes(resp.content):
                last = f"{name}: not a usable TrueType font"
                continue
        except Exception as e:
            last = f"{name}: {type(e).__name__}: {e}"
            continue
        FONT_PATH.write_bytes(resp.content)
        log.info("cached %s for PDF output at %s", name, FONT_PATH)
        return str(FONT_PATH)
    raise RuntimeError(f"no Unicode font could be fetched; last error {last}")
