from __future__ import annotations

import logging
import re
from typing import Mapping, Sequence

import numpy as np
import pandas as pd
from fpdf import FPDF

from .fonts import ensure_unicode_font

log = logging.getLogger(__name__)

_GREEK = [
    (re.compile(r"\bGamma\b"), "Γ"),
    (re.compile(r"\bgamma\b"), "γ"),
    (re.compile(r"\btheta"), "θ"),
    (re.compile(r"\balpha\b"), "α"),
    (re.compile(r"\bpi\b"), "π"),
    (re.compile(r"\bsigma\^"), "σ^"),
]


def prettify(text: str) -> str:
    """ASCII symbol names to Greek letters, for fonts that have them."""
    for pat, rep in _GREEK:
        text = pat.sub(rep, text)
    return text


def _fmt_cell(v) -> str:
    if v is None or (isinstance(v, float) and np.isnan(v)):
        return "none"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.6g}"
    return str(v)


def _thin(df: pd.DataFrame, max_rows: int) -> pd.DataFrame:
    if len(df) <= max_rows:
        return df
    step = int(np.ceil(len(df) / max_rows))
    idx = sorted(set(range(0, len(df), step)) | {len(df) - 1})
    return df.iloc[idx]


def render_pdf(title: str, lines: Sequence[str], tables: Mapping[str, pd.DataFrame],
               outfile: str, max_rows: int = 40):
    pdf = FPDF(orientation="P", unit="mm", format="Letter")
    pdf.set_auto_page_break(auto=True, margin=12)
    try:
        pdf.add_font("UnicodeSans", "", ensure_unicode_font())
        family, text_of = "UnicodeSans", prettify
    except Exception as e:
        log.warning("Unicode font unavailable (%s); PDF uses Helvetica with ASCII names", e)
        family, text_of = "Helvetica", str
    pdf.add_page()

    pdf.set_font(family, size=12)
    pdf.cell(0, 8, text_of(title), new_x="LMARGIN", new_y="NEXT")

    pdf.set_font(family, size=9)
    for line in lines:
        pdf.multi_cell(0, 5, text_of(line), new_x="LMARGIN", new_y="NEXT")

    usable = pdf.w - pdf.l_margin - pdf.r_margin
    for name, df in tables.items():
        pdf.ln(3)
        pdf.set_font(family, size=11)
        shown = _thin(df, max_rows)
        note = "" if len(shown) == len(df) else f" (every {int(np.ceil(len(df) / max_rows))}th row)"
        pdf.cell(0, 7, text_of(name) + note, new_x="LMARGIN", new_y="NEXT")

        cols = list(df.columns)
        w = usable / max(len(cols), 1)
        pdf.set_font(family, size=7)
        for c in cols:
            pdf.cell(w, 6, str(c), border=1, align="C")
        pdf.ln(6)
        for _, r in shown.iterrows():
            for c in cols:
                pdf.cell(w, 5, _fmt_cell(r[c]), border=1, align="R")
            pdf.ln(5)

    pdf.output(outfile)
    log.info("PDF written: %s", outfile)
