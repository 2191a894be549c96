"""Crossed-system bundles: a directory with presentation.txt, base.txt,
transversal.txt and optionally monomial_rep.txt, group.txt and
expected.json (settings plus expected results for replay)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Optional

from .affine import AffineMonoid, parse_affine
from .crossed import CrossedSystem, extract_crossed_system, parse_monomial_rep
from .groups import ExtensionData, parse_group
from .presentations import Presentation, RewriteSystem, complete, parse_presentation

BUNDLE_DIR = Path(__file__).parent / "bundles"

DEFAULT_SETTINGS = {
    "check_len": 6,
    "radius": 4,
    "box": 2,
    "scan_len": 6,
    "max_rules": 500,
    "max_len": 20,
}


def bundled_names() -> list:
    return sorted(p.name for p in BUNDLE_DIR.iterdir() if (p / "presentation.txt").exists())


def resolve(path) -> Path:
    """A bundle directory; ``examples/<name>`` and bare names fall back to
    the copies shipped with the package."""
    p = Path(path)
    if p.is_dir():
        return p
    if (BUNDLE_DIR / p.name).is_dir():
        return BUNDLE_DIR / p.name
    raise FileNotFoundError(f"no bundle at {path}")


def parse_transversal(text: str):
    coverage = "full"
    words = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("coverage:"):
            coverage = line.split(":", 1)[1].strip()
            continue
        words.append(line)
    return words, coverage


@dataclass
class Bundle:
    path: Path
    presentation: Presentation
    base: AffineMonoid
    base_words: dict
    transversal: list
    coverage: str
    monomial_text: Optional[str] = None
    group_text: Optional[str] = None
    expected: dict = field(default_factory=dict)
    settings: dict = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.path.name

    def setting(self, key, override=None):
        if override is not None:
            return override
        return self.settings.get(key, DEFAULT_SETTINGS[key])

    def rewrite_system(self, max_rules=None, max_len=None) -> RewriteSystem:
        key = (self.setting("max_rules", max_rules), self.setting("max_len", max_len))
        cache = self.__dict__.setdefault("_rs", {})
        if key not in cache:
            cache[key] = complete(self.presentation, *key)
        return cache[key]

    def crossed_system(self, check_len=None, max_rules=None) -> CrossedSystem:
        key = (self.setting("check_len", check_len), self.setting("max_rules", max_rules))
        cache = self.__dict__.setdefault("_cs", {})
        if key not in cache:
            rs = self.rewrite_system(key[1])
            words = [self.base_words[nm] for nm in self.base.names]
            cache[key] = extract_crossed_system(rs, self.base, words, self.transversal, key[0], self.coverage)
        return cache[key]

    def monomial_rep(self) -> Optional[dict]:
        if self.monomial_text is None:
            return None
        return parse_monomial_rep(self.monomial_text, self.presentation)

    def group(self) -> Optional[ExtensionData]:
        return parse_group(self.group_text) if self.group_text is not None else None


def load_bundle(path) -> Bundle:
    d = resolve(path)
    pres = parse_presentation((d / "presentation.txt").read_text(encoding="utf-8"))
    base, words = parse_affine((d / "base.txt").read_text(encoding="utf-8"))
    missing = [nm for nm in base.names if nm not in words]
    if missing:
        raise ValueError(f"base.txt: no word for {', '.join(missing)}")
    trans, coverage = parse_transversal((d / "transversal.txt").read_text(encoding="utf-8"))
    opt = lambda name: (d / name).read_text(encoding="utf-8") if (d / name).exists() else None  # noqa: E731
    exp_text = opt("expected.json")
    exp = json.loads(exp_text) if exp_text else {}
    return Bundle(
        d, pres, base, {k: pres.word(v) for k, v in words.items()},
        [pres.word(w) for w in trans], coverage, opt("monomial_rep.txt"), opt("group.txt"),
        exp.get("expected", {}), exp.get("settings", {}),
    )
