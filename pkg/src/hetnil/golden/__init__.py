"""Hand transcriptions of published displays, in the :mod:`hetnil.grammar` text format."""

from functools import lru_cache
from importlib import resources

from ..grammar import parse_sections

NAMES = ("tor5", "connection", "curvature", "pontrjagin", "abinst", "p11")


@lru_cache(maxsize=None)
def load(name: str) -> dict:
    if name not in NAMES:
        raise KeyError(f"no golden file {name!r}; known: {', '.join(NAMES)}")
    text = resources.files(__name__).joinpath(f"{name}.txt").read_text()
    return parse_sections(text)
