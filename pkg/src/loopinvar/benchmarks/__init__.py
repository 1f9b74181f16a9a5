"""The bundled benchmark corpus, one ``.loop`` file per program."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from loopinvar.frontend import Program, parse_program


def directory() -> Path:
    return Path(str(resources.files(__name__)))


def names() -> list[str]:
    return sorted(p.name[: -len(".loop")] for p in resources.files(__name__).iterdir() if p.name.endswith(".loop"))


def source(name: str) -> str:
    f = resources.files(__name__) / f"{name}.loop"
    if not f.is_file():
        raise KeyError(f"no bundled benchmark named {name!r}")
    return f.read_text()


def load(name: str) -> Program:
    return parse_program(source(name))
