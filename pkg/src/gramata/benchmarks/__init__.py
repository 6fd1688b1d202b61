"""Bundled example grammars for demos and the test suite."""

from importlib import resources

from gramata.grammar import Grammar, parse_grammar

_PACKAGE = "gramata.benchmarks"


def list_benchmarks() -> list[str]:
    names = []
    for entry in resources.files(_PACKAGE).iterdir():
        if entry.name.endswith(".cfg"):
            names.append(entry.name[:-4])
    return sorted(names)


def load_benchmark(name: str) -> Grammar:
    path = resources.files(_PACKAGE) / f"{name}.cfg"
    if not path.is_file():
        raise KeyError(f"no bundled grammar named {name!r}")
    return parse_grammar(path.read_text(encoding="utf-8"))


def benchmark_text(name: str) -> str:
    path = resources.files(_PACKAGE) / f"{name}.cfg"
    if not path.is_file():
        raise KeyError(f"no bundled grammar named {name!r}")
    return path.read_text(encoding="utf-8")
