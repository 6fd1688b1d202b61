from __future__ import annotations

import pytest

from gramata.benchmarks import load_benchmark
from gramata.grammar import Grammar


@pytest.fixture(scope="session")
def g0() -> Grammar:
    return load_benchmark("g0")


@pytest.fixture
def grammar_file(tmp_path):
    """Write grammar text to a temp file and return its path as str."""

    def write(text: str, name: str = "g.cfg") -> str:
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return str(p)

    return write
