from __future__ import annotations

import pytest

from rqa.cli import main
from rqa.core import parse_program
from rqa.corpus import crimes_fixture, persons_dataset
from rqa.mapping import parse_mappings
from rqa.relstore import load_catalog

_VERDICTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_VERDICTS] = []


def pytest_terminal_summary(terminalreporter):
    lines = terminalreporter.config.stash.get(_VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)


@pytest.fixture
def verdict(request):
    """Record and print one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(number, title, ok, detail=""):
        line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title}" + (f" ({detail})" if detail else "")
        request.config.stash[_VERDICTS].append(line)
        print(line)
        assert ok, line

    return record


class Loaded:
    def __init__(self, root):
        self.root = root
        self.rules = root / "rules.dl"
        self.mappings = root / "mappings.map"
        self.catalog = root / "catalog.txt"
        self.program = parse_program(self.rules.read_text())
        self.cat = load_catalog(self.catalog)
        self.mset = parse_mappings(self.mappings.read_text(), self.cat, self.program)

    def flags(self):
        return ["--rules", str(self.rules), "--mappings", str(self.mappings), "--catalog", str(self.catalog)]


@pytest.fixture(scope="session")
def crimes(tmp_path_factory):
    root = tmp_path_factory.mktemp("crimes")
    crimes_fixture().write(root)
    return Loaded(root)


@pytest.fixture(scope="session")
def persons(tmp_path_factory):
    root = tmp_path_factory.mktemp("persons")
    persons_dataset().write(root)
    return Loaded(root)


@pytest.fixture
def rqa(capsys):
    """Run the CLI in-process; returns (exit code, stdout, stderr)."""

    def run(*argv):
        code = main([str(a) for a in argv])
        out, err = capsys.readouterr()
        return code, out, err

    return run
