"""Shared fixtures: fixture-file loaders and small document builders."""

from pathlib import Path

import pytest

from autex import Apd, IndexRequest, Pointer, Vocabulary, index_document

FIXTURES = Path(__file__).parent / "fixtures"

# corpus file name -> the source id its transcribed reports carry
CORPUS_IDS = {
    "a01": "hep-ph/0106157",
    "a02": "hep-ph/0103176",
    "a03": "hep-ph/0106085",
    "a04": "hep-ph/0107217",
    "a05": "hep-ph/0112171",
    "a06": "hep-ph/9910476",
    "a07": "hep-ph/9812408",
    "a08": "hep-ph/9710219",
    "a09": "hep-ph/9404289",
    "a10": "astro-ph/9812366",
}


def load_apd(name: str) -> Apd:
    apd = Apd(vocabulary=Vocabulary())
    path = FIXTURES / "apd" / name
    apd.load(path.read_text(encoding="utf-8"), filename=str(path))
    return apd


def corpus_tex(name: str) -> str:
    return (FIXTURES / "corpus" / f"{name}.tex").read_text(encoding="utf-8")


def make_doc(title: str = "A title", abstract: str = "An abstract.") -> str:
    return (
        "\\documentclass{article}\n"
        f"\\title{{{title}}}\n"
        "\\begin{document}\n"
        "\\maketitle\n"
        "\\begin{abstract}\n"
        f"{abstract}\n"
        "\\end{abstract}\n"
        "\\end{document}\n"
    )


def index_text(
    tex: str,
    apd: Apd,
    source_id: str = "doc",
    pointers=(Pointer.TITLE, Pointer.ABSTRACT),
):
    request = IndexRequest(source_id=source_id, tex_source=tex, pointers=pointers)
    return index_document(request, apd=apd)


@pytest.fixture()
def desk_apd() -> Apd:
    return load_apd("desk.apd")


@pytest.fixture()
def worked_apd() -> Apd:
    return load_apd("worked.apd")
