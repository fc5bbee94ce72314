import os
import pathlib

import pytest

import rdfvm

DATA = pathlib.Path(os.environ.get("RVM_DATA_DIR", pathlib.Path(__file__).resolve().parents[2] / "data"))
LANL = "http://www.lanl.gov"
KNOWS = "http://xmlns.com/foaf/0.1/knows"


@pytest.fixture
def api():
    return rdfvm.compile((DATA / "Person.neno").read_text(), seed=1)


@pytest.fixture
def people(api):
    store = rdfvm.Store(seed=2)
    for name in ("marko", "josh"):
        store.instantiate(api, LANL + "Person", LANL + name)
    return store


def test_compile_is_deterministic_with_seed(api):
    again = rdfvm.compile((DATA / "Person.neno").read_text(), seed=1)
    assert api == again
    assert rdfvm.canonical(api) == api


def test_make_friend_then_query(people):
    rvm = people.invoke(LANL + "marko", "makeFriend", [f"<{LANL}josh>"])
    result = people.run(rvm)
    assert result["outcome"] == "Terminal"
    rows = people.query(f"SELECT ?x WHERE {{ <{LANL}marko> <{KNOWS}> ?x }}")
    assert rows == [{"x": f"<{LANL}josh>"}]


def test_is_friend_returns_boolean(people):
    people.run(people.invoke(LANL + "marko", "makeFriend", [f"<{LANL}josh>"]))
    result = people.run(people.invoke(LANL + "marko", "isFriend", [f"<{LANL}josh>"]))
    assert result["outcome"] == "Terminal"
    assert result["top"] == ['"true"^^<http://www.w3.org/2001/XMLSchema#boolean>']


def test_suspend_and_resume(people):
    rvm = people.invoke(LANL + "marko", "makeFriend", [f"<{LANL}josh>"])
    first = people.run(rvm, max_cycles=1)
    assert first["outcome"] == "Suspended"
    assert people.run(rvm, max_cycles=1000)["outcome"] == "Terminal"


def test_dump_graph_round_trips(people):
    text = people.dump()
    other = rdfvm.Store()
    other.load(text)
    assert other.dump() == text
    assert len(other) == len(people)
    assert people.dump(LANL + "josh") in text


def test_memo(people):
    people.memo_record(LANL + "f", '"5"^^<http://www.w3.org/2001/XMLSchema#int>',
                       '"6"^^<http://www.w3.org/2001/XMLSchema#int>')
    assert people.memo_lookup(LANL + "f", '"5"^^<http://www.w3.org/2001/XMLSchema#int>').startswith('"6"')
    with pytest.raises(rdfvm.RvmError):
        people.memo_record(LANL + "f", '"5"^^<http://www.w3.org/2001/XMLSchema#int>',
                           '"7"^^<http://www.w3.org/2001/XMLSchema#int>')


def test_errors_surface_as_exceptions():
    with pytest.raises(rdfvm.RvmError):
        rdfvm.compile("rdfs:Resource {")
    with pytest.raises(rdfvm.RvmError):
        rdfvm.Store().query("SELECT WHERE")
