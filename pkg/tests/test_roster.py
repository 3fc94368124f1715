"""Roster ingestion, labeling, fetching, and indexing."""

import json

import pytest
import requests

from portrayal.errors import ConfigError, EndpointUnreachable, MissingColumn, QueryRejected
from portrayal.roster import (
    GroupMap,
    Person,
    apply_group_map,
    apply_overrides,
    build_index,
    fetch_roster,
    parse_roster_export,
    person_id_for,
)

EXPORT = """name,dob,ethnicLabel,occupation
Frederick Douglass,1818-02-14,African Americans,orator
Frederick Douglass,1818-02-14,African Americans,abolitionist
Cher,1946-05-20,Armenian Americans,singer
Fiorello LaGuardia,1882-12-11,Italian Americans,politician
Nameless Sharer,1882-12-11,,
"""


@pytest.fixture
def export_file(tmp_path):
    path = tmp_path / "roster.csv"
    path.write_text(EXPORT)
    return path


@pytest.fixture
def group_map():
    return GroupMap(
        mapping={
            "African Americans": "GRP_BLACK",
            "Italian Americans": "GRP_WHITE",
            "Irish Americans": "GRP_WHITE",
        }
    )


class TestParseExport:
    def test_field_extraction(self, export_file):
        parsed = parse_roster_export(export_file)
        douglass = next(p for p in parsed.persons if p.full_name == "Frederick Douglass")
        assert douglass.birth_year == 1818
        assert douglass.source_ethnic_label == "African Americans"

    def test_single_token_name_skipped(self, export_file):
        parsed = parse_roster_export(export_file)
        assert parsed.rows_skipped == 1
        assert all(p.full_name != "Cher" for p in parsed.persons)

    def test_duplicate_rows_merge_occupations(self, export_file):
        parsed = parse_roster_export(export_file)
        douglass = [p for p in parsed.persons if p.full_name == "Frederick Douglass"]
        assert len(douglass) == 1
        assert douglass[0].occupation == "abolitionist; orator"

    def test_same_name_different_birth_kept_apart(self, tmp_path):
        path = tmp_path / "roster.csv"
        path.write_text(
            "name,dob,ethnicLabel,occupation\n"
            "John Smith,1800-01-01,Irish Americans,farmer\n"
            "John Smith,1850-01-01,Irish Americans,lawyer\n"
        )
        parsed = parse_roster_export(path)
        assert len(parsed.persons) == 2
        assert {p.birth_year for p in parsed.persons} == {1800, 1850}

    def test_missing_column(self, tmp_path):
        path = tmp_path / "roster.csv"
        path.write_text("name,dob,occupation\nA B,1800,x\n")
        with pytest.raises(MissingColumn):
            parse_roster_export(path)

    def test_tab_delimited_variant(self, tmp_path):
        path = tmp_path / "roster.tsv"
        path.write_text(
            "name\tdob\tethnicLabel\toccupation\nAda Lovelace\t1815-12-10\tBritish\tmathematician\n"
        )
        parsed = parse_roster_export(path)
        assert parsed.persons[0].birth_year == 1815

    def test_unparseable_dob_gives_unknown_birth(self, tmp_path):
        path = tmp_path / "roster.csv"
        path.write_text("name,dob,ethnicLabel,occupation\nAda Lovelace,unknown,British,math\n")
        parsed = parse_roster_export(path)
        assert parsed.persons[0].birth_year is None

    def test_person_id_is_stable(self):
        assert person_id_for("Ada Lovelace", 1815) == person_id_for("Ada Lovelace", 1815)
        assert person_id_for("Ada Lovelace", 1815) != person_id_for("Ada Lovelace", 1816)


class TestGroupMap:
    def test_mapped_label(self, export_file, group_map):
        persons = apply_group_map(parse_roster_export(export_file).persons, group_map)
        laguardia = next(p for p in persons if "LaGuardia" in p.full_name)
        assert laguardia.group == "GRP_WHITE"

    def test_unmapped_and_empty_labels_go_to_other(self, group_map):
        persons = apply_group_map(
            [
                Person(person_id="m", full_name="Mars Visitor", source_ethnic_label="Martian"),
                Person(person_id="e", full_name="Empty Label", source_ethnic_label=""),
            ],
            group_map,
        )
        assert [p.group for p in persons] == ["OTHER", "OTHER"]

    def test_reapplication_is_noop(self, export_file, group_map):
        once = apply_group_map(parse_roster_export(export_file).persons, group_map)
        twice = apply_group_map(once, group_map)
        assert [(p.person_id, p.group) for p in once] == [
            (p.person_id, p.group) for p in twice
        ]

    def test_requires_two_target_groups(self):
        with pytest.raises(ConfigError):
            GroupMap(mapping={"X": "ONLY"})

    def test_from_file_flat_and_nested(self, tmp_path):
        flat = tmp_path / "flat.json"
        flat.write_text(json.dumps({"A": "G1", "B": "G2"}))
        assert GroupMap.from_file(flat).apply("A") == "G1"
        nested = tmp_path / "nested.json"
        nested.write_text(json.dumps({"mapping": {"A": "G1", "B": "G2"}, "default": "NONE"}))
        assert GroupMap.from_file(nested).apply("zzz") == "NONE"

    def test_overrides(self):
        persons = [
            Person(person_id="x", full_name="Known Figure", group="OTHER"),
        ]
        out = apply_overrides(persons, {"Known Figure": "GRP_BLACK"})
        assert out[0].group == "GRP_BLACK"


class TestBuildIndex:
    def test_shared_first_token(self):
        index = build_index(
            [
                Person(person_id="a", full_name="John Smith", group="G1"),
                Person(person_id="b", full_name="John Adams", group="G2"),
            ]
        )
        assert len(index.candidates("John")) == 2
        assert len(index) == 2

    def test_other_group_excluded(self):
        index = build_index(
            [
                Person(person_id="a", full_name="John Smith", group="G1"),
                Person(person_id="b", full_name="Jane Doe", group="OTHER"),
            ]
        )
        assert len(index) == 1
        assert index.candidates("Jane") == []

    def test_empty_roster(self):
        index = build_index([])
        assert len(index) == 0

    def test_size_matches_non_other_count(self):
        persons = [
            Person(person_id=str(i), full_name=f"Name{i} Last{i}",
                   group="OTHER" if i % 3 == 0 else "G1")
            for i in range(12)
        ]
        index = build_index(persons)
        assert len(index) == sum(1 for p in persons if p.group != "OTHER")


FIXTURE_CSV = (
    "name,dob,ethnicLabel,occupation\n"
    "R One,1801-01-01,L1,o1\n"
    "R Two,1802-01-01,L2,o2\n"
    "R Three,1803-01-01,L1,o3\n"
    "R Four,1804-01-01,L2,o4\n"
    "R Five,1805-01-01,L1,o5\n"
)


class _FakeResponse:
    def __init__(self, status_code=200, payload=None):
        self.status_code = status_code
        self._payload = payload or {}

    def json(self):
        return self._payload


def test_bundled_offline_fixture_parses(tmp_path):
    from pathlib import Path

    fixture = Path(__file__).parent.parent / "testdata" / "roster_fixture.csv"
    out = tmp_path / "export.csv"
    fetch_roster(None, None, out, fixture=fixture)
    parsed = parse_roster_export(out)
    assert parsed.rows_skipped == 1  # single-token stage name
    douglass = next(p for p in parsed.persons if p.full_name == "Frederick Douglass")
    assert douglass.birth_year == 1818
    assert douglass.occupation == "abolitionist; orator"
    query = (Path(__file__).parent.parent / "testdata" / "roster_query.sparql").read_text()
    assert "SELECT DISTINCT" in query and "?dob" in query


class TestFetchRoster:
    def test_offline_fixture_replayed_byte_identical(self, tmp_path):
        fixture = tmp_path / "fixture.csv"
        fixture.write_text(FIXTURE_CSV)
        out = tmp_path / "export.csv"
        fetch_roster(None, None, out, fixture=fixture)
        assert out.read_bytes() == fixture.read_bytes()
        assert len(parse_roster_export(out).persons) == 5

    def test_offline_without_fixture_is_config_error(self, tmp_path):
        with pytest.raises(ConfigError):
            fetch_roster(None, None, tmp_path / "out.csv")

    def test_429_with_fixture_falls_back(self, tmp_path, monkeypatch, caplog):
        monkeypatch.setattr(
            requests, "post", lambda *a, **k: _FakeResponse(status_code=429)
        )
        fixture = tmp_path / "fixture.csv"
        fixture.write_text(FIXTURE_CSV)
        out = tmp_path / "export.csv"
        with caplog.at_level("WARNING"):
            fetch_roster("http://endpoint.test/sparql", "SELECT 1", out, fixture=fixture)
        assert out.read_bytes() == fixture.read_bytes()
        assert any("fixture" in r.message for r in caplog.records)

    def test_429_without_fixture_raises(self, tmp_path, monkeypatch):
        monkeypatch.setattr(
            requests, "post", lambda *a, **k: _FakeResponse(status_code=429)
        )
        with pytest.raises(EndpointUnreachable):
            fetch_roster("http://endpoint.test/sparql", "SELECT 1", tmp_path / "o.csv")

    def test_400_without_fixture_is_query_rejected(self, tmp_path, monkeypatch):
        monkeypatch.setattr(
            requests, "post", lambda *a, **k: _FakeResponse(status_code=400)
        )
        with pytest.raises(QueryRejected):
            fetch_roster("http://endpoint.test/sparql", "SELECT 1", tmp_path / "o.csv")

    def test_connection_error_with_fixture_falls_back(self, tmp_path, monkeypatch):
        def boom(*a, **k):
            raise requests.ConnectionError("refused")

        monkeypatch.setattr(requests, "post", boom)
        fixture = tmp_path / "fixture.csv"
        fixture.write_text(FIXTURE_CSV)
        out = tmp_path / "export.csv"
        fetch_roster("http://endpoint.test/sparql", "SELECT 1", out, fixture=fixture)
        assert out.read_bytes() == fixture.read_bytes()

    def test_success_converts_bindings_to_export(self, tmp_path, monkeypatch):
        payload = {
            "results": {
                "bindings": [
                    {
                        "itemLabel": {"value": "Ada Lovelace"},
                        "dob": {"value": "1815-12-10T00:00:00Z"},
                        "ethnicLabel": {"value": "British"},
                        "occupation": {"value": "mathematician"},
                    }
                ]
            }
        }
        monkeypatch.setattr(
            requests, "post", lambda *a, **k: _FakeResponse(payload=payload)
        )
        out = tmp_path / "export.csv"
        fetch_roster("http://endpoint.test/sparql", "SELECT 1", out)
        parsed = parse_roster_export(out)
        assert parsed.persons[0].full_name == "Ada Lovelace"
        assert parsed.persons[0].birth_year == 1815
