import json
from pathlib import Path

import pytest

jsonschema = pytest.importorskip("jsonschema")

from audit_harness import contest_doc, manifest_doc, polling_config

SCHEMA_DIR = Path(__file__).resolve().parent.parent / "schemas"


def load_schema(name):
    return json.loads((SCHEMA_DIR / name).read_text())


def validator_for(name):
    from referencing import Registry, Resource

    resources = []
    for p in SCHEMA_DIR.glob("*.schema.json"):
        doc = json.loads(p.read_text())
        resource = Resource.from_contents(doc)
        resources.append((p.name, resource))
        resources.append((doc["$id"], resource))
    registry = Registry().with_resources(resources)
    schema = load_schema(name)
    return jsonschema.Draft202012Validator(schema, registry=registry)


class TestSchemas:
    def test_manifest_doc_validates(self):
        validator_for("manifest.schema.json").validate(manifest_doc("c1", 254))

    def test_contest_doc_validates(self):
        validator_for("contest.schema.json").validate(contest_doc())

    def test_config_doc_validates(self):
        validator_for("config.schema.json").validate(polling_config())

    def test_cvr_doc_validates(self):
        doc = {
            "collection": "c1",
            "records": [
                {"address": "c1/B1/1", "votes": {"race": "A"}, "imprintedId": "z1"}
            ],
        }
        validator_for("cvrs.schema.json").validate(doc)

    def test_entries_doc_validates(self):
        doc = {"entries": [{"address": "c1/B1/1", "actual": {"race": "A"}}]}
        validator_for("entries.schema.json").validate(doc)

    def test_schema_rejects_malformed_manifest(self):
        v = validator_for("manifest.schema.json")
        with pytest.raises(jsonschema.ValidationError):
            v.validate({"collection": "c1", "containers": [{"label": "B1"}]})
