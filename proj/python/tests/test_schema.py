import json
import pathlib

import pytest

jsonschema = pytest.importorskip("jsonschema")

ROOT = pathlib.Path(__file__).resolve().parents[2]
SCHEMA = json.loads((ROOT / "schema" / "run_config.schema.json").read_text())


@pytest.mark.parametrize("path", sorted((ROOT / "tests" / "data").glob("*.json")), ids=lambda p: p.stem)
def test_bundled_configs_validate(path):
    jsonschema.validate(json.loads(path.read_text()), SCHEMA)


def test_schema_rejects_unknown_keys():
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate({"model": {"name": "normal"}, "extra": 1}, SCHEMA)
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate({"model": {"name": "normal"}, "event": {"a": 1, "probability": 0.1}}, SCHEMA)
