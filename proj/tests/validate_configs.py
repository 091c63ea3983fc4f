"""Validate the shipped configs against the published schema, and check that
the schema rejects an unknown key."""
import json
import pathlib
import sys

import jsonschema
import yaml

root = pathlib.Path(sys.argv[1])
schema = json.loads((root / "schema" / "experiment.schema.json").read_text())
validator = jsonschema.Draft202012Validator(schema)
for path in sorted((root / "configs").glob("*.yaml")):
    validator.validate(yaml.safe_load(path.read_text()) or {})
    print("ok", path.name)
if validator.is_valid({"map": {"hieght": 1}}):
    sys.exit("schema accepted an unknown key")
