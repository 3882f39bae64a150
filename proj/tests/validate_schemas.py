import json
import pathlib
import sys

import jsonschema

docs = pathlib.Path(sys.argv[1])
fixtures = pathlib.Path(sys.argv[2])
pairs = [
    ("annotation.schema.json", "ui_export_annotations.json"),
    ("sequence_manifest.schema.json", "ui_sequence/manifest.json"),
]
for schema_name, fixture_name in pairs:
    schema = json.loads((docs / schema_name).read_text())
    jsonschema.Draft7Validator.check_schema(schema)
    jsonschema.validate(json.loads((fixtures / fixture_name).read_text()), schema)
    print(f"{fixture_name}: valid against {schema_name}")
