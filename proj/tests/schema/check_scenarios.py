"""Validates scenario files against docs/scenario.schema.json."""
import json
import sys

import jsonschema


def main(argv):
    schema = json.load(open(argv[1]))
    validator = jsonschema.Draft202012Validator(schema)
    bad = 0
    for path in argv[2:]:
        for err in validator.iter_errors(json.load(open(path))):
            where = "/".join(str(p) for p in err.absolute_path)
            print(f"{path}: {where}: {err.message}")
            bad += 1
    print(f"{len(argv) - 2} scenarios, {bad} schema errors")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
