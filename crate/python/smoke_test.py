"""Smoke test for the Python bindings.

Build and install first, e.g.  pip install maturin && maturin develop -m crates/py/Cargo.toml
"""

import json
import sys

import tracelens


def main():
    trace = tracelens.EventTrace.example()
    model = tracelens.SystemModel.example()
    assert len(trace) == 37

    basic = tracelens.slice(trace, model, 37)
    assert basic.members == [1, 5, 6, 7, 13, 15, 17, 24, 28, 30, 31, 32, 33, 36, 37], basic.members
    assert 24 in basic and 2 not in basic

    ce = tracelens.slice(trace, model, 37, mode="cause-effect")
    assert ce.members == [1, 7, 13, 33, 36, 37], ce.members
    assert ("CE", "LSRU", 36, 37) in ce.edges
    assert json.loads(ce.to_json())["members"] == ce.members
    assert ce.to_dot(trace).startswith("digraph slice {")

    deps = tracelens.dependencies(trace, model, 37, mode="cause-effect")
    assert ("COS", None, 33, 37) in deps

    again = tracelens.EventTrace.parse(trace.to_tsv(), "tsv")
    assert again.events() == trace.events()
    assert model.validate(trace) == []

    try:
        tracelens.slice(trace, model, 99)
    except IndexError:
        pass
    else:
        raise AssertionError("out-of-range start accepted")

    print(f"ok: basic slice {len(basic)} events, cause-effect slice {len(ce)} events")


if __name__ == "__main__":
    sys.exit(main())
