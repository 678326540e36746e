"""Bundled two-cluster toy instance used by tests and the `fixture` subcommand.

Six objects split into two clusters of three, four tags. TAG1 covers all of
cluster 1 and TAG3 all of cluster 2, so the minimum full-coverage solution
uses exactly those two tags; TAG2 spans both clusters, TAG4 is specific to
one object.
"""

from __future__ import annotations

import json

from .instance import Instance, load_instance

TOY_DOC = {
    "k": 2,
    "tags": ["TAG1", "TAG2", "TAG3", "TAG4"],
    "objects": [
        {"id": "s1", "cluster": 1, "tags": ["TAG1", "TAG2"]},
        {"id": "s2", "cluster": 1, "tags": ["TAG1"]},
        {"id": "s3", "cluster": 1, "tags": ["TAG1"]},
        {"id": "s4", "cluster": 2, "tags": ["TAG2", "TAG3", "TAG4"]},
        {"id": "s5", "cluster": 2, "tags": ["TAG3"]},
        {"id": "s6", "cluster": 2, "tags": ["TAG3"]},
    ],
}


def toy_json() -> str:
    return json.dumps(TOY_DOC, indent=2) + "\n"


def toy_instance() -> Instance:
    return load_instance(toy_json(), "json")
